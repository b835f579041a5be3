//! Layered random-access structure over a block-restructured grammar.
//!
//! Layer 1 decomposes the input grammar with parameter X_1; each further
//! layer treats the blocks below as indivisible leaves and decomposes again
//! with a larger parameter. Only the layer-1 basic blocks are stored as
//! explicit strings. A query walks one window table per layer, scanning a
//! bounded run of consecutive blocks at each, so the work per query is
//! independent of both the string length and the grammar height.

use std::fmt;

use crate::restructure::{decompose_grammar, LayerGrammar};
use crate::slp::{QueryError, Slp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParamError {
    Empty,
    NotIncreasing { prev: usize, next: usize },
    TooSmall { x: usize, min: usize },
}

impl fmt::Display for ParamError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamError::Empty => write!(f, "need at least one layer parameter"),
            ParamError::NotIncreasing { prev, next } => {
                write!(
                    f,
                    "layer parameters must strictly increase, got {prev} then {next}"
                )
            }
            ParamError::TooSmall { x, min } => {
                write!(f, "layer parameter {x} below the minimum {min}")
            }
        }
    }
}

impl std::error::Error for ParamError {}

/// Strictly increasing block-length parameters X_1 < ... < X_k. A single
/// layer accepts any X_1 >= 2; with multiple layers every X_i must exceed 5.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerParams {
    xs: Vec<usize>,
}

impl LayerParams {
    pub fn new(xs: Vec<usize>) -> Result<Self, ParamError> {
        if xs.is_empty() {
            return Err(ParamError::Empty);
        }
        let min = if xs.len() == 1 { 2 } else { 6 };
        for &x in &xs {
            if x < min {
                return Err(ParamError::TooSmall { x, min });
            }
        }
        for w in xs.windows(2) {
            if w[1] <= w[0] {
                return Err(ParamError::NotIncreasing {
                    prev: w[0],
                    next: w[1],
                });
            }
        }
        Ok(LayerParams { xs })
    }

    /// Two geometric layers sized for a string of `n_chars` characters.
    pub fn default_for(n_chars: usize) -> Self {
        let x1 = ((n_chars as f64).powf(1.0 / 3.0).ceil() as usize).max(8);
        let x2 = ((n_chars as f64).powf(2.0 / 3.0).ceil() as usize).max(8 * x1);
        LayerParams { xs: vec![x1, x2] }
    }

    pub fn xs(&self) -> &[usize] {
        &self.xs
    }

    pub fn layer_count(&self) -> usize {
        self.xs.len()
    }
}

/// Local decomposition of one basic block into blocks of the layer below.
#[derive(Debug, Clone)]
pub(crate) struct InnerBlock {
    /// Basic ids of the layer below, in order.
    pub local_basics: Vec<u32>,
    /// Character offsets; last entry is the block length. Desk-scale
    /// indexes keep these at 32 bits.
    pub local_starts: Vec<u32>,
    /// Per window of the lower layer's granularity: (first local index,
    /// offset of the window start inside it).
    pub window: Vec<(u32, u32)>,
}

/// Summary of one layer's decomposition.
#[derive(Debug, Clone)]
pub struct LayerStats {
    pub x: usize,
    pub blocks: usize,
    pub distinct: usize,
    pub k_max: usize,
    pub inner_k_max: usize,
    pub added_rules: usize,
    pub grammar_rules: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Layer {
    pub stats: LayerStats,
    pub basic_lens: Vec<usize>,
    /// Present for every layer above the first.
    pub inner: Option<Vec<InnerBlock>>,
}

/// K nested block decompositions with explicit strings at the deepest layer.
#[derive(Debug, Clone)]
pub struct LayeredIndex {
    params: LayerParams,
    n_chars: usize,
    pub(crate) layers: Vec<Layer>,
    /// Top-layer block sequence as basic ids.
    pub(crate) top_basics: Vec<u32>,
    pub(crate) top_starts: Vec<u32>,
    pub(crate) top_window: Vec<(u32, u32)>,
    /// Explicit strings of the layer-1 basic blocks.
    pub(crate) leaf_strings: Vec<Vec<u32>>,
}

/// Per-component byte accounting; `total` is the sum of all parts.
#[derive(Debug, Clone)]
pub struct SpaceReport {
    pub leaf_strings_bytes: usize,
    /// One entry per layer: that layer's table bytes.
    pub layer_table_bytes: Vec<usize>,
    pub grammar_bytes: usize,
    pub total: usize,
}

const BYTES_PER_CHAR: usize = 4;
const BYTES_PER_RULE: usize = 16;
const BYTES_PER_WINDOW_ENTRY: usize = 8;
const BYTES_PER_START: usize = 4;
const BYTES_PER_BLOCK_REF: usize = 4;

impl LayeredIndex {
    /// Builds the layered structure. With `k = 1` this is exactly the basic
    /// structure: one decomposition, explicit basic-block strings, and one
    /// window table over the whole string.
    pub fn build(slp: &Slp, params: LayerParams) -> Self {
        assert!(
            slp.text_len() < u32::MAX as usize,
            "index offsets are 32-bit"
        );
        let mut grammar = LayerGrammar::from_slp(slp);
        let mut decs = Vec::with_capacity(params.layer_count());
        for &x in params.xs() {
            let dec = decompose_grammar(&grammar, x);
            grammar = dec.next.clone();
            decs.push(dec);
        }

        let n_chars = slp.text_len();
        let mut layers = Vec::with_capacity(decs.len());
        let mut leaf_strings = Vec::new();
        for (li, dec) in decs.iter().enumerate() {
            let basic_lens: Vec<usize> = dec
                .basic_syms
                .iter()
                .map(|&b| dec.grammar.len_of(b))
                .collect();
            let mut inner_k_max = 0usize;
            let inner = if li == 0 {
                leaf_strings = dec
                    .basic_syms
                    .iter()
                    .map(|&b| dec.grammar.expand_chars(b))
                    .collect();
                None
            } else {
                let gran = params.xs()[li - 1];
                let blocks = dec
                    .basic_syms
                    .iter()
                    .map(|&b| {
                        let ib = build_inner_block(dec, b, gran);
                        let k = inner_run_max(&ib, gran);
                        inner_k_max = inner_k_max.max(k);
                        ib
                    })
                    .collect();
                Some(blocks)
            };
            layers.push(Layer {
                stats: LayerStats {
                    x: dec.x,
                    blocks: dec.block_count(),
                    distinct: dec.distinct_count(),
                    k_max: dec.k_max,
                    inner_k_max,
                    added_rules: dec.added_rules(),
                    grammar_rules: dec.grammar.nodes.len(),
                },
                basic_lens,
                inner,
            });
        }

        let top = decs.last().expect("at least one layer");
        LayeredIndex {
            params,
            n_chars,
            layers,
            top_basics: top.block_basics.clone(),
            top_starts: top.block_starts.iter().map(|&s| s as u32).collect(),
            top_window: top.window.clone(),
            leaf_strings,
        }
    }

    /// Reassembles an index from persisted parts.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn from_parts(
        params: LayerParams,
        n_chars: usize,
        layers: Vec<Layer>,
        top_basics: Vec<u32>,
        top_starts: Vec<u32>,
        top_window: Vec<(u32, u32)>,
        leaf_strings: Vec<Vec<u32>>,
    ) -> Self {
        LayeredIndex {
            params,
            n_chars,
            layers,
            top_basics,
            top_starts,
            top_window,
            leaf_strings,
        }
    }

    pub fn params(&self) -> &LayerParams {
        &self.params
    }

    pub fn text_len(&self) -> usize {
        self.n_chars
    }

    pub fn layer_count(&self) -> usize {
        self.params.layer_count()
    }

    pub fn layer_stats(&self) -> Vec<LayerStats> {
        self.layers.iter().map(|l| l.stats.clone()).collect()
    }

    pub fn top_window_len(&self) -> usize {
        self.top_window.len()
    }

    pub fn top_block_count(&self) -> usize {
        self.top_basics.len()
    }

    pub fn leaf_string(&self, basic: usize) -> &[u32] {
        &self.leaf_strings[basic]
    }

    pub fn leaf_string_count(&self) -> usize {
        self.leaf_strings.len()
    }

    /// Character at position `i`.
    pub fn access(&self, i: usize) -> Result<u32, QueryError> {
        self.access_instrumented(i).map(|(c, _)| c)
    }

    /// Character at `i` plus the number of blocks examined at each layer,
    /// top layer first.
    pub fn access_instrumented(&self, i: usize) -> Result<(u32, Vec<u32>), QueryError> {
        if i >= self.n_chars {
            return Err(QueryError::OutOfRange {
                pos: i,
                len: self.n_chars,
            });
        }
        let k = self.layer_count();
        let mut hops = Vec::with_capacity(k);

        let x_top = self.params.xs()[k - 1];
        let mut r = self.top_window[i / x_top].0 as usize;
        let mut scanned = 1u32;
        while (self.top_starts[r + 1] as usize) <= i {
            r += 1;
            scanned += 1;
        }
        hops.push(scanned);
        let mut basic = self.top_basics[r] as usize;
        let mut off = i - self.top_starts[r] as usize;

        for li in (1..k).rev() {
            let gran = self.params.xs()[li - 1];
            let ib = &self.layers[li]
                .inner
                .as_ref()
                .expect("upper layers store inner tables")[basic];
            let mut rr = ib.window[off / gran].0 as usize;
            let mut scanned = 1u32;
            while (ib.local_starts[rr + 1] as usize) <= off {
                rr += 1;
                scanned += 1;
            }
            hops.push(scanned);
            basic = ib.local_basics[rr] as usize;
            off -= ib.local_starts[rr] as usize;
        }

        Ok((self.leaf_strings[basic][off], hops))
    }

    /// Characters `i..=j`, inclusive on both ends.
    pub fn extract(&self, i: usize, j: usize) -> Result<Vec<u32>, QueryError> {
        if i > j || j >= self.n_chars {
            return Err(QueryError::OutOfRange {
                pos: j,
                len: self.n_chars,
            });
        }
        (i..=j).map(|p| self.access(p)).collect()
    }

    /// Expansion of one basic block at the given 0-based layer index.
    pub(crate) fn expand_basic(&self, layer_idx: usize, basic: u32) -> Vec<u32> {
        if layer_idx == 0 {
            return self.leaf_strings[basic as usize].clone();
        }
        let ib = &self.layers[layer_idx].inner.as_ref().unwrap()[basic as usize];
        let mut out = Vec::with_capacity(self.layers[layer_idx].basic_lens[basic as usize]);
        for &lower in &ib.local_basics {
            out.extend(self.expand_basic(layer_idx - 1, lower));
        }
        out
    }

    /// Byte accounting per component.
    pub fn space_report(&self) -> SpaceReport {
        let leaf_strings_bytes: usize = self
            .leaf_strings
            .iter()
            .map(|s| s.len() * BYTES_PER_CHAR)
            .sum();
        let k = self.layer_count();
        let mut layer_table_bytes = vec![0usize; k];
        layer_table_bytes[k - 1] += self.top_window.len() * BYTES_PER_WINDOW_ENTRY
            + self.top_starts.len() * BYTES_PER_START
            + self.top_basics.len() * BYTES_PER_BLOCK_REF;
        for (li, layer) in self.layers.iter().enumerate() {
            if let Some(inner) = &layer.inner {
                for ib in inner {
                    layer_table_bytes[li] += ib.window.len() * BYTES_PER_WINDOW_ENTRY
                        + ib.local_starts.len() * BYTES_PER_START
                        + ib.local_basics.len() * BYTES_PER_BLOCK_REF;
                }
            }
        }
        let grammar_bytes: usize = self
            .layers
            .iter()
            .map(|l| l.stats.grammar_rules * BYTES_PER_RULE)
            .sum();
        let total = leaf_strings_bytes + layer_table_bytes.iter().sum::<usize>() + grammar_bytes;
        SpaceReport {
            leaf_strings_bytes,
            layer_table_bytes,
            grammar_bytes,
            total,
        }
    }
}

fn build_inner_block(
    dec: &crate::restructure::LayerDecomposition,
    block_sym: u32,
    gran: usize,
) -> InnerBlock {
    let leaves = dec.grammar.leaf_sequence(block_sym);
    let mut local_basics = Vec::with_capacity(leaves.len());
    let mut local_starts: Vec<u32> = Vec::with_capacity(leaves.len() + 1);
    local_starts.push(0);
    let mut acc = 0usize;
    for leaf in leaves {
        let basic = match dec.grammar.nodes[leaf as usize] {
            crate::restructure::LgNode::Leaf(crate::restructure::LgLeaf::BlockRef(b)) => b,
            _ => unreachable!("upper-layer grammars only have block leaves"),
        };
        acc += dec.grammar.len_of(leaf);
        local_basics.push(basic);
        local_starts.push(acc as u32);
    }
    let len = acc;
    let mut window = Vec::with_capacity(len.div_ceil(gran));
    let mut r = 0usize;
    for w in 0..len.div_ceil(gran) {
        let start = w * gran;
        while (local_starts[r + 1] as usize) <= start {
            r += 1;
        }
        window.push((r as u32, (start - local_starts[r] as usize) as u32));
    }
    InnerBlock {
        local_basics,
        local_starts,
        window,
    }
}

fn inner_run_max(ib: &InnerBlock, gran: usize) -> usize {
    let len = *ib.local_starts.last().unwrap() as usize;
    let mut k_max = 0usize;
    let mut r_end = 0usize;
    for (w, &(r, _)) in ib.window.iter().enumerate() {
        let last = ((w + 1) * gran).min(len) - 1;
        r_end = r_end.max(r as usize);
        while (ib.local_starts[r_end + 1] as usize) <= last {
            r_end += 1;
        }
        k_max = k_max.max(r_end - r as usize + 1);
    }
    k_max
}
