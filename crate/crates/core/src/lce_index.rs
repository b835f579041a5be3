//! LCE queries over the layered block index.
//!
//! The string is sampled by a difference cover: positions whose residue
//! modulo tau_k lies in the cover feed one sparse LCE structure over the
//! whole string. A query on unsampled positions is aligned to the sample
//! set by a shift of at most tau_k; the shifted-away prefix is compared
//! block by block, where each within-block comparison recurses one layer
//! down against that layer's own sampled structure, bottoming out in a full
//! LCE over the concatenated layer-1 basic-block strings. Unique separator
//! codes between concatenated blocks guarantee no comparison ever crosses a
//! block boundary by accident.

use std::fmt;
use std::ops::RangeInclusive;

use crate::block_index::LayeredIndex;
use crate::diffcover::DifferenceCover;
use crate::lce_core::{FullLce, SparseLce};
use crate::slp::QueryError;

/// Which difference cover samples the block-local offsets of layer i > 1.
/// The space accounting pairs layer i with the cover for X_{i-1}; the
/// alternative keyed on X_i is available but not the default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerModulus {
    #[default]
    BelowLayer,
    OwnLayer,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LceConfig {
    pub inner_modulus: InnerModulus,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CompareError {
    /// A cursor ran off the final block before the bound or a mismatch.
    CursorExhausted,
    OutOfRange {
        pos: usize,
        len: usize,
    },
}

impl fmt::Display for CompareError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CompareError::CursorExhausted => write!(f, "cursor ran past the final block"),
            CompareError::OutOfRange { pos, len } => {
                write!(f, "position {pos} out of range for length {len}")
            }
        }
    }
}

impl std::error::Error for CompareError {}

/// One alignment step of a query, for instrumentation.
#[derive(Debug, Clone, Copy)]
pub struct AlignEvent {
    /// 1-based layer at which the alignment happened; `layer_count` is the
    /// whole-string level.
    pub layer: usize,
    pub tau: usize,
    /// Shift applied to land both positions on sampled ones.
    pub shift: usize,
    /// Characters matched by the block-descent prefix comparison.
    pub prefix_matched: usize,
    /// Whether the aligned sparse query was issued afterwards.
    pub sparse_used: bool,
}

#[derive(Debug, Clone, Default)]
pub struct LceTrace {
    pub events: Vec<AlignEvent>,
}

/// Byte accounting for the LCE structures on top of the access structure.
#[derive(Debug, Clone)]
pub struct LceSpaceReport {
    pub base: crate::block_index::SpaceReport,
    pub top_sparse_bytes: usize,
    /// One bucket per layer above the first.
    pub layer_sparse_bytes: Vec<usize>,
    pub leaf_full_bytes: usize,
    pub total: usize,
}

/// Position in the top-layer block sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCursor {
    /// 1-based layer of the run; public cursors live at the top layer.
    pub layer: usize,
    /// The covering run this cursor was created from.
    pub run: RangeInclusive<usize>,
    /// Current block index in the top sequence.
    pub block: usize,
    /// Offset inside the current block.
    pub offset: usize,
    /// Absolute string position; always block start + offset.
    pub position: usize,
}

struct LayerSparse {
    sparse: SparseLce,
    /// Per basic id: (start, len) of its string in the concatenation.
    spans: Vec<(usize, usize)>,
    tau: usize,
}

/// Sparse LCE per layer plus a full LCE over the deepest-layer blocks.
pub struct LceIndex {
    base: LayeredIndex,
    config: LceConfig,
    /// Cover for the whole-string sampling, modulo tau(X_k).
    top_cover: DifferenceCover,
    top_sparse: SparseLce,
    /// Covers per layer parameter, for block-local sampling.
    local_covers: Vec<DifferenceCover>,
    /// Index 0 holds layer 2's structure (over layer-2 basic blocks).
    layer_sparse: Vec<LayerSparse>,
    leaf_full: FullLce,
    /// Per layer-1 basic id: (start, len) in the leaf concatenation.
    leaf_spans: Vec<(usize, usize)>,
}

/// Smallest perfect square cover modulus for a layer parameter: the floor
/// square stays at or below x whenever x >= 4.
fn tau_for(x: usize) -> usize {
    let s = x.isqrt().max(2);
    s * s
}

fn concat_with_separators(strings: &[Vec<u32>], sep_base: u64) -> (Vec<u64>, Vec<(usize, usize)>) {
    let total: usize = strings.iter().map(|s| s.len()).sum();
    let mut text = Vec::with_capacity(total + strings.len());
    let mut spans = Vec::with_capacity(strings.len());
    for (idx, s) in strings.iter().enumerate() {
        if idx > 0 {
            text.push(sep_base + idx as u64 - 1);
        }
        spans.push((text.len(), s.len()));
        text.extend(s.iter().map(|&c| c as u64));
    }
    (text, spans)
}

impl LceIndex {
    pub fn build(base: LayeredIndex) -> Self {
        Self::build_with(base, LceConfig::default())
    }

    pub fn build_with(base: LayeredIndex, config: LceConfig) -> Self {
        let k = base.layer_count();
        let xs = base.params().xs().to_vec();
        let local_covers: Vec<DifferenceCover> = xs
            .iter()
            .map(|&x| DifferenceCover::build(tau_for(x)).expect("tau_for yields a valid square"))
            .collect();
        let top_cover = local_covers[k - 1].clone();

        // One separator code per junction, beyond every input character.
        let max_char = base
            .leaf_strings
            .iter()
            .flat_map(|s| s.iter().copied())
            .max()
            .unwrap_or(0) as u64;
        let sep_base = max_char + 1;

        // Whole string and its sampled positions.
        let text: Vec<u64> = (0..base.top_block_count())
            .flat_map(|r| base.expand_basic(k - 1, base.top_basics[r]))
            .map(u64::from)
            .collect();
        debug_assert_eq!(text.len(), base.text_len());
        let sampled: Vec<usize> = (0..text.len())
            .filter(|&p| top_cover.is_sampled(p))
            .collect();
        let top_sparse = SparseLce::build(&text, &sampled).expect("position 0 is always sampled");

        // Per-layer sparse structures over concatenated basic blocks.
        let mut layer_sparse = Vec::new();
        for li in 1..k {
            let cover = match config.inner_modulus {
                InnerModulus::BelowLayer => &local_covers[li - 1],
                InnerModulus::OwnLayer => &local_covers[li],
            };
            let strings: Vec<Vec<u32>> = (0..base.layers[li].basic_lens.len())
                .map(|b| base.expand_basic(li, b as u32))
                .collect();
            let (concat, spans) = concat_with_separators(&strings, sep_base);
            let positions: Vec<usize> = spans
                .iter()
                .flat_map(|&(start, len)| {
                    (0..len)
                        .filter(|&o| cover.is_sampled(o))
                        .map(move |o| start + o)
                })
                .collect();
            let sparse =
                SparseLce::build(&concat, &positions).expect("every block samples its offset 0");
            layer_sparse.push(LayerSparse {
                sparse,
                spans,
                tau: cover.tau(),
            });
        }

        // Full LCE over the deepest layer.
        let (leaf_concat, leaf_spans) = concat_with_separators(&base.leaf_strings, sep_base);
        let leaf_full = FullLce::build(&leaf_concat).expect("leaf strings are nonempty");

        LceIndex {
            base,
            config,
            top_cover,
            top_sparse,
            local_covers,
            layer_sparse,
            leaf_full,
            leaf_spans,
        }
    }

    /// Reassembles the index from persisted arrays. Span offsets and covers
    /// are pure arithmetic over the stored block lengths, so only the sparse
    /// orders and LCP arrays need to have been kept.
    pub(crate) fn from_parts(
        base: LayeredIndex,
        config: LceConfig,
        top_sparse: SparseLce,
        layer_sparse_raw: Vec<(SparseLce, usize)>,
        leaf_full: FullLce,
    ) -> Result<Self, String> {
        let k = base.layer_count();
        if layer_sparse_raw.len() != k - 1 {
            return Err(format!(
                "expected {} layer structures, found {}",
                k - 1,
                layer_sparse_raw.len()
            ));
        }
        let local_covers: Vec<DifferenceCover> = base
            .params()
            .xs()
            .iter()
            .map(|&x| DifferenceCover::build(tau_for(x)).expect("tau_for yields a valid square"))
            .collect();
        let top_cover = local_covers[k - 1].clone();
        let spans_of = |lens: &[usize]| -> Vec<(usize, usize)> {
            let mut spans = Vec::with_capacity(lens.len());
            let mut at = 0usize;
            for (idx, &len) in lens.iter().enumerate() {
                if idx > 0 {
                    at += 1; // separator
                }
                spans.push((at, len));
                at += len;
            }
            spans
        };
        let layer_sparse = layer_sparse_raw
            .into_iter()
            .enumerate()
            .map(|(idx, (sparse, tau))| {
                let li = idx + 1;
                LayerSparse {
                    sparse,
                    spans: spans_of(&base.layers[li].basic_lens),
                    tau,
                }
            })
            .collect();
        let leaf_lens: Vec<usize> = base.leaf_strings.iter().map(|s| s.len()).collect();
        let leaf_spans = spans_of(&leaf_lens);
        Ok(LceIndex {
            base,
            config,
            top_cover,
            top_sparse,
            local_covers,
            layer_sparse,
            leaf_full,
            leaf_spans,
        })
    }

    pub(crate) fn top_sparse(&self) -> &SparseLce {
        &self.top_sparse
    }

    pub(crate) fn layer_sparse_parts(&self, idx: usize) -> (&SparseLce, usize) {
        let ls = &self.layer_sparse[idx];
        (&ls.sparse, ls.tau)
    }

    pub(crate) fn leaf_full(&self) -> &FullLce {
        &self.leaf_full
    }

    pub fn base(&self) -> &LayeredIndex {
        &self.base
    }

    pub fn config(&self) -> LceConfig {
        self.config
    }

    pub fn text_len(&self) -> usize {
        self.base.text_len()
    }

    pub fn top_tau(&self) -> usize {
        self.top_cover.tau()
    }

    /// Sampled positions of the whole-string structure.
    pub fn top_sampled_count(&self) -> usize {
        self.top_sparse.sampled_count()
    }

    pub fn is_top_sampled(&self, pos: usize) -> bool {
        self.top_cover.is_sampled(pos)
    }

    /// Number of per-layer sparse structures (layers above the first).
    pub fn layer_sparse_count(&self) -> usize {
        self.layer_sparse.len()
    }

    pub fn leaf_full_text_len(&self) -> usize {
        self.leaf_full.text_len()
    }

    /// Byte accounting: the access structure's buckets plus the sampled
    /// whole-string structure, one bucket per upper layer, and the full
    /// structure over the deepest-layer concatenation.
    pub fn space_report(&self) -> LceSpaceReport {
        let base = self.base.space_report();
        let top_sparse_bytes = self.top_sparse.structure_bytes();
        let layer_sparse_bytes: Vec<usize> = self
            .layer_sparse
            .iter()
            .map(|ls| ls.sparse.structure_bytes())
            .collect();
        let leaf_full_bytes = self.leaf_full.structure_bytes();
        let total = base.total
            + top_sparse_bytes
            + layer_sparse_bytes.iter().sum::<usize>()
            + leaf_full_bytes;
        LceSpaceReport {
            base,
            top_sparse_bytes,
            layer_sparse_bytes,
            leaf_full_bytes,
            total,
        }
    }

    /// Longest common extension of the suffixes at `i` and `j`.
    pub fn lce(&self, i: usize, j: usize) -> Result<usize, QueryError> {
        let mut trace = LceTrace::default();
        self.lce_impl(i, j, &mut trace)
    }

    /// As [`lce`](Self::lce), also returning per-level alignment events.
    pub fn lce_instrumented(&self, i: usize, j: usize) -> Result<(usize, LceTrace), QueryError> {
        let mut trace = LceTrace::default();
        let len = self.lce_impl(i, j, &mut trace)?;
        Ok((len, trace))
    }

    fn lce_impl(&self, i: usize, j: usize, trace: &mut LceTrace) -> Result<usize, QueryError> {
        let n = self.text_len();
        if i >= n || j >= n {
            return Err(QueryError::OutOfRange {
                pos: i.max(j),
                len: n,
            });
        }
        if i == j {
            return Ok(n - i);
        }
        let k = self.base.layer_count();
        if self.top_cover.is_sampled(i) && self.top_cover.is_sampled(j) {
            return Ok(self
                .top_sparse
                .lce(i, j)
                .expect("sampled positions are in the structure"));
        }
        let (ip, jp) = self.top_cover.align(i, j);
        let shift = ip - i;
        if ip >= n || jp >= n {
            // No aligned pair inside the string; the remaining comparison is
            // at most tau long, so block descent settles it entirely.
            let bound = n - i.max(j);
            let matched = self.compare_top(i, j, bound, trace);
            trace.events.push(AlignEvent {
                layer: k,
                tau: self.top_cover.tau(),
                shift,
                prefix_matched: matched,
                sparse_used: false,
            });
            return Ok(matched);
        }
        let matched = self.compare_top(i, j, shift, trace);
        let event = AlignEvent {
            layer: k,
            tau: self.top_cover.tau(),
            shift,
            prefix_matched: matched,
            sparse_used: matched >= shift,
        };
        trace.events.push(event);
        if matched < shift {
            return Ok(matched);
        }
        let rest = self
            .top_sparse
            .lce(ip, jp)
            .expect("aligned positions are sampled");
        Ok(shift + rest)
    }

    fn top_locate(&self, i: usize) -> (usize, usize) {
        let k = self.base.layer_count();
        let x_top = self.base.params().xs()[k - 1];
        let mut r = self.base.top_window[i / x_top].0 as usize;
        while (self.base.top_starts[r + 1] as usize) <= i {
            r += 1;
        }
        (r, i - self.base.top_starts[r] as usize)
    }

    /// Prefix comparison of `S[i..]` and `S[j..]` bounded by `bound`, walking
    /// top-layer blocks. The caller guarantees `bound <= N - max(i, j)`.
    fn compare_top(&self, i: usize, j: usize, bound: usize, trace: &mut LceTrace) -> usize {
        let (ra, oa) = self.top_locate(i);
        let (rb, ob) = self.top_locate(j);
        let run = RunView {
            basics: &self.base.top_basics,
            starts: &self.base.top_starts,
        };
        self.compare_runs(
            self.base.layer_count() - 1,
            Walk {
                view: run,
                cur: Cursor { r: ra, off: oa },
            },
            Walk {
                view: run,
                cur: Cursor { r: rb, off: ob },
            },
            bound,
            trace,
        )
        .expect("bound never exceeds the remaining string")
    }

    fn compare_runs(
        &self,
        layer_idx: usize,
        mut a: Walk<'_>,
        mut b: Walk<'_>,
        bound: usize,
        trace: &mut LceTrace,
    ) -> Result<usize, CompareError> {
        let mut matched = 0usize;
        while matched < bound {
            if a.cur.r >= a.view.basics.len() || b.cur.r >= b.view.basics.len() {
                return Err(CompareError::CursorExhausted);
            }
            let len_a = (a.view.starts[a.cur.r + 1] - a.view.starts[a.cur.r]) as usize;
            let len_b = (b.view.starts[b.cur.r + 1] - b.view.starts[b.cur.r]) as usize;
            let rem_a = len_a - a.cur.off;
            let rem_b = len_b - b.cur.off;
            let step_bound = (bound - matched).min(rem_a).min(rem_b);
            let step = self.compare_within(
                layer_idx,
                BlockPos {
                    block: a.view.basics[a.cur.r],
                    off: a.cur.off,
                },
                BlockPos {
                    block: b.view.basics[b.cur.r],
                    off: b.cur.off,
                },
                step_bound,
                trace,
            );
            matched += step;
            if step < step_bound {
                return Ok(matched);
            }
            // Roll either cursor past a finished block and keep going.
            a.cur.off += step;
            if a.cur.off == len_a {
                a.cur.r += 1;
                a.cur.off = 0;
            }
            b.cur.off += step;
            if b.cur.off == len_b {
                b.cur.r += 1;
                b.cur.off = 0;
            }
        }
        Ok(matched)
    }

    /// LCE of two in-block suffixes, clamped to `bound`, where `bound` never
    /// exceeds either block's remaining length. `layer_idx` is 0-based.
    fn compare_within(
        &self,
        layer_idx: usize,
        a: BlockPos,
        b: BlockPos,
        bound: usize,
        trace: &mut LceTrace,
    ) -> usize {
        debug_assert!(bound >= 1);
        if layer_idx == 0 {
            let pa = self.leaf_spans[a.block as usize].0 + a.off;
            let pb = self.leaf_spans[b.block as usize].0 + b.off;
            let l = self
                .leaf_full
                .lce(pa, pb)
                .expect("leaf positions are in range");
            return l.min(bound);
        }

        let ls = &self.layer_sparse[layer_idx - 1];
        let cover = match self.config.inner_modulus {
            InnerModulus::BelowLayer => &self.local_covers[layer_idx - 1],
            InnerModulus::OwnLayer => &self.local_covers[layer_idx],
        };
        if cover.is_sampled(a.off) && cover.is_sampled(b.off) {
            let l = ls
                .sparse
                .lce(
                    ls.spans[a.block as usize].0 + a.off,
                    ls.spans[b.block as usize].0 + b.off,
                )
                .expect("sampled offsets are in the structure");
            return l.min(bound);
        }
        let (oap, _) = cover.align(a.off, b.off);
        let shift = oap - a.off;
        if shift >= bound {
            let matched = self.compare_inner(layer_idx, a, b, bound, trace);
            trace.events.push(AlignEvent {
                layer: layer_idx + 1,
                tau: cover.tau(),
                shift,
                prefix_matched: matched,
                sparse_used: false,
            });
            return matched;
        }
        let matched = self.compare_inner(layer_idx, a, b, shift, trace);
        trace.events.push(AlignEvent {
            layer: layer_idx + 1,
            tau: cover.tau(),
            shift,
            prefix_matched: matched,
            sparse_used: matched >= shift,
        });
        if matched < shift {
            return matched;
        }
        let l = ls
            .sparse
            .lce(
                ls.spans[a.block as usize].0 + a.off + shift,
                ls.spans[b.block as usize].0 + b.off + shift,
            )
            .expect("aligned offsets are sampled");
        (shift + l).min(bound)
    }

    /// Block-descent comparison inside two blocks of layer `layer_idx >= 1`,
    /// over their decompositions into the layer below.
    fn compare_inner(
        &self,
        layer_idx: usize,
        a: BlockPos,
        b: BlockPos,
        bound: usize,
        trace: &mut LceTrace,
    ) -> usize {
        let gran = self.base.params().xs()[layer_idx - 1];
        let inner = self.base.layers[layer_idx]
            .inner
            .as_ref()
            .expect("layer above 1");
        let ia = &inner[a.block as usize];
        let ib = &inner[b.block as usize];
        let locate = |t: &crate::block_index::InnerBlock, off: usize| -> Cursor {
            let mut r = t.window[off / gran].0 as usize;
            while (t.local_starts[r + 1] as usize) <= off {
                r += 1;
            }
            Cursor {
                r,
                off: off - t.local_starts[r] as usize,
            }
        };
        let wa = Walk {
            view: RunView {
                basics: &ia.local_basics,
                starts: &ia.local_starts,
            },
            cur: locate(ia, a.off),
        };
        let wb = Walk {
            view: RunView {
                basics: &ib.local_basics,
                starts: &ib.local_starts,
            },
            cur: locate(ib, b.off),
        };
        self.compare_runs(layer_idx - 1, wa, wb, bound, trace)
            .expect("bound never exceeds the blocks' remaining length")
    }

    /// Cursor into the top-layer block sequence covering `[i, i + len)`.
    pub fn cursor_at(&self, i: usize, len: usize) -> Result<BlockCursor, QueryError> {
        let n = self.text_len();
        if i >= n || len == 0 || i + len > n {
            return Err(QueryError::OutOfRange {
                pos: i + len.max(1) - 1,
                len: n,
            });
        }
        let (first, off) = self.top_locate(i);
        let (last, _) = self.top_locate(i + len - 1);
        Ok(BlockCursor {
            layer: self.base.layer_count(),
            run: first..=last,
            block: first,
            offset: off,
            position: i,
        })
    }

    /// Compares the strings under two cursors, returning the matched length
    /// clamped to `bound`. Cursors advance over block boundaries; running
    /// off the final block before the bound or a mismatch is an error.
    pub fn bounded_block_compare(
        &self,
        a: &BlockCursor,
        b: &BlockCursor,
        bound: usize,
    ) -> Result<usize, CompareError> {
        for c in [a, b] {
            let n = self.text_len();
            if c.block >= self.base.top_block_count()
                || c.position != self.base.top_starts[c.block] as usize + c.offset
                || c.position >= n
            {
                return Err(CompareError::OutOfRange {
                    pos: c.position,
                    len: n,
                });
            }
        }
        if bound == 0 {
            return Ok(0);
        }
        let mut trace = LceTrace::default();
        let run = RunView {
            basics: &self.base.top_basics,
            starts: &self.base.top_starts,
        };
        self.compare_runs(
            self.base.layer_count() - 1,
            Walk {
                view: run,
                cur: Cursor {
                    r: a.block,
                    off: a.offset,
                },
            },
            Walk {
                view: run,
                cur: Cursor {
                    r: b.block,
                    off: b.offset,
                },
            },
            bound,
            &mut trace,
        )
    }
}

#[derive(Clone, Copy)]
struct RunView<'a> {
    basics: &'a [u32],
    starts: &'a [u32],
}

#[derive(Clone, Copy)]
struct Cursor {
    r: usize,
    off: usize,
}

/// A cursor walking one block run.
#[derive(Clone, Copy)]
struct Walk<'a> {
    view: RunView<'a>,
    cur: Cursor,
}

/// A position inside one basic block.
#[derive(Clone, Copy)]
struct BlockPos {
    block: u32,
    off: usize,
}
