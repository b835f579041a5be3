//! Block restructuring of an SLP.
//!
//! Given a parameter X, the derived string is factored into m = Theta(N/X)
//! blocks, each of length at most X and each derived by a single symbol of
//! a lightly extended grammar. Only O(n) distinct symbols appear among the
//! blocks, and any window of X consecutive characters is covered by a short
//! run of consecutive blocks, recorded per window.
//!
//! The construction walks the grammar bottom-up. A symbol is *big* when its
//! expansion exceeds X/2; the *boundary set* holds the big symbols whose
//! children are not big. Boundary occurrences partition the parse tree, and
//! the subtrees hanging between consecutive occurrences all expand to at
//! most X/2 characters, so a greedy left-to-right grouping packs them into
//! fresh blocks of length at most X, at most one of which per gap is
//! shorter than X/2. Groups are attached at the nearest common ancestor
//! symbol of the two occurrences and memoized per symbol, with new rules
//! hash-consed, so repeated contexts share their fill blocks.

use std::collections::HashMap;

use crate::slp::{QueryError, Rule, Slp, Symbol};

/// Leaf payload of a layer grammar: a real character, or a block of the
/// layer below treated as an indivisible unit of its full character length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum LgLeaf {
    Char(u32),
    BlockRef(u32),
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum LgNode {
    Leaf(LgLeaf),
    Pair(u32, u32),
}

/// Grammar over chars or temporary block leaves; lengths are always in
/// characters of the original string.
#[derive(Debug, Clone)]
pub(crate) struct LayerGrammar {
    pub nodes: Vec<LgNode>,
    pub lens: Vec<usize>,
    pub root: u32,
}

impl LayerGrammar {
    pub fn from_slp(slp: &Slp) -> Self {
        let nodes = slp
            .rules()
            .iter()
            .map(|r| match *r {
                Rule::Terminal(c) => LgNode::Leaf(LgLeaf::Char(c)),
                Rule::Pair(l, r) => LgNode::Pair(l.0, r.0),
            })
            .collect();
        let lens = (0..slp.num_rules())
            .map(|i| slp.symbol_len(Symbol(i as u32)))
            .collect();
        LayerGrammar {
            nodes,
            lens,
            root: slp.root().0,
        }
    }

    /// Converts back to a public grammar; only valid when every leaf is a
    /// character.
    pub fn to_slp(&self) -> Slp {
        let rules = self
            .nodes
            .iter()
            .map(|n| match *n {
                LgNode::Leaf(LgLeaf::Char(c)) => Rule::Terminal(c),
                LgNode::Leaf(LgLeaf::BlockRef(_)) => {
                    unreachable!("block leaves never appear in a layer-1 grammar")
                }
                LgNode::Pair(l, r) => Rule::Pair(Symbol(l), Symbol(r)),
            })
            .collect();
        Slp::from_parts_unchecked(rules, Symbol(self.root), self.lens.clone())
    }

    pub fn len_of(&self, v: u32) -> usize {
        self.lens[v as usize]
    }

    pub fn text_len(&self) -> usize {
        self.lens[self.root as usize]
    }

    /// Leaf node ids of the derivation of `v`, left to right.
    pub fn leaf_sequence(&self, v: u32) -> Vec<u32> {
        let mut out = Vec::new();
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            match self.nodes[u as usize] {
                LgNode::Leaf(_) => out.push(u),
                LgNode::Pair(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        out
    }

    /// Character expansion of `v`; only valid for char-leaf grammars.
    pub fn expand_chars(&self, v: u32) -> Vec<u32> {
        self.leaf_sequence(v)
            .into_iter()
            .map(|u| match self.nodes[u as usize] {
                LgNode::Leaf(LgLeaf::Char(c)) => c,
                _ => unreachable!("expand_chars on a block leaf"),
            })
            .collect()
    }
}

/// Big symbols whose children are not big: the anchors of the decomposition.
#[derive(Debug, Clone)]
pub struct BoundarySet {
    x: usize,
    members: Vec<Symbol>,
}

impl BoundarySet {
    pub fn x(&self) -> usize {
        self.x
    }

    pub fn members(&self) -> &[Symbol] {
        &self.members
    }

    pub fn contains(&self, v: Symbol) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Computes the boundary set of `slp` for parameter `x >= 2`: every symbol
/// expanding to more than X/2 characters whose children all expand to at
/// most X/2. Terminals count as length 1.
pub fn boundary_set(slp: &Slp, x: usize) -> BoundarySet {
    assert!(x >= 2, "restructuring needs x >= 2");
    let big = |v: Symbol| 2 * slp.symbol_len(v) > x;
    let members = (0..slp.num_rules() as u32)
        .map(Symbol)
        .filter(|&v| {
            big(v)
                && match slp.rule(v) {
                    Rule::Terminal(_) => true,
                    Rule::Pair(l, r) => !big(l) && !big(r),
                }
        })
        .collect();
    BoundarySet { x, members }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForestSide {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChildSide {
    Left,
    Right,
}

/// One edge of an occurrence-path forest. `primary`/`secondary` carry the
/// sibling symbol hanging into the gap, when there is one; the edge into
/// the ancestor where two paths meet carries no labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ForestEdge {
    pub child: Symbol,
    pub parent: Symbol,
    pub child_side: ChildSide,
    pub primary: Option<Symbol>,
    pub secondary: Option<Symbol>,
}

/// Paths between consecutive boundary occurrences, one per side, with
/// shared path suffixes stored once.
#[derive(Debug, Clone)]
pub struct LabeledForest {
    pub side: ForestSide,
    pub edges: Vec<ForestEdge>,
}

impl LabeledForest {
    pub fn node_count(&self) -> usize {
        let mut syms: Vec<Symbol> = self
            .edges
            .iter()
            .flat_map(|e| [e.child, e.parent])
            .collect();
        syms.sort_unstable();
        syms.dedup();
        syms.len()
    }

    /// Edges in which each symbol appears as the parent. Structurally at
    /// most two per forest (one path step, one meeting-point edge), which is
    /// what keeps the forests linear in the grammar.
    pub fn max_parent_occupancy(&self) -> usize {
        let mut count: HashMap<Symbol, usize> = HashMap::new();
        for e in &self.edges {
            *count.entry(e.parent).or_insert(0) += 1;
        }
        count.values().copied().max().unwrap_or(0)
    }

    /// Symbols appearing in more than `cap` edges overall, with their counts.
    /// Recorded rather than asserted; sharing can legitimately put one
    /// symbol under many parents.
    pub fn occupancy_violations(&self, cap: usize) -> Vec<(Symbol, usize)> {
        let mut count: HashMap<Symbol, usize> = HashMap::new();
        for e in &self.edges {
            *count.entry(e.child).or_insert(0) += 1;
            *count.entry(e.parent).or_insert(0) += 1;
        }
        let mut out: Vec<(Symbol, usize)> = count.into_iter().filter(|&(_, c)| c > cap).collect();
        out.sort_unstable();
        out
    }
}

/// Builds the two labeled path forests for parameter `x`.
///
/// For every symbol that is the meeting point of two consecutive boundary
/// occurrences (both children big), the left forest holds the path down to
/// the last boundary occurrence inside the left child, and the right forest
/// the path down to the first boundary occurrence inside the right child.
/// Left-forest edges passing a left child carry the right sibling as the
/// primary label; right-forest edges passing a right child carry the left
/// sibling as the primary label, and those passing a left child carry the
/// right sibling as the secondary label.
pub fn build_path_forests(slp: &Slp, x: usize) -> (LabeledForest, LabeledForest) {
    assert!(x >= 2, "restructuring needs x >= 2");
    let n = slp.num_rules();
    let big = |v: Symbol| 2 * slp.symbol_len(v) > x;
    let in_boundary = |v: Symbol| {
        big(v)
            && match slp.rule(v) {
                Rule::Terminal(_) => true,
                Rule::Pair(l, r) => !big(l) && !big(r),
            }
    };

    let mut left_edges: HashMap<(Symbol, Symbol), ForestEdge> = HashMap::new();
    let mut right_edges: HashMap<(Symbol, Symbol), ForestEdge> = HashMap::new();

    for id in 0..n as u32 {
        let w = Symbol(id);
        let (a, b) = match slp.rule(w) {
            Rule::Pair(a, b) if big(a) && big(b) => (a, b),
            _ => continue,
        };
        // Path into the left child, toward its last boundary occurrence.
        left_edges.entry((a, w)).or_insert(ForestEdge {
            child: a,
            parent: w,
            child_side: ChildSide::Left,
            primary: None,
            secondary: None,
        });
        let mut v = a;
        while !in_boundary(v) {
            let Rule::Pair(l, r) = slp.rule(v) else {
                unreachable!("big non-boundary is a pair")
            };
            let (next, edge) = if big(r) {
                (
                    r,
                    ForestEdge {
                        child: r,
                        parent: v,
                        child_side: ChildSide::Right,
                        primary: None,
                        secondary: None,
                    },
                )
            } else {
                (
                    l,
                    ForestEdge {
                        child: l,
                        parent: v,
                        child_side: ChildSide::Left,
                        primary: Some(r),
                        secondary: None,
                    },
                )
            };
            if left_edges.insert((edge.child, edge.parent), edge).is_some() {
                break; // shared path suffix, already traced
            }
            v = next;
        }
        // Path into the right child, toward its first boundary occurrence.
        right_edges.entry((b, w)).or_insert(ForestEdge {
            child: b,
            parent: w,
            child_side: ChildSide::Right,
            primary: None,
            secondary: None,
        });
        let mut v = b;
        while !in_boundary(v) {
            let Rule::Pair(l, r) = slp.rule(v) else {
                unreachable!("big non-boundary is a pair")
            };
            let (next, edge) = if big(l) {
                (
                    l,
                    ForestEdge {
                        child: l,
                        parent: v,
                        child_side: ChildSide::Left,
                        primary: None,
                        secondary: Some(r),
                    },
                )
            } else {
                (
                    r,
                    ForestEdge {
                        child: r,
                        parent: v,
                        child_side: ChildSide::Right,
                        primary: Some(l),
                        secondary: None,
                    },
                )
            };
            if right_edges
                .insert((edge.child, edge.parent), edge)
                .is_some()
            {
                break;
            }
            v = next;
        }
    }

    let collect = |map: HashMap<(Symbol, Symbol), ForestEdge>, side| {
        let mut edges: Vec<ForestEdge> = map.into_values().collect();
        edges.sort_unstable_by_key(|e| (e.parent, e.child));
        LabeledForest { side, edges }
    };
    (
        collect(left_edges, ForestSide::Left),
        collect(right_edges, ForestSide::Right),
    )
}

/// How a big symbol contributes to the block sequence.
#[derive(Debug, Clone)]
enum Shape {
    /// The symbol itself is one block.
    Boundary,
    /// Exactly one big child; the other side escaped into pre/suf.
    Wrap(u32),
    /// Both children big; `gaps` are the fill blocks grouped at this symbol.
    Meet {
        left: u32,
        gaps: Vec<u32>,
        right: u32,
    },
}

/// Internal decomposition over a layer grammar.
#[derive(Debug, Clone)]
pub(crate) struct LayerDecomposition {
    pub x: usize,
    pub n_chars: usize,
    /// Input grammar plus the hash-consed fill rules.
    pub grammar: LayerGrammar,
    /// Rule count of the input grammar, before fill rules.
    pub input_rules: usize,
    /// Block sequence as symbols of `grammar`.
    pub block_syms: Vec<u32>,
    /// Prefix character offsets; `block_starts[m] == n_chars`.
    pub block_starts: Vec<usize>,
    /// Distinct block symbols in order of first appearance.
    pub basic_syms: Vec<u32>,
    /// Block index -> basic id.
    pub block_basics: Vec<u32>,
    /// Per window: (first block index, offset of the window start in it).
    pub window: Vec<(u32, u32)>,
    /// Longest covering run over any single window.
    pub k_max: usize,
    /// Grammar over block leaves deriving the block sequence, for the next
    /// layer up.
    pub next: LayerGrammar,
}

impl LayerDecomposition {
    pub fn block_count(&self) -> usize {
        self.block_syms.len()
    }

    pub fn distinct_count(&self) -> usize {
        self.basic_syms.len()
    }

    pub fn added_rules(&self) -> usize {
        self.grammar.nodes.len() - self.input_rules
    }

    /// Block index and offset for a character position, via the window table
    /// and a bounded forward scan.
    pub fn locate(&self, i: usize) -> Result<(usize, usize), QueryError> {
        if i >= self.n_chars {
            return Err(QueryError::OutOfRange {
                pos: i,
                len: self.n_chars,
            });
        }
        let mut r = self.window[i / self.x].0 as usize;
        while self.block_starts[r + 1] <= i {
            r += 1;
        }
        Ok((r, i - self.block_starts[r]))
    }

    /// Consecutive blocks covering `[i, i + len)` with `1 <= len <= x`.
    pub fn cover(
        &self,
        i: usize,
        len: usize,
    ) -> Result<(std::ops::RangeInclusive<usize>, usize), QueryError> {
        assert!(len >= 1 && len <= self.x, "cover length must be in 1..=x");
        if i + len > self.n_chars {
            return Err(QueryError::OutOfRange {
                pos: i + len - 1,
                len: self.n_chars,
            });
        }
        let (first, off) = self.locate(i)?;
        let (last, _) = self.locate(i + len - 1)?;
        Ok((first..=last, off))
    }
}

pub(crate) fn decompose_grammar(g: &LayerGrammar, x: usize) -> LayerDecomposition {
    assert!(x >= 2, "restructuring needs x >= 2");
    let input_rules = g.nodes.len();
    let mut grammar = g.clone();
    let n_chars = grammar.text_len();

    let big = |lens: &[usize], v: u32| 2 * lens[v as usize] > x;

    // Hash-consed pair rules, seeded with the existing ones.
    let mut pair_of: HashMap<(u32, u32), u32> = HashMap::new();
    for (id, node) in grammar.nodes.iter().enumerate() {
        if let LgNode::Pair(l, r) = *node {
            pair_of.entry((l, r)).or_insert(id as u32);
        }
    }

    let single_block = n_chars <= x;

    let mut shapes: Vec<Option<Shape>> = vec![None; grammar.nodes.len()];
    let mut pres: Vec<Vec<u32>> = vec![Vec::new(); grammar.nodes.len()];
    let mut sufs: Vec<Vec<u32>> = vec![Vec::new(); grammar.nodes.len()];

    let group_items = |grammar: &mut LayerGrammar,
                       pair_of: &mut HashMap<(u32, u32), u32>,
                       items: &[u32]|
     -> Vec<u32> {
        let mut groups = Vec::new();
        let mut cur: Vec<u32> = Vec::new();
        let mut sum = 0usize;
        let mut flush = |cur: &mut Vec<u32>, grammar: &mut LayerGrammar| {
            if cur.is_empty() {
                return None;
            }
            let mut acc = cur[0];
            for &w in &cur[1..] {
                acc = *pair_of.entry((acc, w)).or_insert_with(|| {
                    let id = grammar.nodes.len() as u32;
                    grammar.nodes.push(LgNode::Pair(acc, w));
                    let len = grammar.lens[acc as usize] + grammar.lens[w as usize];
                    grammar.lens.push(len);
                    id
                });
            }
            cur.clear();
            Some(acc)
        };
        for &w in items {
            let wl = grammar.lens[w as usize];
            debug_assert!(2 * wl <= x, "gap items never exceed x/2");
            if sum + wl > x {
                if let Some(gr) = flush(&mut cur, grammar) {
                    groups.push(gr);
                }
                sum = 0;
            }
            cur.push(w);
            sum += wl;
        }
        if let Some(gr) = flush(&mut cur, grammar) {
            groups.push(gr);
        }
        groups
    };

    // Only symbols reachable from the root along big children take part;
    // unreachable rules are legal input and must not spawn fill rules.
    let mut active = vec![false; input_rules];
    if !single_block {
        active[grammar.root as usize] = true;
        for v in (0..input_rules).rev() {
            if !active[v] {
                continue;
            }
            if let LgNode::Pair(l, r) = grammar.nodes[v] {
                for c in [l, r] {
                    if big(&grammar.lens, c) {
                        active[c as usize] = true;
                    }
                }
            }
        }
    }

    if !single_block {
        for v in 0..input_rules as u32 {
            if !active[v as usize] {
                continue;
            }
            let shape = match grammar.nodes[v as usize] {
                LgNode::Leaf(_) => Shape::Boundary,
                LgNode::Pair(l, r) => {
                    let (bl, br) = (big(&grammar.lens, l), big(&grammar.lens, r));
                    match (bl, br) {
                        (false, false) => Shape::Boundary,
                        (true, false) => {
                            pres[v as usize] = pres[l as usize].clone();
                            let mut s = sufs[l as usize].clone();
                            s.push(r);
                            sufs[v as usize] = s;
                            Shape::Wrap(l)
                        }
                        (false, true) => {
                            let mut p = vec![l];
                            p.extend_from_slice(&pres[r as usize]);
                            pres[v as usize] = p;
                            sufs[v as usize] = sufs[r as usize].clone();
                            Shape::Wrap(r)
                        }
                        (true, true) => {
                            let mut items = sufs[l as usize].clone();
                            items.extend_from_slice(&pres[r as usize]);
                            let gaps = group_items(&mut grammar, &mut pair_of, &items);
                            pres[v as usize] = pres[l as usize].clone();
                            sufs[v as usize] = sufs[r as usize].clone();
                            Shape::Meet {
                                left: l,
                                gaps,
                                right: r,
                            }
                        }
                    }
                }
            };
            shapes[v as usize] = Some(shape);
        }
    }

    // Materialize the block sequence.
    let root = grammar.root;
    let mut block_syms: Vec<u32> = Vec::new();
    let (head_groups, tail_groups);
    if single_block {
        head_groups = Vec::new();
        tail_groups = Vec::new();
        block_syms.push(root);
    } else {
        head_groups = group_items(&mut grammar, &mut pair_of, &pres[root as usize].clone());
        tail_groups = group_items(&mut grammar, &mut pair_of, &sufs[root as usize].clone());
        block_syms.extend_from_slice(&head_groups);
        enum Task {
            Sym(u32),
            Lit(u32),
        }
        let mut stack = vec![Task::Sym(root)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Lit(b) => block_syms.push(b),
                Task::Sym(v) => match shapes[v as usize]
                    .as_ref()
                    .expect("big symbols have shapes")
                {
                    Shape::Boundary => block_syms.push(v),
                    Shape::Wrap(c) => stack.push(Task::Sym(*c)),
                    Shape::Meet { left, gaps, right } => {
                        stack.push(Task::Sym(*right));
                        for &gapsym in gaps.iter().rev() {
                            stack.push(Task::Lit(gapsym));
                        }
                        stack.push(Task::Sym(*left));
                    }
                },
            }
        }
        block_syms.extend_from_slice(&tail_groups);
    }

    let mut block_starts = Vec::with_capacity(block_syms.len() + 1);
    let mut acc = 0usize;
    block_starts.push(0);
    for &b in &block_syms {
        acc += grammar.lens[b as usize];
        block_starts.push(acc);
    }
    debug_assert_eq!(acc, n_chars, "blocks tile the string exactly");

    let mut basic_of: HashMap<u32, u32> = HashMap::new();
    let mut basic_syms = Vec::new();
    let block_basics: Vec<u32> = block_syms
        .iter()
        .map(|&b| {
            *basic_of.entry(b).or_insert_with(|| {
                basic_syms.push(b);
                basic_syms.len() as u32 - 1
            })
        })
        .collect();

    // Window table and the covering-run record.
    let m = block_syms.len();
    let num_windows = n_chars.div_ceil(x);
    let mut window = Vec::with_capacity(num_windows);
    let mut k_max = 0usize;
    let mut r = 0usize;
    let mut r_end = 0usize;
    for j in 0..num_windows {
        let start = j * x;
        while block_starts[r + 1] <= start {
            r += 1;
        }
        window.push((r as u32, (start - block_starts[r]) as u32));
        let last = (start + x).min(n_chars) - 1;
        r_end = r_end.max(r);
        while block_starts[r_end + 1] <= last {
            r_end += 1;
        }
        k_max = k_max.max(r_end - r + 1);
    }
    debug_assert!(window.len() == num_windows && m >= 1);

    // Grammar over block leaves for the next layer: each distinct block
    // becomes a leaf, and the memoized shapes fold into a derivation of the
    // whole block sequence.
    let mut next = LayerGrammar {
        nodes: Vec::new(),
        lens: Vec::new(),
        root: 0,
    };
    for (basic, &b) in basic_syms.iter().enumerate() {
        next.nodes
            .push(LgNode::Leaf(LgLeaf::BlockRef(basic as u32)));
        next.lens.push(grammar.lens[b as usize]);
    }
    let mut next_pairs: HashMap<(u32, u32), u32> = HashMap::new();
    let mut next_pair = |next: &mut LayerGrammar, l: u32, r: u32| -> u32 {
        *next_pairs.entry((l, r)).or_insert_with(|| {
            let id = next.nodes.len() as u32;
            next.nodes.push(LgNode::Pair(l, r));
            next.lens
                .push(next.lens[l as usize] + next.lens[r as usize]);
            id
        })
    };
    let leaf_of = |b: u32, basic_of: &HashMap<u32, u32>| basic_of[&b];

    if single_block {
        next.root = 0;
    } else {
        let mut upgrade: Vec<Option<u32>> = vec![None; grammar.nodes.len()];
        for v in 0..input_rules as u32 {
            let Some(shape) = shapes[v as usize].as_ref() else {
                continue;
            };
            let up = match shape {
                Shape::Boundary => leaf_of(v, &basic_of),
                Shape::Wrap(c) => upgrade[*c as usize].expect("children upgraded first"),
                Shape::Meet { left, gaps, right } => {
                    let mut acc = upgrade[*left as usize].expect("children upgraded first");
                    for &gapsym in gaps {
                        let leaf = leaf_of(gapsym, &basic_of);
                        acc = next_pair(&mut next, acc, leaf);
                    }
                    next_pair(
                        &mut next,
                        acc,
                        upgrade[*right as usize].expect("children upgraded first"),
                    )
                }
            };
            upgrade[v as usize] = Some(up);
        }
        let mut acc: Option<u32> = None;
        let mut push = |next: &mut LayerGrammar, acc: &mut Option<u32>, sym: u32| {
            *acc = Some(match *acc {
                None => sym,
                Some(prev) => next_pair(next, prev, sym),
            });
        };
        for &b in &head_groups {
            let leaf = leaf_of(b, &basic_of);
            push(&mut next, &mut acc, leaf);
        }
        push(
            &mut next,
            &mut acc,
            upgrade[root as usize].expect("root is big"),
        );
        for &b in &tail_groups {
            let leaf = leaf_of(b, &basic_of);
            push(&mut next, &mut acc, leaf);
        }
        next.root = acc.expect("sequence is nonempty");
    }

    LayerDecomposition {
        x,
        n_chars,
        grammar,
        input_rules,
        block_syms,
        block_starts,
        basic_syms,
        block_basics,
        window,
        k_max,
        next,
    }
}

/// Public decomposition of a plain SLP.
#[derive(Debug, Clone)]
pub struct BlockDecomposition {
    inner: LayerDecomposition,
    slp2: Slp,
}

impl BlockDecomposition {
    pub fn x(&self) -> usize {
        self.inner.x
    }

    pub fn text_len(&self) -> usize {
        self.inner.n_chars
    }

    /// The restructured grammar: the input plus the fill rules.
    pub fn slp2(&self) -> &Slp {
        &self.slp2
    }

    /// Block roots v_1..v_m, as symbols of `slp2`.
    pub fn block_roots(&self) -> impl ExactSizeIterator<Item = Symbol> + '_ {
        self.inner.block_syms.iter().map(|&b| Symbol(b))
    }

    pub fn block_starts(&self) -> &[usize] {
        &self.inner.block_starts
    }

    /// The d distinct symbols among the block roots.
    pub fn basic_blocks(&self) -> impl ExactSizeIterator<Item = Symbol> + '_ {
        self.inner.basic_syms.iter().map(|&b| Symbol(b))
    }

    pub fn block_count(&self) -> usize {
        self.inner.block_count()
    }

    pub fn distinct_count(&self) -> usize {
        self.inner.distinct_count()
    }

    /// Rules added on top of the input grammar.
    pub fn added_rules(&self) -> usize {
        self.inner.added_rules()
    }

    /// Longest run of consecutive blocks over any aligned window.
    pub fn k_max(&self) -> usize {
        self.inner.k_max
    }

    pub fn window_table(&self) -> &[(u32, u32)] {
        &self.inner.window
    }

    /// Block index and in-block offset of position `i`.
    pub fn locate(&self, i: usize) -> Result<(usize, usize), QueryError> {
        self.inner.locate(i)
    }

    /// Consecutive block run covering `[i, i+len)` plus the offset of `i`
    /// in the first block. `len` must be in `1..=x`.
    pub fn cover(
        &self,
        i: usize,
        len: usize,
    ) -> Result<(std::ops::RangeInclusive<usize>, usize), QueryError> {
        self.inner.cover(i, len)
    }

    #[cfg(test)]
    pub(crate) fn inner(&self) -> &LayerDecomposition {
        &self.inner
    }
}

/// Restructures `slp` with parameter `x >= 2`. If the whole string is no
/// longer than `x` the result is the single block `[root]`.
pub fn decompose(slp: &Slp, x: usize) -> BlockDecomposition {
    let inner = decompose_grammar(&LayerGrammar::from_slp(slp), x);
    let slp2 = inner.grammar.to_slp();
    BlockDecomposition { inner, slp2 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{gen_synthetic, random_slp, RandomSlpConfig, SyntheticKind};

    fn abab() -> Slp {
        crate::slp::tests::abab()
    }

    fn chain(doublings: u32) -> Slp {
        gen_synthetic(SyntheticKind::Chain {
            ch: b'a' as u32,
            doublings,
        })
    }

    #[test]
    fn boundary_set_examples() {
        // a^8 chain: rules a(1), A1(2), A2(4), A3(8); X=4 selects A2 only.
        let bs = boundary_set(&chain(3), 4);
        assert_eq!(bs.members(), &[Symbol(2)]);

        // abab: C expands to 2 > 1 with unit children.
        let bs = boundary_set(&abab(), 2);
        assert_eq!(bs.members(), &[Symbol(2)]);

        // X=8: the root expands to 4 <= 4, nothing qualifies.
        let bs = boundary_set(&abab(), 8);
        assert!(bs.is_empty());
    }

    #[test]
    fn forests_for_chain() {
        let (fl, fr) = build_path_forests(&chain(3), 4);
        // Both occurrences of the length-4 symbol hang directly off the root:
        // single edges, no labels on either side.
        assert_eq!(fl.edges.len(), 1);
        assert_eq!(fr.edges.len(), 1);
        let e = fl.edges[0];
        assert_eq!(
            (e.child, e.parent, e.child_side),
            (Symbol(2), Symbol(3), ChildSide::Left)
        );
        assert_eq!((e.primary, e.secondary), (None, None));
        let e = fr.edges[0];
        assert_eq!(
            (e.child, e.parent, e.child_side),
            (Symbol(2), Symbol(3), ChildSide::Right)
        );
        assert_eq!((e.primary, e.secondary), (None, None));
    }

    #[test]
    fn forests_for_abab() {
        let (fl, fr) = build_path_forests(&abab(), 2);
        assert_eq!(fl.edges.len(), 1);
        assert_eq!(fr.edges.len(), 1);
        assert_eq!(fl.edges[0].child, Symbol(2));
        assert_eq!(fl.edges[0].parent, Symbol(3));
    }

    #[test]
    fn forests_empty_for_single_occurrence() {
        // a^4 with X=4: only one boundary occurrence (the root itself).
        let (fl, fr) = build_path_forests(&chain(2), 4);
        assert!(fl.edges.is_empty());
        assert!(fr.edges.is_empty());
    }

    #[test]
    fn forest_edges_carry_at_most_one_label() {
        for seed in 0..30u64 {
            let slp = random_slp(
                RandomSlpConfig {
                    pair_rules: 80,
                    alphabet: 3,
                    max_len: 4000,
                },
                seed,
            );
            for x in [4, 16, 64] {
                let (fl, fr) = build_path_forests(&slp, x);
                for f in [&fl, &fr] {
                    for e in &f.edges {
                        assert!(e.primary.is_none() || e.secondary.is_none());
                    }
                    assert!(f.node_count() <= 2 * slp.num_rules());
                    assert!(f.edges.len() <= 2 * slp.num_rules());
                    assert!(f.max_parent_occupancy() <= 2);
                    // Child-side fan-in from sharing is recorded, not bounded.
                    let _ = f.occupancy_violations(4);
                }
            }
        }
    }

    #[test]
    fn decompose_abab_x2() {
        let dec = decompose(&abab(), 2);
        let roots: Vec<Symbol> = dec.block_roots().collect();
        assert_eq!(roots, vec![Symbol(2), Symbol(2)]);
        assert_eq!(dec.block_count(), 2);
        assert_eq!(dec.distinct_count(), 1);
        assert_eq!(dec.block_starts(), &[0, 2, 4]);
        let text: Vec<u32> = dec
            .block_roots()
            .flat_map(|b| dec.slp2().expand_symbol(b).unwrap())
            .collect();
        assert_eq!(text, abab().expand().unwrap());
    }

    #[test]
    fn decompose_chain_x4() {
        let dec = decompose(&chain(3), 4);
        assert_eq!(dec.block_count(), 2);
        assert_eq!(dec.block_starts(), &[0, 4, 8]);
        let roots: Vec<Symbol> = dec.block_roots().collect();
        assert_eq!(roots[0], roots[1]);
    }

    #[test]
    fn decompose_single_block_when_x_at_least_n() {
        let slp = abab();
        let dec = decompose(&slp, 16);
        let roots: Vec<Symbol> = dec.block_roots().collect();
        assert_eq!(roots, vec![slp.root()]);
        assert_eq!(dec.block_count(), 1);
    }

    #[test]
    fn locate_examples() {
        let dec = decompose(&abab(), 2);
        assert_eq!(dec.locate(0).unwrap(), (0, 0));
        assert_eq!(dec.locate(2).unwrap(), (1, 0));
        assert_eq!(dec.locate(3).unwrap(), (1, 1));
        assert!(dec.locate(4).is_err());
    }

    #[test]
    fn cover_examples() {
        let dec = decompose(&abab(), 2);
        let (run, off) = dec.cover(1, 2).unwrap();
        assert_eq!(run, 0..=1);
        assert_eq!(off, 1);

        let dec = decompose(&chain(3), 4);
        let (run, off) = dec.cover(3, 4).unwrap();
        assert_eq!(run, 0..=1);
        assert_eq!(off, 3);
    }

    fn check_invariants(slp: &Slp, x: usize) -> BlockDecomposition {
        let dec = decompose(slp, x);
        let expect = slp.expand().unwrap();
        let mut concat = Vec::with_capacity(expect.len());
        for b in dec.block_roots() {
            let part = dec.slp2().expand_symbol(b).unwrap();
            assert!(part.len() <= x, "block length {} > x {}", part.len(), x);
            concat.extend(part);
        }
        assert_eq!(concat, expect, "x={x}");
        assert!(*dec.block_starts().last().unwrap() == expect.len());
        assert!(dec.block_starts().windows(2).all(|w| w[0] < w[1]));
        dec.slp2().validate().unwrap();

        // locate agrees with a binary search over the starts.
        for i in (0..expect.len()).step_by(1 + expect.len() / 64) {
            let (r, off) = dec.locate(i).unwrap();
            let by_search = match dec.block_starts().binary_search(&i) {
                Ok(r) => r,
                Err(ins) => ins - 1,
            };
            assert_eq!(r, by_search);
            assert_eq!(off, i - dec.block_starts()[r]);
        }
        dec
    }

    #[test]
    fn invariants_on_families_and_random_grammars() {
        for k in [1, 2, 3, 6, 9] {
            let slp = chain(k);
            for x in [2, 3, 4, 7, 16] {
                check_invariants(&slp, x);
            }
        }
        for order in [1, 2, 5, 12, 17] {
            let slp = gen_synthetic(SyntheticKind::Fibonacci { order });
            for x in [2, 5, 8, 31] {
                check_invariants(&slp, x);
            }
        }
        for order in [1, 4, 8] {
            let slp = gen_synthetic(SyntheticKind::ThueMorse { order });
            for x in [2, 6, 16] {
                check_invariants(&slp, x);
            }
        }
        for seed in 0..40u64 {
            let slp = random_slp(
                RandomSlpConfig {
                    pair_rules: 60,
                    alphabet: 2,
                    max_len: 3000,
                },
                seed,
            );
            for x in [2, 5, 17, 64] {
                let dec = check_invariants(&slp, x);
                assert!(
                    dec.k_max() <= 8,
                    "k_max {} for seed {seed} x {x}",
                    dec.k_max()
                );
            }
        }
    }

    #[test]
    fn next_grammar_derives_the_block_sequence() {
        for seed in [3u64, 11, 29] {
            let slp = random_slp(
                RandomSlpConfig {
                    pair_rules: 70,
                    alphabet: 4,
                    max_len: 5000,
                },
                seed,
            );
            let dec = decompose(&slp, 9);
            let inner = dec.inner();
            let leaves = inner.next.leaf_sequence(inner.next.root);
            assert_eq!(leaves.len(), inner.block_count());
            for (leaf, &basic) in leaves.iter().zip(inner.block_basics.iter()) {
                match inner.next.nodes[*leaf as usize] {
                    LgNode::Leaf(LgLeaf::BlockRef(b)) => assert_eq!(b, basic),
                    _ => panic!("next-layer leaves must be block refs"),
                }
            }
        }
    }

    #[test]
    fn block_count_and_distinct_trends_on_chains() {
        let mut ratios_m = Vec::new();
        let mut ratios_d = Vec::new();
        for k in 10..=16 {
            let slp = chain(k);
            let n = slp.text_len();
            let x = (n as f64).sqrt().ceil() as usize;
            let dec = decompose(&slp, x);
            ratios_m.push(dec.block_count() as f64 * x as f64 / n as f64);
            ratios_d.push(dec.distinct_count() as f64 / slp.num_rules() as f64);
        }
        for r in [&ratios_m, &ratios_d] {
            let lo = r.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = r.iter().cloned().fold(0.0, f64::max);
            assert!(hi / lo < 2.0, "trend varies too much: {r:?}");
        }
    }

    #[test]
    fn cover_contains_every_query_range() {
        let slp = gen_synthetic(SyntheticKind::Fibonacci { order: 15 });
        let text = slp.expand().unwrap();
        let dec = decompose(&slp, 8);
        for i in 0..text.len() {
            let len = (text.len() - i).min(8);
            let (run, off) = dec.cover(i, len).unwrap();
            let (first, last) = (*run.start(), *run.end());
            assert_eq!(dec.block_starts()[first] + off, i);
            assert!(dec.block_starts()[last + 1] >= i + len);
            assert!(last - first < 2 * dec.k_max());
        }
    }
}
