//! Straight-line program (SLP) grammar model and brute-force oracles.
//!
//! An SLP is a grammar in which every rule is either a terminal character
//! or an ordered pair of previously defined symbols, and which derives
//! exactly one string. Rules are stored in topological order: a pair rule
//! may only reference strictly lower-numbered symbols, so acyclicity is a
//! syntactic property checked during validation.

use std::fmt;

/// Dense identifier of one grammar rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Symbol {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One grammar rule: a terminal character code or an ordered pair.
///
/// Character codes are unsigned 32-bit integers rather than bytes so that
/// downstream structures can extend the alphabet with fresh separator
/// codes that cannot occur in any input.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Terminal(u32),
    Pair(Symbol, Symbol),
}

/// Validation errors; see [`Slp::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlpError {
    /// A rule references itself or a higher-numbered symbol.
    CyclicReference { rule: u32, referenced: u32 },
    /// A rule references a symbol id outside the rule table.
    DanglingSymbol { rule: u32, referenced: u32 },
    /// The root id is not a valid symbol.
    BadRoot { root: u32, rules: usize },
    /// A stored expansion length disagrees with the recomputed one.
    LengthMismatch {
        rule: u32,
        stored: usize,
        computed: usize,
    },
    /// Expansion length exceeds what fits in a usize.
    LengthOverflow { rule: u32 },
    /// The grammar has no rules.
    Empty,
}

impl fmt::Display for SlpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SlpError::CyclicReference { rule, referenced } => {
                write!(
                    f,
                    "rule {rule} references {referenced}, which is not strictly lower"
                )
            }
            SlpError::DanglingSymbol { rule, referenced } => {
                write!(f, "rule {rule} references unknown symbol {referenced}")
            }
            SlpError::BadRoot { root, rules } => {
                write!(f, "root {root} out of range for {rules} rules")
            }
            SlpError::LengthMismatch {
                rule,
                stored,
                computed,
            } => {
                write!(
                    f,
                    "rule {rule} stores length {stored}, recomputed {computed}"
                )
            }
            SlpError::LengthOverflow { rule } => {
                write!(f, "rule {rule} expansion length overflows")
            }
            SlpError::Empty => write!(f, "grammar has no rules"),
        }
    }
}

impl std::error::Error for SlpError {}

/// Errors from expansion and position queries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum QueryError {
    OutOfRange {
        pos: usize,
        len: usize,
    },
    /// Expansion would exceed the configured cap.
    TooLarge {
        needed: usize,
        cap: usize,
    },
}

impl fmt::Display for QueryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QueryError::OutOfRange { pos, len } => {
                write!(f, "position {pos} out of range for length {len}")
            }
            QueryError::TooLarge { needed, cap } => {
                write!(f, "expansion of {needed} characters exceeds cap {cap}")
            }
        }
    }
}

impl std::error::Error for QueryError {}

/// Default cap on in-memory expansion, in characters.
pub const DEFAULT_EXPANSION_CAP: usize = 1 << 28;

/// A straight-line program: rule table, root, and per-symbol expansion lengths.
///
/// Immutable after construction; shared references may be used concurrently.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slp {
    rules: Vec<Rule>,
    root: Symbol,
    lengths: Vec<usize>,
}

/// Outcome of a successful validation. Unreachable rules are legal (block
/// restructuring creates shared subtrees on purpose) and only reported.
#[derive(Debug, Clone, Default)]
pub struct Validation {
    pub unreachable: Vec<Symbol>,
}

impl Slp {
    /// Builds an SLP from a rule table, computing expansion lengths.
    pub fn new(rules: Vec<Rule>, root: Symbol) -> Result<Self, SlpError> {
        let lengths = compute_lengths(&rules)?;
        if root.index() >= rules.len() {
            return Err(SlpError::BadRoot {
                root: root.0,
                rules: rules.len(),
            });
        }
        Ok(Slp {
            rules,
            root,
            lengths,
        })
    }

    /// Builds an SLP from parts that already carry lengths, without checking
    /// them. Used by restructuring, which derives lengths itself; `validate`
    /// still re-checks everything.
    pub(crate) fn from_parts_unchecked(
        rules: Vec<Rule>,
        root: Symbol,
        lengths: Vec<usize>,
    ) -> Self {
        Slp {
            rules,
            root,
            lengths,
        }
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, v: Symbol) -> Rule {
        self.rules[v.index()]
    }

    pub fn root(&self) -> Symbol {
        self.root
    }

    /// Number of rules, `n`.
    pub fn num_rules(&self) -> usize {
        self.rules.len()
    }

    /// Expansion length of one symbol, in characters.
    pub fn symbol_len(&self, v: Symbol) -> usize {
        self.lengths[v.index()]
    }

    /// Length `N` of the derived string.
    pub fn text_len(&self) -> usize {
        self.lengths[self.root.index()]
    }

    /// Largest terminal code used, or None for a (impossible) pair-only table.
    pub fn max_terminal(&self) -> Option<u32> {
        self.rules
            .iter()
            .filter_map(|r| match r {
                Rule::Terminal(c) => Some(*c),
                Rule::Pair(..) => None,
            })
            .max()
    }

    /// Checks every invariant: reference ordering, root, and stored lengths.
    /// Unreachable rules are reported in the result, never an error.
    pub fn validate(&self) -> Result<Validation, SlpError> {
        let computed = compute_lengths(&self.rules)?;
        if self.root.index() >= self.rules.len() {
            return Err(SlpError::BadRoot {
                root: self.root.0,
                rules: self.rules.len(),
            });
        }
        if self.lengths.len() != computed.len() {
            return Err(SlpError::LengthMismatch {
                rule: 0,
                stored: self.lengths.len(),
                computed: computed.len(),
            });
        }
        for (i, (&stored, &comp)) in self.lengths.iter().zip(computed.iter()).enumerate() {
            if stored != comp {
                return Err(SlpError::LengthMismatch {
                    rule: i as u32,
                    stored,
                    computed: comp,
                });
            }
        }

        let mut reachable = vec![false; self.rules.len()];
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            if reachable[v.index()] {
                continue;
            }
            reachable[v.index()] = true;
            if let Rule::Pair(l, r) = self.rules[v.index()] {
                stack.push(l);
                stack.push(r);
            }
        }
        let unreachable = (0..self.rules.len())
            .filter(|&i| !reachable[i])
            .map(|i| Symbol(i as u32))
            .collect();
        Ok(Validation { unreachable })
    }

    /// Expands one symbol to its derived string, with the default cap.
    pub fn expand_symbol(&self, v: Symbol) -> Result<Vec<u32>, QueryError> {
        self.expand_symbol_capped(v, DEFAULT_EXPANSION_CAP)
    }

    /// Expands one symbol with an explicit cap on the output length.
    pub fn expand_symbol_capped(&self, v: Symbol, cap: usize) -> Result<Vec<u32>, QueryError> {
        let needed = self.lengths[v.index()];
        if needed > cap {
            return Err(QueryError::TooLarge { needed, cap });
        }
        let mut out = Vec::with_capacity(needed);
        // Explicit stack; parse trees of chain grammars are too deep to recurse.
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            match self.rules[u.index()] {
                Rule::Terminal(c) => out.push(c),
                Rule::Pair(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
            }
        }
        Ok(out)
    }

    /// Expands the whole string.
    pub fn expand(&self) -> Result<Vec<u32>, QueryError> {
        self.expand_symbol(self.root)
    }

    pub fn expand_capped(&self, cap: usize) -> Result<Vec<u32>, QueryError> {
        self.expand_symbol_capped(self.root, cap)
    }

    /// Top-down descent to one character; work proportional to grammar height.
    /// This is the oracle every indexed access is checked against.
    pub fn naive_access(&self, i: usize) -> Result<u32, QueryError> {
        let n = self.text_len();
        if i >= n {
            return Err(QueryError::OutOfRange { pos: i, len: n });
        }
        let mut v = self.root;
        let mut skip = i;
        loop {
            match self.rules[v.index()] {
                Rule::Terminal(c) => return Ok(c),
                Rule::Pair(l, r) => {
                    let left_len = self.lengths[l.index()];
                    if skip < left_len {
                        v = l;
                    } else {
                        skip -= left_len;
                        v = r;
                    }
                }
            }
        }
    }
}

fn compute_lengths(rules: &[Rule]) -> Result<Vec<usize>, SlpError> {
    if rules.is_empty() {
        return Err(SlpError::Empty);
    }
    let n = rules.len();
    let mut lengths: Vec<usize> = Vec::with_capacity(n);
    for (i, rule) in rules.iter().enumerate() {
        let len = match *rule {
            Rule::Terminal(_) => 1,
            Rule::Pair(l, r) => {
                for child in [l, r] {
                    if child.index() >= n {
                        return Err(SlpError::DanglingSymbol {
                            rule: i as u32,
                            referenced: child.0,
                        });
                    }
                    if child.index() >= i {
                        return Err(SlpError::CyclicReference {
                            rule: i as u32,
                            referenced: child.0,
                        });
                    }
                }
                lengths[l.index()]
                    .checked_add(lengths[r.index()])
                    .ok_or(SlpError::LengthOverflow { rule: i as u32 })?
            }
        };
        lengths.push(len);
    }
    Ok(lengths)
}

/// Longest common extension of two suffixes by character scan. The oracle
/// for every indexed LCE query.
pub fn naive_lce(text: &[u32], i: usize, j: usize) -> Result<usize, QueryError> {
    let n = text.len();
    if i >= n || j >= n {
        return Err(QueryError::OutOfRange {
            pos: i.max(j),
            len: n,
        });
    }
    let mut l = 0;
    while i + l < n && j + l < n && text[i + l] == text[j + l] {
        l += 1;
    }
    Ok(l)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// 4-rule grammar for "abab": A->'a', B->'b', C->AB, D->CC.
    pub(crate) fn abab() -> Slp {
        Slp::new(
            vec![
                Rule::Terminal(b'a' as u32),
                Rule::Terminal(b'b' as u32),
                Rule::Pair(Symbol(0), Symbol(1)),
                Rule::Pair(Symbol(2), Symbol(2)),
            ],
            Symbol(3),
        )
        .unwrap()
    }

    fn codes(s: &str) -> Vec<u32> {
        s.chars().map(|c| c as u32).collect()
    }

    #[test]
    fn validate_accepts_abab() {
        let slp = abab();
        let report = slp.validate().unwrap();
        assert!(report.unreachable.is_empty());
        assert_eq!(slp.text_len(), 4);
    }

    #[test]
    fn validate_rejects_self_reference() {
        let rules = vec![
            Rule::Terminal(b'a' as u32),
            Rule::Terminal(b'b' as u32),
            Rule::Pair(Symbol(2), Symbol(2)),
        ];
        let err = Slp::new(rules, Symbol(2)).unwrap_err();
        assert!(matches!(
            err,
            SlpError::CyclicReference {
                rule: 2,
                referenced: 2
            }
        ));
    }

    #[test]
    fn validate_rejects_bad_root() {
        let rules = vec![Rule::Terminal(b'a' as u32)];
        let err = Slp::new(rules, Symbol(1)).unwrap_err();
        assert!(matches!(err, SlpError::BadRoot { root: 1, rules: 1 }));
    }

    #[test]
    fn validate_rejects_dangling_symbol() {
        let rules = vec![
            Rule::Terminal(b'a' as u32),
            Rule::Terminal(b'b' as u32),
            Rule::Pair(Symbol(0), Symbol(7)),
        ];
        let err = Slp::new(rules, Symbol(2)).unwrap_err();
        assert!(matches!(
            err,
            SlpError::DanglingSymbol {
                rule: 2,
                referenced: 7
            }
        ));
    }

    #[test]
    fn validate_reports_unreachable() {
        let rules = vec![
            Rule::Terminal(b'a' as u32),
            Rule::Terminal(b'b' as u32),
            Rule::Pair(Symbol(0), Symbol(0)),
        ];
        let slp = Slp::new(rules, Symbol(2)).unwrap();
        let report = slp.validate().unwrap();
        assert_eq!(report.unreachable, vec![Symbol(1)]);
    }

    #[test]
    fn validate_catches_tampered_lengths() {
        let mut slp = abab();
        slp.lengths[3] = 5;
        let err = slp.validate().unwrap_err();
        assert!(matches!(
            err,
            SlpError::LengthMismatch {
                rule: 3,
                stored: 5,
                computed: 4
            }
        ));
    }

    #[test]
    fn expand_single_terminal() {
        let slp = Slp::new(vec![Rule::Terminal(b'a' as u32)], Symbol(0)).unwrap();
        assert_eq!(slp.expand().unwrap(), codes("a"));
    }

    #[test]
    fn expand_abab() {
        assert_eq!(abab().expand().unwrap(), codes("abab"));
    }

    #[test]
    fn expand_respects_cap() {
        let slp = abab();
        let err = slp.expand_capped(3).unwrap_err();
        assert!(matches!(err, QueryError::TooLarge { needed: 4, cap: 3 }));
    }

    #[test]
    fn naive_access_matches_expansion() {
        let slp = abab();
        let text = slp.expand().unwrap();
        for (i, &c) in text.iter().enumerate() {
            assert_eq!(slp.naive_access(i).unwrap(), c);
        }
        assert_eq!(slp.naive_access(1).unwrap(), b'b' as u32);
        assert_eq!(slp.naive_access(3).unwrap(), *text.last().unwrap());
        assert!(matches!(
            slp.naive_access(4),
            Err(QueryError::OutOfRange { pos: 4, len: 4 })
        ));
    }

    #[test]
    fn naive_access_chain() {
        let slp = crate::synth::gen_synthetic(crate::synth::SyntheticKind::Chain {
            ch: b'a' as u32,
            doublings: 3,
        });
        assert_eq!(slp.text_len(), 8);
        assert_eq!(slp.naive_access(5).unwrap(), b'a' as u32);
    }

    #[test]
    fn naive_lce_cases() {
        let t = codes("abaab");
        assert_eq!(naive_lce(&t, 0, 3).unwrap(), 2);
        assert_eq!(naive_lce(&t, 2, 2).unwrap(), 3);
        assert_eq!(naive_lce(&t, 0, 1).unwrap(), 0);
        assert_eq!(naive_lce(&t, 0, 3).unwrap(), naive_lce(&t, 3, 0).unwrap());
        assert!(naive_lce(&t, 5, 0).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn naive_lce_symmetric_and_reflexive(
                text in prop::collection::vec(0u32..3, 1..200),
                a in 0usize..200,
                b in 0usize..200,
            ) {
                let i = a % text.len();
                let j = b % text.len();
                prop_assert_eq!(naive_lce(&text, i, j).unwrap(), naive_lce(&text, j, i).unwrap());
                prop_assert_eq!(naive_lce(&text, i, i).unwrap(), text.len() - i);
            }

            #[test]
            fn naive_access_equals_expansion(seed in 0u64..500) {
                let slp = crate::synth::random_slp(
                    crate::synth::RandomSlpConfig { pair_rules: 30, alphabet: 3, max_len: 500 },
                    seed,
                );
                let text = slp.expand().unwrap();
                prop_assert_eq!(text.len(), slp.text_len());
                for (i, &c) in text.iter().enumerate() {
                    prop_assert_eq!(slp.naive_access(i).unwrap(), c);
                }
            }
        }
    }
}
