//! Grammar construction from raw text by repeated digram replacement.
//!
//! Each round counts adjacent symbol pairs, then replaces every pair that
//! occurs at least twice with a fresh rule in one left-to-right pass,
//! most frequent pairs taking precedence at overlaps. When no pair repeats,
//! the remaining sequence is folded into a balanced comb of pair rules.
//! The result is not a smallest grammar, only a reasonably compressed one
//! that round-trips exactly.

use std::collections::HashMap;
use std::fmt;

use crate::slp::{Rule, Slp, Symbol};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildError {
    EmptyInput,
}

impl fmt::Display for BuildError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BuildError::EmptyInput => write!(f, "cannot build a grammar for the empty string"),
        }
    }
}

impl std::error::Error for BuildError {}

/// Builds an SLP deriving exactly `text`.
pub fn build_grammar(text: &[u32]) -> Result<Slp, BuildError> {
    if text.is_empty() {
        return Err(BuildError::EmptyInput);
    }

    let mut rules: Vec<Rule> = Vec::new();
    let mut terminal_of: HashMap<u32, Symbol> = HashMap::new();
    let mut seq: Vec<Symbol> = Vec::with_capacity(text.len());
    for &c in text {
        let sym = *terminal_of.entry(c).or_insert_with(|| {
            rules.push(Rule::Terminal(c));
            Symbol(rules.len() as u32 - 1)
        });
        seq.push(sym);
    }

    let mut pair_of: HashMap<(Symbol, Symbol), Symbol> = HashMap::new();
    let mut make_pair = |rules: &mut Vec<Rule>, l: Symbol, r: Symbol| -> Symbol {
        *pair_of.entry((l, r)).or_insert_with(|| {
            rules.push(Rule::Pair(l, r));
            Symbol(rules.len() as u32 - 1)
        })
    };

    while seq.len() > 1 {
        let mut counts: HashMap<(Symbol, Symbol), u32> = HashMap::new();
        for w in seq.windows(2) {
            *counts.entry((w[0], w[1])).or_insert(0) += 1;
        }
        let repeated: HashMap<(Symbol, Symbol), u32> =
            counts.into_iter().filter(|&(_, c)| c >= 2).collect();
        if repeated.is_empty() {
            break;
        }

        let mut next = Vec::with_capacity(seq.len());
        let mut p = 0;
        while p < seq.len() {
            if p + 1 < seq.len() {
                let here = (seq[p], seq[p + 1]);
                if let Some(&count) = repeated.get(&here) {
                    // Let a strictly more frequent overlapping pair win the slot.
                    let defer = p + 2 < seq.len()
                        && repeated
                            .get(&(seq[p + 1], seq[p + 2]))
                            .is_some_and(|&c| c > count);
                    if !defer {
                        next.push(make_pair(&mut rules, here.0, here.1));
                        p += 2;
                        continue;
                    }
                }
            }
            next.push(seq[p]);
            p += 1;
        }
        debug_assert!(next.len() < seq.len());
        seq = next;
    }

    // Fold whatever is left into a balanced binary comb.
    while seq.len() > 1 {
        let mut next = Vec::with_capacity(seq.len() / 2 + 1);
        let mut it = seq.chunks_exact(2);
        for pair in &mut it {
            next.push(make_pair(&mut rules, pair[0], pair[1]));
        }
        if let [last] = it.remainder() {
            next.push(*last);
        }
        seq = next;
    }

    Ok(Slp::new(rules, seq[0]).expect("constructed grammar is well formed"))
}
