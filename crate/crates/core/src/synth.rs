//! Synthetic grammar families used for corpora and stress tests.
//!
//! Chain grammars expand a single character to `c^(2^k)` through k doubling
//! rules, so the grammar height grows with log N while the string is unary.
//! Fibonacci and Thue-Morse words are highly repetitive binary strings with
//! small grammars.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::slp::{Rule, Slp, Symbol};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyntheticKind {
    /// `ch` repeated 2^doublings times.
    Chain { ch: u32, doublings: u32 },
    /// f_1 = "b", f_2 = "a", f_k = f_{k-1} f_{k-2}.
    Fibonacci { order: u32 },
    /// Thue-Morse word of length 2^order over {a, b}.
    ThueMorse { order: u32 },
}

/// Builds one of the synthetic families. `k >= 1` for every kind.
pub fn gen_synthetic(kind: SyntheticKind) -> Slp {
    match kind {
        SyntheticKind::Chain { ch, doublings } => {
            assert!(doublings >= 1, "chain needs at least one doubling");
            assert!(doublings < usize::BITS, "chain length would overflow");
            let mut rules = vec![Rule::Terminal(ch)];
            for i in 0..doublings {
                rules.push(Rule::Pair(Symbol(i), Symbol(i)));
            }
            let root = Symbol(doublings);
            Slp::new(rules, root).unwrap()
        }
        SyntheticKind::Fibonacci { order } => {
            assert!(order >= 1, "fibonacci order must be >= 1");
            // Rule 0 is f_1 = "b", rule 1 is f_2 = "a".
            let mut rules = vec![Rule::Terminal(b'b' as u32), Rule::Terminal(b'a' as u32)];
            for i in 2..order {
                rules.push(Rule::Pair(Symbol(i - 1), Symbol(i - 2)));
            }
            Slp::new(rules, Symbol(order - 1)).unwrap()
        }
        SyntheticKind::ThueMorse { order } => {
            assert!(order >= 1, "thue-morse order must be >= 1");
            // Morphism doubling: A_i -> A_{i-1} B_{i-1}, B_i -> B_{i-1} A_{i-1}.
            let mut rules = vec![Rule::Terminal(b'a' as u32), Rule::Terminal(b'b' as u32)];
            let (mut a, mut b) = (Symbol(0), Symbol(1));
            for _ in 0..order {
                let na = Symbol(rules.len() as u32);
                rules.push(Rule::Pair(a, b));
                let nb = Symbol(rules.len() as u32);
                rules.push(Rule::Pair(b, a));
                a = na;
                b = nb;
            }
            Slp::new(rules, a).unwrap()
        }
    }
}

/// Configuration for the random grammar corpus.
#[derive(Debug, Clone, Copy)]
pub struct RandomSlpConfig {
    /// Number of pair rules to add on top of the terminals.
    pub pair_rules: usize,
    /// Alphabet size; terminals are codes 'a', 'a'+1, ...
    pub alphabet: u32,
    /// Expansion lengths are kept at or below this.
    pub max_len: usize,
}

/// Seeded random SLP. Children are biased toward recent symbols so that
/// expansion lengths actually grow; whenever the cap would be exceeded, a
/// small symbol is substituted instead.
pub fn random_slp(cfg: RandomSlpConfig, seed: u64) -> Slp {
    assert!(cfg.alphabet >= 1 && cfg.pair_rules >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rules: Vec<Rule> = (0..cfg.alphabet)
        .map(|c| Rule::Terminal(b'a' as u32 + c))
        .collect();
    let mut lengths: Vec<usize> = vec![1; cfg.alphabet as usize];

    for _ in 0..cfg.pair_rules {
        let n = rules.len();
        let pick = |rng: &mut ChaCha8Rng| -> usize {
            if rng.gen_bool(0.7) {
                // Recent-biased: favors the top quarter of the table.
                let lo = n - (n / 4).max(1).min(n);
                rng.gen_range(lo..n)
            } else {
                rng.gen_range(0..n)
            }
        };
        let mut l = pick(&mut rng);
        let mut r = pick(&mut rng);
        if lengths[l] + lengths[r] > cfg.max_len {
            // Fall back to the smallest symbols to stay under the cap.
            let smallest = (0..n).min_by_key(|&i| lengths[i]).unwrap();
            if lengths[l] >= lengths[r] {
                l = smallest;
            } else {
                r = smallest;
            }
            if lengths[l] + lengths[r] > cfg.max_len {
                l = smallest;
                r = smallest;
            }
        }
        lengths.push(lengths[l] + lengths[r]);
        rules.push(Rule::Pair(Symbol(l as u32), Symbol(r as u32)));
    }
    let root = Symbol(rules.len() as u32 - 1);
    Slp::new(rules, root).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn text_of(slp: &Slp) -> String {
        slp.expand()
            .unwrap()
            .into_iter()
            .map(|c| char::from_u32(c).unwrap())
            .collect()
    }

    #[test]
    fn chain_expands_to_repeats() {
        let slp = gen_synthetic(SyntheticKind::Chain {
            ch: b'a' as u32,
            doublings: 3,
        });
        assert_eq!(text_of(&slp), "aaaaaaaa");
        slp.validate().unwrap();
    }

    #[test]
    fn fibonacci_words() {
        let f4 = gen_synthetic(SyntheticKind::Fibonacci { order: 4 });
        assert_eq!(text_of(&f4), "aba");
        let f5 = gen_synthetic(SyntheticKind::Fibonacci { order: 5 });
        assert_eq!(text_of(&f5), "abaab");
        let f10 = gen_synthetic(SyntheticKind::Fibonacci { order: 10 });
        assert_eq!(f10.text_len(), 55);
    }

    #[test]
    fn thue_morse_words() {
        let t2 = gen_synthetic(SyntheticKind::ThueMorse { order: 2 });
        assert_eq!(text_of(&t2), "abba");
        // Character at p is 'a' exactly when popcount(p) is even.
        let t6 = gen_synthetic(SyntheticKind::ThueMorse { order: 6 });
        let text = t6.expand().unwrap();
        for (p, &c) in text.iter().enumerate() {
            let expect = if (p as u32).count_ones().is_multiple_of(2) {
                b'a'
            } else {
                b'b'
            };
            assert_eq!(c, expect as u32, "position {p}");
        }
    }

    #[test]
    fn random_slp_validates_and_respects_cap() {
        for seed in 0..20 {
            let slp = random_slp(
                RandomSlpConfig {
                    pair_rules: 50,
                    alphabet: 4,
                    max_len: 5000,
                },
                seed,
            );
            slp.validate().unwrap();
            assert!(slp.text_len() <= 5000);
            let text = slp.expand().unwrap();
            assert_eq!(text.len(), slp.text_len());
        }
    }
}
