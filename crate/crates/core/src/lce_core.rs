//! Constant-time LCE primitives over explicit strings.
//!
//! [`FullLce`] answers longest-common-extension queries for any pair of
//! suffixes via suffix array + LCP array + range-minimum, all built at desk
//! scale (doubling suffix sort, Kasai LCP). [`SparseLce`] restricts queries
//! to a sampled set of positions and stores only the sampled order and
//! sampled LCP array, so its size is linear in the sample count.
//!
//! Texts are `u64` codes so callers can append separator codes beyond any
//! 32-bit input alphabet; separators compare by code like anything else.

use std::collections::HashMap;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LceError {
    EmptyInput,
    EmptySet,
    OutOfRange { pos: usize, len: usize },
    UnsampledPosition { pos: usize },
}

impl fmt::Display for LceError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LceError::EmptyInput => write!(f, "text must be nonempty"),
            LceError::EmptySet => write!(f, "sampled position set must be nonempty"),
            LceError::OutOfRange { pos, len } => {
                write!(f, "position {pos} out of range for length {len}")
            }
            LceError::UnsampledPosition { pos } => write!(f, "position {pos} is not sampled"),
        }
    }
}

impl std::error::Error for LceError {}

/// Suffix array by prefix doubling, O(N log^2 N).
pub fn suffix_array(text: &[u64]) -> Vec<u32> {
    let n = text.len();
    if n == 0 {
        return Vec::new();
    }
    let mut sa: Vec<u32> = (0..n as u32).collect();
    sa.sort_unstable_by_key(|&i| text[i as usize]);
    let mut rank = vec![0i64; n];
    let mut r = 0i64;
    rank[sa[0] as usize] = 0;
    for w in 1..n {
        if text[sa[w] as usize] != text[sa[w - 1] as usize] {
            r += 1;
        }
        rank[sa[w] as usize] = r;
    }

    let mut tmp = vec![0i64; n];
    let mut k = 1;
    while k < n && (r as usize) < n - 1 {
        let key = |i: u32| -> (i64, i64) {
            let i = i as usize;
            (rank[i], if i + k < n { rank[i + k] } else { -1 })
        };
        sa.sort_unstable_by_key(|&i| key(i));
        tmp[sa[0] as usize] = 0;
        for w in 1..n {
            let inc = (key(sa[w]) != key(sa[w - 1])) as i64;
            tmp[sa[w] as usize] = tmp[sa[w - 1] as usize] + inc;
        }
        std::mem::swap(&mut rank, &mut tmp);
        r = rank[sa[n - 1] as usize];
        k *= 2;
    }
    sa
}

/// Kasai's LCP construction. `lcp[i]` is the LCE of suffixes `sa[i-1]` and
/// `sa[i]`; `lcp[0]` is stored as 0 and never read.
pub fn lcp_array(text: &[u64], sa: &[u32], rank: &[u32]) -> Vec<u32> {
    let n = text.len();
    let mut lcp = vec![0u32; n];
    let mut k = 0usize;
    for i in 0..n {
        let r = rank[i] as usize;
        if r > 0 {
            let j = sa[r - 1] as usize;
            while i + k < n && j + k < n && text[i + k] == text[j + k] {
                k += 1;
            }
            lcp[r] = k as u32;
        }
        k = k.saturating_sub(1);
    }
    lcp
}

fn inverse_permutation(sa: &[u32]) -> Vec<u32> {
    let mut rank = vec![0u32; sa.len()];
    for (r, &p) in sa.iter().enumerate() {
        rank[p as usize] = r as u32;
    }
    rank
}

/// Sparse-table range minimum over a frozen array. Queries return the index
/// of the minimum; ties resolve to the smallest index.
#[derive(Debug, Clone)]
pub struct SparseTable {
    vals: Vec<u64>,
    // rows[j][i] = argmin over [i, i + 2^(j+1)); row 0 covers width 2.
    rows: Vec<Vec<u32>>,
}

impl SparseTable {
    pub fn new(vals: Vec<u64>) -> Self {
        let n = vals.len();
        let mut rows: Vec<Vec<u32>> = Vec::new();
        if n >= 2 {
            let levels = (usize::BITS - 1 - n.leading_zeros()) as usize;
            let mut prev: Vec<u32> = (0..n - 1)
                .map(|i| {
                    if vals[i + 1] < vals[i] {
                        i as u32 + 1
                    } else {
                        i as u32
                    }
                })
                .collect();
            rows.push(prev.clone());
            for j in 1..levels {
                let w = 1usize << (j + 1);
                if w > n {
                    break;
                }
                let half = 1usize << j;
                let mut row = Vec::with_capacity(n - w + 1);
                for i in 0..=(n - w) {
                    let a = prev[i];
                    let b = prev[i + half];
                    row.push(if vals[b as usize] < vals[a as usize] {
                        b
                    } else {
                        a
                    });
                }
                rows.push(row.clone());
                prev = row;
            }
        }
        SparseTable { vals, rows }
    }

    pub fn values(&self) -> &[u64] {
        &self.vals
    }

    pub fn len(&self) -> usize {
        self.vals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vals.is_empty()
    }

    /// Bytes held by the value array and the min-index rows.
    pub fn table_bytes(&self) -> usize {
        self.vals.len() * 8 + self.rows.iter().map(|r| r.len() * 4).sum::<usize>()
    }

    /// Index of the minimum over the inclusive range `[l, r]`.
    pub fn range_min(&self, l: usize, r: usize) -> Result<usize, LceError> {
        if l > r || r >= self.vals.len() {
            return Err(LceError::OutOfRange {
                pos: r,
                len: self.vals.len(),
            });
        }
        if l == r {
            return Ok(l);
        }
        let width = r - l + 1;
        let j = (usize::BITS - 1 - width.leading_zeros()) as usize; // floor log2
        let a = self.rows[j - 1][l];
        let b = self.rows[j - 1][r + 1 - (1 << j)];
        // Leftmost tie: prefer the earlier index on equal values.
        Ok(
            if self.vals[b as usize] < self.vals[a as usize]
                || (self.vals[a as usize] == self.vals[b as usize] && b < a)
            {
                b as usize
            } else {
                a as usize
            },
        )
    }
}

/// Full LCE structure: suffix array, inverse, LCP, and range minimum.
#[derive(Debug, Clone)]
pub struct FullLce {
    len: usize,
    sa: Vec<u32>,
    rank: Vec<u32>,
    rmq: SparseTable,
}

impl FullLce {
    pub fn build(text: &[u64]) -> Result<Self, LceError> {
        if text.is_empty() {
            return Err(LceError::EmptyInput);
        }
        let sa = suffix_array(text);
        let rank = inverse_permutation(&sa);
        let lcp = lcp_array(text, &sa, &rank);
        Ok(FullLce::from_arrays(text.len(), sa, lcp))
    }

    /// Reassembles the structure from its persisted arrays.
    pub fn from_arrays(len: usize, sa: Vec<u32>, lcp: Vec<u32>) -> Self {
        let rank = inverse_permutation(&sa);
        let rmq = SparseTable::new(lcp.into_iter().map(u64::from).collect());
        FullLce { len, sa, rank, rmq }
    }

    pub fn text_len(&self) -> usize {
        self.len
    }

    pub fn suffix_array(&self) -> &[u32] {
        &self.sa
    }

    pub fn lcp(&self) -> impl Iterator<Item = u32> + '_ {
        self.rmq.values().iter().map(|&v| v as u32)
    }

    /// Bytes held by the suffix array, inverse, and range-minimum tables.
    pub fn structure_bytes(&self) -> usize {
        self.sa.len() * 4 + self.rank.len() * 4 + self.rmq.table_bytes()
    }

    /// LCE of the suffixes starting at `i` and `j`: two rank lookups and one
    /// range minimum.
    pub fn lce(&self, i: usize, j: usize) -> Result<usize, LceError> {
        if i >= self.len || j >= self.len {
            return Err(LceError::OutOfRange {
                pos: i.max(j),
                len: self.len,
            });
        }
        if i == j {
            return Ok(self.len - i);
        }
        let (lo, hi) = order(self.rank[i], self.rank[j]);
        let m = self.rmq.range_min(lo + 1, hi)?;
        Ok(self.rmq.values()[m] as usize)
    }
}

fn order(a: u32, b: u32) -> (usize, usize) {
    if a < b {
        (a as usize, b as usize)
    } else {
        (b as usize, a as usize)
    }
}

/// LCE restricted to a sampled position set; size linear in the sample count.
#[derive(Debug, Clone)]
pub struct SparseLce {
    text_len: usize,
    /// Sampled positions in lexicographic suffix order.
    order: Vec<u32>,
    rank_of: HashMap<u32, u32>,
    rmq: SparseTable,
}

impl SparseLce {
    /// Builds the sampled structure by filtering a full suffix array of the
    /// text; the sampled LCP is the running minimum of the full LCP between
    /// consecutive sampled entries.
    pub fn build(text: &[u64], positions: &[usize]) -> Result<Self, LceError> {
        if text.is_empty() {
            return Err(LceError::EmptyInput);
        }
        if positions.is_empty() {
            return Err(LceError::EmptySet);
        }
        let mut sampled = vec![false; text.len()];
        for &p in positions {
            if p >= text.len() {
                return Err(LceError::OutOfRange {
                    pos: p,
                    len: text.len(),
                });
            }
            sampled[p] = true;
        }
        let sa = suffix_array(text);
        let rank = inverse_permutation(&sa);
        let lcp = lcp_array(text, &sa, &rank);

        let mut order = Vec::new();
        let mut sampled_lcp = Vec::new();
        let mut run_min = u32::MAX;
        for (idx, &p) in sa.iter().enumerate() {
            if idx > 0 {
                run_min = run_min.min(lcp[idx]);
            }
            if sampled[p as usize] {
                if order.is_empty() {
                    sampled_lcp.push(0);
                } else {
                    sampled_lcp.push(run_min);
                }
                order.push(p);
                run_min = u32::MAX;
            }
        }
        Ok(SparseLce::from_arrays(text.len(), order, sampled_lcp))
    }

    pub fn from_arrays(text_len: usize, order: Vec<u32>, sampled_lcp: Vec<u32>) -> Self {
        let rank_of = order
            .iter()
            .enumerate()
            .map(|(r, &p)| (p, r as u32))
            .collect();
        let rmq = SparseTable::new(sampled_lcp.into_iter().map(u64::from).collect());
        SparseLce {
            text_len,
            order,
            rank_of,
            rmq,
        }
    }

    pub fn text_len(&self) -> usize {
        self.text_len
    }

    pub fn sampled_count(&self) -> usize {
        self.order.len()
    }

    pub fn sampled_order(&self) -> &[u32] {
        &self.order
    }

    pub fn sampled_lcp(&self) -> impl Iterator<Item = u32> + '_ {
        self.rmq.values().iter().map(|&v| v as u32)
    }

    pub fn is_sampled(&self, pos: usize) -> bool {
        self.rank_of.contains_key(&(pos as u32))
    }

    /// Bytes held by the sampled order, rank map, and range-minimum tables.
    pub fn structure_bytes(&self) -> usize {
        self.order.len() * 4 + self.rank_of.len() * 8 + self.rmq.table_bytes()
    }

    /// LCE between two sampled positions.
    pub fn lce(&self, i: usize, j: usize) -> Result<usize, LceError> {
        let ri = *self
            .rank_of
            .get(&(i as u32))
            .ok_or(LceError::UnsampledPosition { pos: i })?;
        let rj = *self
            .rank_of
            .get(&(j as u32))
            .ok_or(LceError::UnsampledPosition { pos: j })?;
        if i == j {
            return Ok(self.text_len - i);
        }
        let (lo, hi) = order(ri, rj);
        let m = self.rmq.range_min(lo + 1, hi)?;
        Ok(self.rmq.values()[m] as usize)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::slp::naive_lce;

    fn codes(s: &str) -> Vec<u64> {
        s.chars().map(|c| c as u64).collect()
    }

    fn codes32(s: &str) -> Vec<u32> {
        s.chars().map(|c| c as u32).collect()
    }

    #[test]
    fn banana_suffix_array() {
        let fl = FullLce::build(&codes("banana")).unwrap();
        assert_eq!(fl.suffix_array(), &[5, 3, 1, 0, 4, 2]);
    }

    #[test]
    fn aaa_lcp() {
        let fl = FullLce::build(&codes("aaa")).unwrap();
        assert_eq!(fl.suffix_array(), &[2, 1, 0]);
        // lcp[1] = lce("a", "aa") = 1, lcp[2] = lce("aa", "aaa") = 2.
        assert_eq!(fl.lcp().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn single_char_text() {
        let fl = FullLce::build(&codes("x")).unwrap();
        assert_eq!(fl.suffix_array(), &[0]);
        assert_eq!(fl.lce(0, 0).unwrap(), 1);
    }

    #[test]
    fn lce_full_examples() {
        let fl = FullLce::build(&codes("banana")).unwrap();
        assert_eq!(fl.lce(1, 3).unwrap(), 3);
        assert_eq!(fl.lce(2, 2).unwrap(), 4);
        let fl = FullLce::build(&codes("abab")).unwrap();
        assert_eq!(fl.lce(0, 2).unwrap(), 2);
        assert!(fl.lce(0, 4).is_err());
    }

    #[test]
    fn lce_full_matches_naive_exhaustively() {
        let texts = [
            "aaaaaaaaaaaaaaaaaaaa".to_string(),
            "abababbaabbaababbbaa".to_string(),
            "the quick brown fox jumps over the lazy dog".to_string(),
            {
                // Deterministic pseudo-random binary text.
                let mut x = 0x12345678u64;
                (0..200)
                    .map(|_| {
                        x = x
                            .wrapping_mul(6364136223846793005)
                            .wrapping_add(1442695040888963407);
                        if x >> 63 == 0 {
                            'a'
                        } else {
                            'b'
                        }
                    })
                    .collect()
            },
        ];
        for t in &texts {
            let wide = codes(t);
            let narrow = codes32(t);
            let fl = FullLce::build(&wide).unwrap();
            for i in 0..wide.len() {
                for j in 0..wide.len() {
                    assert_eq!(
                        fl.lce(i, j).unwrap(),
                        naive_lce(&narrow, i, j).unwrap(),
                        "text {t:?} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn sparse_example() {
        let sl = SparseLce::build(&codes("abcabd"), &[0, 3]).unwrap();
        // "abcabd" < "abd", so the sampled order is [0, 3].
        assert_eq!(sl.sampled_order(), &[0, 3]);
        assert_eq!(sl.sampled_lcp().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(sl.lce(0, 3).unwrap(), 2);
        assert_eq!(sl.lce(0, 0).unwrap(), 6);
        assert_eq!(sl.lce(1, 3), Err(LceError::UnsampledPosition { pos: 1 }));
    }

    #[test]
    fn sparse_with_all_positions_behaves_like_full() {
        let text = codes("mississippi");
        let all: Vec<usize> = (0..text.len()).collect();
        let sl = SparseLce::build(&text, &all).unwrap();
        let fl = FullLce::build(&text).unwrap();
        for i in 0..text.len() {
            for j in 0..text.len() {
                assert_eq!(sl.lce(i, j).unwrap(), fl.lce(i, j).unwrap());
            }
        }
    }

    #[test]
    fn sparse_singleton() {
        let sl = SparseLce::build(&codes("abcdef"), &[0]).unwrap();
        assert_eq!(sl.lce(0, 0).unwrap(), 6);
        assert!(sl.lce(0, 1).is_err());
    }

    #[test]
    fn sparse_rejects_bad_input() {
        assert!(matches!(
            SparseLce::build(&[], &[0]),
            Err(LceError::EmptyInput)
        ));
        assert!(matches!(
            SparseLce::build(&codes("ab"), &[]),
            Err(LceError::EmptySet)
        ));
        assert!(matches!(
            SparseLce::build(&codes("ab"), &[5]),
            Err(LceError::OutOfRange { pos: 5, len: 2 })
        ));
    }

    #[test]
    fn separators_compare_by_code() {
        // Text with codes far beyond the byte range interleaved.
        let text: Vec<u64> = vec![97, 98, 1 << 40, 97, 98, (1 << 40) + 1, 97, 98];
        let fl = FullLce::build(&text).unwrap();
        // Positions 0 and 3: "ab<sep0>..." vs "ab<sep1>..." share exactly "ab".
        assert_eq!(fl.lce(0, 3).unwrap(), 2);
        assert_eq!(fl.lce(3, 6).unwrap(), 2);
        assert_eq!(fl.lce(0, 6).unwrap(), 2);
    }

    #[test]
    fn range_min_cases() {
        let st = SparseTable::new(vec![3, 1, 2]);
        assert_eq!(st.range_min(0, 2).unwrap(), 1);
        assert_eq!(st.range_min(1, 1).unwrap(), 1);
        let st = SparseTable::new(vec![2, 1, 1]);
        assert_eq!(st.range_min(0, 2).unwrap(), 1, "leftmost tie");
        assert!(st.range_min(0, 3).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn full_lce_matches_naive(text in prop::collection::vec(0u32..4, 1..150)) {
                let wide: Vec<u64> = text.iter().map(|&c| c as u64).collect();
                let fl = FullLce::build(&wide).unwrap();
                for i in 0..text.len() {
                    for j in 0..text.len() {
                        prop_assert_eq!(fl.lce(i, j).unwrap(), naive_lce(&text, i, j).unwrap());
                    }
                }
            }

            #[test]
            fn sparse_lce_matches_naive_on_sampled_pairs(
                text in prop::collection::vec(0u32..3, 2..120),
                stride in 1usize..5,
            ) {
                let wide: Vec<u64> = text.iter().map(|&c| c as u64).collect();
                let positions: Vec<usize> = (0..text.len()).step_by(stride).collect();
                let sl = SparseLce::build(&wide, &positions).unwrap();
                for &i in &positions {
                    for &j in &positions {
                        prop_assert_eq!(sl.lce(i, j).unwrap(), naive_lce(&text, i, j).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn range_min_matches_scan_on_random_arrays() {
        let mut x = 7u64;
        for n in [1usize, 2, 3, 7, 16, 33, 100] {
            let vals: Vec<u64> = (0..n)
                .map(|_| {
                    x = x.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
                    x % 10
                })
                .collect();
            let st = SparseTable::new(vals.clone());
            for l in 0..n {
                for r in l..n {
                    let scan = (l..=r).min_by_key(|&t| (vals[t], t)).unwrap();
                    assert_eq!(st.range_min(l, r).unwrap(), scan, "n={n} l={l} r={r}");
                }
            }
        }
    }
}
