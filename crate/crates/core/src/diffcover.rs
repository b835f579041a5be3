//! Difference covers modulo a perfect square.
//!
//! A difference cover modulo tau is a residue set D such that every
//! d in [0, tau) equals (b - a) mod tau for some a, b in D. We use
//! D = {0..s-1} union {i*s mod tau | i = 1..s} with s = sqrt(tau), which has
//! exactly 2s - 1 elements and admits a closed-form `cover_pair`, so no
//! search is ever needed.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoverError {
    NotPerfectSquare { tau: usize },
    TooSmall { tau: usize },
    OutOfRange { d: usize, tau: usize },
}

impl fmt::Display for CoverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoverError::NotPerfectSquare { tau } => {
                write!(f, "tau = {tau} is not a perfect square")
            }
            CoverError::TooSmall { tau } => write!(f, "tau = {tau} is below the minimum of 4"),
            CoverError::OutOfRange { d, tau } => {
                write!(f, "distance {d} out of range for tau {tau}")
            }
        }
    }
}

impl std::error::Error for CoverError {}

/// The sampling set modulo `tau` with O(1) pair lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DifferenceCover {
    tau: usize,
    s: usize,
    elements: Vec<usize>,
    membership: Vec<bool>,
}

impl DifferenceCover {
    /// Builds the cover for a perfect square `tau >= 4`.
    pub fn build(tau: usize) -> Result<Self, CoverError> {
        if tau < 4 {
            return Err(CoverError::TooSmall { tau });
        }
        let s = tau.isqrt();
        if s * s != tau {
            return Err(CoverError::NotPerfectSquare { tau });
        }
        let mut membership = vec![false; tau];
        membership[..s].fill(true);
        for i in 1..=s {
            membership[(i * s) % tau] = true;
        }
        let elements = (0..tau).filter(|&r| membership[r]).collect();
        Ok(DifferenceCover {
            tau,
            s,
            elements,
            membership,
        })
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    /// Two in-set residues at distance `d` modulo tau, by arithmetic alone:
    /// with d = q*s + r, the pair is (s-r, (q+1)*s) for r > 0 and (0, q*s)
    /// for r = 0.
    pub fn cover_pair(&self, d: usize) -> Result<(usize, usize), CoverError> {
        if d >= self.tau {
            return Err(CoverError::OutOfRange { d, tau: self.tau });
        }
        let r = d % self.s;
        if r == 0 {
            Ok((0, d))
        } else {
            let a = self.s - r;
            Ok((a, (a + d) % self.tau))
        }
    }

    /// Smallest-effort alignment: positions i' > i and j' > j with equal
    /// shift <= tau and both residues in the cover. The shift is the
    /// constructive one, not the minimal one.
    pub fn align(&self, i: usize, j: usize) -> (usize, usize) {
        let d = if j >= i {
            (j - i) % self.tau
        } else {
            (self.tau - (i - j) % self.tau) % self.tau
        };
        let (a, _) = self.cover_pair(d).expect("d < tau by construction");
        let mut shift = (a + self.tau - i % self.tau) % self.tau;
        if shift == 0 {
            shift = self.tau;
        }
        (i + shift, j + shift)
    }

    /// Membership of `pos` in the periodic sampled set D*.
    pub fn is_sampled(&self, pos: usize) -> bool {
        self.membership[pos % self.tau]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_tau_16() {
        let dc = DifferenceCover::build(16).unwrap();
        assert_eq!(dc.elements(), &[0, 1, 2, 3, 4, 8, 12]);
        assert_eq!(dc.elements().len(), 2 * 4 - 1);
    }

    #[test]
    fn build_tau_4() {
        let dc = DifferenceCover::build(4).unwrap();
        assert_eq!(dc.elements(), &[0, 1, 2]);
    }

    #[test]
    fn build_rejects_non_square_and_small() {
        assert_eq!(
            DifferenceCover::build(10),
            Err(CoverError::NotPerfectSquare { tau: 10 })
        );
        assert_eq!(
            DifferenceCover::build(3),
            Err(CoverError::TooSmall { tau: 3 })
        );
    }

    #[test]
    fn cover_pair_examples() {
        let dc9 = DifferenceCover::build(9).unwrap();
        assert_eq!(dc9.cover_pair(0).unwrap(), (0, 0));
        assert_eq!(dc9.cover_pair(5).unwrap(), (1, 6));
        let dc16 = DifferenceCover::build(16).unwrap();
        assert_eq!(dc16.cover_pair(15).unwrap(), (1, 0));
        assert!(dc16.cover_pair(16).is_err());
    }

    #[test]
    fn cover_pair_exhaustive_small() {
        for s in 2..=40usize {
            let tau = s * s;
            let dc = DifferenceCover::build(tau).unwrap();
            assert_eq!(dc.elements().len(), 2 * s - 1);
            for d in 0..tau {
                let (a, b) = dc.cover_pair(d).unwrap();
                assert!(dc.membership[a] && dc.membership[b], "tau={tau} d={d}");
                assert_eq!((b + tau - a) % tau, d, "tau={tau} d={d}");
            }
        }
    }

    #[test]
    fn align_examples() {
        let dc = DifferenceCover::build(9).unwrap();
        assert_eq!(dc.align(10, 23), (11, 24));
        assert!(dc.is_sampled(11) && dc.is_sampled(24));
        assert_eq!(dc.align(2, 2), (9, 9));
        assert!(dc.is_sampled(9));
    }

    #[test]
    fn align_always_lands_in_the_cover() {
        for s in 2..8usize {
            let dc = DifferenceCover::build(s * s).unwrap();
            for i in 0..50 {
                for j in 0..50 {
                    let (ip, jp) = dc.align(i, j);
                    assert!(ip > i && jp > j);
                    assert_eq!(ip - i, jp - j);
                    assert!(ip - i <= dc.tau());
                    assert!(dc.is_sampled(ip) && dc.is_sampled(jp), "i={i} j={j}");
                }
            }
        }
    }

    #[test]
    fn is_sampled_examples() {
        let dc = DifferenceCover::build(16).unwrap();
        assert!(dc.is_sampled(20));
        assert!(!dc.is_sampled(23));
        assert!(dc.is_sampled(0));
    }
}
