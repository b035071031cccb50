use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Ring};

/// Bounded chain complex of finitely generated free modules.
///
/// `diffs[k]` is the differential out of degree `lo + k + 1`, a
/// `rank(lo + k) × rank(lo + k + 1)` matrix. Zero-rank degrees at either end
/// are trimmed, so structural equality is equality of complexes.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ChainComplex {
    ring: Ring,
    lo: i64,
    ranks: Vec<usize>,
    diffs: Vec<Matrix>,
}

impl ChainComplex {
    pub fn zero(ring: &Ring) -> Self {
        ChainComplex { ring: ring.clone(), lo: 0, ranks: Vec::new(), diffs: Vec::new() }
    }

    /// Checks shapes but not `∂∂ = 0`; see [`ChainComplex::validate`].
    pub fn with_shapes(ring: &Ring, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Result<Self> {
        ring.validate()?;
        if diffs.len() + 1 != ranks.len().max(1) {
            return Err(Error::Shape(format!("{} degrees need {} differentials, got {}", ranks.len(), ranks.len().saturating_sub(1), diffs.len())));
        }
        for (k, d) in diffs.iter().enumerate() {
            if d.ring() != ring {
                return Err(Error::RingMismatch(ring.clone(), d.ring().clone()));
            }
            if d.shape() != (ranks[k], ranks[k + 1]) {
                return Err(Error::Shape(format!(
                    "differential out of degree {} is {}x{}, expected {}x{}",
                    lo + k as i64 + 1,
                    d.rows(),
                    d.cols(),
                    ranks[k],
                    ranks[k + 1]
                )));
            }
        }
        let mut c = ChainComplex { ring: ring.clone(), lo, ranks, diffs };
        c.trim();
        Ok(c)
    }

    /// Shape-checked and verified to satisfy `∂∂ = 0`.
    pub fn new(ring: &Ring, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Result<Self> {
        let c = Self::with_shapes(ring, lo, ranks, diffs)?;
        let bad = c.validate();
        if !bad.is_empty() {
            return Err(Error::NotAComplex(format!("∂∂ ≠ 0 at degrees {bad:?}")));
        }
        Ok(c)
    }

    pub(crate) fn from_parts(ring: &Ring, lo: i64, ranks: Vec<usize>, diffs: Vec<Matrix>) -> Self {
        debug_assert!(diffs.len() + 1 == ranks.len().max(1));
        let mut c = ChainComplex { ring: ring.clone(), lo, ranks, diffs };
        c.trim();
        debug_assert!(c.validate().is_empty(), "construction produced ∂∂ ≠ 0");
        c
    }

    /// Builds from a closure giving the differential out of each degree in
    /// `lo+1..=hi`.
    pub fn from_fn(ring: &Ring, lo: i64, ranks: Vec<usize>, mut d: impl FnMut(i64) -> Matrix) -> Result<Self> {
        let diffs = (1..ranks.len()).map(|k| d(lo + k as i64)).collect();
        Self::new(ring, lo, ranks, diffs)
    }

    /// A single free module of the given rank placed in one degree.
    pub fn concentrated(ring: &Ring, degree: i64, rank: usize) -> Self {
        Self::from_parts(ring, degree, vec![rank], Vec::new())
    }

    /// Two-term complex `0 → R^cols → R^rows → 0` with the source in
    /// degree `lo + 1`.
    pub fn two_term(lo: i64, d: Matrix) -> Self {
        let ring = d.ring().clone();
        Self::from_parts(&ring, lo, vec![d.rows(), d.cols()], vec![d])
    }

    fn trim(&mut self) {
        while self.ranks.last() == Some(&0) {
            self.ranks.pop();
            self.diffs.pop();
        }
        let lead = self.ranks.iter().take_while(|&&r| r == 0).count();
        if lead > 0 {
            self.ranks.drain(..lead);
            self.diffs.drain(..lead.min(self.diffs.len()));
            self.lo += lead as i64;
        }
        if self.ranks.is_empty() {
            self.lo = 0;
            self.diffs.clear();
        }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    /// Lowest degree with nonzero rank (0 for the zero complex).
    pub fn lo(&self) -> i64 {
        self.lo
    }

    /// Highest degree with nonzero rank; `lo - 1` for the zero complex.
    pub fn hi(&self) -> i64 {
        self.lo + self.ranks.len() as i64 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i64> {
        self.lo..=self.hi()
    }

    pub fn is_zero(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank(&self, n: i64) -> usize {
        if n < self.lo || n > self.hi() {
            0
        } else {
            self.ranks[(n - self.lo) as usize]
        }
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.iter().sum()
    }

    /// `∂_n : C_n → C_{n-1}`; a zero matrix of the right shape outside the
    /// support.
    pub fn d(&self, n: i64) -> Matrix {
        if n > self.lo && n <= self.hi() {
            self.diffs[(n - self.lo - 1) as usize].clone()
        } else {
            Matrix::zeros(&self.ring, self.rank(n - 1), self.rank(n))
        }
    }

    pub(crate) fn d_ref(&self, n: i64) -> Option<&Matrix> {
        if n > self.lo && n <= self.hi() {
            Some(&self.diffs[(n - self.lo - 1) as usize])
        } else {
            None
        }
    }

    /// Degrees `n` at which `∂_{n-1} ∂_n ≠ 0`; empty iff this is a complex.
    pub fn validate(&self) -> Vec<i64> {
        (self.lo + 2..=self.hi()).filter(|&n| !(&self.d(n - 1) * &self.d(n)).is_zero()).collect()
    }

    /// Same differentials read over another ring (entries must be elements).
    pub fn to_ring(&self, ring: &Ring) -> Result<Self> {
        let diffs = self.diffs.iter().map(|d| d.to_ring(ring)).collect::<Result<Vec<_>>>()?;
        Self::new(ring, self.lo, self.ranks.clone(), diffs)
    }
}

impl fmt::Debug for ChainComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ChainComplex over {} {{", self.ring)?;
        for n in self.degrees() {
            write!(f, " C{n}=R^{}", self.rank(n))?;
            if n > self.lo {
                write!(f, " ∂{n}={:?}", self.d(n))?;
            }
        }
        write!(f, " }}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_complex_is_valid() {
        let z = ChainComplex::zero(&Ring::Integers);
        assert!(z.validate().is_empty());
        assert!(z.is_zero());
        assert_eq!(z.rank(3), 0);
    }

    #[test]
    fn multiplication_by_two_is_valid() {
        let c = ChainComplex::two_term(0, Matrix::from_i64(&Ring::Integers, &[&[2]]));
        assert!(c.validate().is_empty());
        assert_eq!(c.degrees(), 0..=1);
    }

    #[test]
    fn identity_twice_is_not_a_complex() {
        let r = Ring::Integers;
        let id = Matrix::identity(&r, 1);
        let c = ChainComplex::with_shapes(&r, 0, vec![1, 1, 1], vec![id.clone(), id.clone()]).unwrap();
        assert_eq!(c.validate(), vec![2]);
        assert!(ChainComplex::new(&r, 0, vec![1, 1, 1], vec![id.clone(), id]).is_err());
    }

    #[test]
    fn trimming_normalizes_support() {
        let r = Ring::Integers;
        let c = ChainComplex::new(&r, -1, vec![0, 2, 0], vec![Matrix::zeros(&r, 0, 2), Matrix::zeros(&r, 2, 0)]).unwrap();
        assert_eq!(c, ChainComplex::concentrated(&r, 0, 2));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let r = Ring::Integers;
        assert!(ChainComplex::new(&r, 0, vec![1, 2], vec![Matrix::zeros(&r, 2, 1)]).is_err());
    }
}
