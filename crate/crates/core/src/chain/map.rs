use std::fmt;
use std::sync::Arc;

use super::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::linalg::{int, Matrix, Ring, Scalar};

pub(crate) fn sign(k: i64) -> i64 {
    if k.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

pub(crate) fn same(a: &Arc<ChainComplex>, b: &Arc<ChainComplex>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Degree-`d` graded map: `blocks` hold `f_n : src_n → tgt_{n+d}` for every
/// degree of the source support.
#[derive(Clone, PartialEq, Eq)]
pub struct GradedMap {
    src: Arc<ChainComplex>,
    tgt: Arc<ChainComplex>,
    degree: i64,
    blocks: Vec<Matrix>,
}

impl GradedMap {
    pub fn new(src: impl Into<Arc<ChainComplex>>, tgt: impl Into<Arc<ChainComplex>>, degree: i64, blocks: Vec<Matrix>) -> Result<Self> {
        let (src, tgt) = (src.into(), tgt.into());
        if src.ring() != tgt.ring() {
            return Err(Error::RingMismatch(src.ring().clone(), tgt.ring().clone()));
        }
        let expected = if src.is_zero() { 0 } else { src.ranks().len() };
        if blocks.len() != expected {
            return Err(Error::Shape(format!("{} blocks for a source with {expected} degrees", blocks.len())));
        }
        for (k, b) in blocks.iter().enumerate() {
            let n = src.lo() + k as i64;
            if b.shape() != (tgt.rank(n + degree), src.rank(n)) {
                return Err(Error::Shape(format!(
                    "block at degree {n} is {}x{}, expected {}x{}",
                    b.rows(),
                    b.cols(),
                    tgt.rank(n + degree),
                    src.rank(n)
                )));
            }
            if b.ring() != src.ring() {
                return Err(Error::RingMismatch(src.ring().clone(), b.ring().clone()));
            }
        }
        Ok(GradedMap { src, tgt, degree, blocks })
    }

    /// `f(n)` is called for each source degree and must have the right shape.
    pub fn from_fn(
        src: impl Into<Arc<ChainComplex>>,
        tgt: impl Into<Arc<ChainComplex>>,
        degree: i64,
        mut f: impl FnMut(i64) -> Matrix,
    ) -> Result<Self> {
        let src = src.into();
        let blocks = if src.is_zero() { Vec::new() } else { src.degrees().map(&mut f).collect() };
        Self::new(src, tgt, degree, blocks)
    }

    pub(crate) fn from_fn_unchecked(
        src: &Arc<ChainComplex>,
        tgt: &Arc<ChainComplex>,
        degree: i64,
        f: impl FnMut(i64) -> Matrix,
    ) -> Self {
        let blocks: Vec<Matrix> = if src.is_zero() { Vec::new() } else { src.degrees().map(f).collect() };
        debug_assert!(blocks
            .iter()
            .enumerate()
            .all(|(k, b)| b.shape() == (tgt.rank(src.lo() + k as i64 + degree), src.rank(src.lo() + k as i64))));
        GradedMap { src: src.clone(), tgt: tgt.clone(), degree, blocks }
    }

    pub fn zero(src: impl Into<Arc<ChainComplex>>, tgt: impl Into<Arc<ChainComplex>>, degree: i64) -> Self {
        let (src, tgt) = (src.into(), tgt.into());
        let ring = src.ring().clone();
        Self::from_fn_unchecked(&src, &tgt, degree, |n| Matrix::zeros(&ring, tgt.rank(n + degree), src.rank(n)))
    }

    pub fn identity(c: impl Into<Arc<ChainComplex>>) -> Self {
        let c = c.into();
        let ring = c.ring().clone();
        Self::from_fn_unchecked(&c, &c, 0, |n| Matrix::identity(&ring, c.rank(n)))
    }

    pub fn src(&self) -> &Arc<ChainComplex> {
        &self.src
    }

    pub fn tgt(&self) -> &Arc<ChainComplex> {
        &self.tgt
    }

    pub fn ring(&self) -> &Ring {
        self.src.ring()
    }

    pub fn degree(&self) -> i64 {
        self.degree
    }

    /// `f_n`, zero of the right shape outside the source support.
    pub fn block(&self, n: i64) -> Matrix {
        self.block_ref(n)
            .cloned()
            .unwrap_or_else(|| Matrix::zeros(self.ring(), self.tgt.rank(n + self.degree), self.src.rank(n)))
    }

    pub(crate) fn block_ref(&self, n: i64) -> Option<&Matrix> {
        if self.src.is_zero() || n < self.src.lo() || n > self.src.hi() {
            None
        } else {
            Some(&self.blocks[(n - self.src.lo()) as usize])
        }
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(Matrix::is_zero)
    }

    /// `self ∘ f`.
    pub fn compose(&self, f: &GradedMap) -> Result<GradedMap> {
        if !same(f.tgt(), self.src()) {
            return Err(Error::Shape("composition: target of the first map is not the source of the second".into()));
        }
        let d = f.degree;
        Ok(Self::from_fn_unchecked(&f.src, &self.tgt, d + self.degree, |n| &self.block(n + d) * &f.block(n)))
    }

    fn check_parallel(&self, other: &GradedMap) -> Result<()> {
        if !same(&self.src, &other.src) || !same(&self.tgt, &other.tgt) || self.degree != other.degree {
            return Err(Error::Shape("maps are not parallel".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &GradedMap) -> Result<GradedMap> {
        self.check_parallel(other)?;
        Ok(Self::from_fn_unchecked(&self.src, &self.tgt, self.degree, |n| &self.block(n) + &other.block(n)))
    }

    pub fn sub(&self, other: &GradedMap) -> Result<GradedMap> {
        self.check_parallel(other)?;
        Ok(Self::from_fn_unchecked(&self.src, &self.tgt, self.degree, |n| &self.block(n) - &other.block(n)))
    }

    pub fn scale(&self, c: &Scalar) -> GradedMap {
        Self::from_fn_unchecked(&self.src, &self.tgt, self.degree, |n| self.block(n).scale(c))
    }

    pub fn neg(&self) -> GradedMap {
        self.scale(&int(-1))
    }

    /// Leibniz differential `D(f) = ∂∘f − (−1)^d f∘∂`, of degree `d − 1`.
    pub fn differential(&self) -> GradedMap {
        let d = self.degree;
        let s = sign(d);
        Self::from_fn_unchecked(&self.src, &self.tgt, d - 1, |n| {
            let left = &self.tgt.d(n + d) * &self.block(n);
            let right = &self.block(n - 1) * &self.src.d(n);
            &left - &right.scale_i64(s)
        })
    }

    /// Cycle condition `D(f) = 0`.
    pub fn is_chain_map(&self) -> bool {
        self.differential().is_zero()
    }

    pub fn ensure_chain_map(&self) -> Result<()> {
        let df = self.differential();
        match df.src.degrees().find(|&n| !df.block(n).is_zero()) {
            None => Ok(()),
            Some(n) => Err(Error::NotAChainMap(format!("Leibniz condition fails at source degree {n}"))),
        }
    }

    /// Same map with the source or target complex replaced by an equal one.
    pub fn retarget(&self, src: &Arc<ChainComplex>, tgt: &Arc<ChainComplex>) -> Result<GradedMap> {
        if !same(src, &self.src) || !same(tgt, &self.tgt) {
            return Err(Error::Shape("retarget to a different complex".into()));
        }
        Ok(GradedMap { src: src.clone(), tgt: tgt.clone(), degree: self.degree, blocks: self.blocks.clone() })
    }
}

impl fmt::Debug for GradedMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GradedMap(deg {}) {{", self.degree)?;
        for n in self.src.degrees() {
            write!(f, " f{n}={:?}", self.block(n))?;
        }
        write!(f, " }}")
    }
}
