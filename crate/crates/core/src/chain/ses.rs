use std::sync::Arc;

use super::complex::ChainComplex;
use super::construct::{cone, desuspension};
use super::map::{same, GradedMap};
use crate::error::{Error, Result};
use crate::linalg::{solve_linear, split_injection, Matrix};

/// Degreewise split short exact sequence `0 → X → Y → Z → 0`.
#[derive(Clone, Debug)]
pub struct ShortExactSequence {
    pub inj: GradedMap,
    pub proj: GradedMap,
}

/// Degree-0 graded maps `t: Z → Y`, `r: Y → X` with `p t = 1`, `r i = 1`,
/// `i r + t p = 1`.
#[derive(Clone, Debug)]
pub struct SesSplitting {
    pub section: GradedMap,
    pub retraction: GradedMap,
}

impl ShortExactSequence {
    pub fn new(inj: GradedMap, proj: GradedMap) -> Result<Self> {
        if inj.degree() != 0 || proj.degree() != 0 {
            return Err(Error::Precondition("sequence maps must have degree 0".into()));
        }
        if !same(inj.tgt(), proj.src()) {
            return Err(Error::Shape("middle terms differ".into()));
        }
        inj.ensure_chain_map()?;
        proj.ensure_chain_map()?;
        if !proj.compose(&inj)?.is_zero() {
            return Err(Error::NotSplit("composite of the two maps is nonzero".into()));
        }
        let ses = ShortExactSequence { inj, proj };
        ses.splitting()?;
        Ok(ses)
    }

    pub fn x(&self) -> &Arc<ChainComplex> {
        self.inj.src()
    }

    pub fn y(&self) -> &Arc<ChainComplex> {
        self.inj.tgt()
    }

    pub fn z(&self) -> &Arc<ChainComplex> {
        self.proj.tgt()
    }

    /// Deterministic degreewise splitting; fails unless the sequence is
    /// exact and split in every degree.
    pub fn splitting(&self) -> Result<SesSplitting> {
        let (x, y, z) = (self.x(), self.y(), self.z());
        let ring = y.ring().clone();
        let mut t_blocks = Vec::new();
        let mut r_blocks = Vec::new();
        let lo = x.lo().min(y.lo()).min(z.lo());
        let hi = x.hi().max(y.hi()).max(z.hi());
        for n in lo..=hi {
            if y.rank(n) != x.rank(n) + z.rank(n) {
                return Err(Error::NotSplit(format!("ranks do not add up in degree {n}")));
            }
            let i = self.inj.block(n);
            let p = self.proj.block(n);
            let s = split_injection(&i).map_err(|_| Error::NotSplit(format!("degree {n}: not a split injection")))?;
            let pv = &p * &s.cokernel_section;
            let inv = solve_linear(&pv, &Matrix::identity(&ring, z.rank(n)))?
                .ok_or_else(|| Error::NotSplit(format!("degree {n}: not exact in the middle")))?;
            let t = &s.cokernel_section * &inv;
            let r = &s.retraction * &(&Matrix::identity(&ring, y.rank(n)) - &(&t * &p));
            t_blocks.push((n, t));
            r_blocks.push((n, r));
        }
        let pick = |v: &[(i64, Matrix)], n: i64| v.iter().find(|(m, _)| *m == n).map(|(_, b)| b.clone());
        let section = GradedMap::from_fn(z.clone(), y.clone(), 0, |n| pick(&t_blocks, n).expect("block"))?;
        let retraction = GradedMap::from_fn(y.clone(), x.clone(), 0, |n| pick(&r_blocks, n).expect("block"))?;
        Ok(SesSplitting { section, retraction })
    }

    /// `c = r ∘ (∂t − t∂) : Z → X`, a degree −1 chain map.
    pub fn connecting_map(&self) -> Result<GradedMap> {
        let s = self.splitting()?;
        s.retraction.compose(&s.section.differential())
    }
}

/// Rotation of a split sequence `0 → X → Y → Z → 0` into
/// `0 → s⁻¹Z → X ⊕ E → Y → 0` with `E = cone(1_{s⁻¹Z})` contractible.
///
/// With `φ = −c : s⁻¹Z → X` the middle term of the input is identified with
/// `cone(φ)`, and the output maps are `w ↦ (φw, (0, w))` and
/// `(x, w', w) ↦ i(x − φw) − t(w')`.
#[derive(Clone, Debug)]
pub struct Rotation {
    pub ses: ShortExactSequence,
    /// `φ : s⁻¹Z → X`.
    pub phi: GradedMap,
    pub acyclic: Arc<ChainComplex>,
}

pub fn rotate_ses(ses: &ShortExactSequence) -> Result<Rotation> {
    let split = ses.splitting()?;
    let c = ses.connecting_map()?;
    let (x, y, z) = (ses.x(), ses.y(), ses.z());
    let w = Arc::new(desuspension(z));
    // φ_n = −c_{n+1} : Z_{n+1} → X_n
    let phi = GradedMap::from_fn(w.clone(), x.clone(), 0, |n| c.block(n + 1).scale_i64(-1))?;
    let e = cone(&GradedMap::identity(w.clone()))?;
    let middle_parts = [x.clone(), e.complex.clone()];
    let sum = super::construct::direct_sum(&middle_parts)?;
    let mid = sum.complex.clone();
    let into_e = e.inclusion.clone();
    let inj = sum.inclusions[0].compose(&phi)?.add(&sum.inclusions[1].compose(&into_e)?)?;
    // E_n = W_{n−1} ⊕ W_n = Z_n ⊕ Z_{n+1}
    let proj = GradedMap::from_fn(mid.clone(), y.clone(), 0, |n| {
        let i = ses.inj.block(n);
        let t = split.section.block(n);
        let first = i.clone();
        let second = t.scale_i64(-1);
        let third = (&i * &phi.block(n)).scale_i64(-1);
        first.hstack(&second).hstack(&third)
    })?;
    debug_assert!(mid.degrees().all(|n| mid.rank(n) == x.rank(n) + z.rank(n) + z.rank(n + 1)));
    let out = ShortExactSequence::new(inj, proj)?;
    Ok(Rotation { ses: out, phi, acyclic: e.complex })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::construct::direct_sum;
    use crate::chain::{homology, is_acyclic};
    use crate::linalg::Ring;

    fn two() -> Arc<ChainComplex> {
        Arc::new(ChainComplex::two_term(0, Matrix::from_i64(&Ring::Integers, &[&[2]])))
    }

    #[test]
    fn splits_across_a_gap_in_degrees() {
        let ring = Ring::Integers;
        let gap = Arc::new(ChainComplex::with_shapes(&ring, 0, vec![1, 0, 1], vec![Matrix::zeros(&ring, 1, 0), Matrix::zeros(&ring, 0, 1)]).unwrap());
        let zero = Arc::new(ChainComplex::zero(&ring));
        let ses = ShortExactSequence::new(GradedMap::identity(gap.clone()), GradedMap::zero(gap, zero, 0)).unwrap();
        assert!(ses.connecting_map().unwrap().is_zero());
    }

    #[test]
    fn split_sum_has_zero_connecting_map() {
        let (x, z) = (two(), Arc::new(ChainComplex::concentrated(&Ring::Integers, 1, 1)));
        let s = direct_sum(&[x.clone(), z.clone()]).unwrap();
        let ses = ShortExactSequence::new(s.inclusions[0].clone(), s.projections[1].clone()).unwrap();
        assert!(ses.connecting_map().unwrap().is_zero());
        let rot = rotate_ses(&ses).unwrap();
        assert!(rot.phi.is_zero());
        assert!(is_acyclic(&rot.acyclic).unwrap());
    }

    #[test]
    fn rotation_of_a_cone_sequence() {
        let x = two();
        let c = cone(&GradedMap::identity(x.clone())).unwrap();
        let ses = ShortExactSequence::new(c.inclusion.clone(), c.projection.clone()).unwrap();
        let rot = rotate_ses(&ses).unwrap();
        assert!(rot.phi.is_chain_map());
        assert_eq!(**rot.ses.z(), *c.complex);
        // X ⊕ E carries the homology of X; the cone of the identity has none.
        let mid = homology(rot.ses.y()).unwrap();
        assert_eq!(mid.iter().filter(|(_, h)| !h.is_zero()).count(), 1);
        assert!(is_acyclic(rot.ses.z()).unwrap());
    }
}
