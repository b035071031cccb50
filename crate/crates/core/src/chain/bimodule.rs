use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::complex::ChainComplex;
use super::map::GradedMap;
use crate::error::{Error, Result};
use crate::linalg::{big, Matrix, Ring, Scalar};

/// Ring endomorphism applied to coefficients on one generator of a bimodule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Twist {
    Identity,
    /// `x ↦ x^k`; only a ring endomorphism when it fixes every element.
    Power(u32),
}

impl Twist {
    pub fn validate(&self, ring: &Ring) -> Result<()> {
        match (self, ring) {
            (Twist::Identity, _) | (Twist::Power(1), _) => Ok(()),
            (Twist::Power(0), _) => Err(Error::Diagram("x ↦ x^0 is not a ring endomorphism".into())),
            (Twist::Power(k), Ring::IntegersMod(m)) => {
                if *m > 1 << 20 {
                    return Err(Error::Diagram(format!("cannot certify x ↦ x^{k} on {ring}: modulus too large")));
                }
                let mm = BigInt::from(*m);
                let ok = (0..*m).all(|x| BigInt::from(x).modpow(&BigInt::from(*k), &mm) == BigInt::from(x));
                if ok {
                    Ok(())
                } else {
                    Err(Error::Diagram(format!("x ↦ x^{k} is not a ring endomorphism of {ring}")))
                }
            }
            (Twist::Power(k), _) => Err(Error::Diagram(format!("x ↦ x^{k} is not a ring endomorphism of {ring}"))),
        }
    }

    pub fn apply(&self, ring: &Ring, x: &Scalar) -> Scalar {
        match self {
            Twist::Identity => x.clone(),
            Twist::Power(k) => match ring.modulus() {
                Some(m) => big(x.to_integer().modpow(&BigInt::from(*k), &BigInt::from(m))),
                None => x.clone(),
            },
        }
    }

    pub fn apply_matrix(&self, m: &Matrix) -> Matrix {
        match self {
            Twist::Identity => m.clone(),
            _ => m.map_entries(|x| self.apply(m.ring(), x)),
        }
    }

    /// `self ∘ other`.
    pub fn then_apply(&self, other: &Twist) -> Twist {
        match (self, other) {
            (Twist::Identity, t) | (t, Twist::Identity) => *t,
            (Twist::Power(a), Twist::Power(b)) => Twist::Power(a.saturating_mul(*b)),
        }
    }
}

/// Free bimodule `R^rank` whose right action on generator `g` is twisted by
/// `twists[g]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Bimodule {
    pub ring: Ring,
    pub rank: usize,
    pub twists: Vec<Twist>,
}

impl Bimodule {
    pub fn new(ring: &Ring, twists: Vec<Twist>) -> Result<Self> {
        for t in &twists {
            t.validate(ring)?;
        }
        Ok(Bimodule { ring: ring.clone(), rank: twists.len(), twists })
    }

    /// `R^rank` with identity twists.
    pub fn free(ring: &Ring, rank: usize) -> Self {
        Bimodule { ring: ring.clone(), rank, twists: vec![Twist::Identity; rank] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.twists.len() != self.rank {
            return Err(Error::Diagram(format!("bimodule of rank {} lists {} twists", self.rank, self.twists.len())));
        }
        self.twists.iter().try_for_each(|t| t.validate(&self.ring))
    }

    /// `self ⊗ other`. Generator `(s, t)` sits at index `t·rank(self) + s`,
    /// which makes `(C ⊗ S) ⊗ T` literally equal to `C ⊗ (S ⊗ T)`.
    pub fn tensor(&self, other: &Bimodule) -> Bimodule {
        let mut twists = Vec::with_capacity(self.rank * other.rank);
        for t in &other.twists {
            for s in &self.twists {
                twists.push(t.then_apply(s));
            }
        }
        Bimodule { ring: self.ring.clone(), rank: twists.len(), twists }
    }

    /// `S^{⊗k}`; the unit bimodule for `k = 0`.
    pub fn power(&self, k: usize) -> Bimodule {
        (0..k).fold(Bimodule::free(&self.ring, 1), |acc, _| acc.tensor(self))
    }

    fn twisted_blocks(&self, m: &Matrix) -> Matrix {
        let blocks: Vec<Matrix> = self.twists.iter().map(|t| t.apply_matrix(m)).collect();
        Matrix::block_diag(&self.ring, &blocks.iter().collect::<Vec<_>>())
    }
}

/// `C ⊗ S`: generator `(i, g)` at index `g·rank(C_n) + i`, differential
/// `⊕_g τ_g(∂)`.
pub fn tensor_with_bimodule(c: &ChainComplex, s: &Bimodule) -> Result<ChainComplex> {
    if c.ring() != &s.ring {
        return Err(Error::RingMismatch(c.ring().clone(), s.ring.clone()));
    }
    if c.is_zero() {
        return Ok(c.clone());
    }
    let ranks = c.ranks().iter().map(|r| r * s.rank).collect();
    let diffs = (c.lo() + 1..=c.hi()).map(|n| s.twisted_blocks(&c.d(n))).collect();
    Ok(ChainComplex::from_parts(c.ring(), c.lo(), ranks, diffs))
}

/// `f ⊗ 1_S` between the tensored complexes.
pub fn tensor_map(f: &GradedMap, s: &Bimodule) -> Result<GradedMap> {
    let src = Arc::new(tensor_with_bimodule(f.src(), s)?);
    let tgt = Arc::new(tensor_with_bimodule(f.tgt(), s)?);
    tensor_map_into(f, s, &src, &tgt)
}

/// `f ⊗ 1_S` with caller-supplied (equal) copies of the tensored complexes.
pub fn tensor_map_into(f: &GradedMap, s: &Bimodule, src: &Arc<ChainComplex>, tgt: &Arc<ChainComplex>) -> Result<GradedMap> {
    GradedMap::from_fn(src.clone(), tgt.clone(), f.degree(), |n| s.twisted_blocks(&f.block(n)))
}

/// Matrix-level `m ⊗ 1_S`.
pub fn tensor_matrix(m: &Matrix, s: &Bimodule) -> Matrix {
    s.twisted_blocks(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ChainComplex {
        ChainComplex::two_term(0, Matrix::from_i64(&Ring::Integers, &[&[3, 1]]))
    }

    #[test]
    fn rank_one_identity_is_unchanged() {
        let c = sample();
        assert_eq!(tensor_with_bimodule(&c, &Bimodule::free(&Ring::Integers, 1)).unwrap(), c);
    }

    #[test]
    fn rank_two_doubles() {
        let c = sample();
        let t = tensor_with_bimodule(&c, &Bimodule::free(&Ring::Integers, 2)).unwrap();
        assert_eq!(t.ranks(), &[2, 4]);
        assert_eq!(t.d(1), Matrix::from_i64(&Ring::Integers, &[&[3, 1, 0, 0], &[0, 0, 3, 1]]));
    }

    #[test]
    fn power_twist_on_prime_field() {
        let r = Ring::IntegersMod(5);
        let s = Bimodule::new(&r, vec![Twist::Power(5)]).unwrap();
        let c = ChainComplex::two_term(0, Matrix::from_i64(&r, &[&[3]]));
        assert_eq!(tensor_with_bimodule(&c, &s).unwrap(), c);
        assert!(Bimodule::new(&r, vec![Twist::Power(2)]).is_err());
        assert!(Bimodule::new(&Ring::Integers, vec![Twist::Power(2)]).is_err());
    }

    #[test]
    fn tensor_is_associative_on_the_nose() {
        let r = Ring::Integers;
        let (s, t) = (Bimodule::free(&r, 2), Bimodule::free(&r, 3));
        let c = sample();
        let left = tensor_with_bimodule(&tensor_with_bimodule(&c, &s).unwrap(), &t).unwrap();
        let right = tensor_with_bimodule(&c, &s.tensor(&t)).unwrap();
        assert_eq!(left, right);
    }
}
