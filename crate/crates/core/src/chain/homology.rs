use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use super::complex::ChainComplex;
use crate::error::{Error, Result};
use crate::linalg::{big, diagonalize, invariant_factors, kernel_basis, rank, solve_linear, Matrix, Ring};

/// One homology module. Over Z: `Z^betti ⊕ ⊕ Z/t`. Over Q: `Q^betti`.
/// Over Z/m: `(Z/m)^betti ⊕ ⊕ Z/t` with every `t` a proper divisor of `m`;
/// `non_free` is set when such summands occur.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub betti: usize,
    #[serde(serialize_with = "crate::io::ser_bigints")]
    pub torsion: Vec<BigInt>,
    pub non_free: bool,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.betti == 0 && self.torsion.is_empty()
    }

    /// Cardinality of the torsion part.
    pub fn torsion_order(&self) -> BigInt {
        self.torsion.iter().product()
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        if self.betti > 0 {
            parts.push(format!("R^{}", self.betti));
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        write!(f, "{}", parts.join(" ⊕ "))
    }
}

/// Homology in every degree of the support, lowest degree first.
pub fn homology(c: &ChainComplex) -> Result<Vec<(i64, HomologyGroup)>> {
    c.degrees().map(|n| Ok((n, homology_at(c, n)?))).collect()
}

pub fn homology_at(c: &ChainComplex, n: i64) -> Result<HomologyGroup> {
    match c.ring() {
        Ring::Rationals => {
            let betti = c.rank(n) - rank(&c.d(n)) - rank(&c.d(n + 1));
            Ok(HomologyGroup { betti, torsion: Vec::new(), non_free: false })
        }
        Ring::Integers => {
            let z = kernel_basis(&c.d(n))?;
            let b = c.d(n + 1);
            let coords = solve_linear(&z, &b)?
                .ok_or_else(|| Error::Invariant(format!("boundaries at degree {n} are not cycles")))?;
            let r = rank(&coords);
            let torsion: Vec<BigInt> = invariant_factors(&coords)?.into_iter().filter(|t| !t.is_one()).collect();
            Ok(HomologyGroup { betti: z.cols() - r, torsion, non_free: false })
        }
        Ring::IntegersMod(m) => modular_homology(c, n, *m),
    }
}

/// Lifts to Z: cycles are `{x : ∂x ≡ 0 mod m}`, boundaries are
/// `im ∂ + mZ^r`, and the quotient is a finite Z/m-module.
fn modular_homology(c: &ChainComplex, n: i64, m: u64) -> Result<HomologyGroup> {
    let z = Ring::Integers;
    let r = c.rank(n);
    let mm = BigInt::from(m);
    let lift = |a: &Matrix| a.to_ring(&z).expect("residues are integers");
    let m_id = |k: usize| Matrix::scalar_identity(&z, k, &big(mm.clone()));

    let dn = lift(&c.d(n));
    let stacked = dn.hstack(&m_id(dn.rows()));
    let kernel = kernel_basis(&stacked)?;
    let gens = kernel.submatrix(0..r, 0..kernel.cols());
    // Basis of the cycle lattice from its generating set.
    let dg = diagonalize(&gens);
    let mut basis = Matrix::zeros(&z, r, dg.rank);
    for j in 0..dg.rank {
        let dj = dg.d.get(j, j).clone();
        for i in 0..r {
            basis.set(i, j, dg.p_inv.get(i, j) * &dj);
        }
    }
    let bounds = lift(&c.d(n + 1)).hstack(&m_id(r));
    let coords = solve_linear(&basis, &bounds)?
        .ok_or_else(|| Error::Invariant(format!("boundaries at degree {n} are not cycles")))?;
    if rank(&coords) != basis.cols() {
        return Err(Error::Invariant("modular homology is not finite".into()));
    }
    let mut betti = 0;
    let mut torsion = Vec::new();
    for t in invariant_factors(&coords)? {
        if t == mm {
            betti += 1;
        } else if !t.is_one() && !t.is_zero() {
            torsion.push(t);
        }
    }
    Ok(HomologyGroup { betti, non_free: !torsion.is_empty(), torsion })
}

pub fn is_acyclic(c: &ChainComplex) -> Result<bool> {
    for n in c.degrees() {
        if !homology_at(c, n)?.is_zero() {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zm(r: &Ring, rows: &[&[i64]]) -> Matrix {
        Matrix::from_i64(r, rows)
    }

    #[test]
    fn times_two_over_z() {
        let c = ChainComplex::two_term(0, zm(&Ring::Integers, &[&[2]]));
        let h = homology(&c).unwrap();
        assert_eq!(h[0].1, HomologyGroup { betti: 0, torsion: vec![BigInt::from(2)], non_free: false });
        assert!(h[1].1.is_zero());
    }

    #[test]
    fn zero_differential() {
        let c = ChainComplex::two_term(0, Matrix::zeros(&Ring::Integers, 1, 2));
        let h = homology(&c).unwrap();
        assert_eq!((h[0].1.betti, h[1].1.betti), (1, 2));
    }

    #[test]
    fn times_two_over_q_and_mod() {
        let q = Ring::Rationals;
        assert!(is_acyclic(&ChainComplex::two_term(0, zm(&q, &[&[2]]))).unwrap());
        let r = Ring::IntegersMod(2);
        let h = homology(&ChainComplex::two_term(0, zm(&r, &[&[2]]))).unwrap();
        assert_eq!((h[0].1.betti, h[1].1.betti), (1, 1));
        let r = Ring::IntegersMod(4);
        let h = homology(&ChainComplex::two_term(0, zm(&r, &[&[2]]))).unwrap();
        assert_eq!(h[0].1.torsion, vec![BigInt::from(2)]);
        assert!(h[0].1.non_free && h[1].1.non_free);
    }

    #[test]
    fn unit_over_mod_is_acyclic() {
        let r = Ring::IntegersMod(6);
        assert!(is_acyclic(&ChainComplex::two_term(0, zm(&r, &[&[5]]))).unwrap());
    }
}
