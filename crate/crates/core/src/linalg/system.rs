//! Matrix equations of the form `Σ L·X_k·R = B` in unknown matrix blocks,
//! flattened row-major into one dense linear system.

use num_traits::Zero;

use super::matrix::Matrix;
use super::ring::{Ring, Scalar};
use super::snf::{kernel_basis, solve_linear};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
struct Term {
    unknown: usize,
    left: Matrix,
    right: Matrix,
}

#[derive(Clone, Debug)]
struct Equation {
    rhs: Matrix,
    terms: Vec<Term>,
}

#[derive(Clone, Debug)]
pub struct LinearSystem {
    ring: Ring,
    unknowns: Vec<(usize, usize)>,
    offsets: Vec<usize>,
    equations: Vec<Equation>,
}

impl LinearSystem {
    pub fn new(ring: &Ring) -> Self {
        LinearSystem { ring: ring.clone(), unknowns: Vec::new(), offsets: Vec::new(), equations: Vec::new() }
    }

    pub fn ring(&self) -> &Ring {
        &self.ring
    }

    pub fn add_unknown(&mut self, rows: usize, cols: usize) -> usize {
        self.offsets.push(self.num_variables());
        self.unknowns.push((rows, cols));
        self.unknowns.len() - 1
    }

    pub fn unknown_shape(&self, k: usize) -> (usize, usize) {
        self.unknowns[k]
    }

    pub fn num_variables(&self) -> usize {
        self.unknowns.iter().map(|(r, c)| r * c).sum()
    }

    pub fn num_equations(&self) -> usize {
        self.equations.iter().map(|e| e.rhs.rows() * e.rhs.cols()).sum()
    }

    /// New block equation `Σ terms = rhs`; returns its handle.
    pub fn add_equation(&mut self, rhs: Matrix) -> usize {
        self.equations.push(Equation { rhs, terms: Vec::new() });
        self.equations.len() - 1
    }

    /// Homogeneous block equation of the given shape.
    pub fn add_zero_equation(&mut self, rows: usize, cols: usize) -> usize {
        let z = Matrix::zeros(&self.ring, rows, cols);
        self.add_equation(z)
    }

    /// Adds `left · X_unknown · right` to equation `eq`.
    pub fn add_term(&mut self, eq: usize, unknown: usize, left: Matrix, right: Matrix) -> Result<()> {
        let (p, q) = self.unknowns[unknown];
        let e = &self.equations[eq];
        if left.cols() != p || right.rows() != q || left.rows() != e.rhs.rows() || right.cols() != e.rhs.cols() {
            return Err(Error::Shape(format!(
                "term {}x{} · X({p}x{q}) · {}x{} in a {}x{} equation",
                left.rows(),
                left.cols(),
                right.rows(),
                right.cols(),
                e.rhs.rows(),
                e.rhs.cols()
            )));
        }
        if left.is_zero() || right.is_zero() {
            return Ok(());
        }
        self.equations[eq].terms.push(Term { unknown, left, right });
        Ok(())
    }

    /// Dense coefficient matrix and right-hand side column.
    pub fn assemble(&self) -> (Matrix, Matrix) {
        let nv = self.num_variables();
        let ne = self.num_equations();
        let mut data = vec![Scalar::zero(); ne * nv];
        let mut rhs = vec![Scalar::zero(); ne];
        let mut row0 = 0;
        for e in &self.equations {
            let (er, ec) = e.rhs.shape();
            for a in 0..er {
                for b in 0..ec {
                    rhs[row0 + a * ec + b] = e.rhs.get(a, b).clone();
                }
            }
            for t in &e.terms {
                let (p, q) = self.unknowns[t.unknown];
                let off = self.offsets[t.unknown];
                for a in 0..er {
                    for i in 0..p {
                        let l = t.left.get(a, i);
                        if l.is_zero() {
                            continue;
                        }
                        for j in 0..q {
                            for b in 0..ec {
                                let r = t.right.get(j, b);
                                if r.is_zero() {
                                    continue;
                                }
                                let cell = &mut data[(row0 + a * ec + b) * nv + off + i * q + j];
                                *cell = self.ring.add(cell, &self.ring.mul(l, r));
                            }
                        }
                    }
                }
            }
            row0 += er * ec;
        }
        (Matrix::from_raw(self.ring.clone(), ne, nv, data), Matrix::from_raw(self.ring.clone(), ne, 1, rhs))
    }

    /// Splits a flat solution column into the unknown blocks.
    pub fn unpack(&self, x: &Matrix, col: usize) -> Vec<Matrix> {
        self.unknowns
            .iter()
            .zip(&self.offsets)
            .map(|(&(p, q), &off)| Matrix::from_fn(&self.ring, p, q, |i, j| x.get(off + i * q + j, col).clone()))
            .collect()
    }

    /// One solution, or `None` if the system is inconsistent over the ring.
    pub fn solve(&self) -> Result<Option<Vec<Matrix>>> {
        let (a, b) = self.assemble();
        Ok(solve_linear(&a, &b)?.map(|x| self.unpack(&x, 0)))
    }

    /// Basis of solutions of the homogeneous system, one column per vector.
    pub fn homogeneous_basis(&self) -> Result<Matrix> {
        let (a, _) = self.assemble();
        kernel_basis(&a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_sylvester_style_equation() {
        // A X - X B = C with a known solution.
        let r = Ring::Integers;
        let a = Matrix::from_i64(&r, &[&[1, 1], &[0, 2]]);
        let b = Matrix::from_i64(&r, &[&[3]]);
        let x0 = Matrix::from_i64(&r, &[&[1], &[-2]]);
        let c = &(&a * &x0) - &(&x0 * &b);
        let mut sys = LinearSystem::new(&r);
        let x = sys.add_unknown(2, 1);
        let e = sys.add_equation(c.clone());
        sys.add_term(e, x, a.clone(), Matrix::identity(&r, 1)).unwrap();
        sys.add_term(e, x, Matrix::identity(&r, 2), -&b).unwrap();
        let sol = sys.solve().unwrap().unwrap();
        assert_eq!(&(&a * &sol[0]) - &(&sol[0] * &b), c);
    }

    #[test]
    fn shape_errors_are_reported() {
        let r = Ring::Rationals;
        let mut sys = LinearSystem::new(&r);
        let x = sys.add_unknown(2, 2);
        let e = sys.add_zero_equation(2, 2);
        assert!(sys.add_term(e, x, Matrix::identity(&r, 3), Matrix::identity(&r, 2)).is_err());
    }
}
