//! Unimodular diagonalization and everything built on it: Smith normal form,
//! exact linear solving, kernels and the split data of injections and
//! surjections.
//!
//! Over Z the elimination is Euclidean with the smallest-absolute-value pivot
//! (ties broken by row, then column). Over Z/m the lift to Z is diagonalized
//! and reduced afterwards; the transforms stay invertible because they are
//! unimodular over Z. Over Q the same loop degenerates to Gaussian elimination.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::matrix::Matrix;
use super::ring::{big, Ring, Scalar};
use crate::error::{Error, Result};

trait Elim: Clone + Zero + One + PartialEq + std::fmt::Debug {
    fn abs_key(&self) -> BigRational;
    /// Quotient `q` such that `a - q*p` is strictly smaller than `p` or zero.
    fn quot(a: &Self, p: &Self) -> Self;
    fn divides(p: &Self, a: &Self) -> bool;
    /// Unit `u` such that `u*p` is the canonical associate of `p`.
    fn normalizer(p: &Self) -> Self;
    fn unit_inverse(u: &Self) -> Self;
    fn times(a: &Self, b: &Self) -> Self;
    fn sub_assign_mul(target: &mut Self, q: &Self, src: &Self);
    fn add_assign(target: &mut Self, src: &Self);
}

impl Elim for BigInt {
    fn abs_key(&self) -> BigRational {
        BigRational::from_integer(self.abs())
    }
    fn quot(a: &Self, p: &Self) -> Self {
        a.div_floor(p)
    }
    fn divides(p: &Self, a: &Self) -> bool {
        a.is_multiple_of(p)
    }
    fn normalizer(p: &Self) -> Self {
        if p.is_negative() { -BigInt::one() } else { BigInt::one() }
    }
    fn unit_inverse(u: &Self) -> Self {
        u.clone()
    }
    fn times(a: &Self, b: &Self) -> Self {
        a * b
    }
    fn sub_assign_mul(target: &mut Self, q: &Self, src: &Self) {
        *target -= q * src;
    }
    fn add_assign(target: &mut Self, src: &Self) {
        *target += src;
    }
}

impl Elim for BigRational {
    fn abs_key(&self) -> BigRational {
        self.abs()
    }
    fn quot(a: &Self, p: &Self) -> Self {
        a / p
    }
    fn divides(_p: &Self, _a: &Self) -> bool {
        true
    }
    fn normalizer(p: &Self) -> Self {
        p.recip()
    }
    fn unit_inverse(u: &Self) -> Self {
        u.recip()
    }
    fn times(a: &Self, b: &Self) -> Self {
        a * b
    }
    fn sub_assign_mul(target: &mut Self, q: &Self, src: &Self) {
        *target -= q * src;
    }
    fn add_assign(target: &mut Self, src: &Self) {
        *target += src;
    }
}

/// Dense row-major work matrix.
#[derive(Clone, Debug)]
struct Work<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Elim> Work<T> {
    fn identity(n: usize) -> Self {
        let mut data = vec![T::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = T::one();
        }
        Work { rows: n, cols: n, data }
    }
    fn at(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }
    /// row_i -= c * row_j
    fn row_sub(&mut self, i: usize, j: usize, c: &T) {
        for k in 0..self.cols {
            let src = self.data[j * self.cols + k].clone();
            if !src.is_zero() {
                T::sub_assign_mul(&mut self.data[i * self.cols + k], c, &src);
            }
        }
    }
    fn row_add(&mut self, i: usize, j: usize) {
        for k in 0..self.cols {
            let src = self.data[j * self.cols + k].clone();
            T::add_assign(&mut self.data[i * self.cols + k], &src);
        }
    }
    /// col_i -= c * col_j
    fn col_sub(&mut self, i: usize, j: usize, c: &T) {
        for k in 0..self.rows {
            let src = self.data[k * self.cols + j].clone();
            if !src.is_zero() {
                T::sub_assign_mul(&mut self.data[k * self.cols + i], c, &src);
            }
        }
    }
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for k in 0..self.cols {
                self.data.swap(i * self.cols + k, j * self.cols + k);
            }
        }
    }
    fn swap_cols(&mut self, i: usize, j: usize) {
        if i != j {
            for k in 0..self.rows {
                self.data.swap(k * self.cols + i, k * self.cols + j);
            }
        }
    }
    fn scale_row(&mut self, i: usize, u: &T) {
        for k in 0..self.cols {
            let v = T::times(&self.data[i * self.cols + k], u);
            self.data[i * self.cols + k] = v;
        }
    }
    fn scale_col(&mut self, j: usize, u: &T) {
        for k in 0..self.rows {
            let v = T::times(&self.data[k * self.cols + j], u);
            self.data[k * self.cols + j] = v;
        }
    }
}

/// Records `p * a * q = d`; `extra` receives the row operations only.
struct Reducer<T> {
    a: Work<T>,
    extra: Option<Work<T>>,
    p: Option<(Work<T>, Work<T>)>,
    q: Option<(Work<T>, Work<T>)>,
}

impl<T: Elim> Reducer<T> {
    fn row_sub(&mut self, i: usize, j: usize, c: &T) {
        self.a.row_sub(i, j, c);
        if let Some(e) = &mut self.extra {
            e.row_sub(i, j, c);
        }
        if let Some((p, pinv)) = &mut self.p {
            p.row_sub(i, j, c);
            // inverse: col_j += c col_i
            let neg = T::zero();
            let mut negc = neg;
            T::sub_assign_mul(&mut negc, c, &T::one());
            pinv.col_sub(j, i, &negc);
        }
    }
    fn row_add(&mut self, i: usize, j: usize) {
        self.a.row_add(i, j);
        if let Some(e) = &mut self.extra {
            e.row_add(i, j);
        }
        if let Some((p, pinv)) = &mut self.p {
            p.row_add(i, j);
            pinv.col_sub(j, i, &T::one());
        }
    }
    fn col_sub(&mut self, i: usize, j: usize, c: &T) {
        self.a.col_sub(i, j, c);
        if let Some((q, qinv)) = &mut self.q {
            q.col_sub(i, j, c);
            // inverse: row_j += c row_i
            let mut negc = T::zero();
            T::sub_assign_mul(&mut negc, c, &T::one());
            qinv.row_sub(j, i, &negc);
        }
    }
    fn swap_rows(&mut self, i: usize, j: usize) {
        self.a.swap_rows(i, j);
        if let Some(e) = &mut self.extra {
            e.swap_rows(i, j);
        }
        if let Some((p, pinv)) = &mut self.p {
            p.swap_rows(i, j);
            pinv.swap_cols(i, j);
        }
    }
    fn swap_cols(&mut self, i: usize, j: usize) {
        self.a.swap_cols(i, j);
        if let Some((q, qinv)) = &mut self.q {
            q.swap_cols(i, j);
            qinv.swap_rows(i, j);
        }
    }
    fn scale_row(&mut self, i: usize, u: &T) {
        self.a.scale_row(i, u);
        if let Some(e) = &mut self.extra {
            e.scale_row(i, u);
        }
        if let Some((p, pinv)) = &mut self.p {
            p.scale_row(i, u);
            pinv.scale_col(i, &T::unit_inverse(u));
        }
    }

    fn min_pivot(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(BigRational, usize, usize)> = None;
        for i in t..self.a.rows {
            for j in t..self.a.cols {
                let v = self.a.at(i, j);
                if v.is_zero() {
                    continue;
                }
                let key = v.abs_key();
                if best.as_ref().is_none_or(|(b, _, _)| key < *b) {
                    best = Some((key, i, j));
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    /// Returns the rank. With `smith`, enforces d1 | d2 | ... as well.
    fn run(&mut self, smith: bool) -> usize {
        let (m, n) = (self.a.rows, self.a.cols);
        let mut t = 0;
        while t < m.min(n) {
            let Some(_) = self.min_pivot(t) else { break };
            loop {
                let (i, j) = self.min_pivot(t).expect("pivot vanished");
                self.swap_rows(t, i);
                self.swap_cols(t, j);
                let piv = self.a.at(t, t).clone();
                let mut dirty = false;
                for r in t + 1..m {
                    let v = self.a.at(r, t).clone();
                    if v.is_zero() {
                        continue;
                    }
                    let qt = T::quot(&v, &piv);
                    if !qt.is_zero() {
                        self.row_sub(r, t, &qt);
                    }
                    if !self.a.at(r, t).is_zero() {
                        dirty = true;
                    }
                }
                for c in t + 1..n {
                    let v = self.a.at(t, c).clone();
                    if v.is_zero() {
                        continue;
                    }
                    let qt = T::quot(&v, &piv);
                    if !qt.is_zero() {
                        self.col_sub(c, t, &qt);
                    }
                    if !self.a.at(t, c).is_zero() {
                        dirty = true;
                    }
                }
                if dirty {
                    continue;
                }
                if smith {
                    let bad = (t + 1..m).find(|&r| (t + 1..n).any(|c| !T::divides(&piv, self.a.at(r, c))));
                    if let Some(r) = bad {
                        self.row_add(t, r);
                        continue;
                    }
                }
                break;
            }
            let u = T::normalizer(self.a.at(t, t));
            if u != T::one() {
                self.scale_row(t, &u);
            }
            t += 1;
        }
        t
    }
}

/// `p * a * q = d` with `p`, `q` invertible over the ring and `d` diagonal.
#[derive(Clone, Debug)]
pub struct Diagonalization {
    pub d: Matrix,
    pub p: Matrix,
    pub p_inv: Matrix,
    pub q: Matrix,
    pub q_inv: Matrix,
    /// Number of diagonal entries that are nonzero in the ring.
    pub rank: usize,
}

impl Diagonalization {
    pub fn diagonal(&self) -> Vec<Scalar> {
        (0..self.d.rows().min(self.d.cols())).map(|i| self.d.get(i, i).clone()).collect()
    }
}

fn to_ints(a: &Matrix) -> Work<BigInt> {
    Work { rows: a.rows(), cols: a.cols(), data: a.entries().iter().map(|x| x.to_integer()).collect() }
}

fn to_rats(a: &Matrix) -> Work<BigRational> {
    Work { rows: a.rows(), cols: a.cols(), data: a.entries().to_vec() }
}

fn int_matrix(ring: &Ring, w: Work<BigInt>) -> Matrix {
    Matrix::from_raw(ring.clone(), w.rows, w.cols, w.data.into_iter().map(|x| ring.reduce(big(x))).collect())
}

fn rat_matrix(ring: &Ring, w: Work<BigRational>) -> Matrix {
    Matrix::from_raw(ring.clone(), w.rows, w.cols, w.data)
}

fn count_rank(d: &Matrix) -> usize {
    (0..d.rows().min(d.cols())).filter(|&i| !d.get(i, i).is_zero()).count()
}

/// Full diagonalization with both transforms and their inverses. Over Z the
/// result is the Smith normal form.
pub fn diagonalize(a: &Matrix) -> Diagonalization {
    let ring = a.ring().clone();
    let (m, n) = a.shape();
    match ring {
        Ring::Rationals => {
            let mut r = Reducer {
                a: to_rats(a),
                extra: None,
                p: Some((Work::identity(m), Work::identity(m))),
                q: Some((Work::identity(n), Work::identity(n))),
            };
            let rank = r.run(false);
            let (p, pinv) = r.p.unwrap();
            let (q, qinv) = r.q.unwrap();
            Diagonalization {
                d: rat_matrix(&ring, r.a),
                p: rat_matrix(&ring, p),
                p_inv: rat_matrix(&ring, pinv),
                q: rat_matrix(&ring, q),
                q_inv: rat_matrix(&ring, qinv),
                rank,
            }
        }
        _ => {
            let mut r = Reducer {
                a: to_ints(a),
                extra: None,
                p: Some((Work::identity(m), Work::identity(m))),
                q: Some((Work::identity(n), Work::identity(n))),
            };
            r.run(true);
            let (p, pinv) = r.p.unwrap();
            let (q, qinv) = r.q.unwrap();
            let d = int_matrix(&ring, r.a);
            let rank = count_rank(&d);
            Diagonalization {
                d,
                p: int_matrix(&ring, p),
                p_inv: int_matrix(&ring, pinv),
                q: int_matrix(&ring, q),
                q_inv: int_matrix(&ring, qinv),
                rank,
            }
        }
    }
}

/// Smith normal form over the integers: `(d, p, q)` with `d = p·a·q`.
pub fn smith_normal_form(a: &Matrix) -> Result<(Matrix, Matrix, Matrix)> {
    if *a.ring() != Ring::Integers {
        return Err(Error::RequiresIntegers(a.ring().clone()));
    }
    let dg = diagonalize(a);
    Ok((dg.d, dg.p, dg.q))
}

/// Nonzero invariant factors of an integer matrix, in divisibility order.
pub fn invariant_factors(a: &Matrix) -> Result<Vec<BigInt>> {
    let (d, _, _) = smith_normal_form(a)?;
    Ok((0..d.rows().min(d.cols())).map(|i| d.get(i, i).to_integer()).filter(|x| !x.is_zero()).collect())
}

/// Rank over the ring's fraction field (Z, Q) or over Z/p. For composite
/// moduli this counts diagonal entries that survive reduction.
pub fn rank(a: &Matrix) -> usize {
    let ring = a.ring().clone();
    match ring {
        Ring::Rationals => {
            let mut r = Reducer { a: to_rats(a), extra: None, p: None, q: None };
            r.run(false)
        }
        Ring::Integers => {
            let mut r = Reducer { a: to_ints(a), extra: None, p: None, q: None };
            r.run(false)
        }
        Ring::IntegersMod(_) => diagonalize(a).rank,
    }
}

/// Some `x` with `a·x = b` exactly, or `None` when the system has no
/// solution over the ring.
pub fn solve_linear(a: &Matrix, b: &Matrix) -> Result<Option<Matrix>> {
    if a.ring() != b.ring() {
        return Err(Error::RingMismatch(a.ring().clone(), b.ring().clone()));
    }
    if a.rows() != b.rows() {
        return Err(Error::Shape(format!("system {}x{} with right-hand side {}x{}", a.rows(), a.cols(), b.rows(), b.cols())));
    }
    let ring = a.ring().clone();
    let (m, n, k) = (a.rows(), a.cols(), b.cols());
    match &ring {
        Ring::Rationals => {
            let mut r = Reducer {
                a: to_rats(a),
                extra: Some(to_rats(b)),
                p: None,
                q: Some((Work::identity(n), Work::identity(n))),
            };
            let rank = r.run(false);
            let c = r.extra.unwrap();
            if (rank..m).any(|i| (0..k).any(|j| !c.at(i, j).is_zero())) {
                return Ok(None);
            }
            let y = Matrix::from_fn(&ring, n, k, |i, j| if i < rank { c.at(i, j).clone() } else { Scalar::zero() });
            Ok(Some(&rat_matrix(&ring, r.q.unwrap().0) * &y))
        }
        Ring::Integers => {
            let mut r = Reducer {
                a: to_ints(a),
                extra: Some(to_ints(b)),
                p: None,
                q: Some((Work::identity(n), Work::identity(n))),
            };
            let rank = r.run(false);
            let c = r.extra.unwrap();
            let mut y = vec![BigInt::zero(); n * k];
            for i in 0..m {
                for j in 0..k {
                    let cij = c.at(i, j);
                    if i < rank {
                        let d = r.a.at(i, i);
                        let (quo, rem) = cij.div_rem(d);
                        if !rem.is_zero() {
                            return Ok(None);
                        }
                        y[i * k + j] = quo;
                    } else if !cij.is_zero() {
                        return Ok(None);
                    }
                }
            }
            let y = int_matrix(&ring, Work { rows: n, cols: k, data: y });
            Ok(Some(&int_matrix(&ring, r.q.unwrap().0) * &y))
        }
        Ring::IntegersMod(modulus) => {
            let mm = BigInt::from(*modulus);
            let mut r = Reducer {
                a: to_ints(a),
                extra: Some(to_ints(b)),
                p: None,
                q: Some((Work::identity(n), Work::identity(n))),
            };
            r.run(false);
            let c = r.extra.unwrap();
            let mut y = vec![BigInt::zero(); n * k];
            for i in 0..m {
                let d = if i < n { r.a.at(i, i).mod_floor(&mm) } else { BigInt::zero() };
                let g = d.gcd(&mm);
                for j in 0..k {
                    let cij = c.at(i, j).mod_floor(&mm);
                    if !cij.is_multiple_of(&g) {
                        return Ok(None);
                    }
                    if i < n && !cij.is_zero() {
                        let mg = &mm / &g;
                        let dg = (&d / &g).mod_floor(&mg);
                        let inv = if mg.is_one() { BigInt::zero() } else { dg.extended_gcd(&mg).x.mod_floor(&mg) };
                        y[i * k + j] = ((&cij / &g) * inv).mod_floor(&mg);
                    }
                }
            }
            let y = int_matrix(&ring, Work { rows: n, cols: k, data: y });
            Ok(Some(&int_matrix(&ring, r.q.unwrap().0) * &y))
        }
    }
}

/// Columns form a basis of `ker(a)`. Over Z/m a kernel that is not free
/// is reported as [`Error::NonFreeKernel`].
pub fn kernel_basis(a: &Matrix) -> Result<Matrix> {
    let ring = a.ring().clone();
    let (m, n) = a.shape();
    match &ring {
        Ring::Rationals => {
            let mut r = Reducer { a: to_rats(a), extra: None, p: None, q: Some((Work::identity(n), Work::identity(n))) };
            let rank = r.run(false);
            let q = rat_matrix(&ring, r.q.unwrap().0);
            Ok(q.submatrix(0..n, rank..n))
        }
        Ring::Integers => {
            let mut r = Reducer { a: to_ints(a), extra: None, p: None, q: Some((Work::identity(n), Work::identity(n))) };
            let rank = r.run(false);
            let q = int_matrix(&ring, r.q.unwrap().0);
            Ok(q.submatrix(0..n, rank..n))
        }
        Ring::IntegersMod(modulus) => {
            let mm = BigInt::from(*modulus);
            let mut r = Reducer { a: to_ints(a), extra: None, p: None, q: Some((Work::identity(n), Work::identity(n))) };
            r.run(false);
            let mut keep = Vec::new();
            for i in 0..n {
                let d = if i < m { r.a.at(i, i).mod_floor(&mm) } else { BigInt::zero() };
                let g = d.gcd(&mm);
                if g == mm {
                    keep.push(i);
                } else if !g.is_one() {
                    return Err(Error::NonFreeKernel(ring.clone()));
                }
            }
            let q = int_matrix(&ring, r.q.unwrap().0);
            Ok(q.select_cols(&keep))
        }
    }
}

/// A left inverse `r` with `r·a = 1`, if one exists.
pub fn is_split_injection(a: &Matrix) -> Option<Matrix> {
    let id = Matrix::identity(a.ring(), a.cols());
    solve_linear(&a.transpose(), &id).ok().flatten().map(|rt| rt.transpose())
}

/// A right inverse `s` with `a·s = 1`, if one exists.
pub fn split_surjection_section(a: &Matrix) -> Option<Matrix> {
    let id = Matrix::identity(a.ring(), a.rows());
    solve_linear(a, &id).ok().flatten()
}

/// Split data of a split injection `a: M → N`:
/// `u·a = 1`, `π·v = 1`, `a·u + v·π = 1`, `π·a = 0`, `u·v = 0`.
#[derive(Clone, Debug)]
pub struct InjectionSplitting {
    pub retraction: Matrix,
    pub cokernel_projection: Matrix,
    pub cokernel_section: Matrix,
}

/// Split data of a split surjection `a: M → N` with kernel inclusion `j`:
/// `θ·j = 1`, `a·σ = 1`, `j·θ + σ·a = 1`, `θ·σ = 0`.
#[derive(Clone, Debug)]
pub struct SurjectionSplitting {
    pub section: Matrix,
    pub kernel_inclusion: Matrix,
    pub kernel_retraction: Matrix,
}

fn unit_diagonal_inverse(dg: &Diagonalization, k: usize) -> Option<Matrix> {
    let ring = dg.d.ring();
    let mut inv = Matrix::zeros(ring, k, k);
    for i in 0..k {
        inv.set(i, i, ring.inv(dg.d.get(i, i))?);
    }
    Some(inv)
}

/// Split data of an injection with free cokernel, chosen deterministically
/// from the diagonalization. Fails if `a` is not split injective.
pub fn split_injection(a: &Matrix) -> Result<InjectionSplitting> {
    let ring = a.ring();
    let (m, n) = a.shape();
    let dg = diagonalize(a);
    let not_split = || Error::NotACofibration(format!("{m}x{n} matrix has no unimodular splitting"));
    if dg.rank < n {
        return Err(not_split());
    }
    let dinv = unit_diagonal_inverse(&dg, n).ok_or_else(not_split)?;
    let top = dinv.hstack(&Matrix::zeros(ring, n, m - n));
    let u = &(&dg.q * &top) * &dg.p;
    let sel = Matrix::zeros(ring, m - n, n).hstack(&Matrix::identity(ring, m - n));
    let pi = &sel * &dg.p;
    let v = &dg.p_inv * &sel.transpose();
    Ok(InjectionSplitting { retraction: u, cokernel_projection: pi, cokernel_section: v })
}

/// Split data of a surjection with free kernel. Fails if `a` is not split
/// surjective.
pub fn split_surjection(a: &Matrix) -> Result<SurjectionSplitting> {
    let ring = a.ring();
    let (m, n) = a.shape();
    let dg = diagonalize(a);
    let not_split = || Error::NotSplit(format!("{m}x{n} matrix is not a split surjection"));
    if dg.rank < m {
        return Err(not_split());
    }
    let dinv = unit_diagonal_inverse(&dg, m).ok_or_else(not_split)?;
    let left = dinv.vstack(&Matrix::zeros(ring, n - m, m));
    let sigma = &(&dg.q * &left) * &dg.p;
    let sel = Matrix::zeros(ring, n - m, m).hstack(&Matrix::identity(ring, n - m));
    let j = &dg.q * &sel.transpose();
    let theta = &sel * &dg.q_inv;
    Ok(SurjectionSplitting { section: sigma, kernel_inclusion: j, kernel_retraction: theta })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::ring::{int, parse_scalar};

    fn z(rows: &[&[i64]]) -> Matrix {
        Matrix::from_i64(&Ring::Integers, rows)
    }

    #[test]
    fn snf_of_zero_and_identity() {
        let (d, p, q) = smith_normal_form(&z(&[&[0]])).unwrap();
        assert_eq!(d, z(&[&[0]]));
        assert!(p.is_identity() && q.is_identity());
        let (d, _, _) = smith_normal_form(&z(&[&[1, 0], &[0, 1]])).unwrap();
        assert!(d.is_identity());
    }

    #[test]
    fn snf_2468() {
        // d1 = gcd of entries = 2 and d1*d2 = |det| = 8.
        let a = z(&[&[2, 4], &[6, 8]]);
        let (d, p, q) = smith_normal_form(&a).unwrap();
        assert_eq!(d, z(&[&[2, 0], &[0, 4]]));
        assert_eq!(&(&p * &a) * &q, d);
        assert_eq!(p.det().abs(), int(1));
        assert_eq!(q.det().abs(), int(1));
    }

    #[test]
    fn snf_rejects_other_rings() {
        assert!(smith_normal_form(&Matrix::from_i64(&Ring::Rationals, &[&[1]])).is_err());
    }

    #[test]
    fn solve_examples() {
        assert_eq!(solve_linear(&z(&[&[2]]), &z(&[&[4]])).unwrap(), Some(z(&[&[2]])));
        assert_eq!(solve_linear(&z(&[&[2]]), &z(&[&[3]])).unwrap(), None);
        let q = Ring::Rationals;
        let x = solve_linear(&Matrix::from_i64(&q, &[&[2]]), &Matrix::from_i64(&q, &[&[3]])).unwrap().unwrap();
        assert_eq!(x.get(0, 0), &parse_scalar("3/2").unwrap());
        assert!(solve_linear(&z(&[&[2, 1]]), &z(&[&[1], &[1]])).is_err());
    }

    #[test]
    fn solve_mod_m() {
        let r = Ring::IntegersMod(6);
        let a = Matrix::from_i64(&r, &[&[2]]);
        assert_eq!(solve_linear(&a, &Matrix::from_i64(&r, &[&[3]])).unwrap(), None);
        let x = solve_linear(&a, &Matrix::from_i64(&r, &[&[4]])).unwrap().unwrap();
        assert_eq!(&a * &x, Matrix::from_i64(&r, &[&[4]]));
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_basis(&z(&[&[1, 0]])).unwrap(), z(&[&[0], &[1]]));
        assert!(kernel_basis(&Matrix::zeros(&Ring::Integers, 1, 2)).unwrap().det().abs() == int(1));
        let k = kernel_basis(&z(&[&[2, 4]])).unwrap();
        assert_eq!(k.cols(), 1);
        assert!(k == z(&[&[2], &[-1]]) || k == z(&[&[-2], &[1]]));
    }

    #[test]
    fn non_free_kernel_mod_4() {
        let r = Ring::IntegersMod(4);
        assert!(matches!(kernel_basis(&Matrix::from_i64(&r, &[&[2]])), Err(Error::NonFreeKernel(_))));
        assert_eq!(kernel_basis(&Matrix::from_i64(&r, &[&[0]])).unwrap().cols(), 1);
        assert_eq!(kernel_basis(&Matrix::from_i64(&r, &[&[3]])).unwrap().cols(), 0);
    }

    #[test]
    fn split_injection_examples() {
        assert!(is_split_injection(&z(&[&[1, 0], &[0, 1]])).unwrap().is_identity());
        assert_eq!(is_split_injection(&z(&[&[2]])), None);
        assert_eq!(is_split_injection(&z(&[&[1], &[0]])), Some(z(&[&[1, 0]])));
    }

    #[test]
    fn injection_split_identities() {
        let a = z(&[&[1, 0], &[3, 1], &[5, 2]]);
        let s = split_injection(&a).unwrap();
        let (u, pi, v) = (&s.retraction, &s.cokernel_projection, &s.cokernel_section);
        assert!((u * &a).is_identity());
        assert!((pi * v).is_identity());
        assert!((&(&a * u) + &(v * pi)).is_identity());
        assert!(split_injection(&z(&[&[2]])).is_err());
    }

    #[test]
    fn surjection_split_identities() {
        let a = z(&[&[1, 2, 3], &[0, 1, 4]]);
        let s = split_surjection(&a).unwrap();
        let (sig, j, th) = (&s.section, &s.kernel_inclusion, &s.kernel_retraction);
        assert!((&a * sig).is_identity());
        assert!((th * j).is_identity());
        assert!((th * sig).is_zero());
        assert!((&a * j).is_zero());
        assert!((&(j * th) + &(sig * &a)).is_identity());
    }
}
