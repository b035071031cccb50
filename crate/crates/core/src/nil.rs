//! Explicit homotopy calculus for maps from a test object `A_*` into a reduced
//! target `B_*` whose kernels `Ker(β_n)` are all identified with one complex
//! `K` through `μ`.
//!
//! Index conventions: level 0 of both objects is zero, so the splitting data
//! lives on levels `1..=N`. `C_n = A_n / A_{n−1}`, the total space is `A_N`,
//! and `α : A_N → A_N ⊗ S` is `(λ^∞_{N−1} ⊗ 1) α_N`.

use std::sync::{Arc, OnceLock};

use serde::Serialize;

use crate::chain::{find_contraction, tensor_map, tensor_with_bimodule, Bimodule, ChainComplex, GradedMap};
use crate::d0::{D0Complex, D0Map};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, solve_linear, split_injection, split_surjection_section, Matrix};
use crate::par::{self, Execution};

/// Splittings of `λ_n : A_n ↣ A_{n+1} ↠ C_{n+1}` and of
/// `j_n : K ↣ B_n ↠ B_{n−1} ⊗ S`, with the derived boundary maps.
#[derive(Clone, Debug)]
pub struct SplittingData {
    a: D0Complex,
    b: D0Complex,
    pub k: Arc<ChainComplex>,
    /// `C_n`, index `n` (`C_0 = 0`).
    pub quotients: Vec<Arc<ChainComplex>>,
    /// `u_n : A_{n+1} → A_n`, index `n < N`.
    pub u: Vec<GradedMap>,
    /// `π_n : A_n → C_n`, index `n ≤ N`.
    pub pi: Vec<GradedMap>,
    /// `v_n : C_n → A_n`, index `n ≤ N`.
    pub v: Vec<GradedMap>,
    /// `φ_n = d(u_{n−1}) v_n : C_n → A_{n−1}`, index `n ≤ N` (zero at 0).
    pub phi: Vec<GradedMap>,
    /// `j_n : K → B_n`, index `n ≤ N` (zero at 0).
    pub j: Vec<GradedMap>,
    /// `θ_n : B_n → K`, index `n ≤ N` (zero at 0).
    pub theta: Vec<GradedMap>,
    /// `σ_n : B_{n−1} ⊗ S → B_n`, index `n ≤ N` (zero at 0).
    pub sigma: Vec<GradedMap>,
    /// `δ_m = d(θ_{m+1}) σ_{m+1} : B_m ⊗ S → K`, index `m < N`.
    pub delta: Vec<GradedMap>,
    alpha_powers: Vec<GradedMap>,
    contraction: OnceLock<GradedMap>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
}

fn check(out: &mut Vec<IdentityCheck>, name: String, holds: bool) {
    out.push(IdentityCheck { name, holds });
}

fn graded(src: &Arc<ChainComplex>, tgt: &Arc<ChainComplex>, f: impl FnMut(i64) -> Matrix) -> Result<GradedMap> {
    GradedMap::from_fn(src.clone(), tgt.clone(), 0, f)
}

impl SplittingData {
    pub fn derive(a: &D0Complex, b: &D0Complex) -> Result<Self> {
        if a.top() != b.top() || a.bimodule() != b.bimodule() {
            return Err(Error::Precondition("test object and target must share N and S".into()));
        }
        b.require_reduced()?;
        let top = a.top();
        let ring = a.ring().clone();
        let zero = Arc::new(ChainComplex::zero(&ring));

        let mut quotients = vec![zero.clone()];
        let mut u = Vec::new();
        let mut pi = vec![GradedMap::zero(zero.clone(), zero.clone(), 0)];
        let mut v = vec![GradedMap::zero(zero.clone(), zero.clone(), 0)];
        let mut phi = vec![GradedMap::zero(zero.clone(), zero.clone(), -1)];
        for n in 0..top {
            let (lo_lvl, hi_lvl) = (a.level(n), a.level(n + 1));
            let lam = a.lambda(n);
            let splits: Vec<_> = hi_lvl.degrees().map(|d| split_injection(&lam.block(d))).collect::<Result<_>>()?;
            let at = |d: i64| &splits[(d - hi_lvl.lo()) as usize];
            let c = if hi_lvl.is_zero() {
                zero.clone()
            } else {
                let ranks = hi_lvl.degrees().map(|d| at(d).cokernel_projection.rows()).collect();
                let diffs = (hi_lvl.lo() + 1..=hi_lvl.hi())
                    .map(|d| &(&at(d - 1).cokernel_projection * &hi_lvl.d(d)) * &at(d).cokernel_section)
                    .collect();
                Arc::new(ChainComplex::new(&ring, hi_lvl.lo(), ranks, diffs)?)
            };
            let un = graded(hi_lvl, lo_lvl, |d| at(d).retraction.clone())?;
            let pn = graded(hi_lvl, &c, |d| at(d).cokernel_projection.clone())?;
            let vn = graded(&c, hi_lvl, |d| at(d).cokernel_section.clone())?;
            phi.push(un.differential().compose(&vn)?);
            u.push(un);
            pi.push(pn);
            v.push(vn);
            quotients.push(c);
        }

        let k = b.level(1).clone();
        let mut j = vec![GradedMap::zero(k.clone(), zero.clone(), 0), GradedMap::identity(k.clone())];
        let mut theta = vec![GradedMap::zero(zero.clone(), k.clone(), 0), GradedMap::identity(k.clone())];
        let mut sigma = vec![
            GradedMap::zero(zero.clone(), zero.clone(), 0),
            GradedMap::zero(b.tensored(0).clone(), b.level(1).clone(), 0),
        ];
        for n in 1..top {
            let (bn, bn1) = (b.level(n), b.level(n + 1));
            let mu = b.lambda(n);
            let jn1 = mu.compose(&j[n])?;
            let beta = b.alpha(n + 1);
            if !beta.compose(&jn1)?.is_zero() {
                return Err(Error::Invariant(format!("μ_{n} carries K outside Ker(β_{})", n + 1)));
            }
            for d in bn1.degrees() {
                if bn1.rank(d) != k.rank(d) + b.tensored(n).rank(d) {
                    return Err(Error::Precondition(format!(
                        "Ker(β_{}) is not the image of K in degree {d}; kernels must be identified through μ",
                        n + 1
                    )));
                }
            }
            let retraction = graded(bn1, bn, |d| split_injection(&mu.block(d)).map(|s| s.retraction).unwrap_or_else(|_| Matrix::zeros(&ring, bn.rank(d), bn1.rank(d))))?;
            let tn1 = theta[n].compose(&retraction)?;
            let t_bn = b.tensored(n);
            let section = graded(t_bn, bn1, |d| {
                split_surjection_section(&beta.block(d)).unwrap_or_else(|| Matrix::zeros(&ring, bn1.rank(d), t_bn.rank(d)))
            })?;
            if !beta.compose(&section)?.blocks().iter().all(Matrix::is_identity) {
                return Err(Error::NotSplit(format!("β_{} is not split surjective", n + 1)));
            }
            let proj = GradedMap::identity(bn1.clone()).sub(&jn1.compose(&tn1)?)?;
            sigma.push(proj.compose(&section)?);
            j.push(jn1);
            theta.push(tn1);
        }
        let delta = (0..top).map(|m| theta[m + 1].differential().compose(&sigma[m + 1])).collect::<Result<Vec<_>>>()?;

        let mut data = SplittingData { a: a.clone(), b: b.clone(), k, quotients, u, pi, v, phi, j, theta, sigma, delta, alpha_powers: Vec::new(), contraction: OnceLock::new() };
        data.alpha_powers = data.compute_alpha_powers()?;
        Ok(data)
    }

    pub fn top(&self) -> usize {
        self.a.top()
    }

    pub fn bimodule(&self) -> &Bimodule {
        self.a.bimodule()
    }

    /// `A = A_N`.
    pub fn total(&self) -> &Arc<ChainComplex> {
        self.a.level(self.top())
    }

    pub fn test_object(&self) -> &D0Complex {
        &self.a
    }

    pub fn target(&self) -> &D0Complex {
        &self.b
    }

    /// `X ⊗ S^e`.
    pub fn tens(&self, x: &ChainComplex, e: usize) -> Result<Arc<ChainComplex>> {
        Ok(Arc::new(tensor_with_bimodule(x, &self.bimodule().power(e))?))
    }

    /// `f ⊗ 1_{S^e}`.
    pub fn tmap(&self, f: &GradedMap, e: usize) -> Result<GradedMap> {
        if e == 0 {
            return Ok(f.clone());
        }
        tensor_map(f, &self.bimodule().power(e))
    }

    /// `λ^∞_n = λ_{N−1} ⋯ λ_n : A_n → A_N`.
    pub fn lambda_inf(&self, n: usize) -> Result<GradedMap> {
        let mut f = GradedMap::identity(self.a.level(n).clone());
        for i in n..self.top() {
            f = self.a.lambda(i).compose(&f)?;
        }
        Ok(f)
    }

    fn compute_alpha_powers(&self) -> Result<Vec<GradedMap>> {
        let top = self.top();
        let a = self.total().clone();
        let first = self.tmap(&self.lambda_inf(top - 1)?, 1)?.compose(self.a.alpha(top))?;
        let mut out = vec![GradedMap::identity(a)];
        for m in 1..=top {
            let next = if m == 1 { first.clone() } else { self.tmap(&first, m - 1)?.compose(&out[m - 1])? };
            out.push(next);
        }
        if !out[top].is_zero() {
            return Err(Error::Invariant(format!("α^{top} does not vanish on A_{top}")));
        }
        Ok(out)
    }

    /// `α^m : A → A ⊗ S^m` (zero for `m ≥ N`).
    pub fn alpha_power(&self, m: usize) -> Result<GradedMap> {
        match self.alpha_powers.get(m) {
            Some(f) => Ok(f.clone()),
            None => Ok(GradedMap::zero(self.total().clone(), self.tens(self.total(), m)?, 0)),
        }
    }

    /// Every boxed identity of the splitting data, in order.
    pub fn identities(&self) -> Result<Vec<IdentityCheck>> {
        let mut out = Vec::new();
        let (a, b) = (&self.a, &self.b);
        for n in 0..self.top() {
            let (lam, un, pn, vn, ph) = (a.lambda(n), &self.u[n], &self.pi[n + 1], &self.v[n + 1], &self.phi[n + 1]);
            check(&mut out, format!("u_{n} λ_{n} = 1"), un.compose(lam)? == GradedMap::identity(a.level(n).clone()));
            check(&mut out, format!("π_{0} v_{0} = 1", n + 1), pn.compose(vn)? == GradedMap::identity(self.quotients[n + 1].clone()));
            let sum = lam.compose(un)?.add(&vn.compose(pn)?)?;
            check(&mut out, format!("λ_{n} u_{n} + v_{0} π_{0} = 1", n + 1), sum == GradedMap::identity(a.level(n + 1).clone()));
            check(&mut out, format!("d u_{n} = φ_{0} π_{0}", n + 1), un.differential() == ph.compose(pn)?);
            check(&mut out, format!("d v_{0} = −λ_{n} φ_{0}", n + 1), vn.differential() == lam.compose(ph)?.neg());
        }
        for n in 1..=self.top() {
            let (jn, tn, sn, beta, dl) = (&self.j[n], &self.theta[n], &self.sigma[n], b.alpha(n), &self.delta[n - 1]);
            check(&mut out, format!("θ_{n} j_{n} = 1"), tn.compose(jn)? == GradedMap::identity(self.k.clone()));
            check(&mut out, format!("β_{n} σ_{n} = 1"), beta.compose(sn)? == GradedMap::identity(b.tensored(n - 1).clone()));
            let sum = jn.compose(tn)?.add(&sn.compose(beta)?)?;
            check(&mut out, format!("j_{n} θ_{n} + σ_{n} β_{n} = 1"), sum == GradedMap::identity(b.level(n).clone()));
            check(&mut out, format!("θ_{n} σ_{n} = 0"), tn.compose(sn)?.is_zero());
            check(&mut out, format!("d θ_{n} = δ_{0} β_{n}", n - 1), tn.differential() == dl.compose(beta)?);
            check(&mut out, format!("d σ_{n} = −j_{n} δ_{0}", n - 1), sn.differential() == jn.compose(dl)?.neg());
            if n < self.top() {
                check(&mut out, format!("θ_{0} μ_{n} = θ_{n}", n + 1), self.theta[n + 1].compose(b.lambda(n))? == *tn);
            }
        }
        Ok(out)
    }

    /// `T_p` assembled from base level `n`:
    /// `δ_{n+p} (σ_{n+p} ⊗ 1) ⋯ (σ_{n+1} ⊗ 1_{S^p}) (j_n ⊗ 1_{S^{p+1}})`.
    pub fn t_operator_at(&self, n: usize, p: usize) -> Result<GradedMap> {
        if n < 1 || n + p + 1 > self.top() {
            return Err(Error::Precondition(format!("T_{p} from level {n} needs level {} but N = {}", n + p + 1, self.top())));
        }
        let mut x = self.tmap(&self.j[n], p + 1)?;
        for t in 1..=p {
            x = self.tmap(&self.sigma[n + t], p + 1 - t)?.compose(&x)?;
        }
        self.delta[n + p].compose(&x)
    }

    /// `T_p : K ⊗ S^{p+1} → K` from the lowest level; defined for `p ≤ N − 2`.
    pub fn t_operator(&self, p: usize) -> Result<GradedMap> {
        self.t_operator_at(1, p)
    }

    /// Largest `p` with `T_p` defined, or `None` when `N < 2`.
    pub fn t_range(&self) -> Option<usize> {
        self.top().checked_sub(2)
    }

    /// `(dT_p, Σ_{i+j=p−1} T_i (T_j ⊗ 1))`.
    pub fn t_relation(&self, p: usize) -> Result<(GradedMap, GradedMap)> {
        let tp = self.t_operator(p)?;
        let k_tensor = tp.src().clone();
        let mut sum = GradedMap::zero(k_tensor, self.k.clone(), -2);
        for i in 0..p {
            let jdx = p - 1 - i;
            let term = self.t_operator(i)?.compose(&self.tmap(&self.t_operator(jdx)?, i + 1)?)?;
            sum = sum.add(&term)?;
        }
        Ok((tp.differential(), sum))
    }

    /// `f_n = F λ^∞_n v_n : C_n → K`.
    pub fn coordinate(&self, f: &GradedMap, n: usize) -> Result<GradedMap> {
        f.compose(&self.lambda_inf(n)?)?.compose(&self.v[n])
    }

    /// `f̂_n = Σ_{k=1}^{n} σ_n ⋯ σ_{k+1} j_k F λ^∞_k α_{k+1} ⋯ α_n`, as a map of
    /// `𝒟₀`-complexes `A_* → B_*`.
    pub fn fhat_from_f(&self, f: &GradedMap) -> Result<D0Map> {
        self.ensure_total_map(f)?;
        let q = f.degree();
        let mut levels = vec![GradedMap::zero(self.a.level(0).clone(), self.b.level(0).clone(), q)];
        for n in 1..=self.top() {
            let mut acc = GradedMap::zero(self.a.level(n).clone(), self.b.level(n).clone(), q);
            for k in 1..=n {
                let e = n - k;
                let mut right = GradedMap::identity(self.a.level(n).clone());
                for t in (k + 1..=n).rev() {
                    right = self.tmap(self.a.alpha(t), n - t)?.compose(&right)?;
                }
                let mut term = self.tmap(&self.lambda_inf(k)?, e)?.compose(&right)?;
                term = self.tmap(f, e)?.compose(&term)?;
                term = self.tmap(&self.j[k], e)?.compose(&term)?;
                for t in k + 1..=n {
                    term = self.tmap(&self.sigma[t], n - t)?.compose(&term)?;
                }
                acc = acc.add(&term)?;
            }
            levels.push(acc);
        }
        D0Map::new(&self.a, &self.b, levels)
    }

    /// Right-hand side of the recursion
    /// `f̂_{n+1} = j_{n+1} θ_n f̂_n u_n + σ_{n+1} (f̂_n ⊗ 1) α_{n+1} + j_{n+1} f_{n+1} π_{n+1}`.
    pub fn fhat_recursion(&self, f: &GradedMap, fhat: &D0Map, n: usize) -> Result<GradedMap> {
        let j1 = &self.j[n + 1];
        let first = j1.compose(&self.theta[n])?.compose(&fhat.levels[n])?.compose(&self.u[n])?;
        let lifted = crate::chain::tensor_map_into(&fhat.levels[n], self.bimodule(), self.a.tensored(n), self.b.tensored(n))?;
        let second = self.sigma[n + 1].compose(&lifted)?.compose(self.a.alpha(n + 1))?;
        let third = j1.compose(&self.coordinate(f, n + 1)?)?.compose(&self.pi[n + 1])?;
        first.add(&second)?.add(&third)
    }

    /// Inverse of [`Self::fhat_from_f`]: `f_n = θ_n f̂_n v_n`, assembled into
    /// `F : A → K` through the decomposition `A = ⊕ λ^∞_n v_n (C_n)`.
    pub fn f_from_fhat(&self, fhat: &D0Map) -> Result<GradedMap> {
        let a = self.total();
        let q = fhat.degree;
        let ring = a.ring().clone();
        let ws: Vec<GradedMap> = (1..=self.top()).map(|n| self.lambda_inf(n)?.compose(&self.v[n])).collect::<Result<_>>()?;
        let mut f = GradedMap::zero(a.clone(), self.k.clone(), q);
        let inverses: Vec<Matrix> = a
            .degrees()
            .map(|d| {
                let w = ws.iter().fold(Matrix::zeros(&ring, a.rank(d), 0), |acc, w| acc.hstack(&w.block(d)));
                solve_linear(&w, &Matrix::identity(&ring, a.rank(d)))?
                    .ok_or_else(|| Error::Invariant(format!("quotient sections do not span A in degree {d}")))
            })
            .collect::<Result<_>>()?;
        for n in 1..=self.top() {
            let c = &self.quotients[n];
            let offset = |d: i64| (1..n).map(|m| self.quotients[m].rank(d)).sum::<usize>();
            let rho = GradedMap::from_fn(a.clone(), c.clone(), 0, |d| {
                let o = offset(d);
                inverses[(d - a.lo()) as usize].submatrix(o..o + c.rank(d), 0..a.rank(d))
            })?;
            let fn_ = self.theta[n].compose(&fhat.levels[n])?.compose(&self.v[n])?;
            f = f.add(&fn_.compose(&rho)?)?;
        }
        Ok(f)
    }

    fn ensure_total_map(&self, f: &GradedMap) -> Result<()> {
        if **f.src() != **self.total() || **f.tgt() != *self.k {
            return Err(Error::Shape("F must be a graded map A_N → K".into()));
        }
        Ok(())
    }

    /// `δF = dF − Σ_{i ≥ 0} T_i (F ⊗ 1) α^{i+1}`.
    pub fn delta_differential(&self, f: &GradedMap) -> Result<GradedMap> {
        self.ensure_total_map(f)?;
        let mut out = f.differential();
        if let Some(max) = self.t_range() {
            for i in 0..=max {
                let term = self.t_operator(i)?.compose(&self.tmap(f, i + 1)?)?.compose(&self.alpha_power(i + 1)?)?;
                out = out.sub(&term)?;
            }
        }
        Ok(out)
    }

    /// Basis of `δ`-cycles of degree `q` among graded maps `A → K`.
    pub fn delta_cycles(&self, q: i64) -> Result<Vec<GradedMap>> {
        let a = self.total();
        let basis = elementary_maps(a, &self.k, q);
        if basis.is_empty() {
            return Ok(Vec::new());
        }
        let images: Vec<GradedMap> = basis.iter().map(|e| self.delta_differential(e)).collect::<Result<_>>()?;
        let ring = a.ring().clone();
        let cols = images.iter().fold(Matrix::zeros(&ring, flat_len(a, &self.k, q - 1), 0), |m, g| m.hstack(&flatten(g)));
        let ker = kernel_basis(&cols)?;
        Ok((0..ker.cols())
            .map(|c| {
                basis.iter().enumerate().fold(GradedMap::zero(a.clone(), self.k.clone(), q), |acc, (r, e)| acc.add(&e.scale(ker.get(r, c))).expect("same shape"))
            })
            .collect())
    }
}

fn flat_len(a: &ChainComplex, k: &ChainComplex, q: i64) -> usize {
    a.degrees().map(|d| a.rank(d) * k.rank(d + q)).sum()
}

fn flatten(g: &GradedMap) -> Matrix {
    let ring = g.ring().clone();
    let data: Vec<_> = g.blocks().iter().flat_map(|b| b.entries().iter().cloned()).collect();
    Matrix::new(ring, data.len(), 1, data).expect("ring elements")
}

/// Graded maps `A → K` of degree `q` with a single unit entry.
fn elementary_maps(a: &Arc<ChainComplex>, k: &Arc<ChainComplex>, q: i64) -> Vec<GradedMap> {
    let mut out = Vec::new();
    if a.is_zero() {
        return out;
    }
    let ring = a.ring().clone();
    for d in a.degrees() {
        for r in 0..k.rank(d + q) {
            for c in 0..a.rank(d) {
                let g = GradedMap::from_fn(a.clone(), k.clone(), q, |e| {
                    let mut m = Matrix::zeros(&ring, k.rank(e + q), a.rank(e));
                    if e == d {
                        m.set(r, c, crate::linalg::int(1));
                    }
                    m
                })
                .expect("shapes follow the complexes");
                out.push(g);
            }
        }
    }
    out
}

/// Result of the series inversion.
#[derive(Clone, Debug)]
pub struct Inversion {
    pub g: GradedMap,
    pub contraction: GradedMap,
    /// Largest `p` whose terms can be nonzero for degree reasons.
    pub max_p: usize,
    /// `(p, ε_p)` as used in the sum.
    pub signs: Vec<(usize, i64)>,
    pub terms: usize,
}

/// Sign of the `p`-th layer of the inversion series for `deg F = q`.
pub fn inversion_sign(p: usize, q: i64) -> i64 {
    if ((p as i64 + 1) * q).rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// A partially built term: the `T` indices chosen so far (outermost last)
/// and the right factor `(k⊗1)(α^{i+1}⊗1) ⋯ k`.
struct Branch {
    idx: Vec<usize>,
    right: GradedMap,
    exponent: usize,
}

impl SplittingData {
    fn contraction(&self) -> Result<GradedMap> {
        if let Some(k) = self.contraction.get() {
            return Ok(k.clone());
        }
        let k = find_contraction(self.total())?.ok_or_else(|| Error::NotAcyclic("total space A_N is not contractible".into()))?;
        Ok(self.contraction.get_or_init(|| k).clone())
    }

    /// `G = Σ_p Σ_{i_1..i_p} (−1)^{(p+1) deg F} T_{i_p} ⋯ T_{i_1} F k α^{i_1+1} k ⋯ k α^{i_p+1} k`
    /// for a `δ`-cycle `F`, with `δG = F` checked.
    pub fn invert_homotopy(&self, f: &GradedMap, exec: Execution) -> Result<Inversion> {
        if !self.delta_differential(f)?.is_zero() {
            return Err(Error::Precondition("F is not a δ-cycle".into()));
        }
        let a = self.total();
        let k = self.contraction()?;
        let q = f.degree();
        // A term of layer p has degree q + p + 1 from A into K.
        let max_p = if a.is_zero() || self.k.is_zero() { 0 } else { (self.k.hi() - a.lo() - q - 1).max(0) as usize };
        let signs: Vec<(usize, i64)> = (0..=max_p).map(|p| (p, inversion_sign(p, q))).collect();
        let t_ops = match self.t_range() {
            Some(m) if max_p > 0 => (0..=m).map(|i| self.t_operator(i)).collect::<Result<Vec<_>>>()?,
            _ => Vec::new(),
        };

        // Layers share right factors, so grow them one index at a time and
        // drop branches that have already vanished.
        let mut k_tensor = vec![k.clone()];
        let mut layer = vec![Branch { idx: Vec::new(), right: k.clone(), exponent: 0 }];
        let mut leaves = Vec::new();
        for p in 0..=max_p {
            let mut next = Vec::new();
            for branch in layer {
                if p < max_p {
                    for (i, t) in t_ops.iter().enumerate() {
                        if t.is_zero() {
                            continue;
                        }
                        let alpha = self.alpha_power(i + 1)?;
                        if alpha.is_zero() {
                            continue;
                        }
                        let e = branch.exponent + i + 1;
                        while k_tensor.len() <= e {
                            k_tensor.push(self.tmap(&k, k_tensor.len())?);
                        }
                        let right = k_tensor[e].compose(&self.tmap(&alpha, branch.exponent)?.compose(&branch.right)?)?;
                        if !right.is_zero() {
                            let mut idx = branch.idx.clone();
                            idx.push(i);
                            next.push(Branch { idx, right, exponent: e });
                        }
                    }
                }
                leaves.push(branch);
            }
            layer = next;
        }

        let terms = leaves.len();
        let parts = par::try_map(exec, &leaves, |b| {
            // idx was built innermost first, so the outermost T is applied last.
            let mut term = self.tmap(f, b.exponent)?.compose(&b.right)?;
            let mut rest = b.exponent;
            for &i in b.idx.iter().rev() {
                rest -= i + 1;
                term = self.tmap(&t_ops[i], rest)?.compose(&term)?;
            }
            Ok(if inversion_sign(b.idx.len(), q) == 1 { term } else { term.neg() })
        })?;
        let mut g = GradedMap::zero(a.clone(), self.k.clone(), q + 1);
        for part in parts {
            g = g.add(&part)?;
        }
        if self.delta_differential(&g)? != *f {
            return Err(Error::Invariant("δG ≠ F for the inversion series".into()));
        }
        Ok(Inversion { g, contraction: k, max_p, signs, terms })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzz::{random_matrix, random_reduced_d0, random_twisted_target, rng, D0Spec, FuzzRng};
    use crate::linalg::Ring;

    fn pair(seed: u64, top: usize) -> SplittingData {
        let mut r = rng(seed);
        let ring = Ring::Integers;
        let a = random_reduced_d0(&mut r, &ring, &D0Spec { acyclic_through: top, ..D0Spec::small(top) }).unwrap();
        let b = random_twisted_target(&mut r, &ring, a.bimodule(), top, 0, 2, 2).unwrap();
        SplittingData::derive(&a, &b).unwrap()
    }

    fn random_map(r: &mut FuzzRng, data: &SplittingData, q: i64) -> GradedMap {
        let (a, k) = (data.total(), &data.k);
        GradedMap::from_fn(a.clone(), k.clone(), q, |d| random_matrix(r, a.ring(), k.rank(d + q), a.rank(d), 2)).unwrap()
    }

    #[test]
    fn splitting_identities_hold() {
        for seed in 0..4 {
            let data = pair(seed, 3);
            let bad: Vec<_> = data.identities().unwrap().into_iter().filter(|c| !c.holds).map(|c| c.name).collect();
            assert!(bad.is_empty(), "seed {seed}: {bad:?}");
        }
    }

    #[test]
    fn t_operators_satisfy_the_twisting_relation() {
        for seed in 0..4 {
            let data = pair(seed, 4);
            for p in 0..=data.t_range().unwrap() {
                let (lhs, rhs) = data.t_relation(p).unwrap();
                assert_eq!(lhs, rhs, "seed {seed}, p = {p}");
            }
        }
    }

    #[test]
    fn t_operators_do_not_depend_on_the_base_level() {
        let data = pair(21, 4);
        for p in 0..=1 {
            for n in 2..data.top() - p {
                assert_eq!(data.t_operator_at(n, p).unwrap(), data.t_operator(p).unwrap(), "n = {n}, p = {p}");
            }
        }
        assert!(data.t_operator(3).is_err());
    }

    #[test]
    fn fhat_recursion_and_inverse() {
        let data = pair(2, 3);
        let mut r = rng(99);
        for q in [-1, 0, 1] {
            let f = random_map(&mut r, &data, q);
            let fhat = data.fhat_from_f(&f).unwrap();
            for n in 0..data.top() {
                assert_eq!(data.fhat_recursion(&f, &fhat, n).unwrap(), fhat.levels[n + 1], "q = {q}, n = {n}");
            }
            assert_eq!(data.f_from_fhat(&fhat).unwrap(), f);
        }
    }

    #[test]
    fn delta_squares_to_zero_and_matches_levelwise_d() {
        let data = pair(4, 3);
        let mut r = rng(5);
        for q in [0, 1] {
            let f = random_map(&mut r, &data, q);
            let df = data.delta_differential(&f).unwrap();
            assert!(data.delta_differential(&df).unwrap().is_zero());
            let fhat = data.fhat_from_f(&f).unwrap();
            let levelwise: Vec<_> = fhat.levels.iter().map(GradedMap::differential).collect();
            assert_eq!(data.fhat_from_f(&df).unwrap().levels, levelwise);
        }
    }

    #[test]
    fn inversion_recovers_cycles() {
        let data = pair(6, 3);
        let mut r = rng(8);
        for q in [-1, 0] {
            let h = random_map(&mut r, &data, q + 1);
            let f = data.delta_differential(&h).unwrap();
            for exec in [Execution::Parallel, Execution::Sequential] {
                let inv = data.invert_homotopy(&f, exec).unwrap();
                assert_eq!(data.delta_differential(&inv.g).unwrap(), f);
            }
        }
        for f in data.delta_cycles(0).unwrap() {
            data.invert_homotopy(&f, Execution::Parallel).unwrap();
        }
    }

    #[test]
    fn inversion_rejects_non_cycles() {
        let data = pair(6, 2);
        let mut r = rng(1);
        let f = random_map(&mut r, &data, 0);
        if !data.delta_differential(&f).unwrap().is_zero() {
            assert!(matches!(data.invert_homotopy(&f, Execution::Sequential), Err(Error::Precondition(_))));
        }
    }

    #[test]
    fn sign_layers_follow_the_degree() {
        for q in -3..=3 {
            let eps0 = if q % 2 == 0 { 1 } else { -1 };
            for p in 0..5usize {
                let expect = eps0 * if (p as i64 * q) % 2 == 0 { 1 } else { -1 };
                assert_eq!(inversion_sign(p, q), expect);
            }
        }
    }

    #[test]
    fn fixtures_exercise_twisting() {
        let mut seen = [false; 3];
        for seed in 0..6 {
            let data = pair(seed, 4);
            seen[0] |= !data.t_operator(0).unwrap().is_zero();
            seen[1] |= !data.t_operator(1).unwrap().is_zero();
            seen[2] |= !data.alpha_power(2).unwrap().is_zero();
        }
        assert_eq!(seen, [true; 3]);
    }
}
