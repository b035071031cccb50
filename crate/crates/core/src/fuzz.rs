//! Seeded random generators for complexes, chain maps and `𝒟₀`-complexes.
//!
//! Complexes are sums of elementary pieces (a free generator, `R --a--> R`)
//! conjugated degreewise by random unimodular matrices, so their homology is
//! known by construction but hidden from the algorithms under test.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{direct_sum, tensor_map_into, Bimodule, ChainComplex, GradedMap};
use crate::d0::D0Complex;
use crate::error::Result;
use crate::linalg::{int, LinearSystem, Matrix, Ring, Scalar};

pub type FuzzRng = ChaCha8Rng;

pub fn rng(seed: u64) -> FuzzRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nonzero(rng: &mut FuzzRng, ring: &Ring, bound: i64) -> Scalar {
    match ring.modulus() {
        Some(m) => int(rng.gen_range(1..m as i64)),
        None => {
            let v = rng.gen_range(1..=bound.max(1));
            int(if rng.gen_bool(0.5) { v } else { -v })
        }
    }
}

pub fn random_matrix(rng: &mut FuzzRng, ring: &Ring, rows: usize, cols: usize, bound: i64) -> Matrix {
    Matrix::from_fn(ring, rows, cols, |_, _| ring.reduce(int(rng.gen_range(-bound..=bound))))
}

/// A unimodular matrix and its inverse, as a product of elementary moves.
pub fn random_unimodular(rng: &mut FuzzRng, ring: &Ring, n: usize, steps: usize) -> (Matrix, Matrix) {
    let mut u = Matrix::identity(ring, n);
    let mut inv = Matrix::identity(ring, n);
    if n < 2 {
        if n == 1 && rng.gen_bool(0.5) {
            let m = Matrix::from_fn(ring, 1, 1, |_, _| ring.reduce(int(-1)));
            return (m.clone(), m);
        }
        return (u, inv);
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..n);
        let mut j = rng.gen_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        let c = rng.gen_range(-2i64..=2);
        let mut e = Matrix::identity(ring, n);
        e.set(i, j, ring.reduce(int(c)));
        let mut e_inv = Matrix::identity(ring, n);
        e_inv.set(i, j, ring.reduce(int(-c)));
        u = &e * &u;
        inv = &inv * &e_inv;
    }
    (u, inv)
}

/// Kinds of elementary pieces a random complex is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Piece {
    /// `R` in one degree.
    Free,
    /// `R --a--> R` with a random nonzero `a`.
    Multiply,
    /// `R --±1--> R`.
    Contractible,
}

/// Random complex supported in `lo..=hi` with `pieces` elementary summands
/// drawn from `kinds`.
pub fn random_complex(rng: &mut FuzzRng, ring: &Ring, lo: i64, hi: i64, pieces: usize, kinds: &[Piece]) -> Result<ChainComplex> {
    let mut parts = Vec::new();
    for _ in 0..pieces {
        let mut kind = kinds[rng.gen_range(0..kinds.len())];
        if hi == lo && kind != Piece::Free {
            kind = Piece::Free;
        }
        let part = match kind {
            Piece::Free => ChainComplex::concentrated(ring, rng.gen_range(lo..=hi), 1),
            Piece::Multiply | Piece::Contractible => {
                let n = rng.gen_range(lo..hi);
                let a = if kind == Piece::Multiply { nonzero(rng, ring, 6) } else { ring.reduce(int(if rng.gen_bool(0.5) { 1 } else { -1 })) };
                ChainComplex::two_term(n, Matrix::from_fn(ring, 1, 1, |_, _| a.clone()))
            }
        };
        parts.push(Arc::new(part));
    }
    if parts.is_empty() {
        return Ok(ChainComplex::zero(ring));
    }
    let sum = direct_sum(&parts)?;
    Ok(conjugate(rng, &sum.complex)?.0)
}

/// `C` conjugated degreewise by random unimodular matrices, with the
/// isomorphism `C → C'`.
pub fn conjugate(rng: &mut FuzzRng, c: &Arc<ChainComplex>) -> Result<(ChainComplex, GradedMap)> {
    let ring = c.ring().clone();
    if c.is_zero() {
        return Ok(((**c).clone(), GradedMap::identity(c.clone())));
    }
    let us: Vec<(Matrix, Matrix)> = c.degrees().map(|n| random_unimodular(rng, &ring, c.rank(n), 3 * c.rank(n))).collect();
    let lo = c.lo();
    let at = |n: i64| &us[(n - lo) as usize];
    let out = ChainComplex::from_fn(&ring, lo, c.ranks().to_vec(), |n| &(&at(n - 1).0 * &c.d(n)) * &at(n).1)?;
    let out = Arc::new(out);
    let iso = GradedMap::from_fn(c.clone(), out.clone(), 0, |n| at(n).0.clone())?;
    Ok(((*out).clone(), iso))
}

/// A random combination of a basis of the degree-`degree` chain maps
/// `src → tgt` (which may be zero).
pub fn random_chain_map(rng: &mut FuzzRng, src: &Arc<ChainComplex>, tgt: &Arc<ChainComplex>, degree: i64) -> Result<GradedMap> {
    let ring = src.ring().clone();
    if src.is_zero() {
        return Ok(GradedMap::zero(src.clone(), tgt.clone(), degree));
    }
    let mut sys = LinearSystem::new(&ring);
    let ids: Vec<usize> = src.degrees().map(|n| sys.add_unknown(tgt.rank(n + degree), src.rank(n))).collect();
    let lo = src.lo();
    let sign = if degree % 2 == 0 { 1 } else { -1 };
    for n in src.degrees() {
        let (rows, cols) = (tgt.rank(n + degree - 1), src.rank(n));
        let eq = sys.add_zero_equation(rows, cols);
        sys.add_term(eq, ids[(n - lo) as usize], tgt.d(n + degree), Matrix::identity(&ring, cols))?;
        if n > lo {
            sys.add_term(eq, ids[(n - 1 - lo) as usize], Matrix::identity(&ring, rows).scale_i64(-sign), src.d(n))?;
        }
    }
    let basis = sys.homogeneous_basis()?;
    let coeffs = random_matrix(rng, &ring, basis.cols(), 1, 2);
    let x = &basis * &coeffs;
    let blocks = sys.unpack(&x, 0);
    GradedMap::new(src.clone(), tgt.clone(), degree, blocks)
}

/// Parameters for [`random_reduced_d0`].
#[derive(Clone, Debug)]
pub struct D0Spec {
    pub top: usize,
    pub s_rank: usize,
    /// `Ker(α_i)` is contractible for `i ≤ acyclic_through`.
    pub acyclic_through: usize,
    /// `λ` restricted to `Ker(α_i) → Ker(α_{i+1})` is a homology
    /// equivalence for `i ≥ stable_from`.
    pub stable_from: usize,
    pub pieces: usize,
    pub lo: i64,
    pub hi: i64,
}

impl D0Spec {
    pub fn small(top: usize) -> Self {
        D0Spec { top, s_rank: 1, acyclic_through: 0, stable_from: usize::MAX, pieces: 2, lo: 0, hi: 2 }
    }
}

fn piece_kinds(ring: &Ring, contractible: bool) -> Vec<Piece> {
    if contractible {
        vec![Piece::Contractible]
    } else if ring.is_field() {
        vec![Piece::Free, Piece::Contractible]
    } else {
        vec![Piece::Free, Piece::Multiply, Piece::Contractible]
    }
}

/// Reduced `𝒟₀`-complex with `B_i = K_i ⊕ (B_{i−1} ⊗ S)`, `α_i` the
/// projection onto the second summand, `K_{i+1} = K_i ⊕ J_i`, and
/// `λ_i = (K_i ↪ K_{i+1}) ⊕ (λ_{i−1} ⊗ 1)`, conjugated levelwise by random
/// chain isomorphisms. `Ker(α_i) ≅ K_i` and the induced `λ̄_i` has cokernel `J_i`.
pub fn random_reduced_d0(rng: &mut FuzzRng, ring: &Ring, spec: &D0Spec) -> Result<D0Complex> {
    let s = Bimodule::free(ring, spec.s_rank);
    let zero = Arc::new(ChainComplex::zero(ring));
    let mut raw_levels = vec![zero.clone()];
    let mut raw_lambda: Vec<GradedMap> = Vec::new();
    let mut raw_alpha: Vec<GradedMap> = Vec::new();
    let mut k_prev: Option<Arc<ChainComplex>> = None;
    for i in 1..=spec.top {
        let (k, a) = match &k_prev {
            None => {
                let k = random_complex(rng, ring, spec.lo, spec.hi, spec.pieces, &piece_kinds(ring, i <= spec.acyclic_through))?;
                (Arc::new(k), None)
            }
            Some(kp) => {
                let contractible = i <= spec.acyclic_through || i > spec.stable_from;
                let count = rng.gen_range(0..=spec.pieces);
                let j = Arc::new(random_complex(rng, ring, spec.lo, spec.hi, count, &piece_kinds(ring, contractible))?);
                let sum = direct_sum(&[kp.clone(), j])?;
                (sum.complex.clone(), Some(sum.inclusions[0].clone()))
            }
        };
        let prev = raw_levels[i - 1].clone();
        let prev_s = Arc::new(crate::chain::tensor_with_bimodule(&prev, &s)?);
        let b = direct_sum(&[k.clone(), prev_s.clone()])?;
        raw_alpha.push(b.projections[1].clone());
        let lam = match a {
            None => GradedMap::zero(prev.clone(), b.complex.clone(), 0),
            Some(a) => {
                let pb = direct_sum(&[k_prev.clone().unwrap(), Arc::new(crate::chain::tensor_with_bimodule(&raw_levels[i - 2], &s)?)])?;
                debug_assert_eq!(*pb.complex, *prev);
                let lt = tensor_map_into(&raw_lambda[i - 2], &s, pb.projections[1].tgt(), b.projections[1].tgt())?;
                let blocks = b.inclusions[0].compose(&a)?.compose(&pb.projections[0])?.add(&b.inclusions[1].compose(&lt)?.compose(&pb.projections[1])?)?;
                blocks.retarget(&prev, &b.complex)?
            }
        };
        raw_lambda.push(lam);
        raw_levels.push(b.complex.clone());
        k_prev = Some(k);
    }
    let raw = D0Complex::new(s.clone(), raw_levels, raw_lambda, raw_alpha, spec.top)?;
    conjugate_d0(rng, &raw)
}

/// Transports a `𝒟₀`-complex along random levelwise chain isomorphisms.
pub fn conjugate_d0(rng: &mut FuzzRng, x: &D0Complex) -> Result<D0Complex> {
    let s = x.bimodule().clone();
    let mut levels = Vec::new();
    let mut isos: Vec<GradedMap> = Vec::new();
    let mut inverses: Vec<GradedMap> = Vec::new();
    for i in 0..=x.top() {
        let (c, iso) = conjugate(rng, x.level(i))?;
        let c = Arc::new(c);
        let iso = iso.retarget(x.level(i), &c)?;
        let inv = GradedMap::from_fn(c.clone(), x.level(i).clone(), 0, |n| {
            crate::linalg::solve_linear(&iso.block(n), &Matrix::identity(c.ring(), c.rank(n))).unwrap().unwrap()
        })?;
        levels.push(c);
        isos.push(iso);
        inverses.push(inv);
    }
    let lambda = (0..x.top()).map(|i| isos[i + 1].compose(x.lambda(i))?.compose(&inverses[i])).collect::<Result<Vec<_>>>()?;
    let alpha = (1..=x.top())
        .map(|i| {
            let t = Arc::new(crate::chain::tensor_with_bimodule(&levels[i - 1], &s)?);
            let lifted = tensor_map_into(&isos[i - 1], &s, x.tensored(i - 1), &t)?;
            lifted.compose(x.alpha(i))?.compose(&inverses[i])
        })
        .collect::<Result<Vec<_>>>()?;
    D0Complex::new(s, levels, lambda, alpha, x.stabilization())
}

/// A `𝒟₀`-complex in `𝔅_n`: increasing levels up to `n`, constant (with
/// identity `λ`) from `n` on, and `α = 0`.
pub fn random_bn_member(rng: &mut FuzzRng, ring: &Ring, s: &Bimodule, top: usize, n: usize, pieces: usize) -> Result<D0Complex> {
    let n = n.clamp(1, top);
    let zero = Arc::new(ChainComplex::zero(ring));
    let mut levels = vec![zero];
    let mut lambda = Vec::new();
    for i in 1..=top {
        let prev = levels[i - 1].clone();
        if i > n {
            levels.push(prev.clone());
            lambda.push(GradedMap::identity(prev));
            continue;
        }
        let count = rng.gen_range(0..=pieces);
        let j = Arc::new(random_complex(rng, ring, 0, 2, count, &piece_kinds(ring, false))?);
        let sum = direct_sum(&[prev.clone(), j])?;
        lambda.push(sum.inclusions[0].clone());
        levels.push(sum.complex.clone());
    }
    let alpha = (1..=top)
        .map(|i| Ok(GradedMap::zero(levels[i].clone(), Arc::new(crate::chain::tensor_with_bimodule(&levels[i - 1], s)?), 0)))
        .collect::<Result<Vec<_>>>()?;
    D0Complex::new(s.clone(), levels, lambda, alpha, n)
}

/// Reduced target for the nil calculus: `B_1 = K`, `B_n = K ⊕ (B_{n−1} ⊗ S)`
/// with `∂ = [[∂_K, τ_n], [0, ∂]]`, `α_n` the second projection and `μ` the
/// identity on `K`. The twists satisfy `∂τ + τ∂ = 0` and
/// `τ_{n+1} (μ_{n−1} ⊗ 1) = τ_n`; each is a random solution, and the whole
/// tower falls back to `τ = 0` if a level has none. Conjugated levelwise.
pub fn random_twisted_target(rng: &mut FuzzRng, ring: &Ring, s: &Bimodule, top: usize, lo: i64, hi: i64, pieces: usize) -> Result<D0Complex> {
    let kinds = piece_kinds(ring, false);
    let k = Arc::new(random_complex(rng, ring, lo, hi, pieces.max(1), &kinds)?);
    for attempt in 0..8 {
        if let Some(raw) = twisted_tower(rng, s, &k, top, lo, hi, attempt < 7)? {
            return conjugate_d0(rng, &raw);
        }
    }
    unreachable!("the untwisted tower always exists")
}

fn twisted_tower(rng: &mut FuzzRng, s: &Bimodule, k: &Arc<ChainComplex>, top: usize, lo: i64, hi: i64, twist: bool) -> Result<Option<D0Complex>> {
    let ring = k.ring().clone();
    let zero = Arc::new(ChainComplex::zero(&ring));
    let mut levels = vec![zero.clone(), k.clone()];
    let mut lambda = vec![GradedMap::zero(zero.clone(), k.clone(), 0)];
    let mut alpha = vec![GradedMap::zero(k.clone(), zero.clone(), 0)];
    let mut taus: Vec<Vec<Matrix>> = Vec::new();
    for n in 2..=top {
        let prev = levels[n - 1].clone();
        let ps = Arc::new(crate::chain::tensor_with_bimodule(&prev, s)?);
        let mut sys = LinearSystem::new(&ring);
        let ids: Vec<usize> = (lo..=hi).map(|d| sys.add_unknown(k.rank(d - 1), ps.rank(d))).collect();
        for d in lo..=hi {
            let i = (d - lo) as usize;
            let eq = sys.add_zero_equation(k.rank(d - 2), ps.rank(d));
            sys.add_term(eq, ids[i], k.d(d - 1), Matrix::identity(&ring, ps.rank(d)))?;
            if d > lo {
                sys.add_term(eq, ids[i - 1], Matrix::identity(&ring, k.rank(d - 2)), ps.d(d))?;
            }
        }
        if let Some(prev_tau) = taus.last() {
            let mu_s = crate::chain::tensor_map(&lambda[n - 2], s)?;
            for d in lo..=hi {
                let i = (d - lo) as usize;
                let eq = sys.add_equation(prev_tau[i].clone());
                sys.add_term(eq, ids[i], Matrix::identity(&ring, k.rank(d - 1)), mu_s.block(d))?;
            }
        }
        let Some(particular) = sys.solve()? else { return Ok(None) };
        let tau = if twist {
            let basis = sys.homogeneous_basis()?;
            let coeffs = random_matrix(rng, &ring, basis.cols(), 1, 1);
            let h = sys.unpack(&(&basis * &coeffs), 0);
            particular.iter().zip(&h).map(|(p, h)| p.checked_add(h)).collect::<Result<Vec<_>>>()?
        } else {
            particular.iter().map(|p| Matrix::zeros(&ring, p.rows(), p.cols())).collect()
        };
        let at = |d: i64| &tau[(d - lo) as usize];
        let ranks = (lo..=hi).map(|d| k.rank(d) + ps.rank(d)).collect();
        let b = Arc::new(ChainComplex::from_fn(&ring, lo, ranks, |d| {
            Matrix::blocks2(&k.d(d), at(d), &Matrix::zeros(&ring, ps.rank(d - 1), k.rank(d)), &ps.d(d))
        })?);
        let mu = GradedMap::from_fn(prev.clone(), b.clone(), 0, |d| {
            if n == 2 {
                Matrix::identity(&ring, k.rank(d)).vstack(&Matrix::zeros(&ring, ps.rank(d), k.rank(d)))
            } else {
                let inner = crate::chain::tensor_map(&lambda[n - 2], s).expect("λ tensors").block(d);
                Matrix::block_diag(&ring, &[&Matrix::identity(&ring, k.rank(d)), &inner])
            }
        })?;
        let al = GradedMap::from_fn(b.clone(), ps.clone(), 0, |d| {
            Matrix::zeros(&ring, ps.rank(d), k.rank(d)).hstack(&Matrix::identity(&ring, ps.rank(d)))
        })?;
        lambda.push(mu);
        alpha.push(al);
        levels.push(b);
        taus.push(tau);
    }
    D0Complex::new(s.clone(), levels, lambda, alpha, top).map(Some)
}

/// `(0, B, B, …)` with identity `λ` from level 1 on. Compatibility at level 1
/// forces `α = 0`.
pub fn random_f_shape(rng: &mut FuzzRng, ring: &Ring, s: &Bimodule, top: usize, pieces: usize) -> Result<D0Complex> {
    let b = Arc::new(random_complex(rng, ring, 0, 2, pieces, &piece_kinds(ring, false))?);
    let zero = Arc::new(ChainComplex::zero(ring));
    let mut levels = vec![zero.clone()];
    levels.extend(std::iter::repeat_n(b.clone(), top));
    let lambda = (0..top)
        .map(|i| if i == 0 { GradedMap::zero(zero.clone(), b.clone(), 0) } else { GradedMap::identity(b.clone()) })
        .collect();
    let alpha = (1..=top)
        .map(|i| Ok(GradedMap::zero(levels[i].clone(), Arc::new(crate::chain::tensor_with_bimodule(&levels[i - 1], s)?), 0)))
        .collect::<Result<Vec<_>>>()?;
    D0Complex::new(s.clone(), levels, lambda, alpha, 1.min(top))
}

/// `(0, 0, B_2, B_3, …)` with `B_i = B_{i−1} ⊕ J_i`, `λ` the inclusion and
/// `α_i = ((λ ⊗ 1) α_{i−1}, r_i)` for a random chain map `r_i : J_i → B_{i−1} ⊗ S`.
pub fn random_g_shape(rng: &mut FuzzRng, ring: &Ring, s: &Bimodule, top: usize, pieces: usize) -> Result<D0Complex> {
    let zero = Arc::new(ChainComplex::zero(ring));
    let tens = |c: &Arc<ChainComplex>| crate::chain::tensor_with_bimodule(c, s).map(Arc::new);
    let mut levels = vec![zero.clone(), zero.clone()];
    let mut lambda = vec![GradedMap::zero(zero.clone(), zero.clone(), 0)];
    let mut alpha = vec![GradedMap::zero(zero.clone(), zero.clone(), 0)];
    for i in 2..=top {
        let prev = levels[i - 1].clone();
        let count = rng.gen_range(1..=pieces.max(1));
        let j = Arc::new(random_complex(rng, ring, 0, 2, count, &piece_kinds(ring, false))?);
        let sum = direct_sum(&[prev.clone(), j.clone()])?;
        let ps = tens(&prev)?;
        let r = random_chain_map(rng, &j, &ps, 0)?;
        let carried = if i == 2 {
            GradedMap::zero(prev.clone(), ps.clone(), 0)
        } else {
            let lt = tensor_map_into(&lambda[i - 2], s, &tens(&levels[i - 2])?, &ps)?;
            lt.compose(&alpha[i - 2])?
        };
        let a = carried.compose(&sum.projections[0])?.add(&r.compose(&sum.projections[1])?)?;
        lambda.push(sum.inclusions[0].clone());
        alpha.push(a);
        levels.push(sum.complex.clone());
    }
    conjugate_d0(rng, &D0Complex::new(s.clone(), levels, lambda, alpha, top)?)
}
