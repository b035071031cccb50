//! Locality with respect to `𝔅ₙ` and `𝔄ₙ`, and the factorization of maps
//! from `𝔅ₙ` through contractible objects.

use std::sync::Arc;

use serde::Serialize;

use super::complex::{classify, D0Complex};
use super::hom::{hom_complex_g_m, D0Map};
use crate::chain::{
    cone, find_contraction, homology, is_acyclic, pushout_along_cofibration, tensor_map_into, tensor_with_bimodule,
    ChainComplex, GradedMap, HomologyGroup,
};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::par::{self, Execution};

/// Verdict of the `𝔅ₙ`-locality test with its witnesses.
#[derive(Clone, Debug, Serialize)]
pub struct BnVerdict {
    pub n: usize,
    pub local: bool,
    /// `(m, ℋom(g_m, C) acyclic)` for `m = 1..=n`.
    pub hom_acyclic: Vec<(usize, bool)>,
    /// First level `i ≤ n` whose identity admits no null-homotopy.
    pub failing_level: Option<usize>,
    /// Contracting homotopies of `C_0, …, C_n` when local.
    #[serde(skip)]
    pub contractions: Vec<GradedMap>,
}

pub fn check_bn_local(c: &D0Complex, n: usize, exec: Execution) -> Result<BnVerdict> {
    c.require_reduced()?;
    if n > c.top() {
        return Err(Error::Precondition(format!("n = {n} exceeds the top level {}", c.top())));
    }
    let ms: Vec<usize> = (1..=n).collect();
    let hom_acyclic = par::try_map(exec, &ms, |&m| {
        let g = hom_complex_g_m(c, m)?;
        Ok::<_, Error>((m, is_acyclic(&g.hom.complex)?))
    })?;
    let local = hom_acyclic.iter().all(|&(_, ok)| ok);
    let levels: Vec<usize> = (0..=n).collect();
    let contractions = par::try_map(exec, &levels, |&i| find_contraction(c.level(i)))?;
    let failing_level = contractions.iter().position(Option::is_none);
    if local != failing_level.is_none() {
        return Err(Error::Invariant(format!(
            "hom test says {local} but level {failing_level:?} disagrees on contractibility"
        )));
    }
    let contractions = if local { contractions.into_iter().flatten().collect() } else { Vec::new() };
    Ok(BnVerdict { n, local, hom_acyclic, failing_level, contractions })
}

/// Range of test indices for the `𝔄ₙ` criterion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Bound {
    /// `1 ≤ m < n`.
    Strict,
    /// `1 ≤ m ≤ n`.
    #[default]
    Inclusive,
}

impl std::str::FromStr for Bound {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Bound::Strict),
            "inclusive" => Ok(Bound::Inclusive),
            _ => Err(Error::Parse(format!("bound must be strict or inclusive, got {s:?}"))),
        }
    }
}

impl Bound {
    pub fn range(self, n: usize) -> std::ops::RangeInclusive<usize> {
        match self {
            Bound::Strict => 1..=n.saturating_sub(1),
            Bound::Inclusive => 1..=n,
        }
    }
}

/// One test index of the `𝔄ₙ` criterion, decided two ways.
#[derive(Clone, Debug, Serialize)]
pub struct AnCheck {
    pub m: usize,
    /// `cone(λ̄ : Ker α_m → Ker α_{m+1})` is acyclic.
    pub kernel_equivalence: bool,
    /// The square `(λ_m, α_m, α_{m+1}, λ_{m−1} ⊗ 1)` has acyclic total complex.
    pub exact_square: bool,
    /// Nonzero homology of the kernel cone.
    pub cone_homology: Vec<(i64, HomologyGroup)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnVerdict {
    pub n: usize,
    pub bound: Bound,
    pub local: bool,
    pub checks: Vec<AnCheck>,
    pub failing_m: Option<usize>,
}

/// Total complex of the commuting square
/// `B_m → B_{m+1}` over `B_{m−1} ⊗ S → B_m ⊗ S`, as the cone of the induced
/// map `cone(λ_m) → cone(λ_{m−1} ⊗ 1)`.
pub fn square_total_complex(c: &D0Complex, m: usize) -> Result<Arc<ChainComplex>> {
    let top = cone(c.lambda(m))?;
    let lt = c.lambda_tensored(m - 1)?;
    let bottom = cone(&lt)?;
    let (am, an) = (c.alpha(m), c.alpha(m + 1));
    let vertical = GradedMap::from_fn(top.complex.clone(), bottom.complex.clone(), 0, |n| {
        Matrix::block_diag(c.ring(), &[&am.block(n - 1), &an.block(n)])
    })?;
    vertical.ensure_chain_map()?;
    Ok(cone(&vertical)?.complex)
}

pub fn check_an_local(c: &D0Complex, n: usize, bound: Bound, exec: Execution) -> Result<AnVerdict> {
    c.require_reduced()?;
    let ms: Vec<usize> = bound.range(n).collect();
    if let Some(&last) = ms.last() {
        if last + 1 > c.top() {
            return Err(Error::Precondition(format!("test index m = {last} needs level {} but N = {}", last + 1, c.top())));
        }
    }
    let checks = par::try_map(exec, &ms, |&m| {
        let km = c.alpha_kernel(m)?;
        let kn = c.alpha_kernel(m + 1)?;
        let lam = c.induced_lambda(m, &km, &kn)?;
        let kc = cone(&lam)?;
        let cone_homology: Vec<_> = homology(&kc.complex)?.into_iter().filter(|(_, h)| !h.is_zero()).collect();
        let exact_square = is_acyclic(&*square_total_complex(c, m)?)?;
        Ok::<_, Error>(AnCheck { m, kernel_equivalence: cone_homology.is_empty(), exact_square, cone_homology })
    })?;
    let failing_m = checks.iter().find(|k| !k.kernel_equivalence || !k.exact_square).map(|k| k.m);
    Ok(AnVerdict { n, bound, local: failing_m.is_none(), checks, failing_m })
}

/// `f = h ∘ g` with `g : D → E`, `h : E → C` and every level of `E`
/// contractible.
#[derive(Clone, Debug)]
pub struct Factorization {
    pub e: D0Complex,
    pub to_e: D0Map,
    pub from_e: D0Map,
    pub contractions: Vec<GradedMap>,
}

/// Factors a chain map `f : D → C` of `𝒟₀`-complexes through a contractible
/// object, for `D ∈ 𝔅ₙ` and `C_0, …, C_n` contractible. `E_i = C_i` for
/// `i ≤ n` and `E_{i+1} = E_i ⊔_{D_i} D_{i+1}` beyond.
pub fn factor_through_acyclic(d: &D0Complex, c: &D0Complex, f: &D0Map, n: usize) -> Result<Factorization> {
    if d.top() != c.top() || d.bimodule() != c.bimodule() || f.levels.len() != d.top() + 1 {
        return Err(Error::Precondition("map endpoints are not over one truncated diagram".into()));
    }
    if n > d.top() {
        return Err(Error::Precondition(format!("n = {n} exceeds the top level {}", d.top())));
    }
    if !f.is_chain_map() {
        return Err(Error::Precondition("f is not a chain map".into()));
    }
    if !classify(d, n)?.in_bn {
        return Err(Error::Precondition(format!("source is not in 𝔅_{n}")));
    }
    for i in 0..=n {
        if find_contraction(c.level(i))?.is_none() {
            return Err(Error::Precondition(format!("target level {i} is not contractible")));
        }
    }
    let p = f.degree;
    let ds = d.shifted(p)?;
    // The same blocks, read as a degree-0 map out of the shifted source.
    let f0: Vec<GradedMap> = (0..=d.top())
        .map(|i| GradedMap::from_fn(ds.level(i).clone(), c.level(i).clone(), 0, |k| f.levels[i].block(k - p)))
        .collect::<Result<_>>()?;
    let f0 = D0Map::new(&ds, c, f0)?;
    let s = c.bimodule();

    let mut levels: Vec<Arc<ChainComplex>> = (0..=n).map(|i| c.level(i).clone()).collect();
    let mut lambda: Vec<GradedMap> = (0..n).map(|i| c.lambda(i).clone()).collect();
    let mut alpha: Vec<GradedMap> = (1..=n).map(|i| c.alpha(i).clone()).collect();
    let mut g: Vec<GradedMap> = (0..=n).map(|i| f0.levels[i].clone()).collect();
    let mut h: Vec<GradedMap> = (0..=n).map(|i| GradedMap::identity(c.level(i).clone())).collect();
    let tensored = |x: &Arc<ChainComplex>| tensor_with_bimodule(x, s).map(Arc::new);

    for i in n..d.top() {
        let po = pushout_along_cofibration(ds.lambda(i), &g[i])?;
        let e_next = po.complex.clone();
        let e_i_s = tensored(&levels[i])?;
        let p_leg = tensor_map_into(&g[i], s, ds.tensored(i), &e_i_s)?.compose(ds.alpha(i + 1))?;
        let q_leg = if i == 0 {
            GradedMap::zero(levels[0].clone(), e_i_s.clone(), 0)
        } else {
            let prev_s = tensored(&levels[i - 1])?;
            let lam_s = tensor_map_into(&lambda[i - 1], s, &prev_s, &e_i_s)?;
            lam_s.compose(&alpha[i - 1].retarget(&levels[i], &prev_s)?)?
        };
        let a_next = po.universal(&p_leg, &q_leg)?;
        let h_next = po.universal(&f0.levels[i + 1], &c.lambda(i).compose(&h[i])?)?;
        lambda.push(po.from_z.clone());
        alpha.push(a_next);
        g.push(po.from_y.clone());
        h.push(h_next);
        levels.push(e_next);
    }
    let stabilization = d.stabilization().max(n).min(d.top());
    // Past the stabilization index the pushouts are along identities; replace
    // their outputs by the identical previous level so λ is literally the identity.
    for i in stabilization..d.top() {
        if *levels[i + 1] != *levels[i] || !lambda[i].blocks().iter().all(Matrix::is_identity) {
            return Err(Error::Invariant(format!("pushout along λ_{i} = id did not reproduce the level")));
        }
        levels[i + 1] = levels[i].clone();
    }
    let e = D0Complex::new(s.clone(), levels, lambda, alpha, stabilization)?;
    let g: Vec<GradedMap> = g.iter().enumerate().map(|(i, m)| m.retarget(ds.level(i), e.level(i))).collect::<Result<_>>()?;
    let h: Vec<GradedMap> = h.iter().enumerate().map(|(i, m)| m.retarget(e.level(i), c.level(i))).collect::<Result<_>>()?;
    let to_e: Vec<GradedMap> = (0..=d.top())
        .map(|i| GradedMap::from_fn(d.level(i).clone(), e.level(i).clone(), p, |k| g[i].block(k + p)))
        .collect::<Result<_>>()?;
    let to_e = D0Map::new(d, &e, to_e)?;
    let from_e = D0Map::new(&e, c, h)?;
    if from_e.compose(&to_e)? != *f {
        return Err(Error::Invariant("factorization does not recompose to f".into()));
    }
    let contractions = e
        .levels()
        .iter()
        .enumerate()
        .map(|(i, l)| find_contraction(l)?.ok_or_else(|| Error::Invariant(format!("level {i} of E is not contractible"))))
        .collect::<Result<Vec<_>>>()?;
    Ok(Factorization { e, to_e, from_e, contractions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::d0::HomComplex;
    use crate::fuzz::{random_bn_member, random_matrix, random_reduced_d0, rng, D0Spec};
    use crate::linalg::Ring;

    #[test]
    fn acyclic_kernels_are_bn_local() {
        for seed in 0..6 {
            let spec = D0Spec { acyclic_through: 2, ..D0Spec::small(3) };
            let c = random_reduced_d0(&mut rng(seed), &Ring::Integers, &spec).unwrap();
            let v = check_bn_local(&c, 2, Execution::Sequential).unwrap();
            assert!(v.local);
            assert_eq!(v.contractions.len(), 3);
        }
    }

    #[test]
    fn free_kernel_is_not_local() {
        let spec = D0Spec { pieces: 3, ..D0Spec::small(2) };
        let mut found = false;
        for seed in 0..10 {
            let c = random_reduced_d0(&mut rng(seed), &Ring::Integers, &spec).unwrap();
            let v = check_bn_local(&c, 1, Execution::Parallel).unwrap();
            if !v.local {
                assert_eq!(v.failing_level, Some(1));
                found = true;
            }
        }
        assert!(found);
    }

    #[test]
    fn an_routes_agree() {
        for seed in 0..8 {
            let spec = D0Spec { stable_from: (seed % 3) as usize, s_rank: 1 + (seed % 2) as usize, ..D0Spec::small(3) };
            let c = random_reduced_d0(&mut rng(seed), &Ring::Integers, &spec).unwrap();
            for bound in [Bound::Strict, Bound::Inclusive] {
                let v = check_an_local(&c, 2, bound, Execution::Sequential).unwrap();
                for k in &v.checks {
                    assert_eq!(k.kernel_equivalence, k.exact_square, "seed {seed} m {}", k.m);
                }
            }
        }
    }

    #[test]
    fn stable_kernels_are_an_local() {
        let spec = D0Spec { stable_from: 1, ..D0Spec::small(3) };
        let c = random_reduced_d0(&mut rng(4), &Ring::Integers, &spec).unwrap();
        assert!(check_an_local(&c, 2, Bound::Inclusive, Execution::Parallel).unwrap().local);
        assert!(check_an_local(&c, 3, Bound::Inclusive, Execution::Parallel).is_err());
    }

    #[test]
    fn factorization_recomposes() {
        let ring = Ring::Integers;
        for seed in 0..4u64 {
            let mut r = rng(100 + seed);
            let n = 1 + (seed % 2) as usize;
            let spec = D0Spec { acyclic_through: n, ..D0Spec::small(3) };
            let c = random_reduced_d0(&mut r, &ring, &spec).unwrap();
            let d = random_bn_member(&mut r, &ring, c.bimodule(), 3, n, 2).unwrap();
            let hom = HomComplex::compute(&d, &c).unwrap();
            let p = (seed as i64 % 3) - 1;
            let z = hom.cycle_basis(p).unwrap();
            let coeffs = random_matrix(&mut r, &ring, z.cols(), 1, 2);
            let f = hom.element(p, &(&z * &coeffs)).unwrap();
            let fac = factor_through_acyclic(&d, &c, &f, n).unwrap();
            assert_eq!(fac.from_e.compose(&fac.to_e).unwrap(), f);
            assert_eq!(fac.contractions.len(), 4);
        }
    }
}
