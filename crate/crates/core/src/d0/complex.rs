use std::sync::Arc;

use serde::Serialize;

use crate::chain::{
    cone, direct_sum, direct_sum_map, shift, shift_map, find_contraction, is_acyclic, tensor_map_into, tensor_with_bimodule, Bimodule, ChainComplex, GradedMap,
};
use crate::diagram::{DComplex, DiagramOfBimodules};
use crate::error::{Error, Result};
use crate::linalg::{int, is_split_injection, kernel_basis, solve_linear, split_surjection_section, Matrix, Ring};

/// Truncated `𝒟₀`-complex: levels `B_0 = 0, B_1, …, B_N`, cofibrations
/// `λ_i : B_i → B_{i+1}` and maps `α_i : B_i → B_{i−1} ⊗ S` with
/// `α_{i+1} λ_i = (λ_{i−1} ⊗ 1) α_i`. From the stabilization index on, every
/// `λ_i` is an identity and the levels beyond `N` repeat `B_N`.
#[derive(Clone, Debug)]
pub struct D0Complex {
    bimodule: Bimodule,
    levels: Vec<Arc<ChainComplex>>,
    tensored: Vec<Arc<ChainComplex>>,
    lambda: Vec<GradedMap>,
    alpha: Vec<GradedMap>,
    stabilization: usize,
}

impl D0Complex {
    /// `lambda[i]` is `λ_i` for `0 ≤ i < N`; `alpha[i − 1]` is `α_i` for
    /// `1 ≤ i ≤ N`.
    pub fn new(
        bimodule: Bimodule,
        levels: Vec<Arc<ChainComplex>>,
        lambda: Vec<GradedMap>,
        alpha: Vec<GradedMap>,
        stabilization: usize,
    ) -> Result<Self> {
        bimodule.validate()?;
        let n = levels.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| Error::D0("at least two levels required".into()))?;
        if !levels[0].is_zero() {
            return Err(Error::D0("level 0 must be the zero complex".into()));
        }
        if lambda.len() != n || alpha.len() != n {
            return Err(Error::D0(format!("{n} λ-maps and {n} α-maps required")));
        }
        if stabilization > n {
            return Err(Error::D0(format!("stabilization index {stabilization} exceeds the top level {n}")));
        }
        let ring = bimodule.ring.clone();
        for (i, l) in levels.iter().enumerate() {
            if l.ring() != &ring {
                return Err(Error::D0(format!("level {i} is over {} instead of {ring}", l.ring())));
            }
        }
        let tensored: Vec<Arc<ChainComplex>> =
            levels.iter().map(|l| tensor_with_bimodule(l, &bimodule).map(Arc::new)).collect::<Result<_>>()?;
        let mut lam = Vec::with_capacity(n);
        for (i, f) in lambda.iter().enumerate() {
            let f = f.retarget(&levels[i], &levels[i + 1]).map_err(|_| Error::D0(format!("λ_{i} has the wrong endpoints")))?;
            check_degree_zero_chain(&f, &format!("λ_{i}"))?;
            for deg in levels[i].degrees() {
                if is_split_injection(&f.block(deg)).is_none() {
                    return Err(Error::D0(format!("λ_{i} is not a cofibration in degree {deg}")));
                }
            }
            if i >= stabilization && (levels[i] != levels[i + 1] || f != GradedMap::identity(levels[i].clone())) {
                return Err(Error::D0(format!("λ_{i} must be the identity beyond the stabilization index")));
            }
            lam.push(f);
        }
        let mut alp = Vec::with_capacity(n);
        for (k, f) in alpha.iter().enumerate() {
            let i = k + 1;
            let f = f
                .retarget(&levels[i], &tensored[i - 1])
                .map_err(|_| Error::D0(format!("α_{i} has the wrong endpoints")))?;
            check_degree_zero_chain(&f, &format!("α_{i}"))?;
            alp.push(f);
        }
        let x = D0Complex { bimodule, levels, tensored, lambda: lam, alpha: alp, stabilization };
        for i in 1..n {
            let lhs = x.alpha(i + 1).compose(x.lambda(i))?;
            let rhs = x.lambda_tensored(i - 1)?.compose(x.alpha(i))?;
            if lhs != rhs {
                return Err(Error::D0(format!("α_{} λ_{i} ≠ (λ_{} ⊗ 1) α_{i}", i + 1, i - 1)));
            }
        }
        Ok(x)
    }

    pub fn ring(&self) -> &Ring {
        &self.bimodule.ring
    }

    pub fn bimodule(&self) -> &Bimodule {
        &self.bimodule
    }

    /// Top level `N`.
    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn stabilization(&self) -> usize {
        self.stabilization
    }

    /// `B_i`; levels above `N` repeat `B_N`.
    pub fn level(&self, i: usize) -> &Arc<ChainComplex> {
        &self.levels[i.min(self.top())]
    }

    pub fn levels(&self) -> &[Arc<ChainComplex>] {
        &self.levels
    }

    /// `B_i ⊗ S`.
    pub fn tensored(&self, i: usize) -> &Arc<ChainComplex> {
        &self.tensored[i.min(self.top())]
    }

    pub fn lambda(&self, i: usize) -> &GradedMap {
        &self.lambda[i]
    }

    pub fn alpha(&self, i: usize) -> &GradedMap {
        &self.alpha[i - 1]
    }

    /// `λ_i ⊗ 1_S : B_i ⊗ S → B_{i+1} ⊗ S`.
    pub fn lambda_tensored(&self, i: usize) -> Result<GradedMap> {
        tensor_map_into(&self.lambda[i], &self.bimodule, &self.tensored[i], &self.tensored[i + 1])
    }

    /// The same data as a complex over the truncated diagram.
    pub fn to_dcomplex(&self) -> Result<DComplex> {
        let d = DiagramOfBimodules::d0_truncated(self.ring(), self.top(), self.bimodule.clone())?;
        let mut maps: Vec<GradedMap> = self.lambda.clone();
        maps.extend(self.alpha.iter().cloned());
        DComplex::new(d, self.levels.clone(), maps)
    }

    /// Degreewise right inverses of every `α_i`, or the first `(i, degree)`
    /// where `α_i` is not surjective.
    pub fn reduced_certificate(&self) -> std::result::Result<Vec<Vec<(i64, Matrix)>>, (usize, i64)> {
        let mut out = Vec::new();
        for i in 1..=self.top() {
            let a = self.alpha(i);
            let mut per = Vec::new();
            let tgt = a.tgt();
            for deg in tgt.degrees() {
                match split_surjection_section(&a.block(deg)) {
                    Some(s) => per.push((deg, s)),
                    None => return Err((i, deg)),
                }
            }
            out.push(per);
        }
        Ok(out)
    }

    pub fn is_reduced(&self) -> bool {
        self.reduced_certificate().is_ok()
    }

    pub(crate) fn require_reduced(&self) -> Result<()> {
        match self.reduced_certificate() {
            Ok(_) => Ok(()),
            Err((i, deg)) => Err(Error::NotReduced(format!("α_{i} is not surjective in degree {deg}"))),
        }
    }

    /// Is `λ_i` a homology equivalence? Decided by acyclicity of its cone.
    pub fn lambda_is_equivalence(&self, i: usize) -> Result<bool> {
        if i >= self.top() {
            return Ok(true);
        }
        is_acyclic(&cone(&self.lambda[i])?.complex)
    }
}

fn check_degree_zero_chain(f: &GradedMap, name: &str) -> Result<()> {
    if f.degree() != 0 {
        return Err(Error::D0(format!("{name} must have degree 0")));
    }
    f.ensure_chain_map().map_err(|e| Error::D0(format!("{name}: {e}")))
}

/// Membership of a `𝒟₀`-complex in the classes `𝔅_n` and `𝔄_n` together
/// with the witnesses behind each flag.
#[derive(Clone, Debug, Serialize)]
pub struct ClassMembership {
    pub n: usize,
    pub in_bn: bool,
    pub in_an: bool,
    pub reduced: bool,
    /// First `i ≥ n` whose `λ_i` is not a homology equivalence.
    pub bn_failure: Option<usize>,
    /// First non-surjective `α_i` and the degree where it fails.
    pub reduced_failure: Option<(usize, i64)>,
    #[serde(skip)]
    pub an_contraction: Option<GradedMap>,
}

pub fn classify(x: &D0Complex, n: usize) -> Result<ClassMembership> {
    let mut bn_failure = None;
    for i in n..x.top() {
        if !x.lambda_is_equivalence(i)? {
            bn_failure = Some(i);
            break;
        }
    }
    let in_bn = bn_failure.is_none();
    let an_contraction = if in_bn { find_contraction(x.level(n))? } else { None };
    let reduced_failure = x.reduced_certificate().err();
    Ok(ClassMembership {
        n,
        in_bn,
        in_an: an_contraction.is_some(),
        reduced: reduced_failure.is_none(),
        bn_failure,
        reduced_failure,
        an_contraction,
    })
}

/// The unit complex `D`: the base ring in degree 0.
pub fn unit_complex(ring: &Ring) -> Arc<ChainComplex> {
    Arc::new(ChainComplex::concentrated(ring, 0, 1))
}

fn zero_levels_then(ring: &Ring, m: usize, rest: Vec<Arc<ChainComplex>>) -> Vec<Arc<ChainComplex>> {
    let z = Arc::new(ChainComplex::zero(ring));
    (0..m).map(|_| z.clone()).chain(rest).collect()
}

fn zero_alphas(levels: &[Arc<ChainComplex>], s: &Bimodule) -> Result<Vec<GradedMap>> {
    (1..levels.len())
        .map(|i| Ok(GradedMap::zero(levels[i].clone(), Arc::new(tensor_with_bimodule(&levels[i - 1], s)?), 0)))
        .collect()
}

/// `g_m(D) = (0, …, 0, D, D, …)` with `m` zeros, identity `λ` and `α = 0`.
pub fn g_m(s: &Bimodule, m: usize, top: usize) -> Result<D0Complex> {
    if m < 1 || m > top {
        return Err(Error::Precondition(format!("g_m needs 1 ≤ m ≤ N, got m = {m}, N = {top}")));
    }
    let ring = s.ring.clone();
    let d = unit_complex(&ring);
    let levels = zero_levels_then(&ring, m, vec![d.clone(); top + 1 - m]);
    let lambda = (0..top)
        .map(|i| if i + 1 == m { GradedMap::zero(levels[i].clone(), d.clone(), 0) } else if i >= m { GradedMap::identity(d.clone()) } else { GradedMap::zero(levels[i].clone(), levels[i + 1].clone(), 0) })
        .collect();
    let alpha = zero_alphas(&levels, s)?;
    D0Complex::new(s.clone(), levels, lambda, alpha, m)
}

/// `g_m^{m+1}(D) = (0, …, 0, D, CD, CD, …)` where `CD` is the cone of
/// `1_D`: generators `e` in degree 1 and `b` in degree 0 with `∂e = −b`.
pub fn g_m_cone(s: &Bimodule, m: usize, top: usize) -> Result<D0Complex> {
    if m < 1 || m + 1 > top {
        return Err(Error::Precondition(format!("g_m_cone needs 1 ≤ m < N, got m = {m}, N = {top}")));
    }
    let ring = s.ring.clone();
    let d = unit_complex(&ring);
    let c = cone(&GradedMap::identity(d.clone()))?;
    let cd = c.complex.clone();
    let mut rest = vec![d.clone()];
    rest.extend(std::iter::repeat_n(cd.clone(), top - m));
    let levels = zero_levels_then(&ring, m, rest);
    let lambda = (0..top)
        .map(|i| {
            if i == m {
                c.inclusion.clone()
            } else if i > m {
                GradedMap::identity(cd.clone())
            } else {
                GradedMap::zero(levels[i].clone(), levels[i + 1].clone(), 0)
            }
        })
        .collect();
    let alpha = zero_alphas(&levels, s)?;
    D0Complex::new(s.clone(), levels, lambda, alpha, m + 1)
}

/// `Ker(α_i)` with its inclusion into `B_i`.
#[derive(Clone, Debug)]
pub struct KernelComplex {
    pub complex: Arc<ChainComplex>,
    pub inclusion: GradedMap,
}

impl KernelComplex {
    /// Coordinates of a map into `B_i` that factors through the kernel.
    pub fn coordinates(&self, degree: i64, v: &Matrix) -> Result<Matrix> {
        solve_linear(&self.inclusion.block(degree), v)?
            .ok_or_else(|| Error::Invariant(format!("vector does not lie in the kernel (degree {degree})")))
    }
}

/// Kernel of a degree-0 chain map, as a complex with induced differential.
pub fn kernel_complex(f: &GradedMap) -> Result<KernelComplex> {
    let b = f.src();
    let ring = b.ring().clone();
    if b.is_zero() {
        let z = Arc::new(ChainComplex::zero(&ring));
        return Ok(KernelComplex { complex: z.clone(), inclusion: GradedMap::zero(z, b.clone(), 0) });
    }
    let bases: Vec<Matrix> = b.degrees().map(|n| kernel_basis(&f.block(n))).collect::<Result<_>>()?;
    let lo = b.lo();
    let basis = |n: i64| bases[(n - lo) as usize].clone();
    let ranks: Vec<usize> = bases.iter().map(Matrix::cols).collect();
    let mut diffs = Vec::new();
    for n in lo + 1..=b.hi() {
        let img = &b.d(n) * &basis(n);
        let coords = solve_linear(&basis(n - 1), &img)?
            .ok_or_else(|| Error::Invariant("differential leaves the kernel".into()))?;
        diffs.push(coords);
    }
    let complex = Arc::new(ChainComplex::new(&ring, lo, ranks, diffs)?);
    let inclusion = GradedMap::from_fn(complex.clone(), b.clone(), 0, basis)?;
    Ok(KernelComplex { complex, inclusion })
}

impl D0Complex {
    pub fn alpha_kernel(&self, i: usize) -> Result<KernelComplex> {
        kernel_complex(self.alpha(i))
    }

    /// `λ_m` restricted to `Ker(α_m) → Ker(α_{m+1})`.
    pub fn induced_lambda(&self, m: usize, km: &KernelComplex, kn: &KernelComplex) -> Result<GradedMap> {
        let lam = self.lambda(m);
        GradedMap::from_fn(km.complex.clone(), kn.complex.clone(), 0, |d| {
            let img = &lam.block(d) * &km.inclusion.block(d);
            kn.coordinates(d, &img).expect("λ maps kernels to kernels")
        })
    }
}

impl D0Complex {
    /// Levelwise `s^p`, with the structure maps carried along.
    pub fn shifted(&self, p: i64) -> Result<D0Complex> {
        if p == 0 {
            return Ok(self.clone());
        }
        let levels: Vec<Arc<ChainComplex>> = self.levels.iter().map(|l| Arc::new(shift(l, p))).collect();
        let lambda = self.lambda.iter().map(|f| shift_map(f, p)).collect();
        let alpha = self.alpha.iter().map(|f| shift_map(f, p)).collect();
        D0Complex::new(self.bimodule.clone(), levels, lambda, alpha, self.stabilization)
    }

    /// Levelwise direct sum of two complexes over the same diagram.
    pub fn direct_sum(&self, other: &D0Complex) -> Result<D0Complex> {
        if self.top() != other.top() || self.bimodule != other.bimodule {
            return Err(Error::D0("direct sum needs complexes over the same truncated diagram".into()));
        }
        let sums: Vec<_> =
            (0..=self.top()).map(|i| direct_sum(&[self.level(i).clone(), other.level(i).clone()])).collect::<Result<_>>()?;
        let tsums: Vec<_> = (0..=self.top())
            .map(|i| direct_sum(&[self.tensored(i).clone(), other.tensored(i).clone()]))
            .collect::<Result<_>>()?;
        let levels = sums.iter().map(|s| s.complex.clone()).collect();
        let lambda = (0..self.top())
            .map(|i| direct_sum_map(&[self.lambda(i), other.lambda(i)], &sums[i], &sums[i + 1]))
            .collect::<Result<Vec<_>>>()?;
        let r = self.bimodule.rank;
        let ring = self.ring().clone();
        let mut alpha = Vec::with_capacity(self.top());
        for i in 1..=self.top() {
            let naive = direct_sum_map(&[self.alpha(i), other.alpha(i)], &sums[i], &tsums[i - 1])?;
            let target = Arc::new(tensor_with_bimodule(&sums[i - 1].complex, &self.bimodule)?);
            let (a, b) = (self.level(i - 1), other.level(i - 1));
            // A⊗S ⊕ B⊗S → (A⊕B)⊗S reorders generators copy by copy.
            alpha.push(GradedMap::from_fn(sums[i].complex.clone(), target, 0, |n| {
                let (ka, kb) = (a.rank(n), b.rank(n));
                let mut perm = Matrix::zeros(&ring, r * (ka + kb), r * (ka + kb));
                for g in 0..r {
                    for x in 0..ka {
                        perm.set(g * (ka + kb) + x, g * ka + x, int(1));
                    }
                    for y in 0..kb {
                        perm.set(g * (ka + kb) + ka + y, r * ka + g * kb + y, int(1));
                    }
                }
                &perm * &naive.block(n)
            })?);
        }
        D0Complex::new(self.bimodule.clone(), levels, lambda, alpha, self.stabilization.max(other.stabilization))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> Bimodule {
        Bimodule::free(&Ring::Integers, 1)
    }

    #[test]
    fn g1_levels() {
        let g = g_m(&s(), 1, 3).unwrap();
        assert!(g.level(0).is_zero());
        for i in 1..=3 {
            assert_eq!(g.level(i).ranks(), &[1]);
        }
        assert_eq!(g.lambda(1), &GradedMap::identity(g.level(1).clone()));
        let c = classify(&g, 1).unwrap();
        assert!(c.in_bn && !c.in_an);
        assert!(!c.reduced);
    }

    #[test]
    fn g_m_cone_is_in_a() {
        let g = g_m_cone(&s(), 1, 3).unwrap();
        let c = classify(&g, 2).unwrap();
        assert!(c.in_bn && c.in_an);
        assert!(g_m_cone(&s(), 3, 3).is_err());
        assert!(g_m(&s(), 0, 3).is_err());
    }

    #[test]
    fn zero_object_is_everywhere() {
        let r = Ring::Integers;
        let z = Arc::new(ChainComplex::zero(&r));
        let levels = vec![z.clone(); 3];
        let lambda = vec![GradedMap::identity(z.clone()); 2];
        let alpha = vec![GradedMap::zero(z.clone(), z.clone(), 0); 2];
        let x = D0Complex::new(s(), levels, lambda, alpha, 0).unwrap();
        for n in 0..3 {
            let c = classify(&x, n).unwrap();
            assert!(c.in_bn && c.in_an && c.reduced);
        }
    }

    #[test]
    fn stabilization_requires_identities() {
        let g = g_m(&s(), 2, 3).unwrap();
        let err = D0Complex::new(
            s(),
            g.levels().to_vec(),
            (0..3).map(|i| g.lambda(i).clone()).collect(),
            (1..=3).map(|i| g.alpha(i).clone()).collect(),
            1,
        );
        assert!(err.is_err());
    }

    #[test]
    fn round_trip_through_the_diagram() {
        let g = g_m_cone(&s(), 1, 3).unwrap();
        let x = g.to_dcomplex().unwrap();
        assert_eq!(x.complexes.len(), 4);
    }

    #[test]
    fn kernel_of_projection() {
        let r = Ring::Integers;
        let b = Arc::new(ChainComplex::two_term(0, Matrix::from_i64(&r, &[&[1], &[0]])));
        let t = Arc::new(ChainComplex::concentrated(&r, 0, 1));
        let f = GradedMap::new(b.clone(), t, 0, vec![Matrix::from_i64(&r, &[&[0, 1]]), Matrix::zeros(&r, 0, 1)]).unwrap();
        assert!(f.is_chain_map());
        let k = kernel_complex(&f).unwrap();
        assert_eq!(k.complex.ranks(), &[1, 1]);
        assert!(k.inclusion.is_chain_map());
    }
}
