//! Hom complexes between `𝒟₀`-complexes, and the two test-object
//! identifications: `ℋom(g_m, C) ≅ Ker(α_m)` and the short exact sequence
//! `s⁻¹Ker(α_{m+1}) ↣ ℋom(g_m^{m+1}, C) ↠ Ker(α_m)`.

use std::sync::Arc;

use super::complex::{g_m, g_m_cone, D0Complex, KernelComplex};
use crate::chain::{desuspension, sign, ChainComplex, GradedMap};
use crate::error::{Error, Result};
use crate::linalg::{solve_linear, LinearSystem, Matrix, Ring};

/// Degree-`p` graded maps `f_i : D_i → C_i` commuting with every `λ` and `α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct D0Map {
    pub degree: i64,
    pub levels: Vec<GradedMap>,
}

impl D0Map {
    /// Checks that `levels` is compatible with the structure maps.
    pub fn new(src: &D0Complex, tgt: &D0Complex, levels: Vec<GradedMap>) -> Result<Self> {
        if src.top() != tgt.top() || levels.len() != src.top() + 1 {
            return Err(Error::D0("map needs one graded map per level of equal-height complexes".into()));
        }
        let degree = levels[0].degree();
        let mut fixed = Vec::new();
        for (i, f) in levels.into_iter().enumerate() {
            if f.degree() != degree {
                return Err(Error::D0("levels of a map must share one degree".into()));
            }
            fixed.push(f.retarget(src.level(i), tgt.level(i)).map_err(|_| Error::D0(format!("level {i} has wrong endpoints")))?);
        }
        let map = D0Map { degree, levels: fixed };
        map.check_compatible(src, tgt)?;
        Ok(map)
    }

    fn check_compatible(&self, src: &D0Complex, tgt: &D0Complex) -> Result<()> {
        let n = src.top();
        for i in 0..n {
            let a = self.levels[i + 1].compose(src.lambda(i))?;
            let b = tgt.lambda(i).compose(&self.levels[i])?;
            if a != b {
                return Err(Error::D0(format!("map does not commute with λ_{i}")));
            }
        }
        for i in 1..=n {
            let a = tgt.alpha(i).compose(&self.levels[i])?;
            let lifted = crate::chain::tensor_map_into(&self.levels[i - 1], src.bimodule(), src.tensored(i - 1), tgt.tensored(i - 1))?;
            let b = lifted.compose(src.alpha(i))?;
            if a != b {
                return Err(Error::D0(format!("map does not commute with α_{i}")));
            }
        }
        Ok(())
    }

    pub fn is_chain_map(&self) -> bool {
        self.levels.iter().all(GradedMap::is_chain_map)
    }

    pub fn compose(&self, first: &D0Map) -> Result<D0Map> {
        let levels = self.levels.iter().zip(&first.levels).map(|(g, f)| g.compose(f)).collect::<Result<Vec<_>>>()?;
        Ok(D0Map { degree: self.degree + first.degree, levels })
    }
}

#[derive(Clone, Debug)]
struct Slot {
    level: usize,
    degree: i64,
    rows: usize,
    cols: usize,
    offset: usize,
}

#[derive(Clone, Debug)]
struct DegreeData {
    slots: Vec<Slot>,
    len: usize,
    basis: Matrix,
}

/// `ℋom(D, C)` as a chain complex: degree `p` is the free module of
/// degree-`p` algebraic morphisms, with the Leibniz differential.
#[derive(Clone, Debug)]
pub struct HomComplex {
    pub complex: Arc<ChainComplex>,
    lo: i64,
    degrees: Vec<DegreeData>,
    src: D0Complex,
    tgt: D0Complex,
}

fn slots_for(src: &D0Complex, tgt: &D0Complex, p: i64) -> (Vec<Slot>, usize) {
    let mut slots = Vec::new();
    let mut offset = 0;
    for i in 0..=src.top() {
        let (d, c) = (src.level(i), tgt.level(i));
        for n in d.degrees() {
            let (rows, cols) = (c.rank(n + p), d.rank(n));
            slots.push(Slot { level: i, degree: n, rows, cols, offset });
            offset += rows * cols;
        }
    }
    (slots, offset)
}

/// `E_g : X_n → (X ⊗ S)_n`, the inclusion of the `g`-th copy.
fn copy_inclusion(ring: &Ring, rank: usize, s_rank: usize, g: usize) -> Matrix {
    let mut e = Matrix::zeros(ring, rank * s_rank, rank);
    e.paste(g * rank, 0, &Matrix::identity(ring, rank));
    e
}

impl HomComplex {
    pub fn compute(src: &D0Complex, tgt: &D0Complex) -> Result<Self> {
        if src.top() != tgt.top() || src.bimodule() != tgt.bimodule() {
            return Err(Error::D0("hom complex needs complexes over the same truncated diagram".into()));
        }
        let ring = src.ring().clone();
        let pairs: Vec<(i64, i64)> = (0..=src.top())
            .filter(|&i| !src.level(i).is_zero() && !tgt.level(i).is_zero())
            .map(|i| (tgt.level(i).lo() - src.level(i).hi(), tgt.level(i).hi() - src.level(i).lo()))
            .collect();
        let Some(lo) = pairs.iter().map(|p| p.0).min() else {
            let z = Arc::new(ChainComplex::zero(&ring));
            return Ok(HomComplex { complex: z, lo: 0, degrees: Vec::new(), src: src.clone(), tgt: tgt.clone() });
        };
        let hi = pairs.iter().map(|p| p.1).max().unwrap();
        let mut degrees = Vec::new();
        for p in lo..=hi {
            degrees.push(Self::constraint_basis(src, tgt, p)?);
        }
        let mut diffs = Vec::new();
        for p in lo + 1..=hi {
            let k = (p - lo) as usize;
            let (here, below) = (&degrees[k], &degrees[k - 1]);
            let mut images = Matrix::zeros(&ring, below.len, 0);
            for col in 0..here.basis.cols() {
                let f = Self::unpack(src, tgt, p, here, &here.basis, col);
                let df: Vec<Matrix> = (0..=src.top()).map(|i| f.levels[i].differential().blocks().to_vec()).map(|b| Self::flatten_blocks(&b)).collect();
                let v = Self::pack(below, &df, &ring);
                images = images.hstack(&v);
            }
            let coords = solve_linear(&below.basis, &images)?
                .ok_or_else(|| Error::Invariant(format!("hom differential leaves the constraint space at degree {p}")))?;
            diffs.push(coords);
        }
        let ranks = degrees.iter().map(|d| d.basis.cols()).collect();
        let complex = Arc::new(ChainComplex::new(&ring, lo, ranks, diffs)?);
        Ok(HomComplex { complex, lo, degrees, src: src.clone(), tgt: tgt.clone() })
    }

    fn flatten_blocks(blocks: &[Matrix]) -> Matrix {
        let ring = blocks.first().map(|b| b.ring().clone()).unwrap_or(Ring::Integers);
        let mut data = Vec::new();
        for b in blocks {
            data.extend(b.entries().iter().cloned());
        }
        Matrix::new(ring, data.len(), 1, data).expect("entries come from ring elements")
    }

    /// Packs per-level flattened blocks (ordered by source degree) into the
    /// layout of `dd`.
    fn pack(dd: &DegreeData, per_level: &[Matrix], ring: &Ring) -> Matrix {
        let mut v = Matrix::zeros(ring, dd.len, 1);
        let mut cursor = vec![0usize; per_level.len()];
        for s in &dd.slots {
            let lvl = &per_level[s.level];
            for k in 0..s.rows * s.cols {
                v.set(s.offset + k, 0, lvl.get(cursor[s.level] + k, 0).clone());
            }
            cursor[s.level] += s.rows * s.cols;
        }
        v
    }

    fn constraint_basis(src: &D0Complex, tgt: &D0Complex, p: i64) -> Result<DegreeData> {
        let ring = src.ring().clone();
        let (slots, len) = slots_for(src, tgt, p);
        let mut sys = LinearSystem::new(&ring);
        let ids: Vec<usize> = slots.iter().map(|s| sys.add_unknown(s.rows, s.cols)).collect();
        let find = |lvl: usize, n: i64| slots.iter().position(|s| s.level == lvl && s.degree == n).map(|k| ids[k]);
        let s_rank = src.bimodule().rank;
        for i in 0..src.top() {
            for n in src.level(i).degrees() {
                let rows = tgt.level(i + 1).rank(n + p);
                let cols = src.level(i).rank(n);
                let eq = sys.add_zero_equation(rows, cols);
                if let Some(u) = find(i, n) {
                    sys.add_term(eq, u, tgt.lambda(i).block(n + p), Matrix::identity(&ring, cols))?;
                }
                if let Some(u) = find(i + 1, n) {
                    sys.add_term(eq, u, Matrix::identity(&ring, rows).scale_i64(-1), src.lambda(i).block(n))?;
                }
            }
        }
        for i in 1..=src.top() {
            for n in src.level(i).degrees() {
                let rows = tgt.tensored(i - 1).rank(n + p);
                let cols = src.level(i).rank(n);
                let eq = sys.add_zero_equation(rows, cols);
                if let Some(u) = find(i, n) {
                    sys.add_term(eq, u, tgt.alpha(i).block(n + p), Matrix::identity(&ring, cols))?;
                }
                // (F_{i−1} ⊗ 1) α^D_i = Σ_g E_g F_{i−1} E_gᵀ α^D_i; twists act as
                // the identity function on every supported ring.
                if let Some(u) = find(i - 1, n) {
                    let (cr, dr) = (tgt.level(i - 1).rank(n + p), src.level(i - 1).rank(n));
                    for g in 0..s_rank {
                        let left = copy_inclusion(&ring, cr, s_rank, g).scale_i64(-1);
                        let right = &copy_inclusion(&ring, dr, s_rank, g).transpose() * &src.alpha(i).block(n);
                        sys.add_term(eq, u, left, right)?;
                    }
                }
            }
        }
        let basis = sys.homogeneous_basis()?;
        debug_assert_eq!(basis.rows(), len);
        Ok(DegreeData { slots, len, basis })
    }

    fn unpack(src: &D0Complex, tgt: &D0Complex, p: i64, dd: &DegreeData, m: &Matrix, col: usize) -> D0Map {
        let ring = src.ring().clone();
        let levels = (0..=src.top())
            .map(|i| {
                let (d, c) = (src.level(i), tgt.level(i));
                GradedMap::from_fn(d.clone(), c.clone(), p, |n| {
                    let s = dd.slots.iter().find(|s| s.level == i && s.degree == n).expect("slot");
                    Matrix::from_fn(&ring, s.rows, s.cols, |a, b| m.get(s.offset + a * s.cols + b, col).clone())
                })
                .expect("slot shapes match")
            })
            .collect();
        D0Map { degree: p, levels }
    }

    fn data(&self, p: i64) -> Option<&DegreeData> {
        if p < self.lo {
            return None;
        }
        self.degrees.get((p - self.lo) as usize)
    }

    /// The algebraic morphism with the given coordinates (one column).
    pub fn element(&self, p: i64, coords: &Matrix) -> Result<D0Map> {
        let Some(dd) = self.data(p) else {
            return Ok(D0Map {
                degree: p,
                levels: (0..=self.src.top()).map(|i| GradedMap::zero(self.src.level(i).clone(), self.tgt.level(i).clone(), p)).collect(),
            });
        };
        let v = &dd.basis * coords;
        Ok(Self::unpack(&self.src, &self.tgt, p, dd, &v, 0))
    }

    /// Coordinates of an algebraic morphism in the basis of degree `p`.
    pub fn coordinates(&self, f: &D0Map) -> Result<Matrix> {
        let ring = self.src.ring().clone();
        let Some(dd) = self.data(f.degree) else {
            return Ok(Matrix::zeros(&ring, 0, 1));
        };
        let per_level: Vec<Matrix> = f.levels.iter().map(|g| Self::flatten_blocks(g.blocks())).collect();
        let v = Self::pack(dd, &per_level, &ring);
        solve_linear(&dd.basis, &v)?.ok_or_else(|| Error::Precondition("map is not an algebraic morphism".into()))
    }

    /// Cycles of degree `p` (chain maps of degree `p`), one per column.
    pub fn cycle_basis(&self, p: i64) -> Result<Matrix> {
        crate::linalg::kernel_basis(&self.complex.d(p))
    }
}

/// `ℋom(g_m, C)` with its isomorphism onto `Ker(α_m)` given by `f ↦ f_m(1)`.
#[derive(Clone, Debug)]
pub struct GmHom {
    pub hom: HomComplex,
    pub kernel: KernelComplex,
    pub iso: GradedMap,
}

pub fn hom_complex_g_m(c: &D0Complex, m: usize) -> Result<GmHom> {
    c.require_reduced()?;
    let g = g_m(c.bimodule(), m, c.top())?;
    let hom = HomComplex::compute(&g, c)?;
    let kernel = c.alpha_kernel(m)?;
    let iso = GradedMap::from_fn(hom.complex.clone(), kernel.complex.clone(), 0, |p| {
        let ring = c.ring().clone();
        let mut cols = Matrix::zeros(&ring, kernel.complex.rank(p), 0);
        let rank = hom.complex.rank(p);
        for j in 0..rank {
            let mut e = Matrix::zeros(&ring, rank, 1);
            e.set(j, 0, crate::linalg::int(1));
            let f = hom.element(p, &e).expect("basis element");
            let x = f.levels[m].block(0);
            cols = cols.hstack(&kernel.coordinates(p, &x).expect("f_m(1) lies in Ker(α_m)"));
        }
        cols
    })?;
    Ok(GmHom { hom, kernel, iso })
}

/// The sequence `0 → s⁻¹Ker(α_{m+1}) → ℋom(g_m^{m+1}, C) → Ker(α_m) → 0` in
/// coordinates `(x, y)`, `x ∈ Ker(α_m)_p`, `y ∈ Ker(α_{m+1})_{p+1}`, where the
/// differential is `D(x, y) = (∂x, ∂y + (−1)^p λx)`.
#[derive(Clone, Debug)]
pub struct ConeHomSes {
    pub hom: Arc<ChainComplex>,
    pub sub: Arc<ChainComplex>,
    pub quotient: Arc<ChainComplex>,
    pub i: GradedMap,
    pub pi: GradedMap,
    pub lambda_bar: GradedMap,
}

pub fn hom_complex_g_m_cone(c: &D0Complex, m: usize) -> Result<ConeHomSes> {
    c.require_reduced()?;
    if m < 1 || m + 1 > c.top() {
        return Err(Error::Precondition(format!("g_m_cone needs 1 ≤ m < N, got m = {m}")));
    }
    let ring = c.ring().clone();
    let km = c.alpha_kernel(m)?;
    let kn = c.alpha_kernel(m + 1)?;
    let lambda_bar = c.induced_lambda(m, &km, &kn)?;
    let (a, b) = (&km.complex, &kn.complex);
    let lo = a.lo().min(b.lo() - 1);
    let hi = a.hi().max(b.hi() - 1);
    let ranks: Vec<usize> = (lo..=hi).map(|p| a.rank(p) + b.rank(p + 1)).collect();
    let diffs = (lo + 1..=hi)
        .map(|p| {
            let top = a.d(p).hstack(&Matrix::zeros(&ring, a.rank(p - 1), b.rank(p + 1)));
            let bottom = lambda_bar.block(p).scale_i64(sign(p)).hstack(&b.d(p + 1));
            top.vstack(&bottom)
        })
        .collect();
    let hom = Arc::new(ChainComplex::new(&ring, lo, ranks, diffs)?);
    let sub = Arc::new(desuspension(b));
    let i = GradedMap::from_fn(sub.clone(), hom.clone(), 0, |p| {
        Matrix::zeros(&ring, a.rank(p), b.rank(p + 1)).vstack(&Matrix::identity(&ring, b.rank(p + 1))).scale_i64(sign(p))
    })?;
    let pi = GradedMap::from_fn(hom.clone(), a.clone(), 0, |p| {
        Matrix::identity(&ring, a.rank(p)).hstack(&Matrix::zeros(&ring, a.rank(p), b.rank(p + 1)))
    })?;
    Ok(ConeHomSes { hom, sub, quotient: a.clone(), i, pi, lambda_bar })
}

impl ConeHomSes {
    /// Sign `ε` such that the connecting morphism `H_p(Ker α_m) →
    /// H_{p−1}(s⁻¹Ker α_{m+1}) = H_p(Ker α_{m+1})` equals `ε·λ` on every
    /// homology class, computed by lifting cycles through `π` and pulling
    /// their boundary back along `i`. `None` if neither sign works.
    pub fn connecting_sign(&self) -> Result<Option<i64>> {
        let (a, b) = (&self.quotient, &self.lambda_bar.tgt());
        let mut candidates = vec![-1i64, 1];
        for p in a.degrees() {
            let z = crate::linalg::kernel_basis(&a.d(p))?;
            if z.cols() == 0 {
                continue;
            }
            // Lift (z, 0), apply D, and read the result through i.
            let lift = z.vstack(&Matrix::zeros(a.ring(), b.rank(p + 1), z.cols()));
            let boundary = &self.hom.d(p) * &lift;
            let w = solve_linear(&self.i.block(p - 1), &boundary)?
                .ok_or_else(|| Error::Invariant("boundary of a lifted cycle is not in the image of i".into()))?;
            let lam = &self.lambda_bar.block(p) * &z;
            candidates.retain(|&eps| {
                let diff = &w - &lam.scale_i64(eps);
                solve_linear(&b.d(p + 1), &diff).ok().flatten().is_some()
            });
        }
        Ok(candidates.first().copied())
    }
}

/// Generic `ℋom(g_m^{m+1}, C)`, for cross-checking the coordinate model.
pub fn generic_hom_g_m_cone(c: &D0Complex, m: usize) -> Result<HomComplex> {
    let g = g_m_cone(c.bimodule(), m, c.top())?;
    HomComplex::compute(&g, c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::homology;
    use crate::fuzz::{random_reduced_d0, rng, D0Spec};

    fn sample(seed: u64) -> D0Complex {
        let spec = D0Spec { s_rank: 2, ..D0Spec::small(3) };
        random_reduced_d0(&mut rng(seed), &Ring::Integers, &spec).unwrap()
    }

    #[test]
    fn hom_from_g_m_is_the_kernel() {
        let c = sample(1);
        for m in 1..=3 {
            let g = hom_complex_g_m(&c, m).unwrap();
            assert!(g.iso.is_chain_map());
            assert_eq!(homology(&g.hom.complex).unwrap(), homology(&g.kernel.complex).unwrap());
        }
    }

    #[test]
    fn cone_model_matches_generic_hom() {
        let c = sample(2);
        for m in 1..=2 {
            let ses = hom_complex_g_m_cone(&c, m).unwrap();
            assert!(ses.i.is_chain_map() && ses.pi.is_chain_map());
            let generic = generic_hom_g_m_cone(&c, m).unwrap();
            assert_eq!(homology(&ses.hom).unwrap(), homology(&generic.complex).unwrap());
            assert_eq!(ses.connecting_sign().unwrap(), Some(-1));
        }
    }

    #[test]
    fn non_reduced_targets_are_rejected() {
        let s = crate::chain::Bimodule::free(&Ring::Integers, 1);
        let g = g_m(&s, 1, 2).unwrap();
        assert!(matches!(hom_complex_g_m(&g, 1), Err(Error::NotReduced(_))));
    }
}
