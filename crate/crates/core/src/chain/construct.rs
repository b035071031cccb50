use std::sync::Arc;

use super::complex::ChainComplex;
use super::map::{same, sign, GradedMap};
use crate::error::{Error, Result};
use crate::linalg::{split_injection, InjectionSplitting, Matrix, Ring};

fn block_row(ring: &Ring, rows: usize, parts: &[Matrix]) -> Matrix {
    parts.iter().fold(Matrix::zeros(ring, rows, 0), |acc, p| acc.hstack(p))
}

fn block_matrix(ring: &Ring, rows: &[usize], cols: &[usize], cell: impl Fn(usize, usize) -> Option<Matrix>) -> Matrix {
    let total_c: usize = cols.iter().sum();
    let mut out = Matrix::zeros(ring, 0, total_c);
    for (i, &r) in rows.iter().enumerate() {
        let parts: Vec<Matrix> =
            cols.iter().enumerate().map(|(j, &c)| cell(i, j).unwrap_or_else(|| Matrix::zeros(ring, r, c))).collect();
        out = out.vstack(&block_row(ring, r, &parts));
    }
    out
}

/// `s^k C`: degrees raised by `k`, differential multiplied by `(−1)^k`.
pub fn shift(c: &ChainComplex, k: i64) -> ChainComplex {
    if c.is_zero() {
        return c.clone();
    }
    let s = sign(k);
    let diffs = (c.lo() + 1..=c.hi()).map(|n| c.d(n).scale_i64(s)).collect();
    ChainComplex::from_parts(c.ring(), c.lo() + k, c.ranks().to_vec(), diffs)
}

pub fn suspension(c: &ChainComplex) -> ChainComplex {
    shift(c, 1)
}

pub fn desuspension(c: &ChainComplex) -> ChainComplex {
    shift(c, -1)
}

/// `s^k f` between shifted complexes, same blocks.
pub fn shift_map(f: &GradedMap, k: i64) -> GradedMap {
    let src = Arc::new(shift(f.src(), k));
    let tgt = Arc::new(shift(f.tgt(), k));
    GradedMap::from_fn_unchecked(&src, &tgt, f.degree(), |n| f.block(n - k))
}

#[derive(Clone, Debug)]
pub struct DirectSum {
    pub complex: Arc<ChainComplex>,
    pub inclusions: Vec<GradedMap>,
    pub projections: Vec<GradedMap>,
}

fn offsets(ranks: &[usize]) -> Vec<usize> {
    ranks.iter().scan(0, |acc, &r| {
        let o = *acc;
        *acc += r;
        Some(o)
    }).collect()
}

pub fn direct_sum(parts: &[Arc<ChainComplex>]) -> Result<DirectSum> {
    let ring = match parts.first() {
        Some(p) => p.ring().clone(),
        None => return Err(Error::Precondition("direct sum of no complexes".into())),
    };
    if let Some(p) = parts.iter().find(|p| *p.ring() != ring) {
        return Err(Error::RingMismatch(ring, p.ring().clone()));
    }
    let nonzero: Vec<_> = parts.iter().filter(|p| !p.is_zero()).collect();
    let lo = nonzero.iter().map(|p| p.lo()).min().unwrap_or(0);
    let hi = nonzero.iter().map(|p| p.hi()).max().unwrap_or(-1);
    let ranks: Vec<usize> = (lo..=hi).map(|n| parts.iter().map(|p| p.rank(n)).sum()).collect();
    let diffs = (lo + 1..=hi)
        .map(|n| {
            let ds: Vec<Matrix> = parts.iter().map(|p| p.d(n)).collect();
            Matrix::block_diag(&ring, &ds.iter().collect::<Vec<_>>())
        })
        .collect();
    let complex = Arc::new(ChainComplex::from_parts(&ring, lo, ranks, diffs));
    let mut inclusions = Vec::new();
    let mut projections = Vec::new();
    for (idx, p) in parts.iter().enumerate() {
        let place = |n: i64| offsets(&parts.iter().map(|q| q.rank(n)).collect::<Vec<_>>())[idx];
        let inc = GradedMap::from_fn_unchecked(p, &complex, 0, |n| {
            let mut m = Matrix::zeros(&ring, complex.rank(n), p.rank(n));
            m.paste(place(n), 0, &Matrix::identity(&ring, p.rank(n)));
            m
        });
        let proj = GradedMap::from_fn_unchecked(&complex, p, 0, |n| {
            let mut m = Matrix::zeros(&ring, p.rank(n), complex.rank(n));
            m.paste(0, place(n), &Matrix::identity(&ring, p.rank(n)));
            m
        });
        inclusions.push(inc);
        projections.push(proj);
    }
    Ok(DirectSum { complex, inclusions, projections })
}

/// Block-diagonal map between two direct sums built from the same summands.
pub fn direct_sum_map(maps: &[&GradedMap], src: &DirectSum, tgt: &DirectSum) -> Result<GradedMap> {
    let degree = maps.first().map_or(0, |m| m.degree());
    let mut total = GradedMap::zero(src.complex.clone(), tgt.complex.clone(), degree);
    for (k, m) in maps.iter().enumerate() {
        let term = tgt.inclusions[k].compose(m)?.compose(&src.projections[k])?;
        total = total.add(&term)?;
    }
    Ok(total)
}

/// Mapping cone `C(f)_n = A_{n−1} ⊕ B_n`, `∂ = [[−∂A, 0], [−f, ∂B]]`.
#[derive(Clone, Debug)]
pub struct Cone {
    pub complex: Arc<ChainComplex>,
    /// `B → C(f)`, `b ↦ (0, b)`.
    pub inclusion: GradedMap,
    /// `C(f) → sA`, `(a, b) ↦ a`.
    pub projection: GradedMap,
}

pub fn cone(f: &GradedMap) -> Result<Cone> {
    if f.degree() != 0 {
        return Err(Error::Precondition("cone needs a degree-0 chain map".into()));
    }
    f.ensure_chain_map()?;
    let (a, b) = (f.src(), f.tgt());
    let ring = a.ring().clone();
    let lo = (a.lo() + 1).min(b.lo());
    let hi = (a.hi() + 1).max(b.hi());
    let ranks: Vec<usize> = (lo..=hi).map(|n| a.rank(n - 1) + b.rank(n)).collect();
    let diffs = (lo + 1..=hi)
        .map(|n| {
            let rows = [a.rank(n - 2), b.rank(n - 1)];
            let cols = [a.rank(n - 1), b.rank(n)];
            block_matrix(&ring, &rows, &cols, |i, j| match (i, j) {
                (0, 0) => Some(a.d(n - 1).scale_i64(-1)),
                (1, 0) => Some(f.block(n - 1).scale_i64(-1)),
                (1, 1) => Some(b.d(n)),
                _ => None,
            })
        })
        .collect();
    let complex = Arc::new(ChainComplex::from_parts(&ring, lo, ranks, diffs));
    let inclusion = GradedMap::from_fn_unchecked(b, &complex, 0, |n| {
        Matrix::zeros(&ring, a.rank(n - 1), b.rank(n)).vstack(&Matrix::identity(&ring, b.rank(n)))
    });
    let sa = Arc::new(suspension(a));
    let projection = GradedMap::from_fn_unchecked(&complex, &sa, 0, |n| {
        Matrix::identity(&ring, a.rank(n - 1)).hstack(&Matrix::zeros(&ring, a.rank(n - 1), b.rank(n)))
    });
    Ok(Cone { complex, inclusion, projection })
}

/// Cylinder `T(f)_n = A_n ⊕ A_{n−1} ⊕ B_n` with
/// `∂ = [[∂A, 1, 0], [0, −∂A, 0], [0, −f, ∂B]]`.
#[derive(Clone, Debug)]
pub struct Cylinder {
    pub complex: Arc<ChainComplex>,
    pub j1: GradedMap,
    pub j2: GradedMap,
    pub p: GradedMap,
    /// `T(f) ↠ C(f)` with kernel `j1(A)`.
    pub quotient: GradedMap,
    pub cone: Cone,
}

pub fn cylinder(f: &GradedMap) -> Result<Cylinder> {
    let cone = cone(f)?;
    let (a, b) = (f.src(), f.tgt());
    let ring = a.ring().clone();
    let lo = a.lo().min(b.lo());
    let hi = (a.hi() + 1).max(b.hi());
    let ranks: Vec<usize> = (lo..=hi).map(|n| a.rank(n) + a.rank(n - 1) + b.rank(n)).collect();
    let diffs = (lo + 1..=hi)
        .map(|n| {
            let rows = [a.rank(n - 1), a.rank(n - 2), b.rank(n - 1)];
            let cols = [a.rank(n), a.rank(n - 1), b.rank(n)];
            block_matrix(&ring, &rows, &cols, |i, j| match (i, j) {
                (0, 0) => Some(a.d(n)),
                (0, 1) => Some(Matrix::identity(&ring, a.rank(n - 1))),
                (1, 1) => Some(a.d(n - 1).scale_i64(-1)),
                (2, 1) => Some(f.block(n - 1).scale_i64(-1)),
                (2, 2) => Some(b.d(n)),
                _ => None,
            })
        })
        .collect();
    let t = Arc::new(ChainComplex::from_parts(&ring, lo, ranks, diffs));
    let r3 = |n: i64| [a.rank(n), a.rank(n - 1), b.rank(n)];
    let j1 = GradedMap::from_fn_unchecked(a, &t, 0, |n| {
        block_matrix(&ring, &r3(n), &[a.rank(n)], |i, _| (i == 0).then(|| Matrix::identity(&ring, a.rank(n))))
    });
    let j2 = GradedMap::from_fn_unchecked(b, &t, 0, |n| {
        block_matrix(&ring, &r3(n), &[b.rank(n)], |i, _| (i == 2).then(|| Matrix::identity(&ring, b.rank(n))))
    });
    let p = GradedMap::from_fn_unchecked(&t, b, 0, |n| {
        block_matrix(&ring, &[b.rank(n)], &r3(n), |_, j| match j {
            0 => Some(f.block(n)),
            2 => Some(Matrix::identity(&ring, b.rank(n))),
            _ => None,
        })
    });
    let quotient = GradedMap::from_fn_unchecked(&t, &cone.complex, 0, |n| {
        block_matrix(&ring, &[a.rank(n - 1), b.rank(n)], &r3(n), |i, j| match (i, j) {
            (0, 1) => Some(Matrix::identity(&ring, a.rank(n - 1))),
            (1, 2) => Some(Matrix::identity(&ring, b.rank(n))),
            _ => None,
        })
    });
    Ok(Cylinder { complex: t, j1, j2, p, quotient, cone })
}

/// Pushout `W = Z ⊔_A Y` along a cofibration `f: A ↣ Y`, presented as
/// `W_n = Z_n ⊕ coker(f_n)` through a chosen splitting of `f`.
#[derive(Clone, Debug)]
pub struct Pushout {
    pub complex: Arc<ChainComplex>,
    pub from_y: GradedMap,
    pub from_z: GradedMap,
    pub splittings: Vec<(i64, InjectionSplitting)>,
    f: GradedMap,
    g: GradedMap,
}

impl Pushout {
    fn split(&self, n: i64) -> &InjectionSplitting {
        &self.splittings.iter().find(|(m, _)| *m == n).expect("splitting for every degree").1
    }

    /// Cokernel section `v_n : coker(f_n) → Y_n`.
    pub fn cokernel_section(&self, n: i64) -> Matrix {
        let y = self.f.tgt();
        if n < y.lo() || n > y.hi() {
            return Matrix::zeros(y.ring(), y.rank(n), 0);
        }
        self.split(n).cokernel_section.clone()
    }

    /// The unique map `W → X` restricting to `p` on `Y` and `q` on `Z`.
    /// Requires `p∘f = q∘g`.
    pub fn universal(&self, p: &GradedMap, q: &GradedMap) -> Result<GradedMap> {
        if p.compose(&self.f)? != q.compose(&self.g)? {
            return Err(Error::Precondition("cocone does not commute with the span".into()));
        }
        if p.degree() != 0 || q.degree() != 0 || !same(p.tgt(), q.tgt()) {
            return Err(Error::Precondition("cocone legs must be degree-0 maps to one complex".into()));
        }
        let x = p.tgt();
        Ok(GradedMap::from_fn_unchecked(&self.complex, x, 0, |n| {
            q.block(n).hstack(&(&p.block(n) * &self.cokernel_section(n)))
        }))
    }
}

pub fn pushout_along_cofibration(f: &GradedMap, g: &GradedMap) -> Result<Pushout> {
    if f.degree() != 0 || g.degree() != 0 || !same(f.src(), g.src()) {
        return Err(Error::Precondition("pushout needs degree-0 maps out of one complex".into()));
    }
    f.ensure_chain_map()?;
    g.ensure_chain_map()?;
    let (y, z) = (f.tgt(), g.tgt());
    let ring = y.ring().clone();
    let mut splittings = Vec::new();
    for n in y.degrees() {
        let s = split_injection(&f.block(n)).map_err(|_| Error::NotACofibration(format!("degree {n}")))?;
        splittings.push((n, s));
    }
    let a = f.src();
    for n in a.degrees() {
        if (n < y.lo() || n > y.hi())
            && a.rank(n) > 0 {
                return Err(Error::NotACofibration(format!("degree {n} of the source maps to zero")));
            }
    }
    let get = |n: i64| splittings.iter().find(|(m, _)| *m == n).map(|(_, s)| s);
    let cok = |n: i64| get(n).map_or(0, |s| s.cokernel_projection.rows());
    let u = |n: i64| get(n).map_or_else(|| Matrix::zeros(&ring, a.rank(n), y.rank(n)), |s| s.retraction.clone());
    let pi = |n: i64| get(n).map_or_else(|| Matrix::zeros(&ring, 0, y.rank(n)), |s| s.cokernel_projection.clone());
    let v = |n: i64| get(n).map_or_else(|| Matrix::zeros(&ring, y.rank(n), 0), |s| s.cokernel_section.clone());

    let lo = z.lo().min(y.lo());
    let hi = z.hi().max(y.hi());
    let ranks: Vec<usize> = (lo..=hi).map(|n| z.rank(n) + cok(n)).collect();
    let diffs = (lo + 1..=hi)
        .map(|n| {
            let dyv = &y.d(n) * &v(n);
            block_matrix(&ring, &[z.rank(n - 1), cok(n - 1)], &[z.rank(n), cok(n)], |i, j| match (i, j) {
                (0, 0) => Some(z.d(n)),
                (0, 1) => Some(&(&g.block(n - 1) * &u(n - 1)) * &dyv),
                (1, 1) => Some(&pi(n - 1) * &dyv),
                _ => None,
            })
        })
        .collect();
    let w = Arc::new(ChainComplex::from_parts(&ring, lo, ranks, diffs));
    let from_z = GradedMap::from_fn_unchecked(z, &w, 0, |n| {
        Matrix::identity(&ring, z.rank(n)).vstack(&Matrix::zeros(&ring, cok(n), z.rank(n)))
    });
    let from_y = GradedMap::from_fn_unchecked(y, &w, 0, |n| (&g.block(n) * &u(n)).vstack(&pi(n)));
    Ok(Pushout { complex: w, from_y, from_z, splittings, f: f.clone(), g: g.clone() })
}

/// Contractible `E = cone(id_{s⁻¹Y})` with the degreewise surjection
/// `E_n = Y_n ⊕ Y_{n+1} → Y_n`.
pub fn acyclic_cover(y: &Arc<ChainComplex>) -> Result<(Arc<ChainComplex>, GradedMap)> {
    let w = Arc::new(desuspension(y));
    let c = cone(&GradedMap::identity(w))?;
    let e = c.complex.clone();
    let ring = y.ring().clone();
    let map = GradedMap::from_fn_unchecked(&e, y, 0, |n| {
        Matrix::identity(&ring, y.rank(n)).hstack(&Matrix::zeros(&ring, y.rank(n), y.rank(n + 1)))
    });
    Ok((e, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{homology, is_acyclic, is_contractible};
    use num_traits::Signed;

    fn z() -> Ring {
        Ring::Integers
    }

    fn times_two() -> Arc<ChainComplex> {
        Arc::new(ChainComplex::two_term(0, Matrix::from_i64(&z(), &[&[2]])))
    }

    #[test]
    fn cone_of_identity_on_z() {
        let c = Arc::new(ChainComplex::concentrated(&z(), 0, 1));
        let k = cone(&GradedMap::identity(c)).unwrap();
        assert_eq!(k.complex.degrees(), 0..=1);
        assert_eq!(k.complex.d(1).get(0, 0).abs(), crate::linalg::int(1));
        assert!(is_contractible(&k.complex).unwrap());
    }

    #[test]
    fn shift_round_trip() {
        let c = times_two();
        assert_eq!(suspension(&desuspension(&c)), *c);
        assert_eq!(shift(&c, 3).lo(), 3);
    }

    #[test]
    fn cylinder_structure() {
        let c = times_two();
        let f = GradedMap::identity(c.clone()).scale(&crate::linalg::int(3));
        let cyl = cylinder(&f).unwrap();
        for m in [&cyl.j1, &cyl.j2, &cyl.p, &cyl.quotient, &cyl.cone.inclusion, &cyl.cone.projection] {
            assert!(m.is_chain_map());
        }
        assert_eq!(cyl.p.compose(&cyl.j2).unwrap(), GradedMap::identity(c.clone()));
        assert_eq!(cyl.p.compose(&cyl.j1).unwrap(), f);
        assert!(cyl.quotient.compose(&cyl.j1).unwrap().is_zero());
        for n in cyl.complex.degrees() {
            assert_eq!(cyl.complex.rank(n), c.rank(n) + cyl.cone.complex.rank(n));
        }
    }

    #[test]
    fn pushout_along_identity_is_the_other_leg() {
        let c = times_two();
        let r = z();
        let tgt = Arc::new(ChainComplex::two_term(0, Matrix::from_i64(&r, &[&[4]])));
        let g = GradedMap::new(c.clone(), tgt.clone(), 0, vec![Matrix::from_i64(&r, &[&[2]]), Matrix::from_i64(&r, &[&[1]])]).unwrap();
        assert!(g.is_chain_map());
        let po = pushout_along_cofibration(&GradedMap::identity(c.clone()), &g).unwrap();
        assert_eq!(*po.complex, *tgt);
        assert!(po.from_y.is_chain_map() && po.from_z.is_chain_map());
        assert_eq!(po.from_y, g.retarget(&c, &po.complex).unwrap());
    }

    #[test]
    fn pushout_rejects_non_cofibrations() {
        let c = times_two();
        let f = GradedMap::identity(c.clone()).scale(&crate::linalg::int(2));
        assert!(matches!(pushout_along_cofibration(&f, &GradedMap::identity(c)), Err(Error::NotACofibration(_))));
    }

    #[test]
    fn acyclic_cover_surjects() {
        let c = times_two();
        let (e, map) = acyclic_cover(&c).unwrap();
        assert!(is_acyclic(&e).unwrap());
        assert!(map.is_chain_map());
        assert!(homology(&e).unwrap().iter().all(|(_, h)| h.is_zero()));
    }

    #[test]
    fn direct_sum_projections() {
        let c = times_two();
        let d = Arc::new(ChainComplex::concentrated(&z(), 3, 2));
        let s = direct_sum(&[c.clone(), d.clone()]).unwrap();
        assert_eq!(s.complex.rank(3), 2);
        assert_eq!(s.projections[0].compose(&s.inclusions[0]).unwrap(), GradedMap::identity(c));
        assert!(s.projections[1].compose(&s.inclusions[0]).unwrap().is_zero());
    }
}
