use std::sync::Arc;

use super::complex::ChainComplex;
use super::map::{sign, GradedMap};
use crate::error::Result;
use crate::linalg::{solve_linear, LinearSystem, Matrix};

/// Some `H` of degree `deg f + 1` with `D(H) = f`, or `None` if no such map
/// exists over the ring. Errors if `f` is not a cycle.
///
/// A degree-by-degree lift is tried first; it always succeeds when the
/// target is acyclic. Otherwise the whole block system is solved at once,
/// which decides existence exactly.
pub fn find_null_homotopy(f: &GradedMap) -> Result<Option<GradedMap>> {
    f.ensure_chain_map()?;
    if let Some(h) = greedy(f)? {
        return Ok(Some(h));
    }
    global(f)
}

fn greedy(f: &GradedMap) -> Result<Option<GradedMap>> {
    let (src, tgt) = (f.src(), f.tgt());
    let d = f.degree() + 1;
    let s = sign(d);
    let mut blocks: Vec<Matrix> = Vec::new();
    for n in src.degrees() {
        let mut rhs = f.block(n);
        if let Some(prev) = blocks.last() {
            if let Some(dn) = src.d_ref(n) {
                rhs = &rhs + &(prev * dn).scale_i64(s);
            }
        }
        match solve_linear(&tgt.d(n + d), &rhs)? {
            Some(x) => blocks.push(x),
            None => return Ok(None),
        }
    }
    Ok(Some(GradedMap::new(src.clone(), tgt.clone(), d, blocks)?))
}

fn global(f: &GradedMap) -> Result<Option<GradedMap>> {
    let (src, tgt) = (f.src(), f.tgt());
    let ring = src.ring().clone();
    let d = f.degree() + 1;
    let s = sign(d);
    let mut sys = LinearSystem::new(&ring);
    let unknowns: Vec<usize> = src.degrees().map(|n| sys.add_unknown(tgt.rank(n + d), src.rank(n))).collect();
    for (k, n) in src.degrees().enumerate() {
        let eq = sys.add_equation(f.block(n));
        sys.add_term(eq, unknowns[k], tgt.d(n + d), Matrix::identity(&ring, src.rank(n)))?;
        if k > 0 {
            sys.add_term(eq, unknowns[k - 1], Matrix::identity(&ring, tgt.rank(n + d - 1)).scale_i64(-s), src.d(n))?;
        }
    }
    Ok(match sys.solve()? {
        Some(blocks) => Some(GradedMap::new(src.clone(), tgt.clone(), d, blocks)?),
        None => None,
    })
}

/// A homotopy `H` with `D(H) = f − g`.
pub fn find_homotopy(f: &GradedMap, g: &GradedMap) -> Result<Option<GradedMap>> {
    find_null_homotopy(&f.sub(g)?)
}

/// Checks `D(H) = f − g` exactly.
pub fn is_homotopy(h: &GradedMap, f: &GradedMap, g: &GradedMap) -> Result<bool> {
    Ok(h.differential() == f.sub(g)?)
}

/// A contraction `k` with `∂k + k∂ = 1`, if the complex is contractible.
///
/// The degreewise lift cannot fail on an acyclic complex, and a complex that
/// is not acyclic is not contractible, so the global system is never needed.
pub fn find_contraction(c: &Arc<ChainComplex>) -> Result<Option<GradedMap>> {
    greedy(&GradedMap::identity(c.clone()))
}

pub fn is_contractible(c: &Arc<ChainComplex>) -> Result<bool> {
    Ok(find_contraction(c)?.is_some())
}
