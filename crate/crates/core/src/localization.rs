//! Homology orders, annihilator exponents and order classes of complexes over
//! `Z`, plus the vanishing of maps between the two shapes of `𝒟₀`-complexes
//! used for excision.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use crate::chain::{find_null_homotopy, homology, ChainComplex, GradedMap};
use crate::d0::D0Complex;
use crate::error::{Error, Result};
use crate::linalg::{big, is_prime, kernel_basis, LinearSystem, Matrix, Ring};
use crate::par::{self, Execution};

fn ser_opt_big<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => s.serialize_some(&x.to_string()),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OrderReport {
    pub finite: bool,
    /// Product of all torsion invariant factors, when every Betti number is 0.
    #[serde(serialize_with = "ser_opt_big")]
    pub order: Option<BigInt>,
}

fn require_integers(c: &ChainComplex) -> Result<()> {
    if *c.ring() != Ring::Integers {
        return Err(Error::RequiresIntegers(c.ring().clone()));
    }
    Ok(())
}

pub fn homology_order(c: &ChainComplex) -> Result<OrderReport> {
    require_integers(c)?;
    let groups = homology(c)?;
    if groups.iter().any(|(_, h)| h.betti > 0) {
        return Ok(OrderReport { finite: false, order: None });
    }
    let order = groups.iter().map(|(_, h)| h.torsion_order()).product();
    Ok(OrderReport { finite: true, order: Some(order) })
}

/// lcm of all torsion invariant factors, or `None` if homology is infinite.
pub fn homology_exponent(c: &ChainComplex) -> Result<Option<BigInt>> {
    require_integers(c)?;
    let groups = homology(c)?;
    if groups.iter().any(|(_, h)| h.betti > 0) {
        return Ok(None);
    }
    Ok(Some(groups.iter().flat_map(|(_, h)| h.torsion.iter()).fold(BigInt::one(), |acc, t| acc.lcm(t))))
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnihilatorReport {
    #[serde(serialize_with = "ser_opt_big")]
    pub exponent: Option<BigInt>,
    #[serde(serialize_with = "ser_opt_big")]
    pub homology_exponent: Option<BigInt>,
    /// `H` with `dH + Hd = N·1`.
    #[serde(skip)]
    pub witness: Option<GradedMap>,
}

fn factorize(n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut n = n;
    let mut p = 2;
    while p * p <= n {
        let mut e = 0;
        while n.is_multiple_of(p) {
            n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// All positive divisors in increasing order.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut out = vec![1u64];
    for (p, e) in factorize(n) {
        let prev = out.clone();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            out.extend(prev.iter().map(|d| d * pk));
        }
    }
    out.sort_unstable();
    out
}

/// Smallest `N ≥ 1` with `N·1_C ≃ 0`, searched over the divisors of `e²`
/// where `e` is the exponent of `H_*(C)`.
pub fn annihilator_exponent(c: &ChainComplex, exec: Execution) -> Result<AnnihilatorReport> {
    let Some(e) = homology_exponent(c)? else {
        return Ok(AnnihilatorReport { exponent: None, homology_exponent: None, witness: None });
    };
    let sq = (&e * &e).to_u64().ok_or_else(|| Error::Precondition(format!("homology exponent {e} too large to search")))?;
    let c = std::sync::Arc::new(c.clone());
    let id = GradedMap::identity(c.clone());
    let candidates = divisors(sq);
    let found = par::try_map(exec, &candidates, |&n| find_null_homotopy(&id.scale(&big(BigInt::from(n)))))?;
    let hit = candidates.iter().zip(found).find_map(|(&n, h)| h.map(|h| (n, h)));
    match hit {
        Some((n, h)) => Ok(AnnihilatorReport { exponent: Some(BigInt::from(n)), homology_exponent: Some(e), witness: Some(h) }),
        None => Err(Error::Invariant(format!("no divisor of {sq} annihilates the identity up to homotopy"))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderClass {
    InA,
    InB,
    Intersection,
    Neither,
}

#[derive(Clone, Debug, Serialize)]
pub struct OrderClassVerdict {
    pub class: OrderClass,
    pub finite: bool,
    #[serde(serialize_with = "ser_opt_big")]
    pub order: Option<BigInt>,
}

/// Power of `p` equal to `n`, if any (`p^0 = 1` excluded by the caller).
fn is_power_of(n: &BigInt, p: u64) -> bool {
    let p = BigInt::from(p);
    let mut n = n.clone();
    while !n.is_one() {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return false;
        }
        n = q;
    }
    true
}

/// Membership of `C` in `𝔄 = {order p^m}` and `𝔅 = {order q^n}`; acyclic
/// complexes are the intersection.
pub fn classify_order_class(c: &ChainComplex, p: u64, q: u64) -> Result<OrderClassVerdict> {
    if p == q || !is_prime(p) || !is_prime(q) {
        return Err(Error::Precondition(format!("need distinct primes, got {p} and {q}")));
    }
    let report = homology_order(c)?;
    let class = match &report.order {
        None => OrderClass::Neither,
        Some(o) if o.is_one() => OrderClass::Intersection,
        Some(o) if is_power_of(o, p) => OrderClass::InA,
        Some(o) if is_power_of(o, q) => OrderClass::InB,
        Some(_) => OrderClass::Neither,
    };
    Ok(OrderClassVerdict { class, finite: report.finite, order: report.order })
}

/// `C ⊗ Q` is acyclic.
pub fn rational_acyclicity(c: &ChainComplex) -> Result<bool> {
    require_integers(c)?;
    Ok(homology(c)?.iter().all(|(_, h)| h.betti == 0))
}

#[derive(Clone, Debug, Serialize)]
pub struct HomVanishing {
    pub unknowns: usize,
    pub equations: usize,
    pub constraint_rank: usize,
    pub dimension: usize,
}

fn check_f_shape(x: &D0Complex) -> Result<()> {
    for i in 1..x.top() {
        if x.level(i + 1) != x.level(1) || *x.lambda(i) != GradedMap::identity(x.level(1).clone()) {
            return Err(Error::Precondition(format!("source is not constant from level 1 (λ_{i} is not the identity)")));
        }
    }
    Ok(())
}

/// Solves for all degree-0 `𝒟₀`-morphisms `x → y` where `x` is constant from
/// level 1 on and `y` vanishes at level 1, and checks that only zero
/// survives.
pub fn hom_vanishing_f_to_g(x: &D0Complex, y: &D0Complex) -> Result<HomVanishing> {
    if x.top() != y.top() || x.bimodule() != y.bimodule() {
        return Err(Error::Precondition("objects must share N and S".into()));
    }
    check_f_shape(x)?;
    if !y.level(1).is_zero() {
        return Err(Error::Precondition("target must vanish at level 1".into()));
    }
    let ring = x.ring().clone();
    let s = x.bimodule().rank;
    let top = x.top();
    let (lo, hi) = (0..=top).flat_map(|i| [x.level(i), y.level(i)]).filter(|c| !c.is_zero()).fold((i64::MAX, i64::MIN), |(l, h), c| (l.min(c.lo()), h.max(c.hi())));
    let mut sys = LinearSystem::new(&ring);
    if lo > hi {
        return Ok(HomVanishing { unknowns: 0, equations: 0, constraint_rank: 0, dimension: 0 });
    }
    let span = (hi - lo + 1) as usize;
    let idx = |i: usize, d: i64| i * span + (d - lo) as usize;
    let mut ids = Vec::new();
    for i in 0..=top {
        for d in lo..=hi {
            ids.push(sys.add_unknown(y.level(i).rank(d), x.level(i).rank(d)));
        }
    }
    let eye = |n: usize| Matrix::identity(&ring, n);
    for i in 0..=top {
        let (xi, yi) = (x.level(i), y.level(i));
        for d in lo..=hi {
            let eq = sys.add_zero_equation(yi.rank(d - 1), xi.rank(d));
            sys.add_term(eq, ids[idx(i, d)], yi.d(d), eye(xi.rank(d)))?;
            if d > lo {
                sys.add_term(eq, ids[idx(i, d - 1)], eye(yi.rank(d - 1)).scale_i64(-1), xi.d(d))?;
            }
        }
    }
    for i in 0..top {
        for d in lo..=hi {
            let eq = sys.add_zero_equation(y.level(i + 1).rank(d), x.level(i).rank(d));
            sys.add_term(eq, ids[idx(i + 1, d)], eye(y.level(i + 1).rank(d)), x.lambda(i).block(d))?;
            sys.add_term(eq, ids[idx(i, d)], y.lambda(i).block(d).scale_i64(-1), eye(x.level(i).rank(d)))?;
        }
    }
    for i in 1..=top {
        let (xp, yp) = (x.level(i - 1), y.level(i - 1));
        for d in lo..=hi {
            let (yr, xr) = (yp.rank(d), xp.rank(d));
            let eq = sys.add_zero_equation(s * yr, x.level(i).rank(d));
            sys.add_term(eq, ids[idx(i, d)], y.alpha(i).block(d), eye(x.level(i).rank(d)))?;
            let ax = x.alpha(i).block(d);
            for g in 0..s {
                let embed = Matrix::zeros(&ring, s * yr, yr).tap_paste(g * yr, 0, &eye(yr)).scale_i64(-1);
                let select = ax.submatrix(g * xr..(g + 1) * xr, 0..ax.cols());
                sys.add_term(eq, ids[idx(i - 1, d)], embed, select)?;
            }
        }
    }
    let (a, _) = sys.assemble();
    let dimension = kernel_basis(&a)?.cols();
    let unknowns = sys.num_variables();
    let report = HomVanishing { unknowns, equations: sys.num_equations(), constraint_rank: unknowns - dimension, dimension };
    if dimension != 0 {
        return Err(Error::Invariant(format!("found {dimension} independent nonzero morphisms")));
    }
    Ok(report)
}

trait TapPaste {
    fn tap_paste(self, r: usize, c: usize, b: &Matrix) -> Matrix;
}

impl TapPaste for Matrix {
    fn tap_paste(mut self, r: usize, c: usize, b: &Matrix) -> Matrix {
        self.paste(r, c, b);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(rows: &[&[i64]]) -> Matrix {
        Matrix::from_i64(&Ring::Integers, rows)
    }

    fn moore(n: i64) -> ChainComplex {
        ChainComplex::two_term(0, z(&[&[n]]))
    }

    #[test]
    fn orders_of_small_complexes() {
        assert_eq!(homology_order(&moore(2)).unwrap().order, Some(BigInt::from(2)));
        assert_eq!(homology_order(&moore(6)).unwrap().order, Some(BigInt::from(6)));
        assert_eq!(homology_order(&moore(1)).unwrap().order, Some(BigInt::from(1)));
        let free = ChainComplex::concentrated(&Ring::Integers, 0, 1);
        assert!(!homology_order(&free).unwrap().finite);
    }

    #[test]
    fn moore_two_has_exponent_two() {
        let r = annihilator_exponent(&moore(2), Execution::Sequential).unwrap();
        assert_eq!(r.exponent, Some(BigInt::from(2)));
        let h = r.witness.unwrap();
        assert_eq!(h.block(0), z(&[&[1]]));
    }

    #[test]
    fn diagonal_two_four_exponent() {
        let c = ChainComplex::two_term(0, z(&[&[2, 0], &[0, 4]]));
        let r = annihilator_exponent(&c, Execution::Parallel).unwrap();
        let n = r.exponent.unwrap();
        assert!(n.is_multiple_of(&BigInt::from(4)) && BigInt::from(16).is_multiple_of(&n));
        assert_eq!(n, BigInt::from(4));
    }

    #[test]
    fn divisors_are_sorted() {
        assert_eq!(divisors(36), vec![1, 2, 3, 4, 6, 9, 12, 18, 36]);
        assert_eq!(divisors(1), vec![1]);
    }

    #[test]
    fn order_classes() {
        assert_eq!(classify_order_class(&moore(2), 2, 3).unwrap().class, OrderClass::InA);
        assert_eq!(classify_order_class(&moore(9), 2, 3).unwrap().class, OrderClass::InB);
        assert_eq!(classify_order_class(&moore(6), 2, 3).unwrap().class, OrderClass::Neither);
        assert_eq!(classify_order_class(&moore(-1), 2, 3).unwrap().class, OrderClass::Intersection);
        assert!(classify_order_class(&moore(2), 2, 2).is_err());
    }

    #[test]
    fn rational_acyclicity_of_moore() {
        assert!(rational_acyclicity(&moore(2)).unwrap());
        assert!(!rational_acyclicity(&ChainComplex::concentrated(&Ring::Integers, 0, 1)).unwrap());
    }

    #[test]
    fn g_one_maps_trivially_to_g_shapes() {
        let s = crate::chain::Bimodule::free(&Ring::Integers, 1);
        let x = crate::d0::g_m(&s, 1, 3).unwrap();
        let y = crate::d0::g_m(&s, 2, 3).unwrap();
        let r = hom_vanishing_f_to_g(&x, &y).unwrap();
        assert_eq!(r.dimension, 0);
        assert!(r.unknowns > 0);
        assert!(hom_vanishing_f_to_g(&y, &x).is_err());
    }
}
