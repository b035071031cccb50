use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use dcx_core::chain::{self as ch, ChainComplex, GradedMap};
use dcx_core::d0::{self, D0Complex};
use dcx_core::diagram::DComplex;
use dcx_core::fuzz::{self, D0Spec, Piece};
use dcx_core::io::{d0_to_json, parse_document, Document};
use dcx_core::linalg::Ring;
use dcx_core::localization;
use dcx_core::nil::SplittingData;
use dcx_core::par::{self, Execution};
use dcx_core::Error;
use num_integer::Integer;
use serde_json::json;

use crate::report::{group, homology_json, homology_lines, map_json, support, Report};
use crate::Opts;

// Everything except the fuzz sweep runs on one thread.
const SEQ: Execution = Execution::Sequential;

fn read(file: &Path) -> Result<String> {
    std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))
}

fn load(file: &Path) -> Result<Document> {
    let text = read(file)?;
    parse_document(&text).with_context(|| file.display().to_string())
}

fn kind(doc: &Document) -> &'static str {
    match doc {
        Document::Complex(_) => "complex",
        Document::Map(_) => "map",
        Document::D0(_) => "d0",
        Document::D0Map(..) => "d0-map",
        Document::DComplex(_) => "d-complex",
        Document::Nil(..) => "nil",
    }
}

fn wrong(doc: &Document, want: &str) -> anyhow::Error {
    anyhow!("expected {want}, got a {} document", kind(doc))
}

fn load_complex(file: &Path, opts: &Opts) -> Result<ChainComplex> {
    match load(file)? {
        Document::Complex(c) => Ok(match &opts.ring {
            Some(r) => c.to_ring(r)?,
            None => c,
        }),
        doc => Err(wrong(&doc, "a chain complex")),
    }
}

fn load_map(file: &Path) -> Result<GradedMap> {
    match load(file)? {
        Document::Map(f) => Ok(f),
        doc => Err(wrong(&doc, "a graded map")),
    }
}

fn load_d0(file: &Path) -> Result<D0Complex> {
    match load(file)? {
        Document::D0(x) => Ok(x),
        doc => Err(wrong(&doc, "a D0-complex")),
    }
}

fn load_dcomplex(file: &Path) -> Result<DComplex> {
    match load(file)? {
        Document::DComplex(x) => Ok(x),
        Document::D0(x) => Ok(x.to_dcomplex()?),
        doc => Err(wrong(&doc, "a D-complex")),
    }
}

fn load_nil(file: &Path) -> Result<(SplittingData, Option<GradedMap>)> {
    match load(file)? {
        Document::Nil(data, f) => Ok((*data, f)),
        doc => Err(wrong(&doc, "a nil document (test_object and target)")),
    }
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn ranks(c: &ChainComplex) -> String {
    if c.is_zero() {
        "0".into()
    } else {
        format!("degrees {}..{} ranks {:?}", c.lo(), c.hi(), c.ranks())
    }
}

/// Failures of the structure itself, as opposed to unreadable files.
fn structural(e: &Error) -> bool {
    matches!(e, Error::NotAComplex(_) | Error::NotAChainMap(_) | Error::D0(_) | Error::Diagram(_) | Error::NotReduced(_))
}

pub fn verify(file: &Path, _opts: &Opts) -> Result<Report> {
    let mut r = Report::new("verify");
    let doc = match parse_document(&read(file)?) {
        Ok(d) => d,
        Err(e) if structural(e.root()) => {
            r.fail().line(format!("invalid: {e}")).field("error", e.to_string());
            return Ok(r);
        }
        Err(e) => return Err(anyhow!("{}: {e}", file.display())),
    };
    r.field("kind", kind(&doc));
    match &doc {
        Document::Complex(c) => {
            r.line(format!("chain complex over {}, {}", c.ring(), ranks(c))).line("∂∂ = 0");
        }
        Document::Map(f) => {
            r.line(format!("graded map of degree {} over {}", f.degree(), f.ring()));
            let bad = support(&f.differential());
            if bad.is_empty() {
                r.line("chain map");
            } else {
                r.fail().line(format!("not a chain map: ∂f − ±f∂ ≠ 0 in source degrees {bad:?}"));
            }
            r.field("chain_map", bad.is_empty()).field("failing_degrees", bad);
        }
        Document::D0(x) => {
            r.line(format!("D0-complex over {}, N = {}, stabilization {}", x.ring(), x.top(), x.stabilization()));
            let reduced = x.reduced_certificate().err();
            match reduced {
                None => r.line("reduced"),
                Some((i, n)) => r.line(format!("not reduced: α_{i} is not surjective in degree {n}")),
            };
            r.field("reduced", reduced.is_none());
        }
        Document::D0Map(_, _, f) => {
            r.line(format!("map of D0-complexes of degree {}", f.degree));
            let ok = f.is_chain_map();
            if ok {
                r.line("chain map on every level, commuting with λ and α");
            } else {
                r.fail().line("not a chain map");
            }
            r.field("chain_map", ok);
        }
        Document::DComplex(x) => {
            r.line(format!(
                "D-complex on '{}': {} vertices, {} edges, {} relations",
                x.diagram.name,
                x.diagram.vertices.len(),
                x.diagram.edges.len(),
                x.diagram.relations.len()
            ));
        }
        Document::Nil(data, f) => {
            let checks = data.identities()?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.holds).map(|c| c.name.as_str()).collect();
            r.line(format!("splitting data, N = {}, {} identities checked", data.top(), checks.len()));
            if failed.is_empty() {
                r.line("all splitting identities hold");
            } else {
                r.fail().line(format!("failing identities: {}", failed.join(", ")));
            }
            r.field("identities", &checks);
            if let Some(f) = f {
                let cycle = data.delta_differential(f)?.is_zero();
                r.line(format!("F has degree {}, δ-cycle: {}", f.degree(), yes(cycle))).field("delta_cycle", cycle);
            }
        }
    }
    Ok(r)
}

pub fn homology(file: &Path, opts: &Opts) -> Result<Report> {
    let c = load_complex(file, opts)?;
    let groups = ch::homology(&c)?;
    let mut r = Report::new("homology");
    r.lines = homology_lines(c.ring(), &groups);
    r.field("ring", c.ring().to_string()).field("homology", homology_json(&groups));
    Ok(r)
}

pub fn homotopy(file: &Path, opts: &Opts) -> Result<Report> {
    let mut r = Report::new("homotopy");
    let (h, what) = match load(file)? {
        Document::Map(f) => (ch::find_null_homotopy(&f)?, "null-homotopy of f"),
        Document::Complex(c) => {
            let c = match &opts.ring {
                Some(ring) => c.to_ring(ring)?,
                None => c,
            };
            (ch::find_contraction(&Arc::new(c))?, "contraction")
        }
        doc => return Err(wrong(&doc, "a graded map or a chain complex")),
    };
    match &h {
        Some(h) => {
            r.line(format!("{what} found (degree {})", h.degree())).field("homotopy", map_json(h));
        }
        None => {
            r.fail().line(format!("no {what} exists"));
        }
    }
    r.field("found", h.is_some());
    Ok(r)
}

pub fn cone(file: &Path, _opts: &Opts) -> Result<Report> {
    let f = load_map(file)?;
    let cone = ch::cone(&f)?;
    let groups = ch::homology(&cone.complex)?;
    let acyclic = groups.iter().all(|(_, h)| h.is_zero());
    let mut r = Report::new("cone");
    r.line(format!("cone: {}", ranks(&cone.complex)));
    r.lines.extend(homology_lines(f.ring(), &groups));
    if acyclic {
        r.line("cone is acyclic: f is a homology equivalence");
    } else {
        r.fail().line("cone is not acyclic: f is not a homology equivalence");
    }
    r.field("acyclic", acyclic).field("homology", homology_json(&groups));
    Ok(r)
}

pub fn nilpotency(file: &Path, opts: &Opts) -> Result<Report> {
    let x = load_dcomplex(file)?;
    let max_n = opts.max_n.unwrap_or(8);
    let mut r = Report::new("nilpotency");
    let degree = x.nilpotency_degree(max_n, SEQ)?;
    match degree {
        Some(n) => r.line(format!("degree {n}")),
        None => r.fail().line(format!("not nilpotent up to n = {max_n}")),
    };
    r.field("degree", degree).field("max_n", max_n);
    Ok(r)
}

pub fn classify(file: &Path, opts: &Opts) -> Result<Report> {
    let x = load_d0(file)?;
    let n = opts.n.unwrap_or(1);
    let m = d0::classify(&x, n)?;
    let mut r = Report::new("classify");
    r.line(format!("B_{n}: {}", yes(m.in_bn)));
    if let Some(i) = m.bn_failure {
        r.line(format!("  λ_{i} is not a homology equivalence"));
    }
    r.line(format!("A_{n}: {}", yes(m.in_an)));
    r.line(format!("reduced: {}", yes(m.reduced)));
    if let Some((i, d)) = m.reduced_failure {
        r.line(format!("  α_{i} is not surjective in degree {d}"));
    }
    r.field("membership", &m);
    Ok(r)
}

pub fn bn_local(file: &Path, opts: &Opts) -> Result<Report> {
    let x = load_d0(file)?;
    let n = opts.n.unwrap_or(1);
    let v = d0::check_bn_local(&x, n, SEQ)?;
    let mut r = Report::new("bn-local");
    for (m, ok) in &v.hom_acyclic {
        r.line(format!("m = {m}: Hom(g_m, C) acyclic: {}", yes(*ok)));
    }
    match v.failing_level {
        None => r.line(format!("B_{n}-local: levels 0..={n} contracted")),
        Some(i) => r.fail().line(format!("not B_{n}-local: level {i} is not contractible")),
    };
    r.field("verdict", &v);
    Ok(r)
}

pub fn an_local(file: &Path, opts: &Opts) -> Result<Report> {
    let x = load_d0(file)?;
    let n = opts.n.unwrap_or(1);
    let v = d0::check_an_local(&x, n, opts.bound, SEQ)?;
    let mut r = Report::new("an-local");
    for c in &v.checks {
        r.line(format!("m = {}: kernel equivalence {}, exact square {}", c.m, yes(c.kernel_equivalence), yes(c.exact_square)));
    }
    match v.failing_m {
        None => {
            r.line(format!("A_{n}-local ({:?} bound)", v.bound).to_lowercase());
        }
        Some(m) => {
            r.fail().line(format!("not A_{n}-local: failing m = {m}"));
            let c = v.checks.iter().find(|c| c.m == m).expect("failing index is among the checks");
            for (d, h) in &c.cone_homology {
                r.line(format!("  cone homology H_{d} = {}", group(x.ring(), h)));
            }
        }
    }
    r.field("verdict", &v);
    Ok(r)
}

pub fn factor(file: &Path, opts: &Opts) -> Result<Report> {
    let (d, c, f) = match load(file)? {
        Document::D0Map(d, c, f) => (d, c, f),
        doc => return Err(wrong(&doc, "a map of D0-complexes")),
    };
    let n = opts.n.unwrap_or(1);
    let fac = d0::factor_through_acyclic(&d, &c, &f, n)?;
    let composite = fac.from_e.compose(&fac.to_e)?;
    let witnessed = fac.contractions.iter().enumerate().all(|(i, k)| k.differential() == GradedMap::identity(fac.e.level(i).clone()));
    let mut r = Report::new("factor");
    r.line(format!("E: level ranks {:?}", fac.e.levels().iter().map(|l| l.total_rank()).collect::<Vec<_>>()));
    r.line(format!("composite equals f: {}", yes(composite == f)));
    r.line(format!("every level of E contracted: {}", yes(witnessed)));
    if composite != f || !witnessed {
        r.fail();
    }
    r.field("composite_equals_f", composite == f).field("levels_contracted", witnessed).field("e", d0_to_json(&fac.e));
    Ok(r)
}

fn map_degree_support(a: &GradedMap, b: &GradedMap) -> Result<Vec<i64>> {
    Ok(support(&a.sub(b)?))
}

pub fn tp_check(file: &Path, opts: &Opts) -> Result<Report> {
    let (data, _) = load_nil(file)?;
    let mut r = Report::new("tp-check");
    let Some(range) = data.t_range() else {
        r.line(format!("N = {}: no T_p defined", data.top())).field("checked", Vec::<usize>::new());
        return Ok(r);
    };
    let top = opts.max_n.unwrap_or(4).min(range);
    let mut checked = Vec::new();
    for p in 0..=top {
        let (lhs, rhs) = data.t_relation(p)?;
        let bad = map_degree_support(&lhs, &rhs)?;
        if bad.is_empty() {
            r.line(format!("p = {p}: dT_p = Σ T_i (T_j ⊗ 1)"));
        } else {
            r.fail().line(format!("p = {p}: relation fails in source degrees {bad:?}"));
        }
        checked.push(json!({ "p": p, "holds": bad.is_empty(), "zero": data.t_operator(p)?.is_zero() }));
    }
    r.field("checked", checked);
    Ok(r)
}

pub fn delta_check(file: &Path, opts: &Opts) -> Result<Report> {
    let (data, given) = load_nil(file)?;
    let mut r = Report::new("delta-check");
    let checks = data.identities()?;
    for c in checks.iter().filter(|c| !c.holds) {
        r.fail().line(format!("identity fails: {}", c.name));
    }
    r.line(format!("{} of {} splitting identities hold", checks.iter().filter(|c| c.holds).count(), checks.len()));

    let mut rng = fuzz::rng(opts.seed);
    let (a, k) = (data.total().clone(), data.k.clone());
    let mut maps: Vec<GradedMap> = given.into_iter().collect();
    for q in -1..=1 {
        maps.push(GradedMap::from_fn(a.clone(), k.clone(), q, |d| fuzz::random_matrix(&mut rng, a.ring(), k.rank(d + q), a.rank(d), 2))?);
    }
    let mut results = Vec::new();
    for f in &maps {
        let dd = data.delta_differential(&data.delta_differential(f)?)?.is_zero();
        let fhat = data.fhat_from_f(f)?;
        let mut recursion = true;
        for n in 0..data.top() {
            recursion &= data.fhat_recursion(f, &fhat, n)? == fhat.levels[n + 1];
        }
        let back = data.f_from_fhat(&fhat)? == *f;
        r.line(format!("degree {}: δδ = 0 {}, f̂ recursion {}, f̂ ↦ f {}", f.degree(), yes(dd), yes(recursion), yes(back)));
        if !(dd && recursion && back) {
            r.fail();
        }
        results.push(json!({ "degree": f.degree(), "delta_squared_zero": dd, "fhat_recursion": recursion, "fhat_inverse": back }));
    }
    r.field("identities", &checks).field("maps", results);
    Ok(r)
}

pub fn invert(file: &Path, _opts: &Opts) -> Result<Report> {
    let (data, f) = load_nil(file)?;
    let f = f.ok_or_else(|| anyhow!("{}: no \"map\" to invert", file.display()))?;
    let mut r = Report::new("invert");
    let df = data.delta_differential(&f)?;
    if !df.is_zero() {
        let bad = support(&df);
        r.fail().line(format!("F is not a δ-cycle: δF ≠ 0 in source degrees {bad:?}")).field("delta_cycle", false).field("failing_degrees", bad);
        return Ok(r);
    }
    let inv = data.invert_homotopy(&f, SEQ)?;
    r.line(format!("series up to p = {} with {} nonzero terms", inv.max_p, inv.terms)).line("δG = F");
    r.field("delta_cycle", true).field("max_p", inv.max_p).field("terms", inv.terms).field("signs", &inv.signs).field("g", map_json(&inv.g));
    Ok(r)
}

pub fn order(file: &Path, opts: &Opts) -> Result<Report> {
    let c = load_complex(file, opts)?;
    let o = localization::homology_order(&c)?;
    let mut r = Report::new("order");
    match &o.order {
        Some(n) => r.line(format!("order {n}")),
        None => r.line("infinite: free homology"),
    };
    r.field("report", &o);
    Ok(r)
}

pub fn annihilator(file: &Path, opts: &Opts) -> Result<Report> {
    let c = load_complex(file, opts)?;
    let a = localization::annihilator_exponent(&c, SEQ)?;
    let mut r = Report::new("annihilator");
    match (&a.exponent, &a.homology_exponent) {
        (Some(n), Some(e)) => r.line(format!("N = {n} (homology exponent {e})")),
        _ => r.fail().line("homology is infinite: no N·1 is null-homotopic"),
    };
    if let Some(h) = &a.witness {
        r.field("witness", map_json(h));
    }
    r.field("report", &a);
    Ok(r)
}

pub fn q_acyclic(file: &Path, opts: &Opts) -> Result<Report> {
    let c = load_complex(file, opts)?;
    let acyclic = localization::rational_acyclicity(&c)?;
    let mut r = Report::new("q-acyclic");
    if acyclic {
        r.line("acyclic over Q");
    } else {
        let q = c.to_ring(&Ring::Rationals)?;
        r.fail().line("not acyclic over Q");
        r.lines.extend(homology_lines(&Ring::Rationals, &ch::homology(&q)?));
    }
    r.field("acyclic", acyclic);
    Ok(r)
}

/// Failed invariants of one randomized instance.
fn fuzz_instance(seed: u64, ring: &Ring) -> dcx_core::Result<Vec<String>> {
    let mut rng = fuzz::rng(seed);
    let mut bad = Vec::new();
    let kinds: &[Piece] = if ring.is_field() { &[Piece::Free, Piece::Contractible] } else { &[Piece::Free, Piece::Multiply, Piece::Contractible] };

    let c = Arc::new(fuzz::random_complex(&mut rng, ring, 0, 2, 1 + (seed % 3) as usize, kinds)?);
    let (c2, iso) = fuzz::conjugate(&mut rng, &c)?;
    if ch::is_acyclic(&c)? != ch::is_contractible(&c)? {
        bad.push("acyclic ≠ contractible".into());
    }
    if ch::homology(&c)? != ch::homology(&c2)? {
        bad.push("homology changed under conjugation".into());
    }
    if !ch::is_acyclic(&ch::cone(&iso)?.complex)? {
        bad.push("cone of an isomorphism is not acyclic".into());
    }
    if *ring == Ring::Integers {
        if let Some(e) = localization::homology_exponent(&c)? {
            let a = localization::annihilator_exponent(&c, Execution::Sequential)?;
            let sandwiched = a.exponent.is_some_and(|n| n.is_multiple_of(&e) && (&e * &e).is_multiple_of(&n));
            if !sandwiched {
                bad.push("annihilator outside e | N | e²".into());
            }
        }
    }

    let top = 3;
    let spec = D0Spec { acyclic_through: (seed % 4) as usize, ..D0Spec::small(top) };
    let x = fuzz::random_reduced_d0(&mut rng, ring, &spec)?;
    let n = 1 + (seed % 3) as usize;
    let v = d0::check_bn_local(&x, n, Execution::Sequential)?;
    let direct = (0..=n).map(|i| ch::is_contractible(x.level(i))).collect::<dcx_core::Result<Vec<_>>>()?.into_iter().all(|b| b);
    if v.local != direct {
        bad.push(format!("B_{n}-locality disagrees with levelwise contractibility"));
    }

    let a = fuzz::random_reduced_d0(&mut rng, ring, &D0Spec { acyclic_through: top, pieces: 1, ..D0Spec::small(top) })?;
    let b = fuzz::random_twisted_target(&mut rng, ring, a.bimodule(), top, 0, 2, 1)?;
    let data = SplittingData::derive(&a, &b)?;
    if data.identities()?.iter().any(|c| !c.holds) {
        bad.push("splitting identity fails".into());
    }
    for p in 0..=1 {
        let (l, r) = data.t_relation(p)?;
        if l != r {
            bad.push(format!("T relation fails at p = {p}"));
        }
    }
    let (total, k) = (data.total().clone(), data.k.clone());
    let f = GradedMap::from_fn(total.clone(), k.clone(), 0, |d| fuzz::random_matrix(&mut rng, ring, k.rank(d), total.rank(d), 2))?;
    if !data.delta_differential(&data.delta_differential(&f)?)?.is_zero() {
        bad.push("δδ ≠ 0".into());
    }
    Ok(bad)
}

pub fn fuzz(opts: &Opts) -> Result<Report> {
    let count = opts.n.unwrap_or(20) as u64;
    let ring = opts.ring.clone().unwrap_or(Ring::Integers);
    if let Ring::IntegersMod(_) = ring {
        bail!("fuzz runs over Z or Q");
    }
    let seeds: Vec<u64> = (opts.seed..opts.seed + count).collect();
    let results = par::try_map(Execution::Parallel.effective(), &seeds, |&s| fuzz_instance(s, &ring).map(|b| (s, b)))?;
    let mut r = Report::new("fuzz");
    let mut failures = Vec::new();
    for (s, bad) in &results {
        for b in bad {
            r.fail().line(format!("seed {s}: {b}"));
            failures.push(json!({ "seed": s, "failure": b }));
        }
    }
    if failures.is_empty() {
        r.line(format!("{count} instances over {ring} from seed {}: all invariants hold", opts.seed));
    }
    r.field("instances", count).field("seed", opts.seed).field("failures", failures);
    Ok(r)
}
