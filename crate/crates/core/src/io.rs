//! JSON formats. Degrees are object keys; matrix entries are decimal strings
//! on output and strings or JSON integers on input.
//!
//! Complex: `{"ring": "Z", "ranks": {"0": 1, "1": 1}, "differentials": {"1": [["2"]]}}`
//! where the key of a differential is its source degree. Graded map blocks are
//! keyed the same way. Absent blocks are zero.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::chain::{tensor_with_bimodule, Bimodule, ChainComplex, GradedMap, Twist};
use crate::d0::{D0Complex, D0Map};
use crate::diagram::{DComplex, DiagramOfBimodules};
use crate::error::{Error, Result};
use crate::linalg::{big, parse_scalar, Matrix, Ring, Scalar};
use crate::nil::SplittingData;

pub(crate) fn ser_bigints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

pub type MatrixJson = Vec<Vec<Value>>;
pub type BlocksJson = BTreeMap<String, MatrixJson>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComplexJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ring: Option<String>,
    #[serde(default)]
    pub ranks: BTreeMap<String, usize>,
    #[serde(default)]
    pub differentials: BlocksJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BimoduleJson {
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twists: Option<Vec<Twist>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct D0Json {
    pub ring: String,
    pub bimodule: BimoduleJson,
    pub top: usize,
    pub stabilization: usize,
    /// Levels `0..=top`.
    pub levels: Vec<ComplexJson>,
    /// `lambda[i] = λ_i`.
    pub lambda: Vec<BlocksJson>,
    /// `alpha[i − 1] = α_i`.
    pub alpha: Vec<BlocksJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DiagramJson {
    Full(DiagramOfBimodules),
    Builtin {
        builtin: String,
        ring: String,
        bimodules: Vec<BimoduleJson>,
        #[serde(default)]
        n: Option<usize>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DComplexJson {
    pub diagram: DiagramJson,
    pub complexes: Vec<ComplexJson>,
    pub maps: Vec<BlocksJson>,
}

/// A graded map between two complexes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MapJson {
    pub source: ComplexJson,
    pub target: ComplexJson,
    #[serde(default)]
    pub degree: i64,
    #[serde(default)]
    pub blocks: BlocksJson,
}

/// A map of `𝒟₀`-complexes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct D0MapJson {
    pub source: D0Json,
    pub target: D0Json,
    #[serde(default)]
    pub degree: i64,
    pub levels: Vec<BlocksJson>,
}

/// A test object, a reduced target and optionally a map `A_N → K`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NilJson {
    pub test_object: D0Json,
    pub target: D0Json,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<BlocksJson>,
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{path}: {m}")),
        e @ Error::At { .. } => e,
        other => Error::At { path: path.to_string(), inner: Box::new(other) },
    }
}

fn parse_degree(key: &str, path: &str) -> Result<i64> {
    key.trim().parse().map_err(|_| Error::Parse(format!("{path}: key '{key}' is not a degree")))
}

pub fn scalar_from_json(ring: &Ring, v: &Value) -> Result<Scalar> {
    let x = match v {
        Value::Number(n) => match (n.as_i64(), n.as_u64()) {
            (Some(i), _) => big(BigInt::from(i)),
            (_, Some(u)) => big(BigInt::from(u)),
            _ => return Err(Error::Parse(format!("{n} is not an exact integer; write fractions as strings"))),
        },
        Value::String(s) => parse_scalar(s)?,
        other => return Err(Error::Parse(format!("expected a number or a string, found {other}"))),
    };
    ring.element(x)
}

pub fn scalar_to_json(x: &Scalar) -> Value {
    if x.is_integer() {
        Value::String(x.numer().to_string())
    } else {
        Value::String(format!("{}/{}", x.numer(), x.denom()))
    }
}

pub fn matrix_from_json(ring: &Ring, m: &MatrixJson, rows: usize, cols: usize, path: &str) -> Result<Matrix> {
    if rows * cols == 0 && m.iter().all(|r| r.is_empty()) {
        return Ok(Matrix::zeros(ring, rows, cols));
    }
    if m.len() != rows {
        return Err(Error::Parse(format!("{path}: expected {rows} rows, found {}", m.len())));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, row) in m.iter().enumerate() {
        if row.len() != cols {
            return Err(Error::Parse(format!("{path}[{i}]: expected {cols} entries, found {}", row.len())));
        }
        for (j, v) in row.iter().enumerate() {
            data.push(scalar_from_json(ring, v).map_err(|e| at(&format!("{path}[{i}][{j}]"), e))?);
        }
    }
    Matrix::new(ring.clone(), rows, cols, data)
}

pub fn matrix_to_json(m: &Matrix) -> MatrixJson {
    (0..m.rows()).map(|i| m.row(i).iter().map(scalar_to_json).collect()).collect()
}

pub fn parse_ring(s: &str, path: &str) -> Result<Ring> {
    s.parse().map_err(|e| at(path, e))
}

pub fn complex_from_json(j: &ComplexJson, default_ring: Option<&Ring>, path: &str) -> Result<ChainComplex> {
    let ring = match (&j.ring, default_ring) {
        (Some(r), _) => parse_ring(r, &format!("{path}.ring"))?,
        (None, Some(r)) => r.clone(),
        (None, None) => return Err(Error::Parse(format!("{path}: missing \"ring\""))),
    };
    let mut ranks = BTreeMap::new();
    for (k, r) in &j.ranks {
        ranks.insert(parse_degree(k, &format!("{path}.ranks"))?, *r);
    }
    let (Some(&lo), Some(&hi)) = (ranks.keys().next(), ranks.keys().next_back()) else {
        if !j.differentials.is_empty() {
            return Err(Error::Parse(format!("{path}: differentials given for a complex with no ranks")));
        }
        return Ok(ChainComplex::zero(&ring));
    };
    let rank = |n: i64| ranks.get(&n).copied().unwrap_or(0);
    let mut diffs: BTreeMap<i64, Matrix> = BTreeMap::new();
    for (k, m) in &j.differentials {
        let p = format!("{path}.differentials.{k}");
        let n = parse_degree(k, &p)?;
        if n <= lo || n > hi {
            return Err(Error::Parse(format!("{p}: degree {n} has no target inside the ranks")));
        }
        diffs.insert(n, matrix_from_json(&ring, m, rank(n - 1), rank(n), &p)?);
    }
    let all_ranks = (lo..=hi).map(rank).collect();
    let ds = (lo + 1..=hi).map(|n| diffs.remove(&n).unwrap_or_else(|| Matrix::zeros(&ring, rank(n - 1), rank(n)))).collect();
    ChainComplex::new(&ring, lo, all_ranks, ds).map_err(|e| at(path, e))
}

pub fn complex_to_json(c: &ChainComplex, with_ring: bool) -> ComplexJson {
    let ranks = c.degrees().filter(|_| !c.is_zero()).map(|n| (n.to_string(), c.rank(n))).collect();
    let differentials = if c.is_zero() {
        BTreeMap::new()
    } else {
        (c.lo() + 1..=c.hi()).map(|n| (n.to_string(), matrix_to_json(&c.d(n)))).collect()
    };
    ComplexJson { ring: with_ring.then(|| c.ring().to_string()), ranks, differentials }
}

pub fn map_from_json(blocks: &BlocksJson, src: &Arc<ChainComplex>, tgt: &Arc<ChainComplex>, degree: i64, path: &str) -> Result<GradedMap> {
    let ring = src.ring().clone();
    let mut given: BTreeMap<i64, Matrix> = BTreeMap::new();
    for (k, m) in blocks {
        let p = format!("{path}.{k}");
        let n = parse_degree(k, &p)?;
        if src.is_zero() || n < src.lo() || n > src.hi() {
            return Err(Error::Parse(format!("{p}: degree {n} is outside the source")));
        }
        given.insert(n, matrix_from_json(&ring, m, tgt.rank(n + degree), src.rank(n), &p)?);
    }
    GradedMap::from_fn(src.clone(), tgt.clone(), degree, |n| given.remove(&n).unwrap_or_else(|| Matrix::zeros(&ring, tgt.rank(n + degree), src.rank(n))))
        .map_err(|e| at(path, e))
}

pub fn map_to_json(f: &GradedMap) -> BlocksJson {
    let src = f.src();
    if src.is_zero() {
        return BTreeMap::new();
    }
    src.degrees().map(|n| (n.to_string(), matrix_to_json(&f.block(n)))).filter(|(_, m)| !m.is_empty()).collect()
}

fn bimodule_from_json(ring: &Ring, b: &BimoduleJson, path: &str) -> Result<Bimodule> {
    match &b.twists {
        None => Ok(Bimodule::free(ring, b.rank)),
        Some(t) if t.len() != b.rank => Err(Error::Parse(format!("{path}: rank {} but {} twists", b.rank, t.len()))),
        Some(t) => Bimodule::new(ring, t.clone()).map_err(|e| at(path, e)),
    }
}

fn bimodule_to_json(b: &Bimodule) -> BimoduleJson {
    let plain = b.twists.iter().all(|t| *t == Twist::Identity);
    BimoduleJson { rank: b.rank, twists: (!plain).then(|| b.twists.clone()) }
}

pub fn d0_from_json(j: &D0Json, path: &str) -> Result<D0Complex> {
    let ring = parse_ring(&j.ring, &format!("{path}.ring"))?;
    let s = bimodule_from_json(&ring, &j.bimodule, &format!("{path}.bimodule"))?;
    if j.levels.len() != j.top + 1 || j.lambda.len() != j.top || j.alpha.len() != j.top {
        return Err(Error::Parse(format!("{path}: top = {} needs {} levels and {} λ and α maps", j.top, j.top + 1, j.top)));
    }
    let levels: Vec<Arc<ChainComplex>> = j
        .levels
        .iter()
        .enumerate()
        .map(|(i, c)| complex_from_json(c, Some(&ring), &format!("{path}.levels[{i}]")).map(Arc::new))
        .collect::<Result<_>>()?;
    let lambda = (0..j.top).map(|i| map_from_json(&j.lambda[i], &levels[i], &levels[i + 1], 0, &format!("{path}.lambda[{i}]"))).collect::<Result<Vec<_>>>()?;
    let alpha = (1..=j.top)
        .map(|i| {
            let t = Arc::new(tensor_with_bimodule(&levels[i - 1], &s)?);
            map_from_json(&j.alpha[i - 1], &levels[i], &t, 0, &format!("{path}.alpha[{}]", i - 1))
        })
        .collect::<Result<Vec<_>>>()?;
    D0Complex::new(s, levels, lambda, alpha, j.stabilization).map_err(|e| at(path, e))
}

pub fn d0_to_json(x: &D0Complex) -> D0Json {
    D0Json {
        ring: x.ring().to_string(),
        bimodule: bimodule_to_json(x.bimodule()),
        top: x.top(),
        stabilization: x.stabilization(),
        levels: x.levels().iter().map(|c| complex_to_json(c, false)).collect(),
        lambda: (0..x.top()).map(|i| map_to_json(x.lambda(i))).collect(),
        alpha: (1..=x.top()).map(|i| map_to_json(x.alpha(i))).collect(),
    }
}

fn diagram_from_json(j: &DiagramJson, path: &str) -> Result<DiagramOfBimodules> {
    match j {
        DiagramJson::Full(d) => {
            d.validate().map_err(|e| at(path, e))?;
            Ok(d.clone())
        }
        DiagramJson::Builtin { builtin, ring, bimodules, n } => {
            let ring = parse_ring(ring, &format!("{path}.ring"))?;
            let bs = bimodules
                .iter()
                .enumerate()
                .map(|(k, b)| bimodule_from_json(&ring, b, &format!("{path}.bimodules[{k}]")))
                .collect::<Result<Vec<_>>>()?;
            let need = |k: usize| {
                if bs.len() == k {
                    Ok(())
                } else {
                    Err(Error::Parse(format!("{path}: diagram {builtin} takes {k} bimodules, got {}", bs.len())))
                }
            };
            let d = match builtin.to_ascii_lowercase().as_str() {
                "d1" => need(1).and_then(|_| DiagramOfBimodules::d1(&ring, bs[0].clone())),
                "d2" => need(2).and_then(|_| DiagramOfBimodules::d2(&ring, bs[0].clone(), bs[1].clone())),
                "d5" => need(2).and_then(|_| DiagramOfBimodules::d5(&ring, bs[0].clone(), bs[1].clone())),
                "d3" => need(4).and_then(|_| DiagramOfBimodules::d3(&ring, bs[0].clone(), bs[1].clone(), bs[2].clone(), bs[3].clone())),
                "d0" => {
                    let n = n.ok_or_else(|| Error::Parse(format!("{path}: diagram d0 needs \"n\"")))?;
                    need(1).and_then(|_| DiagramOfBimodules::d0_truncated(&ring, n, bs[0].clone()))
                }
                other => return Err(Error::Parse(format!("{path}.builtin: unknown diagram '{other}' (d0, d1, d2, d3 or d5)"))),
            };
            d.map_err(|e| at(path, e))
        }
    }
}

pub fn dcomplex_from_json(j: &DComplexJson, path: &str) -> Result<DComplex> {
    let diagram = diagram_from_json(&j.diagram, &format!("{path}.diagram"))?;
    if j.complexes.len() != diagram.vertices.len() || j.maps.len() != diagram.edges.len() {
        return Err(Error::Parse(format!(
            "{path}: diagram has {} vertices and {} edges, file has {} complexes and {} maps",
            diagram.vertices.len(),
            diagram.edges.len(),
            j.complexes.len(),
            j.maps.len()
        )));
    }
    let complexes: Vec<Arc<ChainComplex>> = j
        .complexes
        .iter()
        .zip(&diagram.vertices)
        .enumerate()
        .map(|(v, (c, r))| complex_from_json(c, Some(r), &format!("{path}.complexes[{v}]")).map(Arc::new))
        .collect::<Result<_>>()?;
    let maps = diagram
        .edges
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let t = Arc::new(tensor_with_bimodule(&complexes[e.to], &e.bimodule)?);
            map_from_json(&j.maps[k], &complexes[e.from], &t, 0, &format!("{path}.maps[{k}]"))
        })
        .collect::<Result<Vec<_>>>()?;
    DComplex::new(diagram, complexes, maps).map_err(|e| at(path, e))
}

pub fn dcomplex_to_json(x: &DComplex) -> DComplexJson {
    DComplexJson {
        diagram: DiagramJson::Full(x.diagram.clone()),
        complexes: x.complexes.iter().map(|c| complex_to_json(c, false)).collect(),
        maps: x.maps.iter().map(map_to_json).collect(),
    }
}

pub fn graded_map_from_json(j: &MapJson, path: &str) -> Result<GradedMap> {
    let src = Arc::new(complex_from_json(&j.source, None, &format!("{path}.source"))?);
    let tgt = Arc::new(complex_from_json(&j.target, Some(src.ring()), &format!("{path}.target"))?);
    map_from_json(&j.blocks, &src, &tgt, j.degree, &format!("{path}.blocks"))
}

pub fn graded_map_to_json(f: &GradedMap) -> MapJson {
    MapJson { source: complex_to_json(f.src(), true), target: complex_to_json(f.tgt(), true), degree: f.degree(), blocks: map_to_json(f) }
}

pub fn d0_map_from_json(j: &D0MapJson, path: &str) -> Result<(D0Complex, D0Complex, D0Map)> {
    let src = d0_from_json(&j.source, &format!("{path}.source"))?;
    let tgt = d0_from_json(&j.target, &format!("{path}.target"))?;
    if j.levels.len() != src.top() + 1 {
        return Err(Error::Parse(format!("{path}.levels: expected {} levels", src.top() + 1)));
    }
    let levels = j
        .levels
        .iter()
        .enumerate()
        .map(|(i, b)| map_from_json(b, src.level(i), tgt.level(i), j.degree, &format!("{path}.levels[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let f = D0Map::new(&src, &tgt, levels).map_err(|e| at(path, e))?;
    Ok((src, tgt, f))
}

pub fn d0_map_to_json(src: &D0Complex, tgt: &D0Complex, f: &D0Map) -> D0MapJson {
    D0MapJson { source: d0_to_json(src), target: d0_to_json(tgt), degree: f.degree, levels: f.levels.iter().map(map_to_json).collect() }
}

/// Splitting data with the optional map `F : A_N → K`.
pub fn nil_from_json(j: &NilJson, path: &str) -> Result<(SplittingData, Option<GradedMap>)> {
    let a = d0_from_json(&j.test_object, &format!("{path}.test_object"))?;
    let b = d0_from_json(&j.target, &format!("{path}.target"))?;
    let data = SplittingData::derive(&a, &b).map_err(|e| at(path, e))?;
    let f = match &j.map {
        None => None,
        Some(blocks) => Some(map_from_json(blocks, data.total(), &data.k, j.degree.unwrap_or(0), &format!("{path}.map"))?),
    };
    Ok((data, f))
}

pub fn nil_to_json(a: &D0Complex, b: &D0Complex, f: Option<&GradedMap>) -> NilJson {
    NilJson { test_object: d0_to_json(a), target: d0_to_json(b), degree: f.map(|f| f.degree()), map: f.map(map_to_json) }
}

/// Every matrix family of the splitting data, for debugging reports.
pub fn splitting_dump(data: &SplittingData) -> Value {
    let fam = |v: &[GradedMap]| Value::Array(v.iter().map(|f| serde_json::to_value(map_to_json(f)).expect("plain data")).collect());
    let t: Vec<GradedMap> = data.t_range().map(|m| (0..=m).filter_map(|p| data.t_operator(p).ok()).collect()).unwrap_or_default();
    serde_json::json!({
        "kernel": complex_to_json(&data.k, true),
        "quotients": data.quotients.iter().map(|c| complex_to_json(c, false)).collect::<Vec<_>>(),
        "u": fam(&data.u),
        "pi": fam(&data.pi),
        "v": fam(&data.v),
        "phi": fam(&data.phi),
        "j": fam(&data.j),
        "theta": fam(&data.theta),
        "sigma": fam(&data.sigma),
        "delta": fam(&data.delta),
        "t": fam(&t),
    })
}

/// A parsed input file of any supported kind.
#[derive(Clone, Debug)]
pub enum Document {
    Complex(ChainComplex),
    Map(GradedMap),
    D0(D0Complex),
    D0Map(D0Complex, D0Complex, D0Map),
    DComplex(DComplex),
    Nil(Box<SplittingData>, Option<GradedMap>),
}

fn from_value<T: for<'de> Deserialize<'de>>(v: Value) -> Result<T> {
    serde_json::from_value(v).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a document, recognizing its kind from the top-level keys.
pub fn parse_document(text: &str) -> Result<Document> {
    let v: Value = serde_json::from_str(text).map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))?;
    let Value::Object(obj) = &v else {
        return Err(Error::Parse("$: expected a JSON object".into()));
    };
    let has = |k: &str| obj.contains_key(k);
    if has("test_object") {
        let (d, f) = nil_from_json(&from_value(v)?, "$")?;
        Ok(Document::Nil(Box::new(d), f))
    } else if has("diagram") {
        Ok(Document::DComplex(dcomplex_from_json(&from_value(v)?, "$")?))
    } else if has("levels") && has("source") {
        let (a, b, f) = d0_map_from_json(&from_value(v)?, "$")?;
        Ok(Document::D0Map(a, b, f))
    } else if has("levels") {
        Ok(Document::D0(d0_from_json(&from_value(v)?, "$")?))
    } else if has("source") {
        Ok(Document::Map(graded_map_from_json(&from_value(v)?, "$")?))
    } else if has("ranks") || has("ring") {
        Ok(Document::Complex(complex_from_json(&from_value(v)?, None, "$")?))
    } else {
        Err(Error::Parse("$: unrecognized document (expected a complex, map, D-complex or D0-complex)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuzz::{random_reduced_d0, rng, D0Spec};

    #[test]
    fn moore_complex_parses_from_numbers_and_strings() {
        let a = r#"{"ring": "Z", "ranks": {"0": 1, "1": 1}, "differentials": {"1": [[2]]}}"#;
        let b = r#"{"ring": "Z", "ranks": {"0": 1, "1": 1}, "differentials": {"1": [["2"]]}}"#;
        let (Document::Complex(x), Document::Complex(y)) = (parse_document(a).unwrap(), parse_document(b).unwrap()) else { panic!() };
        assert_eq!(x, y);
        assert_eq!(x.d(1), Matrix::from_i64(&Ring::Integers, &[&[2]]));
    }

    #[test]
    fn errors_carry_locations() {
        let bad = r#"{"ring": "Z", "ranks": {"0": 1, "1": 2}, "differentials": {"1": [[1, "x"]]}}"#;
        let msg = parse_document(bad).unwrap_err().to_string();
        assert!(msg.contains("$.differentials.1[0][1]"), "{msg}");
        let msg = parse_document("{\"ring\": ").unwrap_err().to_string();
        assert!(msg.contains("line 1"), "{msg}");
        let half = r#"{"ring": "Z", "ranks": {"0": 1}, "differentials": {}, "x": 1}"#;
        assert!(parse_document(half).is_ok());
        let frac = r#"{"ring": "Z", "ranks": {"0": 1, "1": 1}, "differentials": {"1": [["1/2"]]}}"#;
        assert!(parse_document(frac).is_err());
    }

    #[test]
    fn d0_round_trip() {
        let mut r = rng(4);
        let x = random_reduced_d0(&mut r, &Ring::Integers, &D0Spec::small(3)).unwrap();
        let text = serde_json::to_string(&d0_to_json(&x)).unwrap();
        let Document::D0(y) = parse_document(&text).unwrap() else { panic!() };
        assert_eq!(y.levels(), x.levels());
        assert_eq!(y.stabilization(), x.stabilization());
        for i in 1..=3 {
            assert_eq!(y.alpha(i), x.alpha(i));
        }
    }

    #[test]
    fn builtin_diagram_loads() {
        let text = r#"{"diagram": {"builtin": "d1", "ring": "Z", "bimodules": [{"rank": 1}]},
            "complexes": [{"ranks": {"0": 2}}], "maps": [{"0": [["0", "1"], ["0", "0"]]}]}"#;
        let Document::DComplex(x) = parse_document(text).unwrap() else { panic!() };
        let back = serde_json::to_string(&dcomplex_to_json(&x)).unwrap();
        let Document::DComplex(y) = parse_document(&back).unwrap() else { panic!() };
        assert_eq!(x.maps, y.maps);
    }
}
