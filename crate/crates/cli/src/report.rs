use dcx_core::chain::{GradedMap, HomologyGroup};
use dcx_core::linalg::Ring;
use serde_json::{Map, Value};

/// Verdict plus text and machine-readable details.
pub struct Report {
    pub verb: &'static str,
    pub holds: bool,
    pub lines: Vec<String>,
    pub fields: Map<String, Value>,
}

impl Report {
    pub fn new(verb: &'static str) -> Self {
        Report { verb, holds: true, lines: Vec::new(), fields: Map::new() }
    }

    pub fn line(&mut self, s: impl Into<String>) -> &mut Self {
        self.lines.push(s.into());
        self
    }

    pub fn field(&mut self, k: &str, v: impl serde::Serialize) -> &mut Self {
        self.fields.insert(k.into(), serde_json::to_value(v).expect("report fields are plain data"));
        self
    }

    pub fn fail(&mut self) -> &mut Self {
        self.holds = false;
        self
    }

    pub fn to_json(&self) -> Value {
        let mut m = Map::new();
        m.insert("verb".into(), self.verb.into());
        m.insert("holds".into(), self.holds.into());
        m.insert("exit".into(), (if self.holds { 0 } else { 1 }).into());
        m.extend(self.fields.clone());
        Value::Object(m)
    }
}

/// `Z^2 ⊕ Z/3`, `Q`, `(Z/4)^2 ⊕ Z/2`, or `0`.
pub fn group(ring: &Ring, h: &HomologyGroup) -> String {
    if h.is_zero() {
        return "0".into();
    }
    let base = match ring {
        Ring::IntegersMod(_) => format!("({ring})"),
        _ => ring.to_string(),
    };
    let mut parts = Vec::new();
    match h.betti {
        0 => {}
        1 => parts.push(ring.to_string()),
        b => parts.push(format!("{base}^{b}")),
    }
    parts.extend(h.torsion.iter().map(|t| format!("Z/{t}")));
    parts.join(" ⊕ ")
}

/// `H_n = …` for every nonzero group, or a single acyclicity line.
pub fn homology_lines(ring: &Ring, groups: &[(i64, HomologyGroup)]) -> Vec<String> {
    let lines: Vec<String> = groups.iter().filter(|(_, h)| !h.is_zero()).map(|(n, h)| format!("H_{n} = {}", group(ring, h))).collect();
    if lines.is_empty() {
        vec!["H_* = 0".into()]
    } else {
        lines
    }
}

pub fn homology_json(groups: &[(i64, HomologyGroup)]) -> Value {
    groups.iter().filter(|(_, h)| !h.is_zero()).map(|(n, h)| (n.to_string(), serde_json::to_value(h).expect("plain data"))).collect::<Map<_, _>>().into()
}

/// Source degrees where a graded map is nonzero.
pub fn support(f: &GradedMap) -> Vec<i64> {
    if f.src().is_zero() {
        return Vec::new();
    }
    f.src().degrees().filter(|&n| !f.block(n).is_zero()).collect()
}

pub fn map_json(f: &GradedMap) -> Value {
    serde_json::to_value(dcx_core::io::map_to_json(f)).expect("plain data")
}
