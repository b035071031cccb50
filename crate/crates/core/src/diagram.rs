//! Diagrams of bimodules, complexes over them, and homotopy nilpotency.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::chain::{
    direct_sum, find_null_homotopy, tensor_map_into, tensor_with_bimodule, Bimodule, ChainComplex, DirectSum,
    GradedMap,
};
use crate::error::{Error, Result};
use crate::linalg::Ring;
use crate::par::{self, Execution};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub bimodule: Bimodule,
    pub name: String,
}

/// Formal equality of two paths; edges listed in the order they are applied.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub lhs: Vec<usize>,
    pub rhs: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramOfBimodules {
    pub name: String,
    pub vertices: Vec<Ring>,
    pub edges: Vec<Edge>,
    pub relations: Vec<Relation>,
}

impl DiagramOfBimodules {
    pub fn new(name: &str, vertices: Vec<Ring>, edges: Vec<Edge>, relations: Vec<Relation>) -> Result<Self> {
        let d = DiagramOfBimodules { name: name.to_string(), vertices, edges, relations };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        for v in &self.vertices {
            v.validate()?;
        }
        for (k, e) in self.edges.iter().enumerate() {
            if e.from >= self.vertices.len() || e.to >= self.vertices.len() {
                return Err(Error::Diagram(format!("edge {k} has a missing endpoint")));
            }
            let ring = &self.vertices[e.from];
            if &self.vertices[e.to] != ring || &e.bimodule.ring != ring {
                return Err(Error::Diagram(format!("edge {k} mixes coefficient rings")));
            }
            e.bimodule.validate()?;
        }
        for (k, r) in self.relations.iter().enumerate() {
            let a = self.path_endpoints(&r.lhs)?;
            let b = self.path_endpoints(&r.rhs)?;
            if a != b || a.is_none() {
                return Err(Error::Diagram(format!("relation {k} compares paths with different endpoints")));
            }
            if self.path_bimodule(&r.lhs).rank != self.path_bimodule(&r.rhs).rank {
                return Err(Error::Diagram(format!("relation {k} compares different bimodules")));
            }
        }
        Ok(())
    }

    /// `(start, end)` of a nonempty composable path.
    pub fn path_endpoints(&self, path: &[usize]) -> Result<Option<(usize, usize)>> {
        let Some(&first) = path.first() else { return Ok(None) };
        let edge = |k: usize| self.edges.get(k).ok_or_else(|| Error::Diagram(format!("no edge {k}")));
        let start = edge(first)?.from;
        let mut at = start;
        for &k in path {
            let e = edge(k)?;
            if e.from != at {
                return Err(Error::Diagram(format!("path {path:?} is not composable at edge {k}")));
            }
            at = e.to;
        }
        Ok(Some((start, at)))
    }

    /// `S_{e_k} ⊗ … ⊗ S_{e_1}` for the path `e_1, …, e_k`.
    pub fn path_bimodule(&self, path: &[usize]) -> Bimodule {
        let ring = self.vertices.first().cloned().unwrap_or(Ring::Integers);
        path.iter().fold(Bimodule::free(&ring, 1), |acc, &k| self.edges[k].bimodule.tensor(&acc))
    }

    /// All composable paths with exactly `len` edges, in lexicographic order.
    pub fn paths(&self, len: usize) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        if len == 0 {
            return out;
        }
        let mut frontier: Vec<Vec<usize>> = (0..self.edges.len()).map(|k| vec![k]).collect();
        for _ in 1..len {
            let mut next = Vec::new();
            for p in &frontier {
                let at = self.edges[*p.last().unwrap()].to;
                for (k, e) in self.edges.iter().enumerate() {
                    if e.from == at {
                        let mut q = p.clone();
                        q.push(k);
                        next.push(q);
                    }
                }
            }
            frontier = next;
        }
        out.extend(frontier);
        out
    }

    pub fn d1(ring: &Ring, s: Bimodule) -> Result<Self> {
        Self::new("D1", vec![ring.clone()], vec![Edge { from: 0, to: 0, bimodule: s, name: "f".into() }], vec![])
    }

    /// Two vertices; `S: 0 → 1` then `T: 1 → 0`.
    pub fn d2(ring: &Ring, s: Bimodule, t: Bimodule) -> Result<Self> {
        Self::two_cycle("D2", ring, s, t)
    }

    /// Same shape as D2, read as `α: C_A → C_B ⊗ S`, `β: C_B → C_A ⊗ T`.
    pub fn d5(ring: &Ring, s: Bimodule, t: Bimodule) -> Result<Self> {
        Self::two_cycle("D5", ring, s, t)
    }

    fn two_cycle(name: &str, ring: &Ring, s: Bimodule, t: Bimodule) -> Result<Self> {
        Self::new(
            name,
            vec![ring.clone(), ring.clone()],
            vec![
                Edge { from: 0, to: 1, bimodule: s, name: "f".into() },
                Edge { from: 1, to: 0, bimodule: t, name: "g".into() },
            ],
            vec![],
        )
    }

    /// Loops `S` at 0 and `T` at 1, `U: 0 → 1`, `V: 1 → 0`.
    pub fn d3(ring: &Ring, s: Bimodule, u: Bimodule, v: Bimodule, t: Bimodule) -> Result<Self> {
        Self::new(
            "D3",
            vec![ring.clone(), ring.clone()],
            vec![
                Edge { from: 0, to: 0, bimodule: s, name: "h".into() },
                Edge { from: 0, to: 1, bimodule: u, name: "f".into() },
                Edge { from: 1, to: 0, bimodule: v, name: "g".into() },
                Edge { from: 1, to: 1, bimodule: t, name: "i".into() },
            ],
            vec![],
        )
    }

    /// Levels `0..=n`; edge `i` is `λ_i: i → i+1` (unit bimodule) and edge
    /// `n + i − 1` is `α_i: i → i−1` (bimodule `S`), with `α λ = λ α`.
    pub fn d0_truncated(ring: &Ring, n: usize, s: Bimodule) -> Result<Self> {
        if n == 0 {
            return Err(Error::Diagram("truncation level must be at least 1".into()));
        }
        let unit = Bimodule::free(ring, 1);
        let mut edges = Vec::new();
        for i in 0..n {
            edges.push(Edge { from: i, to: i + 1, bimodule: unit.clone(), name: format!("lambda{i}") });
        }
        for i in 1..=n {
            edges.push(Edge { from: i, to: i - 1, bimodule: s.clone(), name: format!("alpha{i}") });
        }
        let lambda = |i: usize| i;
        let alpha = |i: usize| n + i - 1;
        let relations =
            (1..n).map(|i| Relation { lhs: vec![lambda(i), alpha(i + 1)], rhs: vec![alpha(i), lambda(i - 1)] }).collect();
        Self::new(&format!("D0_truncated({n})"), vec![ring.clone(); n + 1], edges, relations)
    }
}

/// Representation of a diagram in chain complexes; edge `e: a → b` carries a
/// chain map `C_a → C_b ⊗ S_e`.
#[derive(Clone, Debug)]
pub struct DComplex {
    pub diagram: DiagramOfBimodules,
    pub complexes: Vec<Arc<ChainComplex>>,
    pub maps: Vec<GradedMap>,
}

impl DComplex {
    pub fn new(diagram: DiagramOfBimodules, complexes: Vec<Arc<ChainComplex>>, maps: Vec<GradedMap>) -> Result<Self> {
        diagram.validate()?;
        if complexes.len() != diagram.vertices.len() || maps.len() != diagram.edges.len() {
            return Err(Error::Diagram("one complex per vertex and one map per edge required".into()));
        }
        for (c, r) in complexes.iter().zip(&diagram.vertices) {
            if c.ring() != r {
                return Err(Error::RingMismatch(r.clone(), c.ring().clone()));
            }
        }
        let mut fixed = Vec::with_capacity(maps.len());
        for (k, (f, e)) in maps.iter().zip(&diagram.edges).enumerate() {
            let tgt = Arc::new(tensor_with_bimodule(&complexes[e.to], &e.bimodule)?);
            let f = f
                .retarget(&complexes[e.from], &tgt)
                .map_err(|_| Error::Diagram(format!("map on edge {k} has the wrong source or target")))?;
            if f.degree() != 0 {
                return Err(Error::Diagram(format!("map on edge {k} is not of degree 0")));
            }
            f.ensure_chain_map().map_err(|e| Error::Diagram(format!("edge {k}: {e}")))?;
            fixed.push(f);
        }
        let x = DComplex { diagram, complexes, maps: fixed };
        for (k, r) in x.diagram.relations.iter().enumerate() {
            let start = x.diagram.path_endpoints(&r.lhs)?.expect("validated").0;
            if x.path_composite(start, &r.lhs)? != x.path_composite(start, &r.rhs)? {
                return Err(Error::Diagram(format!("relation {k} does not hold")));
            }
        }
        Ok(x)
    }

    pub fn ring(&self) -> &Ring {
        &self.diagram.vertices[0]
    }

    /// Composite along `path` starting at `start`: each new edge map is
    /// tensored with the identity of the factors accumulated so far, giving
    /// `C_start → C_end ⊗ (S_{e_k} ⊗ … ⊗ S_{e_1})`.
    pub fn path_composite(&self, start: usize, path: &[usize]) -> Result<GradedMap> {
        if start >= self.complexes.len() {
            return Err(Error::Diagram(format!("no vertex {start}")));
        }
        let ring = self.ring().clone();
        let mut acc = Bimodule::free(&ring, 1);
        let mut at = start;
        let mut total = GradedMap::identity(self.complexes[start].clone());
        for &k in path {
            let e = self.diagram.edges.get(k).ok_or_else(|| Error::Diagram(format!("no edge {k}")))?;
            if e.from != at {
                return Err(Error::Diagram(format!("path {path:?} is not composable at edge {k}")));
            }
            let next_acc = e.bimodule.tensor(&acc);
            let tgt = Arc::new(tensor_with_bimodule(&self.complexes[e.to], &next_acc)?);
            let step = tensor_map_into(&self.maps[k], &acc, total.tgt(), &tgt)?;
            total = step.compose(&total)?;
            acc = next_acc;
            at = e.to;
        }
        Ok(total)
    }

    /// Is every composite of exactly `len` edges null-homotopic?
    pub fn all_paths_null(&self, len: usize, exec: Execution) -> Result<bool> {
        let paths = self.diagram.paths(len);
        let verdicts = par::try_map(exec, &paths, |p| {
            let start = self.diagram.edges[p[0]].from;
            let f = self.path_composite(start, p)?;
            if f.is_zero() {
                return Ok(true);
            }
            Ok::<_, Error>(find_null_homotopy(&f)?.is_some())
        })?;
        Ok(verdicts.into_iter().all(|v| v))
    }

    /// Smallest `n ≤ max_n` such that every composite of `n + 1` edges is
    /// null-homotopic.
    pub fn nilpotency_degree(&self, max_n: usize, exec: Execution) -> Result<Option<usize>> {
        for n in 0..=max_n {
            if self.all_paths_null(n + 1, exec)? {
                return Ok(Some(n));
            }
        }
        Ok(None)
    }

    /// Vertexwise direct sum over the same diagram.
    pub fn direct_sum(&self, other: &DComplex) -> Result<DComplex> {
        if self.diagram != other.diagram {
            return Err(Error::Diagram("direct sum of complexes over different diagrams".into()));
        }
        let sums: Vec<DirectSum> = self
            .complexes
            .iter()
            .zip(&other.complexes)
            .map(|(a, b)| direct_sum(&[a.clone(), b.clone()]))
            .collect::<Result<_>>()?;
        let mut maps = Vec::new();
        for (k, e) in self.diagram.edges.iter().enumerate() {
            let tgt = Arc::new(tensor_with_bimodule(&sums[e.to].complex, &e.bimodule)?);
            let mut total = GradedMap::zero(sums[e.from].complex.clone(), tgt.clone(), 0);
            for (side, f) in [&self.maps[k], &other.maps[k]].into_iter().enumerate() {
                let inc = &sums[e.to].inclusions[side];
                let inc_t = tensor_map_into(inc, &e.bimodule, f.tgt(), &tgt)?;
                let term = inc_t.compose(f)?.compose(&sums[e.from].projections[side])?;
                total = total.add(&term)?;
            }
            maps.push(total);
        }
        DComplex::new(self.diagram.clone(), sums.into_iter().map(|s| s.complex).collect(), maps)
    }

    /// A two-cycle complex `(C_A, C_B; f, g)` viewed as the loop `(f ⊗ 1) ∘ g`
    /// at `C_B`, over the bimodule `S ⊗ T`.
    pub fn collapse_d2_to_d1(&self) -> Result<DComplex> {
        let d = &self.diagram;
        let shape_ok = d.vertices.len() == 2
            && d.edges.len() == 2
            && (d.edges[0].from, d.edges[0].to) == (0, 1)
            && (d.edges[1].from, d.edges[1].to) == (1, 0);
        if !shape_ok {
            return Err(Error::Diagram("collapse needs a two-vertex cycle diagram".into()));
        }
        let loop_map = self.path_composite(1, &[1, 0])?;
        let bimodule = d.path_bimodule(&[1, 0]);
        let d1 = DiagramOfBimodules::d1(self.ring(), bimodule)?;
        DComplex::new(d1, vec![self.complexes[1].clone()], vec![loop_map])
    }
}
