//! Finite compact metric graphs, edge-end slots, grid functions and traces.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{C64, CVec, ZERO};

/// Compare ids so that embedded digit runs sort numerically ("v2" < "v10").
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return a.cmp(b),
            (None, Some(_)) => return Ordering::Less,
            (Some(_), None) => return Ordering::Greater,
            (Some(c), Some(d)) if c.is_ascii_digit() && d.is_ascii_digit() => {
                let lx = x.iter().take_while(|c| c.is_ascii_digit()).count();
                let ly = y.iter().take_while(|c| c.is_ascii_digit()).count();
                let nx = trim_zeros(&x[..lx]);
                let ny = trim_zeros(&y[..ly]);
                let ord = nx.len().cmp(&ny.len()).then_with(|| nx.cmp(ny));
                if ord != Ordering::Equal {
                    return ord;
                }
                x = &x[lx..];
                y = &y[ly..];
            }
            (Some(c), Some(d)) => {
                if c != d {
                    return c.cmp(d);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

fn trim_zeros(s: &[u8]) -> &[u8] {
    let k = s.iter().take_while(|&&c| c == b'0').count();
    &s[k.min(s.len().saturating_sub(1))..]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum End {
    /// Initial vertex, coordinate x = 0.
    Minus,
    /// Terminal vertex, coordinate x = length.
    Plus,
}

impl End {
    pub fn sign(self) -> f64 {
        match self {
            End::Minus => -1.0,
            End::Plus => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Slot {
    pub vertex: usize,
    pub edge: usize,
    pub end: End,
}

/// Ordering of the `2|E|` edge-end slots of the total vertex space.
#[derive(Debug, Clone, PartialEq)]
pub struct VertexSlotIndex {
    slots: Vec<Slot>,
    ranges: Vec<Range<usize>>,
    by_edge: Vec<[usize; 2]>,
}

impl VertexSlotIndex {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot(&self, k: usize) -> Slot {
        self.slots[k]
    }

    /// Contiguous slot range of a vertex.
    pub fn vertex_range(&self, v: usize) -> Range<usize> {
        self.ranges[v].clone()
    }

    pub fn slot_of(&self, edge: usize, end: End) -> usize {
        match end {
            End::Minus => self.by_edge[edge][0],
            End::Plus => self.by_edge[edge][1],
        }
    }
}

/// A validated metric graph. Vertices and edges are kept in ascending
/// (natural) id order; indices below refer to that order.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    ends: Vec<(usize, usize)>,
    degree: Vec<usize>,
    slots: VertexSlotIndex,
}

impl MetricGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let mut vertices = vertices;
        vertices.sort_by(|a, b| natural_cmp(a, b));
        for w in vertices.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {:?}", w[0])));
            }
        }
        let mut edges = edges;
        edges.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        for w in edges.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::InvalidGraph(format!("duplicate edge id {:?}", w[0].id)));
            }
        }
        let index: HashMap<&str, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut ends = Vec::with_capacity(edges.len());
        for e in &edges {
            if !(e.length > 0.0 && e.length.is_finite()) {
                return Err(Error::InvalidGraph(format!(
                    "edge {:?} has length {} (must be positive and finite)",
                    e.id, e.length
                )));
            }
            let f = *index.get(e.from.as_str()).ok_or_else(|| {
                Error::InvalidGraph(format!("edge {:?} starts at unknown vertex {:?}", e.id, e.from))
            })?;
            let t = *index.get(e.to.as_str()).ok_or_else(|| {
                Error::InvalidGraph(format!("edge {:?} ends at unknown vertex {:?}", e.id, e.to))
            })?;
            ends.push((f, t));
        }
        let mut per_vertex: Vec<Vec<Slot>> = vec![Vec::new(); vertices.len()];
        for (k, &(f, t)) in ends.iter().enumerate() {
            per_vertex[f].push(Slot { vertex: f, edge: k, end: End::Minus });
            per_vertex[t].push(Slot { vertex: t, edge: k, end: End::Plus });
        }
        let degree = per_vertex.iter().map(|s| s.len()).collect();
        let mut slots = Vec::with_capacity(2 * edges.len());
        let mut ranges = Vec::with_capacity(vertices.len());
        let mut by_edge = vec![[0usize; 2]; edges.len()];
        for list in per_vertex {
            let start = slots.len();
            // edges were pushed in ascending order with Minus before Plus
            for s in list {
                let k = slots.len();
                match s.end {
                    End::Minus => by_edge[s.edge][0] = k,
                    End::Plus => by_edge[s.edge][1] = k,
                }
                slots.push(s);
            }
            ranges.push(start..slots.len());
        }
        Ok(MetricGraph {
            vertices,
            edges,
            ends,
            degree,
            slots: VertexSlotIndex { slots, ranges, by_edge },
        })
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    /// (initial, terminal) vertex indices of an edge.
    pub fn endpoints(&self, edge: usize) -> (usize, usize) {
        self.ends[edge]
    }

    pub fn length(&self, edge: usize) -> f64 {
        self.edges[edge].length
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degree[v]
    }

    pub fn slots(&self) -> &VertexSlotIndex {
        &self.slots
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    /// Same graph with the given edges reversed.
    pub fn reoriented(&self, flip: &[bool]) -> MetricGraph {
        let edges = self
            .edges
            .iter()
            .zip(flip)
            .map(|(e, &f)| {
                let mut e = e.clone();
                if f {
                    std::mem::swap(&mut e.from, &mut e.to);
                }
                e
            })
            .collect();
        MetricGraph::new(self.vertices.clone(), edges).expect("reorientation keeps validity")
    }
}

/// Values and signed normal derivatives at every edge-end slot.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryTrace {
    pub values: CVec,
    /// `-psi'(0)` at initial ends and `+psi'(length)` at terminal ends.
    pub derivs: CVec,
}

impl BoundaryTrace {
    pub fn zeros(n: usize) -> Self {
        BoundaryTrace { values: CVec::zeros(n), derivs: CVec::zeros(n) }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Values with sign -1 at initial ends.
    pub fn oriented_values(&self, g: &MetricGraph) -> CVec {
        CVec::from_iterator(
            self.values.len(),
            g.slots().slots().iter().zip(self.values.iter()).map(|(s, v)| v * s.end.sign()),
        )
    }
}

/// Nodal values on a uniform grid per edge; node `j` sits at `j * length / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub values: Vec<Vec<C64>>,
}

impl GridFunction {
    pub fn from_fn(g: &MetricGraph, n: &[usize], f: impl Fn(usize, f64) -> C64) -> Result<Self> {
        if n.len() != g.edge_count() {
            return Err(Error::GridMismatch(format!(
                "{} grid sizes for {} edges",
                n.len(),
                g.edge_count()
            )));
        }
        let mut values = Vec::with_capacity(n.len());
        for (e, &ne) in n.iter().enumerate() {
            if ne < 2 {
                return Err(Error::GridMismatch(format!("edge {e} has {ne} elements (need >= 2)")));
            }
            let h = g.length(e) / ne as f64;
            values.push((0..=ne).map(|j| f(e, j as f64 * h)).collect());
        }
        Ok(GridFunction { values })
    }

    pub fn elements(&self) -> Vec<usize> {
        self.values.iter().map(|v| v.len() - 1).collect()
    }

    pub fn check(&self, g: &MetricGraph) -> Result<()> {
        if self.values.len() != g.edge_count() {
            return Err(Error::GridMismatch(format!(
                "function has {} edges, graph has {}",
                self.values.len(),
                g.edge_count()
            )));
        }
        for (e, v) in self.values.iter().enumerate() {
            if v.len() < 3 {
                return Err(Error::GridMismatch(format!("edge {e} has fewer than 2 elements")));
            }
        }
        Ok(())
    }

    /// Trapezoid-rule L2 inner product `sum conj(self) other`.
    pub fn inner(&self, other: &GridFunction, g: &MetricGraph) -> C64 {
        let mut acc = ZERO;
        for (e, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let n = a.len() - 1;
            let h = g.length(e) / n as f64;
            for j in 0..=n {
                let w = if j == 0 || j == n { 0.5 * h } else { h };
                acc += a[j].conj() * b[j] * w;
            }
        }
        acc
    }

    pub fn norm(&self, g: &MetricGraph) -> f64 {
        self.inner(self, g).re.max(0.0).sqrt()
    }
}

/// Second-order one-sided derivative estimates at both ends of an edge.
fn end_derivatives(v: &[C64], h: f64) -> (C64, C64) {
    let n = v.len() - 1;
    let d0 = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    let dn = (3.0 * v[n] - 4.0 * v[n - 1] + v[n - 2]) / (2.0 * h);
    (d0, dn)
}

pub fn trace(psi: &GridFunction, g: &MetricGraph) -> Result<BoundaryTrace> {
    psi.check(g)?;
    let mut t = BoundaryTrace::zeros(g.slot_count());
    for (e, v) in psi.values.iter().enumerate() {
        let n = v.len() - 1;
        let h = g.length(e) / n as f64;
        let (d0, dn) = end_derivatives(v, h);
        let lo = g.slots().slot_of(e, End::Minus);
        let hi = g.slots().slot_of(e, End::Plus);
        t.values[lo] = v[0];
        t.derivs[lo] = -d0;
        t.values[hi] = v[n];
        t.derivs[hi] = dn;
    }
    Ok(t)
}

/// `<phi, psi_dot> - <phi_dot, psi>` on traces.
pub fn boundary_form_traces(psi: &BoundaryTrace, phi: &BoundaryTrace) -> C64 {
    phi.values.dotc(&psi.derivs) - phi.derivs.dotc(&psi.values)
}

pub fn boundary_form(psi: &GridFunction, phi: &GridFunction, g: &MetricGraph) -> Result<C64> {
    if psi.elements() != phi.elements() {
        return Err(Error::GridMismatch("functions live on different grids".into()));
    }
    Ok(boundary_form_traces(&trace(psi, g)?, &trace(phi, g)?))
}

/// Frequently used graphs.
pub mod catalog {
    use super::*;

    fn edge(id: &str, from: &str, to: &str, length: f64) -> Edge {
        Edge { id: id.into(), from: from.into(), to: to.into(), length }
    }

    /// One vertex and one loop of the given length.
    pub fn loop_graph(length: f64) -> MetricGraph {
        MetricGraph::new(vec!["v".into()], vec![edge("e", "v", "v", length)]).unwrap()
    }

    /// One vertex with `n` unit loops.
    pub fn bouquet(n: usize) -> MetricGraph {
        let edges = (1..=n).map(|k| edge(&format!("e{k}"), "v", "v", 1.0)).collect();
        MetricGraph::new(vec!["v".into()], edges).unwrap()
    }

    /// Two looped vertices joined by a bridge `e2`.
    pub fn g1() -> MetricGraph {
        MetricGraph::new(
            vec!["v1".into(), "v2".into()],
            vec![edge("e1", "v1", "v1", 1.0), edge("e2", "v1", "v2", 1.0), edge("e3", "v2", "v2", 1.0)],
        )
        .unwrap()
    }

    /// Four vertices, six edges, with a double edge between `v2` and `v3`
    /// and a double edge between `v1` and `v4`.
    pub fn g2() -> MetricGraph {
        MetricGraph::new(
            vec!["v1".into(), "v2".into(), "v3".into(), "v4".into()],
            vec![
                edge("e1", "v1", "v2", 1.0),
                edge("e2", "v2", "v3", 1.0),
                edge("e3", "v3", "v2", 1.0),
                edge("e4", "v3", "v4", 1.0),
                edge("e5", "v4", "v1", 1.0),
                edge("e6", "v1", "v4", 1.0),
            ],
        )
        .unwrap()
    }

    /// A single interval.
    pub fn interval(length: f64) -> MetricGraph {
        MetricGraph::new(vec!["a".into(), "b".into()], vec![edge("e", "a", "b", length)]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::catalog::*;
    use super::*;

    #[test]
    fn natural_order() {
        let mut ids = vec!["v10", "v2", "v1", "a"];
        ids.sort_by(|a, b| natural_cmp(a, b));
        assert_eq!(ids, vec!["a", "v1", "v2", "v10"]);
        assert_eq!(natural_cmp("e01", "e1"), Ordering::Less);
        assert_ne!(natural_cmp("e01", "e1"), Ordering::Equal);
    }

    #[test]
    fn loop_has_two_slots() {
        let g = loop_graph(1.0);
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.slot_count(), 2);
        assert_eq!(g.slots().slot(0).end, End::Minus);
        assert_eq!(g.slots().slot(1).end, End::Plus);
    }

    #[test]
    fn bouquet_degree() {
        assert_eq!(bouquet(3).degree(0), 6);
    }

    #[test]
    fn rejects_bad_graphs() {
        let zero = MetricGraph::new(
            vec!["v".into()],
            vec![Edge { id: "e".into(), from: "v".into(), to: "v".into(), length: 0.0 }],
        );
        assert!(matches!(zero, Err(Error::InvalidGraph(_))));
        let dangling = MetricGraph::new(
            vec!["v".into()],
            vec![Edge { id: "e".into(), from: "v".into(), to: "w".into(), length: 1.0 }],
        );
        assert!(matches!(dangling, Err(Error::InvalidGraph(_))));
        let dup = MetricGraph::new(vec!["v".into(), "v".into()], vec![]);
        assert!(matches!(dup, Err(Error::InvalidGraph(_))));
    }

    #[test]
    fn slot_order_within_vertex_follows_edge_ids() {
        let g = g1();
        let s: Vec<(usize, usize, End)> =
            g.slots().slots().iter().map(|s| (s.vertex, s.edge, s.end)).collect();
        assert_eq!(
            s,
            vec![
                (0, 0, End::Minus),
                (0, 0, End::Plus),
                (0, 1, End::Minus),
                (1, 1, End::Plus),
                (1, 2, End::Minus),
                (1, 2, End::Plus),
            ]
        );
    }

    #[test]
    fn trace_of_constant_and_linear() {
        let g = loop_graph(1.0);
        let one = GridFunction::from_fn(&g, &[8], |_, _| C64::new(1.0, 0.0)).unwrap();
        let t = trace(&one, &g).unwrap();
        assert_eq!(t.values.as_slice(), &[C64::new(1.0, 0.0); 2]);
        assert!(t.derivs.norm() < 1e-14);

        let i = interval(1.0);
        let lin = GridFunction::from_fn(&i, &[8], |_, x| C64::new(x, 0.0)).unwrap();
        let t = trace(&lin, &i).unwrap();
        assert!((t.values[0] - C64::new(0.0, 0.0)).norm() < 1e-14);
        assert!((t.values[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((t.derivs[0] - C64::new(-1.0, 0.0)).norm() < 1e-12);
        assert!((t.derivs[1] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn trace_of_sine_on_loop() {
        let g = loop_graph(1.0);
        let tau = std::f64::consts::TAU;
        let f = GridFunction::from_fn(&g, &[512], |_, x| C64::new((tau * x).sin(), 0.0)).unwrap();
        let t = trace(&f, &g).unwrap();
        // second-order stencil: error ~ (2 pi)^3 h^2 / 3
        let h = 1.0 / 512.0;
        let tol = tau.powi(3) * h * h;
        assert!((t.derivs[0].re + tau).abs() < tol);
        assert!((t.derivs[1].re - tau).abs() < tol);
    }

    #[test]
    fn boundary_form_vanishes_for_zero_traces() {
        let g = interval(1.0);
        let pi = std::f64::consts::PI;
        let psi = GridFunction::from_fn(&g, &[64], |_, x| C64::new((pi * x).sin() * (pi * x).sin(), 0.0)).unwrap();
        let phi = GridFunction::from_fn(&g, &[64], |_, x| C64::new(x.exp(), x)).unwrap();
        // sin^2 vanishes with its derivative at both ends; only stencil error remains
        assert!(boundary_form(&psi, &phi, &g).unwrap().norm() < 1e-2);
    }
}
