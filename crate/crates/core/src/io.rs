//! JSON graph files.
//!
//! ```json
//! {
//!   "schema": "qgraph.graph/1",
//!   "name": "g1",
//!   "vertices": ["v1", "v2"],
//!   "edges": [{"id": "e1", "from": "v1", "to": "v1", "length": 1.0}],
//!   "conditions": {"type": "delta", "delta": 0.0},
//!   "potential": {"A": {"e1": 0.5}, "b": {"e1": 0.0}}
//! }
//! ```
//!
//! `conditions` and `potential` are optional. Unknown keys are rejected.
//! Other condition blocks:
//!
//! ```json
//! {"type": "quasi-delta", "delta": 0.0, "chi": {"e1": [0.0, 1.0]}}
//! {"type": "explicit-unitary", "unitary": [[[0.0, 0.0], [1.0, 0.0]], [[1.0, 0.0], [0.0, 0.0]]]}
//! ```
//!
//! `chi` gives the phase at the `∂₋` and `∂₊` end of each edge; the unitary
//! is row-major over the slot space with `[re, im]` entries. Per-edge maps
//! may omit edges (taken as zero) or be given as arrays in edge order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extensions::{delta_type_conditions, quasi_delta_conditions, VertexConditions};
use crate::gauge::EdgePotential;
use crate::graph::{catalog, Edge, End, MetricGraph};
use crate::linalg::{C64, CMat};

pub const GRAPH_SCHEMA: &str = "qgraph.graph/1";

/// Names accepted by [`bundled_graph`].
pub const BUNDLED: [&str; 4] = ["g0-loop", "bouquet-b3", "g1", "g2"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConditionsSpec {
    Delta { delta: f64 },
    QuasiDelta { delta: f64, chi: PerEdge<[f64; 2]> },
    ExplicitUnitary { unitary: Vec<Vec<[f64; 2]>> },
}

/// Values keyed by edge id, or listed in edge order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerEdge<T> {
    ById(BTreeMap<String, T>),
    Ordered(Vec<T>),
}

impl<T: Copy + Default> PerEdge<T> {
    /// One value per edge of `g`; absent ids are `T::default()`.
    pub fn resolve(&self, g: &MetricGraph) -> Result<Vec<T>> {
        match self {
            PerEdge::Ordered(v) => {
                if v.len() != g.edge_count() {
                    return Err(Error::DimensionMismatch { expected: g.edge_count(), found: v.len() });
                }
                Ok(v.clone())
            }
            PerEdge::ById(m) => {
                let mut out = vec![T::default(); g.edge_count()];
                for (id, &x) in m {
                    let e = g.edge_index(id).ok_or_else(|| Error::Parse(format!("unknown edge {id:?}")))?;
                    out[e] = x;
                }
                Ok(out)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(rename = "A")]
    pub a: PerEdge<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<PerEdge<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub schema: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub vertices: Vec<String>,
    pub edges: Vec<Edge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditions: Option<ConditionsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
}

impl GraphFile {
    pub fn parse(text: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(text)?;
        if f.schema != GRAPH_SCHEMA {
            return Err(Error::Parse(format!("unsupported schema {:?}, expected {GRAPH_SCHEMA:?}", f.schema)));
        }
        Ok(f)
    }

    pub fn from_graph(name: Option<&str>, g: &MetricGraph) -> Self {
        GraphFile {
            schema: GRAPH_SCHEMA.into(),
            name: name.map(Into::into),
            vertices: g.vertices().to_vec(),
            edges: g.edges().to_vec(),
            conditions: None,
            potential: None,
        }
    }

    pub fn graph(&self) -> Result<MetricGraph> {
        MetricGraph::new(self.vertices.clone(), self.edges.clone())
    }

    /// The declared conditions, δ-type with `delta = 0` when absent.
    pub fn conditions(&self, g: &MetricGraph) -> Result<VertexConditions> {
        match &self.conditions {
            None => delta_type_conditions(g, 0.0),
            Some(ConditionsSpec::Delta { delta }) => delta_type_conditions(g, *delta),
            Some(ConditionsSpec::QuasiDelta { delta, .. }) => {
                let chi = self.slot_chi(g)?.expect("quasi-δ block");
                quasi_delta_conditions(g, *delta, &chi)
            }
            Some(ConditionsSpec::ExplicitUnitary { unitary }) => {
                let n = unitary.len();
                if unitary.iter().any(|r| r.len() != n) {
                    return Err(Error::Parse("unitary must be square".into()));
                }
                let u = CMat::from_fn(n, n, |i, j| C64::new(unitary[i][j][0], unitary[i][j][1]));
                VertexConditions::global(u, g)
            }
        }
    }

    /// The δ parameter of δ-type or quasi-δ conditions.
    pub fn delta(&self) -> Option<f64> {
        match &self.conditions {
            None => Some(0.0),
            Some(ConditionsSpec::Delta { delta }) | Some(ConditionsSpec::QuasiDelta { delta, .. }) => Some(*delta),
            Some(ConditionsSpec::ExplicitUnitary { .. }) => None,
        }
    }

    /// Quasi-δ phases in slot order, `None` for other conditions.
    pub fn slot_chi(&self, g: &MetricGraph) -> Result<Option<Vec<f64>>> {
        let Some(ConditionsSpec::QuasiDelta { chi, .. }) = &self.conditions else {
            return Ok(None);
        };
        let ends = chi.resolve(g)?;
        let mut out = vec![0.0; g.slot_count()];
        for (e, [lo, hi]) in ends.into_iter().enumerate() {
            out[g.slots().slot_of(e, End::Minus)] = lo;
            out[g.slots().slot_of(e, End::Plus)] = hi;
        }
        Ok(Some(out))
    }

    /// The declared potential, zero when absent.
    pub fn potential(&self, g: &MetricGraph) -> Result<EdgePotential> {
        let p = match &self.potential {
            None => EdgePotential::zeros(g.edge_count()),
            Some(p) => EdgePotential {
                a: p.a.resolve(g)?,
                b: match &p.b {
                    Some(b) => b.resolve(g)?,
                    None => vec![0.0; g.edge_count()],
                },
            },
        };
        p.check(g)?;
        Ok(p)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph files serialise")
    }
}

pub fn bundled_graph(name: &str) -> Option<GraphFile> {
    let g = match name {
        "g0-loop" => catalog::loop_graph(1.0),
        "bouquet-b3" => catalog::bouquet(3),
        "g1" => catalog::g1(),
        "g2" => catalog::g2(),
        _ => return None,
    };
    Some(GraphFile::from_graph(Some(name), &g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_unknown_keys() {
        let mut f = bundled_graph("g1").unwrap();
        f.conditions = Some(ConditionsSpec::Delta { delta: 0.5 });
        f.potential = Some(PotentialSpec { a: PerEdge::Ordered(vec![1.0, 0.0, 2.0]), b: None });
        let back = GraphFile::parse(&f.to_json()).unwrap();
        assert_eq!(back, f);
        let g = back.graph().unwrap();
        assert_eq!(back.potential(&g).unwrap().a, vec![1.0, 0.0, 2.0]);
        assert!(back.conditions(&g).unwrap().is_local());
        let bad = f.to_json().replacen("\"vertices\"", "\"extra\": 1, \"vertices\"", 1);
        assert!(matches!(GraphFile::parse(&bad), Err(Error::Parse(_))));
        let wrong = f.to_json().replace(GRAPH_SCHEMA, "qgraph.graph/0");
        assert!(GraphFile::parse(&wrong).is_err());
    }

    #[test]
    fn blocks_keyed_by_edge_id() {
        let text = r#"{"schema": "qgraph.graph/1", "vertices": ["v"],
            "edges": [{"id": "e", "from": "v", "to": "v", "length": 1.0}],
            "conditions": {"type": "quasi-delta", "delta": 0.0, "chi": {"e": [0.0, 1.0]}},
            "potential": {"A": {"e": 0.0}}}"#;
        let f = GraphFile::parse(text).unwrap();
        let g = f.graph().unwrap();
        assert_eq!(f.slot_chi(&g).unwrap(), Some(vec![0.0, 1.0]));
        assert_eq!(f.conditions(&g).unwrap().matrix()[(0, 1)], C64::new(1f64.cos(), 1f64.sin()));
        let bad = text.replace(r#"{"e": 0.0}"#, r#"{"x": 0.0}"#);
        assert!(GraphFile::parse(&bad).unwrap().potential(&g).is_err());
        let swap = r#"{"schema": "qgraph.graph/1", "vertices": ["v"],
            "edges": [{"id": "e", "from": "v", "to": "v", "length": 1.0}],
            "conditions": {"type": "explicit-unitary", "unitary": [[[0, 0], [1, 0]], [[1, 0], [0, 0]]]}}"#;
        let f = GraphFile::parse(swap).unwrap();
        assert!(!f.conditions(&g).unwrap().is_local());
        assert_eq!(f.delta(), None);
    }

    #[test]
    fn invalid_graphs_are_rejected() {
        let text = r#"{"schema": "qgraph.graph/1", "vertices": ["v"],
            "edges": [{"id": "e", "from": "v", "to": "w", "length": 1.0}]}"#;
        assert!(matches!(GraphFile::parse(text).unwrap().graph(), Err(Error::InvalidGraph(_))));
    }
}
