//! Run configuration: per-command defaults, overlaid by an optional JSON
//! file, overlaid by command-line flags.

use std::path::Path;

use qgraph_core::io::{bundled_graph, ConditionsSpec, GraphFile, PotentialSpec};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::output::canonical_json;
use crate::CliError;

pub const CONFIG_SCHEMA: &str = "qgraph.config/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SolverConfig {
    /// Finite elements per unit length.
    pub elements_per_unit: usize,
    /// Galerkin level `N`.
    pub levels: usize,
    pub frame_levels: usize,
    /// Eigenvalues reported by `spectrum`.
    pub eigenvalues: usize,
    /// Partition count of the propagator.
    pub k: usize,
    /// Eigensolver tolerance.
    pub tol: f64,
    /// Largest DOF count solved densely; shift-invert above.
    pub dense_cutover: usize,
    pub richardson: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ControlConfig {
    pub c: f64,
    pub initial: usize,
    pub target: usize,
    pub eps: f64,
    pub t_max: f64,
    pub duration: Option<f64>,
    pub cells: usize,
    pub restarts: usize,
    /// Pulse file read by `propagate`.
    pub pulse: Option<String>,
    pub windows: usize,
    pub steps_per_window: usize,
    /// Scale of the default control direction when `beta` is absent.
    pub beta_scale: f64,
    /// Perturbation size as a rational `n/d`; no perturbation when absent
    /// (except in `demo`, which perturbs when the conditions fail).
    pub mu0: Option<String>,
    pub mu1: f64,
    pub relation_bound: i64,
    pub relation_tol: f64,
    pub coupling_tol: f64,
    pub relation_levels: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseConfig {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    pub schema: String,
    pub command: String,
    /// Path to a graph file or the name of a bundled graph.
    pub graph: String,
    /// Overrides the conditions of the graph file.
    pub conditions: Option<ConditionsSpec>,
    /// Overrides the potential of the graph file.
    pub potential: Option<PotentialSpec>,
    pub beta: Option<Vec<f64>>,
    /// Gauge phase for `gauge-map`.
    pub phase: Option<PhaseConfig>,
    pub solver: SolverConfig,
    pub control: ControlConfig,
    pub seed: u64,
    pub out: String,
}

pub const COMMANDS: [&str; 7] =
    ["spectrum", "propagate", "check-simple", "check-controllability", "synthesize", "demo", "gauge-map"];

impl RunConfig {
    pub fn defaults(command: &str) -> Self {
        let demo = command == "demo";
        // pulses drive the strong-control regime of the demo
        let driven = matches!(command, "demo" | "synthesize" | "propagate");
        RunConfig {
            schema: CONFIG_SCHEMA.into(),
            command: command.into(),
            graph: "g0-loop".into(),
            conditions: None,
            potential: None,
            beta: None,
            phase: None,
            solver: SolverConfig {
                elements_per_unit: if demo { 128 } else { 256 },
                levels: 8,
                frame_levels: if demo { 32 } else { 8 },
                eigenvalues: 10,
                k: 1024,
                tol: 1e-11,
                dense_cutover: 400,
                richardson: true,
            },
            control: ControlConfig {
                c: 5.0,
                initial: 0,
                target: 1,
                eps: 0.1,
                t_max: 40.0,
                duration: demo.then_some(0.1),
                cells: 8,
                restarts: 8,
                pulse: None,
                windows: 64,
                steps_per_window: 64,
                beta_scale: if driven { 150.0 } else { 1.0 },
                mu0: None,
                mu1: 1e-3,
                relation_bound: 20,
                relation_tol: 1e-9,
                coupling_tol: 1e-6,
                relation_levels: Some(5),
            },
            seed: 0,
            out: "qgraph-out".into(),
        }
    }

    /// Defaults for `command` overlaid by the JSON object in `file`.
    pub fn load(command: &str, file: Option<&Path>) -> Result<Self, CliError> {
        let mut base = serde_json::to_value(Self::defaults(command)).expect("config serialises");
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            let over: Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            if let Some(c) = over.get("command").and_then(Value::as_str) {
                if c != command {
                    return Err(CliError::Config(format!("config is for command {c:?}, not {command:?}")));
                }
            }
            merge(&mut base, over);
        }
        serde_json::from_value(base).map_err(|e| CliError::Config(format!("invalid config: {e}")))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema != CONFIG_SCHEMA {
            return Err(CliError::Config(format!("unsupported config schema {:?}", self.schema)));
        }
        if !COMMANDS.contains(&self.command.as_str()) {
            return Err(CliError::Config(format!("unknown command {:?}", self.command)));
        }
        let c = &self.control;
        let s = &self.solver;
        let positive = [
            ("solver.tol", s.tol),
            ("control.c", c.c),
            ("control.eps", c.eps),
            ("control.t-max", c.t_max),
            ("control.relation-tol", c.relation_tol),
            ("control.coupling-tol", c.coupling_tol),
            ("control.beta-scale", c.beta_scale),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if c.eps >= 1.0 {
            return Err(CliError::Config("control.eps must lie in (0, 1)".into()));
        }
        let counts = [
            ("solver.elements-per-unit", s.elements_per_unit),
            ("solver.levels", s.levels),
            ("solver.eigenvalues", s.eigenvalues),
            ("solver.k", s.k),
            ("control.cells", c.cells),
            ("control.restarts", c.restarts),
            ("control.windows", c.windows),
            ("control.steps-per-window", c.steps_per_window),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(CliError::Config(format!("{name} must be positive")));
            }
        }
        if s.frame_levels < s.levels {
            return Err(CliError::Config("solver.frame-levels must be at least solver.levels".into()));
        }
        if c.initial >= s.levels || c.target >= s.levels {
            return Err(CliError::Config("control.initial and control.target must lie below solver.levels".into()));
        }
        if let Some(d) = c.duration {
            if !(d > 0.0 && d <= c.t_max) {
                return Err(CliError::Config("control.duration must lie in (0, t-max]".into()));
            }
        }
        if c.relation_bound < 1 {
            return Err(CliError::Config("control.relation-bound must be at least 1".into()));
        }
        Ok(())
    }

    /// `sha256:` of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = canonical_json(&serde_json::to_value(self).expect("config serialises"));
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
        format!("sha256:{hex}")
    }

    /// The graph file named by `graph`: an existing path first, then a
    /// bundled name.
    pub fn graph_file(&self) -> Result<GraphFile, CliError> {
        let path = Path::new(&self.graph);
        let mut file = if path.exists() {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            GraphFile::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        } else if let Some(f) = bundled_graph(&self.graph) {
            f
        } else {
            return Err(CliError::Config(format!(
                "graph {:?} is neither a file nor one of {:?}",
                self.graph,
                qgraph_core::io::BUNDLED
            )));
        };
        if self.conditions.is_some() {
            file.conditions = self.conditions.clone();
        }
        if self.potential.is_some() {
            file.potential = self.potential.clone();
        }
        Ok(file)
    }
}

/// Recursive object merge; non-object values replace.
fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Object(b), Value::Object(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, o) => *b = o,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qgraph_core::io::PerEdge;

    #[test]
    fn canonical_form_round_trips() {
        let mut c = RunConfig::defaults("demo");
        c.control.eps = 0.1 + 0.2;
        c.potential = Some(PotentialSpec { a: PerEdge::Ordered(vec![1.0 / 3.0]), b: None });
        let text = canonical_json(&serde_json::to_value(&c).unwrap());
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.hash(), c.hash());
        assert_eq!(canonical_json(&serde_json::to_value(&back).unwrap()), text);
    }

    #[test]
    fn merge_overrides_nested_keys() {
        let mut base = serde_json::to_value(RunConfig::defaults("spectrum")).unwrap();
        merge(&mut base, serde_json::json!({"solver": {"levels": 4}, "seed": 7}));
        let c: RunConfig = serde_json::from_value(base).unwrap();
        assert_eq!(c.solver.levels, 4);
        assert_eq!(c.solver.k, 1024);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn rejects_bad_tolerances() {
        let mut c = RunConfig::defaults("spectrum");
        c.solver.tol = 0.0;
        assert!(c.validate().is_err());
        let mut c = RunConfig::defaults("spectrum");
        c.control.eps = 1.5;
        assert!(c.validate().is_err());
    }
}
