//! Pulse files.
//!
//! ```json
//! {"c": 5.0, "pieces": [{"t0": 0.0, "t1": 0.5, "u": 1.0}, {"t0": 0.5, "t1": 1.0, "u": 2.0}]}
//! {"c": 5.0, "expr-samples": [[0.0, 1.0], [0.5, 2.0], [1.0, 1.5]]}
//! ```
//!
//! Pieces give a piecewise-constant control and must tile `[0, T]`. Samples
//! are joined linearly. `schema` and `header` keys, as written by
//! `synthesize`, are accepted and ignored.

use qgraph_core::control::synthesis::ControlPulse;
use qgraph_core::propagation::Coefficient;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const PULSE_SCHEMA: &str = "qgraph.pulse/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Piece {
    pub t0: f64,
    pub t1: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseFile {
    #[serde(default, skip_serializing)]
    pub schema: Option<String>,
    #[serde(default, skip_serializing)]
    pub header: Option<serde_json::Value>,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pieces: Option<Vec<Piece>>,
    #[serde(default, rename = "expr-samples", skip_serializing_if = "Option::is_none")]
    pub expr_samples: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone)]
pub enum Pulse {
    Pieces(ControlPulse),
    Samples { times: Vec<f64>, values: Vec<f64> },
}

impl Pulse {
    pub fn duration(&self) -> f64 {
        match self {
            Pulse::Pieces(p) => p.duration(),
            Pulse::Samples { times, .. } => times.last().copied().unwrap_or(0.0),
        }
    }

    pub fn coefficient(&self) -> Coefficient {
        match self {
            Pulse::Pieces(p) => p.coefficient(),
            Pulse::Samples { times, values, .. } => Coefficient::PiecewiseLinear { times: times.clone(), values: values.clone() },
        }
    }
}

impl PulseFile {
    pub fn from_pulse(p: &ControlPulse) -> Self {
        let pieces = p
            .values
            .iter()
            .enumerate()
            .map(|(j, &u)| Piece { t0: p.knots[j], t1: p.knots[j + 1], u })
            .collect();
        PulseFile { schema: None, header: None, c: p.c, pieces: Some(pieces), expr_samples: None }
    }

    pub fn parse(text: &str) -> Result<Pulse, CliError> {
        let f: PulseFile = serde_json::from_str(text).map_err(|e| CliError::Config(format!("pulse file: {e}")))?;
        if let Some(s) = &f.schema {
            if s != PULSE_SCHEMA {
                return Err(CliError::Config(format!("unsupported pulse schema {s:?}")));
            }
        }
        let bad = |m: &str| CliError::Config(format!("pulse file: {m}"));
        match (f.pieces, f.expr_samples) {
            (Some(pieces), None) => {
                if pieces.is_empty() {
                    return Err(bad("no pieces"));
                }
                let mut knots = vec![pieces[0].t0];
                for w in pieces.windows(2) {
                    if w[0].t1 != w[1].t0 {
                        return Err(bad("pieces must be contiguous"));
                    }
                }
                knots.extend(pieces.iter().map(|p| p.t1));
                let p = ControlPulse { knots, values: pieces.iter().map(|p| p.u).collect(), c: f.c };
                p.validate_closed().map_err(|e| bad(&e.to_string()))?;
                Ok(Pulse::Pieces(p))
            }
            (None, Some(samples)) => {
                if samples.len() < 2 || samples[0][0] != 0.0 {
                    return Err(bad("need at least two samples starting at t = 0"));
                }
                if samples.windows(2).any(|w| !(w[1][0] > w[0][0])) {
                    return Err(bad("sample times must increase strictly"));
                }
                if samples.iter().any(|s| !(s[1] >= 0.0 && s[1] <= f.c)) {
                    return Err(bad("sample values must lie in [0, c]"));
                }
                Ok(Pulse::Samples {
                    times: samples.iter().map(|s| s[0]).collect(),
                    values: samples.iter().map(|s| s[1]).collect(),
                })
            }
            _ => Err(bad("give exactly one of \"pieces\" and \"expr-samples\"")),
        }
    }
}
