//! Heuristic check of the spectral gap and coupling-chain conditions for
//! approximate controllability.
//!
//! Rational independence of the gaps cannot be decided from floating-point
//! data, so the verdict is "no relation up to (C, tau_rel)", never a proof.

use serde::{Deserialize, Serialize};

use super::relations::{find_relation, satisfies, SearchMethod};
use super::BilinearSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChambrionOptions {
    /// Bound `C` on `|c|_inf`.
    pub bound: i64,
    pub tau_rel: f64,
    pub tau_coup: f64,
    /// Number of levels whose gaps enter the relation search; all Galerkin
    /// levels when `None`.
    pub relation_levels: Option<usize>,
    /// Relative separation below which two levels count as degenerate.
    pub degeneracy_tol: f64,
}

impl Default for ChambrionOptions {
    fn default() -> Self {
        ChambrionOptions { bound: 20, tau_rel: 1e-9, tau_coup: 1e-6, relation_levels: None, degeneracy_tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RelationVerdict {
    Found { coefficients: Vec<i64>, residual: f64, ratio: f64 },
    None { bound: i64, tau_rel: f64, exhaustive_bound: i64 },
    /// Gaps are ill-defined.
    Skipped { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coupling {
    /// Link `n -> n + 1`.
    pub n: usize,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub nonzero: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub levels: usize,
    pub energies: Vec<f64>,
    pub gaps: Vec<f64>,
    pub relation: RelationVerdict,
    pub search_method: Option<SearchMethod>,
    pub couplings: Vec<Coupling>,
    pub degenerate: Option<String>,
    pub conditions_hold: bool,
    pub verdict: String,
}

impl ControllabilityReport {
    /// Re-evaluate a reported relation against the gap vector.
    pub fn relation_consistent(&self, tau_rel: f64) -> bool {
        match &self.relation {
            RelationVerdict::Found { coefficients, .. } => {
                let m = coefficients.len();
                satisfies(coefficients, &self.gaps[..m], tau_rel)
            }
            _ => true,
        }
    }
}

pub fn chambrion_check(sys: &BilinearSystem, opts: &ChambrionOptions) -> Result<ControllabilityReport> {
    let n = sys.levels();
    if n < 3 {
        return Err(Error::InvalidParameter(format!("need at least 3 Galerkin levels, got {n}")));
    }
    if opts.bound < 1 || !(opts.tau_rel > 0.0) || !(opts.tau_coup > 0.0) {
        return Err(Error::InvalidParameter("bound and tolerances must be positive".into()));
    }
    let energies = sys.energies[..n].to_vec();
    let gaps: Vec<f64> = energies.windows(2).map(|w| w[1] - w[0]).collect();
    let degenerate = energies.windows(2).enumerate().find_map(|(i, w)| {
        let scale = w[0].abs().max(w[1].abs()).max(1.0);
        ((w[1] - w[0]).abs() <= opts.degeneracy_tol * scale)
            .then(|| format!("levels {i} and {} coincide ({:.17e} vs {:.17e})", i + 1, w[0], w[1]))
    });
    let couplings: Vec<Coupling> = (0..n - 1)
        .map(|k| {
            let z = sys.h1[(k + 1, k)];
            Coupling { n: k, re: z.re, im: z.im, abs: z.norm(), nonzero: z.norm() > opts.tau_coup }
        })
        .collect();
    let chain_ok = couplings.iter().all(|c| c.nonzero);
    let (relation, search_method) = match &degenerate {
        Some(d) => (RelationVerdict::Skipped { reason: d.clone() }, None),
        None => {
            let m = opts.relation_levels.unwrap_or(n).clamp(2, n) - 1;
            let out = find_relation(&gaps[..m], opts.bound, opts.tau_rel);
            let verdict = match out.relation {
                Some(r) => RelationVerdict::Found { coefficients: r.coefficients, residual: r.residual, ratio: r.ratio },
                None => RelationVerdict::None {
                    bound: opts.bound,
                    tau_rel: opts.tau_rel,
                    exhaustive_bound: out.exhaustive_bound,
                },
            };
            (verdict, Some(out.method))
        }
    };
    let no_relation = matches!(relation, RelationVerdict::None { .. });
    let conditions_hold = degenerate.is_none() && no_relation && chain_ok;
    let verdict = if conditions_hold {
        "conditions hold (heuristically)".to_string()
    } else {
        let mut why = Vec::new();
        if let Some(d) = &degenerate {
            why.push(format!("degenerate spectrum: {d}"));
        }
        if let RelationVerdict::Found { coefficients, .. } = &relation {
            why.push(format!("gap relation {coefficients:?}"));
        }
        let weak: Vec<usize> = couplings.iter().filter(|c| !c.nonzero).map(|c| c.n).collect();
        if !weak.is_empty() {
            why.push(format!("weak couplings at links {weak:?}"));
        }
        format!("conditions fail: {}", why.join("; "))
    };
    Ok(ControllabilityReport {
        levels: n,
        energies,
        gaps,
        relation,
        search_method,
        couplings,
        degenerate,
        conditions_hold,
        verdict,
    })
}
