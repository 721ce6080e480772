//! End-to-end boundary control: simple data, controllability check, pulse
//! synthesis on the Galerkin system, reconstruction of `A(t)`, and
//! propagation of the full magnetic model
//! `H(t) = -(d/dx - i A(t))^2 - A'(t) x` next to the auxiliary model
//! `H_0 - u(t) beta x`.
//!
//! Both models are propagated in the extended frame of `frame_levels`
//! eigenfunctions of `H_0`. Since the form of `-(d/dx - iA)^2` is quadratic in
//! `A = a + s beta`, the full model there is
//! `k0 + s(t) k1 + s(t)^2 k2 + u(t) H_1` with `s` the window integral of `u`.
//! Fidelities are measured after the final reset, where `A` is back to `a`.

use serde::{Deserialize, Serialize};

use super::boundary::{reconstruct_boundary_control, window_integral_coefficient, BoundarySeries};
use super::chambrion::{chambrion_check, ChambrionOptions, ControllabilityReport};
use super::perturb::{perturb, Perturbation, Rational};
use super::synthesis::{synthesize_pulse, SynthesisOptions, SynthesisResult};
use super::{fidelity, BilinearSystem, SystemOptions};
use crate::error::{Error, Result};
use crate::gauge::{is_simple, simple_subspace, EdgePotential};
use crate::graph::MetricGraph;
use crate::linalg::CVec;
use crate::propagation::{propagate_with, Coefficient, PropagateOptions, Term, TimeDependentHamiltonian};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoOptions {
    pub levels: usize,
    pub frame_levels: usize,
    pub elements_per_unit: usize,
    pub c: f64,
    /// Edge-constant potential `a`; a normalised simple direction when absent.
    pub potential: Option<Vec<f64>>,
    /// Control direction `beta`; `beta_scale` times the same direction when absent.
    pub beta: Option<Vec<f64>>,
    pub beta_scale: f64,
    pub duration: f64,
    pub cells: usize,
    pub restarts: usize,
    pub seed: u64,
    pub t_max: f64,
    /// Window count `N_w`; the window length is `T / N_w`.
    pub windows: usize,
    pub steps_per_window: usize,
    pub samples_per_window: usize,
    pub mu0: Rational,
    pub mu1: f64,
    pub chambrion: ChambrionOptions,
    /// Allowed gap between the full and auxiliary fidelities.
    pub fidelity_gap: f64,
}

impl Default for DemoOptions {
    fn default() -> Self {
        DemoOptions {
            levels: 8,
            frame_levels: 32,
            elements_per_unit: 128,
            c: 5.0,
            potential: None,
            beta: None,
            beta_scale: 150.0,
            duration: 0.1,
            cells: 8,
            restarts: 8,
            seed: 0,
            t_max: 40.0,
            windows: 64,
            steps_per_window: 64,
            samples_per_window: 8,
            mu0: Rational { num: 1, den: 1000 },
            mu1: 1e-3,
            chambrion: ChambrionOptions { relation_levels: Some(5), ..ChambrionOptions::default() },
            fidelity_gap: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    /// Populations of the Galerkin levels under the full model.
    pub full: Vec<f64>,
    /// The same under the auxiliary model.
    pub aux: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub a: Vec<f64>,
    pub beta: Vec<f64>,
    pub c: f64,
    pub initial_level: usize,
    pub target_level: usize,
    pub eps: f64,
    pub controllability: ControllabilityReport,
    pub perturbation: Option<Perturbation>,
    pub perturbed_controllability: Option<ControllabilityReport>,
    pub synthesis: SynthesisResult,
    pub tau: f64,
    pub windows: usize,
    pub sup_deviation: f64,
    /// `c tau max_e |beta_e|`.
    pub window_bound: f64,
    pub within_window_bound: bool,
    pub fidelity_galerkin: f64,
    pub fidelity_aux: f64,
    pub fidelity_full: f64,
    pub fidelity_gap: f64,
    /// `|psi_full(T) - psi_aux(T)|`.
    pub state_distance: f64,
    pub max_step_drift: f64,
    pub consistent: bool,
}

#[derive(Debug, Clone)]
pub struct DemoOutcome {
    pub report: DemoReport,
    pub series: BoundarySeries,
    pub trajectory: Vec<TrajectorySample>,
}

/// A normalised simple direction `sum_j p_j^{-1/2} v_j` over the simple
/// basis, scaled to unit sup norm with a positive leading entry.
pub fn default_direction(g: &MetricGraph) -> Result<Vec<f64>> {
    let basis = simple_subspace(g);
    if basis.is_empty() {
        let ones = EdgePotential::from_a(vec![1.0; g.edge_count()]);
        return Err(Error::NotSimple(is_simple(&ones, g).residuals));
    }
    let primes = super::perturb::primes(basis.len());
    let mut d = vec![0.0; g.edge_count()];
    for (v, p) in basis.iter().zip(primes) {
        for (x, y) in d.iter_mut().zip(v) {
            *x += y / (p as f64).sqrt();
        }
    }
    let scale = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let lead = d.iter().find(|x| x.abs() > 1e-12 * scale).copied().unwrap_or(1.0).signum();
    Ok(d.iter().map(|x| lead * x / scale).collect())
}

pub fn end_to_end_boundary_demo(
    g: &MetricGraph,
    delta: f64,
    initial_level: usize,
    target_level: usize,
    eps: f64,
    opts: &DemoOptions,
) -> Result<DemoOutcome> {
    if initial_level >= opts.levels || target_level >= opts.levels {
        return Err(Error::InvalidParameter("initial and target levels must lie below the Galerkin level".into()));
    }
    if opts.windows == 0 || opts.steps_per_window == 0 || !(opts.duration > 0.0) || opts.duration > opts.t_max {
        return Err(Error::InvalidParameter("need windows, steps and 0 < duration <= t_max".into()));
    }
    let beta = match &opts.beta {
        Some(b) => {
            let s = is_simple(&EdgePotential::from_a(b.clone()), g);
            if !s.simple {
                return Err(Error::NotSimple(s.residuals));
            }
            b.clone()
        }
        None => default_direction(g)?.iter().map(|x| x * opts.beta_scale).collect(),
    };
    let a = match &opts.potential {
        Some(a) => a.clone(),
        None => default_direction(g)?,
    };
    let a = EdgePotential::from_a(a);
    let sys_opts = SystemOptions {
        levels: opts.levels,
        frame_levels: opts.frame_levels,
        elements_per_unit: opts.elements_per_unit,
        richardson: true,
    };
    let sys = BilinearSystem::new(g, delta, &a, &beta, opts.c, sys_opts)?;
    let controllability = chambrion_check(&sys, &opts.chambrion)?;
    let (used, perturbation, perturbed_controllability) = if controllability.conditions_hold {
        (sys.clone(), None, None)
    } else {
        let p = perturb(&sys, opts.mu0, opts.mu1, opts.chambrion.tau_coup)?;
        let rep = chambrion_check(&p, &opts.chambrion)?;
        let info = p.perturbation.clone();
        (p, info, Some(rep))
    };
    let n = opts.levels;
    let psi0 = BilinearSystem::basis_state(n, initial_level);
    let target = BilinearSystem::basis_state(n, target_level);
    let synth_opts = SynthesisOptions {
        cells: opts.cells,
        duration: Some(opts.duration),
        optimize_duration: false,
        restarts: opts.restarts,
        seed: opts.seed,
        ..SynthesisOptions::default()
    };
    let synthesis = synthesize_pulse(&used, &psi0, &target, eps, opts.t_max, &synth_opts)?;
    let pulse = &synthesis.pulse;
    let t_end = pulse.duration();
    let tau = t_end / opts.windows as f64;
    let series = reconstruct_boundary_control(g, pulse, &a, &beta, tau, opts.samples_per_window)?;

    // both models use the unperturbed physical operators
    let ex = sys.magnetic_expansion();
    let s = window_integral_coefficient(pulse, tau);
    let s2 = {
        let (s, bps) = (s.clone(), s.breakpoints());
        Coefficient::function(move |t| s.eval(t).powi(2), bps)
    };
    let u = pulse.coefficient();
    let full = TimeDependentHamiltonian::new(
        vec![
            Term::new(Coefficient::Constant(1.0), ex.k0.clone()),
            Term::new(s, ex.k1.clone()),
            Term::new(s2, ex.k2.clone()),
            Term::new(u.clone(), sys.frame_h1.clone()),
        ],
        None,
        (0.0, t_end),
    )?;
    let aux = TimeDependentHamiltonian::new(
        vec![Term::new(Coefficient::Constant(1.0), ex.k0.clone()), Term::new(u, sys.frame_h1.clone())],
        None,
        (0.0, t_end),
    )?;
    let m = opts.frame_levels;
    let y0 = BilinearSystem::basis_state(m, initial_level);
    let yt = BilinearSystem::basis_state(m, target_level);
    let k = opts.windows * opts.steps_per_window;
    let popts = PropagateOptions { samples: opts.windows, ..Default::default() };
    let (rf, ra) = rayon::join(
        || propagate_with(&full, &y0, 0.0, t_end, k, &popts),
        || propagate_with(&aux, &y0, 0.0, t_end, k, &popts),
    );
    let (rf, ra) = (rf?, ra?);
    let pops = |v: &CVec| (0..n).map(|i| v[i].norm_sqr()).collect::<Vec<f64>>();
    let trajectory = rf
        .times
        .iter()
        .zip(rf.trajectory.iter().zip(&ra.trajectory))
        .map(|(&t, (f, a))| TrajectorySample { t, full: pops(f), aux: pops(a) })
        .collect();
    let fidelity_full = fidelity(&rf.final_state, &yt);
    let fidelity_aux = fidelity(&ra.final_state, &yt);
    let gap = (fidelity_full - fidelity_aux).abs();
    let report = DemoReport {
        a: a.a.clone(),
        beta: beta.clone(),
        c: opts.c,
        initial_level,
        target_level,
        eps,
        controllability,
        perturbation,
        perturbed_controllability,
        fidelity_galerkin: synthesis.fidelity,
        tau,
        windows: series.windows,
        sup_deviation: series.sup_deviation,
        window_bound: series.bound,
        within_window_bound: series.within_bound,
        fidelity_aux,
        fidelity_full,
        fidelity_gap: gap,
        state_distance: (&rf.final_state - &ra.final_state).norm(),
        max_step_drift: rf.max_step_drift().max(ra.max_step_drift()),
        consistent: synthesis.reached && series.within_bound && gap <= opts.fidelity_gap,
        synthesis,
    };
    Ok(DemoOutcome { report, series, trajectory })
}
