use qgraph_core::assembly::{assemble, assemble_quasi_delta, eigensolve_with, uniform_elements, SolverOptions};
use qgraph_core::control::chambrion::{chambrion_check, ChambrionOptions};
use qgraph_core::control::demo::{default_direction, end_to_end_boundary_demo, DemoOptions};
use qgraph_core::control::perturb::{perturb, Rational};
use qgraph_core::control::synthesis::{synthesize_pulse, SynthesisOptions};
use qgraph_core::control::{fidelity, BilinearSystem, SystemOptions};
use qgraph_core::extensions::VertexConditions;
use qgraph_core::gauge::{
    chi_from_vertex_phases, conjugate_conditions, is_simple, simple_subspace, to_magnetic_frame, EdgePotential,
    GaugePhase,
};
use qgraph_core::graph::MetricGraph;
use qgraph_core::io::{ConditionsSpec, GraphFile};
use qgraph_core::linalg::CMat;
use qgraph_core::propagation::{propagate_with, PropagateOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::output::Artifacts;
use crate::pulse::{PulseFile, PULSE_SCHEMA};
use crate::CliError;

/// Outcome of a command: `ok` is false for verdict failures.
pub struct Verdict {
    pub ok: bool,
    pub summary: String,
}

pub fn run(cfg: &RunConfig, out: &mut Artifacts) -> Result<Verdict, CliError> {
    let file = cfg.graph_file()?;
    let g = file.graph().map_err(config_err)?;
    match cfg.command.as_str() {
        "spectrum" => spectrum(cfg, &file, &g, out),
        "propagate" => propagate(cfg, &file, &g, out),
        "check-simple" => check_simple(cfg, &file, &g, out),
        "check-controllability" => check_controllability(cfg, &file, &g, out),
        "synthesize" => synthesize(cfg, &file, &g, out),
        "demo" => demo(cfg, &file, &g, out),
        "gauge-map" => gauge_map(cfg, &file, &g, out),
        other => Err(CliError::Config(format!("unknown command {other:?}"))),
    }
}

fn config_err(e: qgraph_core::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn runtime_err(e: qgraph_core::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Serialize)]
struct MatrixJson {
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

fn matrix_json(m: &CMat) -> MatrixJson {
    MatrixJson {
        re: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].re).collect()).collect(),
        im: (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].im).collect()).collect(),
    }
}

fn delta_of(file: &GraphFile) -> Result<f64, CliError> {
    file.delta().ok_or_else(|| CliError::Config("this command needs δ-type or quasi-δ conditions".into()))
}

fn solver(cfg: &RunConfig) -> SolverOptions {
    SolverOptions { tol: cfg.solver.tol, dense_cutover: cfg.solver.dense_cutover, ..SolverOptions::default() }
}

fn spectrum(cfg: &RunConfig, file: &GraphFile, g: &MetricGraph, out: &mut Artifacts) -> Result<Verdict, CliError> {
    let delta = delta_of(file)?;
    let elements = uniform_elements(g, cfg.solver.elements_per_unit);
    let (op, a) = match &file.conditions {
        Some(ConditionsSpec::QuasiDelta { .. }) => {
            if file.potential(g).map_err(config_err)?.a.iter().any(|&x| x != 0.0) {
                return Err(CliError::Config("quasi-δ conditions are realised by a gauge; give no potential".into()));
            }
            let chi = file.slot_chi(g).map_err(config_err)?.unwrap_or_default();
            let phase = chi_from_vertex_phases(g, &chi).map_err(config_err)?;
            assemble_quasi_delta(g, delta, &phase, &elements).map_err(config_err)?
        }
        _ => {
            let a = file.potential(g).map_err(config_err)?;
            let op = assemble(g, delta, &a, &vec![0.0; g.edge_count()], &elements).map_err(config_err)?;
            (op, a)
        }
    };
    let count = cfg.solver.eigenvalues.min(op.dim());
    let es = eigensolve_with(&op, &a, count, &solver(cfg)).map_err(runtime_err)?;
    let rows: Vec<Vec<f64>> =
        es.values.iter().zip(&es.residuals).enumerate().map(|(i, (&l, &r))| vec![i as f64, l, r]).collect();
    out.csv("spectrum.csv", &["index".into(), "eigenvalue".into(), "backward_error".into()], &rows)?;
    out.json(
        "spectrum.json",
        "qgraph.spectrum/1",
        &json!({
            "delta": delta,
            "potential": a.a,
            "elements": elements,
            "dofs": op.dim(),
            "eigenvalues": es.values,
            "backward-errors": es.residuals,
        }),
    )?;
    let head: Vec<String> = es.values.iter().take(5).map(|v| format!("{v:.10}")).collect();
    Ok(Verdict { ok: true, summary: format!("{} eigenvalues on {} DOFs: {} ...", es.values.len(), op.dim(), head.join(", ")) })
}

/// The potential: the configured one, else a normalised simple direction.
fn control_potential(file: &GraphFile, g: &MetricGraph) -> Result<EdgePotential, CliError> {
    match &file.potential {
        Some(_) => file.potential(g).map_err(config_err),
        None => Ok(EdgePotential::from_a(default_direction(g).map_err(config_err)?)),
    }
}

fn control_beta(cfg: &RunConfig, g: &MetricGraph) -> Result<Vec<f64>, CliError> {
    match &cfg.beta {
        Some(b) => Ok(b.clone()),
        None => Ok(default_direction(g).map_err(config_err)?.iter().map(|x| x * cfg.control.beta_scale).collect()),
    }
}

fn mu0(cfg: &RunConfig) -> Result<Option<Rational>, CliError> {
    cfg.control
        .mu0
        .as_deref()
        .map(|s| s.parse::<Rational>().map_err(|e| CliError::Config(format!("control.mu0: {e}"))))
        .transpose()
}

fn chambrion_options(cfg: &RunConfig) -> ChambrionOptions {
    ChambrionOptions {
        bound: cfg.control.relation_bound,
        tau_rel: cfg.control.relation_tol,
        tau_coup: cfg.control.coupling_tol,
        relation_levels: cfg.control.relation_levels,
        ..ChambrionOptions::default()
    }
}

/// The Galerkin system, perturbed when `mu0` is configured.
fn system(cfg: &RunConfig, file: &GraphFile, g: &MetricGraph) -> Result<BilinearSystem, CliError> {
    let delta = delta_of(file)?;
    let a = control_potential(file, g)?;
    let beta = control_beta(cfg, g)?;
    let opts = SystemOptions {
        levels: cfg.solver.levels,
        frame_levels: cfg.solver.frame_levels,
        elements_per_unit: cfg.solver.elements_per_unit,
        richardson: cfg.solver.richardson,
    };
    let sys = BilinearSystem::new(g, delta, &a, &beta, cfg.control.c, opts).map_err(config_err)?;
    match mu0(cfg)? {
        Some(m) => perturb(&sys, m, cfg.control.mu1, cfg.control.coupling_tol).map_err(config_err),
        None => Ok(sys),
    }
}

fn propagate(cfg: &RunConfig, file: &GraphFile, g: &MetricGraph, out: &mut Artifacts) -> Result<Verdict, CliError> {
    let path = cfg.control.pulse.as_ref().ok_or_else(|| CliError::Config("propagate needs --pulse".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
    let pulse = PulseFile::parse(&text)?;
    let sys = system(cfg, file, g)?;
    let t_end = pulse.duration();
    let h = sys.hamiltonian(pulse.coefficient(), t_end).map_err(config_err)?;
    let n = sys.levels();
    let psi0 = BilinearSystem::basis_state(n, cfg.control.initial);
    let target = BilinearSystem::basis_state(n, cfg.control.target);
    let samples = cfg.solver.k.min(1024);
    let r = propagate_with(&h, &psi0, 0.0, t_end, cfg.solver.k, &PropagateOptions { samples, ..Default::default() })
        .map_err(runtime_err)?;
    let mut columns = vec!["t".to_string()];
    columns.extend((0..n).map(|i| format!("p{i}")));
    let rows: Vec<Vec<f64>> = r
        .times
        .iter()
        .zip(&r.trajectory)
        .map(|(&t, v)| std::iter::once(t).chain(v.iter().map(|z| z.norm_sqr())).collect())
        .collect();
    out.csv("trajectory.csv", &columns, &rows)?;
    let f = fidelity(&r.final_state, &target);
    out.json(
        "propagate.json",
        "qgraph.propagate/1",
        &json!({
            "levels": n,
            "initial": cfg.control.initial,
            "target": cfg.control.target,
            "duration": t_end,
            "k": r.k,
            "steps": r.steps,
            "max-step-drift": r.max_step_drift(),
            "final-populations": r.final_state.iter().map(|z| z.norm_sqr()).collect::<Vec<_>>(),
            "fidelity": f,
        }),
    )?;
    Ok(Verdict { ok: true, summary: format!("propagated to T = {t_end} in {} steps; fidelity to level {} is {f:.6}", r.steps, cfg.control.target) })
}

fn check_simple(cfg: &RunConfig, file: &GraphFile, g: &MetricGraph, out: &mut Artifacts) -> Result<Verdict, CliError> {
    let (a, drawn) = match &file.potential {
        Some(_) => (file.potential(g).map_err(config_err)?, false),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            (EdgePotential::from_a((0..g.edge_count()).map(|_| rng.gen_range(-3.0..3.0)).collect()), true)
        }
    };
    let s = is_simple(&a, g);
    let offending: Vec<&str> = s
        .residuals
        .iter()
        .filter(|(_, r)| r.abs() > qgraph_core::gauge::SIMPLE_TOL)
        .map(|(v, _)| v.as_str())
        .collect();
    out.json(
        "simple.json",
        "qgraph.simple/1",
        &json!({
            "potential": a.a,
            "random-potential": drawn,
            "simple": s.simple,
            "residuals": s.residuals.iter().map(|(v, r)| json!({"vertex": v, "residual": r})).collect::<Vec<_>>(),
            "offending-vertices": offending,
            "simple-subspace": simple_subspace(g),
        }),
    )?;
    let summary = if s.simple {
        format!("potential {:?} is simple", a.a)
    } else {
        let report: Vec<String> = s
            .residuals
            .iter()
            .filter(|(_, r)| r.abs() > qgraph_core::gauge::SIMPLE_TOL)
            .map(|(v, r)| format!("vertex {v}: residual {r}"))
            .collect();
        format!("potential {:?} is not simple; {}", a.a, report.join("; "))
    };
    Ok(Verdict { ok: s.simple, summary })
}

fn check_controllability(
    cfg: &RunConfig,
    file: &GraphFile,
    g: &MetricGraph,
    out: &mut Artifacts,
) -> Result<Verdict, CliError> {
    let sys = system(cfg, file, g)?;
    let rep = chambrion_check(&sys, &chambrion_options(cfg)).map_err(config_err)?;
    out.json(
        "controllability.json",
        "qgraph.controllability/1",
        &json!({
            "potential": sys.potential.a,
            "beta": sys.beta,
            "perturbation": sys.perturbation,
            "report": rep,
        }),
    )?;
    Ok(Verdict { ok: rep.conditions_hold, summary: rep.verdict.clone() })
}

fn synthesize(cfg: &RunConfig, file: &GraphFile, g: &MetricGraph, out: &mut Artifacts) -> Result<Verdict, CliError> {
    let sys = system(cfg, file, g)?;
    let c = &cfg.control;
    let opts = SynthesisOptions {
        cells: c.cells,
        duration: c.duration,
        optimize_duration: c.duration.is_none(),
        restarts: c.restarts,
        seed: cfg.seed,
        ..SynthesisOptions::default()
    };
    let n = sys.levels();
    let psi0 = BilinearSystem::basis_state(n, c.initial);
    let target = BilinearSystem::basis_state(n, c.target);
    let res = synthesize_pulse(&sys, &psi0, &target, c.eps, c.t_max, &opts).map_err(runtime_err)?;
    out.json("pulse.json", PULSE_SCHEMA, &PulseFile::from_pulse(&res.pulse))?;
    out.json("synthesis.json", "qgraph.synthesis/1", &json!({ "result": res }))?;
    let summary = format!(
        "fidelity {:.6} with {} cells over T = {:.6}{}",
        res.fidelity,
        res.pulse.cells(),
        res.pulse.duration(),
        res.flag.as_ref().map(|f| format!(" ({f})")).unwrap_or_default()
    );
    Ok(Verdict { ok: res.reached, summary })
}

fn demo(cfg: &RunConfig, file: &GraphFile, g: &MetricGraph, out: &mut Artifacts) -> Result<Verdict, CliError> {
    let delta = delta_of(file)?;
    let c = &cfg.control;
    let opts = DemoOptions {
        levels: cfg.solver.levels,
        frame_levels: cfg.solver.frame_levels,
        elements_per_unit: cfg.solver.elements_per_unit,
        c: c.c,
        potential: match file.potential {
            Some(_) => Some(file.potential(g).map_err(config_err)?.a),
            None => None,
        },
        beta: cfg.beta.clone(),
        beta_scale: c.beta_scale,
        duration: c.duration.unwrap_or(0.1),
        cells: c.cells,
        restarts: c.restarts,
        seed: cfg.seed,
        t_max: c.t_max,
        windows: c.windows,
        steps_per_window: c.steps_per_window,
        mu0: mu0(cfg)?.unwrap_or(Rational { num: 1, den: 1000 }),
        mu1: c.mu1,
        chambrion: chambrion_options(cfg),
        ..DemoOptions::default()
    };
    let o = end_to_end_boundary_demo(g, delta, c.initial, c.target, c.eps, &opts).map_err(config_err)?;
    let r = &o.report;
    out.json("pulse.json", PULSE_SCHEMA, &PulseFile::from_pulse(&r.synthesis.pulse))?;
    out.json("demo.json", "qgraph.demo/1", &json!({ "report": r }))?;
    let mut columns = vec!["t".to_string(), "window_integral".to_string()];
    columns.extend(g.edges().iter().map(|e| format!("A_{}", e.id)));
    let rows: Vec<Vec<f64>> = o
        .series
        .times
        .iter()
        .zip(&o.series.window_integral)
        .zip(&o.series.potentials)
        .map(|((&t, &s), p)| [t, s].into_iter().chain(p.iter().copied()).collect())
        .collect();
    out.csv("boundary.csv", &columns, &rows)?;
    let n = opts.levels;
    let mut columns = vec!["t".to_string()];
    columns.extend((0..n).map(|i| format!("full_p{i}")));
    columns.extend((0..n).map(|i| format!("aux_p{i}")));
    let rows: Vec<Vec<f64>> = o
        .trajectory
        .iter()
        .map(|s| std::iter::once(s.t).chain(s.full.iter().copied()).chain(s.aux.iter().copied()).collect())
        .collect();
    out.csv("trajectory.csv", &columns, &rows)?;
    let summary = format!(
        "{}; Galerkin fidelity {:.4}, auxiliary {:.4}, full {:.4} (gap {:.4}); sup|A - a| = {:.6} against {:.6}",
        r.controllability.verdict,
        r.fidelity_galerkin,
        r.fidelity_aux,
        r.fidelity_full,
        r.fidelity_gap,
        r.sup_deviation,
        r.window_bound
    );
    Ok(Verdict { ok: r.consistent, summary })
}

fn gauge_map(cfg: &RunConfig, file: &GraphFile, g: &MetricGraph, out: &mut Artifacts) -> Result<Verdict, CliError> {
    let u: VertexConditions = file.conditions(g).map_err(config_err)?;
    if !u.is_local() {
        return Err(CliError::Config("gauge-map needs local vertex conditions".into()));
    }
    let chi = match (&cfg.phase, &file.conditions) {
        (Some(p), _) => GaugePhase { a: p.a.clone(), b: p.b.clone() },
        (None, Some(ConditionsSpec::QuasiDelta { .. })) => {
            let chi = file.slot_chi(g).map_err(config_err)?.unwrap_or_default();
            chi_from_vertex_phases(g, &chi).map_err(config_err)?
        }
        (None, _) => GaugePhase::zeros(g.edge_count()),
    };
    let conj = conjugate_conditions(&u, &chi, g).map_err(config_err)?;
    let magnetic = to_magnetic_frame(&u, &chi, g).map_err(config_err)?;
    let delta_dev = file.delta().and_then(|d| {
        qgraph_core::extensions::delta_type_conditions(g, d)
            .ok()
            .map(|v| (&magnetic.matrix() - v.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max))
    });
    out.json(
        "gauge-map.json",
        "qgraph.gauge-map/1",
        &json!({
            "phase": {"a": chi.a, "b": chi.b},
            "slot-phases": chi.slot_phases(g),
            "potential": chi.a,
            "conditions": matrix_json(&u.matrix()),
            "conjugated": matrix_json(&conj.matrix()),
            "magnetic-frame": matrix_json(&magnetic.matrix()),
            "delta-type-deviation": delta_dev,
        }),
    )?;
    let summary = match delta_dev {
        Some(d) => format!("magnetic potential {:?}; deviation of T U T^-1 from δ-type conditions {d:.3e}", chi.a),
        None => format!("magnetic potential {:?}", chi.a),
    };
    Ok(Verdict { ok: true, summary })
}
