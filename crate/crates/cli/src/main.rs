//! `qgraph`: spectra, gauge maps, propagation and boundary control of
//! quantum graphs.
//!
//! Exit status: 0 on success, 1 when a check's verdict is negative, 2 on
//! configuration or computation errors.

mod commands;
mod config;
mod output;
mod pulse;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qgraph_core::io::{ConditionsSpec, PerEdge, PotentialSpec};

use config::{PhaseConfig, RunConfig};
use output::Artifacts;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "qgraph", version, about = "Quantum graph spectra, gauge maps and boundary control")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Lowest eigenvalues of the δ-type (magnetic) or quasi-δ Laplacian.
    Spectrum(Flags),
    /// Propagate the Galerkin control system under a pulse file.
    Propagate(Flags),
    /// Check whether an edge potential is simple.
    CheckSimple(Flags),
    /// Gap relations and coupling chain of the Galerkin system.
    CheckControllability(Flags),
    /// Search a piecewise-constant pulse for a level transfer.
    Synthesize(Flags),
    /// Controllability check, synthesis, boundary reconstruction and full propagation.
    Demo(Flags),
    /// Conjugate vertex conditions by a gauge phase.
    GaugeMap(Flags),
}

impl Command {
    fn parts(&self) -> (&'static str, &Flags) {
        match self {
            Command::Spectrum(f) => ("spectrum", f),
            Command::Propagate(f) => ("propagate", f),
            Command::CheckSimple(f) => ("check-simple", f),
            Command::CheckControllability(f) => ("check-controllability", f),
            Command::Synthesize(f) => ("synthesize", f),
            Command::Demo(f) => ("demo", f),
            Command::GaugeMap(f) => ("gauge-map", f),
        }
    }
}

#[derive(Args, Debug, Clone)]
struct Flags {
    /// JSON run configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Graph file, or one of g0-loop, bouquet-b3, g1, g2.
    #[arg(long)]
    graph: Option<String>,
    /// δ-type conditions with this parameter.
    #[arg(long, allow_hyphen_values = true)]
    delta: Option<f64>,
    /// Edge-constant potential, one value per edge.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    potential: Option<Vec<f64>>,
    /// Control direction, one value per edge.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    /// Gauge phase slopes for gauge-map.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    chi_a: Option<Vec<f64>>,
    /// Gauge phase offsets for gauge-map.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    chi_b: Option<Vec<f64>>,
    #[arg(long)]
    elements: Option<usize>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    frame_levels: Option<usize>,
    #[arg(long)]
    eigenvalues: Option<usize>,
    /// Propagator partition count.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Largest DOF count handled by the dense eigensolver.
    #[arg(long)]
    dense_cutover: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    initial: Option<usize>,
    #[arg(long)]
    target: Option<usize>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    cells: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    /// Pulse file for propagate.
    #[arg(long)]
    pulse: Option<String>,
    #[arg(long)]
    windows: Option<usize>,
    /// Perturbation size as n/d.
    #[arg(long)]
    mu0: Option<String>,
    #[arg(long)]
    mu1: Option<f64>,
    #[arg(long)]
    relation_bound: Option<i64>,
    #[arg(long)]
    relation_levels: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
}

fn build_config(command: &str, f: &Flags) -> Result<RunConfig, CliError> {
    let mut c = RunConfig::load(command, f.config.as_deref())?;
    macro_rules! set {
        ($flag:ident => $($field:ident).+) => {
            if let Some(v) = &f.$flag {
                c.$($field).+ = v.clone().into();
            }
        };
    }
    set!(graph => graph);
    set!(elements => solver.elements_per_unit);
    set!(levels => solver.levels);
    set!(frame_levels => solver.frame_levels);
    set!(eigenvalues => solver.eigenvalues);
    set!(k => solver.k);
    set!(tol => solver.tol);
    set!(dense_cutover => solver.dense_cutover);
    set!(c => control.c);
    set!(initial => control.initial);
    set!(target => control.target);
    set!(eps => control.eps);
    set!(t_max => control.t_max);
    set!(duration => control.duration);
    set!(cells => control.cells);
    set!(restarts => control.restarts);
    set!(pulse => control.pulse);
    set!(windows => control.windows);
    set!(mu0 => control.mu0);
    set!(mu1 => control.mu1);
    set!(relation_bound => control.relation_bound);
    set!(relation_levels => control.relation_levels);
    set!(seed => seed);
    set!(out => out);
    set!(beta => beta);
    if let Some(d) = f.delta {
        c.conditions = Some(ConditionsSpec::Delta { delta: d });
    }
    if let Some(a) = &f.potential {
        c.potential = Some(PotentialSpec { a: PerEdge::Ordered(a.clone()), b: None });
    }
    if f.chi_a.is_some() || f.chi_b.is_some() {
        let n = f.chi_a.as_ref().or(f.chi_b.as_ref()).map_or(0, Vec::len);
        c.phase = Some(PhaseConfig {
            a: f.chi_a.clone().unwrap_or_else(|| vec![0.0; n]),
            b: f.chi_b.clone().unwrap_or_else(|| vec![0.0; n]),
        });
    }
    c.validate()?;
    Ok(c)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let (name, flags) = cli.command.parts();
    let command_line: Vec<String> = std::env::args().skip(1).collect();
    let result = build_config(name, flags).and_then(|cfg| {
        let mut out = Artifacts::new(&cfg, &command_line)?;
        let text = output::canonical_json(&serde_json::to_value(&cfg).expect("config serialises"));
        out.write("config.json", &text)?;
        let v = commands::run(&cfg, &mut out)?;
        Ok((v, out))
    });
    match result {
        Ok((v, out)) => {
            println!("{}: {}", if v.ok { "ok" } else { "verdict failed" }, v.summary);
            for p in &out.written {
                println!("wrote {}", p.display());
            }
            ExitCode::from(if v.ok { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
