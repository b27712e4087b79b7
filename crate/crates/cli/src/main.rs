//! Command-line driver: dielectric tables, energy and force sweeps, model
//! comparison and the invariant suite.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration error, 3 a row did
//! not converge, 4 validation failure.

mod config;
mod run;
mod validate;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use polariton_casimir::QuadSettings;

use config::{ModelSel, Overrides, RunConfig, Spacing, Sweep, Variable};
use run::{Kind, Status, Table};

#[derive(Parser)]
#[command(name = "polariton-casimir", version, about = "Casimir energy of an absorbing dielectric in two microscopic models")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
    /// JSON run configuration; flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    model: Option<ModelSel>,
    /// Mirror separation (held fixed unless swept).
    #[arg(long, global = true)]
    a: Option<f64>,
    /// Field–atom coupling (held fixed unless swept).
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Number of sweep points.
    #[arg(long, global = true)]
    points: Option<usize>,
    /// Output file; stdout if absent. The resolved config is written next to it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    rel_tol: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true, env = "POLARITON_CASIMIR_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Verb {
    /// Table of ε(ω) − 1 on a frequency grid.
    Epsilon,
    /// Medium-induced Casimir energy E¹ of the selected models.
    Energy,
    /// Medium-induced Casimir force F¹ = −dE¹/da.
    Force,
    /// Both models at the same dielectric function, and their difference.
    Compare,
    /// Invariant suite; exit status 4 on any failure.
    Validate,
}

fn default_sweep(verb: Verb) -> Option<Sweep> {
    match verb {
        Verb::Epsilon => Some(Sweep {
            variable: Variable::Omega,
            from: 0.01,
            to: 100.0,
            points: 201,
            spacing: Spacing::Log,
        }),
        Verb::Energy | Verb::Force | Verb::Compare => Some(Sweep {
            variable: Variable::A,
            from: 1.0,
            to: 80.0,
            points: 20,
            spacing: Spacing::Log,
        }),
        Verb::Validate => None,
    }
}

fn default_quad(verb: Verb) -> QuadSettings {
    // The force is a difference quotient of energies and cannot reach the
    // energy tolerance.
    match verb {
        Verb::Force => QuadSettings::default().with_rel_tol(1e-7).with_abs_tol(1e-13),
        _ => QuadSettings::default().with_rel_tol(1e-8).with_abs_tol(1e-12),
    }
}

enum Failure {
    Io(anyhow::Error),
    Config(String),
    Convergence,
    Validation,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Config(_) => 2,
            Failure::Convergence => 3,
            Failure::Validation => 4,
        }
    }
}

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let base = match &cli.config {
        Some(p) => RunConfig::load(p).map_err(Failure::Config)?,
        None => RunConfig::default(),
    };
    let o = Overrides {
        model: cli.model,
        a: cli.a,
        alpha: cli.alpha,
        points: cli.points,
        out: cli.out.clone(),
        rel_tol: cli.rel_tol,
    };
    base.resolve(&o, default_sweep(cli.verb), default_quad(cli.verb)).map_err(Failure::Config)
}

fn open_output(cfg: &RunConfig) -> anyhow::Result<Box<dyn Write>> {
    Ok(match &cfg.output.path {
        Some(p) => {
            let f = File::create(p).with_context(|| format!("cannot create {}", p.display()))?;
            let mut cp = p.clone().into_os_string();
            cp.push(".config.json");
            let cp = PathBuf::from(cp);
            let text = serde_json::to_string_pretty(cfg)?;
            std::fs::write(&cp, text + "\n").with_context(|| format!("cannot write {}", cp.display()))?;
            Box::new(BufWriter::new(f))
        }
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn emit(cfg: &RunConfig, table: &Table) -> Result<(), Failure> {
    for (i, r) in table.rows.iter().enumerate() {
        for m in &r.messages {
            eprintln!("row {i}: {m}");
        }
    }
    let write = || -> anyhow::Result<()> {
        let mut out = open_output(cfg)?;
        table.write(cfg.output.format, &mut out)?;
        out.flush()?;
        Ok(())
    };
    write().map_err(Failure::Io)?;
    match table.worst() {
        Status::Ok => Ok(()),
        _ => Err(Failure::Convergence),
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = resolve(cli)?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("cannot start {n} threads: {e}")))?;
    }
    let table = match cli.verb {
        Verb::Epsilon => run::epsilon_table(&cfg),
        Verb::Energy => run::casimir_table(&cfg, Kind::Energy),
        Verb::Force => run::casimir_table(&cfg, Kind::Force),
        Verb::Compare => run::casimir_table(&cfg, Kind::Compare),
        Verb::Validate => {
            let checks = validate::run(&cfg);
            let mut lines = String::new();
            for c in &checks {
                let tag = match c.pass {
                    Some(true) => "PASS",
                    Some(false) => "FAIL",
                    None => "INFO",
                };
                lines.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
            }
            let write = || -> anyhow::Result<()> {
                let mut out = open_output(&cfg)?;
                out.write_all(lines.as_bytes())?;
                out.flush()?;
                Ok(())
            };
            write().map_err(Failure::Io)?;
            return if checks.iter().any(|c| c.pass == Some(false)) {
                Err(Failure::Validation)
            } else {
                Ok(())
            };
        }
    }
    .map_err(Failure::Config)?;
    emit(&cfg, &table)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Io(e) => eprintln!("error: {e:#}"),
                Failure::Config(e) => eprintln!("config error: {e}"),
                Failure::Convergence => eprintln!("error: some rows did not converge"),
                Failure::Validation => eprintln!("error: validation failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
