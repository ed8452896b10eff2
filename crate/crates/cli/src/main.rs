//! `phi3ren`: command-line front end for the expansion, contraction, graph,
//! scaling, kernel and Monte-Carlo modules.
//!
//! Exit codes: 0 ok, 1 Monte-Carlo check outside tolerance, 2 bad arguments
//! or configuration, 3 domain refusal, 4 numerical non-convergence.

mod commands;
mod config;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use commands::Validation;
use config::FileConfig;
use phi3ren::Error;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Dot,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Dot => "dot",
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "phi3ren", version, about = "Perturbative expansion and renormalization of the cubic stochastic heat equation")]
struct Cli {
    /// Flat TOML file of default parameters; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Perturbative solution F_0, …, F_J as JSON.
    Expand {
        #[arg(long, allow_negative_numbers = true)]
        order: Option<i64>,
    },
    /// Divergent admissible graphs (ρ ≥ 0) up to N_max vertices.
    Diagrams {
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        nmax: Option<usize>,
    },
    /// Two-point correlation ω₂ through the given order.
    Correlate {
        #[arg(long, allow_negative_numbers = true)]
        order: Option<i64>,
        #[arg(long)]
        d: Option<u32>,
    },
    /// Counterterm operators M_1, …, M_order of the renormalized equation.
    RenormEq {
        #[arg(long, allow_negative_numbers = true)]
        order: Option<i64>,
        #[arg(long)]
        d: Option<u32>,
    },
    /// Estimated weighted scaling degree of a heat-kernel power.
    Sd {
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        power: Option<u32>,
    },
    /// Spectral-representation check (--kl) or extension-difference fit (--fit).
    Kernel {
        #[arg(long, conflicts_with = "fit", required_unless_present = "fit")]
        kl: bool,
        #[arg(long)]
        fit: bool,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        b: Option<f64>,
    },
    /// Lattice Monte-Carlo estimates against engine predictions.
    Mc {
        #[arg(long, value_enum)]
        validate: Validation,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::InvalidArgument(_) | Error::Stability { .. } | Error::UnknownSymbol(_)) => 2,
        Some(Error::NonConvergence(_) | Error::DegenerateRegression(_)) => 4,
        Some(_) => 3,
        None => 2,
    }
}

fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let mut cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let fmt = |default| cli.format.unwrap_or(default);
    let out = match cli.cmd {
        Command::Expand { order } => commands::expand(pick(order, cfg.order, 2), fmt(Format::Json))?,
        Command::Diagrams { d, nmax } => commands::diagrams(pick(d, cfg.d, 3), nmax.or(cfg.nmax), fmt(Format::Csv))?,
        Command::Correlate { order, d } => {
            commands::correlate(pick(d, cfg.d, 3), pick(order, cfg.order, 1), fmt(Format::Json))?
        }
        Command::RenormEq { order, d } => {
            commands::renorm_eq(pick(d, cfg.d, 3), pick(order, cfg.order, 2), fmt(Format::Json))?
        }
        Command::Sd { d, power } => {
            commands::sd(pick(d, cfg.d, 3), pick(power, cfg.power, 1), &cfg, fmt(Format::Csv))?
        }
        Command::Kernel { kl, fit: _, d, n, a, b } => {
            cfg.a = a.or(cfg.a);
            cfg.b = b.or(cfg.b);
            let (d, n) = (d.or(cfg.d), n.or(cfg.n));
            if kl {
                commands::kernel_kl(d, n, &cfg, fmt(Format::Csv))?
            } else {
                commands::kernel_fit(d.unwrap_or(2), n.unwrap_or(2), &cfg, fmt(Format::Csv))?
            }
        }
        Command::Mc { validate, seed, samples } => {
            cfg.seed = seed.or(cfg.seed);
            cfg.samples = samples.or(cfg.samples);
            commands::mc(validate, &cfg, fmt(Format::Csv))?
        }
    };
    match &cli.out {
        Some(p) => std::fs::write(p, &out.text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(out.text.as_bytes())?,
    }
    Ok(out.ok)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: Monte-Carlo estimates outside {} standard errors", commands::MC_TOLERANCE);
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
