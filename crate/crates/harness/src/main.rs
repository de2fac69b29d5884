use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use horotorus_harness::config::{ExperimentConfig, Kind, Suite};
use horotorus_harness::run::run;
use horotorus_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "horotorus", version, about = "Experiments on expanding horospherical translates of affine lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce --g0 into the fundamental domain.
    Reduce(Flags),
    /// zeta(b0, T) for each T in --t / --t-grid.
    Zeta(Flags),
    /// Rotation counts against the effective Weyl bound; --b0 is alpha.
    Weyl(Flags),
    /// Per-sample decomposition data of a_t u y0.
    Orbit(Flags),
    /// The multiset gamma^T m0 at each s in --t-grid.
    GammaOrbit(Flags),
    /// Fourier coefficients of the torus pushforward.
    Fourier(Flags),
    /// Largest rho-ball mass of the torus pushforward.
    Concentration(Flags),
    /// Orbit average of the Siegel transform of the radius-rho indicator.
    Siegel(Flags),
    /// Acceptance criteria, one PASS/FAIL line each.
    Acceptance(Flags),
}

#[derive(Args, Clone, Debug, Default)]
struct Flags {
    /// Dimension; the split is m = 1, n = d - 1 unless --m/--n are given.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    t: Option<f64>,
    /// Comma-separated times.
    #[arg(long, value_delimiter = ',')]
    t_grid: Option<Vec<f64>>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated coordinates, "p/q" or decimal.
    #[arg(long, value_delimiter = ',')]
    b0: Option<Vec<String>>,
    /// Rows separated by ';', entries by ','.
    #[arg(long)]
    g0: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    max_freq: Option<i64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
    /// JSON config; its values take precedence over flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    suite: Option<Suite>,
    /// Comma-separated criterion numbers.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u32>>,
}

fn parse_rows(text: &str) -> Result<Vec<Vec<f64>>> {
    text.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| x.trim().parse::<f64>().map_err(|e| HarnessError::Config(format!("g0 entry {x:?}: {e}"))))
                .collect()
        })
        .collect()
}

fn build(kind: Kind, f: Flags) -> Result<ExperimentConfig> {
    if let Some(path) = &f.config {
        let cfg = ExperimentConfig::load(path)?;
        if cfg.kind != kind {
            return Err(HarnessError::Config(format!("config is for {:?}, not {kind:?}", cfg.kind)));
        }
        return Ok(cfg);
    }
    let mut cfg = ExperimentConfig::new(kind);
    match (f.d, f.m, f.n) {
        (_, Some(m), Some(n)) => {
            if f.d.is_some_and(|d| d != m + n) {
                return Err(HarnessError::Config("--d must equal --m + --n".into()));
            }
            cfg.m = m;
            cfg.n = n;
        }
        (Some(d), m, n) => {
            if d < 2 {
                return Err(HarnessError::Config("--d must be at least 2".into()));
            }
            cfg.m = m.unwrap_or_else(|| d - n.unwrap_or(d - 1));
            cfg.n = d - cfg.m;
        }
        (None, Some(_), None) | (None, None, Some(_)) => {
            return Err(HarnessError::Config("give both --m and --n, or --d".into()));
        }
        (None, None, None) => {}
    }
    cfg.t = f.t;
    cfg.t_grid = f.t_grid;
    cfg.b0 = f.b0;
    if let Some(g) = &f.g0 {
        cfg.g0 = Some(parse_rows(g)?);
    }
    if let Some(s) = f.samples {
        cfg.samples = s;
    }
    if let Some(s) = f.seed {
        cfg.seed = s;
    }
    if let Some(m) = f.max_freq {
        cfg.max_freq = m;
    }
    if let Some(o) = f.out {
        cfg.out = o;
    }
    cfg.epsilon = f.epsilon;
    cfg.rho = f.rho;
    cfg.budget = f.budget;
    cfg.suite = f.suite;
    cfg.criteria = f.criteria;
    cfg.validate()?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match cli.command {
        Command::Reduce(f) => (Kind::Reduce, f),
        Command::Zeta(f) => (Kind::Zeta, f),
        Command::Weyl(f) => (Kind::Weyl, f),
        Command::Orbit(f) => (Kind::Orbit, f),
        Command::GammaOrbit(f) => (Kind::GammaOrbit, f),
        Command::Fourier(f) => (Kind::Fourier, f),
        Command::Concentration(f) => (Kind::Concentration, f),
        Command::Siegel(f) => (Kind::Siegel, f),
        Command::Acceptance(f) => (Kind::Acceptance, f),
    };
    let outcome = build(kind, flags).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(report) => {
            for (k, v) in &report.values {
                println!("{k} = {v}");
            }
            for fit in &report.fits {
                println!(
                    "fit {}: slope {:.6} ± {:.6}, residual {:.6}",
                    fit.name, fit.fit.slope, fit.fit.slope_ci, fit.fit.residual
                );
            }
            for c in report.failures() {
                eprintln!("FAILED {}: {}", c.name, c.detail);
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
