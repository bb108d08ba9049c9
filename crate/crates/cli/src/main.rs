mod commands;
mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{EtaMode, ExperimentConfig, Resolved};
use sar_trpca::rpca::Method;
use sar_trpca::sar_model::Vec3;

/// Moving-target separation in SAR data with matrix and tensor robust PCA.
///
/// Exit status: 0 success, 2 configuration or input error, 3 numerical
/// failure, 4 non-convergence (outputs are still written).
#[derive(Parser, Debug)]
#[command(name = "sar-trpca", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output_dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Random seed; overrides `seed`.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Synthesise D, D_L and D_S.
    Simulate(Common),
    /// Split D into low-rank and sparse parts.
    Separate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_enum)]
        eta_mode: Option<EtaMode>,
        /// Trade-off weight; implies `--eta-mode explicit` unless given.
        #[arg(long, value_name = "VALUE", allow_negative_numbers = true)]
        eta: Option<f64>,
    },
    /// Sweep the sub-aperture hyper-parameters.
    Sweep(Common),
    /// Backproject a matrix file.
    Image {
        #[command(flatten)]
        common: Common,
        /// Matrix file; defaults to the sparse part of the configured method.
        input: Option<PathBuf>,
        /// Velocity hypothesis "vx,vy,vz" in m/s.
        #[arg(long, value_parser = parse_velocity, allow_hyphen_values = true)]
        velocity: Option<Vec3>,
    },
    /// Fit position and velocity to a sparse part.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Matrix file; defaults to the sparse part of the configured method.
        input: Option<PathBuf>,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Matrix,
    Decoupled,
    Tensor,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Matrix => Method::Matrix,
            MethodArg::Decoupled => Method::Decoupled,
            MethodArg::Tensor => Method::Tensor,
        }
    }
}

fn parse_velocity(s: &str) -> Result<Vec3, String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    match parts.as_slice() {
        [x, y, z] if parts.iter().all(|v| v.is_finite()) => Ok(Vec3::new(*x, *y, *z)),
        _ => Err(format!("expected three finite numbers \"vx,vy,vz\", got {s:?}")),
    }
}

fn load(common: &Common, edit: impl FnOnce(&mut ExperimentConfig)) -> Result<Resolved, Failure> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Config(format!("--threads {n}: {e}")))?;
    }
    let mut cfg = ExperimentConfig::load(&common.config)?;
    if let Some(dir) = &common.out {
        cfg.output_dir = dir.clone();
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    edit(&mut cfg);
    Ok(cfg.resolve()?)
}

fn default_input(r: &Resolved, input: Option<PathBuf>) -> PathBuf {
    input.unwrap_or_else(|| {
        let m = r.config.separation.method.as_str();
        Path::new(&r.config.output_dir).join(format!("S_{m}.srt1"))
    })
}

fn run(cli: Cli) -> Result<commands::Outcome, Failure> {
    match cli.command {
        Command::Simulate(c) => commands::simulate(&load(&c, |_| {})?),
        Command::Sweep(c) => commands::sweep_cmd(&load(&c, |_| {})?),
        Command::Separate {
            common,
            method,
            eta_mode,
            eta,
        } => {
            let r = load(&common, |cfg| {
                let sep = &mut cfg.separation;
                if let Some(m) = method {
                    sep.method = m.into();
                }
                if eta.is_some() {
                    sep.eta = eta;
                    sep.eta_mode = EtaMode::Explicit;
                }
                if let Some(mode) = eta_mode {
                    sep.eta_mode = mode;
                }
            })?;
            commands::separate_cmd(&r)
        }
        Command::Image {
            common,
            input,
            velocity,
        } => {
            let r = load(&common, |cfg| {
                if let Some(v) = velocity {
                    cfg.image.velocity = v;
                }
            })?;
            let input = default_input(&r, input);
            commands::image(&r, &input)
        }
        Command::Estimate { common, input } => {
            let r = load(&common, |_| {})?;
            let input = default_input(&r, input);
            commands::estimate(&r, &input)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            println!("{}", out.summary);
            if out.converged {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(4)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
