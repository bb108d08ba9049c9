//! The five subcommands. Each reads what it needs from the output
//! directory, writes its results there atomically and reports whether every
//! iterative step converged.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use sar_trpca::imaging_motion::{
    backproject, best_focus, extract_trace, extract_trace_refined, fit_motion, MotionSeed,
};
use sar_trpca::io::{read_data_matrix, write_csv, write_data_matrix, write_json, write_pgm, Provenance};
use sar_trpca::norms_analysis::{eta_report, matrix_eta_report, sweep, EtaReport, EtaVariant, SweepRow};
use sar_trpca::rpca::{relative_error, separate, EtaChoice, Method};
use sar_trpca::sar_model::{synthesize, DataMatrix};
use sar_trpca::tensorize::to_tensor;
use sar_trpca::Error;

use crate::config::{ConfigError, EtaMode, Resolved};

pub const D_FILE: &str = "D.srt1";
pub const D_L_FILE: &str = "D_L.srt1";
pub const D_S_FILE: &str = "D_S.srt1";

/// Why a command stopped, mapped onto the exit status.
#[derive(Debug, thiserror::Error)]
pub enum Failure {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn is_input_error(e: &Error) -> bool {
    match e {
        Error::Io { .. }
        | Error::Format { .. }
        | Error::InvalidParameter(_)
        | Error::WindowCoverage { .. }
        | Error::Shape(_) => true,
        Error::Panel { source, .. } => is_input_error(source),
        _ => false,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if is_input_error(&e) {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

/// What a successful command reports.
#[derive(Debug)]
pub struct Outcome {
    pub converged: bool,
    pub summary: String,
}

fn done(summary: String) -> Result<Outcome, Failure> {
    Ok(Outcome {
        converged: true,
        summary,
    })
}

fn out_dir(r: &Resolved) -> Result<PathBuf, Failure> {
    let dir = r.config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn read_input(path: &Path) -> Result<DataMatrix, Failure> {
    Ok(read_data_matrix(path)?.0)
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

pub fn simulate(r: &Resolved) -> Result<Outcome, Failure> {
    let dir = out_dir(r)?;
    let d_l = synthesize(&r.scene.stationary_only(), &r.radar)?;
    let d_s = synthesize(&r.scene.movers_only(), &r.radar)?;
    let d = synthesize(&r.scene, &r.radar)?;
    let residual = d.values.distance(&(&d_l.values + &d_s.values));
    for (name, m) in [(D_FILE, &d), (D_L_FILE, &d_l), (D_S_FILE, &d_s)] {
        write_data_matrix(&dir.join(name), m, &r.provenance)?;
    }
    let energy = |m: &DataMatrix| m.values.frobenius_norm().powi(2);
    let (rows, cols) = d.values.shape();
    write_json(
        &dir.join("simulate.json"),
        &json!({
            "provenance": r.provenance,
            "rows": rows,
            "cols": cols,
            "stationary_targets": r.scene.stationary.len(),
            "movers": r.scene.movers.len(),
            "energy_total": energy(&d),
            "energy_stationary": energy(&d_l),
            "energy_moving": energy(&d_s),
            "split_residual_fro": residual,
        }),
    )?;
    done(format!(
        "simulated {rows}x{cols}; energy stationary {:.4e}, moving {:.4e}; |D - D_L - D_S|_F = {residual:e}",
        energy(&d_l),
        energy(&d_s)
    ))
}

#[derive(Serialize)]
struct SeparationReport<'a> {
    provenance: &'a Provenance,
    method: Method,
    eta_mode: EtaMode,
    etas: &'a [f64],
    iterations: usize,
    final_residual: f64,
    converged: bool,
    sub_fraction: Option<f64>,
    overlap: Option<f64>,
    n3: Option<usize>,
    /// η quantities of the returned parts under the method's norm.
    norms: Option<EtaReport>,
    /// Relative Frobenius errors against the simulated parts, when present.
    low_rank_error: Option<f64>,
    sparse_error: Option<f64>,
}

pub fn separate_cmd(r: &Resolved) -> Result<Outcome, Failure> {
    let dir = out_dir(r)?;
    let d = read_input(&dir.join(D_FILE))?;
    let truth = match (dir.join(D_L_FILE), dir.join(D_S_FILE)) {
        (l, s) if l.exists() && s.exists() => Some((read_input(&l)?, read_input(&s)?)),
        _ => None,
    };
    let sep = r.config.separation;
    let eta = match sep.eta_mode {
        EtaMode::Explicit => EtaChoice::Explicit(sep.eta.expect("validated")),
        EtaMode::Default => EtaChoice::Default,
        EtaMode::Oracle => match &truth {
            Some((l, s)) => EtaChoice::Oracle { low_rank: l, sparse: s },
            None => {
                return Err(Failure::Config(format!(
                    "eta mode oracle needs {D_L_FILE} and {D_S_FILE} in {}",
                    dir.display()
                )))
            }
        },
    };
    let plan = (sep.method != Method::Matrix).then_some(&r.plan);
    let out = separate(&d, sep.method, plan, eta, &r.config.solver.with_eta(1.0))?;
    let m = sep.method.as_str();
    write_data_matrix(&dir.join(format!("L_{m}.srt1")), &out.low_rank, &r.provenance)?;
    write_data_matrix(&dir.join(format!("S_{m}.srt1")), &out.sparse, &r.provenance)?;

    let norms = match (sep.method, plan) {
        (Method::Matrix, _) => matrix_eta_report(&out.low_rank.values, &out.sparse.values).ok(),
        (method, Some(p)) => {
            let variant = if method == Method::Tensor {
                EtaVariant::Fourier
            } else {
                EtaVariant::Decoupled
            };
            let l = to_tensor(&out.low_rank, p)?;
            let s = to_tensor(&out.sparse, p)?;
            eta_report(&l.tensor, &s.tensor, variant).ok()
        }
        _ => None,
    };
    let errors = truth
        .as_ref()
        .map(|(l, s)| (relative_error(&out.low_rank, l), relative_error(&out.sparse, s)));
    let report = SeparationReport {
        provenance: &r.provenance,
        method: sep.method,
        eta_mode: sep.eta_mode,
        etas: &out.etas,
        iterations: out.iterations,
        final_residual: out.final_residual,
        converged: out.converged,
        sub_fraction: plan.map(|_| r.config.tensor.sub_fraction),
        overlap: plan.map(|_| r.config.tensor.overlap),
        n3: plan.map(|p| p.n3),
        norms,
        low_rank_error: errors.map(|e| e.0),
        sparse_error: errors.map(|e| e.1),
    };
    write_json(&dir.join(format!("separate_{m}.json")), &report)?;
    let mut summary = format!(
        "{m}: {} iterations, residual {:.2e}, eta {:.4e}{}",
        out.iterations,
        out.final_residual,
        out.etas[0],
        if out.etas.len() > 1 { " (first panel)" } else { "" }
    );
    if let Some((el, es)) = errors {
        summary.push_str(&format!("; relative error L {el:.3}, S {es:.3}"));
    }
    if !out.converged {
        summary.push_str("; NOT CONVERGED");
    }
    Ok(Outcome {
        converged: out.converged,
        summary,
    })
}

const IMAGE_HEADER: &str = "ix,iy,x,y,z,magnitude,re,im";

pub fn image(r: &Resolved, input: &Path) -> Result<Outcome, Failure> {
    let dir = out_dir(r)?;
    let d = read_input(input)?;
    let velocity = r.config.image.velocity;
    let img = backproject(&d, &r.scene, &r.image_grid, velocity)?;
    let g = &img.grid;
    let mut rows = Vec::with_capacity(g.nx * g.ny);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let (p, z) = (g.point(ix, iy), img.at(ix, iy));
            rows.push(format!(
                "{ix},{iy},{},{},{},{},{},{}",
                p.x,
                p.y,
                p.z,
                z.norm(),
                z.re,
                z.im
            ));
        }
    }
    let name = format!("image_{}", stem(input));
    write_csv(&dir.join(format!("{name}.csv")), &r.provenance, IMAGE_HEADER, &rows)?;
    if r.config.image.pgm {
        write_pgm(&dir.join(format!("{name}.pgm")), &img.magnitudes(), g.nx, &r.provenance)?;
    }
    let (ix, iy, peak) = img.peak();
    let pos = img.peak_position();
    write_json(
        &dir.join(format!("{name}.json")),
        &json!({
            "provenance": r.provenance,
            "input": input,
            "grid": g,
            "velocity": velocity,
            "peak_index": [ix, iy],
            "peak_position": pos,
            "peak_magnitude": peak,
            "peak_to_background": img.peak_to_background(),
            "out_of_window": img.out_of_window,
        }),
    )?;
    done(format!(
        "imaged {} at v = ({}, {}, {}); peak {peak:.4e} at ({:.3}, {:.3}) m, peak/background {:.2}",
        input.display(),
        velocity.x,
        velocity.y,
        velocity.z,
        pos.x,
        pos.y,
        img.peak_to_background()
    ))
}

pub fn estimate(r: &Resolved, input: &Path) -> Result<Outcome, Failure> {
    let dir = out_dir(r)?;
    let s = read_input(input)?;
    let est_cfg = &r.config.estimate;
    let trace = if est_cfg.refine {
        extract_trace_refined(&s, est_cfg.threshold)?
    } else {
        extract_trace(&s, est_cfg.threshold)?
    };
    let focus = best_focus(&s, &r.scene, &r.image_grid, &est_cfg.seed_velocities())?;
    let seed = MotionSeed {
        position: focus.peak_position(),
        velocity: Some(focus.velocity),
    };
    let est = fit_motion(&trace, &r.scene, &r.radar, &seed, &est_cfg.fit)?;
    write_json(
        &dir.join("motion.json"),
        &json!({
            "provenance": r.provenance,
            "input": input,
            "seed": seed,
            "speed": est.speed(),
            "heading": est.heading(),
            "estimate": est,
        }),
    )?;
    let mut summary = format!(
        "{} trace rows; position ({:.3}, {:.3}) m, speed {:.3} m/s, heading {:.2} deg, max residual {:.2} samples",
        trace.len(),
        est.position.x,
        est.position.y,
        est.speed(),
        est.heading().to_degrees(),
        est.max_residual / r.radar.fast_dt
    );
    if est.flagged {
        summary.push_str("; FLAGGED");
    }
    Ok(Outcome {
        converged: est.converged,
        summary,
    })
}

type Field = (&'static str, fn(&SweepRow) -> f64);

/// Heatmap fields written per heading.
const HEATMAP_FIELDS: [Field; 4] = [
    ("eta_ratio_fourier", |r| r.eta_ratio_fourier),
    ("eta_ratio_decoupled", |r| r.eta_ratio_decoupled),
    ("mover_nuclear_ratio", |r| r.mover_nuclear_ratio),
    ("background_nuclear_ratio", |r| r.background_nuclear_ratio),
];

pub fn sweep_cmd(r: &Resolved) -> Result<Outcome, Failure> {
    let dir = out_dir(r)?;
    let grid = &r.config.sweep.grid;
    let rows = sweep(&r.scene, &r.radar, grid)?;
    let lines: Vec<String> = rows.iter().map(SweepRow::csv_line).collect();
    write_csv(&dir.join("sweep.csv"), &r.provenance, SweepRow::CSV_HEADER, &lines)?;
    if r.config.sweep.heatmaps {
        // rows are ordered by heading, then size, then overlap
        let per_alpha = grid.sub_fractions.len() * grid.overlaps.len();
        for (k, chunk) in rows.chunks(per_alpha).enumerate() {
            for (field, get) in HEATMAP_FIELDS {
                let values: Vec<f64> = chunk.iter().map(get).collect();
                write_pgm(
                    &dir.join(format!("sweep_{field}_alpha{k}.pgm")),
                    &values,
                    grid.overlaps.len(),
                    &r.provenance,
                )?;
            }
        }
    }
    let invalid = rows
        .iter()
        .filter(|r| r.status != sar_trpca::norms_analysis::SweepStatus::Ok)
        .count();
    done(format!(
        "swept {} grid points ({invalid} without a valid layout)",
        rows.len()
    ))
}
