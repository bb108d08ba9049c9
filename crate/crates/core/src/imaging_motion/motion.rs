use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sar_model::{hypothesis_delay, DataMatrix, RadarConfig, Scene, Vec3};

pub const DEFAULT_STABILITY_THRESHOLD: f64 = 0.2;
pub const DEFAULT_V_MAX: f64 = 30.0;
/// Huber transition in units of the fast-time step.
pub const HUBER_DELTA_SAMPLES: f64 = 10.0;
const MIN_TRACE_POINTS: usize = 8;

/// One measured delay `y(s_j)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub s: f64,
    pub delay: f64,
}

/// Per-row magnitude argmax, keeping rows whose peak reaches
/// `threshold × global max`.
pub fn extract_trace(s: &DataMatrix, threshold: f64) -> Result<Vec<TracePoint>> {
    extract(s, threshold, false)
}

/// As [`extract_trace`], with the peak refined below one sample by fitting a
/// parabola to the log-magnitude of the argmax and its two neighbours (exact
/// for a Gaussian envelope).
pub fn extract_trace_refined(s: &DataMatrix, threshold: f64) -> Result<Vec<TracePoint>> {
    extract(s, threshold, true)
}

fn extract(s: &DataMatrix, threshold: f64, refine: bool) -> Result<Vec<TracePoint>> {
    if !(threshold.is_finite() && (0.0..=1.0).contains(&threshold)) {
        return Err(Error::InvalidParameter(format!(
            "stability threshold {threshold} outside [0, 1]"
        )));
    }
    let m = &s.values;
    let peaks: Vec<(usize, f64)> = (0..m.rows())
        .map(|j| {
            m.row(j)
                .iter()
                .map(|z| z.norm())
                .enumerate()
                .fold(
                    (0, f64::NEG_INFINITY),
                    |best, (l, a)| if a > best.1 { (l, a) } else { best },
                )
        })
        .collect();
    let global = peaks.iter().map(|p| p.1).fold(0.0, f64::max);
    if global.is_nan() || global <= 0.0 {
        return Err(Error::NoDetection { threshold });
    }
    let axis = &s.fast_axis;
    let trace: Vec<TracePoint> = peaks
        .iter()
        .enumerate()
        .filter(|(_, &(_, a))| a >= threshold * global)
        .map(|(j, &(l, _))| {
            let mut u = l as f64;
            if refine && l > 0 && l + 1 < axis.len {
                let row = m.row(j);
                let (a, b, c) = (row[l - 1].norm(), row[l].norm(), row[l + 1].norm());
                if a > 0.0 && c > 0.0 {
                    let (a, b, c) = (a.ln(), b.ln(), c.ln());
                    let curv = a - 2.0 * b + c;
                    if curv < 0.0 {
                        u += (0.5 * (a - c) / curv).clamp(-0.5, 0.5);
                    }
                }
            }
            TracePoint {
                s: s.slow_axis.value(j),
                delay: axis.start + u * axis.step,
            }
        })
        .collect();
    if trace.is_empty() {
        return Err(Error::NoDetection { threshold });
    }
    Ok(trace)
}

/// `x²/2` for `|x| ≤ δ`, `δ(|x| − δ/2)` beyond.
#[inline]
pub fn huber(x: f64, delta: f64) -> f64 {
    let a = x.abs();
    if a <= delta {
        0.5 * a * a
    } else {
        delta * (a - 0.5 * delta)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Upper end of the speed grid for the starts, m/s.
    pub v_max: f64,
    /// Nonzero speeds in the start grid (zero speed is always included).
    pub speed_steps: usize,
    /// Headings in `[0, π/2]` for the start grid.
    pub heading_steps: usize,
    /// Evaluation budget per start.
    pub max_evals: usize,
    /// Weight of the position prior relative to one quadratic-zone sample.
    /// Range history pins down only three combinations of the four ground
    /// parameters; the prior selects the solution nearest the seed.
    pub prior_weight: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            v_max: DEFAULT_V_MAX,
            speed_steps: 3,
            heading_steps: 5,
            max_evals: 4000,
            prior_weight: 0.5,
        }
    }
}

/// Where the local searches start: the position (usually an image peak)
/// and optionally the velocity hypothesis that focused it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionSeed {
    pub position: Vec3,
    pub velocity: Option<Vec3>,
}

impl MotionSeed {
    pub fn at(position: Vec3) -> Self {
        Self {
            position,
            velocity: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionEstimate {
    pub position: Vec3,
    pub velocity: Vec3,
    /// Huber loss of the residuals, s².
    pub loss: f64,
    /// Largest `|y(s) − f(s)|` over the trace, s.
    pub max_residual: f64,
    pub trace: Vec<TracePoint>,
    pub evaluations: usize,
    pub converged: bool,
    /// Set when no start reached the loss ceiling or converged.
    pub flagged: bool,
}

impl MotionEstimate {
    pub fn speed(&self) -> f64 {
        self.velocity.norm()
    }

    /// Heading measured from x̂ in the ground plane.
    pub fn heading(&self) -> f64 {
        self.velocity.y.atan2(self.velocity.x)
    }
}

/// Analytic delay history `f_{ρ,v}(s)` on the trace's slow times.
pub fn model_trace(scene: &Scene, position: &Vec3, velocity: &Vec3, slow: &[f64], c: f64) -> Vec<TracePoint> {
    slow.iter()
        .map(|&s| TracePoint {
            s,
            delay: hypothesis_delay(scene, position, velocity, s, c),
        })
        .collect()
}

struct Objective<'a> {
    trace: &'a [TracePoint],
    scene: &'a Scene,
    seed: Vec3,
    c: f64,
    dt: f64,
    half_aperture: f64,
    prior_sigma: f64,
    prior_weight: f64,
}

impl Objective<'_> {
    /// Parameters are `[x, y, vx·T, vy·T]` with `T` the half aperture, so
    /// every coordinate is a length in metres.
    fn unpack(&self, p: &[f64; 4]) -> (Vec3, Vec3) {
        (
            Vec3::new(p[0], p[1], self.seed.z),
            Vec3::new(p[2] / self.half_aperture, p[3] / self.half_aperture, 0.0),
        )
    }

    fn residuals(&self, rho: &Vec3, v: &Vec3) -> impl Iterator<Item = f64> + '_ {
        let (rho, v) = (*rho, *v);
        self.trace
            .iter()
            .map(move |t| (t.delay - hypothesis_delay(self.scene, &rho, &v, t.s, self.c)) / self.dt)
    }

    /// Data loss in units of Δt².
    fn data_loss(&self, rho: &Vec3, v: &Vec3) -> f64 {
        self.residuals(rho, v).map(|r| huber(r, HUBER_DELTA_SAMPLES)).sum()
    }

    fn eval(&self, p: &[f64; 4]) -> f64 {
        let (rho, v) = self.unpack(p);
        let d = (rho - self.seed).norm() / self.prior_sigma;
        self.data_loss(&rho, &v) + self.prior_weight * d * d
    }
}

pub(crate) struct Simplex {
    pub x: [f64; 4],
    pub f: f64,
    pub evals: usize,
    pub converged: bool,
    /// Best value after each iteration.
    #[cfg_attr(not(test), allow(dead_code))]
    pub history: Vec<f64>,
}

/// Nelder–Mead with standard coefficients; stops when every vertex lies
/// within `tol` (max norm) of the best one.
pub(crate) fn nelder_mead<F: Fn(&[f64; 4]) -> f64>(
    f: F,
    x0: [f64; 4],
    steps: [f64; 4],
    tol: f64,
    max_evals: usize,
) -> Simplex {
    const N: usize = 4;
    let mut pts: Vec<([f64; 4], f64)> = Vec::with_capacity(N + 1);
    pts.push((x0, f(&x0)));
    for i in 0..N {
        let mut x = x0;
        x[i] += steps[i];
        pts.push((x, f(&x)));
    }
    let mut evals = N + 1;
    let mut history = Vec::new();
    let comb = |a: &[f64; 4], b: &[f64; 4], t: f64| -> [f64; 4] { std::array::from_fn(|i| a[i] + t * (b[i] - a[i])) };
    loop {
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        history.push(pts[0].1);
        let spread = pts[1..]
            .iter()
            .flat_map(|(x, _)| x.iter().zip(&pts[0].0).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if spread < tol {
            return Simplex {
                x: pts[0].0,
                f: pts[0].1,
                evals,
                converged: true,
                history,
            };
        }
        if evals >= max_evals {
            return Simplex {
                x: pts[0].0,
                f: pts[0].1,
                evals,
                converged: false,
                history,
            };
        }
        let centroid: [f64; 4] = std::array::from_fn(|i| pts[..N].iter().map(|p| p.0[i]).sum::<f64>() / N as f64);
        let worst = pts[N];
        let xr = comb(&centroid, &worst.0, -1.0);
        let fr = f(&xr);
        evals += 1;
        if fr < pts[0].1 {
            let xe = comb(&centroid, &worst.0, -2.0);
            let fe = f(&xe);
            evals += 1;
            pts[N] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < pts[N - 1].1 {
            pts[N] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst.1 {
                let x = comb(&centroid, &xr, 0.5);
                (x, f(&x))
            } else {
                let x = comb(&centroid, &worst.0, 0.5);
                (x, f(&x))
            };
            evals += 1;
            if fc < worst.1.min(fr) {
                pts[N] = (xc, fc);
            } else {
                let best = pts[0].0;
                for p in pts[1..].iter_mut() {
                    p.0 = comb(&best, &p.0, 0.5);
                    p.1 = f(&p.0);
                }
                evals += N;
            }
        }
    }
}

/// Minimises `Σ ℒ_δ(y(s) − f_{ρ,v}(s))` over ground position and velocity,
/// with δ = 10Δt.
///
/// Starts cover speed `[0, v_max]` × heading `[0, π/2]` plus the seed
/// velocity, all at the seed position; they run in parallel and the lowest
/// objective wins, ties broken by the lexicographically smallest parameters.
pub fn fit_motion(
    trace: &[TracePoint],
    scene: &Scene,
    cfg: &RadarConfig,
    seed: &MotionSeed,
    fit: &FitConfig,
) -> Result<MotionEstimate> {
    if trace.len() < MIN_TRACE_POINTS {
        return Err(Error::InvalidParameter(format!(
            "motion fit needs at least {MIN_TRACE_POINTS} trace points, got {}",
            trace.len()
        )));
    }
    if !(fit.v_max.is_finite() && fit.v_max >= 0.0) || fit.heading_steps == 0 || fit.max_evals == 0 {
        return Err(Error::InvalidParameter(
            "fit config needs v_max >= 0 and nonzero grid/budget".into(),
        ));
    }
    let (seed_velocity, seed) = (seed.velocity, seed.position);
    let obj = Objective {
        trace,
        scene,
        seed,
        c: cfg.lightspeed,
        dt: cfg.fast_dt,
        half_aperture: 0.5 * cfg.aperture_duration,
        prior_sigma: cfg.lightspeed / (2.0 * cfg.bandwidth),
        prior_weight: fit.prior_weight,
    };
    let t = obj.half_aperture;
    let mut starts = vec![[seed.x, seed.y, 0.0, 0.0]];
    if let Some(v) = seed_velocity {
        starts.push([seed.x, seed.y, v.x * t, v.y * t]);
    }
    for i in 1..=fit.speed_steps {
        let speed = fit.v_max * i as f64 / fit.speed_steps as f64;
        for k in 0..fit.heading_steps {
            let alpha = if fit.heading_steps == 1 {
                0.0
            } else {
                FRAC_PI_2 * k as f64 / (fit.heading_steps - 1) as f64
            };
            starts.push([seed.x, seed.y, speed * alpha.cos() * t, speed * alpha.sin() * t]);
        }
    }
    let vstep = (fit.v_max / (2.0 * fit.speed_steps.max(1) as f64)).max(0.5) * t;
    let steps = [obj.prior_sigma, obj.prior_sigma, vstep, vstep];
    let tol = 1e-3 * cfg.fast_dt * cfg.lightspeed;
    let runs: Vec<Simplex> = starts
        .par_iter()
        .map(|&x0| nelder_mead(|p| obj.eval(p), x0, steps, tol, fit.max_evals))
        .collect();
    let evaluations = runs.iter().map(|r| r.evals).sum();
    let best = runs
        .into_iter()
        .min_by(|a, b| {
            a.f.total_cmp(&b.f).then_with(|| {
                a.x.iter()
                    .zip(&b.x)
                    .map(|(u, v)| u.total_cmp(v))
                    .find(|o| o.is_ne())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
        })
        .expect("at least one start");
    let (position, velocity) = obj.unpack(&best.x);
    let data_loss = obj.data_loss(&position, &velocity);
    let max_residual = obj.residuals(&position, &velocity).map(f64::abs).fold(0.0, f64::max) * obj.dt;
    let ceiling = trace.len() as f64 * huber(HUBER_DELTA_SAMPLES, HUBER_DELTA_SAMPLES);
    Ok(MotionEstimate {
        position,
        velocity,
        loss: data_loss * obj.dt * obj.dt,
        max_residual,
        trace: trace.to_vec(),
        evaluations,
        converged: best.converged,
        flagged: !best.converged || data_loss > ceiling,
    })
}
