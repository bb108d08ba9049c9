//! Low-rank plus sparse separation by the inexact augmented Lagrangian
//! method, for full matrices, for sub-aperture tensors under the Fourier
//! nuclear norm, and panel by panel.
//!
//! Every solver iterates
//!
//! ```text
//! L ← SVT_{1/μ}(A − S + Y/μ)          (per Fourier panel for tensors)
//! S ← Θ_{η/μ}(A − L + Y/μ)
//! Y ← Y + μ(A − L − S)
//! μ ← ρμ
//! ```
//!
//! from `S = Y = 0` until `‖A − L − S‖_F/‖A‖_F ≤ tol`.

mod separate;

pub use separate::{relative_error, separate, DataSeparation, EtaChoice, Method};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{soft_threshold, spectral_norm, svd, AxisDft, ComplexMatrix, ComplexTensor3};

/// How the initial penalty `μ₀` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum Mu0Policy {
    /// `μ₀ = 1/max_ℓ ‖A⁽ℓ⁾‖₂`: the first singular value threshold equals the
    /// largest panel spectral norm.
    MaxPanelSpectral,
    Explicit(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub eta: f64,
    #[serde(default = "default_mu0")]
    pub mu0_policy: Mu0Policy,
    #[serde(default = "default_rho")]
    pub rho: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_mu0() -> Mu0Policy {
    Mu0Policy::MaxPanelSpectral
}
fn default_rho() -> f64 {
    1.4
}
fn default_tol() -> f64 {
    1e-7
}
fn default_max_iters() -> usize {
    500
}

impl SolverConfig {
    pub fn with_eta(eta: f64) -> Self {
        Self {
            eta,
            mu0_policy: default_mu0(),
            rho: default_rho(),
            tol: default_tol(),
            max_iters: default_max_iters(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return bad(format!("eta must be positive, got {}", self.eta));
        }
        if !(self.rho.is_finite() && self.rho > 1.0) {
            return bad(format!("rho must exceed 1, got {}", self.rho));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1".into());
        }
        if let Mu0Policy::Explicit(m) = self.mu0_policy {
            if !(m.is_finite() && m > 0.0) {
                return bad(format!("explicit mu0 must be positive, got {m}"));
            }
        }
        Ok(())
    }

    fn mu0(&self, max_spectral: f64) -> Result<f64> {
        match self.mu0_policy {
            Mu0Policy::Explicit(m) => Ok(m),
            Mu0Policy::MaxPanelSpectral if max_spectral > 0.0 => Ok(1.0 / max_spectral),
            Mu0Policy::MaxPanelSpectral => Err(Error::Degenerate("input has zero spectral norm".into())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationResult<T> {
    pub low_rank: T,
    pub sparse: T,
    pub iterations: usize,
    /// `‖A − L − S‖_F/‖A‖_F` after the last iteration.
    pub final_residual: f64,
    pub eta_used: f64,
    pub mu0: f64,
    pub converged: bool,
}

/// State handed to an observer after every iteration `k` (0-based), with
/// `mu` the penalty used in that iteration.
pub struct Iterate<'a, T> {
    pub k: usize,
    pub mu: f64,
    pub low_rank: &'a T,
    pub sparse: &'a T,
    pub multiplier: &'a T,
    pub residual: f64,
}

fn check_nonzero(norm: f64) -> Result<()> {
    if norm == 0.0 {
        return Err(Error::Degenerate("cannot separate an all-zero input".into()));
    }
    if !norm.is_finite() {
        return Err(Error::Degenerate("input has non-finite entries".into()));
    }
    Ok(())
}

fn svt(m: &ComplexMatrix, tau: f64) -> Result<ComplexMatrix> {
    Ok(svd(m)?.recompose_with(|s| (s - tau).max(0.0)))
}

/// Matrix RPCA: `min ‖L‖_* + η‖S‖_1` subject to `L + S = D`.
pub fn rpca_matrix(d: &ComplexMatrix, cfg: &SolverConfig) -> Result<SeparationResult<ComplexMatrix>> {
    rpca_matrix_observed(d, cfg, |_| {})
}

pub fn rpca_matrix_observed(
    d: &ComplexMatrix,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&Iterate<ComplexMatrix>),
) -> Result<SeparationResult<ComplexMatrix>> {
    cfg.validate()?;
    let d_norm = d.frobenius_norm();
    check_nonzero(d_norm)?;
    let mu0 = cfg.mu0(spectral_norm(d)?)?;
    let (rows, cols) = d.shape();
    let mut l = ComplexMatrix::zeros(rows, cols);
    let mut s = ComplexMatrix::zeros(rows, cols);
    let mut y = ComplexMatrix::zeros(rows, cols);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        let mu = mu0 * cfg.rho.powi(k as i32);
        let inv = 1.0 / mu;
        let target: Vec<_> = d
            .as_slice()
            .iter()
            .zip(s.as_slice())
            .zip(y.as_slice())
            .map(|((&a, &s), &y)| a - s + y * inv)
            .collect();
        l = svt(&ComplexMatrix::from_vec(rows, cols, target)?, inv)?;
        for (((sv, &a), &lv), &yv) in s
            .as_mut_slice()
            .iter_mut()
            .zip(d.as_slice())
            .zip(l.as_slice())
            .zip(y.as_slice())
        {
            *sv = soft_threshold(a - lv + yv * inv, cfg.eta * inv);
        }
        let mut r2 = 0.0;
        for (((yv, &a), &lv), &sv) in y
            .as_mut_slice()
            .iter_mut()
            .zip(d.as_slice())
            .zip(l.as_slice())
            .zip(s.as_slice())
        {
            let r = a - lv - sv;
            r2 += r.norm_sqr();
            *yv += r * mu;
        }
        residual = r2.sqrt() / d_norm;
        iterations = k + 1;
        observe(&Iterate {
            k,
            mu,
            low_rank: &l,
            sparse: &s,
            multiplier: &y,
            residual,
        });
        if residual <= cfg.tol {
            break;
        }
    }
    Ok(SeparationResult {
        low_rank: l,
        sparse: s,
        iterations,
        final_residual: residual,
        eta_used: cfg.eta,
        mu0,
        converged: residual <= cfg.tol,
    })
}

/// Tensor RPCA under the Fourier nuclear norm:
/// `min Σ_k ‖L̂⁽ᵏ⁾‖_* + η‖𝒮‖_1` subject to `ℒ + 𝒮 = 𝒜`.
///
/// The low-rank step thresholds singular values of each Fourier-domain
/// panel; the sparse step thresholds entries in the original domain.
pub fn rpca_tensor(a: &ComplexTensor3, cfg: &SolverConfig) -> Result<SeparationResult<ComplexTensor3>> {
    rpca_tensor_observed(a, cfg, |_| {})
}

pub fn rpca_tensor_observed(
    a: &ComplexTensor3,
    cfg: &SolverConfig,
    mut observe: impl FnMut(&Iterate<ComplexTensor3>),
) -> Result<SeparationResult<ComplexTensor3>> {
    cfg.validate()?;
    let a_norm = a.frobenius_norm();
    check_nonzero(a_norm)?;
    let max_spectral = a
        .panels()
        .par_iter()
        .map(spectral_norm)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mu0 = cfg.mu0(max_spectral)?;
    let (n1, n2, n3) = a.shape();
    let dft = AxisDft::new(n3);
    let mut l = ComplexTensor3::zeros(n1, n2, n3);
    let mut s = ComplexTensor3::zeros(n1, n2, n3);
    let mut y = ComplexTensor3::zeros(n1, n2, n3);
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    for k in 0..cfg.max_iters {
        let mu = mu0 * cfg.rho.powi(k as i32);
        let inv = 1.0 / mu;
        let target = a.zip_map(&s, |a, s| a - s).zip_map(&y, |x, y| x + y * inv);
        let hat = dft.apply(&target, false);
        let shrunk = hat
            .panels()
            .par_iter()
            .enumerate()
            .map(|(panel, p)| {
                svt(p, inv).map_err(|e| Error::Panel {
                    panel,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        l = dft.apply(&ComplexTensor3::from_panels(shrunk)?, true);
        let lam = cfg.eta * inv;
        s = a
            .zip_map(&l, |a, l| a - l)
            .zip_map(&y, |x, y| soft_threshold(x + y * inv, lam));
        let r = a.zip_map(&l, |a, l| a - l).zip_map(&s, |x, s| x - s);
        residual = r.frobenius_norm() / a_norm;
        y = y.zip_map(&r, |y, r| y + r * mu);
        iterations = k + 1;
        observe(&Iterate {
            k,
            mu,
            low_rank: &l,
            sparse: &s,
            multiplier: &y,
            residual,
        });
        if residual <= cfg.tol {
            break;
        }
    }
    Ok(SeparationResult {
        low_rank: l,
        sparse: s,
        iterations,
        final_residual: residual,
        eta_used: cfg.eta,
        mu0,
        converged: residual <= cfg.tol,
    })
}

/// Outcome of panel-by-panel separation.
#[derive(Clone, Debug, PartialEq)]
pub struct DecoupledResult {
    pub low_rank: ComplexTensor3,
    pub sparse: ComplexTensor3,
    pub panel_etas: Vec<f64>,
    pub panel_iterations: Vec<usize>,
    /// `‖𝒜 − ℒ − 𝒮‖_F/‖𝒜‖_F` over the whole tensor.
    pub final_residual: f64,
    /// Every panel converged.
    pub converged: bool,
}

/// Independent matrix RPCA on each panel with its own `η`. `base` supplies
/// every solver setting except `eta`.
pub fn rpca_decoupled(a: &ComplexTensor3, panel_etas: &[f64], base: &SolverConfig) -> Result<DecoupledResult> {
    if panel_etas.len() != a.n3() {
        return Err(Error::Shape(format!(
            "{} panel etas for {} panels",
            panel_etas.len(),
            a.n3()
        )));
    }
    let results = a
        .panels()
        .par_iter()
        .zip(panel_etas)
        .enumerate()
        .map(|(panel, (p, &eta))| {
            rpca_matrix(p, &SolverConfig { eta, ..*base }).map_err(|e| Error::Panel {
                panel,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let converged = results.iter().all(|r| r.converged);
    let panel_iterations = results.iter().map(|r| r.iterations).collect();
    let (ls, ss): (Vec<_>, Vec<_>) = results.into_iter().map(|r| (r.low_rank, r.sparse)).unzip();
    let low_rank = ComplexTensor3::from_panels(ls)?;
    let sparse = ComplexTensor3::from_panels(ss)?;
    let r = a.zip_map(&low_rank, |a, l| a - l).zip_map(&sparse, |x, s| x - s);
    Ok(DecoupledResult {
        final_residual: r.frobenius_norm() / a.frobenius_norm(),
        low_rank,
        sparse,
        panel_etas: panel_etas.to_vec(),
        panel_iterations,
        converged,
    })
}
