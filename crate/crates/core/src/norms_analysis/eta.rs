use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{nuclear_decoupled, nuclear_fourier};
use crate::error::{Error, Result};
use crate::numerics::{nuclear_norm, ComplexMatrix, ComplexTensor3};
use crate::sar_model::RadarConfig;

/// Which nuclear norm the η quantities are built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EtaVariant {
    Fourier,
    Decoupled,
    /// Full-aperture matrix; the inputs must be single-panel tensors.
    Matrix,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtaReport {
    pub eta_min: f64,
    pub eta_max: f64,
    /// `√(η_max·η_min)`, the minimiser of `η_min/η + η/η_max`.
    pub eta_star: f64,
    /// `η_max/η_min`; larger means a wider admissible range.
    pub ratio: f64,
    pub variant: EtaVariant,
}

impl EtaReport {
    fn from_parts(eta_max: f64, eta_min: f64, variant: EtaVariant) -> Self {
        Self {
            eta_min,
            eta_max,
            eta_star: (eta_max * eta_min).sqrt(),
            ratio: eta_max / eta_min,
            variant,
        }
    }
}

fn nuclear(t: &ComplexTensor3, variant: EtaVariant) -> Result<f64> {
    match variant {
        EtaVariant::Fourier => nuclear_fourier(t),
        EtaVariant::Decoupled => nuclear_decoupled(t),
        EtaVariant::Matrix if t.n3() == 1 => nuclear_norm(t.panel(0)),
        EtaVariant::Matrix => Err(Error::Shape(format!(
            "matrix variant needs a single panel, got {}",
            t.n3()
        ))),
    }
}

fn norm_ratio(t: &ComplexTensor3, variant: EtaVariant, what: &str) -> Result<f64> {
    let l1 = t.l1_norm();
    if l1 == 0.0 {
        return Err(Error::Degenerate(format!("{what} part has zero l1 norm")));
    }
    Ok(nuclear(t, variant)? / l1)
}

/// `η_max = ‖𝒮‖_*/‖𝒮‖_1` from the moving part and `η_min = ‖ℒ‖_*/‖ℒ‖_1`
/// from the stationary part, with the nuclear norm chosen by `variant`.
pub fn eta_report(low_rank: &ComplexTensor3, sparse: &ComplexTensor3, variant: EtaVariant) -> Result<EtaReport> {
    if low_rank.shape() != sparse.shape() {
        return Err(Error::Shape(format!(
            "stationary part {:?} and moving part {:?} differ",
            low_rank.shape(),
            sparse.shape()
        )));
    }
    let eta_max = norm_ratio(sparse, variant, "moving")?;
    let eta_min = norm_ratio(low_rank, variant, "stationary")?;
    Ok(EtaReport::from_parts(eta_max, eta_min, variant))
}

/// [`eta_report`] for full-aperture matrices.
pub fn matrix_eta_report(low_rank: &ComplexMatrix, sparse: &ComplexMatrix) -> Result<EtaReport> {
    let wrap = |m: &ComplexMatrix| ComplexTensor3::from_panels(vec![m.clone()]);
    eta_report(&wrap(low_rank)?, &wrap(sparse)?, EtaVariant::Matrix)
}

/// Closed-form matrix η* for a mover spanning `n_vt` fast-time columns:
///
/// ```text
/// η* = √(ΔsBΔt / (4S√π)) · √( (√2·N·BΔt/π + 1) / (2·√(N·BΔt/(2√π) + 1/2)) )
/// ```
///
/// with `S` the aperture duration.
pub fn matrix_eta_optimal(cfg: &RadarConfig, n_vt: f64) -> f64 {
    let bdt = cfg.bandwidth * cfg.fast_dt;
    let prefactor = cfg.pulse_interval * bdt / (4.0 * cfg.aperture_duration * PI.sqrt());
    let spread = (n_vt * bdt / (2.0 * PI.sqrt()) + 0.5).sqrt();
    let growth = (2f64.sqrt() * n_vt * bdt / PI + 1.0) / 2.0;
    (prefactor * growth / spread).sqrt()
}

/// `1/√max(n1, n2)`.
pub fn default_eta(n1: usize, n2: usize) -> f64 {
    1.0 / (n1.max(n2) as f64).sqrt()
}

/// `1/√(n3·max(n1, n2))`.
pub fn default_tensor_eta(n1: usize, n2: usize, n3: usize) -> f64 {
    1.0 / ((n3 * n1.max(n2)) as f64).sqrt()
}
