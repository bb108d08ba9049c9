use serde::{Deserialize, Serialize};

use super::{rpca_decoupled, rpca_matrix, rpca_tensor, SolverConfig};
use crate::error::{Error, Result};
use crate::norms_analysis::{default_eta, default_tensor_eta, eta_report, matrix_eta_report, EtaVariant};
use crate::numerics::ComplexTensor3;
use crate::sar_model::DataMatrix;
use crate::tensorize::{reconstruct, to_tensor, TensorPlan};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Matrix RPCA on the full aperture.
    Matrix,
    /// Matrix RPCA on each sub-aperture panel independently.
    Decoupled,
    /// Tensor RPCA under the Fourier nuclear norm.
    Tensor,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Matrix => "matrix",
            Method::Decoupled => "decoupled",
            Method::Tensor => "tensor",
        }
    }
}

/// Where the trade-off weight comes from.
#[derive(Clone, Copy, Debug)]
pub enum EtaChoice<'a> {
    Explicit(f64),
    /// `1/√max(n1, n2)`, with the extra `1/√n3` for the tensor method.
    Default,
    /// `η*` computed from the ground-truth stationary and moving parts.
    Oracle {
        low_rank: &'a DataMatrix,
        sparse: &'a DataMatrix,
    },
}

/// A separation mapped back to full-aperture matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct DataSeparation {
    pub method: Method,
    pub low_rank: DataMatrix,
    pub sparse: DataMatrix,
    /// One entry, or one per panel for the decoupled method.
    pub etas: Vec<f64>,
    /// Largest iteration count over the solves.
    pub iterations: usize,
    /// Residual of the solve in the domain it ran in.
    pub final_residual: f64,
    pub converged: bool,
}

fn check_parts(d: &DataMatrix, l: &DataMatrix, s: &DataMatrix) -> Result<()> {
    if l.values.shape() != d.values.shape() || s.values.shape() != d.values.shape() {
        return Err(Error::Shape("oracle parts must match the data shape".into()));
    }
    Ok(())
}

/// Separates `d` into stationary and moving parts. `plan` is required for
/// the decoupled and tensor methods, whose outputs are reassembled with the
/// innermost-panel rule.
pub fn separate(
    d: &DataMatrix,
    method: Method,
    plan: Option<&TensorPlan>,
    eta: EtaChoice,
    base: &SolverConfig,
) -> Result<DataSeparation> {
    let plan = match (method, plan) {
        (Method::Matrix, _) => None,
        (_, Some(p)) => Some(p),
        (_, None) => {
            return Err(Error::InvalidParameter(format!(
                "method {} needs a tensor plan",
                method.as_str()
            )))
        }
    };
    if let EtaChoice::Oracle { low_rank, sparse } = eta {
        check_parts(d, low_rank, sparse)?;
    }
    let (n1_full, n2) = d.values.shape();
    match (method, plan) {
        (Method::Matrix, _) => {
            let eta = match eta {
                EtaChoice::Explicit(e) => e,
                EtaChoice::Default => default_eta(n1_full, n2),
                EtaChoice::Oracle { low_rank, sparse } => matrix_eta_report(&low_rank.values, &sparse.values)?.eta_star,
            };
            let r = rpca_matrix(&d.values, &SolverConfig { eta, ..*base })?;
            Ok(DataSeparation {
                method,
                low_rank: d.with_values(r.low_rank)?,
                sparse: d.with_values(r.sparse)?,
                etas: vec![eta],
                iterations: r.iterations,
                final_residual: r.final_residual,
                converged: r.converged,
            })
        }
        (_, Some(plan)) => {
            let dt = to_tensor(d, plan)?;
            let (n1, _, n3) = dt.tensor.shape();
            let parts = |m: &DataMatrix| to_tensor(m, plan).map(|t| t.tensor);
            let back = |t: ComplexTensor3| reconstruct(&dt.with_tensor(t)?);
            if method == Method::Tensor {
                let eta = match eta {
                    EtaChoice::Explicit(e) => e,
                    EtaChoice::Default => default_tensor_eta(n1, n2, n3),
                    EtaChoice::Oracle { low_rank, sparse } => {
                        eta_report(&parts(low_rank)?, &parts(sparse)?, EtaVariant::Fourier)?.eta_star
                    }
                };
                let r = rpca_tensor(&dt.tensor, &SolverConfig { eta, ..*base })?;
                Ok(DataSeparation {
                    method,
                    low_rank: back(r.low_rank)?,
                    sparse: back(r.sparse)?,
                    etas: vec![eta],
                    iterations: r.iterations,
                    final_residual: r.final_residual,
                    converged: r.converged,
                })
            } else {
                let etas = match eta {
                    EtaChoice::Explicit(e) => vec![e; n3],
                    EtaChoice::Default => vec![default_eta(n1, n2); n3],
                    EtaChoice::Oracle { low_rank, sparse } => {
                        let (lt, st) = (parts(low_rank)?, parts(sparse)?);
                        (0..n3)
                            .map(|l| matrix_eta_report(lt.panel(l), st.panel(l)).map(|r| r.eta_star))
                            .collect::<Result<Vec<_>>>()?
                    }
                };
                let r = rpca_decoupled(&dt.tensor, &etas, base)?;
                Ok(DataSeparation {
                    method,
                    low_rank: back(r.low_rank)?,
                    sparse: back(r.sparse)?,
                    etas,
                    iterations: r.panel_iterations.iter().copied().max().unwrap_or(0),
                    final_residual: r.final_residual,
                    converged: r.converged,
                })
            }
        }
        (_, None) => unreachable!(),
    }
}

/// `‖S − D_S‖_F / ‖D_S‖_F`.
pub fn relative_error(estimate: &DataMatrix, truth: &DataMatrix) -> f64 {
    estimate.values.distance(&truth.values) / truth.values.frobenius_norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sar_model::{synthesize, PointTarget, RadarConfig, Scene, Vec3};
    use crate::tensorize::make_plan;

    fn small() -> (DataMatrix, DataMatrix, DataMatrix, TensorPlan) {
        let cfg = RadarConfig::desk_scale(64);
        let scene = Scene::side_looking(&cfg)
            .with_random_stationary(4, 6.0, 3)
            .with_mover(PointTarget::ground_mover(Vec3::new(1.0, 0.0, 0.0), 8.0, 0.0, 0.1));
        let d = synthesize(&scene, &cfg).unwrap();
        let dl = synthesize(&scene.stationary_only(), &cfg).unwrap();
        let ds = synthesize(&scene.movers_only(), &cfg).unwrap();
        let plan = make_plan(
            cfg.aperture_duration,
            cfg.aperture_duration / 4.0,
            0.5,
            cfg.pulse_interval,
        )
        .unwrap();
        (d, dl, ds, plan)
    }

    #[test]
    fn every_method_reassembles_full_matrices() {
        let (d, dl, ds, plan) = small();
        let base = SolverConfig {
            max_iters: 60,
            ..SolverConfig::with_eta(1.0)
        };
        for method in [Method::Matrix, Method::Decoupled, Method::Tensor] {
            let oracle = EtaChoice::Oracle {
                low_rank: &dl,
                sparse: &ds,
            };
            let r = separate(&d, method, Some(&plan), oracle, &base).unwrap();
            assert_eq!(r.low_rank.values.shape(), d.values.shape());
            assert_eq!(r.sparse.slow_axis, d.slow_axis);
            assert_eq!(r.etas.len(), if method == Method::Decoupled { plan.n3 } else { 1 });
            assert!(r.etas.iter().all(|e| e.is_finite() && *e > 0.0));
        }
    }

    #[test]
    fn explicit_eta_is_echoed_and_plan_is_required() {
        let (d, _, _, plan) = small();
        let base = SolverConfig {
            max_iters: 5,
            ..SolverConfig::with_eta(1.0)
        };
        let r = separate(&d, Method::Tensor, Some(&plan), EtaChoice::Explicit(0.03), &base).unwrap();
        assert_eq!(r.etas, vec![0.03]);
        assert!(separate(&d, Method::Tensor, None, EtaChoice::Default, &base).is_err());
        let r = separate(&d, Method::Matrix, None, EtaChoice::Default, &base).unwrap();
        assert_eq!(r.etas, vec![default_eta(65, d.values.cols())]);
    }
}
