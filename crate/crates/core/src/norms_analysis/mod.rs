//! Tensor nuclear norms, their bounds, the η trade-off quantities, the
//! hyper-parameter sweep and the cross-term diagnostic.

mod cross_term;
mod eta;
mod sweep;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{dft_axis3, nuclear_norm, ComplexMatrix, ComplexTensor3};

pub use cross_term::{column_coherence, cross_term_prediction, cross_term_suppression};
pub use eta::{
    default_eta, default_tensor_eta, eta_report, matrix_eta_optimal, matrix_eta_report, EtaReport, EtaVariant,
};
pub use sweep::{sweep, SweepGrid, SweepRow, SweepStatus};

/// Largest block-circulant embedding, in entries, that
/// [`block_circulant_embed`] will build by default.
pub const DEFAULT_EMBED_CAP: usize = 1 << 24;

/// Nuclear norms of every panel, in panel order.
pub fn panel_nuclear_norms(t: &ComplexTensor3) -> Result<Vec<f64>> {
    t.panels()
        .par_iter()
        .enumerate()
        .map(|(panel, p)| {
            nuclear_norm(p).map_err(|e| Error::Panel {
                panel,
                source: Box::new(e),
            })
        })
        .collect()
}

/// Decoupled nuclear norm `Σ_ℓ ‖A⁽ℓ⁾‖_*`.
pub fn nuclear_decoupled(t: &ComplexTensor3) -> Result<f64> {
    Ok(panel_nuclear_norms(t)?.iter().sum())
}

/// Fourier tensor nuclear norm `Σ_k ‖Â⁽ᵏ⁾‖_*`, with the unitary DFT along
/// the panel axis.
pub fn nuclear_fourier(t: &ComplexTensor3) -> Result<f64> {
    Ok(panel_nuclear_norms(&dft_axis3(t, false))?.iter().sum())
}

/// The `n1·n3 × n2·n3` matrix whose block `(r, c)` is `A⁽⁽ᶜ⁻ʳ⁾ ᵐᵒᵈ ⁿ³⁾/√n3`.
///
/// Its nuclear norm equals [`nuclear_fourier`]. Memory grows quadratically
/// in `n3`, so the size is checked against `cap` entries.
pub fn block_circulant_embed(t: &ComplexTensor3, cap: usize) -> Result<ComplexMatrix> {
    let (n1, n2, n3) = t.shape();
    let (rows, cols) = (n1 * n3, n2 * n3);
    if rows.saturating_mul(cols) > cap {
        return Err(Error::MemoryCap { rows, cols, cap });
    }
    let scale = 1.0 / (n3 as f64).sqrt();
    let mut out = ComplexMatrix::zeros(rows, cols);
    for r in 0..n3 {
        for c in 0..n3 {
            out.set_block(r * n1, c * n2, &t.panel((c + n3 - r) % n3).scale(scale));
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub nuclear_decoupled: f64,
    pub nuclear_fourier: f64,
    pub l1: f64,
    pub frobenius: f64,
    /// `(Σ_ℓ ‖A⁽ℓ⁾‖_*²)^{1/2}`
    pub lower_bound: f64,
    /// `√n3 · Σ_ℓ ‖A⁽ℓ⁾‖_*`
    pub upper_bound: f64,
}

/// All norms of `t` together with the bounds
/// `(Σ‖A⁽ℓ⁾‖_*²)^{1/2} ≤ ‖𝒜‖_{*,ℱ} ≤ √n3·Σ‖A⁽ℓ⁾‖_*`.
///
/// A violation beyond round-off is reported as [`Error::Degenerate`].
pub fn bounds(t: &ComplexTensor3) -> Result<NormReport> {
    let per_panel = panel_nuclear_norms(t)?;
    let nuclear_decoupled: f64 = per_panel.iter().sum();
    let lower_bound = per_panel.iter().map(|x| x * x).sum::<f64>().sqrt();
    let upper_bound = (t.n3() as f64).sqrt() * nuclear_decoupled;
    let nuclear_fourier = nuclear_fourier(t)?;
    let slack = 1e-9 * upper_bound.max(f64::MIN_POSITIVE);
    if nuclear_fourier < lower_bound - slack || nuclear_fourier > upper_bound + slack {
        return Err(Error::Degenerate(format!(
            "Fourier nuclear norm {nuclear_fourier} outside [{lower_bound}, {upper_bound}]"
        )));
    }
    Ok(NormReport {
        nuclear_decoupled,
        nuclear_fourier,
        l1: t.l1_norm(),
        frobenius: t.frobenius_norm(),
        lower_bound,
        upper_bound,
    })
}

/// `(lower, ‖[A_1 … A_k]‖_*, upper)` for a horizontal concatenation, with
/// `lower = (Σ‖A_i‖_*²)^{1/2}` and `upper = Σ‖A_i‖_*`.
pub fn concatenation_bounds(blocks: &[ComplexMatrix]) -> Result<(f64, f64, f64)> {
    let norms = blocks.iter().map(nuclear_norm).collect::<Result<Vec<_>>>()?;
    let whole = nuclear_norm(&ComplexMatrix::hstack(blocks)?)?;
    let lower = norms.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok((lower, whole, norms.iter().sum()))
}
