//! Overlapping sub-aperture tensors.
//!
//! The full-aperture matrix is cut into `n3` blocks of `n1` consecutive
//! slow-time rows. Block `ℓ` starts at row `round(ℓ·h)` with
//! `h = (1 − ϑ)·s_sub/Δs` and `ϑ` the overlap fraction, so the block count
//! is exactly `n3 = 1 + ⌈(s_tot − s_sub)/((1 − ϑ)·s_sub)⌉`. The last block is
//! anchored to the final row so every block holds real data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, ComplexTensor3};
use crate::sar_model::{Axis, DataMatrix, RadarConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorPlan {
    /// Requested sub-aperture duration, s.
    pub sub_aperture_s: f64,
    /// Requested overlap fraction ϑ ∈ [0, 1).
    pub overlap_fraction: f64,
    pub rows_per_panel: usize,
    /// Nominal stride, `round(h)`.
    pub stride_rows: usize,
    /// Exact stride `h` in rows; panel starts are `round(ℓ·h)`.
    pub stride_exact: f64,
    pub n3: usize,
    /// Slow-time rows of the source matrix.
    pub total_rows: usize,
}

/// Panel count for a sub-aperture layout,
/// `n3 = 1 + ⌈(s_tot − s_sub) / ((1 − ϑ)·s_sub)⌉`.
pub fn panel_count(s_tot: f64, s_sub: f64, overlap: f64) -> usize {
    let q = (s_tot - s_sub) / ((1.0 - overlap) * s_sub);
    // absorb round-off so exact multiples do not gain a panel
    1 + (q - 1e-9).ceil().max(0.0) as usize
}

/// Builds the sub-aperture layout for an aperture of `s_tot` seconds
/// sampled every `pulse_interval` seconds.
pub fn make_plan(s_tot: f64, s_sub: f64, overlap: f64, pulse_interval: f64) -> Result<TensorPlan> {
    if !(pulse_interval > 0.0 && s_tot > 0.0) {
        return Err(Error::InvalidParameter(
            "aperture and pulse interval must be positive".into(),
        ));
    }
    if !(s_sub > 0.0 && s_sub <= s_tot * (1.0 + 1e-12)) {
        return Err(Error::InvalidParameter(format!(
            "sub-aperture {s_sub} s must lie in (0, {s_tot}] s"
        )));
    }
    if !(0.0..1.0).contains(&overlap) {
        return Err(Error::InvalidParameter(format!("overlap {overlap} must lie in [0, 1)")));
    }
    let total_rows = (s_tot / pulse_interval).round() as usize + 1;
    let rows_per_panel = ((s_sub / pulse_interval).round() as usize + 1).min(total_rows);
    if rows_per_panel < 2 {
        return Err(Error::InvalidParameter(format!(
            "sub-aperture {s_sub} s is shorter than one pulse interval"
        )));
    }
    let stride_exact = (1.0 - overlap) * s_sub / pulse_interval;
    let stride_rows = stride_exact.round() as usize;
    if stride_rows == 0 {
        return Err(Error::InvalidParameter(format!(
            "overlap {overlap} on a {rows_per_panel}-row sub-aperture leaves a zero-row stride"
        )));
    }
    Ok(TensorPlan {
        sub_aperture_s: s_sub,
        overlap_fraction: overlap,
        rows_per_panel,
        stride_rows,
        stride_exact,
        n3: panel_count(s_tot, s_sub, overlap),
        total_rows,
    })
}

impl TensorPlan {
    /// First source row of panel `l`.
    pub fn panel_start(&self, l: usize) -> usize {
        ((l as f64 * self.stride_exact).round() as usize).min(self.total_rows - self.rows_per_panel)
    }

    /// Panels whose row range contains source row `row`.
    pub fn covering_panels(&self, row: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n3).filter(move |&l| {
            let start = self.panel_start(l);
            row >= start && row < start + self.rows_per_panel
        })
    }
}

/// The `ℓ` minimising `ℓ² + (ℓ − n3 + 1)²` among `candidates`; ties go to the
/// smaller index.
pub fn innermost_panel(candidates: impl IntoIterator<Item = usize>, n3: usize) -> Option<usize> {
    let last = n3 as i64 - 1;
    candidates.into_iter().min_by_key(|&l| {
        let l = l as i64;
        (l * l + (l - last) * (l - last), l)
    })
}

/// A sub-aperture tensor with the metadata needed to rebuild the matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DataTensor {
    pub tensor: ComplexTensor3,
    pub plan: TensorPlan,
    pub slow_axis: Axis,
    pub fast_axis: Axis,
    pub config: RadarConfig,
}

impl DataTensor {
    /// Same layout, different contents (e.g. a separated part).
    pub fn with_tensor(&self, tensor: ComplexTensor3) -> Result<DataTensor> {
        if tensor.shape() != self.tensor.shape() {
            return Err(Error::Shape(format!(
                "tensor {:?} does not match layout {:?}",
                tensor.shape(),
                self.tensor.shape()
            )));
        }
        Ok(DataTensor { tensor, ..self.clone() })
    }
}

pub fn to_tensor(d: &DataMatrix, plan: &TensorPlan) -> Result<DataTensor> {
    if d.values.rows() != plan.total_rows {
        return Err(Error::Shape(format!(
            "plan expects {} slow-time rows, matrix has {}",
            plan.total_rows,
            d.values.rows()
        )));
    }
    let panels: Vec<ComplexMatrix> = (0..plan.n3)
        .map(|l| d.values.row_block(plan.panel_start(l), plan.rows_per_panel))
        .collect();
    Ok(DataTensor {
        tensor: ComplexTensor3::from_panels(panels)?,
        plan: *plan,
        slow_axis: d.slow_axis,
        fast_axis: d.fast_axis,
        config: d.config.clone(),
    })
}

/// Rebuilds the full-aperture matrix, taking each row from the innermost
/// panel that covers it.
pub fn reconstruct(t: &DataTensor) -> Result<DataMatrix> {
    let plan = &t.plan;
    if t.tensor.n3() != plan.n3 || t.tensor.n1() != plan.rows_per_panel {
        return Err(Error::Shape("tensor shape disagrees with its plan".into()));
    }
    let cols = t.tensor.n2();
    let mut values = ComplexMatrix::zeros(plan.total_rows, cols);
    for row in 0..plan.total_rows {
        let l = innermost_panel(plan.covering_panels(row), plan.n3)
            .ok_or_else(|| Error::InvalidParameter(format!("slow-time row {row} is not covered by any panel")))?;
        let local = row - plan.panel_start(l);
        values.row_mut(row).copy_from_slice(t.tensor.panel(l).row(local));
    }
    DataMatrix::with_axes(values, t.slow_axis, t.fast_axis, t.config.clone())
}
