//! Cross terms between sub-apertures whose traces have different slopes.
//!
//! Locally linear traces `Δτ_ℓ(s) ≈ a_ℓ + b_ℓ·s` give column inner products
//! whose magnitude carries the factor
//! `exp(−(ω²/2B²)·(b_ℓ − b_ℓ')²/(b_ℓ² + b_ℓ'²))`. Because `ω ≫ B`, a small slope
//! difference already makes the columns nearly orthogonal.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The slope-dependent suppression factor.
pub fn cross_term_suppression(b_l: f64, b_lp: f64, omega: f64, bandwidth: f64) -> Result<f64> {
    let denom = b_l * b_l + b_lp * b_lp;
    if denom == 0.0 {
        return Err(Error::InvalidParameter("both trace slopes are zero".into()));
    }
    let d = b_l - b_lp;
    Ok((-(omega * omega) / (2.0 * bandwidth * bandwidth) * d * d / denom).exp())
}

/// Predicted normalised inner product `|⟨x_ℓ, x_ℓ'⟩|/(‖x_ℓ‖‖x_ℓ'‖)` of the
/// `t = 0` columns of two traces through the origin with slopes `b_l` and
/// `b_lp`: `√(2|b_ℓ b_ℓ'|/(b_ℓ² + b_ℓ'²))` times the suppression factor.
pub fn cross_term_prediction(b_l: f64, b_lp: f64, omega: f64, bandwidth: f64) -> Result<f64> {
    let amplitude = (2.0 * (b_l * b_lp).abs() / (b_l * b_l + b_lp * b_lp)).sqrt();
    Ok(amplitude * cross_term_suppression(b_l, b_lp, omega, bandwidth)?)
}

/// Measured counterpart of [`cross_term_prediction`]: the `t = 0` columns
/// `x(s) = exp(−B²(b·s)²/2)·exp(iω·b·s)` sampled at `s = k·ds` for
/// `|s| ≤ half_width`, and their normalised inner product.
pub fn column_coherence(b_l: f64, b_lp: f64, omega: f64, bandwidth: f64, ds: f64, half_width: f64) -> Result<f64> {
    if !(ds > 0.0 && half_width > ds) {
        return Err(Error::InvalidParameter("need 0 < ds < half_width".into()));
    }
    let column = |b: f64, s: f64| {
        let delay = b * s;
        Complex64::from_polar((-0.5 * (bandwidth * delay).powi(2)).exp(), omega * delay)
    };
    let k = (half_width / ds).floor() as i64;
    let (mut cross, mut n1, mut n2) = (Complex64::new(0.0, 0.0), 0.0, 0.0);
    for j in -k..=k {
        let s = j as f64 * ds;
        let (x, y) = (column(b_l, s), column(b_lp, s));
        cross += x * y.conj();
        n1 += x.norm_sqr();
        n2 += y.norm_sqr();
    }
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::Degenerate("a column is identically zero".into()));
    }
    Ok(cross.norm() / (n1 * n2).sqrt())
}
