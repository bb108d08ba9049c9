use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sar_model::{hypothesis_delay, DataMatrix, Scene, Vec3};

/// A horizontal pixel lattice `origin + (ix·spacing, iy·spacing, 0)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub origin: Vec3,
    pub spacing: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridSpec {
    /// `n × n` grid with the given spacing centred on `centre`.
    pub fn centred(centre: Vec3, spacing: f64, n: usize) -> Self {
        let half = (n as f64 - 1.0) / 2.0 * spacing;
        Self {
            origin: centre - Vec3::new(half, half, 0.0),
            spacing,
            nx: n,
            ny: n,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing.is_finite() && self.spacing > 0.0) || self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidParameter(format!(
                "image grid needs positive spacing and size, got {}x{} at {}",
                self.nx, self.ny, self.spacing
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn point(&self, ix: usize, iy: usize) -> Vec3 {
        self.origin + Vec3::new(ix as f64 * self.spacing, iy as f64 * self.spacing, 0.0)
    }
}

/// Complex image, row-major with `iy` as the slow index.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid {
    pub grid: GridSpec,
    pub values: Vec<Complex64>,
    /// Velocity hypothesis used to form the image.
    pub velocity: Vec3,
    /// Pixel/pulse pairs whose delay fell outside the fast-time window.
    pub out_of_window: usize,
}

impl ImageGrid {
    #[inline]
    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.values[iy * self.grid.nx + ix]
    }

    pub fn magnitudes(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.norm()).collect()
    }

    /// `(ix, iy, |I|)` of the brightest pixel; ties go to the first in
    /// row-major order.
    pub fn peak(&self) -> (usize, usize, f64) {
        let (k, m) = self
            .values
            .iter()
            .map(|z| z.norm())
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (k, m)| if m > best.1 { (k, m) } else { best },
            );
        (k % self.grid.nx, k / self.grid.nx, m)
    }

    pub fn peak_position(&self) -> Vec3 {
        let (ix, iy, _) = self.peak();
        self.grid.point(ix, iy)
    }

    /// Peak magnitude over mean magnitude.
    pub fn peak_to_background(&self) -> f64 {
        let mags = self.magnitudes();
        let mean = mags.iter().sum::<f64>() / mags.len() as f64;
        self.peak().2 / mean
    }
}

/// Linear interpolation of row `j` at fast time `t`; `None` outside the window.
fn sample(d: &DataMatrix, j: usize, t: f64) -> Option<Complex64> {
    let axis = &d.fast_axis;
    let u = (t - axis.start) / axis.step;
    if !(u >= 0.0 && u <= (axis.len - 1) as f64) {
        return None;
    }
    let row = d.values.row(j);
    let l = (u.floor() as usize).min(axis.len - 1);
    if l + 1 == axis.len {
        return Some(row[l]);
    }
    let w = u - l as f64;
    Some(row[l] * (1.0 - w) + row[l + 1] * w)
}

/// Backprojection `I(ρ) = Σ_j D(s_j, Δτ_j)·exp(iω₀Δτ_j)` with
/// `Δτ_j = τ(s_j, ρ + s_j·v) − τ(s_j, ρ_o)`.
///
/// The carrier factor restores the phase removed by the baseband
/// transformation, so `v = 0` gives the stationary image and the true
/// velocity focuses a mover at its `s = 0` position.
pub fn backproject(d: &DataMatrix, scene: &Scene, grid: &GridSpec, velocity: Vec3) -> Result<ImageGrid> {
    grid.validate()?;
    let cfg = &d.config;
    let slow = d.slow_axis.values();
    let (values, misses): (Vec<Complex64>, Vec<usize>) = (0..grid.nx * grid.ny)
        .into_par_iter()
        .map(|k| {
            let rho = grid.point(k % grid.nx, k / grid.nx);
            let mut acc = Complex64::new(0.0, 0.0);
            let mut missed = 0;
            for (j, &s) in slow.iter().enumerate() {
                let delay = hypothesis_delay(scene, &rho, &velocity, s, cfg.lightspeed);
                match sample(d, j, delay) {
                    Some(z) => acc += z * Complex64::from_polar(1.0, cfg.carrier_omega0 * delay),
                    None => missed += 1,
                }
            }
            (acc, missed)
        })
        .unzip();
    Ok(ImageGrid {
        grid: *grid,
        values,
        velocity,
        out_of_window: misses.iter().sum(),
    })
}

/// Images for each velocity hypothesis in turn.
pub fn velocity_scan(d: &DataMatrix, scene: &Scene, grid: &GridSpec, velocities: &[Vec3]) -> Result<Vec<ImageGrid>> {
    velocities.iter().map(|&v| backproject(d, scene, grid, v)).collect()
}

/// The image of [`velocity_scan`] with the brightest peak; ties go to the
/// earlier hypothesis.
pub fn best_focus(d: &DataMatrix, scene: &Scene, grid: &GridSpec, velocities: &[Vec3]) -> Result<ImageGrid> {
    if velocities.is_empty() {
        return Err(Error::InvalidParameter(
            "velocity scan needs at least one hypothesis".into(),
        ));
    }
    let mut best: Option<ImageGrid> = None;
    for &v in velocities {
        let img = backproject(d, scene, grid, v)?;
        if best.as_ref().is_none_or(|b| img.peak().2 > b.peak().2) {
            best = Some(img);
        }
    }
    Ok(best.expect("nonempty scan"))
}

/// Ground velocities `speed·(cos α, sin α, 0)` on a speed × heading grid;
/// zero speed appears once.
pub fn velocity_grid(speeds: &[f64], headings: &[f64]) -> Vec<Vec3> {
    let mut out = Vec::new();
    for &v in speeds {
        if v == 0.0 {
            out.push(Vec3::zeros());
            continue;
        }
        out.extend(headings.iter().map(|a| Vec3::new(a.cos(), a.sin(), 0.0) * v));
    }
    out
}
