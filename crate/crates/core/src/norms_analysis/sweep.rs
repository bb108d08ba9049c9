use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{nuclear_decoupled, nuclear_fourier};
use crate::error::{Error, Result};
use crate::numerics::ComplexTensor3;
use crate::sar_model::{synthesize, DataMatrix, PointTarget, RadarConfig, Scene};
use crate::tensorize::{make_plan, to_tensor};

/// Hyper-parameter grid. Sub-aperture sizes are fractions of the aperture
/// duration; headings are in radians from x̂.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepGrid {
    pub sub_fractions: Vec<f64>,
    pub overlaps: Vec<f64>,
    pub alphas: Vec<f64>,
}

impl Default for SweepGrid {
    /// 31 sizes `{0.005, 0.01, 0.02, …, 0.30}`, overlaps `{0.1, …, 0.9}`
    /// and headings `kπ/16` for `k = 0..8`.
    fn default() -> Self {
        let mut sub_fractions = vec![0.005, 0.01];
        sub_fractions.extend((2..=30).map(|k| k as f64 / 100.0));
        Self {
            sub_fractions,
            overlaps: (1..=9).map(|k| k as f64 / 10.0).collect(),
            alphas: (0..8).map(|k| k as f64 * PI / 16.0).collect(),
        }
    }
}

impl SweepGrid {
    pub fn len(&self) -> usize {
        self.sub_fractions.len() * self.overlaps.len() * self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepStatus {
    Ok,
    /// The sub-aperture layout could not be built (e.g. a zero-row stride);
    /// every measured field is NaN.
    InvalidPlan,
}

impl SweepStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepStatus::Ok => "ok",
            SweepStatus::InvalidPlan => "invalid_plan",
        }
    }
}

/// One grid point. Ratios follow the figure conventions: `eta_ratio_*` is
/// `η_max/η_min`, `*_nuclear_ratio` is `‖·‖_{*,ℱ}/‖·‖_{*,𝒟}` and `l1_ratio`
/// is `‖𝒜_L‖_1/‖𝒜_S‖_1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub sub_fraction: f64,
    pub sub_aperture_s: f64,
    pub overlap: f64,
    pub n3: usize,
    pub status: SweepStatus,
    pub eta_ratio_fourier: f64,
    pub eta_ratio_decoupled: f64,
    pub eta_star_fourier: f64,
    pub eta_star_decoupled: f64,
    pub background_nuclear_ratio: f64,
    pub mover_nuclear_ratio: f64,
    pub l1_ratio: f64,
}

impl SweepRow {
    pub const CSV_HEADER: &'static str = "alpha,sub_fraction,sub_aperture_s,overlap,n3,status,\
eta_ratio_fourier,eta_ratio_decoupled,eta_star_fourier,eta_star_decoupled,\
background_nuclear_ratio,mover_nuclear_ratio,l1_ratio";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.alpha,
            self.sub_fraction,
            self.sub_aperture_s,
            self.overlap,
            self.n3,
            self.status.as_str(),
            self.eta_ratio_fourier,
            self.eta_ratio_decoupled,
            self.eta_star_fourier,
            self.eta_star_decoupled,
            self.background_nuclear_ratio,
            self.mover_nuclear_ratio,
            self.l1_ratio
        )
    }
}

#[derive(Clone, Copy)]
struct PartNorms {
    decoupled: f64,
    fourier: f64,
    l1: f64,
}

impl PartNorms {
    fn of(t: &ComplexTensor3) -> Result<Self> {
        Ok(Self {
            decoupled: nuclear_decoupled(t)?,
            fourier: nuclear_fourier(t)?,
            l1: t.l1_norm(),
        })
    }
}

/// Evaluates every grid point for a scene holding a stationary background
/// and exactly one mover. The mover keeps its start position, speed and
/// reflectivity; its heading is replaced by each `alpha` in turn.
///
/// Rows come out ordered by heading, then sub-aperture size, then overlap.
pub fn sweep(scene: &Scene, cfg: &RadarConfig, grid: &SweepGrid) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter("sweep grid is empty".into()));
    }
    let [mover] = scene.movers.as_slice() else {
        return Err(Error::InvalidParameter(format!(
            "sweep needs exactly one mover, scene has {}",
            scene.movers.len()
        )));
    };
    if scene.stationary.is_empty() {
        return Err(Error::InvalidParameter("sweep needs a stationary background".into()));
    }
    let speed = mover.velocity.norm();
    let background = synthesize(&scene.stationary_only(), cfg)?;
    let movers: Vec<DataMatrix> = grid
        .alphas
        .par_iter()
        .map(|&alpha| {
            let heading = PointTarget::ground_mover(mover.position0, speed, alpha, mover.reflectivity);
            let mut only = scene.movers_only();
            only.movers = vec![heading];
            synthesize(&only, cfg)
        })
        .collect::<Result<_>>()?;

    let layouts: Vec<(usize, usize)> = (0..grid.sub_fractions.len())
        .flat_map(|i| (0..grid.overlaps.len()).map(move |j| (i, j)))
        .collect();
    let per_layout: Vec<Vec<SweepRow>> = layouts
        .par_iter()
        .map(|&(i, j)| evaluate_layout(cfg, grid, grid.sub_fractions[i], grid.overlaps[j], &background, &movers))
        .collect::<Result<_>>()?;

    // layouts are size-major, so this yields heading, size, overlap order
    let mut rows = Vec::with_capacity(grid.len());
    for a in 0..grid.alphas.len() {
        rows.extend(per_layout.iter().map(|layout| layout[a].clone()));
    }
    Ok(rows)
}

fn evaluate_layout(
    cfg: &RadarConfig,
    grid: &SweepGrid,
    fraction: f64,
    overlap: f64,
    background: &DataMatrix,
    movers: &[DataMatrix],
) -> Result<Vec<SweepRow>> {
    let s_tot = cfg.aperture_duration;
    let s_sub = fraction * s_tot;
    let blank = |alpha: f64, n3: usize, status| SweepRow {
        alpha,
        sub_fraction: fraction,
        sub_aperture_s: s_sub,
        overlap,
        n3,
        status,
        eta_ratio_fourier: f64::NAN,
        eta_ratio_decoupled: f64::NAN,
        eta_star_fourier: f64::NAN,
        eta_star_decoupled: f64::NAN,
        background_nuclear_ratio: f64::NAN,
        mover_nuclear_ratio: f64::NAN,
        l1_ratio: f64::NAN,
    };
    let plan = match make_plan(s_tot, s_sub, overlap, cfg.pulse_interval) {
        Ok(p) => p,
        Err(Error::InvalidParameter(_)) => {
            return Ok(grid
                .alphas
                .iter()
                .map(|&a| blank(a, 0, SweepStatus::InvalidPlan))
                .collect());
        }
        Err(e) => return Err(e),
    };
    let bg = PartNorms::of(&to_tensor(background, &plan)?.tensor)?;
    if bg.l1 == 0.0 {
        return Err(Error::Degenerate("stationary background has zero l1 norm".into()));
    }
    grid.alphas
        .iter()
        .zip(movers)
        .map(|(&alpha, d_s)| {
            let mv = PartNorms::of(&to_tensor(d_s, &plan)?.tensor)?;
            if mv.l1 == 0.0 {
                return Err(Error::Degenerate("mover has zero l1 norm".into()));
            }
            let (max_f, min_f) = (mv.fourier / mv.l1, bg.fourier / bg.l1);
            let (max_d, min_d) = (mv.decoupled / mv.l1, bg.decoupled / bg.l1);
            Ok(SweepRow {
                eta_ratio_fourier: max_f / min_f,
                eta_ratio_decoupled: max_d / min_d,
                eta_star_fourier: (max_f * min_f).sqrt(),
                eta_star_decoupled: (max_d * min_d).sqrt(),
                background_nuclear_ratio: bg.fourier / bg.decoupled,
                mover_nuclear_ratio: mv.fourier / mv.decoupled,
                l1_ratio: bg.l1 / mv.l1,
                ..blank(alpha, plan.n3, SweepStatus::Ok)
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sar_model::Vec3;

    fn small_scene(cfg: &RadarConfig) -> Scene {
        Scene::side_looking(cfg)
            .with_random_stationary(3, 5.0, 1)
            .with_mover(PointTarget::ground_mover(Vec3::new(1.0, 0.0, 0.0), 1.0, 0.0, 0.1))
    }

    #[test]
    fn default_grid_size() {
        let g = SweepGrid::default();
        assert_eq!((g.sub_fractions.len(), g.overlaps.len(), g.alphas.len()), (31, 9, 8));
        assert_eq!(g.len(), 2232);
    }

    #[test]
    fn single_cell() {
        let cfg = RadarConfig::desk_scale(64);
        let grid = SweepGrid {
            sub_fractions: vec![0.25],
            overlaps: vec![0.5],
            alphas: vec![PI / 4.0],
        };
        let rows = sweep(&small_scene(&cfg), &cfg, &grid).unwrap();
        assert_eq!(rows.len(), 1);
        let r = &rows[0];
        assert_eq!(r.status, SweepStatus::Ok);
        assert!(r.eta_ratio_fourier.is_finite() && r.l1_ratio > 0.0);
        assert_eq!(r.csv_line().split(',').count(), SweepRow::CSV_HEADER.split(',').count());
    }

    #[test]
    fn invalid_layout_is_flagged_not_fatal() {
        let cfg = RadarConfig::desk_scale(64);
        let grid = SweepGrid {
            sub_fractions: vec![0.05, 0.5],
            overlaps: vec![0.9],
            alphas: vec![0.0, 1.0],
        };
        let rows = sweep(&small_scene(&cfg), &cfg, &grid).unwrap();
        assert_eq!(rows.len(), 4);
        // 0.05 of a 64-interval aperture: 4-row panels, zero stride at 0.9
        assert_eq!(rows[0].status, SweepStatus::InvalidPlan);
        assert!(rows[0].l1_ratio.is_nan());
        assert_eq!(rows[1].status, SweepStatus::Ok);
        assert_eq!((rows[2].alpha, rows[2].sub_fraction), (1.0, 0.05));
    }

    #[test]
    fn requires_one_mover() {
        let cfg = RadarConfig::desk_scale(64);
        let scene = small_scene(&cfg).stationary_only();
        assert!(sweep(&scene, &cfg, &SweepGrid::default()).is_err());
    }
}
