//! Experiment configuration: JSON on disk, validated before any work.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sar_trpca::imaging_motion::{velocity_grid, FitConfig, GridSpec, DEFAULT_STABILITY_THRESHOLD};
use sar_trpca::io::Provenance;
use sar_trpca::norms_analysis::SweepGrid;
use sar_trpca::rpca::{Method, Mu0Policy, SolverConfig};
use sar_trpca::sar_model::{LinearTrajectory, PointTarget, RadarConfig, Scene, Vec3};
use sar_trpca::tensorize::{make_plan, TensorPlan};

/// A rejected configuration, with the offending field.
#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {field}: {message}")]
    Parse {
        path: PathBuf,
        field: String,
        message: String,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub radar: RadarSection,
    pub scene: SceneSection,
    #[serde(default)]
    pub tensor: TensorSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub separation: SeparationSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub image: ImageSection,
    #[serde(default)]
    pub estimate: EstimateSection,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// The desk-scale radar with optional overrides. `fast_dt` follows the
/// bandwidth as `1/(4B)` unless given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadarSection {
    pub slow_count: usize,
    pub carrier_hz: Option<f64>,
    pub bandwidth_hz: Option<f64>,
    pub fast_dt: Option<f64>,
    pub fast_window: Option<[f64; 2]>,
    pub platform_speed: Option<f64>,
}

impl Default for RadarSection {
    fn default() -> Self {
        Self {
            slow_count: 512,
            carrier_hz: None,
            bandwidth_hz: None,
            fast_dt: None,
            fast_window: None,
            platform_speed: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSection {
    /// Defaults to the side-looking geometry with the configured speed.
    #[serde(default)]
    pub platform: Option<LinearTrajectory>,
    #[serde(default = "Vec3::zeros")]
    pub reference_point: Vec3,
    #[serde(default)]
    pub stationary: Vec<PointTarget>,
    /// Unit scatterers drawn from the experiment seed.
    #[serde(default)]
    pub random_stationary: Option<RandomStationary>,
    #[serde(default)]
    pub movers: Vec<MoverSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStationary {
    pub count: usize,
    /// Half side of the ground box around the reference point, m.
    pub half_extent: f64,
}

/// A mover given either by `velocity` or by `speed` and `heading`
/// (radians from x̂).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MoverSpec {
    pub position0: Vec3,
    #[serde(default)]
    pub velocity: Option<Vec3>,
    #[serde(default)]
    pub speed: Option<f64>,
    #[serde(default)]
    pub heading: Option<f64>,
    pub reflectivity: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TensorSection {
    /// Sub-aperture duration as a fraction of the aperture.
    pub sub_fraction: f64,
    pub overlap: f64,
}

impl Default for TensorSection {
    fn default() -> Self {
        Self {
            sub_fraction: 0.02,
            overlap: 0.9,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub mu0_policy: Mu0Policy,
    pub rho: f64,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverConfig::with_eta(1.0);
        Self {
            mu0_policy: s.mu0_policy,
            rho: s.rho,
            tol: s.tol,
            max_iters: s.max_iters,
        }
    }
}

impl SolverSection {
    pub fn with_eta(&self, eta: f64) -> SolverConfig {
        SolverConfig {
            eta,
            mu0_policy: self.mu0_policy,
            rho: self.rho,
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum EtaMode {
    /// `η*` from the simulated stationary and moving parts.
    Oracle,
    /// `1/√max(n1, n2)`, divided by `√n3` for the tensor method.
    Default,
    /// The value of `eta`.
    Explicit,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SeparationSection {
    pub method: Method,
    pub eta_mode: EtaMode,
    pub eta: Option<f64>,
}

impl Default for SeparationSection {
    fn default() -> Self {
        Self {
            method: Method::Tensor,
            eta_mode: EtaMode::Oracle,
            eta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub grid: SweepGrid,
    /// Write per-heading PGM heatmaps (sizes down, overlaps across).
    pub heatmaps: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            grid: SweepGrid::default(),
            heatmaps: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImageSection {
    /// Defaults to 128×128 pixels over ±8 m around the reference point.
    pub grid: Option<GridSpec>,
    pub velocity: Vec3,
    pub pgm: bool,
}

impl Default for ImageSection {
    fn default() -> Self {
        Self {
            grid: None,
            velocity: Vec3::zeros(),
            pgm: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateSection {
    /// Rows below this fraction of the global peak are dropped.
    pub threshold: f64,
    /// Sub-sample peak refinement of the trace.
    pub refine: bool,
    pub fit: FitConfig,
    /// Velocity hypotheses whose best-focused image seeds the fit.
    pub seed_speeds: Vec<f64>,
    pub seed_headings: Vec<f64>,
}

impl Default for EstimateSection {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_STABILITY_THRESHOLD,
            refine: true,
            fit: FitConfig::default(),
            seed_speeds: (0..=6).map(|k| 0.5 * k as f64).collect(),
            seed_headings: (0..=4).map(|k| k as f64 * PI / 8.0).collect(),
        }
    }
}

impl EstimateSection {
    pub fn seed_velocities(&self) -> Vec<Vec3> {
        velocity_grid(&self.seed_speeds, &self.seed_headings)
    }
}

/// Everything a command needs, derived from a validated configuration.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub radar: RadarConfig,
    pub scene: Scene,
    pub plan: TensorPlan,
    pub image_grid: GridSpec,
    pub provenance: Provenance,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.into(),
            source,
        })?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            ConfigError::Parse {
                path: path.into(),
                field,
                message: format!("{inner} (line {}, column {})", inner.line(), inner.column()),
            }
        })
    }

    /// SHA-256 of the compact JSON form, defaults filled in.
    pub fn sha256(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    fn radar(&self) -> Result<RadarConfig, ConfigError> {
        let r = &self.radar;
        let mut cfg = RadarConfig::desk_scale(r.slow_count);
        if let Some(f) = r.carrier_hz {
            cfg.carrier_omega0 = 2.0 * PI * f;
        }
        if let Some(b) = r.bandwidth_hz {
            cfg.bandwidth = b;
            cfg.fast_dt = 1.0 / (4.0 * b);
        }
        if let Some(dt) = r.fast_dt {
            cfg.fast_dt = dt;
        }
        if let Some(w) = r.fast_window {
            cfg.fast_window = w;
        }
        if let Some(v) = r.platform_speed {
            cfg.platform_speed = v;
        }
        cfg.validate().map_err(|e| invalid("radar", e))?;
        Ok(cfg)
    }

    fn scene(&self, radar: &RadarConfig) -> Result<Scene, ConfigError> {
        let sc = &self.scene;
        let mut scene = Scene::side_looking(radar);
        if let Some(p) = &sc.platform {
            scene.platform = p.clone();
        }
        scene.reference_point = sc.reference_point;
        scene.stationary = sc.stationary.clone();
        if let Some(r) = sc.random_stationary {
            if !(r.half_extent.is_finite() && r.half_extent >= 0.0) {
                return Err(invalid(
                    "scene.random_stationary.half_extent",
                    "must be finite and >= 0",
                ));
            }
            scene = scene.with_random_stationary(r.count, r.half_extent, self.seed);
        }
        for (i, m) in sc.movers.iter().enumerate() {
            let field = format!("scene.movers[{i}]");
            let velocity = match (m.velocity, m.speed, m.heading) {
                (Some(v), None, None) => v,
                (None, Some(speed), Some(alpha)) => Vec3::new(alpha.cos(), alpha.sin(), 0.0) * speed,
                _ => return Err(invalid(&field, "give either velocity or both speed and heading")),
            };
            scene.movers.push(PointTarget {
                position0: m.position0,
                velocity,
                reflectivity: m.reflectivity,
            });
        }
        if scene.is_empty() {
            return Err(invalid(
                "scene",
                "no targets: add stationary, random_stationary or movers",
            ));
        }
        scene.validate(radar).map_err(|e| invalid("scene", e))?;
        Ok(scene)
    }

    /// Checks every section and derives the pieces the commands use.
    pub fn resolve(self) -> Result<Resolved, ConfigError> {
        let radar = self.radar()?;
        let scene = self.scene(&radar)?;
        let t = self.tensor;
        let plan = make_plan(
            radar.aperture_duration,
            t.sub_fraction * radar.aperture_duration,
            t.overlap,
            radar.pulse_interval,
        )
        .map_err(|e| invalid("tensor", e))?;
        self.solver.with_eta(1.0).validate().map_err(|e| invalid("solver", e))?;
        let sep = self.separation;
        if let Some(eta) = sep.eta {
            if !(eta.is_finite() && eta > 0.0) {
                return Err(invalid("separation.eta", format!("must be positive, got {eta}")));
            }
        }
        if sep.eta_mode == EtaMode::Explicit && sep.eta.is_none() {
            return Err(invalid(
                "separation.eta",
                "eta_mode explicit needs a value (config or --eta)",
            ));
        }
        if self.sweep.grid.is_empty() {
            return Err(invalid("sweep.grid", "every axis needs at least one value"));
        }
        let image_grid = self
            .image
            .grid
            .unwrap_or_else(|| GridSpec::centred(scene.reference_point, 16.0 / 127.0, 128));
        image_grid.validate().map_err(|e| invalid("image.grid", e))?;
        let est = &self.estimate;
        if !(0.0..=1.0).contains(&est.threshold) {
            return Err(invalid("estimate.threshold", "must lie in [0, 1]"));
        }
        if est.seed_velocities().is_empty() {
            return Err(invalid(
                "estimate",
                "seed_speeds and seed_headings give no velocity hypotheses",
            ));
        }
        let provenance = Provenance {
            config_sha256: self.sha256(),
            seed: self.seed,
        };
        Ok(Resolved {
            config: self,
            radar,
            scene,
            plan,
            image_grid,
            provenance,
        })
    }
}
