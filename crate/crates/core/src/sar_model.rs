//! Scene description and synthesis of the down-ramped complex baseband
//! data matrix.
//!
//! Each point scatterer contributes a Gaussian pulse centred on its
//! travel-time difference `Δτ_i(s)` relative to the reference point, with
//! the carrier phase `exp(−iω₀Δτ_i(s))` retained after the baseband
//! transformation:
//!
//! ```text
//! D[j, l] = Σ_i σ_i · exp(−B²(t_l − Δτ_i(s_j))²/2) · exp(−iω₀Δτ_i(s_j))
//! ```

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::ComplexMatrix;

pub type Vec3 = Vector3<f64>;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Aperture duration and pulse count of the reference experiment; smaller
/// pulse counts keep the pulse interval and shorten the aperture.
pub const REFERENCE_APERTURE_S: f64 = 11.5;
pub const REFERENCE_SLOW_COUNT: usize = 512;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    /// Carrier angular frequency ω₀, rad/s.
    pub carrier_omega0: f64,
    /// Bandwidth B, Hz.
    pub bandwidth: f64,
    /// Pulse repetition interval Δs, s.
    pub pulse_interval: f64,
    /// Fast-time sampling step Δt, s.
    pub fast_dt: f64,
    /// Number of slow-time intervals `n` (even); the matrix has `n + 1` rows.
    pub slow_count: usize,
    /// Fast-time window `[t_min, t_max]`, s, relative to the reference delay.
    pub fast_window: [f64; 2],
    /// Platform speed, m/s.
    pub platform_speed: f64,
    /// Slow-time aperture `s_tot = n·Δs`, s.
    pub aperture_duration: f64,
    /// Propagation speed c, m/s.
    pub lightspeed: f64,
}

impl RadarConfig {
    /// X-band, 100 MHz, Δt = 1/(4B), a ±150 ns window and the reference
    /// pulse interval. `slow_count` must be even.
    pub fn desk_scale(slow_count: usize) -> Self {
        let bandwidth = 100e6;
        let pulse_interval = REFERENCE_APERTURE_S / REFERENCE_SLOW_COUNT as f64;
        Self {
            carrier_omega0: 2.0 * PI * 9.6e9,
            bandwidth,
            pulse_interval,
            fast_dt: 1.0 / (4.0 * bandwidth),
            slow_count,
            fast_window: [-150e-9, 150e-9],
            platform_speed: 200.0,
            aperture_duration: pulse_interval * slow_count as f64,
            lightspeed: SPEED_OF_LIGHT,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let positive = [
            ("carrier_omega0", self.carrier_omega0),
            ("bandwidth", self.bandwidth),
            ("pulse_interval", self.pulse_interval),
            ("fast_dt", self.fast_dt),
            ("platform_speed", self.platform_speed),
            ("aperture_duration", self.aperture_duration),
            ("lightspeed", self.lightspeed),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if self.slow_count < 2 || !self.slow_count.is_multiple_of(2) {
            return bad(format!("slow_count must be even and >= 2, got {}", self.slow_count));
        }
        // small slack so that Δt = 1/(2B) computed in floating point passes
        if self.fast_dt > (1.0 + 1e-12) / (2.0 * self.bandwidth) {
            return bad(format!(
                "fast_dt {} exceeds the baseband Nyquist limit 1/(2B) = {}",
                self.fast_dt,
                1.0 / (2.0 * self.bandwidth)
            ));
        }
        let [t0, t1] = self.fast_window;
        if !(t0.is_finite() && t1.is_finite() && t1 - t0 >= self.fast_dt) {
            return bad(format!("fast_window [{t0}, {t1}] must span at least one sample"));
        }
        let expected = self.pulse_interval * self.slow_count as f64;
        if ((self.aperture_duration - expected) / expected).abs() > 1e-9 {
            return bad(format!(
                "aperture_duration {} differs from slow_count * pulse_interval = {expected}",
                self.aperture_duration
            ));
        }
        Ok(())
    }

    pub fn slow_axis(&self) -> Axis {
        let half = (self.slow_count / 2) as f64;
        Axis {
            start: -half * self.pulse_interval,
            step: self.pulse_interval,
            len: self.slow_count + 1,
        }
    }

    pub fn fast_axis(&self) -> Axis {
        let [t0, t1] = self.fast_window;
        let m = ((t1 - t0) / self.fast_dt).round() as usize;
        Axis {
            start: t0,
            step: self.fast_dt,
            len: m + 1,
        }
    }

    /// Baseband envelope `f_B(t) = exp(−B²t²/2)`.
    #[inline]
    pub fn envelope(&self, t: f64) -> f64 {
        let bt = self.bandwidth * t;
        (-0.5 * bt * bt).exp()
    }
}

/// A uniformly sampled axis: `start + k·step` for `k < len`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl Axis {
    #[inline]
    pub fn value(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|k| self.value(k)).collect()
    }

    pub fn end(&self) -> f64 {
        self.value(self.len - 1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointTarget {
    /// Position at `s = 0`, m.
    pub position0: Vec3,
    /// m/s; zero for stationary scatterers.
    #[serde(default = "Vec3::zeros")]
    pub velocity: Vec3,
    pub reflectivity: f64,
}

impl PointTarget {
    pub fn stationary(position0: Vec3, reflectivity: f64) -> Self {
        Self {
            position0,
            velocity: Vec3::zeros(),
            reflectivity,
        }
    }

    /// Ground mover with speed `speed` and heading `alpha` measured from x̂.
    pub fn ground_mover(position0: Vec3, speed: f64, alpha: f64, reflectivity: f64) -> Self {
        Self {
            position0,
            velocity: Vec3::new(alpha.cos(), alpha.sin(), 0.0) * speed,
            reflectivity,
        }
    }

    #[inline]
    pub fn position_at(&self, s: f64) -> Vec3 {
        self.position0 + self.velocity * s
    }
}

/// Straight-line, constant-velocity platform path `r(s) = origin + s·velocity`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearTrajectory {
    pub origin: Vec3,
    pub velocity: Vec3,
}

impl LinearTrajectory {
    #[inline]
    pub fn position_at(&self, s: f64) -> Vec3 {
        self.origin + self.velocity * s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scene {
    pub platform: LinearTrajectory,
    pub reference_point: Vec3,
    #[serde(default)]
    pub stationary: Vec<PointTarget>,
    #[serde(default)]
    pub movers: Vec<PointTarget>,
}

impl Scene {
    /// Side-looking geometry used throughout the examples: platform at
    /// 15 km ground range and 5 km altitude on the +x side of the reference
    /// point, flying along +y. Heading α = 0 is then the direction of
    /// largest delay variation.
    pub fn side_looking(cfg: &RadarConfig) -> Self {
        Self {
            platform: LinearTrajectory {
                origin: Vec3::new(15_000.0, 0.0, 5_000.0),
                velocity: Vec3::new(0.0, cfg.platform_speed, 0.0),
            },
            reference_point: Vec3::zeros(),
            stationary: Vec::new(),
            movers: Vec::new(),
        }
    }

    /// Adds `count` unit-reflectivity scatterers drawn uniformly in the
    /// ground box `|x|, |y| ≤ half_extent` around the reference point.
    pub fn with_random_stationary(mut self, count: usize, half_extent: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..count {
            let p = Vec3::new(
                rng.random_range(-half_extent..=half_extent),
                rng.random_range(-half_extent..=half_extent),
                0.0,
            );
            self.stationary
                .push(PointTarget::stationary(self.reference_point + p, 1.0));
        }
        self
    }

    pub fn with_mover(mut self, target: PointTarget) -> Self {
        self.movers.push(target);
        self
    }

    pub fn stationary_only(&self) -> Scene {
        Scene {
            movers: Vec::new(),
            ..self.clone()
        }
    }

    pub fn movers_only(&self) -> Scene {
        Scene {
            stationary: Vec::new(),
            ..self.clone()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.stationary.is_empty() && self.movers.is_empty()
    }

    /// Labelled iterator over all targets, stationary first.
    pub fn targets(&self) -> impl Iterator<Item = (String, &PointTarget)> {
        let st = self
            .stationary
            .iter()
            .enumerate()
            .map(|(i, t)| (format!("stationary[{i}]"), t));
        let mv = self.movers.iter().enumerate().map(|(i, t)| (format!("movers[{i}]"), t));
        st.chain(mv)
    }

    pub fn validate(&self, cfg: &RadarConfig) -> Result<()> {
        let speed = self.platform.velocity.norm();
        if ((speed - cfg.platform_speed) / cfg.platform_speed).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "platform velocity magnitude {speed} differs from platform_speed {}",
                cfg.platform_speed
            )));
        }
        for (label, t) in self.targets() {
            if !(t.reflectivity.is_finite() && t.reflectivity >= 0.0) {
                return Err(Error::InvalidParameter(format!("{label}: reflectivity must be >= 0")));
            }
        }
        for (i, t) in self.stationary.iter().enumerate() {
            if t.velocity != Vec3::zeros() {
                return Err(Error::InvalidParameter(format!(
                    "stationary[{i}] has a nonzero velocity"
                )));
            }
        }
        for s in cfg.slow_axis().values() {
            let r = self.platform.position_at(s);
            for (label, t) in self.targets() {
                if (r - t.position_at(s)).norm() == 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "{label} lies on the platform trajectory at s = {s}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Round-trip travel time `τ = 2‖r(s) − p‖/c`.
pub fn travel_time(scene: &Scene, s: f64, p: &Vec3, c: f64) -> f64 {
    2.0 * (scene.platform.position_at(s) - p).norm() / c
}

/// Travel-time difference relative to the reference point under the
/// start-stop approximation.
pub fn delta_tau(scene: &Scene, target: &PointTarget, s: f64, c: f64) -> f64 {
    let r = scene.platform.position_at(s);
    2.0 * ((r - target.position_at(s)).norm() - (r - scene.reference_point).norm()) / c
}

/// Delay of a hypothesised position/velocity pair, `τ(s, ρ + s·v) − τ(s, ρ_o)`.
pub fn hypothesis_delay(scene: &Scene, rho: &Vec3, v: &Vec3, s: f64, c: f64) -> f64 {
    let r = scene.platform.position_at(s);
    2.0 * ((r - (rho + v * s)).norm() - (r - scene.reference_point).norm()) / c
}

/// Down-ramped baseband data with its axes.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    pub values: ComplexMatrix,
    pub slow_axis: Axis,
    pub fast_axis: Axis,
    pub config: RadarConfig,
}

impl DataMatrix {
    pub fn new(values: ComplexMatrix, config: RadarConfig) -> Result<Self> {
        let slow_axis = config.slow_axis();
        let fast_axis = config.fast_axis();
        Self::with_axes(values, slow_axis, fast_axis, config)
    }

    pub fn with_axes(values: ComplexMatrix, slow_axis: Axis, fast_axis: Axis, config: RadarConfig) -> Result<Self> {
        if values.shape() != (slow_axis.len, fast_axis.len) {
            return Err(Error::Shape(format!(
                "values are {}x{} but axes describe {}x{}",
                values.rows(),
                values.cols(),
                slow_axis.len,
                fast_axis.len
            )));
        }
        Ok(Self {
            values,
            slow_axis,
            fast_axis,
            config,
        })
    }

    /// Same axes and config, different values.
    pub fn with_values(&self, values: ComplexMatrix) -> Result<Self> {
        Self::with_axes(values, self.slow_axis, self.fast_axis, self.config.clone())
    }
}

/// Synthesises the data matrix for every target in `scene`.
///
/// Stationary and moving contributions are accumulated separately and
/// added last, so `synthesize(scene)` equals
/// `synthesize(stationary_only) + synthesize(movers_only)` bit for bit.
pub fn synthesize(scene: &Scene, cfg: &RadarConfig) -> Result<DataMatrix> {
    cfg.validate()?;
    let slow = cfg.slow_axis();
    let fast = cfg.fast_axis();
    let c = cfg.lightspeed;
    let [t_min, t_max] = cfg.fast_window;

    // delays[j][i] for every target, checked against the window up front
    let targets: Vec<(String, &PointTarget)> = scene.targets().collect();
    let n_stationary = scene.stationary.len();
    let delays: Vec<Vec<f64>> = (0..slow.len)
        .into_par_iter()
        .map(|j| {
            let s = slow.value(j);
            targets
                .iter()
                .map(|(label, t)| {
                    let d = delta_tau(scene, t, s, c);
                    if d < t_min || d > t_max {
                        Err(Error::WindowCoverage {
                            target: label.clone(),
                            slow_time: s,
                            delay: d,
                            t_min,
                            t_max,
                        })
                    } else {
                        Ok(d)
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;

    let rows: Vec<Vec<Complex64>> = delays
        .par_iter()
        .map(|row_delays| {
            (0..fast.len)
                .map(|l| {
                    let t = fast.value(l);
                    let contribution = |(d, tgt): (&f64, &(String, &PointTarget))| {
                        let amp = tgt.1.reflectivity * cfg.envelope(t - d);
                        Complex64::from_polar(amp, -cfg.carrier_omega0 * d)
                    };
                    let zero = Complex64::new(0.0, 0.0);
                    let stationary = row_delays[..n_stationary]
                        .iter()
                        .zip(targets[..n_stationary].iter())
                        .map(contribution)
                        .fold(zero, |a, b| a + b);
                    let moving = row_delays[n_stationary..]
                        .iter()
                        .zip(targets[n_stationary..].iter())
                        .map(contribution)
                        .fold(zero, |a, b| a + b);
                    stationary + moving
                })
                .collect()
        })
        .collect();

    let values = ComplexMatrix::from_vec(slow.len, fast.len, rows.concat())?;
    DataMatrix::with_axes(values, slow, fast, cfg.clone())
}

/// First-order estimate of the number of fast-time columns spanned by a
/// mover's echo over the aperture:
/// `N ≈ (4·S/Δt) · (r(0) − ρ_o)/‖r(0) − ρ_o‖ · v/c`, with `S` the aperture
/// duration in seconds.
pub fn column_support_estimate(scene: &Scene, cfg: &RadarConfig, target: &PointTarget) -> f64 {
    let look = scene.platform.position_at(0.0) - scene.reference_point;
    let radial = look.normalize().dot(&target.velocity);
    (4.0 * cfg.aperture_duration / cfg.fast_dt * radial / cfg.lightspeed).abs()
}

/// The same estimate written in terms of speed and heading,
/// `(4·S/Δt)·(v/c)·cos α`.
pub fn column_support_from_heading(aperture_s: f64, fast_dt: f64, speed: f64, alpha: f64, c: f64) -> f64 {
    (4.0 * aperture_s / fast_dt * speed / c * alpha.cos()).abs()
}
