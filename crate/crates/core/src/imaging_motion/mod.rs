mod imaging;
mod motion;

pub use imaging::{backproject, best_focus, velocity_grid, velocity_scan, GridSpec, ImageGrid};
pub use motion::{
    extract_trace, extract_trace_refined, fit_motion, huber, model_trace, FitConfig, MotionEstimate, MotionSeed,
    TracePoint, DEFAULT_STABILITY_THRESHOLD, DEFAULT_V_MAX, HUBER_DELTA_SAMPLES,
};
