use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdNoConvergence { rows: usize, cols: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "fast-time window [{t_min:e}, {t_max:e}] s does not cover target {target} \
         at slow time {slow_time} s (delay {delay:e} s)"
    )]
    WindowCoverage {
        target: String,
        slow_time: f64,
        delay: f64,
        t_min: f64,
        t_max: f64,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("block-circulant embedding of size {rows}x{cols} exceeds the cap of {cap} entries")]
    MemoryCap { rows: usize, cols: usize, cap: usize },

    #[error("panel {panel}: {source}")]
    Panel {
        panel: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("no slow-time row reaches {threshold} of the global peak magnitude")]
    NoDetection { threshold: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
