pub mod error;
pub mod imaging_motion;
pub mod io;
pub mod norms_analysis;
pub mod numerics;
pub mod rpca;
pub mod sar_model;
pub mod tensorize;

pub use error::{Error, Result};

/// The guide's code listings, compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/model.md")]
    mod model {}
    #[doc = include_str!("../../../book/src/subapertures.md")]
    mod subapertures {}
    #[doc = include_str!("../../../book/src/separation.md")]
    mod separation {}
    #[doc = include_str!("../../../book/src/imaging.md")]
    mod imaging {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
