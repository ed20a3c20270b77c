//! Two-port network algebra: S/T conversion, cascading, renormalization,
//! interpolation, component synthesis and band metrics.

mod component;
mod data;
mod metrics;
mod twoport;

use num_complex::Complex64;
use thiserror::Error;

pub use component::{make_component, offset_short_reflection, ComponentSpec, LineLoss};
pub use data::{cascade, cascade_all, flip, interpolate, linear_grid, renormalize, NetworkData, DEFAULT_Z_REF};
pub use metrics::{band_average, band_mean, mag_to_db, moving_average, Band, Scale, DEFAULT_SMOOTHING_WINDOW};
pub use twoport::{cascade_point, SParam, TwoPortS, TwoPortT, SINGULAR_THRESHOLD};

pub(crate) use component::db_to_mag;
pub(crate) use data::validate_grid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),
    #[error("{values} S-matrices for {frequencies} frequencies")]
    LengthMismatch { frequencies: usize, values: usize },
    #[error("non-finite S-parameter at point #{index}")]
    NonFinite { index: usize },
    #[error("singular conversion: {0}")]
    SingularConversion(&'static str),
    #[error("frequency grids differ")]
    GridMismatch,
    #[error("reference impedances differ: {0} vs {1}")]
    ZRefMismatch(Complex64, Complex64),
    #[error("invalid reference impedance {0} (real part must be > 0)")]
    InvalidImpedance(Complex64),
    #[error("frequency {0} Hz lies outside the network's grid")]
    ExtrapolationRequested(f64),
    #[error("invalid component: {0}")]
    InvalidSpec(String),
    #[error("invalid band: {0}")]
    InvalidBand(String),
    #[error("no grid points inside the band")]
    EmptyBand,
    #[error("bad smoothing window {window} for a series of length {len} (must be odd, >= 1, <= length)")]
    BadWindow { window: usize, len: usize },
}
