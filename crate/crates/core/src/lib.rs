//! Link-level simulation library for terahertz transceivers built from four
//! uniform planar arrays (UPAs) mounted on the side faces of a cube.
//!
//! The crate covers the full loop of establishing and keeping a narrow-beam
//! link between two such transceivers:
//!
//! * [`geometry`]: directions, sectors, steering vectors, radiation patterns,
//!   beam gain in closed form, wideband squint figures.
//! * [`channel`]: multipath channel realizations, link budgets, decoding SNR,
//!   noisy single-slot power measurements.
//! * [`codebook`]: the dense direction grid, hierarchical wide-beam codebooks
//!   synthesized by least squares, narrow-beam placement, benchmark codebooks,
//!   tracking beams, worst-case gain bounds, and the on-disk codebook format.
//! * [`training`]: exhaustive and two-phase hierarchical beam search.
//! * [`tracking`]: threshold-triggered beam tracking with a prediction mode
//!   and a neighborhood-search mode, plus the full session state machine.
//! * [`mobility`]: piecewise-linear random trajectories and pose-to-angle
//!   conversion.
//! * [`scenario`]: serializable end-to-end simulation setups.
//! * [`experiments`]: reproducible sweep harnesses with CSV/JSON output.

pub mod channel;
pub mod codebook;
pub mod experiments;
pub mod geometry;
pub mod mobility;
pub mod scenario;
pub mod tracking;
pub mod training;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("codebook file: {0}")]
    CodebookFormat(String),
    #[error("scenario file: {0}")]
    ScenarioFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Converts a power ratio in dB to linear scale.
#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB. Zero and negative inputs map to the
/// floor used throughout the crate for dead links.
#[inline]
pub fn linear_to_db(lin: f64) -> f64 {
    if lin > 0.0 {
        10.0 * lin.log10()
    } else {
        SNR_FLOOR_DB
    }
}

/// Reporting floor for logarithmic quantities of dead links.
pub const SNR_FLOOR_DB: f64 = -300.0;
