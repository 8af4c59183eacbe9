//! Core library for link-level design and analysis of beam-pattern-modulated
//! integrated sensing and communication (ISAC) over hybrid mmWave arrays.
//!
//! The transmitter multiplexes `K` communication beams carrying an
//! index-modulated symbol stream with `W` time-shared sensing beams, all
//! drawn from a DFT codebook on half-wavelength uniform linear arrays. The
//! modules mirror the processing chain:
//!
//! - [`beamspace`]: steering vectors, DFT codebooks, random multipath channels
//! - [`modem`]: index-modulation mapping, constellations, ML detection
//! - [`precoding`]: sensing precoder, two-stage beam selection, LMMSE combining
//! - [`allocation`]: alternating power allocation under a communication MSE budget
//! - [`apep`]: effective-path combinatorics and analytic pairwise error rates
//! - [`oracle`]: independent reference solvers used only for validation
//!
//! All numeric code is generic over the [`Real`] scalar (`f32` or `f64`); the
//! aliases below fix the double-precision instantiation used by the
//! simulation harness.

pub mod allocation;
pub mod apep;
pub mod beamspace;
pub mod error;
pub mod linalg;
pub mod modem;
pub mod oracle;
pub mod precoding;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::{complex_normal, lit, Real};

/// Default scalar type for simulations.
pub type Scalar = f64;
/// Complex sample at default precision.
pub type C64 = num_complex::Complex<f64>;
/// Dense complex matrix at default precision.
pub type CMat64 = linalg::CMat<f64>;
/// Channel realization at default precision.
pub type Channel64 = beamspace::ChannelRealization<f64>;
/// Beam codebook at default precision.
pub type Codebook64 = beamspace::Codebook<f64>;
