//! Movable-antenna (MA) near-field multiuser beamforming.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: spherical-wave channel model mapping antenna positions to
//!   complex channel vectors.
//! * [`arrays`]: MA initial layouts, fixed-position benchmark arrays,
//!   constraint validation and the geometry text format.
//! * [`digital`]: zero-forcing precoding, the min-SINR objective, its
//!   analytic APV gradient and projected gradient ascent.
//! * [`analog`]: constant-modulus analog beamforming with OFDMA power
//!   allocation and alternating optimisation of positions and phases.
//! * [`closedform`]: the min-SINR/min-SNR upper bound, certification of
//!   bound-achieving placements and hyperbola-locus constructors.
//! * [`harness`]: scenarios, user sampling, beam patterns and the Monte Carlo
//!   experiment runner.

pub mod analog;
pub mod arrays;
pub mod channel;
pub mod closedform;
pub mod digital;
pub mod error;
pub mod harness;
mod linalg;
pub mod search;
pub mod units;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Power budget and noise floor of a link, both in linear milliwatts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Link {
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    /// Total transmit power `P` (mW).
    pub power: f64,
    /// Noise power `sigma^2` (mW).
    pub noise: f64,
}

impl Link {
    pub fn new(wavelength: f64, power: f64, noise: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidInput(format!("wavelength {wavelength}")));
        }
        if !(power >= 0.0 && power.is_finite()) {
            return Err(Error::InvalidInput(format!("power {power}")));
        }
        if !(noise > 0.0 && noise.is_finite()) {
            return Err(Error::InvalidInput(format!("noise {noise}")));
        }
        Ok(Self { wavelength, power, noise })
    }

    /// Transmit SNR `P / sigma^2`.
    pub fn snr(&self) -> f64 {
        self.power / self.noise
    }
}
