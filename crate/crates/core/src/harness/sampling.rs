//! Random user placement and channel coefficients.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{Position3, UserChannel};
use crate::error::{Error, Result};
use crate::Complex64;

use super::config::Scenario;

/// Horizontal user distributions on the ground plane. `x` runs along the
/// array, `z` is the distance in front of it.
#[derive(Debug, Clone, PartialEq)]
pub enum UserDistribution {
    /// Uniform angle over the front half plane, uniform area in radius.
    Annulus { r_min: f64, r_max: f64 },
    /// Uniform over disks centered at `(x, z)`; users split evenly, the
    /// remainder going to the first disks.
    Hotspots { centers: Vec<(f64, f64)>, radius: f64 },
}

impl UserDistribution {
    pub fn check(&self) -> Result<()> {
        match self {
            UserDistribution::Annulus { r_min, r_max } => {
                if !(*r_min >= 0.0 && r_min <= r_max && r_max.is_finite() && *r_max > 0.0) {
                    return Err(Error::BadDistributionParams(format!(
                        "annulus radii must satisfy 0 <= r_min <= r_max, got [{r_min}, {r_max}]"
                    )));
                }
            }
            UserDistribution::Hotspots { centers, radius } => {
                if centers.is_empty() {
                    return Err(Error::BadDistributionParams("no hotspot centers".into()));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::BadDistributionParams(format!("hotspot radius {radius}")));
                }
                if centers.iter().any(|(x, z)| !x.is_finite() || !z.is_finite()) {
                    return Err(Error::BadDistributionParams("non-finite hotspot center".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether the horizontal point `(x, z)` lies in the support.
    pub fn contains(&self, x: f64, z: f64) -> bool {
        const SLACK: f64 = 1e-9;
        match self {
            UserDistribution::Annulus { r_min, r_max } => {
                let r = x.hypot(z);
                z >= -SLACK && r >= r_min - SLACK && r <= r_max + SLACK
            }
            UserDistribution::Hotspots { centers, radius } => {
                centers.iter().any(|(cx, cz)| (x - cx).hypot(z - cz) <= radius + SLACK)
            }
        }
    }

    fn sample(&self, users: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
        match self {
            UserDistribution::Annulus { r_min, r_max } => {
                (0..users).map(|_| annulus_point(*r_min, *r_max, rng)).collect()
            }
            UserDistribution::Hotspots { centers, radius } => {
                let base = users / centers.len();
                let extra = users % centers.len();
                centers
                    .iter()
                    .enumerate()
                    .flat_map(|(i, c)| std::iter::repeat_n(*c, base + usize::from(i < extra)))
                    .map(|(cx, cz)| {
                        let r = radius * rng.random::<f64>().sqrt();
                        let theta = 2.0 * PI * rng.random::<f64>();
                        (cx + r * theta.cos(), cz + r * theta.sin())
                    })
                    .collect()
            }
        }
    }
}

fn annulus_point(r_min: f64, r_max: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let theta = PI * rng.random::<f64>();
    let r2 = r_min * r_min + (r_max * r_max - r_min * r_min) * rng.random::<f64>();
    let r = r2.sqrt();
    (r * theta.cos(), r * theta.sin())
}

/// Free-space LoS amplitude `lambda / (4 pi d)`.
pub fn los_amplitude(wavelength: f64, distance: f64) -> f64 {
    wavelength / (4.0 * PI * distance)
}

/// Horizontal range of NLoS scatterers (meters).
const SCATTERER_RANGE: (f64, f64) = (2.0, 50.0);

/// Generator for Monte Carlo stream `stream` of an experiment seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Streams reserved for the realizations of the statistical schemes,
/// disjoint from the per-trial streams `0..trials`.
pub const STATISTICAL_STREAM_BASE: u64 = 1 << 40;

/// Draws `scenario.users` users: ground positions from the configured
/// distribution, LoS amplitude from free-space loss with a uniform phase,
/// and `scenario.nlos` scatterer paths per user.
///
/// Scatterers lie at a uniform-area horizontal point of the front half
/// plane between 2 m and 50 m, at a height uniform between the ground and
/// the array; their amplitude is `nlos_relative_amplitude` times the LoS
/// amplitude with a uniform phase.
pub fn sample_users(scenario: &Scenario, rng: &mut ChaCha8Rng) -> Result<Vec<UserChannel>> {
    scenario.distribution.check()?;
    let h = scenario.bs_height;
    let points = scenario.distribution.sample(scenario.users, rng);
    points
        .into_iter()
        .map(|(x, z)| {
            let los = Position3::new(x, -h, z);
            let amp = los_amplitude(scenario.wavelength, los.norm());
            let mut anchors = vec![los];
            let mut prv = vec![Complex64::from_polar(amp, 2.0 * PI * rng.random::<f64>())];
            for _ in 0..scenario.nlos {
                let (sx, sz) = annulus_point(SCATTERER_RANGE.0, SCATTERER_RANGE.1, rng);
                let sy = -h * rng.random::<f64>();
                anchors.push(Position3::new(sx, sy, sz));
                prv.push(Complex64::from_polar(
                    scenario.nlos_relative_amplitude * amp,
                    2.0 * PI * rng.random::<f64>(),
                ));
            }
            UserChannel::new(anchors, prv)
        })
        .collect()
}
