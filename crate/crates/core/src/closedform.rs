//! Closed-form performance bound and bound-achieving placements.
//!
//! For single-path users and single-element subarrays the channel of user
//! `k` at subarray `m` is `b_k exp(-j 2pi/lambda ||t_m - s_k||)`, so inner
//! products between users depend only on the path-length differences
//! `||t_m - s_k|| - ||t_m - s_khat||`. Each difference splits into an
//! integer number of wavelengths plus a fractional part; the fractional
//! parts decide whether channels are orthogonal (digital) or fully
//! correlated (analog). Points sharing a path-length difference lie on a
//! hyperbola with foci at the two users.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::arrays::{RegionSpec, GEOMETRY_SLACK};
use crate::channel::{channel_vector, ArrayGeometry, Point2, Position3, UserChannel};
use crate::error::{Error, Result};
use crate::Link;

/// `delta = lambda (n + phi)` with `n` integer and `phi` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathDiffDecomposition {
    pub delta: f64,
    pub n: i64,
    pub phi: f64,
}

/// Splits a path-length difference into whole and fractional wavelengths.
pub fn decompose(delta: f64, wavelength: f64) -> PathDiffDecomposition {
    let r = delta / wavelength;
    let mut n = r.floor();
    let mut phi = r - n;
    if phi >= 1.0 {
        n += 1.0;
        phi = 0.0;
    }
    PathDiffDecomposition { delta, n: n as i64, phi }
}

/// Upper bound on the minimum SINR/SNR and the power split attaining it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bound {
    /// `(P / sigma^2) (sum_k 1 / (MN ||b_k||_1^2))^-1`, linear.
    pub value: f64,
    /// Per-user powers equalising the per-user bounds; they sum to `P`.
    pub powers: Vec<f64>,
}

/// Shared bound of both architectures: every user at its maximal channel
/// gain `MN ||b_k||_1^2` with power split so that all reach the same value.
pub fn upper_bound(users: &[UserChannel], m: usize, n: usize, link: &Link) -> Result<Bound> {
    if users.is_empty() {
        return Err(Error::DimensionMismatch("at least one user required".into()));
    }
    let mn = (m * n) as f64;
    let gains: Vec<f64> = users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            let l1 = u.prv_l1();
            if l1 > 0.0 {
                Ok(mn * l1 * l1)
            } else {
                Err(Error::ZeroChannel { user: k })
            }
        })
        .collect::<Result<_>>()?;
    let inv_sum: f64 = gains.iter().map(|g| 1.0 / g).sum();
    let value = link.snr() / inv_sum;
    let powers = gains.iter().map(|g| link.power / (g * inv_sum)).collect();
    Ok(Bound { value, powers })
}

/// Residual of one user pair in a certification report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairResidual {
    pub k: usize,
    pub k_hat: usize,
    /// Digital: `|sum_m exp(j 2pi phi_m)|`. Analog: `1 - correlation`.
    pub residual: f64,
    /// `|h_k^H h_khat| / (||h_k|| ||h_khat||)`.
    pub correlation: f64,
    /// Fractional parts of the path-length differences, one per subarray.
    pub fractions: Vec<f64>,
}

/// Outcome of a bound-achievement check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub pass: bool,
    pub tolerance: f64,
    pub pairs: Vec<PairResidual>,
}

impl Certification {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certification serialises")
    }
}

fn single_path_anchors(geom: &ArrayGeometry, users: &[UserChannel]) -> Result<Vec<Position3>> {
    if geom.elements_per_subarray() != 1 {
        return Err(Error::Unsupported("bound certification requires single-element subarrays".into()));
    }
    users
        .iter()
        .enumerate()
        .map(|(k, u)| {
            if u.path_count() == 1 {
                Ok(u.anchors()[0])
            } else {
                Err(Error::Unsupported(format!(
                    "user {k} has {} paths; certification requires single-path users",
                    u.path_count()
                )))
            }
        })
        .collect()
}

fn fractions(geom: &ArrayGeometry, a: &Position3, b: &Position3, wavelength: f64) -> Vec<f64> {
    geom.centers()
        .iter()
        .map(|c| {
            let t = c.lift();
            decompose(t.distance(a) - t.distance(b), wavelength).phi
        })
        .collect()
}

fn correlation(hk: &nalgebra::DVector<Complex64>, hj: &nalgebra::DVector<Complex64>) -> f64 {
    hk.dotc(hj).norm() / (hk.norm() * hj.norm())
}

/// Default tolerance factor of the digital check (scaled by `M`).
pub const DIGITAL_TOL: f64 = 1e-8;
/// Default tolerance of the analog check.
pub const ANALOG_TOL: f64 = 1e-10;

/// Checks the orthogonality condition for every unordered user pair:
/// `|sum_m exp(j 2pi phi_{k,khat,m})| <= 1e-8 M`.
pub fn check_digital_condition(
    geom: &ArrayGeometry,
    users: &[UserChannel],
    wavelength: f64,
) -> Result<Certification> {
    let anchors = single_path_anchors(geom, users)?;
    let h: Vec<_> = users.iter().map(|u| channel_vector(geom, u, wavelength)).collect::<Result<_>>()?;
    let tolerance = DIGITAL_TOL * geom.subarrays() as f64;
    let mut pairs = Vec::new();
    for k in 0..users.len() {
        for k_hat in k + 1..users.len() {
            let fr = fractions(geom, &anchors[k], &anchors[k_hat], wavelength);
            let residual =
                fr.iter().map(|p| Complex64::from_polar(1.0, 2.0 * PI * p)).sum::<Complex64>().norm();
            pairs.push(PairResidual {
                k,
                k_hat,
                residual,
                correlation: correlation(&h[k], &h[k_hat]),
                fractions: fr,
            });
        }
    }
    let pass = pairs.iter().all(|p| p.residual <= tolerance);
    Ok(Certification { pass, tolerance, pairs })
}

/// Checks full correlation of every user with user 1:
/// `|h_k^H h_1| / (||h_k|| ||h_1||) >= 1 - 1e-10`.
pub fn check_analog_condition(
    geom: &ArrayGeometry,
    users: &[UserChannel],
    wavelength: f64,
) -> Result<Certification> {
    let anchors = single_path_anchors(geom, users)?;
    let h: Vec<_> = users.iter().map(|u| channel_vector(geom, u, wavelength)).collect::<Result<_>>()?;
    let mut pairs = Vec::new();
    for k in 1..users.len() {
        let corr = correlation(&h[k], &h[0]);
        pairs.push(PairResidual {
            k: 0,
            k_hat: k,
            residual: 1.0 - corr,
            correlation: corr,
            fractions: fractions(geom, &anchors[0], &anchors[k], wavelength),
        });
    }
    let pass = pairs.iter().all(|p| p.correlation >= 1.0 - ANALOG_TOL);
    Ok(Certification { pass, tolerance: ANALOG_TOL, pairs })
}

/// Rays cast from the region center when searching for hyperbola points.
const RAYS: usize = 360;
/// Samples per ray used to bracket crossings before bisection.
const RAY_SAMPLES: usize = 256;

/// Normalised path-length difference `(||p - s1|| - ||p - s2||) / lambda`
/// over the array plane.
struct PathDifference {
    s1: Position3,
    s2: Position3,
    wavelength: f64,
}

impl PathDifference {
    fn at(&self, p: &Point2) -> f64 {
        let t = p.lift();
        (t.distance(&self.s1) - t.distance(&self.s2)) / self.wavelength
    }

    /// Points of the region where the fractional part of the normalised
    /// difference equals `frac`, enumerated ray by ray from the center.
    fn crossings<'a>(&'a self, region: &RegionSpec, frac: f64) -> impl Iterator<Item = Point2> + 'a {
        let half = region.half();
        (0..RAYS).flat_map(move |i| {
            let theta = 2.0 * PI * i as f64 / RAYS as f64;
            let (s, c) = theta.sin_cos();
            let r_max = half / c.abs().max(s.abs());
            let at = move |r: f64| Point2::new(r * c, r * s);
            (0..RAY_SAMPLES).flat_map(move |j| {
                let ra = r_max * j as f64 / RAY_SAMPLES as f64;
                let rb = r_max * (j + 1) as f64 / RAY_SAMPLES as f64;
                let (fa, fb) = (self.at(&at(ra)), self.at(&at(rb)));
                let (lo, hi) = (fa.min(fb), fa.max(fb));
                let first = (lo - frac).ceil() as i64;
                let last = (hi - frac).floor() as i64;
                (first..=last).map(move |n| {
                    let target = n as f64 + frac;
                    at(self.bisect(&at, ra, rb, fa, target))
                })
            })
        })
    }

    fn bisect(&self, at: &impl Fn(f64) -> Point2, mut a: f64, mut b: f64, fa: f64, target: f64) -> f64 {
        let mut ga = fa - target;
        if ga == 0.0 {
            return a;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            let gm = self.at(&at(mid)) - target;
            if gm == 0.0 {
                return mid;
            }
            if (gm < 0.0) == (ga < 0.0) {
                a = mid;
                ga = gm;
            } else {
                b = mid;
            }
        }
        if (self.at(&at(a)) - target).abs() <= (self.at(&at(b)) - target).abs() {
            a
        } else {
            b
        }
    }
}

/// Smallest separation accepted between constructed subarrays even when
/// `d_min = 0` (coincident subarrays are not a placement).
const MIN_SEPARATION: f64 = 1e-9;

fn place_greedily(targets: &[f64], diff: &PathDifference, region: &RegionSpec) -> Result<Vec<Point2>> {
    let d_min = region.d_min.max(MIN_SEPARATION);
    let mut chosen: Vec<Point2> = Vec::with_capacity(targets.len());
    for (m, &frac) in targets.iter().enumerate() {
        let pick = diff
            .crossings(region, frac)
            .find(|p| region.contains(p) && chosen.iter().all(|c| c.distance(p) + GEOMETRY_SLACK >= d_min));
        match pick {
            Some(p) => chosen.push(p),
            None => {
                return Err(Error::Infeasible(format!(
                    "no point of the region with fractional path difference {frac:.6} \
                     respects the spacing to the {m} subarrays already placed"
                )))
            }
        }
    }
    Ok(chosen)
}

fn two_single_path_users(users: &[UserChannel]) -> Result<(Position3, Position3)> {
    if users.len() != 2 {
        return Err(Error::Unsupported(format!(
            "placement construction handles exactly two users, got {}",
            users.len()
        )));
    }
    if users.iter().any(|u| u.path_count() != 1) {
        return Err(Error::Unsupported("placement construction needs single-path users".into()));
    }
    Ok((users[0].anchors()[0], users[1].anchors()[0]))
}

/// Places `m` single-element subarrays so that the two users' channels are
/// orthogonal: subarray `i` (1-based) sits where the fractional path
/// difference equals `i / m`, so the unit phasors sum to zero.
pub fn construct_digital_apv(
    users: &[UserChannel],
    m: usize,
    region: RegionSpec,
    wavelength: f64,
) -> Result<ArrayGeometry> {
    let (s1, s2) = two_single_path_users(users)?;
    if m < 2 {
        return Err(Error::Infeasible("orthogonality needs at least two subarrays".into()));
    }
    let diff = PathDifference { s1, s2, wavelength };
    let targets: Vec<f64> = (1..=m).map(|i| (i % m) as f64 / m as f64).collect();
    let centers = place_greedily(&targets, &diff, &region)?;
    ArrayGeometry::from_elements(centers, region)
}

/// Places `m` single-element subarrays on hyperbolas sharing one fractional
/// path difference (integer parts free), making the two users' channels
/// fully correlated. The shared fraction is the one at the region center.
pub fn construct_analog_apv(
    users: &[UserChannel],
    m: usize,
    region: RegionSpec,
    wavelength: f64,
) -> Result<ArrayGeometry> {
    let (s1, s2) = two_single_path_users(users)?;
    if m == 0 {
        return Err(Error::BadShape("at least one subarray required".into()));
    }
    let diff = PathDifference { s1, s2, wavelength };
    let center = diff.at(&Point2::default());
    let frac = center - center.floor();
    let frac = if frac >= 1.0 { 0.0 } else { frac };
    let centers = place_greedily(&vec![frac; m], &diff, &region)?;
    ArrayGeometry::from_elements(centers, region)
}
