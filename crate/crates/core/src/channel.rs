//! Spherical-wave near-field channel model.
//!
//! Every path of a user is anchored at a point (the user itself for the LoS
//! path, a scatterer otherwise). The response of an antenna at `t` to path
//! `l` is `exp(j 2pi/lambda ||t - s_l||)`, and the channel gain is the inner
//! product of that response vector with the user's complex path response
//! vector (PRV).

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arrays::RegionSpec;
use crate::error::{Error, Result};

/// Distances at or below this are treated as coincident points (meters).
const COINCIDENT: f64 = 1e-15;

/// A point in the BS frame: `x` horizontal and `y` vertical in the array
/// plane, `z` perpendicular to it towards the users. Meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        let dz = self.z - other.z;
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn norm(&self) -> f64 {
        self.distance(&Position3::default())
    }

    pub fn translate(&self, by: &Position3) -> Position3 {
        Position3::new(self.x + by.x, self.y + by.y, self.z + by.z)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

/// A point in the array plane (`z = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn lift(&self) -> Position3 {
        Position3::new(self.x, self.y, 0.0)
    }
}

/// Geometry and path coefficients of one user's channel.
///
/// `anchors[0]` is the user position when a LoS path exists; the remaining
/// anchors are scatterers. Without a LoS path the user is described by its
/// scatterers only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserChannel {
    anchors: Vec<Position3>,
    prv: Vec<Complex64>,
}

impl UserChannel {
    pub fn new(anchors: Vec<Position3>, prv: Vec<Complex64>) -> Result<Self> {
        if anchors.is_empty() || anchors.len() != prv.len() {
            return Err(Error::DimensionMismatch(format!(
                "user channel needs equal, non-zero anchor ({}) and coefficient ({}) counts",
                anchors.len(),
                prv.len()
            )));
        }
        if anchors.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidInput("non-finite path anchor".into()));
        }
        if prv.iter().any(|b| !(b.re.is_finite() && b.im.is_finite())) {
            return Err(Error::InvalidInput("non-finite path coefficient".into()));
        }
        Ok(Self { anchors, prv })
    }

    /// Single-path user with coefficient `b` anchored at `anchor`.
    pub fn single_path(anchor: Position3, b: Complex64) -> Result<Self> {
        Self::new(vec![anchor], vec![b])
    }

    pub fn anchors(&self) -> &[Position3] {
        &self.anchors
    }

    pub fn prv(&self) -> &[Complex64] {
        &self.prv
    }

    pub fn path_count(&self) -> usize {
        self.anchors.len()
    }

    /// `||b||_1`.
    pub fn prv_l1(&self) -> f64 {
        self.prv.iter().map(|b| b.norm()).sum()
    }

    /// Same channel with every anchor shifted by `by`.
    pub fn translated(&self, by: &Position3) -> UserChannel {
        UserChannel { anchors: self.anchors.iter().map(|a| a.translate(by)).collect(), prv: self.prv.clone() }
    }
}

/// MA array: `M` subarray centers in the array plane, each carrying the same
/// `N` element offsets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    centers: Vec<Point2>,
    offsets: Vec<Point2>,
    region: RegionSpec,
}

impl ArrayGeometry {
    /// Builds a geometry. Region and spacing constraints are not enforced
    /// here; see [`crate::arrays::validate`].
    pub fn new(centers: Vec<Point2>, offsets: Vec<Point2>, region: RegionSpec) -> Result<Self> {
        if centers.is_empty() || offsets.is_empty() {
            return Err(Error::BadShape("geometry needs at least one subarray and one element".into()));
        }
        let finite = |p: &Point2| p.x.is_finite() && p.y.is_finite();
        if !centers.iter().all(finite) || !offsets.iter().all(finite) {
            return Err(Error::InvalidInput("non-finite array coordinate".into()));
        }
        Ok(Self { centers, offsets, region })
    }

    /// Single-element subarrays at the given positions.
    pub fn from_elements(positions: Vec<Point2>, region: RegionSpec) -> Result<Self> {
        Self::new(positions, vec![Point2::default()], region)
    }

    pub fn centers(&self) -> &[Point2] {
        &self.centers
    }

    pub fn offsets(&self) -> &[Point2] {
        &self.offsets
    }

    pub fn region(&self) -> &RegionSpec {
        &self.region
    }

    /// Number of subarrays `M`.
    pub fn subarrays(&self) -> usize {
        self.centers.len()
    }

    /// Elements per subarray `N`.
    pub fn elements_per_subarray(&self) -> usize {
        self.offsets.len()
    }

    /// Total element count `MN`.
    pub fn element_count(&self) -> usize {
        self.centers.len() * self.offsets.len()
    }

    /// Antenna position vector `[x_1, y_1, ..., x_M, y_M]`.
    pub fn apv(&self) -> Vec<f64> {
        self.centers.iter().flat_map(|c| [c.x, c.y]).collect()
    }

    /// Copy of this geometry with the centers replaced by `apv`.
    pub fn with_apv(&self, apv: &[f64]) -> Result<ArrayGeometry> {
        if apv.len() != 2 * self.centers.len() {
            return Err(Error::DimensionMismatch(format!(
                "APV has {} entries, expected {}",
                apv.len(),
                2 * self.centers.len()
            )));
        }
        let centers = apv.chunks_exact(2).map(|c| Point2::new(c[0], c[1])).collect();
        ArrayGeometry::new(centers, self.offsets.clone(), self.region)
    }

    pub fn with_region(mut self, region: RegionSpec) -> ArrayGeometry {
        self.region = region;
        self
    }

    /// Subarray-relabelled copy: new subarray `i` is old subarray `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> ArrayGeometry {
        ArrayGeometry {
            centers: perm.iter().map(|&i| self.centers[i]).collect(),
            offsets: self.offsets.clone(),
            region: self.region,
        }
    }
}

/// Element positions `t_{m,n} = t_m + q_n`, subarray-major.
pub fn element_positions(geom: &ArrayGeometry) -> Vec<Position3> {
    geom.centers
        .iter()
        .flat_map(|c| geom.offsets.iter().map(move |q| Position3::new(c.x + q.x, c.y + q.y, 0.0)))
        .collect()
}

pub(crate) fn wavenumber(wavelength: f64) -> f64 {
    2.0 * PI / wavelength
}

fn checked_distance(pos: &Position3, anchor: &Position3, index: usize) -> Result<f64> {
    let d = pos.distance(anchor);
    if d <= COINCIDENT {
        return Err(Error::ZeroDistance { anchor: index, distance: d });
    }
    Ok(d)
}

/// Near-field response vector of `user` seen from `pos`.
pub fn nfrv(pos: &Position3, user: &UserChannel, wavelength: f64) -> Result<Vec<Complex64>> {
    let k = wavenumber(wavelength);
    user.anchors
        .iter()
        .enumerate()
        .map(|(l, s)| Ok(Complex64::from_polar(1.0, k * checked_distance(pos, s, l)?)))
        .collect()
}

/// Channel gain `g(pos)^H b` from one antenna position.
pub fn channel_gain(pos: &Position3, user: &UserChannel, wavelength: f64) -> Result<Complex64> {
    let k = wavenumber(wavelength);
    let mut acc = Complex64::new(0.0, 0.0);
    for (l, (s, b)) in user.anchors.iter().zip(&user.prv).enumerate() {
        let d = checked_distance(pos, s, l)?;
        acc += Complex64::from_polar(1.0, -k * d) * b;
    }
    Ok(acc)
}

/// Channel vector `h_k = G_k^H b_k` over all `MN` elements.
pub fn channel_vector(
    geom: &ArrayGeometry,
    user: &UserChannel,
    wavelength: f64,
) -> Result<DVector<Complex64>> {
    let gains = element_positions(geom)
        .iter()
        .map(|p| channel_gain(p, user, wavelength))
        .collect::<Result<Vec<_>>>()?;
    Ok(DVector::from_vec(gains))
}

/// Channel matrix `H = [h_1, ..., h_K]` of size `MN x K`.
pub fn channel_matrix(
    geom: &ArrayGeometry,
    users: &[UserChannel],
    wavelength: f64,
) -> Result<DMatrix<Complex64>> {
    if users.is_empty() {
        return Err(Error::DimensionMismatch("at least one user required".into()));
    }
    let mut h = DMatrix::zeros(geom.element_count(), users.len());
    for (k, user) in users.iter().enumerate() {
        h.set_column(k, &channel_vector(geom, user, wavelength)?);
    }
    Ok(h)
}

/// Per-element channel terms and their derivatives w.r.t. the element's
/// in-plane coordinates: for element `e` and user `k`,
/// `value = h_k[e]`, `dx = d h_k[e] / d x`, `dy = d h_k[e] / d y`.
///
/// Moving subarray `m` by `dx` moves all of its elements by `dx`, so the
/// derivative of `h_k` w.r.t. `x_m` is `dx` restricted to subarray `m`.
pub(crate) struct ChannelJacobian {
    pub value: DMatrix<Complex64>,
    pub dx: DMatrix<Complex64>,
    pub dy: DMatrix<Complex64>,
}

pub(crate) fn channel_jacobian(
    geom: &ArrayGeometry,
    users: &[UserChannel],
    wavelength: f64,
) -> Result<ChannelJacobian> {
    let k_wave = wavenumber(wavelength);
    let elems = element_positions(geom);
    let shape = (elems.len(), users.len());
    let mut value = DMatrix::zeros(shape.0, shape.1);
    let mut dx = DMatrix::zeros(shape.0, shape.1);
    let mut dy = DMatrix::zeros(shape.0, shape.1);
    let minus_jk = Complex64::new(0.0, -k_wave);
    for (k, user) in users.iter().enumerate() {
        for (e, t) in elems.iter().enumerate() {
            let mut v = Complex64::new(0.0, 0.0);
            let mut gx = Complex64::new(0.0, 0.0);
            let mut gy = Complex64::new(0.0, 0.0);
            for (l, (s, b)) in user.anchors.iter().zip(&user.prv).enumerate() {
                let d = checked_distance(t, s, l)?;
                let term = Complex64::from_polar(1.0, -k_wave * d) * b;
                v += term;
                // d/dx exp(-j k d) = -j k (x - s_x)/d exp(-j k d)
                let dterm = term * minus_jk;
                gx += dterm * ((t.x - s.x) / d);
                gy += dterm * ((t.y - s.y) / d);
            }
            value[(e, k)] = v;
            dx[(e, k)] = gx;
            dy[(e, k)] = gy;
        }
    }
    Ok(ChannelJacobian { value, dx, dy })
}
