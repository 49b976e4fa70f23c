//! Beamforming gain over a horizontal grid of ground points.

use nalgebra::DVector;
use serde::Deserialize;

use crate::channel::{element_positions, wavenumber, ArrayGeometry, Position3};
use crate::error::{Error, Result};
use crate::units::to_db;
use crate::Complex64;

/// Grid description, also the on-disk TOML format of the `beampattern`
/// command.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamGridSpec {
    /// Focus point `[x, y, z]` the beamformer is matched to.
    pub focus: [f64; 3],
    pub x_range: [f64; 2],
    pub z_range: [f64; 2],
    /// Points along x and along z.
    pub resolution: [usize; 2],
    /// Height `y` of the evaluation plane; the focus height by default.
    pub height: Option<f64>,
    pub wavelength: f64,
}

impl BeamGridSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let spec: BeamGridSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.resolution.contains(&0) {
            return Err(Error::InvalidInput("grid resolution must be at least 1 x 1".into()));
        }
        if !(self.wavelength > 0.0 && self.wavelength.is_finite()) {
            return Err(Error::InvalidInput(format!("wavelength {}", self.wavelength)));
        }
        let finite = self.focus.iter().chain(&self.x_range).chain(&self.z_range).all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidInput("non-finite grid coordinate".into()));
        }
        Ok(())
    }

    pub fn focus_point(&self) -> Position3 {
        Position3::new(self.focus[0], self.focus[1], self.focus[2])
    }
}

fn linspace(range: [f64; 2], n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![range[0]];
    }
    (0..n).map(|i| range[0] + (range[1] - range[0]) * i as f64 / (n - 1) as f64).collect()
}

/// Evaluated beam pattern. Gains are linear, stored z-major (one row per
/// z value); points coinciding with an element hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamGrid {
    pub focus: Position3,
    pub height: f64,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub gains: Vec<f64>,
}

impl BeamGrid {
    pub fn gain(&self, ix: usize, iz: usize) -> f64 {
        self.gains[iz * self.x.len() + ix]
    }

    /// CSV with header `x,z,gain_db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,z,gain_db\n");
        for (iz, z) in self.z.iter().enumerate() {
            for (ix, x) in self.x.iter().enumerate() {
                out.push_str(&format!("{x},{z},{:.6}\n", to_db(self.gain(ix, iz))));
            }
        }
        out
    }
}

/// Near-field array response at `point`: entries `exp(j 2pi/lambda ||t_e - s||)`
/// over all elements, or `None` if the point coincides with an element.
pub fn array_response(
    geom: &ArrayGeometry,
    point: &Position3,
    wavelength: f64,
) -> Option<DVector<Complex64>> {
    let k = wavenumber(wavelength);
    let elems = element_positions(geom);
    let mut out = DVector::zeros(elems.len());
    for (e, t) in elems.iter().enumerate() {
        let d = t.distance(point);
        if d <= 1e-15 {
            return None;
        }
        out[e] = Complex64::from_polar(1.0, k * d);
    }
    Some(out)
}

/// Constant-modulus beamformer `a(focus) / sqrt(MN)` matched to a point.
pub fn focused_weights(
    geom: &ArrayGeometry,
    focus: &Position3,
    wavelength: f64,
) -> Result<DVector<Complex64>> {
    let a =
        array_response(geom, focus, wavelength).ok_or(Error::ZeroDistance { anchor: 0, distance: 0.0 })?;
    Ok(a / Complex64::from((geom.element_count() as f64).sqrt()))
}

/// Gain `|a(s)^H w|^2` over the grid.
pub fn beam_pattern(geom: &ArrayGeometry, w: &DVector<Complex64>, spec: &BeamGridSpec) -> Result<BeamGrid> {
    spec.check()?;
    if w.len() != geom.element_count() {
        return Err(Error::DimensionMismatch(format!(
            "beamformer has {} entries, array has {} elements",
            w.len(),
            geom.element_count()
        )));
    }
    let focus = spec.focus_point();
    let height = spec.height.unwrap_or(focus.y);
    let x = linspace(spec.x_range, spec.resolution[0]);
    let z = linspace(spec.z_range, spec.resolution[1]);
    let mut gains = Vec::with_capacity(x.len() * z.len());
    for zi in &z {
        for xi in &x {
            let p = Position3::new(*xi, height, *zi);
            gains.push(match array_response(geom, &p, spec.wavelength) {
                Some(a) => a.dotc(w).norm_sqr(),
                None => f64::NAN,
            });
        }
    }
    Ok(BeamGrid { focus, height, x, z, gains })
}
