//! Two-user scenes for the closed-form placement constructors.

use std::f64::consts::PI;

use serde::Deserialize;

use super::experiment::Architecture;
use crate::arrays::{write_geometry, RegionSpec};
use crate::channel::{ArrayGeometry, Position3, UserChannel};
use crate::closedform::{
    check_analog_condition, check_digital_condition, construct_analog_apv, construct_digital_apv,
    Certification,
};
use crate::error::{Error, Result};
use crate::Complex64;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    wavelength: f64,
    subarrays: usize,
    region_side: Option<f64>,
    region_side_wavelengths: Option<f64>,
    d_min: Option<f64>,
    architecture: String,
    users: Vec<RawSceneUser>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSceneUser {
    position: [f64; 3],
    /// `[re, im]`; free-space LoS amplitude with zero phase when absent.
    b: Option<[f64; 2]>,
}

/// Input of the `construct-apv` command.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub wavelength: f64,
    pub subarrays: usize,
    pub region: RegionSpec,
    pub architecture: Architecture,
    pub users: Vec<UserChannel>,
}

impl Scene {
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawScene = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let wl = raw.wavelength;
        if !(wl > 0.0 && wl.is_finite()) {
            return Err(Error::Config(format!("wavelength {wl}")));
        }
        let side = match (raw.region_side, raw.region_side_wavelengths) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give region_side or region_side_wavelengths, not both".into()))
            }
            (Some(s), None) => s,
            (None, Some(w)) => w * wl,
            (None, None) => 100.0 * wl,
        };
        let region = RegionSpec::new(side, raw.d_min.unwrap_or(wl / 2.0))?;
        let architecture = raw.architecture.parse()?;
        let users = raw
            .users
            .iter()
            .map(|u| {
                let anchor = Position3::new(u.position[0], u.position[1], u.position[2]);
                let b = match u.b {
                    Some([re, im]) => Complex64::new(re, im),
                    None => Complex64::new(wl / (4.0 * PI * anchor.norm()), 0.0),
                };
                UserChannel::single_path(anchor, b)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Scene { wavelength: wl, subarrays: raw.subarrays, region, architecture, users })
    }

    /// Builds the bound-achieving geometry and certifies it.
    pub fn construct(&self) -> Result<(ArrayGeometry, Certification)> {
        let (m, wl) = (self.subarrays, self.wavelength);
        match self.architecture {
            Architecture::Digital => {
                let geom = construct_digital_apv(&self.users, m, self.region, wl)?;
                let cert = check_digital_condition(&geom, &self.users, wl)?;
                Ok((geom, cert))
            }
            Architecture::Analog => {
                let geom = construct_analog_apv(&self.users, m, self.region, wl)?;
                let cert = check_analog_condition(&geom, &self.users, wl)?;
                Ok((geom, cert))
            }
        }
    }
}

/// Geometry text followed by the certification JSON.
pub fn construction_report(geom: &ArrayGeometry, cert: &Certification) -> String {
    format!("{}{}\n", write_geometry(geom), cert.to_json())
}
