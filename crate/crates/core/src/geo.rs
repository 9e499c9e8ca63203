//! Miller cylindrical projection onto a planar meter grid, plus the
//! Manhattan metric used for every drive and walk leg.
//!
//! The projection uses the constants `1.25`, `0.4` and `2.3` together with the
//! circumference `L = 6381372 * 2π`. Note that `y` decreases as latitude grows
//! (the northing is subtracted from `L / 4`). Distances only ever use absolute
//! differences, so the orientation does not matter downstream.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use crate::error::{Error, Result};

/// Radius used for the projected circumference, in meters.
pub const PROJECTION_RADIUS_M: f64 = 6381372.0;

/// Projected circumference `L`.
pub const CIRCUMFERENCE_M: f64 = PROJECTION_RADIUS_M * PI * 2.0;

/// Geographic position in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoCoord {
    lat: f64,
    lon: f64,
}

impl GeoCoord {
    /// `lat` must lie strictly inside `(-π/2, π/2)` and `lon` in `[-π, π)`.
    pub fn new(lat: f64, lon: f64) -> Result<Self> {
        if !lat.is_finite() || lat.abs() >= FRAC_PI_2 {
            return Err(Error::Domain(format!(
                "latitude {lat} rad is outside the open interval (-pi/2, pi/2)"
            )));
        }
        if !lon.is_finite() || !(-PI..PI).contains(&lon) {
            return Err(Error::Domain(format!(
                "longitude {lon} rad is outside [-pi, pi)"
            )));
        }
        Ok(Self { lat, lon })
    }

    pub fn from_degrees(lat_deg: f64, lon_deg: f64) -> Result<Self> {
        Self::new(lat_deg.to_radians(), lon_deg.to_radians())
    }

    pub fn lat(&self) -> f64 {
        self.lat
    }

    pub fn lon(&self) -> f64 {
        self.lon
    }
}

/// Position on the projected plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PlanarCoord {
    pub x: f64,
    pub y: f64,
}

impl PlanarCoord {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

pub fn miller_project(g: GeoCoord) -> PlanarCoord {
    let x_unit = g.lon;
    let y_unit = 1.25 * (FRAC_PI_4 + 0.4 * g.lat).tan().ln();
    let l = CIRCUMFERENCE_M;
    PlanarCoord {
        x: l / 2.0 + l / (2.0 * PI) * x_unit,
        y: l / 4.0 - l / (4.0 * 2.3) * y_unit,
    }
}

/// Inverse of [`miller_project`].
pub fn miller_unproject(p: PlanarCoord) -> Result<GeoCoord> {
    if !p.x.is_finite() || !p.y.is_finite() {
        return Err(Error::Domain(format!("non-finite planar point {p:?}")));
    }
    let l = CIRCUMFERENCE_M;
    let x_unit = (p.x - l / 2.0) * (2.0 * PI) / l;
    let y_unit = (l / 4.0 - p.y) * (4.0 * 2.3) / l;
    let lat = 2.5 * ((0.8 * y_unit).exp().atan() - FRAC_PI_4);
    GeoCoord::new(lat, x_unit).map_err(|e| match e {
        Error::Domain(msg) => Error::Domain(format!("point {p:?} is not invertible: {msg}")),
        other => other,
    })
}

pub fn manhattan_distance(a: PlanarCoord, b: PlanarCoord) -> f64 {
    (a.x - b.x).abs() + (a.y - b.y).abs()
}

/// Seconds needed to cover `distance` meters at `speed` m/s.
pub fn travel_time(distance: f64, speed: f64) -> Result<f64> {
    if !(speed.is_finite() && speed > 0.0) {
        return Err(Error::Domain(format!(
            "speed must be positive, got {speed}"
        )));
    }
    if distance.is_nan() || distance < 0.0 {
        return Err(Error::Domain(format!(
            "distance must be nonnegative, got {distance}"
        )));
    }
    Ok(distance / speed)
}
