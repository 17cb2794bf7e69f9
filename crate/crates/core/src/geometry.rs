//! Fan-beam parameterization of the unit circle bundle of the disk.
//!
//! A boundary point `(beta, alpha)` is the unit vector based at `e^{i beta}` with
//! direction angle `theta = beta + pi + alpha`. Influx points have `|alpha| < pi/2`.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Reduces an angle to `[0, 2pi)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    // rem_euclid may round up to TAU for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces an angle to `(-pi, pi]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_2pi(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance between two angles on the circle, in `[0, pi]`.
pub fn angle_distance(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub beta: f64,
    pub alpha: f64,
}

impl BoundaryPoint {
    pub fn new(beta: f64, alpha: f64) -> Self {
        Self { beta, alpha }
    }

    pub fn is_influx(&self) -> bool {
        wrap_pi(self.alpha).cos() > 0.0
    }

    /// Both angles reduced to `[0, 2pi)`.
    pub fn canonical(&self) -> Self {
        Self::new(wrap_2pi(self.beta), wrap_2pi(self.alpha))
    }

    /// Largest angular discrepancy between two points, mod 2pi.
    pub fn distance(&self, other: &Self) -> f64 {
        angle_distance(self.beta, other.beta).max(angle_distance(self.alpha, other.alpha))
    }
}

/// Scattering relation `S(beta, alpha) = (beta + pi + 2 alpha, pi - alpha)`.
pub fn scattering(beta: f64, alpha: f64) -> BoundaryPoint {
    BoundaryPoint::new(wrap_2pi(beta + PI + 2.0 * alpha), wrap_2pi(PI - alpha))
}

/// `S_A(beta, alpha) = (beta + pi + 2 alpha, -alpha)`, defined on influx points.
pub fn antipodal_scattering(beta: f64, alpha: f64) -> Result<BoundaryPoint> {
    if !(alpha.abs() < FRAC_PI_2) {
        return Err(Error::OutOfRange(format!(
            "antipodal scattering needs |alpha| < pi/2, got {alpha}"
        )));
    }
    Ok(BoundaryPoint::new(
        wrap_2pi(beta + PI + 2.0 * alpha),
        -alpha,
    ))
}

/// An influx chord of the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Chord {
    beta: f64,
    alpha: f64,
}

impl Chord {
    pub fn new(beta: f64, alpha: f64) -> Result<Self> {
        if !(alpha.abs() < FRAC_PI_2) {
            return Err(Error::OutOfRange(format!(
                "chord needs |alpha| < pi/2, got {alpha}"
            )));
        }
        Ok(Self { beta, alpha })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn length(&self) -> f64 {
        2.0 * self.alpha.cos()
    }

    /// Direction angle of the chord.
    pub fn theta(&self) -> f64 {
        self.beta + PI + self.alpha
    }

    pub fn entry(&self) -> (f64, f64) {
        (self.beta.cos(), self.beta.sin())
    }

    pub fn exit(&self) -> (f64, f64) {
        let b = self.beta + PI + 2.0 * self.alpha;
        (b.cos(), b.sin())
    }

    /// Point at arclength `t` without range checks.
    pub(crate) fn point_unchecked(&self, t: f64) -> (f64, f64) {
        let th = self.theta();
        (
            self.beta.cos() + t * th.cos(),
            self.beta.sin() + t * th.sin(),
        )
    }
}

/// A point of the unit circle bundle: position and direction angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlowPoint {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

/// Geodesic flow from the influx point `(beta, alpha)` for time `t`.
pub fn flow_point(beta: f64, alpha: f64, t: f64) -> Result<FlowPoint> {
    let chord = Chord::new(beta, alpha)?;
    let len = chord.length();
    if !(t >= 0.0 && t <= len + 1e-12) {
        return Err(Error::OutOfRange(format!("t = {t} outside [0, {len}]")));
    }
    let (x, y) = chord.point_unchecked(t);
    Ok(FlowPoint {
        x,
        y,
        theta: chord.theta(),
    })
}
