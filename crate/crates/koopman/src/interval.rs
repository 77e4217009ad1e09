//! Half-open arcs [a, b) of the circle parameterized by [−π, π).

use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};

/// Wrap an angle into the canonical range [−π, π).
pub fn wrap_angle(theta: f64) -> f64 {
    let mut r = theta.rem_euclid(TAU);
    if r >= PI {
        r -= TAU;
    }
    r
}

/// Circle distance between two angles, at most π.
pub fn circle_distance(x: f64, y: f64) -> f64 {
    let d = (x - y).rem_euclid(TAU);
    d.min(TAU - d)
}

/// A half-open arc [a, b) on the circle. Arcs crossing ±π carry a wrap flag
/// and are treated as [a, π) ∪ [−π, b).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    a: f64,
    b: f64,
    wraps: bool,
}

impl Interval {
    /// Canonical constructor: requires −π ≤ a < b ≤ π.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || !(-PI..PI).contains(&a) || b <= a || b > PI {
            return Err(Error::InvalidParameter(format!(
                "invalid interval [{a}, {b}): need −π ≤ a < b ≤ π"
            )));
        }
        Ok(Interval { a, b, wraps: false })
    }

    /// Build from arbitrary real endpoints; an arc like [π−ε, π+ε) comes out
    /// with the wrap flag set. A width of 2π or more is the full circle.
    pub fn from_endpoints(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || hi <= lo {
            return Err(Error::InvalidParameter(format!(
                "invalid interval endpoints [{lo}, {hi})"
            )));
        }
        if hi - lo >= TAU {
            return Ok(Interval::full_circle());
        }
        let a = wrap_angle(lo);
        let b = wrap_angle(hi);
        if a < b {
            Ok(Interval { a, b, wraps: false })
        } else if a > b {
            Ok(Interval { a, b, wraps: true })
        } else {
            Err(Error::InvalidParameter(
                "interval endpoints collapse after wrapping".into(),
            ))
        }
    }

    /// The arc of circle radius `halfwidth` around `center`.
    pub fn around(center: f64, halfwidth: f64) -> Result<Self> {
        if halfwidth.is_nan() || halfwidth <= 0.0 {
            return Err(Error::InvalidParameter("halfwidth must be positive".into()));
        }
        Interval::from_endpoints(center - halfwidth, center + halfwidth)
    }

    /// The whole circle [−π, π).
    pub fn full_circle() -> Self {
        Interval { a: -PI, b: PI, wraps: false }
    }

    pub fn endpoints(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn wraps(&self) -> bool {
        self.wraps
    }

    /// Membership for an angle already reduced to [−π, π).
    pub fn contains(&self, theta: f64) -> bool {
        if self.wraps {
            theta >= self.a || theta < self.b
        } else {
            theta >= self.a && theta < self.b
        }
    }

    /// Arc length.
    pub fn width(&self) -> f64 {
        if self.wraps {
            (PI - self.a) + (self.b + PI)
        } else {
            self.b - self.a
        }
    }
}
