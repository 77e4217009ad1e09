//! The compactly supported summability kernel used to smooth spectra:
//!
//!   φ_α(x, y) = (K/α) · exp(−1 / (1 − (d(x,y)/α)²))   for d(x,y) < α,
//!
//! and 0 otherwise, where d is the circle distance and K normalizes the
//! bump to unit integral, K = (∫_{−1}^{1} e^{−1/(1−u²)} du)^{−1}.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::interval::{circle_distance, wrap_angle, Interval};

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub(crate) fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
        h / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, m - a);
        let right = simpson(fm, frm, fb, b - m);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, 48)
}

fn bump(u: f64) -> f64 {
    let w = 1.0 - u * u;
    if w <= 0.0 {
        0.0
    } else {
        (-1.0 / w).exp()
    }
}

/// K = 1 / ∫_{−1}^{1} e^{−1/(1−u²)} du ≈ 2.2523.
pub fn bump_normalization() -> f64 {
    static K: OnceLock<f64> = OnceLock::new();
    *K.get_or_init(|| 1.0 / adaptive_simpson(&bump, -1.0, 1.0, 1e-13))
}

/// A mollifier of width α on the circle.
#[derive(Debug, Clone, Copy)]
pub struct Mollifier {
    alpha: f64,
}

impl Mollifier {
    pub fn new(alpha: f64) -> Result<Self> {
        if !alpha.is_finite() || alpha <= 0.0 || alpha >= 2.0 * PI {
            return Err(Error::InvalidParameter(format!(
                "mollifier width α = {alpha} must lie in (0, 2π)"
            )));
        }
        Ok(Mollifier { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Kernel value at circle distance d ≥ 0.
    pub fn eval_at_distance(&self, d: f64) -> f64 {
        bump_normalization() / self.alpha * bump(d / self.alpha)
    }

    /// φ_α(x, y) for two angles.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_at_distance(circle_distance(x, y))
    }
}

/// The smoothed indicator χ_{D_α}(θ) = ∫ φ_α(θ, ξ) χ_D(ξ) dξ.
///
/// The kernel support is split at the arc endpoints so each quadrature piece
/// has a smooth integrand; pieces are integrated by adaptive Simpson to 1e−10.
pub fn smoothed_indicator(d: &Interval, moll: &Mollifier, theta: f64) -> f64 {
    let reach = moll.alpha.min(PI);
    // signed offsets from θ at which χ_D jumps
    let (a, b) = d.endpoints();
    let mut cuts = vec![-reach, reach];
    for e in [a, b] {
        let s = wrap_angle(e - theta);
        if s.abs() < reach {
            cuts.push(s);
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        if hi - lo <= 0.0 {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        if d.contains(wrap_angle(theta + mid)) {
            total += adaptive_simpson(&|s: f64| moll.eval_at_distance(s.abs()), lo, hi, 1e-10);
        }
    }
    total
}
