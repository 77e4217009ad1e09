//! Observables: complex-valued functions on 𝕋^m and their sampled form.
//!
//! An [`Observable`] holds the q samples g(x_{n,j}) taken at the cell
//! midpoints, ordered by linear cell index. Its norm uses the measure-weighted
//! inner product ⟨u, v⟩ = (1/q) Σⱼ ūⱼ vⱼ, so ‖g‖² = (1/q) Σ|gⱼ|².
//!
//! The catalog provides the observables used by the canonical map examples,
//! plus arbitrary finite Fourier sums.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{LatticePartition, TorusPoint};

/// Complex-valued point function of the torus coordinates.
pub type PointObservable = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A named complex-valued point function on 𝕋^m.
#[derive(Clone)]
pub struct ObservableFn {
    dim: usize,
    f: PointObservable,
}

impl ObservableFn {
    pub fn new(dim: usize, f: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static) -> Self {
        ObservableFn {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eval(&self, x: &TorusPoint) -> Complex64 {
        assert_eq!(x.dim(), self.dim, "observable dimension mismatch");
        (self.f)(x.coords())
    }
}

/// Σₖ aₖ e^{2πi k·x} for finitely many integer wave vectors k.
pub fn fourier_modes(modes: Vec<(Vec<i64>, Complex64)>) -> Result<ObservableFn> {
    if modes.is_empty() {
        return Err(Error::InvalidParameter("at least one Fourier mode required".into()));
    }
    let dim = modes[0].0.len();
    if modes.iter().any(|(k, _)| k.len() != dim) {
        return Err(Error::InvalidParameter("inconsistent wave vector dimensions".into()));
    }
    Ok(ObservableFn::new(dim, move |x: &[f64]| {
        modes
            .iter()
            .map(|(k, a)| {
                let phase: f64 = k.iter().zip(x).map(|(&ki, &xi)| ki as f64 * xi).sum();
                a * Complex64::from_polar(1.0, TAU * phase)
            })
            .sum()
    }))
}

fn cx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Look up a catalog observable by name.
///
/// Names: `g_1d`, `g_2d_translation`, `g1`, `g2`, `g3`, `g_anzai`,
/// `g_chirikov`, `one`.
pub fn builtin_observable(name: &str) -> Result<ObservableFn> {
    match name {
        // sin(4πx) / (1 + cos²(2πx) + sin(7πx))
        "g_1d" => Ok(ObservableFn::new(1, |x: &[f64]| {
            let v = (4.0 * PI * x[0]).sin()
                / (1.0 + (TAU * x[0]).cos().powi(2) + (7.0 * PI * x[0]).sin());
            cx(v)
        })),
        // sin(2πx₁)cos(2πx₂) + sin(πx₂) + 1/(sin²(πx₁)+1) − 1
        "g_2d_translation" => Ok(ObservableFn::new(2, |x: &[f64]| {
            let v = (TAU * x[0]).sin() * (TAU * x[1]).cos()
                + (PI * x[1]).sin()
                + 1.0 / ((PI * x[0]).sin().powi(2) + 1.0)
                - 1.0;
            cx(v)
        })),
        "g1" => fourier_modes(vec![(vec![2, 1], cx(1.0))]),
        "g2" => fourier_modes(vec![(vec![2, 1], cx(1.0)), (vec![5, 3], cx(0.5))]),
        "g3" => fourier_modes(vec![
            (vec![2, 1], cx(1.0)),
            (vec![5, 3], cx(0.5)),
            (vec![13, 8], cx(0.25)),
        ]),
        // (1/20)e^{2πix₁} + (1/20)e^{4πix₁} + (1/5)e^{6πix₁} + e^{2πix₂} + (1/2)e^{2πi(x₁+x₂)}
        "g_anzai" => fourier_modes(vec![
            (vec![1, 0], cx(1.0 / 20.0)),
            (vec![2, 0], cx(1.0 / 20.0)),
            (vec![3, 0], cx(1.0 / 5.0)),
            (vec![0, 1], cx(1.0)),
            (vec![1, 1], cx(0.5)),
        ]),
        // e^{4πix₁} + e^{3πix₁} + 0.01 e^{2πix₂}; the half-integer frequency
        // 3π is kept as printed even though it is discontinuous across the seam.
        "g_chirikov" => Ok(ObservableFn::new(2, |x: &[f64]| {
            Complex64::from_polar(1.0, 4.0 * PI * x[0])
                + Complex64::from_polar(1.0, 3.0 * PI * x[0])
                + 0.01 * Complex64::from_polar(1.0, TAU * x[1])
        })),
        "one" => Ok(ObservableFn::new(1, |_| cx(1.0))),
        other => Err(Error::UnknownName(other.to_string())),
    }
}

/// Observable sampled at the representative points, ordered by linear index.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    values: Vec<Complex64>,
}

impl Observable {
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidParameter("observable samples must be finite".into()));
        }
        Ok(Observable { values })
    }

    /// Sample g at every cell midpoint of the partition.
    pub fn sample(p: &LatticePartition, g: &ObservableFn) -> Result<Self> {
        if g.dim() != p.dim() {
            return Err(Error::DimensionMismatch {
                expected: p.dim(),
                got: g.dim(),
            });
        }
        let mut values = Vec::with_capacity(p.q());
        for idx in 0..p.q() {
            let x = p.representative_point_lin(idx)?;
            values.push(g.eval(&x));
        }
        Observable::from_values(values)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// ‖g‖² = (1/q) Σ |gⱼ|².
    pub fn norm_sq(&self) -> f64 {
        let q = self.values.len().max(1) as f64;
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / q
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }
}
