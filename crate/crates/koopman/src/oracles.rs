//! Independent ground truths for validation.
//!
//! [`ClosedFormSpectrum`] carries the exact spectral density of the canonical
//! examples (torus translations, the cat map observables g₁–g₃, the worked
//! Anzai instance) as a list of point masses plus an absolutely continuous
//! part. [`dense_eig_oracle`] recomputes spectral atoms for small
//! permutations from explicitly assembled eigenvectors and dense inner
//! products, bypassing the FFT pipeline entirely.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;

use crate::discretizer::PermutationMap;
use crate::error::{Error, Result};
use crate::interval::{circle_distance, wrap_angle};
use crate::mollifier::{adaptive_simpson, Mollifier};
use crate::observables::Observable;
use crate::spectral::{SpectralAtom, SpectralAtomSet};

/// Exact spectrum of an observable: point masses plus a continuous density.
#[derive(Clone)]
pub struct ClosedFormSpectrum {
    atoms: Vec<(f64, f64)>,
    continuous: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
}

impl ClosedFormSpectrum {
    pub fn new(
        atoms: Vec<(f64, f64)>,
        continuous: Option<Arc<dyn Fn(f64) -> f64 + Send + Sync>>,
    ) -> Self {
        ClosedFormSpectrum { atoms, continuous }
    }

    /// Point masses (angle in [−π, π), mass).
    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Continuous density at θ (0 if there is none).
    pub fn continuous_at(&self, theta: f64) -> f64 {
        self.continuous.as_ref().map_or(0.0, |c| c(wrap_angle(theta)))
    }

    /// Σ atom masses + ∫ continuous part over the circle.
    pub fn total_mass(&self) -> f64 {
        let atom_mass: f64 = self.atoms.iter().map(|&(_, m)| m).sum();
        let cont = match &self.continuous {
            None => 0.0,
            Some(c) => adaptive_simpson(&|t| c(t), -PI, PI, 1e-11),
        };
        atom_mass + cont
    }

    /// The kernel-smoothed density ρ_α(θ) = Σₖ mₖ φ_α(θ, θₖ) + (φ_α ∗ c)(θ).
    pub fn mollified_at(&self, moll: &Mollifier, theta: f64) -> f64 {
        let mut rho: f64 = self
            .atoms
            .iter()
            .map(|&(t, m)| m * moll.eval(theta, t))
            .sum();
        if let Some(c) = &self.continuous {
            let reach = moll.alpha().min(PI);
            rho += adaptive_simpson(
                &|s: f64| moll.eval_at_distance(s.abs()) * c(wrap_angle(theta + s)),
                -reach,
                reach,
                1e-11,
            );
        }
        rho
    }

    /// Spectral mass within circle distance `halfwidth` of `center`.
    pub fn window_mass(&self, center: f64, halfwidth: f64) -> f64 {
        let mut mass: f64 = self
            .atoms
            .iter()
            .filter(|&&(t, _)| circle_distance(t, center) < halfwidth)
            .map(|&(_, m)| m)
            .sum();
        if let Some(c) = &self.continuous {
            mass += adaptive_simpson(
                &|s: f64| c(wrap_angle(center + s)),
                -halfwidth,
                halfwidth,
                1e-11,
            );
        }
        mass
    }
}

fn push_merged(atoms: &mut Vec<(f64, f64)>, theta: f64, mass: f64) {
    for (t, m) in atoms.iter_mut() {
        if circle_distance(*t, theta) < 1e-12 {
            *m += mass;
            return;
        }
    }
    atoms.push((theta, mass));
}

/// Spectrum of a trigonometric polynomial Σ aₖ e^{2πi k·x} under the torus
/// translation by ω: one atom of mass |aₖ|² at 2π(k·ω) mod 2π per mode,
/// coincident angles merged. Purely discrete.
pub fn translation_spectrum(
    omega: &[f64],
    modes: &[(Vec<i64>, Complex64)],
) -> Result<ClosedFormSpectrum> {
    let mut atoms = Vec::new();
    for (k, a) in modes {
        if k.len() != omega.len() {
            return Err(Error::DimensionMismatch { expected: omega.len(), got: k.len() });
        }
        let dot: f64 = k.iter().zip(omega).map(|(&ki, &wi)| ki as f64 * wi).sum();
        push_merged(&mut atoms, wrap_angle(TAU * dot), a.norm_sqr());
    }
    Ok(ClosedFormSpectrum::new(atoms, None))
}

/// The three cat-map observables with published closed-form densities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CatObservable {
    G1,
    G2,
    G3,
}

/// Exact spectral densities for g₁, g₂, g₃ under the cat map: purely
/// absolutely continuous,
///   ρ(θ; g₁) = 1/2π,
///   ρ(θ; g₂) = (5/4 + cos θ)/2π,
///   ρ(θ; g₃) = (21/16 + (10/8)cos θ + (1/2)cos 2θ)/2π.
pub fn catmap_spectrum(which: CatObservable) -> ClosedFormSpectrum {
    let c: Arc<dyn Fn(f64) -> f64 + Send + Sync> = match which {
        CatObservable::G1 => Arc::new(|_| 1.0 / TAU),
        CatObservable::G2 => Arc::new(|t: f64| (1.25 + t.cos()) / TAU),
        CatObservable::G3 => {
            Arc::new(|t: f64| (21.0 / 16.0 + 1.25 * t.cos() + 0.5 * (2.0 * t).cos()) / TAU)
        }
    };
    ClosedFormSpectrum::new(Vec::new(), Some(c))
}

/// Mixed spectrum of the worked Anzai instance: γ = 1/3 with the catalog
/// observable `g_anzai`. The x₁-modes e^{2πi t x₁} are eigenfunctions with
/// eigenvalue e^{2πi t γ}, so the amplitudes 1/20, 1/20, 1/5 at t = 1, 2, 3
/// put masses 1/400 at ±2π/3 and 1/25 at 0; the two skew modes contribute
/// the continuous density (5/4 + cos θ)/2π.
///
/// Only γ = 1/3 is supported; the general triple-sum density is out of scope.
pub fn anzai_spectrum(gamma: f64) -> Result<ClosedFormSpectrum> {
    if (gamma - 1.0 / 3.0).abs() > 1e-12 {
        return Err(Error::UnsupportedOracle(format!(
            "anzai spectrum is only available for γ = 1/3, got {gamma}"
        )));
    }
    let atoms = vec![
        (0.0, 1.0 / 25.0),
        (wrap_angle(TAU / 3.0), 1.0 / 400.0),
        (wrap_angle(2.0 * TAU / 3.0), 1.0 / 400.0),
    ];
    let c: Arc<dyn Fn(f64) -> f64 + Send + Sync> = Arc::new(|t: f64| (1.25 + t.cos()) / TAU);
    Ok(ClosedFormSpectrum::new(atoms, Some(c)))
}

/// Recompute the spectral atoms of (perm, g) without FFTs: traverse each
/// cycle, assemble every normalized eigenvector v_t(j(l)) = √(q/L)·e^{2πitl/L}
/// as a dense length-q vector, and take dense measure-weighted inner products
/// ⟨v_t, g⟩ = (1/q) Σⱼ v̄_t(j) g(j). Quadratic work, so q is capped at 2048.
pub fn dense_eig_oracle(perm: &PermutationMap, g: &Observable) -> Result<SpectralAtomSet> {
    let q = perm.q();
    if q > 2048 {
        return Err(Error::TooLarge(format!("dense oracle limited to q ≤ 2048, got {q}")));
    }
    if g.len() != q {
        return Err(Error::LengthMismatch { expected: q, got: g.len() });
    }
    let values = g.values();
    let qf = q as f64;

    let mut visited = vec![false; q];
    let mut atoms = Vec::with_capacity(q);
    let mut cycle_index = 0u32;
    for start in 0..q {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut j = start;
        loop {
            visited[j] = true;
            cycle.push(j);
            j = perm.apply_idx(j);
            if j == start {
                break;
            }
        }
        let len = cycle.len();
        let lf = len as f64;
        let scale = (qf / lf).sqrt();
        let mut dense = vec![Complex64::default(); q];
        for t in 0..len {
            for v in dense.iter_mut() {
                *v = Complex64::default();
            }
            for (l, &cell) in cycle.iter().enumerate() {
                dense[cell] = scale * Complex64::from_polar(1.0, TAU * t as f64 * l as f64 / lf);
            }
            let mut ip = Complex64::default();
            for (v, gv) in dense.iter().zip(values) {
                ip += v.conj() * gv;
            }
            ip /= qf;
            atoms.push(SpectralAtom {
                theta: wrap_angle(TAU * t as f64 / lf),
                mass: ip.norm_sqr(),
                cycle: cycle_index,
                bin: t as u32,
            });
        }
        cycle_index += 1;
    }
    Ok(SpectralAtomSet::from_atoms(atoms))
}
