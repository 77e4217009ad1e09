//! Spectral decomposition of the permutation Koopman operator.
//!
//! On sampled observables the operator acts by composition with the discrete
//! map, (U_n g)ⱼ = g_{T_n(j)}. Each cycle of T_n of length L is diagonalized
//! by the DFT of that length: traversing the cycle as j(0), j(1) = T_n(j(0)),
//! …, the vector v_t(j(l)) = e^{2πitl/L} is an eigenvector with eigenvalue
//! e^{iθ_t}, θ_t = 2πt/L. The squared projection coefficients
//!
//!   ‖S_n(θ_t) g‖² = |ĝ(t)|² / (L·q),    ĝ(t) = Σ_l e^{−2πitl/L} g(j(l)),
//!
//! are the spectral atom masses; they sum to ‖g‖² under the measure-weighted
//! inner product (Parseval). Projections apply a 0/1 (or mollified) weight to
//! each DFT bin and transform back; densities smear the atoms with the bump
//! kernel. All cycle lengths are handled by an O(L log L) FFT (mixed radix,
//! with a Bluestein fallback for large prime factors), never by a direct
//! O(L²) transform.
//!
//! Cycles are processed and accumulated in ascending order of their minimal
//! element, so results are reproducible bit for bit.

use std::collections::HashMap;
use std::f64::consts::TAU;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::discretizer::PermutationMap;
use crate::error::{Error, Result};
use crate::interval::{circle_distance, wrap_angle, Interval};
use crate::mollifier::{smoothed_indicator, Mollifier};
use crate::observables::Observable;

/// Disjoint cycles of a permutation, each in traversal order
/// (j, T_n(j), T_n²(j), …), ordered by ascending minimal element.
#[derive(Debug, Clone)]
pub struct CycleDecomposition {
    cycles: Vec<Vec<u32>>,
}

impl CycleDecomposition {
    pub fn cycles(&self) -> &[Vec<u32>] {
        &self.cycles
    }

    pub fn len(&self) -> usize {
        self.cycles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cycles.is_empty()
    }

    pub fn max_cycle_len(&self) -> usize {
        self.cycles.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    pub fn min_cycle_len(&self) -> usize {
        self.cycles.iter().map(|c| c.len()).min().unwrap_or(0)
    }
}

/// Traverse every trajectory of the discrete map until it closes.
pub fn cycle_decompose(perm: &PermutationMap) -> CycleDecomposition {
    let q = perm.q();
    let mut visited = vec![false; q];
    let mut cycles = Vec::new();
    for start in 0..q {
        if visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut j = start;
        loop {
            visited[j] = true;
            cycle.push(j as u32);
            j = perm.apply_idx(j);
            if j == start {
                break;
            }
        }
        cycles.push(cycle);
    }
    CycleDecomposition { cycles }
}

/// The Koopman action on samples: (U_n g)ⱼ = g_{T_n(j)}.
pub fn koopman_apply(perm: &PermutationMap, g: &Observable) -> Result<Observable> {
    check_len(perm, g)?;
    let values = g.values();
    Observable::from_values((0..perm.q()).map(|j| values[perm.apply_idx(j)]).collect())
}

/// Measure-weighted inner product ⟨u, v⟩ = (1/q) Σⱼ ūⱼ vⱼ.
pub fn inner_product(u: &Observable, v: &Observable) -> Result<Complex64> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch { expected: u.len(), got: v.len() });
    }
    let q = u.len().max(1) as f64;
    let s: Complex64 = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(s / q)
}

/// One eigenvalue of the permutation operator together with the spectral mass
/// the observable carries at it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralAtom {
    /// Eigenangle in [−π, π).
    pub theta: f64,
    /// ‖S_n(θ) g‖² ≥ 0.
    pub mass: f64,
    /// Index of the carrying cycle (ascending minimal element order).
    pub cycle: u32,
    /// DFT bin t within that cycle; θ = 2πt/L wrapped.
    pub bin: u32,
}

/// All spectral atoms of an observable under a permutation operator.
#[derive(Debug, Clone)]
pub struct SpectralAtomSet {
    atoms: Vec<SpectralAtom>,
}

impl SpectralAtomSet {
    /// Assemble from raw atoms (the dense oracle builds its own list).
    pub fn from_atoms(atoms: Vec<SpectralAtom>) -> Self {
        SpectralAtomSet { atoms }
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    /// Σ of all masses; equals ‖g‖² by Parseval.
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// Mass within circle distance `halfwidth` of `center`.
    pub fn window_mass(&self, center: f64, halfwidth: f64) -> f64 {
        self.atoms
            .iter()
            .filter(|a| circle_distance(a.theta, center) < halfwidth)
            .map(|a| a.mass)
            .sum()
    }

    /// Drop atoms below an absolute mass floor. The default pipeline keeps
    /// everything; callers bounding memory at huge q typically pass
    /// `1e-15 * total_mass()`. Pruned sets no longer satisfy Parseval
    /// exactly, by at most the pruned mass.
    pub fn prune(&mut self, floor: f64) {
        self.atoms.retain(|a| a.mass >= floor);
    }
}

fn check_len(perm: &PermutationMap, g: &Observable) -> Result<()> {
    if g.len() != perm.q() {
        return Err(Error::LengthMismatch { expected: perm.q(), got: g.len() });
    }
    Ok(())
}

/// Runs `body(cycle_index, cycle, spectrum)` for every cycle, where
/// `spectrum` holds the unnormalized forward DFT of the samples along the
/// cycle. Cycles are visited in ascending minimal-element order.
fn for_each_cycle_spectrum(
    perm: &PermutationMap,
    g: &Observable,
    mut body: impl FnMut(usize, &[u32], &[Complex64]),
) {
    let q = perm.q();
    let values = g.values();
    let mut planner = FftPlanner::<f64>::new();
    let mut visited = vec![false; q];
    let mut cycle: Vec<u32> = Vec::new();
    let mut buf: Vec<Complex64> = Vec::new();
    let mut scratch: Vec<Complex64> = Vec::new();
    let mut cycle_index = 0usize;
    for start in 0..q {
        if visited[start] {
            continue;
        }
        cycle.clear();
        buf.clear();
        let mut j = start;
        loop {
            visited[j] = true;
            cycle.push(j as u32);
            buf.push(values[j]);
            j = perm.apply_idx(j);
            if j == start {
                break;
            }
        }
        let fft = planner.plan_fft_forward(buf.len());
        scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
        fft.process_with_scratch(&mut buf, &mut scratch);
        body(cycle_index, &cycle, &buf);
        cycle_index += 1;
    }
}

/// Spectral atoms (θ_t, ‖S_n(θ_t)g‖²) over all cycles and DFT bins.
pub fn atoms(perm: &PermutationMap, g: &Observable) -> Result<SpectralAtomSet> {
    check_len(perm, g)?;
    let q = perm.q() as f64;
    let mut out = Vec::with_capacity(perm.q());
    for_each_cycle_spectrum(perm, g, |ci, cycle, spectrum| {
        let len = cycle.len() as f64;
        for (t, x) in spectrum.iter().enumerate() {
            out.push(SpectralAtom {
                theta: wrap_angle(TAU * t as f64 / len),
                mass: x.norm_sqr() / (len * q),
                cycle: ci as u32,
                bin: t as u32,
            });
        }
    });
    Ok(SpectralAtomSet { atoms: out })
}

/// Bin weighting for [`project`]: either the sharp indicator of the interval
/// or its mollified version χ_{D_α}.
#[derive(Debug, Clone, Copy)]
pub enum ProjectionMode {
    Hard,
    Mollified(f64),
}

/// Spectral projection S_{n,D} g: per cycle, forward DFT, weight each bin by
/// 1_D(θ_t) (hard) or χ_{D_α}(θ_t) (mollified), inverse DFT, scatter back.
pub fn project(
    perm: &PermutationMap,
    g: &Observable,
    d: &Interval,
    mode: ProjectionMode,
) -> Result<Observable> {
    check_len(perm, g)?;
    let moll = match mode {
        ProjectionMode::Hard => None,
        ProjectionMode::Mollified(alpha) => Some(Mollifier::new(alpha)?),
    };
    // χ_{D_α} is a quadrature; cache it per distinct (cycle length, bin)
    let mut chi_cache: HashMap<(u64, u64), f64> = HashMap::new();
    let mut weight = |len: usize, t: usize| -> f64 {
        let theta = wrap_angle(TAU * t as f64 / len as f64);
        match &moll {
            None => {
                if d.contains(theta) {
                    1.0
                } else {
                    0.0
                }
            }
            Some(m) => *chi_cache
                .entry((len as u64, t as u64))
                .or_insert_with(|| smoothed_indicator(d, m, theta)),
        }
    };

    let q = perm.q();
    let values = g.values();
    let mut out = vec![Complex64::default(); q];
    let mut planner = FftPlanner::<f64>::new();
    let mut visited = vec![false; q];
    let mut cycle: Vec<u32> = Vec::new();
    let mut buf: Vec<Complex64> = Vec::new();
    let mut scratch: Vec<Complex64> = Vec::new();
    for start in 0..q {
        if visited[start] {
            continue;
        }
        cycle.clear();
        buf.clear();
        let mut j = start;
        loop {
            visited[j] = true;
            cycle.push(j as u32);
            buf.push(values[j]);
            j = perm.apply_idx(j);
            if j == start {
                break;
            }
        }
        let len = buf.len();
        let fft = planner.plan_fft_forward(len);
        scratch.resize(fft.get_inplace_scratch_len(), Complex64::default());
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (t, x) in buf.iter_mut().enumerate() {
            *x *= weight(len, t);
        }
        let ifft = planner.plan_fft_inverse(len);
        scratch.resize(ifft.get_inplace_scratch_len(), Complex64::default());
        ifft.process_with_scratch(&mut buf, &mut scratch);
        let scale = 1.0 / len as f64;
        for (l, &j) in cycle.iter().enumerate() {
            out[j as usize] = buf[l] * scale;
        }
    }
    Observable::from_values(out)
}

/// Mollified spectral density ρ_{α,n} evaluated at the given angles:
/// ρ_{α,n}(θ_r) = Σ_atoms mass · φ_α(θ_r, θ_atom).
///
/// Atoms are streamed cycle by cycle; each touches only the evaluation
/// angles inside its kernel support.
pub fn density(
    perm: &PermutationMap,
    g: &Observable,
    alpha: f64,
    thetas: &[f64],
) -> Result<Vec<f64>> {
    check_len(perm, g)?;
    let moll = Mollifier::new(alpha)?;
    for &t in thetas {
        if !t.is_finite() || !(-std::f64::consts::PI..std::f64::consts::PI).contains(&t) {
            return Err(Error::InvalidParameter(format!(
                "evaluation angle {t} outside [−π, π)"
            )));
        }
    }
    // sorted view of the evaluation angles for windowed accumulation
    let mut order: Vec<usize> = (0..thetas.len()).collect();
    order.sort_by(|&a, &b| thetas[a].partial_cmp(&thetas[b]).unwrap());
    let sorted: Vec<f64> = order.iter().map(|&i| thetas[i]).collect();

    let q = perm.q() as f64;
    let mut rho = vec![0.0f64; thetas.len()];
    let reach = alpha.min(std::f64::consts::PI);
    for_each_cycle_spectrum(perm, g, |_, cycle, spectrum| {
        let len = cycle.len() as f64;
        for (t, x) in spectrum.iter().enumerate() {
            let mass = x.norm_sqr() / (len * q);
            if mass == 0.0 {
                continue;
            }
            let theta = wrap_angle(TAU * t as f64 / len);
            // the kernel support [θ−reach, θ+reach] splits into at most two
            // runs of the sorted angle list
            for (lo, hi) in split_circle_range(theta - reach, theta + reach) {
                let i0 = sorted.partition_point(|&v| v < lo);
                let i1 = sorted.partition_point(|&v| v <= hi);
                for k in i0..i1 {
                    let d = circle_distance(sorted[k], theta);
                    rho[order[k]] += mass * moll.eval_at_distance(d);
                }
            }
        }
    });
    Ok(rho)
}

/// Intersect a raw angle range with [−π, π), wrapping across the seam.
fn split_circle_range(lo: f64, hi: f64) -> Vec<(f64, f64)> {
    use std::f64::consts::PI;
    if hi - lo >= TAU {
        return vec![(-PI, PI)];
    }
    let a = wrap_angle(lo);
    let b = wrap_angle(hi);
    if a <= b {
        vec![(a, b)]
    } else {
        vec![(-PI, b), (a, PI)]
    }
}

/// a(l; g) = ⟨U_n^l g, g⟩ = (1/q) Σⱼ conj(g_{T_n^l(j)}) gⱼ, evaluated by
/// l-fold index composition. Satisfies a(l) = Σ_k e^{−ilθ_k}·mass_k.
pub fn autocorrelation(perm: &PermutationMap, g: &Observable, l: i64) -> Result<Complex64> {
    check_len(perm, g)?;
    if l.unsigned_abs() as usize > perm.q() {
        return Err(Error::InvalidParameter(format!(
            "|l| = {} exceeds q = {}",
            l.unsigned_abs(),
            perm.q()
        )));
    }
    let q = perm.q();
    let values = g.values();
    // indices of T^l
    let mut idx: Vec<u32> = (0..q as u32).collect();
    if l >= 0 {
        for _ in 0..l {
            for v in idx.iter_mut() {
                *v = perm.target()[*v as usize];
            }
        }
    } else {
        let inv = perm.inverse_targets();
        for _ in 0..(-l) {
            for v in idx.iter_mut() {
                *v = inv[*v as usize];
            }
        }
    }
    let s: Complex64 = idx
        .iter()
        .enumerate()
        .map(|(j, &tj)| values[tj as usize].conj() * values[j])
        .sum();
    Ok(s / q as f64)
}
