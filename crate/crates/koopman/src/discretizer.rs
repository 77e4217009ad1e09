//! Construction of the permutation T_n approximating a torus map on a lattice.
//!
//! Two routes are provided. [`discretize_analytic`] exploits the primitive
//! structure of a [`TorusMap`]: each signed permutation, translation or shear
//! has an exact lattice counterpart obtained by rounding its displacement to
//! whole cells, and the lattice maps compose. [`discretize_matching`] works
//! for any point map with a declared Lipschitz constant: it builds the
//! neighborhood graph around the images of the cell midpoints and extracts a
//! bijection as a perfect matching, dilating the neighborhood until one
//! exists.
//!
//! Rounding convention: displacements are rounded to the nearest cell count.
//! Translation ties round toward −∞, so a translation by k/ñ becomes the
//! exact lattice shift by k and a half rotation shifts by ⌊ñ/2⌋. Shear
//! offsets round ties to the even cell count instead: shears evaluated at
//! cell midpoints produce exact half-cell ties at every cell, and a fixed
//! tie direction would add a coherent half-cell drift along every orbit,
//! piling spurious spectral mass onto low-order roots of unity. Values
//! within 1e−9 of a tie are treated as ties, so the choice does not depend
//! on how the midpoint arithmetic rounds.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{torus_distance, LatticePartition};
use crate::maps::{MapPrimitive, TorusMap};
use crate::matching::{max_matching_with, Adjacency};

/// Tolerance for recognizing half-integer ties under floating-point noise.
const TIE_SNAP: f64 = 1e-9;

/// Snap to the nearest half-integer when within [`TIE_SNAP`].
fn snap_half(x: f64) -> f64 {
    let half = (2.0 * x).round() / 2.0;
    if (x - half).abs() < TIE_SNAP {
        half
    } else {
        x
    }
}

/// Nearest integer with half-way ties rounded toward −∞ (translations).
fn round_half_down(x: f64) -> i64 {
    (snap_half(x) - 0.5).ceil() as i64
}

/// Nearest integer with half-way ties rounded to even (shear offsets).
fn round_half_even(x: f64) -> i64 {
    snap_half(x).round_ties_even() as i64
}

/// The discrete map T_n as a bijection on linear cell indices. The Koopman
/// permutation matrix is implicit in `target`: column j carries a single 1 in
/// row `target[j]`.
#[derive(Debug, Clone)]
pub struct PermutationMap {
    partition: LatticePartition,
    target: Vec<u32>,
}

impl PermutationMap {
    /// Validates that `target` is a bijection on {0, …, q−1} with an O(q)
    /// seen-bitmap sweep.
    pub fn new(partition: LatticePartition, target: Vec<u32>) -> Result<Self> {
        let q = partition.q();
        if q > u32::MAX as usize {
            return Err(Error::TooLarge(format!("q = {q} exceeds u32 index range")));
        }
        if target.len() != q {
            return Err(Error::LengthMismatch { expected: q, got: target.len() });
        }
        let mut seen = vec![false; q];
        for &t in &target {
            let t = t as usize;
            if t >= q {
                return Err(Error::IndexOutOfRange { index: t, limit: q });
            }
            if seen[t] {
                return Err(Error::NotABijection { index: t });
            }
            seen[t] = true;
        }
        Ok(PermutationMap { partition, target })
    }

    pub fn partition(&self) -> &LatticePartition {
        &self.partition
    }

    pub fn q(&self) -> usize {
        self.target.len()
    }

    pub fn target(&self) -> &[u32] {
        &self.target
    }

    /// T_n(j) for a linear index j.
    pub fn apply_idx(&self, j: usize) -> usize {
        self.target[j] as usize
    }

    /// Inverse permutation: `inv[target[j]] = j`.
    pub fn inverse_targets(&self) -> Vec<u32> {
        let mut inv = vec![0u32; self.target.len()];
        for (j, &t) in self.target.iter().enumerate() {
            inv[t as usize] = j as u32;
        }
        inv
    }
}

/// Compiled lattice action of one primitive.
enum LatticeOp {
    Perm { perm: Vec<usize>, signs: Vec<i8> },
    Shift(Vec<usize>),
    Shear { axis: usize, deltas: Vec<usize> },
}

impl LatticeOp {
    fn apply(&self, coords: &mut [usize], scratch: &mut Vec<usize>, n: usize) {
        match self {
            LatticeOp::Perm { perm, signs } => {
                scratch.clear();
                scratch.extend(coords.iter().copied());
                for i in 0..coords.len() {
                    let v = scratch[perm[i]];
                    coords[i] = if signs[i] > 0 { v } else { n - 1 - v };
                }
            }
            LatticeOp::Shift(shift) => {
                for (c, s) in coords.iter_mut().zip(shift) {
                    *c = (*c + s) % n;
                }
            }
            LatticeOp::Shear { axis, deltas } => {
                // index of the other coordinates, row-major
                let mut other = 0usize;
                for (i, &c) in coords.iter().enumerate() {
                    if i != *axis {
                        other = other * n + c;
                    }
                }
                coords[*axis] = (coords[*axis] + deltas[other]) % n;
            }
        }
    }
}

fn compile_primitive(prim: &MapPrimitive, p: &LatticePartition) -> Result<LatticeOp> {
    let n = p.n_tilde();
    let nf = n as f64;
    match prim {
        MapPrimitive::SignedPermutation { perm, signs } => Ok(LatticeOp::Perm {
            perm: perm.clone(),
            signs: signs.clone(),
        }),
        MapPrimitive::Translation { shift } => Ok(LatticeOp::Shift(
            shift
                .iter()
                .map(|w| round_half_down(nf * w).rem_euclid(n as i64) as usize)
                .collect(),
        )),
        MapPrimitive::Shear { axis, f, .. } => {
            let other_dims = p.dim() - 1;
            let table_len = n.checked_pow(other_dims as u32).ok_or(Error::LatticeOverflow {
                n_tilde: n,
                m: other_dims,
            })?;
            let mut deltas = Vec::with_capacity(table_len);
            let mut other = vec![0usize; other_dims];
            let mut reps = vec![0f64; other_dims];
            loop {
                for (r, &c) in reps.iter_mut().zip(other.iter()) {
                    *r = (c as f64 + 0.5) / nf;
                }
                let v = f(&reps);
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!(
                        "shear value not finite at {reps:?}"
                    )));
                }
                deltas.push(round_half_even(nf * v).rem_euclid(n as i64) as usize);
                // advance the row-major counter over the other axes
                let mut k = other_dims;
                loop {
                    if k == 0 {
                        return Ok(LatticeOp::Shear {
                            axis: *axis,
                            deltas,
                        });
                    }
                    k -= 1;
                    other[k] += 1;
                    if other[k] < n {
                        break;
                    }
                    other[k] = 0;
                }
            }
        }
    }
}

/// Discretize a primitive composition by composing the per-primitive lattice
/// maps. Errors if the map is a black box.
pub fn discretize_analytic(map: &TorusMap, p: &LatticePartition) -> Result<PermutationMap> {
    if map.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: map.dim(),
        });
    }
    let prims = map.primitives().ok_or_else(|| {
        Error::InvalidParameter("analytic discretization needs a primitive composition".into())
    })?;
    let ops: Vec<LatticeOp> = prims
        .iter()
        .map(|pr| compile_primitive(pr, p))
        .collect::<Result<_>>()?;

    let n = p.n_tilde();
    let q = p.q();
    let m = p.dim();
    let mut target = vec![0u32; q];
    let mut coords = vec![0usize; m];
    let mut cell = vec![0usize; m];
    let mut scratch = vec![0usize; m];
    loop {
        coords.copy_from_slice(&cell);
        for op in &ops {
            op.apply(&mut coords, &mut scratch, n);
        }
        let mut src = 0usize;
        let mut dst = 0usize;
        for i in 0..m {
            src = src * n + cell[i];
            dst = dst * n + coords[i];
        }
        target[src] = dst as u32;
        let mut k = m;
        loop {
            if k == 0 {
                return PermutationMap::new(p.clone(), target);
            }
            k -= 1;
            cell[k] += 1;
            if cell[k] < n {
                break;
            }
            cell[k] = 0;
        }
    }
}

/// Per-cell image window for the neighborhood graph: the image's real-valued
/// lattice coordinate is bracketed by [base, base+spread], then dilated by
/// t−1 cells on both sides.
struct CellWindow {
    base: Vec<i64>,
    spread: Vec<u8>,
}

struct WindowGraph<'a> {
    p: &'a LatticePartition,
    cells: &'a [CellWindow],
    t: usize,
}

impl WindowGraph<'_> {
    fn axis_len(&self, w: &CellWindow, i: usize) -> usize {
        (w.spread[i] as usize + 2 * self.t - 1).min(self.p.n_tilde())
    }
}

impl Adjacency for WindowGraph<'_> {
    fn n_left(&self) -> usize {
        self.p.q()
    }
    fn n_right(&self) -> usize {
        self.p.q()
    }
    fn degree(&self, u: usize) -> usize {
        let w = &self.cells[u];
        (0..self.p.dim()).map(|i| self.axis_len(w, i)).product()
    }
    fn neighbor(&self, u: usize, mut i: usize) -> usize {
        let w = &self.cells[u];
        let n = self.p.n_tilde() as i64;
        let m = self.p.dim();
        let mut idx = 0usize;
        // decompose i in mixed radix, axis 0 outermost
        let mut radix = vec![0usize; m];
        for k in (0..m).rev() {
            let len = self.axis_len(w, k);
            radix[k] = i % len;
            i /= len;
        }
        for (b, r) in w.base.iter().zip(&radix) {
            let lo = b - (self.t as i64 - 1);
            let c = (lo + *r as i64).rem_euclid(n) as usize;
            idx = idx * self.p.n_tilde() + c;
        }
        idx
    }
}

/// Real-valued zero-based lattice coordinate of y, snapped to the nearest
/// integer when within 1e−9 so that exact lattice images yield singleton
/// windows.
fn bracket(y: f64, n: f64) -> (i64, u8) {
    let c = n * y - 0.5;
    let r = c.round();
    if (c - r).abs() < 1e-9 {
        (r as i64, 0)
    } else {
        (c.floor() as i64, 1)
    }
}

/// Algorithm: evaluate T at every cell midpoint, connect each cell to the
/// lattice window around its image, find a maximum matching, and dilate the
/// window (t ← t+1) until the matching is perfect. Returns the permutation
/// and the t at which it was found.
///
/// For a map with max-metric Lipschitz constant K the loop terminates with
/// t ≤ ⌈K + 1/2⌉.
pub fn discretize_matching(map: &TorusMap, p: &LatticePartition) -> Result<(PermutationMap, u32)> {
    if map.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: map.dim(),
        });
    }
    let lip = map.lipschitz_constant();
    if !lip.is_finite() || lip <= 0.0 {
        return Err(Error::InvalidParameter(
            "matching discretization needs a declared Lipschitz constant".into(),
        ));
    }
    let n = p.n_tilde();
    let nf = n as f64;
    let cells: Vec<CellWindow> = (0..p.q())
        .into_par_iter()
        .map(|j| {
            let x = p.representative_point_lin(j).expect("index in range");
            let y = map.apply(&x);
            let mut base = Vec::with_capacity(p.dim());
            let mut spread = Vec::with_capacity(p.dim());
            for i in 0..p.dim() {
                let (b, s) = bracket(y[i], nf);
                base.push(b);
                spread.push(s);
            }
            CellWindow { base, spread }
        })
        .collect();

    for t in 1..=(n / 2 + 1) {
        let graph = WindowGraph { p, cells: &cells, t };
        let matching = max_matching_with(&graph);
        if matching.is_perfect(&graph) {
            let target: Vec<u32> = matching
                .pair_of_left
                .into_iter()
                .map(|v| v.expect("perfect matching"))
                .collect();
            return Ok((PermutationMap::new(p.clone(), target)?, t as u32));
        }
    }
    // at t = ñ/2 + 1 every window already covers the whole lattice, and the
    // complete bipartite graph has a perfect matching
    unreachable!("window grew to the complete graph without a perfect matching");
}

/// One-step displacement error of the discretization:
/// max over cells of d(ψ(T_n(p_j)), T(ψ(p_j))) in the torus metric.
pub fn quality_report(perm: &PermutationMap, map: &TorusMap) -> Result<f64> {
    let p = perm.partition();
    if map.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            got: map.dim(),
        });
    }
    let mut worst = 0.0f64;
    for j in 0..perm.q() {
        let x = p.representative_point_lin(j)?;
        let discrete = p.representative_point_lin(perm.apply_idx(j))?;
        let exact = map.apply(&x);
        worst = worst.max(torus_distance(&discrete, &exact)?);
    }
    Ok(worst)
}
