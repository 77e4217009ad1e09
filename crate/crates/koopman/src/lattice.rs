//! Uniform box partition of the m-torus 𝕋^m = [0,1)^m.
//!
//! The torus is split into ñ^m congruent half-open cubes of side 1/ñ. Cells are
//! addressed either by a multi-index (one coordinate per axis, each in [0, ñ))
//! or by a linear index in [0, ñ^m) under row-major order (last axis fastest).
//! Each cell is represented by its midpoint, which is where observables get
//! sampled and where discrete maps are anchored.
//!
//! All indices are zero-based.

use crate::error::{Error, Result};

/// Wrap a real number into [0, 1).
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    // x - floor(x) can round up to exactly 1.0 for tiny negative x
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// A point on the m-torus with all coordinates reduced mod 1 into [0,1).
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    /// Build a point from arbitrary real coordinates, reducing each mod 1.
    pub fn new(coords: impl Into<Vec<f64>>) -> Self {
        let mut coords = coords.into();
        for c in &mut coords {
            *c = wrap_unit(*c);
        }
        TorusPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl std::ops::Index<usize> for TorusPoint {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.coords[i]
    }
}

/// Geodesic distance on the m-torus: max over axes of the wrap-around
/// circle distance min(|xᵢ−yᵢ|, 1−|xᵢ−yᵢ|). Bounded by 1/2.
pub fn torus_distance(x: &TorusPoint, y: &TorusPoint) -> Result<f64> {
    if x.dim() != y.dim() {
        return Err(Error::DimensionMismatch {
            expected: x.dim(),
            got: y.dim(),
        });
    }
    let mut d = 0.0f64;
    for (a, b) in x.coords().iter().zip(y.coords()) {
        let e = (a - b).abs();
        d = d.max(e.min(1.0 - e));
    }
    Ok(d)
}

/// Multi-index of a lattice cell: one coordinate per axis, each in [0, ñ).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    coords: Vec<usize>,
}

impl MultiIndex {
    pub fn new(coords: impl Into<Vec<usize>>) -> Self {
        MultiIndex {
            coords: coords.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords
    }
}

impl std::ops::Index<usize> for MultiIndex {
    type Output = usize;
    fn index(&self, i: usize) -> &usize {
        &self.coords[i]
    }
}

/// Linear cell index in {0, …, q−1}.
pub type LinearIndex = usize;

/// The partition P_n: q = ñ^m equal-measure cubes of side 1/ñ on 𝕋^m.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePartition {
    m: usize,
    n_tilde: usize,
    q: usize,
}

impl LatticePartition {
    /// Build an m-dimensional partition with ñ cells per axis.
    /// Fails if m or ñ is zero, or if ñ^m overflows.
    pub fn new(m: usize, n_tilde: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("dimension m must be positive".into()));
        }
        if n_tilde == 0 {
            return Err(Error::InvalidParameter("ñ must be positive".into()));
        }
        let mut q: usize = 1;
        for _ in 0..m {
            q = q
                .checked_mul(n_tilde)
                .ok_or(Error::LatticeOverflow { n_tilde, m })?;
        }
        Ok(LatticePartition { m, n_tilde, q })
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// Cells per axis, ñ.
    pub fn n_tilde(&self) -> usize {
        self.n_tilde
    }

    /// Total number of cells q = ñ^m.
    pub fn q(&self) -> usize {
        self.q
    }

    /// Lebesgue measure of one cell, 1/q.
    pub fn cell_measure(&self) -> f64 {
        1.0 / self.q as f64
    }

    /// Diameter bound of one cell, √m/ñ (the Euclidean diagonal; it also
    /// bounds the max-metric diameter 1/ñ from above).
    pub fn cell_diameter(&self) -> f64 {
        (self.m as f64).sqrt() / self.n_tilde as f64
    }

    fn check_multi(&self, j: &MultiIndex) -> Result<()> {
        if j.dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: j.dim(),
            });
        }
        for &c in j.coords() {
            if c >= self.n_tilde {
                return Err(Error::IndexOutOfRange {
                    index: c,
                    limit: self.n_tilde,
                });
            }
        }
        Ok(())
    }

    /// Midpoint of cell j: coordinate i equals (jᵢ + 1/2)/ñ.
    pub fn representative_point(&self, j: &MultiIndex) -> Result<TorusPoint> {
        self.check_multi(j)?;
        let n = self.n_tilde as f64;
        Ok(TorusPoint::new(
            j.coords()
                .iter()
                .map(|&c| (c as f64 + 0.5) / n)
                .collect::<Vec<_>>(),
        ))
    }

    /// Midpoint of the cell with the given linear index.
    pub fn representative_point_lin(&self, idx: LinearIndex) -> Result<TorusPoint> {
        let j = self.delinearize(idx)?;
        self.representative_point(&j)
    }

    /// Cell containing x. Cells are half-open [k/ñ, (k+1)/ñ), so boundary
    /// points go to the cell on the positive side.
    pub fn cell_of(&self, x: &TorusPoint) -> Result<MultiIndex> {
        if x.dim() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                got: x.dim(),
            });
        }
        let n = self.n_tilde as f64;
        Ok(MultiIndex::new(
            x.coords()
                .iter()
                .map(|&c| {
                    // c ∈ [0,1) but c*ñ can round up to exactly ñ
                    ((c * n).floor() as usize).min(self.n_tilde - 1)
                })
                .collect::<Vec<_>>(),
        ))
    }

    /// Row-major linearization (last coordinate fastest).
    pub fn linearize(&self, j: &MultiIndex) -> Result<LinearIndex> {
        self.check_multi(j)?;
        let mut idx = 0usize;
        for &c in j.coords() {
            idx = idx * self.n_tilde + c;
        }
        Ok(idx)
    }

    /// Inverse of [`linearize`](Self::linearize).
    pub fn delinearize(&self, idx: LinearIndex) -> Result<MultiIndex> {
        if idx >= self.q {
            return Err(Error::IndexOutOfRange {
                index: idx,
                limit: self.q,
            });
        }
        let mut coords = vec![0usize; self.m];
        let mut rest = idx;
        for i in (0..self.m).rev() {
            coords[i] = rest % self.n_tilde;
            rest /= self.n_tilde;
        }
        Ok(MultiIndex::new(coords))
    }
}
