//! Lebesgue measure-preserving maps on the m-torus.
//!
//! A [`TorusMap`] is either a composition of three primitive operations
//! (signed coordinate permutation, translation, shear) or an opaque point map
//! with a declared Lipschitz constant. Each primitive preserves Lebesgue
//! measure, so any composition does too. The primitive structure is what the
//! analytic discretizer consumes; black-box maps can only be discretized by
//! the matching construction.
//!
//! The catalog covers the classical examples: torus translations, Arnold's
//! cat map, Anzai's skew product, the Chirikov standard map and Feingold's
//! ABC map.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lattice::{wrap_unit, TorusPoint};

/// Shear profile: maps the m−1 coordinates of the *other* axes (in ascending
/// axis order) to a displacement added to the sheared axis.
pub type ShearFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Opaque point map used by [`TorusMap::black_box`].
pub type PointFn = Arc<dyn Fn(&TorusPoint) -> TorusPoint + Send + Sync>;

/// One measure-preserving building block.
#[derive(Clone)]
pub enum MapPrimitive {
    /// x'ᵢ = ξᵢ · x_{σ(i)} mod 1, with σ a permutation of the axes and ξᵢ = ±1.
    SignedPermutation { perm: Vec<usize>, signs: Vec<i8> },
    /// x'ᵢ = xᵢ + ωᵢ mod 1.
    Translation { shift: Vec<f64> },
    /// x'_axis = x_axis + f(other coordinates) mod 1; all other axes fixed.
    /// `lipschitz` is an upper bound for |f(u)−f(v)| / max|uᵢ−vᵢ|.
    Shear {
        axis: usize,
        f: ShearFn,
        lipschitz: f64,
    },
}

impl fmt::Debug for MapPrimitive {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MapPrimitive::SignedPermutation { perm, signs } => fm
                .debug_struct("SignedPermutation")
                .field("perm", perm)
                .field("signs", signs)
                .finish(),
            MapPrimitive::Translation { shift } => {
                fm.debug_struct("Translation").field("shift", shift).finish()
            }
            MapPrimitive::Shear { axis, lipschitz, .. } => fm
                .debug_struct("Shear")
                .field("axis", axis)
                .field("lipschitz", lipschitz)
                .finish(),
        }
    }
}

impl MapPrimitive {
    pub fn signed_permutation(perm: Vec<usize>, signs: Vec<i8>) -> Result<Self> {
        let m = perm.len();
        if signs.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                got: signs.len(),
            });
        }
        let mut seen = vec![false; m];
        for &p in &perm {
            if p >= m || seen[p] {
                return Err(Error::InvalidParameter(format!(
                    "{perm:?} is not a permutation of 0..{m}"
                )));
            }
            seen[p] = true;
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter("signs must be ±1".into()));
        }
        Ok(MapPrimitive::SignedPermutation { perm, signs })
    }

    pub fn translation(shift: Vec<f64>) -> Result<Self> {
        if shift.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidParameter("translation must be finite".into()));
        }
        Ok(MapPrimitive::Translation { shift })
    }

    pub fn shear(
        axis: usize,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        lipschitz: f64,
    ) -> Result<Self> {
        if !lipschitz.is_finite() || lipschitz < 0.0 {
            return Err(Error::InvalidParameter(
                "shear Lipschitz bound must be finite and non-negative".into(),
            ));
        }
        Ok(MapPrimitive::Shear {
            axis,
            f: Arc::new(f),
            lipschitz,
        })
    }

    fn dim_consistent(&self, m: usize) -> bool {
        match self {
            MapPrimitive::SignedPermutation { perm, signs } => {
                perm.len() == m && signs.len() == m
            }
            MapPrimitive::Translation { shift } => shift.len() == m,
            MapPrimitive::Shear { axis, .. } => *axis < m,
        }
    }

    /// Apply the primitive to raw coordinates; output is wrapped mod 1.
    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        match self {
            MapPrimitive::SignedPermutation { perm, signs } => (0..x.len())
                .map(|i| {
                    let v = x[perm[i]];
                    wrap_unit(if signs[i] > 0 { v } else { -v })
                })
                .collect(),
            MapPrimitive::Translation { shift } => x
                .iter()
                .zip(shift)
                .map(|(a, w)| wrap_unit(a + w))
                .collect(),
            MapPrimitive::Shear { axis, f, .. } => {
                let others: Vec<f64> = x
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| i != axis)
                    .map(|(_, &v)| v)
                    .collect();
                let mut y = x.to_vec();
                y[*axis] = wrap_unit(y[*axis] + f(&others));
                y
            }
        }
    }

    /// Inverse primitive: a shear negates f, a translation negates ω, a
    /// signed permutation is transposed with the signs carried along.
    pub(crate) fn inverse(&self) -> MapPrimitive {
        match self {
            MapPrimitive::SignedPermutation { perm, signs } => {
                let m = perm.len();
                let mut inv_perm = vec![0usize; m];
                let mut inv_signs = vec![1i8; m];
                for i in 0..m {
                    inv_perm[perm[i]] = i;
                    inv_signs[perm[i]] = signs[i];
                }
                MapPrimitive::SignedPermutation {
                    perm: inv_perm,
                    signs: inv_signs,
                }
            }
            MapPrimitive::Translation { shift } => MapPrimitive::Translation {
                shift: shift.iter().map(|w| -w).collect(),
            },
            MapPrimitive::Shear { axis, f, lipschitz } => {
                let g = Arc::clone(f);
                MapPrimitive::Shear {
                    axis: *axis,
                    f: Arc::new(move |u: &[f64]| -g(u)),
                    lipschitz: *lipschitz,
                }
            }
        }
    }

    /// Max-metric Lipschitz bound of the primitive on the torus.
    fn lipschitz(&self) -> f64 {
        match self {
            MapPrimitive::SignedPermutation { .. } | MapPrimitive::Translation { .. } => 1.0,
            MapPrimitive::Shear { lipschitz, .. } => 1.0 + lipschitz,
        }
    }
}

enum MapKind {
    /// Primitives applied first-to-last.
    Composite(Vec<MapPrimitive>),
    BlackBox { f: PointFn, lipschitz: f64 },
}

/// An invertible Lebesgue measure-preserving map T: 𝕋^m → 𝕋^m.
pub struct TorusMap {
    m: usize,
    kind: MapKind,
}

impl fmt::Debug for TorusMap {
    fn fmt(&self, fm: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MapKind::Composite(ps) => fm
                .debug_struct("TorusMap")
                .field("m", &self.m)
                .field("primitives", ps)
                .finish(),
            MapKind::BlackBox { lipschitz, .. } => fm
                .debug_struct("TorusMap")
                .field("m", &self.m)
                .field("blackbox_lipschitz", lipschitz)
                .finish(),
        }
    }
}

impl TorusMap {
    /// Compose primitives; element 0 is applied first.
    pub fn from_primitives(m: usize, primitives: Vec<MapPrimitive>) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        for p in &primitives {
            if !p.dim_consistent(m) {
                return Err(Error::DimensionMismatch {
                    expected: m,
                    got: match p {
                        MapPrimitive::SignedPermutation { perm, .. } => perm.len(),
                        MapPrimitive::Translation { shift } => shift.len(),
                        MapPrimitive::Shear { axis, .. } => *axis,
                    },
                });
            }
        }
        Ok(TorusMap {
            m,
            kind: MapKind::Composite(primitives),
        })
    }

    /// Wrap an opaque point map. A max-metric Lipschitz constant must be
    /// declared; maps without one are refused by the matching discretizer.
    pub fn black_box(
        m: usize,
        f: impl Fn(&TorusPoint) -> TorusPoint + Send + Sync + 'static,
        lipschitz: f64,
    ) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("dimension must be positive".into()));
        }
        if !lipschitz.is_finite() || lipschitz <= 0.0 {
            return Err(Error::InvalidParameter(
                "black-box maps must declare a finite positive Lipschitz constant".into(),
            ));
        }
        Ok(TorusMap {
            m,
            kind: MapKind::BlackBox {
                f: Arc::new(f),
                lipschitz,
            },
        })
    }

    /// The identity map (empty primitive list).
    pub fn identity(m: usize) -> Self {
        TorusMap {
            m,
            kind: MapKind::Composite(Vec::new()),
        }
    }

    /// T(x) = x + ω mod 1.
    pub fn translation(omega: &[f64]) -> Result<Self> {
        let m = omega.len();
        Self::from_primitives(m, vec![MapPrimitive::translation(omega.to_vec())?])
    }

    /// Arnold's cat map T(x) = `[[2,1],[1,1]]`·x mod 1, realized as the
    /// four-step pipeline shear, swap, shear, swap. With the shear
    /// S: (x₁,x₂) ↦ (x₁, x₁+x₂) and the swap J, the matrix product
    /// J·S·J·S equals `[[2,1],[1,1]]`, i.e. the first shear acts first.
    pub fn cat_map() -> Self {
        let shear = || MapPrimitive::shear(1, |o: &[f64]| o[0], 1.0).unwrap();
        let swap = || MapPrimitive::signed_permutation(vec![1, 0], vec![1, 1]).unwrap();
        TorusMap::from_primitives(2, vec![shear(), swap(), shear(), swap()]).unwrap()
    }

    /// Anzai's skew product T(x) = (x₁+γ, x₁+x₂) mod 1: shear then translation.
    pub fn anzai(gamma: f64) -> Result<Self> {
        if !gamma.is_finite() {
            return Err(Error::InvalidParameter("γ must be finite".into()));
        }
        TorusMap::from_primitives(
            2,
            vec![
                MapPrimitive::shear(1, |o: &[f64]| o[0], 1.0)?,
                MapPrimitive::translation(vec![gamma, 0.0])?,
            ],
        )
    }

    /// Chirikov standard map T(x) = (x₁+x₂+K sin(2πx₁), x₂+K sin(2πx₁)) mod 1,
    /// as two orthogonal shears: first x₂ += K sin(2πx₁), then x₁ += x₂.
    pub fn chirikov(k: f64) -> Result<Self> {
        if !k.is_finite() {
            return Err(Error::InvalidParameter("K must be finite".into()));
        }
        let two_pi = std::f64::consts::TAU;
        TorusMap::from_primitives(
            2,
            vec![
                MapPrimitive::shear(1, move |o: &[f64]| k * (two_pi * o[0]).sin(), two_pi * k.abs())?,
                MapPrimitive::shear(0, |o: &[f64]| o[0], 1.0)?,
            ],
        )
    }

    /// Feingold's ABC map on 𝕋³: three shears
    ///   x₁ += A sin(2πx₃) + C cos(2πx₂)
    ///   x₂ += B sin(2πx₁) + A cos(2πx₃)
    ///   x₃ += C sin(2πx₂) + B cos(2πx₁)
    /// applied in that order (each step reads the already-updated coordinates).
    pub fn abc(a: f64, b: f64, c: f64) -> Result<Self> {
        if ![a, b, c].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidParameter("A, B, C must be finite".into()));
        }
        let two_pi = std::f64::consts::TAU;
        // shear f receives the other axes in ascending order:
        // axis 0 -> (x₂, x₃); axis 1 -> (x₁, x₃); axis 2 -> (x₁, x₂)
        TorusMap::from_primitives(
            3,
            vec![
                MapPrimitive::shear(
                    0,
                    move |o: &[f64]| a * (two_pi * o[1]).sin() + c * (two_pi * o[0]).cos(),
                    two_pi * (a.abs() + c.abs()),
                )?,
                MapPrimitive::shear(
                    1,
                    move |o: &[f64]| b * (two_pi * o[0]).sin() + a * (two_pi * o[1]).cos(),
                    two_pi * (a.abs() + b.abs()),
                )?,
                MapPrimitive::shear(
                    2,
                    move |o: &[f64]| c * (two_pi * o[1]).sin() + b * (two_pi * o[0]).cos(),
                    two_pi * (b.abs() + c.abs()),
                )?,
            ],
        )
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    /// The primitive pipeline, if this map is a composition.
    pub fn primitives(&self) -> Option<&[MapPrimitive]> {
        match &self.kind {
            MapKind::Composite(ps) => Some(ps),
            MapKind::BlackBox { .. } => None,
        }
    }

    /// Evaluate T(x); the image is reduced mod 1 componentwise.
    pub fn apply(&self, x: &TorusPoint) -> TorusPoint {
        assert_eq!(x.dim(), self.m, "point dimension mismatch");
        match &self.kind {
            MapKind::Composite(ps) => {
                let mut v = x.coords().to_vec();
                for p in ps {
                    v = p.apply(&v);
                }
                TorusPoint::new(v)
            }
            MapKind::BlackBox { f, .. } => {
                let y = f(x);
                assert_eq!(y.dim(), self.m, "black-box image dimension mismatch");
                y
            }
        }
    }

    /// Analytic inverse; available for primitive compositions only.
    pub fn inverse(&self) -> Option<TorusMap> {
        match &self.kind {
            MapKind::Composite(ps) => Some(TorusMap {
                m: self.m,
                kind: MapKind::Composite(ps.iter().rev().map(|p| p.inverse()).collect()),
            }),
            MapKind::BlackBox { .. } => None,
        }
    }

    /// Max-metric Lipschitz bound: declared for black boxes, product of
    /// per-primitive bounds for compositions.
    pub fn lipschitz_constant(&self) -> f64 {
        match &self.kind {
            MapKind::Composite(ps) => ps.iter().map(|p| p.lipschitz()).product(),
            MapKind::BlackBox { lipschitz, .. } => *lipschitz,
        }
    }
}
