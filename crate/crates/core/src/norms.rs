//! Norm definitions and evaluation.
//!
//! Three families are supported: the ℓ_p norms (`1 ≤ p < ∞`), the maximum
//! norm, and a three-dimensional gauge whose unit ball has the flat square
//! with vertices `(±1, ±1, 0)` as its equatorial section. The upper half of
//! that body is the surface
//!
//! ```text
//! z(x, y) = 1 − ρ^{α(s)},   α(s) = β(s)·√(1 + s²)
//! ```
//!
//! where `ρ` is the max-coordinate of `(x, y)` and `s ∈ [−1, 1]` is the
//! position along the square's edge hit by the ray from the origin through
//! `(x, y)`. The lower half is the reflection through the origin. `β` is
//! interpolated linearly along each edge between four corner values.

use std::f64::consts::SQRT_2;
use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::vector::Vector;

/// Relative tolerance for gauge inversion and unit-sphere membership.
pub const GAUGE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NormError {
    #[error("dimension mismatch: norm expects {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector has a non-finite coordinate")]
    NonFinite,
    #[error("the zero vector has no boundary scale")]
    ZeroVector,
    #[error("invalid norm: {0}")]
    Invalid(String),
    #[error("point ({x}, {y}) lies outside the square [-1, 1]^2")]
    OutsideSquare { x: f64, y: f64 },
    #[error("edge index {0} is not in 1..=4")]
    BadEdge(usize),
    #[error("edge parameter {0} is not in [-1, 1]")]
    BadEdgeParam(f64),
}

/// Corner values of `β` for the custom gauge.
///
/// Corners are listed clockwise starting at `(−1, 1)`: `(−1,1)`, `(1,1)`,
/// `(1,−1)`, `(−1,−1)`. Edge `k` runs from corner `k` to corner `k+1`
/// (wrapping), with edge parameter `s = −1` at its first corner.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Custom3DParams {
    corners: [f64; 4],
}

impl Default for Custom3DParams {
    fn default() -> Self {
        Custom3DParams {
            corners: [1.25, 1.75, 2.25, 1.75],
        }
    }
}

impl Custom3DParams {
    /// Every corner value must exceed 1 (so `β(s) > 1/√(1+s²)` on every
    /// edge) and the two ends of each edge must differ (strict monotonicity).
    pub fn new(corners: [f64; 4]) -> Result<Self, NormError> {
        if let Some(c) = corners.iter().find(|c| !c.is_finite() || **c <= 1.0) {
            return Err(NormError::Invalid(format!(
                "beta corner value {c} must be finite and > 1"
            )));
        }
        for k in 0..4 {
            if corners[k] == corners[(k + 1) % 4] {
                return Err(NormError::Invalid(format!(
                    "beta must be strictly monotone on edge {}: corners {} and {} are equal",
                    k + 1,
                    k + 1,
                    (k + 1) % 4 + 1
                )));
            }
        }
        Ok(Custom3DParams { corners })
    }

    pub fn corners(&self) -> [f64; 4] {
        self.corners
    }

    fn edge_ends(&self, edge: usize) -> (f64, f64) {
        (self.corners[edge - 1], self.corners[edge % 4])
    }

    /// Linear `β` on `edge` (1-based) at parameter `s`. No domain checks.
    pub(crate) fn beta_raw(&self, edge: usize, s: f64) -> f64 {
        let (a, b) = self.edge_ends(edge);
        a + (b - a) * (s + 1.0) * 0.5
    }

    pub(crate) fn alpha_raw(&self, edge: usize, s: f64) -> f64 {
        self.beta_raw(edge, s) * (1.0 + s * s).sqrt()
    }

    pub fn beta(&self, edge: usize, s: f64) -> Result<f64, NormError> {
        check_edge(edge, s)?;
        Ok(self.beta_raw(edge, s))
    }

    pub fn alpha(&self, edge: usize, s: f64) -> Result<f64, NormError> {
        check_edge(edge, s)?;
        Ok(self.alpha_raw(edge, s))
    }

    pub fn is_default(&self) -> bool {
        *self == Custom3DParams::default()
    }
}

fn check_edge(edge: usize, s: f64) -> Result<(), NormError> {
    if !(1..=4).contains(&edge) {
        return Err(NormError::BadEdge(edge));
    }
    if !(-1.0..=1.0).contains(&s) {
        return Err(NormError::BadEdgeParam(s));
    }
    Ok(())
}

/// Which triangle of the square a planar direction falls in, the edge
/// parameter of that direction, and the max-coordinate `ρ`.
///
/// Ties on the diagonals go to the lower edge index. `(a, b)` must not be
/// the origin.
pub(crate) fn locate(a: f64, b: f64) -> (usize, f64, f64) {
    if b >= a.abs() {
        (1, a / b, b)
    } else if a >= b.abs() {
        (2, -b / a, a)
    } else if -b >= a.abs() {
        (3, a / b, -b)
    } else {
        (4, -b / a, -a)
    }
}

/// Height of the upper surface of the custom unit ball above `(x, y)`.
pub fn example_surface_height(x: f64, y: f64, params: &Custom3DParams) -> Result<f64, NormError> {
    if !(x.is_finite() && y.is_finite()) || x.abs() > 1.0 || y.abs() > 1.0 {
        return Err(NormError::OutsideSquare { x, y });
    }
    if x == 0.0 && y == 0.0 {
        return Ok(1.0);
    }
    let (edge, s, rho) = locate(x, y);
    Ok(1.0 - rho.powf(params.alpha_raw(edge, s)))
}

/// Steepness `|z′|` with which the surface leaves the equator at parameter
/// `s` of `edge`, measured along the ray towards the apex. Equals `β(s)`.
pub fn edge_tangent_slope(edge: usize, s: f64, params: &Custom3DParams) -> Result<f64, NormError> {
    params.beta(edge, s)
}

/// The point on the square's boundary at parameter `s` of `edge`.
pub fn edge_point(edge: usize, s: f64) -> Result<[f64; 2], NormError> {
    check_edge(edge, s)?;
    Ok(match edge {
        1 => [s, 1.0],
        2 => [1.0, -s],
        3 => [-s, -1.0],
        _ => [-1.0, s],
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    Lp(f64),
    Linf,
    Custom3D(Custom3DParams),
}

/// A concrete norm on ℝᵈ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormSpec {
    kind: NormKind,
    dim: usize,
}

impl NormSpec {
    pub fn lp(p: f64, dim: usize) -> Result<Self, NormError> {
        if !p.is_finite() || p < 1.0 {
            return Err(NormError::Invalid(format!("p = {p} must be finite and >= 1")));
        }
        Self::with_dim(NormKind::Lp(p), dim)
    }

    pub fn linf(dim: usize) -> Result<Self, NormError> {
        Self::with_dim(NormKind::Linf, dim)
    }

    pub fn euclidean(dim: usize) -> Result<Self, NormError> {
        Self::lp(2.0, dim)
    }

    pub fn custom3d(params: Custom3DParams) -> Self {
        NormSpec {
            kind: NormKind::Custom3D(params),
            dim: 3,
        }
    }

    fn with_dim(kind: NormKind, dim: usize) -> Result<Self, NormError> {
        if dim == 0 {
            return Err(NormError::Invalid("dimension must be >= 1".into()));
        }
        Ok(NormSpec { kind, dim })
    }

    /// Parses `l<p>` (`l1`, `l1.5`, `l2`, ...), `linf`, `custom3d` or
    /// `custom3d:c1,c2,c3,c4`.
    pub fn parse(name: &str, dim: usize) -> Result<Self, NormError> {
        let name = name.trim();
        if name == "linf" {
            return Self::linf(dim);
        }
        if let Some(rest) = name.strip_prefix("custom3d") {
            let params = if rest.is_empty() {
                Custom3DParams::default()
            } else if let Some(list) = rest.strip_prefix(':') {
                Custom3DParams::new(parse_corners(list)?)?
            } else {
                return Err(NormError::Invalid(format!("unknown norm name `{name}`")));
            };
            if dim != 3 {
                return Err(NormError::Invalid(format!(
                    "custom3d is three-dimensional, got dim = {dim}"
                )));
            }
            return Ok(Self::custom3d(params));
        }
        if let Some(p) = name.strip_prefix('l') {
            let p: f64 = p
                .parse()
                .map_err(|_| NormError::Invalid(format!("unknown norm name `{name}`")))?;
            return Self::lp(p, dim);
        }
        Err(NormError::Invalid(format!("unknown norm name `{name}`")))
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn custom_params(&self) -> Option<&Custom3DParams> {
        match &self.kind {
            NormKind::Custom3D(p) => Some(p),
            _ => None,
        }
    }

    /// Whether the unit ball is known to be strictly convex.
    pub fn is_strictly_convex(&self) -> bool {
        matches!(self.kind, NormKind::Lp(p) if p > 1.0) || (self.dim == 1 && !self.is_custom())
    }

    pub fn is_custom(&self) -> bool {
        matches!(self.kind, NormKind::Custom3D(_))
    }

    /// Half-widths `b_j` of an axis box containing the unit ball.
    pub fn outer_box(&self) -> Vec<f64> {
        match self.kind {
            NormKind::Custom3D(_) => vec![SQRT_2, SQRT_2, 1.0],
            _ => vec![1.0; self.dim],
        }
    }

    /// Smallest `K` with `‖v‖ ≤ K·‖v‖_∞`.
    pub fn sup_over_cube(&self) -> f64 {
        match self.kind {
            NormKind::Lp(p) => (self.dim as f64).powf(1.0 / p),
            NormKind::Linf => 1.0,
            // The cube [-1/2, 1/2]^3 sits inside the custom ball since α ≥ 1.
            NormKind::Custom3D(_) => 2.0,
        }
    }

    fn check(&self, v: &[f64]) -> Result<(), NormError> {
        if v.len() != self.dim {
            return Err(NormError::DimensionMismatch {
                expected: self.dim,
                got: v.len(),
            });
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(NormError::NonFinite);
        }
        Ok(())
    }

    /// `‖v‖`.
    pub fn norm(&self, v: &[f64]) -> Result<f64, NormError> {
        self.check(v)?;
        Ok(self.norm_unchecked(v))
    }

    /// `‖v‖` without dimension or finiteness checks.
    #[inline]
    pub fn norm_unchecked(&self, v: &[f64]) -> f64 {
        match self.kind {
            NormKind::Lp(p) => lp_norm(v, p),
            NormKind::Linf => v.iter().fold(0.0, |m, c| m.max(c.abs())),
            NormKind::Custom3D(ref params) => custom_gauge(params, v[0], v[1], v[2]),
        }
    }

    /// `‖a − b‖` for slices of this norm's dimension.
    #[inline]
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self.kind {
            NormKind::Lp(2.0) => {
                let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                if s.is_finite() && s > f64::MIN_POSITIVE {
                    s.sqrt()
                } else {
                    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                    lp_norm(&d, 2.0)
                }
            }
            NormKind::Lp(1.0) => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
            NormKind::Linf => a
                .iter()
                .zip(b)
                .fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            NormKind::Custom3D(ref params) => {
                custom_gauge(params, a[0] - b[0], a[1] - b[1], a[2] - b[2])
            }
            NormKind::Lp(p) => {
                let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
                lp_norm(&d, p)
            }
        }
    }

    /// The scalar `λ > 0` with `‖λ·v‖ = 1`.
    pub fn boundary_scale(&self, v: &[f64]) -> Result<f64, NormError> {
        self.check(v)?;
        let n = self.norm_unchecked(v);
        if n == 0.0 {
            return Err(NormError::ZeroVector);
        }
        Ok(1.0 / n)
    }

    /// `v / ‖v‖`.
    pub fn normalize(&self, v: &[f64]) -> Result<Vector, NormError> {
        self.check(v)?;
        let n = self.norm_unchecked(v);
        if n == 0.0 {
            return Err(NormError::ZeroVector);
        }
        Ok(Vector::new(v.iter().map(|c| c / n).collect()))
    }

    /// `count` random points of the unit sphere: Gaussian directions pushed
    /// to the boundary by the gauge.
    pub fn sample_unit_sphere<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Vec<Vector> {
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let v: Vec<f64> = (0..self.dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = self.norm_unchecked(&v);
            if n < 1e-12 {
                continue;
            }
            out.push(Vector::new(v.iter().map(|c| c / n).collect()));
        }
        out
    }

    /// Canonical name as accepted by [`NormSpec::parse`].
    pub fn name(&self) -> String {
        match self.kind {
            NormKind::Lp(p) => format!("l{p}"),
            NormKind::Linf => "linf".to_string(),
            NormKind::Custom3D(ref params) if params.is_default() => "custom3d".to_string(),
            NormKind::Custom3D(ref params) => {
                let c = params.corners();
                format!("custom3d:{},{},{},{}", c[0], c[1], c[2], c[3])
            }
        }
    }
}

impl fmt::Display for NormSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (dim {})", self.name(), self.dim)
    }
}

pub fn parse_corners(list: &str) -> Result<[f64; 4], NormError> {
    let vals: Vec<f64> = list
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| NormError::Invalid(format!("bad beta list `{list}`")))?;
    vals.try_into()
        .map_err(|_| NormError::Invalid(format!("beta list `{list}` must have four values")))
}

fn lp_norm(v: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return v.iter().map(|c| c.abs()).sum();
    }
    if p == 2.0 {
        let s: f64 = v.iter().map(|c| c * c).sum();
        if s.is_finite() && s > f64::MIN_POSITIVE {
            return s.sqrt();
        }
    }
    let m = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|c| (c.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

/// Gauge of the custom body at `(a, b, c)`.
///
/// Along a ray the edge parameter is fixed, so membership of `λ·(a, b, c)`
/// reduces to `λc ≤ 1 − (λm)^α`, which is monotone in `λ`. The root is
/// bracketed in `[1/(2M), 1/M]`, `M = max(m, c)`, and bisected to adjacent
/// floats.
fn custom_gauge(params: &Custom3DParams, a: f64, b: f64, c: f64) -> f64 {
    let (a, b, c) = if c < 0.0 { (-a, -b, -c) } else { (a, b, c) };
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        return c;
    }
    if c == 0.0 {
        return m;
    }
    let (edge, s, _) = locate(a, b);
    let alpha = params.alpha_raw(edge, s);
    let inside = |lambda: f64| lambda * c <= 1.0 - (lambda * m).powf(alpha);

    let mut hi = 1.0 / m.max(c);
    let mut lo = 0.5 * hi;
    debug_assert!(inside(lo) && !inside(hi));
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if inside(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    1.0 / lo
}
