//! Searching for separating perturbations of pairs of unit vectors.
//!
//! Given distinct unit vectors `x`, `y` and `δ > 0`, a witness is a `z` with
//! `‖z‖ < δ` such that exactly one of `x + z`, `y + z` leaves the closed unit
//! ball while the other enters its interior. Absence of a witness is only
//! certified for pairs on a common facet of the ℓ_∞ ball; everywhere else a
//! failed search is reported as evidence, not proof.

use std::collections::BTreeMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norms::{example_surface_height, locate, NormError, NormKind, NormSpec, GAUGE_TOL};
use crate::vector::Vector;

/// Minimum distance from 1 required of both perturbed norms.
pub const SEPARATION_TOL: f64 = 1e-10;

/// Step used for the numerical surface slope at the equator.
const SLOPE_STEP: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SprimeError {
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("{which} is not a unit vector: norm {norm}")]
    NotUnit { which: &'static str, norm: f64 },
    #[error("x and y must be distinct")]
    SamePoint,
    #[error("delta must be positive and finite, got {0}")]
    BadDelta(f64),
    #[error("facet pairs need the max norm, got {0}")]
    FacetPairsNeedLinf(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    /// `z = ±t·(y − x)/‖y − x‖`.
    Segment,
    /// For two points on the same flat equator edge of the custom ball:
    /// `z` almost parallel to one point's tangent towards the apex.
    Tangent,
    /// Random directions with magnitudes on a geometric ladder below `δ`.
    Random,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Segment, Strategy::Tangent, Strategy::Random];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Segment => "segment",
            Strategy::Tangent => "tangent",
            Strategy::Random => "random",
        }
    }

    pub fn parse(s: &str) -> Option<Strategy> {
        Strategy::ALL.into_iter().find(|st| st.name() == s)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub x: Vector,
    pub y: Vector,
    pub z: Vector,
    pub delta: f64,
    pub norm_x_after: f64,
    pub norm_y_after: f64,
    pub strategy: Strategy,
}

impl Witness {
    /// Whether `x + z` is the one pushed outside.
    pub fn x_exits(&self) -> bool {
        self.norm_x_after > 1.0
    }

    /// Re-evaluates every defining inequality from scratch.
    pub fn revalidate(&self, spec: &NormSpec) -> Result<(), String> {
        let nz = spec.norm(&self.z).map_err(|e| e.to_string())?;
        if !(nz < self.delta) {
            return Err(format!("‖z‖ = {nz} is not below delta = {}", self.delta));
        }
        let nx = spec.norm(&self.x.add(&self.z)).map_err(|e| e.to_string())?;
        let ny = spec.norm(&self.y.add(&self.z)).map_err(|e| e.to_string())?;
        if (nx - self.norm_x_after).abs() > GAUGE_TOL || (ny - self.norm_y_after).abs() > GAUGE_TOL {
            return Err(format!(
                "recorded norms ({}, {}) differ from recomputed ({nx}, {ny})",
                self.norm_x_after, self.norm_y_after
            ));
        }
        if separation(nx, ny) < SEPARATION_TOL {
            return Err(format!("norms ({nx}, {ny}) are not separated around 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NotFound {
    pub attempts: usize,
    /// Largest `separation` seen; positive values were below the margin.
    pub best_separation: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum WitnessOutcome {
    Found(Witness),
    NotFound(NotFound),
}

impl WitnessOutcome {
    pub fn witness(&self) -> Option<&Witness> {
        match self {
            WitnessOutcome::Found(w) => Some(w),
            WitnessOutcome::NotFound(_) => None,
        }
    }
}

/// `min(a − 1, 1 − b)` for the better of the two orientations.
fn separation(nx: f64, ny: f64) -> f64 {
    (nx - 1.0).min(1.0 - ny).max((ny - 1.0).min(1.0 - nx))
}

struct Search<'a> {
    spec: &'a NormSpec,
    x: &'a [f64],
    y: &'a [f64],
    delta: f64,
    budget: usize,
    attempts: usize,
    best: f64,
}

impl Search<'_> {
    fn exhausted(&self) -> bool {
        self.attempts >= self.budget
    }

    fn try_z(&mut self, z: Vec<f64>, strategy: Strategy) -> Option<Witness> {
        if self.exhausted() {
            return None;
        }
        self.attempts += 1;
        let spec = self.spec;
        if !(spec.norm_unchecked(&z) < self.delta) {
            return None;
        }
        let xz: Vec<f64> = self.x.iter().zip(&z).map(|(a, b)| a + b).collect();
        let yz: Vec<f64> = self.y.iter().zip(&z).map(|(a, b)| a + b).collect();
        let nx = spec.norm_unchecked(&xz);
        let ny = spec.norm_unchecked(&yz);
        let sep = separation(nx, ny);
        self.best = self.best.max(sep);
        (sep >= SEPARATION_TOL).then(|| Witness {
            x: Vector::from(self.x),
            y: Vector::from(self.y),
            z: Vector::new(z),
            delta: self.delta,
            norm_x_after: nx,
            norm_y_after: ny,
            strategy,
        })
    }

    fn segment(&mut self) -> Option<Witness> {
        let diff: Vec<f64> = self.y.iter().zip(self.x).map(|(a, b)| a - b).collect();
        let len = self.spec.norm_unchecked(&diff);
        let dir: Vec<f64> = diff.iter().map(|c| c / len).collect();
        let mut t = 0.9 * self.delta.min(len);
        for _ in 0..60 {
            for sign in [1.0, -1.0] {
                let z = dir.iter().map(|c| sign * t * c).collect();
                if let Some(w) = self.try_z(z, Strategy::Segment) {
                    return Some(w);
                }
            }
            t *= 0.5;
        }
        None
    }

    fn tangent(&mut self) -> Option<Witness> {
        let NormKind::Custom3D(params) = self.spec.kind() else {
            return None;
        };
        let on_equator = |p: &[f64]| p[2].abs() <= GAUGE_TOL && p[0].abs().max(p[1].abs()) > 0.0;
        if !(on_equator(self.x) && on_equator(self.y)) {
            return None;
        }
        let (ex, ..) = locate(self.x[0], self.x[1]);
        let (ey, ..) = locate(self.y[0], self.y[1]);
        if ex != ey {
            return None;
        }

        let anchors = [self.x.to_vec(), self.y.to_vec()];
        let mut candidates = Vec::new();
        for anchor in &anchors {
            let len = anchor[0].hypot(anchor[1]);
            let inward = [-anchor[0] / len, -anchor[1] / len];
            let f = 1.0 - SLOPE_STEP / len;
            // Upper surface, and the reflected lower surface below the anchor.
            let up = example_surface_height(anchor[0] * f, anchor[1] * f, params).ok()?;
            let down = example_surface_height(-anchor[0] * f, -anchor[1] * f, params).ok()?;
            for slope in [up / SLOPE_STEP, -down / SLOPE_STEP] {
                candidates.push([inward[0], inward[1], slope]);
            }
        }

        let mut eps = 0.9 * self.delta;
        for _ in 0..40 {
            for xi in &candidates {
                for tilt in [0.01, 0.03, 0.1, 0.3] {
                    let dir = [xi[0], xi[1], xi[2] * (1.0 - tilt)];
                    let n = self.spec.norm_unchecked(&dir);
                    let z = dir.iter().map(|c| eps * c / n).collect();
                    if let Some(w) = self.try_z(z, Strategy::Tangent) {
                        return Some(w);
                    }
                }
            }
            eps *= 0.5;
        }
        None
    }

    fn random<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Option<Witness> {
        while !self.exhausted() {
            let dir = self.spec.sample_unit_sphere(rng, 1).pop()?;
            let mut t = 0.9 * self.delta;
            for _ in 0..24 {
                let z = dir.iter().map(|c| t * c).collect();
                if let Some(w) = self.try_z(z, Strategy::Random) {
                    return Some(w);
                }
                if self.exhausted() {
                    return None;
                }
                t *= 0.5;
            }
        }
        None
    }
}

/// Tries `strategies` in order until one yields a validated witness or the
/// total number of evaluated perturbations reaches `budget`.
pub fn find_witness<R: Rng + ?Sized>(
    spec: &NormSpec,
    x: &[f64],
    y: &[f64],
    delta: f64,
    strategies: &[Strategy],
    budget: usize,
    rng: &mut R,
) -> Result<WitnessOutcome, SprimeError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SprimeError::BadDelta(delta));
    }
    for (which, v) in [("x", x), ("y", y)] {
        let norm = spec.norm(v)?;
        if (norm - 1.0).abs() > GAUGE_TOL {
            return Err(SprimeError::NotUnit { which, norm });
        }
    }
    if x == y {
        return Err(SprimeError::SamePoint);
    }

    let mut search = Search {
        spec,
        x,
        y,
        delta,
        budget,
        attempts: 0,
        best: f64::NEG_INFINITY,
    };
    for &strategy in strategies {
        let found = match strategy {
            Strategy::Segment => search.segment(),
            Strategy::Tangent => search.tangent(),
            Strategy::Random => search.random(rng),
        };
        if let Some(w) = found {
            debug_assert!(w.revalidate(spec).is_ok());
            return Ok(WitnessOutcome::Found(w));
        }
        if search.exhausted() {
            break;
        }
    }
    Ok(WitnessOutcome::NotFound(NotFound {
        attempts: search.attempts,
        best_separation: search.best,
    }))
}

/// Proof that no witness of norm below `delta_star` exists for a pair on a
/// common facet of the ℓ_∞ ball.
///
/// With every off-axis coordinate of `x` and `y` at most `1 − δ*` in
/// modulus, `‖x + z‖_∞ > 1` holds iff `sign·z_axis > 0`, and likewise for
/// `y`, whenever `‖z‖_∞ < δ*`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImpossibilityCertificate {
    pub axis: usize,
    pub sign: f64,
    pub delta_star: f64,
}

impl ImpossibilityCertificate {
    pub fn covers(&self, delta: f64) -> bool {
        delta > 0.0 && delta <= self.delta_star
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FacetCheck {
    Certified(ImpossibilityCertificate),
    NotApplicable(String),
}

impl FacetCheck {
    pub fn certificate(&self) -> Option<&ImpossibilityCertificate> {
        match self {
            FacetCheck::Certified(c) => Some(c),
            FacetCheck::NotApplicable(_) => None,
        }
    }
}

/// The facet certificate for `x`, `y`, regardless of any particular `δ`.
pub fn linf_facet_bound(x: &[f64], y: &[f64]) -> FacetCheck {
    let na = |why: &str| FacetCheck::NotApplicable(why.to_string());
    if x.len() != y.len() || x.is_empty() {
        return na("dimension mismatch");
    }
    if x == y {
        return na("x and y coincide");
    }
    let unit = |v: &[f64]| v.iter().fold(0.0f64, |m, c| m.max(c.abs())) == 1.0;
    if !(unit(x) && unit(y)) {
        return na("not unit vectors of the max norm");
    }
    let shared: Vec<usize> = (0..x.len())
        .filter(|&j| x[j].abs() == 1.0 && x[j] == y[j])
        .collect();
    let [axis] = shared[..] else {
        return if shared.is_empty() {
            na("no common facet")
        } else {
            na("pair lies on a lower-dimensional face")
        };
    };
    let mut delta_star = f64::INFINITY;
    for i in (0..x.len()).filter(|&i| i != axis) {
        let m = x[i].abs().max(y[i].abs());
        if m >= 1.0 {
            return na("an off-axis coordinate has modulus 1");
        }
        delta_star = delta_star.min(1.0 - m);
    }
    FacetCheck::Certified(ImpossibilityCertificate {
        axis,
        sign: x[axis],
        delta_star,
    })
}

/// Certificate that `(x, y)` admits no witness at this `delta`.
pub fn certify_no_witness_linf(x: &[f64], y: &[f64], delta: f64) -> FacetCheck {
    match linf_facet_bound(x, y) {
        FacetCheck::Certified(c) if !c.covers(delta) => FacetCheck::NotApplicable(format!(
            "delta {delta} exceeds the facet bound {}",
            c.delta_star
        )),
        other => other,
    }
}

/// Where scan and probe pairs come from.
#[derive(Clone, Debug, PartialEq)]
pub enum PairSource {
    /// Independent random unit vectors.
    Random { count: usize },
    /// Pairs on a random facet of the ℓ_∞ ball whose off-axis coordinates
    /// stay within `1 − δ` in modulus.
    Facet { count: usize },
    /// Pairs on the flat square of the custom ball, both on one edge.
    EquatorEdge { count: usize },
    Explicit(Vec<(Vector, Vector)>),
}

/// Materializes `source`; randomness comes from stream 0 of `seed`.
pub fn generate_pairs(
    spec: &NormSpec,
    source: &PairSource,
    delta: f64,
    seed: u64,
) -> Result<Vec<(Vector, Vector)>, SprimeError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.dim();
    Ok(match source {
        PairSource::Explicit(v) => v.clone(),
        PairSource::Random { count } => (0..*count)
            .map(|_| {
                let mut v = spec.sample_unit_sphere(&mut rng, 2);
                let y = v.pop().unwrap();
                (v.pop().unwrap(), y)
            })
            .collect(),
        PairSource::Facet { count } => {
            if !matches!(spec.kind(), NormKind::Linf) {
                return Err(SprimeError::FacetPairsNeedLinf(spec.name()));
            }
            let bound = (1.0 - delta).clamp(0.0, 1.0 - 1e-9);
            (0..*count)
                .map(|_| {
                    let axis = rng.random_range(0..dim);
                    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    let mut draw = || -> Vector {
                        let mut v: Vec<f64> =
                            (0..dim).map(|_| rng.random_range(-bound..=bound)).collect();
                        v[axis] = sign;
                        Vector::new(v)
                    };
                    let x = draw();
                    let y = draw();
                    (x, y)
                })
                .collect()
        }
        PairSource::EquatorEdge { count } => {
            if !spec.is_custom() {
                return Err(SprimeError::Norm(NormError::Invalid(
                    "equator pairs need the custom3d norm".into(),
                )));
            }
            (0..*count)
                .map(|_| {
                    let edge = rng.random_range(1..=4usize);
                    let s1: f64 = rng.random_range(-0.95..0.95);
                    let s2: f64 = rng.random_range(-0.95..0.95);
                    let p = |s: f64| {
                        let e = crate::norms::edge_point(edge, s).unwrap();
                        Vector::new(vec![e[0], e[1], 0.0])
                    };
                    (p(s1), p(s2))
                })
                .collect()
        }
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub x_out: usize,
    pub y_out: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub total: usize,
    pub witnessed: usize,
    pub not_found: usize,
    pub certified_impossible: usize,
    pub strategies: BTreeMap<String, usize>,
    pub orientation: Orientation,
}

/// Per-pair RNG: stream `index + 1` of `seed`.
fn pair_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Runs the witness search over every pair of `source`.
///
/// For the max norm, facet pairs are certified first and not searched.
/// Every found witness is re-validated before it is counted.
pub fn sprime_scan(
    spec: &NormSpec,
    source: &PairSource,
    delta: f64,
    strategies: &[Strategy],
    budget: usize,
    seed: u64,
) -> Result<ScanReport, SprimeError> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(SprimeError::BadDelta(delta));
    }
    let pairs = generate_pairs(spec, source, delta, seed)?;
    let mut report = ScanReport {
        total: pairs.len(),
        strategies: strategies.iter().map(|s| (s.name().to_string(), 0)).collect(),
        ..Default::default()
    };
    for (i, (x, y)) in pairs.iter().enumerate() {
        if matches!(spec.kind(), NormKind::Linf) {
            if let FacetCheck::Certified(_) = certify_no_witness_linf(x, y, delta) {
                report.certified_impossible += 1;
                continue;
            }
        }
        let mut rng = pair_rng(seed, i);
        match find_witness(spec, x, y, delta, strategies, budget, &mut rng)? {
            WitnessOutcome::Found(w) if w.revalidate(spec).is_ok() => {
                report.witnessed += 1;
                *report.strategies.entry(w.strategy.name().to_string()).or_default() += 1;
                if w.x_exits() {
                    report.orientation.x_out += 1;
                } else {
                    report.orientation.y_out += 1;
                }
            }
            _ => report.not_found += 1,
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub trials: usize,
    /// Pairs with `‖(x + y)/2‖ ≥ 1 − τ`.
    pub flagged: usize,
    /// Flagged pairs whose midpoint is on the sphere (a flat segment).
    pub flat: usize,
    /// Flagged pairs whose midpoint is outside the ball (non-convexity).
    pub outside: usize,
    pub flagged_indices: Vec<usize>,
}

/// Flags pairs whose midpoint fails to enter the open unit ball.
pub fn probe_pairs(spec: &NormSpec, pairs: &[(Vector, Vector)]) -> ConvexityReport {
    let mut report = ConvexityReport {
        trials: pairs.len(),
        ..Default::default()
    };
    for (i, (x, y)) in pairs.iter().enumerate() {
        if x == y {
            continue;
        }
        let mid: Vec<f64> = x.iter().zip(y.iter()).map(|(a, b)| 0.5 * (a + b)).collect();
        let m = spec.norm_unchecked(&mid);
        if m >= 1.0 - GAUGE_TOL {
            report.flagged += 1;
            report.flagged_indices.push(i);
            if m > 1.0 + GAUGE_TOL {
                report.outside += 1;
            } else {
                report.flat += 1;
            }
        }
    }
    report
}

/// [`probe_pairs`] over `trials` random unit pairs.
pub fn strict_convexity_probe(spec: &NormSpec, trials: usize, seed: u64) -> ConvexityReport {
    let pairs = generate_pairs(spec, &PairSource::Random { count: trials }, 0.0, seed)
        .expect("random pairs are always available");
    probe_pairs(spec, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::Custom3DParams;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn euclidean_segment_witness() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let out = find_witness(&l2, &[1.0, 0.0], &[0.0, 1.0], 0.1, &Strategy::ALL, 1000, &mut rng())
            .unwrap();
        let w = out.witness().expect("witness");
        assert_eq!(w.strategy, Strategy::Segment);
        w.revalidate(&l2).unwrap();
    }

    #[test]
    fn linf_facet_pair_has_no_witness() {
        let linf = NormSpec::linf(2).unwrap();
        let out = find_witness(&linf, &[1.0, 0.0], &[1.0, 0.5], 0.4, &Strategy::ALL, 5000, &mut rng())
            .unwrap();
        assert!(matches!(out, WitnessOutcome::NotFound(NotFound { attempts: 5000, .. })));
    }

    #[test]
    fn custom_equator_tangent_witnesses() {
        let c = NormSpec::custom3d(Custom3DParams::default());
        for (x1, x2) in [(-0.1, 0.3), (-0.5, -0.1), (0.0, 0.4)] {
            let x = c.normalize(&[x1, 1.0, 0.0]).unwrap();
            let y = c.normalize(&[x2, 1.0, 0.0]).unwrap();
            let out = find_witness(&c, &x, &y, 0.05, &[Strategy::Tangent], 10_000, &mut rng())
                .unwrap();
            let w = out.witness().unwrap_or_else(|| panic!("no witness for {x1}, {x2}: {out:?}"));
            w.revalidate(&c).unwrap();
        }
    }

    #[test]
    fn precondition_errors() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let mut r = rng();
        assert!(matches!(
            find_witness(&l2, &[2.0, 0.0], &[0.0, 1.0], 0.1, &Strategy::ALL, 10, &mut r),
            Err(SprimeError::NotUnit { which: "x", .. })
        ));
        assert_eq!(
            find_witness(&l2, &[1.0, 0.0], &[1.0, 0.0], 0.1, &Strategy::ALL, 10, &mut r),
            Err(SprimeError::SamePoint)
        );
        assert_eq!(
            find_witness(&l2, &[1.0, 0.0], &[0.0, 1.0], 0.0, &Strategy::ALL, 10, &mut r),
            Err(SprimeError::BadDelta(0.0))
        );
    }

    #[test]
    fn facet_certificates() {
        let c = linf_facet_bound(&[1.0, 0.0], &[1.0, 0.5]);
        let cert = c.certificate().unwrap();
        assert_eq!(cert.delta_star, 0.5);
        assert_eq!(cert.axis, 0);
        assert!(cert.covers(0.5) && !cert.covers(0.51));

        let c = linf_facet_bound(&[1.0, 0.9], &[1.0, -0.9]);
        assert!((c.certificate().unwrap().delta_star - 0.1).abs() < 1e-15);

        assert!(matches!(linf_facet_bound(&[1.0, 0.0], &[0.0, 1.0]), FacetCheck::NotApplicable(_)));
        assert!(matches!(linf_facet_bound(&[1.0, 1.0], &[1.0, 0.0]), FacetCheck::NotApplicable(_)));
        assert!(matches!(
            certify_no_witness_linf(&[1.0, 0.0], &[1.0, 0.5], 0.6),
            FacetCheck::NotApplicable(_)
        ));
        assert!(certify_no_witness_linf(&[-1.0, 0.2, 0.1], &[-1.0, -0.3, 0.0], 0.7)
            .certificate()
            .is_some());
    }

    #[test]
    fn scan_examples() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let r = sprime_scan(&l2, &PairSource::Random { count: 100 }, 0.1, &Strategy::ALL, 2000, 3)
            .unwrap();
        assert_eq!((r.total, r.witnessed), (100, 100));
        assert_eq!(r.orientation.x_out + r.orientation.y_out, 100);

        let linf = NormSpec::linf(2).unwrap();
        let r = sprime_scan(&linf, &PairSource::Facet { count: 30 }, 0.4, &Strategy::ALL, 100, 3)
            .unwrap();
        assert_eq!(r.certified_impossible, 30);

        let r = sprime_scan(&l2, &PairSource::Explicit(vec![]), 0.1, &Strategy::ALL, 10, 3).unwrap();
        assert_eq!(r.total, 0);
        assert_eq!(r.witnessed + r.not_found + r.certified_impossible, 0);

        assert!(sprime_scan(&l2, &PairSource::Facet { count: 1 }, 0.1, &Strategy::ALL, 10, 3).is_err());
    }

    #[test]
    fn scans_are_deterministic() {
        let c = NormSpec::custom3d(Custom3DParams::default());
        let run = || {
            sprime_scan(&c, &PairSource::Random { count: 20 }, 0.05, &[Strategy::Random], 500, 9)
                .unwrap()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn convexity_probe() {
        let l2 = NormSpec::euclidean(3).unwrap();
        assert_eq!(strict_convexity_probe(&l2, 10_000, 4).flagged, 0);

        let linf = NormSpec::linf(2).unwrap();
        let pairs = generate_pairs(&linf, &PairSource::Facet { count: 20 }, 0.1, 2).unwrap();
        let r = probe_pairs(&linf, &pairs);
        assert_eq!((r.flagged, r.flat), (20, 20));

        let c = NormSpec::custom3d(Custom3DParams::default());
        let pairs = generate_pairs(&c, &PairSource::EquatorEdge { count: 20 }, 0.1, 2).unwrap();
        assert_eq!(probe_pairs(&c, &pairs).flat, 20);
    }
}
