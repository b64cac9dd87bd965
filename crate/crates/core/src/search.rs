//! Balls containing exactly `n` points.
//!
//! Two finders are provided. [`find_ball_sorted`] takes the `n` nearest
//! points of a (perturbed) center and puts the radius halfway to the next
//! one. [`find_ball_growth`] grows a ball from a given center, absorbing
//! whole boundary shells while the count stays at most `n`, and splits an
//! overshooting shell by nudging the center along a separating
//! perturbation of two shell directions.
//!
//! Both return a [`BallCertificate`] that has already passed
//! [`validate_certificate`], a linear-scan recount independent of the grid
//! index.

use std::collections::BTreeSet;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::norms::NormSpec;
use crate::pointset::{count_in_ball_scan, BallMode, IndexedPointSet, PointSetError};
use crate::sprime::{find_witness, Strategy, Witness, WitnessOutcome};
use crate::vector::Vector;

/// Shell points considered when choosing pairs to split.
const MAX_PAIR_POINTS: usize = 12;

/// Allowed disagreement between recorded and recomputed margins.
const MARGIN_SLACK: f64 = 1e-9;

/// Called with two unit vectors and `δ`; returns a witness if one is found.
pub type WitnessFinder<'a> = dyn FnMut(&[f64], &[f64], f64) -> Option<Witness> + 'a;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Relative thickness of a boundary shell.
    pub tau_shell: f64,
    /// Relative gap required between the `n`-th and `(n+1)`-th distance.
    pub tau_tie: f64,
    /// Initial witness size, as a fraction of the ball radius.
    pub delta_witness: f64,
    pub shrink: f64,
    pub max_shrink_rounds: usize,
    /// Split budget for the growth finder.
    pub max_iterations: usize,
    /// Center perturbations tried by the sorted finder.
    pub tie_attempts: usize,
    /// Perturbations evaluated per witness search.
    pub witness_budget: usize,
    pub seed: u64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            tau_shell: 1e-9,
            tau_tie: 1e-9,
            delta_witness: 0.05,
            shrink: 0.5,
            max_shrink_rounds: 20,
            max_iterations: 64,
            tie_attempts: 64,
            witness_budget: 2000,
            seed: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let positive = [
            ("tau_shell", self.tau_shell),
            ("tau_tie", self.tau_tie),
            ("delta_witness", self.delta_witness),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(SearchError::BadConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(SearchError::BadConfig(format!(
                "shrink must lie in (0, 1), got {}",
                self.shrink
            )));
        }
        let counts = [
            ("max_shrink_rounds", self.max_shrink_rounds),
            ("max_iterations", self.max_iterations),
            ("tie_attempts", self.tie_attempts),
            ("witness_budget", self.witness_budget),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(SearchError::BadConfig(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Sorted,
    Growth,
}

impl Method {
    pub fn parse(s: &str) -> Option<Method> {
        match s {
            "sorted" => Some(Method::Sorted),
            "growth" => Some(Method::Growth),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sorted => "sorted",
            Method::Growth => "growth",
        })
    }
}

/// One count increase of the growth finder.
///
/// A phase is a run of steps sharing one center; `scale` is the radius
/// relative to the phase's starting radius and strictly increases within
/// a phase.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchStep {
    pub phase: usize,
    pub center: Vector,
    pub scale: f64,
    pub radius: f64,
    pub count: usize,
    pub shell_ids: Vec<usize>,
    pub inside_ids: Vec<usize>,
    /// Present when the step starts a phase by splitting a shell.
    pub witness: Option<Witness>,
    /// Splits performed so far, including ones that overshot and were
    /// rolled back.
    pub splits: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallCertificate {
    pub center: Vector,
    pub radius: f64,
    pub n: usize,
    pub inside_ids: Vec<usize>,
    pub margin_in: f64,
    pub margin_out: f64,
    pub method: Method,
    pub trace: Vec<SearchStep>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Margins {
    pub margin_in: f64,
    pub margin_out: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct CertificateFailure {
    pub reasons: Vec<String>,
    pub offending_ids: Vec<usize>,
}

impl fmt::Display for CertificateFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.reasons.join("; "))?;
        if !self.offending_ids.is_empty() {
            write!(f, " (offending ids {:?})", self.offending_ids)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("n must be at least 1")]
    BadN,
    #[error("invalid search configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    PointSet(#[from] PointSetError),
    #[error("no point lies beyond radius {radius} within the horizon")]
    NoPointsBeyond { radius: f64 },
    #[error("a shell of {0} point(s) cannot be split")]
    ShellTooSmall(usize),
    #[error("no separating perturbation found for shell {shell:?}")]
    WitnessExhausted { shell: Vec<usize> },
    #[error("could not separate distance {n} from distance {} after {attempts} perturbations", n + 1)]
    TieUnresolved { n: usize, attempts: usize },
    #[error("split budget of {budget} exhausted with {count} point(s) inside")]
    BudgetExhausted {
        budget: usize,
        count: usize,
        trace: Vec<SearchStep>,
    },
    #[error("certificate failed validation: {0}")]
    Invalid(CertificateFailure),
}

impl SearchError {
    /// True for failures caused by running out of a search budget.
    pub fn is_budget(&self) -> bool {
        matches!(
            self,
            SearchError::BudgetExhausted { .. }
                | SearchError::TieUnresolved { .. }
                | SearchError::WitnessExhausted { .. }
        )
    }

    /// True for failures caused by the horizon of the point set.
    pub fn is_horizon(&self) -> bool {
        matches!(
            self,
            SearchError::NoPointsBeyond { .. }
                | SearchError::PointSet(PointSetError::HorizonViolation { .. })
                | SearchError::PointSet(PointSetError::KExceedsRange { .. })
        )
    }
}

/// Recounts `cert` by linear scan and recomputes both margins.
pub fn validate_certificate(
    cert: &BallCertificate,
    ips: &IndexedPointSet,
    spec: &NormSpec,
) -> Result<Margins, CertificateFailure> {
    let mut fail = CertificateFailure::default();
    let ps = ips.point_set();
    if cert.n == 0 {
        fail.reasons.push("n is zero".into());
    }
    if !(cert.radius.is_finite() && cert.radius > 0.0) {
        fail.reasons.push(format!("radius {} is not positive", cert.radius));
    }
    if cert.center.dim() != ps.dim() || !cert.center.is_finite() {
        fail.reasons.push(format!("center {} is not a finite point of dimension {}", cert.center, ps.dim()));
    }
    if !fail.reasons.is_empty() {
        return Err(fail);
    }
    if cert.inside_ids.len() != cert.n {
        fail.reasons.push(format!(
            "{} inside ids listed for n = {}",
            cert.inside_ids.len(),
            cert.n
        ));
    }

    let scan = match count_in_ball_scan(ps, &cert.center, cert.radius, spec, BallMode::Open) {
        Ok(s) => s,
        Err(e) => {
            fail.reasons.push(e.to_string());
            return Err(fail);
        }
    };
    let listed: BTreeSet<usize> = cert.inside_ids.iter().copied().collect();
    if listed.len() != cert.inside_ids.len() {
        fail.reasons.push("inside ids contain duplicates".into());
    }
    let actual: BTreeSet<usize> = scan.ids.iter().copied().collect();
    if listed != actual {
        fail.reasons.push(format!(
            "recount finds {} point(s) inside, listed {}",
            actual.len(),
            listed.len()
        ));
        fail.offending_ids.extend(listed.symmetric_difference(&actual));
    }

    let mut margin_in = f64::INFINITY;
    let mut margin_out = f64::INFINITY;
    for (id, p) in ps.points().enumerate() {
        let d = spec.distance(p, &cert.center);
        if listed.contains(&id) {
            margin_in = margin_in.min(cert.radius - d);
        } else {
            margin_out = margin_out.min(d - cert.radius);
        }
    }
    if margin_out == f64::INFINITY {
        // Nothing listed lies outside; the horizon still bounds unlisted points.
        margin_out = ps.certified_reach(&cert.center, spec).unwrap_or(0.0) - cert.radius;
    }
    if !(margin_in > 0.0) {
        fail.reasons.push(format!("inside margin {margin_in} is not positive"));
    }
    if !(margin_out > 0.0) {
        fail.reasons.push(format!("outside margin {margin_out} is not positive"));
    }
    let slack = MARGIN_SLACK * cert.radius.max(1.0);
    if (cert.margin_in - margin_in).abs() > slack || (cert.margin_out - margin_out).abs() > slack {
        fail.reasons.push(format!(
            "recorded margins ({}, {}) differ from recomputed ({margin_in}, {margin_out})",
            cert.margin_in, cert.margin_out
        ));
    }
    if !fail.offending_ids.is_empty() {
        fail.offending_ids.sort_unstable();
    }
    if fail.reasons.is_empty() {
        Ok(Margins {
            margin_in,
            margin_out,
        })
    } else {
        for (id, p) in ps.points().enumerate() {
            let d = spec.distance(p, &cert.center);
            if d == cert.radius && !fail.offending_ids.contains(&id) {
                fail.offending_ids.push(id);
            }
        }
        Err(fail)
    }
}

/// Builds a certificate for the open ball `B(center, radius)` from the index
/// and checks it by linear scan.
fn certify(
    ips: &IndexedPointSet,
    spec: &NormSpec,
    center: Vector,
    radius: f64,
    n: usize,
    method: Method,
    trace: Vec<SearchStep>,
) -> Result<BallCertificate, SearchError> {
    let q = ips.count_in_ball(&center, radius, spec, BallMode::Open)?;
    let margin_in = q
        .ids
        .iter()
        .map(|&id| radius - spec.distance(ips.point(id), &center))
        .fold(f64::INFINITY, f64::min);
    let margin_out = match ips.next_shell(&center, spec, radius, 0.0)? {
        Some((d, _)) => d - radius,
        None => ips.certified_reach(&center, spec)? - radius,
    };
    let cert = BallCertificate {
        center,
        radius,
        n,
        inside_ids: q.ids,
        margin_in,
        margin_out,
        method,
        trace,
    };
    validate_certificate(&cert, ips, spec).map_err(SearchError::Invalid)?;
    Ok(cert)
}

/// Ball around the `n` nearest points of a center near `seed_center`.
///
/// The center is perturbed deterministically until the `n`-th and
/// `(n+1)`-th distances differ by more than `tau_tie` (relative to
/// `max(1, d)`).
pub fn find_ball_sorted(
    ips: &IndexedPointSet,
    spec: &NormSpec,
    seed_center: &[f64],
    n: usize,
    cfg: &SearchConfig,
) -> Result<BallCertificate, SearchError> {
    if n == 0 {
        return Err(SearchError::BadN);
    }
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut center = Vector::from(seed_center);
    for attempt in 0..cfg.tie_attempts {
        let d = ips.sorted_distances(&center, spec, n + 1)?;
        let (dn, dn1) = (d[n - 1].0, d[n].0);
        if dn1 - dn > cfg.tau_tie * dn1.max(1.0) {
            return certify(ips, spec, center, 0.5 * (dn + dn1), n, Method::Sorted, Vec::new());
        }
        // Jitter grows with each failed attempt, always from the seed.
        let amp = 1e-6 * dn1.max(1.0) * 2f64.powi(attempt.min(40) as i32);
        center = Vector::new(
            seed_center
                .iter()
                .map(|c| c + amp * rng.random_range(-1.0..1.0))
                .collect(),
        );
    }
    Err(SearchError::TieUnresolved {
        n,
        attempts: cfg.tie_attempts,
    })
}

/// Result of [`critical_scale`].
#[derive(Clone, Debug, PartialEq)]
pub struct CriticalScale {
    /// `d_next / r0`; infinite when `r0` is zero.
    pub scale: f64,
    /// `d_next`, the smallest distance beyond `r0`.
    pub radius: f64,
    /// Points at distance in `[d_next, d_next·(1 + tau_shell)]`, sorted.
    pub shell_ids: Vec<usize>,
    /// Points at distance at most `r0`, sorted.
    pub inside_ids: Vec<usize>,
    /// Largest distance among the shell points.
    pub shell_max: f64,
}

/// The next boundary shell met when the ball around `center` grows past `r0`.
pub fn critical_scale(
    ips: &IndexedPointSet,
    spec: &NormSpec,
    center: &[f64],
    r0: f64,
    cfg: &SearchConfig,
) -> Result<CriticalScale, SearchError> {
    let Some((d, mut shell_ids)) = ips.next_shell(center, spec, r0, cfg.tau_shell)? else {
        return Err(SearchError::NoPointsBeyond { radius: r0 });
    };
    shell_ids.sort_unstable();
    let shell_max = shell_ids
        .iter()
        .map(|&id| spec.distance(ips.point(id), center))
        .fold(d, f64::max);
    let mut inside_ids: Vec<usize> = ips.within(center, r0, spec)?.into_iter().map(|(_, id)| id).collect();
    inside_ids.sort_unstable();
    Ok(CriticalScale {
        scale: d / r0,
        radius: d,
        shell_ids,
        inside_ids,
        shell_max,
    })
}

/// Result of [`split_shell`].
#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub center: Vector,
    pub radius: f64,
    /// Points in the open ball `B(center, radius)`, sorted.
    pub inside_ids: Vec<usize>,
    pub witness: Witness,
}

/// Splits a shell of at least two points by moving the center.
///
/// For shell points `b₁ ≠ b₂` at distance `r` from `center`, a witness `z`
/// for the unit directions `(bⱼ − center)/‖bⱼ − center‖` yields the new
/// center `center − r·z`, which keeps every point strictly inside
/// `B(center, r)` and admits some but not all shell points. The witness
/// size starts at `min(delta_witness, half the normalized gap to the
/// nearest non-shell distances)` and shrinks geometrically until the new
/// configuration checks out by recount.
pub fn split_shell(
    ips: &IndexedPointSet,
    spec: &NormSpec,
    center: &[f64],
    r: f64,
    shell_ids: &[usize],
    witness_finder: &mut WitnessFinder<'_>,
    cfg: &SearchConfig,
) -> Result<Split, SearchError> {
    split_shell_capped(ips, spec, center, r, shell_ids, witness_finder, cfg, usize::MAX)
        .map(|(split, _)| split)
}

/// [`split_shell`] preferring a split whose count is at most `cap`, or
/// failing that one whose prefix (points no farther than the farthest
/// previously inside point) is at most `cap`. Returns the prefix size.
#[allow(clippy::too_many_arguments)]
fn split_shell_capped(
    ips: &IndexedPointSet,
    spec: &NormSpec,
    center: &[f64],
    r: f64,
    shell_ids: &[usize],
    witness_finder: &mut WitnessFinder<'_>,
    cfg: &SearchConfig,
    cap: usize,
) -> Result<(Split, usize), SearchError> {
    if shell_ids.len() < 2 {
        return Err(SearchError::ShellTooSmall(shell_ids.len()));
    }
    let shell: BTreeSet<usize> = shell_ids.iter().copied().collect();
    let shell_max = shell_ids
        .iter()
        .map(|&id| spec.distance(ips.point(id), center))
        .fold(r, f64::max);
    let inside: Vec<(f64, usize)> = ips
        .within(center, r, spec)?
        .into_iter()
        .filter(|(_, id)| !shell.contains(id))
        .collect();
    let inside_set: BTreeSet<usize> = inside.iter().map(|&(_, id)| id).collect();
    let m = inside.len();
    let k = shell.len();

    let gap_in = inside.last().map_or(1.0, |&(d, _)| (r - d) / r);
    let gap_out = match ips.next_shell(center, spec, shell_max, 0.0)? {
        Some((d, _)) => (d - shell_max) / r,
        None => (ips.certified_reach(center, spec)? - shell_max) / r,
    };
    let delta0 = cfg.delta_witness.min(0.5 * gap_in.min(gap_out));
    let min_gap = 4.0 * cfg.tau_shell * r;

    let dirs: Vec<Option<Vector>> = shell_ids
        .iter()
        .take(MAX_PAIR_POINTS)
        .map(|&id| {
            let diff: Vec<f64> = ips.point(id).iter().zip(center).map(|(a, c)| a - c).collect();
            spec.normalize(&diff).ok()
        })
        .collect();

    let mut fallback: Option<(Split, usize)> = None;
    for i in 0..dirs.len() {
        for j in i + 1..dirs.len() {
            let (Some(ui), Some(uj)) = (&dirs[i], &dirs[j]) else {
                continue;
            };
            if ui == uj {
                continue;
            }
            let mut delta = delta0;
            for _ in 0..cfg.max_shrink_rounds {
                let Some(w) = witness_finder(ui, uj, delta) else {
                    delta *= cfg.shrink;
                    continue;
                };
                let c2: Vec<f64> = center.iter().zip(w.z.iter()).map(|(c, z)| c - r * z).collect();
                let Ok(q) = ips.count_in_ball(&c2, r, spec, BallMode::Open) else {
                    delta *= cfg.shrink;
                    continue;
                };
                let ids: BTreeSet<usize> = q.ids.iter().copied().collect();
                let keeps_inside = inside_set.is_subset(&ids);
                let only_shell = ids.iter().all(|id| inside_set.contains(id) || shell.contains(id));
                let strict = q.count > m && q.count < m + k && q.boundary_gap > min_gap;
                if keeps_inside && only_shell && strict {
                    let farthest_prior = inside_set
                        .iter()
                        .map(|&id| spec.distance(ips.point(id), &c2))
                        .fold(0.0, f64::max);
                    let prefix = q
                        .ids
                        .iter()
                        .filter(|&&id| spec.distance(ips.point(id), &c2) <= farthest_prior)
                        .count()
                        .max(m);
                    let split = Split {
                        center: Vector::new(c2),
                        radius: r,
                        inside_ids: q.ids,
                        witness: w,
                    };
                    if split.inside_ids.len() <= cap {
                        return Ok((split, prefix));
                    }
                    if prefix <= cap && fallback.is_none() {
                        fallback = Some((split, prefix));
                    }
                    break;
                }
                delta *= cfg.shrink;
            }
        }
    }
    fallback.ok_or_else(|| SearchError::WitnessExhausted {
        shell: shell_ids.to_vec(),
    })
}

/// Grows a ball from `x0` until it holds exactly `n` points, splitting
/// shells that would overshoot.
pub fn find_ball_growth(
    ips: &IndexedPointSet,
    spec: &NormSpec,
    x0: &[f64],
    n: usize,
    cfg: &SearchConfig,
) -> Result<BallCertificate, SearchError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut finder = |x: &[f64], y: &[f64], delta: f64| -> Option<Witness> {
        match find_witness(spec, x, y, delta, &Strategy::ALL, cfg.witness_budget, &mut rng) {
            Ok(WitnessOutcome::Found(w)) => Some(w),
            _ => None,
        }
    };
    find_ball_growth_with(ips, spec, x0, n, cfg, &mut finder)
}

/// [`find_ball_growth`] with a caller-supplied witness finder.
pub fn find_ball_growth_with(
    ips: &IndexedPointSet,
    spec: &NormSpec,
    x0: &[f64],
    n: usize,
    cfg: &SearchConfig,
    witness_finder: &mut WitnessFinder<'_>,
) -> Result<BallCertificate, SearchError> {
    if n == 0 {
        return Err(SearchError::BadN);
    }
    cfg.validate()?;

    let mut center = Vector::from(x0);
    let mut r0 = 0.0;
    let mut inside: Vec<usize> = ips.within(&center, 0.0, spec)?.into_iter().map(|(_, id)| id).collect();
    let mut phase = 0;
    let mut phase_base = 0.0;
    let mut pending: Option<Witness> = None;
    let mut splits = 0;
    let mut trace = Vec::new();

    while inside.len() < n {
        let cs = critical_scale(ips, spec, &center, r0, cfg)?;
        if phase_base == 0.0 {
            phase_base = if r0 > 0.0 { r0 } else { 0.5 * cs.radius };
        }
        let m = inside.len();
        if m + cs.shell_ids.len() <= n {
            inside.extend(&cs.shell_ids);
            inside.sort_unstable();
            r0 = cs.shell_max;
            trace.push(SearchStep {
                phase,
                center: center.clone(),
                scale: cs.radius / phase_base,
                radius: cs.radius,
                count: inside.len(),
                shell_ids: cs.shell_ids,
                inside_ids: inside.clone(),
                witness: pending.take(),
                splits,
            });
            continue;
        }

        splits += 1;
        if splits > cfg.max_iterations {
            return Err(SearchError::BudgetExhausted {
                budget: cfg.max_iterations,
                count: m,
                trace,
            });
        }
        let (split, _) = split_shell_capped(
            ips,
            spec,
            &center,
            cs.radius,
            &cs.shell_ids,
            witness_finder,
            cfg,
            n,
        )?;

        let dist = |id: usize| spec.distance(ips.point(id), &split.center);
        let new_r0 = if split.inside_ids.len() <= n {
            split.inside_ids.iter().map(|&id| dist(id)).fold(0.0, f64::max)
        } else {
            // Overshoot: fall back to the ball just holding the prior points
            // and keep growing from the new center.
            inside.iter().map(|&id| dist(id)).fold(0.0, f64::max)
        };
        let mut next: Vec<usize> = ips
            .within(&split.center, new_r0, spec)?
            .into_iter()
            .map(|(_, id)| id)
            .collect();
        next.sort_unstable();

        phase += 1;
        phase_base = new_r0;
        center = split.center;
        r0 = new_r0;
        if next.len() > m {
            trace.push(SearchStep {
                phase,
                center: center.clone(),
                scale: 1.0,
                radius: new_r0,
                count: next.len(),
                shell_ids: cs.shell_ids,
                inside_ids: next.clone(),
                witness: Some(split.witness),
                splits,
            });
        } else {
            pending = Some(split.witness);
        }
        inside = next;
    }

    let radius = match ips.next_shell(&center, spec, r0, 0.0)? {
        Some((d, _)) => 0.5 * (r0 + d),
        None => return Err(SearchError::NoPointsBeyond { radius: r0 }),
    };
    certify(ips, spec, center, radius, n, Method::Growth, trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{exact_order, SurdPoint};
    use crate::norms::Custom3DParams;
    use crate::pointset::lattice_window;

    fn z2(h: f64, spec: &NormSpec) -> IndexedPointSet {
        IndexedPointSet::build(lattice_window(2, h, spec).unwrap())
    }

    fn seed() -> Vec<f64> {
        SurdPoint::sqrt2_third().to_f64()
    }

    #[test]
    fn sorted_nearest_point() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(16.0, &l2);
        let cert = find_ball_sorted(&ips, &l2, &seed(), 1, &SearchConfig::default()).unwrap();
        // nearest lattice point to (1.414, 0.333)
        assert_eq!(cert.inside_ids, vec![ips.find(&[1.0, 0.0]).unwrap()]);
        assert!(cert.margin_in > 0.0 && cert.margin_out > 0.0);
        assert!(cert.trace.is_empty());
    }

    #[test]
    fn sorted_radius_is_sandwiched() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(16.0, &l2);
        let pts: Vec<Vec<i64>> = ips.points().map(|p| p.iter().map(|&c| c as i64).collect()).collect();
        let (order, distinct) = exact_order(&SurdPoint::sqrt2_third(), &pts);
        assert!(distinct);
        let cert = find_ball_sorted(&ips, &l2, &seed(), 4, &SearchConfig::default()).unwrap();
        // distinct distances mean the seed itself needs no perturbation
        assert_eq!(cert.center.coords(), seed().as_slice());
        let d = |i: usize| l2.distance(ips.point(order[i]), &cert.center);
        assert!(d(3) < cert.radius && cert.radius < d(4));
        let mut expected: Vec<usize> = order[..4].to_vec();
        expected.sort_unstable();
        assert_eq!(cert.inside_ids, expected);
    }

    #[test]
    fn sorted_perturbs_away_from_ties() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let cert = find_ball_sorted(&ips, &l2, &[0.5, 0.5], 2, &SearchConfig::default()).unwrap();
        assert_ne!(cert.center.coords(), &[0.5, 0.5]);
        assert_eq!(cert.inside_ids.len(), 2);
    }

    #[test]
    fn n_zero_is_rejected() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(4.0, &l2);
        let cfg = SearchConfig::default();
        assert!(matches!(find_ball_sorted(&ips, &l2, &seed(), 0, &cfg), Err(SearchError::BadN)));
        assert!(matches!(find_ball_growth(&ips, &l2, &seed(), 0, &cfg), Err(SearchError::BadN)));
    }

    #[test]
    fn sorted_horizon_exceeded() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(3.0, &l2);
        let err = find_ball_sorted(&ips, &l2, &[0.2, 0.1], 40, &SearchConfig::default()).unwrap_err();
        assert!(err.is_horizon());
    }

    #[test]
    fn config_validation() {
        let mut cfg = SearchConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.shrink = 1.0;
        assert!(cfg.validate().is_err());
        cfg = SearchConfig {
            tau_shell: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn critical_scale_examples() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let cfg = SearchConfig::default();

        let cs = critical_scale(&ips, &l2, &[0.5, 0.5], 0.1, &cfg).unwrap();
        assert_eq!(cs.shell_ids.len(), 4);
        assert!(cs.inside_ids.is_empty());
        assert!((cs.radius - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((cs.scale - 10.0 * 0.5f64.sqrt()).abs() < 1e-12);

        let cs = critical_scale(&ips, &l2, &[0.1, 0.0], 0.05, &cfg).unwrap();
        assert_eq!(cs.shell_ids, vec![ips.find(&[0.0, 0.0]).unwrap()]);

        // a point at the center is already inside
        let cs = critical_scale(&ips, &l2, &[1.0, 1.0], 0.0, &cfg).unwrap();
        assert_eq!(cs.inside_ids, vec![ips.find(&[1.0, 1.0]).unwrap()]);
        assert_eq!(cs.shell_ids.len(), 4);
        assert_eq!(cs.radius, 1.0);
    }

    #[test]
    fn critical_scale_beyond_horizon() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(2.0, &l2);
        let err = critical_scale(&ips, &l2, &[0.0, 0.0], 1.9, &SearchConfig::default()).unwrap_err();
        assert!(matches!(err, SearchError::NoPointsBeyond { .. }));
    }

    fn default_finder(spec: &NormSpec) -> impl FnMut(&[f64], &[f64], f64) -> Option<Witness> + '_ {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        move |x, y, delta| {
            find_witness(spec, x, y, delta, &Strategy::ALL, 2000, &mut rng)
                .ok()?
                .witness()
                .cloned()
        }
    }

    #[test]
    fn split_four_corner_shell() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let cfg = SearchConfig::default();
        let cs = critical_scale(&ips, &l2, &[0.5, 0.5], 0.1, &cfg).unwrap();
        let mut finder = default_finder(&l2);
        let split = split_shell(&ips, &l2, &[0.5, 0.5], cs.radius, &cs.shell_ids, &mut finder, &cfg).unwrap();
        let scan = count_in_ball_scan(ips.point_set(), &split.center, split.radius, &l2, BallMode::Open).unwrap();
        assert_eq!(scan.ids, split.inside_ids);
        assert!((1..=3).contains(&scan.count));
        assert!(split.inside_ids.iter().all(|id| cs.shell_ids.contains(id)));
    }

    #[test]
    fn split_two_shell_adds_one() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let cfg = SearchConfig::default();
        // (0,0) and (1,0) tie from (0.5, 0.2); everything else is farther.
        let cs = critical_scale(&ips, &l2, &[0.5, 0.2], 0.1, &cfg).unwrap();
        assert_eq!(cs.shell_ids.len(), 2);
        let mut finder = default_finder(&l2);
        let split = split_shell(&ips, &l2, &[0.5, 0.2], cs.radius, &cs.shell_ids, &mut finder, &cfg).unwrap();
        assert_eq!(split.inside_ids.len(), 1);
    }

    #[test]
    fn split_needs_two_points() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let mut finder = default_finder(&l2);
        let err = split_shell(&ips, &l2, &[0.1, 0.0], 0.1, &[0], &mut finder, &SearchConfig::default()).unwrap_err();
        assert!(matches!(err, SearchError::ShellTooSmall(1)));
    }

    fn check_trace(cert: &BallCertificate) {
        let mut prev: Vec<usize> = Vec::new();
        let mut prev_phase = usize::MAX;
        let mut prev_scale = 0.0;
        for step in &cert.trace {
            assert!(step.count > prev.len() && step.count <= cert.n);
            assert_eq!(step.count, step.inside_ids.len());
            assert!(prev.iter().all(|id| step.inside_ids.contains(id)));
            if step.phase == prev_phase {
                assert!(step.scale > prev_scale);
            }
            prev_phase = step.phase;
            prev_scale = step.scale;
            prev = step.inside_ids.clone();
        }
        assert!(cert.trace.last().map_or(0, |s| s.splits) <= 64);
        assert_eq!(prev, cert.inside_ids);
    }

    #[test]
    fn growth_from_cell_center() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let cert = find_ball_growth(&ips, &l2, &[0.5, 0.5], 3, &SearchConfig::default()).unwrap();
        assert_eq!(cert.inside_ids.len(), 3);
        assert!(!cert.trace.is_empty());
        assert!(cert.trace.iter().any(|s| s.witness.is_some()));
        check_trace(&cert);
        let scan = count_in_ball_scan(ips.point_set(), &cert.center, cert.radius, &l2, BallMode::Open).unwrap();
        assert_eq!(scan.ids, cert.inside_ids);
    }

    #[test]
    fn growth_custom3d_window() {
        let spec = NormSpec::custom3d(Custom3DParams::default());
        let ips = IndexedPointSet::build(lattice_window(3, 4.0, &spec).unwrap());
        let cert = find_ball_growth(&ips, &spec, &[0.4, 0.3, 0.2], 2, &SearchConfig::default()).unwrap();
        assert_eq!(cert.inside_ids.len(), 2);
        check_trace(&cert);
    }

    #[test]
    fn growth_far_start_finds_nearest_point() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let x0 = [3.3, -2.15];
        let cert = find_ball_growth(&ips, &l2, &x0, 1, &SearchConfig::default()).unwrap();
        let nearest = ips.sorted_distances(&x0, &l2, 1).unwrap()[0].1;
        assert_eq!(cert.inside_ids, vec![nearest]);
        assert_eq!(cert.center.coords(), &x0);
    }

    #[test]
    fn growth_methods_agree_on_counts() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(64.0, &l2);
        let cfg = SearchConfig::default();
        for n in 1..=20 {
            let a = find_ball_sorted(&ips, &l2, &seed(), n, &cfg).unwrap();
            let b = find_ball_growth(&ips, &l2, &[0.5, 0.5], n, &cfg).unwrap();
            assert_eq!(a.inside_ids.len(), n);
            assert_eq!(b.inside_ids.len(), n);
            check_trace(&b);
        }
    }

    #[test]
    fn budget_exhaustion_returns_trace() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let cfg = SearchConfig::default();
        let mut never = |_: &[f64], _: &[f64], _: f64| -> Option<Witness> { None };
        let err = find_ball_growth_with(&ips, &l2, &[0.5, 0.5], 2, &cfg, &mut never).unwrap_err();
        assert!(matches!(err, SearchError::WitnessExhausted { .. }));
        assert!(err.is_budget());

        let cfg = SearchConfig {
            max_iterations: 1,
            ..Default::default()
        };
        // from (0.5, 0.5) with n = 5 the 4-corner shell absorbs, then the
        // 8-point shell at distance √10/2 needs more than one split
        match find_ball_growth(&ips, &l2, &[0.5, 0.5], 5, &cfg) {
            Err(SearchError::BudgetExhausted { trace, .. }) => assert!(!trace.is_empty()),
            Ok(cert) => assert_eq!(cert.inside_ids.len(), 5),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn validation_rejects_bad_certificates() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(16.0, &l2);
        let cert = find_ball_sorted(&ips, &l2, &seed(), 4, &SearchConfig::default()).unwrap();
        assert!(validate_certificate(&cert, &ips, &l2).is_ok());

        let d4 = ips.sorted_distances(&cert.center, &l2, 4).unwrap()[3];
        let mut on_boundary = cert.clone();
        on_boundary.radius = d4.0;
        let fail = validate_certificate(&on_boundary, &ips, &l2).unwrap_err();
        assert!(fail.offending_ids.contains(&d4.1));

        let mut tampered = cert.clone();
        tampered.inside_ids[0] = ips.find(&[9.0, 9.0]).unwrap();
        let fail = validate_certificate(&tampered, &ips, &l2).unwrap_err();
        assert!(fail.offending_ids.contains(&cert.inside_ids[0]));
        assert!(!fail.reasons.is_empty());

        let mut lying = cert.clone();
        lying.margin_out *= 2.0;
        assert!(validate_certificate(&lying, &ips, &l2).is_err());
    }

    #[test]
    fn certificate_json_fields() {
        let l2 = NormSpec::euclidean(2).unwrap();
        let ips = z2(8.0, &l2);
        let cert = find_ball_growth(&ips, &l2, &[0.5, 0.5], 2, &SearchConfig::default()).unwrap();
        let v = serde_json::to_value(&cert).unwrap();
        let keys: BTreeSet<&str> = v.as_object().unwrap().keys().map(|k| k.as_str()).collect();
        let expected: BTreeSet<&str> =
            ["center", "radius", "n", "inside_ids", "margin_in", "margin_out", "method", "trace"].into();
        assert_eq!(keys, expected);
        assert_eq!(v["method"], "growth");
        let back: BallCertificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, cert);
    }
}
