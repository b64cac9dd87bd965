//! Finite windows of quasi-finite point sets and exact ball counting.
//!
//! A [`PointSet`] carries a horizon `H`: every point of the underlying
//! (conceptually infinite) set with `‖p‖ ≤ H` is listed. Ball queries are
//! only answered when the ball provably lies inside that window.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::norms::{NormError, NormSpec};
use crate::vector::Vector;

/// Default cap on the number of lattice candidates enumerated.
pub const DEFAULT_POINT_CAP: usize = 100_000_000;

/// Relative widening of the candidate box used for `boundary_gap`.
const GAP_BAND: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum PointSetError {
    #[error(transparent)]
    Norm(#[from] NormError),
    #[error("window too large: {count} candidates exceed the cap of {cap}")]
    TooLarge { count: u128, cap: usize },
    #[error("horizon must be positive and finite, got {0}")]
    BadHorizon(f64),
    #[error("point {id} has norm {norm} beyond the horizon {horizon}")]
    OutsideHorizon { id: usize, norm: f64, horizon: f64 },
    #[error("query needs reach {needed} but the horizon is {horizon}")]
    HorizonViolation { needed: f64, horizon: f64 },
    #[error("radius must be finite and >= 0, got {0}")]
    BadRadius(f64),
    #[error("requested {k} distances but only {available} are certified within the horizon")]
    KExceedsRange { k: usize, available: usize },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: expected {expected} coordinates, found {got}")]
    DimensionInconsistent { line: usize, expected: usize, got: usize },
    #[error("missing `# dim=.. horizon=.. norm=..` header")]
    MissingHeader,
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, PointSetError>;

/// A finite window of a quasi-finite set.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
    horizon: f64,
    horizon_norm: NormSpec,
}

impl PointSet {
    pub fn new(horizon_norm: NormSpec, horizon: f64, points: &[Vector]) -> Result<Self> {
        let dim = horizon_norm.dim();
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            horizon_norm.norm(p)?;
            coords.extend_from_slice(p);
        }
        Self::from_flat(horizon_norm, horizon, coords)
    }

    fn from_flat(horizon_norm: NormSpec, horizon: f64, coords: Vec<f64>) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(PointSetError::BadHorizon(horizon));
        }
        let dim = horizon_norm.dim();
        debug_assert_eq!(coords.len() % dim, 0);
        for (id, p) in coords.chunks_exact(dim).enumerate() {
            let norm = horizon_norm.norm(p)?;
            if norm > horizon {
                return Err(PointSetError::OutsideHorizon { id, norm, horizon });
            }
        }
        Ok(PointSet {
            dim,
            coords,
            horizon,
            horizon_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn horizon_norm(&self) -> &NormSpec {
        &self.horizon_norm
    }

    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    /// Id of the point with exactly these coordinates.
    pub fn find(&self, p: &[f64]) -> Option<usize> {
        self.points().position(|q| q == p)
    }

    /// Radius, measured in `spec`, of the largest ball around `center`
    /// guaranteed to lie inside the horizon. Negative when `center` itself
    /// is beyond the horizon.
    pub fn certified_reach(&self, center: &[f64], spec: &NormSpec) -> Result<f64> {
        let c = self.horizon_norm.norm(center)?;
        Ok((self.horizon - c) / self.comparison_constant(spec))
    }

    /// `K` with `‖x‖_horizon ≤ K·‖x‖_spec`.
    fn comparison_constant(&self, spec: &NormSpec) -> f64 {
        if *spec == self.horizon_norm {
            1.0
        } else {
            let b = spec.outer_box().into_iter().fold(0.0, f64::max);
            self.horizon_norm.sup_over_cube() * b
        }
    }

    fn check_query(&self, center: &[f64], r: f64, spec: &NormSpec) -> Result<()> {
        if spec.dim() != self.dim {
            return Err(NormError::DimensionMismatch {
                expected: self.dim,
                got: spec.dim(),
            }
            .into());
        }
        if !(r.is_finite() && r >= 0.0) {
            return Err(PointSetError::BadRadius(r));
        }
        let c = self.horizon_norm.norm(center)?;
        let needed = c + self.comparison_constant(spec) * r;
        if needed > self.horizon {
            return Err(PointSetError::HorizonViolation {
                needed,
                horizon: self.horizon,
            });
        }
        Ok(())
    }
}

/// Ball membership convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BallMode {
    /// `‖a − c‖ < r`
    #[default]
    Open,
    /// `‖a − c‖ ≤ r`
    Closed,
}

impl BallMode {
    #[inline]
    fn contains(self, d: f64, r: f64) -> bool {
        match self {
            BallMode::Open => d < r,
            BallMode::Closed => d <= r,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BallQueryResult {
    pub count: usize,
    /// Sorted ascending.
    pub ids: Vec<usize>,
    /// Smallest `|‖a − c‖ − r|` over all points, saturated at `1e-3·r`.
    pub boundary_gap: f64,
}

/// All integer vectors `p` with `‖p‖ ≤ horizon`.
pub fn lattice_window(dim: usize, horizon: f64, norm: &NormSpec) -> Result<PointSet> {
    lattice_window_capped(dim, horizon, norm, DEFAULT_POINT_CAP)
}

pub fn lattice_window_capped(
    dim: usize,
    horizon: f64,
    norm: &NormSpec,
    cap: usize,
) -> Result<PointSet> {
    if norm.dim() != dim {
        return Err(NormError::DimensionMismatch {
            expected: norm.dim(),
            got: dim,
        }
        .into());
    }
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(PointSetError::BadHorizon(horizon));
    }
    let bounds: Vec<i64> = norm
        .outer_box()
        .iter()
        .map(|b| (horizon * b).floor() as i64)
        .collect();
    let count: u128 = bounds.iter().map(|&b| (2 * b + 1) as u128).product();
    if count > cap as u128 {
        return Err(PointSetError::TooLarge { count, cap });
    }

    let mut coords = Vec::new();
    let mut p: Vec<i64> = bounds.iter().map(|b| -b).collect();
    let mut pf = vec![0.0; dim];
    'outer: loop {
        for (f, &i) in pf.iter_mut().zip(&p) {
            *f = i as f64;
        }
        if norm.norm_unchecked(&pf) <= horizon {
            coords.extend_from_slice(&pf);
        }
        // Odometer, last axis fastest.
        for axis in (0..dim).rev() {
            if p[axis] < bounds[axis] {
                p[axis] += 1;
                continue 'outer;
            }
            p[axis] = -bounds[axis];
        }
        break;
    }
    PointSet::from_flat(*norm, horizon, coords)
}

/// Serializes `ps` in the point-file format.
pub fn format_points(ps: &PointSet) -> String {
    let mut out = format!(
        "# dim={} horizon={} norm={}\n",
        ps.dim,
        ps.horizon,
        ps.horizon_norm.name()
    );
    for p in ps.points() {
        let line: Vec<String> = p.iter().map(|c| c.to_string()).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_points(text: &str) -> Result<PointSet> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(PointSetError::MissingHeader)?;
    let (dim, horizon, norm) = parse_header(header)?;
    let mut coords = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        let line = line.trim_end_matches('\r');
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut got = 0;
        for tok in line.split(' ') {
            let v: f64 = tok.parse().map_err(|_| PointSetError::Malformed {
                line: line_no,
                msg: format!("cannot parse coordinate `{tok}`"),
            })?;
            if !v.is_finite() {
                return Err(PointSetError::Malformed {
                    line: line_no,
                    msg: format!("non-finite coordinate `{tok}`"),
                });
            }
            coords.push(v);
            got += 1;
        }
        if got != dim {
            return Err(PointSetError::DimensionInconsistent {
                line: line_no,
                expected: dim,
                got,
            });
        }
    }
    PointSet::from_flat(norm, horizon, coords)
}

fn parse_header(line: &str) -> Result<(usize, f64, NormSpec)> {
    let body = line.strip_prefix('#').ok_or(PointSetError::MissingHeader)?;
    let (mut dim, mut horizon, mut norm) = (None, None, None);
    for field in body.split_whitespace() {
        let malformed = || PointSetError::Malformed {
            line: 1,
            msg: format!("bad header field `{field}`"),
        };
        let (key, value) = field.split_once('=').ok_or_else(malformed)?;
        match key {
            "dim" => dim = Some(value.parse::<usize>().map_err(|_| malformed())?),
            "horizon" => horizon = Some(value.parse::<f64>().map_err(|_| malformed())?),
            "norm" => norm = Some(value.to_string()),
            _ => return Err(malformed()),
        }
    }
    let (Some(dim), Some(horizon), Some(norm)) = (dim, horizon, norm) else {
        return Err(PointSetError::MissingHeader);
    };
    Ok((dim, horizon, NormSpec::parse(&norm, dim)?))
}

pub fn load_points(path: &Path) -> Result<PointSet> {
    let text = fs::read_to_string(path).map_err(|source| PointSetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_points(&text)
}

/// Writes atomically: a temporary file in the target directory is renamed
/// over `path`.
pub fn save_points(ps: &PointSet, path: &Path) -> Result<()> {
    write_atomic(path, format_points(ps).as_bytes()).map_err(|source| PointSetError::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// A point set with a uniform-grid index.
///
/// Cells are stored compressed: `starts[c]..starts[c+1]` indexes into
/// `ids`, and ids inside a cell are ascending.
#[derive(Clone, Debug)]
pub struct IndexedPointSet {
    ps: PointSet,
    cell: f64,
    origin: Vec<f64>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    starts: Vec<u32>,
    ids: Vec<u32>,
}

impl std::ops::Deref for IndexedPointSet {
    type Target = PointSet;

    fn deref(&self) -> &PointSet {
        &self.ps
    }
}

impl IndexedPointSet {
    /// `H / max(1, N^{1/d})`.
    pub fn default_cell_size(ps: &PointSet) -> f64 {
        let n = ps.len().max(1) as f64;
        ps.horizon / n.powf(1.0 / ps.dim as f64).max(1.0)
    }

    pub fn build(ps: PointSet) -> Self {
        let cell = Self::default_cell_size(&ps);
        Self::build_with_cell(ps, cell)
    }

    /// A non-positive or non-finite `cell_size` falls back to the default.
    /// The cell is doubled while the grid would hold more than `64·N + 4096`
    /// cells.
    pub fn build_with_cell(ps: PointSet, cell_size: f64) -> Self {
        let dim = ps.dim;
        let mut cell = if cell_size.is_finite() && cell_size > 0.0 {
            cell_size
        } else {
            Self::default_cell_size(&ps)
        };
        let mut lo = vec![0.0f64; dim];
        let mut hi = vec![0.0f64; dim];
        if !ps.is_empty() {
            lo.copy_from_slice(ps.point(0));
            hi.copy_from_slice(ps.point(0));
            for p in ps.points() {
                for j in 0..dim {
                    lo[j] = lo[j].min(p[j]);
                    hi[j] = hi[j].max(p[j]);
                }
            }
        }
        let max_cells = 64 * ps.len() + 4096;
        let shape = loop {
            let shape: Vec<usize> = (0..dim)
                .map(|j| ((hi[j] - lo[j]) / cell).floor() as usize + 1)
                .collect();
            let total = shape
                .iter()
                .try_fold(1usize, |acc, &s| acc.checked_mul(s))
                .unwrap_or(usize::MAX);
            if total <= max_cells {
                break shape;
            }
            cell *= 2.0;
        };
        let mut strides = vec![1usize; dim];
        for j in (0..dim.saturating_sub(1)).rev() {
            strides[j] = strides[j + 1] * shape[j + 1];
        }
        let ncells: usize = shape.iter().product();

        let cell_of = |p: &[f64]| -> usize {
            (0..dim)
                .map(|j| {
                    let k = ((p[j] - lo[j]) / cell).floor() as usize;
                    k.min(shape[j] - 1) * strides[j]
                })
                .sum()
        };
        let mut counts = vec![0u32; ncells + 1];
        for p in ps.points() {
            counts[cell_of(p) + 1] += 1;
        }
        for c in 0..ncells {
            counts[c + 1] += counts[c];
        }
        let starts = counts;
        let mut fill = starts.clone();
        let mut ids = vec![0u32; ps.len()];
        for (id, p) in ps.points().enumerate() {
            let c = cell_of(p);
            ids[fill[c] as usize] = id as u32;
            fill[c] += 1;
        }

        IndexedPointSet {
            ps,
            cell,
            origin: lo,
            shape,
            strides,
            starts,
            ids,
        }
    }

    pub fn point_set(&self) -> &PointSet {
        &self.ps
    }

    pub fn cell_size(&self) -> f64 {
        self.cell
    }

    /// Calls `f(id, point)` for every point in cells meeting the box
    /// `center ± reach·b` where `b` is the outer box of the query norm.
    fn for_each_candidate<F: FnMut(usize, &[f64])>(
        &self,
        center: &[f64],
        reach: f64,
        bbox: &[f64],
        mut f: F,
    ) {
        if self.ps.is_empty() {
            return;
        }
        let dim = self.ps.dim;
        let mut lo = vec![0usize; dim];
        let mut hi = vec![0usize; dim];
        for j in 0..dim {
            let a = (center[j] - reach * bbox[j] - self.origin[j]) / self.cell;
            let b = (center[j] + reach * bbox[j] - self.origin[j]) / self.cell;
            let top = (self.shape[j] - 1) as f64;
            if b < 0.0 || a.floor() > top {
                return;
            }
            lo[j] = a.floor().max(0.0) as usize;
            hi[j] = b.floor().min(top) as usize;
        }
        let mut idx = lo.clone();
        'outer: loop {
            // Innermost axis is contiguous, so scan its run of cells at once.
            let base: usize = (0..dim - 1).map(|j| idx[j] * self.strides[j]).sum();
            let first = base + lo[dim - 1];
            let last = base + hi[dim - 1];
            let (s, e) = (self.starts[first] as usize, self.starts[last + 1] as usize);
            for &id in &self.ids[s..e] {
                let id = id as usize;
                f(id, self.ps.point(id));
            }
            for j in (0..dim - 1).rev() {
                if idx[j] < hi[j] {
                    idx[j] += 1;
                    continue 'outer;
                }
                idx[j] = lo[j];
            }
            break;
        }
    }

    /// Exact count of points in the ball `B(center, r)` under `spec`.
    pub fn count_in_ball(
        &self,
        center: &[f64],
        r: f64,
        spec: &NormSpec,
        mode: BallMode,
    ) -> Result<BallQueryResult> {
        self.ps.check_query(center, r, spec)?;
        let bbox = spec.outer_box();
        let cap = GAP_BAND * r;
        let mut ids = Vec::new();
        let mut gap = cap;
        self.for_each_candidate(center, r * (1.0 + GAP_BAND), &bbox, |id, p| {
            let d = spec.distance(p, center);
            if mode.contains(d, r) {
                ids.push(id);
            }
            gap = gap.min((d - r).abs());
        });
        ids.sort_unstable();
        Ok(BallQueryResult {
            count: ids.len(),
            ids,
            boundary_gap: gap,
        })
    }

    /// All `(distance, id)` with distance `≤ r`, sorted by distance then id.
    pub fn within(&self, center: &[f64], r: f64, spec: &NormSpec) -> Result<Vec<(f64, usize)>> {
        self.ps.check_query(center, r, spec)?;
        let mut out = Vec::new();
        self.for_each_candidate(center, r, &spec.outer_box(), |id, p| {
            let d = spec.distance(p, center);
            if d <= r {
                out.push((d, id));
            }
        });
        sort_by_distance(&mut out);
        Ok(out)
    }

    /// The `k` nearest points in ascending `(distance, id)` order.
    ///
    /// Fails when fewer than `k` points lie within the certified reach of
    /// `center`.
    pub fn sorted_distances(
        &self,
        center: &[f64],
        spec: &NormSpec,
        k: usize,
    ) -> Result<Vec<(f64, usize)>> {
        let reach = self.ps.certified_reach(center, spec)?;
        if reach < 0.0 {
            return Err(PointSetError::HorizonViolation {
                needed: self.ps.horizon - reach,
                horizon: self.ps.horizon,
            });
        }
        if k == 0 {
            return Ok(Vec::new());
        }
        let mut r = self.cell.min(reach);
        loop {
            let mut found = self.within(center, r, spec)?;
            if found.len() >= k {
                found.truncate(k);
                return Ok(found);
            }
            if r >= reach {
                return Err(PointSetError::KExceedsRange {
                    k,
                    available: found.len(),
                });
            }
            r = (2.0 * r).min(reach);
        }
    }

    /// Smallest distance strictly greater than `t`, together with every
    /// point at a distance within `band·d` of it. `None` when no such point
    /// is certified within the horizon.
    pub fn next_shell(
        &self,
        center: &[f64],
        spec: &NormSpec,
        t: f64,
        band: f64,
    ) -> Result<Option<(f64, Vec<usize>)>> {
        let reach = self.ps.certified_reach(center, spec)?;
        if reach <= t {
            return Ok(None);
        }
        let mut r = (2.0 * t).max(t + self.cell).min(reach);
        loop {
            let found = self.within(center, r, spec)?;
            if let Some(&(d, _)) = found.iter().find(|(d, _)| *d > t) {
                let hi = d * (1.0 + band);
                if hi <= r {
                    let shell = found
                        .iter()
                        .filter(|(e, _)| *e > t && *e <= hi)
                        .map(|&(_, id)| id)
                        .collect();
                    return Ok(Some((d, shell)));
                }
            }
            if r >= reach {
                return Ok(None);
            }
            r = (2.0 * r).min(reach);
        }
    }
}

fn sort_by_distance(v: &mut [(f64, usize)]) {
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
}

/// Linear-scan reference for [`IndexedPointSet::count_in_ball`].
pub fn count_in_ball_scan(
    ps: &PointSet,
    center: &[f64],
    r: f64,
    spec: &NormSpec,
    mode: BallMode,
) -> Result<BallQueryResult> {
    ps.check_query(center, r, spec)?;
    let mut ids = Vec::new();
    let mut gap = GAP_BAND * r;
    for (id, p) in ps.points().enumerate() {
        let d = spec.distance(p, center);
        if mode.contains(d, r) {
            ids.push(id);
        }
        gap = gap.min((d - r).abs());
    }
    Ok(BallQueryResult {
        count: ids.len(),
        ids,
        boundary_gap: gap,
    })
}

/// Linear-scan reference for [`IndexedPointSet::sorted_distances`].
pub fn sorted_distances_scan(
    ps: &PointSet,
    center: &[f64],
    spec: &NormSpec,
    k: usize,
) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = ps
        .points()
        .enumerate()
        .map(|(id, p)| (spec.distance(p, center), id))
        .collect();
    sort_by_distance(&mut all);
    all.truncate(k);
    all
}
