use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, CommandFactory, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use steinhaus::norms::{parse_corners, Custom3DParams, NormError, NormSpec};
use steinhaus::pointset::{
    count_in_ball_scan, lattice_window_capped, load_points, save_points, write_atomic,
    IndexedPointSet, PointSet, PointSetError, DEFAULT_POINT_CAP,
};
use steinhaus::render::{mesh_csv, mesh_svg, polyline_csv, polyline_svg, sphere_polyline, surface_mesh};
use steinhaus::search::{find_ball_growth, find_ball_sorted, Method, SearchConfig, SearchError};
use steinhaus::sprime::{
    generate_pairs, probe_pairs, sprime_scan, PairSource, SprimeError, Strategy,
};
use steinhaus::BallMode;

const CONFIG_HELP: &str = "\
Every subcommand accepts --config FILE. The file holds one `key = value`
per line, where a key is any long flag name of that subcommand (with `-` or
`_`). Blank lines and lines starting with `#` are ignored. Boolean flags take
`true` or `false`. Flags given on the command line override the file;
unknown keys are rejected.

Exit codes: 0 success, 1 usage, 2 search budget exhausted, 3 horizon, 4 I/O.";

#[derive(Parser)]
#[command(name = "steinhaus", version, about = "Balls with exactly n points, gauge norms and separation checks", after_help = CONFIG_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write all integer points within a horizon to a point file.
    GenPoints(GenPoints),
    /// Find a ball holding exactly n points and write its certificate.
    FindBall(FindBall),
    /// Search separating perturbations for unit-vector pairs.
    CheckSprime(CheckSprime),
    /// Draw the unit sphere: a surface mesh for custom3d, an outline in 2-D.
    NormInfo(NormInfo),
    /// Compare indexed and linear-scan ball counting.
    Bench(Bench),
}

#[derive(Args, Clone)]
struct NormArgs {
    /// l<p> (l1, l1.5, l2, ...), linf or custom3d
    #[arg(long, default_value = "l2")]
    norm: String,
    /// Corner slopes c1,c2,c3,c4 for custom3d
    #[arg(long)]
    beta: Option<String>,
}

impl NormArgs {
    fn spec(&self, dim: usize) -> Result<NormSpec, Failure> {
        let mut spec = NormSpec::parse(&self.norm, dim).map_err(Failure::usage)?;
        if let Some(b) = &self.beta {
            if !spec.is_custom() {
                return Err(Failure::usage("--beta applies to custom3d only"));
            }
            let params = Custom3DParams::new(parse_corners(b).map_err(Failure::usage)?).map_err(Failure::usage)?;
            spec = NormSpec::custom3d(params);
        }
        Ok(spec)
    }

    fn default_dim(&self) -> usize {
        if self.norm.starts_with("custom3d") {
            3
        } else {
            2
        }
    }
}

#[derive(Args)]
#[command(args_override_self = true)]
struct GenPoints {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    horizon: f64,
    #[command(flatten)]
    norm: NormArgs,
    /// Largest number of candidate points enumerated
    #[arg(long, default_value_t = DEFAULT_POINT_CAP)]
    cap: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct SearchArgs {
    #[arg(long)]
    tau_shell: Option<f64>,
    #[arg(long)]
    tau_tie: Option<f64>,
    #[arg(long)]
    delta_witness: Option<f64>,
    #[arg(long)]
    shrink: Option<f64>,
    #[arg(long)]
    max_shrink_rounds: Option<usize>,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long)]
    tie_attempts: Option<usize>,
    #[arg(long)]
    witness_budget: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SearchArgs {
    fn config(&self) -> Result<SearchConfig, Failure> {
        let d = SearchConfig::default();
        let cfg = SearchConfig {
            tau_shell: self.tau_shell.unwrap_or(d.tau_shell),
            tau_tie: self.tau_tie.unwrap_or(d.tau_tie),
            delta_witness: self.delta_witness.unwrap_or(d.delta_witness),
            shrink: self.shrink.unwrap_or(d.shrink),
            max_shrink_rounds: self.max_shrink_rounds.unwrap_or(d.max_shrink_rounds),
            max_iterations: self.max_iterations.unwrap_or(d.max_iterations),
            tie_attempts: self.tie_attempts.unwrap_or(d.tie_attempts),
            witness_budget: self.witness_budget.unwrap_or(d.witness_budget),
            seed: self.seed,
        };
        cfg.validate().map_err(Failure::usage)?;
        Ok(cfg)
    }
}

#[derive(Args)]
#[command(args_override_self = true)]
struct FindBall {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Point file; without it a lattice window is generated from --dim and --horizon
    #[arg(long)]
    points: Option<PathBuf>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    horizon: Option<f64>,
    #[command(flatten)]
    norm: NormArgs,
    /// Comma-separated coordinates
    #[arg(long, allow_hyphen_values = true)]
    center: String,
    #[arg(long)]
    n: usize,
    /// sorted or growth
    #[arg(long, default_value = "sorted")]
    method: String,
    /// Retry with the sorted method when the growth method runs out of budget
    #[arg(long)]
    fallback_sorted: bool,
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct CheckSprime {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    norm: NormArgs,
    #[arg(long)]
    dim: Option<usize>,
    /// Number of random unit pairs
    #[arg(long)]
    pairs: Option<usize>,
    /// Number of pairs on a common facet of the max-norm ball
    #[arg(long)]
    facet_pairs: Option<usize>,
    /// Number of custom3d pairs on one edge of the flat square
    #[arg(long)]
    equator_pairs: Option<usize>,
    #[arg(long)]
    delta: f64,
    /// Comma-separated subset of segment,tangent,random
    #[arg(long, default_value = "segment,tangent,random")]
    strategies: String,
    /// Perturbations evaluated per pair
    #[arg(long, default_value_t = 2000)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a midpoint convexity probe of the same pairs
    #[arg(long)]
    probe_out: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct NormInfo {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    norm: NormArgs,
    #[arg(long)]
    dim: Option<usize>,
    /// custom3d only: comma-separated triangles of the unit square, 1..4
    #[arg(long)]
    triangles: Option<String>,
    /// custom3d only: mesh rows per triangle
    #[arg(long)]
    grid: Option<usize>,
    /// Outline vertices for planar norms
    #[arg(long, default_value_t = 256)]
    samples: usize,
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct Bench {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    points: PathBuf,
    #[arg(long)]
    queries: usize,
    /// Query norm; defaults to the horizon norm of the point file
    #[arg(long)]
    norm: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    /// Largest query radius; defaults to 5% of the horizon
    #[arg(long)]
    max_radius: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

/// An error together with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn usage(e: impl ToString) -> Self {
        Failure { code: 1, msg: e.to_string() }
    }

    fn io(path: &Path, e: impl ToString) -> Self {
        Failure {
            code: 4,
            msg: format!("{}: {}", path.display(), e.to_string()),
        }
    }
}

impl From<PointSetError> for Failure {
    fn from(e: PointSetError) -> Self {
        let code = match e {
            PointSetError::Io { .. } => 4,
            PointSetError::HorizonViolation { .. } | PointSetError::KExceedsRange { .. } => 3,
            _ => 1,
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<SearchError> for Failure {
    fn from(e: SearchError) -> Self {
        let code = if e.is_budget() {
            2
        } else if e.is_horizon() {
            3
        } else {
            match e {
                SearchError::PointSet(p) => return p.into(),
                _ => 1,
            }
        };
        Failure { code, msg: e.to_string() }
    }
}

impl From<SprimeError> for Failure {
    fn from(e: SprimeError) -> Self {
        Failure::usage(e)
    }
}

impl From<NormError> for Failure {
    fn from(e: NormError) -> Self {
        Failure::usage(e)
    }
}

fn parse_coords(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Failure::usage(format!("bad coordinate `{t}` in `{s}`")))
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    write_atomic(path, bytes).map_err(|e| Failure::io(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::io(path, e))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn gen_points(a: GenPoints) -> Result<(), Failure> {
    let spec = a.norm.spec(a.dim)?;
    let ps = lattice_window_capped(a.dim, a.horizon, &spec, a.cap)?;
    save_points(&ps, &a.out)?;
    eprintln!("wrote {} points to {}", ps.len(), a.out.display());
    Ok(())
}

fn load_or_generate(points: &Option<PathBuf>, dim: Option<usize>, horizon: Option<f64>, spec_for: &NormArgs) -> Result<PointSet, Failure> {
    match (points, dim, horizon) {
        (Some(p), _, _) => Ok(load_points(p)?),
        (None, Some(d), Some(h)) => Ok(lattice_window_capped(d, h, &spec_for.spec(d)?, DEFAULT_POINT_CAP)?),
        _ => Err(Failure::usage("give --points, or both --dim and --horizon")),
    }
}

fn find_ball(a: FindBall) -> Result<(), Failure> {
    if a.n == 0 {
        return Err(Failure::usage("--n must be at least 1"));
    }
    let method = Method::parse(&a.method).ok_or_else(|| Failure::usage(format!("unknown method `{}`", a.method)))?;
    let cfg = a.search.config()?;
    let center = parse_coords(&a.center)?;
    let ps = load_or_generate(&a.points, a.dim, a.horizon, &a.norm)?;
    if center.len() != ps.dim() {
        return Err(Failure::usage(format!(
            "center has {} coordinates, points have {}",
            center.len(),
            ps.dim()
        )));
    }
    let spec = a.norm.spec(ps.dim())?;
    let ips = IndexedPointSet::build(ps);
    let cert = match method {
        Method::Sorted => find_ball_sorted(&ips, &spec, &center, a.n, &cfg),
        Method::Growth => match find_ball_growth(&ips, &spec, &center, a.n, &cfg) {
            Err(e) if e.is_budget() && a.fallback_sorted => {
                eprintln!("growth failed ({e}); using the sorted method");
                find_ball_sorted(&ips, &spec, &center, a.n, &cfg)
            }
            other => other,
        },
    }?;
    write_json(&a.out, &cert)?;
    eprintln!(
        "n={} radius={} margins=({}, {}) -> {}",
        cert.n,
        cert.radius,
        cert.margin_in,
        cert.margin_out,
        a.out.display()
    );
    Ok(())
}

fn check_sprime(a: CheckSprime) -> Result<(), Failure> {
    if !(a.delta.is_finite() && a.delta > 0.0) {
        return Err(Failure::usage("--delta must be positive"));
    }
    let spec = a.norm.spec(a.dim.unwrap_or(a.norm.default_dim()))?;
    let source = match (a.pairs, a.facet_pairs, a.equator_pairs) {
        (Some(count), None, None) => PairSource::Random { count },
        (None, Some(count), None) => PairSource::Facet { count },
        (None, None, Some(count)) => PairSource::EquatorEdge { count },
        _ => {
            return Err(Failure::usage(
                "give exactly one of --pairs, --facet-pairs, --equator-pairs",
            ))
        }
    };
    let strategies: Vec<Strategy> = a
        .strategies
        .split(',')
        .map(|s| Strategy::parse(s.trim()).ok_or_else(|| Failure::usage(format!("unknown strategy `{s}`"))))
        .collect::<Result<_, _>>()?;
    if a.budget == 0 {
        return Err(Failure::usage("--budget must be at least 1"));
    }
    let report = sprime_scan(&spec, &source, a.delta, &strategies, a.budget, a.seed)?;
    write_json(&a.out, &report)?;
    if let Some(path) = &a.probe_out {
        let pairs = generate_pairs(&spec, &source, a.delta, a.seed)?;
        write_json(path, &probe_pairs(&spec, &pairs))?;
    }
    eprintln!(
        "{} pairs: {} witnessed, {} not found, {} certified impossible",
        report.total, report.witnessed, report.not_found, report.certified_impossible
    );
    Ok(())
}

fn norm_info(a: NormInfo) -> Result<(), Failure> {
    if a.svg.is_none() && a.csv.is_none() {
        return Err(Failure::usage("give --svg and/or --csv"));
    }
    let spec = a.norm.spec(a.dim.unwrap_or(a.norm.default_dim()))?;
    let (svg, csv) = match spec.custom_params() {
        Some(params) => {
            let grid = a.grid.unwrap_or(32);
            if grid == 0 {
                return Err(Failure::usage("--grid must be at least 1"));
            }
            let triangles: Vec<usize> = match &a.triangles {
                None => vec![1, 2, 3, 4],
                Some(t) => t
                    .split(',')
                    .map(|x| match x.trim().parse::<usize>() {
                        Ok(k) if (1..=4).contains(&k) => Ok(k),
                        _ => Err(Failure::usage(format!("bad triangle `{x}`; use 1..4"))),
                    })
                    .collect::<Result<_, _>>()?,
            };
            let mesh = surface_mesh(params, &triangles, grid)?;
            let worst = mesh
                .vertices
                .iter()
                .map(|v| (spec.norm_unchecked(v) - 1.0).abs())
                .fold(0.0, f64::max);
            eprintln!(
                "{} vertices, {} faces, max |gauge - 1| = {worst:e}",
                mesh.vertices.len(),
                mesh.faces.len()
            );
            (mesh_svg(&mesh), mesh_csv(&mesh))
        }
        None => {
            if a.triangles.is_some() || a.grid.is_some() {
                return Err(Failure::usage("--triangles and --grid apply to custom3d only"));
            }
            let pts = sphere_polyline(&spec, a.samples)?;
            (polyline_svg(&pts), polyline_csv(&pts))
        }
    };
    if let Some(p) = &a.svg {
        write_file(p, svg.as_bytes())?;
    }
    if let Some(p) = &a.csv {
        write_file(p, csv.as_bytes())?;
    }
    Ok(())
}

#[derive(Serialize)]
struct BenchReport {
    points: usize,
    queries: usize,
    norm: String,
    total_inside: usize,
    identical: bool,
    mismatched_queries: Vec<usize>,
    build_seconds: f64,
    indexed_seconds: f64,
    scan_seconds: f64,
    speedup: Option<f64>,
}

fn bench(a: Bench) -> Result<(), Failure> {
    let ps = load_points(&a.points)?;
    let spec = match &a.norm {
        Some(n) => NormArgs {
            norm: n.clone(),
            beta: a.beta.clone(),
        }
        .spec(ps.dim())?,
        None => *ps.horizon_norm(),
    };
    let h = ps.horizon();
    let max_r = a.max_radius.unwrap_or(0.05 * h);
    if !(max_r.is_finite() && max_r > 0.0) {
        return Err(Failure::usage("--max-radius must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut queries = Vec::with_capacity(a.queries);
    let mut tries = 0usize;
    while queries.len() < a.queries {
        tries += 1;
        if tries > 1000 * a.queries.max(1) {
            return Err(Failure {
                code: 3,
                msg: "could not place queries inside the horizon".into(),
            });
        }
        let c: Vec<f64> = (0..ps.dim()).map(|_| rng.random_range(-h..h)).collect();
        let r = rng.random_range(0.0..max_r);
        if ps.certified_reach(&c, &spec).is_ok_and(|reach| r <= reach) {
            queries.push((c, r));
        }
    }

    let t = Instant::now();
    let ips = IndexedPointSet::build(ps);
    let build_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let indexed: Vec<Vec<usize>> = queries
        .iter()
        .map(|(c, r)| ips.count_in_ball(c, *r, &spec, BallMode::Open).map(|q| q.ids))
        .collect::<Result<_, _>>()?;
    let indexed_seconds = t.elapsed().as_secs_f64();

    let t = Instant::now();
    let scanned: Vec<Vec<usize>> = queries
        .iter()
        .map(|(c, r)| count_in_ball_scan(ips.point_set(), c, *r, &spec, BallMode::Open).map(|q| q.ids))
        .collect::<Result<_, _>>()?;
    let scan_seconds = t.elapsed().as_secs_f64();

    let mismatched_queries: Vec<usize> = (0..queries.len()).filter(|&i| indexed[i] != scanned[i]).collect();
    let report = BenchReport {
        points: ips.len(),
        queries: queries.len(),
        norm: spec.name(),
        total_inside: indexed.iter().map(Vec::len).sum(),
        identical: mismatched_queries.is_empty(),
        mismatched_queries,
        build_seconds,
        indexed_seconds,
        scan_seconds,
        speedup: (indexed_seconds > 0.0 && !queries.is_empty()).then(|| scan_seconds / indexed_seconds),
    };
    write_json(&a.out, &report)?;
    eprintln!(
        "{} queries: indexed {:.3}s, scan {:.3}s, identical = {}",
        report.queries, indexed_seconds, scan_seconds, report.identical
    );
    Ok(())
}

/// Reads `key = value` lines from the file named by `--config` and splices
/// them in as flags ahead of the command line, so later flags win.
fn expand_config(args: Vec<String>) -> Result<Vec<String>, Failure> {
    let Some(pos) = args.iter().position(|a| a == "--config" || a.starts_with("--config=")) else {
        return Ok(args);
    };
    let path = match args[pos].strip_prefix("--config=") {
        Some(p) => PathBuf::from(p),
        None => PathBuf::from(args.get(pos + 1).ok_or_else(|| Failure::usage("--config needs a file"))?),
    };
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::io(&path, e))?;

    let sub_name = args.get(1).cloned().unwrap_or_default();
    let cmd = Cli::command();
    let sub = cmd
        .find_subcommand(&sub_name)
        .ok_or_else(|| Failure::usage("--config must follow a subcommand"))?;
    let mut flags: BTreeMap<String, bool> = BTreeMap::new();
    for arg in sub.get_arguments() {
        if let Some(long) = arg.get_long() {
            flags.insert(long.to_string(), arg.get_action().takes_values());
        }
    }

    let mut spliced = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("{}:{}: expected key = value", path.display(), i + 1)))?;
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        let takes_value = *flags
            .get(&key)
            .filter(|_| key != "config")
            .ok_or_else(|| Failure::usage(format!("{}:{}: unknown key `{key}`", path.display(), i + 1)))?;
        if takes_value {
            spliced.push(format!("--{key}={value}"));
        } else {
            match value {
                "true" => spliced.push(format!("--{key}")),
                "false" => {}
                _ => {
                    return Err(Failure::usage(format!(
                        "{}:{}: `{key}` takes true or false",
                        path.display(),
                        i + 1
                    )))
                }
            }
        }
    }
    let mut out = args[..2].to_vec();
    out.extend(spliced);
    out.extend(args[2..].iter().cloned());
    Ok(out)
}

fn run(args: Vec<String>) -> Result<(), Failure> {
    let args = expand_config(args)?;
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return Err(Failure { code, msg: String::new() });
        }
    };
    match cli.command {
        Command::GenPoints(a) => gen_points(a),
        Command::FindBall(a) => find_ball(a),
        Command::CheckSprime(a) => check_sprime(a),
        Command::NormInfo(a) => norm_info(a),
        Command::Bench(a) => bench(a),
    }
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.msg.is_empty() {
                eprintln!("error: {}", f.msg);
            }
            ExitCode::from(f.code)
        }
    }
}
