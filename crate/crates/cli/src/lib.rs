//! Command implementations behind the `ghd` binary.
//!
//! Every command writes its primary output to `out` and diagnostics to
//! `diag`, so tests can drive them without spawning a process.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use greedy_hausdorff::gtree::{build_count, load_count};
use greedy_hausdorff::hausdorff::directed_hausdorff_observed;
use greedy_hausdorff::kpartial::k_hausdorff_all_observed;
use greedy_hausdorff::metric::parse_points;
use greedy_hausdorff::oracle;
use greedy_hausdorff::viability::IterationView;
use greedy_hausdorff::{
    greedy_permutation, spread, DistanceCounter, Error, GreedyTree, MetricKind, Observer, PointSet,
    QueryResult, Side,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    /// 2 for bad input or parameters, 3 for incompatible trees, 4 for a
    /// violated internal invariant.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::Incompatible(_)) => 3,
            CliError::Core(Error::Internal(_)) => 4,
            _ => 2,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "ghd",
    version,
    about = "Greedy trees and approximate Hausdorff distances"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a greedy tree from a point file.
    Build(BuildArgs),
    /// Approximate Hausdorff distance between two trees.
    Dist(DistArgs),
    /// Approximate k-partial directed distances for every k.
    Kdist(KdistArgs),
    /// Distance matrix over a collection of trees.
    Pairwise(PairwiseArgs),
    /// Exact brute-force distances from point or tree files.
    Oracle(OracleArgs),
    /// Tree diagnostics.
    Stats(StatsArgs),
    /// Uniform random points in the unit cube.
    Gen(GenArgs),
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    pub points: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2.0, conflicts_with = "exact_greedy")]
    pub alpha: f64,
    /// Exact farthest-point order (α = 1). Voids the radius bound.
    #[arg(long)]
    pub exact_greedy: bool,
    #[arg(long, default_value = "l2")]
    pub metric: MetricKind,
    /// Defaults to the file stem.
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long, conflicts_with = "symmetric")]
    pub directed: bool,
    /// The default; accepted for symmetry with `pairwise`.
    #[arg(long)]
    pub symmetric: bool,
    /// Per-iteration JSON records on the diagnostics stream.
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct KdistArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub trace: bool,
}

#[derive(Debug, Args)]
pub struct PairwiseArgs {
    /// Tree files, or directories whose `*.json` files are taken in name order.
    #[arg(required = true)]
    pub trees: Vec<PathBuf>,
    #[arg(long)]
    pub eps: f64,
    /// Mirror max(d(A,B), d(B,A)) instead of the directed matrix.
    #[arg(long)]
    pub symmetric: bool,
    #[arg(long)]
    pub header: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[command(subcommand)]
    pub query: OracleQuery,
}

#[derive(Debug, Subcommand)]
pub enum OracleQuery {
    /// Exact (directed) Hausdorff distance.
    Dist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        directed: bool,
        /// Metric for point files; tree files carry their own.
        #[arg(long, default_value = "l2")]
        metric: MetricKind,
    },
    /// Exact k-partial directed distances, one `k,delta` row per k.
    Kdist {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value = "l2")]
        metric: MetricKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    pub tree: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, diag: &mut dyn Write) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli, out, diag)
}

pub fn run(cli: Cli, out: &mut dyn Write, diag: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Build(a) => cmd_build(&a, out),
        Command::Dist(a) => cmd_dist(&a, out, diag),
        Command::Kdist(a) => cmd_kdist(&a, out, diag),
        Command::Pairwise(a) => cmd_pairwise(&a, out, diag),
        Command::Oracle(a) => cmd_oracle(&a.query, out),
        Command::Stats(a) => cmd_stats(&a, out),
        Command::Gen(a) => cmd_gen(&a, out),
    }
}

fn read(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_owned(),
        source,
    })
}

fn stdio(e: io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

pub fn load_points(path: &Path, metric: MetricKind) -> CliResult<PointSet> {
    let bytes = read(path)?;
    let text = String::from_utf8(bytes).map_err(|_| {
        CliError::Core(Error::Parse {
            line: 0,
            msg: "not UTF-8".into(),
        })
    })?;
    Ok(PointSet::new(parse_points(&text)?, metric, stem(path))?)
}

pub fn load_tree(path: &Path) -> CliResult<GreedyTree> {
    Ok(GreedyTree::deserialize(&read(path)?)?)
}

/// A point file or a tree file, told apart by a leading `{`.
fn load_any(path: &Path, metric: MetricKind) -> CliResult<Arc<PointSet>> {
    let bytes = read(path)?;
    if bytes.iter().find(|b| !b.is_ascii_whitespace()) == Some(&b'{') {
        return Ok(GreedyTree::deserialize(&bytes)?.set().clone());
    }
    load_points(path, metric).map(Arc::new)
}

fn check_eps(eps: f64) -> CliResult<()> {
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::Parameter(format!("eps must be positive and finite, got {eps}")).into());
    }
    Ok(())
}

fn spread_text(set: &PointSet) -> CliResult<String> {
    match spread(set) {
        Ok(s) => Ok(s.to_string()),
        Err(Error::UndefinedSpread) => Ok("undefined".into()),
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_build(args: &BuildArgs, out: &mut dyn Write) -> CliResult<()> {
    let alpha = if args.exact_greedy { 1.0 } else { args.alpha };
    if !args.exact_greedy && alpha.partial_cmp(&1.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::Parameter(format!(
            "alpha must be > 1 (use --exact-greedy for alpha = 1), got {alpha}"
        ))
        .into());
    }
    let mut set = load_points(&args.points, args.metric)?;
    if let Some(label) = &args.label {
        set = PointSet::new(set.to_vecs(), set.metric(), label.clone())?;
    }
    let set = Arc::new(set);
    let mut counter = DistanceCounter::default();
    let perm = greedy_permutation(set.clone(), alpha, None, &mut counter)?;
    let tree = GreedyTree::build(perm, &mut counter);
    write_file(&args.out, &tree.serialize())?;
    writeln!(
        out,
        "n={} nodes={} spread={} height={} build_calls={}",
        tree.len(),
        tree.nodes().len(),
        spread_text(&set)?,
        tree.height(),
        counter.calls
    )
    .map_err(stdio)
}

/// Streams one JSON record per iteration.
struct Tracer<'w> {
    query: &'static str,
    sink: &'w mut dyn Write,
    failed: Option<io::Error>,
}

impl Observer for Tracer<'_> {
    fn on_iteration(&mut self, v: &IterationView<'_, '_>) {
        if self.failed.is_some() {
            return;
        }
        let max_degree = v
            .touched
            .iter()
            .map(|&x| v.graph.degree(Side::A, x))
            .max()
            .unwrap_or(0);
        let rec = json!({
            "query": self.query,
            "iteration": v.iteration,
            "side": match v.item.side { Side::A => "A", Side::B => "B" },
            "node": v.item.node,
            "radius": v.item.radius,
            "lower_bound": v.lower_bound,
            "edges": v.graph.edge_count(),
            "touched": v.touched.len(),
            "touched_max_degree": max_degree,
        });
        if let Err(e) = writeln!(self.sink, "{rec}") {
            self.failed = Some(e);
        }
    }
}

fn traced<T>(
    query: &'static str,
    trace: bool,
    diag: &mut dyn Write,
    f: impl FnOnce(&mut dyn Observer) -> greedy_hausdorff::Result<T>,
) -> CliResult<T> {
    if !trace {
        return Ok(f(&mut ())?);
    }
    let mut t = Tracer {
        query,
        sink: diag,
        failed: None,
    };
    let r = f(&mut t)?;
    match t.failed {
        Some(e) => Err(stdio(e)),
        None => Ok(r),
    }
}

fn counters(r: &QueryResult) -> String {
    format!(
        "iterations={} distance_calls={} max_degree={} exhausted={}",
        r.iterations, r.distance_calls, r.max_degree, r.exhausted
    )
}

pub fn cmd_dist(args: &DistArgs, out: &mut dyn Write, diag: &mut dyn Write) -> CliResult<()> {
    check_eps(args.eps)?;
    let a = load_tree(&args.a)?;
    let b = load_tree(&args.b)?;
    let ab = traced("ab", args.trace, diag, |o| {
        directed_hausdorff_observed(&a, &b, args.eps, o)
    })?;
    let value = if args.directed {
        writeln!(diag, "ab {}", counters(&ab)).map_err(stdio)?;
        ab.value
    } else {
        let ba = traced("ba", args.trace, diag, |o| {
            directed_hausdorff_observed(&b, &a, args.eps, o)
        })?;
        writeln!(diag, "ab {}", counters(&ab)).map_err(stdio)?;
        writeln!(diag, "ba {}", counters(&ba)).map_err(stdio)?;
        ab.value.max(ba.value)
    };
    writeln!(out, "{value}").map_err(stdio)
}

/// `k,delta` rows for k < n, then the labeled `n,0` row.
fn partial_csv(deltas: &[f64]) -> String {
    let mut s = String::from("k,delta\n");
    for (k, d) in deltas.iter().enumerate() {
        s.push_str(&format!("{k},{d}\n"));
    }
    s.push_str("# k = n: every point removed, the empty max is 0\n");
    s.push_str(&format!("{},0\n", deltas.len()));
    s
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => out.write_all(text.as_bytes()).map_err(stdio),
    }
}

pub fn cmd_kdist(args: &KdistArgs, out: &mut dyn Write, diag: &mut dyn Write) -> CliResult<()> {
    check_eps(args.eps)?;
    let a = load_tree(&args.a)?;
    let b = load_tree(&args.b)?;
    let r = traced("kpartial", args.trace, diag, |o| {
        k_hausdorff_all_observed(&a, &b, args.eps, o)
    })?;
    writeln!(
        diag,
        "iterations={} distance_calls={} max_degree={} buckets_visited={} distinct_buckets={}",
        r.iterations, r.distance_calls, r.max_degree, r.buckets_visited, r.distinct_buckets
    )
    .map_err(stdio)?;
    emit(&partial_csv(&r.deltas), args.out.as_deref(), out)
}

/// Pairwise distances over preloaded trees.
#[derive(Debug, Clone, PartialEq)]
pub struct Pairwise {
    pub matrix: Vec<Vec<f64>>,
    pub directed_queries: u64,
    pub distance_calls: u64,
}

/// Runs every ordered pair once, in parallel. Trees are never rebuilt; the
/// result does not depend on scheduling.
pub fn pairwise(trees: &[GreedyTree], eps: f64, symmetric: bool) -> CliResult<Pairwise> {
    check_eps(eps)?;
    let k = trees.len();
    if k < 2 {
        return Err(CliError::Usage(format!(
            "pairwise needs at least 2 trees, got {k}"
        )));
    }
    for i in 0..k {
        for j in i + 1..k {
            trees[i]
                .set()
                .check_compatible(trees[j].set())
                .map_err(|e| match e {
                    Error::Incompatible(m) => Error::Incompatible(format!(
                        "trees {i} ({}) and {j} ({}): {m}",
                        trees[i].label(),
                        trees[j].label()
                    )),
                    other => other,
                })?;
        }
    }
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let results = pairs
        .par_iter()
        .map(|&(i, j)| greedy_hausdorff::directed_hausdorff(&trees[i], &trees[j], eps))
        .collect::<greedy_hausdorff::Result<Vec<_>>>()?;

    let mut matrix = vec![vec![0.0; k]; k];
    let mut distance_calls = 0;
    for (&(i, j), r) in pairs.iter().zip(&results) {
        matrix[i][j] = r.value;
        distance_calls += r.distance_calls;
    }
    if symmetric {
        for (i, j) in pairs.iter().copied().filter(|&(i, j)| i < j) {
            let h = matrix[i][j].max(matrix[j][i]);
            matrix[i][j] = h;
            matrix[j][i] = h;
        }
    }
    Ok(Pairwise {
        matrix,
        directed_queries: results.len() as u64,
        distance_calls,
    })
}

fn tree_paths(inputs: &[PathBuf]) -> CliResult<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for p in inputs {
        if p.is_dir() {
            let entries = fs::read_dir(p).map_err(|source| CliError::Io {
                path: p.clone(),
                source,
            })?;
            let mut found: Vec<PathBuf> = entries
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.extension().is_some_and(|x| x == "json"))
                .collect();
            found.sort();
            paths.extend(found);
        } else {
            paths.push(p.clone());
        }
    }
    Ok(paths)
}

pub fn cmd_pairwise(
    args: &PairwiseArgs,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> CliResult<()> {
    check_eps(args.eps)?;
    let paths = tree_paths(&args.trees)?;
    if paths.len() < 2 {
        return Err(CliError::Usage(format!(
            "pairwise needs at least 2 trees, found {}",
            paths.len()
        )));
    }
    let (loads0, builds0) = (load_count(), build_count());
    let trees = paths
        .iter()
        .map(|p| load_tree(p))
        .collect::<CliResult<Vec<_>>>()?;
    let res = pairwise(&trees, args.eps, args.symmetric)?;
    writeln!(
        diag,
        "tree_loads={} directed_queries={} builds={} distance_calls={}",
        load_count() - loads0,
        res.directed_queries,
        build_count() - builds0,
        res.distance_calls
    )
    .map_err(stdio)?;

    let mut s = String::new();
    if args.header {
        let labels: Vec<&str> = trees.iter().map(|t| t.label()).collect();
        s.push_str(&labels.join(","));
        s.push('\n');
    }
    for row in &res.matrix {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    emit(&s, args.out.as_deref(), out)
}

pub fn cmd_oracle(query: &OracleQuery, out: &mut dyn Write) -> CliResult<()> {
    let mut counter = DistanceCounter::default();
    match query {
        OracleQuery::Dist {
            a,
            b,
            directed,
            metric,
        } => {
            let (a, b) = (load_any(a, *metric)?, load_any(b, *metric)?);
            let v = if *directed {
                oracle::exact_directed(&a, &b, &mut counter)?
            } else {
                oracle::exact_hausdorff(&a, &b, &mut counter)?
            };
            writeln!(out, "{v}").map_err(stdio)
        }
        OracleQuery::Kdist {
            a,
            b,
            metric,
            out: path,
        } => {
            let (a, b) = (load_any(a, *metric)?, load_any(b, *metric)?);
            let d = oracle::exact_partial_all(&a, &b, &mut counter)?;
            emit(&partial_csv(&d), path.as_deref(), out)
        }
    }
}

pub fn cmd_stats(args: &StatsArgs, out: &mut dyn Write) -> CliResult<()> {
    let t = load_tree(&args.tree)?;
    writeln!(
        out,
        "label={} n={} dim={} metric={} alpha={} nodes={} height={} radius={} spread={}",
        t.label(),
        t.len(),
        t.dim(),
        t.metric(),
        t.alpha(),
        t.nodes().len(),
        t.height(),
        t.node(t.root()).radius,
        spread_text(t.set())?
    )
    .map_err(stdio)
}

/// Uniform points in `[0,1]^dim`, one per line, comma separated.
pub fn random_points(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect())
        .collect()
}

pub fn cmd_gen(args: &GenArgs, out: &mut dyn Write) -> CliResult<()> {
    if args.n == 0 || args.dim == 0 {
        return Err(Error::Parameter("n and dim must be positive".into()).into());
    }
    let mut s = String::new();
    for p in random_points(args.n, args.dim, args.seed) {
        let cells: Vec<String> = p.iter().map(f64::to_string).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    emit(&s, args.out.as_deref(), out)
}
