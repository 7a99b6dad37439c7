use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};

use cds_core::eval::{
    fixtures, generate_synthetic_scribbles, run_looseness_sweep, run_scribble_error_sweep,
    run_scribble_suite, segment_best_sigma, ScribbleProtocol, LOOSENESS_LEVELS,
};
use cds_core::extraction::extract_constrained_clusters;
use cds_core::graph::read_graph;
use cds_core::segmentation::{
    load_image, segment_prepared, sigma_grid, Annotation, AnnotationKind, PreparedImage,
    SegmentSettings, Segmentation, SegmentationMask, SigmaStrategy, DEFAULT_KNN,
    DEFAULT_SUPERPIXELS,
};
use cds_core::{ConstraintSet, Dynamics, Error, ExtractionResult, ExtractionSettings, VertexSet};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::service::{self, ServiceConfig};

pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
/// `EX_USAGE` from sysexits.h.
pub const EXIT_USAGE: u8 = 64;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Input(_) => EXIT_INPUT,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Solver(m) => write!(f, "solver aborted: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::ConstraintMissed { .. } | Error::Degenerate { .. } | Error::OracleCap { .. } => {
                CliError::Solver(e.to_string())
            }
            Error::InvalidArgument(_) => CliError::Usage(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: impl fmt::Display) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(
    name = "cds",
    version,
    about = "Constrained dominant-set clustering and interactive segmentation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract constrained dominant sets from a graph file.
    Extract(ExtractArgs),
    /// Segment an image from an annotation JSON file.
    Segment(SegmentArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
    /// Write the synthetic fixture images, masks and annotations.
    Fixtures(FixturesArgs),
    /// Run the evaluation sweeps on the fixtures and write CSV/JSON reports.
    Eval(EvalArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DynamicsArg {
    Replicator,
    Pairwise,
}

impl From<DynamicsArg> for Dynamics {
    fn from(d: DynamicsArg) -> Self {
        match d {
            DynamicsArg::Replicator => Dynamics::Replicator,
            DynamicsArg::Pairwise => Dynamics::Pairwise,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "replicator")]
    pub dynamics: DynamicsArg,
    /// Relative margin of alpha over the spectral bound.
    #[arg(long, default_value_t = cds_core::extraction::DEFAULT_MARGIN)]
    pub margin: f64,
}

impl SolverArgs {
    fn settings(&self) -> CliResult<ExtractionSettings> {
        if !(self.margin.is_finite() && self.margin > 0.0) {
            return Err(CliError::Usage(format!(
                "--margin must be positive, got {}",
                self.margin
            )));
        }
        Ok(ExtractionSettings {
            dynamics: self.dynamics.into(),
            margin: self.margin,
            ..Default::default()
        })
    }
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    /// Graph file: header `n m`, then `i j w` per edge.
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated constraint vertices.
    #[arg(long)]
    pub seeds: String,
    /// Read seeds, and report vertices, counting from 1. The graph file stays 0-based.
    #[arg(long)]
    pub one_based: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Print JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SigmaMode {
    SelfTuning,
    Single,
    Best,
}

#[derive(Debug, Args)]
pub struct SigmaArgs {
    #[arg(long, value_enum, default_value = "self-tuning")]
    pub sigma_mode: SigmaMode,
    /// Kernel width for `--sigma-mode single`.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Neighbour rank for the local scale of `--sigma-mode self-tuning`.
    #[arg(long)]
    pub knn: Option<usize>,
}

impl SigmaArgs {
    fn strategy(&self) -> CliResult<SigmaStrategy> {
        if self.sigma.is_some() && self.sigma_mode != SigmaMode::Single {
            return Err(CliError::Usage(
                "--sigma only applies to --sigma-mode single".into(),
            ));
        }
        if self.knn.is_some() && self.sigma_mode != SigmaMode::SelfTuning {
            return Err(CliError::Usage(
                "--knn only applies to --sigma-mode self-tuning".into(),
            ));
        }
        let strategy = match self.sigma_mode {
            SigmaMode::SelfTuning => SigmaStrategy::SelfTuning {
                knn_k: self.knn.unwrap_or(DEFAULT_KNN),
            },
            SigmaMode::Single => SigmaStrategy::Single {
                sigma: self
                    .sigma
                    .ok_or_else(|| CliError::Usage("--sigma-mode single needs --sigma".into()))?,
            },
            SigmaMode::Best => SigmaStrategy::best(),
        };
        strategy
            .validate()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(strategy)
    }
}

#[derive(Debug, Args)]
pub struct SegmentArgs {
    #[arg(long)]
    pub image: PathBuf,
    /// Annotation JSON file.
    #[arg(long)]
    pub annotation: PathBuf,
    /// Output mask PNG; diagnostics go to the same path with a `.json` extension.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub sigma: SigmaArgs,
    /// Ground-truth mask, required by `--sigma-mode best`.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_SUPERPIXELS)]
    pub superpixels: usize,
    /// Dilate the annotation box by this many percent of its area.
    #[arg(long)]
    pub looseness: Option<f64>,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "CDS_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    #[arg(long, default_value_t = DEFAULT_SUPERPIXELS)]
    pub superpixels: usize,
    #[command(flatten)]
    pub sigma: SigmaArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

#[derive(Debug, Args)]
pub struct FixturesArgs {
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Scribble,
    Looseness,
    Errors,
    All,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Directory for `<suite>.csv` and `<suite>.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "all")]
    pub suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SUPERPIXELS)]
    pub superpixels: usize,
    #[command(flatten)]
    pub sigma: SigmaArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code. Reports go to `out`, errors to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("cds: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    match command {
        Command::Extract(a) => extract(&a, out),
        Command::Segment(a) => segment(&a, out),
        Command::Serve(a) => serve(&a),
        Command::Fixtures(a) => write_fixtures(&a, out),
        Command::Eval(a) => eval(&a, out),
    }
}

pub fn parse_seeds(text: &str, one_based: bool) -> CliResult<Vec<usize>> {
    let mut seeds = Vec::new();
    for tok in text.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        let v: usize = tok
            .parse()
            .map_err(|_| CliError::Usage(format!("seed `{tok}` is not a vertex index")))?;
        if one_based {
            seeds
                .push(v.checked_sub(1).ok_or_else(|| {
                    CliError::Usage("seeds count from 1 with --one-based".into())
                })?);
        } else {
            seeds.push(v);
        }
    }
    if seeds.is_empty() {
        return Err(CliError::Usage("--seeds needs at least one vertex".into()));
    }
    Ok(seeds)
}

#[derive(Debug, Serialize)]
pub struct ClusterSummary {
    pub support: Vec<usize>,
    /// Seeds captured by this cluster.
    pub seeds: Vec<usize>,
    pub alpha: f64,
    pub bound: f64,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Serialize)]
pub struct ExtractReport {
    pub vertices: usize,
    pub one_based: bool,
    pub seeds: Vec<usize>,
    pub dynamics: Dynamics,
    pub margin: f64,
    pub clusters: Vec<ClusterSummary>,
    pub union: Vec<usize>,
    pub leftover: Vec<usize>,
}

impl ExtractReport {
    fn new(
        n: usize,
        seeds: &VertexSet,
        settings: &ExtractionSettings,
        result: &ExtractionResult,
        one_based: bool,
    ) -> Self {
        let shift = |s: &VertexSet| s.iter().map(|v| v + one_based as usize).collect::<Vec<_>>();
        Self {
            vertices: n,
            one_based,
            seeds: shift(seeds),
            dynamics: settings.dynamics,
            margin: settings.margin,
            clusters: result
                .clusters
                .iter()
                .map(|c| ClusterSummary {
                    support: shift(&c.support),
                    seeds: shift(&c.support.intersection(&c.active_constraints)),
                    alpha: c.alpha,
                    bound: c.bound.value,
                    objective: c.objective,
                    kkt_residual: c.kkt_residual,
                    iterations: c.iterations,
                    converged: c.converged,
                })
                .collect(),
            union: shift(&result.union_of_supports),
            leftover: shift(&result.leftover_constraints),
        }
    }

    pub fn to_text(&self) -> String {
        let set = |v: &[usize]| {
            format!(
                "{{{}}}",
                v.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(",")
            )
        };
        let mut s = format!(
            "graph: {} vertices, seeds {} ({}), dynamics {:?}, margin {}\n",
            self.vertices,
            set(&self.seeds),
            if self.one_based { "1-based" } else { "0-based" },
            self.dynamics,
            self.margin
        );
        for (k, c) in self.clusters.iter().enumerate() {
            s += &format!(
                "cluster {}: {} seeds {} alpha {:.6} bound {:.6} objective {:.6} kkt {:.3e} iterations {}{}\n",
                k + 1,
                set(&c.support),
                set(&c.seeds),
                c.alpha,
                c.bound,
                c.objective,
                c.kkt_residual,
                c.iterations,
                if c.converged { "" } else { " (not converged)" }
            );
        }
        s += &format!("union: {}\n", set(&self.union));
        if !self.leftover.is_empty() {
            s += &format!("leftover: {}\n", set(&self.leftover));
        }
        s
    }
}

fn extract(args: &ExtractArgs, out: &mut dyn Write) -> CliResult<()> {
    let seeds = parse_seeds(&args.seeds, args.one_based)?;
    let settings = args.solver.settings()?;
    let graph = read_graph(&args.graph).map_err(|e| io_error(&args.graph, e))?;
    let n = graph.n();
    let members = VertexSet::new(seeds, n).map_err(|e| CliError::Usage(e.to_string()))?;
    let constraints =
        ConstraintSet::new(members.clone(), n).map_err(|e| CliError::Usage(e.to_string()))?;
    let result = extract_constrained_clusters(&graph, &constraints, &settings)?;
    if !result.all_converged() {
        log::warn!("some clusters did not reach a first-order stationary point");
    }
    let report = ExtractReport::new(n, &members, &settings, &result, args.one_based);
    let text = if args.json {
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    } else {
        report.to_text()
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(e.to_string()))
}

pub fn diagnostics_path(out: &Path) -> PathBuf {
    out.with_extension("json")
}

/// Reads the annotation file and applies `--looseness`.
fn load_annotation(path: &Path, looseness: Option<f64>) -> CliResult<Annotation> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let mut ann = Annotation::from_json(&text).map_err(|e| io_error(path, e))?;
    if let Some(l) = looseness {
        if !ann.kind.is_box() {
            return Err(CliError::Usage("--looseness needs a box annotation".into()));
        }
        if !(l.is_finite() && l >= 0.0) {
            return Err(CliError::Usage(format!(
                "--looseness must be nonnegative, got {l}"
            )));
        }
        ann.looseness = l;
        if l > 0.0 {
            ann.kind = AnnotationKind::LooseBox;
        }
    }
    ann.validate().map_err(|e| io_error(path, e))?;
    Ok(ann)
}

/// Runs the segmentation described by `args` without writing anything.
pub fn segment_from_args(args: &SegmentArgs) -> CliResult<Segmentation> {
    let strategy = args.sigma.strategy()?;
    let truth = match (&strategy, &args.truth) {
        (SigmaStrategy::Best { .. }, Some(p)) => {
            Some(SegmentationMask::load(p).map_err(|e| io_error(p, e))?)
        }
        (SigmaStrategy::Best { .. }, None) => {
            return Err(CliError::Usage("--sigma-mode best needs --truth".into()));
        }
        (_, Some(_)) => {
            return Err(CliError::Usage(
                "--truth only applies to --sigma-mode best".into(),
            ))
        }
        (_, None) => None,
    };
    let extraction = args.solver.settings()?;
    let ann = load_annotation(&args.annotation, args.looseness)?;
    let image = load_image(&args.image).map_err(|e| io_error(&args.image, e))?;
    let prepared = PreparedImage::new(image, args.superpixels)?;
    Ok(match truth {
        Some(truth) => {
            let grid = match &strategy {
                SigmaStrategy::Best { grid } => grid.clone(),
                _ => sigma_grid(),
            };
            segment_best_sigma(&prepared, &ann, &truth, &grid, &extraction)?.0
        }
        None => {
            let affinity = prepared.affinity(&strategy)?;
            segment_prepared(&prepared, &affinity, &strategy, &ann, &extraction)?
        }
    })
}

fn segment(args: &SegmentArgs, out: &mut dyn Write) -> CliResult<()> {
    let seg = segment_from_args(args)?;
    seg.mask
        .save_png(&args.out)
        .map_err(|e| io_error(&args.out, e))?;
    let diag_path = diagnostics_path(&args.out);
    let diag =
        serde_json::to_string_pretty(&seg.diagnostics).expect("diagnostics serialize") + "\n";
    std::fs::write(&diag_path, diag).map_err(|e| io_error(&diag_path, e))?;
    for w in &seg.diagnostics.warnings {
        log::warn!("{w}");
    }
    writeln!(
        out,
        "{}: {} foreground pixels, {} clusters; diagnostics in {}",
        args.out.display(),
        seg.diagnostics.foreground_pixels,
        seg.diagnostics.cluster_count,
        diag_path.display()
    )
    .map_err(|e| CliError::Input(e.to_string()))
}

fn serve(args: &ServeArgs) -> CliResult<()> {
    let sigma = args.sigma.strategy()?;
    if matches!(sigma, SigmaStrategy::Best { .. }) {
        return Err(CliError::Usage(
            "the service cannot use --sigma-mode best".into(),
        ));
    }
    let config = ServiceConfig {
        superpixels: args.superpixels,
        sigma,
        extraction: args.solver.settings()?,
    };
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Input(e.to_string()))?;
    runtime
        .block_on(service::serve(addr, config))
        .map_err(|e| CliError::Input(format!("{addr}: {e}")))
}

fn write_fixtures(args: &FixturesArgs, out: &mut dyn Write) -> CliResult<()> {
    std::fs::create_dir_all(&args.out).map_err(|e| io_error(&args.out, e))?;
    let protocol = ScribbleProtocol::default();
    for f in fixtures() {
        let base = args.out.join(f.name);
        let path = |suffix: &str| PathBuf::from(format!("{}{suffix}", base.display()));
        let image = path(".png");
        f.image.save(&image).map_err(|e| io_error(&image, e))?;
        f.truth.save_png(path("-truth.png"))?;
        let scribble = generate_synthetic_scribbles(&f.truth, &protocol)?.foreground_only();
        std::fs::write(path("-scribble.json"), scribble.to_json())
            .map_err(|e| io_error(&base, e))?;
        let boxed = Annotation::bounding_box(f.rect);
        std::fs::write(path("-box.json"), boxed.to_json()).map_err(|e| io_error(&base, e))?;
        writeln!(out, "{}", image.display()).map_err(|e| CliError::Input(e.to_string()))?;
    }
    Ok(())
}

fn eval(args: &EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let settings = SegmentSettings {
        superpixels: args.superpixels,
        sigma: args.sigma.strategy()?,
        extraction: args.solver.settings()?,
    };
    let fx = fixtures();
    let protocol = ScribbleProtocol::default();
    let want = |s: Suite| args.suite == s || args.suite == Suite::All;
    let mut reports = Vec::new();
    if want(Suite::Scribble) {
        reports.push(("scribble", run_scribble_suite(&fx, &protocol, &settings)?));
    }
    if want(Suite::Looseness) {
        reports.push((
            "looseness",
            run_looseness_sweep(&fx, &LOOSENESS_LEVELS, &settings)?,
        ));
    }
    if want(Suite::Errors) {
        reports.push((
            "scribble-errors",
            run_scribble_error_sweep(&fx, &protocol, &settings)?,
        ));
    }
    for (stem, report) in &reports {
        report.write(&args.out, stem)?;
        for s in &report.summary {
            writeln!(
                out,
                "{stem:<16} level {:>5} error {:.4} jaccard {:.4} dsc {:.4}",
                s.level, s.mean_error_rate, s.mean_jaccard, s.mean_dsc
            )
            .map_err(|e| CliError::Input(e.to_string()))?;
        }
    }
    Ok(())
}
