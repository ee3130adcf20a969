//! Command-line front end: argument and config parsing, subcommand dispatch,
//! and atomic output.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bayes::{divergence_report, mmse_curve, LatentGrid};
use crate::error::{Error, Result};
use crate::feasible::{self, enumerate_by_grid, enumerate_feasible, size_band_filter, FeasibleSet};
use crate::inference::{
    detect, exact_search, kappa, local_search, recovery_metrics, risk_curve, write_sweep_csv,
    RiskConfig, SearchMode, SearchResult,
};
use crate::model::{sample_null, sample_planted, Adjacency, LatentPositions, Params};
use crate::phase::{parse_grid, phase_cells, phase_svg, region_label};
use crate::rng::Streams;
use crate::ustat::tail_envelope_compare;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RESOURCE: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "dense-cycle",
    version,
    about = "Planted dense cycle experiments",
    args_override_self = true
)]
pub struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output file (default: standard output).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw a graph from the planted or null model.
    Sample(SampleArgs),
    /// Run the scan test on a graph.
    Detect(SearchArgs),
    /// Estimate the hidden cycle of a graph.
    Recover(SearchArgs),
    /// Detection risk and recovery over the (a, b) phase grid.
    Sweep(SweepArgs),
    /// Exact divergences, mutual information and MMSE at tiny n.
    Divergence(DivergenceArgs),
    /// Monte Carlo tails of the centered edge count and decoupled overlap.
    UstatTail(TailArgs),
    /// Exact MMSE along the interpolation path.
    Mmse(MmseArgs),
    /// Enumerate realizable cycle graphs.
    FeasibleEnum(FeasibleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub tau: f64,
    #[arg(long)]
    pub p: f64,
    /// Off-cycle density; give this or --r.
    #[arg(long)]
    pub q: Option<f64>,
    /// Overall density `tau p + (1 - tau) q`.
    #[arg(long)]
    pub r: Option<f64>,
}

impl ModelArgs {
    pub fn params(&self) -> Result<Params> {
        match (self.q, self.r) {
            (Some(q), r) => Params::new(self.n, self.tau, self.p, q, r),
            (None, Some(r)) => Params::from_density(self.n, self.tau, self.p, r),
            (None, None) => Err(Error::InvalidParams("one of --q or --r is required".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Edges,
    Bits,
    Bin,
    Json,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Sample from G(n, r) instead.
    #[arg(long)]
    pub null: bool,
    #[arg(long, value_enum, default_value_t = GraphFormat::Edges)]
    pub format: GraphFormat,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Graph file (edge list or binary); drawn from the model if absent.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Draw the graph from G(n, r) when no input is given.
    #[arg(long)]
    pub null: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::Local)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    /// Start one restart at the sampled positions (sampled input only).
    #[arg(long)]
    pub truth_init: bool,
    /// Grid recorded with the feasible set in exact mode.
    #[arg(long, default_value_t = 0)]
    pub grid_m: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exact,
    Local,
}

impl From<ModeArg> for SearchMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => SearchMode::Exact,
            ModeArg::Local => SearchMode::Local,
        }
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: usize,
    /// Phase grid `a=lo:hi:step,b=lo:hi:step` with `p = n^-a`, `tau = n^-b`.
    #[arg(long, default_value = "a=0.1:0.9:0.1,b=0.1:0.9:0.1")]
    pub grid: String,
    /// Density ratio `p / q`.
    #[arg(long, default_value_t = 2.0)]
    pub rho: f64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Local)]
    pub mode: ModeArg,
    #[arg(long)]
    pub truth_init: bool,
    #[arg(long, default_value_t = 0)]
    pub grid_m: usize,
    /// Also write an SVG of the diagram here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DivergenceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 16)]
    pub grid_m: usize,
    /// Number of theta points in [r, p] for the MMSE column.
    #[arg(long, default_value_t = 5)]
    pub thetas: usize,
}

#[derive(Debug, Args)]
pub struct TailArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct MmseArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 16)]
    pub grid_m: usize,
    /// Number of theta points in [r, 1].
    #[arg(long, default_value_t = 20)]
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EnumMethod {
    Ordering,
    Grid,
    /// Run both and require identical sets.
    Both,
}

#[derive(Debug, Args)]
pub struct FeasibleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 120)]
    pub grid_m: usize,
    #[arg(long, value_enum, default_value_t = EnumMethod::Ordering)]
    pub method: EnumMethod,
    /// Keep only graphs inside the edge-count band.
    #[arg(long)]
    pub band: bool,
}

/// Failure of a built-in consistency check.
#[derive(Debug)]
struct CheckFailed(String);

enum Outcome {
    Done,
    Check(CheckFailed),
}

/// Parses `args` (including the program name), runs, and returns the exit
/// code. Messages go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let (cli, resolved) = match parse(&args) {
        Ok(v) => v,
        Err(ParseFailure::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
        Err(ParseFailure::Lib(e)) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    if cli.threads > 0 {
        // ignore a pool that is already built, as in repeated in-process runs
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match dispatch(&cli, &resolved) {
        Ok(Outcome::Done) => EXIT_OK,
        Ok(Outcome::Check(CheckFailed(msg))) => {
            eprintln!("check failed: {msg}");
            EXIT_FAILURE
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParams(_)
        | Error::Domain(_)
        | Error::Parse(_)
        | Error::SizeMismatch { .. } => EXIT_CONFIG,
        Error::Resource(_) => EXIT_RESOURCE,
        _ => EXIT_FAILURE,
    }
}

enum ParseFailure {
    Clap(clap::Error),
    Lib(Error),
}

impl From<clap::Error> for ParseFailure {
    fn from(e: clap::Error) -> Self {
        ParseFailure::Clap(e)
    }
}

impl From<Error> for ParseFailure {
    fn from(e: Error) -> Self {
        ParseFailure::Lib(e)
    }
}

// Finds the config file and subcommand without validating, then parses with
// the config entries placed before every user flag so that later flags win.
fn parse(args: &[OsString]) -> std::result::Result<(Cli, String), ParseFailure> {
    let (config, sub_pos) = prescan(args);
    let mut argv = args.to_vec();
    if let (Some(path), Some(pos)) = (config, sub_pos) {
        let sub = args[pos].to_string_lossy().into_owned();
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Error::Parse(format!("cannot read config {}: {e}", path.display())))?;
        let injected = config_tokens(&text, &sub)?;
        let mut user: Vec<OsString> = args[1..].to_vec();
        user.remove(pos - 1);
        argv = vec![args[0].clone(), sub.into()];
        argv.extend(injected);
        argv.extend(user);
    }
    let matches = Cli::command().try_get_matches_from(&argv)?;
    let cli = Cli::from_arg_matches(&matches)?;
    let resolved = resolved_config(&matches);
    Ok((cli, resolved))
}

fn prescan(args: &[OsString]) -> (Option<PathBuf>, Option<usize>) {
    let root = Cli::command();
    let mut config = None;
    let mut sub = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if a == "--config" {
            config = args.get(i + 1).map(PathBuf::from);
            i += 1;
        } else if let Some(v) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else if sub.is_none() && !a.starts_with('-') && root.find_subcommand(a.as_ref()).is_some()
        {
            sub = Some(i);
        }
        i += 1;
    }
    (config, sub)
}

/// Turns `key=value` lines into flags for `sub`. Boolean flags take `true`
/// or `false`; `#` starts a comment.
pub fn config_tokens(text: &str, sub: &str) -> Result<Vec<OsString>> {
    let root = Cli::command();
    let cmd = root
        .find_subcommand(sub)
        .ok_or_else(|| Error::Parse(format!("unknown subcommand {sub}")))?;
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!("config line {}: expected key=value", lineno + 1))
        })?;
        let key = k.trim().replace('_', "-");
        let val = v.trim();
        if key == "config" {
            return Err(Error::Parse(
                "config files cannot include other config files".into(),
            ));
        }
        let arg = cmd
            .get_arguments()
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                Error::Parse(format!("config line {}: unknown key {k:?}", lineno + 1))
            })?;
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            match val {
                "true" => out.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(Error::Parse(format!(
                        "config key {k}: expected true or false"
                    )))
                }
            }
        } else {
            out.push(format!("--{key}").into());
            out.push(val.into());
        }
    }
    Ok(out)
}

fn resolved_config(m: &clap::ArgMatches) -> String {
    // group ids and flags that do not affect results are left out
    fn push(parts: &mut Vec<String>, m: &clap::ArgMatches) {
        for id in m.ids() {
            let name = id.as_str();
            if name.starts_with(|c: char| c.is_ascii_uppercase())
                || matches!(name, "threads" | "out" | "config")
            {
                continue;
            }
            if let Ok(Some(vals)) = m.try_get_raw(id.as_str()) {
                let v: Vec<String> = vals.map(|v| v.to_string_lossy().into_owned()).collect();
                if !v.is_empty() {
                    parts.push(format!("{id}={}", v.join(";")));
                }
            }
        }
    }
    let mut parts = Vec::new();
    if let Some((name, sub)) = m.subcommand() {
        parts.push(format!("command={name}"));
        push(&mut parts, sub);
    } else {
        push(&mut parts, m);
    }
    parts.join(" ")
}

fn dispatch(cli: &Cli, resolved: &str) -> Result<Outcome> {
    let streams = Streams::new(cli.seed);
    let header = format!("dense-cycle {resolved}");
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Sample(a) => cmd_sample(a, &streams, out),
        Command::Detect(a) => cmd_search(a, &streams, out, &header, false),
        Command::Recover(a) => cmd_search(a, &streams, out, &header, true),
        Command::Sweep(a) => cmd_sweep(a, &streams, out, &header),
        Command::Divergence(a) => cmd_divergence(a, out, &header),
        Command::UstatTail(a) => cmd_tail(a, &streams, out, &header),
        Command::Mmse(a) => cmd_mmse(a, out, &header),
        Command::FeasibleEnum(a) => cmd_feasible(a, out, &header),
    }
}

/// Writes `bytes` to `path` through a temporary file and rename, or to
/// standard output.
pub fn write_output(path: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match path {
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
            Ok(())
        }
        Some(p) => {
            let dir = p
                .parent()
                .filter(|d| !d.as_os_str().is_empty())
                .unwrap_or(Path::new("."));
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(bytes)?;
            tmp.persist(p).map_err(|e| Error::Io(e.to_string()))?;
            Ok(())
        }
    }
}

fn json_with_header<T: Serialize>(header: &str, value: &T) -> Result<Vec<u8>> {
    #[derive(Serialize)]
    struct Wrapped<'a, T> {
        config: &'a str,
        #[serde(flatten)]
        value: &'a T,
    }
    let mut v = serde_json::to_vec_pretty(&Wrapped {
        config: header,
        value,
    })
    .map_err(|e| Error::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

#[derive(Serialize)]
struct SampleOut {
    params: Params,
    seed: u64,
    null: bool,
    a: String,
    x: Option<String>,
    z: Option<Vec<f64>>,
}

fn cmd_sample(a: &SampleArgs, streams: &Streams, out: Option<&Path>) -> Result<Outcome> {
    let params = a.model.params()?;
    let mut rng = streams.rng(&[0]);
    let (graph, truth) = if a.null {
        (sample_null(&params, &mut rng), None)
    } else {
        let s = sample_planted(&params, &mut rng)?;
        (s.a, Some((s.x, s.z)))
    };
    let bytes = match a.format {
        GraphFormat::Edges => graph.to_edge_list().into_bytes(),
        GraphFormat::Bits => format!("{}\n", graph.to_bitstring()).into_bytes(),
        GraphFormat::Bin => graph.to_bytes(),
        GraphFormat::Json => {
            let v = SampleOut {
                params,
                seed: streams.seed(),
                null: a.null,
                a: graph.to_bitstring(),
                x: truth.as_ref().map(|t| t.0.to_bitstring()),
                z: truth.map(|t| t.1.into_inner()),
            };
            let mut b = serde_json::to_vec_pretty(&v).map_err(|e| Error::Io(e.to_string()))?;
            b.push(b'\n');
            b
        }
    };
    write_output(out, &bytes)?;
    Ok(Outcome::Done)
}

/// Reads a graph in the binary format or as an edge list.
pub fn read_graph(path: &Path, n: usize) -> Result<Adjacency> {
    let bytes = std::fs::read(path)?;
    let g = if bytes.starts_with(b"DCAJ") {
        Adjacency::from_bytes(&bytes)?
    } else {
        let text =
            String::from_utf8(bytes).map_err(|_| Error::Parse("graph file is not UTF-8".into()))?;
        Adjacency::from_edge_list(&text, Some(n))?
    };
    if g.n() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: g.n(),
        });
    }
    Ok(g)
}

#[derive(Serialize)]
struct SearchOut {
    l_hat: f64,
    kappa: f64,
    detect: bool,
    search_mode: SearchMode,
    x_hat: String,
    edges_hat: usize,
    mse: Option<f64>,
    recovery_ratio: Option<f64>,
}

fn cmd_search(
    a: &SearchArgs,
    streams: &Streams,
    out: Option<&Path>,
    header: &str,
    recover: bool,
) -> Result<Outcome> {
    let params = a.model.params()?;
    let mut rng = streams.rng(&[0]);
    let (graph, truth): (Adjacency, Option<(Adjacency, LatentPositions)>) = match &a.input {
        Some(p) => (read_graph(p, params.n())?, None),
        None if a.null => (sample_null(&params, &mut rng), None),
        None => {
            let s = sample_planted(&params, &mut rng)?;
            (s.a, Some((s.x, s.z)))
        }
    };
    let result: SearchResult = match a.mode {
        ModeArg::Exact => {
            let set = size_band_filter(&enumerate_feasible(params.n(), params.tau(), a.grid_m)?);
            exact_search(&graph, &set)?
        }
        ModeArg::Local => {
            let init = if a.truth_init {
                truth.as_ref().map(|t| &t.1)
            } else {
                None
            };
            local_search(&graph, &params, a.restarts, init, &mut streams.rng(&[1]))?
        }
    };
    let metrics = match &truth {
        Some((x, _)) => Some(recovery_metrics(&result.x_hat, x, &params)?),
        None => None,
    };
    let body = SearchOut {
        l_hat: result.l_hat,
        kappa: kappa(&params),
        detect: detect(&result, &params),
        search_mode: result.mode,
        x_hat: result.x_hat.to_bitstring(),
        edges_hat: result.x_hat.edge_count(),
        mse: metrics.map(|m| m.0),
        recovery_ratio: metrics.map(|m| m.1),
    };
    let bytes = if recover {
        let mut s = format!(
            "# {header}\n# l_hat {} detect {}\n",
            body.l_hat, body.detect
        );
        if let (Some(mse), Some(ratio)) = (body.mse, body.recovery_ratio) {
            s.push_str(&format!("# mse {mse} recovery_ratio {ratio}\n"));
        }
        s.push_str(&result.x_hat.to_edge_list());
        s.into_bytes()
    } else {
        json_with_header(header, &body)?
    };
    write_output(out, &bytes)?;
    Ok(Outcome::Done)
}

fn cmd_sweep(
    a: &SweepArgs,
    streams: &Streams,
    out: Option<&Path>,
    header: &str,
) -> Result<Outcome> {
    let (ra, rb) = parse_grid(&a.grid)?;
    if !(a.rho >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "rho = {} must be at least 1",
            a.rho
        )));
    }
    let cells = phase_cells(a.n, &ra, &rb, a.rho);
    let cfg = RiskConfig {
        trials: a.trials,
        mode: a.mode.into(),
        restarts: a.restarts,
        truth_init: a.truth_init,
        grid_m: a.grid_m,
    };
    let mut recs = risk_curve(&cells, &cfg, streams)?;
    for r in &mut recs {
        if let (Some(x), Some(y)) = (r.a, r.b) {
            r.region = Some(region_label(x, y).letter());
        }
    }
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &recs, &[header.to_string()])?;
    write_output(out, &buf)?;
    if let Some(svg) = &a.svg {
        write_output(Some(svg), phase_svg(&recs).as_bytes())?;
    }
    Ok(Outcome::Done)
}

fn theta_points(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    match k {
        0 => vec![],
        1 => vec![lo],
        _ => (0..k)
            .map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64)
            .collect(),
    }
}

fn cmd_divergence(a: &DivergenceArgs, out: Option<&Path>, header: &str) -> Result<Outcome> {
    let params = a.model.params()?;
    let grid = LatentGrid::new(a.grid_m, params.n())?;
    let thetas = theta_points(params.r(), params.p(), a.thetas);
    let rep = divergence_report(&params, &grid, &thetas)?;
    write_output(out, &json_with_header(header, &rep)?)?;
    let gap = (rep.mi_direct - rep.mi_via_kl).abs();
    if gap > 1e-9 {
        return Ok(Outcome::Check(CheckFailed(format!(
            "mutual information identity off by {gap}"
        ))));
    }
    Ok(Outcome::Done)
}

fn cmd_tail(a: &TailArgs, streams: &Streams, out: Option<&Path>, header: &str) -> Result<Outcome> {
    let params = a.model.params()?;
    let rep = tail_envelope_compare(&params, a.trials, streams)?;
    let mut s = format!("# {header}\n");
    for (stat, k) in rep.statistics.iter().zip(&rep.k) {
        s.push_str(&format!("# K[{}] = {k}\n", stat.name()));
    }
    s.push_str(&rep.to_csv());
    write_output(out, s.as_bytes())?;
    Ok(Outcome::Done)
}

fn cmd_mmse(a: &MmseArgs, out: Option<&Path>, header: &str) -> Result<Outcome> {
    let params = a.model.params()?;
    let grid = LatentGrid::new(a.grid_m, params.n())?;
    let thetas = theta_points(params.r(), 1.0, a.points);
    let curve = mmse_curve(&params, &thetas, &grid)?;
    let mut s = format!("# {header}\ntheta,mmse\n");
    for (t, m) in thetas.iter().zip(&curve) {
        s.push_str(&format!("{t},{m}\n"));
    }
    write_output(out, s.as_bytes())?;
    if let Some(w) = curve.windows(2).find(|w| w[1] > w[0] + 1e-10) {
        return Ok(Outcome::Check(CheckFailed(format!(
            "mmse increased from {} to {}",
            w[0], w[1]
        ))));
    }
    Ok(Outcome::Done)
}

fn cmd_feasible(a: &FeasibleArgs, out: Option<&Path>, header: &str) -> Result<Outcome> {
    let set: FeasibleSet = match a.method {
        EnumMethod::Ordering => enumerate_feasible(a.n, a.tau, a.grid_m)?,
        EnumMethod::Grid => enumerate_by_grid(a.n, a.tau, a.grid_m)?,
        EnumMethod::Both => {
            let s1 = enumerate_feasible(a.n, a.tau, a.grid_m)?;
            let s2 = enumerate_by_grid(a.n, a.tau, a.grid_m)?;
            if !s1.same_members(&s2) {
                return Ok(Outcome::Check(CheckFailed(format!(
                    "oracles disagree: ordering {} graphs, grid {} graphs",
                    s1.len(),
                    s2.len()
                ))));
            }
            s1
        }
    };
    let set = if a.band { size_band_filter(&set) } else { set };
    let text = format!("# {header}\n{}", set.to_text());
    write_output(out, text.as_bytes())?;
    if set.len() as f64 > feasible::counting_bound(a.n) {
        return Ok(Outcome::Check(CheckFailed(format!(
            "{} graphs exceed n^(3n)",
            set.len()
        ))));
    }
    Ok(Outcome::Done)
}
