//! Command-line front end.
//!
//! Every subcommand reads a JSON model file (see [`crate::modelfile`]) and
//! produces CSV on stdout, or in the file named by `--out`. A short
//! human-readable summary goes to stderr. All artifacts are computed before
//! anything is written, so a failing run leaves no files behind.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 bad model or parameters
//! (including a violated net profit condition), 3 numerical failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::Error;
use crate::initial_values::{self, InitialValues, Route, RowKind};
use crate::model::Pmf;
use crate::modelfile::{DistJson, LoadedModel, ModelFile, PmfJson};
use crate::oracle::{self, SimConfig};
use crate::pgf::{unit_disk_roots, Root, RootConfig, RootSet};
use crate::survival::{self, UltimateOptions};

#[derive(Debug, Parser)]
#[command(name = "ruinwalk", version, about = "Survival probabilities for discrete renewal risk models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Ultimate survival phi(0..=u_max) as CSV `u,phi`.
    Solve(SolveArgs),
    /// Finite-time survival phi(u, T) as CSV `u,T,phi`.
    Finite(FiniteArgs),
    /// Unit-disk roots as CSV `re,im,multiplicity,residual`.
    Roots(RootsArgs),
    /// Monte Carlo estimate of phi(u, T) as CSV `u,estimate,se`.
    Simulate(SimulateArgs),
    /// Truncate the interarrival law and emit the resulting model file.
    Truncate(TruncateArgs),
}

#[derive(Debug, Args)]
struct RootTols {
    /// Roots closer than this are merged into one multiple root.
    #[arg(long, default_value = "1e-6")]
    cluster_tol: f64,
    /// Roots this close to s = 1 are treated as the trivial root.
    #[arg(long, default_value = "1e-7")]
    unit_exclusion: f64,
    /// Slack on |s| <= 1.
    #[arg(long, default_value = "1e-9")]
    boundary_tol: f64,
    /// Bound on |G(root) - 1| for an accepted root.
    #[arg(long, default_value = "1e-8")]
    residual_tol: f64,
    /// Largest move allowed during root polishing.
    #[arg(long, default_value = "1e-6")]
    max_polish_move: f64,
}

impl RootTols {
    fn config(&self) -> RootConfig {
        RootConfig {
            cluster_tol: self.cluster_tol,
            unit_exclusion: self.unit_exclusion,
            boundary_tol: self.boundary_tol,
            residual_tol: self.residual_tol,
            max_polish_move: self.max_polish_move,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RouteArg {
    /// Linear solve checked against the factored route.
    Checked,
    Linear,
    ClosedForm,
    Factored,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// JSON model file.
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    u_max: usize,
    /// Also emit phi(u, T) at this horizon as a third column.
    #[arg(long)]
    t_max: Option<usize>,
    /// How the initial values are obtained.
    #[arg(long, value_enum, default_value_t = RouteArg::Checked)]
    route: RouteArg,
    /// Largest allowed gap between the linear and factored initial values.
    #[arg(long, default_value = "1e-10")]
    route_tol: f64,
    /// Slack on [0, 1] bounds and monotonicity of the table.
    #[arg(long, default_value = "1e-9")]
    bound_tol: f64,
    /// Error budget of the forward recurrence.
    #[arg(long, default_value = "1e-10")]
    recurrence_budget: f64,
    /// Run the recurrence to u_max without switching to the factored series.
    #[arg(long)]
    no_fallback: bool,
    /// Write the assembled initial-value system as CSV.
    #[arg(long)]
    dump_system: Option<PathBuf>,
    /// Write the generating-function coefficients as CSV `k,coeff`.
    #[arg(long)]
    xi: Option<PathBuf>,
    /// Write a JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tols: RootTols,
}

#[derive(Debug, Args)]
struct FiniteArgs {
    /// JSON model file.
    model: PathBuf,
    #[arg(long, default_value_t = 10)]
    u_max: usize,
    #[arg(long, default_value_t = 10)]
    t_max: usize,
    /// Emit only T = t_max instead of every horizon.
    #[arg(long)]
    last_only: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RootsArgs {
    /// JSON model file.
    model: PathBuf,
    /// Also draw the roots against the unit circle.
    #[arg(long)]
    svg: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tols: RootTols,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// JSON model file.
    model: PathBuf,
    #[arg(long, default_value_t = 1_000_000)]
    paths: u64,
    #[arg(long, default_value_t = 200)]
    horizon: usize,
    #[arg(long, env = "RUINWALK_SEED", default_value_t = oracle::DEFAULT_SEED)]
    seed: u64,
    /// Initial capitals, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0")]
    u: Vec<i64>,
    #[arg(long, default_value_t = 1)]
    shards: usize,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TruncateArgs {
    /// JSON model file.
    model: PathBuf,
    /// Truncation point; defaults to the file's `truncate_m`.
    #[arg(long)]
    m: Option<i64>,
    /// Move mass from this claim value to 0 so the drift is preserved.
    #[arg(long)]
    rebalance_l: Option<i64>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[command(flatten)]
    tols: RootTols,
}

/// Everything `solve` knows about a run.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub model: ModelEcho,
    pub drift: f64,
    pub roots: Vec<Root>,
    pub pi: Vec<f64>,
    pub route: Route,
    pub route_gap: Option<f64>,
    pub residual: f64,
    pub phi: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub finite: Option<FiniteEcho>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct ModelEcho {
    pub claim: Pmf,
    pub interarrival: Pmf,
    pub step: Pmf,
    pub m: usize,
}

#[derive(Debug, Serialize)]
pub struct FiniteEcho {
    pub t: usize,
    pub phi: Vec<f64>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure { code: if e.is_numerical() { 3 } else { 2 }, message: e.to_string() }
    }
}

/// What a subcommand produced, written only once everything succeeded.
#[derive(Default)]
struct Output {
    main: String,
    out: Option<PathBuf>,
    files: Vec<(PathBuf, String)>,
    summary: String,
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Finite(a) => finite(a),
        Command::Roots(a) => roots(a),
        Command::Simulate(a) => simulate(a),
        Command::Truncate(a) => truncate(a),
    };
    match result.and_then(emit) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn emit(output: Output) -> Result<(), Failure> {
    let io = |p: &Path, e: std::io::Error| Failure { code: 1, message: format!("{}: {e}", p.display()) };
    for (path, text) in &output.files {
        std::fs::write(path, text).map_err(|e| io(path, e))?;
    }
    match &output.out {
        Some(path) => std::fs::write(path, &output.main).map_err(|e| io(path, e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.main.as_bytes())
                .map_err(|e| io(Path::new("<stdout>"), e))?;
        }
    }
    eprint!("{}", output.summary);
    Ok(())
}

fn load(path: &Path) -> Result<LoadedModel, Failure> {
    Ok(ModelFile::read(path)?.build()?)
}

fn three(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(",")
}

fn solve(a: SolveArgs) -> Result<Output, Failure> {
    let loaded = load(&a.model)?;
    let model = &loaded.model;
    model.require_net_profit()?;
    let roots = unit_disk_roots(model, &a.tols.config())?;
    let init: InitialValues = match a.route {
        RouteArg::Checked => initial_values::solve_checked(model, &roots, a.route_tol)?,
        RouteArg::Linear => initial_values::solve_linear(&initial_values::build_system(model, &roots)?)?,
        RouteArg::ClosedForm => initial_values::solve_closed_form(model, &roots)?,
        RouteArg::Factored => initial_values::solve_factored(model, &roots)?,
    };
    let opts = UltimateOptions {
        fallback: !a.no_fallback,
        bound_tol: a.bound_tol,
        recurrence_budget: a.recurrence_budget,
    };
    let table = survival::ultimate_survival(model, &roots, &init, a.u_max, &opts)?;
    let finite = match a.t_max {
        Some(t) => Some(survival::finite_survival(model, a.u_max, t)?),
        None => None,
    };

    let mut warnings = Vec::new();
    if a.route == RouteArg::Checked && init.route == Route::Factored {
        warnings.push(match init.route_gap {
            Some(gap) => format!("linear solve disagreed with the factored route by {gap:e}; factored values used"),
            None => "linear solve failed; factored values used".to_string(),
        });
    }
    if let Some(from) = table.fallback_from {
        warnings.push(format!(
            "recurrence stopped at its stability horizon; phi(u) for u >= {from} taken from the factored series"
        ));
    }
    if let Some(tail) = loaded.original_tail() {
        let (lo, hi) = if table.phis.len() > model.m() + 1 {
            survival::truncation_bounds(model, tail, &table)
        } else {
            let longer = survival::ultimate_survival(model, &roots, &init, model.m() + 1, &opts)?;
            survival::truncation_bounds(model, tail, &longer)
        };
        warnings.push(format!(
            "interarrival truncated at m = {}; tail P(X - c*theta <= -m-1) = {tail:e}, \
             phi(0) - sum phi(i) f(-i) bounded in [{lo:e}, {hi:e}]",
            model.m()
        ));
    }

    let mut out = Output { out: a.out.clone(), ..Output::default() };
    match &finite {
        Some(f) => {
            out.main.push_str("u,phi,phi_finite\n");
            for (u, (p, q)) in table.phis.iter().zip(&f.phis).enumerate() {
                let _ = writeln!(out.main, "{u},{p},{q}");
            }
        }
        None => {
            out.main.push_str("u,phi\n");
            for (u, p) in table.phis.iter().enumerate() {
                let _ = writeln!(out.main, "{u},{p}");
            }
        }
    }
    if let Some(path) = &a.dump_system {
        let sys = initial_values::build_system(model, &roots)?;
        let mut csv = String::from("row,kind,col,re,im\n");
        for (i, (row, kind)) in sys.matrix.iter().zip(&sys.row_kinds).enumerate() {
            let kind = match kind {
                RowKind::Root { order, .. } => format!("root_d{order}"),
                RowKind::Mean => "mean".to_string(),
            };
            for (j, v) in row.iter().enumerate() {
                let _ = writeln!(csv, "{i},{kind},{j},{},{}", v.re, v.im);
            }
            let _ = writeln!(csv, "{i},{kind},rhs,{},{}", sys.rhs[i].re, sys.rhs[i].im);
        }
        out.files.push((path.clone(), csv));
    }
    if let Some(path) = &a.xi {
        let coeffs = survival::xi_coeffs(model, &roots, &init, a.u_max.max(1))?;
        let mut csv = String::from("k,coeff\n");
        for (k, c) in coeffs.iter().enumerate() {
            let _ = writeln!(csv, "{k},{c}");
        }
        out.files.push((path.clone(), csv));
    }

    let _ = writeln!(out.summary, "m = {}, drift = {:.3}, roots = {}", model.m(), model.drift(), roots.roots.len());
    let _ = writeln!(out.summary, "phi(0..={}): {}", a.u_max, three(&table.phis));
    for w in &warnings {
        let _ = writeln!(out.summary, "warning: {w}");
    }
    if let Some(path) = &a.report {
        let report = RunReport {
            model: ModelEcho {
                claim: model.claim().clone(),
                interarrival: model.interarrival().clone(),
                step: model.step().clone(),
                m: model.m(),
            },
            drift: model.drift(),
            roots: roots.roots.clone(),
            pi: init.pi.clone(),
            route: init.route,
            route_gap: init.route_gap,
            residual: table.residual,
            phi: table.phis.clone(),
            finite: finite.map(|f| FiniteEcho { t: a.t_max.unwrap_or(0), phi: f.phis }),
            warnings,
        };
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        out.files.push((path.clone(), json + "\n"));
    }
    Ok(out)
}

fn finite(a: FiniteArgs) -> Result<Output, Failure> {
    let loaded = load(&a.model)?;
    let model = &loaded.model;
    let mut out = Output { out: a.out.clone(), ..Output::default() };
    out.main.push_str("u,T,phi\n");
    let tables = if a.last_only {
        vec![survival::finite_survival(model, a.u_max, a.t_max)?]
    } else {
        survival::finite_survival_grid(model, a.u_max, a.t_max)?
    };
    let first_t = if a.last_only { a.t_max } else { 1 };
    for u in 0..=a.u_max {
        for (i, table) in tables.iter().enumerate() {
            let _ = writeln!(out.main, "{u},{},{}", first_t + i, table.phis[u]);
        }
    }
    let last = tables.last().expect("t_max >= 1");
    let _ = writeln!(out.summary, "phi(0..={}, {}): {}", a.u_max, a.t_max, three(&last.phis));
    Ok(out)
}

fn roots(a: RootsArgs) -> Result<Output, Failure> {
    let loaded = load(&a.model)?;
    loaded.model.require_net_profit()?;
    let set = unit_disk_roots(&loaded.model, &a.tols.config())?;
    let mut out = Output { out: a.out.clone(), ..Output::default() };
    out.main.push_str("re,im,multiplicity,residual\n");
    for r in &set.roots {
        let _ = writeln!(out.main, "{},{},{},{}", r.value.re, r.value.im, r.multiplicity, r.residual);
    }
    if let Some(path) = &a.svg {
        out.files.push((path.clone(), root_svg(&set)));
    }
    let _ = writeln!(
        out.summary,
        "{} roots ({} with multiplicity) for m = {}",
        set.roots.len(),
        set.total_multiplicity(),
        set.m
    );
    for r in &set.roots {
        let _ = writeln!(
            out.summary,
            "  {:.3}{:+.3}i  |s| = {:.3}  x{}",
            r.value.re,
            r.value.im,
            r.value.norm(),
            r.multiplicity
        );
    }
    Ok(out)
}

fn root_svg(set: &RootSet) -> String {
    let mut s = String::new();
    s.push_str(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"480\" height=\"480\" viewBox=\"-1.25 -1.25 2.5 2.5\">\n",
    );
    s.push_str("<rect x=\"-1.25\" y=\"-1.25\" width=\"2.5\" height=\"2.5\" fill=\"white\"/>\n");
    s.push_str("<line x1=\"-1.2\" y1=\"0\" x2=\"1.2\" y2=\"0\" stroke=\"#999\" stroke-width=\"0.004\"/>\n");
    s.push_str("<line x1=\"0\" y1=\"-1.2\" x2=\"0\" y2=\"1.2\" stroke=\"#999\" stroke-width=\"0.004\"/>\n");
    s.push_str("<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.006\"/>\n");
    s.push_str(
        "<circle cx=\"1\" cy=\"0\" r=\"0.025\" fill=\"none\" stroke=\"#555\" stroke-width=\"0.006\"><title>s = 1</title></circle>\n",
    );
    for r in &set.roots {
        // avoid printing -0 for real roots
        let cy = if r.value.im == 0.0 { 0.0 } else { -r.value.im };
        let radius = 0.02 + 0.01 * (r.multiplicity as f64 - 1.0);
        let _ = writeln!(
            s,
            "<circle cx=\"{:.6}\" cy=\"{:.6}\" r=\"{radius:.3}\" fill=\"#c0392b\"><title>{:.6}{:+.6}i x{}</title></circle>",
            r.value.re, cy, r.value.re, r.value.im, r.multiplicity
        );
    }
    s.push_str("</svg>\n");
    s
}

fn simulate(a: SimulateArgs) -> Result<Output, Failure> {
    let loaded = load(&a.model)?;
    let mut cfg = SimConfig::new(a.paths, a.horizon, a.seed, a.u.clone());
    cfg.shards = a.shards;
    let res = oracle::simulate(&loaded.model, &cfg)?;
    let mut out = Output { out: a.out.clone(), ..Output::default() };
    out.main.push_str("u,estimate,se\n");
    for ((u, p), se) in res.u_values.iter().zip(&res.estimates).zip(&res.std_errors) {
        let _ = writeln!(out.main, "{u},{p},{se}");
        let _ = writeln!(out.summary, "phi({u}, {}) ~ {p:.3} (se {se:.1e})", a.horizon);
    }
    let _ = writeln!(out.summary, "{} paths, seed {}", res.paths, a.seed);
    Ok(out)
}

fn truncate(a: TruncateArgs) -> Result<Output, Failure> {
    let mut file = ModelFile::read(&a.model)?;
    let Some(m) = a.m.or(file.truncate_m) else {
        return Err(Error::ParameterDomain("no truncation point: pass --m or set truncate_m".into()).into());
    };
    file.truncate_m = Some(m);
    if a.rebalance_l.is_some() {
        file.rebalance_l = a.rebalance_l;
    }
    let loaded = file.build()?;
    let model = &loaded.model;
    model.require_net_profit()?;
    let tail = loaded.original_tail().unwrap_or(0.0);
    let roots = unit_disk_roots(model, &a.tols.config())?;
    let init = initial_values::solve(model, &roots)?;
    let table = survival::ultimate_survival(model, &roots, &init, model.m() + 1, &UltimateOptions::default())?;
    let (lo, hi) = survival::truncation_bounds(model, tail, &table);

    let explicit = |p: &Pmf| DistJson::Pmf { pmf: PmfJson { offset: p.offset(), weights: p.weights().to_vec() } };
    let echo = ModelFile {
        claim: explicit(model.claim()),
        interarrival: explicit(model.interarrival()),
        truncate_m: None,
        rebalance_l: None,
        tail_eps: None,
    };
    let mut out = Output { out: a.out.clone(), ..Output::default() };
    out.main = serde_json::to_string_pretty(&echo).expect("model serializes") + "\n";
    let original_drift = loaded.claim.mean() - loaded.interarrival.mean();
    let _ = writeln!(out.summary, "m = {m}, drift {original_drift:.6} -> {:.6}", model.drift());
    let _ = writeln!(out.summary, "tail P(X - c*theta <= -m-1) = {tail:.3e}");
    let _ = writeln!(out.summary, "phi(0) - sum phi(i) f(-i) in [{lo:.3e}, {hi:.3e}]");
    Ok(out)
}
