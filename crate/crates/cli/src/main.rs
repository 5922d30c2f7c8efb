//! `stubborn-dyn`: generate graphs, run the dynamics, compute equilibria,
//! spectra and convergence-time bounds.
//!
//! Exit status: 0 on success, 1 on any error, 2 when a computation ran but
//! missed its target (no convergence, oscillation, method disagreement).

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;
use rayon::prelude::*;
use serde_json::{json, Value};

use stubborn_dyn::bounds::{bound_report, ConductanceMode, EXACT_CAP};
use stubborn_dyn::dynamics::{run, DynamicsConfig, NormKind, StopReason};
use stubborn_dyn::equilibrium::{consensus_equilibrium, cross_validate};
use stubborn_dyn::graph::{
    generate, AugmentedGraph, Graph, GraphKind, Stubbornness, StubbornnessProfile,
};
use stubborn_dyn::spectral::{epsilon_shift, lambda_sub, slem, tau_bracket};
use stubborn_dyn::{io, Error, Result};

const THREADS_ENV: &str = "STUBBORN_DYN_THREADS";
/// Mixed into `--seed` for random initial opinions, so they differ from
/// the graph's random stream.
const OPINION_STREAM: u64 = 0x6f70_696e_696f_6e73;

#[derive(Parser)]
#[command(
    name = "stubborn-dyn",
    version,
    about = "Opinion dynamics with stubborn agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as an edge list.
    Generate {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate the dynamics; writes the trajectory CSV.
    Simulate {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        stubborn: StubbornArgs,
        #[arg(long)]
        opinions: Option<PathBuf>,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1e-9)]
        nu: f64,
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value_t = Norm::Pi)]
        norm: Norm,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Equilibrium by every exact method; writes `i,x_inf` CSV.
    Equilibrium {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        stubborn: StubbornArgs,
        #[arg(long)]
        opinions: Option<PathBuf>,
        /// Also write the hitting-probability matrix here.
        #[arg(long)]
        hitting: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectral report as JSON.
    Spectral {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        stubborn: StubbornArgs,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Bound report as JSON.
    Bounds {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        stubborn: StubbornArgs,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact time and bounds over a parameter sweep, as CSV.
    Sweep {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        stubborn: StubbornArgs,
        #[arg(long, value_enum)]
        sweep: SweepVar,
        /// `lo:hi:count`, `lo:hi:count:log`, or a comma list.
        #[arg(long)]
        range: String,
        /// Stubbornness of agent 1 when sweeping `n` (`inf` allowed).
        #[arg(long, default_value = "1")]
        k1: String,
        #[arg(long, value_enum, default_value_t = Mode::Auto)]
        mode: Mode,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Source {
    /// Edge-list file.
    #[arg(long, conflicts_with = "kind")]
    graph: Option<PathBuf>,
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    side: Option<usize>,
    /// Shortcuts per node (small-world).
    #[arg(long, default_value_t = 1)]
    q: usize,
    /// Shortcut distance exponent (small-world).
    #[arg(long, default_value_t = 2.0)]
    alpha: f64,
    /// Edge probability (Erdős–Rényi).
    #[arg(long, conflicts_with = "lambda")]
    p: Option<f64>,
    /// Sets `p = λ ln n / n` (Erdős–Rényi).
    #[arg(long)]
    lambda: Option<f64>,
    /// Degree (random regular).
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Clone)]
struct StubbornArgs {
    /// Profile file of `i K` lines.
    #[arg(long, conflicts_with = "stubborn")]
    profile: Option<PathBuf>,
    /// Inline profile, e.g. `1:2.5,4:inf`.
    #[arg(long)]
    stubborn: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Complete,
    Ring,
    Line,
    Grid,
    Star,
    ErdosRenyi,
    SmallWorld,
    RandomRegular,
}

#[derive(ValueEnum, Clone, Copy)]
enum Norm {
    Pi,
    Euclidean,
}

#[derive(ValueEnum, Clone, Copy)]
enum Mode {
    /// Exact when the free set fits the enumeration cap.
    Auto,
    Exact,
    Heuristic,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum SweepVar {
    K1,
    N,
}

enum Outcome {
    Ok,
    Missed(String),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match dispatch(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Missed(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = match raw.trim().parse() {
        Ok(t) if t > 0 => t,
        _ => {
            return Err(Error::Parameter(format!(
                "{THREADS_ENV} must be a positive integer, got {raw:?}"
            )))
        }
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::Parameter(e.to_string()))
}

fn dispatch(command: Command) -> Result<Outcome> {
    match command {
        Command::Generate { source, out } => {
            let g = source.graph()?;
            emit(out.as_ref(), &io::write_graph(&g))?;
            Ok(Outcome::Ok)
        }
        Command::Simulate {
            source,
            stubborn,
            opinions,
            epsilon,
            nu,
            max_steps,
            norm,
            out,
        } => {
            let g = source.graph()?;
            let profile = stubborn.profile(g.n())?;
            let x0 = initial_opinions(opinions.as_ref(), source.seed, g.n())?;
            let config = DynamicsConfig {
                epsilon,
                nu,
                max_steps,
                norm: match norm {
                    Norm::Pi => NormKind::Pi,
                    Norm::Euclidean => NormKind::Euclidean,
                },
            };
            simulate(&g, &profile, &x0, &config, out.as_ref())
        }
        Command::Equilibrium {
            source,
            stubborn,
            opinions,
            hitting,
            out,
        } => {
            let g = source.graph()?;
            let profile = stubborn.profile(g.n())?;
            let x0 = initial_opinions(opinions.as_ref(), source.seed, g.n())?;
            equilibrium(&g, &profile, &x0, hitting.as_ref(), out.as_ref())
        }
        Command::Spectral {
            source,
            stubborn,
            epsilon,
            out,
        } => {
            let g = source.graph()?;
            let profile = stubborn.profile(g.n())?;
            spectral(&g, &profile, epsilon, out.as_ref())
        }
        Command::Bounds {
            source,
            stubborn,
            mode,
            out,
        } => {
            let g = source.graph()?;
            let profile = stubborn.profile(g.n())?;
            let (report, ok) = bounds_json(&g, &profile, mode)?;
            emit(
                out.as_ref(),
                &format!("{}\n", serde_json::to_string_pretty(&report).unwrap()),
            )?;
            Ok(if ok {
                Outcome::Ok
            } else {
                Outcome::Missed("power iteration did not meet its residual target".into())
            })
        }
        Command::Sweep {
            source,
            stubborn,
            sweep,
            range,
            k1,
            mode,
            out,
        } => {
            let values = parse_range(&range)?;
            let k1 = parse_level(&k1)?;
            sweep_command(&source, &stubborn, sweep, &values, k1, mode, out.as_ref())
        }
    }
}

impl Source {
    fn kind(&self) -> Result<GraphKind> {
        let kind = self.kind.ok_or_else(|| {
            Error::Parameter("a graph source is required: --graph FILE or --kind KIND".into())
        })?;
        let need_n = || {
            self.n
                .ok_or_else(|| Error::Parameter("--n is required for this kind".into()))
        };
        let need_side = || {
            self.side
                .ok_or_else(|| Error::Parameter("--side is required for this kind".into()))
        };
        Ok(match kind {
            Kind::Complete => GraphKind::Complete { n: need_n()? },
            Kind::Ring => GraphKind::Ring { n: need_n()? },
            Kind::Line => GraphKind::Line { n: need_n()? },
            Kind::Star => GraphKind::Star { n: need_n()? },
            Kind::Grid => GraphKind::Grid { side: need_side()? },
            Kind::ErdosRenyi => {
                let n = need_n()?;
                match (self.p, self.lambda) {
                    (Some(p), _) => GraphKind::ErdosRenyi { n, p },
                    (None, Some(l)) => GraphKind::erdos_renyi_lambda(n, l)?,
                    (None, None) => {
                        return Err(Error::Parameter("erdos-renyi needs --p or --lambda".into()))
                    }
                }
            }
            Kind::SmallWorld => GraphKind::SmallWorld {
                side: need_side()?,
                q: self.q,
                alpha: self.alpha,
            },
            Kind::RandomRegular => GraphKind::RandomRegular {
                n: need_n()?,
                d: self
                    .d
                    .ok_or_else(|| Error::Parameter("random-regular needs --d".into()))?,
            },
        })
    }

    fn graph(&self) -> Result<Graph> {
        match &self.graph {
            Some(path) => io::load_graph(path),
            None => generate(&self.kind()?, self.seed),
        }
    }
}

impl StubbornArgs {
    fn profile(&self, n: usize) -> Result<StubbornnessProfile> {
        match (&self.profile, &self.stubborn) {
            (Some(path), _) => io::load_profile(path, n),
            (None, Some(spec)) => {
                let text: String = spec
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| format!("{}\n", s.replace(':', " ")))
                    .collect();
                io::parse_profile(&text, n)
            }
            (None, None) => Ok(StubbornnessProfile::none(n)),
        }
    }
}

fn initial_opinions(path: Option<&PathBuf>, seed: Option<u64>, n: usize) -> Result<Vec<f64>> {
    match (path, seed) {
        (Some(p), _) => io::load_opinions(p, n),
        (None, Some(seed)) => {
            let mut rng = Pcg64Mcg::seed_from_u64(seed ^ OPINION_STREAM);
            Ok((0..n).map(|_| rng.random::<f64>()).collect())
        }
        (None, None) => Err(Error::Parameter(
            "--opinions FILE or --seed is required".into(),
        )),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => io::write_text(path, text),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Error::Io(e.to_string())),
    }
}

fn simulate(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
    config: &DynamicsConfig,
    out: Option<&PathBuf>,
) -> Result<Outcome> {
    let reference = if profile.has_stubborn() {
        cross_validate(g, profile, x0)?.linear.x_inf
    } else {
        consensus_equilibrium(g, profile, x0)?.x_inf
    };
    let traj = run(g, profile, x0, config, Some(&reference))?;
    emit(out, &io::trajectory_csv(&traj))?;
    let errors = traj.errors.as_deref().unwrap_or(&[]);
    eprintln!(
        "{}",
        json!({
            "steps": traj.steps(),
            "stop": traj.stop,
            "initial_error": errors.first(),
            "final_error": errors.last(),
        })
    );
    Ok(match traj.stop {
        StopReason::Converged => Outcome::Ok,
        StopReason::Oscillating => Outcome::Missed(format!(
            "oscillating: period-2 cycle after {} steps",
            traj.steps()
        )),
        StopReason::MaxSteps => {
            Outcome::Missed(format!("not converged after {} steps", traj.steps()))
        }
    })
}

fn equilibrium(
    g: &Graph,
    profile: &StubbornnessProfile,
    x0: &[f64],
    hitting: Option<&PathBuf>,
    out: Option<&PathBuf>,
) -> Result<Outcome> {
    if !profile.has_stubborn() {
        let eq = consensus_equilibrium(g, profile, x0)?;
        emit(out, &io::equilibrium_csv(&eq.x_inf))?;
        eprintln!(
            "{}",
            json!({"method": eq.method, "max_deviation": 0.0, "residual": eq.residual})
        );
        return Ok(Outcome::Ok);
    }
    let cv = cross_validate(g, profile, x0)?;
    emit(out, &io::equilibrium_csv(&cv.linear.x_inf))?;
    if let Some(path) = hitting {
        let f = cv
            .hitting
            .hitting
            .as_ref()
            .expect("hitting route carries F");
        io::write_text(path, &io::hitting_csv(f, g.n()))?;
    }
    eprintln!(
        "{}",
        json!({
            "max_deviation": cv.max_deviation,
            "residual": {
                "linear_solve": cv.linear.residual,
                "hitting_probabilities": cv.hitting.residual,
                "electrical": cv.electrical.residual,
            },
        })
    );
    Ok(if cv.agrees() {
        Outcome::Ok
    } else {
        Outcome::Missed(format!("methods disagree by {:e}", cv.max_deviation))
    })
}

fn spectral(
    g: &Graph,
    profile: &StubbornnessProfile,
    epsilon: Option<f64>,
    out: Option<&PathBuf>,
) -> Result<Outcome> {
    let result = if profile.has_stubborn() {
        if epsilon.is_some() {
            return Err(Error::Parameter(
                "--epsilon applies only without stubborn agents".into(),
            ));
        }
        lambda_sub(&AugmentedGraph::build(g, profile)?)?
    } else {
        let base = slem(g)?;
        match epsilon {
            Some(eps) => epsilon_shift(&base, eps)?,
            None => base,
        }
    };
    let mut value = serde_json::to_value(&result).unwrap();
    if let Some(rate) = result.rho_2.or(result.lambda_a) {
        // bracket for a unit initial error and the default threshold
        value["tau_bracket"] = json!(tau_bracket(rate, 1.0, DynamicsConfig::default().nu));
    }
    emit(
        out,
        &format!("{}\n", serde_json::to_string_pretty(&value).unwrap()),
    )?;
    Ok(if result.converged {
        Outcome::Ok
    } else {
        Outcome::Missed("power iteration did not meet its residual target".into())
    })
}

fn resolve_mode(aug: &AugmentedGraph, mode: Mode) -> ConductanceMode {
    match mode {
        Mode::Exact => ConductanceMode::Exact,
        Mode::Heuristic => ConductanceMode::Heuristic,
        Mode::Auto if aug.free_nodes().len() <= EXACT_CAP => ConductanceMode::Exact,
        Mode::Auto => ConductanceMode::Heuristic,
    }
}

/// Bound report with 1-based labels, plus `T_exact`.
fn bounds_json(g: &Graph, profile: &StubbornnessProfile, mode: Mode) -> Result<(Value, bool)> {
    let aug = AugmentedGraph::build(g, profile)?;
    let report = bound_report(&aug, resolve_mode(&aug, mode))?;
    let exact = lambda_sub(&aug)?;
    let mut v = serde_json::to_value(&report).unwrap();
    let label_edge = |e: Option<(usize, usize)>| {
        json!(e.map(|(a, b)| [io::node_label(&aug, a), io::node_label(&aug, b)]))
    };
    v["xi"]["edge"] = label_edge(report.xi.edge);
    v["eta"]["edge"] = label_edge(report.eta.edge);
    v["conductance"]["set"] = json!(report
        .conductance
        .set
        .iter()
        .map(|i| i + 1)
        .collect::<Vec<_>>());
    v["lambda_A"] = json!(exact.lambda_a);
    v["T_exact"] = json!(exact.t_exact);
    Ok((v, exact.converged))
}

fn parse_level(s: &str) -> Result<Stubbornness> {
    if s.trim().eq_ignore_ascii_case("inf") {
        return Ok(Stubbornness::Full);
    }
    match s.trim().parse::<f64>() {
        Ok(k) if k.is_finite() && k > 0.0 => Ok(Stubbornness::Finite(k)),
        _ => Err(Error::Parameter(format!(
            "stubbornness must be positive or `inf`, got {s:?}"
        ))),
    }
}

fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Parameter(format!("bad range {spec:?}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(bad)
    };
    let values: Vec<f64> = if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad());
        }
        let (lo, hi) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2].trim().parse().map_err(|_| bad())?;
        let log = match parts.get(3).map(|s| s.trim()) {
            None | Some("lin") => false,
            Some("log") => true,
            Some(_) => return Err(bad()),
        };
        if hi < lo || (log && lo <= 0.0) {
            return Err(bad());
        }
        (0..count)
            .map(|k| {
                if k == 0 {
                    return lo;
                }
                if k + 1 == count {
                    return hi;
                }
                let t = k as f64 / (count - 1) as f64;
                if log {
                    (lo.ln() + t * (hi.ln() - lo.ln())).exp()
                } else {
                    lo + t * (hi - lo)
                }
            })
            .collect()
    } else {
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<_>>()?
    };
    if values.is_empty() {
        return Err(Error::Parameter(format!("range {spec:?} is empty")));
    }
    Ok(values)
}

/// The source with its size parameter replaced: `side` for grid-based
/// kinds, `n` otherwise.
fn resized(source: &Source, size: usize) -> Source {
    let mut s = source.clone();
    match s.kind {
        Some(Kind::Grid | Kind::SmallWorld) => s.side = Some(size),
        _ => s.n = Some(size),
    }
    s
}

struct SweepRow {
    value: f64,
    t_exact: f64,
    t_upper_eta: f64,
    t_upper_xi: f64,
    t_lower: f64,
    converged: bool,
}

fn sweep_point(
    g: &Graph,
    profile: &StubbornnessProfile,
    value: f64,
    mode: Mode,
) -> Result<SweepRow> {
    let aug = AugmentedGraph::build(g, profile)?;
    let report = bound_report(&aug, resolve_mode(&aug, mode))?;
    let exact = lambda_sub(&aug)?;
    Ok(SweepRow {
        value,
        t_exact: exact.t_exact,
        t_upper_eta: report.t_upper_eta,
        t_upper_xi: report.t_upper_xi,
        t_lower: report.t_lower,
        converged: exact.converged,
    })
}

fn with_agent_one(base: &StubbornnessProfile, level: Stubbornness) -> Result<StubbornnessProfile> {
    let mut levels = base.levels().to_vec();
    if levels.is_empty() {
        return Err(Error::Parameter("graph has no agents".into()));
    }
    levels[0] = level;
    StubbornnessProfile::new(levels)
}

fn sweep_command(
    source: &Source,
    stubborn: &StubbornArgs,
    var: SweepVar,
    values: &[f64],
    k1: Stubbornness,
    mode: Mode,
    out: Option<&PathBuf>,
) -> Result<Outcome> {
    let rows: Vec<SweepRow> = match var {
        SweepVar::K1 => {
            let g = source.graph()?;
            let base = stubborn.profile(g.n())?;
            values
                .par_iter()
                .map(|&k| {
                    let level = if k > 0.0 {
                        Stubbornness::Finite(k)
                    } else {
                        return Err(Error::Parameter(format!("K_1 must be positive, got {k}")));
                    };
                    sweep_point(&g, &with_agent_one(&base, level)?, k, mode)
                })
                .collect::<Result<_>>()?
        }
        SweepVar::N => {
            if source.graph.is_some() {
                return Err(Error::Parameter("sweeping n needs --kind".into()));
            }
            values
                .par_iter()
                .map(|&v| {
                    if v.fract() != 0.0 || v < 1.0 {
                        return Err(Error::Parameter(format!(
                            "sizes must be positive integers, got {v}"
                        )));
                    }
                    let g = generate(&resized(source, v as usize).kind()?, source.seed)?;
                    let base = stubborn.profile(g.n())?;
                    sweep_point(&g, &with_agent_one(&base, k1)?, v, mode)
                })
                .collect::<Result<_>>()?
        }
    };
    let header = match var {
        SweepVar::K1 => "K_1",
        SweepVar::N => "n",
    };
    let mut csv = format!("{header},T_exact,T_upper_eta,T_upper_xi,T_lower\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.value, r.t_exact, r.t_upper_eta, r.t_upper_xi, r.t_lower
        ));
    }
    emit(out, &csv)?;
    Ok(if rows.iter().all(|r| r.converged) {
        Outcome::Ok
    } else {
        Outcome::Missed(
            "power iteration did not meet its residual target at some sweep point".into(),
        )
    })
}
