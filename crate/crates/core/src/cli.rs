//! Command-line front end.
//!
//! Settings resolve in three layers: built-in defaults, then flags, then the
//! `--config` file. Exit codes are [`EXIT_OK`], [`EXIT_ERROR`] and
//! [`EXIT_INFEASIBLE`].

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::binary::{build_binary_channel, closed_form_quantities, default_grid, generic_quantities, BinaryExampleParams, ClosedForms};
use crate::bounds::{sweep_bounds, BoundContext, RhsMode, SolverConfig, Sweep};
use crate::channel::StateChannel;
use crate::error::{Error, Result};
use crate::io::{apply_protocol, apply_solver, load_channel, Settings, PROTOCOL_KEYS, SOLVER_KEYS};
use crate::output::{save_sweep_csv, sig9, sweep_csv_string, sweep_svg, Report};
use crate::sensing::{optimal_estimator, DistortionFn, EstimatorTable};
use crate::sim::{
    choose_dif_aux, exact::EXACT_N_MAX, exact_dif_errors, hash_collision_check, lemma_checks, AuxSource, CollisionReport, Convention,
    DifPlan, ExactErrors, HashFamily, LemmaReport, LemmaTarget, ProtocolConfig, RifAux, RifPlan, RifStats, TrialStats,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

const RUN_KEYS: &[&str] = &[
    "channel",
    "p_s",
    "p_n",
    "out_of_regime",
    "grid",
    "scheme",
    "ns",
    "samples",
    "coverage_target",
    "hash_ranges",
    "hash_domain",
    "hash_pairs",
    "tail_lambda",
];

#[derive(Debug, Parser)]
#[command(name = "jidas", version, about = "Identification capacity bounds and protocol simulation for state sensing with noisy feedback")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the four capacity-distortion bounds over a budget grid.
    Bounds(BoundsArgs),
    /// Run the identification scheme and measure its errors and distortion.
    Simulate(SimulateArgs),
    /// Typical-set growth, coverage and hash-collision checks.
    Checks(ChecksArgs),
    /// Closed forms and bound curves of the binary example.
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SourceArgs {
    /// Channel file; the binary example is used when absent.
    #[arg(long)]
    pub channel: Option<PathBuf>,
    /// State probability of the binary example.
    #[arg(long)]
    pub p_s: Option<f64>,
    /// Feedback crossover probability of the binary example.
    #[arg(long)]
    pub p_n: Option<f64>,
    /// Accept binary-example parameters outside `p_N <= p_S <= 1/2`.
    #[arg(long)]
    pub out_of_regime: bool,
    /// Key-value file whose settings override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Structured JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SolverArgs {
    /// Auxiliary alphabet size of the bound optimizer.
    #[arg(long)]
    pub u_alphabet_size: Option<usize>,
    /// Random restarts of the projected ascent.
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Kernel grid resolution of the slice search.
    #[arg(long)]
    pub grid_resolution: Option<usize>,
    /// Step budget of each ascent run.
    #[arg(long)]
    pub ascent_steps: Option<usize>,
    /// Seed of the solver restarts.
    #[arg(long)]
    pub solver_seed: Option<u64>,
    /// `slice-zero` or `restricted-capacity`.
    #[arg(long)]
    pub rhs_mode: Option<RhsMode>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ProtocolArgs {
    /// Distortion budget `D`.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Common-randomness block length.
    #[arg(short, long)]
    pub n: Option<usize>,
    /// Explicit code block length.
    #[arg(long)]
    pub sqrt_block: Option<usize>,
    /// Hash range `M'`.
    #[arg(long)]
    pub hash_range: Option<u64>,
    /// Number of messages `N`.
    #[arg(long)]
    pub messages: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Typicality tolerance.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Rate slack of the extraction code.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Rate slack of the binning.
    #[arg(long)]
    pub bin_gamma: Option<f64>,
    /// `conditional`, `robust` or `strong`.
    #[arg(long)]
    pub convention: Option<Convention>,
    /// Number of blocks of the randomized scheme.
    #[arg(long)]
    pub blocks: Option<usize>,
    /// Upper limit on satellite codebook sizes.
    #[arg(long)]
    pub satellite_cap: Option<usize>,
    /// Largest tolerated rate of ambiguous common-randomness decodes.
    #[arg(long)]
    pub ambiguity_threshold: Option<f64>,
    /// `slice-zero`, `restricted-capacity` or `copy`.
    #[arg(long)]
    pub aux: Option<AuxSource>,
    /// Auxiliary alphabet size of the protocol kernel.
    #[arg(long)]
    pub aux_alphabet: Option<usize>,
    /// Negative control: every message uses the same hash map.
    #[arg(long)]
    pub identical_maps: bool,
    /// Exit 1 when the missed-identification rate exceeds this.
    #[arg(long)]
    pub lambda1_target: Option<f64>,
    /// Exit 1 when the false-acceptance rate exceeds this.
    #[arg(long)]
    pub lambda2_target: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// `start:stop:count` or a comma-separated list of budgets.
    #[arg(long)]
    pub grid: Option<String>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Line chart of the curves.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// `dif` or `rif`.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Per-channel-use distortion table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ChecksArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[command(flatten)]
    pub protocol: ProtocolArgs,
    /// `dif` or `rif`.
    #[arg(long)]
    pub scheme: Option<Scheme>,
    /// Comma-separated block lengths of the typical-set check.
    #[arg(long)]
    pub ns: Option<String>,
    /// Samples per block length.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Required coverage at the largest block length.
    #[arg(long)]
    pub coverage_target: Option<f64>,
    /// Comma-separated hash ranges.
    #[arg(long)]
    pub hash_ranges: Option<String>,
    /// Size of the hashed domain; `0` uses the measured typical set.
    #[arg(long)]
    pub hash_domain: Option<usize>,
    /// Message pairs per hash range.
    #[arg(long)]
    pub hash_pairs: Option<usize>,
    /// Collision level of the tail check.
    #[arg(long)]
    pub tail_lambda: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ExampleArgs {
    /// State probability.
    #[arg(long, default_value_t = 0.2)]
    pub p_s: f64,
    /// Feedback crossover probability.
    #[arg(long, default_value_t = 0.1)]
    pub p_n: f64,
    /// Accept parameters outside `p_N <= p_S <= 1/2`.
    #[arg(long)]
    pub out_of_regime: bool,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// `start:stop:count` or a comma-separated list of budgets.
    #[arg(long)]
    pub grid: Option<String>,
    /// Sweep table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Line chart of the curves.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Structured JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Key-value file whose settings override the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Dif,
    Rif,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dif" => Ok(Scheme::Dif),
            "rif" => Ok(Scheme::Rif),
            other => Err(Error::InvalidParameter(format!("unknown scheme `{other}` (expected dif or rif)"))),
        }
    }
}

/// Where the channel comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ChannelSource {
    File { path: PathBuf },
    Binary { p_s: f64, p_n: f64, out_of_regime: bool },
}

impl ChannelSource {
    pub fn load(&self) -> Result<(StateChannel, DistortionFn)> {
        match self {
            ChannelSource::File { path } => {
                let spec = load_channel(path)?;
                Ok((spec.channel, spec.distortion))
            }
            ChannelSource::Binary { p_s, p_n, out_of_regime } => build_binary_channel(&binary_params(*p_s, *p_n, *out_of_regime)?),
        }
    }
}

fn binary_params(p_s: f64, p_n: f64, out_of_regime: bool) -> Result<BinaryExampleParams> {
    if out_of_regime {
        BinaryExampleParams::with_override(p_s, p_n)
    } else {
        BinaryExampleParams::new(p_s, p_n)
    }
}

/// Settings of sweep-producing commands after all layers are applied.
#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub source: ChannelSource,
    pub grid: Vec<f64>,
    pub solver: SolverConfig,
    pub csv: Option<PathBuf>,
    pub svg: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateConfig {
    pub source: ChannelSource,
    pub scheme: Scheme,
    pub solver: SolverConfig,
    pub protocol: ProtocolConfig,
    pub csv: Option<PathBuf>,
    pub report: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChecksConfig {
    pub source: ChannelSource,
    pub scheme: Scheme,
    pub solver: SolverConfig,
    pub protocol: ProtocolConfig,
    pub ns: Vec<usize>,
    pub samples: usize,
    pub coverage_target: f64,
    pub hash_ranges: Vec<u64>,
    pub hash_domain: usize,
    pub hash_pairs: usize,
    pub tail_lambda: f64,
    pub report: Option<PathBuf>,
}

pub fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse()
                .map_err(|_| Error::InvalidParameter(format!("`{t}` is not a valid {what}")))
        })
        .collect()
}

/// `start:stop:count` with evenly spaced points, or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    let grid = match parts.as_slice() {
        [a, b, k] => {
            let bad = || Error::InvalidParameter(format!("grid `{text}` is not start:stop:count"));
            let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            match k {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect(),
            }
        }
        [_] => parse_list(text, "budget")?,
        _ => return Err(Error::InvalidParameter(format!("grid `{text}` is not start:stop:count"))),
    };
    if grid.is_empty() {
        return Err(Error::InvalidParameter("budget grid is empty".into()));
    }
    if grid.iter().any(|d| !d.is_finite() || *d < 0.0) {
        return Err(Error::InvalidParameter(format!("grid `{text}` has a negative or non-finite budget")));
    }
    Ok(grid)
}

fn load_settings(path: &Option<PathBuf>, extra: &[&[&str]]) -> Result<Settings> {
    let Some(p) = path else {
        return Ok(Settings::default());
    };
    let s = Settings::load(p)?;
    let known: Vec<&str> = extra.iter().flat_map(|k| k.iter().copied()).collect();
    s.check_known(&known)?;
    Ok(s)
}

fn resolve_source(args: &SourceArgs, s: &Settings) -> Result<ChannelSource> {
    let channel: Option<PathBuf> = s.get::<PathBuf>("channel")?.or_else(|| args.channel.clone());
    let p_s = s.get::<f64>("p_s")?.or(args.p_s);
    let p_n = s.get::<f64>("p_n")?.or(args.p_n);
    let out_of_regime = s.get::<bool>("out_of_regime")?.unwrap_or(args.out_of_regime);
    match channel {
        Some(path) => {
            if p_s.is_some() || p_n.is_some() {
                return Err(Error::InvalidParameter(
                    "give either a channel file or binary-example parameters, not both".into(),
                ));
            }
            Ok(ChannelSource::File { path })
        }
        None => Ok(ChannelSource::Binary {
            p_s: p_s.unwrap_or(0.2),
            p_n: p_n.unwrap_or(0.1),
            out_of_regime,
        }),
    }
}

fn resolve_solver(args: &SolverArgs, s: &Settings) -> Result<SolverConfig> {
    let mut c = SolverConfig::default();
    if let Some(v) = args.u_alphabet_size {
        c.u_alphabet_size = Some(v);
    }
    if let Some(v) = args.restarts {
        c.restarts = v;
    }
    if let Some(v) = args.grid_resolution {
        c.grid_resolution = v;
    }
    if let Some(v) = args.ascent_steps {
        c.ascent_steps = v;
    }
    if let Some(v) = args.solver_seed {
        c.seed = v;
    }
    if let Some(v) = args.rhs_mode {
        c.rhs_mode = v;
    }
    apply_solver(s, &mut c)?;
    c.validate()?;
    Ok(c)
}

fn resolve_protocol(args: &ProtocolArgs, s: &Settings) -> Result<ProtocolConfig> {
    let mut c = ProtocolConfig::default();
    macro_rules! set {
        ($($f:ident),*) => {
            $(if let Some(v) = args.$f.clone() {
                c.$f = v;
            })*
        };
    }
    set!(
        budget,
        n,
        hash_range,
        messages,
        trials,
        seed,
        epsilon,
        gamma,
        convention,
        blocks,
        satellite_cap,
        ambiguity_threshold,
        aux,
        aux_alphabet,
        lambda1_target,
        lambda2_target
    );
    if args.sqrt_block.is_some() {
        c.sqrt_block = args.sqrt_block;
    }
    if args.bin_gamma.is_some() {
        c.bin_gamma = args.bin_gamma;
    }
    c.identical_maps |= args.identical_maps;
    apply_protocol(s, &mut c)?;
    c.validate()?;
    Ok(c)
}

fn context_of(source: &ChannelSource) -> Result<(StateChannel, DistortionFn, EstimatorTable, BoundContext)> {
    let (ch, d) = source.load()?;
    let est = optimal_estimator(&ch, &d)?;
    let ctx = BoundContext::new(&ch, &est)?;
    Ok((ch, d, est, ctx))
}

fn write_report<C: Serialize, P: Serialize>(command: &str, seed: u64, config: &C, result: &P, path: &Option<PathBuf>) -> Result<String> {
    let json = Report::new(command, seed, config, result).to_json()?;
    if let Some(p) = path {
        std::fs::write(p, &json)?;
    }
    Ok(json)
}

fn print_sweep_summary(out: &mut dyn Write, sweep: &Sweep) -> Result<()> {
    writeln!(out, "{:>8} {:>11} {:>11} {:>11} {:>11} {:>11} {:>11} feasible", "D", "rif_lower", "rif_upper", "dif_lower", "dif_upper", "ts_lower", "ts_upper")?;
    let step = (sweep.rows.len() / 10).max(1);
    for (k, r) in sweep.rows.iter().enumerate() {
        if k % step != 0 && k + 1 != sweep.rows.len() {
            continue;
        }
        writeln!(
            out,
            "{:>8.4} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {}",
            r.d, r.rif_lower, r.rif_upper, r.dif_lower, r.dif_upper, r.ts_lower, r.ts_upper, r.feasible
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsOutcome {
    pub sweep: Sweep,
    pub any_feasible: bool,
}

fn emit_sweep(out: &mut dyn Write, cfg: &SweepConfig, sweep: &Sweep, title: &str) -> Result<()> {
    match &cfg.csv {
        Some(p) => {
            save_sweep_csv(&sweep.rows, p)?;
            print_sweep_summary(out, sweep)?;
        }
        None => write!(out, "{}", sweep_csv_string(&sweep.rows)?)?,
    }
    if let Some(p) = &cfg.svg {
        std::fs::write(p, sweep_svg(sweep, title))?;
    }
    Ok(())
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> Result<i32> {
    let s = load_settings(&args.source.config, &[RUN_KEYS, SOLVER_KEYS])?;
    let grid = match s.get::<String>("grid")?.or_else(|| args.grid.clone()) {
        Some(g) => parse_grid(&g)?,
        None => default_grid(),
    };
    let cfg = SweepConfig {
        source: resolve_source(&args.source, &s)?,
        grid,
        solver: resolve_solver(&args.solver, &s)?,
        csv: args.csv.clone(),
        svg: args.svg.clone(),
        report: args.source.report.clone(),
    };
    let (_, _, est, ctx) = context_of(&cfg.source)?;
    let sweep = sweep_bounds(&ctx, &cfg.grid, &cfg.solver)?;
    emit_sweep(out, &cfg, &sweep, "capacity-distortion bounds (bits)")?;
    let any_feasible = sweep.rows.iter().any(|r| r.feasible);
    let result = BoundsOutcome { sweep, any_feasible };
    write_report("bounds", cfg.solver.seed, &cfg, &result, &cfg.report)?;
    if !any_feasible {
        writeln!(
            out,
            "infeasible: every budget is below min d* = {}",
            sig9(est.min_dstar())
        )?;
        return Ok(EXIT_INFEASIBLE);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct ExampleOutcome {
    pub closed_forms: ClosedForms,
    pub generic: ClosedForms,
    pub sweep: Sweep,
}

pub fn cmd_example(args: &ExampleArgs, out: &mut dyn Write) -> Result<i32> {
    let s = load_settings(&args.config, &[RUN_KEYS, SOLVER_KEYS])?;
    let p_s = s.get::<f64>("p_s")?.unwrap_or(args.p_s);
    let p_n = s.get::<f64>("p_n")?.unwrap_or(args.p_n);
    let out_of_regime = s.get::<bool>("out_of_regime")?.unwrap_or(args.out_of_regime);
    let params = binary_params(p_s, p_n, out_of_regime)?;
    let grid = match s.get::<String>("grid")?.or_else(|| args.grid.clone()) {
        Some(g) => parse_grid(&g)?,
        None => default_grid(),
    };
    let cfg = SweepConfig {
        source: ChannelSource::Binary { p_s, p_n, out_of_regime },
        grid,
        solver: resolve_solver(&args.solver, &s)?,
        csv: args.csv.clone(),
        svg: args.svg.clone(),
        report: args.report.clone(),
    };
    let closed_forms = closed_form_quantities(&params)?;
    let generic = generic_quantities(&params)?;
    writeln!(out, "binary example p_S = {p_s}, p_N = {p_n}")?;
    writeln!(out, "d*(0) = {}  d*(1) = {}", sig9(closed_forms.dstar0), sig9(closed_forms.dstar1))?;
    writeln!(
        out,
        "I(Y;Z|X=1) = {} bits  H(Z|X=1) = {} bits",
        sig9(closed_forms.i_yz_given_x1),
        sig9(closed_forms.h_z_given_x1)
    )?;
    let (ctx, _) = crate::binary::example_context(&params)?;
    let sweep = sweep_bounds(&ctx, &cfg.grid, &cfg.solver)?;
    let title = format!("binary example p_S = {p_s}, p_N = {p_n} (bits)");
    if let Some(p) = &cfg.csv {
        save_sweep_csv(&sweep.rows, p)?;
    }
    if let Some(p) = &cfg.svg {
        std::fs::write(p, sweep_svg(&sweep, &title))?;
    }
    print_sweep_summary(out, &sweep)?;
    let result = ExampleOutcome {
        closed_forms,
        generic,
        sweep,
    };
    write_report("example", cfg.solver.seed, &cfg, &result, &cfg.report)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct SimulateOutcome {
    pub stats: TrialStats,
    pub rif: Option<RifStats>,
    pub exact: Option<ExactErrors>,
    pub within_targets: bool,
}

fn distortion_csv(stats: &TrialStats) -> String {
    let mut s = String::from("t,distortion,half_width,target\n");
    for (t, (e, d)) in stats.distortion.iter().zip(&stats.distortion_target).enumerate() {
        s += &format!("{t},{},{},{}\n", sig9(e.mean), sig9(e.half_width), sig9(*d));
    }
    s
}

pub fn cmd_simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<i32> {
    let s = load_settings(&args.source.config, &[RUN_KEYS, SOLVER_KEYS, PROTOCOL_KEYS])?;
    let cfg = SimulateConfig {
        source: resolve_source(&args.source, &s)?,
        scheme: s.get::<Scheme>("scheme")?.or(args.scheme).unwrap_or_default(),
        solver: resolve_solver(&args.solver, &s)?,
        protocol: resolve_protocol(&args.protocol, &s)?,
        csv: args.csv.clone(),
        report: args.source.report.clone(),
    };
    let (ch, d, est, ctx) = context_of(&cfg.source)?;
    let p = &cfg.protocol;
    let (stats, rif, exact) = match cfg.scheme {
        Scheme::Dif => {
            let aux = choose_dif_aux(&ctx, p, &cfg.solver)?;
            let plan = DifPlan::new(&ch, &d, &est, aux, p)?;
            let exact = if p.n <= EXACT_N_MAX { Some(exact_dif_errors(&plan)?) } else { None };
            (plan.run()?, None, exact)
        }
        Scheme::Rif => {
            let aux = RifAux::from_bounds(&ctx, p, &cfg.solver)?;
            let r = RifPlan::new(&ch, &d, &est, aux, p)?.run()?;
            (r.stats.clone(), Some(r), None)
        }
    };
    let within_targets = stats.lambda1.mean <= p.lambda1_target && stats.lambda2.mean <= p.lambda2_target;
    writeln!(out, "scheme {}  n = {}  blocklength = {}  trials = {}  seed = {}", stats.scheme, stats.n, stats.blocklength, stats.trials, stats.seed)?;
    writeln!(
        out,
        "lambda1 = {} +- {}  (target {})",
        sig9(stats.lambda1.mean),
        sig9(stats.lambda1.half_width),
        p.lambda1_target
    )?;
    writeln!(
        out,
        "lambda2 = {} +- {}  (target {})",
        sig9(stats.lambda2.mean),
        sig9(stats.lambda2.half_width),
        p.lambda2_target
    )?;
    if let Some(e) = &exact {
        writeln!(out, "exact lambda1 = {}  exact lambda2 = {}", sig9(e.lambda1), sig9(e.lambda2))?;
    }
    let worst = stats.distortion.iter().map(|e| e.mean).fold(0.0, f64::max);
    writeln!(out, "max per-use distortion = {}  budget = {}", sig9(worst), p.budget)?;
    writeln!(
        out,
        "encoding failures = {}  common-randomness errors = {}  ambiguity rate = {}",
        stats.encoding_failures,
        stats.common_randomness_errors,
        sig9(stats.ambiguity_rate)
    )?;
    for line in &stats.diagnostics {
        writeln!(out, "  {line}")?;
    }
    if let Some(path) = &cfg.csv {
        std::fs::write(path, distortion_csv(&stats))?;
    }
    let result = SimulateOutcome {
        stats,
        rif,
        exact,
        within_targets,
    };
    write_report("simulate", p.seed, &cfg, &result, &cfg.report)?;
    if !within_targets {
        writeln!(out, "error targets not met")?;
        return Ok(EXIT_ERROR);
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChecksOutcome {
    pub lemma: LemmaReport,
    pub coverage_ok: bool,
    pub hash: Vec<CollisionReport>,
    pub passed: bool,
}

pub fn cmd_checks(args: &ChecksArgs, out: &mut dyn Write) -> Result<i32> {
    let s = load_settings(&args.source.config, &[RUN_KEYS, SOLVER_KEYS, PROTOCOL_KEYS])?;
    let pick = |key: &str, flag: &Option<String>, default: &str| -> Result<String> {
        Ok(s.get::<String>(key)?.or_else(|| flag.clone()).unwrap_or_else(|| default.to_string()))
    };
    let cfg = ChecksConfig {
        source: resolve_source(&args.source, &s)?,
        scheme: s.get::<Scheme>("scheme")?.or(args.scheme).unwrap_or_default(),
        solver: resolve_solver(&args.solver, &s)?,
        protocol: resolve_protocol(&args.protocol, &s)?,
        ns: parse_list(&pick("ns", &args.ns, "8,12,16,20")?, "block length")?,
        samples: s.get("samples")?.or(args.samples).unwrap_or(2000),
        coverage_target: s.get("coverage_target")?.or(args.coverage_target).unwrap_or(0.9),
        hash_ranges: parse_list(&pick("hash_ranges", &args.hash_ranges, "4,16,64")?, "hash range")?,
        hash_domain: s.get("hash_domain")?.or(args.hash_domain).unwrap_or(100),
        hash_pairs: s.get("hash_pairs")?.or(args.hash_pairs).unwrap_or(100),
        tail_lambda: s.get("tail_lambda")?.or(args.tail_lambda).unwrap_or(0.5),
        report: args.source.report.clone(),
    };
    if cfg.ns.is_empty() {
        return Err(Error::InvalidParameter("no block lengths given".into()));
    }
    let (_, _, _, ctx) = context_of(&cfg.source)?;
    let p = &cfg.protocol;
    let target = match cfg.scheme {
        Scheme::Dif => LemmaTarget::dif(ctx.averaged(), &choose_dif_aux(&ctx, p, &cfg.solver)?),
        Scheme::Rif => LemmaTarget::rif(ctx.averaged(), &RifAux::from_bounds(&ctx, p, &cfg.solver)?),
    };
    let lemma = lemma_checks(&target, &cfg.ns, p.epsilon, p.convention, cfg.samples, p.seed)?;
    writeln!(
        out,
        "typical-set growth ({}, {} convention, epsilon = {}), target I(U;Z|X) = {} bits",
        lemma.label,
        lemma.convention.label(),
        lemma.epsilon,
        sig9(lemma.target)
    )?;
    writeln!(out, "{:>4} {:>11} {:>11} {:>11} {:>11} {:>11}", "n", "exact rate", "rate", "deviation", "coverage", "nonempty")?;
    for r in &lemma.rows {
        writeln!(
            out,
            "{:>4} {:>11.6} {:>11.6} {:>11.6} {:>11.6} {:>11.6}",
            r.n, r.exact_rate, r.rate.mean, r.deviation, r.coverage, r.nonempty
        )?;
    }
    let last = lemma.rows.last().expect("nonempty block lengths");
    let coverage_ok = last.coverage >= cfg.coverage_target;
    writeln!(out, "deviation trend nonincreasing: {}", verdict(lemma.trend_ok))?;
    writeln!(
        out,
        "coverage at n = {}: {} >= {}: {}",
        last.n,
        sig9(last.coverage),
        cfg.coverage_target,
        verdict(coverage_ok)
    )?;
    let domain: Vec<u64> = if cfg.hash_domain > 0 {
        (0..cfg.hash_domain as u64).collect()
    } else {
        let spec = crate::sim::TypicalitySpec::new(target.context.clone(), target.cond.clone(), target.nu, p.epsilon, p.convention, *cfg.ns.first().expect("nonempty"))?;
        let size = spec
            .context_types()
            .into_iter()
            .filter_map(|t| spec.log2_count(&t))
            .fold(0.0f64, f64::max)
            .exp2()
            .round() as u64;
        (0..size.clamp(1, 1 << 20)).collect()
    };
    let mut hash = Vec::new();
    for &m in &cfg.hash_ranges {
        let mut family = HashFamily::new(p.messages.max(2), m, p.seed)?;
        if p.identical_maps {
            family = family.with_identical_maps();
        }
        let r = hash_collision_check(&family, &domain, cfg.hash_pairs, cfg.tail_lambda, p.seed)?;
        writeln!(
            out,
            "hash M' = {:>3}: mean collision {} vs {} (se {}), tail {} <= bound {}: {}",
            m,
            sig9(r.mean),
            sig9(r.expected),
            sig9(r.std_error),
            sig9(r.tail_fraction),
            sig9(r.tail_bound),
            verdict(r.passed())
        )?;
        hash.push(r);
    }
    if p.identical_maps {
        writeln!(out, "negative control: identical hash maps")?;
    }
    let passed = lemma.trend_ok && coverage_ok && hash.iter().all(CollisionReport::passed);
    let result = ChecksOutcome {
        lemma,
        coverage_ok,
        hash,
        passed,
    };
    write_report("checks", p.seed, &cfg, &result, &cfg.report)?;
    writeln!(out, "checks: {}", verdict(passed))?;
    Ok(if passed { EXIT_OK } else { EXIT_ERROR })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "FAIL"
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Simulate(a) => cmd_simulate(a, out),
        Command::Checks(a) => cmd_checks(a, out),
        Command::Example(a) => cmd_example(a, out),
    }
}

/// Parses `args`, runs the command and returns the exit code. Errors go to
/// `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}

