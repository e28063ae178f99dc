//! Command-line driver: curves, oracle verification, Monte Carlo outage and
//! throughput runs. All data goes out as CSV.
//!
//! Settings come from an optional `key=value` file (`--config`) overlaid by
//! command-line flags. Exit codes: 0 success, 1 invalid input, 2 failed
//! verification.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;
use rayon::prelude::*;

use crate::analytic::{self, SchemeId};
use crate::error::{Error, Result};
use crate::regions::{oracle_dmt, OracleConfig};
use crate::simulator::{self, estimate_outage_grid, slope_points, DiversityEstimate, SimConfig};
use crate::types::{validate, Exponent, SystemParams};

/// Lower end of rate sweeps.
pub const RATE_FLOOR: f64 = 1e-3;

#[derive(Debug, Parser)]
#[command(
    name = "zic-dmt",
    version,
    about = "DMT curves, oracle checks and ARQ simulation for the Z-interference channel"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandKind,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum CommandKind {
    /// Closed-form d1/d2 along a parameter sweep.
    Curve,
    /// Compare closed forms against the exponent oracle on random tuples.
    Verify,
    /// Monte Carlo outage probabilities and diversity slopes.
    Simulate,
    /// Monte Carlo throughput.
    Throughput,
}

#[derive(Debug, Default, Clone, Args)]
struct Flags {
    /// Comma-separated scheme list.
    #[arg(long, global = true)]
    scheme: Option<String>,
    /// Maximum number of ARQ rounds.
    #[arg(long = "L", global = true)]
    l: Option<u32>,
    #[arg(long, global = true)]
    r1: Option<f64>,
    #[arg(long, global = true)]
    r2: Option<f64>,
    #[arg(long, global = true)]
    t2: Option<f64>,
    #[arg(long, global = true)]
    b: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    /// VAR:LO:HI:STEP with VAR one of r1, r2, t2, b, beta.
    #[arg(long, global = true)]
    sweep: Option<String>,
    /// LO:HI:STEP in dB.
    #[arg(long = "rho-db", global = true)]
    rho_db: Option<String>,
    #[arg(long, global = true)]
    trials: Option<u64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Symbols per round.
    #[arg(long = "T", global = true)]
    t: Option<u32>,
    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// key=value settings file; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Verification tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Random tuples per scheme for verify.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    R1,
    R2,
    T2,
    B,
    Beta,
}

impl SweepVar {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "r1" => SweepVar::R1,
            "r2" => SweepVar::R2,
            "t2" => SweepVar::T2,
            "b" => SweepVar::B,
            "beta" => SweepVar::Beta,
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "sweep variable must be one of r1, r2, t2, b, beta (got '{s}')"
                )))
            }
        })
    }

    fn is_rate(self) -> bool {
        matches!(self, SweepVar::R1 | SweepVar::R2 | SweepVar::T2)
    }

    fn set(self, p: &mut SystemParams, v: f64) {
        match self {
            SweepVar::R1 => p.r1 = v,
            SweepVar::R2 => p.r2 = v,
            SweepVar::T2 => p.t2 = v,
            SweepVar::B => p.b = v,
            SweepVar::Beta => p.beta = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub lo: f64,
    pub hi: f64,
    pub step: f64,
}

impl Sweep {
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 4 {
            return Err(Error::InvalidArgument(format!("sweep must be VAR:LO:HI:STEP (got '{s}')")));
        }
        let var = SweepVar::parse(parts[0].trim())?;
        let (lo, hi, step) = (num(parts[1], "sweep")?, num(parts[2], "sweep")?, num(parts[3], "sweep")?);
        Ok(Sweep { var, lo, hi, step })
    }

    /// Sweep values, rounded to 12 decimals; rate sweeps start no lower than
    /// [`RATE_FLOOR`].
    pub fn values(&self) -> Result<Vec<f64>> {
        let mut v = range(self.lo, self.hi, self.step, "sweep")?;
        if self.var.is_rate() {
            for x in v.iter_mut() {
                *x = x.max(RATE_FLOOR);
            }
            v.dedup();
        }
        Ok(v)
    }
}

fn num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::InvalidArgument(format!("{what}: '{s}' is not a finite number")))
}

fn round12(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `lo, lo + step, ..., hi` (inclusive, up to rounding).
fn range(lo: f64, hi: f64, step: f64, what: &str) -> Result<Vec<f64>> {
    if hi < lo {
        return Err(Error::InvalidArgument(format!("{what}: upper end {hi} below lower end {lo}")));
    }
    if hi == lo {
        return Ok(vec![round12(lo)]);
    }
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("{what}: step must be positive")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| round12(lo + k as f64 * step)).collect())
}

/// Parse `LO:HI:STEP` in dB.
pub fn parse_rho_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidArgument(format!("rho-db must be LO:HI:STEP (got '{s}')")));
    }
    range(num(parts[0], "rho-db")?, num(parts[1], "rho-db")?, num(parts[2], "rho-db")?, "rho-db")
}

pub fn parse_schemes(s: &str) -> Result<Vec<SchemeId>> {
    let list = s.split(',').filter(|t| !t.trim().is_empty()).map(str::parse).collect::<Result<Vec<SchemeId>>>()?;
    if list.is_empty() {
        return Err(Error::InvalidArgument(format!("no scheme given; valid schemes: {}", SchemeId::valid_names())));
    }
    Ok(list)
}

/// Fully resolved settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub schemes: Vec<SchemeId>,
    pub params: SystemParams,
    pub sweep: Sweep,
    pub rho_db: Vec<f64>,
    pub trials: u64,
    pub seed: u64,
    pub symbols_per_round: u32,
    pub out: Option<PathBuf>,
    pub tol: f64,
    pub samples: usize,
}

const FIG_SCHEMES: &str = "cmo,tian,hk,coop-cmo,coop-tian,coop-dd";

impl RunConfig {
    fn resolve(command: CommandKind, flags: Flags) -> Result<Self> {
        let mut f = match &flags.config {
            Some(path) => parse_config_file(path)?,
            None => Flags::default(),
        };
        overlay(&mut f, flags);
        let default_schemes = match command {
            CommandKind::Curve => FIG_SCHEMES.to_string(),
            CommandKind::Verify => SchemeId::ALL.map(|s| s.name()).join(","),
            CommandKind::Simulate | CommandKind::Throughput => "cmo".into(),
        };
        let schemes = parse_schemes(f.scheme.as_deref().unwrap_or(&default_schemes))?;
        let params = SystemParams::new(
            f.r1.unwrap_or(0.3),
            f.r2.unwrap_or(0.9),
            f.t2.unwrap_or(0.0),
            f.b.unwrap_or(0.0),
            f.beta.unwrap_or(1.3),
            f.l.unwrap_or(2),
        );
        let sweep = Sweep::parse(f.sweep.as_deref().unwrap_or("r1:0:1:0.01"))?;
        let rho_db = parse_rho_grid(f.rho_db.as_deref().unwrap_or("15:35:5"))?;
        let tol = f.tol.unwrap_or(2e-3);
        if !(tol >= 0.0) {
            return Err(Error::InvalidArgument(format!("tol must be >= 0 (got {tol})")));
        }
        Ok(Self {
            command,
            schemes,
            params,
            sweep,
            rho_db,
            trials: f.trials.unwrap_or(100_000),
            seed: f.seed.unwrap_or(1),
            symbols_per_round: f.t.unwrap_or(1000),
            out: f.out,
            tol,
            samples: f.samples.unwrap_or(500),
        })
    }
}

fn overlay(base: &mut Flags, top: Flags) {
    macro_rules! take {
        ($($field:ident),*) => { $( if top.$field.is_some() { base.$field = top.$field; } )* };
    }
    take!(scheme, l, r1, r2, t2, b, beta, sweep, rho_db, trials, seed, t, out, tol, samples);
}

/// Read a `key=value` settings file. Blank lines and `#` comments are
/// ignored; unknown keys are an error.
fn parse_config_file(path: &Path) -> Result<Flags> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::Io(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

fn parse_config(text: &str) -> Result<Flags> {
    let mut f = Flags::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| Error::InvalidArgument(format!("config line {}: {msg}", lineno + 1));
        let (key, value) = line.split_once('=').ok_or_else(|| bad(format!("expected key=value, got '{line}'")))?;
        let (key, value) = (key.trim(), value.trim());
        let float = || num(value, key).map_err(|e| bad(e.to_string()));
        let int = || value.parse::<u64>().map_err(|_| bad(format!("{key}: '{value}' is not an integer")));
        match key {
            "scheme" => f.scheme = Some(value.to_string()),
            "L" | "l" => f.l = Some(u32::try_from(int()?).map_err(|_| bad("L too large".into()))?),
            "r1" => f.r1 = Some(float()?),
            "r2" => f.r2 = Some(float()?),
            "t2" => f.t2 = Some(float()?),
            "b" => f.b = Some(float()?),
            "beta" => f.beta = Some(float()?),
            "sweep" => f.sweep = Some(value.to_string()),
            "rho-db" | "rho_db" => f.rho_db = Some(value.to_string()),
            "trials" => f.trials = Some(int()?),
            "seed" => f.seed = Some(int()?),
            "T" | "t" => f.t = Some(u32::try_from(int()?).map_err(|_| bad("T too large".into()))?),
            "out" => f.out = Some(PathBuf::from(value)),
            "tol" => f.tol = Some(float()?),
            "samples" => f.samples = Some(int()? as usize),
            _ => return Err(bad(format!("unknown key '{key}'"))),
        }
    }
    Ok(f)
}

/// Format a finite number for CSV; non-finite values are a bug upstream.
fn cell(x: f64) -> Result<String> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("non-finite value {x} in CSV output")));
    }
    Ok(format!("{}", round12(x)))
}

fn exp_cell(e: Exponent) -> Result<String> {
    cell(e.value())
}

/// Rows of the `curve` command.
pub fn cmd_curve(cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "scheme,L,r1,r2,t2,b,beta,d1,d2,source,branch")?;
    let values = cfg.sweep.values()?;
    for &scheme in &cfg.schemes {
        scheme.check_rounds(cfg.params.max_rounds)?;
        for &v in &values {
            let mut p = cfg.params;
            cfg.sweep.var.set(&mut p, v);
            let p = validate(p).map_err(|e| Error::InvalidArgument(format!("invalid sweep point {v}: {e}")))?;
            let r = analytic::evaluate(scheme, &p)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{}",
                scheme,
                p.max_rounds,
                cell(p.r1)?,
                cell(p.r2)?,
                cell(p.t2)?,
                cell(p.b)?,
                cell(p.beta)?,
                exp_cell(r.d1)?,
                exp_cell(r.d2)?,
                r.source.as_str(),
                r.branch_summary()
            )?;
        }
    }
    Ok(())
}

/// Worst disagreement for one scheme component.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentResult {
    pub label: String,
    pub max_abs_err: f64,
    pub worst: Option<SystemParams>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct VerifyReport {
    pub samples: usize,
    pub tol: f64,
    pub components: Vec<ComponentResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.components.iter().all(|c| c.passed)
    }
}

fn gap(a: Exponent, b: Exponent) -> f64 {
    match (a.is_finite(), b.is_finite()) {
        (true, true) => (a.value() - b.value()).abs(),
        (false, false) => 0.0,
        _ => f64::INFINITY,
    }
}

/// Random tuple for `scheme`: rates in [0.05, 0.95], beta in [0.2, 2],
/// b in [0, 0.5], t2 uniform in [0, r2], L in 1..=4 (L = 2 cooperative).
pub fn random_tuple<R: Rng + ?Sized>(rng: &mut R, scheme: SchemeId) -> SystemParams {
    let r1 = rng.random_range(0.05..=0.95);
    let r2 = rng.random_range(0.05..=0.95);
    let t2 = rng.random_range(0.0..=r2);
    let b = rng.random_range(0.0..=0.5);
    let beta = rng.random_range(0.2..=2.0);
    let l = rng.random_range(1..=4u32);
    SystemParams::new(r1, r2, t2, b, beta, if scheme.is_coop() { 2 } else { l })
}

/// Per-tuple component errors `(label, |analytic - oracle|)`.
fn tuple_errors(scheme: SchemeId, p: &SystemParams, ocfg: &OracleConfig, tol: f64) -> Result<Vec<(&'static str, f64)>> {
    let a = analytic::evaluate(scheme, p)?;
    let o = oracle_dmt(scheme, p, ocfg)?;
    let part = |name: &str| o.parts.iter().find(|(n, _)| *n == name).map(|x| x.1);
    let (r1, r2, beta) = (p.r1, p.r2, p.beta);
    let mut errs = vec![("d1", gap(a.d1, o.d1))];
    match scheme {
        SchemeId::CoopStatic => {
            let (cmo, tian) = (part("d1_cmo").unwrap(), part("d1_tian").unwrap());
            let (d2c, d2t) = (part("d2_cmo").unwrap(), part("d2_tian").unwrap());
            // Near a tie either decoder is a legitimate choice.
            let e2 = if gap(cmo, tian) <= tol { gap(a.d2, d2c).min(gap(a.d2, d2t)) } else { gap(a.d2, o.d2) };
            errs.push(("d2", e2));
        }
        SchemeId::CoopCmo => {
            errs.push(("d2", gap(a.d2, o.d2)));
            errs.push(("d11", gap(analytic::d11c_cmo2(r1, beta), part("d11").unwrap())));
            errs.push(("d12", gap(analytic::d12c_cmo2(r1, r2, beta), part("d12").unwrap())));
        }
        SchemeId::CoopDd => {
            errs.push(("d2", gap(a.d2, o.d2)));
            errs.push(("d11", gap(analytic::d11c_cmo2(r1, beta), part("d11").unwrap())));
            errs.push(("d12", gap(analytic::d12_dd(r1, r2, beta), part("d12").unwrap())));
        }
        _ => errs.push(("d2", gap(a.d2, o.d2))),
    }
    Ok(errs)
}

/// Draw `samples` tuples per scheme and compare closed forms to the oracle.
pub fn run_verify(
    schemes: &[SchemeId],
    samples: usize,
    seed: u64,
    tol: f64,
    ocfg: &OracleConfig,
) -> Result<VerifyReport> {
    let mut report = VerifyReport { samples, tol, components: Vec::new() };
    for &scheme in schemes {
        let idx = SchemeId::ALL.iter().position(|s| *s == scheme).unwrap() as u64;
        let mut rng = simulator::trial_rng(seed, idx);
        let tuples: Vec<SystemParams> = (0..samples).map(|_| random_tuple(&mut rng, scheme)).collect();
        let per_tuple = tuples
            .par_iter()
            .map(|p| tuple_errors(scheme, p, ocfg, tol).map(|e| (*p, e)))
            .collect::<Result<Vec<_>>>()?;
        let labels: Vec<&str> = match per_tuple.first() {
            Some((_, e)) => e.iter().map(|x| x.0).collect(),
            None => vec!["d1", "d2"],
        };
        for (k, label) in labels.iter().enumerate() {
            let mut worst: Option<(f64, SystemParams)> = None;
            for (p, errs) in &per_tuple {
                let e = errs[k].1;
                if worst.is_none_or(|(w, _)| e > w) {
                    worst = Some((e, *p));
                }
            }
            let max_abs_err = worst.map_or(0.0, |w| w.0);
            report.components.push(ComponentResult {
                label: format!("{scheme}:{label}"),
                max_abs_err,
                worst: worst.map(|w| w.1),
                passed: max_abs_err <= tol,
            });
        }
    }
    Ok(report)
}

fn fmt_err(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.3e}")
    } else {
        "inf".into()
    }
}

pub fn write_verify_report(report: &VerifyReport, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "component,max_abs_err,tol,status,worst_r1,worst_r2,worst_t2,worst_b,worst_beta,worst_L")?;
    for c in &report.components {
        let worst = match c.worst {
            Some(p) => format!("{:.6},{:.6},{:.6},{:.6},{:.6},{}", p.r1, p.r2, p.t2, p.b, p.beta, p.max_rounds),
            None => ",,,,,".into(),
        };
        writeln!(
            w,
            "{},{},{},{},{}",
            c.label,
            fmt_err(c.max_abs_err),
            report.tol,
            if c.passed { "PASS" } else { "FAIL" },
            worst
        )?;
    }
    Ok(())
}

pub fn cmd_verify(cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    if cfg.samples == 0 {
        eprintln!("warning: verify with 0 samples checks nothing");
    }
    let report = run_verify(&cfg.schemes, cfg.samples, cfg.seed, cfg.tol, &OracleConfig::default())?;
    write_verify_report(&report, w)?;
    if !report.passed() {
        let failed: Vec<&str> = report.components.iter().filter(|c| !c.passed).map(|c| c.label.as_str()).collect();
        return Err(Error::Verification(format!("tolerance {} exceeded by {}", cfg.tol, failed.join(", "))));
    }
    Ok(())
}

fn opt_cell(x: Option<f64>) -> Result<String> {
    x.map_or(Ok(String::new()), cell)
}

pub fn cmd_simulate(cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    writeln!(
        w,
        "row,scheme,rho_db,p_out1,ci1,p_out2,ci2,trials,slope1,stderr1,slope2,stderr2,analytic_d1,analytic_d2"
    )?;
    for &scheme in &cfg.schemes {
        let sim = SimConfig {
            rho_db_grid: cfg.rho_db.clone(),
            trials: cfg.trials,
            symbols_per_round: cfg.symbols_per_round,
            seed: cfg.seed,
            scheme,
        };
        let analytic = analytic::evaluate(scheme, &cfg.params)?;
        let grid = estimate_outage_grid(&cfg.params, &sim)?;
        for p in &grid {
            writeln!(
                w,
                "point,{},{},{},{},{},{},{},,,,,,",
                scheme,
                cell(p.rho_db)?,
                cell(p.p_out1)?,
                cell((p.ci1.1 - p.ci1.0) / 2.0)?,
                cell(p.p_out2)?,
                cell((p.ci2.1 - p.ci2.0) / 2.0)?,
                p.trials
            )?;
        }
        let (u1, u2) = slope_points(&grid);
        let fit1 = DiversityEstimate::fit(&u1).ok();
        let fit2 = DiversityEstimate::fit(&u2).ok();
        writeln!(
            w,
            "summary,{},,,,,,{},{},{},{},{},{},{}",
            scheme,
            cfg.trials,
            opt_cell(fit1.as_ref().map(|f| f.slope))?,
            opt_cell(fit1.as_ref().and_then(|f| f.stderr))?,
            opt_cell(fit2.as_ref().map(|f| f.slope))?,
            opt_cell(fit2.as_ref().and_then(|f| f.stderr))?,
            exp_cell(analytic.d1)?,
            exp_cell(analytic.d2)?
        )?;
    }
    Ok(())
}

pub fn cmd_throughput(cfg: &RunConfig, w: &mut dyn Write) -> Result<()> {
    writeln!(w, "scheme,rho_db,eta1,eta2,ratio1,ratio2,mean_zeta")?;
    for &scheme in &cfg.schemes {
        scheme.check_rounds(cfg.params.max_rounds)?;
        for &db in &cfg.rho_db {
            let t = simulator::estimate_throughput(scheme, &cfg.params, db, cfg.trials, cfg.seed)?;
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                scheme,
                cell(db)?,
                cell(t.eta1)?,
                cell(t.eta2)?,
                cell(t.ratio1)?,
                cell(t.ratio2)?,
                cell(t.mean_zeta)?
            )?;
        }
    }
    Ok(())
}

/// Run a resolved configuration, writing to `cfg.out` or stdout.
pub fn execute(cfg: &RunConfig) -> Result<()> {
    validate(cfg.params)?;
    let mut buf: Vec<u8> = Vec::new();
    let outcome = match cfg.command {
        CommandKind::Curve => cmd_curve(cfg, &mut buf),
        CommandKind::Verify => cmd_verify(cfg, &mut buf),
        CommandKind::Simulate => cmd_simulate(cfg, &mut buf),
        CommandKind::Throughput => cmd_throughput(cfg, &mut buf),
    };
    // A failed verification still produces its report.
    if outcome.is_ok() || matches!(outcome, Err(Error::Verification(_))) {
        match &cfg.out {
            Some(path) => {
                fs::write(path, &buf).map_err(|e| Error::Io(format!("cannot write {}: {e}", path.display())))?
            }
            None => io::stdout().write_all(&buf)?,
        }
    }
    outcome
}

/// Parse arguments, run, and map the outcome to an exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let result = RunConfig::resolve(cli.command, cli.flags).and_then(|cfg| execute(&cfg));
    match result {
        Ok(()) => 0,
        Err(e @ Error::Verification(_)) => {
            eprintln!("error: {e}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
