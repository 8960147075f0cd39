//! Command-line front end: `gap`, `simulate`, `compare`, `sweep`, `verify`.
//! Every command writes its report to the given sink so it can be tested
//! without a process boundary.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::csvio;
use crate::error::{Error, Result};
use crate::scenario::{self, ControllerKind, ResolveOptions, Scenario};
use crate::sim::{self, TrajectoryLog};
use crate::so3::Vec3;
use crate::trace_potential::{SpectrumClass, WeightMatrix};
use crate::verify::{self, Level};
use crate::warping::{self, GainPolicy, WarpedPotential};

/// Default `ε` list of the `sweep` command.
pub const DEFAULT_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

/// Thresholds on `e(X₂)` reported by `compare` and `sweep`.
pub const THRESHOLDS: [f64; 2] = [0.5, 0.01];

#[derive(Debug, Parser)]
#[command(name = "warpsyn", version, about = "Synergistic warped potentials on SO(3) and a velocity-free hybrid attitude controller")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Feasibility, optimal warping axis, critical points and gap of a weight.
    Gap(GapArgs),
    /// Run one scenario and write its trajectory as CSV.
    Simulate(SimulateArgs),
    /// Run the hybrid and the smooth controller from the same scenario.
    Compare(CompareArgs),
    /// Smooth runs started near the half turn about e1, one per epsilon.
    Sweep(SweepArgs),
    /// Run the built-in oracle suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// `diag(x,y,z)` or nine comma-separated reals (row major).
    pub weight: String,
    /// Warping axis `x,y,z`; normalized. Defaults to the optimal axis.
    #[arg(long, allow_hyphen_values = true)]
    pub u: Option<String>,
    /// Warping gain; `Q = {1, 2}` with gains `k, −k`. Defaults to 0.95·k̄.
    #[arg(long, allow_hyphen_values = true)]
    pub k: Option<f64>,
    /// Keep `k` as given even at or above k̄.
    #[arg(long)]
    pub paper_exact: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ControllerArg {
    Hybrid,
    Smooth,
}

impl From<ControllerArg> for ControllerKind {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Hybrid => ControllerKind::Hybrid,
            ControllerArg::Smooth => ControllerKind::Smooth,
        }
    }
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    pub scenario: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep gains and thresholds as typed even when they violate the bounds.
    #[arg(long)]
    pub paper_exact: bool,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: ScenarioArgs,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the scenario controller.
    #[arg(long, value_enum)]
    pub controller: Option<ControllerArg>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: ScenarioArgs,
    /// Output prefix; writes `<prefix>_hybrid.csv` and `<prefix>_smooth.csv`.
    /// Defaults to the scenario file stem.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: ScenarioArgs,
    /// Comma-separated list; falls back to the scenario `eps`, then 1e-1,1e-2,1e-3.
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Output prefix; writes `<prefix>_eps<i>.csv`. Defaults to the scenario file stem.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides the scenario controller.
    #[arg(long, value_enum)]
    pub controller: Option<ControllerArg>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LevelArg {
    Quick,
    Full,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    pub level: LevelArg,
    /// Gain used by the determinant suite, as a multiple of k̄.
    #[arg(long, default_value_t = 0.99)]
    pub gain_factor: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Dispatches a parsed command. Reports go to `out`; CSV goes to `out` only
/// for `simulate` without `--out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Gap(a) => cmd_gap(&a, out),
        Command::Simulate(a) => cmd_simulate(&a, out),
        Command::Compare(a) => cmd_compare(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    }
}

fn parse_vec(s: &str) -> Result<Vec3> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::parse(0, format!("`{s}`: {e}")))?;
    match parts[..] {
        [x, y, z] => Ok(Vec3::new(x, y, z)),
        _ => Err(Error::parse(0, format!("`{s}`: expected three reals"))),
    }
}

fn class_name(c: SpectrumClass) -> &'static str {
    match c {
        SpectrumClass::Isotropic => "isotropic",
        SpectrumClass::TwoDistinct => "two-distinct",
        SpectrumClass::ThreeDistinct => "three-distinct",
    }
}

fn fmt3(v: Vec3) -> String {
    format!("[{:.6}, {:.6}, {:.6}]", v.x, v.y, v.z)
}

pub fn cmd_gap(a: &GapArgs, out: &mut dyn Write) -> Result<()> {
    let w = WeightMatrix::new(scenario::parse_matrix(0, a.weight.trim())?)?;
    let k_bar = warping::k_bound(&w);
    let la = w.eigvals_a();
    let lw = w.w_eigvals();
    let mut r = String::new();
    let _ = writeln!(r, "spectrum      {}", class_name(w.class()));
    let _ = writeln!(r, "eig(A)        {:.6}, {:.6}, {:.6}", la[0], la[1], la[2]);
    let _ = writeln!(r, "eig(W)        {:.6}, {:.6}, {:.6}", lw[0], lw[1], lw[2]);
    let _ = writeln!(r, "xi            {:.6}", w.xi());
    let _ = writeln!(r, "k_bar         {k_bar:.6}");
    if w.class() == SpectrumClass::Isotropic {
        out.write_all(r.as_bytes())?;
        return Err(Error::Infeasible(
            "isotropic spectrum: every direction is an eigenvector, so Δ(v,u) ≤ 0 for v ⟂ u".into(),
        ));
    }
    let opt = match warping::optimal_u(&w) {
        Ok(o) => Some(o),
        Err(e) if a.u.is_none() => {
            out.write_all(r.as_bytes())?;
            return Err(e);
        }
        Err(_) => None,
    };
    let u = match &a.u {
        Some(s) => {
            let v = parse_vec(s)?;
            v.try_normalize()
                .filter(|_| v.norm() > 0.0)
                .ok_or_else(|| Error::Precondition("--u is zero".into()))?
        }
        None => opt.as_ref().expect("checked above").u,
    };
    if let Some(o) = &opt {
        let _ = writeln!(r, "optimal u     {} ({:?})", fmt3(o.u), o.branch);
        let _ = writeln!(
            r,
            "(u·v_i)^2     {:.6}, {:.6}, {:.6}",
            o.alpha_sq[0], o.alpha_sq[1], o.alpha_sq[2]
        );
        let _ = writeln!(r, "optimal min Δ {:.6}", o.min_delta);
    }
    let feas = warping::feasibility(&w, u);
    let _ = writeln!(r, "u             {}", fmt3(u));
    let _ = writeln!(r, "feasible      {}", if feas.feasible { "yes" } else { "no" });
    if !feas.reason.is_empty() {
        let _ = writeln!(r, "reason        {}", feas.reason);
    }
    for (name, d) in &feas.deltas {
        let _ = writeln!(r, "Δ {name:<11} {d:.6}");
    }
    if !feas.feasible {
        out.write_all(r.as_bytes())?;
        return Err(Error::Infeasible(
            feas.reason,
        ));
    }
    let (k, policy) = match a.k {
        None => (warping::default_gain(&w), GainPolicy::Strict),
        Some(k) if k.abs() < k_bar => (k, GainPolicy::Strict),
        Some(k) if a.paper_exact => {
            let _ = writeln!(r, "note          k = {k} kept at or above k_bar");
            (k, GainPolicy::ArcsinDomain)
        }
        Some(k) => {
            let c = warping::clamp_gain(&w, k);
            let _ = writeln!(r, "note          k = {k} clamped to {c:.6}");
            (c, GainPolicy::Strict)
        }
    };
    let wp = WarpedPotential::with_policy(w, u, vec![k, -k], policy)?;
    let _ = writeln!(r, "k             {k:.6}");
    let pts = wp.critical_points()?;
    let _ = writeln!(r, "critical points (v, q, λW, Δ, V̄, θ, μ)");
    for p in &pts {
        let _ = writeln!(
            r,
            "  {} {} {:.6} {:.6} {:.6} {:.6} {:.6}",
            fmt3(p.v),
            p.q,
            p.lambda_w,
            p.delta,
            p.v_bar,
            p.theta,
            wp.mu(&p.rotation, p.q)
        );
    }
    let gap = wp.gap()?;
    let _ = writeln!(r, "gap           {gap:.6}");
    let _ = writeln!(r, "delta (0.5 gap) {:.6}", 0.5 * gap);
    let _ = writeln!(r, "[summary]");
    let _ = writeln!(r, "class={}", class_name(wp.weight().class()));
    let _ = writeln!(r, "k_bar={k_bar:.17e}");
    let _ = writeln!(r, "k={k:.17e}");
    let _ = writeln!(r, "u={:.17e},{:.17e},{:.17e}", u.x, u.y, u.z);
    let _ = writeln!(r, "min_delta={:.17e}", wp.delta_min());
    let _ = writeln!(r, "gap={gap:.17e}");
    let _ = writeln!(r, "delta={:.17e}", 0.5 * gap);
    out.write_all(r.as_bytes())?;
    Ok(())
}

fn resolve(c: &ScenarioArgs) -> Result<scenario::Resolved> {
    Scenario::from_path(&c.scenario)?.resolve(ResolveOptions {
        paper_exact: c.paper_exact,
        seed: c.seed,
    })
}

fn write_csv(path: &Path, comments: &str, log: &TrajectoryLog) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    csvio::write_log(&mut f, comments, log)?;
    f.flush()?;
    Ok(())
}

fn fmt_time(t: Option<f64>) -> String {
    t.map_or_else(|| "none".into(), |t| format!("{t:.3}"))
}

pub fn cmd_simulate(a: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let res = resolve(&a.common)?;
    let kind = a.controller.map_or(res.scenario.controller, Into::into);
    let log = sim::run(&res.sim_config(kind)?)?;
    let header = res.header(kind);
    match &a.out {
        Some(p) => {
            write_csv(p, &header, &log)?;
            let last = log.last().expect("at least one record");
            writeln!(
                out,
                "{}: {} records, {} jumps, e2(t_end) = {:.6e} -> {}",
                kind.name(),
                log.records.len(),
                log.jumps(),
                last.e[1],
                p.display()
            )?;
        }
        None => csvio::write_log(&mut *out, &header, &log)?,
    }
    Ok(())
}

fn prefix(given: &Option<PathBuf>, scenario: &Path) -> PathBuf {
    given.clone().unwrap_or_else(|| {
        PathBuf::from(scenario.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned()))
    })
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// Hybrid and smooth logs from identical initial conditions.
pub fn compare_logs(res: &scenario::Resolved) -> Result<[TrajectoryLog; 2]> {
    let cfgs = [
        res.sim_config(ControllerKind::Hybrid)?,
        res.sim_config(ControllerKind::Smooth)?,
    ];
    let mut logs = sim::run_batch(&cfgs).into_iter();
    Ok([logs.next().unwrap()?, logs.next().unwrap()?])
}

pub fn cmd_compare(a: &CompareArgs, out: &mut dyn Write) -> Result<()> {
    let res = resolve(&a.common)?;
    let logs = compare_logs(&res)?;
    let pre = prefix(&a.out, &a.common.scenario);
    writeln!(out, "controller  jumps  e2(t_end)     t(e2<0.5)  t(e2<0.01)  file")?;
    for (kind, log) in [ControllerKind::Hybrid, ControllerKind::Smooth].iter().zip(&logs) {
        let path = with_suffix(&pre, &format!("_{}.csv", kind.name()));
        write_csv(&path, &res.header(*kind), log)?;
        writeln!(
            out,
            "{:<10}  {:>5}  {:.6e}  {:>9}  {:>10}  {}",
            kind.name(),
            log.jumps(),
            log.last().expect("at least one record").e[1],
            fmt_time(log.time_below(2, THRESHOLDS[0])),
            fmt_time(log.time_below(2, THRESHOLDS[1])),
            path.display()
        )?;
    }
    Ok(())
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let res = resolve(&a.common)?;
    let eps = a
        .eps
        .clone()
        .or_else(|| res.scenario.eps.clone())
        .unwrap_or_else(|| DEFAULT_EPS.to_vec());
    let kind = a.controller.map_or(ControllerKind::Smooth, Into::into);
    let cfg = res.sim_config(kind)?;
    let logs = sim::sweep_epsilon(&cfg, &eps)?;
    let pre = prefix(&a.out, &a.common.scenario);
    writeln!(out, "eps           t(e2<0.5)  t(e2<0.01)  file")?;
    let mut onsets = Vec::new();
    for (i, (e, log)) in eps.iter().zip(&logs).enumerate() {
        let path = with_suffix(&pre, &format!("_eps{i}.csv"));
        let header = format!("{}# eps = {e:.17e}\n# run seed = {}\n", res.header(kind), sim::derive_seed(res.seed, i as u64));
        write_csv(&path, &header, log)?;
        let onset = log.time_below(2, THRESHOLDS[0]);
        onsets.push((*e, onset));
        writeln!(
            out,
            "{e:<12.3e}  {:>9}  {:>10}  {}",
            fmt_time(onset),
            fmt_time(log.time_below(2, THRESHOLDS[1])),
            path.display()
        )?;
    }
    let mut sorted = onsets.clone();
    sorted.sort_by(|x, y| y.0.total_cmp(&x.0));
    let monotone = sorted.windows(2).all(|w| match (w[0].1, w[1].1) {
        (Some(a), Some(b)) => a < b,
        (Some(_), None) => true,
        _ => false,
    });
    writeln!(
        out,
        "onset ordering: {}",
        if monotone { "monotone (smaller eps leaves later)" } else { "not monotone" }
    )?;
    Ok(())
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let level = match a.level {
        LevelArg::Quick => Level::Quick,
        LevelArg::Full => Level::Full,
    };
    let reports = verify::run_all(level, a.gain_factor, a.seed);
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
    if failed.is_empty() {
        writeln!(out, "all {} suites passed", reports.len())?;
        Ok(())
    } else {
        Err(Error::Precondition(format!("failed suites: {}", failed.join(", "))))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<()>, String) {
        let cli = Cli::try_parse_from(std::iter::once("warpsyn").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let r = run(cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    fn summary(text: &str, key: &str) -> f64 {
        text.lines()
            .skip_while(|l| *l != "[summary]")
            .find_map(|l| l.strip_prefix(&format!("{key}=")))
            .unwrap()
            .parse()
            .unwrap()
    }

    #[test]
    fn gap_reports_optimal_axis() {
        let (r, text) = run_args(&["gap", "diag(1,3,5)"]);
        r.unwrap();
        assert!((summary(&text, "k_bar") - 1.0 / (16.0 * 5f64.sqrt())).abs() < 1e-12);
        assert!((summary(&text, "min_delta") - 1.0).abs() < 1e-12);
        assert!(text.contains("[0.000000, 0.612372, 0.790569]"), "{text}");
    }

    #[test]
    fn gap_isotropic_is_infeasible() {
        let (r, _) = run_args(&["gap", "diag(2,2,2)"]);
        let e = r.unwrap_err();
        assert!(e.to_string().starts_with("infeasible: isotropic spectrum"), "{e}");
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn gap_two_distinct_axis() {
        let (r, text) = run_args(&["gap", "diag(1,1,5)"]);
        r.unwrap();
        let line = text.lines().find(|l| l.starts_with("(u·v_i)^2")).unwrap();
        let last: f64 = line.rsplit(", ").next().unwrap().trim().parse().unwrap();
        assert!((last - 0.8).abs() < 1e-6, "{line}");
    }

    #[test]
    fn gap_clamps_unless_exact() {
        let (r, text) = run_args(&["gap", "diag(1,3,5)", "--k", "0.03"]);
        r.unwrap();
        assert!(text.contains("clamped"));
        let (r, text) = run_args(&["gap", "diag(1,3,5)", "--k", "0.03", "--paper-exact"]);
        r.unwrap();
        assert!((summary(&text, "k") - 0.03).abs() < 1e-15);
    }

    #[test]
    fn gap_bad_weight_is_parse_error() {
        let (r, _) = run_args(&["gap", "diag(1,3)"]);
        assert_eq!(r.unwrap_err().exit_code(), 2);
    }

    #[test]
    fn verify_rejects_large_gain() {
        let (r, text) = run_args(&["verify", "--gain-factor", "1.5"]);
        assert!(r.is_err());
        assert!(text.contains("FAIL det-theta"), "{text}");
    }
}
