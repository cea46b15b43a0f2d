mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use regmn::closure::ProbeSettings;
use regmn::entropy::EntropyModel;
use regmn::experiments::manufactured::manufactured_samples;
use regmn::experiments::plane_source::PlaneSourceResult;
use regmn::experiments::probes::{run_bound_probes, run_oracle_checks};
use regmn::experiments::reference::{compare_rows, manufactured_errors, static_errors, RowCheck};
use regmn::experiments::report::{
    render_convergence_table, write_convergence_csv, write_diagnostics_csv, write_file, write_profile_csv,
};
use regmn::experiments::static_accuracy::static_samples;
use regmn::experiments::{
    parse_rule, run_plane_source, with_orders, ConvergenceRow, ManufacturedConfig, ParamRule, PlaneSourceConfig,
    StaticTestConfig,
};

use config::ConfigFile;

#[derive(Parser, Debug)]
#[command(
    name = "regmn",
    version,
    about = "Regularized entropy-based moment closure experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Closure error on projected moment vectors against mesh width.
    StaticAccuracy,
    /// DG convergence study against a manufactured solution.
    Manufactured,
    /// Plane-source benchmark; writes profiles and diagnostics.
    PlaneSource,
    /// Random checks of the moment-regularization error bounds.
    ProbeBounds,
    /// Solver against the closed-form closures.
    OracleCheck,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat key = value file with defaults for any flag below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// mb, be, fd or quadratic.
    #[arg(long, global = true)]
    entropy: Option<String>,
    /// Highest Legendre degree of the velocity basis.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Spatial modes per cell (comma-separated list where a study allows it).
    #[arg(long, global = true)]
    dg_degree: Option<String>,
    /// Cell count (comma-separated list for the manufactured study).
    #[arg(long, global = true)]
    cells: Option<String>,
    /// Regularization parameter (comma-separated list for plane-source).
    #[arg(long, global = true)]
    gamma: Option<String>,
    /// Solver tolerance on the dual gradient.
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// fixed, dx^k or <factor>*dx^k.
    #[arg(long, global = true)]
    gamma_rule: Option<String>,
    #[arg(long, global = true)]
    tfinal: Option<f64>,
    /// Velocity quadrature points.
    #[arg(long, global = true)]
    quad_q: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for CSV files.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Compare against reference tolerances and fail on any breach.
    #[arg(long, global = true)]
    check: bool,
    /// Probe ball radius.
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Probe perturbation size.
    #[arg(long, global = true)]
    delta: Option<f64>,
    /// Probe sample count.
    #[arg(long, global = true)]
    samples: Option<usize>,
}

/// Comma-separated list.
#[derive(Debug, Clone)]
struct List<T>(Vec<T>);

impl<T: FromStr> FromStr for List<T>
where
    T::Err: std::fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        s.split(',')
            .map(|p| p.trim().parse::<T>().map_err(|e| format!("'{p}': {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map(List)
    }
}

/// Flags after merging with the config file.
#[derive(Debug, Default)]
struct Settings {
    entropy: Option<EntropyModel>,
    order: Option<usize>,
    dg_degree: Option<Vec<usize>>,
    cells: Option<Vec<usize>>,
    gamma: Option<Vec<f64>>,
    tau: Option<f64>,
    gamma_rule: Option<String>,
    tfinal: Option<f64>,
    quad_q: Option<usize>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    check: bool,
    radius: Option<f64>,
    delta: Option<f64>,
    samples: Option<usize>,
}

fn cli_list<T: FromStr>(raw: &Option<String>, key: &str) -> Result<Option<List<T>>>
where
    T::Err: std::fmt::Display,
{
    raw.as_deref()
        .map(|s| s.parse::<List<T>>().map_err(|e| anyhow::anyhow!("--{key}: {e}")))
        .transpose()
}

impl Settings {
    fn resolve(c: &Common) -> Result<Self> {
        let file = match &c.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let entropy: Option<String> = file.merge("entropy", c.entropy.clone())?;
        Ok(Self {
            entropy: entropy
                .map(|e| e.parse::<EntropyModel>())
                .transpose()
                .map_err(|e| anyhow::anyhow!("{e}"))?,
            order: file.merge("order", c.order)?,
            dg_degree: file
                .merge::<List<usize>>("dg-degree", cli_list(&c.dg_degree, "dg-degree")?)?
                .map(|l| l.0),
            cells: file
                .merge::<List<usize>>("cells", cli_list(&c.cells, "cells")?)?
                .map(|l| l.0),
            gamma: file
                .merge::<List<f64>>("gamma", cli_list(&c.gamma, "gamma")?)?
                .map(|l| l.0),
            tau: file.merge("tau", c.tau)?,
            gamma_rule: file.merge("gamma-rule", c.gamma_rule.clone())?,
            tfinal: file.merge("tfinal", c.tfinal)?,
            quad_q: file.merge("quad-q", c.quad_q)?,
            seed: file.merge("seed", c.seed)?,
            out: file.merge("out", c.out.clone())?,
            check: file.flag("check", c.check)?,
            radius: file.merge("radius", c.radius)?,
            delta: file.merge("delta", c.delta)?,
            samples: file.merge("samples", c.samples)?,
        })
    }

    fn single_gamma(&self) -> Result<Option<f64>> {
        match self.gamma.as_deref() {
            None => Ok(None),
            Some([g]) => Ok(Some(*g)),
            Some(_) => bail!("this command takes a single --gamma value"),
        }
    }

    /// Gamma rule, with `fixed` taking the value of `--gamma`.
    fn gamma_rule(&self, default: ParamRule) -> Result<ParamRule> {
        match (&self.gamma_rule, self.single_gamma()?) {
            (Some(r), g) => Ok(parse_rule(r, g)?),
            (None, Some(g)) => Ok(ParamRule::Fixed(g)),
            (None, None) => Ok(default),
        }
    }

    fn tau_rule(&self, gamma_rule: ParamRule) -> ParamRule {
        self.tau.map_or(gamma_rule, ParamRule::Fixed)
    }

    fn out_path(&self, name: &str) -> Option<PathBuf> {
        self.out.as_ref().map(|d| d.join(name))
    }
}

fn save(path: Option<PathBuf>, f: impl FnOnce(std::fs::File) -> std::io::Result<()>) -> Result<()> {
    if let Some(p) = path {
        write_file(&p, f).with_context(|| format!("writing {}", p.display()))?;
        eprintln!("wrote {}", p.display());
    }
    Ok(())
}

fn print_checks(label: &str, checks: &[RowCheck]) -> bool {
    let mut ok = true;
    for c in checks {
        let order = match c.order_ok {
            Some(true) => "order ok",
            Some(false) => "ORDER OFF",
            None => "",
        };
        let factor = if c.within_factor { "ok" } else { "OUT OF RANGE" };
        println!(
            "  {label} res={} error={:.3e} reference={:.3e} ratio={:.2} {factor} {order}",
            c.resolution, c.error, c.reference, c.ratio
        );
        ok &= c.within_factor && c.order_ok != Some(false);
    }
    ok
}

fn static_accuracy(s: &Settings) -> Result<bool> {
    let ks = s.dg_degree.clone().unwrap_or_else(|| vec![2, 3, 4]);
    let mut series = Vec::new();
    let mut ok = true;
    for k in ks {
        let mut cfg = StaticTestConfig::reference(k);
        cfg.gamma_rule = s.gamma_rule(cfg.gamma_rule)?;
        cfg.tau_rule = s.tau_rule(cfg.gamma_rule);
        if let Some(n) = s.order {
            cfg.order = n;
        }
        if let Some(q) = s.quad_q {
            cfg.velocity_points = q;
        }
        if let Some(m) = s.entropy {
            cfg.model = m;
        }
        let samples = static_samples(&cfg)?;
        let rows = with_orders(samples.iter().map(|x| (x.dx, x.error)).collect(), true);
        save(s.out_path(&format!("static_accuracy_k{k}.csv")), |f| {
            write_convergence_csv(f, &rows)
        })?;
        if s.check {
            match static_errors(k) {
                Some(r) => ok &= print_checks(&format!("k={k}"), &compare_rows(&rows, r, 2.0, k as f64, 3, 0.3)),
                None => bail!("no reference values for k = {k}"),
            }
        }
        series.push((format!("k={k}"), rows));
    }
    print!(
        "{}",
        render_convergence_table("static regularization error", "dx", &series)
    );
    Ok(ok)
}

fn manufactured(s: &Settings) -> Result<bool> {
    let ks = s.dg_degree.clone().unwrap_or_else(|| vec![2, 3, 4]);
    let mut series = Vec::new();
    let mut ok = true;
    for k in ks {
        let mut cfg = ManufacturedConfig::reference(k);
        cfg.gamma_rule = s.gamma_rule(cfg.gamma_rule)?;
        cfg.tau_rule = s.tau_rule(cfg.gamma_rule);
        if let Some(c) = &s.cells {
            cfg.cells = c.clone();
        }
        if let Some(n) = s.order {
            cfg.order = n;
        }
        if let Some(q) = s.quad_q {
            cfg.velocity_points = q;
        }
        if let Some(t) = s.tfinal {
            cfg.t_final = t;
        }
        if let Some(m) = s.entropy {
            cfg.model = m;
        }
        let samples = manufactured_samples(&cfg)?;
        for x in &samples {
            eprintln!(
                "k={k} cells={} steps={} solves={} newton/solve={:.2}",
                x.cells,
                x.steps,
                x.solves,
                x.newton_iterations as f64 / x.solves.max(1) as f64
            );
        }
        let rows: Vec<ConvergenceRow> = with_orders(samples.iter().map(|x| (x.cells as f64, x.error)).collect(), false);
        save(s.out_path(&format!("manufactured_k{k}.csv")), |f| {
            write_convergence_csv(f, &rows)
        })?;
        if s.check {
            let Some(r) = manufactured_errors(k) else {
                bail!("no reference values for k = {k}");
            };
            if cfg.cells.as_slice() != regmn::experiments::reference::MANUFACTURED_CELLS {
                bail!("--check needs the reference cell counts 320,640,1280");
            }
            ok &= print_checks(&format!("k={k}"), &compare_rows(&rows, r, 2.0, k as f64, 3, 0.3));
        }
        series.push((format!("k={k}"), rows));
    }
    print!(
        "{}",
        render_convergence_table("manufactured solution L1 error", "cells", &series)
    );
    Ok(ok)
}

fn plane_source_summary(r: &PlaneSourceResult) -> (f64, f64) {
    let d = &r.diagnostics;
    let mass_drift = match (d.first(), d.last()) {
        (Some(a), Some(b)) => (b.mass - a.mass).abs() / a.mass.abs(),
        _ => f64::NAN,
    };
    (mass_drift, r.asymmetry())
}

fn plane_source(s: &Settings) -> Result<bool> {
    let gammas = s.gamma.clone().unwrap_or_else(|| vec![1e-6]);
    let mut ok = true;
    for gamma in gammas {
        let mut cfg = PlaneSourceConfig {
            gamma,
            ..PlaneSourceConfig::default()
        };
        if let Some(t) = s.tau {
            cfg.tau = t;
        }
        if let Some(n) = s.order {
            cfg.order = n;
        }
        if let Some(c) = s.cells.as_deref() {
            match c {
                [n] => cfg.cells = *n,
                _ => bail!("plane-source takes a single --cells value"),
            }
        }
        if let Some(k) = s.dg_degree.as_deref() {
            match k {
                [k] => cfg.k = *k,
                _ => bail!("plane-source takes a single --dg-degree value"),
            }
        }
        if let Some(q) = s.quad_q {
            cfg.velocity_points = q;
        }
        if let Some(t) = s.tfinal {
            cfg.t_final = t;
        }
        if let Some(m) = s.entropy {
            cfg.model = m;
        }
        let r = run_plane_source(&cfg)?;
        let (drift, asym) = plane_source_summary(&r);
        println!(
            "gamma={gamma:e} steps={} solves={} newton/solve={:.2} relative mass drift={drift:.3e} asymmetry={asym:.3e}",
            r.steps,
            r.solves,
            r.newton_iterations as f64 / r.solves.max(1) as f64
        );
        let tag = format!("{gamma:e}");
        save(s.out_path(&format!("plane_source_profile_gamma{tag}.csv")), |f| {
            write_profile_csv(f, &r.profile)
        })?;
        save(s.out_path(&format!("plane_source_diagnostics_gamma{tag}.csv")), |f| {
            write_diagnostics_csv(f, &r.diagnostics)
        })?;
        if s.check {
            let pass = drift <= 1e-10 && asym <= 1e-10;
            println!(
                "  mass <= 1e-10: {}  evenness <= 1e-10: {}",
                drift <= 1e-10,
                asym <= 1e-10
            );
            ok &= pass;
        }
    }
    Ok(ok)
}

fn probe_bounds(s: &Settings) -> Result<bool> {
    let defaults = ProbeSettings::default();
    let gamma = s.single_gamma()?.unwrap_or(defaults.gamma);
    let settings = ProbeSettings {
        radius: s.radius.unwrap_or(defaults.radius),
        delta: s.delta.unwrap_or(defaults.delta),
        gamma,
        tau: s.tau.unwrap_or(defaults.tau),
        samples: s.samples.unwrap_or(defaults.samples),
        seed: s.seed.unwrap_or(defaults.seed),
        ..defaults
    };
    let order = s.order.unwrap_or(3);
    let model = s.entropy.unwrap_or(EntropyModel::MAXWELL_BOLTZMANN);
    let r = run_bound_probes(&settings, order, s.quad_q.unwrap_or(40), model)?;
    println!(
        "samples={} failures={} M={} delta={:e} gamma={:e} tau={:e}",
        r.samples, r.failures, r.m_used, r.delta_used, r.gamma_used, r.tau_used
    );
    println!(
        "exact-solve bound:    max ratio {:.4} violations {}",
        r.max_ratio, r.violations
    );
    println!(
        "inexact-solve bound:  max ratio {:.4} violations {}",
        r.max_ratio_tau, r.violations_tau
    );
    Ok(!s.check || (r.violations == 0 && r.violations_tau == 0 && r.failures == 0))
}

fn oracle_check(s: &Settings) -> Result<bool> {
    let checks = run_oracle_checks(s.seed.unwrap_or(ProbeSettings::default().seed))?;
    let mut ok = true;
    for c in &checks {
        let kind = if c.relative { "relative" } else { "absolute" };
        println!(
            "{:<14} cases={:<4} max {kind} error={:.3e} tolerance={:.0e} {}",
            c.name,
            c.cases,
            c.error,
            c.tolerance,
            if c.passed() { "PASS" } else { "FAIL" }
        );
        ok &= c.passed();
    }
    Ok(!s.check || ok)
}

fn run(cli: &Cli) -> Result<bool> {
    let s = Settings::resolve(&cli.common)?;
    if let Some(dir) = &s.out {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", Path::new(dir).display()))?;
    }
    match cli.command {
        Command::StaticAccuracy => static_accuracy(&s),
        Command::Manufactured => manufactured(&s),
        Command::PlaneSource => plane_source(&s),
        Command::ProbeBounds => probe_bounds(&s),
        Command::OracleCheck => oracle_check(&s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
