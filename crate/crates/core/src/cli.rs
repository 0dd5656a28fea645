//! Command-line driver: loads a run document, dispatches one command and
//! writes its artifacts. Exit codes: 0 all checks passed, 1 a check failed or
//! the computation errored, 2 configuration error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use crate::audit::{audit_bounds, audit_convexity, audit_normal_controllability, AuditReport};
use crate::config::{self, Loaded, Reference};
use crate::error::{Error, Result};
use crate::field::{ValueField, Variant};
use crate::grid::GridSpec;
use crate::hamiltonians::{check_coercivity, check_ht_lipschitz, HamiltonianBoundsReport};
use crate::output::{self, FailureSummary};
use crate::reference;
use crate::solver::solve;
use crate::trajectory::{brute_force_value, dpp_residual, integrate, Branching, OracleMode, OracleSettings};
use crate::verification::{
    comparison_sweep, convergence_study, monotonicity_check, regular_limit_check, residual_check,
    stability_sweep, strict_subsolution_check, ResidualOptions, ScheduleSource,
};

pub const COMMANDS: [&str; 9] = [
    "audit",
    "solve-minus",
    "solve-plus",
    "trajectory",
    "oracle",
    "dpp",
    "verify",
    "stability",
    "convergence",
];

#[derive(Debug, Parser)]
#[command(name = "twodomain", version, about = "Value functions of optimal control problems with a discontinuity across a hyperplane")]
pub struct Args {
    /// Run document (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Overrides `[run].seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; overrides `[run].threads`.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Overrides `[run].command`.
    #[arg(long)]
    pub command: Option<String>,
}

/// Outcome of a command that ran to completion.
struct Outcome {
    failed: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self { failed: Vec::new() }
    }

    fn check(&mut self, name: &str, passed: bool) {
        if !passed {
            self.failed.push(name.to_string());
        }
    }
}

#[derive(Serialize)]
struct FieldMetadata<'a> {
    variant: Variant,
    grid: &'a GridSpec,
    dt: f64,
    steps: usize,
    min: f64,
    max: f64,
}

fn metadata(field: &ValueField) -> FieldMetadata<'_> {
    let last = field.last_layer();
    FieldMetadata {
        variant: field.variant(),
        grid: field.grid(),
        dt: field.dt(),
        steps: field.steps(),
        min: last.iter().copied().fold(f64::INFINITY, f64::min),
        max: last.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

fn timed<T>(label: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    let start = Instant::now();
    let out = f();
    eprintln!("{label}: {:.3} s", start.elapsed().as_secs_f64());
    out
}

fn require<T: Clone>(value: &Option<T>, location: &str) -> Result<T> {
    value
        .clone()
        .ok_or_else(|| Error::Config {
            location: location.into(),
            message: "required by this command".into(),
        })
}

fn mode_variant(mode: OracleMode) -> Variant {
    match mode {
        OracleMode::All => Variant::Minus,
        OracleMode::RegularOnly => Variant::Plus,
    }
}

fn oracle_settings(loaded: &Loaded) -> OracleSettings {
    let mut settings = OracleSettings::new(loaded.run.intervals);
    settings.h = loaded.run.h;
    if let Some(b) = loaded.run.budget {
        settings.budget = b;
    }
    settings
}

#[derive(Serialize)]
struct AuditDocument {
    seed: u64,
    bounds: AuditReport,
    normal_controllability: AuditReport,
    convexity: AuditReport,
    coercivity: HamiltonianBoundsReport,
    tangential_lipschitz: HamiltonianBoundsReport,
    strict_subsolution: crate::verification::SubsolutionReport,
}

fn cmd_audit(loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let (spec, run) = (&loaded.spec, &loaded.run);
    let seed = run.seed;
    let doc = AuditDocument {
        seed,
        bounds: audit_bounds(spec, run.samples, seed)?,
        normal_controllability: audit_normal_controllability(spec, run.samples, seed)?,
        convexity: audit_convexity(spec, run.samples.min(1000), seed, 0.05)?,
        coercivity: check_coercivity(spec, run.samples, seed, run.p_radius),
        tangential_lipschitz: check_ht_lipschitz(spec, run.pairs, seed, run.p_radius, loaded.ht_slack),
        strict_subsolution: strict_subsolution_check(spec, run.pairs, seed, None),
    };
    let mut outcome = Outcome::new();
    outcome.check("bounds", doc.bounds.passed);
    outcome.check("normal_controllability", doc.normal_controllability.passed);
    outcome.check("coercivity", doc.coercivity.passed);
    outcome.check("tangential_lipschitz", doc.tangential_lipschitz.passed);
    outcome.check("strict_subsolution", doc.strict_subsolution.passed);
    output::write_json(&out.join("audit.json"), &doc)?;
    Ok(outcome)
}

fn cmd_solve(loaded: &Loaded, out: &Path, variant: Variant) -> Result<Outcome> {
    let field = timed("solve", || solve(&loaded.spec, &loaded.grid, variant))?;
    let name = variant.as_str();
    output::write_text(&out.join(format!("value_{name}.csv")), &output::field_csv(&field, 1))?;
    output::write_json(&out.join(format!("value_{name}.json")), &metadata(&field))?;
    Ok(Outcome::new())
}

fn cmd_trajectory(loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let x0 = require(&loaded.run.x0, "run.x0")?;
    let schedule = loaded
        .schedule()?
        .ok_or_else(|| Error::config("run.schedule", "required by this command"))?;
    let h = loaded.run.h.unwrap_or(schedule.horizon() / 200.0);
    let traj = integrate(&loaded.spec, &x0, &schedule, h)?;
    #[derive(Serialize)]
    struct Summary<'a> {
        x0: &'a [f64],
        h: f64,
        final_state: &'a [f64],
        running_cost: f64,
        cost: f64,
        has_singular: bool,
        episodes: &'a [crate::trajectory::Episode],
    }
    let summary = Summary {
        x0: &x0,
        h,
        final_state: traj.final_state(),
        running_cost: traj.total_running_cost(),
        cost: crate::trajectory::cost(&loaded.spec, &traj),
        has_singular: traj.has_singular(),
        episodes: &traj.episodes,
    };
    output::write_text(&out.join("trajectory.csv"), &output::trajectory_csv(&traj))?;
    output::write_json(&out.join("trajectory.json"), &summary)?;
    Ok(Outcome::new())
}

fn cmd_oracle(loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let spec = &loaded.spec;
    let x0 = require(&loaded.run.x0, "run.x0")?;
    let t = loaded.run.t.unwrap_or(spec.horizon());
    let branching = Branching::subsampled(spec, loaded.run.stride, &x0, t);
    let result = timed("oracle", || {
        brute_force_value(spec, &x0, t, loaded.run.mode, &branching, &oracle_settings(loaded))
    })?;
    output::write_json(&out.join("oracle.json"), &result)?;
    Ok(Outcome::new())
}

fn cmd_dpp(loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let spec = &loaded.spec;
    let x0 = require(&loaded.run.x0, "run.x0")?;
    let t = loaded.run.t.unwrap_or(spec.horizon());
    let mode = loaded.run.mode;
    let field = timed("solve", || solve(spec, &loaded.grid, mode_variant(mode)))?;
    let branching = Branching::subsampled(spec, loaded.run.stride, &x0, t);
    let r = dpp_residual(spec, &field, &x0, t, loaded.run.tau, mode, &branching, &oracle_settings(loaded))?;
    #[derive(Serialize)]
    struct Doc<'a> {
        mode: OracleMode,
        tau: f64,
        tolerance: f64,
        result: &'a crate::trajectory::DppResidual,
        passed: bool,
    }
    let passed = r.residual <= loaded.run.tolerance;
    output::write_json(
        &out.join("dpp.json"),
        &Doc {
            mode,
            tau: loaded.run.tau,
            tolerance: loaded.run.tolerance,
            result: &r,
            passed,
        },
    )?;
    let mut outcome = Outcome::new();
    outcome.check("dpp_residual", passed);
    Ok(outcome)
}

fn cmd_verify(loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let (spec, grid, run) = (&loaded.spec, &loaded.grid, &loaded.run);
    let minus = timed("solve minus", || solve(spec, grid, Variant::Minus))?;
    let plus = timed("solve plus", || solve(spec, grid, Variant::Plus))?;
    let opts = ResidualOptions {
        tolerance: run.tolerance,
        ..ResidualOptions::default()
    };
    let comparison = comparison_sweep(spec, &minus, &plus, 1e-8)?;
    #[derive(Serialize)]
    struct Doc {
        residual_minus: crate::verification::ResidualReport,
        residual_plus: crate::verification::ResidualReport,
        comparison: crate::verification::ComparisonReport,
        monotonicity_minus: crate::verification::MonotonicityReport,
        monotonicity_plus: crate::verification::MonotonicityReport,
        strict_subsolution: crate::verification::SubsolutionReport,
    }
    let doc = Doc {
        residual_minus: residual_check(spec, &minus, &opts),
        residual_plus: residual_check(spec, &plus, &opts),
        monotonicity_minus: monotonicity_check(spec, grid, Variant::Minus, run.pairs, run.seed)?,
        monotonicity_plus: monotonicity_check(spec, grid, Variant::Plus, run.pairs, run.seed)?,
        strict_subsolution: strict_subsolution_check(spec, run.pairs, run.seed, None),
        comparison,
    };
    let mut outcome = Outcome::new();
    outcome.check("residual_minus", doc.residual_minus.passed);
    outcome.check("residual_plus", doc.residual_plus.passed);
    outcome.check("comparison", doc.comparison.passed);
    outcome.check("monotonicity_minus", doc.monotonicity_minus.passed);
    outcome.check("monotonicity_plus", doc.monotonicity_plus.passed);
    outcome.check("strict_subsolution", doc.strict_subsolution.passed);
    output::write_text(&out.join("gap_profile.csv"), &output::gap_profile_csv(&doc.comparison.gap_profile))?;
    output::write_json(&out.join("verify.json"), &doc)?;
    Ok(outcome)
}

fn cmd_stability(loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let spec = &loaded.spec;
    let family = require(&loaded.perturbation, "perturbation")?;
    let variants = match loaded.run.variant {
        Some(v) => vec![v],
        None => vec![Variant::Minus, Variant::Plus],
    };
    let mut outcome = Outcome::new();
    let mut reports = Vec::new();
    for v in variants {
        let r = timed("stability", || stability_sweep(spec, &family, &loaded.grid, v))?;
        outcome.check(&format!("stability_{}", v.as_str()), r.passed);
        reports.push(r);
    }
    let regular_limit = match &loaded.run.x0 {
        Some(x0) => {
            let t = loaded.run.t.unwrap_or(spec.horizon());
            let settings = oracle_settings(loaded);
            let h = settings.h.unwrap_or(t / (8 * settings.intervals) as f64);
            let source = ScheduleSource::Oracle {
                branching: Branching::subsampled(spec, loaded.run.stride, x0, t),
                settings,
            };
            let r = regular_limit_check(spec, &family, x0, t, h, &source)?;
            outcome.check("regular_limit", r.verdict);
            Some(r)
        }
        None => None,
    };
    #[derive(Serialize)]
    struct Doc {
        sweeps: Vec<crate::verification::StabilityReport>,
        regular_limit: Option<crate::verification::RegularLimitReport>,
    }
    output::write_json(
        &out.join("stability.json"),
        &Doc {
            sweeps: reports,
            regular_limit,
        },
    )?;
    Ok(outcome)
}

fn cmd_convergence(loaded: &Loaded, out: &Path) -> Result<Outcome> {
    let spec = &loaded.spec;
    let reference = require(&loaded.run.reference, "run.reference")?;
    let dx = loaded.grid.grid.min_spacing();
    let spacings = loaded
        .run
        .spacings
        .clone()
        .unwrap_or_else(|| (0..4).map(|k| dx / f64::from(1u32 << k)).collect());
    let variant = loaded.run.variant.unwrap_or(match reference {
        Reference::Eikonal => Variant::SingleDomain,
        Reference::GapMinus => Variant::Minus,
        Reference::GapPlus => Variant::Plus,
    });
    let n = spec.dim() - 1;
    let table = timed("convergence", || {
        convergence_study(spec, &spacings, variant, |x: &[f64], t: f64| match reference {
            Reference::Eikonal => reference::eikonal(x.iter().map(|v| v * v).sum::<f64>().sqrt(), t),
            Reference::GapMinus => reference::gap_minus(x[n], t),
            Reference::GapPlus => reference::gap_plus(x[n], t),
        })
    })?;
    let mut outcome = Outcome::new();
    outcome.check("observed_order", table.min_order().is_some_and(|o| o >= 0.5));
    output::write_text(&out.join("convergence.csv"), &output::convergence_csv(&table))?;
    output::write_json(&out.join("convergence.json"), &table)?;
    Ok(outcome)
}

fn dispatch(command: &str, loaded: &Loaded, out: &Path) -> Result<Outcome> {
    match command {
        "audit" => cmd_audit(loaded, out),
        "solve-minus" => cmd_solve(loaded, out, Variant::Minus),
        "solve-plus" => cmd_solve(loaded, out, Variant::Plus),
        "trajectory" => cmd_trajectory(loaded, out),
        "oracle" => cmd_oracle(loaded, out),
        "dpp" => cmd_dpp(loaded, out),
        "verify" => cmd_verify(loaded, out),
        "stability" => cmd_stability(loaded, out),
        "convergence" => cmd_convergence(loaded, out),
        other => Err(Error::config(
            "run.command",
            format!("unknown command `{other}`; expected one of {}", COMMANDS.join(", ")),
        )),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        _ => 1,
    }
}

fn fail(out: &Path, command: &str, code: i32, kind: &str, message: String, location: Option<String>, failed: Vec<String>) -> i32 {
    eprintln!("error: {message}");
    let summary = FailureSummary {
        command: command.into(),
        exit_code: code,
        kind: kind.into(),
        message,
        location,
        failed_checks: failed,
    };
    if let Err(e) = output::write_json(&out.join("failure.json"), &summary) {
        eprintln!("error: could not write failure summary: {e}");
    }
    code
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::InvalidArgument(_) => "invalid-argument",
        Error::Config { .. } => "config",
        Error::EmptyInterfaceStep { .. } => "empty-interface-step",
        Error::InconsistentInterfaceControl { .. } => "inconsistent-interface-control",
        Error::SlidingLost { .. } => "sliding-lost",
        Error::BudgetExceeded { .. } => "budget-exceeded",
        Error::NoControllabilityTriple { .. } => "no-controllability-triple",
        Error::Io { .. } => "io",
    }
}

/// Runs the parsed arguments and returns the process exit code.
pub fn run(args: Args) -> i32 {
    let out = args.out.clone();
    let mut loaded = match config::load_file(&args.config) {
        Ok(l) => l,
        Err(e) => {
            let location = match &e {
                Error::Config { location, .. } => Some(location.clone()),
                _ => None,
            };
            return fail(&out, args.command.as_deref().unwrap_or(""), 2, "config", e.to_string(), location, vec![]);
        }
    };
    if let Some(seed) = args.seed {
        loaded.run.seed = seed;
    }
    let command = match args.command.clone().or_else(|| loaded.run.command.clone()) {
        Some(c) => c,
        None => {
            return fail(&out, "", 2, "config", "no command given".into(), Some("run.command".into()), vec![]);
        }
    };
    let threads = args.threads.or(loaded.run.threads).unwrap_or(0);
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => return fail(&out, &command, 2, "config", e.to_string(), Some("threads".into()), vec![]),
    };
    match pool.install(|| dispatch(&command, &loaded, &out)) {
        Ok(outcome) if outcome.failed.is_empty() => 0,
        Ok(outcome) => {
            let message = format!("checks failed: {}", outcome.failed.join(", "));
            fail(&out, &command, 1, "check-failure", message, None, outcome.failed)
        }
        Err(e) => {
            let code = exit_code(&e);
            let location = match &e {
                Error::Config { location, .. } => Some(location.clone()),
                _ => None,
            };
            fail(&out, &command, code, error_kind(&e), e.to_string(), location, vec![])
        }
    }
}

/// Parses `argv` and runs; usage errors exit with 2.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Args::try_parse_from(argv) {
        Ok(args) => run(args),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                2
            } else {
                0
            }
        }
    }
}
