//! Command-line front end for `qtwt-core`: instance files, result bundles
//! and the `solve`, `qsim`, `sweep` and `validate` commands.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 parse or usage error, 3 capacity
//! exceeded, 4 post-selection impossible, 5 retry budget exhausted.

pub mod args;
pub mod error;
pub mod instance;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use clap::Parser;
use qtwt_core::phase::Mode;
use qtwt_core::pipeline::{run_pipeline, sweep, validate, BetaMode, Rounds, ValidationSummary};
use qtwt_core::sched::{
    brute_force_optimum, pad_instance, AlphaMode, Instance, Lateness, DEFAULT_ENUMERATION_LIMIT,
};
use serde_json::{json, Value};

use crate::args::{Cli, Command, SimArgs};
pub use crate::error::{exit, CliError};
use crate::instance::{display_rational, InstanceFile};
use crate::output::{json_bytes, write_atomic};

/// Parses `argv` and runs the command. `max_qubits_env` is the value of
/// [`args::MAX_QUBITS_ENV`], if set. Returns the process exit code.
pub fn run<I, T>(
    argv: I,
    max_qubits_env: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, max_qubits_env, out, err) {
        Ok(()) => exit::OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(
    command: Command,
    max_qubits_env: Option<&str>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let max_qubits = args::max_qubits(max_qubits_env)?;
    match command {
        Command::Solve { instance, clamp } => solve(&instance, clamp, out),
        Command::Qsim {
            instance,
            sim,
            out: dir,
        } => qsim(&instance, &sim, &dir, max_qubits, out, err),
        Command::Sweep {
            instance,
            param,
            grid,
            sim,
            out: file,
        } => {
            let (_, inst) = load_padded(&instance, err)?;
            let rows = sweep(&inst, &sim.config(max_qubits), param.into(), &grid.0)?;
            write_atomic(&file, &output::sweep_csv(&rows)?)?;
            say(
                out,
                format_args!("wrote {} rows to {}", rows.len(), file.display()),
            )
        }
        Command::Validate {
            m,
            count,
            unique,
            sim,
            out: file,
        } => {
            let summary = validate(m, count, &sim.config(max_qubits), unique)?;
            report_validation(&summary, &sim, out)?;
            match file {
                Some(file) => write_atomic(
                    &file,
                    &json_bytes(&validation_json(&summary, &sim, m, unique, max_qubits)),
                ),
                None => Ok(()),
            }
        }
    }
}

fn say(out: &mut dyn Write, args: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    writeln!(out, "{args}").map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn solve(path: &Path, clamp: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let inst = InstanceFile::read(path)?.instance()?;
    let optimum = brute_force_optimum(
        &inst,
        Lateness::from_clamp(clamp),
        DEFAULT_ENUMERATION_LIMIT,
    )?;
    let cost = display_rational(&optimum.cost);
    for s in &optimum.schedules {
        say(out, format_args!("optimal: {s} cost {cost}"))?;
    }
    Ok(())
}

/// Reads an instance file and pads it to a power of two, noting any padding.
fn load_padded(path: &Path, err: &mut dyn Write) -> Result<(InstanceFile, Instance), CliError> {
    let file = InstanceFile::read(path)?;
    let inst = file.instance()?;
    if inst.is_power_of_two() {
        return Ok((file, inst));
    }
    let padded = pad_instance(&inst);
    let _ = writeln!(
        err,
        "note: padded {} tasks to {} with zero-length, zero-weight dummy tasks",
        inst.len(),
        padded.len()
    );
    Ok((file, padded))
}

fn qsim(
    path: &Path,
    sim: &SimArgs,
    dir: &Path,
    max_qubits: u32,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> Result<(), CliError> {
    let (file, inst) = load_padded(path, err)?;
    let run = run_pipeline(&inst, &sim.config(max_qubits))?;
    for w in &run.report.warnings {
        let _ = writeln!(err, "warning: {w}");
    }
    let rows = run.distribution();

    let mut summary = json!({
        "instance": file.name,
        "tasks": inst.original_count(),
        "padded_tasks": inst.len(),
        "seed": sim.seed,
        "config": config_json(sim, max_qubits),
    });
    if let (Value::Object(base), Value::Object(extra)) =
        (&mut summary, output::run_json(&run, &rows))
    {
        base.extend(extra);
    }

    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    write_atomic(
        &dir.join(output::DISTRIBUTION_FILE),
        &output::distribution_csv(&rows)?,
    )?;
    if let Some(samples) = &run.samples {
        write_atomic(
            &dir.join(output::SAMPLES_FILE),
            &output::samples_csv(samples, &run.encoding())?,
        )?;
    }
    write_atomic(&dir.join(output::SUMMARY_FILE), &json_bytes(&summary))?;

    let r = &run.report;
    let schedule = match &r.argmax_schedule {
        Some(s) => s.to_string(),
        None => "infeasible".into(),
    };
    say(
        out,
        format_args!(
            "argmax: basis {} schedule {} cost {} (p|0 = {:.6}, p0 = {:.6})",
            r.argmax,
            schedule,
            display_rational(&r.argmax_cost),
            r.p_argmax_conditional,
            r.p0
        ),
    )?;
    if let Some(oracle) = &r.oracle {
        let verdict = if oracle.argmax_is_optimal {
            "agrees"
        } else {
            "disagrees"
        };
        say(
            out,
            format_args!(
                "brute force: cost {} ({verdict})",
                display_rational(&oracle.optimum.cost)
            ),
        )?;
    }
    say(out, format_args!("wrote {}", dir.display()))
}

fn report_validation(
    summary: &ValidationSummary,
    sim: &SimArgs,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let n = summary.outcomes.len();
    let joint = summary.outcomes.iter().filter(|o| o.joint_success).count();
    say(
        out,
        format_args!(
            "agreement: {}/{n} ({:.4}), joint {joint}/{n} ({:.4})",
            summary.successes(),
            summary.agreement_rate(),
            summary.joint_agreement_rate()
        ),
    )?;
    say(
        out,
        format_args!(
            "mean p0: {:.6}, mean P(optimum): {:.6}",
            summary.mean_p0(),
            summary.mean_p_optimum()
        ),
    )?;
    for f in summary.failures() {
        say(
            out,
            format_args!(
                "failure: instance {} (seed {}, stream {}), optimal cost {}",
                f.index,
                sim.seed,
                f.stream,
                display_rational(&f.optimal_cost)
            ),
        )?;
    }
    Ok(())
}

fn validation_json(
    summary: &ValidationSummary,
    sim: &SimArgs,
    m: usize,
    unique: bool,
    max_qubits: u32,
) -> Value {
    let outcomes: Vec<Value> = summary
        .outcomes
        .iter()
        .map(|o| {
            json!({
                "index": o.index,
                "stream": o.stream,
                "instance": InstanceFile::from_instance(format!("instance-{}", o.index), &o.instance),
                "optimal_cost": output::rational_json(&o.optimal_cost),
                "unique_optimum": o.unique_optimum,
                "success": o.success,
                "joint_success": o.joint_success,
                "p0": o.p0,
                "p_optimum": o.p_optimum,
            })
        })
        .collect();
    json!({
        "m": m,
        "count": summary.outcomes.len(),
        "unique_only": unique,
        "seed": sim.seed,
        "config": config_json(sim, max_qubits),
        "successes": summary.successes(),
        "agreement_rate": summary.agreement_rate(),
        "joint_agreement_rate": summary.joint_agreement_rate(),
        "mean_p0": summary.mean_p0(),
        "mean_p_optimum": summary.mean_p_optimum(),
        "failures": summary.failures().map(|o| o.index).collect::<Vec<_>>(),
        "outcomes": outcomes,
    })
}

/// Echo of the command-line settings in their command-line spelling.
fn config_json(sim: &SimArgs, max_qubits: u32) -> Value {
    let rounds = match sim.rounds {
        Rounds::Auto => "auto".to_string(),
        Rounds::Fixed(r) => r.to_string(),
    };
    let alpha = match sim.alpha {
        AlphaMode::MidpointRandom => "random".to_string(),
        AlphaMode::MidpointBestSecond => "best-second".to_string(),
        AlphaMode::Fixed(a) => a.to_string(),
    };
    let beta = match sim.beta {
        BetaMode::Auto => "auto".to_string(),
        BetaMode::Fixed(b) => b.to_string(),
    };
    let mode = match sim.mode {
        Mode::Exact => "exact".to_string(),
        Mode::Sampled { shots } => format!("shots:{shots}"),
    };
    json!({
        "rounds": rounds,
        "norm": format!("{:?}", sim.norm).to_lowercase(),
        "alpha": alpha,
        "beta": beta,
        "bounds": format!("{:?}", sim.bounds).to_lowercase(),
        "clamp": sim.clamp,
        "mode": mode,
        "seed": sim.seed,
        "retry_budget": sim.retry_budget,
        "control_qubits": sim.control_qubits,
        "saturation_guard": !sim.no_saturation_guard,
        "max_qubits": max_qubits,
    })
}
