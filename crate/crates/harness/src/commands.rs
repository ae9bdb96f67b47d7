//! Implementations behind the `cmwu` binary's subcommands.
//!
//! Horizons (and the two rate-table columns) execute on scoped threads over
//! the shared immutable game; every artifact path is distinct, and all
//! output is printed after joining, in horizon order, so runs are
//! reproducible down to the byte.

use std::fs;
use std::thread;

use anyhow::{Context, Result};
use cmwu_core::dynamics::{
    default_eta, run_dynamics, run_exact_cmwu, run_mwu_baseline, DynamicsOverrides, EtaChoice,
    ExactCmwuRound, Trajectory,
};
use cmwu_core::game::NormalFormGame;
use cmwu_core::learning::{ContractionCheck, FixedPointSettings};
use cmwu_core::metrics::{rate_summary, tuned_baseline_eta, RateDynamics};

use crate::battery::{run_battery, BatterySettings, PropertyStatus};
use crate::config::{DynamicsChoice, Format, GameStamp, RatesConfig, RunConfig};
use crate::export;

/// What a command wants the process to report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CommandOutcome {
    Clean,
    /// Diagnostics to print before exiting nonzero.
    Failed(Vec<String>),
}

struct HorizonOutput {
    lines: Vec<String>,
    /// Conditions that fail the run unless explicitly allowed.
    problems: Vec<String>,
}

fn fmt_agents(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:.6}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Writes one horizon's artifacts and assembles its summary lines.
fn run_one_horizon(
    game: &NormalFormGame,
    stamp: &GameStamp,
    config: &RunConfig,
    horizon: usize,
) -> Result<HorizonOutput> {
    let mut lines = Vec::new();
    let mut problems = Vec::new();

    let mut solver_rounds: Option<(Vec<ExactCmwuRound>, f64)> = None;
    let mut defaults_used = false;
    let trajectory: Trajectory = match config.dynamics {
        DynamicsChoice::Cmwu => {
            defaults_used = config.eta.is_none() && config.block_length.is_none();
            let overrides = DynamicsOverrides {
                eta: match config.eta {
                    Some(eta) => EtaChoice::Common(eta),
                    None => EtaChoice::Default,
                },
                block_length: config.block_length,
            };
            run_dynamics(game, horizon, &overrides)?
        }
        DynamicsChoice::Mwu => {
            let eta = config.eta.unwrap_or_else(|| tuned_baseline_eta(game, horizon));
            run_mwu_baseline(game, horizon, &vec![eta; game.num_players()])?
        }
        DynamicsChoice::ExactCmwu => {
            let eta = config.eta.unwrap_or_else(|| default_eta(game));
            let settings = FixedPointSettings {
                tolerance: config.tolerance.unwrap_or(FixedPointSettings::default().tolerance),
                contraction_check: if config.lenient_contraction {
                    ContractionCheck::Lenient
                } else {
                    ContractionCheck::Strict
                },
                ..FixedPointSettings::default()
            };
            let run = run_exact_cmwu(game, horizon, &vec![eta; game.num_players()], &settings)?;
            if !run.all_converged() {
                let stuck = run.rounds.iter().filter(|r| !r.converged).count();
                problems.push(format!(
                    "T={horizon}: fixed-point solver failed to converge on {stuck} of {horizon} \
                     rounds (worst residual {:e} vs tolerance {:e})",
                    run.max_residual(),
                    settings.tolerance
                ));
            }
            solver_rounds = Some((run.rounds, settings.tolerance));
            run.trajectory
        }
    };

    lines.push(format!(
        "[{} T={horizon}] block_length={} etas={}",
        trajectory.kind().label(),
        trajectory.block_length(),
        trajectory
            .etas()
            .iter()
            .map(|e| format!("{e}"))
            .collect::<Vec<_>>()
            .join(";")
    ));
    if let Some(warning) = trajectory.contraction_warning() {
        lines.push(format!(
            "  note: step size gives modulus {} >= 1; the run proceeds but its guarantees do not apply",
            warning.modulus
        ));
    }

    let tolerance = solver_rounds.as_ref().map(|(_, tol)| *tol);
    let regret = export::build_regret_artifact(game, &trajectory, defaults_used, tolerance)?;
    let cce = export::build_cce_artifact(game, &trajectory)?;

    let mut by_subsequence: Vec<(&str, Vec<f64>, Option<bool>)> = Vec::new();
    for row in &regret.rows {
        match by_subsequence.iter_mut().find(|(s, _, _)| *s == row.subsequence) {
            Some((_, values, holds)) => {
                values.push(row.regret);
                *holds = match (*holds, row.bound_holds) {
                    (None, h) | (h, None) => h,
                    (Some(a), Some(b)) => Some(a && b),
                };
            }
            None => by_subsequence.push((row.subsequence, vec![row.regret], row.bound_holds)),
        }
    }
    for (subsequence, values, holds) in &by_subsequence {
        let verdict = match holds {
            Some(true) => " (bound: pass)",
            Some(false) => " (BOUND FAIL)",
            None => "",
        };
        lines.push(format!("  regret[{subsequence}]: {}{verdict}", fmt_agents(values)));
    }
    for group in &cce.groups {
        lines.push(format!(
            "  cce gap[{}]: {:.6} over {} profiles",
            group.subsequence, group.overall_gap, group.profiles_averaged
        ));
    }
    if let Some((rounds, _)) = &solver_rounds {
        lines.push(format!(
            "  solver: max {} iterations, worst residual {:e}",
            rounds.iter().map(|r| r.iterations).max().unwrap_or(0),
            rounds.iter().map(|r| r.final_residual).fold(0.0, f64::max)
        ));
    }

    let dynamics = trajectory.kind().label();
    for &format in &config.formats {
        let mut artifacts: Vec<(String, String)> = vec![
            (
                export::artifact_file_name("trajectory", dynamics, horizon, format),
                match format {
                    Format::Csv => export::trajectory_csv(stamp, game, &trajectory),
                    Format::Json => export::trajectory_json(stamp, game, &trajectory),
                },
            ),
            (
                export::artifact_file_name("regret", dynamics, horizon, format),
                match format {
                    Format::Csv => export::regret_csv(stamp, &trajectory, &regret),
                    Format::Json => export::regret_json(stamp, &trajectory, &regret),
                },
            ),
            (
                export::artifact_file_name("cce", dynamics, horizon, format),
                match format {
                    Format::Csv => export::cce_csv(stamp, &trajectory, &cce),
                    Format::Json => export::cce_json(stamp, &trajectory, &cce),
                },
            ),
        ];
        if let Some((rounds, tol)) = &solver_rounds {
            artifacts.push((
                export::artifact_file_name("solver", dynamics, horizon, format),
                match format {
                    Format::Csv => export::solver_csv(stamp, &trajectory, rounds, *tol),
                    Format::Json => export::solver_json(stamp, &trajectory, rounds, *tol),
                },
            ));
        }
        for (name, content) in artifacts {
            let path = config.out_dir.join(&name);
            fs::write(&path, content)
                .with_context(|| format!("cannot write artifact {}", path.display()))?;
            lines.push(format!("  wrote {}", path.display()));
        }
    }

    Ok(HorizonOutput { lines, problems })
}

/// Runs the configured dynamics at every horizon and exports artifacts.
pub fn cmd_run(config: &RunConfig) -> Result<CommandOutcome> {
    let (game, stamp) = config.source.instantiate(config.seed)?;
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("cannot create output directory {}", config.out_dir.display()))?;

    let (game_ref, stamp_ref) = (&game, &stamp);
    let results: Vec<Result<HorizonOutput>> = thread::scope(|scope| {
        let handles: Vec<_> = config
            .horizons
            .iter()
            .map(|&horizon| {
                scope.spawn(move || run_one_horizon(game_ref, stamp_ref, config, horizon))
            })
            .collect();
        handles
            .into_iter()
            .map(|handle| match handle.join() {
                Ok(result) => result,
                Err(panic) => std::panic::resume_unwind(panic),
            })
            .collect()
    });

    let mut problems = Vec::new();
    for result in results {
        let output = result?;
        for line in &output.lines {
            println!("{line}");
        }
        problems.extend(output.problems);
    }
    if problems.is_empty() {
        return Ok(CommandOutcome::Clean);
    }
    if config.allow_nonconverged {
        for problem in &problems {
            println!("warning: {problem} (continuing: --allow-nonconverged)");
        }
        return Ok(CommandOutcome::Clean);
    }
    Ok(CommandOutcome::Failed(problems))
}

/// Emits the gap-versus-horizon table for both dynamics.
pub fn cmd_rates(config: &RatesConfig) -> Result<CommandOutcome> {
    let (game, stamp) = config.source.instantiate(config.seed)?;
    fs::create_dir_all(&config.out_dir)
        .with_context(|| format!("cannot create output directory {}", config.out_dir.display()))?;

    let (cmwu, mwu) = thread::scope(|scope| {
        let cmwu = scope.spawn(|| rate_summary(&game, &config.horizons, RateDynamics::Cmwu));
        let mwu = scope.spawn(|| rate_summary(&game, &config.horizons, RateDynamics::MwuBaseline));
        let cmwu = match cmwu.join() {
            Ok(result) => result,
            Err(panic) => std::panic::resume_unwind(panic),
        };
        let mwu = match mwu.join() {
            Ok(result) => result,
            Err(panic) => std::panic::resume_unwind(panic),
        };
        (cmwu, mwu)
    });
    let (cmwu, mwu) = (cmwu?, mwu?);

    println!("[rates] game={}", stamp.spec);
    println!(
        "{:>8}  {:>13}  {:>13}  {:>13}  {:>13}",
        "horizon", "cmwu_gap", "gap*T/log2T", "mwu_gap", "gap*sqrtT"
    );
    for (c, m) in cmwu.iter().zip(&mwu) {
        println!(
            "{:>8}  {:>13.6e}  {:>13.6e}  {:>13.6e}  {:>13.6e}",
            c.horizon, c.gap, c.normalized_ratio, m.gap, m.normalized_ratio
        );
    }

    let mut written = Vec::new();
    for &format in &config.formats {
        let name = format!("rates.{}", format.extension());
        let content = match format {
            Format::Csv => export::rates_csv(&stamp, &cmwu, &mwu),
            Format::Json => export::rates_json(&stamp, &cmwu, &mwu),
        };
        let path = config.out_dir.join(name);
        fs::write(&path, content)
            .with_context(|| format!("cannot write artifact {}", path.display()))?;
        written.push(path);
    }
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(CommandOutcome::Clean)
}

/// Runs the property battery and prints one verdict line per property.
pub fn cmd_verify(settings: &BatterySettings) -> Result<CommandOutcome> {
    println!(
        "[verify] seed={} eta={} tolerance={:e}{}",
        settings.seed,
        settings
            .eta_override
            .map(|e| e.to_string())
            .unwrap_or_else(|| String::from("default")),
        settings.tolerance,
        if settings.lenient { " (lenient)" } else { "" }
    );
    let reports = run_battery(settings);
    let mut failures = Vec::new();
    for report in &reports {
        let margin = if report.worst_margin.is_nan() {
            String::from("-")
        } else {
            format!("{:+.3e}", report.worst_margin)
        };
        println!(
            "{:<34} {:>5} cases  {:<14} worst margin {margin}",
            report.name,
            report.cases,
            report.status.label()
        );
        if !report.detail.is_empty() {
            println!("    {}", report.detail);
        }
        if report.status == PropertyStatus::Fail {
            failures.push(format!(
                "property {} failed (seed {}): {}",
                report.name, settings.seed, report.detail
            ));
        }
    }
    let passed = reports.iter().filter(|r| r.status == PropertyStatus::Pass).count();
    let skipped = reports.len() - passed - failures.len();
    if skipped > 0 {
        println!("{passed} passed, {skipped} not applicable, {} failed", failures.len());
    } else {
        println!("{passed} of {} properties passed", reports.len());
    }
    if failures.is_empty() {
        Ok(CommandOutcome::Clean)
    } else {
        Ok(CommandOutcome::Failed(failures))
    }
}

/// Output-free variant for tests: runs the battery and reports failures.
pub fn battery_failures(settings: &BatterySettings) -> Vec<String> {
    run_battery(settings)
        .iter()
        .filter(|r| r.status == PropertyStatus::Fail)
        .map(|r| format!("{}: {}", r.name, r.detail))
        .collect()
}
