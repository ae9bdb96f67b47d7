//! Deterministic artifact writers.
//!
//! Every artifact opens with a versioned format tag: CSV files carry it as a
//! leading `#` comment followed by one `# key=value ...` metadata line, JSON
//! documents carry it in a `format` field. Values are written in shortest
//! round-trip form and nothing depends on time or environment, so identical
//! configurations produce byte-identical files.

use std::fmt::Write as _;

use cmwu_core::dynamics::{DynamicsKind, ExactCmwuRound, Trajectory};
use cmwu_core::game::NormalFormGame;
use cmwu_core::metrics::{
    anchor_cce_gap, anchor_regret_bound, cce_gap, mwu_regret_bound, regret_report,
    z_sequence_regret, RateRow, Subsequence,
};
use cmwu_core::{Result as CoreResult, StrategyProfile};
use serde::Serialize;

use crate::config::{Format, GameStamp};

pub const TRAJECTORY_FORMAT: &str = "cmwu-trajectory/1";
pub const REGRET_FORMAT: &str = "cmwu-regret/1";
pub const CCE_FORMAT: &str = "cmwu-cce/1";
pub const SOLVER_FORMAT: &str = "cmwu-solver/1";
pub const RATES_FORMAT: &str = "cmwu-rates/1";

/// `<artifact>-<dynamics>-T<horizon>.<ext>`, distinct per horizon so
/// concurrent runs never share a path.
pub fn artifact_file_name(artifact: &str, dynamics: &str, horizon: usize, format: Format) -> String {
    format!("{artifact}-{dynamics}-T{horizon}.{}", format.extension())
}

fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

fn join_etas(etas: &[f64]) -> String {
    etas.iter().map(|&e| fmt_f64(e)).collect::<Vec<_>>().join(";")
}

/// One `# key=value ...` line; keys are emitted in the given order.
fn meta_line(entries: &[(&str, String)]) -> String {
    let mut line = String::from("#");
    for (key, value) in entries {
        line.push(' ');
        line.push_str(key);
        line.push('=');
        line.push_str(value);
    }
    line.push('\n');
    line
}

fn run_meta(stamp: &GameStamp, trajectory: &Trajectory) -> Vec<(&'static str, String)> {
    let mut entries = vec![
        ("dynamics", trajectory.kind().label().to_string()),
        ("game", stamp.spec.clone()),
    ];
    if let Some(seed) = stamp.seed {
        entries.push(("seed", seed.to_string()));
    }
    entries.push(("horizon", trajectory.horizon().to_string()));
    entries.push(("block_length", trajectory.block_length().to_string()));
    entries.push(("etas", join_etas(trajectory.etas())));
    entries
}

fn json_string<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("artifact document serializes");
    text.push('\n');
    text
}

/// Column header cells `x<player>_<action>` for one profile's probabilities.
fn prob_columns(game: &NormalFormGame) -> String {
    let mut cells = Vec::new();
    for player in 0..game.num_players() {
        for action in 0..game.num_actions(player) {
            cells.push(format!("x{player}_{action}"));
        }
    }
    cells.join(",")
}

fn push_probs(line: &mut String, profile: &StrategyProfile) {
    for strategy in profile.strategies() {
        for &p in strategy.probs() {
            line.push(',');
            line.push_str(&fmt_f64(p));
        }
    }
}

/// Trajectory export: every broadcast profile (`row=x`), and for the block
/// protocol the per-anchor `z` snapshots (`row=z`) with their block
/// residuals. The residual cell is empty for block 0, which has no
/// preceding block to contract over.
pub fn trajectory_csv(stamp: &GameStamp, game: &NormalFormGame, trajectory: &Trajectory) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(TRAJECTORY_FORMAT);
    out.push('\n');
    let mut meta = run_meta(stamp, trajectory);
    if let Some(warning) = trajectory.contraction_warning() {
        meta.push(("contraction_warning_modulus", fmt_f64(warning.modulus)));
    }
    out.push_str(&meta_line(&meta));
    let _ = writeln!(out, "row,round,block,is_anchor,block_residual,{}", prob_columns(game));
    let k = trajectory.block_length();
    for (t, profile) in trajectory.profiles().iter().enumerate() {
        let anchor = if trajectory.is_anchor(t) { 1 } else { 0 };
        // Trailing comma: the block_residual cell is empty on broadcast rows.
        let mut line = format!("x,{t},{},{anchor},", t / k);
        push_probs(&mut line, profile);
        out.push_str(&line);
        out.push('\n');
    }
    for (tau, z) in trajectory.z_snapshots().iter().enumerate() {
        let residual = if tau == 0 {
            String::new()
        } else {
            fmt_f64(trajectory.block_residuals()[tau - 1])
        };
        let mut line = format!("z,{},{tau},1,{residual}", tau * k);
        push_probs(&mut line, z);
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct TrajectoryDoc<'a> {
    format: &'static str,
    dynamics: &'static str,
    game: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    horizon: usize,
    block_length: usize,
    etas: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    contraction_warning_modulus: Option<f64>,
    anchor_rounds: Vec<usize>,
    profiles: &'a [StrategyProfile],
    z_snapshots: &'a [StrategyProfile],
    block_residuals: &'a [f64],
}

pub fn trajectory_json(stamp: &GameStamp, _game: &NormalFormGame, trajectory: &Trajectory) -> String {
    json_string(&TrajectoryDoc {
        format: TRAJECTORY_FORMAT,
        dynamics: trajectory.kind().label(),
        game: &stamp.spec,
        seed: stamp.seed,
        horizon: trajectory.horizon(),
        block_length: trajectory.block_length(),
        etas: trajectory.etas(),
        contraction_warning_modulus: trajectory.contraction_warning().map(|w| w.modulus),
        anchor_rounds: trajectory.anchor_rounds().collect(),
        profiles: trajectory.profiles(),
        z_snapshots: trajectory.z_snapshots(),
        block_residuals: trajectory.block_residuals(),
    })
}

/// One regret line: a player's regret over one subsequence, with the
/// applicable guarantee when the run's parameters carry one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretRow {
    pub subsequence: &'static str,
    pub agent: usize,
    pub regret: f64,
    pub best_response_action: usize,
    pub bound: Option<f64>,
    pub bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretArtifact {
    pub dynamics: &'static str,
    pub rows: Vec<RegretRow>,
}

/// Computes the regret rows for a run.
///
/// Guarantees attached:
/// - block protocol at default step size and block length: anchor rows carry
///   the `12·n·V·ln m` bound and z rows the `ln m/η` lookahead bound;
/// - exact clairvoyant runs: full rows carry `ln m/η` plus a solver-error
///   allowance of `10·T·V·tolerance`;
/// - the explicit baseline has no horizon-free guarantee, so its rows carry
///   no bound.
pub fn build_regret_artifact(
    game: &NormalFormGame,
    trajectory: &Trajectory,
    defaults_used: bool,
    tolerance: Option<f64>,
) -> CoreResult<RegretArtifact> {
    let mut rows = Vec::new();
    let etas = trajectory.etas();
    let full = regret_report(game, trajectory, Subsequence::Full)?;
    for agent in 0..game.num_players() {
        let (bound, bound_holds) = if trajectory.kind() == DynamicsKind::ExactCmwu {
            let bound = mwu_regret_bound(game.num_actions(agent), etas[agent]);
            let slack = 10.0
                * trajectory.horizon() as f64
                * game.payoff_ceiling()
                * tolerance.unwrap_or(0.0);
            (Some(bound), Some(full.per_agent_regret[agent] <= bound + slack))
        } else {
            (None, None)
        };
        rows.push(RegretRow {
            subsequence: Subsequence::Full.label(),
            agent,
            regret: full.per_agent_regret[agent],
            best_response_action: full.best_response_action[agent],
            bound,
            bound_holds,
        });
    }
    if trajectory.kind() == DynamicsKind::Cmwu {
        let anchors = regret_report(game, trajectory, Subsequence::AnchorsOnly)?;
        let anchor_bound = defaults_used.then(|| anchor_regret_bound(game));
        for agent in 0..game.num_players() {
            rows.push(RegretRow {
                subsequence: Subsequence::AnchorsOnly.label(),
                agent,
                regret: anchors.per_agent_regret[agent],
                best_response_action: anchors.best_response_action[agent],
                bound: anchor_bound,
                bound_holds: anchor_bound
                    .map(|b| anchors.per_agent_regret[agent] <= b + 1e-9),
            });
        }
        for agent in 0..game.num_players() {
            let entry = z_sequence_regret(game, trajectory, agent)?;
            let bound = mwu_regret_bound(game.num_actions(agent), etas[agent]);
            rows.push(RegretRow {
                subsequence: "z-anchors",
                agent,
                regret: entry.regret,
                best_response_action: entry.best_response_action,
                bound: Some(bound),
                bound_holds: Some(entry.regret <= bound + 1e-9),
            });
        }
    }
    Ok(RegretArtifact {
        dynamics: trajectory.kind().label(),
        rows,
    })
}

pub fn regret_csv(stamp: &GameStamp, trajectory: &Trajectory, artifact: &RegretArtifact) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(REGRET_FORMAT);
    out.push('\n');
    out.push_str(&meta_line(&run_meta(stamp, trajectory)));
    out.push_str("subsequence,agent,regret,best_response_action,bound,bound_holds\n");
    for row in &artifact.rows {
        let bound = row.bound.map(fmt_f64).unwrap_or_default();
        let holds = match row.bound_holds {
            Some(true) => "pass",
            Some(false) => "fail",
            None => "",
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{bound},{holds}",
            row.subsequence,
            row.agent,
            fmt_f64(row.regret),
            row.best_response_action
        );
    }
    out
}

#[derive(Serialize)]
struct RegretDoc<'a> {
    format: &'static str,
    dynamics: &'static str,
    game: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    horizon: usize,
    block_length: usize,
    etas: &'a [f64],
    rows: &'a [RegretRow],
}

pub fn regret_json(stamp: &GameStamp, trajectory: &Trajectory, artifact: &RegretArtifact) -> String {
    json_string(&RegretDoc {
        format: REGRET_FORMAT,
        dynamics: artifact.dynamics,
        game: &stamp.spec,
        seed: stamp.seed,
        horizon: trajectory.horizon(),
        block_length: trajectory.block_length(),
        etas: trajectory.etas(),
        rows: &artifact.rows,
    })
}

/// Equilibrium gap of one averaged subsequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CceGroup {
    pub subsequence: &'static str,
    pub per_agent_gap: Vec<f64>,
    pub overall_gap: f64,
    pub profiles_averaged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CceArtifact {
    pub dynamics: &'static str,
    pub groups: Vec<CceGroup>,
}

/// Gap of the full uniform average, plus the anchor average for the block
/// protocol (the subsequence its guarantee speaks about).
pub fn build_cce_artifact(game: &NormalFormGame, trajectory: &Trajectory) -> CoreResult<CceArtifact> {
    let mut groups = Vec::new();
    let full = cce_gap(game, trajectory.profiles(), None)?;
    groups.push(CceGroup {
        subsequence: Subsequence::Full.label(),
        per_agent_gap: full.per_agent_gap,
        overall_gap: full.overall_gap,
        profiles_averaged: full.num_profiles_averaged,
    });
    if trajectory.kind() == DynamicsKind::Cmwu {
        let anchors = anchor_cce_gap(game, trajectory)?;
        groups.push(CceGroup {
            subsequence: Subsequence::AnchorsOnly.label(),
            per_agent_gap: anchors.per_agent_gap,
            overall_gap: anchors.overall_gap,
            profiles_averaged: anchors.num_profiles_averaged,
        });
    }
    Ok(CceArtifact {
        dynamics: trajectory.kind().label(),
        groups,
    })
}

pub fn cce_csv(stamp: &GameStamp, trajectory: &Trajectory, artifact: &CceArtifact) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(CCE_FORMAT);
    out.push('\n');
    out.push_str(&meta_line(&run_meta(stamp, trajectory)));
    out.push_str("subsequence,agent,gap,profiles_averaged\n");
    for group in &artifact.groups {
        for (agent, &gap) in group.per_agent_gap.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{agent},{},{}",
                group.subsequence,
                fmt_f64(gap),
                group.profiles_averaged
            );
        }
        let _ = writeln!(
            out,
            "{},overall,{},{}",
            group.subsequence,
            fmt_f64(group.overall_gap),
            group.profiles_averaged
        );
    }
    out
}

#[derive(Serialize)]
struct CceDoc<'a> {
    format: &'static str,
    dynamics: &'static str,
    game: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    horizon: usize,
    block_length: usize,
    groups: &'a [CceGroup],
}

pub fn cce_json(stamp: &GameStamp, trajectory: &Trajectory, artifact: &CceArtifact) -> String {
    json_string(&CceDoc {
        format: CCE_FORMAT,
        dynamics: artifact.dynamics,
        game: &stamp.spec,
        seed: stamp.seed,
        horizon: trajectory.horizon(),
        block_length: trajectory.block_length(),
        groups: &artifact.groups,
    })
}

pub fn solver_csv(
    stamp: &GameStamp,
    trajectory: &Trajectory,
    rounds: &[ExactCmwuRound],
    tolerance: f64,
) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(SOLVER_FORMAT);
    out.push('\n');
    let mut meta = run_meta(stamp, trajectory);
    meta.push(("tolerance", fmt_f64(tolerance)));
    out.push_str(&meta_line(&meta));
    out.push_str("round,iterations,final_residual,converged\n");
    for (t, round) in rounds.iter().enumerate() {
        let _ = writeln!(
            out,
            "{t},{},{},{}",
            round.iterations,
            fmt_f64(round.final_residual),
            u8::from(round.converged)
        );
    }
    out
}

#[derive(Serialize)]
struct SolverRoundDoc {
    round: usize,
    iterations: usize,
    final_residual: f64,
    converged: bool,
}

#[derive(Serialize)]
struct SolverDoc<'a> {
    format: &'static str,
    dynamics: &'static str,
    game: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    horizon: usize,
    etas: &'a [f64],
    tolerance: f64,
    all_converged: bool,
    max_iterations: usize,
    max_residual: f64,
    rounds: Vec<SolverRoundDoc>,
}

pub fn solver_json(
    stamp: &GameStamp,
    trajectory: &Trajectory,
    rounds: &[ExactCmwuRound],
    tolerance: f64,
) -> String {
    json_string(&SolverDoc {
        format: SOLVER_FORMAT,
        dynamics: trajectory.kind().label(),
        game: &stamp.spec,
        seed: stamp.seed,
        horizon: trajectory.horizon(),
        etas: trajectory.etas(),
        tolerance,
        all_converged: rounds.iter().all(|r| r.converged),
        max_iterations: rounds.iter().map(|r| r.iterations).max().unwrap_or(0),
        max_residual: rounds.iter().map(|r| r.final_residual).fold(0.0, f64::max),
        rounds: rounds
            .iter()
            .enumerate()
            .map(|(round, r)| SolverRoundDoc {
                round,
                iterations: r.iterations,
                final_residual: r.final_residual,
                converged: r.converged,
            })
            .collect(),
    })
}

/// Joins the per-dynamics rate tables; both must cover the same horizons.
pub fn rates_csv(stamp: &GameStamp, cmwu: &[RateRow], mwu: &[RateRow]) -> String {
    assert_eq!(cmwu.len(), mwu.len(), "rate tables must cover the same horizons");
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(RATES_FORMAT);
    out.push('\n');
    let mut meta = vec![("game", stamp.spec.clone())];
    if let Some(seed) = stamp.seed {
        meta.push(("seed", seed.to_string()));
    }
    out.push_str(&meta_line(&meta));
    out.push_str("horizon,cmwu_gap,cmwu_normalized_ratio,mwu_gap,mwu_normalized_ratio\n");
    for (c, m) in cmwu.iter().zip(mwu) {
        assert_eq!(c.horizon, m.horizon, "rate tables must cover the same horizons");
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            c.horizon,
            fmt_f64(c.gap),
            fmt_f64(c.normalized_ratio),
            fmt_f64(m.gap),
            fmt_f64(m.normalized_ratio)
        );
    }
    out
}

#[derive(Serialize)]
struct RatesRowDoc {
    horizon: usize,
    cmwu_gap: f64,
    cmwu_normalized_ratio: f64,
    mwu_gap: f64,
    mwu_normalized_ratio: f64,
}

#[derive(Serialize)]
struct RatesDoc<'a> {
    format: &'static str,
    game: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    rows: Vec<RatesRowDoc>,
}

pub fn rates_json(stamp: &GameStamp, cmwu: &[RateRow], mwu: &[RateRow]) -> String {
    assert_eq!(cmwu.len(), mwu.len(), "rate tables must cover the same horizons");
    json_string(&RatesDoc {
        format: RATES_FORMAT,
        game: &stamp.spec,
        seed: stamp.seed,
        rows: cmwu
            .iter()
            .zip(mwu)
            .map(|(c, m)| {
                assert_eq!(c.horizon, m.horizon, "rate tables must cover the same horizons");
                RatesRowDoc {
                    horizon: c.horizon,
                    cmwu_gap: c.gap,
                    cmwu_normalized_ratio: c.normalized_ratio,
                    mwu_gap: m.gap,
                    mwu_normalized_ratio: m.normalized_ratio,
                }
            })
            .collect(),
    })
}
