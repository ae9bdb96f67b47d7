//! External regret, coarse-correlated-equilibrium gaps, and rate summaries.
//!
//! Regret of a played sequence is measured against the best fixed action in
//! hindsight:
//!
//! ```text
//! R_i = max_s Σ_t v_{i,s}(x⁻ⁱᵗ) − Σ_t ⟨v_i(x⁻ⁱᵗ), xᵢᵗ⟩
//! ```
//!
//! The CCE gap of a weighted average of profiles is each player's best gain
//! from a unilateral pure deviation. With uniform weights the two notions
//! coincide: the gap of the averaged trajectory equals regret divided by the
//! number of rounds, player by player. That identity is what turns the
//! protocol's regret guarantees into convergence of averaged play, and the
//! test suite checks it numerically rather than assuming it.
//!
//! Bounds provided here for reports: the anchored z sequence (and exact
//! clairvoyant play) guarantees `ln(m)/η` regret regardless of horizon, and
//! the anchor subsequence of the uncoupled protocol guarantees `12·n·V·ln(m)`
//! at the default step size.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::dynamics::{run_dynamics, run_mwu_baseline, DynamicsOverrides, Trajectory};
use crate::error::{Error, Result};
use crate::game::{MixedStrategy, NormalFormGame, PayoffVector, StrategyProfile};

/// Which rounds of a trajectory a report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsequence {
    Full,
    AnchorsOnly,
}

impl Subsequence {
    pub fn label(&self) -> &'static str {
        match self {
            Subsequence::Full => "full",
            Subsequence::AnchorsOnly => "anchors",
        }
    }
}

/// One player's regret and the pure action achieving it (ties resolve to the
/// lowest action index).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegretEntry {
    pub regret: f64,
    pub best_response_action: usize,
}

/// Per-player regret over a chosen subsequence of a trajectory.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RegretReport {
    pub per_agent_regret: Vec<f64>,
    pub best_response_action: Vec<usize>,
    /// Number of rounds the report covers.
    pub horizon_used: usize,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub subsequence: Subsequence,
}

/// Per-player CCE gap of a weighted profile average. Gaps within `1e-10`
/// below zero are reported as zero; anything more negative passes through.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CceGapReport {
    pub per_agent_gap: Vec<f64>,
    pub overall_gap: f64,
    pub num_profiles_averaged: usize,
}

/// Regret of an explicit play sequence against an explicit payoff history.
/// Round `t` pairs `payoff_history[t]` with `plays[t]`.
pub fn sequence_regret(
    payoff_history: &[PayoffVector],
    plays: &[MixedStrategy],
) -> Result<RegretEntry> {
    if payoff_history.len() != plays.len() {
        return Err(Error::Shape {
            context: "sequence_regret round count",
            expected: payoff_history.len(),
            found: plays.len(),
        });
    }
    if payoff_history.is_empty() {
        return Err(Error::Domain(String::from(
            "regret needs at least one round",
        )));
    }
    let num_actions = payoff_history[0].len();
    let mut cumulative = vec![0.0_f64; num_actions];
    let mut realized = 0.0_f64;
    for (payoffs, play) in payoff_history.iter().zip(plays) {
        if payoffs.len() != num_actions {
            return Err(Error::Shape {
                context: "sequence_regret payoff length",
                expected: num_actions,
                found: payoffs.len(),
            });
        }
        for (c, &v) in cumulative.iter_mut().zip(payoffs.values()) {
            *c += v;
        }
        realized += payoffs.expected_payoff(play)?;
    }
    let (best_response_action, best_total) = argmax(&cumulative);
    Ok(RegretEntry {
        regret: best_total - realized,
        best_response_action,
    })
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut best = 0;
    for (s, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = s;
        }
    }
    (best, values[best])
}

fn regret_over<'a, I>(game: &NormalFormGame, rounds: I, player: usize) -> Result<RegretEntry>
where
    I: Iterator<Item = &'a StrategyProfile>,
{
    let mut payoffs = Vec::new();
    let mut plays = Vec::new();
    for profile in rounds {
        payoffs.push(game.payoff_vector(player, profile)?);
        plays.push(profile.player(player).clone());
    }
    sequence_regret(&payoffs, &plays)
}

/// Player `player`'s regret over a full profile sequence.
pub fn regret(
    game: &NormalFormGame,
    profiles: &[StrategyProfile],
    player: usize,
) -> Result<RegretEntry> {
    regret_over(game, profiles.iter(), player)
}

/// Player `player`'s regret over the anchor rounds of a trajectory. For
/// baseline and exact runs every round is an anchor, so this coincides with
/// full-sequence regret.
pub fn anchor_regret(
    game: &NormalFormGame,
    trajectory: &Trajectory,
    player: usize,
) -> Result<RegretEntry> {
    regret_over(
        game,
        trajectory.anchor_rounds().map(|t| trajectory.profile(t)),
        player,
    )
}

/// Regret of the anchored `z` sequence: `z^{kτ}` is charged with the payoff
/// vector of the *broadcast* profile `x^{kτ}` of the same anchor round. By
/// construction `z^{kτ}` already folds that round's payoffs into its
/// exponent, which is why this sequence has a horizon-free guarantee.
pub fn z_sequence_regret(
    game: &NormalFormGame,
    trajectory: &Trajectory,
    player: usize,
) -> Result<RegretEntry> {
    if trajectory.z_snapshots().is_empty() {
        return Err(Error::Protocol(String::from(
            "trajectory carries no anchored z sequence",
        )));
    }
    let mut payoffs = Vec::new();
    let mut plays = Vec::new();
    for (tau, t) in trajectory.anchor_rounds().enumerate() {
        payoffs.push(game.payoff_vector(player, trajectory.profile(t))?);
        plays.push(trajectory.z_snapshots()[tau].player(player).clone());
    }
    sequence_regret(&payoffs, &plays)
}

/// Per-player regret report over the chosen subsequence of a trajectory.
pub fn regret_report(
    game: &NormalFormGame,
    trajectory: &Trajectory,
    subsequence: Subsequence,
) -> Result<RegretReport> {
    let horizon_used = match subsequence {
        Subsequence::Full => trajectory.horizon(),
        Subsequence::AnchorsOnly => trajectory.anchor_count(),
    };
    let mut per_agent_regret = Vec::with_capacity(game.num_players());
    let mut best_response_action = Vec::with_capacity(game.num_players());
    for player in 0..game.num_players() {
        let entry = match subsequence {
            Subsequence::Full => regret(game, trajectory.profiles(), player)?,
            Subsequence::AnchorsOnly => anchor_regret(game, trajectory, player)?,
        };
        per_agent_regret.push(entry.regret);
        best_response_action.push(entry.best_response_action);
    }
    Ok(RegretReport {
        per_agent_regret,
        best_response_action,
        horizon_used,
        subsequence,
    })
}

pub(crate) fn clip_tiny_negative(gap: f64) -> f64 {
    if gap < 0.0 && gap > -1e-10 {
        0.0
    } else {
        gap
    }
}

fn cce_gap_over<'a, I>(
    game: &NormalFormGame,
    rounds: I,
    weights: Option<&[f64]>,
) -> Result<CceGapReport>
where
    I: ExactSizeIterator<Item = &'a StrategyProfile>,
{
    let num_rounds = rounds.len();
    if num_rounds == 0 {
        return Err(Error::Domain(String::from(
            "CCE gap needs at least one profile",
        )));
    }
    let weights = match weights {
        Some(w) => {
            if w.len() != num_rounds {
                return Err(Error::Shape {
                    context: "cce_gap weight count",
                    expected: num_rounds,
                    found: w.len(),
                });
            }
            let mut total = 0.0;
            for &wt in w {
                if !wt.is_finite() || wt < 0.0 {
                    return Err(Error::Domain(format!(
                        "weights must be finite and nonnegative, got {wt}"
                    )));
                }
                total += wt;
            }
            if (total - 1.0).abs() > 1e-9 {
                return Err(Error::Domain(format!(
                    "weights sum to {total}; must be 1 within 1e-9"
                )));
            }
            Some(w)
        }
        None => None,
    };
    let uniform = 1.0 / num_rounds as f64;
    let n = game.num_players();
    let mut deviation: Vec<Vec<f64>> = (0..n).map(|i| vec![0.0; game.num_actions(i)]).collect();
    let mut realized = vec![0.0_f64; n];
    for (t, profile) in rounds.enumerate() {
        let w = weights.map_or(uniform, |w| w[t]);
        for i in 0..n {
            let v = game.payoff_vector(i, profile)?;
            for (acc, &value) in deviation[i].iter_mut().zip(v.values()) {
                *acc += w * value;
            }
            realized[i] += w * v.expected_payoff(profile.player(i))?;
        }
    }
    let per_agent_gap: Vec<f64> = deviation
        .iter()
        .zip(&realized)
        .map(|(dev, &got)| clip_tiny_negative(argmax(dev).1 - got))
        .collect();
    let overall_gap = per_agent_gap.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    Ok(CceGapReport {
        per_agent_gap,
        overall_gap,
        num_profiles_averaged: num_rounds,
    })
}

/// CCE gap of the weighted average of `profiles`. `None` means uniform
/// weights; explicit weights must be nonnegative and sum to 1 within `1e-9`.
pub fn cce_gap(
    game: &NormalFormGame,
    profiles: &[StrategyProfile],
    weights: Option<&[f64]>,
) -> Result<CceGapReport> {
    cce_gap_over(game, profiles.iter(), weights)
}

/// CCE gap of the uniform average over a trajectory's anchor profiles,
/// normalized by the anchor count.
pub fn anchor_cce_gap(game: &NormalFormGame, trajectory: &Trajectory) -> Result<CceGapReport> {
    let anchors = trajectory.anchor_profiles();
    cce_gap_over(game, anchors.into_iter(), None)
}

/// `ln(m)/η`: the horizon-free regret guarantee of an MWU sequence that folds
/// its own round's payoffs into the exponent (the anchored z sequence, and
/// exact clairvoyant play). Zero step size has no finite guarantee.
pub fn mwu_regret_bound(num_actions: usize, eta: f64) -> f64 {
    if eta > 0.0 {
        libm::log(num_actions as f64) / eta
    } else {
        f64::INFINITY
    }
}

/// `12·n·V·ln(m)`: the horizon-free guarantee for the uncoupled protocol's
/// anchor subsequence at the default step size `1/(2nV)` and block length
/// `⌈log₂ T⌉`.
pub fn anchor_regret_bound(game: &NormalFormGame) -> f64 {
    12.0 * game.num_players() as f64
        * game.payoff_ceiling()
        * libm::log(game.max_actions() as f64)
}

/// Which dynamics a rate summary should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateDynamics {
    /// Uncoupled protocol at default parameters; gap of the anchor average,
    /// normalized by `T/log₂(T)`.
    Cmwu,
    /// Classic MWU with the horizon-tuned step size `√(ln m / T)/V`; gap of
    /// the full uniform average, normalized by `√T`.
    MwuBaseline,
}

/// One horizon's entry of a rate summary.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct RateRow {
    pub horizon: usize,
    /// Overall CCE gap of the averaged play at this horizon.
    pub gap: f64,
    /// `gap·T/log₂T` for the uncoupled protocol, `gap·√T` for the baseline.
    /// A rate of `log T / T` (resp. `1/√T`) shows up as a bounded column.
    pub normalized_ratio: f64,
}

/// Runs the chosen dynamics at each horizon and reports gap and normalized
/// ratio per horizon. Horizons must be strictly increasing and at least 2.
pub fn rate_summary(
    game: &NormalFormGame,
    horizons: &[usize],
    dynamics: RateDynamics,
) -> Result<Vec<RateRow>> {
    if horizons.is_empty() {
        return Err(Error::Domain(String::from(
            "rate summary needs at least one horizon",
        )));
    }
    let mut previous = 1;
    for &t in horizons {
        if t < 2 {
            return Err(Error::Domain(format!(
                "rate summary horizons must be at least 2, got {t}"
            )));
        }
        if t <= previous {
            return Err(Error::Domain(String::from(
                "rate summary horizons must be strictly increasing",
            )));
        }
        previous = t;
    }
    let mut rows = Vec::with_capacity(horizons.len());
    for &horizon in horizons {
        let (gap, normalized_ratio) = match dynamics {
            RateDynamics::Cmwu => {
                let trajectory = run_dynamics(game, horizon, &DynamicsOverrides::default())?;
                let gap = anchor_cce_gap(game, &trajectory)?.overall_gap;
                (gap, gap * horizon as f64 / libm::log2(horizon as f64))
            }
            RateDynamics::MwuBaseline => {
                let eta = tuned_baseline_eta(game, horizon);
                let etas = vec![eta; game.num_players()];
                let trajectory = run_mwu_baseline(game, horizon, &etas)?;
                let gap = cce_gap(game, trajectory.profiles(), None)?.overall_gap;
                (gap, gap * libm::sqrt(horizon as f64))
            }
        };
        rows.push(RateRow {
            horizon,
            gap,
            normalized_ratio,
        });
    }
    Ok(rows)
}

/// The classic horizon-tuned MWU step size `√(ln m / T)/V`, which yields the
/// `O(V·√(T·ln m))` regret guarantee the `√T` normalization is measured
/// against. Degenerate games (`V = 0` or one action) get 0, where MWU is the
/// identity anyway.
pub fn tuned_baseline_eta(game: &NormalFormGame, horizon: usize) -> f64 {
    let v = game.payoff_ceiling();
    let m = game.max_actions();
    if v <= 0.0 || m < 2 || horizon == 0 {
        return 0.0;
    }
    libm::sqrt(libm::log(m as f64) / horizon as f64) / v
}
