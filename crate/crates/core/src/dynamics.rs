//! Round-synchronous dynamics.
//!
//! Three trajectory producers share one protocol: in every round each player
//! broadcasts a mixed strategy, a mediator evaluates everyone's payoff vector
//! at the joint broadcast profile, and each player receives *only their own*
//! vector. The producers differ in how the broadcast is chosen:
//!
//! * [`run_dynamics`]: the uncoupled block protocol. Time is split into
//!   blocks of length `k`. At an anchor round (`t ≡ 0 mod k`) an agent replays
//!   its previous broadcast and folds the received payoffs into a slow
//!   anchored sequence `z` via [`btrl_z_update`]; inside a block `z` is frozen
//!   and the agent plays one MWU step from `z` under its most recent payoff
//!   vector. Each round of a block thereby applies the anchored profile map
//!   once, so by its contraction the broadcasts converge geometrically toward
//!   the clairvoyant update of `z`; without coordination, that is `k` rounds spent
//!   per approximate fixed point.
//! * [`run_mwu_baseline`]: classic simultaneous MWU, one explicit step per
//!   round.
//! * [`run_exact_cmwu`]: a centralized reference that solves the clairvoyant
//!   fixed point exactly every round with [`solve_cmwu_fixed_point`].
//!
//! All three are deterministic: same game, horizon and parameters give
//! bit-identical trajectories.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, NormalFormGame, PayoffVector, StrategyProfile};
use crate::learning::{
    btrl_z_update, classic_mwu_update, contraction_modulus, mwu_step, profile_distance,
    solve_cmwu_fixed_point, AgentConfig, FixedPointSettings,
};

/// Default step size `1/(2nV)`, the regime in which the anchored profile map
/// contracts with modulus `(n−1)/(2n) ≤ 1/2`. For an all-zero game (`V = 0`)
/// any step size is equivalent; 1/2 is used.
pub fn default_eta(game: &NormalFormGame) -> f64 {
    let v = game.payoff_ceiling();
    if v > 0.0 {
        1.0 / (2.0 * game.num_players() as f64 * v)
    } else {
        0.5
    }
}

/// Default block length `⌈log₂ T⌉`, at least 1.
pub fn default_block_length(horizon: usize) -> usize {
    if horizon <= 1 {
        1
    } else {
        (usize::BITS - (horizon - 1).leading_zeros()) as usize
    }
}

/// Step-size selection for [`run_dynamics`].
#[derive(Debug, Clone, PartialEq, Default)]
pub enum EtaChoice {
    /// `1/(2nV)` for every player.
    #[default]
    Default,
    /// One shared value for every player.
    Common(f64),
    /// An explicit value per player.
    PerPlayer(Vec<f64>),
}

impl EtaChoice {
    fn resolve(&self, game: &NormalFormGame) -> Result<Vec<f64>> {
        match self {
            EtaChoice::Default => Ok(vec![default_eta(game); game.num_players()]),
            EtaChoice::Common(eta) => Ok(vec![*eta; game.num_players()]),
            EtaChoice::PerPlayer(etas) => {
                if etas.len() != game.num_players() {
                    return Err(Error::Shape {
                        context: "per-player step-size count",
                        expected: game.num_players(),
                        found: etas.len(),
                    });
                }
                Ok(etas.clone())
            }
        }
    }
}

/// Optional overrides for the protocol defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DynamicsOverrides {
    pub eta: EtaChoice,
    /// Block length `k`; defaults to `⌈log₂ T⌉`.
    pub block_length: Option<usize>,
}

/// Which producer generated a trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DynamicsKind {
    Cmwu,
    MwuBaseline,
    ExactCmwu,
}

impl DynamicsKind {
    pub fn label(&self) -> &'static str {
        match self {
            DynamicsKind::Cmwu => "cmwu",
            DynamicsKind::MwuBaseline => "mwu",
            DynamicsKind::ExactCmwu => "exact-cmwu",
        }
    }
}

/// Recorded when an explicitly overridden step size voids the contraction
/// guarantee. The run still executes; the bounds simply no longer apply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContractionWarning {
    /// The offending modulus `η·V·(n−1) ≥ 1`.
    pub modulus: f64,
}

/// A complete run: every broadcast profile plus block bookkeeping.
///
/// Anchor rounds are exactly the multiples of `block_length` below the
/// horizon. For the uncoupled protocol, `z_snapshots[τ]` is the joint `z`
/// right after the anchor-round update at round `k·τ`, and
/// `block_residuals[τ−1]` is `D(x^{kτ}, z^{kτ})` for `τ = 1..=T'` with
/// `T' = ⌊(T−1)/k⌋` the number of complete blocks. Baseline and exact runs
/// use `block_length = 1` (every round an anchor) and carry no `z` data.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    kind: DynamicsKind,
    block_length: usize,
    etas: Vec<f64>,
    profiles: Vec<StrategyProfile>,
    z_snapshots: Vec<StrategyProfile>,
    block_residuals: Vec<f64>,
    contraction_warning: Option<ContractionWarning>,
}

impl Trajectory {
    pub fn kind(&self) -> DynamicsKind {
        self.kind
    }

    /// Number of rounds `T`.
    pub fn horizon(&self) -> usize {
        self.profiles.len()
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn etas(&self) -> &[f64] {
        &self.etas
    }

    pub fn profiles(&self) -> &[StrategyProfile] {
        &self.profiles
    }

    pub fn profile(&self, t: usize) -> &StrategyProfile {
        &self.profiles[t]
    }

    pub fn is_anchor(&self, t: usize) -> bool {
        t % self.block_length == 0
    }

    /// Anchor rounds in increasing order: `0, k, 2k, …` below the horizon.
    pub fn anchor_rounds(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.horizon()).step_by(self.block_length)
    }

    /// `T' + 1`, the number of anchor rounds.
    pub fn anchor_count(&self) -> usize {
        (self.horizon() + self.block_length - 1) / self.block_length
    }

    /// `T' = ⌊(T−1)/k⌋`, the number of complete blocks.
    pub fn complete_blocks(&self) -> usize {
        (self.horizon() - 1) / self.block_length
    }

    /// The broadcast profiles at anchor rounds.
    pub fn anchor_profiles(&self) -> Vec<&StrategyProfile> {
        self.anchor_rounds().map(|t| &self.profiles[t]).collect()
    }

    /// Post-update `z` profiles at anchor rounds (uncoupled runs only).
    pub fn z_snapshots(&self) -> &[StrategyProfile] {
        &self.z_snapshots
    }

    /// `D(x^{kτ}, z^{kτ})` for `τ = 1..=T'` (uncoupled runs only).
    pub fn block_residuals(&self) -> &[f64] {
        &self.block_residuals
    }

    pub fn contraction_warning(&self) -> Option<&ContractionWarning> {
        self.contraction_warning.as_ref()
    }
}

/// Which round phase an agent expects next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Broadcast,
    Receive,
}

/// Per-agent state of the uncoupled protocol. An agent sees only its own
/// index, step size, block length, its previous broadcast, its anchored `z`
/// sequence, and the single most recent payoff vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CmwuAgentState {
    player: usize,
    config: AgentConfig,
    block_length: usize,
    previous_broadcast: MixedStrategy,
    z: MixedStrategy,
    last_payoffs: Option<PayoffVector>,
    next_round: usize,
    phase: Phase,
}

impl CmwuAgentState {
    /// Fresh state before round 0: previous broadcast and `z` both uniform.
    pub fn new(player: usize, num_actions: usize, eta: f64, block_length: usize) -> Result<Self> {
        if block_length == 0 {
            return Err(Error::Config(String::from("block length must be at least 1")));
        }
        let uniform = MixedStrategy::uniform(num_actions)?;
        Ok(Self {
            player,
            config: AgentConfig::new(eta)?,
            block_length,
            previous_broadcast: uniform.clone(),
            z: uniform,
            last_payoffs: None,
            next_round: 0,
            phase: Phase::Broadcast,
        })
    }

    pub fn player(&self) -> usize {
        self.player
    }

    pub fn eta(&self) -> f64 {
        self.config.eta()
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// The anchored `z` sequence's current value (after the last processed
    /// round). Frozen between anchor rounds.
    pub fn current_z(&self) -> &MixedStrategy {
        &self.z
    }

    /// The most recent broadcast (uniform before round 0).
    pub fn previous_broadcast(&self) -> &MixedStrategy {
        &self.previous_broadcast
    }

    fn expect_round(&self, t: usize, phase: Phase) -> Result<()> {
        if t != self.next_round || phase != self.phase {
            return Err(Error::Protocol(format!(
                "player {} asked to handle round {t} out of order (expecting round {} {})",
                self.player,
                self.next_round,
                match self.phase {
                    Phase::Broadcast => "broadcast",
                    Phase::Receive => "payoff receipt",
                }
            )));
        }
        Ok(())
    }

    fn is_anchor(&self, t: usize) -> bool {
        t % self.block_length == 0
    }

    /// The strategy this agent will broadcast in round `t`, without mutating
    /// state: the previous broadcast at an anchor round, otherwise one MWU
    /// step from the frozen `z` under the most recent payoff vector.
    pub fn peek_broadcast(&self, t: usize) -> Result<MixedStrategy> {
        self.expect_round(t, Phase::Broadcast)?;
        if self.is_anchor(t) {
            Ok(self.previous_broadcast.clone())
        } else {
            let payoffs = self.last_payoffs.as_ref().ok_or_else(|| {
                Error::Protocol(format!(
                    "player {} has no cached payoffs before non-anchor round {t}",
                    self.player
                ))
            })?;
            mwu_step(&self.z, payoffs, self.config.eta())
        }
    }

    /// Commits the round-`t` broadcast and returns it.
    pub fn broadcast(&mut self, t: usize) -> Result<MixedStrategy> {
        let strategy = self.peek_broadcast(t)?;
        self.previous_broadcast = strategy.clone();
        self.phase = Phase::Receive;
        Ok(strategy)
    }

    /// Consumes the round-`t` payoff vector: at anchor rounds the anchored
    /// `z` sequence advances by one [`btrl_z_update`]; at other rounds `z`
    /// stays frozen. The vector replaces the one-round payoff cache.
    pub fn receive_payoffs(&mut self, t: usize, payoffs: PayoffVector) -> Result<()> {
        self.expect_round(t, Phase::Receive)?;
        if payoffs.len() != self.z.len() {
            return Err(Error::Shape {
                context: "agent payoff vector length",
                expected: self.z.len(),
                found: payoffs.len(),
            });
        }
        if self.is_anchor(t) {
            self.z = btrl_z_update(&self.z, &payoffs, self.config.eta())?;
        }
        self.last_payoffs = Some(payoffs);
        self.next_round = t + 1;
        self.phase = Phase::Broadcast;
        Ok(())
    }
}

/// One entry of the mediator's access log.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleAccess {
    pub round: usize,
    pub player: usize,
}

/// The mediator's payoff service. Each round the joint broadcast profile is
/// posted once, then every player may query *their own* payoff vector exactly
/// once. Every query is logged, which makes uncoupledness auditable: the log
/// shows each agent received only its own feedback.
#[derive(Debug)]
pub struct PayoffOracle<'g> {
    game: &'g NormalFormGame,
    next_round: usize,
    current: Option<(usize, StrategyProfile)>,
    served: Vec<bool>,
    log: Vec<OracleAccess>,
}

impl<'g> PayoffOracle<'g> {
    pub fn new(game: &'g NormalFormGame) -> Self {
        Self {
            game,
            next_round: 0,
            current: None,
            served: vec![false; game.num_players()],
            log: Vec::new(),
        }
    }

    pub fn game(&self) -> &'g NormalFormGame {
        self.game
    }

    /// Posts round `t`'s joint broadcast profile. Rounds must be posted in
    /// order starting from 0, and every player must have queried the previous
    /// round first.
    pub fn post_profile(&mut self, t: usize, profile: StrategyProfile) -> Result<()> {
        if t != self.next_round {
            return Err(Error::Protocol(format!(
                "profile for round {t} posted out of order (expecting round {})",
                self.next_round
            )));
        }
        if self.current.is_some() && !self.served.iter().all(|&s| s) {
            return Err(Error::Protocol(format!(
                "cannot post round {t}: not every player has queried round {}",
                t - 1
            )));
        }
        profile.check_shape(self.game)?;
        self.current = Some((t, profile));
        self.served.iter_mut().for_each(|s| *s = false);
        self.next_round = t + 1;
        Ok(())
    }

    /// Serves player `player` its payoff vector for round `t`. Each player
    /// may query each round exactly once, and only the posted round.
    pub fn own_payoffs(&mut self, player: usize, t: usize) -> Result<PayoffVector> {
        if player >= self.game.num_players() {
            return Err(Error::Shape {
                context: "oracle player index",
                expected: self.game.num_players(),
                found: player,
            });
        }
        let (round, profile) = self.current.as_ref().ok_or_else(|| {
            Error::Protocol(format!("player {player} queried round {t} before any profile was posted"))
        })?;
        if *round != t {
            return Err(Error::Protocol(format!(
                "player {player} queried round {t}, but round {round} is current"
            )));
        }
        if self.served[player] {
            return Err(Error::Protocol(format!(
                "player {player} queried round {t} twice"
            )));
        }
        self.served[player] = true;
        self.log.push(OracleAccess { round: t, player });
        self.game.payoff_vector(player, profile)
    }

    /// Every query served so far, in order.
    pub fn access_log(&self) -> &[OracleAccess] {
        &self.log
    }
}

/// One full protocol round for a single agent: commit the broadcast, query
/// the oracle for its own payoff vector, fold it in. The mediator must
/// already have posted round `t`'s joint profile. Returns the broadcast.
pub fn agent_step(
    state: &mut CmwuAgentState,
    t: usize,
    oracle: &mut PayoffOracle<'_>,
) -> Result<MixedStrategy> {
    let strategy = state.broadcast(t)?;
    let payoffs = oracle.own_payoffs(state.player(), t)?;
    state.receive_payoffs(t, payoffs)?;
    Ok(strategy)
}

/// Runs the uncoupled block protocol for `horizon` rounds.
///
/// Defaults: `η = 1/(2nV)` per player and `k = ⌈log₂ T⌉`. Overriding `η`
/// beyond the contraction regime does not fail: the run proceeds and the
/// trajectory carries a [`ContractionWarning`] instead, since the protocol
/// itself never diverges (every broadcast is a valid mixed strategy).
pub fn run_dynamics(
    game: &NormalFormGame,
    horizon: usize,
    overrides: &DynamicsOverrides,
) -> Result<Trajectory> {
    run_dynamics_logged(game, horizon, overrides).map(|(trajectory, _)| trajectory)
}

/// Like [`run_dynamics`], additionally returning the mediator's access log.
pub fn run_dynamics_logged(
    game: &NormalFormGame,
    horizon: usize,
    overrides: &DynamicsOverrides,
) -> Result<(Trajectory, Vec<OracleAccess>)> {
    if horizon == 0 {
        return Err(Error::Domain(String::from("horizon must be at least 1")));
    }
    let etas = overrides.eta.resolve(game)?;
    let block_length = match overrides.block_length {
        Some(0) => {
            return Err(Error::Config(String::from("block length must be at least 1")));
        }
        Some(k) => k,
        None => default_block_length(horizon),
    };
    let modulus = contraction_modulus(game, &etas)?;
    let contraction_warning = if modulus >= 1.0 {
        Some(ContractionWarning { modulus })
    } else {
        None
    };

    let mut agents = (0..game.num_players())
        .map(|i| CmwuAgentState::new(i, game.num_actions(i), etas[i], block_length))
        .collect::<Result<Vec<_>>>()?;
    let mut oracle = PayoffOracle::new(game);
    let mut profiles = Vec::with_capacity(horizon);
    let mut z_snapshots = Vec::new();

    for t in 0..horizon {
        let strategies = agents
            .iter_mut()
            .map(|agent| agent.broadcast(t))
            .collect::<Result<Vec<_>>>()?;
        let profile = StrategyProfile::new(strategies)?;
        oracle.post_profile(t, profile.clone())?;
        for agent in &mut agents {
            let payoffs = oracle.own_payoffs(agent.player(), t)?;
            agent.receive_payoffs(t, payoffs)?;
        }
        if t % block_length == 0 {
            z_snapshots.push(StrategyProfile::new(
                agents.iter().map(|a| a.current_z().clone()).collect(),
            )?);
        }
        profiles.push(profile);
    }

    let complete_blocks = (horizon - 1) / block_length;
    let mut block_residuals = Vec::with_capacity(complete_blocks);
    for tau in 1..=complete_blocks {
        block_residuals.push(profile_distance(
            &profiles[tau * block_length],
            &z_snapshots[tau],
        )?);
    }

    let trajectory = Trajectory {
        kind: DynamicsKind::Cmwu,
        block_length,
        etas,
        profiles,
        z_snapshots,
        block_residuals,
        contraction_warning,
    };
    Ok((trajectory, oracle.log))
}

/// Classic simultaneous MWU from the uniform profile: every round each player
/// takes one explicit step under the payoff vector at the current profile.
/// `etas` may be zero (the trajectory then stays uniform).
pub fn run_mwu_baseline(
    game: &NormalFormGame,
    horizon: usize,
    etas: &[f64],
) -> Result<Trajectory> {
    if horizon == 0 {
        return Err(Error::Domain(String::from("horizon must be at least 1")));
    }
    let mut profiles = Vec::with_capacity(horizon);
    let mut current = StrategyProfile::uniform_for(game);
    for t in 0..horizon {
        profiles.push(current.clone());
        if t + 1 < horizon {
            current = classic_mwu_update(&current, game, etas)?;
        }
    }
    Ok(Trajectory {
        kind: DynamicsKind::MwuBaseline,
        block_length: 1,
        etas: etas.to_vec(),
        profiles,
        z_snapshots: Vec::new(),
        block_residuals: Vec::new(),
        contraction_warning: None,
    })
}

/// Solver diagnostics for one round of [`run_exact_cmwu`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactCmwuRound {
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
}

/// An exact-update run: the trajectory plus per-round solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactCmwuRun {
    pub trajectory: Trajectory,
    pub rounds: Vec<ExactCmwuRound>,
}

impl ExactCmwuRun {
    pub fn all_converged(&self) -> bool {
        self.rounds.iter().all(|r| r.converged)
    }

    pub fn max_iterations(&self) -> usize {
        self.rounds.iter().map(|r| r.iterations).max().unwrap_or(0)
    }

    pub fn max_residual(&self) -> f64 {
        self.rounds.iter().map(|r| r.final_residual).fold(0.0, f64::max)
    }
}

/// Centralized exact clairvoyant dynamics: round `t`'s profile is the fixed
/// point of the profile map anchored at round `t−1`'s profile (the very first
/// solve is anchored at the uniform profile, which is not itself played).
/// Played profiles therefore fold their *own* round's payoffs into the
/// exponent, which is what yields horizon-independent regret.
///
/// In lenient mode a round may stop at the iteration limit; the best iterate
/// is played and the round is flagged in the diagnostics.
pub fn run_exact_cmwu(
    game: &NormalFormGame,
    horizon: usize,
    etas: &[f64],
    settings: &FixedPointSettings,
) -> Result<ExactCmwuRun> {
    if horizon == 0 {
        return Err(Error::Domain(String::from("horizon must be at least 1")));
    }
    let mut anchor = StrategyProfile::uniform_for(game);
    let mut profiles = Vec::with_capacity(horizon);
    let mut rounds = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let outcome = solve_cmwu_fixed_point(&anchor, game, etas, settings)?;
        let converged = outcome.is_converged();
        let result = outcome.into_result();
        rounds.push(ExactCmwuRound {
            iterations: result.iterations,
            final_residual: result.final_residual,
            converged,
        });
        anchor = result.profile.clone();
        profiles.push(result.profile);
    }
    Ok(ExactCmwuRun {
        trajectory: Trajectory {
            kind: DynamicsKind::ExactCmwu,
            block_length: 1,
            etas: etas.to_vec(),
            profiles,
            z_snapshots: Vec::new(),
            block_residuals: Vec::new(),
            contraction_warning: None,
        },
        rounds,
    })
}
