//! Multiplicative-weights learning rules and the clairvoyant fixed point.
//!
//! The basic step [`mwu_step`] reweights an anchor distribution by
//! `exp(η · payoff)` and renormalizes. Applied with payoffs evaluated at the
//! *current* profile it gives classic MWU ([`classic_mwu_update`]); applied
//! with payoffs evaluated at the *output* profile it defines the clairvoyant
//! update, whose solution is a fixed point of the anchored map
//! [`profile_map`]:
//!
//! ```text
//! G(x)ᵢ = mwu_step(anchorᵢ, vᵢ(x), ηᵢ)
//! ```
//!
//! Under the profile distance `D(x, x') = maxᵢ ‖xᵢ − x'ᵢ‖₁`, the map `G`
//! is Lipschitz with modulus `η·V·(n−1)` (each component inherits the `2η`
//! payoff-sensitivity of the step, and each opponent's deviation moves a
//! payoff vector by at most `V/2` times their `ℓ₁` change). Whenever
//! `η < 1/((n−1)·V)` the map is a contraction, so the clairvoyant update
//! exists, is unique, and [`solve_cmwu_fixed_point`] finds it by iterating
//! `G` to the requested residual.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::game::{MixedStrategy, NormalFormGame, PayoffVector, StrategyProfile};

/// Per-agent learning parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentConfig {
    eta: f64,
}

impl AgentConfig {
    /// Step size must be finite and strictly positive.
    pub fn new(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta <= 0.0 {
            return Err(Error::Domain(format!(
                "step size must be finite and positive, got {eta}"
            )));
        }
        Ok(Self { eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

/// One multiplicative-weights step: reweights `anchor` by `exp(eta · payoff)`
/// entry-wise and renormalizes.
///
/// The exponentials are computed after subtracting the largest payoff entry,
/// which leaves the result unchanged (shift invariance) and keeps them from
/// overflowing. A constant payoff vector therefore returns the anchor
/// bit-for-bit whenever the anchor sums to exactly 1. `eta` may be 0, which
/// makes the step the identity.
pub fn mwu_step(anchor: &MixedStrategy, payoffs: &PayoffVector, eta: f64) -> Result<MixedStrategy> {
    if anchor.len() != payoffs.len() {
        return Err(Error::Shape {
            context: "mwu_step payoff length",
            expected: anchor.len(),
            found: payoffs.len(),
        });
    }
    if !eta.is_finite() || eta < 0.0 {
        return Err(Error::Domain(format!(
            "step size must be finite and nonnegative, got {eta}"
        )));
    }
    let top = payoffs
        .values()
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut weights: Vec<f64> = anchor
        .probs()
        .iter()
        .zip(payoffs.values())
        .map(|(&p, &v)| p * libm::exp(eta * (v - top)))
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Domain(format!(
            "reweighted mass underflowed to {total}; anchor places its mass where exp(eta * payoff) vanishes"
        )));
    }
    for w in &mut weights {
        *w /= total;
    }
    MixedStrategy::new(weights)
}

/// The anchored z-update of the uncoupled protocol: identical arithmetic to
/// [`mwu_step`], kept as its own entry point because the protocol applies it
/// to the frozen `z` sequence rather than to broadcast strategies.
pub fn btrl_z_update(
    z_prev: &MixedStrategy,
    payoffs: &PayoffVector,
    eta: f64,
) -> Result<MixedStrategy> {
    mwu_step(z_prev, payoffs, eta)
}

/// Classic (explicit) MWU: every player reweights their own current strategy
/// by the payoff vector evaluated at the current profile.
pub fn classic_mwu_update(
    x: &StrategyProfile,
    game: &NormalFormGame,
    etas: &[f64],
) -> Result<StrategyProfile> {
    check_etas(game, etas)?;
    x.check_shape(game)?;
    let mut next = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let v = game.payoff_vector(i, x)?;
        next.push(mwu_step(x.player(i), &v, etas[i])?);
    }
    StrategyProfile::new(next)
}

/// The anchored profile map `G`: component `i` is an MWU step from
/// `anchors[i]` under the payoff vector evaluated at `x`. The clairvoyant
/// update for anchor profile `anchors` is exactly a fixed point of this map.
pub fn profile_map(
    x: &StrategyProfile,
    anchors: &StrategyProfile,
    game: &NormalFormGame,
    etas: &[f64],
) -> Result<StrategyProfile> {
    check_etas(game, etas)?;
    x.check_shape(game)?;
    anchors.check_shape(game)?;
    let mut next = Vec::with_capacity(game.num_players());
    for i in 0..game.num_players() {
        let v = game.payoff_vector(i, x)?;
        next.push(mwu_step(anchors.player(i), &v, etas[i])?);
    }
    StrategyProfile::new(next)
}

/// Profile distance `D(x, x') = maxᵢ ‖xᵢ − x'ᵢ‖₁`. Always in `[0, 2]`.
pub fn profile_distance(x: &StrategyProfile, y: &StrategyProfile) -> Result<f64> {
    if x.num_players() != y.num_players() {
        return Err(Error::Shape {
            context: "profile_distance player count",
            expected: x.num_players(),
            found: y.num_players(),
        });
    }
    let mut d = 0.0_f64;
    for (a, b) in x.strategies().iter().zip(y.strategies()) {
        d = d.max(a.l1_distance(b)?);
    }
    Ok(d)
}

/// The Lipschitz modulus `max_i ηᵢ · V · (n−1)` of the anchored profile map.
/// The map is a guaranteed contraction exactly when this is below 1.
pub fn contraction_modulus(game: &NormalFormGame, etas: &[f64]) -> Result<f64> {
    check_etas(game, etas)?;
    let eta_max = etas.iter().fold(0.0_f64, |a, &b| a.max(b));
    Ok(eta_max * game.payoff_ceiling() * (game.num_players() - 1) as f64)
}

fn check_etas(game: &NormalFormGame, etas: &[f64]) -> Result<()> {
    if etas.len() != game.num_players() {
        return Err(Error::Shape {
            context: "step-size count",
            expected: game.num_players(),
            found: etas.len(),
        });
    }
    for &eta in etas {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::Domain(format!(
                "step size must be finite and nonnegative, got {eta}"
            )));
        }
    }
    Ok(())
}

/// Whether the fixed-point solver insists on a certified contraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ContractionCheck {
    /// Refuse to run when `η·V·(n−1) ≥ 1`.
    #[default]
    Strict,
    /// Attempt the iteration regardless; it may hit the iteration limit.
    Lenient,
}

/// Solver settings for [`solve_cmwu_fixed_point`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSettings {
    /// Stop once `D(x, G(x))` is at or below this.
    pub tolerance: f64,
    /// Iteration cap; one iteration is one application of the map.
    pub max_iterations: usize,
    pub contraction_check: ContractionCheck,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
            contraction_check: ContractionCheck::Strict,
        }
    }
}

impl FixedPointSettings {
    fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::Config(format!(
                "solver tolerance must be finite and positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config(alloc::string::String::from(
                "solver needs at least one iteration",
            )));
        }
        Ok(())
    }
}

/// Diagnostics and result of a fixed-point solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointResult {
    /// The iterate whose residual is reported below.
    pub profile: StrategyProfile,
    /// Number of map applications performed.
    pub iterations: usize,
    /// `D(profile, G(profile))` as measured during the iteration.
    pub final_residual: f64,
    /// Successive step-length ratios `dⱼ₊₁/dⱼ`; under a contraction with
    /// modulus `c` every ratio is at most `c` up to roundoff.
    pub contraction_estimates: Vec<f64>,
}

/// Outcome of a fixed-point solve that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedPointOutcome {
    /// The residual reached the tolerance.
    Converged(FixedPointResult),
    /// The iteration cap was reached first; carries the best iterate seen.
    IterationLimit(FixedPointResult),
}

impl FixedPointOutcome {
    pub fn is_converged(&self) -> bool {
        matches!(self, FixedPointOutcome::Converged(_))
    }

    pub fn result(&self) -> &FixedPointResult {
        match self {
            FixedPointOutcome::Converged(r) | FixedPointOutcome::IterationLimit(r) => r,
        }
    }

    pub fn into_result(self) -> FixedPointResult {
        match self {
            FixedPointOutcome::Converged(r) | FixedPointOutcome::IterationLimit(r) => r,
        }
    }
}

/// Solves for the clairvoyant update at `anchor`: the fixed point of the
/// anchored profile map. Starts the iteration from the anchor itself.
///
/// Strict mode (the default) refuses configurations whose contraction
/// modulus `η·V·(n−1)` is not below 1; lenient mode attempts them anyway and
/// reports an iteration-limit outcome if the residual never reaches the
/// tolerance. With modulus `c < 1` the iteration count to tolerance `tol`
/// is at most `⌈log(2/tol)/log(1/c)⌉ + 1`, since profile distances never
/// exceed 2.
pub fn solve_cmwu_fixed_point(
    anchor: &StrategyProfile,
    game: &NormalFormGame,
    etas: &[f64],
    settings: &FixedPointSettings,
) -> Result<FixedPointOutcome> {
    solve_cmwu_fixed_point_from(anchor, anchor, game, etas, settings)
}

/// Same as [`solve_cmwu_fixed_point`] but iterates from an explicit warm
/// start instead of the anchor. Because a contraction has a unique fixed
/// point, solves from different warm starts agree to within a small multiple
/// of the tolerance.
pub fn solve_cmwu_fixed_point_from(
    anchor: &StrategyProfile,
    start: &StrategyProfile,
    game: &NormalFormGame,
    etas: &[f64],
    settings: &FixedPointSettings,
) -> Result<FixedPointOutcome> {
    settings.validate()?;
    anchor.check_shape(game)?;
    start.check_shape(game)?;
    let modulus = contraction_modulus(game, etas)?;
    if settings.contraction_check == ContractionCheck::Strict && modulus >= 1.0 {
        return Err(Error::Config(format!(
            "contraction modulus eta*V*(n-1) = {modulus} is not below 1; reduce the step size or opt into lenient mode"
        )));
    }

    let mut current = start.clone();
    let mut prev_step: Option<f64> = None;
    let mut ratios = Vec::new();
    let mut best: Option<(StrategyProfile, f64)> = None;
    for iteration in 1..=settings.max_iterations {
        let next = profile_map(&current, anchor, game, etas)?;
        let residual = profile_distance(&current, &next)?;
        if let Some(prev) = prev_step {
            if prev > 0.0 {
                ratios.push(residual / prev);
            }
        }
        prev_step = Some(residual);
        if best.as_ref().map_or(true, |(_, r)| residual < *r) {
            best = Some((current.clone(), residual));
        }
        if residual <= settings.tolerance {
            return Ok(FixedPointOutcome::Converged(FixedPointResult {
                profile: current,
                iterations: iteration,
                final_residual: residual,
                contraction_estimates: ratios,
            }));
        }
        current = next;
    }
    let (profile, final_residual) = best.expect("at least one iteration ran");
    Ok(FixedPointOutcome::IterationLimit(FixedPointResult {
        profile,
        iterations: settings.max_iterations,
        final_residual,
        contraction_estimates: ratios,
    }))
}
