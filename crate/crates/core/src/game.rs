//! Finite normal-form games with dense payoff storage.
//!
//! A game has `n ≥ 1` players; player `i` chooses from `mᵢ ≥ 1` actions. Each
//! player's payoffs are a dense tensor over pure action profiles, stored
//! row-major with player 0's action as the slowest-varying index. All payoff
//! entries must be finite and nonnegative; the *payoff ceiling* `V` is the
//! largest entry across all players, so every payoff lies in `[0, V]`.
//!
//! The two evaluation routes are deliberately independent implementations:
//! [`NormalFormGame::expected_utility`] enumerates full profiles, while
//! [`NormalFormGame::payoff_vector`] accumulates opponent-weighted slices.
//! Their agreement (`uᵢ(x) = ⟨vᵢ(x), xᵢ⟩`) is a checked invariant of the test
//! suite, not an artifact of shared code.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Hard cap on the number of pure action profiles a game may have.
pub const MAX_PROFILES: usize = 10_000_000;

/// A probability distribution over one player's actions.
///
/// Entries are finite, nonnegative, and sum to 1 within `1e-12`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct MixedStrategy {
    probs: Vec<f64>,
}

impl MixedStrategy {
    /// Validates and wraps a probability vector.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Domain(String::from(
                "mixed strategy must have at least one action",
            )));
        }
        let mut sum = 0.0;
        for (a, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Domain(format!(
                    "mixed strategy entry {a} is {p}; entries must be finite and nonnegative"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!(
                "mixed strategy sums to {sum}; must be 1 within 1e-12"
            )));
        }
        Ok(Self { probs })
    }

    /// The uniform distribution over `num_actions` actions.
    pub fn uniform(num_actions: usize) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::Domain(String::from(
                "mixed strategy must have at least one action",
            )));
        }
        let p = 1.0 / num_actions as f64;
        Ok(Self {
            probs: vec![p; num_actions],
        })
    }

    /// The point mass on `action`.
    pub fn pure(num_actions: usize, action: usize) -> Result<Self> {
        if action >= num_actions {
            return Err(Error::Shape {
                context: "pure strategy action index",
                expected: num_actions,
                found: action,
            });
        }
        let mut probs = vec![0.0; num_actions];
        probs[action] = 1.0;
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated strategies are never empty
    }

    /// ‖self − other‖₁. The strategies must have the same length.
    pub fn l1_distance(&self, other: &MixedStrategy) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Shape {
                context: "l1_distance",
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .probs
            .iter()
            .zip(&other.probs)
            .map(|(a, b)| (a - b).abs())
            .sum())
    }
}

/// One mixed strategy per player.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct StrategyProfile {
    strategies: Vec<MixedStrategy>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::Domain(String::from(
                "strategy profile must have at least one player",
            )));
        }
        Ok(Self { strategies })
    }

    /// The all-uniform profile for `game`.
    pub fn uniform_for(game: &NormalFormGame) -> Self {
        let strategies = game
            .action_counts()
            .iter()
            .map(|&m| MixedStrategy::uniform(m).expect("games have at least one action"))
            .collect();
        Self { strategies }
    }

    pub fn strategies(&self) -> &[MixedStrategy] {
        &self.strategies
    }

    pub fn player(&self, i: usize) -> &MixedStrategy {
        &self.strategies[i]
    }

    pub fn num_players(&self) -> usize {
        self.strategies.len()
    }

    /// Checks that this profile matches `game`'s player and action counts.
    pub fn check_shape(&self, game: &NormalFormGame) -> Result<()> {
        if self.num_players() != game.num_players() {
            return Err(Error::Shape {
                context: "profile player count",
                expected: game.num_players(),
                found: self.num_players(),
            });
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if s.len() != game.num_actions(i) {
                return Err(Error::Shape {
                    context: "profile strategy length",
                    expected: game.num_actions(i),
                    found: s.len(),
                });
            }
        }
        Ok(())
    }
}

/// One player's expected payoff per own action against a fixed opponent
/// profile. Entries produced from a game lie in `[0, V]`.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct PayoffVector {
    values: Vec<f64>,
}

impl PayoffVector {
    /// Wraps a vector of finite payoff values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain(String::from(
                "payoff vector must have at least one entry",
            )));
        }
        for (a, &v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Domain(format!(
                    "payoff vector entry {a} is {v}; entries must be finite"
                )));
            }
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false // validated vectors are never empty
    }

    /// ⟨values, strategy⟩: the expected payoff of playing `strategy` against
    /// the opponents this vector was computed for.
    pub fn expected_payoff(&self, strategy: &MixedStrategy) -> Result<f64> {
        if self.len() != strategy.len() {
            return Err(Error::Shape {
                context: "expected_payoff",
                expected: self.len(),
                found: strategy.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(strategy.probs())
            .map(|(v, p)| v * p)
            .sum())
    }

    /// ‖self − other‖_∞. The vectors must have the same length.
    pub fn linf_distance(&self, other: &PayoffVector) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::Shape {
                context: "linf_distance",
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }
}

/// A finite normal-form game with dense per-player payoff tensors.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormGame {
    action_counts: Vec<usize>,
    /// One flat tensor per player, row-major, player 0 slowest.
    tensors: Vec<Vec<f64>>,
    payoff_ceiling: f64,
}

impl NormalFormGame {
    /// Builds a game from per-player action counts and payoff tensors.
    ///
    /// `tensors[i]` holds player `i`'s payoff for every pure profile, flattened
    /// row-major with player 0's action slowest. Every entry must be finite and
    /// nonnegative, and the number of profiles may not exceed [`MAX_PROFILES`].
    pub fn new(action_counts: Vec<usize>, tensors: Vec<Vec<f64>>) -> Result<Self> {
        if action_counts.is_empty() {
            return Err(Error::Config(String::from(
                "a game needs at least one player",
            )));
        }
        let mut num_profiles: usize = 1;
        for (i, &m) in action_counts.iter().enumerate() {
            if m == 0 {
                return Err(Error::Config(format!("player {i} has zero actions")));
            }
            num_profiles = num_profiles
                .checked_mul(m)
                .filter(|&p| p <= MAX_PROFILES)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "profile count exceeds the cap of {MAX_PROFILES} pure profiles"
                    ))
                })?;
        }
        if tensors.len() != action_counts.len() {
            return Err(Error::Shape {
                context: "payoff tensor count",
                expected: action_counts.len(),
                found: tensors.len(),
            });
        }
        let mut ceiling = 0.0_f64;
        for (i, tensor) in tensors.iter().enumerate() {
            if tensor.len() != num_profiles {
                return Err(Error::Shape {
                    context: "payoff tensor length",
                    expected: num_profiles,
                    found: tensor.len(),
                });
            }
            for &v in tensor {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Domain(format!(
                        "player {i} has payoff {v}; payoffs must be finite and nonnegative"
                    )));
                }
                ceiling = ceiling.max(v);
            }
        }
        Ok(Self {
            action_counts,
            tensors,
            payoff_ceiling: ceiling,
        })
    }

    pub fn num_players(&self) -> usize {
        self.action_counts.len()
    }

    pub fn action_counts(&self) -> &[usize] {
        &self.action_counts
    }

    pub fn num_actions(&self, player: usize) -> usize {
        self.action_counts[player]
    }

    /// The largest action count across players.
    pub fn max_actions(&self) -> usize {
        self.action_counts.iter().copied().max().unwrap_or(0)
    }

    /// The payoff ceiling `V`: the largest payoff entry across all players.
    pub fn payoff_ceiling(&self) -> f64 {
        self.payoff_ceiling
    }

    pub fn num_profiles(&self) -> usize {
        self.tensors[0].len()
    }

    /// Player `i`'s raw payoff tensor, flat row-major with player 0 slowest.
    pub fn tensor(&self, player: usize) -> Result<&[f64]> {
        self.check_player(player)?;
        Ok(&self.tensors[player])
    }

    fn check_player(&self, player: usize) -> Result<()> {
        if player >= self.num_players() {
            return Err(Error::Shape {
                context: "player index",
                expected: self.num_players(),
                found: player,
            });
        }
        Ok(())
    }

    /// Flattens a pure action profile into a tensor index.
    pub fn flat_index(&self, profile: &[usize]) -> Result<usize> {
        if profile.len() != self.num_players() {
            return Err(Error::Shape {
                context: "pure profile length",
                expected: self.num_players(),
                found: profile.len(),
            });
        }
        let mut flat = 0;
        for (&s, &m) in profile.iter().zip(&self.action_counts) {
            if s >= m {
                return Err(Error::Shape {
                    context: "pure profile action index",
                    expected: m,
                    found: s,
                });
            }
            flat = flat * m + s;
        }
        Ok(flat)
    }

    /// Player `player`'s payoff at a pure action profile.
    pub fn payoff(&self, player: usize, profile: &[usize]) -> Result<f64> {
        self.check_player(player)?;
        Ok(self.tensors[player][self.flat_index(profile)?])
    }

    /// Expected utility `uᵢ(x)` of player `player` under mixed profile `x`,
    /// by direct enumeration of all pure profiles.
    pub fn expected_utility(&self, player: usize, x: &StrategyProfile) -> Result<f64> {
        self.check_player(player)?;
        x.check_shape(self)?;
        let tensor = &self.tensors[player];
        let n = self.num_players();
        let mut indices = vec![0usize; n];
        let mut total = 0.0;
        for &payoff in tensor {
            let mut weight = 1.0;
            for (j, &s) in indices.iter().enumerate() {
                weight *= x.player(j).probs()[s];
            }
            total += weight * payoff;
            Self::advance(&mut indices, &self.action_counts);
        }
        Ok(total)
    }

    /// The deviation-payoff vector `vᵢ(x)`: entry `s` is player `player`'s
    /// expected payoff for playing action `s` while the opponents play their
    /// parts of `x`. Player `player`'s own entry in `x` is ignored (with one
    /// player, the vector is just that player's payoff tensor).
    pub fn payoff_vector(&self, player: usize, x: &StrategyProfile) -> Result<PayoffVector> {
        self.check_player(player)?;
        x.check_shape(self)?;
        let tensor = &self.tensors[player];
        let n = self.num_players();
        let mut indices = vec![0usize; n];
        let mut values = vec![0.0; self.num_actions(player)];
        for &payoff in tensor {
            let mut weight = 1.0;
            for (j, &s) in indices.iter().enumerate() {
                if j != player {
                    weight *= x.player(j).probs()[s];
                }
            }
            values[indices[player]] += weight * payoff;
            Self::advance(&mut indices, &self.action_counts);
        }
        PayoffVector::new(values)
    }

    /// Advances a multi-index odometer one step in flat (row-major) order.
    fn advance(indices: &mut [usize], counts: &[usize]) {
        for j in (0..indices.len()).rev() {
            indices[j] += 1;
            if indices[j] < counts[j] {
                return;
            }
            indices[j] = 0;
        }
    }
}

/// What [`generate_game`] should produce.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameKind {
    /// Independent payoffs drawn uniformly from `[0, 1)` for every player.
    RandomUniform { players: usize, actions: usize },
    /// Two players, `A⁽²⁾ = 1 − A⁽¹⁾` with `A⁽¹⁾` drawn uniformly from `[0, 1)`.
    ZeroSumTwoPlayer { actions: usize },
    /// A fixed game from the named catalog; the seed is ignored.
    Named(NamedGame),
}

/// Catalog of fixed benchmark games.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedGame {
    /// 2×2 matching pennies with payoffs in {0, 1}.
    MatchingPennies,
    /// Rock-paper-scissors rescaled to payoffs {0, ½, 1}.
    RockPaperScissors01,
}

impl NamedGame {
    pub const ALL: [NamedGame; 2] = [NamedGame::MatchingPennies, NamedGame::RockPaperScissors01];

    /// Canonical hyphenated name, as accepted by [`NamedGame::from_name`].
    pub fn name(&self) -> &'static str {
        match self {
            NamedGame::MatchingPennies => "matching-pennies",
            NamedGame::RockPaperScissors01 => "rock-paper-scissors-01",
        }
    }

    pub fn from_name(name: &str) -> Option<NamedGame> {
        Self::ALL.iter().copied().find(|g| g.name() == name)
    }
}

/// Builds a game deterministically from `kind` and `seed`.
///
/// Random entries come from a ChaCha8 stream keyed by `seed`, drawn
/// player-major in flat tensor order, so the same `(kind, seed)` pair yields
/// a bit-identical game on every platform.
pub fn generate_game(kind: &GameKind, seed: u64) -> Result<NormalFormGame> {
    match *kind {
        GameKind::RandomUniform { players, actions } => {
            if players == 0 || actions == 0 {
                return Err(Error::Config(String::from(
                    "random game needs at least one player and one action",
                )));
            }
            let mut counts = Vec::new();
            counts.resize(players, actions);
            let num_profiles = counts
                .iter()
                .try_fold(1usize, |p, &m| {
                    p.checked_mul(m).filter(|&q| q <= MAX_PROFILES)
                })
                .ok_or_else(|| {
                    Error::Config(format!(
                        "profile count exceeds the cap of {MAX_PROFILES} pure profiles"
                    ))
                })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tensors = (0..players)
                .map(|_| (0..num_profiles).map(|_| rng.gen::<f64>()).collect())
                .collect();
            NormalFormGame::new(counts, tensors)
        }
        GameKind::ZeroSumTwoPlayer { actions } => {
            if actions == 0 {
                return Err(Error::Config(String::from(
                    "zero-sum game needs at least one action",
                )));
            }
            let num_profiles = actions.checked_mul(actions).filter(|&q| q <= MAX_PROFILES).ok_or_else(|| {
                Error::Config(format!(
                    "profile count exceeds the cap of {MAX_PROFILES} pure profiles"
                ))
            })?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a1: Vec<f64> = (0..num_profiles).map(|_| rng.gen::<f64>()).collect();
            let a2: Vec<f64> = a1.iter().map(|&v| 1.0 - v).collect();
            NormalFormGame::new(vec![actions, actions], vec![a1, a2])
        }
        GameKind::Named(named) => named_game(named),
    }
}

fn named_game(named: NamedGame) -> Result<NormalFormGame> {
    match named {
        NamedGame::MatchingPennies => NormalFormGame::new(
            vec![2, 2],
            vec![vec![1.0, 0.0, 0.0, 1.0], vec![0.0, 1.0, 1.0, 0.0]],
        ),
        NamedGame::RockPaperScissors01 => {
            let a1 = vec![0.5, 0.0, 1.0, 1.0, 0.5, 0.0, 0.0, 1.0, 0.5];
            let a2 = a1.iter().map(|&v| 1.0 - v).collect();
            NormalFormGame::new(vec![3, 3], vec![a1, a2])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn matching_pennies() -> NormalFormGame {
        generate_game(&GameKind::Named(NamedGame::MatchingPennies), 0).unwrap()
    }

    #[test]
    fn uniform_matching_pennies_utilities_are_half() {
        let game = matching_pennies();
        let x = StrategyProfile::uniform_for(&game);
        for i in 0..2 {
            assert_abs_diff_eq!(game.expected_utility(i, &x).unwrap(), 0.5, epsilon = 1e-15);
        }
    }

    #[test]
    fn pure_profile_reads_tensor_entry() {
        let game = matching_pennies();
        assert_eq!(game.payoff(0, &[0, 0]).unwrap(), 1.0);
        assert_eq!(game.payoff(0, &[0, 1]).unwrap(), 0.0);
        assert_eq!(game.payoff(1, &[0, 1]).unwrap(), 1.0);
        let x = StrategyProfile::new(vec![
            MixedStrategy::pure(2, 1).unwrap(),
            MixedStrategy::pure(2, 0).unwrap(),
        ])
        .unwrap();
        assert_eq!(game.expected_utility(0, &x).unwrap(), 0.0);
        assert_eq!(game.expected_utility(1, &x).unwrap(), 1.0);
    }

    #[test]
    fn payoff_vector_against_uniform_opponent() {
        let game = matching_pennies();
        let x = StrategyProfile::uniform_for(&game);
        for i in 0..2 {
            let v = game.payoff_vector(i, &x).unwrap();
            assert_abs_diff_eq!(v.values()[0], 0.5, epsilon = 1e-15);
            assert_abs_diff_eq!(v.values()[1], 0.5, epsilon = 1e-15);
        }

        let skewed = NormalFormGame::new(
            vec![2, 2],
            vec![vec![1.0, 0.0, 0.0, 0.0], vec![0.0; 4]],
        )
        .unwrap();
        let v = skewed
            .payoff_vector(0, &StrategyProfile::uniform_for(&skewed))
            .unwrap();
        assert_abs_diff_eq!(v.values()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(v.values()[1], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn payoff_vector_against_pure_opponents_is_tensor_slice() {
        let game = generate_game(&GameKind::RandomUniform { players: 3, actions: 2 }, 9).unwrap();
        let x = StrategyProfile::new(vec![
            MixedStrategy::uniform(2).unwrap(),
            MixedStrategy::pure(2, 1).unwrap(),
            MixedStrategy::pure(2, 0).unwrap(),
        ])
        .unwrap();
        let v = game.payoff_vector(0, &x).unwrap();
        for s in 0..2 {
            assert_abs_diff_eq!(
                v.values()[s],
                game.payoff(0, &[s, 1, 0]).unwrap(),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn single_player_payoff_vector_is_own_tensor() {
        let game = NormalFormGame::new(vec![3], vec![vec![0.2, 0.7, 0.1]]).unwrap();
        let x = StrategyProfile::uniform_for(&game);
        let v = game.payoff_vector(0, &x).unwrap();
        assert_eq!(v.values(), &[0.2, 0.7, 0.1]);
        assert_abs_diff_eq!(
            game.expected_utility(0, &x).unwrap(),
            (0.2 + 0.7 + 0.1) / 3.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn constructor_rejects_bad_input() {
        // negative payoff
        assert!(matches!(
            NormalFormGame::new(vec![2], vec![vec![0.5, -0.1]]),
            Err(Error::Domain(_))
        ));
        // non-finite payoff
        assert!(matches!(
            NormalFormGame::new(vec![2], vec![vec![f64::NAN, 0.0]]),
            Err(Error::Domain(_))
        ));
        // wrong tensor length
        assert!(matches!(
            NormalFormGame::new(vec![2, 2], vec![vec![0.0; 3], vec![0.0; 4]]),
            Err(Error::Shape { .. })
        ));
        // wrong tensor count
        assert!(matches!(
            NormalFormGame::new(vec![2, 2], vec![vec![0.0; 4]]),
            Err(Error::Shape { .. })
        ));
        // profile-count cap, checked before tensor data is touched
        assert!(matches!(
            NormalFormGame::new(vec![4000, 4000], vec![Vec::new(), Vec::new()]),
            Err(Error::Config(_))
        ));
        // zero actions
        assert!(matches!(
            NormalFormGame::new(vec![2, 0], vec![Vec::new(), Vec::new()]),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn payoff_ceiling_is_max_entry() {
        let game = NormalFormGame::new(
            vec![2, 2],
            vec![vec![0.25, 0.5, 0.0, 0.125], vec![0.75, 0.0, 0.25, 0.5]],
        )
        .unwrap();
        assert_eq!(game.payoff_ceiling(), 0.75);
        assert_eq!(matching_pennies().payoff_ceiling(), 1.0);
    }

    #[test]
    fn mixed_strategy_validation() {
        assert!(MixedStrategy::new(vec![0.5, 0.5]).is_ok());
        assert!(MixedStrategy::new(vec![0.5, 0.6]).is_err());
        assert!(MixedStrategy::new(vec![1.1, -0.1]).is_err());
        assert!(MixedStrategy::new(vec![f64::INFINITY, 0.0]).is_err());
        assert!(MixedStrategy::new(Vec::new()).is_err());
        let u = MixedStrategy::uniform(4).unwrap();
        assert_eq!(u.probs(), &[0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn zero_sum_tensors_sum_to_one() {
        let game = generate_game(&GameKind::ZeroSumTwoPlayer { actions: 5 }, 42).unwrap();
        let a1 = game.tensor(0).unwrap();
        let a2 = game.tensor(1).unwrap();
        for (x, y) in a1.iter().zip(a2) {
            assert_abs_diff_eq!(x + y, 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let kind = GameKind::RandomUniform { players: 3, actions: 4 };
        let g1 = generate_game(&kind, 7).unwrap();
        let g2 = generate_game(&kind, 7).unwrap();
        assert_eq!(g1, g2);
        let g3 = generate_game(&kind, 8).unwrap();
        assert_ne!(g1, g3);
    }

    #[test]
    fn named_catalog_round_trips() {
        for named in NamedGame::ALL {
            assert_eq!(NamedGame::from_name(named.name()), Some(named));
        }
        assert_eq!(NamedGame::from_name("unknown"), None);
        let rps = generate_game(&GameKind::Named(NamedGame::RockPaperScissors01), 0).unwrap();
        assert_eq!(rps.payoff(0, &[0, 0]).unwrap(), 0.5);
        assert_eq!(rps.payoff(0, &[0, 2]).unwrap(), 1.0);
        assert_eq!(rps.payoff(1, &[0, 2]).unwrap(), 0.0);
    }

    #[test]
    fn flat_index_is_row_major_player_zero_slowest() {
        let game = generate_game(&GameKind::RandomUniform { players: 3, actions: 3 }, 1).unwrap();
        assert_eq!(game.flat_index(&[0, 0, 0]).unwrap(), 0);
        assert_eq!(game.flat_index(&[0, 0, 1]).unwrap(), 1);
        assert_eq!(game.flat_index(&[0, 1, 0]).unwrap(), 3);
        assert_eq!(game.flat_index(&[1, 0, 0]).unwrap(), 9);
        assert_eq!(game.flat_index(&[2, 2, 2]).unwrap(), 26);
        assert!(game.flat_index(&[3, 0, 0]).is_err());
        assert!(game.flat_index(&[0, 0]).is_err());
    }
}
