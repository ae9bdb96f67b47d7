//! Cross-module invariants: an independent brute-force oracle for game
//! evaluation, analytic properties of the learning rules, and structural
//! properties of the block protocol. Tolerances are stated next to each
//! assertion; every bound asserted here is a theorem of the model, so the
//! epsilons only absorb floating-point roundoff.

use cmwu_core::dynamics::{
    default_block_length, default_eta, run_dynamics, CmwuAgentState, DynamicsOverrides,
    PayoffOracle,
};
use cmwu_core::game::{generate_game, GameKind, MixedStrategy, NormalFormGame, PayoffVector, StrategyProfile};
use cmwu_core::learning::{
    btrl_z_update, contraction_modulus, mwu_step, profile_distance, profile_map,
    solve_cmwu_fixed_point, solve_cmwu_fixed_point_from, FixedPointSettings,
};
use cmwu_core::metrics::sequence_regret;
use itertools::Itertools;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_strategy(rng: &mut ChaCha8Rng, m: usize) -> MixedStrategy {
    let weights: Vec<f64> = (0..m).map(|_| 0.01 + rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum();
    MixedStrategy::new(weights.into_iter().map(|w| w / total).collect()).unwrap()
}

fn random_profile(rng: &mut ChaCha8Rng, game: &NormalFormGame) -> StrategyProfile {
    StrategyProfile::new(
        game.action_counts()
            .iter()
            .map(|&m| random_strategy(rng, m))
            .collect(),
    )
    .unwrap()
}

fn random_game(rng: &mut ChaCha8Rng, counts: &[usize]) -> NormalFormGame {
    let num_profiles: usize = counts.iter().product();
    let tensors = (0..counts.len())
        .map(|_| (0..num_profiles).map(|_| rng.gen::<f64>()).collect())
        .collect();
    NormalFormGame::new(counts.to_vec(), tensors).unwrap()
}

/// Reference evaluator: direct sum over the cartesian product of action sets,
/// with its own index arithmetic.
fn oracle_expected_utility(game: &NormalFormGame, player: usize, x: &StrategyProfile) -> f64 {
    game.action_counts()
        .iter()
        .map(|&m| 0..m)
        .multi_cartesian_product()
        .map(|profile| {
            let weight: f64 = profile
                .iter()
                .enumerate()
                .map(|(j, &s)| x.player(j).probs()[s])
                .product();
            let flat = profile
                .iter()
                .zip(game.action_counts())
                .fold(0usize, |acc, (&s, &m)| acc * m + s);
            weight * game.tensor(player).unwrap()[flat]
        })
        .sum()
}

fn oracle_payoff_vector(game: &NormalFormGame, player: usize, x: &StrategyProfile) -> Vec<f64> {
    let mut values = vec![0.0; game.num_actions(player)];
    for profile in game
        .action_counts()
        .iter()
        .map(|&m| 0..m)
        .multi_cartesian_product()
    {
        let weight: f64 = profile
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != player)
            .map(|(j, &s)| x.player(j).probs()[s])
            .product();
        let flat = profile
            .iter()
            .zip(game.action_counts())
            .fold(0usize, |acc, (&s, &m)| acc * m + s);
        values[profile[player]] += weight * game.tensor(player).unwrap()[flat];
    }
    values
}

const SMALL_SHAPES: &[&[usize]] = &[
    &[2],
    &[5],
    &[256],
    &[3, 4],
    &[5, 5],
    &[16, 16],
    &[2, 3, 4],
    &[4, 4, 4],
    &[6, 6, 6],
    &[2, 2, 2, 2],
    &[3, 3, 3, 3],
    &[2, 2, 3, 3, 3],
];

#[test]
fn evaluation_matches_brute_force_oracle_on_small_shapes() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0bac);
    for (case, &counts) in SMALL_SHAPES.iter().enumerate() {
        assert!(counts.iter().product::<usize>() <= 256);
        let game = random_game(&mut rng, counts);
        for trial in 0..4 {
            let x = random_profile(&mut rng, &game);
            for player in 0..game.num_players() {
                let fast = game.expected_utility(player, &x).unwrap();
                let slow = oracle_expected_utility(&game, player, &x);
                assert!(
                    (fast - slow).abs() <= 1e-12,
                    "case {case} trial {trial} player {player}: utility {fast} vs oracle {slow}"
                );
                let v = game.payoff_vector(player, &x).unwrap();
                let ov = oracle_payoff_vector(&game, player, &x);
                for (s, (a, b)) in v.values().iter().zip(&ov).enumerate() {
                    assert!(
                        (a - b).abs() <= 1e-12,
                        "case {case} trial {trial} player {player} action {s}: {a} vs {b}"
                    );
                }
            }
        }
    }
}

#[test]
fn utility_is_dot_of_payoff_vector_and_own_strategy() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd07);
    let mut pairs = 0;
    for &counts in SMALL_SHAPES {
        let game = random_game(&mut rng, counts);
        for _ in 0..10 {
            let x = random_profile(&mut rng, &game);
            for player in 0..game.num_players() {
                let u = game.expected_utility(player, &x).unwrap();
                let v = game.payoff_vector(player, &x).unwrap();
                let dot = v.expected_payoff(x.player(player)).unwrap();
                assert!(
                    (u - dot).abs() <= 1e-12,
                    "player {player} on shape {counts:?}: {u} vs {dot}"
                );
                pairs += 1;
            }
        }
    }
    assert!(pairs >= 100);
}

#[test]
fn utility_is_linear_in_own_strategy() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x11a);
    for &counts in &[&[3, 4][..], &[2, 3, 4][..]] {
        let game = random_game(&mut rng, counts);
        for _ in 0..20 {
            let base = random_profile(&mut rng, &game);
            for player in 0..game.num_players() {
                let a = random_strategy(&mut rng, game.num_actions(player));
                let b = random_strategy(&mut rng, game.num_actions(player));
                let alpha = rng.gen::<f64>();
                let blend = MixedStrategy::new(
                    a.probs()
                        .iter()
                        .zip(b.probs())
                        .map(|(pa, pb)| alpha * pa + (1.0 - alpha) * pb)
                        .collect(),
                )
                .unwrap();
                let with = |s: &MixedStrategy| {
                    let mut strategies: Vec<MixedStrategy> = base.strategies().to_vec();
                    strategies[player] = s.clone();
                    let x = StrategyProfile::new(strategies).unwrap();
                    game.expected_utility(player, &x).unwrap()
                };
                let lhs = with(&blend);
                let rhs = alpha * with(&a) + (1.0 - alpha) * with(&b);
                assert!((lhs - rhs).abs() <= 1e-12, "player {player}: {lhs} vs {rhs}");
            }
        }
    }
}

#[test]
fn payoff_vector_entries_stay_within_ceiling() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xce11);
    for &counts in SMALL_SHAPES {
        let game = random_game(&mut rng, counts);
        let x = random_profile(&mut rng, &game);
        for player in 0..game.num_players() {
            let v = game.payoff_vector(player, &x).unwrap();
            for &value in v.values() {
                assert!(value >= -1e-12);
                assert!(value <= game.payoff_ceiling() + 1e-12);
            }
        }
    }
}

#[test]
fn profile_distance_is_a_bounded_metric() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xd157);
    let game = random_game(&mut rng, &[3, 4, 5]);
    for _ in 0..50 {
        let x = random_profile(&mut rng, &game);
        let y = random_profile(&mut rng, &game);
        let z = random_profile(&mut rng, &game);
        let dxy = profile_distance(&x, &y).unwrap();
        assert!((0.0..=2.0).contains(&dxy));
        assert_eq!(dxy, profile_distance(&y, &x).unwrap());
        assert_eq!(profile_distance(&x, &x).unwrap(), 0.0);
        let dxz = profile_distance(&x, &z).unwrap();
        let dzy = profile_distance(&z, &y).unwrap();
        assert!(dxy <= dxz + dzy + 1e-12);
    }
}

fn strategy_and_two_payoffs() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>, f64)> {
    (2usize..=20).prop_flat_map(|m| {
        (
            prop::collection::vec(1e-6..1.0f64, m),
            prop::collection::vec(0.0..1.0f64, m),
            prop::collection::vec(0.0..1.0f64, m),
            0.0..1.0f64,
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    /// ‖f(v) − f(v')‖₁ ≤ 2η‖v − v'‖_∞ for every anchor in the simplex.
    #[test]
    fn mwu_step_is_payoff_lipschitz((weights, v1, v2, eta) in strategy_and_two_payoffs()) {
        let total: f64 = weights.iter().sum();
        let anchor = MixedStrategy::new(weights.iter().map(|w| w / total).collect()).unwrap();
        let p1 = PayoffVector::new(v1.clone()).unwrap();
        let p2 = PayoffVector::new(v2.clone()).unwrap();
        let out1 = mwu_step(&anchor, &p1, eta).unwrap();
        let out2 = mwu_step(&anchor, &p2, eta).unwrap();
        let lhs = out1.l1_distance(&out2).unwrap();
        let linf = p1.linf_distance(&p2).unwrap();
        prop_assert!(lhs <= 2.0 * eta * linf + 1e-9, "{lhs} > 2*{eta}*{linf}");
    }

    /// Outputs are probability vectors.
    #[test]
    fn mwu_step_outputs_are_normalized((weights, v1, _v2, eta) in strategy_and_two_payoffs()) {
        let total: f64 = weights.iter().sum();
        let anchor = MixedStrategy::new(weights.iter().map(|w| w / total).collect()).unwrap();
        let out = mwu_step(&anchor, &PayoffVector::new(v1).unwrap(), eta).unwrap();
        let sum: f64 = out.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-12);
        prop_assert!(out.probs().iter().all(|&p| p >= 0.0));
    }

    /// Adding a constant to every payoff entry does not change the step.
    #[test]
    fn mwu_step_is_shift_invariant(
        (weights, v1, _v2, eta) in strategy_and_two_payoffs(),
        shift in -5.0..5.0f64,
    ) {
        let total: f64 = weights.iter().sum();
        let anchor = MixedStrategy::new(weights.iter().map(|w| w / total).collect()).unwrap();
        let shifted: Vec<f64> = v1.iter().map(|v| v + shift).collect();
        let a = mwu_step(&anchor, &PayoffVector::new(v1).unwrap(), eta).unwrap();
        let b = mwu_step(&anchor, &PayoffVector::new(shifted).unwrap(), eta).unwrap();
        for (x, y) in a.probs().iter().zip(b.probs()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// D(G(x), G(x')) ≤ η·V·(n−1)·D(x, x') for any η, any anchors.
    #[test]
    fn profile_map_is_lipschitz_in_the_profile(
        seed in any::<u64>(),
        players in 2usize..=3,
        actions in 2usize..=5,
        eta in 0.0..1.0f64,
    ) {
        let game = generate_game(&GameKind::RandomUniform { players, actions }, seed).unwrap();
        let etas = vec![eta; players];
        let bound = contraction_modulus(&game, &etas).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let anchors = random_profile(&mut rng, &game);
        let x = random_profile(&mut rng, &game);
        let y = random_profile(&mut rng, &game);
        let gx = profile_map(&x, &anchors, &game, &etas).unwrap();
        let gy = profile_map(&y, &anchors, &game, &etas).unwrap();
        let lhs = profile_distance(&gx, &gy).unwrap();
        let rhs = bound * profile_distance(&x, &y).unwrap();
        prop_assert!(lhs <= rhs + 1e-9, "{lhs} > {rhs}");
    }

    /// An MWU sequence that folds its own round's payoffs into the exponent
    /// keeps regret at ln(m)/η against arbitrary payoff sequences.
    #[test]
    fn lookahead_mwu_meets_its_regret_bound(
        seed in any::<u64>(),
        m in 2usize..=8,
        rounds in 1usize..=60,
        eta in 0.05..1.0f64,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut z = MixedStrategy::uniform(m).unwrap();
        let mut history = Vec::with_capacity(rounds);
        let mut plays = Vec::with_capacity(rounds);
        for _ in 0..rounds {
            let payoffs =
                PayoffVector::new((0..m).map(|_| rng.gen::<f64>()).collect()).unwrap();
            z = btrl_z_update(&z, &payoffs, eta).unwrap();
            plays.push(z.clone());
            history.push(payoffs);
        }
        let entry = sequence_regret(&history, &plays).unwrap();
        let bound = (m as f64).ln() / eta;
        prop_assert!(entry.regret <= bound + 1e-9, "{} > {bound}", entry.regret);
    }
}

#[test]
fn fixed_point_solves_verify_and_agree() {
    for players in [2usize, 3] {
        for seed in 0..8u64 {
            let game = generate_game(&GameKind::RandomUniform { players, actions: 4 }, seed)
                .unwrap();
            let etas = vec![default_eta(&game); players];
            let settings = FixedPointSettings::default();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xf00d);
            let anchor = random_profile(&mut rng, &game);
            let outcome = solve_cmwu_fixed_point(&anchor, &game, &etas, &settings).unwrap();
            assert!(outcome.is_converged());
            let result = outcome.result();
            assert!(result.iterations <= 40, "{} iterations", result.iterations);

            // the reported residual is a genuine map residual at the profile
            let mapped = profile_map(&result.profile, &anchor, &game, &etas).unwrap();
            let residual = profile_distance(&result.profile, &mapped).unwrap();
            assert!(residual <= settings.tolerance);
            assert_eq!(residual, result.final_residual);

            // observed contraction ratios respect the modulus once the
            // iteration settles
            let modulus = contraction_modulus(&game, &etas).unwrap();
            for &ratio in result.contraction_estimates.iter().skip(1) {
                assert!(ratio >= 0.0);
                assert!(ratio <= modulus + 1e-6, "ratio {ratio} vs modulus {modulus}");
            }

            // uniqueness: a different warm start lands on the same point
            let start = random_profile(&mut rng, &game);
            let other = solve_cmwu_fixed_point_from(&anchor, &start, &game, &etas, &settings)
                .unwrap()
                .into_result();
            let gap = profile_distance(&result.profile, &other.profile).unwrap();
            assert!(gap <= 2.0 * settings.tolerance, "fixed points differ by {gap}");
        }
    }
}

#[test]
fn z_freezes_between_anchor_rounds() {
    let game = generate_game(&GameKind::RandomUniform { players: 2, actions: 4 }, 77).unwrap();
    let k = 3;
    let eta = default_eta(&game);
    let mut agents: Vec<CmwuAgentState> = (0..2)
        .map(|i| CmwuAgentState::new(i, 4, eta, k).unwrap())
        .collect();
    let mut oracle = PayoffOracle::new(&game);
    for t in 0..12 {
        let strategies: Vec<MixedStrategy> = agents
            .iter_mut()
            .map(|a| a.broadcast(t).unwrap())
            .collect();
        let profile = StrategyProfile::new(strategies).unwrap();
        oracle.post_profile(t, profile).unwrap();
        for agent in &mut agents {
            let before = agent.current_z().clone();
            let payoffs = oracle.own_payoffs(agent.player(), t).unwrap();
            agent.receive_payoffs(t, payoffs).unwrap();
            if t % k == 0 {
                assert_ne!(
                    *agent.current_z(),
                    before,
                    "round {t}: anchor update should move z in a generic game"
                );
            } else {
                assert_eq!(*agent.current_z(), before, "round {t}: z moved off-anchor");
            }
        }
    }
}

#[test]
fn within_block_iterate_distances_halve() {
    for seed in [5u64, 6, 7] {
        let game = generate_game(&GameKind::RandomUniform { players: 2, actions: 5 }, seed)
            .unwrap();
        let horizon = 256;
        let trajectory = run_dynamics(&game, horizon, &DynamicsOverrides::default()).unwrap();
        let k = trajectory.block_length();
        assert_eq!(k, default_block_length(horizon));
        for tau in 1..=trajectory.complete_blocks() {
            let start = (tau - 1) * k;
            let mut prev = profile_distance(
                trajectory.profile(start + 1),
                trajectory.profile(start),
            )
            .unwrap();
            for m in 2..k {
                let step = profile_distance(
                    trajectory.profile(start + m),
                    trajectory.profile(start + m - 1),
                )
                .unwrap();
                assert!(
                    step <= 0.5 * prev + 1e-12,
                    "seed {seed} block {tau} step {m}: {step} vs half of {prev}"
                );
                prev = step;
            }
        }
    }
}

#[test]
fn block_residuals_meet_geometric_bound() {
    for seed in [3u64, 4, 5] {
        for players in [2usize, 3] {
            let game = generate_game(&GameKind::RandomUniform { players, actions: 4 }, seed)
                .unwrap();
            let horizon = 512;
            let trajectory = run_dynamics(&game, horizon, &DynamicsOverrides::default()).unwrap();
            let k = trajectory.block_length();
            let bound = 8.0 / libm::exp2(k as f64);
            assert_eq!(trajectory.block_residuals().len(), trajectory.complete_blocks());
            for (tau, &residual) in trajectory.block_residuals().iter().enumerate() {
                assert!(
                    residual <= bound,
                    "seed {seed} n {players} block {}: {residual} > {bound}",
                    tau + 1
                );
            }
        }
    }
}
