//! Seeded property battery behind the `verify` command.
//!
//! Each property draws its cases from its own ChaCha stream keyed off the
//! battery seed, so reruns reproduce identical margins and a reported
//! failure names the exact case. A margin is `observed - allowed`: negative
//! means the check held with room to spare, and the worst (largest) margin
//! over all cases is reported.
//!
//! A step-size override narrows what is checkable. Properties whose bounds
//! are stated only for the default step size report themselves as
//! not-applicable instead of failing, and outside the contraction regime the
//! fixed-point property reports observed non-convergence without calling it
//! a failure.

use cmwu_core::dynamics::{default_eta, run_dynamics, DynamicsOverrides, EtaChoice, Trajectory};
use cmwu_core::game::{generate_game, GameKind, MixedStrategy, NormalFormGame, PayoffVector, StrategyProfile};
use cmwu_core::learning::{
    contraction_modulus, mwu_step, profile_distance, profile_map, solve_cmwu_fixed_point,
    solve_cmwu_fixed_point_from, ContractionCheck, FixedPointSettings,
};
use cmwu_core::metrics::{
    anchor_regret, anchor_regret_bound, cce_gap, mwu_regret_bound, regret, z_sequence_regret,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Battery seed used when none is given.
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BatterySettings {
    pub seed: u64,
    /// Common step size replacing every drawn or default one.
    pub eta_override: Option<f64>,
    /// Fixed-point tolerance.
    pub tolerance: f64,
    /// Attempt fixed-point solves even when the map is not a contraction.
    pub lenient: bool,
}

impl Default for BatterySettings {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            eta_override: None,
            tolerance: 1e-10,
            lenient: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PropertyStatus {
    Pass,
    Fail,
    NotApplicable,
}

impl PropertyStatus {
    pub fn label(&self) -> &'static str {
        match self {
            PropertyStatus::Pass => "pass",
            PropertyStatus::Fail => "FAIL",
            PropertyStatus::NotApplicable => "not-applicable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct PropertyReport {
    pub name: &'static str,
    pub status: PropertyStatus,
    pub cases: usize,
    /// Worst `observed - allowed` over all cases; NaN when nothing ran.
    pub worst_margin: f64,
    /// Failing case, or why the property was not applicable.
    pub detail: String,
}

/// Tracks the worst margin and the description of the case attaining it.
struct WorstCase {
    margin: f64,
    detail: String,
    cases: usize,
}

impl WorstCase {
    fn new() -> Self {
        Self {
            margin: f64::NEG_INFINITY,
            detail: String::new(),
            cases: 0,
        }
    }

    fn record(&mut self, margin: f64, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if margin > self.margin || !margin.is_finite() {
            self.margin = margin;
            self.detail = describe();
        }
    }

    fn report(self, name: &'static str) -> PropertyReport {
        let failed = !(self.margin <= 0.0);
        PropertyReport {
            name,
            status: if failed { PropertyStatus::Fail } else { PropertyStatus::Pass },
            cases: self.cases,
            worst_margin: self.margin,
            detail: if failed { self.detail } else { String::new() },
        }
    }
}

fn not_applicable(name: &'static str, detail: String) -> PropertyReport {
    PropertyReport {
        name,
        status: PropertyStatus::NotApplicable,
        cases: 0,
        worst_margin: f64::NAN,
        detail,
    }
}

fn failure(name: &'static str, detail: String) -> PropertyReport {
    PropertyReport {
        name,
        status: PropertyStatus::Fail,
        cases: 0,
        worst_margin: f64::NAN,
        detail,
    }
}

fn rng_for(settings: &BatterySettings, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(settings.seed.wrapping_add(salt))
}

fn random_simplex(rng: &mut ChaCha8Rng, len: usize) -> MixedStrategy {
    let raw: Vec<f64> = (0..len).map(|_| rng.gen::<f64>() + 1e-12).collect();
    let total: f64 = raw.iter().sum();
    MixedStrategy::new(raw.into_iter().map(|w| w / total).collect()).expect("valid simplex point")
}

fn random_profile(rng: &mut ChaCha8Rng, game: &NormalFormGame) -> StrategyProfile {
    StrategyProfile::new(
        (0..game.num_players())
            .map(|p| random_simplex(rng, game.num_actions(p)))
            .collect(),
    )
    .expect("valid profile")
}

/// The six standing games the run-based properties share: n in {2,3} crossed
/// with m in {2,5,10}, horizon 2048.
const RUN_SHAPES: [(usize, usize); 6] = [(2, 2), (2, 5), (2, 10), (3, 2), (3, 5), (3, 10)];
const RUN_HORIZON: usize = 2048;
const RUN_SEED_SALT: u64 = 0x600D;

struct BatteryRun {
    players: usize,
    actions: usize,
    game: NormalFormGame,
    trajectory: Trajectory,
    etas: Vec<f64>,
}

/// Executes the six standing runs, or explains why they cannot run.
fn battery_runs(settings: &BatterySettings) -> Result<Vec<BatteryRun>, String> {
    if let Some(eta) = settings.eta_override {
        if eta <= 0.0 {
            return Err(format!("the block protocol needs a positive step size, got {eta}"));
        }
    }
    let eta_choice = match settings.eta_override {
        Some(eta) => EtaChoice::Common(eta),
        None => EtaChoice::Default,
    };
    let mut runs = Vec::new();
    for (index, &(players, actions)) in RUN_SHAPES.iter().enumerate() {
        let kind = GameKind::RandomUniform { players, actions };
        let game = generate_game(&kind, settings.seed.wrapping_add(RUN_SEED_SALT + index as u64))
            .map_err(|e| e.to_string())?;
        let overrides = DynamicsOverrides {
            eta: eta_choice.clone(),
            block_length: None,
        };
        let trajectory = run_dynamics(&game, RUN_HORIZON, &overrides).map_err(|e| e.to_string())?;
        let etas = trajectory.etas().to_vec();
        runs.push(BatteryRun {
            players,
            actions,
            game,
            trajectory,
            etas,
        });
    }
    Ok(runs)
}

/// `||f(v) - f(v')||_1 <= 2 eta ||v - v'||_inf + 1e-9` over 1000 draws with
/// up to 20 actions and payoffs in [0, 1].
fn lipschitz_property(settings: &BatterySettings) -> PropertyReport {
    const NAME: &str = "mwu-step-lipschitz";
    let mut rng = rng_for(settings, 1);
    let mut worst = WorstCase::new();
    for case in 0..1000 {
        let m = rng.gen_range(2..=20);
        let anchor = random_simplex(&mut rng, m);
        let v: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let w: Vec<f64> = (0..m).map(|_| rng.gen::<f64>()).collect();
        let eta = settings.eta_override.unwrap_or_else(|| rng.gen::<f64>());
        let v = PayoffVector::new(v).expect("finite payoffs");
        let w = PayoffVector::new(w).expect("finite payoffs");
        let fv = mwu_step(&anchor, &v, eta).expect("step succeeds");
        let fw = mwu_step(&anchor, &w, eta).expect("step succeeds");
        let lhs = fv.l1_distance(&fw).expect("same shape");
        let allowed = 2.0 * eta * v.linf_distance(&w).expect("same shape") + 1e-9;
        worst.record(lhs - allowed, || {
            format!("case {case}: m={m}, eta={eta}, ||f(v)-f(v')||_1={lhs} > allowed {allowed}")
        });
    }
    worst.report(NAME)
}

/// `D(G(x), G(x')) <= eta V (n-1) D(x, x') + 1e-9` over 200 draws with
/// n in {2,3}. Not checkable as a contraction statement when an override
/// pushes the modulus to 1 or beyond.
fn contraction_property(settings: &BatterySettings) -> PropertyReport {
    const NAME: &str = "profile-map-contraction";
    if let Some(eta) = settings.eta_override {
        // Battery games have V = 1 and up to three players.
        let modulus = eta * 2.0;
        if modulus >= 1.0 {
            return not_applicable(
                NAME,
                format!(
                    "step size {eta} gives modulus eta*V*(n-1) = {modulus} >= 1 on the battery's \
                     three-player games; the map is not a contraction there"
                ),
            );
        }
    }
    let mut rng = rng_for(settings, 2);
    let mut worst = WorstCase::new();
    for case in 0..200 {
        let players = if rng.gen::<bool>() { 2 } else { 3 };
        let actions = rng.gen_range(2..=6);
        let kind = GameKind::RandomUniform { players, actions };
        let game = generate_game(&kind, rng.gen::<u64>()).expect("valid generator spec");
        let eta = settings.eta_override.unwrap_or_else(|| rng.gen::<f64>());
        let etas = vec![eta; players];
        let anchors = random_profile(&mut rng, &game);
        let x = random_profile(&mut rng, &game);
        let y = random_profile(&mut rng, &game);
        let gx = profile_map(&x, &anchors, &game, &etas).expect("map applies");
        let gy = profile_map(&y, &anchors, &game, &etas).expect("map applies");
        let lhs = profile_distance(&gx, &gy).expect("same shape");
        let modulus = contraction_modulus(&game, &etas).expect("valid etas");
        let allowed = modulus * profile_distance(&x, &y).expect("same shape") + 1e-9;
        worst.record(lhs - allowed, || {
            format!(
                "case {case}: n={players}, m={actions}, eta={eta}, D(G(x),G(x'))={lhs} > allowed {allowed}"
            )
        });
    }
    worst.report(NAME)
}

/// Solves on eight random games and checks the returned residual against an
/// independent map application plus warm-start agreement within twice the
/// tolerance. Outside the contraction regime this property only reports
/// what happened.
fn fixed_point_property(settings: &BatterySettings) -> PropertyReport {
    const NAME: &str = "fixed-point-solver";
    let mut rng = rng_for(settings, 3);
    let solver = FixedPointSettings {
        tolerance: settings.tolerance,
        max_iterations: 3000,
        contraction_check: if settings.lenient {
            ContractionCheck::Lenient
        } else {
            ContractionCheck::Strict
        },
    };
    let shapes = [(2, 2), (2, 5), (2, 10), (2, 4), (3, 2), (3, 5), (3, 10), (3, 4)];
    let mut worst = WorstCase::new();
    let mut rejected = 0usize;
    let mut capped = 0usize;
    let mut bad_modulus = f64::NEG_INFINITY;
    for (index, &(players, actions)) in shapes.iter().enumerate() {
        let kind = GameKind::RandomUniform { players, actions };
        let game = generate_game(&kind, rng.gen::<u64>()).expect("valid generator spec");
        let eta = settings.eta_override.unwrap_or_else(|| default_eta(&game));
        let etas = vec![eta; players];
        let modulus = contraction_modulus(&game, &etas).expect("valid etas");
        let anchor = random_profile(&mut rng, &game);
        let outcome = match solve_cmwu_fixed_point(&anchor, &game, &etas, &solver) {
            Ok(outcome) => outcome,
            Err(_) => {
                rejected += 1;
                bad_modulus = bad_modulus.max(modulus);
                continue;
            }
        };
        if !outcome.is_converged() {
            capped += 1;
            bad_modulus = bad_modulus.max(modulus);
            if modulus >= 1.0 {
                continue;
            }
        }
        let result = outcome.into_result();
        let image = profile_map(&result.profile, &anchor, &game, &etas).expect("map applies");
        let residual = profile_distance(&result.profile, &image).expect("same shape");
        worst.record(residual - solver.tolerance, || {
            format!(
                "game {index}: n={players}, m={actions}, eta={eta}, returned residual {residual} \
                 exceeds tolerance {}",
                solver.tolerance
            )
        });
        let warm = random_profile(&mut rng, &game);
        if let Ok(second) = solve_cmwu_fixed_point_from(&anchor, &warm, &game, &etas, &solver) {
            let gap = profile_distance(&result.profile, &second.result().profile)
                .expect("same shape");
            worst.record(gap - 2.0 * solver.tolerance, || {
                format!(
                    "game {index}: n={players}, m={actions}, eta={eta}, warm starts disagree by \
                     {gap} > 2*tolerance"
                )
            });
        }
    }
    if rejected > 0 {
        return not_applicable(
            NAME,
            format!(
                "strict contraction check rejected {rejected}/{} solves (worst modulus \
                 {bad_modulus}); rerun with --lenient-contraction to attempt them",
                shapes.len()
            ),
        );
    }
    if capped > 0 && bad_modulus >= 1.0 {
        return not_applicable(
            NAME,
            format!(
                "solver hit the iteration cap on {capped}/{} games (worst modulus {bad_modulus} \
                 >= 1); non-convergence outside the contraction regime is expected",
                shapes.len()
            ),
        );
    }
    if capped > 0 {
        return failure(
            NAME,
            format!(
                "solver hit the iteration cap on {capped}/{} games despite modulus {bad_modulus} < 1",
                shapes.len()
            ),
        );
    }
    worst.report(NAME)
}

/// Every recorded block residual obeys `D(x, z) <= 8/2^k`. The geometric
/// argument needs a contraction factor of at most one half, so overrides
/// beyond that are out of scope.
fn block_residual_property(
    settings: &BatterySettings,
    runs: &Result<Vec<BatteryRun>, String>,
) -> PropertyReport {
    const NAME: &str = "block-residual-decay";
    let runs = match runs {
        Ok(runs) => runs,
        Err(reason) => return not_applicable(NAME, reason.clone()),
    };
    if let Some(eta) = settings.eta_override {
        let worst_modulus = runs
            .iter()
            .map(|r| eta * r.game.payoff_ceiling() * (r.players as f64 - 1.0))
            .fold(f64::NEG_INFINITY, f64::max);
        if worst_modulus > 0.5 {
            return not_applicable(
                NAME,
                format!(
                    "step size {eta} gives modulus {worst_modulus} > 1/2 on the battery games; \
                     the 8/2^k residual bound needs a halving contraction"
                ),
            );
        }
    }
    let mut worst = WorstCase::new();
    for run in runs {
        let k = run.trajectory.block_length();
        let allowed = 8.0 / (k as f64).exp2();
        for (index, &residual) in run.trajectory.block_residuals().iter().enumerate() {
            worst.record(residual - allowed, || {
                format!(
                    "n={}, m={}, block {}: residual {residual} exceeds 8/2^{k} = {allowed}",
                    run.players,
                    run.actions,
                    index + 1
                )
            });
        }
    }
    worst.report(NAME)
}

/// Anchor-subsequence regret stays within `12 n V ln m` on the standing
/// runs. The constant is tied to the default step size, so it is
/// not-applicable under an override.
fn anchor_regret_property(
    settings: &BatterySettings,
    runs: &Result<Vec<BatteryRun>, String>,
) -> PropertyReport {
    const NAME: &str = "anchor-regret-bound";
    if settings.eta_override.is_some() {
        return not_applicable(
            NAME,
            String::from("the 12nV ln m anchor bound is stated for the default step size 1/(2nV)"),
        );
    }
    let runs = match runs {
        Ok(runs) => runs,
        Err(reason) => return not_applicable(NAME, reason.clone()),
    };
    let mut worst = WorstCase::new();
    for run in runs {
        let allowed = anchor_regret_bound(&run.game);
        for agent in 0..run.players {
            let entry = anchor_regret(&run.game, &run.trajectory, agent).expect("regret computes");
            worst.record(entry.regret - allowed, || {
                format!(
                    "n={}, m={}, agent {agent}: anchor regret {} exceeds {allowed}",
                    run.players, run.actions, entry.regret
                )
            });
        }
    }
    worst.report(NAME)
}

/// The anchored z sequence keeps regret within `ln m / eta` at any positive
/// step size.
fn z_regret_property(
    _settings: &BatterySettings,
    runs: &Result<Vec<BatteryRun>, String>,
) -> PropertyReport {
    const NAME: &str = "z-sequence-regret-bound";
    let runs = match runs {
        Ok(runs) => runs,
        Err(reason) => return not_applicable(NAME, reason.clone()),
    };
    let mut worst = WorstCase::new();
    for run in runs {
        for agent in 0..run.players {
            let entry = z_sequence_regret(&run.game, &run.trajectory, agent)
                .expect("block trajectory carries z snapshots");
            let allowed = mwu_regret_bound(run.game.num_actions(agent), run.etas[agent]) + 1e-9;
            worst.record(entry.regret - allowed, || {
                format!(
                    "n={}, m={}, agent {agent}: z regret {} exceeds ln(m)/eta = {allowed}",
                    run.players, run.actions, entry.regret
                )
            });
        }
    }
    worst.report(NAME)
}

/// The gap of the uniform average equals regret/T per agent to 1e-10, over
/// 50 random games and play sequences.
fn gap_identity_property(settings: &BatterySettings) -> PropertyReport {
    const NAME: &str = "average-gap-equals-average-regret";
    let mut rng = rng_for(settings, 6);
    let mut worst = WorstCase::new();
    for case in 0..50 {
        let players = if rng.gen::<bool>() { 2 } else { 3 };
        let actions = rng.gen_range(2..=6);
        let kind = GameKind::RandomUniform { players, actions };
        let game = generate_game(&kind, rng.gen::<u64>()).expect("valid generator spec");
        let horizon = rng.gen_range(1..=30);
        let profiles: Vec<StrategyProfile> =
            (0..horizon).map(|_| random_profile(&mut rng, &game)).collect();
        let gaps = cce_gap(&game, &profiles, None).expect("gap computes");
        for agent in 0..players {
            let entry = regret(&game, &profiles, agent).expect("regret computes");
            let diff = (gaps.per_agent_gap[agent] - entry.regret / horizon as f64).abs();
            worst.record(diff - 1e-10, || {
                format!(
                    "case {case}: n={players}, m={actions}, T={horizon}, agent {agent}: \
                     |gap - regret/T| = {diff}"
                )
            });
        }
    }
    worst.report(NAME)
}

/// Runs the whole battery in a fixed order.
pub fn run_battery(settings: &BatterySettings) -> Vec<PropertyReport> {
    let runs = battery_runs(settings);
    vec![
        lipschitz_property(settings),
        contraction_property(settings),
        fixed_point_property(settings),
        block_residual_property(settings, &runs),
        anchor_regret_property(settings, &runs),
        z_regret_property(settings, &runs),
        gap_identity_property(settings),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_battery_passes_everything() {
        let reports = run_battery(&BatterySettings::default());
        assert_eq!(reports.len(), 7);
        for report in &reports {
            assert_eq!(
                report.status,
                PropertyStatus::Pass,
                "{} failed: {}",
                report.name,
                report.detail
            );
            assert!(report.worst_margin <= 0.0, "{}: {}", report.name, report.worst_margin);
            assert!(report.cases > 0);
        }
    }

    #[test]
    fn battery_margins_are_reproducible() {
        let a = run_battery(&BatterySettings::default());
        let b = run_battery(&BatterySettings::default());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.worst_margin.to_bits(), y.worst_margin.to_bits());
            assert_eq!(x.cases, y.cases);
        }
    }

    #[test]
    fn oversized_step_size_reports_not_applicable_in_lenient_mode() {
        // eta = 10/((n-1)V) on the two-player battery games: modulus 10.
        let settings = BatterySettings {
            eta_override: Some(10.0),
            lenient: true,
            ..BatterySettings::default()
        };
        let reports = run_battery(&settings);
        let by_name = |name: &str| reports.iter().find(|r| r.name == name).unwrap();
        assert_eq!(by_name("profile-map-contraction").status, PropertyStatus::NotApplicable);
        assert_eq!(by_name("anchor-regret-bound").status, PropertyStatus::NotApplicable);
        assert_eq!(by_name("block-residual-decay").status, PropertyStatus::NotApplicable);
        let solver = by_name("fixed-point-solver");
        assert_eq!(solver.status, PropertyStatus::NotApplicable);
        assert!(solver.detail.contains("iteration cap"), "{}", solver.detail);
        // The lookahead bound and the averaging identity hold at any step size.
        assert_eq!(by_name("z-sequence-regret-bound").status, PropertyStatus::Pass);
        assert_eq!(by_name("average-gap-equals-average-regret").status, PropertyStatus::Pass);
        // Without the lenient flag the solver refuses instead of attempting.
        let strict = BatterySettings {
            eta_override: Some(10.0),
            lenient: false,
            ..BatterySettings::default()
        };
        let reports = run_battery(&strict);
        let solver = reports.iter().find(|r| r.name == "fixed-point-solver").unwrap();
        assert_eq!(solver.status, PropertyStatus::NotApplicable);
        assert!(solver.detail.contains("lenient"), "{}", solver.detail);
    }
}
