//! Experiment configuration: game sources, dynamics selection, output options.

use std::fmt;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use cmwu_core::game::{generate_game, GameKind, NamedGame, NormalFormGame};

use crate::gamefile;

/// Where the game under study comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GameSource {
    /// Built by the deterministic generator.
    Generated(GameKind),
    /// Loaded from a game file.
    File(PathBuf),
}

impl GameSource {
    /// Parses a `--game` argument.
    ///
    /// Recognized spellings:
    /// - `named:matching-pennies` (catalog games)
    /// - `random:n=2,m=10` or `random-uniform:n=2,m=10`
    /// - `zero-sum-2p:m=5`
    /// - anything else is treated as a path to a game file
    pub fn parse(text: &str) -> Result<GameSource> {
        if let Some(name) = text.strip_prefix("named:") {
            let named = NamedGame::from_name(name).ok_or_else(|| {
                let catalog: Vec<&str> = NamedGame::ALL.iter().map(|g| g.name()).collect();
                anyhow!(
                    "unknown named game {name:?}; the catalog has: {}",
                    catalog.join(", ")
                )
            })?;
            return Ok(GameSource::Generated(GameKind::Named(named)));
        }
        if let Some(spec) = text
            .strip_prefix("random-uniform:")
            .or_else(|| text.strip_prefix("random:"))
        {
            let fields = parse_fields(spec, &["n", "m"])
                .with_context(|| format!("bad random game spec {text:?} (want random:n=2,m=10)"))?;
            return Ok(GameSource::Generated(GameKind::RandomUniform {
                players: fields[0],
                actions: fields[1],
            }));
        }
        if let Some(spec) = text.strip_prefix("zero-sum-2p:") {
            let fields = parse_fields(spec, &["m"])
                .with_context(|| format!("bad zero-sum spec {text:?} (want zero-sum-2p:m=5)"))?;
            return Ok(GameSource::Generated(GameKind::ZeroSumTwoPlayer {
                actions: fields[0],
            }));
        }
        Ok(GameSource::File(PathBuf::from(text)))
    }

    /// Whether instantiation draws random payoffs and therefore needs a seed.
    pub fn needs_seed(&self) -> bool {
        matches!(
            self,
            GameSource::Generated(GameKind::RandomUniform { .. })
                | GameSource::Generated(GameKind::ZeroSumTwoPlayer { .. })
        )
    }

    /// Builds the game, returning it with the stamp recorded in artifacts.
    pub fn instantiate(&self, seed: Option<u64>) -> Result<(NormalFormGame, GameStamp)> {
        match self {
            GameSource::Generated(kind) => {
                if self.needs_seed() && seed.is_none() {
                    bail!("game source {self} draws random payoffs; pass --seed");
                }
                let game = generate_game(kind, seed.unwrap_or(0))
                    .map_err(|e| anyhow!("cannot generate game {self}: {e}"))?;
                Ok((
                    game,
                    GameStamp {
                        spec: self.to_string(),
                        seed: if self.needs_seed() { seed } else { None },
                    },
                ))
            }
            GameSource::File(path) => {
                let game = gamefile::load_game(path)?;
                Ok((
                    game,
                    GameStamp {
                        spec: path.display().to_string(),
                        seed: None,
                    },
                ))
            }
        }
    }
}

impl fmt::Display for GameSource {
    /// Canonical spelling, so equivalent inputs stamp identical artifacts.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameSource::Generated(GameKind::Named(named)) => write!(f, "named:{}", named.name()),
            GameSource::Generated(GameKind::RandomUniform { players, actions }) => {
                write!(f, "random:n={players},m={actions}")
            }
            GameSource::Generated(GameKind::ZeroSumTwoPlayer { actions }) => {
                write!(f, "zero-sum-2p:m={actions}")
            }
            GameSource::File(path) => write!(f, "{}", path.display()),
        }
    }
}

/// Parses `key=value` fields in any order, all required, no extras.
fn parse_fields(spec: &str, keys: &[&str]) -> Result<Vec<usize>> {
    let mut values: Vec<Option<usize>> = vec![None; keys.len()];
    for part in spec.split(',') {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| anyhow!("field {part:?} is not key=value"))?;
        let slot = keys
            .iter()
            .position(|&k| k == key.trim())
            .ok_or_else(|| anyhow!("unknown field {key:?}"))?;
        if values[slot].is_some() {
            bail!("field {key:?} given twice");
        }
        values[slot] = Some(
            value
                .trim()
                .parse()
                .with_context(|| format!("field {key:?} is not a positive integer"))?,
        );
    }
    values
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| anyhow!("missing field {:?}", keys[i])))
        .collect()
}

/// How a game was obtained; stamped into every artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameStamp {
    /// Canonical source spelling (generator spec or file path).
    pub spec: String,
    /// Generator seed, when random payoffs were drawn.
    pub seed: Option<u64>,
}

/// Which dynamics `run` executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DynamicsChoice {
    /// Uncoupled block protocol.
    Cmwu,
    /// Classic explicit MWU baseline.
    Mwu,
    /// Centralized per-round fixed-point updates (not uncoupled).
    ExactCmwu,
}

impl DynamicsChoice {
    pub fn label(&self) -> &'static str {
        match self {
            DynamicsChoice::Cmwu => "cmwu",
            DynamicsChoice::Mwu => "mwu",
            DynamicsChoice::ExactCmwu => "exact-cmwu",
        }
    }
}

/// Artifact serialization format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Validated configuration for the `run` command.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub source: GameSource,
    pub seed: Option<u64>,
    pub dynamics: DynamicsChoice,
    /// Strictly increasing after validation.
    pub horizons: Vec<usize>,
    pub eta: Option<f64>,
    pub block_length: Option<usize>,
    pub tolerance: Option<f64>,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
    pub allow_nonconverged: bool,
    pub lenient_contraction: bool,
}

/// Validated configuration for the `rates` command.
#[derive(Debug, Clone)]
pub struct RatesConfig {
    pub source: GameSource,
    pub seed: Option<u64>,
    /// Strictly increasing, at least three entries.
    pub horizons: Vec<usize>,
    pub out_dir: PathBuf,
    pub formats: Vec<Format>,
}

/// Sorts ascending, drops duplicates, enforces a minimum count and value.
pub fn normalize_horizons(mut horizons: Vec<usize>, min_count: usize, min_value: usize) -> Result<Vec<usize>> {
    horizons.sort_unstable();
    horizons.dedup();
    if horizons.len() < min_count {
        bail!("need at least {min_count} distinct horizon(s) via --T, got {}", horizons.len());
    }
    if let Some(&first) = horizons.first() {
        if first < min_value {
            bail!("horizons must be at least {min_value}, got {first}");
        }
    }
    Ok(horizons)
}

/// Drops duplicate formats, defaulting to CSV when none were requested.
pub fn normalize_formats(formats: Vec<Format>) -> Vec<Format> {
    let mut out = Vec::new();
    for f in formats {
        if !out.contains(&f) {
            out.push(f);
        }
    }
    if out.is_empty() {
        out.push(Format::Csv);
    }
    out
}

/// Checks an optional numeric override for finiteness and sign.
pub fn validate_overrides(eta: Option<f64>, tolerance: Option<f64>) -> Result<()> {
    if let Some(e) = eta {
        if !e.is_finite() || e < 0.0 {
            bail!("--eta must be finite and nonnegative, got {e}");
        }
    }
    if let Some(t) = tolerance {
        if !t.is_finite() || t <= 0.0 {
            bail!("--tolerance must be finite and positive, got {t}");
        }
    }
    Ok(())
}
