//! On-disk game format: a versioned JSON document with per-player flat
//! payoff arrays.
//!
//! ```json
//! {
//!   "format": "cmwu-game/1",
//!   "players": 2,
//!   "actions": [2, 2],
//!   "payoffs": [[1.0, 0.0, 0.0, 1.0], [0.0, 1.0, 1.0, 0.0]]
//! }
//! ```
//!
//! Each payoff array is indexed in row-major pure-profile order with player
//! 0's action slowest, matching the in-memory tensor layout. The payoff
//! ceiling is not stored; the loader recomputes it from the entries.

use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use cmwu_core::game::NormalFormGame;
use serde::{Deserialize, Serialize};

pub const GAME_FORMAT: &str = "cmwu-game/1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameDoc {
    format: String,
    players: usize,
    actions: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

/// Reads and validates a game file.
pub fn load_game(path: &Path) -> Result<NormalFormGame> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read game file {}", path.display()))?;
    let doc: GameDoc = serde_json::from_str(&text)
        .with_context(|| format!("game file {} is not valid JSON for this format", path.display()))?;
    if doc.format != GAME_FORMAT {
        bail!(
            "game file {} declares format {:?}; this build reads {:?}",
            path.display(),
            doc.format,
            GAME_FORMAT
        );
    }
    if doc.players != doc.actions.len() {
        bail!(
            "game file {} declares {} players but lists {} action counts",
            path.display(),
            doc.players,
            doc.actions.len()
        );
    }
    NormalFormGame::new(doc.actions, doc.payoffs)
        .map_err(|e| anyhow::anyhow!("game file {} is invalid: {e}", path.display()))
}

/// Writes a game in the format `load_game` reads.
pub fn save_game(path: &Path, game: &NormalFormGame) -> Result<()> {
    let doc = GameDoc {
        format: GAME_FORMAT.to_string(),
        players: game.num_players(),
        actions: game.action_counts().to_vec(),
        payoffs: (0..game.num_players())
            .map(|p| game.tensor(p).expect("player index in range").to_vec())
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("game document serializes");
    text.push('\n');
    fs::write(path, text).with_context(|| format!("cannot write game file {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cmwu_core::game::{generate_game, GameKind};

    fn scratch_path(name: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("cmwu-gamefile-{}-{name}", std::process::id()))
    }

    #[test]
    fn round_trips_a_generated_game() {
        let game = generate_game(&GameKind::RandomUniform { players: 2, actions: 3 }, 11).unwrap();
        let path = scratch_path("roundtrip.json");
        save_game(&path, &game).unwrap();
        let loaded = load_game(&path).unwrap();
        assert_eq!(loaded.action_counts(), game.action_counts());
        assert_eq!(loaded.tensor(0).unwrap(), game.tensor(0).unwrap());
        assert_eq!(loaded.tensor(1).unwrap(), game.tensor(1).unwrap());
        assert_eq!(loaded.payoff_ceiling(), game.payoff_ceiling());
        let _ = fs::remove_file(path);
    }

    #[test]
    fn rejects_unknown_format_version() {
        let path = scratch_path("badversion.json");
        fs::write(
            &path,
            r#"{"format":"cmwu-game/2","players":1,"actions":[2],"payoffs":[[0.0,1.0]]}"#,
        )
        .unwrap();
        let err = load_game(&path).unwrap_err().to_string();
        assert!(err.contains("cmwu-game/1"), "error should name the supported format: {err}");
        let _ = fs::remove_file(path);
    }

    #[test]
    fn rejects_inconsistent_player_count() {
        let path = scratch_path("badplayers.json");
        fs::write(
            &path,
            r#"{"format":"cmwu-game/1","players":2,"actions":[2],"payoffs":[[0.0,1.0]]}"#,
        )
        .unwrap();
        assert!(load_game(&path).is_err());
        let _ = fs::remove_file(path);
    }

    #[test]
    fn rejects_negative_payoffs_and_unknown_fields() {
        let path = scratch_path("badentries.json");
        fs::write(
            &path,
            r#"{"format":"cmwu-game/1","players":1,"actions":[2],"payoffs":[[-1.0,1.0]]}"#,
        )
        .unwrap();
        assert!(load_game(&path).is_err());
        fs::write(
            &path,
            r#"{"format":"cmwu-game/1","players":1,"actions":[2],"payoffs":[[0.0,1.0]],"extra":1}"#,
        )
        .unwrap();
        assert!(load_game(&path).is_err());
        let _ = fs::remove_file(path);
    }
}
