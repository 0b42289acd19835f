//! Game file schema.
//!
//! ```json
//! {
//!   "format": "anonlip-game",
//!   "version": 1,
//!   "n": 3,
//!   "k": 2,
//!   "payoffs": [[[...], [...]], ...]
//! }
//! ```
//!
//! `payoffs[i][j][r]` is player `i`'s payoff for action `j` (0-based) when
//! the other `n − 1` players' occupancy vector has lexicographic rank `r`
//! among all vectors of `k` nonnegative counts summing to `n − 1`, so rank 0
//! is `(0, …, 0, n − 1)`. Values must lie in `[0, 1]`. `format` and `version` may be omitted.

use std::path::Path;

use anonlip::{AnonymousGame, Error};
use serde::{Deserialize, Serialize};

pub const FORMAT: &str = "anonlip-game";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    #[serde(default = "default_format")]
    pub format: String,
    #[serde(default = "default_version")]
    pub version: u32,
    pub n: usize,
    pub k: usize,
    pub payoffs: Vec<Vec<Vec<f64>>>,
}

fn default_format() -> String {
    FORMAT.into()
}

fn default_version() -> u32 {
    VERSION
}

impl GameFile {
    pub fn from_game(g: &AnonymousGame) -> Self {
        GameFile {
            format: FORMAT.into(),
            version: VERSION,
            n: g.n(),
            k: g.k(),
            payoffs: g.to_nested(),
        }
    }

    pub fn into_game(self) -> Result<AnonymousGame, Error> {
        if self.format != FORMAT {
            return Err(Error::MalformedGame(format!("format must be \"{FORMAT}\", got \"{}\"", self.format)));
        }
        if self.version != VERSION {
            return Err(Error::MalformedGame(format!("unsupported version {}", self.version)));
        }
        AnonymousGame::new(self.n, self.k, self.payoffs)
    }
}

pub fn parse_game(text: &str) -> Result<AnonymousGame, Error> {
    let file: GameFile = serde_json::from_str(text).map_err(|e| Error::MalformedGame(e.to_string()))?;
    file.into_game()
}

pub fn read_game(path: &Path) -> Result<AnonymousGame, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MalformedGame(format!("{}: {e}", path.display())))?;
    parse_game(&text)
}
