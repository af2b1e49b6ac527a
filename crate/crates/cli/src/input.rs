//! Parsing of game specs, inline locations and profile files.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use hotelling::mixed::{MixedProfile, MixedStrategy};
use hotelling::{Game, PureProfile, PureStrategy, Rational};
use serde_json::Value;

/// A profile file: either `{"strategies": ...}` or `{"mixed": ...}`.
#[derive(Debug, Clone)]
pub enum ProfileFile {
    Pure(PureProfile),
    Mixed(MixedProfile),
}

impl ProfileFile {
    pub fn game(&self) -> Game {
        match self {
            ProfileFile::Pure(p) => p.game(),
            ProfileFile::Mixed(m) => m.game(),
        }
    }

    pub fn to_mixed(&self) -> MixedProfile {
        match self {
            ProfileFile::Pure(p) => MixedProfile::from_pure(p),
            ProfileFile::Mixed(m) => m.clone(),
        }
    }

    /// Collapses point-mass mixed profiles to pure ones.
    pub fn normalized(self) -> ProfileFile {
        match self {
            ProfileFile::Mixed(m) => match m.as_pure() {
                Some(p) => ProfileFile::Pure(p),
                None => ProfileFile::Mixed(m),
            },
            pure => pure,
        }
    }
}

/// Parses `"1,2,2"` into a game.
pub fn parse_game(spec: &str) -> Result<Game> {
    let counts = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad facility count {t:?} in game spec {spec:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Game::new(counts)?)
}

pub fn parse_rational(text: &str) -> Result<Rational> {
    text.parse().map_err(|e| anyhow!("{e}"))
}

/// Parses `"1/4,3/4"` into rationals.
pub fn parse_locations(text: &str) -> Result<Vec<Rational>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(parse_rational)
        .collect()
}

/// Parses inline opponents: players separated by `;`, locations by `,`.
pub fn parse_inline_opponents(text: &str) -> Result<Vec<MixedStrategy>> {
    text.split(';')
        .map(|player| {
            let xs = parse_locations(player)?;
            Ok(MixedStrategy::pure(PureStrategy::from_unsorted(xs)?))
        })
        .collect()
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn parse_profile_text(text: &str, origin: &str) -> Result<ProfileFile> {
    let value: Value =
        serde_json::from_str(text).with_context(|| format!("{origin}: not valid JSON"))?;
    let typed =
        |e: serde_json::Error| anyhow!("{origin}: line {}, column {}: {e}", e.line(), e.column());
    match value {
        Value::Object(ref map) if map.contains_key("strategies") => Ok(ProfileFile::Pure(
            serde_json::from_str(text).map_err(typed)?,
        )),
        Value::Object(ref map) if map.contains_key("mixed") => Ok(ProfileFile::Mixed(
            serde_json::from_str(text).map_err(typed)?,
        )),
        _ => bail!("{origin}: expected an object with a \"strategies\" or \"mixed\" field"),
    }
}

pub fn read_profile(path: &Path) -> Result<ProfileFile> {
    parse_profile_text(&read(path)?, &path.display().to_string())
}

/// Opponents given either inline or as a profile file.
pub fn read_opponents(spec: &str) -> Result<Vec<MixedStrategy>> {
    let path = Path::new(spec);
    if path.exists() {
        return Ok(read_profile(path)?.to_mixed().mixed);
    }
    parse_inline_opponents(spec)
        .with_context(|| format!("{spec:?} is neither a file nor an inline location list"))
}
