//! Classification table over all small games.

use hotelling::equilibrium::{
    construct_pure, exists_pure, find_partition, multi_unit_conditions, ExistenceReason,
};
use hotelling::{has_dominant_player, Error, Game, PureProfile};
use serde::Serialize;

/// Largest total facility count the atlas accepts.
pub const MAX_TOTAL: usize = 16;

#[derive(Debug, Clone, Serialize)]
pub struct AtlasRow {
    pub counts: Vec<usize>,
    pub total: usize,
    pub players: usize,
    pub dominant: Option<usize>,
    pub pure_exists: bool,
    pub reason: ExistenceReason,
    /// Which pure constructor produced a profile, or why none applied.
    pub construction: String,
    /// Verdict of the verifier on the constructed profile.
    pub verified: Option<bool>,
    /// Block sizes of the mixed construction when its conditions hold.
    pub mixed_blocks: Option<Vec<usize>>,
    #[serde(skip)]
    pub profile: Option<PureProfile>,
}

/// Ascending count multisets with at least two parts and total in
/// `2..=max_n`, ordered by total and then lexicographically.
pub fn partitions(max_n: usize) -> Vec<Vec<usize>> {
    fn extend(rest: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            if cur.len() >= 2 {
                out.push(cur.clone());
            }
            return;
        }
        for part in min..=rest {
            cur.push(part);
            extend(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for n in 2..=max_n {
        extend(n, 1, &mut Vec::new(), &mut out);
    }
    out
}

pub fn row(counts: Vec<usize>) -> AtlasRow {
    let game = Game::new(counts.clone()).expect("positive counts");
    let existence = exists_pure(&game);
    let (construction, profile) = match construct_pure(&game) {
        Ok(p) => (
            if game.total().is_multiple_of(2) {
                "even"
            } else {
                "odd"
            }
            .to_string(),
            Some(p),
        ),
        Err(Error::ConstructionUnavailable(why)) => (format!("unavailable: {why}"), None),
        Err(e) => (format!("error: {e}"), None),
    };
    let verified = profile.as_ref().map(|p| {
        multi_unit_conditions(&game, p)
            .map(|cs| cs.iter().all(|c| c.passed))
            .unwrap_or(false)
    });
    let mixed_blocks = find_partition(&game).ok().flatten().map(|plan| plan.b);
    AtlasRow {
        total: game.total(),
        players: game.players(),
        dominant: has_dominant_player(&game),
        pure_exists: existence.exists,
        reason: existence.reason,
        construction,
        verified,
        mixed_blocks,
        profile,
        counts,
    }
}

pub fn rows(max_n: usize) -> Vec<AtlasRow> {
    partitions(max_n).into_iter().map(row).collect()
}

fn join(xs: &[usize]) -> String {
    xs.iter()
        .map(usize::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn to_csv(rows: &[AtlasRow]) -> String {
    let mut out = String::from(
        "counts,total,players,dominant,pure_exists,construction,verified,mixed_blocks\n",
    );
    for r in rows {
        let opt = |v: Option<String>| v.unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},\"{}\",{},{}\n",
            join(&r.counts),
            r.total,
            r.players,
            opt(r.dominant.map(|d| d.to_string())),
            r.pure_exists,
            r.construction.replace('"', "'"),
            opt(r.verified.map(|v| v.to_string())),
            opt(r.mixed_blocks.as_deref().map(join)),
        ));
    }
    out
}
