//! Exact best responses against finite-support opponents.
//!
//! Fix the opponents' realized positions `y_1 < ... < y_r`. Inside a gap
//! `(a, b)` between consecutive opponent positions, own facilities at
//! `t_1 < ... < t_j` collect `(t_j - t_1)/2 + (b - a)/2`, which is
//! increasing in the spread and tends to `b - a` as `t_1 -> a+` and
//! `t_j -> b-`. The end gaps `[0, y_1)` and `(y_r, 1]` are supremized by a
//! single facility next to the opponent. Sharing `y` exactly is the only
//! other way to collect mass near `y`. So every supremum is approached by
//! locations drawn from `{y-, y, y+}` over opponent positions `y`. Against a
//! mixture the expected payoff is an average of such piecewise-linear
//! functions with breakpoints at support positions, so the same finite
//! family suffices. When a player has more facilities than candidates,
//! extra facilities can only add mass; they are parked at exact filler
//! points in the widest free gaps.
//!
//! Payoffs are evaluated in the limit `eps -> 0+` and reported together
//! with whether the supremum is attained by some exact placement.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::Game;
use crate::mixed::{mixed_payoff_capped, MixedProfile, MixedStrategy, DEFAULT_SUPPORT_CAP};
use crate::payoff::{own_limit_mass, OffsetLocation, Side};
use crate::rational::Rational;

/// Default cap on the number of candidate subsets searched exhaustively.
pub const DEFAULT_SEARCH_CAP: u128 = 100_000;

/// Maximizers tried when looking for an exact placement that attains the
/// supremum.
const REALIZE_LIMIT: usize = 1_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOptions {
    /// Largest number of candidate subsets enumerated exhaustively.
    pub cap: u128,
    /// Coordinate-ascent restarts used once the cap is exceeded.
    pub restarts: usize,
    pub seed: u64,
    /// Fall back to coordinate ascent above the cap instead of failing with
    /// [`Error::SearchTooLarge`].
    pub fallback: bool,
    /// Cap on the opponents' product support.
    pub support_cap: u128,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            cap: DEFAULT_SEARCH_CAP,
            restarts: 32,
            seed: 0,
            fallback: true,
            support_cap: DEFAULT_SUPPORT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BestResponse {
    #[serde(rename = "sup")]
    pub supremum: Rational,
    pub attained: bool,
    pub witness: Vec<OffsetLocation>,
    /// False when the search fell back to coordinate ascent; the supremum
    /// is then only a lower bound.
    pub exhaustive: bool,
}

impl BestResponse {
    pub fn against(self, current: Rational) -> DeviationResult {
        DeviationResult {
            gain: &self.supremum - &current,
            supremum: self.supremum,
            attained: self.attained,
            witness: self.witness,
            current,
            exhaustive: self.exhaustive,
        }
    }
}

/// A best response compared with the payoff currently obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeviationResult {
    #[serde(rename = "sup")]
    pub supremum: Rational,
    pub attained: bool,
    pub witness: Vec<OffsetLocation>,
    pub gain: Rational,
    pub current: Rational,
    pub exhaustive: bool,
}

impl DeviationResult {
    pub fn is_beneficial(&self) -> bool {
        self.gain.is_positive()
    }
}

/// Opponent positions as a distribution over sorted multisets.
struct Field {
    scenarios: Vec<(Vec<(Rational, u32)>, Rational)>,
    positions: BTreeSet<Rational>,
}

impl Field {
    fn new(opponents: &[MixedStrategy], support_cap: u128) -> Result<Self> {
        let size = opponents.iter().fold(1u128, |acc, m| {
            acc.saturating_mul(m.support().len() as u128)
        });
        if size > support_cap {
            return Err(Error::SupportTooLarge {
                size,
                cap: support_cap,
            });
        }
        let mut merged: BTreeMap<Vec<(Rational, u32)>, Rational> = BTreeMap::new();
        for entries in opponents
            .iter()
            .map(|m| m.support().iter())
            .multi_cartesian_product()
        {
            let mut counts: BTreeMap<Rational, u32> = BTreeMap::new();
            let mut prob = Rational::one();
            for e in entries {
                prob = prob * &e.prob;
                for x in e.strategy.locations() {
                    *counts.entry(x.clone()).or_default() += 1;
                }
            }
            *merged
                .entry(counts.into_iter().collect())
                .or_insert_with(Rational::zero) += prob;
        }
        let positions = opponents
            .iter()
            .flat_map(|m| m.support_positions())
            .collect();
        Ok(Field {
            scenarios: merged.into_iter().collect(),
            positions,
        })
    }

    fn value(&self, own: &[OffsetLocation]) -> Rational {
        self.scenarios
            .iter()
            .map(|(opp, prob)| own_limit_mass(opp, own) * prob)
            .sum()
    }

    /// Offset keys around every opponent position, padded with exact fillers
    /// up to `m` entries.
    fn candidates(&self, m: usize) -> Vec<OffsetLocation> {
        let one = Rational::one();
        let mut out = Vec::with_capacity(3 * self.positions.len());
        for x in &self.positions {
            if !x.is_zero() {
                out.push(OffsetLocation {
                    position: x.clone(),
                    side: Side::Below,
                });
            }
            out.push(OffsetLocation::exact(x.clone()));
            if *x != one {
                out.push(OffsetLocation {
                    position: x.clone(),
                    side: Side::Above,
                });
            }
        }
        let mut taken: BTreeSet<Rational> = self.positions.clone();
        taken.insert(Rational::zero());
        taken.insert(one);
        while out.len() < m {
            let pts: Vec<&Rational> = taken.iter().collect();
            let (lo, hi) = pts
                .windows(2)
                .map(|w| (w[0], w[1]))
                .fold(None::<(&Rational, &Rational)>, |best, (a, b)| match best {
                    Some((c, d)) if d - c >= b - a => Some((c, d)),
                    _ => Some((a, b)),
                })
                .expect("0 and 1 are always present");
            let x = lo.midpoint(hi);
            out.push(OffsetLocation::exact(x.clone()));
            taken.insert(x);
        }
        out.sort();
        out
    }
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn pick(cands: &[OffsetLocation], idx: &[usize]) -> Vec<OffsetLocation> {
    idx.iter().map(|&i| cands[i].clone()).collect()
}

/// Smallest positive spacing among the points, divided by four.
fn realization_offset(field: &Field, own: &[OffsetLocation]) -> Rational {
    let mut pts: BTreeSet<&Rational> = field
        .positions
        .iter()
        .chain(own.iter().map(|o| &o.position))
        .collect();
    let (zero, one) = (Rational::zero(), Rational::one());
    pts.insert(&zero);
    pts.insert(&one);
    let pts: Vec<&Rational> = pts.into_iter().collect();
    let gap = pts
        .windows(2)
        .map(|w| w[1] - w[0])
        .min()
        .expect("at least two points");
    gap / Rational::from(4)
}

/// Decides attainment for maximizers listed in lexicographic order.
fn resolve(
    field: &Field,
    cands: &[OffsetLocation],
    maximizers: &[Vec<usize>],
    sup: &Rational,
) -> (bool, Vec<OffsetLocation>) {
    if let Some(exact) = maximizers
        .iter()
        .find(|idx| idx.iter().all(|&i| cands[i].is_exact()))
    {
        return (true, pick(cands, exact));
    }
    for idx in maximizers.iter().take(REALIZE_LIMIT) {
        let own = pick(cands, idx);
        let delta = realization_offset(field, &own);
        let realized: Vec<OffsetLocation> = own
            .iter()
            .map(|o| OffsetLocation::exact(o.realize(&delta)))
            .collect();
        if field.value(&realized) == *sup {
            return (true, realized);
        }
    }
    (false, pick(cands, &maximizers[0]))
}

fn exhaustive_search(
    field: &Field,
    cands: &[OffsetLocation],
    m: usize,
) -> (Rational, Vec<Vec<usize>>) {
    let mut best: Option<Rational> = None;
    let mut maximizers = Vec::new();
    for idx in (0..cands.len()).combinations(m) {
        let v = field.value(&pick(cands, &idx));
        match &best {
            Some(b) if v < *b => {}
            Some(b) if v == *b => maximizers.push(idx),
            _ => {
                best = Some(v);
                maximizers = vec![idx];
            }
        }
    }
    (best.expect("at least one subset"), maximizers)
}

/// Best-improvement swaps from seeded random starts.
fn ascent_search(
    field: &Field,
    cands: &[OffsetLocation],
    m: usize,
    opts: &SearchOptions,
) -> (Rational, Vec<Vec<usize>>) {
    let mut best: Option<Rational> = None;
    let mut optima: BTreeSet<Vec<usize>> = BTreeSet::new();
    for r in 0..opts.restarts.max(1) {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(r as u64));
        let mut cur: Vec<usize> = sample(&mut rng, cands.len(), m).into_vec();
        cur.sort_unstable();
        let mut value = field.value(&pick(cands, &cur));
        loop {
            let mut step: Option<(Rational, Vec<usize>)> = None;
            for slot in 0..m {
                for c in 0..cands.len() {
                    if cur.binary_search(&c).is_ok() {
                        continue;
                    }
                    let mut next = cur.clone();
                    next[slot] = c;
                    next.sort_unstable();
                    let v = field.value(&pick(cands, &next));
                    let better = match &step {
                        Some((bv, bi)) => v > *bv || (v == *bv && next < *bi),
                        None => v > value,
                    };
                    if better && v > value {
                        step = Some((v, next));
                    }
                }
            }
            match step {
                Some((v, next)) => {
                    value = v;
                    cur = next;
                }
                None => break,
            }
        }
        match &best {
            Some(b) if value < *b => {}
            Some(b) if value == *b => {
                optima.insert(cur);
            }
            _ => {
                best = Some(value);
                optima = BTreeSet::from([cur]);
            }
        }
    }
    (
        best.expect("at least one restart"),
        optima.into_iter().collect(),
    )
}

/// Supremum of the expected payoff of a player with `m` facilities against
/// the given opponents, ties broken towards the lexicographically smallest
/// witness.
pub fn best_response(
    opponents: &[MixedStrategy],
    m: usize,
    opts: &SearchOptions,
) -> Result<BestResponse> {
    if m == 0 {
        return Err(Error::InvalidInput(
            "a player needs at least one facility".into(),
        ));
    }
    let field = Field::new(opponents, opts.support_cap)?;
    let cands = field.candidates(m);
    let size = binomial(cands.len(), m);
    let exhaustive = size <= opts.cap;
    if !exhaustive && !opts.fallback {
        return Err(Error::SearchTooLarge {
            size,
            cap: opts.cap,
        });
    }
    let (supremum, maximizers) = if exhaustive {
        exhaustive_search(&field, &cands, m)
    } else {
        ascent_search(&field, &cands, m, opts)
    };
    let (attained, witness) = resolve(&field, &cands, &maximizers, &supremum);
    Ok(BestResponse {
        supremum,
        attained,
        witness,
        exhaustive,
    })
}

/// Exact best response restricted to the grid `{0, 1/r, ..., 1}`.
pub fn grid_best_response(
    opponents: &[MixedStrategy],
    m: usize,
    resolution: usize,
    cap: u128,
) -> Result<BestResponse> {
    if resolution < 2 {
        return Err(Error::InvalidInput(format!(
            "grid resolution must be at least 2, got {resolution}"
        )));
    }
    if m == 0 || m > resolution + 1 {
        return Err(Error::InvalidInput(format!(
            "cannot place {m} facilities on the grid"
        )));
    }
    let size = binomial(resolution + 1, m);
    if size > cap {
        return Err(Error::SearchTooLarge { size, cap });
    }
    let field = Field::new(opponents, DEFAULT_SUPPORT_CAP)?;
    let points: Vec<OffsetLocation> = (0..=resolution)
        .map(|j| OffsetLocation::exact(Rational::new(j as i64, resolution as i64)))
        .collect();
    let (supremum, maximizers) = exhaustive_search(&field, &points, m);
    Ok(BestResponse {
        supremum,
        attained: true,
        witness: pick(&points, &maximizers[0]),
        exhaustive: true,
    })
}

/// Expected limit payoff of `own` against independent mixed opponents.
pub fn expected_limit_payoff(
    opponents: &[MixedStrategy],
    own: &[OffsetLocation],
) -> Result<Rational> {
    if own.is_empty() {
        return Err(Error::InvalidDeviation(
            "deviation places no facilities".into(),
        ));
    }
    for o in own {
        OffsetLocation::new(o.position.clone(), o.side)?;
    }
    let mut sorted = own.to_vec();
    sorted.sort();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidDeviation(format!(
            "location {} used twice",
            w[0]
        )));
    }
    Ok(Field::new(opponents, DEFAULT_SUPPORT_CAP)?.value(&sorted))
}

/// One best response per player against the others' strategies.
pub fn certify_no_deviation(
    game: &Game,
    profile: &MixedProfile,
    opts: &SearchOptions,
) -> Result<Vec<DeviationResult>> {
    let current = mixed_payoff_capped(game, profile, opts.support_cap)?;
    (0..game.players())
        .map(|i| deviation_for(game, profile, i, current[i].clone(), opts))
        .collect()
}

/// Best response of one player against the rest of the profile.
pub fn player_deviation(
    game: &Game,
    profile: &MixedProfile,
    player: usize,
    opts: &SearchOptions,
) -> Result<DeviationResult> {
    if player >= game.players() {
        return Err(Error::InvalidInput(format!("no player {}", player + 1)));
    }
    let current = mixed_payoff_capped(game, profile, opts.support_cap)?;
    deviation_for(game, profile, player, current[player].clone(), opts)
}

fn deviation_for(
    game: &Game,
    profile: &MixedProfile,
    player: usize,
    current: Rational,
    opts: &SearchOptions,
) -> Result<DeviationResult> {
    let others: Vec<MixedStrategy> = profile
        .mixed
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != player)
        .map(|(_, s)| s.clone())
        .collect();
    Ok(best_response(&others, game.count(player), opts)?.against(current))
}
