//! Games, pure strategies and profiles, facility classification and the
//! flattening to single-unit games.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A multi-unit location game: player `i` places `counts[i]` facilities on
/// `[0, 1]`. Counts are kept in the order given.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "GameDoc", into = "GameDoc")]
pub struct Game {
    counts: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct GameDoc {
    counts: Vec<usize>,
}

impl TryFrom<GameDoc> for Game {
    type Error = Error;
    fn try_from(doc: GameDoc) -> Result<Self> {
        Game::new(doc.counts)
    }
}

impl From<Game> for GameDoc {
    fn from(g: Game) -> Self {
        GameDoc { counts: g.counts }
    }
}

impl Game {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidGame(
                "a game needs at least one player".into(),
            ));
        }
        if let Some(i) = counts.iter().position(|&c| c == 0) {
            return Err(Error::InvalidGame(format!(
                "player {} has no facilities; every count must be at least 1",
                i + 1
            )));
        }
        Ok(Game { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn players(&self) -> usize {
        self.counts.len()
    }

    pub fn count(&self, player: usize) -> usize {
        self.counts[player]
    }

    /// Total number of facilities.
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Whether counts are already in non-decreasing order.
    pub fn is_canonical(&self) -> bool {
        self.counts.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn is_single_unit(&self) -> bool {
        self.counts.iter().all(|&c| c == 1)
    }

    /// Player indices sorted by ascending count, ties kept in index order.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.players()).collect();
        order.sort_by_key(|&i| self.counts[i]);
        order
    }
}

impl std::fmt::Display for Game {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let counts: Vec<String> = self.counts.iter().map(|c| c.to_string()).collect();
        write!(f, "({},({}))", self.players(), counts.join(","))
    }
}

/// A player's pure strategy: strictly increasing locations in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Rational>", into = "Vec<Rational>")]
pub struct PureStrategy(Vec<Rational>);

impl TryFrom<Vec<Rational>> for PureStrategy {
    type Error = Error;
    fn try_from(v: Vec<Rational>) -> Result<Self> {
        PureStrategy::new(v)
    }
}

impl From<PureStrategy> for Vec<Rational> {
    fn from(s: PureStrategy) -> Self {
        s.0
    }
}

impl PureStrategy {
    pub fn new(locations: Vec<Rational>) -> Result<Self> {
        if locations.is_empty() {
            return Err(Error::InvalidStrategy(
                "a strategy needs at least one location".into(),
            ));
        }
        if let Some(x) = locations.iter().find(|x| !x.in_unit_interval()) {
            return Err(Error::InvalidStrategy(format!(
                "location {x} lies outside [0,1]"
            )));
        }
        if let Some(w) = locations.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::InvalidStrategy(format!(
                "locations must be strictly increasing, got {} then {}",
                w[0], w[1]
            )));
        }
        Ok(PureStrategy(locations))
    }

    /// Sorts the given locations first; duplicates are still rejected.
    pub fn from_unsorted(mut locations: Vec<Rational>) -> Result<Self> {
        locations.sort();
        PureStrategy::new(locations)
    }

    pub fn locations(&self) -> &[Rational] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: &Rational) -> bool {
        self.0.binary_search(x).is_ok()
    }
}

/// One pure strategy per player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "ProfileDoc", into = "ProfileDoc")]
pub struct PureProfile {
    strategies: Vec<PureStrategy>,
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    strategies: Vec<PureStrategy>,
}

impl TryFrom<ProfileDoc> for PureProfile {
    type Error = Error;
    fn try_from(doc: ProfileDoc) -> Result<Self> {
        PureProfile::new(doc.strategies)
    }
}

impl From<PureProfile> for ProfileDoc {
    fn from(p: PureProfile) -> Self {
        ProfileDoc {
            strategies: p.strategies,
        }
    }
}

impl PureProfile {
    pub fn new(strategies: Vec<PureStrategy>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::InvalidProfile(
                "a profile needs at least one player".into(),
            ));
        }
        Ok(PureProfile { strategies })
    }

    /// Builds a profile and checks it against `game`.
    pub fn for_game(game: &Game, strategies: Vec<PureStrategy>) -> Result<Self> {
        let profile = PureProfile::new(strategies)?;
        profile.check_game(game)?;
        Ok(profile)
    }

    pub fn check_game(&self, game: &Game) -> Result<()> {
        if self.strategies.len() != game.players() {
            return Err(Error::InvalidProfile(format!(
                "profile has {} strategies but the game has {} players",
                self.strategies.len(),
                game.players()
            )));
        }
        for (i, (s, &c)) in self.strategies.iter().zip(game.counts()).enumerate() {
            if s.len() != c {
                return Err(Error::InvalidProfile(format!(
                    "player {} has {} locations but owns {} facilities",
                    i + 1,
                    s.len(),
                    c
                )));
            }
        }
        Ok(())
    }

    /// The game whose counts match this profile's strategy lengths.
    pub fn game(&self) -> Game {
        Game {
            counts: self.strategies.iter().map(PureStrategy::len).collect(),
        }
    }

    pub fn strategies(&self) -> &[PureStrategy] {
        &self.strategies
    }

    pub fn strategy(&self, player: usize) -> &PureStrategy {
        &self.strategies[player]
    }

    pub fn players(&self) -> usize {
        self.strategies.len()
    }

    /// Every facility in (player, slot) order.
    pub fn facilities(&self) -> impl Iterator<Item = FacilityRef> + '_ {
        self.strategies.iter().enumerate().flat_map(|(player, s)| {
            s.locations()
                .iter()
                .enumerate()
                .map(move |(slot, x)| FacilityRef {
                    player,
                    slot,
                    position: x.clone(),
                })
        })
    }

    /// Distinct occupied positions in increasing order, each with the set of
    /// players located there.
    pub fn occupancy(&self) -> Vec<(Rational, BTreeSet<usize>)> {
        let mut by_pos: BTreeMap<Rational, BTreeSet<usize>> = BTreeMap::new();
        for f in self.facilities() {
            by_pos.entry(f.position).or_default().insert(f.player);
        }
        by_pos.into_iter().collect()
    }

    /// The set of selected locations `L(s)`.
    pub fn location_set(&self) -> BTreeSet<Rational> {
        self.facilities().map(|f| f.position).collect()
    }

    pub fn with_strategy(&self, player: usize, strategy: PureStrategy) -> PureProfile {
        let mut strategies = self.strategies.clone();
        strategies[player] = strategy;
        PureProfile { strategies }
    }

    /// The profile with the players listed in `order` (a permutation).
    pub fn permuted(&self, order: &[usize]) -> PureProfile {
        PureProfile {
            strategies: order.iter().map(|&i| self.strategies[i].clone()).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FacilityRef {
    pub player: usize,
    pub slot: usize,
    pub position: Rational,
}

/// The nearest occupied position on one side of a facility.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Neighbor {
    pub position: Rational,
    pub owners: BTreeSet<usize>,
}

/// Structural role of one facility within a profile.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacilityClass {
    pub is_lone: bool,
    /// Exactly one other player shares the position.
    pub is_paired: bool,
    pub is_peripheral: bool,
    pub left_neighbor: Option<Neighbor>,
    pub right_neighbor: Option<Neighbor>,
    /// All players at this position, including the owner.
    pub co_located_players: BTreeSet<usize>,
}

impl FacilityClass {
    /// Whether either neighboring position hosts a facility of `player`.
    pub fn has_neighbor_of(&self, player: usize) -> bool {
        [&self.left_neighbor, &self.right_neighbor]
            .into_iter()
            .flatten()
            .any(|n| n.owners.contains(&player))
    }
}

/// Classifies every facility of the profile as lone / paired / peripheral
/// and records its neighbors. Co-located facilities are not neighbors.
pub fn classify(profile: &PureProfile) -> BTreeMap<FacilityRef, FacilityClass> {
    let occupancy = profile.occupancy();
    let index: BTreeMap<&Rational, usize> = occupancy
        .iter()
        .enumerate()
        .map(|(j, (x, _))| (x, j))
        .collect();
    let last = occupancy.len() - 1;
    let neighbor = |j: usize| Neighbor {
        position: occupancy[j].0.clone(),
        owners: occupancy[j].1.clone(),
    };

    profile
        .facilities()
        .map(|f| {
            let j = index[&f.position];
            let here = &occupancy[j].1;
            let class = FacilityClass {
                is_lone: here.len() == 1,
                is_paired: here.len() == 2,
                is_peripheral: j == 0 || j == last,
                left_neighbor: (j > 0).then(|| neighbor(j - 1)),
                right_neighbor: (j < last).then(|| neighbor(j + 1)),
                co_located_players: here.clone(),
            };
            (f, class)
        })
        .collect()
}

/// The unique player owning strictly more than half of all facilities.
pub fn has_dominant_player(game: &Game) -> Option<usize> {
    let n = game.total();
    (0..game.players()).find(|&i| 2 * game.count(i) > n)
}

/// A single-unit game with one player per facility of the original game.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FlattenedPair {
    pub game: Game,
    pub profile: PureProfile,
    /// `back_map[k] = (player, slot)` of the facility that flattened player
    /// `k` stands for.
    pub back_map: Vec<(usize, usize)>,
}

impl FlattenedPair {
    pub fn index_of(&self, player: usize, slot: usize) -> Option<usize> {
        self.back_map.iter().position(|&p| p == (player, slot))
    }

    /// Regroups flattened locations into the original players' strategies.
    pub fn regroup(&self, original: &Game) -> Result<PureProfile> {
        let mut buckets: Vec<Vec<Rational>> = original
            .counts()
            .iter()
            .map(|&c| Vec::with_capacity(c))
            .collect();
        for (k, &(i, _)) in self.back_map.iter().enumerate() {
            buckets
                .get_mut(i)
                .ok_or_else(|| {
                    Error::InvalidProfile(format!("back map names unknown player {}", i + 1))
                })?
                .push(self.profile.strategy(k).locations()[0].clone());
        }
        let strategies = buckets
            .into_iter()
            .map(PureStrategy::from_unsorted)
            .collect::<Result<_>>()?;
        PureProfile::for_game(original, strategies)
    }
}

/// The canonical flattening: facilities in lexicographic (player, slot)
/// order become players `0..n`.
pub fn flatten(game: &Game, profile: &PureProfile) -> Result<FlattenedPair> {
    profile.check_game(game)?;
    let mut back_map = Vec::with_capacity(game.total());
    let mut strategies = Vec::with_capacity(game.total());
    for f in profile.facilities() {
        back_map.push((f.player, f.slot));
        strategies.push(PureStrategy(vec![f.position]));
    }
    Ok(FlattenedPair {
        game: Game {
            counts: vec![1; back_map.len()],
        },
        profile: PureProfile { strategies },
        back_map,
    })
}
