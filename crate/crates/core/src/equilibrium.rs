//! Equilibrium verification, existence classification and constructors.
//!
//! The pure verifiers check structural conditions only; the best-response
//! oracle is consulted afterwards to attach a concrete beneficial deviation
//! to a failing report, never to decide the verdict.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Unavailable};
use crate::game::{classify, flatten, has_dominant_player, Game, PureProfile, PureStrategy};
use crate::mixed::{is_soi, uniform_subsets, MixedProfile, MixedStrategy, SoiFailure};
use crate::oracle::{player_deviation, DeviationResult, SearchOptions};
use crate::payoff::{masses, Side};
use crate::rational::Rational;

/// The `k` socially optimal locations `(2i - 1)/(2k)`.
pub fn optimal_locations(k: usize) -> Result<Vec<Rational>> {
    if k == 0 {
        return Err(Error::InvalidInput("need at least one location".into()));
    }
    Ok((1..=k)
        .map(|i| Rational::new(2 * i as i64 - 1, 2 * k as i64))
        .collect())
}

/// Identifier of a checked condition.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Both extreme positions host at least two facilities.
    PairedExtremes,
    /// Every payoff is at least the largest one-sided catchment.
    PayoffCoversSides,
    /// No lone facility has a facility of its owner next to it.
    NoOwnNeighbor,
    /// All facilities of a player attract the same mass.
    EqualMasses,
    /// The one-facility-per-player flattening is an equilibrium.
    FlattenedEquilibrium,
    /// The first player's strategy is socially optimal in expectation.
    SociallyOptimalMixture,
    /// The second player plays the socially optimal locations.
    OptimalLocations,
}

impl Condition {
    pub fn describe(self) -> &'static str {
        match self {
            Condition::PairedExtremes => "both extreme positions host at least two facilities",
            Condition::PayoffCoversSides => "every payoff is at least every one-sided catchment",
            Condition::NoOwnNeighbor => "no lone facility neighbors a facility of the same player",
            Condition::EqualMasses => "all facilities of each player attract the same mass",
            Condition::FlattenedEquilibrium => {
                "the flattened single-unit profile is an equilibrium"
            }
            Condition::SociallyOptimalMixture => {
                "player 1 puts mass l/k on every socially optimal location"
            }
            Condition::OptimalLocations => "player 2 plays the socially optimal locations",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum End {
    Left,
    Right,
}

/// Evidence for a failed condition. Player indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Witness {
    /// An extreme position hosts a single facility.
    LonePeripheral {
        end: End,
        position: Rational,
        player: usize,
        slot: Option<usize>,
    },
    /// A player earns less than the catchment on one side of a facility.
    LowPayoff {
        player: usize,
        slot: Option<usize>,
        payoff: Rational,
        side_mass: Rational,
        at: Rational,
        side: Side,
    },
    OwnNeighbor {
        player: usize,
        position: Rational,
        neighbor: Rational,
    },
    UnequalMasses {
        player: usize,
        low_position: Rational,
        low_mass: Rational,
        high_position: Rational,
        high_mass: Rational,
    },
    NotSocialOptimum {
        failure: SoiFailure,
    },
    NotOptimalLocations {
        expected: Vec<Rational>,
        support: Vec<PureStrategy>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub id: Condition,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerDeviation {
    pub player: usize,
    #[serde(flatten)]
    pub result: DeviationResult,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub verdict: bool,
    pub conditions: Vec<ConditionResult>,
    /// A beneficial deviation found by the oracle when the verdict is false.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<PlayerDeviation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl VerificationReport {
    fn from_conditions(conditions: Vec<ConditionResult>) -> Self {
        VerificationReport {
            verdict: conditions.iter().all(|c| c.passed),
            conditions,
            deviation: None,
            note: None,
        }
    }

    fn monopoly() -> Self {
        VerificationReport {
            verdict: true,
            conditions: Vec::new(),
            deviation: None,
            note: Some(
                "a single player faces no competition; every profile is an equilibrium".into(),
            ),
        }
    }

    pub fn condition(&self, id: Condition) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn failed(&self) -> impl Iterator<Item = &ConditionResult> + '_ {
        self.conditions.iter().filter(|c| !c.passed)
    }

    /// Attaches the first beneficial deviation the oracle can find,
    /// starting with `preferred`.
    fn attach_deviation(&mut self, game: &Game, profile: &MixedProfile, preferred: Option<usize>) {
        if self.verdict {
            return;
        }
        let opts = SearchOptions::default();
        let order = preferred
            .into_iter()
            .chain((0..game.players()).filter(|&i| Some(i) != preferred));
        for player in order {
            if let Ok(result) = player_deviation(game, profile, player, &opts) {
                if result.is_beneficial() {
                    self.deviation = Some(PlayerDeviation { player, result });
                    return;
                }
            }
        }
    }
}

fn pass(id: Condition) -> ConditionResult {
    ConditionResult {
        id,
        passed: true,
        witness: None,
    }
}

fn fail(id: Condition, witness: Witness) -> ConditionResult {
    ConditionResult {
        id,
        passed: false,
        witness: Some(witness),
    }
}

fn single_unit_conditions(profile: &PureProfile) -> Vec<ConditionResult> {
    let occupancy = profile.occupancy();
    let report = masses(profile);
    let owner_at = |x: &Rational| {
        (0..profile.players())
            .find(|&i| profile.strategy(i).contains(x))
            .expect("occupied")
    };

    let ends = [
        (End::Left, occupancy.first()),
        (End::Right, occupancy.last()),
    ];
    let lone_end = ends.into_iter().find_map(|(end, occ)| {
        let (x, owners) = occ.expect("non-empty profile");
        (owners.len() < 2).then(|| Witness::LonePeripheral {
            end,
            position: x.clone(),
            player: owner_at(x),
            slot: None,
        })
    });
    let extremes = match lone_end {
        Some(w) => fail(Condition::PairedExtremes, w),
        None => pass(Condition::PairedExtremes),
    };

    let (side_mass, at, side) = report
        .facilities
        .iter()
        .flat_map(|f| {
            [
                (f.c_l.clone(), f.location.position.clone(), Side::Below),
                (f.c_r.clone(), f.location.position.clone(), Side::Above),
            ]
        })
        .fold(
            None::<(Rational, Rational, Side)>,
            |best, cand| match best {
                Some(b) if b.0 >= cand.0 => Some(b),
                _ => Some(cand),
            },
        )
        .expect("non-empty profile");
    let low = (0..profile.players())
        .filter(|&i| *report.payoff(i) < side_mass)
        .min_by(|&a, &b| report.payoff(a).cmp(report.payoff(b)).then(a.cmp(&b)));
    let covers = match low {
        Some(player) => fail(
            Condition::PayoffCoversSides,
            Witness::LowPayoff {
                player,
                slot: None,
                payoff: report.payoff(player).clone(),
                side_mass,
                at,
                side,
            },
        ),
        None => pass(Condition::PayoffCoversSides),
    };
    vec![extremes, covers]
}

/// Checks the single-unit equilibrium conditions: paired extremes, and every
/// payoff at least as large as every one-sided catchment.
pub fn verify_single_unit(profile: &PureProfile) -> Result<VerificationReport> {
    if !profile.game().is_single_unit() {
        return Err(Error::WrongGameKind(format!(
            "single-unit verification needs one facility per player, got {}",
            profile.game()
        )));
    }
    if profile.players() == 1 {
        return Ok(VerificationReport::monopoly());
    }
    let mut report = VerificationReport::from_conditions(single_unit_conditions(profile));
    let preferred = report.failed().find_map(|c| match &c.witness {
        Some(Witness::LonePeripheral { player, .. }) | Some(Witness::LowPayoff { player, .. }) => {
            Some(*player)
        }
        _ => None,
    });
    report.attach_deviation(
        &profile.game(),
        &MixedProfile::from_pure(profile),
        preferred,
    );
    Ok(report)
}

/// The multi-unit conditions without any oracle call.
pub fn multi_unit_conditions(game: &Game, profile: &PureProfile) -> Result<Vec<ConditionResult>> {
    profile.check_game(game)?;

    let own_neighbor = classify(profile).into_iter().find_map(|(f, class)| {
        if !class.is_lone || !class.has_neighbor_of(f.player) {
            return None;
        }
        let neighbor = [&class.left_neighbor, &class.right_neighbor]
            .into_iter()
            .flatten()
            .find(|n| n.owners.contains(&f.player))
            .expect("has_neighbor_of");
        Some(Witness::OwnNeighbor {
            player: f.player,
            position: f.position,
            neighbor: neighbor.position.clone(),
        })
    });

    let report = masses(profile);
    let unequal = (0..game.players()).find_map(|player| {
        let fs: Vec<_> = report.facilities_of(player).collect();
        let low = fs.iter().min_by(|a, b| a.mass.cmp(&b.mass))?;
        let high = fs.iter().max_by(|a, b| a.mass.cmp(&b.mass))?;
        (low.mass != high.mass).then(|| Witness::UnequalMasses {
            player,
            low_position: low.location.position.clone(),
            low_mass: low.mass.clone(),
            high_position: high.location.position.clone(),
            high_mass: high.mass.clone(),
        })
    });

    let flat = flatten(game, profile)?;
    let inner = single_unit_conditions(&flat.profile);
    let flat_witness = inner
        .into_iter()
        .find(|c| !c.passed)
        .and_then(|c| c.witness)
        .map(|w| match w {
            Witness::LonePeripheral {
                end,
                position,
                player,
                ..
            } => {
                let (p, s) = flat.back_map[player];
                Witness::LonePeripheral {
                    end,
                    position,
                    player: p,
                    slot: Some(s),
                }
            }
            Witness::LowPayoff {
                player,
                payoff,
                side_mass,
                at,
                side,
                ..
            } => {
                let (p, s) = flat.back_map[player];
                Witness::LowPayoff {
                    player: p,
                    slot: Some(s),
                    payoff,
                    side_mass,
                    at,
                    side,
                }
            }
            other => other,
        });

    let to_result = |id, w: Option<Witness>| match w {
        Some(w) => fail(id, w),
        None => pass(id),
    };
    Ok(vec![
        to_result(Condition::NoOwnNeighbor, own_neighbor),
        to_result(Condition::EqualMasses, unequal),
        to_result(Condition::FlattenedEquilibrium, flat_witness),
    ])
}

/// Checks a pure profile of a multi-unit game: no lone facility with an own
/// neighbor, equal masses per player, and an equilibrium flattening.
pub fn verify_multi_unit(game: &Game, profile: &PureProfile) -> Result<VerificationReport> {
    profile.check_game(game)?;
    if game.players() == 1 {
        return Ok(VerificationReport::monopoly());
    }
    let mut report = VerificationReport::from_conditions(multi_unit_conditions(game, profile)?);
    let preferred = report.failed().find_map(|c| match &c.witness {
        Some(Witness::OwnNeighbor { player, .. })
        | Some(Witness::UnequalMasses { player, .. })
        | Some(Witness::LonePeripheral { player, .. })
        | Some(Witness::LowPayoff { player, .. }) => Some(*player),
        _ => None,
    });
    report.attach_deviation(game, &MixedProfile::from_pure(profile), preferred);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ExistenceReason {
    Monopoly,
    /// One of the games with at most three facilities, settled case by case.
    SmallGame,
    NoDominantPlayer,
    DominantPlayer {
        player: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Existence {
    pub exists: bool,
    pub reason: ExistenceReason,
}

/// Whether the game has a pure equilibrium.
pub fn exists_pure(game: &Game) -> Existence {
    if game.players() == 1 {
        return Existence {
            exists: true,
            reason: ExistenceReason::Monopoly,
        };
    }
    if game.total() <= 3 {
        let mut counts = game.counts().to_vec();
        counts.sort_unstable();
        return Existence {
            exists: counts == [1, 1],
            reason: ExistenceReason::SmallGame,
        };
    }
    match has_dominant_player(game) {
        Some(player) => Existence {
            exists: false,
            reason: ExistenceReason::DominantPlayer { player },
        },
        None => Existence {
            exists: true,
            reason: ExistenceReason::NoDominantPlayer,
        },
    }
}

fn unavailable(reason: Unavailable) -> Error {
    Error::ConstructionUnavailable(reason)
}

fn regroup(
    game: &Game,
    order: &[usize],
    sorted_positions: Vec<Vec<Rational>>,
) -> Result<PureProfile> {
    let mut strategies: Vec<Option<PureStrategy>> = vec![None; game.players()];
    for (rank, xs) in sorted_positions.into_iter().enumerate() {
        strategies[order[rank]] = Some(PureStrategy::from_unsorted(xs)?);
    }
    PureProfile::for_game(
        game,
        strategies
            .into_iter()
            .map(|s| s.expect("every player placed"))
            .collect(),
    )
}

/// Pure equilibrium for an even number of facilities: every position
/// `(2r - 1)/n`, `r = 1..n/2`, hosts two facilities of different players.
pub fn construct_even(game: &Game) -> Result<PureProfile> {
    if let Some(player) = has_dominant_player(game) {
        return Err(unavailable(Unavailable::DominantPlayer { player }));
    }
    let n = game.total();
    if !n.is_multiple_of(2) {
        return Err(unavailable(Unavailable::WrongParity { total: n }));
    }
    if n < 4 {
        return Err(unavailable(Unavailable::TooFewFacilities {
            total: n,
            required: 4,
        }));
    }
    let half = n / 2;
    let order = game.ascending_order();
    let mut k = 0usize;
    let mut sorted = Vec::with_capacity(order.len());
    for &player in &order {
        let xs = (0..game.count(player))
            .map(|_| {
                let r = k % half + 1;
                k += 1;
                Rational::new(2 * r as i64 - 1, n as i64)
            })
            .collect();
        sorted.push(xs);
    }
    regroup(game, &order, sorted)
}

/// Pure equilibrium for an odd number of facilities: a pair at `1/(n+1)`,
/// an alternating run of lone facilities led by the smallest player, then
/// pairs up to `n/(n+1)`.
pub fn construct_odd(game: &Game) -> Result<PureProfile> {
    if let Some(player) = has_dominant_player(game) {
        return Err(unavailable(Unavailable::DominantPlayer { player }));
    }
    let n = game.total();
    if n.is_multiple_of(2) {
        return Err(unavailable(Unavailable::WrongParity { total: n }));
    }
    if n < 5 {
        return Err(unavailable(Unavailable::TooFewFacilities {
            total: n,
            required: 5,
        }));
    }
    if game.players() < 3 {
        return Err(unavailable(Unavailable::TooFewPlayers {
            players: game.players(),
            required: 3,
        }));
    }

    let order = game.ascending_order();
    let players = order.len();
    let counts: Vec<usize> = order.iter().map(|&i| game.count(i)).collect();
    let mut remaining = counts.clone();
    let mut placed: Vec<Vec<Rational>> = vec![Vec::new(); players];
    let p = Rational::new(1, n as i64 + 1);
    let smallest = counts[0];

    // Left pair, owned by the two largest players.
    for rank in [players - 1, players - 2] {
        placed[rank].push(p.clone());
        remaining[rank] -= 1;
    }

    // Lone run: odd steps go to the smallest player, even steps to the
    // other player with the most facilities left (lowest rank on ties).
    for i in 1..=(2 * smallest - 1) {
        let step = Rational::from(i as i64);
        let (rank, x) = if i % 2 == 1 {
            (0, (&step + Rational::from(2)) * &p)
        } else {
            let rank = (1..players)
                .max_by(|&a, &b| remaining[a].cmp(&remaining[b]).then(b.cmp(&a)))
                .expect("at least three players");
            let x = (&step + Rational::one()) * &p + &step * &p / Rational::from(smallest as i64);
            (rank, x)
        };
        assert!(remaining[rank] > 0, "lone run exhausted a player");
        placed[rank].push(x);
        remaining[rank] -= 1;
    }

    let residual: usize = remaining.iter().sum();
    assert_eq!(residual, n - 2 * smallest - 1);
    assert!(
        remaining.iter().all(|&r| 2 * r <= residual),
        "residual counts {remaining:?} contain a dominant player"
    );

    let pairs = residual / 2;
    let start = Rational::from(2 * smallest as i64 + 3) * &p;
    let two_p = Rational::from(2) * &p;
    let mut k = 0usize;
    for (rank, left) in remaining.iter().enumerate() {
        for _ in 0..*left {
            let r = k % pairs;
            placed[rank].push(&start + Rational::from(r as i64) * &two_p);
            k += 1;
        }
    }
    regroup(game, &order, placed)
}

/// Dispatches to the even or odd constructor.
pub fn construct_pure(game: &Game) -> Result<PureProfile> {
    if game.total().is_multiple_of(2) {
        construct_even(game)
    } else {
        construct_odd(game)
    }
}

/// How the dominant player's optimal locations are shared out among the
/// other players.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub dominant: usize,
    /// The other players, in the order of `b` and `blocks`.
    pub players: Vec<usize>,
    pub b: Vec<usize>,
    pub blocks: Vec<Vec<Rational>>,
}

impl PartitionPlan {
    /// Checks the plan against the game; any mismatch is reported as
    /// [`Error::InvalidPartition`].
    pub fn validate(&self, game: &Game) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPartition(msg));
        if has_dominant_player(game) != Some(self.dominant) {
            return bad(format!(
                "player {} is not dominant in {game}",
                self.dominant + 1
            ));
        }
        let expected: BTreeSet<usize> = (0..game.players())
            .filter(|&i| i != self.dominant)
            .collect();
        let listed: BTreeSet<usize> = self.players.iter().copied().collect();
        if listed != expected || self.players.len() != expected.len() {
            return bad("plan must list every non-dominant player exactly once".into());
        }
        if self.b.len() != self.players.len() || self.blocks.len() != self.players.len() {
            return bad("plan needs one block size and one block per player".into());
        }
        let nd = game.count(self.dominant);
        let rest = game.total() - nd;
        for ((&i, &b), block) in self.players.iter().zip(&self.b).zip(&self.blocks) {
            if b * rest != game.count(i) * nd {
                return bad(format!(
                    "block size {b} for player {} breaks the ratio condition",
                    i + 1
                ));
            }
            if block.len() != b {
                return bad(format!(
                    "block of player {} has {} points, expected {b}",
                    i + 1,
                    block.len()
                ));
            }
        }
        let mut all: Vec<&Rational> = self.blocks.iter().flatten().collect();
        all.sort();
        let opt = optimal_locations(nd)?;
        if all.len() != opt.len() || all.iter().zip(&opt).any(|(a, b)| *a != b) {
            return bad("blocks must partition the dominant player's optimal locations".into());
        }
        Ok(())
    }
}

/// Block sizes `b_i = n_i * n_d / (n - n_d)` with consecutive blocks of the
/// dominant player's optimal locations, when all sizes are integral.
pub fn find_partition(game: &Game) -> Result<Option<PartitionPlan>> {
    let dominant = has_dominant_player(game)
        .ok_or_else(|| Error::WrongGameKind(format!("{game} has no dominant player")))?;
    let nd = game.count(dominant);
    let rest = game.total() - nd;
    let players: Vec<usize> = (0..game.players()).filter(|&i| i != dominant).collect();
    if players.is_empty() {
        return Ok(None);
    }
    let mut b = Vec::with_capacity(players.len());
    for &i in &players {
        let num = game.count(i) * nd;
        if !num.is_multiple_of(rest) {
            return Ok(None);
        }
        b.push(num / rest);
    }
    let opt = optimal_locations(nd)?;
    let mut blocks = Vec::with_capacity(b.len());
    let mut start = 0;
    for &size in &b {
        blocks.push(opt[start..start + size].to_vec());
        start += size;
    }
    Ok(Some(PartitionPlan {
        dominant,
        players,
        b,
        blocks,
    }))
}

/// The mixed equilibrium of a dominant-player game: the dominant player
/// plays its optimal locations and every other player mixes uniformly over
/// subsets of its block.
pub fn construct_mixed(game: &Game, plan: &PartitionPlan) -> Result<MixedProfile> {
    plan.validate(game)?;
    let mut strategies: Vec<Option<MixedStrategy>> = vec![None; game.players()];
    let opt = optimal_locations(game.count(plan.dominant))?;
    strategies[plan.dominant] = Some(MixedStrategy::pure(PureStrategy::new(opt)?));
    for (&i, block) in plan.players.iter().zip(&plan.blocks) {
        let mut block = block.clone();
        block.sort();
        strategies[i] = Some(uniform_subsets(&block, game.count(i))?);
    }
    MixedProfile::new(
        strategies
            .into_iter()
            .map(|s| s.expect("every player covered"))
            .collect(),
    )
}

/// Two-player check: the smaller player is socially optimal in expectation
/// and the larger one plays exactly the optimal locations.
pub fn verify_two_player(
    game: &Game,
    x1: &MixedStrategy,
    x2: &MixedStrategy,
) -> Result<VerificationReport> {
    if game.players() != 2 || game.count(0) > game.count(1) {
        return Err(Error::WrongGameKind(format!(
            "two-player verification needs (l,k) with l <= k, got {game}"
        )));
    }
    let (l, k) = (game.count(0), game.count(1));
    let profile = MixedProfile::new(vec![x1.clone(), x2.clone()])?;
    profile.check_game(game)?;

    let soi = is_soi(x1, l, k)?;
    let first = match soi.failure {
        Some(failure) => fail(
            Condition::SociallyOptimalMixture,
            Witness::NotSocialOptimum { failure },
        ),
        None => pass(Condition::SociallyOptimalMixture),
    };
    let opt = optimal_locations(k)?;
    let second = match x2.as_pure() {
        Some(s) if s.locations() == opt.as_slice() => pass(Condition::OptimalLocations),
        _ => fail(
            Condition::OptimalLocations,
            Witness::NotOptimalLocations {
                expected: opt,
                support: x2.support().iter().map(|e| e.strategy.clone()).collect(),
            },
        ),
    };
    let mut report = VerificationReport::from_conditions(vec![first, second]);
    let preferred = if report.conditions[1].passed {
        Some(0)
    } else {
        Some(1)
    };
    report.attach_deviation(game, &profile, preferred);
    Ok(report)
}
