//! Finite-support mixed strategies, expected payoffs and the induced
//! facility-count measure.

use std::collections::BTreeSet;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::equilibrium::optimal_locations;
use crate::error::{Error, Result};
use crate::game::{Game, PureProfile, PureStrategy};
use crate::payoff::masses;
use crate::rational::Rational;

/// Default cap on the number of pure combinations enumerated by
/// [`mixed_payoff`].
pub const DEFAULT_SUPPORT_CAP: u128 = 1_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SupportEntry {
    pub strategy: PureStrategy,
    pub prob: Rational,
}

/// A probability distribution over finitely many pure strategies with the
/// same number of facilities.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<SupportEntry>", into = "Vec<SupportEntry>")]
pub struct MixedStrategy {
    support: Vec<SupportEntry>,
}

impl TryFrom<Vec<SupportEntry>> for MixedStrategy {
    type Error = Error;
    fn try_from(v: Vec<SupportEntry>) -> Result<Self> {
        MixedStrategy::new(v.into_iter().map(|e| (e.strategy, e.prob)).collect())
    }
}

impl From<MixedStrategy> for Vec<SupportEntry> {
    fn from(m: MixedStrategy) -> Self {
        m.support
    }
}

impl MixedStrategy {
    pub fn new(support: Vec<(PureStrategy, Rational)>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidStrategy(
                "mixed strategy has empty support".into(),
            ));
        }
        if let Some((_, p)) = support.iter().find(|(_, p)| !p.is_positive()) {
            return Err(Error::InvalidStrategy(format!(
                "support probability {p} is not positive"
            )));
        }
        let total: Rational = support.iter().map(|(_, p)| p).sum();
        if total != Rational::one() {
            return Err(Error::InvalidStrategy(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let len = support[0].0.len();
        if support.iter().any(|(s, _)| s.len() != len) {
            return Err(Error::InvalidStrategy(
                "every support strategy must place the same number of facilities".into(),
            ));
        }
        let distinct: BTreeSet<&PureStrategy> = support.iter().map(|(s, _)| s).collect();
        if distinct.len() != support.len() {
            return Err(Error::InvalidStrategy(
                "support entries must be pairwise distinct".into(),
            ));
        }
        Ok(MixedStrategy {
            support: support
                .into_iter()
                .map(|(strategy, prob)| SupportEntry { strategy, prob })
                .collect(),
        })
    }

    pub fn pure(strategy: PureStrategy) -> Self {
        MixedStrategy {
            support: vec![SupportEntry {
                strategy,
                prob: Rational::one(),
            }],
        }
    }

    /// Uniform distribution over the given distinct strategies.
    pub fn uniform(strategies: Vec<PureStrategy>) -> Result<Self> {
        let p = Rational::new(1, strategies.len().max(1) as i64);
        MixedStrategy::new(strategies.into_iter().map(|s| (s, p.clone())).collect())
    }

    pub fn support(&self) -> &[SupportEntry] {
        &self.support
    }

    /// Facilities placed by every support strategy.
    pub fn facility_count(&self) -> usize {
        self.support[0].strategy.len()
    }

    pub fn as_pure(&self) -> Option<&PureStrategy> {
        match self.support.as_slice() {
            [only] => Some(&only.strategy),
            _ => None,
        }
    }

    /// Every location that appears in some support strategy.
    pub fn support_positions(&self) -> BTreeSet<Rational> {
        self.support
            .iter()
            .flat_map(|e| e.strategy.locations().iter().cloned())
            .collect()
    }
}

/// One mixed strategy per player.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MixedProfile {
    pub mixed: Vec<MixedStrategy>,
}

impl MixedProfile {
    pub fn new(strategies: Vec<MixedStrategy>) -> Result<Self> {
        if strategies.is_empty() {
            return Err(Error::InvalidProfile(
                "a profile needs at least one player".into(),
            ));
        }
        Ok(MixedProfile { mixed: strategies })
    }

    pub fn from_pure(profile: &PureProfile) -> Self {
        MixedProfile {
            mixed: profile
                .strategies()
                .iter()
                .cloned()
                .map(MixedStrategy::pure)
                .collect(),
        }
    }

    pub fn players(&self) -> usize {
        self.mixed.len()
    }

    pub fn strategy(&self, player: usize) -> &MixedStrategy {
        &self.mixed[player]
    }

    pub fn game(&self) -> Game {
        Game::new(
            self.mixed
                .iter()
                .map(MixedStrategy::facility_count)
                .collect(),
        )
        .expect("mixed strategies place at least one facility")
    }

    pub fn check_game(&self, game: &Game) -> Result<()> {
        if self.game() != *game {
            return Err(Error::InvalidProfile(format!(
                "profile plays the game {} but {} was expected",
                self.game(),
                game
            )));
        }
        Ok(())
    }

    /// Returns the pure profile when every strategy is a point mass.
    pub fn as_pure(&self) -> Option<PureProfile> {
        let strategies = self
            .mixed
            .iter()
            .map(|m| m.as_pure().cloned())
            .collect::<Option<Vec<_>>>()?;
        PureProfile::new(strategies).ok()
    }

    /// Number of pure combinations in the product support.
    pub fn product_size(&self) -> u128 {
        self.mixed
            .iter()
            .fold(1u128, |acc, m| acc.saturating_mul(m.support.len() as u128))
    }

    /// Every pure profile in the product support with its probability.
    pub fn realizations(&self) -> impl Iterator<Item = (PureProfile, Rational)> + '_ {
        self.mixed
            .iter()
            .map(|m| m.support.iter())
            .multi_cartesian_product()
            .map(|entries| {
                let prob = entries
                    .iter()
                    .map(|e| &e.prob)
                    .fold(Rational::one(), |acc, p| acc * p);
                let strategies = entries.into_iter().map(|e| e.strategy.clone()).collect();
                (PureProfile::new(strategies).expect("non-empty"), prob)
            })
    }
}

/// Expected payoffs of a finite-support mixed profile.
pub fn mixed_payoff(game: &Game, profile: &MixedProfile) -> Result<Vec<Rational>> {
    mixed_payoff_capped(game, profile, DEFAULT_SUPPORT_CAP)
}

pub fn mixed_payoff_capped(
    game: &Game,
    profile: &MixedProfile,
    cap: u128,
) -> Result<Vec<Rational>> {
    profile.check_game(game)?;
    let size = profile.product_size();
    if size > cap {
        return Err(Error::SupportTooLarge { size, cap });
    }
    let mut totals = vec![Rational::zero(); game.players()];
    for (s, prob) in profile.realizations() {
        for (t, u) in totals.iter_mut().zip(masses(&s).payoffs) {
            *t += u * &prob;
        }
    }
    Ok(totals)
}

/// A point or an interval of `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureQuery {
    Point(Rational),
    Interval {
        lo: Rational,
        hi: Rational,
        lo_closed: bool,
        hi_closed: bool,
    },
}

impl MeasureQuery {
    pub fn closed(lo: Rational, hi: Rational) -> Result<Self> {
        MeasureQuery::interval(lo, hi, true, true)
    }

    pub fn interval(lo: Rational, hi: Rational, lo_closed: bool, hi_closed: bool) -> Result<Self> {
        if !lo.in_unit_interval() || !hi.in_unit_interval() || lo > hi {
            return Err(Error::InvalidInput(format!(
                "bad interval endpoints {lo}, {hi}"
            )));
        }
        Ok(MeasureQuery::Interval {
            lo,
            hi,
            lo_closed,
            hi_closed,
        })
    }

    pub fn contains(&self, x: &Rational) -> bool {
        match self {
            MeasureQuery::Point(p) => p == x,
            MeasureQuery::Interval {
                lo,
                hi,
                lo_closed,
                hi_closed,
            } => {
                let above = if *lo_closed { x >= lo } else { x > lo };
                let below = if *hi_closed { x <= hi } else { x < hi };
                above && below
            }
        }
    }
}

/// Expected number of the strategy's facilities inside `query`.
pub fn mu(x: &MixedStrategy, query: &MeasureQuery) -> Rational {
    x.support
        .iter()
        .map(|e| {
            let inside = e
                .strategy
                .locations()
                .iter()
                .filter(|f| query.contains(f))
                .count();
            &e.prob * Rational::from(inside as i64)
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum SoiFailure {
    /// Support strategies do not place `expected` facilities.
    WrongFacilityCount { expected: usize, found: usize },
    /// `mu({o_index}) != l/k`; `index` is 1-based.
    PointMass {
        index: usize,
        point: Rational,
        measure: Rational,
        expected: Rational,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SoiCheck {
    pub holds: bool,
    pub failure: Option<SoiFailure>,
}

/// Whether `x` puts expected mass `l/k` on every one of the `k` socially
/// optimal locations.
pub fn is_soi(x: &MixedStrategy, l: usize, k: usize) -> Result<SoiCheck> {
    if x.facility_count() != l {
        return Ok(SoiCheck {
            holds: false,
            failure: Some(SoiFailure::WrongFacilityCount {
                expected: l,
                found: x.facility_count(),
            }),
        });
    }
    let expected = Rational::new(l as i64, k as i64);
    let opt = optimal_locations(k)?;
    for (i, point) in opt.iter().enumerate() {
        let measure = mu(x, &MeasureQuery::Point(point.clone()));
        if measure != expected {
            return Ok(SoiCheck {
                holds: false,
                failure: Some(SoiFailure::PointMass {
                    index: i + 1,
                    point: point.clone(),
                    measure,
                    expected,
                }),
            });
        }
    }
    // Total mass on o^k is then l, so nothing lives elsewhere.
    assert!(
        x.support.iter().all(|e| e
            .strategy
            .locations()
            .iter()
            .all(|f| opt.binary_search(f).is_ok())),
        "measure l on o^k forces the support inside o^k"
    );
    Ok(SoiCheck {
        holds: true,
        failure: None,
    })
}

/// Uniform distribution over all `l`-subsets of the `k` socially optimal
/// locations.
pub fn make_olk(l: usize, k: usize) -> Result<MixedStrategy> {
    if l == 0 || l > k {
        return Err(Error::InvalidInput(format!(
            "need 1 <= l <= k, got l={l}, k={k}"
        )));
    }
    uniform_subsets(&optimal_locations(k)?, l)
}

/// Uniform distribution over the `size`-subsets of `points` (sorted).
pub fn uniform_subsets(points: &[Rational], size: usize) -> Result<MixedStrategy> {
    let strategies = points
        .iter()
        .cloned()
        .combinations(size)
        .map(PureStrategy::from_unsorted)
        .collect::<Result<Vec<_>>>()?;
    MixedStrategy::uniform(strategies)
}
