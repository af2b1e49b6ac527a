//! Closed-form customer masses under the uniform customer distribution.
//!
//! With uniform customers every occupied position owns the interval between
//! the midpoints to its neighbors, so payoffs are exact rationals. Offset
//! locations (`x - eps`, `x`, `x + eps`) are evaluated in the limit
//! `eps -> 0+`: they are ordered as distinct points but every catchment
//! boundary is taken at its limiting value.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::PureProfile;
use crate::rational::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Below,
    Exact,
    Above,
}

/// A position together with an infinitesimal offset direction.
///
/// Ordering is lexicographic on `(position, side)`, so `(x, below) <
/// (x, exact) < (x, above)` and all three sit strictly between any `y < x`
/// and `z > x`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OffsetLocation {
    pub position: Rational,
    pub side: Side,
}

impl OffsetLocation {
    pub fn new(position: Rational, side: Side) -> Result<Self> {
        if !position.in_unit_interval() {
            return Err(Error::InvalidDeviation(format!(
                "position {position} lies outside [0,1]"
            )));
        }
        if side == Side::Below && position.is_zero() {
            return Err(Error::InvalidDeviation("cannot offset below 0".into()));
        }
        if side == Side::Above && position == Rational::one() {
            return Err(Error::InvalidDeviation("cannot offset above 1".into()));
        }
        Ok(OffsetLocation { position, side })
    }

    pub fn exact(position: Rational) -> Self {
        OffsetLocation {
            position,
            side: Side::Exact,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.side == Side::Exact
    }

    /// The concrete point `position + offset * sign(side)`.
    pub fn realize(&self, offset: &Rational) -> Rational {
        match self.side {
            Side::Below => &self.position - offset,
            Side::Exact => self.position.clone(),
            Side::Above => &self.position + offset,
        }
    }
}

impl fmt::Display for OffsetLocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Below => write!(f, "{}-eps", self.position),
            Side::Exact => write!(f, "{}", self.position),
            Side::Above => write!(f, "{}+eps", self.position),
        }
    }
}

/// Customer mass attracted to one facility.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacilityMass {
    pub player: usize,
    pub slot: usize,
    pub location: OffsetLocation,
    /// This facility's share `V_i(f; s)` of its position's catchment.
    pub mass: Rational,
    /// Customers reaching the position from the left.
    pub c_l: Rational,
    /// Customers reaching the position from the right.
    pub c_r: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MassReport {
    pub facilities: Vec<FacilityMass>,
    pub payoffs: Vec<Rational>,
}

impl MassReport {
    pub fn payoff(&self, player: usize) -> &Rational {
        &self.payoffs[player]
    }

    pub fn facilities_of(&self, player: usize) -> impl Iterator<Item = &FacilityMass> + '_ {
        self.facilities.iter().filter(move |f| f.player == player)
    }

    pub fn mass_at(&self, player: usize, position: &Rational) -> Option<&Rational> {
        self.facilities_of(player)
            .find(|f| f.location.position == *position && f.location.is_exact())
            .map(|f| &f.mass)
    }

    /// Largest one-sided mass over all occupied positions.
    pub fn max_side_mass(&self) -> Rational {
        self.facilities
            .iter()
            .flat_map(|f| [&f.c_l, &f.c_r])
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Catchment {
    pub c_l: Rational,
    pub c_r: Rational,
}

impl Catchment {
    pub fn total(&self) -> Rational {
        &self.c_l + &self.c_r
    }
}

/// Catchments of strictly increasing occupied keys. Boundaries sit at the
/// midpoints of consecutive positions; `0` and `1` close the ends.
pub(crate) fn catchments(xs: &[&Rational]) -> Vec<Catchment> {
    let m = xs.len();
    let mut out = Vec::with_capacity(m);
    let mut left = Rational::zero();
    for j in 0..m {
        let right = if j + 1 < m {
            xs[j].midpoint(xs[j + 1])
        } else {
            Rational::one()
        };
        out.push(Catchment {
            c_l: xs[j] - &left,
            c_r: &right - xs[j],
        });
        left = right;
    }
    out
}

/// Evaluates an arbitrary list of owned offset locations. Keys shared by
/// several players split their catchment equally among them.
fn evaluate(players: usize, entries: Vec<(OffsetLocation, usize, usize)>) -> MassReport {
    let keys: BTreeSet<&OffsetLocation> = entries.iter().map(|e| &e.0).collect();
    let keys: Vec<&OffsetLocation> = keys.into_iter().collect();
    let catch = catchments(&keys.iter().map(|k| &k.position).collect::<Vec<_>>());

    let mut owners = vec![0usize; keys.len()];
    let index = |loc: &OffsetLocation| keys.binary_search(&loc).expect("key present");
    for e in &entries {
        owners[index(&e.0)] += 1;
    }

    let mut payoffs = vec![Rational::zero(); players];
    let mut facilities = Vec::with_capacity(entries.len());
    for (location, player, slot) in &entries {
        let j = index(location);
        let c = &catch[j];
        let mass = c.total() / Rational::from(owners[j] as i64);
        payoffs[*player] += &mass;
        facilities.push(FacilityMass {
            player: *player,
            slot: *slot,
            location: location.clone(),
            mass,
            c_l: c.c_l.clone(),
            c_r: c.c_r.clone(),
        });
    }
    MassReport {
        facilities,
        payoffs,
    }
}

/// Per-facility masses, one-sided masses and payoffs of a pure profile.
pub fn masses(profile: &PureProfile) -> MassReport {
    let entries = profile
        .facilities()
        .map(|f| (OffsetLocation::exact(f.position), f.player, f.slot))
        .collect();
    evaluate(profile.players(), entries)
}

/// A profile in which one player's locations may carry infinitesimal
/// offsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OffsetProfile {
    pub strategies: Vec<Vec<OffsetLocation>>,
}

impl OffsetProfile {
    pub fn from_pure(profile: &PureProfile) -> Self {
        OffsetProfile {
            strategies: profile
                .strategies()
                .iter()
                .map(|s| {
                    s.locations()
                        .iter()
                        .cloned()
                        .map(OffsetLocation::exact)
                        .collect()
                })
                .collect(),
        }
    }

    /// `profile` with `player`'s strategy replaced by `deviation`.
    pub fn with_deviation(
        profile: &PureProfile,
        player: usize,
        deviation: Vec<OffsetLocation>,
    ) -> Self {
        let mut out = OffsetProfile::from_pure(profile);
        out.strategies[player] = deviation;
        out
    }
}

/// Payoffs in the limit `eps -> 0+` of a profile where only `deviator`'s
/// locations carry offsets.
pub fn limit_payoff(profile: &OffsetProfile, deviator: usize) -> Result<MassReport> {
    if deviator >= profile.strategies.len() {
        return Err(Error::InvalidDeviation(format!(
            "no player {}",
            deviator + 1
        )));
    }
    let mut entries = Vec::new();
    for (player, locs) in profile.strategies.iter().enumerate() {
        if locs.is_empty() {
            return Err(Error::InvalidDeviation(format!(
                "player {} has no locations",
                player + 1
            )));
        }
        let mut sorted: Vec<&OffsetLocation> = locs.iter().collect();
        sorted.sort();
        for loc in &sorted {
            OffsetLocation::new(loc.position.clone(), loc.side)?;
        }
        if player == deviator {
            if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidDeviation(format!(
                    "location {} used twice",
                    w[0]
                )));
            }
        } else {
            if locs.iter().any(|l| !l.is_exact()) {
                return Err(Error::InvalidDeviation(format!(
                    "only the deviating player may use offsets, player {} does",
                    player + 1
                )));
            }
            if sorted.windows(2).any(|w| w[0].position == w[1].position) {
                return Err(Error::InvalidStrategy(format!(
                    "player {} stacks two facilities",
                    player + 1
                )));
            }
        }
        for (slot, loc) in sorted.into_iter().enumerate() {
            entries.push((loc.clone(), player, slot));
        }
    }
    Ok(evaluate(profile.strategies.len(), entries))
}

/// Limit mass collected by `own` (sorted, distinct offset keys) against a
/// sorted multiset of exact opponent positions. Each opponent position
/// carries the number of opponent facilities placed there.
pub(crate) fn own_limit_mass(opponents: &[(Rational, u32)], own: &[OffsetLocation]) -> Rational {
    // Merge into one increasing key sequence: (position, own?, opponent count).
    let mut keys: Vec<(&Rational, bool, u32)> = Vec::with_capacity(opponents.len() + own.len());
    let (mut i, mut j) = (0, 0);
    while i < opponents.len() || j < own.len() {
        let take_own = match (opponents.get(i), own.get(j)) {
            (None, _) => true,
            (_, None) => false,
            (Some((x, _)), Some(o)) => match o.position.cmp(x).then(o.side.cmp(&Side::Exact)) {
                Ordering::Less => true,
                Ordering::Greater => false,
                Ordering::Equal => {
                    keys.push((x, true, opponents[i].1));
                    i += 1;
                    j += 1;
                    continue;
                }
            },
        };
        if take_own {
            keys.push((&own[j].position, true, 0));
            j += 1;
        } else {
            keys.push((&opponents[i].0, false, opponents[i].1));
            i += 1;
        }
    }

    let mut total = Rational::zero();
    let mut left = Rational::zero();
    for k in 0..keys.len() {
        let right = if k + 1 < keys.len() {
            keys[k].0.midpoint(keys[k + 1].0)
        } else {
            Rational::one()
        };
        let (_, mine, opp) = keys[k];
        if mine {
            let share = &right - &left;
            total += if opp == 0 {
                share
            } else {
                share / Rational::from(opp as i64 + 1)
            };
        }
        left = right;
    }
    total
}

/// Total distance from a uniform customer to the nearest location.
///
/// With gaps `b_1 = a_1`, `b_i = a_i - a_{i-1}`, `b_{k+1} = 1 - a_k` this is
/// `b_1^2/2 + b_{k+1}^2/2 + sum_{i=2..k} b_i^2/4`.
pub fn social_cost(locations: &[Rational]) -> Result<Rational> {
    if locations.is_empty() {
        return Err(Error::InvalidInput(
            "social cost needs at least one location".into(),
        ));
    }
    if let Some(x) = locations.iter().find(|x| !x.in_unit_interval()) {
        return Err(Error::InvalidInput(format!(
            "location {x} lies outside [0,1]"
        )));
    }
    let set: BTreeSet<&Rational> = locations.iter().collect();
    let a: Vec<&Rational> = set.into_iter().collect();
    let half = Rational::half();
    let quarter = Rational::new(1, 4);
    let first = a[0];
    let last = Rational::one() - a[a.len() - 1];
    let mut cost = first * first * &half + &last * &last * &half;
    for w in a.windows(2) {
        let b = w[1] - w[0];
        cost += &b * &b * &quarter;
    }
    Ok(cost)
}
