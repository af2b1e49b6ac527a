//! Multi-unit pure-location Hotelling games on the unit interval.
//!
//! Players place facilities on `[0, 1]`, customers are uniform and visit the
//! nearest facility, and ties are split evenly between the players located
//! there. Everything is computed with exact rationals.
//!
//! - [`game`]: games, strategies, profiles, facility classification and
//!   flattening to single-unit games.
//! - [`payoff`]: customer masses, limit payoffs for offset locations, social
//!   cost.
//! - [`mixed`]: finite-support mixed strategies, expected payoffs and the
//!   induced facility measure.
//! - [`equilibrium`]: equilibrium verifiers and constructors.
//! - [`oracle`]: exact best responses and deviation certificates.

pub mod equilibrium;
pub mod error;
pub mod game;
pub mod mixed;
pub mod oracle;
pub mod payoff;
pub mod rational;

pub use error::{Error, Result, Unavailable};
pub use game::{
    classify, flatten, has_dominant_player, FacilityClass, FacilityRef, FlattenedPair, Game,
    PureProfile, PureStrategy,
};
pub use payoff::{
    limit_payoff, masses, social_cost, MassReport, OffsetLocation, OffsetProfile, Side,
};
pub use rational::{q, Rational};
