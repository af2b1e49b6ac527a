use thiserror::Error;

/// Why a pure-equilibrium constructor declined a game.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Unavailable {
    /// A player owns strictly more than half of all facilities; such games
    /// have no pure equilibrium.
    DominantPlayer {
        player: usize,
    },
    WrongParity {
        total: usize,
    },
    TooFewFacilities {
        total: usize,
        required: usize,
    },
    TooFewPlayers {
        players: usize,
        required: usize,
    },
    /// No integral block sizes satisfy the partition conditions.
    NoPartition,
}

impl std::fmt::Display for Unavailable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Unavailable::DominantPlayer { player } => write!(
                f,
                "player {} is dominant (owns more than half of all facilities), so no pure equilibrium exists",
                player + 1
            ),
            Unavailable::WrongParity { total } => {
                write!(f, "total facility count {total} has the wrong parity for this construction")
            }
            Unavailable::TooFewFacilities { total, required } => {
                write!(f, "construction needs at least {required} facilities, game has {total}")
            }
            Unavailable::TooFewPlayers { players, required } => {
                write!(f, "construction needs at least {required} players, game has {players}")
            }
            Unavailable::NoPartition => {
                write!(f, "no integral partition of the dominant player's optimal locations exists")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("invalid strategy: {0}")]
    InvalidStrategy(String),
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("invalid deviation: {0}")]
    InvalidDeviation(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("operation does not apply to this game: {0}")]
    WrongGameKind(String),
    #[error("construction unavailable: {0}")]
    ConstructionUnavailable(Unavailable),
    #[error("product support has {size} combinations, above the cap of {cap}")]
    SupportTooLarge { size: u128, cap: u128 },
    #[error("search space has {size} candidate subsets, above the cap of {cap}")]
    SearchTooLarge { size: u128, cap: u128 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
