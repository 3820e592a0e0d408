use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model parameter: {0}")]
    InvalidParams(String),

    #[error(
        "cannot split {total} vehicles over {platoons} platoons with sizes in [2, {max_size}]"
    )]
    InfeasibleDistribution {
        total: usize,
        platoons: usize,
        max_size: usize,
    },

    #[error("distance must be positive, got {0} m")]
    NonPositiveDistance(f64),

    #[error("transmitter and receiver positions coincide")]
    CoincidentPositions,

    #[error("subchannel shared by {count} {what}, at most one allowed")]
    SharingConflict { what: &'static str, count: usize },

    #[error("could not place {what} after {attempts} attempts")]
    Placement { what: String, attempts: usize },

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid sweep configuration: {0}")]
    InvalidSweep(String),

    #[error("no results to write")]
    EmptyResults,

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
