use thiserror::Error;

use crate::kg::EntityId;
use crate::scoring::ScoreError;

/// Failure of one retrieval stage for one query.
#[derive(Debug, Error)]
pub enum StageError {
    #[error("seed set is empty")]
    EmptySeeds,
    #[error("seed {0} is not in the graph")]
    UnknownSeed(EntityId),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("beam search scoring failed at hop {hop}: {source}")]
    BeamScore {
        hop: usize,
        #[source]
        source: ScoreError,
    },
    #[error("invalid config: {0}")]
    Config(String),
}
