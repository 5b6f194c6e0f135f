//! TransE and MDE: score functions, losses, gradients, training and
//! checkpoints.

pub mod checkpoint;
pub mod config;
pub mod grad;
pub mod loss;
pub mod negative;
pub mod score;
pub mod space;
pub mod train;

pub use config::{LossKind, ModelConfig, ModelKind};
pub use space::{EmbeddingSet, EmbeddingSpace, Table};
pub use train::{train, TrainReport};

use crate::error::Result;
use crate::graph::{EntityId, Triple};

/// Anything that assigns a plausibility score to a triple, lower meaning
/// more plausible. Callers guarantee ids are in range.
pub trait TripleScorer: Sync {
    fn score_triple(&self, triple: Triple) -> f64;
}

impl<F: Fn(Triple) -> f64 + Sync> TripleScorer for F {
    fn score_triple(&self, triple: Triple) -> f64 {
        self(triple)
    }
}

/// A trained embedding space together with the configuration that scores it.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub space: EmbeddingSpace,
}

impl Model {
    pub fn new(config: ModelConfig, space: EmbeddingSpace) -> Self {
        Model { config, space }
    }

    pub fn score(&self, triple: Triple) -> Result<f64> {
        score::score(&self.space, triple, &self.config)
    }

    /// Vector used for entity similarity: the only set for TransE, set `i`
    /// for MDE.
    pub fn entity_vector(&self, entity: EntityId) -> &[f64] {
        self.space.entity(0, entity.index())
    }

    pub fn entity_count(&self) -> usize {
        self.space.entity_count()
    }
}

impl TripleScorer for Model {
    #[inline]
    fn score_triple(&self, triple: Triple) -> f64 {
        score::score_unchecked(&self.space, triple, &self.config)
    }
}
