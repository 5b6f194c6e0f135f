//! Knowledge-graph embeddings (TransE and MDE) for linking physicians to
//! research posts in a social graph: graph model and ontology, ingestion
//! and synthetic data, training, ranking evaluation and recommendation.

pub mod error;
pub mod eval;
pub mod experiment;
pub mod graph;
pub mod io;
pub mod models;
pub mod ontology;
pub mod recommend;
pub mod rng;
pub mod split;
pub mod synthetic;

pub use error::{Error, Result};
pub use graph::{build_graph, EntityId, KnowledgeGraph, LabeledTriple, RelationId, Side, Triple, Vocabulary};
pub use models::{Model, ModelConfig, ModelKind, TripleScorer};
