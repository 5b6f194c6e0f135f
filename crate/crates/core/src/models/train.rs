use std::collections::HashSet;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::eval;
use crate::graph::{KnowledgeGraph, Triple};
use crate::rng::{stream_rng, Stream};

use super::config::{ModelConfig, ModelKind};
use super::grad::gradient;
use super::negative::sample_negative;
use super::space::EmbeddingSpace;
use super::Model;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    /// Mean loss per training triple, one entry per epoch.
    pub loss_trace: Vec<f64>,
    /// Fraction of filtered head and tail queries over the training triples
    /// that rank first.
    pub train_hit1: f64,
    pub wall_time_secs: f64,
}

/// Starting point of training for `config`: uniform components, and for
/// TransE unit-norm entity and relation vectors.
pub fn initial_space(config: &ModelConfig, entity_count: usize, relation_count: usize) -> EmbeddingSpace {
    let mut rng = stream_rng(config.seed, Stream::Init);
    let mut space = EmbeddingSpace::uniform(config.model, entity_count, relation_count, config.dim, &mut rng);
    if config.model == ModelKind::TransE {
        space.normalize_relations();
        space.normalize_entities();
    }
    space
}

/// Trains on every triple of `graph`.
pub fn train_graph(graph: &KnowledgeGraph, config: &ModelConfig) -> Result<(Model, TrainReport)> {
    train(graph.triples(), graph.entity_count(), graph.relation_count(), config)
}

/// Plain SGD over `iterations` epochs. Each epoch visits every training
/// triple once in shuffled order and updates immediately after each sample.
/// TransE entity vectors are renormalized at the end of every epoch.
pub fn train(
    triples: &[Triple],
    entity_count: usize,
    relation_count: usize,
    config: &ModelConfig,
) -> Result<(Model, TrainReport)> {
    config.validate()?;
    if triples.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if entity_count < 2 {
        return Err(Error::InvalidSpec("training needs at least 2 entities".into()));
    }
    if let Some(t) = triples.iter().find(|t| {
        t.head.index() >= entity_count || t.tail.index() >= entity_count || t.relation.index() >= relation_count
    }) {
        return Err(Error::UnknownEntity(format!("{t} outside the vocabulary")));
    }
    let clock = Stopwatch::start();
    let known: HashSet<Triple> = triples.iter().copied().collect();
    let filter = config.filtered_negatives.then_some(&known);
    let mut space = initial_space(config, entity_count, relation_count);
    let mut shuffle_rng = stream_rng(config.seed, Stream::Shuffle);
    let mut negative_rng = stream_rng(config.seed, Stream::Negative);
    let mut order: Vec<Triple> = triples.to_vec();
    let mut negatives = Vec::with_capacity(config.negatives_per_positive);
    let mut loss_trace = Vec::with_capacity(config.iterations);

    for epoch in 0..config.iterations {
        order.shuffle(&mut shuffle_rng);
        let mut total = 0.0;
        for &pos in &order {
            negatives.clear();
            for _ in 0..config.negatives_per_positive {
                negatives.push(sample_negative(pos, entity_count, filter, &mut negative_rng));
            }
            let (loss, grad) = gradient(&space, pos, &negatives, config);
            total += loss;
            if config.learning_rate > 0.0 {
                grad.apply(&mut space, config.learning_rate);
            }
        }
        let mean = total / order.len() as f64;
        if !mean.is_finite() {
            return Err(Error::Divergence { iteration: epoch + 1 });
        }
        if config.model == ModelKind::TransE && config.learning_rate > 0.0 {
            space.normalize_entities();
        }
        if !space.is_finite() {
            return Err(Error::Divergence { iteration: epoch + 1 });
        }
        loss_trace.push(mean);
    }

    let model = Model::new(config.clone(), space);
    let train_hit1 = eval::filtered_hit_at_1(&model, triples, entity_count, &known);
    Ok((
        model,
        TrainReport {
            loss_trace,
            train_hit1,
            wall_time_secs: clock.elapsed_secs(),
        },
    ))
}

/// Wall clock that reads zero where no monotonic clock exists (wasm32).
struct Stopwatch {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
}

impl Stopwatch {
    fn start() -> Self {
        Stopwatch {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
        }
    }

    fn elapsed_secs(&self) -> f64 {
        #[cfg(not(target_arch = "wasm32"))]
        return self.start.elapsed().as_secs_f64();
        #[cfg(target_arch = "wasm32")]
        return 0.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Vec<Triple> {
        // ten triples over 11 entities and 3 relations, translation-consistent
        vec![
            Triple::new(0, 0, 1),
            Triple::new(2, 0, 3),
            Triple::new(4, 0, 5),
            Triple::new(6, 0, 7),
            Triple::new(1, 1, 2),
            Triple::new(3, 1, 4),
            Triple::new(5, 1, 6),
            Triple::new(0, 2, 8),
            Triple::new(2, 2, 9),
            Triple::new(4, 2, 10),
        ]
    }

    #[test]
    fn zero_learning_rate_keeps_initialization() {
        for model in ModelKind::ALL {
            let config = ModelConfig {
                learning_rate: 0.0,
                iterations: 5,
                seed: 3,
                ..ModelConfig::new(model)
            };
            let (m, report) = train(&toy(), 11, 3, &config).unwrap();
            assert_eq!(m.space, initial_space(&config, 11, 3));
            assert_eq!(report.loss_trace.len(), 5);
        }
    }

    #[test]
    fn same_seed_is_bitwise_identical() {
        for model in ModelKind::ALL {
            let config = ModelConfig {
                iterations: 20,
                seed: 9,
                ..ModelConfig::new(model)
            };
            let (a, ra) = train(&toy(), 11, 3, &config).unwrap();
            let (b, rb) = train(&toy(), 11, 3, &config).unwrap();
            assert_eq!(a, b);
            assert_eq!(ra.loss_trace, rb.loss_trace);
        }
    }

    #[test]
    fn toy_graph_is_memorized() {
        for model in ModelKind::ALL {
            let config = ModelConfig {
                seed: 1,
                ..ModelConfig::new(model)
            };
            let (m, report) = train(&toy(), 11, 3, &config).unwrap();
            assert_eq!(report.loss_trace.len(), 700);
            assert!(report.loss_trace.iter().all(|l| l.is_finite()));
            assert!(report.train_hit1 >= 0.9, "{model}: {}", report.train_hit1);
            assert!(m.space.is_finite());
        }
    }

    #[test]
    fn transe_entities_stay_unit_norm() {
        let config = ModelConfig {
            iterations: 10,
            ..ModelConfig::transe()
        };
        let (m, _) = train(&toy(), 11, 3, &config).unwrap();
        for i in 0..11 {
            let n: f64 = m.space.entity(0, i).iter().map(|x| x * x).sum();
            assert!((n.sqrt() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn huge_learning_rate_diverges_with_iteration() {
        let config = ModelConfig {
            learning_rate: 1e300,
            iterations: 50,
            ..ModelConfig::mde()
        };
        match train(&toy(), 11, 3, &config) {
            Err(Error::Divergence { iteration }) => assert!(iteration >= 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(train(&[], 11, 3, &ModelConfig::mde()), Err(Error::EmptyGraph)));
        assert!(train(&[Triple::new(0, 0, 11)], 11, 3, &ModelConfig::mde()).is_err());
    }
}
