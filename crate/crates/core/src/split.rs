use std::collections::BTreeMap;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, RelationId, Triple};
use crate::rng::{stream_rng, Stream};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    /// Split each relation separately instead of the pooled triple list.
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.8,
            seed: 0,
            stratified: false,
        }
    }
}

impl SplitSpec {
    pub fn new(train_fraction: f64, seed: u64) -> Self {
        SplitSpec {
            train_fraction,
            seed,
            stratified: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// `round_half_even(n * (1 - train_fraction))`, with products that land
/// within 1e-9 of a half-integer snapped onto it first.
pub fn test_size(n: usize, train_fraction: f64) -> usize {
    let x = n as f64 * (1.0 - train_fraction);
    let halves = (x * 2.0).round();
    let x = if (x * 2.0 - halves).abs() < 1e-9 {
        halves / 2.0
    } else {
        x
    };
    x.round_ties_even() as usize
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<Triple>,
    pub test: Vec<Triple>,
}

/// Uniform split without replacement. Both halves keep the graph's triple
/// order.
pub fn split(graph: &KnowledgeGraph, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    if graph.len() < 2 {
        return Err(Error::InvalidSpec(format!(
            "need at least 2 triples to split, got {}",
            graph.len()
        )));
    }
    let mut rng = stream_rng(spec.seed, Stream::Split);
    let triples = graph.triples();
    let mut in_test = vec![false; triples.len()];
    if spec.stratified {
        let mut by_relation: BTreeMap<RelationId, Vec<usize>> = BTreeMap::new();
        for (i, t) in triples.iter().enumerate() {
            by_relation.entry(t.relation).or_default().push(i);
        }
        for members in by_relation.values() {
            let k = test_size(members.len(), spec.train_fraction);
            for j in index::sample(&mut rng, members.len(), k) {
                in_test[members[j]] = true;
            }
        }
    } else {
        let k = test_size(triples.len(), spec.train_fraction);
        for j in index::sample(&mut rng, triples.len(), k) {
            in_test[j] = true;
        }
    }
    let (test, train): (Vec<_>, Vec<_>) = triples.iter().zip(&in_test).partition(|(_, &t)| t);
    Ok(Split {
        train: train.into_iter().map(|(t, _)| *t).collect(),
        test: test.into_iter().map(|(t, _)| *t).collect(),
    })
}
