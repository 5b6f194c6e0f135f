//! End-to-end comparison runs: split a graph, train TransE and MDE on the
//! training part and rank the held-out triples with both.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::eval::{evaluate, RankingConfig, RankingReport};
use crate::graph::KnowledgeGraph;
use crate::models::{train, ModelConfig, ModelKind, TrainReport};
use crate::split::{split, SplitSpec};

/// Everything a run depends on. `seed` is the root seed; it is copied into
/// the split and both models whenever it is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub split: SplitSpec,
    pub ranking: RankingConfig,
    pub transe: ModelConfig,
    pub mde: ModelConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig::with_seed(0)
    }
}

impl ExperimentConfig {
    pub fn with_seed(seed: u64) -> Self {
        let mut c = ExperimentConfig {
            seed,
            split: SplitSpec::default(),
            ranking: RankingConfig::default(),
            transe: ModelConfig::transe(),
            mde: ModelConfig::mde(),
        };
        c.set_seed(seed);
        c
    }

    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.split.seed = seed;
        self.transe.seed = seed;
        self.mde.seed = seed;
    }

    pub fn model(&self, kind: ModelKind) -> &ModelConfig {
        match kind {
            ModelKind::TransE => &self.transe,
            ModelKind::Mde => &self.mde,
        }
    }

    pub fn model_mut(&mut self, kind: ModelKind) -> &mut ModelConfig {
        match kind {
            ModelKind::TransE => &mut self.transe,
            ModelKind::Mde => &mut self.mde,
        }
    }

    /// Applies one `key=value` setting. Unprefixed model keys go to both
    /// models, `transe.`/`mde.` keys to one. Unknown keys are an error.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        let value = value.trim();
        let bad = || Error::InvalidArgument(format!("bad value {value:?} for {key}"));
        match key {
            "seed" => self.set_seed(value.parse().map_err(|_| bad())?),
            "train_fraction" => self.split.train_fraction = value.parse().map_err(|_| bad())?,
            "stratified" => self.split.stratified = value.parse().map_err(|_| bad())?,
            "ranking" | "ranking.mode" => self.ranking.mode = value.parse()?,
            "tie_policy" | "ranking.tie_policy" => self.ranking.tie_policy = value.parse()?,
            "hits_at" | "ranking.hits_at" => {
                self.ranking.hits_at = value
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?
            }
            _ => {
                let a = self.transe.apply(key, value)?;
                let b = self.mde.apply(key, value)?;
                if !(a || b) {
                    return Err(Error::InvalidArgument(format!("unknown setting {key:?}")));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.split.validate()?;
        self.ranking.validate()?;
        self.transe.validate()?;
        self.mde.validate()
    }

    /// Fully resolved settings, one `key=value` line each, fixed order.
    pub fn echo(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "train_fraction={}", self.split.train_fraction);
        let _ = writeln!(out, "stratified={}", self.split.stratified);
        let _ = writeln!(out, "ranking.mode={}", self.ranking.mode.as_str());
        let _ = writeln!(out, "ranking.tie_policy={}", self.ranking.tie_policy.as_str());
        let hits: Vec<String> = self.ranking.hits_at.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "ranking.hits_at={}", hits.join(","));
        for m in [&self.transe, &self.mde] {
            for (k, v) in m.to_pairs() {
                if k != "model" {
                    let _ = writeln!(out, "{}.{k}={v}", m.model);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ModelRun {
    pub kind: ModelKind,
    pub train: TrainReport,
    pub eval: RankingReport,
}

#[derive(Debug, Clone)]
pub struct ReproduceReport {
    pub config: ExperimentConfig,
    pub entities: usize,
    pub relations: usize,
    pub train_triples: usize,
    pub test_triples: usize,
    pub runs: Vec<ModelRun>,
}

/// Splits `graph`, trains TransE then MDE on the training part and ranks
/// the test part against every entity of the graph.
pub fn reproduce(graph: &KnowledgeGraph, config: &ExperimentConfig) -> Result<ReproduceReport> {
    config.validate()?;
    let parts = split(graph, &config.split)?;
    let mut runs = Vec::new();
    for kind in ModelKind::ALL {
        let (model, report) = train(
            &parts.train,
            graph.entity_count(),
            graph.relation_count(),
            config.model(kind),
        )?;
        let eval = evaluate(
            &model,
            &parts.test,
            graph.entity_count(),
            graph.triple_set(),
            &config.ranking,
        )?;
        runs.push(ModelRun {
            kind,
            train: report,
            eval,
        });
    }
    Ok(ReproduceReport {
        config: config.clone(),
        entities: graph.entity_count(),
        relations: graph.relation_count(),
        train_triples: parts.train.len(),
        test_triples: parts.test.len(),
        runs,
    })
}

impl ReproduceReport {
    pub fn run(&self, kind: ModelKind) -> Option<&ModelRun> {
        self.runs.iter().find(|r| r.kind == kind)
    }

    /// Machine-readable report: the config echo, data sizes, then per model
    /// training fit and ranking metrics. Contains nothing that varies
    /// between runs with the same inputs.
    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for line in self.config.echo().lines() {
            let _ = writeln!(out, "config.{line}");
        }
        let _ = writeln!(out, "data.entities={}", self.entities);
        let _ = writeln!(out, "data.relations={}", self.relations);
        let _ = writeln!(out, "data.train={}", self.train_triples);
        let _ = writeln!(out, "data.test={}", self.test_triples);
        for r in &self.runs {
            let p = r.kind.as_str();
            let _ = writeln!(out, "{p}.train_hit1={:.6}", r.train.train_hit1);
            let _ = writeln!(
                out,
                "{p}.final_loss={:.6}",
                r.train.loss_trace.last().copied().unwrap_or(f64::NAN)
            );
            out.push_str(&r.eval.to_kv(&format!("{p}.")));
        }
        out
    }

    /// Aligned comparison table with one row per model, preceded by the
    /// config echo as `#` comments.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for line in self.config.echo().lines() {
            let _ = writeln!(out, "# {line}");
        }
        let _ = writeln!(
            out,
            "# {} entities, {} relations, {} train / {} test triples, {} ranking",
            self.entities,
            self.relations,
            self.train_triples,
            self.test_triples,
            self.config.ranking.mode.as_str()
        );
        let _ = write!(out, "{:<8} {:>10} {:>8}", "model", "MR", "MRR");
        for n in &self.config.ranking.hits_at {
            let _ = write!(out, " {:>8}", format!("hit@{n}"));
        }
        let _ = writeln!(out, " {:>10} {:>9}", "train_h@1", "time_s");
        for r in &self.runs {
            let m = &r.eval.overall;
            let name = match r.kind {
                ModelKind::TransE => "TransE",
                ModelKind::Mde => "MDE",
            };
            let _ = write!(out, "{name:<8} {:>10.1} {:>8.3}", m.mr, m.mrr);
            for (_, h) in &m.hits {
                let _ = write!(out, " {h:>8.3}");
            }
            let _ = writeln!(out, " {:>10.3} {:>9.2}", r.train.train_hit1, r.train.wall_time_secs);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{generate, SyntheticKind, SyntheticSpec};

    fn quick(seed: u64) -> ExperimentConfig {
        let mut c = ExperimentConfig::with_seed(seed);
        c.apply("iterations", "20").unwrap();
        c
    }

    #[test]
    fn apply_routes_keys() {
        let mut c = ExperimentConfig::default();
        c.apply("seed", "7").unwrap();
        assert_eq!((c.split.seed, c.transe.seed, c.mde.seed), (7, 7, 7));
        c.apply("mde.dim", "12").unwrap();
        c.apply("lr", "0.02").unwrap();
        c.apply("ranking", "filtered").unwrap();
        c.apply("hits_at", "1, 5").unwrap();
        assert_eq!((c.mde.dim, c.transe.dim), (12, 20));
        assert_eq!((c.mde.learning_rate, c.transe.learning_rate), (0.02, 0.02));
        assert_eq!(c.ranking.hits_at, vec![1, 5]);
        assert!(c.apply("bogus", "1").is_err());
        assert!(c.apply("train_fraction", "x").is_err());
        assert!(c.echo().contains("mde.dim=12\n"));
    }

    #[test]
    fn reproduce_reports_both_models_deterministically() {
        let g = generate(&SyntheticSpec::new(SyntheticKind::Symmetry, 2)).unwrap();
        let a = reproduce(&g, &quick(4)).unwrap();
        let b = reproduce(&g, &quick(4)).unwrap();
        assert_eq!(a.to_kv(), b.to_kv());
        let kv = a.to_kv();
        for key in [
            "transe.mrr=",
            "mde.mr=",
            "mde.hit@10=",
            "transe.hit@3=",
            "config.seed=4",
        ] {
            assert!(kv.contains(key), "{key}");
        }
        assert_eq!(a.train_triples + a.test_triples, g.len());
        let table = a.to_table();
        assert!(table.contains("TransE") && table.contains("MDE") && table.contains("hit@10"));
        assert_ne!(reproduce(&g, &quick(5)).unwrap().to_kv(), kv);
    }
}
