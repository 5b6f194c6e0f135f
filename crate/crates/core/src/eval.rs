//! Link-prediction evaluation by corruption ranking: every test triple is
//! ranked against all of its head replacements and, separately, all of its
//! tail replacements.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{EntityId, Side, Triple};
use crate::models::TripleScorer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RankingMode {
    #[default]
    Raw,
    /// Corruptions that are themselves known triples are not competitors.
    Filtered,
}

impl RankingMode {
    pub fn as_str(self) -> &'static str {
        match self {
            RankingMode::Raw => "raw",
            RankingMode::Filtered => "filtered",
        }
    }
}

impl FromStr for RankingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(RankingMode::Raw),
            "filtered" => Ok(RankingMode::Filtered),
            other => Err(Error::InvalidArgument(format!("unknown ranking mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TiePolicy {
    /// Half of the tied competitors rank ahead.
    #[default]
    Mean,
    Optimistic,
    Pessimistic,
}

impl TiePolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            TiePolicy::Mean => "mean",
            TiePolicy::Optimistic => "optimistic",
            TiePolicy::Pessimistic => "pessimistic",
        }
    }
}

impl FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean" => Ok(TiePolicy::Mean),
            "optimistic" => Ok(TiePolicy::Optimistic),
            "pessimistic" => Ok(TiePolicy::Pessimistic),
            other => Err(Error::InvalidArgument(format!("unknown tie policy {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingConfig {
    pub mode: RankingMode,
    pub hits_at: Vec<usize>,
    pub tie_policy: TiePolicy,
}

impl Default for RankingConfig {
    fn default() -> Self {
        RankingConfig {
            mode: RankingMode::Raw,
            hits_at: vec![1, 3, 10],
            tie_policy: TiePolicy::Mean,
        }
    }
}

impl RankingConfig {
    pub fn filtered() -> Self {
        RankingConfig {
            mode: RankingMode::Filtered,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.hits_at.is_empty() || self.hits_at.contains(&0) || !self.hits_at.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidArgument(format!(
                "hits_at must be positive and strictly increasing, got {:?}",
                self.hits_at
            )));
        }
        Ok(())
    }
}

/// Rank of `triple` among its corruptions on `side`:
/// `1 + #strictly better + tie adjustment`.
pub fn rank_query<S: TripleScorer + ?Sized>(
    scorer: &S,
    triple: Triple,
    side: Side,
    entity_count: usize,
    known: &HashSet<Triple>,
    config: &RankingConfig,
) -> Result<f64> {
    if triple.head.index() >= entity_count || triple.tail.index() >= entity_count {
        return Err(Error::InvalidArgument(format!(
            "{triple} has an entity outside 0..{entity_count}"
        )));
    }
    Ok(rank_unchecked(scorer, triple, side, entity_count, known, config))
}

fn rank_unchecked<S: TripleScorer + ?Sized>(
    scorer: &S,
    triple: Triple,
    side: Side,
    entity_count: usize,
    known: &HashSet<Triple>,
    config: &RankingConfig,
) -> f64 {
    let truth = scorer.score_triple(triple);
    let original = triple.entity(side);
    let (mut better, mut ties) = (0usize, 0usize);
    for e in 0..entity_count as u32 {
        let e = EntityId(e);
        if e == original {
            continue;
        }
        let candidate = triple.with_side(side, e);
        if config.mode == RankingMode::Filtered && known.contains(&candidate) {
            continue;
        }
        let s = scorer.score_triple(candidate);
        if s < truth {
            better += 1;
        } else if s == truth {
            ties += 1;
        }
    }
    let adjust = match config.tie_policy {
        TiePolicy::Mean => ties as f64 / 2.0,
        TiePolicy::Optimistic => 0.0,
        TiePolicy::Pessimistic => ties as f64,
    };
    1.0 + better as f64 + adjust
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub queries: usize,
    pub mr: f64,
    pub mrr: f64,
    /// `(N, hit@N)` in the order of `RankingConfig::hits_at`.
    pub hits: Vec<(usize, f64)>,
}

impl Metrics {
    pub fn from_ranks(ranks: &[f64], hits_at: &[usize]) -> Self {
        let n = ranks.len() as f64;
        Metrics {
            queries: ranks.len(),
            mr: ranks.iter().sum::<f64>() / n,
            mrr: ranks.iter().map(|r| 1.0 / r).sum::<f64>() / n,
            hits: hits_at
                .iter()
                .map(|&k| (k, ranks.iter().filter(|&&r| r <= k as f64).count() as f64 / n))
                .collect(),
        }
    }

    pub fn hit(&self, n: usize) -> Option<f64> {
        self.hits.iter().find(|(k, _)| *k == n).map(|(_, v)| *v)
    }

    /// hit@N monotone in N, `1/MR <= MRR <= 1`, `MRR >= hit@1`,
    /// `1 <= MR <= entity_count`.
    pub fn check(&self, entity_count: usize) -> Result<()> {
        const EPS: f64 = 1e-12;
        let fail = |m: String| Err(Error::MetricInvariant(m));
        if !self.hits.windows(2).all(|w| w[0].1 <= w[1].1) {
            return fail(format!("hits not monotone: {:?}", self.hits));
        }
        if !(1.0 / self.mr <= self.mrr + EPS && self.mrr <= 1.0 + EPS) {
            return fail(format!("MRR {} outside [1/MR, 1] with MR {}", self.mrr, self.mr));
        }
        if let Some(h1) = self.hit(1) {
            if self.mrr + EPS < h1 {
                return fail(format!("MRR {} below hit@1 {h1}", self.mrr));
            }
        }
        if !(self.mr >= 1.0 - EPS && self.mr <= entity_count as f64 + EPS) {
            return fail(format!("MR {} outside [1, {entity_count}]", self.mr));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryRank {
    pub triple: Triple,
    pub side: Side,
    pub rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub config: RankingConfig,
    pub entity_count: usize,
    /// Head and tail queries pooled.
    pub overall: Metrics,
    pub head: Metrics,
    pub tail: Metrics,
    pub ranks: Vec<QueryRank>,
}

impl RankingReport {
    pub fn mr(&self) -> f64 {
        self.overall.mr
    }

    pub fn mrr(&self) -> f64 {
        self.overall.mrr
    }

    pub fn hit(&self, n: usize) -> Option<f64> {
        self.overall.hit(n)
    }

    /// `key=value` lines; `prefix` is prepended to every key.
    pub fn to_kv(&self, prefix: &str) -> String {
        let mut out = String::new();
        for (scope, m) in [("", &self.overall), ("head.", &self.head), ("tail.", &self.tail)] {
            let _ = writeln!(out, "{prefix}{scope}queries={}", m.queries);
            let _ = writeln!(out, "{prefix}{scope}mr={:.6}", m.mr);
            let _ = writeln!(out, "{prefix}{scope}mrr={:.6}", m.mrr);
            for (k, v) in &m.hits {
                let _ = writeln!(out, "{prefix}{scope}hit@{k}={v:.6}");
            }
        }
        out
    }

    /// One `head<TAB>relation<TAB>tail<TAB>side<TAB>rank` line per query.
    pub fn ranks_tsv(&self, label: impl Fn(Triple) -> [String; 3]) -> String {
        let mut out = String::new();
        for q in &self.ranks {
            let [h, r, t] = label(q.triple);
            let _ = writeln!(out, "{h}\t{r}\t{t}\t{}\t{}", q.side.as_str(), q.rank);
        }
        out
    }
}

/// Ranks every test triple on both sides and aggregates. Metric invariants
/// are checked before returning.
pub fn evaluate<S: TripleScorer + ?Sized>(
    scorer: &S,
    test: &[Triple],
    entity_count: usize,
    known: &HashSet<Triple>,
    config: &RankingConfig,
) -> Result<RankingReport> {
    config.validate()?;
    if test.is_empty() {
        return Err(Error::EmptyTestSet);
    }
    if let Some(t) = test
        .iter()
        .find(|t| t.head.index() >= entity_count || t.tail.index() >= entity_count)
    {
        return Err(Error::InvalidArgument(format!(
            "{t} has an entity outside 0..{entity_count}"
        )));
    }
    let queries: Vec<(Triple, Side)> = test.iter().flat_map(|&t| Side::BOTH.map(|s| (t, s))).collect();
    let rank = |&(t, s): &(Triple, Side)| rank_unchecked(scorer, t, s, entity_count, known, config);
    #[cfg(feature = "parallel")]
    let ranks: Vec<f64> = queries.par_iter().map(rank).collect();
    #[cfg(not(feature = "parallel"))]
    let ranks: Vec<f64> = queries.iter().map(rank).collect();

    let side_ranks = |side: Side| -> Vec<f64> {
        queries
            .iter()
            .zip(&ranks)
            .filter(|((_, s), _)| *s == side)
            .map(|(_, &r)| r)
            .collect()
    };
    let report = RankingReport {
        config: config.clone(),
        entity_count,
        overall: Metrics::from_ranks(&ranks, &config.hits_at),
        head: Metrics::from_ranks(&side_ranks(Side::Head), &config.hits_at),
        tail: Metrics::from_ranks(&side_ranks(Side::Tail), &config.hits_at),
        ranks: queries
            .iter()
            .zip(&ranks)
            .map(|(&(triple, side), &rank)| QueryRank { triple, side, rank })
            .collect(),
    };
    for m in [&report.overall, &report.head, &report.tail] {
        m.check(entity_count)?;
    }
    Ok(report)
}

/// Filtered hit@1 of `triples` against `known`, both sides pooled.
pub fn filtered_hit_at_1<S: TripleScorer + ?Sized>(
    scorer: &S,
    triples: &[Triple],
    entity_count: usize,
    known: &HashSet<Triple>,
) -> f64 {
    let config = RankingConfig {
        hits_at: vec![1],
        ..RankingConfig::filtered()
    };
    evaluate(scorer, triples, entity_count, known, &config)
        .ok()
        .and_then(|r| r.hit(1))
        .unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_score_ranks_first() {
        let scorer = |t: Triple| if t.tail.0 == 1 { 0.0 } else { 5.0 + t.tail.0 as f64 };
        let r = rank_query(
            &scorer,
            Triple::new(0, 0, 1),
            Side::Tail,
            6,
            &HashSet::new(),
            &RankingConfig::default(),
        );
        assert_eq!(r.unwrap(), 1.0);
    }

    #[test]
    fn one_strictly_better_is_rank_two() {
        // tail candidates: 0 -> 5 (truth), 1 -> 1, 2 -> 9
        let scores = [5.0, 1.0, 9.0];
        let scorer = move |t: Triple| scores[t.tail.index()];
        let r = rank_query(
            &scorer,
            Triple::new(0, 0, 0),
            Side::Tail,
            3,
            &HashSet::new(),
            &RankingConfig::default(),
        );
        assert_eq!(r.unwrap(), 2.0);
    }

    #[test]
    fn tie_policies() {
        let scorer = |_: Triple| 1.0;
        let q = |policy| {
            let c = RankingConfig {
                tie_policy: policy,
                ..RankingConfig::default()
            };
            rank_query(&scorer, Triple::new(0, 0, 1), Side::Head, 5, &HashSet::new(), &c).unwrap()
        };
        assert_eq!(q(TiePolicy::Mean), 3.0);
        assert_eq!(q(TiePolicy::Optimistic), 1.0);
        assert_eq!(q(TiePolicy::Pessimistic), 5.0);
    }

    #[test]
    fn filtering_removes_known_competitors() {
        let scores = [5.0, 1.0, 9.0];
        let scorer = move |t: Triple| scores[t.tail.index()];
        let known: HashSet<_> = [Triple::new(0, 0, 1)].into();
        let r = rank_query(
            &scorer,
            Triple::new(0, 0, 0),
            Side::Tail,
            3,
            &known,
            &RankingConfig::filtered(),
        );
        assert_eq!(r.unwrap(), 1.0);
    }

    #[test]
    fn out_of_range_query_is_invalid() {
        let scorer = |_: Triple| 0.0;
        let r = rank_query(
            &scorer,
            Triple::new(0, 0, 7),
            Side::Tail,
            3,
            &HashSet::new(),
            &RankingConfig::default(),
        );
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        assert!("middle".parse::<Side>().is_err());
    }

    #[test]
    fn metric_arithmetic() {
        let m = Metrics::from_ranks(&[1.0, 3.0, 12.0], &[1, 3, 10]);
        assert!((m.mr - 16.0 / 3.0).abs() < 1e-12);
        assert!((m.mrr - (1.0 + 1.0 / 3.0 + 1.0 / 12.0) / 3.0).abs() < 1e-12);
        assert!((m.mrr - 0.472_222_222).abs() < 1e-8);
        assert_eq!(m.hit(10), Some(2.0 / 3.0));
        assert_eq!(m.hit(1), Some(1.0 / 3.0));
        m.check(20).unwrap();
    }

    #[test]
    fn perfect_model_metrics() {
        let m = Metrics::from_ranks(&[1.0; 8], &[1, 3, 10]);
        assert_eq!((m.mr, m.mrr), (1.0, 1.0));
        assert!(m.hits.iter().all(|(_, v)| *v == 1.0));
    }

    #[test]
    fn empty_test_set_is_an_error() {
        let scorer = |_: Triple| 0.0;
        let r = evaluate(&scorer, &[], 3, &HashSet::new(), &RankingConfig::default());
        assert!(matches!(r, Err(Error::EmptyTestSet)));
    }

    #[test]
    fn evaluate_pools_both_sides() {
        let scorer = |t: Triple| (t.head.0 as f64 - t.tail.0 as f64 + 1.0).abs();
        let test = [Triple::new(0, 0, 1), Triple::new(2, 0, 3)];
        let r = evaluate(&scorer, &test, 5, &HashSet::new(), &RankingConfig::default()).unwrap();
        assert_eq!(r.overall.queries, 4);
        assert_eq!(r.head.queries, 2);
        assert_eq!(r.ranks.len(), 4);
        assert_eq!(r.overall.mr, 1.0);
        assert!(r.to_kv("m.").contains("m.hit@10=1.000000"));
    }

    #[test]
    fn invariant_violation_is_detected() {
        let m = Metrics {
            queries: 1,
            mr: 2.0,
            mrr: 0.1,
            hits: vec![(1, 0.0)],
        };
        assert!(matches!(m.check(10), Err(Error::MetricInvariant(_))));
        let m = Metrics {
            queries: 1,
            mr: 2.0,
            mrr: 0.5,
            hits: vec![(1, 0.5), (3, 0.2)],
        };
        assert!(m.check(10).is_err());
        let m = Metrics {
            queries: 1,
            mr: 20.0,
            mrr: 0.05,
            hits: vec![(1, 0.0)],
        };
        assert!(m.check(10).is_err());
    }

    #[test]
    fn bad_hits_config_rejected() {
        let c = RankingConfig {
            hits_at: vec![3, 1],
            ..RankingConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
