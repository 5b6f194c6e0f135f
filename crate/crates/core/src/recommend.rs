//! Existence probabilities for candidate triples, post recommendations for
//! users, and cohort analyses of how likely groups of users are to like a
//! given post.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, RelationId, Triple};
use crate::models::space::EmbeddingSpace;
use crate::models::{Model, TripleScorer};
use crate::ontology::{self, EntityKind};

/// Per-relation reference score: the largest (least plausible) score any
/// training triple of `relation` receives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityBasis {
    pub relation: RelationId,
    pub max_training_score: f64,
    pub clamp: bool,
}

impl ProbabilityBasis {
    pub fn new(relation: RelationId, max_training_score: f64, clamp: bool) -> Self {
        ProbabilityBasis {
            relation,
            max_training_score,
            clamp,
        }
    }

    /// Scans the training triples of `relation` for the maximum score.
    pub fn from_training<S: TripleScorer + ?Sized>(
        scorer: &S,
        train: &[Triple],
        relation: RelationId,
        clamp: bool,
    ) -> Result<Self> {
        let max = train
            .iter()
            .filter(|t| t.relation == relation)
            .map(|&t| scorer.score_triple(t))
            .fold(None, |m: Option<f64>, s| Some(m.map_or(s, |m| m.max(s))))
            .ok_or_else(|| Error::InvalidArgument(format!("no training triples of relation {relation}")))?;
        Ok(ProbabilityBasis::new(relation, max, clamp))
    }

    pub fn with_clamp(self, clamp: bool) -> Self {
        ProbabilityBasis { clamp, ..self }
    }

    /// `max_training_score / score`. Clamped: non-positive scores give 1
    /// and the ratio is limited to [0, 1].
    pub fn probability(&self, score: f64) -> Result<f64> {
        if self.clamp {
            if score <= 0.0 {
                return Ok(1.0);
            }
            return Ok((self.max_training_score / score).clamp(0.0, 1.0));
        }
        if score == 0.0 {
            return Err(Error::DegenerateScore);
        }
        Ok(self.max_training_score / score)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Recommendation {
    pub user: EntityId,
    pub tweet: EntityId,
    pub score: f64,
    pub probability: f64,
}

fn ontology_of(graph: &KnowledgeGraph) -> Result<&ontology::SocialOntology> {
    graph
        .ontology()
        .ok_or_else(|| Error::InvalidArgument("graph has no social ontology attached".into()))
}

fn check_user(graph: &KnowledgeGraph, user: EntityId) -> Result<()> {
    if user.index() >= graph.entity_count() {
        return Err(Error::InvalidUser(format!("{user} is not in the graph")));
    }
    match ontology_of(graph)?.kind(user) {
        Some(EntityKind::User) => Ok(()),
        other => Err(Error::InvalidUser(format!(
            "{} has kind {}",
            graph.vocab().entity_label(user),
            other.map_or("unknown", EntityKind::as_str)
        ))),
    }
}

/// The `k` most plausible posts `user` does not already like under the
/// basis relation, ascending by score, ties by post id.
pub fn recommend<S: TripleScorer + ?Sized>(
    scorer: &S,
    graph: &KnowledgeGraph,
    basis: &ProbabilityBasis,
    user: EntityId,
    k: usize,
) -> Result<Vec<Recommendation>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    check_user(graph, user)?;
    let liked = graph.tails_of(user, basis.relation);
    let mut scored: Vec<(f64, EntityId)> = ontology_of(graph)?
        .entities_of_kind(EntityKind::Tweet)
        .into_iter()
        .filter(|t| !liked.contains(t))
        .map(|t| {
            (
                scorer.score_triple(Triple {
                    head: user,
                    relation: basis.relation,
                    tail: t,
                }),
                t,
            )
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    scored.truncate(k);
    scored
        .into_iter()
        .map(|(score, tweet)| {
            Ok(Recommendation {
                user,
                tweet,
                score,
                probability: basis.probability(score)?,
            })
        })
        .collect()
}

/// Cosine of the angle between two entity vectors of the first embedding
/// set.
pub fn tweet_similarity(space: &EmbeddingSpace, a: EntityId, b: EntityId) -> Result<f64> {
    for e in [a, b] {
        if e.index() >= space.entity_count() {
            return Err(Error::UnknownEntity(e.to_string()));
        }
    }
    let (x, y) = (space.entity(0, a.index()), space.entity(0, b.index()));
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    if nx == 0.0 {
        return Err(Error::DegenerateVector(a.index()));
    }
    if ny == 0.0 {
        return Err(Error::DegenerateVector(b.index()));
    }
    let dot: f64 = x.iter().zip(y).map(|(p, q)| p * q).sum();
    Ok((dot / (nx * ny)).clamp(-1.0, 1.0))
}

/// Which followees qualify a user for a cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum FolloweeRule {
    /// Followed by at least `min_followers` users.
    Hub { min_followers: usize },
    /// Follows exactly `following_count` users, all of them with a job
    /// class when `professional_only`.
    Focused {
        following_count: usize,
        professional_only: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CohortRule {
    /// Follows a qualifying user who likes a post similar to the target;
    /// with `user_likes_similar` the member must like one as well.
    Follows {
        followee: FolloweeRule,
        user_likes_similar: bool,
    },
    /// Follows nobody and likes nothing.
    NewUser,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortSpec {
    pub name: String,
    pub rule: CohortRule,
}

impl CohortSpec {
    pub fn new(name: impl Into<String>, rule: CohortRule) -> Self {
        CohortSpec {
            name: name.into(),
            rule,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CohortConfig {
    /// Cosine at or above which two posts count as similar.
    pub similarity_threshold: f64,
    pub max_members: usize,
}

impl Default for CohortConfig {
    fn default() -> Self {
        CohortConfig {
            similarity_threshold: 0.9,
            max_members: 5,
        }
    }
}

/// The four standard groups: hub followers who like similar posts, hub
/// followers whose hub alone does, followers of a focused user, new users.
pub fn standard_cohorts(min_followers: usize, focused_following: usize) -> Vec<CohortSpec> {
    let hub = FolloweeRule::Hub { min_followers };
    let focused = FolloweeRule::Focused {
        following_count: focused_following,
        professional_only: true,
    };
    vec![
        CohortSpec::new(
            "follows_hub_both_like_similar",
            CohortRule::Follows {
                followee: hub,
                user_likes_similar: true,
            },
        ),
        CohortSpec::new(
            "follows_hub_hub_likes_similar",
            CohortRule::Follows {
                followee: hub,
                user_likes_similar: false,
            },
        ),
        CohortSpec::new(
            "follows_focused_both_like_similar",
            CohortRule::Follows {
                followee: focused,
                user_likes_similar: true,
            },
        ),
        CohortSpec::new("new_users", CohortRule::NewUser),
    ]
}

struct CohortContext<'a> {
    model: &'a Model,
    graph: &'a KnowledgeGraph,
    target: EntityId,
    likes: Option<RelationId>,
    config: CohortConfig,
}

impl CohortContext<'_> {
    fn likes_similar(&self, user: EntityId) -> Result<bool> {
        let Some(likes) = self.likes else { return Ok(false) };
        for &t in self.graph.tails_of(user, likes) {
            if t != self.target
                && tweet_similarity(&self.model.space, t, self.target)? >= self.config.similarity_threshold
            {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn qualifies(&self, followee: EntityId, rule: FolloweeRule) -> Result<bool> {
        let profile = self.graph.degree_profile(followee)?;
        Ok(match rule {
            FolloweeRule::Hub { min_followers } => profile.follower_count >= min_followers,
            FolloweeRule::Focused {
                following_count,
                professional_only,
            } => {
                let followees = self.graph.followees(followee);
                followees.len() == following_count
                    && (!professional_only || {
                        let ont = ontology_of(self.graph)?;
                        followees
                            .iter()
                            .all(|&f| !matches!(ont.user_class(f), None | Some(ontology::UserClass::Unclassified)))
                    })
            }
        })
    }

    fn matches(&self, user: EntityId, rule: CohortRule) -> Result<bool> {
        match rule {
            CohortRule::NewUser => {
                let p = self.graph.degree_profile(user)?;
                Ok(p.following_count == 0 && p.liked_count == 0)
            }
            CohortRule::Follows {
                followee,
                user_likes_similar,
            } => {
                if user_likes_similar && !self.likes_similar(user)? {
                    return Ok(false);
                }
                for f in self.graph.followees(user) {
                    if f != user && self.qualifies(f, followee)? && self.likes_similar(f)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }
}

/// Members of each cohort, in spec order. Users are visited by id and join
/// the first cohort whose rule they satisfy, so cohorts never overlap; each
/// cohort stops at `config.max_members`.
pub fn cohort_members(
    model: &Model,
    graph: &KnowledgeGraph,
    specs: &[CohortSpec],
    target: EntityId,
    config: &CohortConfig,
) -> Result<Vec<Vec<EntityId>>> {
    if !(config.similarity_threshold.is_finite() && (-1.0..=1.0).contains(&config.similarity_threshold)) {
        return Err(Error::InvalidArgument(
            "similarity threshold must lie in [-1, 1]".into(),
        ));
    }
    let ont = ontology_of(graph)?;
    if ont.kind(target) != Some(EntityKind::Tweet) {
        return Err(Error::InvalidArgument(format!(
            "{} is not a post",
            graph.vocab().entity_label(target)
        )));
    }
    let ctx = CohortContext {
        model,
        graph,
        target,
        likes: graph.vocab().relation_id(ontology::LIKES_RESEARCH_TWEET),
        config: *config,
    };
    let mut members = vec![Vec::new(); specs.len()];
    for user in ont.entities_of_kind(EntityKind::User) {
        for (spec, out) in specs.iter().zip(members.iter_mut()) {
            if ctx.matches(user, spec.rule)? {
                if out.len() < config.max_members {
                    out.push(user);
                }
                break;
            }
        }
    }
    Ok(members)
}

/// Mean probability that the members like `target`.
pub fn cohort_mean_probability<S: TripleScorer + ?Sized>(
    scorer: &S,
    basis: &ProbabilityBasis,
    name: &str,
    members: &[EntityId],
    target: EntityId,
) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptyCohort(name.to_owned()));
    }
    let mut total = 0.0;
    for &user in members {
        total += basis.probability(scorer.score_triple(Triple {
            head: user,
            relation: basis.relation,
            tail: target,
        }))?;
    }
    Ok(total / members.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortRow {
    pub name: String,
    pub members: Vec<EntityId>,
    pub clamped: Option<f64>,
    pub unclamped: Option<f64>,
}

/// One row per cohort with both probability modes. Empty cohorts get no
/// means, and no unclamped mean when some member scores exactly zero.
pub fn analyze_cohorts(
    model: &Model,
    graph: &KnowledgeGraph,
    basis: &ProbabilityBasis,
    specs: &[CohortSpec],
    target: EntityId,
    config: &CohortConfig,
) -> Result<Vec<CohortRow>> {
    let members = cohort_members(model, graph, specs, target, config)?;
    specs
        .iter()
        .zip(members)
        .map(|(spec, members)| {
            let (clamped, unclamped) = if members.is_empty() {
                (None, None)
            } else {
                let c = cohort_mean_probability(model, &basis.with_clamp(true), &spec.name, &members, target)?;
                let u = match cohort_mean_probability(model, &basis.with_clamp(false), &spec.name, &members, target) {
                    Err(Error::DegenerateScore) => None,
                    other => Some(other?),
                };
                (Some(c), u)
            };
            Ok(CohortRow {
                name: spec.name.clone(),
                members,
                clamped,
                unclamped,
            })
        })
        .collect()
}

/// The most-liked post, lowest id on ties.
pub fn most_liked_tweet(graph: &KnowledgeGraph) -> Option<EntityId> {
    let likes = graph.vocab().relation_id(ontology::LIKES_RESEARCH_TWEET)?;
    let ont = graph.ontology()?;
    ont.entities_of_kind(EntityKind::Tweet)
        .into_iter()
        .map(|t| (graph.heads_of(likes, t).len(), t))
        .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
        .map(|(_, t)| t)
}

impl fmt::Display for CohortRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| format!("{v:.3}"));
        write!(
            f,
            "{:<36} {:>7} {:>9} {:>11}",
            self.name,
            self.members.len(),
            show(self.clamped),
            show(self.unclamped)
        )
    }
}
