//! Knowledge-graph data model: dense id vocabularies, triples, and the
//! indexed triple store.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{self, SocialOntology};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntityId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationId(pub u32);

impl EntityId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl RelationId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

impl fmt::Display for RelationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

/// An id-level fact `(head, relation, tail)`. Self-loops are allowed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triple {
    pub head: EntityId,
    pub relation: RelationId,
    pub tail: EntityId,
}

impl Triple {
    pub fn new(head: u32, relation: u32, tail: u32) -> Self {
        Triple {
            head: EntityId(head),
            relation: RelationId(relation),
            tail: EntityId(tail),
        }
    }

    /// Same triple with the entity on `side` replaced.
    pub fn with_side(self, side: Side, entity: EntityId) -> Self {
        match side {
            Side::Head => Triple { head: entity, ..self },
            Side::Tail => Triple { tail: entity, ..self },
        }
    }

    pub fn entity(self, side: Side) -> EntityId {
        match side {
            Side::Head => self.head,
            Side::Tail => self.tail,
        }
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.head, self.relation, self.tail)
    }
}

/// Which end of a triple is being replaced or queried.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Head,
    Tail,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Head, Side::Tail];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Head => "head",
            Side::Tail => "tail",
        }
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "head" => Ok(Side::Head),
            "tail" => Ok(Side::Tail),
            other => Err(Error::InvalidArgument(format!(
                "side must be head or tail, got {other:?}"
            ))),
        }
    }
}

/// A string-level triple as read from a file.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabeledTriple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl LabeledTriple {
    pub fn new(head: impl Into<String>, relation: impl Into<String>, tail: impl Into<String>) -> Self {
        LabeledTriple {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        }
    }
}

impl<A: Into<String>, B: Into<String>, C: Into<String>> From<(A, B, C)> for LabeledTriple {
    fn from((h, r, t): (A, B, C)) -> Self {
        LabeledTriple::new(h, r, t)
    }
}

/// Entity and relation label tables. Ids are dense and assigned in
/// first-appearance order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    entities: Vec<String>,
    relations: Vec<String>,
    entity_ids: HashMap<String, EntityId>,
    relation_ids: HashMap<String, RelationId>,
}

impl Vocabulary {
    pub fn new() -> Self {
        Self::default()
    }

    /// Vocabulary whose first relation ids are pinned to `labels`, in order.
    pub fn with_relations<S: AsRef<str>>(labels: &[S]) -> Self {
        let mut vocab = Self::new();
        for label in labels {
            vocab.intern_relation(label.as_ref());
        }
        vocab
    }

    pub fn from_labels(entities: Vec<String>, relations: Vec<String>) -> Result<Self> {
        let mut vocab = Self::new();
        for label in entities {
            if vocab.entity_ids.contains_key(&label) {
                return Err(Error::InvalidSpec(format!("duplicate entity label {label:?}")));
            }
            vocab.intern_entity(&label);
        }
        for label in relations {
            if vocab.relation_ids.contains_key(&label) {
                return Err(Error::InvalidSpec(format!("duplicate relation label {label:?}")));
            }
            vocab.intern_relation(&label);
        }
        Ok(vocab)
    }

    pub fn intern_entity(&mut self, label: &str) -> EntityId {
        if let Some(&id) = self.entity_ids.get(label) {
            return id;
        }
        let id = EntityId(self.entities.len() as u32);
        self.entities.push(label.to_owned());
        self.entity_ids.insert(label.to_owned(), id);
        id
    }

    pub fn intern_relation(&mut self, label: &str) -> RelationId {
        if let Some(&id) = self.relation_ids.get(label) {
            return id;
        }
        let id = RelationId(self.relations.len() as u32);
        self.relations.push(label.to_owned());
        self.relation_ids.insert(label.to_owned(), id);
        id
    }

    pub fn entity_id(&self, label: &str) -> Option<EntityId> {
        self.entity_ids.get(label).copied()
    }

    pub fn relation_id(&self, label: &str) -> Option<RelationId> {
        self.relation_ids.get(label).copied()
    }

    pub fn entity_label(&self, id: EntityId) -> &str {
        &self.entities[id.index()]
    }

    pub fn relation_label(&self, id: RelationId) -> &str {
        &self.relations[id.index()]
    }

    pub fn entity_labels(&self) -> &[String] {
        &self.entities
    }

    pub fn relation_labels(&self) -> &[String] {
        &self.relations
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relations.len()
    }

    pub fn labeled(&self, triple: Triple) -> LabeledTriple {
        LabeledTriple::new(
            self.entity_label(triple.head),
            self.relation_label(triple.relation),
            self.entity_label(triple.tail),
        )
    }

    /// Looks up a labeled triple without interning anything.
    pub fn resolve(&self, triple: &LabeledTriple) -> Result<Triple> {
        let entity = |label: &str| {
            self.entity_id(label)
                .ok_or_else(|| Error::UnknownEntity(label.to_owned()))
        };
        Ok(Triple {
            head: entity(&triple.head)?,
            relation: self
                .relation_id(&triple.relation)
                .ok_or_else(|| Error::UnknownRelation(triple.relation.clone()))?,
            tail: entity(&triple.tail)?,
        })
    }

    pub fn contains(&self, triple: Triple) -> bool {
        triple.head.index() < self.entity_count()
            && triple.tail.index() < self.entity_count()
            && triple.relation.index() < self.relation_count()
    }
}

/// Counts reported by [`build_graph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildReport {
    pub entities: usize,
    pub relations: usize,
    pub triples: usize,
    pub duplicates: usize,
}

/// Degree summary of one entity, see [`KnowledgeGraph::degree_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DegreeProfile {
    pub in_degree: usize,
    pub out_degree: usize,
    pub follower_count: usize,
    pub following_count: usize,
    pub liked_count: usize,
}

/// Indexed, deduplicated triple store. Immutable once built.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    triples: Vec<Triple>,
    vocab: Vocabulary,
    ontology: Option<SocialOntology>,
    set: HashSet<Triple>,
    tails: HashMap<(EntityId, RelationId), Vec<EntityId>>,
    heads: HashMap<(RelationId, EntityId), Vec<EntityId>>,
    out_edges: Vec<Vec<(RelationId, EntityId)>>,
    in_edges: Vec<Vec<(RelationId, EntityId)>>,
}

/// Builds a graph from labeled triples, assigning ids by first appearance.
pub fn build_graph<T: AsRef<LabeledTriple>>(triples: &[T]) -> Result<(KnowledgeGraph, BuildReport)> {
    KnowledgeGraph::build_with(Vocabulary::new(), triples)
}

impl AsRef<LabeledTriple> for LabeledTriple {
    fn as_ref(&self) -> &LabeledTriple {
        self
    }
}

impl KnowledgeGraph {
    /// Like [`build_graph`] but starting from a pre-seeded vocabulary, so
    /// seeded labels keep their ids.
    pub fn build_with<T: AsRef<LabeledTriple>>(
        mut vocab: Vocabulary,
        triples: &[T],
    ) -> Result<(KnowledgeGraph, BuildReport)> {
        if triples.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut ids = Vec::with_capacity(triples.len());
        for (i, t) in triples.iter().enumerate() {
            let t = t.as_ref();
            for (field, value) in [("head", &t.head), ("relation", &t.relation), ("tail", &t.tail)] {
                if value.trim().is_empty() {
                    return Err(Error::Parse {
                        line: i + 1,
                        message: format!("empty {field} label"),
                    });
                }
            }
            let head = vocab.intern_entity(&t.head);
            let relation = vocab.intern_relation(&t.relation);
            let tail = vocab.intern_entity(&t.tail);
            ids.push(Triple { head, relation, tail });
        }
        let graph = Self::from_ids(vocab, ids)?;
        let report = BuildReport {
            entities: graph.entity_count(),
            relations: graph.relation_count(),
            triples: graph.len(),
            duplicates: triples.len() - graph.len(),
        };
        Ok((graph, report))
    }

    /// Builds from id triples over an existing vocabulary. Duplicates are
    /// dropped keeping the first occurrence.
    pub fn from_ids(vocab: Vocabulary, triples: impl IntoIterator<Item = Triple>) -> Result<Self> {
        let mut set = HashSet::new();
        let mut kept = Vec::new();
        for t in triples {
            if !vocab.contains(t) {
                return Err(if t.relation.index() >= vocab.relation_count() {
                    Error::UnknownRelation(t.relation.to_string())
                } else {
                    Error::UnknownEntity(format!(
                        "{} in {t}",
                        if t.head.index() >= vocab.entity_count() {
                            t.head
                        } else {
                            t.tail
                        }
                    ))
                });
            }
            if set.insert(t) {
                kept.push(t);
            }
        }
        if kept.is_empty() {
            return Err(Error::EmptyGraph);
        }
        let mut graph = KnowledgeGraph {
            triples: kept,
            vocab,
            ontology: None,
            set,
            tails: HashMap::new(),
            heads: HashMap::new(),
            out_edges: Vec::new(),
            in_edges: Vec::new(),
        };
        graph.rebuild_indexes();
        Ok(graph)
    }

    fn rebuild_indexes(&mut self) {
        let n = self.vocab.entity_count();
        self.tails.clear();
        self.heads.clear();
        self.out_edges = vec![Vec::new(); n];
        self.in_edges = vec![Vec::new(); n];
        for &t in &self.triples {
            self.tails.entry((t.head, t.relation)).or_default().push(t.tail);
            self.heads.entry((t.relation, t.tail)).or_default().push(t.head);
            self.out_edges[t.head.index()].push((t.relation, t.tail));
            self.in_edges[t.tail.index()].push((t.relation, t.head));
        }
    }

    /// Attaches ontology metadata. The graph's triples are unchanged.
    pub fn with_ontology(mut self, ontology: SocialOntology) -> Self {
        self.ontology = Some(ontology);
        self
    }

    pub fn ontology(&self) -> Option<&SocialOntology> {
        self.ontology.as_ref()
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn triple_set(&self) -> &HashSet<Triple> {
        &self.set
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.set.contains(triple)
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn entity_count(&self) -> usize {
        self.vocab.entity_count()
    }

    pub fn relation_count(&self) -> usize {
        self.vocab.relation_count()
    }

    pub fn tails_of(&self, head: EntityId, relation: RelationId) -> &[EntityId] {
        self.tails.get(&(head, relation)).map_or(&[], Vec::as_slice)
    }

    pub fn heads_of(&self, relation: RelationId, tail: EntityId) -> &[EntityId] {
        self.heads.get(&(relation, tail)).map_or(&[], Vec::as_slice)
    }

    pub fn out_edges(&self, entity: EntityId) -> &[(RelationId, EntityId)] {
        self.out_edges.get(entity.index()).map_or(&[], Vec::as_slice)
    }

    pub fn in_edges(&self, entity: EntityId) -> &[(RelationId, EntityId)] {
        self.in_edges.get(entity.index()).map_or(&[], Vec::as_slice)
    }

    pub fn labeled_triples(&self) -> Vec<LabeledTriple> {
        self.triples.iter().map(|&t| self.vocab.labeled(t)).collect()
    }

    /// True if both adjacency indexes agree with a fresh rebuild from the
    /// triple list.
    pub fn indexes_consistent(&self) -> bool {
        let mut fresh = self.clone();
        fresh.rebuild_indexes();
        fresh.tails == self.tails
            && fresh.heads == self.heads
            && fresh.out_edges == self.out_edges
            && fresh.in_edges == self.in_edges
            && self.triples.iter().all(|t| {
                self.tails_of(t.head, t.relation).contains(&t.tail)
                    && self.heads_of(t.relation, t.tail).contains(&t.head)
            })
    }

    pub fn entity(&self, label: &str) -> Result<EntityId> {
        self.vocab
            .entity_id(label)
            .ok_or_else(|| Error::UnknownEntity(label.to_owned()))
    }

    /// Follow and like counts for `entity`. A follower is either an
    /// `is_followed_by` out-edge or an `is_following` in-edge.
    pub fn degree_profile(&self, entity: EntityId) -> Result<DegreeProfile> {
        if entity.index() >= self.entity_count() {
            return Err(Error::UnknownEntity(entity.to_string()));
        }
        let followed_by = self.vocab.relation_id(ontology::IS_FOLLOWED_BY);
        let following = self.vocab.relation_id(ontology::IS_FOLLOWING);
        let likes = self.vocab.relation_id(ontology::LIKES_RESEARCH_TWEET);
        let out = self.out_edges(entity);
        let inc = self.in_edges(entity);
        let count = |edges: &[(RelationId, EntityId)], rel: Option<RelationId>| {
            rel.map_or(0, |r| edges.iter().filter(|(er, _)| *er == r).count())
        };
        Ok(DegreeProfile {
            in_degree: inc.len(),
            out_degree: out.len(),
            follower_count: count(out, followed_by) + count(inc, following),
            following_count: count(out, following) + count(inc, followed_by),
            liked_count: count(out, likes),
        })
    }

    /// Users followed by `entity`, from both follow relations, deduplicated
    /// and sorted by id.
    pub fn followees(&self, entity: EntityId) -> Vec<EntityId> {
        let followed_by = self.vocab.relation_id(ontology::IS_FOLLOWED_BY);
        let following = self.vocab.relation_id(ontology::IS_FOLLOWING);
        let mut out: Vec<EntityId> = self
            .out_edges(entity)
            .iter()
            .filter(|(r, _)| Some(*r) == following)
            .chain(self.in_edges(entity).iter().filter(|(r, _)| Some(*r) == followed_by))
            .map(|&(_, e)| e)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lt(h: &str, r: &str, t: &str) -> LabeledTriple {
        LabeledTriple::new(h, r, t)
    }

    #[test]
    fn duplicates_are_removed() {
        let (g, report) = build_graph(&[lt("u1", "is_following", "u2"), lt("u1", "is_following", "u2")]).unwrap();
        assert_eq!((g.entity_count(), g.relation_count(), g.len()), (2, 1, 1));
        assert_eq!(report.duplicates, 1);
    }

    #[test]
    fn self_loop_is_kept() {
        let (g, _) = build_graph(&[lt("a", "r", "a")]).unwrap();
        assert_eq!((g.entity_count(), g.relation_count(), g.len()), (1, 1, 1));
        assert_eq!(g.triples()[0], Triple::new(0, 0, 0));
    }

    #[test]
    fn empty_input_is_an_error() {
        let none: [LabeledTriple; 0] = [];
        assert!(matches!(build_graph(&none), Err(Error::EmptyGraph)));
    }

    #[test]
    fn empty_label_reports_its_line() {
        let err = build_graph(&[lt("a", "r", "b"), lt("a", "", "b")]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn ids_follow_first_appearance() {
        let (g, _) = build_graph(&[lt("x", "p", "y"), lt("z", "q", "x")]).unwrap();
        let v = g.vocab();
        assert_eq!(v.entity_labels(), ["x", "y", "z"]);
        assert_eq!(v.relation_labels(), ["p", "q"]);
        assert_eq!(v.entity_id("z"), Some(EntityId(2)));
        for (i, label) in v.entity_labels().iter().enumerate() {
            assert_eq!(v.entity_label(v.entity_id(label).unwrap()), label);
            assert_eq!(v.entity_id(label).unwrap().index(), i);
        }
    }

    #[test]
    fn multi_relation_pairs_are_supported() {
        let (g, _) = build_graph(&[lt("a", "p", "b"), lt("a", "q", "b")]).unwrap();
        assert_eq!(g.len(), 2);
        assert!(g.indexes_consistent());
    }

    #[test]
    fn isolated_entity_has_zero_profile() {
        let vocab = Vocabulary::from_labels(
            vec!["a".into(), "b".into(), "lonely".into()],
            vec!["is_following".into()],
        )
        .unwrap();
        let g = KnowledgeGraph::from_ids(vocab, [Triple::new(0, 0, 1)]).unwrap();
        assert_eq!(g.degree_profile(EntityId(2)).unwrap(), DegreeProfile::default());
        assert!(matches!(g.degree_profile(EntityId(3)), Err(Error::UnknownEntity(_))));
    }

    #[test]
    fn following_count_is_direct() {
        let (g, _) = build_graph(&[
            lt("u", "is_following", "a"),
            lt("u", "is_following", "b"),
            lt("u", "is_following", "c"),
        ])
        .unwrap();
        let p = g.degree_profile(g.entity("u").unwrap()).unwrap();
        assert_eq!(p.following_count, 3);
        assert_eq!(p.out_degree, 3);
        assert_eq!(p.follower_count, 0);
        assert_eq!(g.degree_profile(g.entity("a").unwrap()).unwrap().follower_count, 1);
    }

    #[test]
    fn hub_follower_count_matches_scan() {
        let mut triples = Vec::new();
        for i in 0..120 {
            triples.push(lt(&format!("f{i}"), "is_following", "hub"));
        }
        for i in 120..200 {
            triples.push(lt("hub", "is_followed_by", &format!("f{i}")));
        }
        triples.push(lt("hub", "likes_research_Tweet_id", "t0"));
        let (g, _) = build_graph(&triples).unwrap();
        let hub = g.entity("hub").unwrap();
        let following = g.vocab().relation_id("is_following").unwrap();
        let followed_by = g.vocab().relation_id("is_followed_by").unwrap();
        let scanned = g
            .triples()
            .iter()
            .filter(|t| (t.relation == following && t.tail == hub) || (t.relation == followed_by && t.head == hub))
            .count();
        let p = g.degree_profile(hub).unwrap();
        assert_eq!(scanned, 200);
        assert_eq!(p.follower_count, 200);
        assert_eq!(p.liked_count, 1);
        assert_eq!(g.followees(g.entity("f3").unwrap()), vec![hub]);
        assert_eq!(g.followees(g.entity("f150").unwrap()), vec![hub]);
    }

    #[test]
    fn from_ids_rejects_out_of_range() {
        let vocab = Vocabulary::from_labels(vec!["a".into()], vec!["r".into()]).unwrap();
        assert!(KnowledgeGraph::from_ids(vocab.clone(), [Triple::new(0, 0, 1)]).is_err());
        assert!(KnowledgeGraph::from_ids(vocab, [Triple::new(0, 1, 0)]).is_err());
    }
}
