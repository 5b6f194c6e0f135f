//! The social ontology: five relation types between users, posts and job
//! classes, plus the two job classes users can hold.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{BuildReport, EntityId, KnowledgeGraph, LabeledTriple, RelationId, Triple, Vocabulary};

pub const IS_TALKING_ABOUT: &str = "is_talking_about";
pub const IS_FOLLOWED_BY: &str = "is_followed_by";
pub const IS_FOLLOWING: &str = "is_following";
pub const JOB_TITLE_TYPE_IS: &str = "job_title_type_is";
pub const LIKES_RESEARCH_TWEET: &str = "likes_research_Tweet_id";

/// Ontology relations in id order 0..=4.
pub const RELATIONS: [&str; 5] = [
    IS_TALKING_ABOUT,
    IS_FOLLOWED_BY,
    IS_FOLLOWING,
    JOB_TITLE_TYPE_IS,
    LIKES_RESEARCH_TWEET,
];

/// Job class entity labels in class id order 0..=1.
pub const JOB_CLASSES: [&str; 2] = ["job_title_medical_researcher", "job_title_physician"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    User,
    Tweet,
    JobClass,
}

impl EntityKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::User => "user",
            EntityKind::Tweet => "tweet",
            EntityKind::JobClass => "job_class",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EntityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "user" => Ok(EntityKind::User),
            "tweet" | "post" => Ok(EntityKind::Tweet),
            "job_class" | "jobclass" => Ok(EntityKind::JobClass),
            other => Err(Error::InvalidArgument(format!("unknown entity kind {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum UserClass {
    MedicalResearcher,
    Physician,
    Unclassified,
}

impl UserClass {
    fn from_job_label(label: &str) -> Option<Self> {
        match label {
            l if l == JOB_CLASSES[0] => Some(UserClass::MedicalResearcher),
            l if l == JOB_CLASSES[1] => Some(UserClass::Physician),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationRole {
    pub head: EntityKind,
    pub tail: EntityKind,
}

/// Head/tail kind constraints of each ontology relation, by label.
pub fn role_of(label: &str) -> Option<RelationRole> {
    use EntityKind::*;
    let (head, tail) = match label {
        IS_TALKING_ABOUT => (User, Tweet),
        IS_FOLLOWED_BY | IS_FOLLOWING => (User, User),
        JOB_TITLE_TYPE_IS => (User, JobClass),
        LIKES_RESEARCH_TWEET => (User, Tweet),
        _ => return None,
    };
    Some(RelationRole { head, tail })
}

/// Vocabulary with the five ontology relations pinned to ids 0..=4.
pub fn seeded_vocabulary() -> Vocabulary {
    Vocabulary::with_relations(&RELATIONS)
}

/// True when every relation label of `vocab` belongs to the ontology.
pub fn is_social_vocabulary(vocab: &Vocabulary) -> bool {
    vocab.relation_labels().iter().all(|l| role_of(l).is_some())
}

/// Builds a graph, treating it as a social graph when every relation label
/// belongs to the ontology: relations are then pinned to ids 0..=4 and the
/// inferred ontology is attached.
pub fn build_social<T: AsRef<LabeledTriple>>(
    triples: &[T],
    explicit: &HashMap<String, EntityKind>,
) -> Result<(KnowledgeGraph, BuildReport)> {
    let social = !triples.is_empty() && triples.iter().all(|t| role_of(&t.as_ref().relation).is_some());
    if !social {
        return KnowledgeGraph::build_with(Vocabulary::new(), triples);
    }
    let (graph, report) = KnowledgeGraph::build_with(seeded_vocabulary(), triples)?;
    let ontology = SocialOntology::infer(&graph, explicit);
    Ok((graph.with_ontology(ontology), report))
}

/// Kind and class metadata for the entities of one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct SocialOntology {
    relation_roles: HashMap<RelationId, RelationRole>,
    missing: Vec<&'static str>,
    kinds: Vec<Option<EntityKind>>,
    user_classes: HashMap<EntityId, UserClass>,
}

impl SocialOntology {
    /// Infers entity kinds from the positions entities occupy in ontology
    /// relations (majority vote, job-class labels always `JobClass`).
    /// Entries in `explicit` override inference.
    pub fn infer(graph: &KnowledgeGraph, explicit: &HashMap<String, EntityKind>) -> Self {
        let vocab = graph.vocab();
        let mut relation_roles = HashMap::new();
        let mut missing = Vec::new();
        for label in RELATIONS {
            match vocab.relation_id(label) {
                Some(id) => {
                    relation_roles.insert(id, role_of(label).expect("ontology relation"));
                }
                None => missing.push(label),
            }
        }

        // votes: [user, tweet, job_class]
        let mut votes = vec![[0usize; 3]; graph.entity_count()];
        let slot = |k: EntityKind| match k {
            EntityKind::User => 0,
            EntityKind::Tweet => 1,
            EntityKind::JobClass => 2,
        };
        for t in graph.triples() {
            if let Some(role) = relation_roles.get(&t.relation) {
                votes[t.head.index()][slot(role.head)] += 1;
                votes[t.tail.index()][slot(role.tail)] += 1;
            }
        }
        let kinds = votes
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let label = vocab.entity_label(EntityId(i as u32));
                if let Some(&k) = explicit.get(label) {
                    return Some(k);
                }
                if JOB_CLASSES.contains(&label) {
                    return Some(EntityKind::JobClass);
                }
                // ties resolve job_class > tweet > user
                let order = [EntityKind::JobClass, EntityKind::Tweet, EntityKind::User];
                let best = order
                    .iter()
                    .copied()
                    .max_by_key(|&k| (v[slot(k)], std::cmp::Reverse(slot_rank(k))))?;
                (v[slot(best)] > 0).then_some(best)
            })
            .collect::<Vec<_>>();

        let mut user_classes = HashMap::new();
        for (i, kind) in kinds.iter().enumerate() {
            if *kind == Some(EntityKind::User) {
                user_classes.insert(EntityId(i as u32), UserClass::Unclassified);
            }
        }
        if let Some(job) = vocab.relation_id(JOB_TITLE_TYPE_IS) {
            for t in graph.triples().iter().filter(|t| t.relation == job) {
                if let Some(class) = UserClass::from_job_label(vocab.entity_label(t.tail)) {
                    user_classes.insert(t.head, class);
                }
            }
        }

        SocialOntology {
            relation_roles,
            missing,
            kinds,
            user_classes,
        }
    }

    pub fn kind(&self, entity: EntityId) -> Option<EntityKind> {
        self.kinds.get(entity.index()).copied().flatten()
    }

    pub fn user_class(&self, entity: EntityId) -> Option<UserClass> {
        self.user_classes.get(&entity).copied()
    }

    pub fn role(&self, relation: RelationId) -> Option<RelationRole> {
        self.relation_roles.get(&relation).copied()
    }

    pub fn entities_of_kind(&self, kind: EntityKind) -> Vec<EntityId> {
        self.kinds
            .iter()
            .enumerate()
            .filter(|(_, k)| **k == Some(kind))
            .map(|(i, _)| EntityId(i as u32))
            .collect()
    }
}

fn slot_rank(k: EntityKind) -> u8 {
    match k {
        EntityKind::JobClass => 0,
        EntityKind::Tweet => 1,
        EntityKind::User => 2,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// An ontology relation label is absent from the graph vocabulary.
    MissingRelation(&'static str),
    /// The triple uses a relation outside the ontology.
    UnmappedRelation(Triple),
    /// Head and/or tail kind contradicts the relation's role. Each side
    /// carries `(expected, found)` when it is wrong.
    RoleMismatch {
        triple: Triple,
        head: Option<(EntityKind, Option<EntityKind>)>,
        tail: Option<(EntityKind, Option<EntityKind>)>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = |k: &Option<EntityKind>| k.map_or("unknown", EntityKind::as_str);
        match self {
            Violation::MissingRelation(label) => write!(f, "missing relation {label}"),
            Violation::UnmappedRelation(t) => write!(f, "{t}: relation not in ontology"),
            Violation::RoleMismatch { triple, head, tail } => {
                write!(f, "{triple}:")?;
                if let Some((want, got)) = head {
                    write!(f, " head must be {want} (is {})", kind(got))?;
                }
                if let Some((want, got)) = tail {
                    write!(f, " tail must be {want} (is {})", kind(got))?;
                }
                Ok(())
            }
        }
    }
}

/// Lists every ontology violation in `graph`; an empty list means valid.
pub fn validate_ontology(graph: &KnowledgeGraph, ontology: &SocialOntology) -> Vec<Violation> {
    let mut out: Vec<Violation> = ontology
        .missing
        .iter()
        .map(|&l| Violation::MissingRelation(l))
        .collect();
    for &t in graph.triples() {
        let Some(role) = ontology.role(t.relation) else {
            out.push(Violation::UnmappedRelation(t));
            continue;
        };
        let check = |want: EntityKind, e: EntityId| {
            let got = ontology.kind(e);
            (got != Some(want)).then_some((want, got))
        };
        let head = check(role.head, t.head);
        let tail = check(role.tail, t.tail);
        if head.is_some() || tail.is_some() {
            out.push(Violation::RoleMismatch { triple: t, head, tail });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::LabeledTriple;

    fn social(triples: &[(&str, &str, &str)]) -> KnowledgeGraph {
        let labeled: Vec<LabeledTriple> = triples.iter().map(|&t| t.into()).collect();
        KnowledgeGraph::build_with(seeded_vocabulary(), &labeled).unwrap().0
    }

    fn explicit(pairs: &[(&str, EntityKind)]) -> HashMap<String, EntityKind> {
        pairs.iter().map(|(l, k)| (l.to_string(), *k)).collect()
    }

    #[test]
    fn seeded_ids_match_table() {
        let v = seeded_vocabulary();
        for (i, label) in RELATIONS.iter().enumerate() {
            assert_eq!(v.relation_id(label), Some(RelationId(i as u32)));
        }
        assert_eq!(v.relation_count(), 5);
    }

    #[test]
    fn like_with_correct_kinds_is_valid() {
        let g = social(&[("user_u", LIKES_RESEARCH_TWEET, "tweet_t")]);
        let o = SocialOntology::infer(
            &g,
            &explicit(&[("user_u", EntityKind::User), ("tweet_t", EntityKind::Tweet)]),
        );
        let v = validate_ontology(&g, &o);
        assert!(v.iter().all(|v| matches!(v, Violation::MissingRelation(_))), "{v:?}");
        assert_eq!(v.len(), 0, "seeded vocabulary has every relation");
    }

    #[test]
    fn inverted_like_is_one_violation() {
        let g = social(&[("tweet_t", LIKES_RESEARCH_TWEET, "user_u")]);
        let o = SocialOntology::infer(
            &g,
            &explicit(&[("user_u", EntityKind::User), ("tweet_t", EntityKind::Tweet)]),
        );
        let v = validate_ontology(&g, &o);
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::RoleMismatch { head, .. } => {
                assert_eq!(*head, Some((EntityKind::User, Some(EntityKind::Tweet))))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn physician_job_title_is_valid() {
        let g = social(&[("user_u", JOB_TITLE_TYPE_IS, "job_title_physician")]);
        let o = SocialOntology::infer(&g, &HashMap::new());
        assert!(validate_ontology(&g, &o).is_empty());
        let u = g.entity("user_u").unwrap();
        assert_eq!(o.user_class(u), Some(UserClass::Physician));
        assert_eq!(
            o.kind(g.entity("job_title_physician").unwrap()),
            Some(EntityKind::JobClass)
        );
    }

    #[test]
    fn missing_relations_are_reported() {
        let labeled: Vec<LabeledTriple> = vec![("a", IS_FOLLOWING, "b").into()];
        let (g, _) = crate::graph::build_graph(&labeled).unwrap();
        let o = SocialOntology::infer(&g, &HashMap::new());
        let v = validate_ontology(&g, &o);
        assert_eq!(
            v.iter().filter(|v| matches!(v, Violation::MissingRelation(_))).count(),
            4
        );
    }

    #[test]
    fn kinds_inferred_from_positions() {
        let g = social(&[
            ("u1", LIKES_RESEARCH_TWEET, "t1"),
            ("u1", IS_FOLLOWING, "u2"),
            ("u2", JOB_TITLE_TYPE_IS, "job_title_medical_researcher"),
        ]);
        let o = SocialOntology::infer(&g, &HashMap::new());
        let k = |l| o.kind(g.entity(l).unwrap());
        assert_eq!(k("u1"), Some(EntityKind::User));
        assert_eq!(k("u2"), Some(EntityKind::User));
        assert_eq!(k("t1"), Some(EntityKind::Tweet));
        assert_eq!(o.user_class(g.entity("u1").unwrap()), Some(UserClass::Unclassified));
        assert_eq!(
            o.user_class(g.entity("u2").unwrap()),
            Some(UserClass::MedicalResearcher)
        );
        assert!(validate_ontology(&g, &o).is_empty());
    }

    #[test]
    fn unknown_relation_is_flagged() {
        let g = social(&[("a", "retweets", "b")]);
        let o = SocialOntology::infer(&g, &HashMap::new());
        assert!(matches!(
            validate_ontology(&g, &o)[..],
            [Violation::UnmappedRelation(_)]
        ));
    }
}
