//! Synthetic graphs: a social graph shaped like the physician/research-post
//! graph (small-world follows with injected hubs, preferential likes), and
//! small datasets realizing one relation pattern each.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, LabeledTriple, Triple, Vocabulary};
use crate::ontology::{
    self, SocialOntology, IS_FOLLOWED_BY, IS_FOLLOWING, IS_TALKING_ABOUT, JOB_CLASSES, JOB_TITLE_TYPE_IS,
    LIKES_RESEARCH_TWEET,
};
use crate::rng::{stream_rng, Stream};
use crate::split::test_size;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyntheticKind {
    SmallWorldSocial,
    Symmetry,
    Antisymmetry,
    Inversion,
    Composition,
}

impl SyntheticKind {
    pub const ALL: [SyntheticKind; 5] = [
        SyntheticKind::SmallWorldSocial,
        SyntheticKind::Symmetry,
        SyntheticKind::Antisymmetry,
        SyntheticKind::Inversion,
        SyntheticKind::Composition,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SyntheticKind::SmallWorldSocial => "small_world_social",
            SyntheticKind::Symmetry => "symmetry",
            SyntheticKind::Antisymmetry => "antisymmetry",
            SyntheticKind::Inversion => "inversion",
            SyntheticKind::Composition => "composition",
        }
    }
}

impl fmt::Display for SyntheticKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SyntheticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s.trim().replace('-', "_"))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown synthetic kind {s:?}")))
    }
}

// pattern relation labels
pub const SYMMETRIC: &str = "symmetric_with";
pub const MEMBER_OF: &str = "member_of";
pub const PRECEDES: &str = "precedes";
pub const PARENT_OF: &str = "parent_of";
pub const CHILD_OF: &str = "child_of";
pub const FIRST_HOP: &str = "first_hop";
pub const SECOND_HOP: &str = "second_hop";
pub const COMPOSED: &str = "composed";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub kind: SyntheticKind,
    /// Users for the social kind; total entity count for pattern kinds.
    pub n_users: usize,
    pub n_tweets: usize,
    pub mean_degree: usize,
    pub rewire_probability: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn new(kind: SyntheticKind, seed: u64) -> Self {
        let (n_users, n_tweets, mean_degree) = match kind {
            SyntheticKind::SmallWorldSocial => (100, 150, 6),
            _ => (100, 0, 4),
        };
        SyntheticSpec {
            kind,
            n_users,
            n_tweets,
            mean_degree,
            rewire_probability: 0.1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.n_users < 2 {
            return bad(format!("n_users must be at least 2, got {}", self.n_users));
        }
        if self.mean_degree >= self.n_users {
            return bad(format!(
                "mean_degree {} must be below n_users {}",
                self.mean_degree, self.n_users
            ));
        }
        if !(0.0..=1.0).contains(&self.rewire_probability) {
            return bad(format!(
                "rewire_probability must lie in [0, 1], got {}",
                self.rewire_probability
            ));
        }
        match self.kind {
            SyntheticKind::SmallWorldSocial if self.n_tweets == 0 => bad("n_tweets must be positive".into()),
            SyntheticKind::SmallWorldSocial if self.mean_degree < 2 => bad("mean_degree must be at least 2".into()),
            SyntheticKind::Symmetry if self.n_users < 4 => bad("symmetry needs at least 4 entities".into()),
            SyntheticKind::Symmetry | SyntheticKind::Antisymmetry if self.mean_degree == 0 => {
                bad("mean_degree must be positive".into())
            }
            SyntheticKind::Composition | SyntheticKind::Inversion if self.n_users < 3 => {
                bad("pattern needs at least 3 entities".into())
            }
            _ => Ok(()),
        }
    }
}

pub fn generate(spec: &SyntheticSpec) -> Result<KnowledgeGraph> {
    spec.validate()?;
    let mut rng = stream_rng(spec.seed, Stream::Generate);
    match spec.kind {
        SyntheticKind::SmallWorldSocial => small_world_social(spec, &mut rng),
        SyntheticKind::Symmetry => symmetry(spec, &mut rng),
        SyntheticKind::Antisymmetry => antisymmetry(spec, &mut rng),
        SyntheticKind::Inversion => inversion(spec, &mut rng),
        SyntheticKind::Composition => composition(spec, &mut rng),
    }
}

fn build(vocab: Vocabulary, triples: Vec<LabeledTriple>) -> Result<KnowledgeGraph> {
    Ok(KnowledgeGraph::build_with(vocab, &triples)?.0)
}

fn user(i: usize) -> String {
    format!("user_{i}")
}

fn tweet(i: usize) -> String {
    format!("tweet_{i}")
}

fn entity(i: usize) -> String {
    format!("e{i}")
}

/// Directed follow `a -> b`, emitted as one of the two follow relations.
fn follow(rng: &mut ChaCha8Rng, a: usize, b: usize) -> LabeledTriple {
    if rng.random_bool(0.5) {
        LabeledTriple::new(user(a), IS_FOLLOWING, user(b))
    } else {
        LabeledTriple::new(user(b), IS_FOLLOWED_BY, user(a))
    }
}

fn small_world_social(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<KnowledgeGraph> {
    let n = spec.n_users;
    let n_new = (n / 20).max(1).min(n - 2);
    let active = n - n_new;
    let half = (spec.mean_degree / 2).max(1).min((active - 1) / 2).max(1);

    // ring lattice with rewiring over active users; edges kept undirected
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    for i in 0..active {
        for j in 1..=half {
            edges.insert(key(i, (i + j) % active));
        }
    }
    let lattice: Vec<(usize, usize)> = edges.iter().copied().collect();
    for (a, b) in lattice {
        if rng.random_bool(spec.rewire_probability) {
            let c = rng.random_range(0..active);
            if c != a && !edges.contains(&key(a, c)) {
                edges.remove(&(a, b));
                edges.insert(key(a, c));
            }
        }
    }

    let mut triples = Vec::new();
    let mut follows: HashSet<(usize, usize)> = HashSet::new();
    for &(a, b) in &edges {
        let (src, dst) = if rng.random_bool(0.5) { (a, b) } else { (b, a) };
        follows.insert((src, dst));
        triples.push(follow(rng, src, dst));
    }

    // hubs: followed far more often than the lattice degree allows
    let n_hubs = (active / 50).max(1);
    let hub_target = (3 * spec.mean_degree).max(active / 4).min(active - 1);
    let hubs: Vec<usize> = index::sample(rng, active, n_hubs).into_iter().collect();
    for &h in &hubs {
        let followers = follows.iter().filter(|&&(_, d)| d == h).count();
        let mut candidates: Vec<usize> = (0..active).filter(|&u| u != h && !follows.contains(&(u, h))).collect();
        candidates.shuffle(rng);
        for u in candidates.into_iter().take(hub_target.saturating_sub(followers)) {
            follows.insert((u, h));
            triples.push(follow(rng, u, h));
        }
    }

    // every post has an author
    let mut authors = vec![0usize; spec.n_tweets];
    for (t, author) in authors.iter_mut().enumerate() {
        *author = rng.random_range(0..active);
        triples.push(LabeledTriple::new(user(*author), IS_TALKING_ABOUT, tweet(t)));
    }

    // preferential likes; hubs like a wider variety of posts
    let mut like_weight = vec![1usize; spec.n_tweets];
    let base_likes = (spec.mean_degree / 3).max(1);
    for u in 0..active {
        let count = if hubs.contains(&u) {
            3 * base_likes
        } else {
            rng.random_range(1..=base_likes + 1)
        };
        let mut liked = BTreeSet::new();
        for _ in 0..count.min(spec.n_tweets) {
            let total: usize = like_weight
                .iter()
                .enumerate()
                .filter(|(t, _)| !liked.contains(t))
                .map(|(_, w)| w)
                .sum();
            let mut pick = rng.random_range(0..total);
            let t = (0..spec.n_tweets)
                .filter(|t| !liked.contains(t))
                .find(|&t| {
                    if pick < like_weight[t] {
                        true
                    } else {
                        pick -= like_weight[t];
                        false
                    }
                })
                .expect("weights cover the pick");
            liked.insert(t);
            like_weight[t] += 1;
            triples.push(LabeledTriple::new(user(u), LIKES_RESEARCH_TWEET, tweet(t)));
        }
    }

    // job titles: about half the active users, all new users are physicians
    for u in 0..active {
        if rng.random_bool(0.5) {
            let class = JOB_CLASSES[rng.random_range(0..2)];
            triples.push(LabeledTriple::new(user(u), JOB_TITLE_TYPE_IS, class));
        }
    }
    for u in active..n {
        triples.push(LabeledTriple::new(user(u), JOB_TITLE_TYPE_IS, JOB_CLASSES[1]));
    }

    let graph = build(ontology::seeded_vocabulary(), triples)?;
    let onto = SocialOntology::infer(&graph, &Default::default());
    Ok(graph.with_ontology(onto))
}

/// Symmetric relation over "people" plus a group-membership relation that
/// places partners in different regions of the space.
fn symmetry(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<KnowledgeGraph> {
    let n = spec.n_users;
    let groups = (n / 10).max(2).min(n - 2);
    let people = n - groups;
    let mut triples = Vec::new();
    for p in 0..people {
        let g = people + rng.random_range(0..groups);
        triples.push(LabeledTriple::new(entity(p), MEMBER_OF, entity(g)));
    }
    let target = (people * spec.mean_degree / 2).max(1);
    let mut pairs = BTreeSet::new();
    let mut order: Vec<usize> = (0..people).collect();
    order.shuffle(rng);
    // a perfect matching first so every person has a partner
    for chunk in order.chunks_exact(2) {
        pairs.insert((chunk[0].min(chunk[1]), chunk[0].max(chunk[1])));
    }
    let max_pairs = people * (people - 1) / 2;
    while pairs.len() < target.min(max_pairs) {
        let a = rng.random_range(0..people);
        let b = rng.random_range(0..people);
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    for (a, b) in pairs {
        triples.push(LabeledTriple::new(entity(a), SYMMETRIC, entity(b)));
        triples.push(LabeledTriple::new(entity(b), SYMMETRIC, entity(a)));
    }
    build(Vocabulary::new(), triples)
}

/// Edges of a random order: `a precedes b` only when `a` ranks before `b`.
fn antisymmetry(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<KnowledgeGraph> {
    let n = spec.n_users;
    let mut rank: Vec<usize> = (0..n).collect();
    rank.shuffle(rng);
    let mut pairs = BTreeSet::new();
    let target = (n * spec.mean_degree / 2).clamp(1, n * (n - 1) / 2);
    while pairs.len() < target {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            let (lo, hi) = if rank[a] < rank[b] { (a, b) } else { (b, a) };
            pairs.insert((lo, hi));
        }
    }
    let triples = pairs
        .into_iter()
        .map(|(a, b)| LabeledTriple::new(entity(a), PRECEDES, entity(b)))
        .collect();
    build(Vocabulary::new(), triples)
}

/// Every `a parent_of b` has `b child_of a`, and nothing else.
fn inversion(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<KnowledgeGraph> {
    let n = spec.n_users;
    let mut triples = Vec::new();
    for b in 1..n {
        let a = rng.random_range(0..b);
        triples.push(LabeledTriple::new(entity(a), PARENT_OF, entity(b)));
        triples.push(LabeledTriple::new(entity(b), CHILD_OF, entity(a)));
    }
    build(Vocabulary::new(), triples)
}

/// Functional first and second hops; `composed` is exactly their chain.
fn composition(spec: &SyntheticSpec, rng: &mut ChaCha8Rng) -> Result<KnowledgeGraph> {
    let n = spec.n_users;
    let mut other = |a: usize| {
        let x = rng.random_range(0..n - 1);
        if x >= a {
            x + 1
        } else {
            x
        }
    };
    let first: Vec<usize> = (0..n).map(&mut other).collect();
    let second: Vec<usize> = (0..n).map(&mut other).collect();
    let mut triples = Vec::new();
    for (a, &b) in first.iter().enumerate() {
        triples.push(LabeledTriple::new(entity(a), FIRST_HOP, entity(b)));
    }
    for (b, &c) in second.iter().enumerate() {
        triples.push(LabeledTriple::new(entity(b), SECOND_HOP, entity(c)));
    }
    for (a, &b) in first.iter().enumerate() {
        triples.push(LabeledTriple::new(entity(a), COMPOSED, entity(second[b])));
    }
    build(Vocabulary::new(), triples)
}

/// Holds out `fraction` of the pattern-completing triples of a pattern graph
/// as a test set. For symmetry the held-out triple is one direction of a
/// pair whose other direction stays in training; for inversion it is a
/// `child_of` triple whose `parent_of` twin stays; for composition a
/// `composed` triple whose two hops stay; for antisymmetry any `precedes`
/// edge.
pub fn pattern_holdout(
    graph: &KnowledgeGraph,
    kind: SyntheticKind,
    fraction: f64,
    seed: u64,
) -> Result<crate::split::Split> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "holdout fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let vocab = graph.vocab();
    let rel = |label: &str| {
        vocab
            .relation_id(label)
            .ok_or_else(|| Error::InvalidSpec(format!("graph has no {label} relation")))
    };
    let mut rng = stream_rng(seed, Stream::Split);
    let candidates: Vec<Triple> = match kind {
        SyntheticKind::SmallWorldSocial => {
            return Err(Error::InvalidSpec(
                "small_world_social has no pattern holdout; use split".into(),
            ))
        }
        SyntheticKind::Symmetry => {
            let r = rel(SYMMETRIC)?;
            // one direction per unordered pair, chosen at random
            graph
                .triples()
                .iter()
                .filter(|t| t.relation == r && t.head < t.tail)
                .map(|&t| {
                    if rng.random_bool(0.5) {
                        t
                    } else {
                        Triple {
                            head: t.tail,
                            relation: r,
                            tail: t.head,
                        }
                    }
                })
                .collect()
        }
        SyntheticKind::Antisymmetry => {
            let r = rel(PRECEDES)?;
            graph.triples().iter().copied().filter(|t| t.relation == r).collect()
        }
        SyntheticKind::Inversion => {
            let r = rel(CHILD_OF)?;
            graph.triples().iter().copied().filter(|t| t.relation == r).collect()
        }
        SyntheticKind::Composition => {
            let r = rel(COMPOSED)?;
            graph.triples().iter().copied().filter(|t| t.relation == r).collect()
        }
    };
    let k = test_size(candidates.len(), 1.0 - fraction);
    let held: HashSet<Triple> = index::sample(&mut rng, candidates.len(), k)
        .into_iter()
        .map(|i| candidates[i])
        .collect();
    let (test, train) = graph.triples().iter().copied().partition(|t| held.contains(t));
    Ok(crate::split::Split { train, test })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ontology::validate_ontology;

    fn spec(kind: SyntheticKind, n: usize) -> SyntheticSpec {
        SyntheticSpec {
            n_users: n,
            ..SyntheticSpec::new(kind, 7)
        }
    }

    fn has(g: &KnowledgeGraph, h: EntityIdx, r: &str, t: EntityIdx) -> bool {
        let v = g.vocab();
        match (v.entity_id(&entity(h)), v.relation_id(r), v.entity_id(&entity(t))) {
            (Some(h), Some(r), Some(t)) => g.contains(&Triple {
                head: h,
                relation: r,
                tail: t,
            }),
            _ => false,
        }
    }
    type EntityIdx = usize;

    fn label_index(g: &KnowledgeGraph, id: crate::graph::EntityId) -> usize {
        g.vocab().entity_label(id)[1..].parse().unwrap()
    }

    #[test]
    fn symmetry_reverse_always_present() {
        let g = generate(&spec(SyntheticKind::Symmetry, 10)).unwrap();
        let r = g.vocab().relation_id(SYMMETRIC).unwrap();
        let sym: Vec<_> = g.triples().iter().filter(|t| t.relation == r).collect();
        assert!(!sym.is_empty());
        for t in sym {
            assert!(g.contains(&Triple {
                head: t.tail,
                relation: r,
                tail: t.head
            }));
        }
    }

    #[test]
    fn inversion_pairs_are_exact() {
        let g = generate(&spec(SyntheticKind::Inversion, 30)).unwrap();
        for t in g.triples() {
            let (h, t_, r) = (
                label_index(&g, t.head),
                label_index(&g, t.tail),
                g.vocab().relation_label(t.relation),
            );
            let twin = if r == PARENT_OF { CHILD_OF } else { PARENT_OF };
            assert!(has(&g, t_, twin, h));
        }
    }

    #[test]
    fn antisymmetry_has_no_reverse_or_loops() {
        let g = generate(&SyntheticSpec {
            mean_degree: 6,
            ..spec(SyntheticKind::Antisymmetry, 40)
        })
        .unwrap();
        for t in g.triples() {
            assert_ne!(t.head, t.tail);
            assert!(!g.contains(&Triple {
                head: t.tail,
                relation: t.relation,
                tail: t.head
            }));
        }
    }

    #[test]
    fn composition_is_exact_chain() {
        let g = generate(&spec(SyntheticKind::Composition, 30)).unwrap();
        let v = g.vocab();
        let (r1, r2, r3) = (
            v.relation_id(FIRST_HOP).unwrap(),
            v.relation_id(SECOND_HOP).unwrap(),
            v.relation_id(COMPOSED).unwrap(),
        );
        let mut chained = HashSet::new();
        for a in g.triples().iter().filter(|t| t.relation == r1) {
            for &c in g.tails_of(a.tail, r2) {
                assert!(g.contains(&Triple {
                    head: a.head,
                    relation: r3,
                    tail: c
                }));
                chained.insert((a.head, c));
            }
        }
        for t in g.triples().iter().filter(|t| t.relation == r3) {
            assert!(chained.contains(&(t.head, t.tail)));
        }
    }

    #[test]
    fn social_graph_is_ontology_valid_with_hub() {
        let s = SyntheticSpec {
            n_users: 100,
            mean_degree: 6,
            ..SyntheticSpec::new(SyntheticKind::SmallWorldSocial, 11)
        };
        let g = generate(&s).unwrap();
        let onto = g.ontology().unwrap();
        assert!(validate_ontology(&g, onto).is_empty());
        for (i, label) in ontology::RELATIONS.iter().enumerate() {
            assert_eq!(g.vocab().relation_id(label).unwrap().index(), i);
            assert!(g.triples().iter().any(|t| t.relation.index() == i), "{label} unused");
        }
        let max_followers = (0..g.entity_count() as u32)
            .map(|e| g.degree_profile(crate::graph::EntityId(e)).unwrap().follower_count)
            .max()
            .unwrap();
        assert!(max_followers >= 18, "max followers {max_followers}");
    }

    #[test]
    fn generation_is_deterministic() {
        for kind in SyntheticKind::ALL {
            let s = SyntheticSpec::new(kind, 3);
            let a = generate(&s).unwrap();
            let b = generate(&s).unwrap();
            assert_eq!(a.labeled_triples(), b.labeled_triples(), "{kind}");
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        let base = SyntheticSpec::new(SyntheticKind::SmallWorldSocial, 0);
        assert!(generate(&SyntheticSpec {
            n_users: 1,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SyntheticSpec {
            mean_degree: 100,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SyntheticSpec {
            rewire_probability: 2.0,
            ..base.clone()
        })
        .is_err());
        assert!(generate(&SyntheticSpec { n_tweets: 0, ..base }).is_err());
        assert!("bogus".parse::<SyntheticKind>().is_err());
    }

    #[test]
    fn symmetry_holdout_keeps_the_other_direction() {
        let g = generate(&spec(SyntheticKind::Symmetry, 100)).unwrap();
        let s = pattern_holdout(&g, SyntheticKind::Symmetry, 0.2, 5).unwrap();
        let r = g.vocab().relation_id(SYMMETRIC).unwrap();
        let pairs = g.triples().iter().filter(|t| t.relation == r).count() / 2;
        assert_eq!(s.test.len(), test_size(pairs, 0.8));
        let train: HashSet<_> = s.train.iter().collect();
        for t in &s.test {
            assert_eq!(t.relation, r);
            assert!(train.contains(&Triple {
                head: t.tail,
                relation: r,
                tail: t.head
            }));
        }
        assert_eq!(s.train.len() + s.test.len(), g.len());
    }
}
