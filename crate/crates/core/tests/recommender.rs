use kgemb::graph::{EntityId, Triple};
use kgemb::models::negative::sample_negative;
use kgemb::models::train::train_graph;
use kgemb::models::{ModelConfig, TripleScorer};
use kgemb::ontology::{self, EntityKind};
use kgemb::recommend::{
    analyze_cohorts, most_liked_tweet, recommend, standard_cohorts, CohortConfig, ProbabilityBasis,
};
use kgemb::rng::{stream_rng, Stream};
use kgemb::synthetic::{generate, SyntheticKind, SyntheticSpec};

fn fixture() -> kgemb::KnowledgeGraph {
    let spec = SyntheticSpec {
        n_users: 40,
        n_tweets: 40,
        mean_degree: 4,
        ..SyntheticSpec::new(SyntheticKind::SmallWorldSocial, 1)
    };
    generate(&spec).unwrap()
}

#[test]
fn trained_likes_outrank_corruptions() {
    let g = fixture();
    let config = ModelConfig {
        seed: 1,
        negatives_per_positive: 10,
        ..ModelConfig::mde()
    };
    let (model, report) = train_graph(&g, &config).unwrap();
    assert!(report.train_hit1 >= 0.95, "{}", report.train_hit1);
    let likes = g.vocab().relation_id(ontology::LIKES_RESEARCH_TWEET).unwrap();
    let basis = ProbabilityBasis::from_training(&model, g.triples(), likes, true).unwrap();
    let positives: Vec<Triple> = g.triples().iter().copied().filter(|t| t.relation == likes).collect();
    let mut rng = stream_rng(99, Stream::Negative);
    let mut corrupted: Vec<f64> = positives
        .iter()
        .flat_map(|&t| {
            (0..5)
                .map(|_| sample_negative(t, g.entity_count(), Some(g.triple_set()), &mut rng))
                .collect::<Vec<_>>()
        })
        .filter(|c| !g.contains(c))
        .map(|c| basis.probability(model.score_triple(c)).unwrap())
        .collect();
    corrupted.sort_by(f64::total_cmp);
    let median = corrupted[corrupted.len() / 2];
    for &t in &positives {
        let p = basis.probability(model.score_triple(t)).unwrap();
        assert!(p >= median, "{t}: {p} < median {median}");
        assert_eq!(p, 1.0);
    }
}

#[test]
fn recommendations_and_cohorts_on_trained_model() {
    let g = fixture();
    let config = ModelConfig {
        seed: 2,
        iterations: 200,
        ..ModelConfig::mde()
    };
    let (model, _) = train_graph(&g, &config).unwrap();
    let likes = g.vocab().relation_id(ontology::LIKES_RESEARCH_TWEET).unwrap();
    let basis = ProbabilityBasis::from_training(&model, g.triples(), likes, true).unwrap();
    let ont = g.ontology().unwrap();
    let users = ont.entities_of_kind(EntityKind::User);
    let tweets = ont.entities_of_kind(EntityKind::Tweet);
    for &u in users.iter().take(10) {
        let recs = recommend(&model, &g, &basis, u, 5).unwrap();
        let liked = g.tails_of(u, likes);
        assert_eq!(recs.len(), 5.min(tweets.len() - liked.len()));
        assert!(recs.iter().all(|r| !liked.contains(&r.tweet) && r.user == u));
        assert!(recs
            .windows(2)
            .all(|w| w[0].score <= w[1].score && w[0].probability >= w[1].probability));
        assert_eq!(recs, recommend(&model, &g, &basis, u, 5).unwrap());
    }

    let target = most_liked_tweet(&g).unwrap();
    assert_eq!(ont.kind(target), Some(EntityKind::Tweet));
    let hub_threshold = users
        .iter()
        .map(|&u| g.degree_profile(u).unwrap().follower_count)
        .max()
        .unwrap();
    let specs = standard_cohorts(hub_threshold, 4);
    let config = CohortConfig {
        similarity_threshold: 0.0,
        ..CohortConfig::default()
    };
    let rows = analyze_cohorts(&model, &g, &basis, &specs, target, &config).unwrap();
    assert_eq!(rows.len(), 4);
    let mut all: Vec<EntityId> = rows.iter().flat_map(|r| r.members.clone()).collect();
    let n = all.len();
    all.sort();
    all.dedup();
    assert_eq!(all.len(), n, "cohorts overlap");
    assert!(rows.iter().all(|r| r.members.len() <= 5));
    assert!(!rows[3].members.is_empty(), "generator makes new users");
    for r in rows.iter().filter(|r| !r.members.is_empty()) {
        let c = r.clamped.unwrap();
        assert!((0.0..=1.0).contains(&c));
    }
}
