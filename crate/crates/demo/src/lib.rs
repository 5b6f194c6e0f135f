//! Small operations exported to the browser demo. Each returns a JSON string
//! so the page needs no bindings beyond plain strings and numbers.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use kgemb::eval::{evaluate, RankingConfig};
use kgemb::models::train::{train, train_graph};
use kgemb::models::{ModelConfig, ModelKind};
use kgemb::ontology::{self, EntityKind};
use kgemb::recommend::{recommend, ProbabilityBasis};
use kgemb::synthetic::{generate, pattern_holdout, SyntheticKind, SyntheticSpec};
use kgemb::Error;

/// Upper bound on epochs so a click cannot freeze the tab for minutes.
pub const MAX_EPOCHS: usize = 2000;

fn epochs_ok(epochs: usize) -> Result<usize, Error> {
    if epochs == 0 || epochs > MAX_EPOCHS {
        return Err(Error::InvalidArgument(format!(
            "epochs must lie in 1..={MAX_EPOCHS}, got {epochs}"
        )));
    }
    Ok(epochs)
}

/// Trains TransE and MDE on a pattern graph with held-out pattern triples
/// and reports loss curves and raw ranking metrics for both.
pub fn compare_on_pattern(kind: &str, seed: u64, epochs: usize) -> Result<Value, Error> {
    let kind: SyntheticKind = kind.parse()?;
    let epochs = epochs_ok(epochs)?;
    let graph = generate(&SyntheticSpec::new(kind, seed))?;
    let parts = pattern_holdout(&graph, kind, 0.2, seed)?;
    let mut models = Vec::new();
    for model_kind in ModelKind::ALL {
        let config = ModelConfig {
            seed,
            iterations: epochs,
            ..ModelConfig::new(model_kind)
        };
        let (model, report) = train(&parts.train, graph.entity_count(), graph.relation_count(), &config)?;
        let eval = evaluate(
            &model,
            &parts.test,
            graph.entity_count(),
            graph.triple_set(),
            &RankingConfig::default(),
        )?;
        models.push(json!({
            "name": model_kind.to_string(),
            "loss": report.loss_trace,
            "mr": eval.mr(),
            "mrr": eval.mrr(),
            "hit1": eval.hit(1),
            "hit10": eval.hit(10),
        }));
    }
    Ok(json!({
        "kind": kind.as_str(),
        "entities": graph.entity_count(),
        "train": parts.train.len(),
        "test": parts.test.len(),
        "models": models,
    }))
}

/// Samples the score to probability mapping on `steps` evenly spaced scores.
pub fn probability_curve(
    max_training_score: f64,
    clamp: bool,
    from: f64,
    to: f64,
    steps: usize,
) -> Result<Value, Error> {
    if steps < 2 || from.partial_cmp(&to) != Some(std::cmp::Ordering::Less) {
        return Err(Error::InvalidArgument(
            "need at least 2 steps over a non-empty range".into(),
        ));
    }
    let basis = ProbabilityBasis::new(kgemb::graph::RelationId(0), max_training_score, clamp);
    let points: Vec<Value> = (0..steps)
        .map(|i| {
            let s = from + (to - from) * i as f64 / (steps - 1) as f64;
            // unclamped mode is undefined at s = 0; the page draws a gap there
            json!({ "score": s, "probability": basis.probability(s).ok() })
        })
        .collect();
    Ok(json!({ "max_training_score": max_training_score, "clamp": clamp, "points": points }))
}

/// Generates a small social graph, trains MDE on it and recommends posts for
/// the `user_index`-th user.
pub fn recommend_for(seed: u64, user_index: usize, k: usize, epochs: usize) -> Result<Value, Error> {
    let epochs = epochs_ok(epochs)?;
    let spec = SyntheticSpec {
        n_users: 40,
        n_tweets: 40,
        mean_degree: 4,
        ..SyntheticSpec::new(SyntheticKind::SmallWorldSocial, seed)
    };
    let graph = generate(&spec)?;
    let config = ModelConfig {
        seed,
        iterations: epochs,
        ..ModelConfig::mde()
    };
    let (model, report) = train_graph(&graph, &config)?;
    let likes = graph
        .vocab()
        .relation_id(ontology::LIKES_RESEARCH_TWEET)
        .ok_or_else(|| Error::InvalidSpec("generated graph has no likes relation".into()))?;
    let basis = ProbabilityBasis::from_training(&model, graph.triples(), likes, true)?;
    let users = graph
        .ontology()
        .map(|o| o.entities_of_kind(EntityKind::User))
        .unwrap_or_default();
    let user = *users
        .get(user_index)
        .ok_or_else(|| Error::InvalidArgument(format!("user index {user_index} out of 0..{}", users.len())))?;
    let vocab = graph.vocab();
    let liked: Vec<&str> = graph
        .tails_of(user, likes)
        .iter()
        .map(|&t| vocab.entity_label(t))
        .collect();
    let recs: Vec<Value> = recommend(&model, &graph, &basis, user, k)?
        .into_iter()
        .map(|r| json!({ "tweet": vocab.entity_label(r.tweet), "score": r.score, "probability": r.probability }))
        .collect();
    Ok(json!({
        "user": vocab.entity_label(user),
        "users": users.len(),
        "liked": liked,
        "train_hit1": report.train_hit1,
        "recommendations": recs,
    }))
}

fn to_js(v: Result<Value, Error>) -> Result<String, JsError> {
    v.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = comparePattern)]
pub fn compare_pattern_js(kind: &str, seed: u32, epochs: u32) -> Result<String, JsError> {
    to_js(compare_on_pattern(kind, seed.into(), epochs as usize))
}

#[wasm_bindgen(js_name = probabilityCurve)]
pub fn probability_curve_js(
    max_training_score: f64,
    clamp: bool,
    from: f64,
    to: f64,
    steps: u32,
) -> Result<String, JsError> {
    to_js(probability_curve(max_training_score, clamp, from, to, steps as usize))
}

#[wasm_bindgen(js_name = recommendPosts)]
pub fn recommend_js(seed: u32, user_index: u32, k: u32, epochs: u32) -> Result<String, JsError> {
    to_js(recommend_for(
        seed.into(),
        user_index as usize,
        k as usize,
        epochs as usize,
    ))
}
