use kgemb_demo::{compare_on_pattern, probability_curve, recommend_for, MAX_EPOCHS};

#[test]
fn pattern_comparison_reports_both_models() {
    let v = compare_on_pattern("symmetry", 1, 30).unwrap();
    let models = v["models"].as_array().unwrap();
    assert_eq!(models.len(), 2);
    for m in models {
        assert_eq!(m["loss"].as_array().unwrap().len(), 30);
        let mrr = m["mrr"].as_f64().unwrap();
        assert!(mrr > 0.0 && mrr <= 1.0);
    }
    assert_eq!(v, compare_on_pattern("symmetry", 1, 30).unwrap());
    assert!(compare_on_pattern("small_world_social", 1, 5).is_err());
    assert!(compare_on_pattern("nope", 1, 5).is_err());
    assert!(compare_on_pattern("symmetry", 1, MAX_EPOCHS + 1).is_err());
}

#[test]
fn probability_curve_modes() {
    let clamped = probability_curve(2.0, true, -1.0, 4.0, 6).unwrap();
    let p: Vec<Option<f64>> = clamped["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["probability"].as_f64())
        .collect();
    assert_eq!(
        p,
        [Some(1.0), Some(1.0), Some(1.0), Some(1.0), Some(2.0 / 3.0), Some(0.5)]
    );
    let raw = probability_curve(2.0, false, -1.0, 4.0, 6).unwrap();
    let p: Vec<Option<f64>> = raw["points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["probability"].as_f64())
        .collect();
    assert_eq!(p[1], None, "score 0 has no probability");
    assert_eq!(p[2], Some(2.0));
    assert!(probability_curve(2.0, true, 1.0, 1.0, 5).is_err());
}

#[test]
fn recommendations_exclude_liked_posts() {
    let v = recommend_for(4, 0, 3, 50).unwrap();
    let recs = v["recommendations"].as_array().unwrap();
    assert_eq!(recs.len(), 3);
    let liked: Vec<&str> = v["liked"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    for r in recs {
        assert!(!liked.contains(&r["tweet"].as_str().unwrap()));
    }
    assert!(recommend_for(4, 10_000, 3, 5).is_err());
}
