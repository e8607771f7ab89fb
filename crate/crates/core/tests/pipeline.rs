use playclass::corpus::{apply_filter_profile, read_apps_csv, AppFilter, CategoryScope, CsvSchema};
use playclass::evaluation::{cross_validate, Dataset, SplitPlan};
use playclass::model_file::{read_model, write_model};
use playclass::textproc::{default_stop_words, StopWordList};
use playclass::{FilterProfile, NbVariant, PipelineConfig, TrainedPipeline, WeightMode};

/// Posterior of each class for a one-token document, by direct counting
/// (raw counts, Laplace smoothing), normalized.
fn brute_posterior(docs: &[(&str, &str)], token: &str) -> Vec<(String, f64)> {
    let mut classes: Vec<&str> = docs.iter().map(|d| d.0).collect();
    classes.sort();
    classes.dedup();
    let vocab: std::collections::BTreeSet<&str> =
        docs.iter().flat_map(|d| d.1.split(' ')).collect();
    let joint: Vec<f64> = classes
        .iter()
        .map(|c| {
            let words: Vec<&str> = docs
                .iter()
                .filter(|d| d.0 == *c)
                .flat_map(|d| d.1.split(' '))
                .collect();
            let prior = docs.iter().filter(|d| d.0 == *c).count() as f64 / docs.len() as f64;
            let hits = words.iter().filter(|w| **w == token).count() as f64;
            prior * (hits + 1.0) / (words.len() as f64 + vocab.len() as f64)
        })
        .collect();
    let z: f64 = joint.iter().sum();
    classes
        .iter()
        .zip(joint)
        .map(|(c, j)| (c.to_string(), j / z))
        .collect()
}

#[test]
fn separating_token_picks_its_class() {
    let docs = [
        ("FINANCE", "money budget"),
        ("FINANCE", "money savings"),
        ("TRAVEL", "flight hotel"),
        ("TRAVEL", "hotel booking"),
        ("WEATHER", "rain forecast"),
    ];
    let cfg = PipelineConfig {
        weighting: WeightMode::Count,
        max_df: 1.0,
        ..PipelineConfig::new(NbVariant::Multinomial)
    };
    let texts: Vec<&str> = docs.iter().map(|d| d.1).collect();
    let labels: Vec<&str> = docs.iter().map(|d| d.0).collect();
    let p = TrainedPipeline::train(&cfg, &texts, &labels, StopWordList::empty()).unwrap();
    for (token, class) in [("savings", "FINANCE"), ("booking", "TRAVEL"), ("rain", "WEATHER")] {
        let pred = p.predict_text(token).unwrap();
        assert_eq!(pred.top(), class);
        let mut got = pred.posteriors();
        got.sort_by(|a, b| a.0.cmp(&b.0));
        for ((gc, gp), (ec, ep)) in got.iter().zip(brute_posterior(&docs, token)) {
            assert_eq!(*gc, ec);
            assert!((gp - ep).abs() < 1e-12, "{token}: {gc} {gp} vs {ep}");
        }
    }
}

#[test]
fn csv_to_cross_validation() {
    let mut csv = String::from(
        "AppName,Category,Description,IsTopDeveloper,ContentRating,IsFree,HaveInAppPurchases\n",
    );
    let words = [
        ("GAME_RACING", "cars speed track drift race"),
        ("GAME_CARD", "poker cards deck solitaire dealer"),
        ("MEDICAL", "doctor pregnancy symptoms clinic health"),
    ];
    for i in 0..12 {
        for (label, w) in words {
            csv.push_str(&format!("a{i},{label},{w} extra{},TRUE,Everyone,1,0\n", "z".repeat(i % 3 + 2)));
        }
    }
    let raw = read_apps_csv(csv.as_bytes(), CsvSchema::Labeled).unwrap();
    assert_eq!(raw.records.len(), 36);
    let corpus = apply_filter_profile(
        &raw.records,
        &FilterProfile::new(AppFilter::AllApps, CategoryScope::GroupedGameApps),
    )
    .unwrap();
    assert_eq!(corpus.categories().len(), 2);

    let data = Dataset::from_corpus(&corpus, &default_stop_words());
    for variant in [NbVariant::Multinomial, NbVariant::Bernoulli] {
        let cfg = PipelineConfig::new(variant);
        let r = cross_validate(&data, &cfg, &SplitPlan::stratified(3, 5)).unwrap();
        assert_eq!(r.fold_scores.len(), 3);
        assert_eq!(r.mean, 1.0, "{variant:?}");
    }

    let texts: Vec<&str> = corpus.documents().iter().map(|d| d.text.as_str()).collect();
    let p = TrainedPipeline::train(
        &PipelineConfig::new(NbVariant::Bernoulli),
        &texts,
        &corpus.labels(),
        default_stop_words(),
    )
    .unwrap();
    let mut bytes = Vec::new();
    write_model(&p, &mut bytes).unwrap();
    let back = read_model(bytes.as_slice(), "mem").unwrap();
    // Bernoulli scores absences too, so queries carry most of a class's words.
    assert_eq!(back.predict_text("doctor pregnancy clinic health").unwrap().top(), "MEDICAL");
    assert_eq!(back.predict_text("poker cards deck dealer").unwrap().top(), "GAMES");
}
