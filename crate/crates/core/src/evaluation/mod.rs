//! Holdout, cross-validation, recursive feature elimination and learning
//! curves.
//!
//! Independent folds and curve points run in parallel; results are always
//! collected in fold/point order, so every output is a pure function of the
//! inputs and the plan seed.

mod metrics;
mod splits;

use std::collections::BTreeSet;
use std::io::Write;

use log::warn;
use rayon::prelude::*;

use crate::classifier;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{build_vocabulary, vectorize};
use crate::pipeline::PipelineConfig;
use crate::textproc::{StopWordList, TokenStream};

pub use metrics::{
    class_report, confusion, ClassCounts, ClassMetrics, ClassReport, ConfusionMatrix,
    REPORT_COLUMNS,
};
pub use splits::{
    holdout_test_size, make_splits, Split, SplitKind, SplitPlan, DEFAULT_TEST_FRACTION,
};

pub const DEFAULT_STEP_FRACTION: f64 = 0.2;
pub const DEFAULT_CURVE_ITERATIONS: usize = 10;

/// Ten evenly spaced fractions, 0.1 through 1.0.
pub fn default_train_sizes() -> Vec<f64> {
    (1..=10).map(|i| i as f64 / 10.0).collect()
}

/// Tokenized documents with their labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub docs: Vec<TokenStream>,
    pub labels: Vec<String>,
}

impl Dataset {
    pub fn new(docs: Vec<TokenStream>, labels: Vec<String>) -> Result<Self> {
        if docs.len() != labels.len() {
            return Err(Error::contract(format!(
                "{} documents but {} labels",
                docs.len(),
                labels.len()
            )));
        }
        if docs.is_empty() {
            return Err(Error::DegenerateCorpus("dataset has no documents".into()));
        }
        Ok(Dataset { docs, labels })
    }

    pub fn from_corpus(corpus: &Corpus, stops: &StopWordList) -> Self {
        Dataset {
            docs: corpus.tokenize(stops),
            labels: corpus.labels(),
        }
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<String> {
        self.labels
            .iter()
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect()
    }

    fn docs_at(&self, idx: &[usize]) -> Vec<&TokenStream> {
        idx.iter().map(|&i| &self.docs[i]).collect()
    }

    fn labels_at(&self, idx: &[usize]) -> Vec<&str> {
        idx.iter().map(|&i| self.labels[i].as_str()).collect()
    }
}

/// Fits on `train`, returns the predicted label of every `test` document.
fn fit_predict(
    data: &Dataset,
    config: &PipelineConfig,
    train: &[usize],
    test: &[usize],
) -> Result<Vec<String>> {
    let fitted = config.fit(&data.docs_at(train), &data.labels_at(train))?;
    let pred = fitted.predict_indices(&data.docs_at(test))?;
    Ok(pred
        .into_iter()
        .map(|p| fitted.model.classes[p].clone())
        .collect())
}

fn accuracy_of(pred: &[String], data: &Dataset, idx: &[usize]) -> f64 {
    let hits = pred
        .iter()
        .zip(idx)
        .filter(|(p, &i)| **p == data.labels[i])
        .count();
    hits as f64 / idx.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutResult {
    pub accuracy: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub confusion: ConfusionMatrix,
    pub report: ClassReport,
}

/// Single train/test evaluation. The confusion matrix covers every class in
/// the dataset, including ones absent from the test side.
pub fn holdout(data: &Dataset, config: &PipelineConfig, plan: &SplitPlan) -> Result<HoldoutResult> {
    if plan.kind != SplitKind::HoldOut {
        return Err(Error::contract("holdout needs a HoldOut split plan"));
    }
    let split = make_splits(data.len(), &data.labels, plan)?.remove(0);
    let pred = fit_predict(data, config, &split.train, &split.test)?;
    let truth = data.labels_at(&split.test);
    let cm = confusion(&truth, &pred, &data.classes())?;
    let report = class_report(&cm);
    Ok(HoldoutResult {
        accuracy: report.accuracy,
        n_train: split.train.len(),
        n_test: split.test.len(),
        confusion: cm,
        report,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub k: usize,
    pub fold_scores: Vec<f64>,
    /// Unweighted mean of the fold accuracies.
    pub mean: f64,
}

/// k-fold cross-validation. Each fold refits the vocabulary and model on its
/// training side only.
pub fn cross_validate(data: &Dataset, config: &PipelineConfig, plan: &SplitPlan) -> Result<CvResult> {
    if !plan.kind.is_folded() {
        return Err(Error::contract("cross-validation needs a k-fold split plan"));
    }
    config.validate()?;
    let splits = make_splits(data.len(), &data.labels, plan)?;
    let fold_scores = splits
        .par_iter()
        .map(|s| Ok(accuracy_of(&fit_predict(data, config, &s.train, &s.test)?, data, &s.test)))
        .collect::<Result<Vec<f64>>>()?;
    let mean = fold_scores.iter().sum::<f64>() / fold_scores.len() as f64;
    Ok(CvResult {
        k: plan.k,
        fold_scores,
        mean,
    })
}

/// One point of an RFE or learning curve.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    /// Feature count (RFE) or training-set size (learning curve).
    pub x: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub std: f64,
}

impl CurvePoint {
    pub fn from_scores(x: usize, scores: &[f64]) -> Self {
        let n = scores.len() as f64;
        let mean = scores.iter().sum::<f64>() / n;
        let var = scores.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        CurvePoint {
            x,
            mean,
            min: scores.iter().copied().fold(f64::INFINITY, f64::min),
            max: scores.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            std: var.sqrt(),
        }
    }
}

/// Writes `x,mean,lo,hi` rows with lo/hi the min and max across splits.
pub fn write_curve_csv<W: Write>(points: &[CurvePoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["x", "mean", "lo", "hi"])?;
    for p in points {
        out.write_record([
            p.x.to_string(),
            format!("{:.6}", p.mean),
            format!("{:.6}", p.min),
            format!("{:.6}", p.max),
        ])?;
    }
    out.flush().map_err(|e| Error::io("<csv>", e))
}

/// Features removed from a set of `current` features in one RFE round:
/// `ceil(step * current)`, at least one, never all of them.
pub fn rfe_drop_count(current: usize, step_fraction: f64) -> usize {
    let d = (step_fraction * current as f64 - 1e-9).ceil().max(1.0) as usize;
    d.min(current.saturating_sub(1))
}

/// Recursive feature elimination scored by cross-validation.
///
/// Vocabulary and weights are fitted once on the whole dataset (document
/// frequencies only, no labels). Each round scores the current feature set
/// by CV, then ranks features with a model fitted on all documents and
/// drops the lowest-ranked ones. Ties drop the lower feature index first.
pub fn rfe_cv(
    data: &Dataset,
    config: &PipelineConfig,
    step_fraction: f64,
    plan: &SplitPlan,
) -> Result<Vec<CurvePoint>> {
    if !(step_fraction > 0.0 && step_fraction < 1.0) {
        return Err(Error::contract(format!(
            "step fraction must be in (0, 1), got {step_fraction}"
        )));
    }
    if !plan.kind.is_folded() {
        return Err(Error::contract("feature elimination needs a k-fold split plan"));
    }
    config.validate()?;
    let vocab = build_vocabulary(data.docs.iter(), config.min_df, config.max_df)?;
    let full = vectorize(&data.docs, &vocab, config.weighting);
    let splits = make_splits(data.len(), &data.labels, plan)?;

    let mut current: Vec<usize> = (0..vocab.len()).collect();
    let mut points = Vec::new();
    loop {
        let matrix = full.select_columns(&current, vocab.restrict(&current).id());
        let scores = splits
            .par_iter()
            .map(|s| {
                let model = classifier::train(
                    config.variant,
                    &matrix.select_rows(&s.train),
                    &data.labels_at(&s.train),
                    config.alpha,
                )?;
                let pred = model.predict_batch_indices(&matrix.select_rows(&s.test))?;
                let hits = pred
                    .iter()
                    .zip(&s.test)
                    .filter(|(&p, &i)| model.classes[p] == data.labels[i])
                    .count();
                Ok(hits as f64 / s.test.len() as f64)
            })
            .collect::<Result<Vec<f64>>>()?;
        points.push(CurvePoint::from_scores(current.len(), &scores));
        if current.len() == 1 {
            break;
        }
        let model = classifier::train(config.variant, &matrix, &data.labels, config.alpha)?;
        let importance = model.feature_importance();
        let mut order: Vec<usize> = (0..current.len()).collect();
        order.sort_by(|&a, &b| importance[a].total_cmp(&importance[b]).then(a.cmp(&b)));
        let drop: BTreeSet<usize> = order[..rfe_drop_count(current.len(), step_fraction)]
            .iter()
            .copied()
            .collect();
        current = current
            .iter()
            .enumerate()
            .filter(|(pos, _)| !drop.contains(pos))
            .map(|(_, &f)| f)
            .collect();
    }
    Ok(points)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningCurve {
    pub train: Vec<CurvePoint>,
    pub test: Vec<CurvePoint>,
}

/// Number of training items used at a given size fraction of the pool.
pub fn curve_subset_size(fraction: f64, pool: usize) -> usize {
    (fraction * pool as f64 + 1e-9).floor() as usize
}

/// Learning curve over repeated shuffled holdouts. At each size the model is
/// trained on a prefix of each split's shuffled training side, then scored on
/// that prefix and on the held-out side.
///
/// Sizes with fewer training documents than classes, or whose subsets yield
/// no usable features, are skipped with a warning.
pub fn learning_curve(
    data: &Dataset,
    config: &PipelineConfig,
    plan: &SplitPlan,
    train_sizes: &[f64],
) -> Result<LearningCurve> {
    if plan.kind != SplitKind::ShuffleSplit {
        return Err(Error::contract("learning curve needs a ShuffleSplit plan"));
    }
    if train_sizes.is_empty()
        || train_sizes.iter().any(|&f| !(f > 0.0 && f <= 1.0))
        || train_sizes.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(Error::contract(
            "train sizes must be strictly ascending fractions in (0, 1]",
        ));
    }
    config.validate()?;
    let splits = make_splits(data.len(), &data.labels, plan)?;
    let pool = splits[0].train.len();
    let n_classes = data.classes().len();

    let jobs: Vec<(usize, &Split)> = train_sizes
        .iter()
        .map(|&f| curve_subset_size(f, pool))
        .filter(|&m| {
            let ok = m >= n_classes && m > 0;
            if !ok {
                warn!("skipping learning-curve size {m}: fewer documents than {n_classes} classes");
            }
            ok
        })
        .flat_map(|m| splits.iter().map(move |s| (m, s)))
        .collect();
    let outcomes: Vec<(usize, Result<(f64, f64)>)> = jobs
        .par_iter()
        .map(|&(m, s)| {
            let sub = &s.train[..m];
            let run = || -> Result<(f64, f64)> {
                let fitted = config.fit(&data.docs_at(sub), &data.labels_at(sub))?;
                Ok((
                    fitted.accuracy(&data.docs_at(sub), &data.labels_at(sub))?,
                    fitted.accuracy(&data.docs_at(&s.test), &data.labels_at(&s.test))?,
                ))
            };
            (m, run())
        })
        .collect();

    let mut curve = LearningCurve {
        train: Vec::new(),
        test: Vec::new(),
    };
    let mut outcomes = outcomes.into_iter();
    while outcomes.len() > 0 {
        let chunk: Vec<_> = outcomes.by_ref().take(splits.len()).collect();
        let m = chunk[0].0;
        let mut tr = Vec::new();
        let mut te = Vec::new();
        let mut skipped = None;
        for (_, r) in chunk {
            match r {
                Ok((a, b)) => {
                    tr.push(a);
                    te.push(b);
                }
                Err(e @ (Error::DegenerateFeatures(_) | Error::DegenerateCorpus(_))) => {
                    skipped = Some(e.to_string());
                }
                Err(e) => return Err(e),
            }
        }
        if let Some(msg) = skipped {
            warn!("skipping learning-curve size {m}: {msg}");
            continue;
        }
        curve.train.push(CurvePoint::from_scores(m, &tr));
        curve.test.push(CurvePoint::from_scores(m, &te));
    }
    Ok(curve)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::WeightMode;
    use crate::classifier::NbVariant;
    use crate::textproc::tokenize;

    fn toy(n_per_class: usize) -> Dataset {
        let stops = StopWordList::empty();
        let mut docs = Vec::new();
        let mut labels = Vec::new();
        let vocab = [
            ("ALPHA", ["apple", "avocado", "apricot"]),
            ("BETA", ["banana", "blueberry", "bilberry"]),
            ("GAMMA", ["grape", "guava", "gooseberry"]),
        ];
        for i in 0..n_per_class {
            for (label, words) in vocab {
                let text = format!("{} {} shared common{}", words[i % 3], words[(i + 1) % 3], i % 4);
                docs.push(tokenize(&text, &stops));
                labels.push(label.to_string());
            }
        }
        Dataset::new(docs, labels).unwrap()
    }

    fn config() -> PipelineConfig {
        PipelineConfig {
            max_df: 1.0,
            min_df: 0.0,
            ..PipelineConfig::new(NbVariant::Multinomial)
        }
    }

    #[test]
    fn cv_on_separable_data_is_perfect() {
        let data = toy(10);
        let r = cross_validate(&data, &config(), &SplitPlan::stratified(5, 1)).unwrap();
        assert_eq!(r.fold_scores.len(), 5);
        assert_eq!(r.mean, 1.0);
    }

    #[test]
    fn single_class_cv_scores_one() {
        let stops = StopWordList::empty();
        let docs: Vec<_> = ["aa bb", "bb cc", "cc dd", "dd aa"]
            .iter()
            .map(|t| tokenize(t, &stops))
            .collect();
        let data = Dataset::new(docs, vec!["ONLY".to_string(); 4]).unwrap();
        let r = cross_validate(&data, &config(), &SplitPlan::kfold(2, 3)).unwrap();
        assert_eq!(r.fold_scores, vec![1.0, 1.0]);
    }

    #[test]
    fn cv_is_deterministic() {
        let data = toy(8);
        let cfg = PipelineConfig {
            weighting: WeightMode::Count,
            ..config()
        };
        let a = cross_validate(&data, &cfg, &SplitPlan::kfold(4, 7)).unwrap();
        let b = cross_validate(&data, &cfg, &SplitPlan::kfold(4, 7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn holdout_report_covers_all_classes() {
        let data = toy(10);
        let r = holdout(&data, &config(), &SplitPlan::holdout(0.2, 5)).unwrap();
        assert_eq!(r.n_test, 6);
        assert_eq!(r.confusion.labels(), ["ALPHA", "BETA", "GAMMA"]);
        assert_eq!(r.report.total, 6);
    }

    #[test]
    fn drop_counts() {
        assert_eq!(rfe_drop_count(14_571, 0.2), 2915);
        assert_eq!(rfe_drop_count(11_656, 0.2), 2332);
        assert_eq!(rfe_drop_count(500, 0.2), 100);
        assert_eq!(rfe_drop_count(4, 0.2), 1);
        assert_eq!(rfe_drop_count(2, 0.9), 1);
        assert_eq!(rfe_drop_count(1, 0.2), 0);
    }

    #[test]
    fn rfe_with_few_features() {
        let stops = StopWordList::empty();
        let docs: Vec<_> = ["xx", "xx", "yy", "yy", "xx yy", "yy"]
            .iter()
            .map(|t| tokenize(t, &stops))
            .collect();
        let labels = ["A", "A", "B", "B", "A", "B"].map(String::from).to_vec();
        let data = Dataset::new(docs, labels).unwrap();
        let pts = rfe_cv(&data, &config(), 0.2, &SplitPlan::stratified(2, 0)).unwrap();
        let xs: Vec<usize> = pts.iter().map(|p| p.x).collect();
        assert_eq!(xs, vec![2, 1]);
        assert!(pts.iter().all(|p| (0.0..=1.0).contains(&p.mean)));
    }

    #[test]
    fn learning_curve_x_values() {
        let data = toy(40);
        let plan = SplitPlan::shuffle_split(3, 0.2, 11);
        let pool = data.len() - holdout_test_size(data.len(), 0.2);
        let lc = learning_curve(&data, &config(), &plan, &default_train_sizes()).unwrap();
        let xs: Vec<usize> = lc.test.iter().map(|p| p.x).collect();
        let expect: Vec<usize> = (1..=10).map(|i| pool * i / 10).collect();
        assert_eq!(xs, expect);
        assert_eq!(lc.train.len(), lc.test.len());
        assert_eq!(curve_subset_size(0.3, 1000), 300);
        assert_eq!(curve_subset_size(0.7, 1000), 700);
    }

    #[test]
    fn learning_curve_skips_tiny_sizes() {
        let data = toy(10);
        let lc = learning_curve(&data, &config(), &SplitPlan::shuffle_split(2, 0.2, 0), &[0.05, 1.0])
            .unwrap();
        assert_eq!(lc.test.len(), 1);
        assert!(learning_curve(&data, &config(), &SplitPlan::shuffle_split(2, 0.2, 0), &[0.5, 0.5])
            .is_err());
    }

    #[test]
    fn curve_csv() {
        let mut buf = Vec::new();
        write_curve_csv(&[CurvePoint::from_scores(10, &[0.5, 1.0])], &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "x,mean,lo,hi\n10,0.750000,0.500000,1.000000\n"
        );
    }
}
