//! Text → vocabulary → vectors → model, bundled with the settings needed
//! to apply it to new text.

use crate::classifier::{self, NbModel, NbVariant, Prediction, DEFAULT_ALPHA};
use crate::error::{Error, Result};
use crate::features::{
    build_vocabulary, vectorize_one, vectorize_refs, Vocabulary, WeightMode, DEFAULT_MAX_DF,
    DEFAULT_MIN_DF,
};
use crate::textproc::{tokenize, StopWordList, TokenStream};

/// Vectorizer and classifier settings. Tokenization settings (stop words)
/// are supplied separately since documents are usually tokenized once.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineConfig {
    pub variant: NbVariant,
    pub weighting: WeightMode,
    pub alpha: f64,
    pub min_df: f64,
    pub max_df: f64,
}

impl PipelineConfig {
    pub fn new(variant: NbVariant) -> Self {
        PipelineConfig {
            variant,
            weighting: variant.default_weighting(),
            alpha: DEFAULT_ALPHA,
            min_df: DEFAULT_MIN_DF,
            max_df: DEFAULT_MAX_DF,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.variant {
            NbVariant::Multinomial => self.weighting != WeightMode::Binary,
            NbVariant::Bernoulli => self.weighting == WeightMode::Binary,
        };
        if !ok {
            return Err(Error::contract(format!(
                "{} model cannot use {} weighting",
                self.variant.as_str(),
                self.weighting.as_str()
            )));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::contract(format!("alpha must be > 0, got {}", self.alpha)));
        }
        Ok(())
    }

    /// Fits a vocabulary and model on pre-tokenized documents.
    pub fn fit<S: AsRef<str>>(&self, docs: &[&TokenStream], labels: &[S]) -> Result<Fitted> {
        self.validate()?;
        let vocab = build_vocabulary(docs.iter().copied(), self.min_df, self.max_df)?;
        let matrix = vectorize_refs(docs, &vocab, self.weighting);
        let model = classifier::train(self.variant, &matrix, labels, self.alpha)?;
        Ok(Fitted { vocab, model })
    }
}

/// A vocabulary with the model trained on it.
#[derive(Debug, Clone, PartialEq)]
pub struct Fitted {
    pub vocab: Vocabulary,
    pub model: NbModel,
}

impl Fitted {
    pub fn predict_tokens(&self, doc: &TokenStream) -> Result<Prediction> {
        self.model
            .predict(&vectorize_one(doc, &self.vocab, self.model.weighting))
    }

    /// Top-class indices into `self.model.classes`.
    pub fn predict_indices(&self, docs: &[&TokenStream]) -> Result<Vec<usize>> {
        let matrix = vectorize_refs(docs, &self.vocab, self.model.weighting);
        self.model.predict_batch_indices(&matrix)
    }

    /// Fraction of `docs` whose top class equals its label.
    pub fn accuracy<S: AsRef<str>>(&self, docs: &[&TokenStream], labels: &[S]) -> Result<f64> {
        if docs.is_empty() {
            return Err(Error::contract("accuracy over zero documents"));
        }
        let pred = self.predict_indices(docs)?;
        let hits = pred
            .iter()
            .zip(labels)
            .filter(|(&p, l)| self.model.classes[p] == l.as_ref())
            .count();
        Ok(hits as f64 / docs.len() as f64)
    }
}

/// A fitted pipeline together with the stop-word list it was trained with.
/// This is what the model file stores.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedPipeline {
    pub fitted: Fitted,
    pub stop_words: StopWordList,
}

impl TrainedPipeline {
    pub fn train<S: AsRef<str>>(
        config: &PipelineConfig,
        texts: &[&str],
        labels: &[S],
        stop_words: StopWordList,
    ) -> Result<Self> {
        let docs: Vec<TokenStream> = texts.iter().map(|t| tokenize(t, &stop_words)).collect();
        let refs: Vec<&TokenStream> = docs.iter().collect();
        Ok(TrainedPipeline {
            fitted: config.fit(&refs, labels)?,
            stop_words,
        })
    }

    pub fn model(&self) -> &NbModel {
        &self.fitted.model
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.fitted.vocab
    }

    pub fn predict_text(&self, text: &str) -> Result<Prediction> {
        self.fitted.predict_tokens(&tokenize(text, &self.stop_words))
    }

    /// Fails when `stops` differs from the list the model was trained with.
    pub fn check_stop_words(&self, stops: &StopWordList) -> Result<()> {
        if stops.fingerprint() != self.stop_words.fingerprint() {
            return Err(Error::VocabMismatch(format!(
                "stop-word list `{}` differs from the list `{}` the model was trained with",
                stops.source_name(),
                self.stop_words.source_name()
            )));
        }
        Ok(())
    }
}
