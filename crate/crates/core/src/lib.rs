//! Naive Bayes categorization of app-store listings from their metadata.
//!
//! The pipeline: [`corpus`] ingests app metadata CSV and applies filter
//! profiles, [`textproc`] tokenizes, [`features`] builds a pruned vocabulary
//! and TF-IDF or binary vectors, [`classifier`] trains Multinomial or
//! Bernoulli naive Bayes, and [`evaluation`] runs holdout, k-fold,
//! recursive feature elimination and learning-curve experiments.

pub mod classifier;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod model_file;
pub mod pipeline;
pub mod textproc;

pub use classifier::{NbModel, NbVariant, Prediction};
pub use corpus::{AppRecord, Corpus, FilterProfile};
pub use error::{Error, Result};
pub use features::{DocTermMatrix, Vocabulary, WeightMode};
pub use pipeline::{PipelineConfig, TrainedPipeline};
pub use textproc::{StopWordList, TokenStream};
