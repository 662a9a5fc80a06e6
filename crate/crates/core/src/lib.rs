pub mod backtest;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod labeler;
pub mod lexicon;
pub mod models;
pub mod money;
pub mod pipeline;
pub mod rng;
pub mod select;
pub mod stats;
pub mod sweep;
pub mod synth;
pub mod tokenizer;
pub mod vectorizer;

pub use error::{Error, ErrorKind, Result};
