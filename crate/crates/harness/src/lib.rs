//! Command-line plumbing around the task generators: dataset files,
//! attention dumps, prediction scoring, report tables and heatmaps.

pub mod dataset;
pub mod dump;
pub mod error;
pub mod evaluate;
pub mod heatmap;
pub mod predictions;
pub mod report;
pub mod scripted;

pub use dataset::{read_dataset, write_dataset};
pub use dump::{dump_paths, load_attention_dump, read_dump, write_dump, DumpHeader};
pub use error::{HarnessError, Result};
pub use evaluate::{evaluate, EvalOptions, EvalReport, ScoreGroup, SplitReport};
pub use predictions::{
    exact_match_accuracy, read_predictions, token_accuracy, write_predictions, Prediction, PredictionRecord,
};
pub use report::{render, ReportFormat};
pub use scripted::{write_scripted_dumps, ScriptKind};
