//! Training loops, last-item evaluation and report/log formats.

mod evaluate;
pub mod metrics;
mod report;
mod trainer;

pub use evaluate::{evaluate_last_item, site_accuracy, CUTOFFS};
pub use report::{load_report, save_report, write_log_csv, EvalReport, LogRow, LOG_HEADER};
pub use trainer::{sub_seed, train, train_with, TrainConfig, TrainOutcome, Trainer};
