use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Last-item metrics at cutoffs 5 and 20.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalReport {
    pub mrr5: f64,
    pub mrr20: f64,
    pub hr5: f64,
    pub hr20: f64,
    pub ndcg5: f64,
    pub ndcg20: f64,
    pub n_queries: usize,
    pub n_skipped: usize,
    pub model: String,
    pub seed: u64,
    pub epoch: usize,
}

const FIELDS: [&str; 11] = [
    "model", "seed", "epoch", "n_queries", "n_skipped", "mrr5", "mrr20", "hr5", "hr20", "ndcg5",
    "ndcg20",
];

impl EvalReport {
    fn values(&self) -> [String; 11] {
        [
            self.model.clone(),
            self.seed.to_string(),
            self.epoch.to_string(),
            self.n_queries.to_string(),
            self.n_skipped.to_string(),
            self.mrr5.to_string(),
            self.mrr20.to_string(),
            self.hr5.to_string(),
            self.hr20.to_string(),
            self.ndcg5.to_string(),
            self.ndcg20.to_string(),
        ]
    }

    /// Metric values in reporting order.
    pub fn metrics(&self) -> [(&'static str, f64); 6] {
        [
            ("MRR@5", self.mrr5),
            ("MRR@20", self.mrr20),
            ("HR@5", self.hr5),
            ("HR@20", self.hr20),
            ("NDCG@5", self.ndcg5),
            ("NDCG@20", self.ndcg20),
        ]
    }

    pub fn is_monotone(&self) -> bool {
        self.mrr5 <= self.mrr20 && self.hr5 <= self.hr20 && self.ndcg5 <= self.ndcg20
    }

    pub fn to_kv(&self) -> String {
        let mut out = String::new();
        for (k, v) in FIELDS.iter().zip(self.values()) {
            writeln!(out, "{k}={v}").unwrap();
        }
        out
    }

    pub fn csv_header() -> String {
        FIELDS.join(",")
    }

    pub fn to_csv_row(&self) -> String {
        self.values().join(",")
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut r = EvalReport::default();
        let mut seen = 0;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("malformed report line `{line}`")))?;
            let num = |v: &str| {
                v.parse::<f64>()
                    .map_err(|e| Error::Config(format!("bad value for {k}: {e}")))
            };
            let int = |v: &str| {
                v.parse::<u64>()
                    .map_err(|e| Error::Config(format!("bad value for {k}: {e}")))
            };
            match k {
                "model" => r.model = v.to_string(),
                "seed" => r.seed = int(v)?,
                "epoch" => r.epoch = int(v)? as usize,
                "n_queries" => r.n_queries = int(v)? as usize,
                "n_skipped" => r.n_skipped = int(v)? as usize,
                "mrr5" => r.mrr5 = num(v)?,
                "mrr20" => r.mrr20 = num(v)?,
                "hr5" => r.hr5 = num(v)?,
                "hr20" => r.hr20 = num(v)?,
                "ndcg5" => r.ndcg5 = num(v)?,
                "ndcg20" => r.ndcg20 = num(v)?,
                other => return Err(Error::UnknownKey(other.to_string())),
            }
            seen += 1;
        }
        if seen != FIELDS.len() {
            return Err(Error::Config(format!(
                "report has {seen} fields, expected {}",
                FIELDS.len()
            )));
        }
        Ok(r)
    }
}

pub fn save_report(report: &EvalReport, path: &Path) -> Result<()> {
    fs::write(path, report.to_kv()).map_err(|e| Error::io(path, e))
}

pub fn load_report(path: &Path) -> Result<EvalReport> {
    EvalReport::from_kv(&fs::read_to_string(path).map_err(|e| Error::io(path, e))?)
}

/// One row of the training log.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRow {
    pub epoch: usize,
    /// Optimizer steps taken so far.
    pub step: usize,
    pub train_loss: f64,
    pub val_mrr5: f64,
}

pub const LOG_HEADER: &str = "epoch,step,train_loss,val_mrr5";

pub fn write_log_csv(path: &Path, rows: &[LogRow]) -> Result<()> {
    let mut out = format!("{LOG_HEADER}\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.epoch, r.step, r.train_loss, r.val_mrr5).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
