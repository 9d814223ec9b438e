//! Command-line pipeline: data preparation, synthetic corpora, training,
//! evaluation, inference and ablation matrices.
//!
//! Every command resolves one flat `key=value` configuration (defaults, then
//! `--config`, then `--set` overrides, then dedicated flags) and writes it to
//! `config.resolved` in the output directory.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::io::{read_events, read_sessions, write_sessions, write_vocabulary};
use crate::data::{build_vocabulary, generate_synthetic, segment_sessions, split_dataset, valid_len, ItemId, Regime, Split, SynthSpec};
use crate::error::{Error, Result};
use crate::model::checkpoint;
use crate::model::{top_n, ModelConfig, ModelKind, MostPop, Network, Recommender};
use crate::train::{evaluate_last_item, save_report, sub_seed, train_with, write_log_csv, EvalReport, TrainConfig};

pub const RESOLVED_CONFIG: &str = "config.resolved";
pub const TRAIN_FILE: &str = "train.sessions";
pub const VALID_FILE: &str = "valid.sessions";
pub const TEST_FILE: &str = "test.sessions";
pub const VOCAB_FILE: &str = "vocab.tsv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const LOG_FILE: &str = "train_log.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const ABLATE_FILE: &str = "ablate.csv";
pub const ABLATE_RUNS_FILE: &str = "ablate_runs.csv";

#[derive(Debug, Parser)]
#[command(name = "grec", about = "Gap-filling session recommenders and causal CNN baselines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter, segment and split a raw `user<TAB>item<TAB>timestamp` log.
    Prep(Common),
    /// Generate and split a synthetic corpus.
    Synth(Common),
    /// Train a model and evaluate it on the test split.
    Train(Common),
    /// Evaluate a checkpoint (or MostPop) on the test split.
    Eval(Common),
    /// Print the top-N items for one prefix.
    Infer(Common),
    /// Train a matrix of configurations over a shared seed set.
    Ablate(Common),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat key=value configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one key (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub model: Option<String>,
    /// Space-separated item indices.
    #[arg(long)]
    pub prefix: Option<String>,
    #[arg(long)]
    pub topn: Option<usize>,
}

/// Every configurable value of the pipeline.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub input: PathBuf,
    pub data: PathBuf,
    pub checkpoint: Option<PathBuf>,
    pub min_item_count: usize,
    pub k: usize,
    pub l: usize,
    pub fractions: [f64; 3],
    pub synth_vocab: usize,
    pub synth_sessions: usize,
    pub synth_regime: Regime,
    pub synth_prob: f64,
    pub model: ModelKind,
    pub d: usize,
    pub kernel: usize,
    pub enc_dilations: Vec<usize>,
    pub dec_dilations: Vec<usize>,
    pub gamma: f64,
    /// `None` keeps the model kind's default.
    pub projector: Option<bool>,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub seed: u64,
    pub topn: usize,
    pub ablate_gammas: Vec<f64>,
    pub ablate_variants: Vec<String>,
    pub ablate_seeds: Vec<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let dil = vec![1, 2, 4, 8, 1, 2, 4, 8];
        RunConfig {
            input: PathBuf::from("events.tsv"),
            data: PathBuf::from("data"),
            checkpoint: None,
            min_item_count: 20,
            k: 20,
            l: 10,
            fractions: [0.8, 0.1, 0.1],
            synth_vocab: 100,
            synth_sessions: 20_000,
            synth_regime: Regime::BasketMixed,
            synth_prob: 0.8,
            model: ModelKind::Grec,
            d: 64,
            kernel: 3,
            enc_dilations: dil.clone(),
            dec_dilations: dil,
            gamma: 0.5,
            projector: None,
            learning_rate: 1e-3,
            batch_size: 128,
            max_epochs: 10,
            patience: 2,
            seed: 0,
            topn: 5,
            ablate_gammas: vec![0.1, 0.3, 0.5, 0.7, 1.0],
            ablate_variants: Vec::new(),
            ablate_seeds: vec![0, 1, 2],
        }
    }
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn parse_items<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>>
where
    T::Err: std::fmt::Display,
{
    v.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse().map_err(|e| Error::Config(format!("bad element `{x}` for {key}: {e}"))))
        .collect()
}

impl RunConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            v.parse().map_err(|e| Error::Config(format!("bad value `{v}` for {key}: {e}")))
        }
        let v = value.trim();
        match key.trim() {
            "input" => self.input = PathBuf::from(v),
            "data" => self.data = PathBuf::from(v),
            "checkpoint" => self.checkpoint = (!v.is_empty()).then(|| PathBuf::from(v)),
            "min_item_count" => self.min_item_count = num(key, v)?,
            "k" => self.k = num(key, v)?,
            "l" => self.l = num(key, v)?,
            "fractions" => {
                let f: Vec<f64> = parse_items(key, v)?;
                self.fractions = f
                    .try_into()
                    .map_err(|_| Error::Config("fractions needs exactly three values".into()))?;
            }
            "synth_vocab" => self.synth_vocab = num(key, v)?,
            "synth_sessions" => self.synth_sessions = num(key, v)?,
            "synth_regime" => self.synth_regime = v.parse()?,
            "synth_prob" => self.synth_prob = num(key, v)?,
            "model" => self.model = v.parse()?,
            "d" => self.d = num(key, v)?,
            "kernel" => self.kernel = num(key, v)?,
            "enc_dilations" => self.enc_dilations = parse_items(key, v)?,
            "dec_dilations" => self.dec_dilations = parse_items(key, v)?,
            "gamma" => self.gamma = num(key, v)?,
            "projector" => {
                self.projector = match v {
                    "" | "default" => None,
                    _ => Some(num(key, v)?),
                }
            }
            "learning_rate" => self.learning_rate = num(key, v)?,
            "batch_size" => self.batch_size = num(key, v)?,
            "max_epochs" => self.max_epochs = num(key, v)?,
            "patience" => self.patience = num(key, v)?,
            "seed" => self.seed = num(key, v)?,
            "topn" => self.topn = num(key, v)?,
            "ablate_gammas" => self.ablate_gammas = parse_items(key, v)?,
            "ablate_variants" => self.ablate_variants = parse_items(key, v)?,
            "ablate_seeds" => self.ablate_seeds = parse_items(key, v)?,
            other => return Err(Error::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Applies `key=value` lines; blank lines and `#` comments are ignored.
    pub fn apply_kv(&mut self, text: &str, path: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: i + 1,
                msg: format!("expected key=value, got `{line}`"),
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k}={v}");
        };
        kv("input", self.input.display().to_string());
        kv("data", self.data.display().to_string());
        kv(
            "checkpoint",
            self.checkpoint.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        );
        kv("min_item_count", self.min_item_count.to_string());
        kv("k", self.k.to_string());
        kv("l", self.l.to_string());
        kv("fractions", join(&self.fractions));
        kv("synth_vocab", self.synth_vocab.to_string());
        kv("synth_sessions", self.synth_sessions.to_string());
        kv("synth_regime", self.synth_regime.to_string());
        kv("synth_prob", self.synth_prob.to_string());
        kv("model", self.model.to_string());
        kv("d", self.d.to_string());
        kv("kernel", self.kernel.to_string());
        kv("enc_dilations", join(&self.enc_dilations));
        kv("dec_dilations", join(&self.dec_dilations));
        kv("gamma", self.gamma.to_string());
        kv("projector", self.projector.map(|p| p.to_string()).unwrap_or_else(|| "default".into()));
        kv("learning_rate", self.learning_rate.to_string());
        kv("batch_size", self.batch_size.to_string());
        kv("max_epochs", self.max_epochs.to_string());
        kv("patience", self.patience.to_string());
        kv("seed", self.seed.to_string());
        kv("topn", self.topn.to_string());
        kv("ablate_gammas", join(&self.ablate_gammas));
        kv("ablate_variants", self.ablate_variants.join(","));
        kv("ablate_seeds", join(&self.ablate_seeds));
        s
    }

    /// Defaults, then the config file, then overrides, then dedicated flags.
    pub fn resolve(common: &Common) -> Result<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &common.config {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            cfg.apply_kv(&text, path)?;
        }
        for o in &common.overrides {
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{o}`")))?;
            cfg.set(k, v)?;
        }
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        if let Some(m) = &common.model {
            cfg.model = m.parse()?;
        }
        if let Some(n) = common.topn {
            cfg.topn = n;
        }
        Ok(cfg)
    }

    pub fn model_config(&self, kind: ModelKind, vocab_size: usize, seq_len: usize) -> ModelConfig {
        let mut m = ModelConfig::new(kind, vocab_size, seq_len).with_width(self.d);
        m.kernel = self.kernel;
        m.enc_dilations = self.enc_dilations.clone();
        m.dec_dilations = self.dec_dilations.clone();
        m.gamma = self.gamma;
        if let Some(p) = self.projector {
            m.projector = p;
        }
        m
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed: self.seed,
        }
    }

    pub fn checkpoint_path(&self, out: &Path) -> PathBuf {
        self.checkpoint.clone().unwrap_or_else(|| out.join(CHECKPOINT_FILE))
    }
}

/// Loaded train/valid/test session files.
#[derive(Clone, Debug)]
pub struct Dataset {
    pub k: usize,
    pub vocab_size: usize,
    pub split: Split,
}

pub fn load_dataset(dir: &Path) -> Result<Dataset> {
    let train = read_sessions(&dir.join(TRAIN_FILE))?;
    let valid = read_sessions(&dir.join(VALID_FILE))?;
    let test = read_sessions(&dir.join(TEST_FILE))?;
    for (name, f) in [(VALID_FILE, &valid), (TEST_FILE, &test)] {
        if f.k != train.k || f.vocab_size != train.vocab_size {
            return Err(Error::Config(format!(
                "{} disagrees with {TRAIN_FILE} on k or V",
                dir.join(name).display()
            )));
        }
    }
    Ok(Dataset {
        k: train.k,
        vocab_size: train.vocab_size,
        split: Split {
            train: train.rows,
            valid: valid.rows,
            test: test.rows,
        },
    })
}

fn write_split(out: &Path, split: &Split, k: usize, vocab_size: usize) -> Result<()> {
    write_sessions(&out.join(TRAIN_FILE), &split.train, k, vocab_size)?;
    write_sessions(&out.join(VALID_FILE), &split.valid, k, vocab_size)?;
    write_sessions(&out.join(TEST_FILE), &split.test, k, vocab_size)
}

fn prepare_out(out: &Path, cfg: &RunConfig) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join(RESOLVED_CONFIG);
    fs::write(&path, cfg.to_kv()).map_err(|e| Error::io(&path, e))
}

/// Row and item counts of a prepared dataset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrepSummary {
    pub users: usize,
    pub items: usize,
    pub interactions: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl std::fmt::Display for PrepSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "users\t{}", self.users)?;
        writeln!(f, "items\t{}", self.items)?;
        writeln!(f, "interactions\t{}", self.interactions)?;
        writeln!(f, "train_sessions\t{}", self.train)?;
        writeln!(f, "valid_sessions\t{}", self.valid)?;
        write!(f, "test_sessions\t{}", self.test)
    }
}

pub fn cmd_prep(cfg: &RunConfig, out: &Path) -> Result<PrepSummary> {
    let prep = crate::data::PrepConfig {
        min_item_count: cfg.min_item_count,
        k: cfg.k,
        l: cfg.l,
        fractions: cfg.fractions,
        seed: sub_seed(cfg.seed, 0),
    };
    prep.validate()?;
    let events = read_events(&cfg.input)?;
    if events.is_empty() {
        return Err(Error::EmptyInput(format!("{} has no events", cfg.input.display())));
    }
    let vocab = build_vocabulary(&events, prep.min_item_count)?;
    let rows = segment_sessions(&events, &vocab, prep.k, prep.l);
    if rows.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no session of at least {} items survives in {}",
            prep.l,
            cfg.input.display()
        )));
    }
    let mut users: Vec<&str> = events
        .iter()
        .filter(|e| vocab.index_of(&e.item).is_some())
        .map(|e| e.user.as_str())
        .collect();
    users.sort_unstable();
    users.dedup();
    let interactions = rows.iter().map(|r| valid_len(r)).sum();
    let split = split_dataset(rows, prep.fractions, prep.seed)?;
    prepare_out(out, cfg)?;
    write_split(out, &split, prep.k, vocab.len())?;
    write_vocabulary(&out.join(VOCAB_FILE), &vocab)?;
    Ok(PrepSummary {
        users: users.len(),
        items: vocab.len(),
        interactions,
        train: split.train.len(),
        valid: split.valid.len(),
        test: split.test.len(),
    })
}

pub fn cmd_synth(cfg: &RunConfig, out: &Path) -> Result<Split> {
    let spec = SynthSpec {
        vocab_size: cfg.synth_vocab,
        n_sessions: cfg.synth_sessions,
        len: cfg.k,
        regime: cfg.synth_regime,
        successor_prob: cfg.synth_prob,
        seed: sub_seed(cfg.seed, 0),
    };
    let corpus = generate_synthetic(&spec)?;
    let split = split_dataset(corpus.rows, cfg.fractions, sub_seed(cfg.seed, 1))?;
    prepare_out(out, cfg)?;
    write_split(out, &split, cfg.k, cfg.synth_vocab)?;
    Ok(split)
}

fn labelled(mut report: EvalReport, model: &str, seed: u64, epoch: usize) -> EvalReport {
    report.model = model.to_string();
    report.seed = seed;
    report.epoch = epoch;
    report
}

/// Trains one model on `data` and evaluates the best epoch on the test split.
pub fn fit_and_test(
    cfg: &RunConfig,
    model: ModelConfig,
    data: &Dataset,
    label: &str,
    on_epoch: impl FnMut(&crate::train::LogRow),
) -> Result<(crate::train::TrainOutcome, EvalReport)> {
    let outcome = train_with(model, &cfg.train_config(), &data.split.train, &data.split.valid, on_epoch)?;
    let report = evaluate_last_item(&outcome.best, &data.split.test)?;
    let report = labelled(report, label, cfg.seed, outcome.best_epoch);
    Ok((outcome, report))
}

pub fn cmd_train(cfg: &RunConfig, out: &Path) -> Result<EvalReport> {
    if cfg.model == ModelKind::MostPop {
        return Err(Error::Config("model `mostpop` is not trained; use `eval --model mostpop`".into()));
    }
    let data = load_dataset(&cfg.data)?;
    let model = cfg.model_config(cfg.model, data.vocab_size, data.k);
    prepare_out(out, cfg)?;
    let (outcome, report) = fit_and_test(cfg, model, &data, cfg.model.name(), |row| {
        eprintln!(
            "epoch {} step {} train_loss {:.5} val_mrr5 {:.5}",
            row.epoch, row.step, row.train_loss, row.val_mrr5
        )
    })?;
    checkpoint::save(&outcome.best, &cfg.checkpoint_path(out))?;
    write_log_csv(&out.join(LOG_FILE), &outcome.log)?;
    save_report(&report, &out.join(REPORT_FILE))?;
    Ok(report)
}

pub fn cmd_eval(cfg: &RunConfig, out: &Path) -> Result<EvalReport> {
    let data = load_dataset(&cfg.data)?;
    let report = if cfg.model == ModelKind::MostPop {
        let pop = MostPop::fit(&data.split.train, data.vocab_size);
        labelled(evaluate_last_item(&pop, &data.split.test)?, "mostpop", cfg.seed, 0)
    } else {
        let net = load_checked(cfg, out, data.vocab_size, data.k)?;
        let label = net.kind().name();
        labelled(evaluate_last_item(&net, &data.split.test)?, label, cfg.seed, 0)
    };
    prepare_out(out, cfg)?;
    save_report(&report, &out.join(REPORT_FILE))?;
    Ok(report)
}

fn load_checked(cfg: &RunConfig, out: &Path, vocab_size: usize, k: usize) -> Result<Network<f32>> {
    let path = cfg.checkpoint_path(out);
    if !path.exists() {
        return Err(Error::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, "checkpoint not found"),
        ));
    }
    let net = checkpoint::load(&path)?;
    let c = net.config();
    if c.vocab_size != vocab_size || c.seq_len != k {
        return Err(Error::Config(format!(
            "{} was trained with V={} t={}, data has V={vocab_size} t={k}",
            path.display(),
            c.vocab_size,
            c.seq_len
        )));
    }
    Ok(net)
}

pub fn parse_prefix(text: &str) -> Result<Vec<ItemId>> {
    text.split_whitespace()
        .map(|x| {
            x.parse::<ItemId>()
                .map_err(|e| Error::Config(format!("bad prefix item `{x}`: {e}")))
        })
        .collect()
}

/// Top-N `(item, score)` for one prefix. MostPop needs the training split.
pub fn cmd_infer(cfg: &RunConfig, out: &Path, prefix: &[ItemId]) -> Result<Vec<(ItemId, f64)>> {
    if prefix.is_empty() {
        return Err(Error::EmptyInput("--prefix needs at least one item".into()));
    }
    let model: Box<dyn Recommender> = if cfg.model == ModelKind::MostPop {
        let data = load_dataset(&cfg.data)?;
        Box::new(MostPop::fit(&data.split.train, data.vocab_size))
    } else {
        Box::new(checkpoint::load(&cfg.checkpoint_path(out))?)
    };
    let v = model.vocab_size();
    if let Some(&bad) = prefix.iter().find(|&&x| x == 0 || x as usize > v) {
        return Err(Error::Config(format!("prefix item {bad} is outside 1..={v}")));
    }
    let scores = model.score(&[prefix])?;
    top_n(&scores[0], cfg.topn)
}

/// One row of the ablation matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct AblationRow {
    pub label: String,
    pub reports: Vec<EvalReport>,
}

impl AblationRow {
    pub fn mean(&self) -> [f64; 6] {
        let mut m = [0.0; 6];
        for r in &self.reports {
            for (slot, (_, v)) in m.iter_mut().zip(r.metrics()) {
                *slot += v;
            }
        }
        m.map(|x| x / self.reports.len().max(1) as f64)
    }
}

/// Variant name to (kind, projector).
fn variant(name: &str) -> Result<(ModelKind, bool)> {
    Ok(match name.to_ascii_lowercase().as_str() {
        "grec" => (ModelKind::Grec, true),
        "grecn" => (ModelKind::Grec, false),
        "nextitnet" => (ModelKind::NextItNet, false),
        "nextitnetp" => (ModelKind::NextItNet, true),
        "encoder" | "encoder-only" | "encoder_only" => (ModelKind::EncoderOnly, false),
        other => {
            return Err(Error::Config(format!(
                "unknown ablation variant `{other}` (expected grec, grecn, nextitnet, nextitnetp, encoder)"
            )))
        }
    })
}

/// Every (label, model config) the ablation should train.
pub fn ablation_plan(cfg: &RunConfig, vocab_size: usize, k: usize) -> Result<Vec<(String, ModelConfig)>> {
    let mut plan = Vec::new();
    for &g in &cfg.ablate_gammas {
        let mut m = cfg.model_config(ModelKind::Grec, vocab_size, k);
        m.gamma = g;
        plan.push((format!("grec_gamma={g}"), m));
    }
    for name in &cfg.ablate_variants {
        let (kind, projector) = variant(name)?;
        let mut m = cfg.model_config(kind, vocab_size, k);
        m.projector = projector;
        plan.push((name.to_ascii_lowercase(), m));
    }
    if plan.is_empty() {
        return Err(Error::Config("ablate_gammas and ablate_variants are both empty".into()));
    }
    if cfg.ablate_seeds.is_empty() {
        return Err(Error::Config("ablate_seeds is empty".into()));
    }
    for (_, m) in &plan {
        m.validate()?;
    }
    Ok(plan)
}

pub fn cmd_ablate(cfg: &RunConfig, out: &Path) -> Result<Vec<AblationRow>> {
    let data = load_dataset(&cfg.data)?;
    let plan = ablation_plan(cfg, data.vocab_size, data.k)?;
    prepare_out(out, cfg)?;
    let mut rows = Vec::new();
    let mut runs = format!("config,{}\n", EvalReport::csv_header());
    for (label, model) in plan {
        let mut reports = Vec::new();
        for &seed in &cfg.ablate_seeds {
            let run_cfg = RunConfig { seed, ..cfg.clone() };
            let (_, report) = fit_and_test(&run_cfg, model.clone(), &data, &label, |_| {})?;
            eprintln!("{label} seed {seed}: mrr5 {:.5}", report.mrr5);
            let _ = writeln!(runs, "{label},{}", report.to_csv_row());
            reports.push(report);
        }
        rows.push(AblationRow { label, reports });
    }
    let path = out.join(ABLATE_RUNS_FILE);
    fs::write(&path, runs).map_err(|e| Error::io(&path, e))?;
    let path = out.join(ABLATE_FILE);
    fs::write(&path, format_ablation(&rows)).map_err(|e| Error::io(&path, e))?;
    Ok(rows)
}

pub fn format_ablation(rows: &[AblationRow]) -> String {
    let mut s = String::from("config,n_seeds,mrr5,mrr20,hr5,hr20,ndcg5,ndcg20\n");
    for r in rows {
        let m = r.mean();
        let _ = writeln!(s, "{},{},{}", r.label, r.reports.len(), join(&m));
    }
    s
}

/// Executes one parsed command, printing its primary output to stdout.
pub fn run(cli: Cli) -> Result<()> {
    let (cmd, common) = match &cli.command {
        Command::Prep(c) => ("prep", c),
        Command::Synth(c) => ("synth", c),
        Command::Train(c) => ("train", c),
        Command::Eval(c) => ("eval", c),
        Command::Infer(c) => ("infer", c),
        Command::Ablate(c) => ("ablate", c),
    };
    let cfg = RunConfig::resolve(common)?;
    let out = common.out.as_path();
    match cmd {
        "prep" => println!("{}", cmd_prep(&cfg, out)?),
        "synth" => {
            let s = cmd_synth(&cfg, out)?;
            println!(
                "train_sessions\t{}\nvalid_sessions\t{}\ntest_sessions\t{}",
                s.train.len(),
                s.valid.len(),
                s.test.len()
            );
        }
        "train" => print!("{}", cmd_train(&cfg, out)?.to_kv()),
        "eval" => print!("{}", cmd_eval(&cfg, out)?.to_kv()),
        "infer" => {
            let text = common
                .prefix
                .as_deref()
                .ok_or_else(|| Error::Config("infer requires --prefix".into()))?;
            for (item, score) in cmd_infer(&cfg, out, &parse_prefix(text)?)? {
                println!("{item} {score}");
            }
        }
        _ => print!("{}", format_ablation(&cmd_ablate(&cfg, out)?)),
    }
    Ok(())
}
