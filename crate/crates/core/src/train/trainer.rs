use crate::autodiff::{AdamConfig, AdamState, Graph, Scalar};
use crate::data::{batch_iter, valid_len, ItemId, SessionBatch};
use crate::error::{Error, Result};
use crate::masking::{row_rng, sample_gaps, MaskPlan};
use crate::model::{nextitnet_plus_expand, ModelConfig, ModelKind, Network};
use crate::train::{evaluate_last_item, LogRow};

/// Deterministic child seed for one subsystem of a run.
pub fn sub_seed(root: u64, stream: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = root ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const INIT_STREAM: u64 = 1;
const SHUFFLE_STREAM: u64 = 2;
const MASK_STREAM: u64 = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation MRR@5 improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 128,
            max_epochs: 10,
            patience: 2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(format!(
                "learning_rate must be finite and non-negative, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

/// A network together with its optimizer state.
pub struct Trainer<T> {
    pub network: Network<T>,
    adam: AdamState<T>,
    steps: usize,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(network: Network<T>, learning_rate: f64) -> Self {
        let adam = AdamState::new(
            AdamConfig {
                learning_rate,
                ..AdamConfig::default()
            },
            network.params().tensors(),
        );
        Trainer {
            network,
            adam,
            steps: 0,
        }
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Gap plans for a batch, one independent stream per row.
    pub fn plans_for(&self, batch: &SessionBatch, seed: u64, epoch: u64, first_row: u64) -> Result<Vec<MaskPlan>> {
        if !self.network.kind().uses_gaps() {
            return Ok(Vec::new());
        }
        let cfg = self.network.config();
        batch
            .rows()
            .enumerate()
            .map(|(i, row)| {
                let mut rng = row_rng(seed, epoch, first_row + i as u64);
                sample_gaps(row, cfg.gamma, cfg.mask_id(), &mut rng)
            })
            .collect()
    }

    /// One forward/backward pass and Adam update. Returns the batch loss.
    pub fn step(&mut self, batch: &SessionBatch, plans: &[MaskPlan]) -> Result<f64> {
        let mut g = Graph::new();
        let p = self.network.bind(&mut g, true);
        let out = self.network.loss(&mut g, &p, batch, plans)?;
        let loss = g.data(out.loss)[0].as_f64();
        if !loss.is_finite() {
            return Err(Error::NonFiniteLoss {
                epoch: 0,
                step: self.steps,
                loss,
            });
        }
        g.backward(out.loss)?;
        let grads: Vec<Option<&[T]>> = p.iter().map(|&v| g.grad(v)).collect();
        self.adam
            .step(self.network.params_mut().tensors_mut().iter_mut(), &grads)?;
        self.steps += 1;
        Ok(loss)
    }
}

pub struct TrainOutcome {
    /// Parameters from the epoch with the best validation MRR@5.
    pub best: Network<f32>,
    pub best_epoch: usize,
    pub best_val_mrr5: f64,
    pub log: Vec<LogRow>,
    pub epochs_run: usize,
}

pub fn train(model: ModelConfig, cfg: &TrainConfig, train_rows: &[Vec<ItemId>], valid_rows: &[Vec<ItemId>]) -> Result<TrainOutcome> {
    train_with(model, cfg, train_rows, valid_rows, |_| {})
}

/// Epoch loop with early stopping on validation MRR@5. `on_epoch` sees every
/// log row as it is produced.
pub fn train_with(
    model: ModelConfig,
    cfg: &TrainConfig,
    train_rows: &[Vec<ItemId>],
    valid_rows: &[Vec<ItemId>],
    mut on_epoch: impl FnMut(&LogRow),
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if model.kind == ModelKind::MostPop {
        return Err(Error::Config("mostpop is fitted, not trained".into()));
    }
    let mut rows: Vec<Vec<ItemId>> = train_rows.iter().filter(|r| valid_len(r) >= 2).cloned().collect();
    if model.kind == ModelKind::NextItNetPlus {
        rows = nextitnet_plus_expand(&rows);
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput("no training row has two or more items".into()));
    }
    if valid_rows.is_empty() {
        return Err(Error::EmptyInput("validation split is empty".into()));
    }
    let net = Network::<f32>::new(model, sub_seed(cfg.seed, INIT_STREAM))?;
    let mut trainer = Trainer::new(net, cfg.learning_rate);
    let mask_seed = sub_seed(cfg.seed, MASK_STREAM);

    let mut log = Vec::new();
    let mut best: Option<(Network<f32>, usize, f64)> = None;
    let mut stale = 0;
    let mut epochs_run = 0;
    for epoch in 1..=cfg.max_epochs {
        let shuffle = sub_seed(sub_seed(cfg.seed, SHUFFLE_STREAM), epoch as u64);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        let mut row_cursor = 0u64;
        for batch in batch_iter(&rows, cfg.batch_size, shuffle) {
            let plans = trainer.plans_for(&batch, mask_seed, epoch as u64, row_cursor)?;
            row_cursor += batch.len() as u64;
            let loss = trainer.step(&batch, &plans).map_err(|e| match e {
                Error::NonFiniteLoss { step, loss, .. } => Error::NonFiniteLoss { epoch, step, loss },
                other => other,
            })?;
            loss_sum += loss * batch.len() as f64;
            seen += batch.len();
        }
        epochs_run = epoch;
        let val = evaluate_last_item(&trainer.network, valid_rows)?;
        let row = LogRow {
            epoch,
            step: trainer.steps(),
            train_loss: loss_sum / seen as f64,
            val_mrr5: val.mrr5,
        };
        on_epoch(&row);
        log.push(row);
        match &best {
            Some((_, _, b)) if val.mrr5 <= *b => {
                stale += 1;
                if stale >= cfg.patience {
                    break;
                }
            }
            _ => {
                best = Some((trainer.network.clone(), epoch, val.mrr5));
                stale = 0;
            }
        }
    }
    let (best, best_epoch, best_val_mrr5) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        best,
        best_epoch,
        best_val_mrr5,
        log,
        epochs_run,
    })
}
