//! Trains GRec on a synthetic basket-mixed corpus and reports test metrics
//! next to the MostPop baseline.
//!
//! ```text
//! cargo run --release --example train_grec -- [sessions] [epochs]
//! ```

use std::time::Instant;

use grec::data::{generate_synthetic, split_dataset, Regime, SynthSpec};
use grec::model::{ModelConfig, ModelKind, MostPop};
use grec::train::{evaluate_last_item, train_with, TrainConfig};

fn main() -> grec::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_sessions = args.next().and_then(|s| s.parse().ok()).unwrap_or(4000);
    let max_epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(5);

    let spec = SynthSpec {
        vocab_size: 100,
        n_sessions,
        len: 20,
        regime: Regime::BasketMixed,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic(&spec)?;
    let split = split_dataset(corpus.rows, [0.8, 0.1, 0.1], 7)?;

    let pop = MostPop::fit(&split.train, spec.vocab_size);
    println!("mostpop  test mrr5 {:.4}", evaluate_last_item(&pop, &split.test)?.mrr5);

    let model = ModelConfig::new(ModelKind::Grec, spec.vocab_size, spec.len);
    let cfg = TrainConfig {
        max_epochs,
        ..TrainConfig::default()
    };
    let start = Instant::now();
    let outcome = train_with(model, &cfg, &split.train, &split.valid, |row| {
        println!(
            "epoch {:>2}  step {:>5}  loss {:.4}  val mrr5 {:.4}  ({:.1}s)",
            row.epoch,
            row.step,
            row.train_loss,
            row.val_mrr5,
            start.elapsed().as_secs_f64()
        )
    })?;
    let report = evaluate_last_item(&outcome.best, &split.test)?;
    println!("grec     test mrr5 {:.4}  (best epoch {})", report.mrr5, outcome.best_epoch);
    Ok(())
}
