//! Trains GRec at several gap fractions on the same corpus and seed and
//! prints the test metrics side by side.
//!
//! ```text
//! cargo run --release --example gamma_sweep -- [sessions] [epochs] [gammas comma list]
//! ```

use grec::data::{generate_synthetic, split_dataset, Regime, SynthSpec};
use grec::model::{ModelConfig, ModelKind};
use grec::train::{evaluate_last_item, train, TrainConfig};

fn main() -> grec::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_sessions = args.next().and_then(|s| s.parse().ok()).unwrap_or(3000);
    let max_epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let gammas: Vec<f64> = args
        .next()
        .map(|s| s.split(',').filter_map(|g| g.parse().ok()).collect())
        .unwrap_or_else(|| vec![0.1, 0.3, 0.5, 0.7, 1.0]);

    let spec = SynthSpec {
        n_sessions,
        regime: Regime::BasketMixed,
        ..SynthSpec::default()
    };
    let split = split_dataset(generate_synthetic(&spec)?.rows, [0.8, 0.1, 0.1], 1)?;
    let cfg = TrainConfig {
        max_epochs,
        ..TrainConfig::default()
    };
    println!("gamma,mrr5,hr5,ndcg5,best_epoch");
    for gamma in gammas {
        let mut model = ModelConfig::new(ModelKind::Grec, spec.vocab_size, spec.len).with_width(32);
        model.gamma = gamma;
        let out = train(model, &cfg, &split.train, &split.valid)?;
        let r = evaluate_last_item(&out.best, &split.test)?;
        println!("{gamma},{:.4},{:.4},{:.4},{}", r.mrr5, r.hr5, r.ndcg5, out.best_epoch);
    }
    Ok(())
}
