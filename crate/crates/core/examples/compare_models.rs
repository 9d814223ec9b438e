//! Paired-seed comparison of every model kind on one synthetic corpus.
//!
//! ```text
//! cargo run --release --example compare_models -- [sessions] [epochs] [seeds] [regime] [kinds]
//! ```
//!
//! `kinds` is a comma-separated subset such as `grec,nextitnet`.

use grec::data::{generate_synthetic, split_dataset, Regime, SynthSpec};
use grec::model::{ModelConfig, ModelKind, MostPop};
use grec::train::{evaluate_last_item, train, TrainConfig};

fn main() -> grec::Result<()> {
    let mut args = std::env::args().skip(1);
    let n_sessions = args.next().and_then(|s| s.parse().ok()).unwrap_or(4000);
    let max_epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(4);
    let seeds: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let regime: Regime = match args.next() {
        Some(r) => r.parse()?,
        None => Regime::BasketMixed,
    };

    let kinds: Vec<ModelKind> = match args.next() {
        Some(list) => list.split(',').map(str::parse).collect::<grec::Result<_>>()?,
        None => vec![
            ModelKind::Grec,
            ModelKind::NextItNet,
            ModelKind::NextItNetPlus,
            ModelKind::TNextItNet,
            ModelKind::EncoderOnly,
        ],
    };
    println!("seed,model,mrr5,mrr20,hr5,hr20,ndcg5,ndcg20,best_epoch");
    for seed in 0..seeds {
        let spec = SynthSpec {
            vocab_size: 100,
            n_sessions,
            len: 20,
            regime,
            seed,
            ..SynthSpec::default()
        };
        let split = split_dataset(generate_synthetic(&spec)?.rows, [0.8, 0.1, 0.1], seed)?;
        let pop = evaluate_last_item(&MostPop::fit(&split.train, spec.vocab_size), &split.test)?;
        print_row(seed, "mostpop", &pop.metrics(), 0);
        for &kind in &kinds {
            let cfg = TrainConfig {
                max_epochs,
                seed,
                ..TrainConfig::default()
            };
            let out = train(ModelConfig::new(kind, spec.vocab_size, spec.len), &cfg, &split.train, &split.valid)?;
            let report = evaluate_last_item(&out.best, &split.test)?;
            print_row(seed, kind.name(), &report.metrics(), out.best_epoch);
        }
    }
    Ok(())
}

fn print_row(seed: u64, name: &str, metrics: &[(&str, f64); 6], epoch: usize) {
    let values: Vec<String> = metrics.iter().map(|(_, v)| format!("{v:.4}")).collect();
    println!("{seed},{name},{},{epoch}", values.join(","));
}
