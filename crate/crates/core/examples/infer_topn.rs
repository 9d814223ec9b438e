//! Trains a quick NextItNet and GRec on a deterministic chain and prints
//! their top-N recommendations for a few prefixes.
//!
//! ```text
//! cargo run --release --example infer_topn -- [n]
//! ```

use grec::data::{generate_synthetic, split_dataset, Regime, SynthSpec};
use grec::model::{ModelConfig, ModelKind, Recommender};
use grec::train::{train, TrainConfig};

fn main() -> grec::Result<()> {
    let n = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(3);
    let spec = SynthSpec {
        vocab_size: 30,
        n_sessions: 600,
        len: 10,
        regime: Regime::Markov,
        successor_prob: 1.0,
        seed: 5,
    };
    let corpus = generate_synthetic(&spec)?;
    let split = split_dataset(corpus.rows.clone(), [0.8, 0.1, 0.1], 0)?;
    let cfg = TrainConfig {
        learning_rate: 3e-3,
        batch_size: 32,
        max_epochs: 8,
        ..TrainConfig::default()
    };
    for kind in [ModelKind::NextItNet, ModelKind::Grec] {
        let model = ModelConfig::new(kind, spec.vocab_size, spec.len).with_width(32).with_dilations(&[1, 2, 4, 8]);
        let net = train(model, &cfg, &split.train, &split.valid)?.best;
        println!("{kind}");
        for prefix in corpus.rows.iter().take(3).map(|r| &r[..4]) {
            let last = *prefix.last().unwrap();
            let top = net.recommend(prefix, n)?;
            println!("  {prefix:?} -> {top:.3?}  (planted successor {})", corpus.successor[last as usize]);
        }
    }
    Ok(())
}
