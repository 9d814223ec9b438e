//! Generates the two synthetic regimes and prints how predictable they are
//! for an oracle that knows the planted structure.
//!
//! ```text
//! cargo run --release --example synthetic_corpus -- [markov|basket-mixed] [sessions]
//! ```

use grec::data::{generate_synthetic, Regime, SynthSpec};

fn main() -> grec::Result<()> {
    let mut args = std::env::args().skip(1);
    let regime: Regime = args.next().as_deref().unwrap_or("basket-mixed").parse()?;
    let n_sessions = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let spec = SynthSpec {
        n_sessions,
        regime,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic(&spec)?;
    println!("{regime}: {} sessions of {} items over V={}", corpus.rows.len(), spec.len, spec.vocab_size);
    for row in corpus.rows.iter().take(3) {
        println!("  {row:?}");
    }

    let (mut follow, mut total) = (0usize, 0usize);
    for row in &corpus.rows {
        for w in row.windows(2) {
            total += 1;
            follow += usize::from(w[1] == corpus.successor[w[0] as usize]);
        }
    }
    println!("planted successor followed {:.3} of the time", follow as f64 / total as f64);
    let triggers = (1..=spec.vocab_size as u32).filter(|&i| corpus.is_trigger(i)).count();
    println!("{triggers} basket triggers");
    Ok(())
}
