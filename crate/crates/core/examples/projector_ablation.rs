//! Runs the projector ablation through the library's ablation driver: GRec
//! and NextItNet, each with and without the projector block, on one
//! synthetic corpus.
//!
//! ```text
//! cargo run --release --example projector_ablation -- [sessions] [epochs]
//! ```

use grec::cli::{cmd_ablate, cmd_synth, format_ablation, RunConfig};

fn main() -> grec::Result<()> {
    let mut args = std::env::args().skip(1);
    let synth_sessions = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let max_epochs = args.next().and_then(|s| s.parse().ok()).unwrap_or(3);
    let dir = std::env::temp_dir().join(format!("grec-ablate-{}", std::process::id()));
    let cfg = RunConfig {
        data: dir.join("data"),
        synth_sessions,
        max_epochs,
        d: 32,
        ablate_gammas: Vec::new(),
        ablate_variants: ["grec", "grecn", "nextitnet", "nextitnetp"].map(String::from).to_vec(),
        ablate_seeds: vec![0],
        ..RunConfig::default()
    };
    cmd_synth(&cfg, &cfg.data)?;
    let rows = cmd_ablate(&cfg, &dir.join("ablate"))?;
    print!("{}", format_ablation(&rows));
    std::fs::remove_dir_all(&dir).map_err(|e| grec::Error::io(&dir, e))?;
    Ok(())
}
