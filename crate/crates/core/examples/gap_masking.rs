//! Shows how the gap sampler blanks out parts of a session for different
//! gap fractions, and that every epoch draws a fresh pattern.
//!
//! ```text
//! cargo run --release --example gap_masking
//! ```

use grec::masking::{gap_count, row_rng, sample_gaps};

fn main() -> grec::Result<()> {
    let row: Vec<u32> = vec![0, 0, 11, 12, 13, 14, 15, 16, 17, 18];
    let mask = 99;
    println!("row        {row:?}");
    for gamma in [0.1, 0.3, 0.5, 0.7, 1.0] {
        let plan = sample_gaps(&row, gamma, mask, &mut row_rng(0, 0, 0))?;
        println!("gamma {gamma:<4} {:?}  m={} targets {:?}", plan.gapped, gap_count(8, gamma), plan.targets);
    }
    println!("same row, gamma 0.5, three epochs:");
    for epoch in 0..3 {
        let plan = sample_gaps(&row, 0.5, mask, &mut row_rng(0, epoch, 0))?;
        println!("  epoch {epoch}  gaps at {:?}", plan.positions);
    }
    Ok(())
}
