//! Turns a tab-separated `user item timestamp` log into fixed-length session
//! rows, a vocabulary and a train/validation/test split.
//!
//! ```text
//! cargo run --release --example prepare_sessions -- events.tsv out_dir [min_count] [k] [l]
//! ```
//!
//! Without arguments a small built-in log is used and nothing is written.

use std::path::Path;

use grec::data::io::{parse_events, read_events, write_sessions, write_vocabulary};
use grec::data::{build_vocabulary, segment_sessions, split_dataset, valid_len};

const DEMO: &str = "alice\tbread\t1\nalice\tmilk\t2\nalice\teggs\t3\nalice\tbread\t9\n\
bob\tmilk\t4\nbob\tbread\t5\nbob\tjam\t6\nbob\teggs\t7\ncarol\teggs\t1\ncarol\tmilk\t3\ncarol\tbread\t2\n";

fn main() -> grec::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let num = |i: usize, d: usize| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(d);
    let events = match args.first() {
        Some(path) => read_events(Path::new(path))?,
        None => parse_events(DEMO, Path::new("demo"))?,
    };
    let (min_count, k, l) = (num(2, 2), num(3, 4), num(4, 2));

    let vocab = build_vocabulary(&events, min_count)?;
    let rows = segment_sessions(&events, &vocab, k, l);
    println!("{} events, {} items kept, {} rows of length {k}", events.len(), vocab.len(), rows.len());
    for row in rows.iter().take(5) {
        let names: Vec<&str> = row.iter().map(|&i| vocab.item_at(i).unwrap_or("<pad>")).collect();
        println!("  {row:?}  {}", names.join(" "));
    }
    let interactions: usize = rows.iter().map(|r| valid_len(r)).sum();
    println!("{interactions} interactions after filtering");

    let split = split_dataset(rows, [0.8, 0.1, 0.1], 0)?;
    println!("train {}  valid {}  test {}", split.train.len(), split.valid.len(), split.test.len());
    if let Some(out) = args.get(1) {
        let out = Path::new(out);
        std::fs::create_dir_all(out).map_err(|e| grec::Error::io(out, e))?;
        write_sessions(&out.join("train.sessions"), &split.train, k, vocab.len())?;
        write_sessions(&out.join("valid.sessions"), &split.valid, k, vocab.len())?;
        write_sessions(&out.join("test.sessions"), &split.test, k, vocab.len())?;
        write_vocabulary(&out.join("vocab.tsv"), &vocab)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
