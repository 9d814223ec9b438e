//! Randomised invariants of the data pipeline, gap sampler and ranking.

use std::collections::HashSet;
use std::path::Path;

use proptest::prelude::*;

use grec::autodiff::softmax_rows;
use grec::data::io::{format_sessions, parse_sessions, read_vocabulary, write_vocabulary};
use grec::data::{segment_sessions, split_dataset, valid_len, ItemId, RawEvent, Vocabulary, PAD};
use grec::masking::{gap_count, row_rng, sample_gaps};
use grec::model::{rank_of, top_n};

fn events_strategy() -> impl Strategy<Value = Vec<RawEvent>> {
    prop::collection::vec((0u8..4, 1u8..12, 0i64..1000), 0..120).prop_map(|raw| {
        raw.into_iter()
            .map(|(u, i, ts)| RawEvent {
                user: format!("u{u}"),
                item: format!("i{i}"),
                timestamp: ts,
            })
            .collect()
    })
}

fn padded_row(k: usize) -> impl Strategy<Value = Vec<ItemId>> {
    (1..=k).prop_flat_map(move |len| {
        prop::collection::vec(1u32..50, len).prop_map(move |items| {
            let mut row = vec![PAD; k - items.len()];
            row.extend(items);
            row
        })
    })
}

proptest! {
    #[test]
    fn segmented_rows_have_length_k_and_a_pad_prefix(
        events in events_strategy(),
        k in 2usize..8,
        l_off in 0usize..8,
    ) {
        let l = 1 + l_off % k;
        let vocab = Vocabulary::from_items((1..12).filter(|i| i % 5 != 0).map(|i| format!("i{i}"))).unwrap();
        let rows = segment_sessions(&events, &vocab, k, l);
        let kept = events.iter().filter(|e| vocab.index_of(&e.item).is_some()).count();
        let mut emitted = 0;
        for row in &rows {
            prop_assert_eq!(row.len(), k);
            let n = valid_len(row);
            prop_assert!(n >= l);
            prop_assert!(row[..k - n].iter().all(|&x| x == PAD));
            prop_assert!(row[k - n..].iter().all(|&x| x >= 1 && x as usize <= vocab.len()));
            emitted += n;
        }
        prop_assert!(emitted <= kept);
    }

    #[test]
    fn split_is_a_partition(n in 3usize..200, seed in any::<u64>()) {
        let rows: Vec<Vec<ItemId>> = (0..n as u32).map(|i| vec![i + 1]).collect();
        let split = split_dataset(rows, [0.8, 0.1, 0.1], seed).unwrap();
        prop_assert!(!split.train.is_empty() && !split.valid.is_empty() && !split.test.is_empty());
        let mut all: Vec<u32> = split.train.iter().chain(&split.valid).chain(&split.test).map(|r| r[0]).collect();
        all.sort_unstable();
        prop_assert_eq!(all, (1..=n as u32).collect::<Vec<_>>());
    }

    #[test]
    fn vocabulary_round_trips_through_disk(items in prop::collection::hash_set("[a-z0-9_]{1,6}", 1..40)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("vocab.tsv");
        let vocab = Vocabulary::from_items(items.iter().cloned()).unwrap();
        write_vocabulary(&path, &vocab).unwrap();
        prop_assert_eq!(read_vocabulary(&path).unwrap(), vocab.clone());
        for item in &items {
            let ix = vocab.index_of(item).unwrap();
            prop_assert_eq!(vocab.item_at(ix), Some(item.as_str()));
        }
    }

    #[test]
    fn sessions_round_trip_through_text(rows in prop::collection::vec(padded_row(6), 0..20)) {
        let text = format_sessions(&rows, 6, 49);
        let parsed = parse_sessions(&text, Path::new("mem")).unwrap();
        prop_assert_eq!(parsed.rows, rows);
        prop_assert_eq!((parsed.k, parsed.vocab_size), (6, 49));
    }

    #[test]
    fn gap_plans_respect_the_row(
        row in padded_row(12).prop_filter("needs two items", |r| valid_len(r) >= 2),
        gamma in 0.01f64..=1.0,
        seed in any::<u64>(),
    ) {
        let mask = 99;
        let plan = sample_gaps(&row, gamma, mask, &mut row_rng(seed, 0, 0)).unwrap();
        let n = valid_len(&row);
        let first = row.len() - n;
        prop_assert_eq!(plan.m(), gap_count(n, gamma));
        prop_assert!(plan.m() >= 1 && plan.m() < n);
        prop_assert!(plan.positions.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(plan.positions.iter().all(|&p| p > first && p < row.len()));
        let gaps: HashSet<usize> = plan.positions.iter().copied().collect();
        for (p, (&orig, &g)) in row.iter().zip(&plan.gapped).enumerate() {
            if gaps.contains(&p) {
                prop_assert_eq!(g, mask);
            } else {
                prop_assert_eq!(g, orig);
            }
        }
        let targets: Vec<ItemId> = plan.positions.iter().map(|&p| row[p]).collect();
        prop_assert_eq!(plan.targets, targets);
    }

    #[test]
    fn softmax_rows_are_distributions(logits in prop::collection::vec(-30.0f64..30.0, 1..60), n in 1usize..6) {
        let rows = logits.len() / n;
        prop_assume!(rows > 0);
        let p = softmax_rows(&logits[..rows * n], n);
        for r in p.chunks(n) {
            prop_assert!(r.iter().all(|&x| (0.0..=1.0).contains(&x)));
            prop_assert!((r.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn top_n_agrees_with_rank_of(scores in prop::collection::vec(-3i32..3, 1..30), n_raw in 1usize..30) {
        // small integer scores force plenty of ties
        let scores: Vec<f64> = scores.into_iter().map(f64::from).collect();
        let n = 1 + (n_raw - 1) % scores.len();
        let top = top_n(&scores, n).unwrap();
        prop_assert_eq!(top.len(), n);
        for (pos, &(item, s)) in top.iter().enumerate() {
            prop_assert_eq!(rank_of(&scores, item), pos + 1);
            prop_assert_eq!(s, scores[item as usize - 1]);
        }
        let mut ranks: Vec<usize> = (1..=scores.len() as ItemId).map(|i| rank_of(&scores, i)).collect();
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (1..=scores.len()).collect::<Vec<_>>());
    }
}
