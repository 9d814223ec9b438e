//! Statistical behaviour of the synthetic corpus generators.

use std::collections::{BTreeSet, HashMap};

use grec::data::{generate_synthetic, ItemId, Regime, SynthSpec};

#[test]
fn deterministic_chain_is_perfectly_predictable() {
    let spec = SynthSpec {
        vocab_size: 30,
        n_sessions: 200,
        len: 15,
        regime: Regime::Markov,
        successor_prob: 1.0,
        seed: 1,
    };
    let corpus = generate_synthetic(&spec).unwrap();
    // the successor oracle gets every transition right, so HR@1 = 1
    for row in &corpus.rows {
        for w in row.windows(2) {
            assert_eq!(w[1], corpus.successor[w[0] as usize]);
        }
    }
}

#[test]
fn markov_follow_rate_matches_successor_probability() {
    let spec = SynthSpec {
        vocab_size: 50,
        n_sessions: 2000,
        len: 20,
        regime: Regime::Markov,
        successor_prob: 0.8,
        seed: 2,
    };
    let corpus = generate_synthetic(&spec).unwrap();
    let (mut follow, mut total) = (0usize, 0usize);
    for row in &corpus.rows {
        for w in row.windows(2) {
            total += 1;
            follow += usize::from(w[1] == corpus.successor[w[0] as usize]);
        }
    }
    let rate = follow as f64 / total as f64;
    assert!((rate - 0.8).abs() < 0.03, "follow rate {rate}");
}

#[test]
fn baskets_keep_their_multiset_and_vary_order() {
    let spec = SynthSpec {
        vocab_size: 40,
        n_sessions: 1000,
        len: 20,
        regime: Regime::BasketMixed,
        successor_prob: 0.8,
        seed: 3,
    };
    let corpus = generate_synthetic(&spec).unwrap();
    let mut orders: HashMap<ItemId, BTreeSet<Vec<ItemId>>> = HashMap::new();
    for row in &corpus.rows {
        for (i, &item) in row.iter().enumerate() {
            let Some(basket) = corpus.baskets[item as usize] else { continue };
            if i + 3 >= row.len() {
                continue;
            }
            let next = row[i + 1..i + 4].to_vec();
            let mut sorted = next.clone();
            sorted.sort_unstable();
            let mut expected = basket.to_vec();
            expected.sort_unstable();
            assert_eq!(sorted, expected, "trigger {item}");
            orders.entry(item).or_default().insert(next);
        }
    }
    assert!(!orders.is_empty());
    assert!(orders.values().all(|o| o.len() >= 2));
}

#[test]
fn basket_roles_partition_the_items() {
    let spec = SynthSpec {
        vocab_size: 41,
        regime: Regime::BasketMixed,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic(&spec).unwrap();
    let triggers: Vec<usize> = (1..=41).filter(|&i| corpus.baskets[i].is_some()).collect();
    assert_eq!(triggers.len(), 10);
    let mut members: Vec<ItemId> = corpus.baskets.iter().flatten().flatten().copied().collect();
    members.sort_unstable();
    members.dedup();
    assert_eq!(members.len(), 30);
    assert!(members.iter().all(|m| !corpus.is_trigger(*m)));
}

#[test]
fn generation_is_reproducible() {
    let spec = SynthSpec {
        regime: Regime::BasketMixed,
        seed: 9,
        ..SynthSpec::default()
    };
    let a = generate_synthetic(&spec).unwrap();
    let b = generate_synthetic(&spec).unwrap();
    assert_eq!(a.rows, b.rows);
    let c = generate_synthetic(&SynthSpec { seed: 10, ..spec }).unwrap();
    assert_ne!(a.rows, c.rows);
}
