use std::collections::HashMap;

use crate::data::{ItemId, Vocabulary, PAD};
use crate::error::{Error, Result};

/// One `(user, item, timestamp)` interaction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RawEvent {
    pub user: String,
    pub item: String,
    pub timestamp: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrepConfig {
    pub min_item_count: usize,
    /// Session length; every row has exactly this many positions.
    pub k: usize,
    /// Shortest trailing chunk that is kept (padded) rather than dropped.
    pub l: usize,
    pub fractions: [f64; 3],
    pub seed: u64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        PrepConfig {
            min_item_count: 20,
            k: 30,
            l: 10,
            fractions: [0.8, 0.1, 0.1],
            seed: 0,
        }
    }
}

impl PrepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.l == 0 || self.l > self.k {
            return Err(Error::Config(format!(
                "need 0 < l <= k, got l={} k={}",
                self.l, self.k
            )));
        }
        let sum: f64 = self.fractions.iter().sum();
        if (sum - 1.0).abs() > 1e-9 || self.fractions.iter().any(|&f| f < 0.0) {
            return Err(Error::Config(format!(
                "split fractions must be non-negative and sum to 1, got {:?}",
                self.fractions
            )));
        }
        Ok(())
    }
}

/// Number of non-padding positions. Padding is always a prefix.
pub fn valid_len(row: &[ItemId]) -> usize {
    row.len() - row.iter().take_while(|&&x| x == PAD).count()
}

pub fn valid_region(row: &[ItemId]) -> &[ItemId] {
    &row[row.len() - valid_len(row)..]
}

/// Chops every user's chronological item stream into rows of length `k`.
///
/// Only the final chunk can be short: it is left-padded to `k` when it has
/// at least `l` items and dropped otherwise. Users are emitted in order of
/// first appearance; items outside the vocabulary are skipped.
pub fn segment_sessions(
    events: &[RawEvent],
    vocab: &Vocabulary,
    k: usize,
    l: usize,
) -> Vec<Vec<ItemId>> {
    let mut users: Vec<&str> = Vec::new();
    let mut streams: HashMap<&str, Vec<(i64, ItemId)>> = HashMap::new();
    for e in events {
        let Some(ix) = vocab.index_of(&e.item) else {
            continue;
        };
        streams
            .entry(e.user.as_str())
            .or_insert_with(|| {
                users.push(e.user.as_str());
                Vec::new()
            })
            .push((e.timestamp, ix));
    }
    let mut rows = Vec::new();
    for user in users {
        let stream = streams.get_mut(user).expect("user was registered");
        stream.sort_by_key(|&(ts, _)| ts);
        for chunk in stream.chunks(k) {
            if chunk.len() == k {
                rows.push(chunk.iter().map(|&(_, i)| i).collect());
            } else if chunk.len() >= l {
                let mut row = vec![PAD; k - chunk.len()];
                row.extend(chunk.iter().map(|&(_, i)| i));
                rows.push(row);
            }
        }
    }
    rows
}
