use crate::data::{ItemId, PAD};
use crate::error::Result;
use crate::model::Recommender;

/// Ranks items by how often they occur in the training rows, ignoring the
/// query.
#[derive(Clone, Debug, PartialEq)]
pub struct MostPop {
    counts: Vec<u64>,
}

impl MostPop {
    pub fn fit(rows: &[Vec<ItemId>], vocab_size: usize) -> Self {
        let mut counts = vec![0u64; vocab_size];
        for &id in rows.iter().flatten() {
            if id != PAD && (id as usize) <= vocab_size {
                counts[id as usize - 1] += 1;
            }
        }
        MostPop { counts }
    }

    pub fn from_counts(counts: Vec<u64>) -> Self {
        MostPop { counts }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }
}

impl Recommender for MostPop {
    fn vocab_size(&self) -> usize {
        self.counts.len()
    }

    fn score(&self, prefixes: &[&[ItemId]]) -> Result<Vec<Vec<f64>>> {
        let row: Vec<f64> = self.counts.iter().map(|&c| c as f64).collect();
        Ok(vec![row; prefixes.len()])
    }
}
