use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{valid_len, ItemId};

/// Row-major `[B, t]` block of item indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionBatch {
    pub ids: Vec<ItemId>,
    pub valid_len: Vec<usize>,
    pub t: usize,
}

impl SessionBatch {
    /// Stacks equal-length rows.
    ///
    /// # Panics
    /// If rows differ in length or `rows` is empty.
    pub fn from_rows<R: AsRef<[ItemId]>>(rows: &[R]) -> Self {
        let t = rows.first().expect("batch needs at least one row").as_ref().len();
        let mut ids = Vec::with_capacity(rows.len() * t);
        let mut lens = Vec::with_capacity(rows.len());
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), t, "ragged batch");
            ids.extend_from_slice(r);
            lens.push(valid_len(r));
        }
        SessionBatch {
            ids,
            valid_len: lens,
            t,
        }
    }

    pub fn len(&self) -> usize {
        self.valid_len.len()
    }

    pub fn is_empty(&self) -> bool {
        self.valid_len.is_empty()
    }

    pub fn row(&self, b: usize) -> &[ItemId] {
        &self.ids[b * self.t..(b + 1) * self.t]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[ItemId]> {
        self.ids.chunks_exact(self.t)
    }

    /// Index of the first non-padding position of row `b`.
    pub fn first_valid(&self, b: usize) -> usize {
        self.t - self.valid_len[b]
    }
}

/// Batches over a seeded shuffle of `rows`; the last batch may be short.
pub struct BatchIter<'a> {
    rows: &'a [Vec<ItemId>],
    order: Vec<usize>,
    batch_size: usize,
    cursor: usize,
}

pub fn batch_iter(rows: &[Vec<ItemId>], batch_size: usize, seed: u64) -> BatchIter<'_> {
    assert!(batch_size >= 1, "batch size must be at least 1");
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    BatchIter {
        rows,
        order,
        batch_size,
        cursor: 0,
    }
}

impl BatchIter<'_> {
    /// Original row indices in iteration order.
    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

impl Iterator for BatchIter<'_> {
    type Item = SessionBatch;

    fn next(&mut self) -> Option<SessionBatch> {
        if self.cursor >= self.order.len() {
            return None;
        }
        let end = (self.cursor + self.batch_size).min(self.order.len());
        let picked: Vec<&[ItemId]> = self.order[self.cursor..end]
            .iter()
            .map(|&i| self.rows[i].as_slice())
            .collect();
        self.cursor = end;
        Some(SessionBatch::from_rows(&picked))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(n: usize) -> Vec<Vec<ItemId>> {
        (0..n as u32).map(|i| vec![0, i + 1]).collect()
    }

    #[test]
    fn sizes_with_partial_tail() {
        let r = rows(10);
        let sizes: Vec<usize> = batch_iter(&r, 4, 0).map(|b| b.len()).collect();
        assert_eq!(sizes, vec![4, 4, 2]);
    }

    #[test]
    fn seeded_order_is_stable() {
        let r = rows(20);
        let a: Vec<_> = batch_iter(&r, 3, 9).collect();
        let b: Vec<_> = batch_iter(&r, 3, 9).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_batch_is_single() {
        let r = rows(5);
        let all: Vec<_> = batch_iter(&r, 64, 1).collect();
        assert_eq!(all.len(), 1);
        assert_eq!(all[0].len(), 5);
        assert_eq!(all[0].valid_len, vec![1; 5]);
        assert_eq!(all[0].first_valid(0), 1);
    }
}
