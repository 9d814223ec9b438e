use std::cmp::Ordering;

use crate::autodiff::Scalar;
use crate::data::ItemId;
use crate::error::{Error, Result};
use crate::model::Network;

/// Anything that can rank the `V` items for a query prefix.
pub trait Recommender {
    fn vocab_size(&self) -> usize;

    /// Item scores per query: entry `i` scores item `i + 1`. Padding and the
    /// gap symbol are never scored.
    fn score(&self, prefixes: &[&[ItemId]]) -> Result<Vec<Vec<f64>>>;

    fn recommend(&self, prefix: &[ItemId], n: usize) -> Result<Vec<(ItemId, f64)>> {
        let scores = self.score(&[prefix])?;
        top_n(&scores[0], n)
    }
}

impl<T: Scalar> Recommender for Network<T> {
    fn vocab_size(&self) -> usize {
        self.config().vocab_size
    }

    fn score(&self, prefixes: &[&[ItemId]]) -> Result<Vec<Vec<f64>>> {
        Ok(self
            .next_item_logits(prefixes)?
            .into_iter()
            .map(|row| row[1..].iter().map(|x| x.as_f64()).collect())
            .collect())
    }
}

fn order(a: (usize, f64), b: (usize, f64)) -> Ordering {
    b.1.partial_cmp(&a.1)
        .unwrap_or(Ordering::Equal)
        .then(a.0.cmp(&b.0))
}

/// The `n` best items, highest score first; ties go to the lower index.
pub fn top_n(scores: &[f64], n: usize) -> Result<Vec<(ItemId, f64)>> {
    if n == 0 {
        return Err(Error::Config("top-n needs n >= 1".into()));
    }
    if n > scores.len() {
        return Err(Error::TopNTooLarge {
            n,
            items: scores.len(),
        });
    }
    let mut ranked: Vec<(usize, f64)> = scores.iter().copied().enumerate().collect();
    ranked.sort_by(|&a, &b| order(a, b));
    Ok(ranked
        .into_iter()
        .take(n)
        .map(|(i, s)| (i as ItemId + 1, s))
        .collect())
}

/// 1-based rank of `truth` in the full ranking induced by `scores`, with the
/// same tie-break as [`top_n`].
pub fn rank_of(scores: &[f64], truth: ItemId) -> usize {
    let ti = truth as usize - 1;
    let s = scores[ti];
    1 + scores
        .iter()
        .enumerate()
        .filter(|&(i, &x)| x > s || (x == s && i < ti))
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argsort_top_two() {
        let top = top_n(&[0.2, 0.5, 0.3], 2).unwrap();
        assert_eq!(top.iter().map(|x| x.0).collect::<Vec<_>>(), vec![2, 3]);
    }

    #[test]
    fn ties_favor_lower_index() {
        let top = top_n(&[0.1, 0.4, 0.4], 3).unwrap();
        assert_eq!(top.iter().map(|x| x.0).collect::<Vec<_>>(), vec![2, 3, 1]);
        assert_eq!(rank_of(&[0.1, 0.4, 0.4], 2), 1);
        assert_eq!(rank_of(&[0.1, 0.4, 0.4], 3), 2);
        assert_eq!(rank_of(&[0.1, 0.4, 0.4], 1), 3);
    }

    #[test]
    fn rejects_oversized_n() {
        assert!(matches!(
            top_n(&[0.0; 3], 4),
            Err(Error::TopNTooLarge { n: 4, items: 3 })
        ));
        assert!(top_n(&[0.0; 3], 0).is_err());
    }
}
