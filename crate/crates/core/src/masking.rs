//! Dynamic gap sampling for the gap-filling objective.
//!
//! Every call draws a fresh set of gap positions, so the same session is
//! gapped differently each time it is batched. The first valid position is
//! never gapped: the decoder needs at least one observed item before it can
//! predict anything.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{valid_len, ItemId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct MaskPlan {
    /// Gapped positions as 0-based indices into the row, ascending.
    pub positions: Vec<usize>,
    /// Original ids at `positions`, i.e. the prediction targets.
    pub targets: Vec<ItemId>,
    /// The row with every gapped position replaced by `mask_id`.
    pub gapped: Vec<ItemId>,
    pub mask_id: ItemId,
    pub gamma: f64,
}

impl MaskPlan {
    pub fn m(&self) -> usize {
        self.positions.len()
    }
}

/// Number of gaps for a row with `valid_len` items at fraction `gamma`.
pub fn gap_count(valid_len: usize, gamma: f64) -> usize {
    let slots = valid_len - 1;
    ((gamma * slots as f64).round() as usize).clamp(1, slots)
}

/// Draws `m = clamp(round(gamma * (valid_len - 1)), 1, valid_len - 1)` gap
/// positions uniformly without replacement among the valid positions after
/// the first one.
pub fn sample_gaps<R: Rng + ?Sized>(
    row: &[ItemId],
    gamma: f64,
    mask_id: ItemId,
    rng: &mut R,
) -> Result<MaskPlan> {
    let len = valid_len(row);
    if len < 2 {
        return Err(Error::TooShort(len));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::Config(format!("gap fraction must be in (0, 1], got {gamma}")));
    }
    let m = gap_count(len, gamma);
    // candidates are row.len()-len+1 ..= row.len()-1
    let first_candidate = row.len() - len + 1;
    let mut positions: Vec<usize> = index::sample(rng, len - 1, m)
        .into_iter()
        .map(|i| first_candidate + i)
        .collect();
    positions.sort_unstable();
    let mut plan = MaskPlan {
        targets: positions.iter().map(|&p| row[p]).collect(),
        positions,
        gapped: Vec::new(),
        mask_id,
        gamma,
    };
    plan.gapped = apply_gaps(&plan, row);
    Ok(plan)
}

/// Replaces the planned positions of `row` with the gap symbol.
pub fn apply_gaps(plan: &MaskPlan, row: &[ItemId]) -> Vec<ItemId> {
    let mut out = row.to_vec();
    for &p in &plan.positions {
        out[p] = plan.mask_id;
    }
    out
}

/// Independent random stream for one row of one epoch.
pub fn row_rng(seed: u64, epoch: u64, row: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ row);
    rng
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_items_five_eighths() {
        let row: Vec<ItemId> = (1..=9).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let plan = sample_gaps(&row, 5.0 / 8.0, 99, &mut rng).unwrap();
        assert_eq!(plan.m(), 5);
        assert!(!plan.positions.contains(&0));
        for (i, &x) in plan.gapped.iter().enumerate() {
            if plan.positions.contains(&i) {
                assert_eq!(x, 99);
            } else {
                assert_eq!(x, row[i]);
            }
        }
    }

    #[test]
    fn worked_gap_pattern() {
        // gaps at 1-based positions {2,4,5,6,9}
        let row: Vec<ItemId> = (1..=9).collect();
        let plan = MaskPlan {
            positions: vec![1, 3, 4, 5, 8],
            targets: vec![2, 4, 5, 6, 9],
            gapped: vec![],
            mask_id: 10,
            gamma: 5.0 / 8.0,
        };
        assert_eq!(apply_gaps(&plan, &row), vec![1, 10, 3, 10, 10, 10, 7, 8, 10]);
    }

    #[test]
    fn gamma_extremes() {
        assert_eq!(gap_count(9, 1e-9), 1);
        assert_eq!(gap_count(9, 1.0), 8);
        assert_eq!(gap_count(30, 0.5), 15);
        let row: Vec<ItemId> = vec![0, 0, 5, 6, 7, 8];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let plan = sample_gaps(&row, 1.0, 9, &mut rng).unwrap();
        assert_eq!(plan.positions, vec![3, 4, 5]);
        assert_eq!(plan.gapped, vec![0, 0, 5, 9, 9, 9]);
    }

    #[test]
    fn minimal_case_replaces_one_id() {
        let row: Vec<ItemId> = vec![0, 4, 2];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let plan = sample_gaps(&row, 0.3, 7, &mut rng).unwrap();
        assert_eq!(plan.gapped, vec![0, 4, 7]);
        assert_eq!(plan.targets, vec![2]);
    }

    #[test]
    fn apply_is_idempotent() {
        let row: Vec<ItemId> = (1..=12).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let plan = sample_gaps(&row, 0.5, 13, &mut rng).unwrap();
        assert_eq!(apply_gaps(&plan, &plan.gapped), plan.gapped);
    }

    #[test]
    fn rejects_short_rows_and_bad_gamma() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            sample_gaps(&[0, 0, 3], 0.5, 9, &mut rng),
            Err(Error::TooShort(1))
        ));
        assert!(sample_gaps(&[1, 2, 3], 0.0, 9, &mut rng).is_err());
        assert!(sample_gaps(&[1, 2, 3], 1.5, 9, &mut rng).is_err());
    }

    #[test]
    fn row_streams_differ() {
        let a: u64 = row_rng(1, 0, 0).random();
        let b: u64 = row_rng(1, 0, 1).random();
        let c: u64 = row_rng(1, 1, 0).random();
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, row_rng(1, 0, 0).random::<u64>());
    }
}
