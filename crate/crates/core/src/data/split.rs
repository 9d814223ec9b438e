use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::ItemId;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<Vec<ItemId>>,
    pub valid: Vec<Vec<ItemId>>,
    pub test: Vec<Vec<ItemId>>,
}

/// Seeded random permutation followed by a proportional cut.
///
/// Validation and test sizes are rounded and get at least one row each;
/// training takes the remainder.
pub fn split_dataset(rows: Vec<Vec<ItemId>>, fractions: [f64; 3], seed: u64) -> Result<Split> {
    let n = rows.len();
    if n < 3 {
        return Err(Error::TooFewRows(n));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let n_valid = ((n as f64 * fractions[1]).round() as usize).max(1);
    let n_test = ((n as f64 * fractions[2]).round() as usize).max(1);
    let n_train = n.saturating_sub(n_valid + n_test).max(1);
    let n_valid = n - n_train - n_test;

    let mut slots: Vec<Option<Vec<ItemId>>> = rows.into_iter().map(Some).collect();
    let mut take = |ix: &[usize]| -> Vec<Vec<ItemId>> {
        ix.iter().map(|&i| slots[i].take().expect("each row taken once")).collect()
    };
    let train = take(&order[..n_train]);
    let valid = take(&order[n_train..n_train + n_valid]);
    let test = take(&order[n_train + n_valid..]);
    Ok(Split { train, valid, test })
}
