//! Seeded corpora with planted sequential structure.
//!
//! `Markov` walks a random cyclic successor map: each step follows the
//! planted successor with probability `p` and otherwise jumps to a uniformly
//! chosen other item. `BasketMixed` uses the same walk, but a quarter of the
//! items are triggers: visiting a trigger emits its three basket items in a
//! fresh random order, after which the walk resumes from the trigger.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::ItemId;
use crate::error::{Error, Result};

pub const BASKET_SIZE: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    Markov,
    BasketMixed,
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markov" => Ok(Regime::Markov),
            "basket-mixed" | "basket_mixed" => Ok(Regime::BasketMixed),
            other => Err(Error::Config(format!(
                "unknown synthetic regime `{other}` (expected markov or basket-mixed)"
            ))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Markov => "markov",
            Regime::BasketMixed => "basket-mixed",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthSpec {
    pub vocab_size: usize,
    pub n_sessions: usize,
    pub len: usize,
    pub regime: Regime,
    /// Probability of following the planted successor.
    pub successor_prob: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            vocab_size: 100,
            n_sessions: 1000,
            len: 20,
            regime: Regime::Markov,
            successor_prob: 0.8,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SyntheticCorpus {
    pub rows: Vec<Vec<ItemId>>,
    /// `successor[i]` is the planted successor of item `i` (index 0 unused).
    pub successor: Vec<ItemId>,
    /// Basket of each trigger item (index 0 unused).
    pub baskets: Vec<Option<[ItemId; BASKET_SIZE]>>,
}

impl SyntheticCorpus {
    pub fn is_trigger(&self, item: ItemId) -> bool {
        self.baskets[item as usize].is_some()
    }
}

pub fn generate_synthetic(spec: &SynthSpec) -> Result<SyntheticCorpus> {
    let v = spec.vocab_size;
    if v < 4 {
        return Err(Error::Config(format!(
            "synthetic corpora need at least 4 items, got {v}"
        )));
    }
    if !(0.0..=1.0).contains(&spec.successor_prob) {
        return Err(Error::Config(format!(
            "successor probability {} outside [0, 1]",
            spec.successor_prob
        )));
    }
    if spec.len == 0 {
        return Err(Error::Config("session length must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let mut cycle: Vec<ItemId> = (1..=v as ItemId).collect();
    cycle.shuffle(&mut rng);
    let mut successor = vec![0; v + 1];
    for (i, &item) in cycle.iter().enumerate() {
        successor[item as usize] = cycle[(i + 1) % v];
    }

    let mut baskets = vec![None; v + 1];
    if spec.regime == Regime::BasketMixed {
        let mut roles: Vec<ItemId> = (1..=v as ItemId).collect();
        roles.shuffle(&mut rng);
        let n_triggers = v / (BASKET_SIZE + 1);
        let (triggers, members) = roles.split_at(n_triggers);
        for (t, basket) in triggers.iter().zip(members.chunks_exact(BASKET_SIZE)) {
            baskets[*t as usize] = Some([basket[0], basket[1], basket[2]]);
        }
    }

    let mut rows = Vec::with_capacity(spec.n_sessions);
    for _ in 0..spec.n_sessions {
        let mut row = Vec::with_capacity(spec.len);
        let mut current: ItemId = rng.random_range(1..=v as ItemId);
        row.push(current);
        while row.len() < spec.len {
            if let Some(mut basket) = baskets[current as usize] {
                basket.shuffle(&mut rng);
                for &b in &basket {
                    if row.len() < spec.len {
                        row.push(b);
                    }
                }
                if row.len() == spec.len {
                    break;
                }
            }
            current = step(current, &successor, spec.successor_prob, v, &mut rng);
            row.push(current);
        }
        rows.push(row);
    }
    Ok(SyntheticCorpus {
        rows,
        successor,
        baskets,
    })
}

fn step(current: ItemId, successor: &[ItemId], p: f64, v: usize, rng: &mut ChaCha8Rng) -> ItemId {
    let planted = successor[current as usize];
    if rng.random::<f64>() < p {
        return planted;
    }
    // uniform over the other V - 1 items
    let mut x: ItemId = rng.random_range(1..v as ItemId);
    if x >= planted {
        x += 1;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_tiny_vocabulary() {
        let spec = SynthSpec {
            vocab_size: 3,
            ..SynthSpec::default()
        };
        assert!(generate_synthetic(&spec).is_err());
    }

    #[test]
    fn successor_map_is_a_single_cycle() {
        let c = generate_synthetic(&SynthSpec::default()).unwrap();
        let mut seen = vec![false; 101];
        let mut x = 1;
        for _ in 0..100 {
            assert!(!seen[x as usize]);
            seen[x as usize] = true;
            x = c.successor[x as usize];
        }
        assert_eq!(x, 1);
    }

    #[test]
    fn reproducible() {
        let spec = SynthSpec {
            regime: Regime::BasketMixed,
            ..SynthSpec::default()
        };
        let a = generate_synthetic(&spec).unwrap();
        let b = generate_synthetic(&spec).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn regime_parses() {
        assert_eq!("markov".parse::<Regime>().unwrap(), Regime::Markov);
        assert_eq!("basket-mixed".parse::<Regime>().unwrap(), Regime::BasketMixed);
        assert!("other".parse::<Regime>().is_err());
    }
}
