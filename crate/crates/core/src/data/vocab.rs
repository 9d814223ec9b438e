use std::collections::HashMap;

use crate::data::{ItemId, RawEvent};
use crate::error::{Error, Result};

/// Bijection between raw item identifiers and indices `1..=V`.
///
/// Index 0 is padding and `V + 1` is the gap symbol used by encoders.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    item_to_index: HashMap<String, ItemId>,
    index_to_item: Vec<String>,
}

impl Vocabulary {
    /// Builds a vocabulary from distinct items in index order (first item
    /// gets index 1).
    pub fn from_items<I, S>(items: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vocab = Vocabulary {
            item_to_index: HashMap::new(),
            index_to_item: Vec::new(),
        };
        for item in items {
            let item = item.into();
            if vocab.item_to_index.contains_key(&item) {
                return Err(Error::Config(format!("duplicate vocabulary item `{item}`")));
            }
            vocab.index_to_item.push(item.clone());
            vocab
                .item_to_index
                .insert(item, vocab.index_to_item.len() as ItemId);
        }
        Ok(vocab)
    }

    /// Number of items `V`.
    pub fn len(&self) -> usize {
        self.index_to_item.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index_to_item.is_empty()
    }

    pub fn mask(&self) -> ItemId {
        self.len() as ItemId + 1
    }

    pub fn index_of(&self, item: &str) -> Option<ItemId> {
        self.item_to_index.get(item).copied()
    }

    pub fn item_at(&self, index: ItemId) -> Option<&str> {
        let i = (index as usize).checked_sub(1)?;
        self.index_to_item.get(i).map(String::as_str)
    }

    /// Items in index order, starting at index 1.
    pub fn items(&self) -> impl Iterator<Item = &str> {
        self.index_to_item.iter().map(String::as_str)
    }
}

/// Keeps items seen at least `min_count` times, indexed by first appearance.
pub fn build_vocabulary(events: &[RawEvent], min_count: usize) -> Result<Vocabulary> {
    if events.is_empty() {
        return Err(Error::EmptyInput("no events to build a vocabulary from".into()));
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    let mut order: Vec<&str> = Vec::new();
    for e in events {
        let c = counts.entry(e.item.as_str()).or_insert_with(|| {
            order.push(e.item.as_str());
            0
        });
        *c += 1;
    }
    let vocab = Vocabulary::from_items(order.into_iter().filter(|i| counts[i] >= min_count))?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocabulary { min_count });
    }
    Ok(vocab)
}
