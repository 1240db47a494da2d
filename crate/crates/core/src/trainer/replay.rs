use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seq::Sequence;

/// A past sample with its rewards and the behavior log-probs it was drawn with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayEntry {
    pub sequence: Sequence,
    pub rewards: Vec<f64>,
    pub logprob_old: Vec<f64>,
}

/// Bounded FIFO of past samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    entries: VecDeque<ReplayEntry>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            capacity,
            entries: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = &ReplayEntry> {
        self.entries.iter()
    }

    /// Appends, evicting the oldest entries beyond capacity.
    pub fn push(&mut self, entry: ReplayEntry) {
        if self.capacity == 0 {
            return;
        }
        if self.entries.len() == self.capacity {
            self.entries.pop_front();
        }
        self.entries.push_back(entry);
    }

    /// Uniform sample of `min(n, len)` distinct entries. Consumes no
    /// randomness when that count is 0.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<ReplayEntry> {
        let amount = n.min(self.entries.len());
        if amount == 0 {
            return Vec::new();
        }
        rand::seq::index::sample(rng, self.entries.len(), amount)
            .into_iter()
            .map(|i| self.entries[i].clone())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn entry(i: usize) -> ReplayEntry {
        ReplayEntry {
            sequence: "ACGT".parse().unwrap(),
            rewards: vec![i as f64],
            logprob_old: vec![-1.0; 4],
        }
    }

    #[test]
    fn fifo_eviction() {
        let mut b = ReplayBuffer::new(3);
        for i in 0..5 {
            b.push(entry(i));
        }
        let kept: Vec<f64> = b.entries().map(|e| e.rewards[0]).collect();
        assert_eq!(kept, vec![2.0, 3.0, 4.0]);
    }

    proptest! {
        #[test]
        fn capacity_and_sampling(cap in 1usize..20, pushes in 0usize..50, n in 0usize..30, seed in any::<u64>()) {
            let mut b = ReplayBuffer::new(cap);
            for i in 0..pushes {
                b.push(entry(i));
                prop_assert!(b.len() <= cap);
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = b.sample(n, &mut rng);
            prop_assert_eq!(s.len(), n.min(b.len()));
            let mut ids: Vec<u64> = s.iter().map(|e| e.rewards[0] as u64).collect();
            ids.sort();
            ids.dedup();
            prop_assert_eq!(ids.len(), s.len());
        }
    }

    #[test]
    fn zero_sample_leaves_rng_untouched() {
        let mut b = ReplayBuffer::new(4);
        b.push(entry(0));
        let mut a = ChaCha8Rng::seed_from_u64(1);
        let c = a.clone();
        assert!(b.sample(0, &mut a).is_empty());
        assert_eq!(a, c);
    }
}
