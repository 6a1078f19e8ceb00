//! Sliding window of truly evaluated genomes.

use crate::gp::DistanceMatrix;
use crate::neat::{compatibility_distance, CompatCoefficients, Genome};

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingEntry {
    pub genome: Genome,
    pub fitness: f64,
    /// 1-based index of the evaluation that produced `fitness`.
    pub eval_index: usize,
}

/// FIFO archive with a fixed capacity. Entries live in slots; once full, each
/// insertion overwrites the oldest slot. Pairwise distances between slots are
/// maintained incrementally for the surrogate.
#[derive(Clone, Debug)]
pub struct TrainingSet {
    capacity: usize,
    slots: Vec<TrainingEntry>,
    /// Slot holding the oldest entry once full.
    oldest: usize,
    dist: DistanceMatrix,
    coeffs: CompatCoefficients,
}

impl TrainingSet {
    pub fn new(capacity: usize, coeffs: CompatCoefficients) -> Self {
        assert!(capacity > 0, "training capacity must be positive");
        TrainingSet {
            capacity,
            slots: Vec::with_capacity(capacity),
            oldest: 0,
            dist: DistanceMatrix::zeros(capacity),
            coeffs,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Adds an entry, evicting the oldest when full. Returns the evicted entry.
    pub fn push(&mut self, entry: TrainingEntry) -> Option<TrainingEntry> {
        if let Some(last) = self.newest() {
            assert!(entry.eval_index > last.eval_index, "training entries must arrive in evaluation order");
        }
        let (slot, evicted) = if self.slots.len() < self.capacity {
            self.slots.push(entry);
            (self.slots.len() - 1, None)
        } else {
            let slot = self.oldest;
            self.oldest = (self.oldest + 1) % self.capacity;
            (slot, Some(std::mem::replace(&mut self.slots[slot], entry)))
        };
        let g = &self.slots[slot].genome;
        for (j, other) in self.slots.iter().enumerate() {
            let d = if j == slot {
                0.0
            } else {
                compatibility_distance(g, &other.genome, self.coeffs)
            };
            self.dist.set(slot, j, d);
        }
        evicted
    }

    /// Entries oldest first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &TrainingEntry> + '_ {
        let (a, b) = if self.slots.len() < self.capacity {
            (&self.slots[..], &self.slots[..0])
        } else {
            let (head, tail) = self.slots.split_at(self.oldest);
            (tail, head)
        };
        a.iter().chain(b.iter())
    }

    /// The `n` most recent entries, newest first.
    pub fn most_recent(&self, n: usize) -> impl Iterator<Item = &TrainingEntry> + '_ {
        self.iter().rev().take(n)
    }

    pub fn newest(&self) -> Option<&TrainingEntry> {
        self.iter().next_back()
    }

    /// Entries in slot order, which is the order used for the surrogate.
    pub fn slots(&self) -> &[TrainingEntry] {
        &self.slots
    }

    pub fn genomes(&self) -> Vec<Genome> {
        self.slots.iter().map(|e| e.genome.clone()).collect()
    }

    pub fn fitnesses(&self) -> Vec<f64> {
        self.slots.iter().map(|e| e.fitness).collect()
    }

    /// Pairwise distances in slot order.
    pub fn distances(&self) -> DistanceMatrix {
        if self.slots.len() == self.capacity {
            self.dist.clone()
        } else {
            self.dist.truncated(self.slots.len())
        }
    }
}
