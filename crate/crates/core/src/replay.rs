//! Fixed-capacity FIFO replay storage with uniform sampling.

use rand::Rng;

use crate::error::{Error, Result};

/// One environment interaction.
///
/// Discrete actions are stored as a single integer-valued entry. `done`
/// marks an absorbing next state (time-limit truncation is not terminal).
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: Vec<f64>,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Ring buffer of transitions; the oldest entry is overwritten on overflow.
#[derive(Debug, Clone)]
pub struct ReplayBuffer {
    capacity: usize,
    storage: Vec<Transition>,
    write_head: usize,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Result<Self> {
        if capacity == 0 {
            return Err(Error::config(
                "buffer_capacity",
                "capacity must be positive",
            ));
        }
        Ok(ReplayBuffer {
            capacity,
            storage: Vec::with_capacity(capacity.min(1 << 16)),
            write_head: 0,
        })
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.storage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.storage.is_empty()
    }

    /// Stored transitions in slot order (not insertion order once wrapped).
    pub fn as_slice(&self) -> &[Transition] {
        &self.storage
    }

    /// Stored transitions from oldest to newest.
    pub fn iter_oldest_first(&self) -> impl Iterator<Item = &Transition> {
        let split = if self.storage.len() < self.capacity {
            0
        } else {
            self.write_head
        };
        self.storage[split..].iter().chain(&self.storage[..split])
    }

    pub fn push(&mut self, t: Transition) -> Result<()> {
        if t.state.len() != t.next_state.len() {
            return Err(Error::Shape(format!(
                "state width {} != next_state width {}",
                t.state.len(),
                t.next_state.len()
            )));
        }
        if !t.reward.is_finite() {
            return Err(Error::Numeric(format!("non-finite reward {}", t.reward)));
        }
        if let Some(first) = self.storage.first() {
            if first.state.len() != t.state.len() || first.action.len() != t.action.len() {
                return Err(Error::Shape(format!(
                    "transition widths (state {}, action {}) differ from stored (state {}, action {})",
                    t.state.len(),
                    t.action.len(),
                    first.state.len(),
                    first.action.len()
                )));
            }
        }
        if self.storage.len() < self.capacity {
            self.storage.push(t);
        } else {
            self.storage[self.write_head] = t;
        }
        self.write_head = (self.write_head + 1) % self.capacity;
        Ok(())
    }

    /// `batch_size` independent uniform draws, with replacement.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<Vec<Transition>> {
        if self.storage.is_empty() {
            return Err(Error::Protocol("cannot sample from an empty buffer".into()));
        }
        let n = self.storage.len();
        Ok((0..batch_size)
            .map(|_| self.storage[rng.random_range(0..n)].clone())
            .collect())
    }
}
