use std::sync::Arc;

use rand::Rng;

use super::{SpmspInstance, SpmspSchedule};
use crate::sa::Neighborhood;

/// Attempts per proposal before giving up.
pub const MAX_RETRIES: usize = 100;
/// Default half-width of a buffer change, as a fraction of the job's mean.
pub const DEFAULT_BUFFER_STEP: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    /// Reinsert one job at a random position on a random machine.
    Relocate,
    /// Exchange the positions of two jobs.
    Swap,
    /// Grow or shrink the buffer after one job, within `[0, deadline]`.
    BufferChange,
    /// Hand part of one job's buffer to a neighbouring job.
    BufferTransfer,
}

const MOVES: [Move; 4] = [Move::Relocate, Move::Swap, Move::BufferChange, Move::BufferTransfer];

/// The four schedule moves, picked uniformly. Moves that would create a
/// cycle between machine order and precedence are redrawn.
#[derive(Debug, Clone)]
pub struct SpmspMoves {
    instance: Arc<SpmspInstance>,
    buffer_step: f64,
}

impl SpmspMoves {
    pub fn new(instance: Arc<SpmspInstance>) -> Self {
        Self { instance, buffer_step: DEFAULT_BUFFER_STEP }
    }

    pub fn with_buffer_step(mut self, step: f64) -> Self {
        assert!(step > 0.0 && step.is_finite(), "buffer step must be positive");
        self.buffer_step = step;
        self
    }

    /// One attempt at `mv`; `None` if the move does not apply or is infeasible.
    pub fn apply<R: Rng + ?Sized>(&self, s: &SpmspSchedule, mv: Move, rng: &mut R) -> Option<SpmspSchedule> {
        let inst = &*self.instance;
        let n = inst.len();
        let mut seqs = s.sequences().to_vec();
        let mut bufs = s.buffers().to_vec();
        match mv {
            Move::Relocate => {
                let j = rng.random_range(0..n);
                let from = s.machine_of(j);
                seqs[from].retain(|&x| x != j);
                let to = rng.random_range(0..inst.machines());
                let pos = rng.random_range(0..=seqs[to].len());
                seqs[to].insert(pos, j);
            }
            Move::Swap => {
                if n < 2 {
                    return None;
                }
                let a = rng.random_range(0..n);
                let mut b = rng.random_range(0..n - 1);
                if b >= a {
                    b += 1;
                }
                let (ma, mb) = (s.machine_of(a), s.machine_of(b));
                let pa = seqs[ma].iter().position(|&x| x == a)?;
                let pb = seqs[mb].iter().position(|&x| x == b)?;
                seqs[ma][pa] = b;
                seqs[mb][pb] = a;
            }
            Move::BufferChange => {
                let j = rng.random_range(0..n);
                let step = self.buffer_step * inst.jobs()[j].mean;
                if step <= 0.0 {
                    return None;
                }
                bufs[j] = (bufs[j] + rng.random_range(-step..=step)).clamp(0.0, inst.deadline());
            }
            Move::BufferTransfer => {
                let holders: Vec<usize> = (0..n).filter(|&j| bufs[j] > 0.0).collect();
                if holders.is_empty() {
                    return None;
                }
                let j = holders[rng.random_range(0..holders.len())];
                let mut near: Vec<usize> = inst.predecessors(j).iter().chain(inst.successors(j)).copied().collect();
                near.extend(s.machine_prev(j));
                near.extend(s.machine_next(j));
                near.sort_unstable();
                near.dedup();
                if near.is_empty() {
                    return None;
                }
                let k = near[rng.random_range(0..near.len())];
                let amount = bufs[j] * rng.random::<f64>();
                bufs[j] -= amount;
                bufs[k] += amount;
            }
        }
        SpmspSchedule::from_sequences(inst, seqs, bufs).ok()
    }
}

impl Neighborhood<SpmspSchedule> for SpmspMoves {
    fn propose<R: Rng + ?Sized>(&self, s: &SpmspSchedule, rng: &mut R) -> Option<SpmspSchedule> {
        (0..MAX_RETRIES).find_map(|_| {
            let mv = MOVES[rng.random_range(0..MOVES.len())];
            self.apply(s, mv, rng)
        })
    }
}
