use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::time::SimTime;

/// Deterministic tie-break for events scheduled at the same instant: lower
/// class first, then lower id, then insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TieBreak {
    pub class: u8,
    pub id: u64,
}

struct Entry<E> {
    time: SimTime,
    tie: TieBreak,
    seq: u64,
    event: E,
}

impl<E> Entry<E> {
    fn key(&self) -> (SimTime, TieBreak, u64) {
        (self.time, self.tie, self.seq)
    }
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

/// Future event list with a monotone clock.
pub struct EventQueue<E> {
    heap: BinaryHeap<Reverse<Entry<E>>>,
    now: SimTime,
    seq: u64,
}

impl<E> Default for EventQueue<E> {
    fn default() -> Self {
        Self::new()
    }
}

impl<E> EventQueue<E> {
    pub fn new() -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            now: SimTime::ZERO,
            seq: 0,
        }
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// # Panics
    /// When `time` lies before the current clock.
    pub fn schedule(&mut self, time: SimTime, tie: TieBreak, event: E) {
        assert!(
            time >= self.now,
            "event scheduled in the past: {time} < {}",
            self.now
        );
        self.seq += 1;
        self.heap.push(Reverse(Entry {
            time,
            tie,
            seq: self.seq,
            event,
        }));
    }

    /// Removes the next event if it is due at or before `t_end`, advancing
    /// the clock to its time.
    pub fn pop_until(&mut self, t_end: SimTime) -> Option<(SimTime, E)> {
        match self.heap.peek() {
            Some(Reverse(e)) if e.time <= t_end => {}
            _ => return None,
        }
        let Reverse(entry) = self.heap.pop()?;
        self.now = entry.time;
        Some((entry.time, entry.event))
    }

    /// Moves the clock forward to `t` without running anything.
    pub fn advance_to(&mut self, t: SimTime) {
        if t > self.now {
            self.now = t;
        }
    }

    /// Runs every event due at or before `t_end` through `handler`, then
    /// leaves the clock at `t_end`.
    pub fn run_until<F>(&mut self, t_end: SimTime, mut handler: F)
    where
        F: FnMut(&mut Self, SimTime, E),
    {
        while let Some((t, e)) = self.pop_until(t_end) {
            handler(self, t, e);
        }
        self.advance_to(t_end);
    }
}
