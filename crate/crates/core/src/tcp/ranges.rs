use std::collections::BTreeMap;

/// Set of sequence numbers stored as disjoint half-open ranges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RangeSet {
    ranges: BTreeMap<u64, u64>,
    len: u64,
}

impl RangeSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, x: u64) -> bool {
        self.ranges.range(..=x).next_back().is_some_and(|(_, &e)| x < e)
    }

    /// Range containing `x`, if any.
    pub fn range_of(&self, x: u64) -> Option<(u64, u64)> {
        self.ranges
            .range(..=x)
            .next_back()
            .filter(|(_, &e)| x < e)
            .map(|(&s, &e)| (s, e))
    }

    pub fn first(&self) -> Option<(u64, u64)> {
        self.ranges.iter().next().map(|(&s, &e)| (s, e))
    }

    /// Adds `[start, end)` and returns the sub-ranges that were not present.
    pub fn insert_range(&mut self, start: u64, end: u64) -> Vec<(u64, u64)> {
        if start >= end {
            return Vec::new();
        }
        let mut added = Vec::new();
        let mut cursor = start;
        let mut new_start = start;
        let mut new_end = end;
        let overlapping: Vec<(u64, u64)> = self
            .ranges
            .range(..=end)
            .rev()
            .take_while(|(_, &e)| e >= start)
            .map(|(&s, &e)| (s, e))
            .collect();
        for &(s, e) in overlapping.iter().rev() {
            if s > cursor {
                added.push((cursor, s.min(end)));
            }
            cursor = cursor.max(e);
            new_start = new_start.min(s);
            new_end = new_end.max(e);
            self.ranges.remove(&s);
            self.len -= e - s;
        }
        if cursor < end {
            added.push((cursor, end));
        }
        self.ranges.insert(new_start, new_end);
        self.len += new_end - new_start;
        added
    }

    pub fn insert(&mut self, x: u64) -> bool {
        !self.insert_range(x, x + 1).is_empty()
    }

    /// Members in `[start, end)`.
    pub fn count_in(&self, start: u64, end: u64) -> u64 {
        if start >= end {
            return 0;
        }
        let mut n = 0;
        let first = self.ranges.range(..start).next_back().map(|(&s, _)| s).unwrap_or(start);
        for (&s, &e) in self.ranges.range(first..end) {
            let lo = s.max(start);
            let hi = e.min(end);
            if hi > lo {
                n += hi - lo;
            }
        }
        n
    }

    /// Drops every member below `x`.
    pub fn remove_below(&mut self, x: u64) {
        while let Some((&s, &e)) = self.ranges.iter().next() {
            if s >= x {
                break;
            }
            self.ranges.remove(&s);
            self.len -= e - s;
            if e > x {
                self.ranges.insert(x, e);
                self.len += e - x;
                break;
            }
        }
    }

    /// Smallest `y` such that at least `k` members are `>= y`.
    pub fn kth_highest(&self, k: u64) -> Option<u64> {
        if k == 0 || k > self.len {
            return None;
        }
        let mut remaining = k;
        for (&s, &e) in self.ranges.iter().rev() {
            let n = e - s;
            if n >= remaining {
                return Some(e - remaining);
            }
            remaining -= n;
        }
        None
    }

    /// First non-member in `[from, to)`.
    pub fn next_gap(&self, from: u64, to: u64) -> Option<u64> {
        let mut x = from;
        while x < to {
            match self.range_of(x) {
                Some((_, e)) => x = e,
                None => return Some(x),
            }
        }
        None
    }
}
