use crate::time::SimTime;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScheduleError {
    #[error("capacity must be positive and finite, got {0}")]
    NonPositive(f64),
    #[error("capacity change times must be strictly increasing and after zero")]
    Unordered,
}

/// Piecewise-constant link rate in bytes per second.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacitySchedule {
    steps: Vec<(SimTime, f64)>,
}

impl CapacitySchedule {
    pub fn constant(rate: f64) -> Result<Self, ScheduleError> {
        Self::new(rate, &[])
    }

    pub fn new(initial: f64, changes: &[(SimTime, f64)]) -> Result<Self, ScheduleError> {
        let mut steps = vec![(SimTime::ZERO, initial)];
        for &(t, rate) in changes {
            if t <= steps.last().expect("non-empty").0 {
                return Err(ScheduleError::Unordered);
            }
            steps.push((t, rate));
        }
        if let Some(&(_, bad)) = steps.iter().find(|(_, r)| !(*r > 0.0 && r.is_finite())) {
            return Err(ScheduleError::NonPositive(bad));
        }
        Ok(CapacitySchedule { steps })
    }

    pub fn steps(&self) -> &[(SimTime, f64)] {
        &self.steps
    }

    pub fn rate_at(&self, t: SimTime) -> f64 {
        let idx = self.steps.partition_point(|(start, _)| *start <= t);
        self.steps[idx.saturating_sub(1)].1
    }

    /// Bytes the link can carry over `[from, to]` seconds.
    pub fn bytes_between(&self, from: f64, to: f64) -> f64 {
        if !(to > from) {
            return 0.0;
        }
        let mut total = 0.0;
        for (i, &(start, rate)) in self.steps.iter().enumerate() {
            let seg_start = start.as_secs_f64();
            let seg_end = self
                .steps
                .get(i + 1)
                .map_or(f64::INFINITY, |(t, _)| t.as_secs_f64());
            let lo = seg_start.max(from);
            let hi = seg_end.min(to);
            if hi > lo {
                total += (hi - lo) * rate;
            }
        }
        total
    }
}
