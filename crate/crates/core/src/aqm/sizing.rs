//! Buffer sizing for a generic multiplicative-decrease ratio.
//!
//! A flow that shrinks its window by `beta` keeps the link busy only if the
//! queuing delay just before the decrease is at least
//! `rtt0 * (1 - beta) / beta`. Multiplied by the capacity this is the
//! smallest buffer that guarantees full throughput; for `beta = 0.5` it is
//! the classic bandwidth-delay product.

use super::AqmError;

fn check_beta(beta: f64) -> Result<(), AqmError> {
    if beta > 0.0 && beta <= 1.0 {
        Ok(())
    } else {
        Err(AqmError::InvalidBeta(beta))
    }
}

fn check_rtt(rtt0: f64) -> Result<(), AqmError> {
    if rtt0 > 0.0 && rtt0.is_finite() {
        Ok(())
    } else {
        Err(AqmError::InvalidRtt(rtt0))
    }
}

/// Queuing delay budget in seconds that a single flow needs right before a
/// window decrease.
pub fn delay_budget(rtt0: f64, beta: f64) -> Result<f64, AqmError> {
    check_rtt(rtt0)?;
    check_beta(beta)?;
    Ok(rtt0 * (1.0 - beta) / beta)
}

/// Minimum buffer in bytes for full utilization, rounded up to a whole byte.
pub fn min_buffer(capacity: f64, rtt0: f64, beta: f64) -> Result<u64, AqmError> {
    if !(capacity > 0.0) || !capacity.is_finite() {
        return Err(AqmError::InvalidCapacity(capacity));
    }
    let exact = capacity * delay_budget(rtt0, beta)?;
    // Products like 12.5e6 * 0.1 land a few ulps off an integer; those must
    // not be rounded up to the next byte.
    let nearest = exact.round();
    if (exact - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        Ok(nearest as u64)
    } else {
        Ok(exact.ceil() as u64)
    }
}

/// Both sizing results for one link and TCP flavor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BufferSizing {
    pub capacity: f64,
    pub rtt0: f64,
    pub beta: f64,
    pub delay_budget: f64,
    pub min_buffer: u64,
}

impl BufferSizing {
    pub fn compute(capacity: f64, rtt0: f64, beta: f64) -> Result<Self, AqmError> {
        Ok(BufferSizing {
            capacity,
            rtt0,
            beta,
            delay_budget: delay_budget(rtt0, beta)?,
            min_buffer: min_buffer(capacity, rtt0, beta)?,
        })
    }
}
