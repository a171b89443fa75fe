//! Global synchronization protection (GSP) for tail-drop queues, with the
//! packet-level simulator and tooling used to evaluate it.
//!
//! * [`aqm`] holds GSP itself plus the tail-drop, CoDel and PIE baselines.
//! * [`tcp`] models Reno and CUBIC senders and delayed-ACK receivers.
//! * [`netsim`] wires them into a single-bottleneck event simulation.
//! * [`metrics`] turns a run into delay, drop, utilization and queue statistics.
//! * [`scenario`] and [`experiment`] read scenario files and produce CSV reports.

pub mod aqm;
pub mod experiment;
pub mod metrics;
pub mod netsim;
pub mod scenario;
pub mod tcp;
pub mod time;
