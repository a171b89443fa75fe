//! Discrete-event simulation of TCP and UDP sources sharing one rate-limited
//! bottleneck queue.
//!
//! Data packets enter the bottleneck as soon as they are sent. After
//! transmission they travel the link's extra delay plus half of their flow's
//! propagation RTT to the receiver; ACKs return over the other half without
//! queuing.

mod event;
mod link;
mod sim;

pub use event::{EventQueue, TieBreak};
pub use link::{CapacitySchedule, ScheduleError};
pub use sim::{run, FlowSummary, SimError, Simulation};

use crate::time::SimTime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PacketKind {
    TcpData,
    TcpAck,
    Udp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Packet {
    pub id: u64,
    pub flow_id: u32,
    pub kind: PacketKind,
    pub size: u64,
    /// TCP sequence number; zero for UDP.
    pub seq: u64,
    /// Set when the packet joins the bottleneck queue.
    pub enqueue_time: SimTime,
    pub retransmission: bool,
    pub sent_at: SimTime,
}
