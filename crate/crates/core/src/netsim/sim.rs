use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use super::event::{EventQueue, TieBreak};
use super::link::{CapacitySchedule, ScheduleError};
use super::{Packet, PacketKind};
use crate::aqm::{AqmError, AqmRegistry, DequeueVerdict, DropReason, QueueDiscipline, QueueSnapshot, Verdict};
use crate::metrics::{DelaySample, DropRecord, ProbeSample, QlenSample, RunRecord};
use crate::scenario::ScenarioConfig;
use crate::tcp::{AckInfo, Segment, SenderConfig, TcpError, TcpReceiver, TcpSender};
use crate::time::SimTime;

const TRACE_TAIL: usize = 32;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Aqm(#[from] AqmError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("{source}\nlast events:\n{trace}")]
    Tcp { source: TcpError, trace: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Event {
    CapacityChange(usize),
    ServiceComplete,
    AckDelivered(AckInfo),
    DataDelivered(Segment),
    Arrival(Packet),
    UdpEmit(usize, u64),
    FlowStart(u32),
    DelackTimer(u32),
    RtoTimer(u32),
    StatsTick,
}

impl Event {
    fn tie(&self) -> TieBreak {
        let (class, id) = match *self {
            Event::CapacityChange(i) => (0, i as u64),
            Event::ServiceComplete => (1, 0),
            Event::AckDelivered(a) => (2, a.flow_id as u64),
            Event::DataDelivered(s) => (3, s.flow_id as u64),
            Event::Arrival(p) => (4, p.id),
            Event::UdpEmit(i, _) => (5, i as u64),
            Event::FlowStart(f) => (6, f as u64),
            Event::DelackTimer(f) => (7, f as u64),
            Event::RtoTimer(f) => (8, f as u64),
            Event::StatsTick => (9, 0),
        };
        TieBreak { class, id }
    }
}

struct Flow {
    sender: TcpSender,
    receiver: TcpReceiver,
    one_way: SimTime,
    start: SimTime,
    rto_pending: Option<SimTime>,
}

struct UdpState {
    rate: f64,
    packet_size: u64,
    start: SimTime,
    stop: SimTime,
}

struct InService {
    packet: Packet,
    start: SimTime,
}

/// Per-flow totals at the end of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSummary {
    pub flow_id: u32,
    pub start: SimTime,
    pub cwnd: f64,
    pub acked_segments: u64,
    pub retransmissions: u64,
    pub timeouts: u64,
}

/// One configured run. Build with [`Simulation::new`], then [`Simulation::run`].
pub struct Simulation {
    events: EventQueue<Event>,
    end: SimTime,
    schedule: CapacitySchedule,
    rate: f64,
    extra_delay: SimTime,
    buffer_limit: u64,
    aqm: Box<dyn QueueDiscipline>,
    queue: VecDeque<Packet>,
    backlog: u64,
    in_service: Option<InService>,
    flows: Vec<Flow>,
    udp: Vec<UdpState>,
    udp_flow_base: u32,
    next_packet_id: u64,
    sample_every: SimTime,
    trace: VecDeque<(SimTime, Event)>,
    record: RunRecord,
}

impl Simulation {
    pub fn new(cfg: &ScenarioConfig, registry: &AqmRegistry) -> Result<Self, SimError> {
        let changes: Vec<(SimTime, f64)> = cfg
            .link
            .capacity_changes
            .iter()
            .map(|c| (SimTime::from_secs_f64(c.at), c.rate))
            .collect();
        let schedule = CapacitySchedule::new(cfg.link.capacity, &changes)?;
        let aqm = registry.build(&cfg.aqm.kind, &cfg.aqm_params())?;
        let end = SimTime::from_secs_f64(cfg.duration);
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let mut flows = Vec::new();
        for group in &cfg.flows {
            let flavor = group.tcp_flavor().map_err(|source| SimError::Tcp {
                source,
                trace: String::new(),
            })?;
            for _ in 0..group.count {
                let flow_id = flows.len() as u32;
                let mut sc = SenderConfig::new(flavor, group.rtt0);
                sc.mss = cfg.tcp.mss;
                sc.initial_window = group.initial_cwnd;
                sc.initial_ssthresh = group.initial_ssthresh;
                let jitter = if group.start_window > 0.0 {
                    rng.gen_range(0.0..group.start_window)
                } else {
                    0.0
                };
                flows.push(Flow {
                    sender: TcpSender::new(flow_id, sc),
                    receiver: TcpReceiver::new(flow_id, cfg.tcp.mss, SimTime::from_secs_f64(cfg.tcp.delack)),
                    one_way: SimTime::from_secs_f64(group.rtt0 / 2.0),
                    start: SimTime::from_secs_f64(group.start + jitter),
                    rto_pending: None,
                });
            }
        }
        let udp: Vec<UdpState> = cfg
            .udp
            .iter()
            .map(|u| UdpState {
                rate: u.rate,
                packet_size: u.packet_size,
                start: SimTime::from_secs_f64(u.start),
                stop: u.stop.map_or(end, SimTime::from_secs_f64),
            })
            .collect();
        let windows = (cfg.duration / cfg.metrics.util_window - 1e-9).ceil().max(0.0) as usize;
        let record = RunRecord {
            duration: cfg.duration,
            util_window: cfg.metrics.util_window,
            capacity: schedule.clone(),
            delays: Vec::new(),
            drops: Vec::new(),
            window_bytes: vec![0.0; windows],
            qlen: Vec::new(),
            probes: Vec::new(),
            decreases: Vec::new(),
            timeouts: 0,
            packets_accepted: 0,
            bytes_accepted: 0,
            bytes_departed: 0,
        };

        let mut sim = Simulation {
            events: EventQueue::new(),
            end,
            rate: schedule.rate_at(SimTime::ZERO),
            schedule,
            extra_delay: SimTime::from_secs_f64(cfg.link.delay),
            buffer_limit: cfg.link.buffer,
            aqm,
            queue: VecDeque::new(),
            backlog: 0,
            in_service: None,
            udp_flow_base: flows.len() as u32,
            flows,
            udp,
            next_packet_id: 0,
            sample_every: SimTime::from_secs_f64(cfg.metrics.sample_interval).max(SimTime::from_nanos(1)),
            trace: VecDeque::with_capacity(TRACE_TAIL),
            record,
        };
        for i in 1..sim.schedule.steps().len() {
            let t = sim.schedule.steps()[i].0;
            sim.push(t, Event::CapacityChange(i));
        }
        for f in 0..sim.flows.len() {
            let t = sim.flows[f].start;
            sim.push(t, Event::FlowStart(f as u32));
        }
        for i in 0..sim.udp.len() {
            let t = sim.udp[i].start;
            if t < sim.udp[i].stop {
                sim.push(t, Event::UdpEmit(i, 0));
            }
        }
        sim.push(SimTime::ZERO, Event::StatsTick);
        Ok(sim)
    }

    fn push(&mut self, t: SimTime, ev: Event) {
        self.events.schedule(t, ev.tie(), ev);
    }

    pub fn now(&self) -> SimTime {
        self.events.now()
    }

    pub fn backlog_bytes(&self) -> u64 {
        self.backlog
    }

    pub fn flow_summaries(&self) -> Vec<FlowSummary> {
        self.flows
            .iter()
            .map(|f| FlowSummary {
                flow_id: f.sender.flow_id,
                start: f.start,
                cwnd: f.sender.cwnd(),
                acked_segments: f.sender.snd_una(),
                retransmissions: f.sender.retransmissions(),
                timeouts: f.sender.timeouts(),
            })
            .collect()
    }

    /// Bytes accepted into the queue minus bytes that left it, including
    /// the packet on the wire. Equals the queued bytes at every instant.
    pub fn bytes_in_system(&self) -> u64 {
        self.record.bytes_accepted - self.record.bytes_departed
    }

    pub fn in_service_bytes(&self) -> u64 {
        self.in_service.as_ref().map_or(0, |s| s.packet.size)
    }

    pub fn record(&self) -> &RunRecord {
        &self.record
    }

    /// Runs to the configured end time and returns what was recorded.
    pub fn run(mut self) -> Result<(RunRecord, Vec<FlowSummary>), SimError> {
        let end = self.end;
        if end > SimTime::ZERO {
            self.run_until(end)?;
        }
        let flows = self.flow_summaries();
        self.record.timeouts = flows.iter().map(|f| f.timeouts).sum();
        Ok((self.record, flows))
    }

    /// Processes every event up to and including `t_end`.
    pub fn run_until(&mut self, t_end: SimTime) -> Result<(), SimError> {
        let t_end = t_end.min(self.end);
        while let Some((now, ev)) = self.events.pop_until(t_end) {
            if self.trace.len() == TRACE_TAIL {
                self.trace.pop_front();
            }
            self.trace.push_back((now, ev));
            self.handle(now, ev)?;
        }
        self.events.advance_to(t_end);
        Ok(())
    }

    fn trace_tail(&self) -> String {
        self.trace
            .iter()
            .map(|(t, e)| format!("  {t} {e:?}"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    fn tcp_fault(&self, source: TcpError) -> SimError {
        SimError::Tcp {
            source,
            trace: self.trace_tail(),
        }
    }

    fn handle(&mut self, now: SimTime, ev: Event) -> Result<(), SimError> {
        match ev {
            Event::CapacityChange(i) => self.rate = self.schedule.steps()[i].1,
            Event::ServiceComplete => self.on_service_complete(now),
            Event::AckDelivered(ack) => self.on_ack(ack, now)?,
            Event::DataDelivered(seg) => self.on_data(seg, now),
            Event::Arrival(p) => self.on_arrival(p, now),
            Event::UdpEmit(i, k) => self.on_udp_emit(i, k, now),
            Event::FlowStart(f) => {
                let segs = self.flows[f as usize].sender.emit(now);
                self.send_all(&segs, now);
                self.ensure_rto(f, now);
            }
            Event::DelackTimer(f) => {
                let flow = &mut self.flows[f as usize];
                if let Some(ack) = flow.receiver.on_delack_timer(now) {
                    let t = now + flow.one_way;
                    self.push(t, Event::AckDelivered(ack));
                }
            }
            Event::RtoTimer(f) => {
                let flow = &mut self.flows[f as usize];
                flow.rto_pending = None;
                if flow.sender.on_rto(now) {
                    flow.sender.audit().map_err(|e| self.tcp_fault(e))?;
                    let segs = self.flows[f as usize].sender.emit(now);
                    self.send_all(&segs, now);
                }
                self.ensure_rto(f, now);
            }
            Event::StatsTick => {
                let t = now.as_secs_f64();
                self.record.qlen.push(QlenSample {
                    time: t,
                    backlog_bytes: self.backlog,
                });
                let probe = self.aqm.probe();
                self.record.probes.push(ProbeSample {
                    time: t,
                    interval: probe.interval,
                    cumul_time: probe.cumul_time,
                    drop_probability: probe.drop_probability,
                });
                let next = now + self.sample_every;
                if next < self.end {
                    self.push(next, Event::StatsTick);
                }
            }
        }
        Ok(())
    }

    /// Keeps exactly one pending timer event no later than the sender's
    /// deadline. Timers that fire early are re-armed.
    fn ensure_rto(&mut self, f: u32, now: SimTime) {
        let flow = &mut self.flows[f as usize];
        if let Some(deadline) = flow.sender.rto_deadline() {
            if flow.rto_pending.is_none_or(|p| p > deadline) {
                let t = deadline.max(now);
                flow.rto_pending = Some(t);
                self.push(t, Event::RtoTimer(f));
            }
        }
    }

    fn send_all(&mut self, segs: &[Segment], now: SimTime) {
        for s in segs {
            self.send(s, now);
        }
    }

    fn send(&mut self, s: &Segment, now: SimTime) {
        let packet = Packet {
            id: self.next_packet_id,
            flow_id: s.flow_id,
            kind: PacketKind::TcpData,
            size: s.size,
            seq: s.seq,
            enqueue_time: now,
            retransmission: s.retransmission,
            sent_at: s.sent_at,
        };
        self.next_packet_id += 1;
        self.push(now, Event::Arrival(packet));
    }

    fn on_ack(&mut self, ack: AckInfo, now: SimTime) -> Result<(), SimError> {
        let f = ack.flow_id;
        let sender = &mut self.flows[f as usize].sender;
        let resp = match sender.on_ack(&ack, now) {
            Ok(r) => r,
            Err(e) => return Err(self.tcp_fault(e)),
        };
        let segs = sender.emit(now);
        if let Err(e) = sender.audit() {
            return Err(self.tcp_fault(e));
        }
        if let Some(d) = resp.decrease {
            self.record.decreases.push(d);
        }
        self.send_all(&segs, now);
        self.ensure_rto(f, now);
        Ok(())
    }

    fn on_data(&mut self, seg: Segment, now: SimTime) {
        let flow = &mut self.flows[seg.flow_id as usize];
        let action = flow.receiver.on_data(&seg, now);
        let back = now + flow.one_way;
        if let Some(ack) = action.ack {
            self.push(back, Event::AckDelivered(ack));
        }
        if let Some(t) = action.timer {
            self.push(t, Event::DelackTimer(seg.flow_id));
        }
    }

    fn on_udp_emit(&mut self, i: usize, k: u64, now: SimTime) {
        let src = &self.udp[i];
        let packet = Packet {
            id: self.next_packet_id,
            flow_id: self.udp_flow_base + i as u32,
            kind: PacketKind::Udp,
            size: src.packet_size,
            seq: k,
            enqueue_time: now,
            retransmission: false,
            sent_at: now,
        };
        self.next_packet_id += 1;
        // emission times are computed from the start to avoid drift
        let period = src.packet_size as f64 / src.rate;
        let next = src.start + SimTime::from_secs_f64((k + 1) as f64 * period);
        let stop = src.stop;
        self.on_arrival(packet, now);
        if next < stop {
            self.push(next, Event::UdpEmit(i, k + 1));
        }
    }

    fn snapshot(&self) -> QueueSnapshot {
        QueueSnapshot {
            backlog_bytes: self.backlog,
            backlog_packets: self.queue.len(),
            head_arrival_time: self.queue.front().map(|p| p.enqueue_time.as_secs_f64()),
            buffer_limit: self.buffer_limit,
        }
    }

    fn note_backlog_change(&mut self, was_empty: bool, now: SimTime) {
        if was_empty != (self.backlog == 0) {
            self.record.qlen.push(QlenSample {
                time: now.as_secs_f64(),
                backlog_bytes: self.backlog,
            });
        }
    }

    fn drop_packet(&mut self, p: &Packet, reason: DropReason, now: SimTime) {
        self.record.drops.push(DropRecord {
            time: now.as_secs_f64(),
            flow_id: p.flow_id,
            reason,
        });
    }

    fn on_arrival(&mut self, mut p: Packet, now: SimTime) {
        let snap = self.snapshot();
        match self.aqm.on_enqueue(&snap, p.size, now.as_secs_f64()) {
            Verdict::Accept => {
                debug_assert!(self.backlog + p.size <= self.buffer_limit);
                let was_empty = self.backlog == 0;
                p.enqueue_time = now;
                self.backlog += p.size;
                self.queue.push_back(p);
                self.record.packets_accepted += 1;
                self.record.bytes_accepted += p.size;
                if self.in_service.is_none() {
                    self.start_service(now);
                }
                self.note_backlog_change(was_empty, now);
            }
            Verdict::DropThreshold => {
                let reason = self.aqm.early_drop_reason();
                self.drop_packet(&p, reason, now);
            }
            Verdict::DropOverflow => self.drop_packet(&p, DropReason::Overflow, now),
        }
    }

    /// Takes the next packet off the queue and puts it on the wire.
    fn start_service(&mut self, now: SimTime) {
        debug_assert!(self.in_service.is_none());
        while let Some(p) = self.queue.pop_front() {
            self.backlog -= p.size;
            if self.aqm.acts_on_dequeue() {
                let sojourn = (now - p.enqueue_time).as_secs_f64();
                let snap = self.snapshot();
                if self.aqm.on_dequeue(sojourn, &snap, now.as_secs_f64()) == DequeueVerdict::Drop {
                    let reason = self.aqm.early_drop_reason();
                    // leaves the queue without using the link
                    self.record.bytes_departed += p.size;
                    self.drop_packet(&p, reason, now);
                    continue;
                }
            }
            self.record.delays.push(DelaySample {
                time: now.as_secs_f64(),
                flow_id: p.flow_id,
                delay: (now - p.enqueue_time).as_secs_f64(),
            });
            let done = now + SimTime::transmission(p.size, self.rate);
            self.in_service = Some(InService { packet: p, start: now });
            self.push(done, Event::ServiceComplete);
            return;
        }
    }

    fn account_delivery(&mut self, bytes: u64, start: SimTime, end: SimTime) {
        let w = self.record.util_window;
        let (s, e) = (start.as_secs_f64(), end.as_secs_f64());
        let span = e - s;
        if span <= 0.0 {
            return;
        }
        let first = (s / w).floor() as usize;
        let last = (e / w).ceil() as usize;
        for idx in first..last.min(self.record.window_bytes.len()) {
            let lo = (idx as f64 * w).max(s);
            let hi = ((idx + 1) as f64 * w).min(e);
            if hi > lo {
                self.record.window_bytes[idx] += bytes as f64 * (hi - lo) / span;
            }
        }
    }

    fn on_service_complete(&mut self, now: SimTime) {
        let Some(done) = self.in_service.take() else {
            return;
        };
        let p = done.packet;
        self.record.bytes_departed += p.size;
        self.account_delivery(p.size, done.start, now);
        if p.kind == PacketKind::TcpData {
            let flow = &self.flows[p.flow_id as usize];
            let arrive = now + self.extra_delay + flow.one_way;
            let seg = Segment {
                flow_id: p.flow_id,
                seq: p.seq,
                size: p.size,
                sent_at: p.sent_at,
                retransmission: p.retransmission,
            };
            self.push(arrive, Event::DataDelivered(seg));
        }
        if !self.queue.is_empty() {
            let was_empty = false;
            self.start_service(now);
            self.note_backlog_change(was_empty, now);
        }
    }
}

/// Builds and runs a scenario with the built-in queue disciplines.
pub fn run(cfg: &ScenarioConfig) -> Result<RunRecord, SimError> {
    let sim = Simulation::new(cfg, &AqmRegistry::with_builtins())?;
    sim.run().map(|(record, _)| record)
}
