use super::{
    cubic_window, AckInfo, FlavorKind, RangeSet, Segment, TcpError, TcpFlavor,
    DEFAULT_INITIAL_WINDOW, DEFAULT_MSS,
};
use crate::time::SimTime;

/// Held segments above a hole needed to declare it lost.
const DUP_THRESH: u64 = 3;

/// Most segments one ACK may add to the window.
const ABC_LIMIT: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    SlowStart,
    CongestionAvoidance,
    Recovery,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SenderConfig {
    pub mss: u64,
    pub flavor: TcpFlavor,
    /// Propagation round-trip time, seconds.
    pub rtt0: f64,
    /// Initial window in segments.
    pub initial_window: u32,
    /// Initial slow-start threshold in segments; unbounded when `None`.
    pub initial_ssthresh: Option<u32>,
    pub rto: SimTime,
}

impl SenderConfig {
    pub fn new(flavor: TcpFlavor, rtt0: f64) -> Self {
        SenderConfig {
            mss: DEFAULT_MSS,
            flavor,
            rtt0,
            initial_window: DEFAULT_INITIAL_WINDOW,
            initial_ssthresh: None,
            rto: SimTime::from_secs_f64(4.0 * rtt0),
        }
    }
}

/// One multiplicative decrease.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decrease {
    pub flow_id: u32,
    pub time: SimTime,
    pub cwnd_before: f64,
    pub cwnd_after: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AckResponse {
    pub decrease: Option<Decrease>,
    /// Bytes the window currently allows beyond the flight.
    pub permission: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct CubicEpoch {
    start: SimTime,
    w_max: f64,
    beta: f64,
}

/// Bulk-transfer TCP sender with a SACK scoreboard.
///
/// Every transmitted copy of a segment is in exactly one of four states:
/// in flight, held by the receiver (SACKed), declared lost, or cumulatively
/// acknowledged. Holes below `lost_boundary` are declared lost; those below
/// `rtx_next` have been sent again.
#[derive(Debug, Clone)]
pub struct TcpSender {
    pub flow_id: u32,
    config: SenderConfig,
    cwnd: f64,
    ssthresh: f64,
    /// Copies in flight, in segments.
    flight: u64,
    phase: Phase,
    last_decrease_time: Option<SimTime>,
    w_max: f64,
    epoch: Option<CubicEpoch>,
    snd_una: u64,
    next_seq: u64,
    scoreboard: RangeSet,
    lost_boundary: u64,
    rtx_next: u64,
    dup_ack_count: u32,
    /// Loss episode in progress until this sequence is acknowledged.
    recovery_end_seq: Option<u64>,
    srtt: f64,
    rto_deadline: Option<SimTime>,
    emitted: u64,
    acked: u64,
    lost: u64,
    timeouts: u64,
    retransmissions: u64,
}

impl TcpSender {
    pub fn new(flow_id: u32, config: SenderConfig) -> Self {
        let mss = config.mss as f64;
        let ssthresh = config
            .initial_ssthresh
            .map_or(f64::INFINITY, |s| s as f64 * mss);
        let cwnd = (config.initial_window as f64 * mss).max(2.0 * mss);
        let phase = if cwnd >= ssthresh {
            Phase::CongestionAvoidance
        } else {
            Phase::SlowStart
        };
        TcpSender {
            flow_id,
            cwnd,
            ssthresh,
            flight: 0,
            phase,
            last_decrease_time: None,
            w_max: cwnd,
            epoch: None,
            snd_una: 0,
            next_seq: 0,
            scoreboard: RangeSet::new(),
            lost_boundary: 0,
            rtx_next: 0,
            dup_ack_count: 0,
            recovery_end_seq: None,
            srtt: config.rtt0,
            rto_deadline: None,
            emitted: 0,
            acked: 0,
            lost: 0,
            timeouts: 0,
            retransmissions: 0,
            config,
        }
    }

    pub fn config(&self) -> &SenderConfig {
        &self.config
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> f64 {
        self.ssthresh
    }

    /// Bytes in flight.
    pub fn flight(&self) -> u64 {
        self.flight * self.config.mss
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn srtt(&self) -> f64 {
        self.srtt
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    pub fn snd_una(&self) -> u64 {
        self.snd_una
    }

    pub fn next_seq(&self) -> u64 {
        self.next_seq
    }

    pub fn sacked_segments(&self) -> u64 {
        self.scoreboard.len()
    }

    pub fn dup_ack_count(&self) -> u32 {
        self.dup_ack_count
    }

    pub fn recovery_end_seq(&self) -> Option<u64> {
        self.recovery_end_seq
    }

    pub fn last_decrease_time(&self) -> Option<SimTime> {
        self.last_decrease_time
    }

    pub fn rto_deadline(&self) -> Option<SimTime> {
        self.rto_deadline
    }

    pub fn timeouts(&self) -> u64 {
        self.timeouts
    }

    pub fn retransmissions(&self) -> u64 {
        self.retransmissions
    }

    fn mss(&self) -> f64 {
        self.config.mss as f64
    }

    fn min_cwnd(&self) -> f64 {
        2.0 * self.mss()
    }

    /// Bytes the window allows beyond the current flight, in whole segments.
    pub fn send_permission(&self) -> u64 {
        let room = self.cwnd - self.flight() as f64;
        if room < self.mss() {
            return 0;
        }
        (room / self.mss()).floor() as u64 * self.config.mss
    }

    /// Lost holes not yet sent again.
    fn lost_pending_in(&self, start: u64, end: u64) -> u64 {
        let lo = start.max(self.rtx_next);
        let hi = end.min(self.lost_boundary);
        if hi <= lo {
            return 0;
        }
        (hi - lo) - self.scoreboard.count_in(lo, hi)
    }

    /// Multiplicative decrease, at most once per smoothed RTT.
    pub fn on_loss(&mut self, now: SimTime) -> Option<Decrease> {
        if let Some(last) = self.last_decrease_time {
            if now.saturating_sub(last).as_secs_f64() < self.srtt {
                return None;
            }
        }
        let before = self.cwnd;
        self.w_max = before;
        self.cwnd = (self.config.flavor.beta * before).max(self.min_cwnd());
        self.ssthresh = self.cwnd;
        self.last_decrease_time = Some(now);
        self.epoch = Some(CubicEpoch {
            start: now,
            w_max: before,
            beta: self.cwnd / before,
        });
        Some(Decrease {
            flow_id: self.flow_id,
            time: now,
            cwnd_before: before,
            cwnd_after: self.cwnd,
        })
    }

    fn start_epoch(&mut self, now: SimTime) {
        let w_max = self.w_max.max(self.cwnd);
        self.epoch = Some(CubicEpoch {
            start: now,
            w_max,
            beta: self.cwnd / w_max,
        });
    }

    fn grow(&mut self, acked_segments: u64, now: SimTime) {
        let mss = self.mss();
        match self.phase {
            Phase::Recovery => {}
            Phase::SlowStart => {
                self.cwnd += acked_segments as f64 * mss;
                if self.cwnd >= self.ssthresh {
                    self.phase = Phase::CongestionAvoidance;
                    self.start_epoch(now);
                }
            }
            Phase::CongestionAvoidance => {
                let reno = self.cwnd + mss * mss / self.cwnd;
                self.cwnd = match self.config.flavor.kind {
                    FlavorKind::Reno => reno,
                    FlavorKind::Cubic => {
                        if self.epoch.is_none() {
                            self.start_epoch(now);
                        }
                        let epoch = self.epoch.expect("epoch set above");
                        let t = now.saturating_sub(epoch.start).as_secs_f64();
                        let target = cubic_window(
                            t,
                            epoch.w_max,
                            epoch.beta,
                            self.config.flavor.cubic_scale,
                            self.config.mss,
                        );
                        // never faster than slow start, never slower than Reno
                        let capped = target.min(self.cwnd + acked_segments as f64 * mss);
                        reno.max(capped)
                    }
                };
            }
        }
    }

    fn audit_error(&self, detail: impl Into<String>) -> TcpError {
        TcpError::Audit {
            flow: self.flow_id,
            detail: detail.into(),
        }
    }

    pub fn on_ack(&mut self, ack: &AckInfo, now: SimTime) -> Result<AckResponse, TcpError> {
        if ack.flow_id != self.flow_id {
            return Err(TcpError::WrongFlow {
                flow: self.flow_id,
                other: ack.flow_id,
            });
        }
        let cum = ack.cumulative_ack_seq;
        if cum > self.next_seq {
            return Err(TcpError::AckBeyondSent {
                flow: self.flow_id,
                ack: cum,
                high: self.next_seq,
            });
        }
        let mut resp = AckResponse::default();
        if cum < self.snd_una {
            resp.permission = self.send_permission();
            return Ok(resp);
        }
        let advanced = cum - self.snd_una;
        if advanced > 0 {
            let sample = now.saturating_sub(ack.echo).as_secs_f64();
            if sample > 0.0 {
                self.srtt = 0.875 * self.srtt + 0.125 * sample;
            }
            // each newly covered segment hands one copy to the acked state
            let held = self.scoreboard.count_in(self.snd_una, cum);
            let pending = self.lost_pending_in(self.snd_una, cum);
            self.flight -= advanced - held - pending;
            self.lost -= pending;
            self.acked += advanced;
            self.scoreboard.remove_below(cum);
            self.snd_una = cum;
            self.rtx_next = self.rtx_next.max(cum);
            self.lost_boundary = self.lost_boundary.max(cum);
            self.dup_ack_count = 0;
        } else {
            self.dup_ack_count += 1;
        }

        if let Some((start, end)) = ack.sack_block {
            if end > self.next_seq {
                return Err(self.audit_error(format!("SACK block [{start}, {end}) beyond sent data")));
            }
            for (s, e) in self.scoreboard.insert_range(start.max(cum), end) {
                // these were holes until now, so every one in the lost window was pending
                let pending = e.min(self.lost_boundary).saturating_sub(s.max(self.rtx_next));
                self.lost -= pending;
                self.flight -= (e - s) - pending;
            }
        }
        if self.scoreboard.len() != ack.sacked_segments {
            return Err(self.audit_error(format!(
                "scoreboard holds {} segments, receiver reports {}",
                self.scoreboard.len(),
                ack.sacked_segments
            )));
        }

        if let Some(boundary) = self.scoreboard.kth_highest(DUP_THRESH) {
            if boundary > self.lost_boundary {
                let holes = (boundary - self.lost_boundary)
                    - self.scoreboard.count_in(self.lost_boundary, boundary);
                self.flight -= holes;
                self.lost += holes;
                self.lost_boundary = boundary;
                if holes > 0 && self.recovery_end_seq.is_none() {
                    resp.decrease = self.on_loss(now);
                    self.phase = Phase::Recovery;
                    self.recovery_end_seq = Some(self.next_seq);
                }
            }
        }

        if let Some(end) = self.recovery_end_seq {
            if self.snd_una >= end {
                self.recovery_end_seq = None;
                if self.phase == Phase::Recovery {
                    self.phase = Phase::CongestionAvoidance;
                }
            }
        }
        if advanced > 0 {
            self.grow(advanced.min(ABC_LIMIT), now);
        }

        if self.snd_una >= self.next_seq {
            self.rto_deadline = None;
        } else if advanced > 0 {
            self.rto_deadline = Some(now + self.config.rto);
        }
        resp.permission = self.send_permission();
        Ok(resp)
    }

    /// Sends as many segments as the window allows: lost holes first, then
    /// new data.
    pub fn emit(&mut self, now: SimTime) -> Vec<Segment> {
        let count = self.send_permission() / self.config.mss;
        let mut out = Vec::with_capacity(count as usize);
        for _ in 0..count {
            let (seq, retransmission) = match self.scoreboard.next_gap(self.rtx_next, self.lost_boundary) {
                Some(hole) => {
                    self.rtx_next = hole + 1;
                    self.retransmissions += 1;
                    (hole, true)
                }
                None => {
                    self.rtx_next = self.rtx_next.max(self.lost_boundary);
                    self.next_seq += 1;
                    (self.next_seq - 1, false)
                }
            };
            self.flight += 1;
            self.emitted += 1;
            out.push(Segment {
                flow_id: self.flow_id,
                seq,
                size: self.config.mss,
                sent_at: now,
                retransmission,
            });
        }
        if !out.is_empty() && self.rto_deadline.is_none() {
            self.rto_deadline = Some(now + self.config.rto);
        }
        out
    }

    /// Retransmission timeout. Returns false for stale timers.
    ///
    /// Every copy in flight is declared lost and the window restarts from
    /// the floor in slow start; the scoreboard is kept.
    pub fn on_rto(&mut self, now: SimTime) -> bool {
        match self.rto_deadline {
            Some(deadline) if deadline <= now => {}
            _ => return false,
        }
        if self.snd_una >= self.next_seq {
            self.rto_deadline = None;
            return false;
        }
        self.timeouts += 1;
        self.lost += self.flight;
        self.flight = 0;
        self.rtx_next = self.snd_una;
        self.lost_boundary = self.next_seq;
        self.ssthresh = (self.config.flavor.beta * self.cwnd).max(self.min_cwnd());
        self.w_max = self.cwnd;
        self.cwnd = self.min_cwnd();
        self.epoch = None;
        self.phase = Phase::SlowStart;
        self.recovery_end_seq = Some(self.next_seq);
        self.last_decrease_time = Some(now);
        self.dup_ack_count = 0;
        self.rto_deadline = Some(now + self.config.rto);
        true
    }

    /// Checks the flight size two independent ways: from the copy counters
    /// and from the sequence space.
    pub fn audit(&self) -> Result<(), TcpError> {
        let sacked = self.scoreboard.len();
        if self.emitted != self.flight + sacked + self.lost + self.acked {
            return Err(self.audit_error(format!(
                "emitted {} != flight {} + held {} + lost {} + acked {}",
                self.emitted, self.flight, sacked, self.lost, self.acked
            )));
        }
        if !(self.snd_una <= self.rtx_next && self.rtx_next <= self.lost_boundary.max(self.rtx_next)) {
            return Err(self.audit_error("retransmission pointer below the cumulative ACK"));
        }
        let outstanding = self.next_seq - self.snd_una;
        let pending = self.lost_pending_in(self.snd_una, self.next_seq);
        if outstanding < sacked + pending || self.flight != outstanding - sacked - pending {
            return Err(self.audit_error(format!(
                "flight {} disagrees with [{}, {}) minus {} held and {} lost",
                self.flight, self.snd_una, self.next_seq, sacked, pending
            )));
        }
        if self.cwnd < self.min_cwnd() {
            return Err(self.audit_error(format!("cwnd {} below floor", self.cwnd)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tcp::TcpReceiver;

    const MSS: u64 = 1500;
    const M: f64 = MSS as f64;

    fn sender(flavor: TcpFlavor) -> TcpSender {
        TcpSender::new(1, SenderConfig::new(flavor, 0.1))
    }

    fn ack(cum: u64, held: u64, block: Option<(u64, u64)>, echo_ms: u64) -> AckInfo {
        AckInfo {
            flow_id: 1,
            cumulative_ack_seq: cum,
            newly_acked_bytes: 0,
            is_duplicate: block.is_some(),
            sacked_segments: held,
            sack_block: block,
            echo: SimTime::from_millis(echo_ms),
        }
    }

    fn ms(v: u64) -> SimTime {
        SimTime::from_millis(v)
    }

    #[test]
    fn flow_start_emits_initial_window() {
        let mut s = sender(TcpFlavor::reno());
        let burst = s.emit(SimTime::ZERO);
        assert_eq!(burst.len(), 10);
        assert_eq!(s.flight(), 10 * MSS);
        assert!(s.emit(SimTime::ZERO).is_empty());
        assert_eq!(burst.iter().map(|p| p.seq).collect::<Vec<_>>(), (0..10).collect::<Vec<_>>());
        s.audit().unwrap();
    }

    #[test]
    fn partial_window_emits_the_difference() {
        let mut cfg = SenderConfig::new(TcpFlavor::reno(), 0.1);
        cfg.initial_ssthresh = Some(10);
        let mut s = TcpSender::new(1, cfg);
        s.emit(SimTime::ZERO);
        s.on_ack(&ack(2, 0, None, 0), ms(100)).unwrap();
        // cwnd is 10 segments plus a sliver, flight 8
        assert_eq!(s.flight(), 8 * MSS);
        assert_eq!(s.emit(ms(100)).len(), 2);
    }

    #[test]
    fn slow_start_adds_acked_bytes() {
        let mut s = sender(TcpFlavor::reno());
        s.emit(SimTime::ZERO);
        let r = s.on_ack(&ack(2, 0, None, 0), ms(100)).unwrap();
        assert_eq!(s.cwnd(), 12.0 * M);
        assert_eq!(r.permission, 4 * MSS);
    }

    #[test]
    fn one_ack_adds_at_most_two_segments() {
        let mut s = sender(TcpFlavor::reno());
        s.emit(SimTime::ZERO);
        s.on_ack(&ack(10, 0, None, 0), ms(100)).unwrap();
        assert_eq!(s.cwnd(), 12.0 * M);
    }

    #[test]
    fn reno_congestion_avoidance_increment() {
        let mut cfg = SenderConfig::new(TcpFlavor::reno(), 0.1);
        cfg.initial_window = 100;
        cfg.initial_ssthresh = Some(100);
        let mut s = TcpSender::new(1, cfg);
        assert_eq!(s.phase(), Phase::CongestionAvoidance);
        s.emit(SimTime::ZERO);
        s.on_ack(&ack(1, 0, None, 0), ms(100)).unwrap();
        assert!((s.cwnd() - (100.0 * M + M / 100.0)).abs() < 1e-9);
    }

    #[test]
    fn decrease_by_beta() {
        for (flavor, expected) in [(TcpFlavor::reno(), 50.0), (TcpFlavor::cubic(), 70.0)] {
            let mut cfg = SenderConfig::new(flavor, 0.1);
            cfg.initial_window = 100;
            let mut s = TcpSender::new(1, cfg);
            let d = s.on_loss(ms(1000)).unwrap();
            assert_eq!(d.cwnd_before, 100.0 * M);
            assert!((s.cwnd() - expected * M).abs() < 1e-9);
            assert_eq!(s.ssthresh(), s.cwnd());
            assert_eq!(s.w_max(), 100.0 * M);
        }
    }

    #[test]
    fn second_loss_within_rtt_is_ignored() {
        let mut cfg = SenderConfig::new(TcpFlavor::reno(), 0.1);
        cfg.initial_window = 100;
        let mut s = TcpSender::new(1, cfg);
        s.on_loss(ms(1000)).unwrap();
        let after_first = s.cwnd();
        assert_eq!(s.on_loss(ms(1050)), None);
        assert_eq!(s.cwnd(), after_first);
        assert!(s.on_loss(ms(1100)).is_some());
    }

    #[test]
    fn cwnd_never_below_two_segments() {
        let mut s = sender(TcpFlavor::reno());
        for i in 0..20 {
            s.on_loss(ms(1000 * i));
        }
        assert_eq!(s.cwnd(), 2.0 * M);
    }

    #[test]
    fn third_duplicate_ack_triggers_fast_retransmit() {
        let mut s = sender(TcpFlavor::cubic());
        s.emit(SimTime::ZERO); // 0..10, segment 0 lost
        assert!(s.on_ack(&ack(0, 1, Some((1, 2)), 0), ms(100)).unwrap().decrease.is_none());
        assert!(s.on_ack(&ack(0, 2, Some((1, 3)), 0), ms(100)).unwrap().decrease.is_none());
        assert_eq!(s.phase(), Phase::SlowStart);
        let r = s.on_ack(&ack(0, 3, Some((1, 4)), 0), ms(100)).unwrap();
        assert_eq!(s.dup_ack_count(), 3);
        assert_eq!(s.phase(), Phase::Recovery);
        let d = r.decrease.unwrap();
        assert!((d.cwnd_after / d.cwnd_before - 0.7).abs() < 1e-12);
        s.audit().unwrap();
        // flight: 10 sent - 3 held - 1 lost = 6 < cwnd 7
        let out = s.emit(ms(100));
        assert_eq!(out[0].seq, 0);
        assert!(out[0].retransmission);
        s.audit().unwrap();
        assert_eq!(s.recovery_end_seq(), Some(10));
        s.on_ack(&ack(10, 0, None, 100), ms(200)).unwrap();
        assert_eq!(s.phase(), Phase::CongestionAvoidance);
        assert_eq!(s.recovery_end_seq(), None);
        s.audit().unwrap();
    }

    /// Drives a sender against a receiver over a lossless path, dropping the
    /// data segments listed in `drop`.
    fn exchange(s: &mut TcpSender, rx: &mut TcpReceiver, drop: &[u64], now: SimTime) -> Vec<Decrease> {
        let mut decreases = Vec::new();
        let mut wire = s.emit(now);
        let mut rounds = 0;
        let mut dropped: Vec<u64> = drop.to_vec();
        while !wire.is_empty() && s.snd_una() < 200 && rounds < 10_000 {
            rounds += 1;
            let seg = wire.remove(0);
            if let Some(i) = dropped.iter().position(|&d| d == seg.seq && !seg.retransmission) {
                dropped.remove(i);
                continue;
            }
            let t = now + SimTime::from_millis(rounds);
            let act = rx.on_data(&seg, t);
            let ack = act.ack.or_else(|| rx.on_delack_timer(t + SimTime::from_millis(40)));
            if let Some(a) = ack {
                let r = s.on_ack(&a, t).unwrap();
                s.audit().unwrap();
                decreases.extend(r.decrease);
                wire.extend(s.emit(t));
            }
        }
        decreases
    }

    #[test]
    fn several_holes_recovered_in_one_episode() {
        let mut cfg = SenderConfig::new(TcpFlavor::reno(), 0.1);
        cfg.initial_window = 40;
        let mut s = TcpSender::new(1, cfg);
        let mut rx = TcpReceiver::new(1, MSS, SimTime::from_millis(40));
        let decreases = exchange(&mut s, &mut rx, &[3, 7, 8, 20], SimTime::ZERO);
        assert_eq!(decreases.len(), 1);
        assert_eq!(s.timeouts(), 0);
        assert_eq!(s.retransmissions(), 4);
        assert!(s.snd_una() >= 200);
        assert_eq!(rx.next_expected_seq(), s.snd_una());
    }

    #[test]
    fn ack_for_unsent_data_is_an_error() {
        let mut s = sender(TcpFlavor::reno());
        s.emit(SimTime::ZERO);
        let err = s.on_ack(&ack(11, 0, None, 0), ms(100)).unwrap_err();
        assert_eq!(err, TcpError::AckBeyondSent { flow: 1, ack: 11, high: 10 });
    }

    #[test]
    fn scoreboard_mismatch_is_an_audit_failure() {
        let mut s = sender(TcpFlavor::reno());
        s.emit(SimTime::ZERO);
        let err = s.on_ack(&ack(0, 2, Some((4, 5)), 0), ms(100)).unwrap_err();
        assert!(matches!(err, TcpError::Audit { .. }));
    }

    #[test]
    fn timeout_resends_from_first_unacked() {
        let mut s = sender(TcpFlavor::reno());
        s.emit(SimTime::ZERO);
        let deadline = s.rto_deadline().unwrap();
        assert_eq!(deadline, ms(400));
        assert!(!s.on_rto(ms(399)));
        assert!(s.on_rto(deadline));
        assert_eq!(s.cwnd(), 2.0 * M);
        assert_eq!(s.flight(), 0);
        s.audit().unwrap();
        let resent = s.emit(deadline);
        assert_eq!(resent.iter().map(|p| p.seq).collect::<Vec<_>>(), vec![0, 1]);
        assert!(resent.iter().all(|p| p.retransmission));
        s.audit().unwrap();
        // the originals were only delayed; everything is acknowledged
        s.on_ack(&ack(10, 0, None, 400), ms(500)).unwrap();
        s.audit().unwrap();
        assert_eq!(s.snd_una(), 10);
        assert_eq!(s.flight(), 0);
    }

    #[test]
    fn cubic_growth_is_capped_per_ack() {
        let mut cfg = SenderConfig::new(TcpFlavor::cubic(), 0.1);
        cfg.initial_window = 100;
        cfg.initial_ssthresh = Some(100);
        let mut s = TcpSender::new(1, cfg);
        s.on_loss(SimTime::ZERO).unwrap();
        s.phase = Phase::CongestionAvoidance;
        s.emit(SimTime::ZERO);
        let k = crate::tcp::cubic_k(100.0, 0.7, 0.4);
        s.on_ack(&ack(2, 0, None, 0), SimTime::from_secs_f64(k)).unwrap();
        // the curve is back at 100 segments, but one ACK adds at most the
        // two segments it covers
        assert!((s.cwnd() - 72.0 * M).abs() < 1e-6);
    }
}

#[cfg(test)]
mod fuzz {
    use super::*;
    use crate::tcp::TcpReceiver;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::VecDeque;

    /// In-order path with random loss and timeouts that fire while copies
    /// are still in transit.
    #[test]
    fn random_loss_keeps_books_balanced() {
        for seed in 0..500u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cfg = SenderConfig::new(TcpFlavor::cubic(), 0.1);
            cfg.initial_window = rng.gen_range(2..30);
            let mut s = TcpSender::new(1, cfg);
            let mut rx = TcpReceiver::new(1, 1500, SimTime::from_millis(40));
            let mut t = SimTime::ZERO;
            let mut wire: VecDeque<Segment> = s.emit(t).into();
            let p = rng.gen_range(0.0..0.3);
            let check = |s: &TcpSender| s.audit().unwrap_or_else(|e| panic!("seed {seed}: {e}"));
            for _ in 0..3000 {
                t = t + SimTime::from_millis(1);
                let early = rng.gen_bool(0.01);
                if wire.is_empty() || early {
                    if let Some(d) = s.rto_deadline() {
                        t = t.max(d);
                        if s.on_rto(t) {
                            check(&s);
                            wire.extend(s.emit(t));
                            check(&s);
                        }
                    }
                }
                let Some(seg) = wire.pop_front() else { continue };
                if rng.gen_bool(p) {
                    continue;
                }
                let act = rx.on_data(&seg, t);
                if let Some(a) = act.ack.or_else(|| rx.on_delack_timer(t + SimTime::from_millis(40))) {
                    s.on_ack(&a, t).unwrap();
                    check(&s);
                    wire.extend(s.emit(t));
                    check(&s);
                }
            }
            assert!(s.snd_una() > 0, "seed {seed}: no progress");
        }
    }
}
