//! Persistent per-robot registers.
//!
//! A robot's entire memory between rounds lives in one [`RobotState`]. The
//! [`serialized_bits`] meter prices that memory in bits (identifier excluded,
//! integers at minimal width) so the engine can certify the logarithmic
//! space bound; [`state_bits_bound`] is the declared envelope.
//!
//! [`serialized_bits`]: RobotState::serialized_bits

use serde::{Deserialize, Serialize};

use super::bits::{bitlen, ceil_log2, BitString};

/// Robot role, also the `st` column of trace round lines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// Unsettled electorate member at the source.
    Active,
    /// Chain head: probes for empty nodes and reports the result.
    Master,
    /// Settled chain link: relays wake-ups and forwards reports.
    Follower,
    /// Terminally parked; never acts again.
    Idle,
}

impl Status {
    pub fn as_char(self) -> char {
        match self {
            Status::Active => 'A',
            Status::Master => 'M',
            Status::Follower => 'F',
            Status::Idle => 'I',
        }
    }
}

/// What a robot does once its signal transmission completes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfterSend {
    /// Transmission was a dead-end report; park forever.
    Idle,
    /// Depart for a new node and resume there.
    Depart(AfterArrive),
}

/// Bookkeeping flavor applied in the round after a final departure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AfterArrive {
    /// Departed through the probe cursor to an empty node; waits as master.
    AsMaster,
    /// Shifted one link down the chain; waits as forwarding follower.
    AsFollower,
}

/// Resume point for the next round. One variant per blocking position of the
/// protocol; every round the step function dispatches on this and the round
/// class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pc {
    /// Election sub-round `1..=6`, executed at successive 1-dedicated rounds.
    /// Parked electorate members keep cycling this counter too; only the
    /// sub-round-6 un-park branch applies to them.
    Bit(u8),
    /// Settled electorate observer at the source: decodes signals, counts
    /// probe departures, watches for the iteration boundary.
    Observe,
    /// Freshly elected follower, back at the source: decide between starting
    /// the wake relay and starting the termination wave.
    FollowerStart,
    /// Armed termination-wave relay; fires at the next 0-dedicated round.
    WaveOut,
    /// Termination-wave return leg; goes idle afterwards.
    WaveBack,
    /// Armed wake relay; fires at the next 2-dedicated round.
    RelayOut,
    /// Wake-relay return leg; arms the decoder afterwards.
    RelayBack,
    /// Follower with an armed decoder awaiting a signal from down the chain.
    Receive,
    /// Master with an active probe cursor; probes at 3-dedicated rounds.
    Probing,
    /// The round after a probe move: read `alone`, return home.
    ProbeCheck,
    /// Transmitting a signal, one bit per block.
    SendBits(AfterSend),
    /// Waiting for the first quiet 5-dedicated round to depart.
    AwaitDepart(AfterArrive),
    /// The round after a final departure: record the incoming port and the
    /// new chain registers.
    Arrive(AfterArrive),
    /// Settled master waiting for a wake-up or the termination wave.
    MasterWait,
    /// Settled forwarding follower waiting for a wake-up or the wave.
    FollowerWait,
    /// Terminal.
    Done,
}

/// Which register the next observed arrival port should be captured into.
///
/// Election moves learn their reverse port only from `arrived_via` one round
/// after moving, while the sub-round counter is parked between 1-dedicated
/// rounds; this register carries that half-open capture across the gap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Capture {
    None,
    /// Reverse port of a split move, consumed by the sub-round-3 return.
    Q,
    /// Reverse port of a park / candidate move, consumed on un-park or
    /// election.
    QPrime,
}

/// In-progress outgoing transmission.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SenderState {
    /// Bits not yet transmitted, channel-encoded, first bit next.
    pub bits: BitString,
    /// Port toward the receiver; every 1-bit is a visit through it.
    pub target: usize,
    /// True in the round after a 1-bit, while the return leg is owed.
    pub returning: bool,
}

/// Incoming-signal assembler fed by 4-dedicated increase flags.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DecoderState {
    /// False until the opening 1-bit fixes the block alignment.
    pub aligned: bool,
    /// Raw channel bits accumulated since alignment.
    pub raw: BitString,
}

impl DecoderState {
    pub fn reset(&mut self) {
        self.aligned = false;
        self.raw = BitString::new();
    }
}

/// Raw-bit capacity of a decoder on a graph with maximum degree `delta`:
/// longest legitimate message plus its terminating pair. Anything longer is
/// garbage and closes as malformed.
pub fn decoder_cap(delta: usize) -> usize {
    4 + 2 * ceil_log2(delta as u64 + 1) as usize + 2
}

/// Complete between-round memory of one robot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotState {
    /// Immutable label; excluded from the memory meter.
    pub id: u64,
    pub status: Status,
    pub pc: Pc,
    /// Still competing in the current election (false while parked).
    pub engage: bool,
    /// Was alone at the source in sub-round 1 of the current call.
    pub candidate: bool,
    /// An election concluded this iteration (set by the winner and by
    /// un-parking robots).
    pub election: bool,
    /// Election split register: 0 none, 1 moved on its own bit, 2 confirming
    /// counter-move.
    pub mv: u8,
    /// Current label bit index (call number) within the election.
    pub j: u32,
    /// Reverse port of the pending split move.
    pub q: Option<usize>,
    /// Reverse port of the pending park / candidate move, and later the
    /// decoded successor port carried to a new node.
    pub q_prime: Option<usize>,
    /// Port toward the next chain node; -1 only for a just-elected master
    /// that has not probed yet.
    pub child: i32,
    /// Port toward the previous chain node; `None` at the source.
    pub parent: Option<usize>,
    /// Follower has already shifted at least once (wake-ups reach it as
    /// pass-through relays rather than as the chain start).
    pub forward: bool,
    /// Master was elected or promoted this iteration and probes immediately.
    pub recent: bool,
    /// Probe cursor: next port to probe; == degree when exhausted.
    pub prt: usize,
    /// Last probe found an empty node.
    pub found: bool,
    /// Active is counting probe departures into `child` after a dead-end
    /// report.
    pub counting: bool,
    pub sender: Option<SenderState>,
    pub decoder: DecoderState,
    /// Completed consecutive rounds without own movement, saturating at 2.
    pub since_move: u8,
    /// No election has concluded yet (first winner becomes master).
    pub first_iter: bool,
    /// Pending arrival-port capture for the election registers.
    pub pending: Capture,
    /// Increase flag of the last concluded 1-dedicated round.
    pub last1_inc: bool,
    /// Decrease flag of the last concluded 1-dedicated round.
    pub last1_dec: bool,
    /// Increase flag of the last concluded 4-dedicated round.
    pub last4_inc: bool,
}

impl RobotState {
    /// State of a robot standing at the source before round 1.
    pub fn fresh(id: u64) -> Self {
        RobotState {
            id,
            status: Status::Active,
            pc: Pc::Bit(1),
            engage: true,
            candidate: false,
            election: false,
            mv: 0,
            j: 1,
            q: None,
            q_prime: None,
            child: 0,
            parent: None,
            forward: false,
            recent: false,
            prt: 0,
            found: false,
            counting: false,
            sender: None,
            decoder: DecoderState::default(),
            since_move: 2,
            first_iter: true,
            pending: Capture::None,
            last1_inc: false,
            last1_dec: false,
            last4_inc: false,
        }
    }

    /// Re-enter the election at the start of a new iteration (applied by
    /// settled electorate members when they detect the boundary departure).
    /// Chain registers (`child`, `parent`, `forward`) survive; everything
    /// election- and signal-related is cleared.
    pub fn reset_for_new_iteration(&mut self) {
        self.pc = Pc::Bit(1);
        self.engage = true;
        self.candidate = false;
        self.election = false;
        self.mv = 0;
        self.j = 1;
        self.q = None;
        self.q_prime = None;
        self.counting = false;
        self.decoder.reset();
        self.pending = Capture::None;
    }

    /// Memory footprint in bits under the canonical serialization: fields in
    /// declaration order, id excluded, integers at minimal width
    /// (`bitlen(value)`), options and booleans at one tag bit, enum
    /// discriminants at fixed narrow widths, buffers at their current length.
    /// True once the robot has parked forever.
    pub fn is_idle(&self) -> bool {
        self.status == Status::Idle
    }

    pub fn serialized_bits(&self) -> u64 {
        fn width(v: u64) -> u64 {
            bitlen(v) as u64
        }
        fn opt(v: Option<usize>) -> u64 {
            1 + v.map_or(0, |p| width(p as u64))
        }
        let mut bits = 0u64;
        bits += 2; // status
        bits += 5; // pc discriminant
        bits += match self.pc {
            Pc::Bit(_) => 3,
            Pc::SendBits(_) => 2,
            Pc::AwaitDepart(_) | Pc::Arrive(_) => 1,
            _ => 0,
        };
        bits += 3; // engage, candidate, election
        bits += 2; // mv
        bits += width(self.j as u64);
        bits += opt(self.q);
        bits += opt(self.q_prime);
        bits += width((self.child + 1) as u64);
        bits += opt(self.parent);
        bits += 2; // forward, recent
        bits += width(self.prt as u64);
        bits += 2; // found, counting
        bits += 1 + self.sender.as_ref().map_or(0, |s| {
            s.bits.len() as u64 + width(s.target as u64) + 1
        });
        bits += 1 + self.decoder.raw.len() as u64; // aligned + buffer
        bits += 2; // since_move
        bits += 1; // first_iter
        bits += 2; // pending
        bits += 3; // last1_inc, last1_dec, last4_inc
        bits
    }
}

/// Declared memory envelope coefficients: every reachable robot state
/// serializes within `A * ceil_log2(L+2) + B * ceil_log2(delta+2) + C` bits
/// for label bound `L` and maximum degree `delta`.
pub const STATE_BITS_L_COEFF: u64 = 2;
pub const STATE_BITS_DELTA_COEFF: u64 = 12;
pub const STATE_BITS_CONST: u64 = 48;

/// The declared per-robot memory envelope for a given run scale.
pub fn state_bits_bound(l: u64, delta: u64) -> u64 {
    STATE_BITS_L_COEFF * ceil_log2(l + 2) as u64
        + STATE_BITS_DELTA_COEFF * ceil_log2(delta + 2) as u64
        + STATE_BITS_CONST
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::message::{compose_message, MessageKind};

    #[test]
    fn fresh_state_is_small() {
        let s = RobotState::fresh(7);
        assert!(s.serialized_bits() < 64, "fresh state {} bits", s.serialized_bits());
    }

    #[test]
    fn fresh_state_fits_declared_bound_at_minimal_scale() {
        let s = RobotState::fresh(0);
        assert!(s.serialized_bits() <= state_bits_bound(1, 1));
    }

    #[test]
    fn loaded_state_fits_declared_bound() {
        // A deliberately heavy but reachable shape: follower mid-transmission
        // at scale L=24, delta=11.
        let mut s = RobotState::fresh(24);
        s.status = Status::Follower;
        s.pc = Pc::SendBits(AfterSend::Depart(AfterArrive::AsFollower));
        s.j = 6;
        s.q_prime = Some(10);
        s.child = 10;
        s.parent = Some(10);
        s.forward = true;
        s.prt = 11;
        s.sender = Some(SenderState {
            bits: compose_message(MessageKind::Forward(10)).unwrap(),
            target: 10,
            returning: true,
        });
        assert!(
            s.serialized_bits() <= state_bits_bound(24, 11),
            "{} > {}",
            s.serialized_bits(),
            state_bits_bound(24, 11)
        );
    }

    #[test]
    fn oversized_decoder_buffer_breaks_the_bound() {
        // Negative control for the memory meter: an unbounded buffer must be
        // visible to it.
        let mut s = RobotState::fresh(3);
        s.decoder.aligned = true;
        for _ in 0..1000 {
            s.decoder.raw.push(true);
        }
        assert!(s.serialized_bits() > state_bits_bound(24, 11));
    }

    #[test]
    fn decoder_cap_covers_longest_legitimate_message() {
        for delta in 1usize..=64 {
            let longest_port = delta.saturating_sub(1) as u64;
            let msg = compose_message(MessageKind::FoundEmpty(longest_port as usize)).unwrap();
            assert!(
                msg.len() + 2 <= decoder_cap(delta),
                "delta={delta} message {} + pair exceeds cap {}",
                msg.len(),
                decoder_cap(delta)
            );
        }
    }

    #[test]
    fn iteration_reset_clears_election_but_keeps_chain_registers() {
        let mut s = RobotState::fresh(9);
        s.j = 4;
        s.engage = false;
        s.candidate = true;
        s.counting = true;
        s.child = 2;
        s.parent = None;
        s.first_iter = false;
        s.decoder.aligned = true;
        s.decoder.raw.push(true);
        s.reset_for_new_iteration();
        assert_eq!(s.j, 1);
        assert!(s.engage);
        assert!(!s.candidate);
        assert!(!s.counting);
        assert!(!s.decoder.aligned);
        assert_eq!(s.child, 2);
        assert!(!s.first_iter);
        assert_eq!(s.pc, Pc::Bit(1));
    }
}
