//! The per-round robot step function.
//!
//! Each round every robot receives one [`Observation`] about its current node
//! and answers with one [`Action`]. The function is deterministic and sees no
//! global state, so the engine may evaluate robots in any order against the
//! same round snapshot.
//!
//! Round classes cycle with period 6 (`class = round mod 6`); class 1 hosts
//! election moves, class 2 wake relays, class 3 probes (and relay returns),
//! class 4 signal bits (and probe returns), class 5 final departures (and bit
//! returns), class 0 the termination wave. Flags observed in round `t`
//! describe movements of round `t - 1`, which is why handlers compare against
//! [`Observation::event_class`].

use thiserror::Error;

use super::bits::BitString;
use super::message::{compose_message, parse_message, MessageKind};
use super::state::{AfterArrive, AfterSend, Capture, Pc, RobotState, SenderState, Status};

/// Everything a robot learns at the start of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Observation {
    /// Current round number, starting at 1.
    pub round: u64,
    /// Exactly one robot (the observer) occupies the current node.
    pub alone: bool,
    /// More robots entered than left the current node last round. Always
    /// false for a robot that itself moved last round.
    pub increase: bool,
    /// More robots left than entered the current node last round. Always
    /// false for a robot that itself moved last round.
    pub decrease: bool,
    /// Degree of the current node.
    pub degree: usize,
    /// Port through which the robot entered, if it moved last round.
    pub arrived_via: Option<usize>,
}

impl Observation {
    /// Dedicated class of the current round.
    pub fn class(&self) -> u8 {
        (self.round % 6) as u8
    }

    /// Dedicated class of the round the increase/decrease flags describe.
    pub fn event_class(&self) -> u8 {
        (self.round.saturating_sub(1) % 6) as u8
    }
}

/// A robot's answer for the round.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Stay,
    /// Traverse the edge behind this port of the current node.
    Move(usize),
}

impl Action {
    pub fn is_move(&self) -> bool {
        matches!(self, Action::Move(_))
    }
}

/// Fixed per-run parameters the engine hands every robot.
#[derive(Debug, Clone, Copy)]
pub struct StepContext {
    /// Raw-bit capacity of signal decoders, sized from the maximum degree.
    pub decoder_cap: usize,
}

/// Noteworthy transitions surfaced for traces and tests; none of these feed
/// back into protocol behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RobotEvent {
    /// An election concluded with this robot as the winner; `calls` is the
    /// number of election calls the election took.
    Elected { master: bool, calls: u32 },
    /// This robot's signal decoder closed with the given message.
    Decoded(MessageKind),
    /// A settled electorate member saw the boundary departure and re-entered
    /// the election.
    IterationDetected,
    /// Terminal transition: the robot parked forever.
    WentIdle,
}

/// Unreachable-on-valid-input conditions. The engine aborts the run and
/// reports which robot tripped where.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ProtocolViolation {
    #[error("probe cursor exhausted with no empty node and no parent to report to")]
    ExhaustedNoParent,
    #[error("malformed signal delivered to a follower decoder")]
    MalformedSignal,
    #[error("return leg executed without an arrival port")]
    MissingArrival,
    #[error("chain move requested before the chain port was set")]
    NegativeChild,
    #[error("required register {0} is unset")]
    MissingRegister(&'static str),
    /// Raised by the engine when an answered move does not fit the node.
    #[error("move through port {port} at a node of degree {degree}")]
    PortOutOfRange { port: usize, degree: usize },
}

/// Advance one robot by one round.
pub fn robot_step(
    st: &mut RobotState,
    obs: &Observation,
    ctx: &StepContext,
) -> Result<(Action, Vec<RobotEvent>), ProtocolViolation> {
    if st.status == Status::Idle {
        return Ok((Action::Stay, Vec::new()));
    }
    let mut events = Vec::new();

    // Capture the reverse port of a pending election move.
    if let Some(p) = obs.arrived_via {
        match st.pending {
            Capture::Q => st.q = Some(p),
            Capture::QPrime => st.q_prime = Some(p),
            Capture::None => {}
        }
        st.pending = Capture::None;
    }

    // Refresh the cross-block flag registers.
    if obs.event_class() == 1 {
        st.last1_inc = obs.increase;
        st.last1_dec = obs.decrease;
    }
    if obs.event_class() == 4 {
        st.last4_inc = obs.increase;
    }

    // A robot alone before anything has happened has nobody to disperse from.
    if obs.round == 1 && obs.alone && st.first_iter && st.pc == Pc::Bit(1) {
        st.status = Status::Idle;
        st.pc = Pc::Done;
        st.since_move = 2;
        events.push(RobotEvent::WentIdle);
        return Ok((Action::Stay, events));
    }

    let action = dispatch(st, obs, ctx, &mut events)?;
    if action.is_move() {
        st.since_move = 0;
    } else {
        st.since_move = (st.since_move + 1).min(2);
    }
    Ok((action, events))
}

/// Resolve the round's action from the resume point. Loops only for the
/// same-round hand-offs (wake-up into an immediate probe, decoder closure
/// into an immediate departure, election return into the wave decision).
fn dispatch(
    st: &mut RobotState,
    obs: &Observation,
    ctx: &StepContext,
    events: &mut Vec<RobotEvent>,
) -> Result<Action, ProtocolViolation> {
    loop {
        match st.pc {
            Pc::Bit(i) => return election(st, obs, i, events),
            Pc::Observe => return observe(st, obs, ctx, events),
            Pc::FollowerStart => {
                if obs.alone {
                    // Nobody left to place: start the termination wave.
                    st.pc = Pc::WaveOut;
                    continue;
                }
                st.pc = Pc::RelayBack;
                return Ok(Action::Move(child_port(st)?));
            }
            Pc::WaveOut => {
                if obs.class() == 0 {
                    st.pc = Pc::WaveBack;
                    return Ok(Action::Move(child_port(st)?));
                }
                return Ok(Action::Stay);
            }
            Pc::WaveBack => {
                let back = arrival(obs)?;
                st.status = Status::Idle;
                st.pc = Pc::Done;
                events.push(RobotEvent::WentIdle);
                return Ok(Action::Move(back));
            }
            Pc::RelayOut => {
                if obs.class() == 2 {
                    st.pc = Pc::RelayBack;
                    return Ok(Action::Move(child_port(st)?));
                }
                return Ok(Action::Stay);
            }
            Pc::RelayBack => {
                let back = arrival(obs)?;
                st.decoder.reset();
                st.pc = Pc::Receive;
                return Ok(Action::Move(back));
            }
            Pc::Receive => {
                if let Some(kind) = decoder_feed(st, obs, ctx) {
                    events.push(RobotEvent::Decoded(kind));
                    match kind {
                        MessageKind::NoEmpty => {
                            // Everything below is full: take over the probing.
                            st.status = Status::Master;
                            st.recent = true;
                            st.prt = (st.child + 1) as usize;
                            st.found = false;
                            st.pc = Pc::Probing;
                            return Ok(Action::Stay);
                        }
                        MessageKind::FoundEmpty(p) | MessageKind::Forward(p) => {
                            st.q_prime = Some(p);
                            if let Some(par) = st.parent {
                                let fwd = MessageKind::Forward(child_port(st)?);
                                arm_sender(st, fwd, par);
                                st.pc = Pc::SendBits(AfterSend::Depart(AfterArrive::AsFollower));
                                return Ok(Action::Stay);
                            }
                            // Chain start: nobody upstream, shift right away.
                            st.pc = Pc::AwaitDepart(AfterArrive::AsFollower);
                            continue;
                        }
                        MessageKind::Malformed => {
                            return Err(ProtocolViolation::MalformedSignal)
                        }
                    }
                }
                return Ok(Action::Stay);
            }
            Pc::Probing => {
                if obs.class() != 3 {
                    return Ok(Action::Stay);
                }
                if st.prt >= obs.degree {
                    // No empty neighbor anywhere behind this node.
                    return match st.parent {
                        Some(par) => {
                            arm_sender(st, MessageKind::NoEmpty, par);
                            st.pc = Pc::SendBits(AfterSend::Idle);
                            Ok(Action::Stay)
                        }
                        None => Err(ProtocolViolation::ExhaustedNoParent),
                    };
                }
                st.pc = Pc::ProbeCheck;
                return Ok(Action::Move(st.prt));
            }
            Pc::ProbeCheck => {
                let back = arrival(obs)?;
                if obs.alone {
                    st.found = true;
                    if let Some(par) = st.parent {
                        let report = MessageKind::FoundEmpty(st.prt);
                        arm_sender(st, report, par);
                        st.pc = Pc::SendBits(AfterSend::Depart(AfterArrive::AsMaster));
                    } else {
                        st.pc = Pc::AwaitDepart(AfterArrive::AsMaster);
                    }
                } else {
                    st.prt += 1;
                    st.pc = Pc::Probing;
                }
                return Ok(Action::Move(back));
            }
            Pc::SendBits(after) => return send_step(st, obs, after, events),
            Pc::AwaitDepart(role) => {
                if obs.class() == 5 && st.since_move >= 2 {
                    let port = match role {
                        AfterArrive::AsMaster => st.prt,
                        AfterArrive::AsFollower => child_port(st)?,
                    };
                    st.pc = Pc::Arrive(role);
                    return Ok(Action::Move(port));
                }
                return Ok(Action::Stay);
            }
            Pc::Arrive(role) => {
                let via = arrival(obs)?;
                st.parent = Some(via);
                match role {
                    AfterArrive::AsMaster => {
                        st.child = 0;
                        st.recent = false;
                        st.pc = Pc::MasterWait;
                    }
                    AfterArrive::AsFollower => {
                        let next = st
                            .q_prime
                            .take()
                            .ok_or(ProtocolViolation::MissingRegister("q_prime"))?;
                        st.child = next as i32;
                        st.forward = true;
                        st.pc = Pc::FollowerWait;
                    }
                }
                return Ok(Action::Stay);
            }
            Pc::MasterWait => {
                if obs.increase && obs.event_class() == 0 {
                    // Termination wave reached the chain end.
                    st.status = Status::Idle;
                    st.pc = Pc::Done;
                    events.push(RobotEvent::WentIdle);
                    return Ok(Action::Stay);
                }
                if obs.increase && obs.event_class() == 2 {
                    // Wake relay arrived; its flag lands at a 3-dedicated
                    // round, so the first probe goes out immediately.
                    st.prt = 0;
                    st.found = false;
                    st.pc = Pc::Probing;
                    continue;
                }
                return Ok(Action::Stay);
            }
            Pc::FollowerWait => {
                if obs.increase && obs.event_class() == 0 {
                    st.pc = Pc::WaveOut;
                } else if obs.increase && obs.event_class() == 2 {
                    st.pc = Pc::RelayOut;
                }
                return Ok(Action::Stay);
            }
            Pc::Done => return Ok(Action::Stay),
        }
    }
}

/// One election sub-round. Only runs (and only advances the sub-round
/// counter) at 1-dedicated rounds; parked electorate members cycle the same
/// counter but act solely in the sub-round-6 un-park branch.
fn election(
    st: &mut RobotState,
    obs: &Observation,
    sub: u8,
    events: &mut Vec<RobotEvent>,
) -> Result<Action, ProtocolViolation> {
    if obs.class() != 1 {
        return Ok(Action::Stay);
    }
    match sub {
        1 => {
            let mut action = Action::Stay;
            if st.engage {
                if obs.alone {
                    st.candidate = true;
                } else if label_bit(st.id, st.j) {
                    st.mv = 1;
                    st.pending = Capture::Q;
                    action = Action::Move(0);
                }
            }
            st.pc = Pc::Bit(2);
            Ok(action)
        }
        2 => {
            let mut action = Action::Stay;
            if st.engage && st.mv == 0 && st.last1_dec {
                // Stayers confirm a nonempty 1-side by visiting port 0 too.
                st.mv = 2;
                st.pending = Capture::Q;
                action = Action::Move(0);
            }
            st.pc = Pc::Bit(3);
            Ok(action)
        }
        3 => {
            let mut action = Action::Stay;
            if st.engage && st.mv == 2 {
                st.mv = 0;
                action = Action::Move(take_register(&mut st.q, "q")?);
            } else if st.engage && st.mv == 1 {
                let back = take_register(&mut st.q, "q")?;
                if !st.last1_inc {
                    // No 0-side showed up: the split was vacuous.
                    st.mv = 0;
                }
                action = Action::Move(back);
            }
            st.pc = Pc::Bit(4);
            Ok(action)
        }
        4 => {
            let mut action = Action::Stay;
            if st.engage && st.mv == 1 {
                // Both sides were nonempty: the 1-side leaves the election.
                st.engage = false;
                st.pending = Capture::QPrime;
                action = Action::Move(obs.degree.saturating_sub(1));
            }
            st.pc = Pc::Bit(5);
            Ok(action)
        }
        5 => {
            let mut action = Action::Stay;
            if st.engage && st.candidate {
                // Announce the election at the parking node.
                st.election = true;
                st.pending = Capture::QPrime;
                action = Action::Move(obs.degree.saturating_sub(1));
            }
            st.pc = Pc::Bit(6);
            Ok(action)
        }
        _ => {
            if st.engage && st.candidate {
                let home = take_register(&mut st.q_prime, "q_prime")?;
                let calls = st.j;
                if st.first_iter {
                    st.status = Status::Master;
                    st.child = -1;
                    st.recent = true;
                    st.prt = 0;
                    st.found = false;
                    st.pc = Pc::Probing;
                    events.push(RobotEvent::Elected { master: true, calls });
                } else {
                    st.status = Status::Follower;
                    st.recent = true;
                    st.forward = false;
                    st.pc = Pc::FollowerStart;
                    events.push(RobotEvent::Elected { master: false, calls });
                }
                st.first_iter = false;
                st.j = 1;
                Ok(Action::Move(home))
            } else if !st.engage {
                if st.last1_inc {
                    // The winner visited the parking node: election over,
                    // return and settle in as electorate observer.
                    let home = take_register(&mut st.q_prime, "q_prime")?;
                    st.engage = true;
                    st.election = true;
                    st.mv = 0;
                    st.first_iter = false;
                    st.j = 1;
                    st.pc = Pc::Observe;
                    Ok(Action::Move(home))
                } else {
                    st.pc = Pc::Bit(1);
                    Ok(Action::Stay)
                }
            } else {
                // Election still open: next call, next label bit.
                st.j += 1;
                st.pc = Pc::Bit(1);
                Ok(Action::Stay)
            }
        }
    }
}

/// Settled electorate member at the source: decode signals, mirror the probe
/// cursor after a dead-end report, detect the iteration boundary.
fn observe(
    st: &mut RobotState,
    obs: &Observation,
    ctx: &StepContext,
    events: &mut Vec<RobotEvent>,
) -> Result<Action, ProtocolViolation> {
    if let Some(kind) = decoder_feed(st, obs, ctx) {
        events.push(RobotEvent::Decoded(kind));
        if kind == MessageKind::NoEmpty {
            st.counting = true;
        }
        // Any other message is someone else's business; in particular the
        // chain port must never be overwritten from a payload.
    }
    if st.counting && obs.event_class() == 3 && obs.decrease {
        st.child += 1;
    }
    if obs.event_class() == 5 && obs.decrease && !st.last4_inc {
        // A departure in a 5-dedicated round without a signal bit right
        // before it is the iteration boundary.
        st.reset_for_new_iteration();
        events.push(RobotEvent::IterationDetected);
    }
    Ok(Action::Stay)
}

/// Transmit one signal bit per block; 1-bits are visits through the target
/// port with a return leg the round after.
fn send_step(
    st: &mut RobotState,
    obs: &Observation,
    after: AfterSend,
    events: &mut Vec<RobotEvent>,
) -> Result<Action, ProtocolViolation> {
    let returning = st.sender.as_ref().is_some_and(|s| s.returning);
    if returning {
        let back = arrival(obs)?;
        let done = {
            let snd = st
                .sender
                .as_mut()
                .ok_or(ProtocolViolation::MissingRegister("sender"))?;
            snd.returning = false;
            snd.bits.is_empty()
        };
        if done {
            finish_send(st, after, events);
        }
        return Ok(Action::Move(back));
    }
    if obs.class() == 4 {
        let snd = st
            .sender
            .as_mut()
            .ok_or(ProtocolViolation::MissingRegister("sender"))?;
        if let Some(bit) = snd.bits.take_first() {
            if bit {
                snd.returning = true;
                let target = snd.target;
                return Ok(Action::Move(target));
            }
            if snd.bits.is_empty() {
                finish_send(st, after, events);
            }
            return Ok(Action::Stay);
        }
    }
    Ok(Action::Stay)
}

fn finish_send(st: &mut RobotState, after: AfterSend, events: &mut Vec<RobotEvent>) {
    st.sender = None;
    match after {
        AfterSend::Idle => {
            st.status = Status::Idle;
            st.pc = Pc::Done;
            events.push(RobotEvent::WentIdle);
        }
        AfterSend::Depart(role) => st.pc = Pc::AwaitDepart(role),
    }
}

/// Feed one round of channel flags into the decoder. Returns the message on
/// closure; the decoder re-arms itself afterwards.
fn decoder_feed(st: &mut RobotState, obs: &Observation, ctx: &StepContext) -> Option<MessageKind> {
    if obs.event_class() != 4 {
        return None;
    }
    let dec = &mut st.decoder;
    if !dec.aligned {
        if obs.increase {
            // First bit of any encoded message is 1: this fixes alignment.
            dec.aligned = true;
            dec.raw.push(true);
        }
        return None;
    }
    dec.raw.push(obs.increase);
    let n = dec.raw.len();
    if n.is_multiple_of(2) && !dec.raw.bits()[n - 2] && !dec.raw.bits()[n - 1] {
        let payload = BitString::from_bits(dec.raw.bits()[..n - 2].to_vec());
        dec.reset();
        return Some(parse_message(&payload));
    }
    if n > ctx.decoder_cap {
        dec.reset();
        return Some(MessageKind::Malformed);
    }
    None
}

fn arm_sender(st: &mut RobotState, kind: MessageKind, target: usize) {
    st.sender = Some(SenderState {
        bits: compose_message(kind).expect("composable signal kind"),
        target,
        returning: false,
    });
}

fn label_bit(id: u64, j: u32) -> bool {
    BitString::from_uint(id).reversed().bit_at(j as usize)
}

fn child_port(st: &RobotState) -> Result<usize, ProtocolViolation> {
    if st.child < 0 {
        Err(ProtocolViolation::NegativeChild)
    } else {
        Ok(st.child as usize)
    }
}

fn arrival(obs: &Observation) -> Result<usize, ProtocolViolation> {
    obs.arrived_via.ok_or(ProtocolViolation::MissingArrival)
}

fn take_register(
    reg: &mut Option<usize>,
    name: &'static str,
) -> Result<usize, ProtocolViolation> {
    reg.take().ok_or(ProtocolViolation::MissingRegister(name))
}
