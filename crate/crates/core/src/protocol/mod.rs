//! Robot-side protocol logic: label bit strings, the movement-encoded message
//! codec, per-robot registers, and the round step function.
//!
//! Everything in this module sees the world exclusively through [`step::Observation`]
//! values (alone / increase / decrease / degree / arrival port); nodes, ids of other
//! robots, and global round tallies are engine-side concepts that never reach a robot.

pub mod bits;
pub mod message;
pub mod state;
pub mod step;

pub use bits::{bitlen, ceil_log2, BitString};
pub use message::{compose_message, parse_message, MessageKind};
pub use state::{decoder_cap, state_bits_bound, RobotState, Status};
pub use step::{robot_step, Action, Observation, ProtocolViolation, RobotEvent, StepContext};
