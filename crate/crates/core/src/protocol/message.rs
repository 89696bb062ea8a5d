//! Message composition and parsing for the movement channel.
//!
//! A message is a 4-bit header followed by an optional transformed payload:
//!
//! | header | meaning                        | payload              |
//! |--------|--------------------------------|----------------------|
//! | `1111` | no empty node found            | none                 |
//! | `1011` | empty node found               | port, transformed    |
//! | `1110` | forward the port downstream    | port, transformed    |
//!
//! Headers and transformed payloads are free of `00`, so a receiver can end a
//! message on the first `00` pair it observes. Parsing is total: every bit
//! string maps to a message kind, with `Malformed` absorbing everything that
//! is not a well-formed message.

use super::bits::BitString;

/// A decoded message, including the catch-all for undecodable streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MessageKind {
    /// The subtree below the sender has no unoccupied node.
    NoEmpty,
    /// An unoccupied node lies through this port of the sender.
    FoundEmpty(usize),
    /// Relayed variant of `FoundEmpty` emitted by intermediate nodes.
    Forward(usize),
    /// Anything that does not parse as one of the above.
    Malformed,
}

/// Error returned when asked to put a non-message on the channel.
#[derive(Debug, thiserror::Error, PartialEq, Eq)]
#[error("malformed messages cannot be composed")]
pub struct ComposeError;

/// Serializes a message to the exact bit stream its sender transmits.
pub fn compose_message(kind: MessageKind) -> Result<BitString, ComposeError> {
    let (header, payload) = match kind {
        MessageKind::NoEmpty => ("1111", None),
        MessageKind::FoundEmpty(port) => ("1011", Some(port)),
        MessageKind::Forward(port) => ("1110", Some(port)),
        MessageKind::Malformed => return Err(ComposeError),
    };
    let mut bits: BitString = header.parse().expect("header literals are binary");
    if let Some(port) = payload {
        for &b in BitString::from_uint(port as u64).transformed_encode().bits() {
            bits.push(b);
        }
    }
    Ok(bits)
}

/// Interprets a received bit stream. Total: unparseable input is
/// [`MessageKind::Malformed`], never an error.
pub fn parse_message(bits: &BitString) -> MessageKind {
    let raw = bits.bits();
    if raw.len() < 4 {
        return MessageKind::Malformed;
    }
    let header: Vec<bool> = raw[..4].to_vec();
    let payload = BitString::from_bits(raw[4..].to_vec());
    let header_str: String =
        header.iter().map(|&b| if b { '1' } else { '0' }).collect();
    match header_str.as_str() {
        "1111" => {
            if payload.is_empty() {
                MessageKind::NoEmpty
            } else {
                MessageKind::Malformed
            }
        }
        "1011" => decode_port(&payload).map_or(MessageKind::Malformed, MessageKind::FoundEmpty),
        "1110" => decode_port(&payload).map_or(MessageKind::Malformed, MessageKind::Forward),
        _ => MessageKind::Malformed,
    }
}

fn decode_port(payload: &BitString) -> Option<usize> {
    if payload.is_empty() {
        return None;
    }
    payload.transformed_decode().map(|bits| bits.to_uint() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_empty_is_bare_header() {
        assert_eq!(compose_message(MessageKind::NoEmpty).unwrap().to_string(), "1111");
    }

    #[test]
    fn forward_zero_example() {
        assert_eq!(compose_message(MessageKind::Forward(0)).unwrap().to_string(), "111010");
    }

    #[test]
    fn found_empty_carries_transformed_port() {
        // port 1 -> binary "1" -> transformed "11"
        assert_eq!(compose_message(MessageKind::FoundEmpty(1)).unwrap().to_string(), "101111");
    }

    #[test]
    fn round_trip_all_small_ports() {
        let mut kinds = vec![MessageKind::NoEmpty];
        for p in 0..64 {
            kinds.push(MessageKind::FoundEmpty(p));
            kinds.push(MessageKind::Forward(p));
        }
        for kind in kinds {
            let bits = compose_message(kind).unwrap();
            assert_eq!(parse_message(&bits), kind, "bits {bits}");
        }
    }

    #[test]
    fn composed_streams_are_00_free() {
        for p in 0..64 {
            for kind in [MessageKind::FoundEmpty(p), MessageKind::Forward(p)] {
                let s = compose_message(kind).unwrap().to_string();
                assert!(!s.contains("00"), "{kind:?} -> {s}");
            }
        }
    }

    #[test]
    fn trailing_bits_after_no_empty_are_malformed() {
        let bits: BitString = "111110".parse().unwrap();
        assert_eq!(parse_message(&bits), MessageKind::Malformed);
    }

    #[test]
    fn empty_payload_after_port_header_is_malformed() {
        for header in ["1011", "1110"] {
            let bits: BitString = header.parse().unwrap();
            assert_eq!(parse_message(&bits), MessageKind::Malformed, "header {header}");
        }
    }

    #[test]
    fn garbage_is_malformed_not_error() {
        // includes a port header with an invalid transformed pair ("01")
        for s in ["", "1", "10", "110", "0111", "101101"] {
            let bits: BitString = s.parse().unwrap();
            assert_eq!(parse_message(&bits), MessageKind::Malformed, "input {s:?}");
        }
    }

    #[test]
    fn malformed_cannot_be_composed() {
        assert_eq!(compose_message(MessageKind::Malformed), Err(ComposeError));
    }
}
