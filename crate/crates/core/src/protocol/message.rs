//! Wire framing.
//!
//! Every frame is `tag (1) | ordinal (4, LE) | var (2, LE) | payload`, where
//! the payload length is fixed by the tag. `ordinal` addresses a reference in
//! the topological enumeration of the degree-reduction view and `var` is a
//! variable level (`0xFFFF` when absent). Frames are self-delimiting, so a
//! byte stream can be split without a length prefix.

use thiserror::Error;

use crate::field::{FieldElem, FieldError};
use crate::unipoly::{UniPoly, WIRE_LEN};

pub const HEADER_LEN: usize = 7;
pub const NO_VAR: u16 = 0xFFFF;
pub const VERDICT_ORDINAL: u32 = u32::MAX;

pub const TAG_CHALLENGE: u8 = 0x01;
pub const TAG_CHALLENGE_REVEAL: u8 = 0x02;
pub const TAG_VALUE: u8 = 0x11;
pub const TAG_POLY: u8 = 0x12;
pub const TAG_ABORT: u8 = 0x13;
pub const TAG_ACCEPT: u8 = 0x21;
pub const TAG_REJECT: u8 = 0x22;

/// Payload length for a tag, or `None` for an unknown tag.
pub fn payload_len(tag: u8) -> Option<usize> {
    match tag {
        TAG_CHALLENGE | TAG_ABORT => Some(0),
        TAG_CHALLENGE_REVEAL | TAG_VALUE | TAG_ACCEPT | TAG_REJECT => Some(8),
        TAG_POLY => Some(WIRE_LEN),
        _ => None,
    }
}

/// Total frame length for a tag.
pub fn frame_len(tag: u8) -> Option<usize> {
    payload_len(tag).map(|p| HEADER_LEN + p)
}

/// Why the verifier rejected. The numeric codes are part of the wire format.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum RejectReason {
    /// A merge polynomial does not match its claim.
    MergePoly,
    /// Claims still disagree after unifying their points.
    MergeMismatch,
    /// Operator check on the children's values failed.
    Operator,
    /// Degree-reduction check failed.
    Reduction,
    /// A leaf claim is false.
    Leaf,
    /// Malformed, misaddressed or missing message.
    ProtocolViolation,
    /// The instance is too large to certify in this field.
    SetupGuard,
    /// The prover gave up.
    ProverAbort,
}

impl RejectReason {
    pub fn code(self) -> u64 {
        match self {
            RejectReason::MergePoly => 1,
            RejectReason::MergeMismatch => 2,
            RejectReason::Operator => 3,
            RejectReason::Reduction => 4,
            RejectReason::Leaf => 5,
            RejectReason::ProtocolViolation => 6,
            RejectReason::SetupGuard => 7,
            RejectReason::ProverAbort => 8,
        }
    }

    pub fn from_code(code: u64) -> Option<Self> {
        Some(match code {
            1 => RejectReason::MergePoly,
            2 => RejectReason::MergeMismatch,
            3 => RejectReason::Operator,
            4 => RejectReason::Reduction,
            5 => RejectReason::Leaf,
            6 => RejectReason::ProtocolViolation,
            7 => RejectReason::SetupGuard,
            8 => RejectReason::ProverAbort,
            _ => return None,
        })
    }

    pub fn describe(self) -> &'static str {
        match self {
            RejectReason::MergePoly => "merge polynomial inconsistent with claim",
            RejectReason::MergeMismatch => "merged claims disagree",
            RejectReason::Operator => "operator check failed",
            RejectReason::Reduction => "degree-reduction check failed",
            RejectReason::Leaf => "leaf check failed",
            RejectReason::ProtocolViolation => "protocol violation",
            RejectReason::SetupGuard => "instance exceeds field capacity",
            RejectReason::ProverAbort => "prover aborted",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MessageKind {
    Challenge,
    /// A challenge that also reveals the random element drawn since the
    /// verifier's previous message.
    ChallengeReveal(FieldElem),
    Value(FieldElem),
    Poly(UniPoly),
    Abort,
    Accept(FieldElem),
    Reject(RejectReason),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct Message {
    pub kind: MessageKind,
    pub ordinal: u32,
    pub var: u16,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("unknown tag {0:#04x}")]
    UnknownTag(u8),
    #[error("frame length {got}, expected {want}")]
    Length { got: usize, want: usize },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("unknown reject code {0}")]
    RejectCode(u64),
}

impl Message {
    pub fn new(kind: MessageKind, ordinal: u32, var: u16) -> Self {
        Message { kind, ordinal, var }
    }

    pub fn tag(&self) -> u8 {
        match self.kind {
            MessageKind::Challenge => TAG_CHALLENGE,
            MessageKind::ChallengeReveal(_) => TAG_CHALLENGE_REVEAL,
            MessageKind::Value(_) => TAG_VALUE,
            MessageKind::Poly(_) => TAG_POLY,
            MessageKind::Abort => TAG_ABORT,
            MessageKind::Accept(_) => TAG_ACCEPT,
            MessageKind::Reject(_) => TAG_REJECT,
        }
    }

    pub fn is_verdict(&self) -> bool {
        matches!(self.kind, MessageKind::Accept(_) | MessageKind::Reject(_))
    }

    /// The variable level, if present.
    pub fn var_level(&self) -> Option<u32> {
        (self.var != NO_VAR).then_some(self.var as u32)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + WIRE_LEN);
        out.push(self.tag());
        out.extend_from_slice(&self.ordinal.to_le_bytes());
        out.extend_from_slice(&self.var.to_le_bytes());
        match self.kind {
            MessageKind::Challenge | MessageKind::Abort => {}
            MessageKind::ChallengeReveal(v) | MessageKind::Value(v) | MessageKind::Accept(v) => {
                out.extend_from_slice(&v.to_le_bytes())
            }
            MessageKind::Poly(p) => out.extend_from_slice(&p.to_le_bytes()),
            MessageKind::Reject(r) => out.extend_from_slice(&r.code().to_le_bytes()),
        }
        out
    }

    pub fn decode(frame: &[u8]) -> Result<Message, DecodeError> {
        let tag = *frame.first().ok_or(DecodeError::Length { got: 0, want: HEADER_LEN })?;
        let want = frame_len(tag).ok_or(DecodeError::UnknownTag(tag))?;
        if frame.len() != want {
            return Err(DecodeError::Length { got: frame.len(), want });
        }
        let ordinal = u32::from_le_bytes(frame[1..5].try_into().expect("4 bytes"));
        let var = u16::from_le_bytes(frame[5..7].try_into().expect("2 bytes"));
        let payload = &frame[HEADER_LEN..];
        let elem = || FieldElem::from_le_bytes(payload.try_into().expect("8 bytes"));
        let kind = match tag {
            TAG_CHALLENGE => MessageKind::Challenge,
            TAG_CHALLENGE_REVEAL => MessageKind::ChallengeReveal(elem()?),
            TAG_VALUE => MessageKind::Value(elem()?),
            TAG_POLY => MessageKind::Poly(UniPoly::from_le_bytes(payload.try_into().expect("24 bytes"))?),
            TAG_ABORT => MessageKind::Abort,
            TAG_ACCEPT => MessageKind::Accept(elem()?),
            TAG_REJECT => {
                let code = u64::from_le_bytes(payload.try_into().expect("8 bytes"));
                MessageKind::Reject(RejectReason::from_code(code).ok_or(DecodeError::RejectCode(code))?)
            }
            _ => unreachable!("tag validated above"),
        };
        Ok(Message { kind, ordinal, var })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_every_kind() {
        let kinds = [
            MessageKind::Challenge,
            MessageKind::ChallengeReveal(FieldElem::new(77)),
            MessageKind::Value(FieldElem::HALF),
            MessageKind::Poly(UniPoly::from_u64s(1, 2, 3)),
            MessageKind::Abort,
            MessageKind::Accept(FieldElem::new(5)),
            MessageKind::Reject(RejectReason::Reduction),
        ];
        for kind in kinds {
            let m = Message::new(kind, 0x0102_0304, 9);
            let bytes = m.encode();
            assert_eq!(Some(bytes.len()), frame_len(bytes[0]));
            assert_eq!(Message::decode(&bytes).unwrap(), m);
        }
    }

    #[test]
    fn layout_is_little_endian() {
        let m = Message::new(MessageKind::Value(FieldElem::new(0x0a0b)), 0x0102_0304, NO_VAR);
        assert_eq!(m.encode(), vec![0x11, 4, 3, 2, 1, 0xff, 0xff, 0x0b, 0x0a, 0, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn rejects_bad_frames() {
        assert_eq!(Message::decode(&[0x7f, 0, 0, 0, 0, 0, 0]), Err(DecodeError::UnknownTag(0x7f)));
        assert!(matches!(Message::decode(&[0x11, 0, 0]), Err(DecodeError::Length { .. })));
        let mut v = Message::new(MessageKind::Value(FieldElem::ZERO), 0, 0).encode();
        v[7..].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(matches!(Message::decode(&v), Err(DecodeError::Field(_))));
        for code in 1..=8 {
            assert_eq!(RejectReason::from_code(code).unwrap().code(), code);
        }
    }
}
