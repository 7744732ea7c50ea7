//! The certification protocol: a verifier that checks a claimed count
//! through random evaluations of the degree-reduction view, and an honest
//! prover that answers from the solver's BDDs and eBDD logs.

pub mod channel;
pub mod message;
pub mod prover;
pub mod session;
pub mod soundness;
pub mod transcript;
pub mod verifier;

use thiserror::Error;

use crate::circuit::CpeDag;
use crate::field::FieldElem;

pub use channel::{mem_pair, ChannelError, Endpoint, MemEndpoint, StreamEndpoint};
pub use message::{Message, MessageKind, RejectReason};
pub use prover::{prover_answer, prover_run, Corruption, ProverConfig, ProverReport, ProverState};
pub use session::{run_session, SessionConfig, SessionOutcome, SessionStats};
pub use soundness::{dag_soundness_bound, soundness_bound, SoundnessBound};
pub use transcript::{replay, Recorder, Transcript, TranscriptError};
pub use verifier::{verifier_run, Claim, VerifierReport, VerifierStats};

/// Largest number of counted variables: the count must stay below `p`.
pub const MAX_COUNTED: usize = 60;
/// Levels must fit the 16-bit variable field, minus the "absent" marker.
pub const MAX_LEVELS: u32 = 0xFFFE;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accept {
        count: FieldElem,
    },
    /// `ordinal` is the reference whose check failed, or `u32::MAX` when the
    /// run never started.
    Reject {
        reason: RejectReason,
        ordinal: u32,
    },
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept { .. })
    }

    pub fn to_message(&self) -> Message {
        match *self {
            Verdict::Accept { count } => {
                Message::new(MessageKind::Accept(count), message::VERDICT_ORDINAL, message::NO_VAR)
            }
            Verdict::Reject { reason, ordinal } => Message::new(MessageKind::Reject(reason), ordinal, message::NO_VAR),
        }
    }

    pub fn from_message(m: &Message) -> Option<Verdict> {
        match m.kind {
            MessageKind::Accept(count) => Some(Verdict::Accept { count }),
            MessageKind::Reject(reason) => Some(Verdict::Reject { reason, ordinal: m.ordinal }),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum SetupError {
    #[error("{0} counted variables; at most {MAX_COUNTED} fit below the field order")]
    TooManyCounted(usize),
    #[error("{0} variable levels exceed the wire limit of {MAX_LEVELS}")]
    TooManyLevels(u32),
}

/// Checks that a count over `dag` is certifiable: `2^n < p` and every level
/// is addressable on the wire.
pub fn setup_guard(dag: &CpeDag) -> Result<(), SetupError> {
    if dag.num_counted() > MAX_COUNTED {
        return Err(SetupError::TooManyCounted(dag.num_counted()));
    }
    if dag.num_levels() > MAX_LEVELS {
        return Err(SetupError::TooManyLevels(dag.num_levels()));
    }
    Ok(())
}

/// Projects a point over `from` (levels, highest first) onto `to`. A level
/// of `to` missing from `from` takes its value from `extra`.
pub(crate) fn restrict(
    from: &[u32],
    vals: &[FieldElem],
    to: &[u32],
    extra: Option<(u32, FieldElem)>,
) -> Vec<FieldElem> {
    let mut out = Vec::with_capacity(to.len());
    let mut i = 0;
    for &l in to {
        while i < from.len() && from[i] > l {
            i += 1;
        }
        if i < from.len() && from[i] == l {
            out.push(vals[i]);
        } else {
            match extra {
                Some((x, v)) if x == l => out.push(v),
                _ => panic!("level {l} missing from the source point"),
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn restrict_projects_and_extends() {
        let f = FieldElem::new;
        let got = restrict(&[9, 5, 2], &[f(90), f(50), f(20)], &[9, 4, 2], Some((4, f(1))));
        assert_eq!(got, vec![f(90), f(1), f(20)]);
        assert_eq!(restrict(&[9, 5, 2], &[f(90), f(50), f(20)], &[5], None), vec![f(50)]);
        assert!(restrict(&[3], &[f(1)], &[], None).is_empty());
    }
}
