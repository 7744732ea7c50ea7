//! Recorded protocol runs and offline replay.
//!
//! File layout: `"CPCERT01" | seed (8, LE) | frames`, frames in the order
//! they were exchanged, with the verdict frame last.

use std::time::Duration;

use thiserror::Error;

use super::channel::{ChannelError, Endpoint};
use super::message::{
    frame_len, Message, RejectReason, TAG_ACCEPT, TAG_CHALLENGE, TAG_CHALLENGE_REVEAL, TAG_REJECT, VERDICT_ORDINAL,
};
use super::verifier::verifier_run;
use super::Verdict;
use crate::circuit::CpeDag;

pub const MAGIC: &[u8; 8] = b"CPCERT01";

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TranscriptError {
    #[error("missing magic header")]
    BadMagic,
    #[error("truncated at byte {0}")]
    Truncated(usize),
    #[error("unknown frame tag {tag:#04x} at byte {offset}")]
    UnknownTag { tag: u8, offset: usize },
    #[error("no verdict at the end of the transcript")]
    MissingVerdict,
    #[error("verdict frame before the end of the transcript")]
    EarlyVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transcript {
    pub seed: u64,
    pub frames: Vec<Vec<u8>>,
}

fn is_verdict_tag(t: u8) -> bool {
    t == TAG_ACCEPT || t == TAG_REJECT
}

fn is_verifier_tag(t: u8) -> bool {
    t == TAG_CHALLENGE || t == TAG_CHALLENGE_REVEAL || is_verdict_tag(t)
}

impl Transcript {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = MAGIC.to_vec();
        out.extend_from_slice(&self.seed.to_le_bytes());
        for f in &self.frames {
            out.extend_from_slice(f);
        }
        out
    }

    /// Splits the file into frames by tag. Payloads are not decoded here, so
    /// a malformed value surfaces as a rejection on replay.
    pub fn from_bytes(bytes: &[u8]) -> Result<Transcript, TranscriptError> {
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(TranscriptError::BadMagic);
        }
        let seed = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        let mut frames = Vec::new();
        let mut at = 16;
        while at < bytes.len() {
            let tag = bytes[at];
            let len = frame_len(tag).ok_or(TranscriptError::UnknownTag { tag, offset: at })?;
            let end = at + len;
            if end > bytes.len() {
                return Err(TranscriptError::Truncated(bytes.len()));
            }
            frames.push(bytes[at..end].to_vec());
            at = end;
        }
        let t = Transcript { seed, frames };
        match t.frames.last() {
            Some(f) if is_verdict_tag(f[0]) => {}
            _ => return Err(TranscriptError::MissingVerdict),
        }
        if t.frames[..t.frames.len() - 1].iter().any(|f| is_verdict_tag(f[0])) {
            return Err(TranscriptError::EarlyVerdict);
        }
        Ok(t)
    }

    /// The recorded verdict, if its frame decodes.
    pub fn verdict(&self) -> Option<Verdict> {
        let m = Message::decode(self.frames.last()?).ok()?;
        Verdict::from_message(&m)
    }

    /// Frames sent by the prover.
    pub fn prover_frames(&self) -> impl Iterator<Item = (usize, &Vec<u8>)> {
        self.frames.iter().enumerate().filter(|(_, f)| !is_verifier_tag(f[0]))
    }
}

/// Wraps an endpoint and records every frame in both directions.
#[derive(Debug)]
pub struct Recorder<E> {
    inner: E,
    frames: Vec<Vec<u8>>,
}

impl<E: Endpoint> Recorder<E> {
    pub fn new(inner: E) -> Self {
        Recorder { inner, frames: Vec::new() }
    }

    pub fn into_transcript(self, seed: u64) -> (E, Transcript) {
        (self.inner, Transcript { seed, frames: self.frames })
    }
}

impl<E: Endpoint> Endpoint for Recorder<E> {
    fn send(&mut self, frame: &[u8]) -> Result<(), ChannelError> {
        self.frames.push(frame.to_vec());
        self.inner.send(frame)
    }

    fn recv(&mut self) -> Result<Vec<u8>, ChannelError> {
        let f = self.inner.recv()?;
        self.frames.push(f.clone());
        Ok(f)
    }

    fn bytes_sent(&self) -> u64 {
        self.inner.bytes_sent()
    }

    fn bytes_received(&self) -> u64 {
        self.inner.bytes_received()
    }

    fn blocked(&self) -> Duration {
        self.inner.blocked()
    }
}

/// Plays the recorded prover frames back to a live verifier and checks that
/// the verifier's own frames match the recording.
struct ReplayEndpoint<'a> {
    frames: &'a [Vec<u8>],
    pos: usize,
    verdict: Option<Vec<u8>>,
    diverged: bool,
}

impl Endpoint for ReplayEndpoint<'_> {
    fn send(&mut self, frame: &[u8]) -> Result<(), ChannelError> {
        if is_verdict_tag(frame[0]) {
            self.verdict = Some(frame.to_vec());
            return Ok(());
        }
        match self.frames.get(self.pos) {
            Some(f) if f == frame => {
                self.pos += 1;
                Ok(())
            }
            _ => {
                self.diverged = true;
                Err(ChannelError::Diverged)
            }
        }
    }

    fn recv(&mut self) -> Result<Vec<u8>, ChannelError> {
        match self.frames.get(self.pos) {
            Some(f) if !is_verifier_tag(f[0]) => {
                self.pos += 1;
                Ok(f.clone())
            }
            _ => {
                self.diverged = true;
                Err(ChannelError::Diverged)
            }
        }
    }

    fn bytes_sent(&self) -> u64 {
        0
    }

    fn bytes_received(&self) -> u64 {
        0
    }

    fn blocked(&self) -> Duration {
        Duration::ZERO
    }
}

/// Re-runs the verifier with the recorded seed against the recorded prover
/// answers. The result is the verifier's verdict only if the run reproduces
/// the recording exactly, verdict frame included. Anything else, such as a
/// tampered answer or a transcript made for another instance, is a protocol
/// violation at the reference where the verifier stopped.
pub fn replay(dag: &CpeDag, t: &Transcript) -> Verdict {
    let body = &t.frames[..t.frames.len().saturating_sub(1)];
    let mut ep = ReplayEndpoint { frames: body, pos: 0, verdict: None, diverged: false };
    let report = verifier_run(dag, &mut ep, t.seed);
    let exact = !ep.diverged && ep.pos == body.len() && ep.verdict.as_deref() == t.frames.last().map(Vec::as_slice);
    match report.verdict {
        v if exact => v,
        Verdict::Reject { ordinal, .. } => Verdict::Reject { reason: RejectReason::ProtocolViolation, ordinal },
        Verdict::Accept { .. } => Verdict::Reject { reason: RejectReason::ProtocolViolation, ordinal: VERDICT_ORDINAL },
    }
}
