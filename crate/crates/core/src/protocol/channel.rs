use std::io::{Read, Write};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::time::{Duration, Instant};

use thiserror::Error;

use super::message::{frame_len, HEADER_LEN};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("peer disconnected")]
    Disconnected,
    #[error("unknown frame tag {0:#04x}")]
    BadFrame(u8),
    #[error("replayed transcript diverges from the verifier")]
    Diverged,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One side of a framed, strictly alternating connection. Implementations
/// count bytes in both directions and the time spent blocked in `recv`.
pub trait Endpoint {
    fn send(&mut self, frame: &[u8]) -> Result<(), ChannelError>;
    fn recv(&mut self) -> Result<Vec<u8>, ChannelError>;
    fn bytes_sent(&self) -> u64;
    fn bytes_received(&self) -> u64;
    fn blocked(&self) -> Duration;
}

#[derive(Debug, Default, Clone, Copy)]
struct Counters {
    sent: u64,
    received: u64,
    blocked: Duration,
}

/// In-process endpoint backed by `std::sync::mpsc`.
#[derive(Debug)]
pub struct MemEndpoint {
    tx: Sender<Vec<u8>>,
    rx: Receiver<Vec<u8>>,
    counters: Counters,
}

/// A connected pair of in-process endpoints.
pub fn mem_pair() -> (MemEndpoint, MemEndpoint) {
    let (tx_a, rx_b) = channel();
    let (tx_b, rx_a) = channel();
    (
        MemEndpoint { tx: tx_a, rx: rx_a, counters: Counters::default() },
        MemEndpoint { tx: tx_b, rx: rx_b, counters: Counters::default() },
    )
}

impl Endpoint for MemEndpoint {
    fn send(&mut self, frame: &[u8]) -> Result<(), ChannelError> {
        self.tx.send(frame.to_vec()).map_err(|_| ChannelError::Disconnected)?;
        self.counters.sent += frame.len() as u64;
        Ok(())
    }

    fn recv(&mut self) -> Result<Vec<u8>, ChannelError> {
        let t = Instant::now();
        let frame = self.rx.recv().map_err(|_| ChannelError::Disconnected);
        self.counters.blocked += t.elapsed();
        let frame = frame?;
        self.counters.received += frame.len() as u64;
        Ok(frame)
    }

    fn bytes_sent(&self) -> u64 {
        self.counters.sent
    }

    fn bytes_received(&self) -> u64 {
        self.counters.received
    }

    fn blocked(&self) -> Duration {
        self.counters.blocked
    }
}

/// Endpoint over any byte stream, e.g. a pipe or socket. Frames are split by
/// their tag, so no length prefix is added.
#[derive(Debug)]
pub struct StreamEndpoint<R, W> {
    reader: R,
    writer: W,
    counters: Counters,
}

impl<R: Read, W: Write> StreamEndpoint<R, W> {
    pub fn new(reader: R, writer: W) -> Self {
        StreamEndpoint { reader, writer, counters: Counters::default() }
    }
}

impl<R: Read, W: Write> Endpoint for StreamEndpoint<R, W> {
    fn send(&mut self, frame: &[u8]) -> Result<(), ChannelError> {
        self.writer.write_all(frame)?;
        self.writer.flush()?;
        self.counters.sent += frame.len() as u64;
        Ok(())
    }

    fn recv(&mut self) -> Result<Vec<u8>, ChannelError> {
        let t = Instant::now();
        let res = read_frame(&mut self.reader);
        self.counters.blocked += t.elapsed();
        let frame = res?;
        self.counters.received += frame.len() as u64;
        Ok(frame)
    }

    fn bytes_sent(&self) -> u64 {
        self.counters.sent
    }

    fn bytes_received(&self) -> u64 {
        self.counters.received
    }

    fn blocked(&self) -> Duration {
        self.counters.blocked
    }
}

fn read_frame(r: &mut impl Read) -> Result<Vec<u8>, ChannelError> {
    let mut tag = [0u8; 1];
    match r.read_exact(&mut tag) {
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => return Err(ChannelError::Disconnected),
        other => other?,
    }
    let len = frame_len(tag[0]).ok_or(ChannelError::BadFrame(tag[0]))?;
    debug_assert!(len >= HEADER_LEN);
    let mut frame = vec![0u8; len];
    frame[0] = tag[0];
    r.read_exact(&mut frame[1..])?;
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::message::{Message, MessageKind, NO_VAR};
    use crate::FieldElem;

    #[test]
    fn mem_pair_counts_bytes() {
        let (mut a, mut b) = mem_pair();
        let m = Message::new(MessageKind::Value(FieldElem::ONE), 3, NO_VAR).encode();
        a.send(&m).unwrap();
        assert_eq!(b.recv().unwrap(), m);
        assert_eq!(a.bytes_sent(), 15);
        assert_eq!(b.bytes_received(), 15);
        drop(a);
        assert!(matches!(b.recv(), Err(ChannelError::Disconnected)));
    }

    #[cfg(unix)]
    #[test]
    fn stream_endpoint_over_socket_pair() {
        use std::os::unix::net::UnixStream;
        let (s1, s2) = UnixStream::pair().unwrap();
        let mut a = StreamEndpoint::new(s1.try_clone().unwrap(), s1);
        let mut b = StreamEndpoint::new(s2.try_clone().unwrap(), s2);
        let frames = [
            Message::new(MessageKind::Challenge, 0, NO_VAR).encode(),
            Message::new(MessageKind::Poly(crate::UniPoly::X), 1, 4).encode(),
        ];
        for f in &frames {
            a.send(f).unwrap();
        }
        for f in &frames {
            assert_eq!(&b.recv().unwrap(), f);
        }
        assert_eq!(b.bytes_received(), a.bytes_sent());
    }
}
