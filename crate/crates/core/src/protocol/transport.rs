//! Frame transports between the leader and the custodians.
//!
//! Both transports carry the same encoded frames. The in-memory one runs
//! every custodian synchronously inside `send`; the socket one runs each
//! custodian on its own thread behind a TCP connection.

use std::collections::VecDeque;
use std::io::{Read, Write};
use std::net::{TcpListener, TcpStream};
use std::thread::JoinHandle;

use super::custodian::Custodian;
use super::message::{decode_frame, encode_frame, Message, PREFIX_BYTES};
use super::ProtocolError;

/// Leader-side view of the custodians.
pub trait Transport {
    fn custodians(&self) -> usize;

    /// Delivers one encoded frame to custodian `i`.
    fn send(&mut self, i: u16, frame: Vec<u8>) -> Result<(), ProtocolError>;

    /// Blocks until custodian `i` has a frame for the leader.
    fn recv(&mut self, i: u16) -> Result<Vec<u8>, ProtocolError>;

    /// Shuts down and returns each custodian's output.
    fn close(&mut self) -> Result<Vec<Option<usize>>, ProtocolError>;
}

/// Custodian-side processing of one frame; returns the reply frame.
fn serve(custodian: &mut Custodian, frame: &[u8]) -> Result<Option<Vec<u8>>, ProtocolError> {
    let (to, msg) = decode_frame(frame)?;
    if to != custodian.id() {
        return Err(ProtocolError::Unexpected(format!("frame for {to} delivered to custodian {}", custodian.id())));
    }
    Ok(custodian.handle(msg)?.map(|reply| encode_frame(custodian.id(), &reply)))
}

pub struct InMemoryTransport {
    custodians: Vec<Custodian>,
    inbox: Vec<VecDeque<Vec<u8>>>,
}

impl InMemoryTransport {
    pub fn new(custodians: Vec<Custodian>) -> Self {
        let inbox = custodians.iter().map(|c| VecDeque::from([encode_frame(c.id(), &c.announce())])).collect();
        InMemoryTransport { custodians, inbox }
    }
}

impl Transport for InMemoryTransport {
    fn custodians(&self) -> usize {
        self.custodians.len()
    }

    fn send(&mut self, i: u16, frame: Vec<u8>) -> Result<(), ProtocolError> {
        let c = self.custodians.get_mut(i as usize).ok_or_else(|| ProtocolError::Unexpected(format!("no custodian {i}")))?;
        if let Some(reply) = serve(c, &frame)? {
            self.inbox[i as usize].push_back(reply);
        }
        Ok(())
    }

    fn recv(&mut self, i: u16) -> Result<Vec<u8>, ProtocolError> {
        self.inbox
            .get_mut(i as usize)
            .and_then(VecDeque::pop_front)
            .ok_or_else(|| ProtocolError::Transport(format!("custodian {i} has nothing to send")))
    }

    fn close(&mut self) -> Result<Vec<Option<usize>>, ProtocolError> {
        Ok(self.custodians.iter().map(Custodian::output).collect())
    }
}

fn read_frame(stream: &mut TcpStream) -> std::io::Result<Vec<u8>> {
    let mut prefix = [0u8; PREFIX_BYTES];
    stream.read_exact(&mut prefix)?;
    let len = u32::from_le_bytes(prefix) as usize;
    let mut frame = prefix.to_vec();
    frame.resize(PREFIX_BYTES + len, 0);
    stream.read_exact(&mut frame[PREFIX_BYTES..])?;
    Ok(frame)
}

fn custodian_loop(mut custodian: Custodian, mut stream: TcpStream) -> Result<Option<usize>, ProtocolError> {
    stream.write_all(&encode_frame(custodian.id(), &custodian.announce()))?;
    loop {
        let frame = read_frame(&mut stream)?;
        let is_final = matches!(decode_frame(&frame)?.1, Message::FinalOutput);
        if let Some(reply) = serve(&mut custodian, &frame)? {
            stream.write_all(&reply)?;
        }
        if is_final {
            return Ok(custodian.output());
        }
    }
}

/// Each custodian on its own thread, connected over loopback TCP.
pub struct SocketTransport {
    streams: Vec<TcpStream>,
    workers: Vec<Option<JoinHandle<Result<Option<usize>, ProtocolError>>>>,
}

impl SocketTransport {
    pub fn spawn(custodians: Vec<Custodian>) -> Result<Self, ProtocolError> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let mut streams = Vec::with_capacity(custodians.len());
        let mut workers = Vec::with_capacity(custodians.len());
        // connect one at a time so that stream i belongs to custodian i
        for c in custodians {
            let worker = std::thread::spawn(move || {
                let stream = TcpStream::connect(addr)?;
                stream.set_nodelay(true)?;
                custodian_loop(c, stream)
            });
            let (stream, _) = listener.accept()?;
            stream.set_nodelay(true)?;
            streams.push(stream);
            workers.push(Some(worker));
        }
        Ok(SocketTransport { streams, workers })
    }
}

impl Transport for SocketTransport {
    fn custodians(&self) -> usize {
        self.streams.len()
    }

    fn send(&mut self, i: u16, frame: Vec<u8>) -> Result<(), ProtocolError> {
        let s = self.streams.get_mut(i as usize).ok_or_else(|| ProtocolError::Unexpected(format!("no custodian {i}")))?;
        s.write_all(&frame)?;
        Ok(())
    }

    fn recv(&mut self, i: u16) -> Result<Vec<u8>, ProtocolError> {
        let s = self.streams.get_mut(i as usize).ok_or_else(|| ProtocolError::Unexpected(format!("no custodian {i}")))?;
        Ok(read_frame(s)?)
    }

    fn close(&mut self) -> Result<Vec<Option<usize>>, ProtocolError> {
        let mut out = Vec::with_capacity(self.workers.len());
        for w in &mut self.workers {
            let handle = w.take().ok_or_else(|| ProtocolError::Transport("transport already closed".into()))?;
            out.push(handle.join().map_err(|_| ProtocolError::Transport("custodian thread panicked".into()))??);
        }
        Ok(out)
    }
}

impl Drop for SocketTransport {
    fn drop(&mut self) {
        for s in &self.streams {
            let _ = s.shutdown(std::net::Shutdown::Both);
        }
        for w in self.workers.iter_mut().filter_map(Option::take) {
            let _ = w.join();
        }
    }
}
