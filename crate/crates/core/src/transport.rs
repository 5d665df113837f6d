//! Party-to-party messaging with labeled rounds.
//!
//! A [`Network`] is one party's handle. Every message carries a [`RoundLabel`];
//! the receiver states the label it expects and a mismatch is reported as a
//! desync instead of being silently consumed. Two backends share the same
//! framing: an in-process simulator over channels and TCP.
//!
//! TCP wire format, per message:
//!
//! ```text
//! u32 BE  length of everything that follows
//! u32 BE  tag length | tag bytes | u32 BE round
//! payload
//! ```
//!
//! There is no authentication or encryption on the TCP backend; deployments
//! need authenticated channels between parties.

use std::fmt;
use std::io::{BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::Path;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use crossbeam_channel::{unbounded, Receiver, RecvTimeoutError, Sender};
use thiserror::Error;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

/// Upper bound on a single frame; larger frames are treated as corrupt.
const MAX_FRAME: usize = 1 << 30;

#[derive(Debug, Error)]
pub enum TransportError {
    #[error("timed out waiting for party {from} at round {label}")]
    Timeout { from: usize, label: RoundLabel },

    #[error("protocol desync with party {from}: expected {expected}, got {got}")]
    Desync {
        from: usize,
        expected: RoundLabel,
        got: RoundLabel,
    },

    #[error("party {0} disconnected")]
    Disconnected(usize),

    #[error("invalid party id {0}")]
    InvalidParty(usize),

    #[error("malformed frame: {0}")]
    Frame(String),

    #[error("topology: {0}")]
    Topology(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RoundLabel {
    pub tag: String,
    pub round: u32,
}

impl RoundLabel {
    pub fn new(tag: impl Into<String>, round: u32) -> Self {
        Self {
            tag: tag.into(),
            round,
        }
    }

    fn encode_into(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&(self.tag.len() as u32).to_be_bytes());
        out.extend_from_slice(self.tag.as_bytes());
        out.extend_from_slice(&self.round.to_be_bytes());
    }

    fn decode(frame: &[u8]) -> Result<(Self, &[u8]), TransportError> {
        let short = || TransportError::Frame("frame shorter than its label".into());
        let tag_len =
            u32::from_be_bytes(frame.get(..4).ok_or_else(short)?.try_into().unwrap()) as usize;
        let tag = frame.get(4..4 + tag_len).ok_or_else(short)?;
        let tag = String::from_utf8(tag.to_vec())
            .map_err(|_| TransportError::Frame("label tag is not utf-8".into()))?;
        let round = frame.get(4 + tag_len..8 + tag_len).ok_or_else(short)?;
        let round = u32::from_be_bytes(round.try_into().unwrap());
        Ok((Self { tag, round }, &frame[8 + tag_len..]))
    }
}

impl fmt::Display for RoundLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}#{}", self.tag, self.round)
    }
}

/// Per-party outbound traffic counters. Bytes count payloads only, so both
/// backends report identical numbers for identical runs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TrafficStats {
    pub messages_sent: u64,
    pub bytes_sent: u64,
    pub broadcasts: u64,
}

impl std::ops::Sub for TrafficStats {
    type Output = TrafficStats;

    fn sub(self, rhs: Self) -> Self {
        TrafficStats {
            messages_sent: self.messages_sent - rhs.messages_sent,
            bytes_sent: self.bytes_sent - rhs.bytes_sent,
            broadcasts: self.broadcasts - rhs.broadcasts,
        }
    }
}

impl std::ops::Add for TrafficStats {
    type Output = TrafficStats;

    fn add(self, rhs: Self) -> Self {
        TrafficStats {
            messages_sent: self.messages_sent + rhs.messages_sent,
            bytes_sent: self.bytes_sent + rhs.bytes_sent,
            broadcasts: self.broadcasts + rhs.broadcasts,
        }
    }
}

trait FrameSink: Send {
    fn send_frame(&mut self, frame: Vec<u8>) -> Result<(), TransportError>;
}

struct ChannelSink {
    to: usize,
    tx: Sender<Vec<u8>>,
}

impl FrameSink for ChannelSink {
    fn send_frame(&mut self, frame: Vec<u8>) -> Result<(), TransportError> {
        self.tx
            .send(frame)
            .map_err(|_| TransportError::Disconnected(self.to))
    }
}

struct TcpSink {
    stream: TcpStream,
}

impl Drop for TcpSink {
    fn drop(&mut self) {
        // The reader thread holds a clone of the socket; shutting down wakes it.
        let _ = self.stream.shutdown(std::net::Shutdown::Both);
    }
}

impl FrameSink for TcpSink {
    fn send_frame(&mut self, frame: Vec<u8>) -> Result<(), TransportError> {
        self.stream.write_all(&(frame.len() as u32).to_be_bytes())?;
        self.stream.write_all(&frame)?;
        Ok(())
    }
}

/// One party's view of the network.
pub struct Network {
    id: usize,
    n: usize,
    sinks: Vec<Option<Box<dyn FrameSink>>>,
    sources: Vec<Option<Receiver<Vec<u8>>>>,
    stats: TrafficStats,
    timeout: Duration,
    round: u32,
    readers: Vec<JoinHandle<()>>,
}

impl fmt::Debug for Network {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Network")
            .field("id", &self.id)
            .field("n", &self.n)
            .field("round", &self.round)
            .field("stats", &self.stats)
            .finish()
    }
}

impl Network {
    /// Fully connected in-process simulator; element `i` belongs to party `i`.
    pub fn in_memory(n: usize) -> Vec<Network> {
        assert!(n >= 1, "need at least one party");
        let mut senders: Vec<Vec<Option<Sender<Vec<u8>>>>> = vec![vec![None; n]; n];
        let mut receivers: Vec<Vec<Option<Receiver<Vec<u8>>>>> =
            (0..n).map(|_| (0..n).map(|_| None).collect()).collect();
        for from in 0..n {
            for to in 0..n {
                if from != to {
                    let (tx, rx) = unbounded();
                    senders[from][to] = Some(tx);
                    receivers[to][from] = Some(rx);
                }
            }
        }
        senders
            .into_iter()
            .zip(receivers)
            .enumerate()
            .map(|(id, (txs, rxs))| Network {
                id,
                n,
                sinks: txs
                    .into_iter()
                    .enumerate()
                    .map(|(to, tx)| {
                        tx.map(|tx| Box::new(ChannelSink { to, tx }) as Box<dyn FrameSink>)
                    })
                    .collect(),
                sources: rxs,
                stats: TrafficStats::default(),
                timeout: DEFAULT_TIMEOUT,
                round: 0,
                readers: Vec::new(),
            })
            .collect()
    }

    /// Connects party `id` to every peer in `topology` over TCP.
    ///
    /// Lower ids accept, higher ids dial; the dialing side announces its id in
    /// a 4-byte big-endian handshake.
    pub fn tcp(
        id: usize,
        topology: &Topology,
        timeout: Duration,
    ) -> Result<Network, TransportError> {
        let addr = topology.addr(id)?;
        let listener = TcpListener::bind(addr)?;
        Self::tcp_with_listener(id, listener, topology, timeout)
    }

    /// Like [`Network::tcp`] with an already bound listener (useful with port 0).
    pub fn tcp_with_listener(
        id: usize,
        listener: TcpListener,
        topology: &Topology,
        timeout: Duration,
    ) -> Result<Network, TransportError> {
        let n = topology.len();
        if id >= n {
            return Err(TransportError::InvalidParty(id));
        }
        let deadline = Instant::now() + timeout;
        let mut streams: Vec<Option<TcpStream>> = (0..n).map(|_| None).collect();

        for (peer, slot) in streams.iter_mut().enumerate().take(id) {
            let addr = topology.addr(peer)?;
            let mut stream = loop {
                match TcpStream::connect_timeout(&addr, Duration::from_millis(500)) {
                    Ok(s) => break s,
                    Err(_) if Instant::now() < deadline => {
                        thread::sleep(Duration::from_millis(20));
                    }
                    Err(_) => {
                        return Err(TransportError::Timeout {
                            from: peer,
                            label: RoundLabel::new("connect", 0),
                        })
                    }
                }
            };
            stream.set_nodelay(true)?;
            stream.write_all(&(id as u32).to_be_bytes())?;
            *slot = Some(stream);
        }

        listener.set_nonblocking(true)?;
        let mut pending = n - 1 - id;
        while pending > 0 {
            match listener.accept() {
                Ok((mut stream, _)) => {
                    stream.set_nonblocking(false)?;
                    stream.set_nodelay(true)?;
                    stream.set_read_timeout(Some(timeout))?;
                    let mut hs = [0u8; 4];
                    stream.read_exact(&mut hs)?;
                    stream.set_read_timeout(None)?;
                    let peer = u32::from_be_bytes(hs) as usize;
                    if peer <= id || peer >= n || streams[peer].is_some() {
                        return Err(TransportError::Topology(format!(
                            "unexpected handshake from party {peer}"
                        )));
                    }
                    streams[peer] = Some(stream);
                    pending -= 1;
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        let missing = (id + 1..n).find(|p| streams[*p].is_none()).unwrap_or(id);
                        return Err(TransportError::Timeout {
                            from: missing,
                            label: RoundLabel::new("accept", 0),
                        });
                    }
                    thread::sleep(Duration::from_millis(10));
                }
                Err(e) => return Err(e.into()),
            }
        }

        let mut sinks: Vec<Option<Box<dyn FrameSink>>> = Vec::with_capacity(n);
        let mut sources = Vec::with_capacity(n);
        let mut readers = Vec::new();
        for stream in streams {
            match stream {
                None => {
                    sinks.push(None);
                    sources.push(None);
                }
                Some(stream) => {
                    let reader = stream.try_clone()?;
                    let (tx, rx) = unbounded();
                    readers.push(thread::spawn(move || read_frames(reader, tx)));
                    sinks.push(Some(Box::new(TcpSink { stream }) as Box<dyn FrameSink>));
                    sources.push(Some(rx));
                }
            }
        }
        Ok(Network {
            id,
            n,
            sinks,
            sources,
            stats: TrafficStats::default(),
            timeout,
            round: 0,
            readers,
        })
    }

    pub fn party_id(&self) -> usize {
        self.id
    }

    pub fn n_parties(&self) -> usize {
        self.n
    }

    pub fn stats(&self) -> TrafficStats {
        self.stats
    }

    pub fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }

    /// Allocates the next round label. All parties run the same deterministic
    /// schedule, so their counters agree as long as they stay in sync.
    pub fn next_label(&mut self, tag: &str) -> RoundLabel {
        self.round += 1;
        RoundLabel::new(tag, self.round)
    }

    pub fn send(
        &mut self,
        to: usize,
        label: &RoundLabel,
        payload: &[u8],
    ) -> Result<(), TransportError> {
        let sink = self
            .sinks
            .get_mut(to)
            .and_then(Option::as_mut)
            .ok_or(TransportError::InvalidParty(to))?;
        let mut frame = Vec::with_capacity(payload.len() + label.tag.len() + 8);
        label.encode_into(&mut frame);
        frame.extend_from_slice(payload);
        sink.send_frame(frame)?;
        self.stats.messages_sent += 1;
        self.stats.bytes_sent += payload.len() as u64;
        Ok(())
    }

    /// Blocking receive of the next message from `from`, which must carry `label`.
    pub fn recv(&mut self, from: usize, label: &RoundLabel) -> Result<Vec<u8>, TransportError> {
        let rx = self
            .sources
            .get(from)
            .and_then(Option::as_ref)
            .ok_or(TransportError::InvalidParty(from))?;
        let frame = rx.recv_timeout(self.timeout).map_err(|e| match e {
            RecvTimeoutError::Timeout => TransportError::Timeout {
                from,
                label: label.clone(),
            },
            RecvTimeoutError::Disconnected => TransportError::Disconnected(from),
        })?;
        let (got, payload) = RoundLabel::decode(&frame)?;
        if &got != label {
            return Err(TransportError::Desync {
                from,
                expected: label.clone(),
                got,
            });
        }
        Ok(payload.to_vec())
    }

    /// Sends `payload` to every other party and returns their payloads in
    /// party-id order, excluding our own.
    pub fn broadcast(
        &mut self,
        label: &RoundLabel,
        payload: &[u8],
    ) -> Result<Vec<Vec<u8>>, TransportError> {
        for to in 0..self.n {
            if to != self.id {
                self.send(to, label, payload)?;
            }
        }
        self.stats.broadcasts += 1;
        let mut out = Vec::with_capacity(self.n.saturating_sub(1));
        for from in 0..self.n {
            if from != self.id {
                out.push(self.recv(from, label)?);
            }
        }
        Ok(out)
    }

    /// Broadcast under a fresh label; returns all N payloads indexed by party
    /// id (our own included).
    pub fn exchange(
        &mut self,
        tag: &str,
        payload: Vec<u8>,
    ) -> Result<Vec<Vec<u8>>, TransportError> {
        let label = self.next_label(tag);
        let others = self.broadcast(&label, &payload)?;
        let mut all = Vec::with_capacity(self.n);
        let mut others = others.into_iter();
        for p in 0..self.n {
            if p == self.id {
                all.push(payload.clone());
            } else {
                all.push(others.next().expect("one payload per peer"));
            }
        }
        Ok(all)
    }

    /// `owner` sends `payload` to everyone; everyone returns the owner's payload.
    pub fn distribute(
        &mut self,
        tag: &str,
        owner: usize,
        payload: Option<&[u8]>,
    ) -> Result<Vec<u8>, TransportError> {
        let label = self.next_label(tag);
        if self.id == owner {
            let payload = payload.expect("owner must supply the payload");
            for to in 0..self.n {
                if to != self.id {
                    self.send(to, &label, payload)?;
                }
            }
            Ok(payload.to_vec())
        } else {
            self.recv(owner, &label)
        }
    }
}

impl Drop for Network {
    fn drop(&mut self) {
        // Closing the sinks lets peers (and our own readers) observe the disconnect.
        self.sinks.clear();
        self.sources.clear();
        for r in self.readers.drain(..) {
            let _ = r.join();
        }
    }
}

fn read_frames(stream: TcpStream, tx: Sender<Vec<u8>>) {
    let mut reader = BufReader::new(stream);
    loop {
        let mut len = [0u8; 4];
        if reader.read_exact(&mut len).is_err() {
            return;
        }
        let len = u32::from_be_bytes(len) as usize;
        if len > MAX_FRAME {
            return;
        }
        let mut frame = vec![0u8; len];
        if reader.read_exact(&mut frame).is_err() {
            return;
        }
        if tx.send(frame).is_err() {
            return;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartyAddress {
    pub party_id: usize,
    pub endpoint: String,
}

/// Party id to `host:port` map.
///
/// Text format: one `<party_id> <host:port>` pair per line; blank lines and
/// lines starting with `#` are ignored. Ids must be exactly `0..N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Topology {
    parties: Vec<PartyAddress>,
}

impl Topology {
    pub fn new(endpoints: Vec<String>) -> Self {
        Self {
            parties: endpoints
                .into_iter()
                .enumerate()
                .map(|(party_id, endpoint)| PartyAddress { party_id, endpoint })
                .collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Self, TransportError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(id), Some(endpoint), None) = (parts.next(), parts.next(), parts.next())
            else {
                return Err(TransportError::Topology(format!(
                    "line {}: expected `<party_id> <host:port>`",
                    lineno + 1
                )));
            };
            let party_id: usize = id.parse().map_err(|_| {
                TransportError::Topology(format!("line {}: bad party id `{id}`", lineno + 1))
            })?;
            entries.push(PartyAddress {
                party_id,
                endpoint: endpoint.to_string(),
            });
        }
        entries.sort_by_key(|p| p.party_id);
        for (i, p) in entries.iter().enumerate() {
            if p.party_id != i {
                return Err(TransportError::Topology(format!(
                    "party ids must be 0..N without gaps or duplicates (saw {})",
                    p.party_id
                )));
            }
        }
        if entries.is_empty() {
            return Err(TransportError::Topology("no parties".into()));
        }
        Ok(Self { parties: entries })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, TransportError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        self.parties
            .iter()
            .map(|p| format!("{} {}\n", p.party_id, p.endpoint))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.parties.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parties.is_empty()
    }

    pub fn addr(&self, id: usize) -> Result<SocketAddr, TransportError> {
        let p = self
            .parties
            .get(id)
            .ok_or(TransportError::InvalidParty(id))?;
        p.endpoint
            .to_socket_addrs()?
            .next()
            .ok_or_else(|| TransportError::Topology(format!("cannot resolve {}", p.endpoint)))
    }
}
