//! Transport interface and the in-memory mailbox implementation.

use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::time::Duration;

use super::app::Envelope;
use super::codec::{CodecError, Decoder, Encoder, Payload};
use super::protocol::Control;
use super::EngineError;
use crate::ids::{PartitionId, SubgraphId};

/// All envelopes one worker sends to one other worker in one superstep.
#[derive(Debug, Clone, PartialEq)]
pub struct DataBatch<M> {
    pub from: PartitionId,
    pub superstep: u64,
    pub items: Vec<(SubgraphId, Envelope<M>)>,
}

impl<M: Payload> DataBatch<M> {
    pub fn encode(&self, enc: &mut Encoder) {
        enc.partition(self.from).u64(self.superstep).u64(self.items.len() as u64);
        for (dest, env) in &self.items {
            enc.subgraph(*dest);
            env.encode(enc);
        }
    }

    pub fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let from = dec.partition()?;
        let superstep = dec.u64()?;
        let n = dec.length_prefix()?;
        let items = (0..n)
            .map(|_| Ok((dec.subgraph()?, Envelope::decode(dec)?)))
            .collect::<Result<_, CodecError>>()?;
        Ok(DataBatch { from, superstep, items })
    }
}

#[derive(Debug)]
pub enum Incoming<M> {
    Data(DataBatch<M>),
    Control(Control),
}

/// A worker's connection to its peers and the manager.
pub trait WorkerLink<M>: Send {
    fn send_data(&mut self, to: PartitionId, batch: DataBatch<M>) -> Result<(), EngineError>;
    fn send_control(&mut self, c: Control) -> Result<(), EngineError>;
    fn recv(&mut self) -> Result<Incoming<M>, EngineError>;
}

/// The manager's connection to every worker.
pub trait ManagerLink: Send {
    fn send(&mut self, worker: usize, c: Control) -> Result<(), EngineError>;
    fn recv(&mut self) -> Result<Control, EngineError>;
    fn num_workers(&self) -> usize;
}

pub struct MemoryWorkerLink<M> {
    peers: Vec<Sender<Incoming<M>>>,
    manager: Sender<Control>,
    rx: Receiver<Incoming<M>>,
    timeout: Duration,
}

pub struct MemoryManagerLink<M> {
    workers: Vec<Sender<Incoming<M>>>,
    rx: Receiver<Control>,
    timeout: Duration,
}

/// Mailboxes for `k` workers and one manager.
pub fn memory_links<M>(k: usize, timeout: Duration) -> (Vec<MemoryWorkerLink<M>>, MemoryManagerLink<M>) {
    let (mtx, mrx) = channel();
    let (txs, rxs): (Vec<_>, Vec<_>) = (0..k).map(|_| channel()).unzip();
    let workers = rxs
        .into_iter()
        .map(|rx| MemoryWorkerLink {
            peers: txs.clone(),
            manager: mtx.clone(),
            rx,
            timeout,
        })
        .collect();
    let manager = MemoryManagerLink {
        workers: txs,
        rx: mrx,
        timeout,
    };
    (workers, manager)
}

fn closed() -> EngineError {
    EngineError::Transport("mailbox closed".into())
}

fn recv_timeout<T>(rx: &Receiver<T>, timeout: Duration) -> Result<T, EngineError> {
    rx.recv_timeout(timeout).map_err(|e| match e {
        RecvTimeoutError::Timeout => EngineError::Transport(format!("no message within {timeout:?}")),
        RecvTimeoutError::Disconnected => closed(),
    })
}

impl<M: Send> WorkerLink<M> for MemoryWorkerLink<M> {
    fn send_data(&mut self, to: PartitionId, batch: DataBatch<M>) -> Result<(), EngineError> {
        self.peers
            .get(to.index())
            .ok_or_else(|| EngineError::Transport(format!("no mailbox for {to}")))?
            .send(Incoming::Data(batch))
            .map_err(|_| closed())
    }

    fn send_control(&mut self, c: Control) -> Result<(), EngineError> {
        self.manager.send(c).map_err(|_| closed())
    }

    fn recv(&mut self) -> Result<Incoming<M>, EngineError> {
        recv_timeout(&self.rx, self.timeout)
    }
}

impl<M: Send> ManagerLink for MemoryManagerLink<M> {
    fn send(&mut self, worker: usize, c: Control) -> Result<(), EngineError> {
        // a worker that already exited has nothing left to hear
        let _ = self.workers[worker].send(Incoming::Control(c));
        Ok(())
    }

    fn recv(&mut self) -> Result<Control, EngineError> {
        recv_timeout(&self.rx, self.timeout)
    }

    fn num_workers(&self) -> usize {
        self.workers.len()
    }
}

pub const FRAME_DATA: u8 = 0;
pub const FRAME_CONTROL: u8 = 1;
/// Largest accepted frame payload.
pub const MAX_FRAME: u32 = 1 << 30;

/// `u32 length | u8 kind | payload`, length counting payload bytes only.
pub fn frame(kind: u8, payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(5 + payload.len());
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.push(kind);
    out.extend_from_slice(payload);
    out
}

pub fn read_frame(r: &mut impl std::io::Read) -> std::io::Result<(u8, Vec<u8>)> {
    let mut head = [0u8; 5];
    r.read_exact(&mut head)?;
    let len = u32::from_le_bytes(head[..4].try_into().expect("4 bytes"));
    if len > MAX_FRAME {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("frame of {len} bytes exceeds limit"),
        ));
    }
    let mut payload = vec![0u8; len as usize];
    r.read_exact(&mut payload)?;
    Ok((head[4], payload))
}

pub fn control_frame(c: &Control) -> Vec<u8> {
    let mut e = Encoder::new();
    c.encode(&mut e);
    frame(FRAME_CONTROL, &e.into_bytes())
}

pub fn data_frame<M: Payload>(b: &DataBatch<M>) -> Vec<u8> {
    let mut e = Encoder::new();
    b.encode(&mut e);
    frame(FRAME_DATA, &e.into_bytes())
}

pub fn decode_frame<M: Payload>(kind: u8, payload: &[u8]) -> Result<Incoming<M>, CodecError> {
    let mut d = Decoder::new(payload);
    let msg = match kind {
        FRAME_DATA => Incoming::Data(DataBatch::decode(&mut d)?),
        FRAME_CONTROL => Incoming::Control(Control::decode(&mut d)?),
        other => {
            return Err(CodecError {
                pos: 0,
                reason: format!("unknown frame kind {other}"),
            })
        }
    };
    d.finish()?;
    Ok(msg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gopher::app::Target;
    use crate::ids::VertexId;

    #[test]
    fn data_frame_round_trips() {
        let sg = SubgraphId::new(PartitionId(1), 0);
        let batch = DataBatch {
            from: PartitionId(0),
            superstep: 3,
            items: vec![(
                sg,
                Envelope {
                    source: SubgraphId::new(PartitionId(0), 2),
                    superstep: 3,
                    sequence: 1,
                    target: Target::SubgraphVertex(sg, VertexId(5)),
                    payload: 7u64,
                },
            )],
        };
        let bytes = data_frame(&batch);
        assert_eq!(u32::from_le_bytes(bytes[..4].try_into().unwrap()) as usize, bytes.len() - 5);
        let (kind, payload) = read_frame(&mut bytes.as_slice()).unwrap();
        match decode_frame::<u64>(kind, &payload).unwrap() {
            Incoming::Data(b) => assert_eq!(b, batch),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn oversized_frame_rejected() {
        let mut bytes = (MAX_FRAME + 1).to_le_bytes().to_vec();
        bytes.push(0);
        assert!(read_frame(&mut bytes.as_slice()).is_err());
    }
}
