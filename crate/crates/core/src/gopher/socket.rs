//! Framed TCP transport. Every worker listens for data from its peers and
//! holds one connection to the manager; each connection opens with a
//! `Hello` control frame naming the sender.

use std::io::{BufReader, BufWriter, Write};
use std::marker::PhantomData;
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::mpsc::{channel, Receiver, RecvTimeoutError, Sender};
use std::sync::Arc;
use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};

use super::codec::Payload;
use super::protocol::Control;
use super::transport::{control_frame, data_frame, decode_frame, read_frame, DataBatch, Incoming, ManagerLink, WorkerLink};
use super::EngineError;
use crate::ids::PartitionId;

const POLL: Duration = Duration::from_millis(2);

fn transport(what: impl std::fmt::Display) -> EngineError {
    EngineError::Transport(what.to_string())
}

/// Connects with retries until `timeout`, since peers start in any order.
fn connect(addr: &str, timeout: Duration) -> Result<TcpStream, EngineError> {
    let deadline = Instant::now() + timeout;
    loop {
        match TcpStream::connect(addr) {
            Ok(s) => {
                s.set_nodelay(true).map_err(transport)?;
                return Ok(s);
            }
            Err(e) if Instant::now() < deadline => {
                debug!("connect {addr}: {e}; retrying");
                thread::sleep(Duration::from_millis(20));
            }
            Err(e) => return Err(transport(format!("cannot connect to {addr}: {e}"))),
        }
    }
}

fn write_frame(stream: &mut BufWriter<TcpStream>, bytes: &[u8]) -> Result<(), EngineError> {
    stream.write_all(bytes).and_then(|_| stream.flush()).map_err(transport)
}

/// Reads frames from `stream` into `tx` until EOF. `Hello` frames are
/// consumed here.
fn spawn_reader<M: Payload>(
    stream: TcpStream,
    tx: Sender<Result<Incoming<M>, EngineError>>,
    eof_is_error: bool,
    label: String,
) {
    thread::spawn(move || {
        let mut r = BufReader::new(stream);
        loop {
            match read_frame(&mut r) {
                Ok((kind, payload)) => match decode_frame::<M>(kind, &payload) {
                    Ok(Incoming::Control(Control::Hello { .. })) => {}
                    Ok(msg) => {
                        if tx.send(Ok(msg)).is_err() {
                            return;
                        }
                    }
                    Err(e) => {
                        let _ = tx.send(Err(transport(format!("bad frame from {label}: {e}"))));
                        return;
                    }
                },
                Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => {
                    if eof_is_error {
                        let _ = tx.send(Err(transport(format!("{label} closed the connection"))));
                    }
                    return;
                }
                Err(e) => {
                    let _ = tx.send(Err(transport(format!("read from {label}: {e}"))));
                    return;
                }
            }
        }
    });
}

pub struct SocketWorkerLink<M> {
    me: usize,
    peers: Vec<String>,
    out: Vec<Option<BufWriter<TcpStream>>>,
    manager: BufWriter<TcpStream>,
    rx: Receiver<Result<Incoming<M>, EngineError>>,
    stop: Arc<AtomicBool>,
    timeout: Duration,
    _m: PhantomData<M>,
}

impl<M: Payload> SocketWorkerLink<M> {
    /// `listener` must already be bound to `peers[me]`.
    pub fn new(
        me: usize,
        listener: TcpListener,
        peers: Vec<String>,
        manager_addr: &str,
        timeout: Duration,
    ) -> Result<Self, EngineError> {
        let (tx, rx) = channel();
        let stop = Arc::new(AtomicBool::new(false));
        listener.set_nonblocking(true).map_err(transport)?;
        {
            let tx = tx.clone();
            let stop = stop.clone();
            thread::spawn(move || {
                while !stop.load(Ordering::Relaxed) {
                    match listener.accept() {
                        Ok((s, addr)) => {
                            let _ = s.set_nonblocking(false);
                            let _ = s.set_nodelay(true);
                            spawn_reader::<M>(s, tx.clone(), false, format!("peer {addr}"));
                        }
                        Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => thread::sleep(POLL),
                        Err(e) => {
                            warn!("accept failed: {e}");
                            thread::sleep(POLL);
                        }
                    }
                }
            });
        }
        let stream = connect(manager_addr, timeout)?;
        spawn_reader::<M>(stream.try_clone().map_err(transport)?, tx, true, "manager".into());
        let mut manager = BufWriter::new(stream);
        write_frame(&mut manager, &control_frame(&Control::Hello { worker: me }))?;
        let out = (0..peers.len()).map(|_| None).collect();
        Ok(SocketWorkerLink {
            me,
            peers,
            out,
            manager,
            rx,
            stop,
            timeout,
            _m: PhantomData,
        })
    }

    fn peer(&mut self, to: usize) -> Result<&mut BufWriter<TcpStream>, EngineError> {
        if self.out.get(to).is_none() {
            return Err(transport(format!("no worker address for partition {to}")));
        }
        if self.out[to].is_none() {
            let mut w = BufWriter::new(connect(&self.peers[to], self.timeout)?);
            write_frame(&mut w, &control_frame(&Control::Hello { worker: self.me }))?;
            self.out[to] = Some(w);
        }
        Ok(self.out[to].as_mut().expect("connected above"))
    }
}

impl<M> Drop for SocketWorkerLink<M> {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::Relaxed);
    }
}

impl<M: Payload> WorkerLink<M> for SocketWorkerLink<M> {
    fn send_data(&mut self, to: PartitionId, batch: DataBatch<M>) -> Result<(), EngineError> {
        let bytes = data_frame(&batch);
        write_frame(self.peer(to.index())?, &bytes)
    }

    fn send_control(&mut self, c: Control) -> Result<(), EngineError> {
        write_frame(&mut self.manager, &control_frame(&c))
    }

    fn recv(&mut self) -> Result<Incoming<M>, EngineError> {
        match self.rx.recv_timeout(self.timeout) {
            Ok(r) => r,
            Err(RecvTimeoutError::Timeout) => Err(transport(format!("no message within {:?}", self.timeout))),
            Err(RecvTimeoutError::Disconnected) => Err(transport("all connections closed")),
        }
    }
}

pub struct SocketManagerLink {
    workers: Vec<BufWriter<TcpStream>>,
    rx: Receiver<Result<Control, EngineError>>,
    timeout: Duration,
}

impl SocketManagerLink {
    /// Waits for `k` workers to connect and introduce themselves.
    pub fn accept(listener: &TcpListener, k: usize, timeout: Duration) -> Result<Self, EngineError> {
        let deadline = Instant::now() + timeout;
        listener.set_nonblocking(true).map_err(transport)?;
        let (tx, rx) = channel::<Result<Incoming<()>, EngineError>>();
        let mut slots: Vec<Option<BufWriter<TcpStream>>> = (0..k).map(|_| None).collect();
        let mut connected = 0;
        while connected < k {
            match listener.accept() {
                Ok((s, addr)) => {
                    s.set_nonblocking(false).map_err(transport)?;
                    s.set_nodelay(true).map_err(transport)?;
                    s.set_read_timeout(Some(timeout)).map_err(transport)?;
                    let mut r = BufReader::new(s.try_clone().map_err(transport)?);
                    let (kind, payload) = read_frame(&mut r).map_err(transport)?;
                    s.set_read_timeout(None).map_err(transport)?;
                    let worker = match decode_frame::<()>(kind, &payload) {
                        Ok(Incoming::Control(Control::Hello { worker })) if worker < k => worker,
                        other => return Err(transport(format!("bad handshake from {addr}: {other:?}"))),
                    };
                    if slots[worker].is_some() {
                        return Err(transport(format!("worker {worker} connected twice")));
                    }
                    slots[worker] = Some(BufWriter::new(s.try_clone().map_err(transport)?));
                    spawn_reader::<()>(s, tx.clone(), true, format!("worker {worker}"));
                    connected += 1;
                }
                Err(e) if e.kind() == std::io::ErrorKind::WouldBlock => {
                    if Instant::now() >= deadline {
                        return Err(transport(format!("only {connected} of {k} workers connected within {timeout:?}")));
                    }
                    thread::sleep(POLL);
                }
                Err(e) => return Err(transport(e)),
            }
        }
        // control frames only; adapt the generic reader's output
        let (ctx, crx) = channel();
        thread::spawn(move || {
            for msg in rx {
                let out = match msg {
                    Ok(Incoming::Control(c)) => Ok(c),
                    Ok(Incoming::Data(_)) => Err(transport("data frame sent to manager")),
                    Err(e) => Err(e),
                };
                if ctx.send(out).is_err() {
                    return;
                }
            }
        });
        Ok(SocketManagerLink {
            workers: slots.into_iter().map(|s| s.expect("all connected")).collect(),
            rx: crx,
            timeout,
        })
    }
}

impl ManagerLink for SocketManagerLink {
    fn send(&mut self, worker: usize, c: Control) -> Result<(), EngineError> {
        write_frame(&mut self.workers[worker], &control_frame(&c))
    }

    fn recv(&mut self) -> Result<Control, EngineError> {
        match self.rx.recv_timeout(self.timeout) {
            Ok(r) => r,
            Err(RecvTimeoutError::Timeout) => Err(transport(format!("no control message within {:?}", self.timeout))),
            Err(RecvTimeoutError::Disconnected) => Err(transport("all worker connections closed")),
        }
    }

    fn num_workers(&self) -> usize {
        self.workers.len()
    }
}
