//! Worker/manager control protocol.
//!
//! Superstep `t` starts when the manager sends `Resume { superstep: t,
//! expected }` to every worker, where `expected` is the number of data
//! envelopes addressed to that worker during `t - 1`. A worker first drains
//! exactly that many envelopes, then either computes and answers `Sync` with
//! its per-destination send counts, or, having nothing to compute, answers
//! `ReadyToHalt`. Once every worker has reported for `t`, the manager sends
//! `Terminate` if all were ready to halt and `Resume { t + 1 }` otherwise.

use thiserror::Error;

use super::codec::{CodecError, Decoder, Encoder};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Control {
    Sync { worker: usize, superstep: u64, sent: Vec<u64> },
    ReadyToHalt { worker: usize, superstep: u64 },
    Resume { superstep: u64, expected: u64 },
    Terminate { superstep: u64 },
    /// A worker failed; carries a rendered diagnostic.
    Abort { worker: Option<usize>, reason: String },
    /// First frame on every socket connection.
    Hello { worker: usize },
}

impl Control {
    pub fn encode(&self, enc: &mut Encoder) {
        match self {
            Control::Sync { worker, superstep, sent } => {
                enc.u8(0).u64(*worker as u64).u64(*superstep).u64(sent.len() as u64);
                for s in sent {
                    enc.u64(*s);
                }
            }
            Control::ReadyToHalt { worker, superstep } => {
                enc.u8(1).u64(*worker as u64).u64(*superstep);
            }
            Control::Resume { superstep, expected } => {
                enc.u8(2).u64(*superstep).u64(*expected);
            }
            Control::Terminate { superstep } => {
                enc.u8(3).u64(*superstep);
            }
            Control::Abort { worker, reason } => {
                enc.u8(4).u64(worker.map_or(0, |w| w as u64 + 1)).str(reason);
            }
            Control::Hello { worker } => {
                enc.u8(5).u64(*worker as u64);
            }
        }
    }

    pub fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let c = match dec.u8()? {
            0 => {
                let worker = dec.u64()? as usize;
                let superstep = dec.u64()?;
                let n = dec.length_prefix()?;
                let sent = (0..n).map(|_| dec.u64()).collect::<Result<_, _>>()?;
                Control::Sync { worker, superstep, sent }
            }
            1 => Control::ReadyToHalt {
                worker: dec.u64()? as usize,
                superstep: dec.u64()?,
            },
            2 => Control::Resume {
                superstep: dec.u64()?,
                expected: dec.u64()?,
            },
            3 => Control::Terminate { superstep: dec.u64()? },
            4 => {
                let w = dec.u64()?;
                Control::Abort {
                    worker: w.checked_sub(1).map(|w| w as usize),
                    reason: dec.string()?,
                }
            }
            5 => Control::Hello {
                worker: dec.u64()? as usize,
            },
            other => {
                return Err(CodecError {
                    pos: 0,
                    reason: format!("unknown control kind {other}"),
                })
            }
        };
        Ok(c)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ProtocolError {
    #[error("protocol error in superstep {superstep}: worker {worker} reported for superstep {got}")]
    WrongSuperstep { superstep: u64, worker: usize, got: u64 },
    #[error("protocol error in superstep {superstep}: duplicate report from worker {worker}")]
    DuplicateReport { superstep: u64, worker: usize },
    #[error("protocol error in superstep {superstep}: unknown worker {worker}")]
    UnknownWorker { superstep: u64, worker: usize },
    #[error("protocol error in superstep {superstep}: worker {worker} ready to halt with {expected} inbound envelopes")]
    ReadyWithInbound { superstep: u64, worker: usize, expected: u64 },
    #[error("protocol error in superstep {superstep}: worker {worker} sent {len} send counts for {k} workers")]
    BadCounts { superstep: u64, worker: usize, len: usize, k: usize },
    #[error("protocol error in superstep {superstep}: worker {worker} counted envelopes to itself")]
    SelfSend { superstep: u64, worker: usize },
    #[error("protocol error in superstep {superstep}: unexpected {what}")]
    Unexpected { superstep: u64, what: String },
    #[error("protocol error in superstep {superstep}: received {received} envelopes, expected {expected}")]
    EnvelopeCount { superstep: u64, received: u64, expected: u64 },
    #[error("superstep limit {0} reached without termination")]
    SuperstepLimit(u64),
}

/// What the manager must do after handling one control message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ManagerAction {
    Wait,
    /// Send `Resume { superstep, expected[w] }` to each worker `w`.
    Resume { superstep: u64, expected: Vec<u64> },
    /// Send `Terminate` to every worker.
    Terminate { superstep: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Report {
    Sync(Vec<u64>),
    Ready,
}

/// Manager side of the protocol, independent of any transport.
#[derive(Debug, Clone)]
pub struct ManagerProtocol {
    k: usize,
    superstep: u64,
    expected: Vec<u64>,
    reports: Vec<Option<Report>>,
    max_supersteps: u64,
    last_sync: u64,
    done: bool,
}

impl ManagerProtocol {
    pub fn new(k: usize, max_supersteps: u64) -> Self {
        ManagerProtocol {
            k,
            superstep: 0,
            expected: vec![0; k],
            reports: vec![None; k],
            max_supersteps,
            last_sync: 0,
            done: false,
        }
    }

    /// The opening `Resume` for superstep 1.
    pub fn start(&mut self) -> ManagerAction {
        self.superstep = 1;
        ManagerAction::Resume {
            superstep: 1,
            expected: vec![0; self.k],
        }
    }

    pub fn superstep(&self) -> u64 {
        self.superstep
    }

    /// Last superstep in which some worker computed.
    pub fn last_sync(&self) -> u64 {
        self.last_sync
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn on_control(&mut self, c: Control) -> Result<ManagerAction, ProtocolError> {
        let t = self.superstep;
        if self.done || t == 0 {
            return Err(ProtocolError::Unexpected {
                superstep: t,
                what: format!("{c:?} outside a superstep"),
            });
        }
        let (worker, got, report) = match c {
            Control::Sync { worker, superstep, sent } => (worker, superstep, Report::Sync(sent)),
            Control::ReadyToHalt { worker, superstep } => (worker, superstep, Report::Ready),
            other => {
                return Err(ProtocolError::Unexpected {
                    superstep: t,
                    what: format!("{other:?} at manager"),
                })
            }
        };
        if worker >= self.k {
            return Err(ProtocolError::UnknownWorker { superstep: t, worker });
        }
        if got != t {
            return Err(ProtocolError::WrongSuperstep { superstep: t, worker, got });
        }
        if self.reports[worker].is_some() {
            return Err(ProtocolError::DuplicateReport { superstep: t, worker });
        }
        match &report {
            Report::Ready if self.expected[worker] > 0 => {
                return Err(ProtocolError::ReadyWithInbound {
                    superstep: t,
                    worker,
                    expected: self.expected[worker],
                })
            }
            Report::Sync(sent) if sent.len() != self.k => {
                return Err(ProtocolError::BadCounts {
                    superstep: t,
                    worker,
                    len: sent.len(),
                    k: self.k,
                })
            }
            Report::Sync(sent) if sent[worker] != 0 => {
                return Err(ProtocolError::SelfSend { superstep: t, worker });
            }
            _ => {}
        }
        self.reports[worker] = Some(report);
        if self.reports.iter().any(Option::is_none) {
            return Ok(ManagerAction::Wait);
        }

        let reports = std::mem::replace(&mut self.reports, vec![None; self.k]);
        if reports.iter().all(|r| matches!(r, Some(Report::Ready))) {
            self.done = true;
            return Ok(ManagerAction::Terminate { superstep: t });
        }
        self.last_sync = t;
        if t >= self.max_supersteps {
            self.done = true;
            return Err(ProtocolError::SuperstepLimit(self.max_supersteps));
        }
        let mut expected = vec![0u64; self.k];
        for r in reports.iter().flatten() {
            if let Report::Sync(sent) = r {
                for (e, s) in expected.iter_mut().zip(sent) {
                    *e += s;
                }
            }
        }
        self.superstep = t + 1;
        self.expected = expected.clone();
        Ok(ManagerAction::Resume {
            superstep: t + 1,
            expected,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorkerPhase {
    /// Waiting for `Resume` (or `Terminate`) after reporting `superstep`.
    AwaitResume,
    /// Resumed into `superstep`; draining inbound and computing.
    Working,
    Terminated,
}

/// Worker side of the protocol, independent of any transport.
#[derive(Debug, Clone)]
pub struct WorkerProtocol {
    worker: usize,
    k: usize,
    superstep: u64,
    expected: u64,
    phase: WorkerPhase,
}

impl WorkerProtocol {
    pub fn new(worker: usize, k: usize) -> Self {
        WorkerProtocol {
            worker,
            k,
            superstep: 0,
            expected: 0,
            phase: WorkerPhase::AwaitResume,
        }
    }

    pub fn superstep(&self) -> u64 {
        self.superstep
    }

    pub fn expected(&self) -> u64 {
        self.expected
    }

    pub fn phase(&self) -> WorkerPhase {
        self.phase
    }

    fn unexpected(&self, what: String) -> ProtocolError {
        ProtocolError::Unexpected {
            superstep: self.superstep,
            what,
        }
    }

    pub fn on_resume(&mut self, superstep: u64, expected: u64) -> Result<(), ProtocolError> {
        if self.phase != WorkerPhase::AwaitResume || superstep != self.superstep + 1 {
            return Err(self.unexpected(format!("resume for superstep {superstep} in phase {:?}", self.phase)));
        }
        self.superstep = superstep;
        self.expected = expected;
        self.phase = WorkerPhase::Working;
        Ok(())
    }

    pub fn on_terminate(&mut self, superstep: u64) -> Result<(), ProtocolError> {
        if self.phase != WorkerPhase::AwaitResume || superstep != self.superstep {
            return Err(self.unexpected(format!("terminate for superstep {superstep} in phase {:?}", self.phase)));
        }
        self.phase = WorkerPhase::Terminated;
        Ok(())
    }

    pub fn sync(&mut self, sent: Vec<u64>) -> Result<Control, ProtocolError> {
        if self.phase != WorkerPhase::Working || sent.len() != self.k {
            return Err(self.unexpected(format!("sync in phase {:?}", self.phase)));
        }
        self.phase = WorkerPhase::AwaitResume;
        Ok(Control::Sync {
            worker: self.worker,
            superstep: self.superstep,
            sent,
        })
    }

    pub fn ready_to_halt(&mut self) -> Result<Control, ProtocolError> {
        if self.phase != WorkerPhase::Working {
            return Err(self.unexpected(format!("ready to halt in phase {:?}", self.phase)));
        }
        if self.expected > 0 {
            return Err(ProtocolError::ReadyWithInbound {
                superstep: self.superstep,
                worker: self.worker,
                expected: self.expected,
            });
        }
        self.phase = WorkerPhase::AwaitResume;
        Ok(Control::ReadyToHalt {
            worker: self.worker,
            superstep: self.superstep,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round(c: Control) {
        let mut e = Encoder::new();
        c.encode(&mut e);
        let b = e.into_bytes();
        let mut d = Decoder::new(&b);
        assert_eq!(Control::decode(&mut d).unwrap(), c);
        d.finish().unwrap();
    }

    #[test]
    fn control_codec_round_trips() {
        round(Control::Sync {
            worker: 3,
            superstep: 9,
            sent: vec![1, 0, 300],
        });
        round(Control::ReadyToHalt { worker: 0, superstep: 1 });
        round(Control::Resume { superstep: 2, expected: 5 });
        round(Control::Terminate { superstep: 4 });
        round(Control::Abort {
            worker: None,
            reason: "x".into(),
        });
        round(Control::Abort {
            worker: Some(0),
            reason: String::new(),
        });
        round(Control::Hello { worker: 2 });
    }

    #[test]
    fn both_sync_resumes_both() {
        let mut m = ManagerProtocol::new(2, 100);
        m.start();
        let s = |w| Control::Sync {
            worker: w,
            superstep: 1,
            sent: vec![0, 0],
        };
        assert_eq!(m.on_control(s(0)).unwrap(), ManagerAction::Wait);
        assert_eq!(
            m.on_control(s(1)).unwrap(),
            ManagerAction::Resume {
                superstep: 2,
                expected: vec![0, 0]
            }
        );
    }

    #[test]
    fn one_ready_one_sync_resumes() {
        let mut m = ManagerProtocol::new(2, 100);
        m.start();
        m.on_control(Control::ReadyToHalt { worker: 0, superstep: 1 }).unwrap();
        let a = m
            .on_control(Control::Sync {
                worker: 1,
                superstep: 1,
                sent: vec![2, 0],
            })
            .unwrap();
        assert_eq!(
            a,
            ManagerAction::Resume {
                superstep: 2,
                expected: vec![2, 0]
            }
        );
        // worker 0 now has inbound and may not claim readiness
        assert!(matches!(
            m.on_control(Control::ReadyToHalt { worker: 0, superstep: 2 }),
            Err(ProtocolError::ReadyWithInbound { .. })
        ));
    }

    #[test]
    fn duplicate_and_stale_reports_rejected() {
        let mut m = ManagerProtocol::new(2, 100);
        m.start();
        m.on_control(Control::ReadyToHalt { worker: 0, superstep: 1 }).unwrap();
        let dup = m.on_control(Control::ReadyToHalt { worker: 0, superstep: 1 }).unwrap_err();
        assert!(dup.to_string().contains("superstep 1"));
        assert!(matches!(
            m.on_control(Control::ReadyToHalt { worker: 1, superstep: 0 }),
            Err(ProtocolError::WrongSuperstep { .. })
        ));
    }

    #[test]
    fn all_ready_terminates() {
        let mut m = ManagerProtocol::new(2, 100);
        m.start();
        m.on_control(Control::ReadyToHalt { worker: 1, superstep: 1 }).unwrap();
        let a = m.on_control(Control::ReadyToHalt { worker: 0, superstep: 1 }).unwrap();
        assert_eq!(a, ManagerAction::Terminate { superstep: 1 });
        assert!(m.is_done());
    }

    #[test]
    fn superstep_limit() {
        let mut m = ManagerProtocol::new(1, 2);
        m.start();
        let s = |t| Control::Sync {
            worker: 0,
            superstep: t,
            sent: vec![0],
        };
        m.on_control(s(1)).unwrap();
        assert_eq!(m.on_control(s(2)), Err(ProtocolError::SuperstepLimit(2)));
    }

    #[test]
    fn worker_rejects_out_of_order_resume() {
        let mut w = WorkerProtocol::new(0, 2);
        assert!(w.on_resume(2, 0).is_err());
        w.on_resume(1, 0).unwrap();
        assert!(w.on_resume(2, 0).is_err());
        w.sync(vec![0, 0]).unwrap();
        w.on_resume(2, 1).unwrap();
        assert!(w.ready_to_halt().is_err());
    }
}
