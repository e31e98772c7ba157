//! One partition's superstep loop.

use std::collections::HashMap;
use std::time::Instant;

use log::{debug, trace};
use rayon::prelude::*;

use super::app::{ComputeApp, Context, Envelope, GraphView, Outgoing};
use super::config::MessageOrder;
use super::protocol::{Control, ProtocolError, WorkerProtocol};
use super::stats::{LogEntry, WorkerOutcome, WorkerSuperstep};
use super::transport::{DataBatch, Incoming, WorkerLink};
use super::EngineError;
use crate::ids::{PartitionId, SubgraphId};
use crate::model::{Partition, Subgraph};

pub struct WorkerEnv<'a> {
    pub view: &'a GraphView,
    pub k: usize,
    pub order: MessageOrder,
    pub record_messages: bool,
    /// `None` runs Compute calls serially on the worker thread.
    pub pool: Option<&'a rayon::ThreadPool>,
}

struct Slot<S, M> {
    sg: Subgraph,
    state: S,
    halted: bool,
    active: bool,
    inbox: Vec<Envelope<M>>,
    secs: f64,
}

struct Worker<'e, A: ComputeApp> {
    app: &'e A,
    env: &'e WorkerEnv<'e>,
    me: PartitionId,
    ids: Vec<SubgraphId>,
    slots: Vec<Slot<A::State, A::Message>>,
    proto: WorkerProtocol,
    received: HashMap<u64, u64>,
    stash: Vec<DataBatch<A::Message>>,
    steps: Vec<WorkerSuperstep>,
    log: Vec<LogEntry>,
}

/// Runs `partition` to termination, reporting any local failure to the
/// manager before returning it.
pub fn run_worker<A, L>(
    app: &A,
    partition: Partition,
    env: &WorkerEnv<'_>,
    link: &mut L,
) -> Result<WorkerOutcome<A::Value>, EngineError>
where
    A: ComputeApp,
    L: WorkerLink<A::Message>,
{
    let me = partition.id;
    let result = Worker::new(app, partition, env).and_then(|mut w| w.run(link));
    if let Err(e) = &result {
        if !matches!(e, EngineError::Aborted(_)) {
            let _ = link.send_control(Control::Abort {
                worker: Some(me.index()),
                reason: e.to_string(),
            });
        }
    }
    result
}

impl<'e, A: ComputeApp> Worker<'e, A> {
    fn new(app: &'e A, partition: Partition, env: &'e WorkerEnv<'e>) -> Result<Self, EngineError> {
        let me = partition.id;
        let ids: Vec<SubgraphId> = partition.subgraphs.iter().map(Subgraph::id).collect();
        let mut slots = Vec::with_capacity(partition.subgraphs.len());
        for sg in partition.subgraphs {
            let state = app.init(&sg).map_err(|e| EngineError::Compute {
                partition: me,
                subgraph: sg.id(),
                superstep: 0,
                message: e.0,
            })?;
            slots.push(Slot {
                sg,
                state,
                halted: false,
                active: false,
                inbox: Vec::new(),
                secs: 0.0,
            });
        }
        Ok(Worker {
            app,
            env,
            me,
            ids,
            slots,
            proto: WorkerProtocol::new(me.index(), env.k),
            received: HashMap::new(),
            stash: Vec::new(),
            steps: Vec::new(),
            log: Vec::new(),
        })
    }

    fn protocol(&self, what: String) -> EngineError {
        EngineError::Protocol(ProtocolError::Unexpected {
            superstep: self.proto.superstep(),
            what,
        })
    }

    fn deliver(&mut self, batch: DataBatch<A::Message>) -> Result<(), EngineError> {
        for (dest, env) in batch.items {
            let idx = self.ids.binary_search(&dest).map_err(|_| EngineError::Addressing {
                superstep: env.superstep,
                sender: env.source,
                target: dest,
            })?;
            self.slots[idx].inbox.push(env);
        }
        Ok(())
    }

    fn count(&mut self, batch: &DataBatch<A::Message>) {
        *self.received.entry(batch.superstep).or_insert(0) += batch.items.len() as u64;
    }

    fn run<L: WorkerLink<A::Message>>(&mut self, link: &mut L) -> Result<WorkerOutcome<A::Value>, EngineError> {
        loop {
            let (t, expected) = loop {
                match link.recv()? {
                    Incoming::Control(Control::Resume { superstep, expected }) => {
                        self.proto.on_resume(superstep, expected)?;
                        break (superstep, expected);
                    }
                    Incoming::Control(Control::Terminate { superstep }) => {
                        self.proto.on_terminate(superstep)?;
                        debug!("{} terminated after superstep {superstep}", self.me);
                        return Ok(self.outcome());
                    }
                    Incoming::Control(Control::Abort { reason, .. }) => return Err(EngineError::Aborted(reason)),
                    Incoming::Control(other) => return Err(self.protocol(format!("{other:?} at worker"))),
                    Incoming::Data(b) if b.superstep == self.proto.superstep() && b.superstep > 0 => {
                        self.count(&b);
                        self.deliver(b)?;
                    }
                    // a peer resumed first and already sent for the next superstep
                    Incoming::Data(b) if b.superstep == self.proto.superstep() + 1 => {
                        self.count(&b);
                        self.stash.push(b);
                    }
                    Incoming::Data(b) => {
                        return Err(self.protocol(format!("data from {} tagged superstep {}", b.from, b.superstep)))
                    }
                }
            };
            let started = Instant::now();
            let inbound = t - 1;
            while self.received.get(&inbound).copied().unwrap_or(0) < expected {
                match link.recv()? {
                    Incoming::Data(b) if b.superstep == inbound => {
                        self.count(&b);
                        self.deliver(b)?;
                    }
                    Incoming::Data(b) if b.superstep == t => {
                        self.count(&b);
                        self.stash.push(b);
                    }
                    Incoming::Data(b) => {
                        return Err(self.protocol(format!("data from {} tagged superstep {}", b.from, b.superstep)))
                    }
                    Incoming::Control(Control::Abort { reason, .. }) => return Err(EngineError::Aborted(reason)),
                    Incoming::Control(other) => return Err(self.protocol(format!("{other:?} while draining"))),
                }
            }
            let got = self.received.remove(&inbound).unwrap_or(0);
            if got != expected {
                return Err(EngineError::Protocol(ProtocolError::EnvelopeCount {
                    superstep: t,
                    received: got,
                    expected,
                }));
            }
            self.superstep(t, link)?;
            for b in std::mem::take(&mut self.stash) {
                self.deliver(b)?;
            }
            if let Some(last) = self.steps.last_mut() {
                last.wall_secs = started.elapsed().as_secs_f64();
            }
        }
    }

    fn superstep<L: WorkerLink<A::Message>>(&mut self, t: u64, link: &mut L) -> Result<(), EngineError> {
        let deterministic = self.env.order == MessageOrder::Deterministic;
        let mut computed = 0;
        for s in &mut self.slots {
            s.active = !s.halted || !s.inbox.is_empty();
            if s.active {
                computed += 1;
                if deterministic {
                    s.inbox.sort_by_key(|e| (e.source, e.sequence));
                }
            }
        }
        if computed == 0 {
            link.send_control(self.proto.ready_to_halt()?)?;
            self.steps.push(WorkerSuperstep {
                superstep: t,
                ..Default::default()
            });
            return Ok(());
        }
        trace!("{} superstep {t}: {computed} active", self.me);

        let app = self.app;
        let view = self.env.view;
        let step = |s: &mut Slot<A::State, A::Message>| -> Option<Result<Vec<Outgoing<A::Message>>, String>> {
            if !s.active {
                return None;
            }
            let inbox = std::mem::take(&mut s.inbox);
            let mut ctx = Context::new(t, &s.sg, view);
            let t0 = Instant::now();
            let r = app.compute(&s.sg, &mut s.state, &inbox, &mut ctx);
            s.secs += t0.elapsed().as_secs_f64();
            let (out, halted) = ctx.finish();
            s.halted = halted;
            Some(r.map(|_| out).map_err(|e| e.0))
        };
        let results: Vec<_> = match self.env.pool {
            Some(pool) if computed > 1 => pool.install(|| self.slots.par_iter_mut().map(step).collect()),
            _ => self.slots.iter_mut().map(step).collect(),
        };

        let k = self.env.k;
        let mut batches: Vec<Vec<(SubgraphId, Envelope<A::Message>)>> = (0..k).map(|_| Vec::new()).collect();
        let (mut local, mut remote) = (0u64, 0u64);
        for (i, r) in results.into_iter().enumerate() {
            let out = match r {
                None => continue,
                Some(Ok(out)) => out,
                Some(Err(message)) => {
                    return Err(EngineError::Compute {
                        partition: self.me,
                        subgraph: self.ids[i],
                        superstep: t,
                        message,
                    })
                }
            };
            for Outgoing { dest, env } in out {
                if self.env.record_messages {
                    self.log.push(LogEntry {
                        superstep: t,
                        source: env.source,
                        dest,
                    });
                }
                let p = dest.partition();
                if p == self.me {
                    let idx = self.ids.binary_search(&dest).map_err(|_| EngineError::Addressing {
                        superstep: t,
                        sender: env.source,
                        target: dest,
                    })?;
                    self.slots[idx].inbox.push(env);
                    local += 1;
                } else if p.index() < k {
                    batches[p.index()].push((dest, env));
                    remote += 1;
                } else {
                    return Err(EngineError::Addressing {
                        superstep: t,
                        sender: env.source,
                        target: dest,
                    });
                }
            }
        }
        let sent: Vec<u64> = batches.iter().map(|b| b.len() as u64).collect();
        for (p, items) in batches.into_iter().enumerate() {
            if !items.is_empty() {
                let batch = DataBatch {
                    from: self.me,
                    superstep: t,
                    items,
                };
                link.send_data(PartitionId(p as u32), batch)?;
            }
        }
        link.send_control(self.proto.sync(sent)?)?;
        self.steps.push(WorkerSuperstep {
            superstep: t,
            computed,
            generated: local + remote,
            remote,
            local,
            wall_secs: 0.0,
        });
        Ok(())
    }

    fn outcome(&mut self) -> WorkerOutcome<A::Value> {
        let values = self
            .slots
            .iter()
            .flat_map(|s| self.app.values(&s.sg, &s.state))
            .collect();
        WorkerOutcome {
            partition: self.me,
            values,
            supersteps: std::mem::take(&mut self.steps),
            subgraph_secs: self.slots.iter().map(|s| (s.sg.id(), s.secs)).collect(),
            log: std::mem::take(&mut self.log),
        }
    }
}
