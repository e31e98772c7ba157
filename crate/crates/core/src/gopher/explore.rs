//! Exhaustive exploration of the manager/worker protocol state space.
//!
//! Workers are modelled by [`WorkerProtocol`] and the manager by
//! [`ManagerProtocol`]. Control messages to the manager arrive in any
//! order; each worker's inbound control channel is FIFO. Every worker
//! decision (ready to halt, or sync with one of a few send patterns) is
//! tried in every reachable state, up to a superstep bound.

use std::collections::{BTreeMap, HashSet, VecDeque};

use super::protocol::{Control, ManagerAction, ManagerProtocol, ProtocolError, WorkerPhase, WorkerProtocol};

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Exploration {
    pub states: usize,
    /// Reachable states where the run terminated.
    pub terminations: usize,
    /// Reachable states where the superstep bound stopped the run.
    pub bounded: usize,
    pub violations: Vec<String>,
}

#[derive(Debug, Clone)]
struct State {
    manager: ManagerProtocol,
    workers: Vec<WorkerProtocol>,
    to_manager: Vec<Control>,
    to_workers: Vec<VecDeque<Control>>,
    /// Data envelopes per destination, keyed by the superstep they were sent in.
    in_flight: Vec<BTreeMap<u64, u64>>,
    /// Reports received by the manager in the current superstep.
    round: Vec<Option<bool>>,
    stopped: bool,
}

impl State {
    fn key(&self) -> String {
        let mut pending: Vec<String> = self.to_manager.iter().map(|c| format!("{c:?}")).collect();
        pending.sort();
        format!(
            "{:?}|{:?}|{pending:?}|{:?}|{:?}|{:?}|{}",
            self.manager, self.workers, self.to_workers, self.in_flight, self.round, self.stopped
        )
    }
}

fn choices(k: usize, me: usize, expected: u64) -> Vec<Option<Vec<u64>>> {
    let mut out = Vec::new();
    if expected == 0 {
        out.push(None);
    }
    out.push(Some(vec![0; k]));
    if k > 1 {
        let mut one = vec![0; k];
        one[(me + 1) % k] = 1;
        out.push(Some(one));
        let all: Vec<u64> = (0..k).map(|w| u64::from(w != me)).collect();
        out.push(Some(all));
    }
    out
}

struct Explorer {
    k: usize,
    seen: HashSet<String>,
    queue: VecDeque<State>,
    report: Exploration,
}

impl Explorer {
    fn violation(&mut self, what: String) {
        if self.report.violations.len() < 20 {
            self.report.violations.push(what);
        }
    }

    fn push(&mut self, s: State) {
        if self.seen.insert(s.key()) {
            self.queue.push_back(s);
        }
    }

    fn check(&mut self, s: &State) {
        let steps: Vec<u64> = s.workers.iter().map(WorkerProtocol::superstep).collect();
        let (lo, hi) = (steps.iter().min().copied(), steps.iter().max().copied());
        if let (Some(lo), Some(hi)) = (lo, hi) {
            if hi - lo > 1 {
                self.violation(format!("superstep skew {steps:?}"));
            }
        }
    }

    fn manager_step(&mut self, s: &State, i: usize) {
        let mut n = s.clone();
        let c = n.to_manager.remove(i);
        let (worker, ready) = match &c {
            Control::Sync { worker, .. } => (*worker, false),
            Control::ReadyToHalt { worker, .. } => (*worker, true),
            other => {
                self.violation(format!("worker sent {other:?}"));
                return;
            }
        };
        n.round[worker] = Some(ready);
        let complete = n.round.iter().all(Option::is_some);
        let all_ready = n.round.iter().all(|r| *r == Some(true));
        match n.manager.on_control(c) {
            Ok(ManagerAction::Wait) => {
                if complete {
                    self.violation("manager waits after every worker reported".into());
                }
            }
            Ok(ManagerAction::Resume { superstep, expected }) => {
                if all_ready {
                    self.violation(format!("resume into {superstep} although every worker is ready to halt"));
                }
                n.round = vec![None; self.k];
                for (w, e) in expected.into_iter().enumerate() {
                    n.to_workers[w].push_back(Control::Resume { superstep, expected: e });
                }
            }
            Ok(ManagerAction::Terminate { superstep }) => {
                if !all_ready {
                    self.violation(format!("terminate in {superstep} while some worker synced"));
                }
                if n.in_flight.iter().any(|m| m.values().any(|&c| c > 0)) {
                    self.violation(format!("terminate in {superstep} with messages in flight"));
                }
                for q in &mut n.to_workers {
                    q.push_back(Control::Terminate { superstep });
                }
            }
            Err(ProtocolError::SuperstepLimit(_)) => {
                n.stopped = true;
            }
            Err(e) => {
                self.violation(format!("manager rejected a well-formed report: {e}"));
                return;
            }
        }
        self.push(n);
    }

    fn worker_delivery(&mut self, s: &State, w: usize) {
        let mut n = s.clone();
        let c = n.to_workers[w].pop_front().expect("non-empty");
        match c {
            Control::Resume { superstep, expected } => {
                if let Err(e) = n.workers[w].on_resume(superstep, expected) {
                    self.violation(format!("worker {w} rejected resume: {e}"));
                    return;
                }
                let arrived = n.in_flight[w].remove(&(superstep - 1)).unwrap_or(0);
                if arrived != expected {
                    self.violation(format!("worker {w} told to expect {expected}, {arrived} in flight"));
                }
            }
            Control::Terminate { superstep } => {
                if let Err(e) = n.workers[w].on_terminate(superstep) {
                    self.violation(format!("worker {w} rejected terminate: {e}"));
                    return;
                }
            }
            other => {
                self.violation(format!("manager sent {other:?}"));
                return;
            }
        }
        self.check(&n);
        self.push(n);
    }

    fn worker_decision(&mut self, s: &State, w: usize) {
        let expected = s.workers[w].expected();
        if expected > 0 && s.workers[w].clone().ready_to_halt().is_ok() {
            self.violation(format!("worker {w} allowed to halt with {expected} inbound"));
        }
        for choice in choices(self.k, w, expected) {
            let mut n = s.clone();
            let t = n.workers[w].superstep();
            let c = match choice {
                None => n.workers[w].ready_to_halt(),
                Some(sent) => {
                    for (dest, &c) in sent.iter().enumerate() {
                        if c > 0 {
                            *n.in_flight[dest].entry(t).or_insert(0) += c;
                        }
                    }
                    n.workers[w].sync(sent)
                }
            };
            match c {
                Ok(c) => {
                    n.to_manager.push(c);
                    self.push(n);
                }
                Err(e) => self.violation(format!("worker {w} could not report: {e}")),
            }
        }
    }

    fn expand(&mut self, s: State) {
        self.report.states += 1;
        if s.stopped {
            self.report.bounded += 1;
            return;
        }
        let mut moved = false;
        for i in 0..s.to_manager.len() {
            moved = true;
            self.manager_step(&s, i);
        }
        for w in 0..self.k {
            if !s.to_workers[w].is_empty() {
                moved = true;
                self.worker_delivery(&s, w);
            }
            if s.workers[w].phase() == WorkerPhase::Working {
                moved = true;
                self.worker_decision(&s, w);
            }
        }
        if !moved {
            if s.workers.iter().all(|w| w.phase() == WorkerPhase::Terminated) {
                self.report.terminations += 1;
            } else {
                self.violation(format!("deadlock: {:?}", s.workers));
            }
        }
    }
}

/// Explores every interleaving for `k` workers up to `max_supersteps`.
pub fn explore(k: usize, max_supersteps: u64) -> Exploration {
    let mut manager = ManagerProtocol::new(k, max_supersteps);
    let mut to_workers = vec![VecDeque::new(); k];
    if let ManagerAction::Resume { superstep, expected } = manager.start() {
        for (w, e) in expected.into_iter().enumerate() {
            to_workers[w].push_back(Control::Resume { superstep, expected: e });
        }
    }
    let start = State {
        manager,
        workers: (0..k).map(|w| WorkerProtocol::new(w, k)).collect(),
        to_manager: Vec::new(),
        to_workers,
        in_flight: vec![BTreeMap::new(); k],
        round: vec![None; k],
        stopped: false,
    };
    let mut ex = Explorer {
        k,
        seen: HashSet::new(),
        queue: VecDeque::new(),
        report: Exploration::default(),
    };
    ex.push(start);
    while let Some(s) = ex.queue.pop_front() {
        ex.expand(s);
    }
    ex.report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_worker_space_is_clean() {
        let r = explore(1, 3);
        assert!(r.violations.is_empty(), "{:?}", r.violations);
        assert!(r.terminations > 0);
    }
}
