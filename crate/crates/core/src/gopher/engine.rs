//! Run drivers for both transports.

use std::net::TcpListener;
use std::thread;

use log::info;

use super::app::{ComputeApp, GraphView};
use super::config::{EngineConfig, TransportKind};
use super::manager::run_manager;
use super::socket::{SocketManagerLink, SocketWorkerLink};
use super::stats::{Diagnostics, ExecutionStats, WorkerOutcome};
use super::transport::memory_links;
use super::worker::{run_worker, WorkerEnv};
use super::EngineError;
use crate::gofs::Endpoint;
use crate::ids::{PartitionId, VertexId};
use crate::model::{attach_in_edge_index, Partition};

#[derive(Debug, Clone)]
pub struct RunOutput<V> {
    /// Final values sorted by vertex id.
    pub values: Vec<(VertexId, V)>,
    pub stats: ExecutionStats,
}

/// Sorts partitions, checks ids are exactly `0..k`, and attaches the
/// in-edge index so undirected neighbor queries work on directed graphs.
pub fn prepare(mut partitions: Vec<Partition>) -> Result<Vec<Partition>, EngineError> {
    partitions.sort_by_key(|p| p.id);
    for (i, p) in partitions.iter().enumerate() {
        if p.id.index() != i {
            return Err(EngineError::Config(format!("partition ids must be 0..k, found {} at position {i}", p.id)));
        }
    }
    if partitions.is_empty() {
        return Err(EngineError::Config("no partitions".into()));
    }
    attach_in_edge_index(&mut partitions);
    Ok(partitions)
}

pub fn graph_view(partitions: &[Partition]) -> GraphView {
    let sgs = partitions.iter().flat_map(|p| p.subgraphs.iter().map(|s| s.id())).collect();
    let v = partitions.iter().map(|p| p.num_vertices() as u64).sum();
    GraphView::new(sgs, v)
}

fn is_directed(partitions: &[Partition]) -> bool {
    partitions.iter().flat_map(|p| &p.subgraphs).any(|s| s.is_directed())
}

fn build_pool(width: usize) -> Result<Option<rayon::ThreadPool>, EngineError> {
    if width <= 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(width)
        .build()
        .map(Some)
        .map_err(|e| EngineError::Config(format!("cannot build worker pool: {e}")))
}

/// Picks the error that explains a failed run. Transport failures are
/// usually fallout from a peer that stopped for another reason, and abort
/// notices only relay someone else's error, so both rank last.
fn root_cause(errors: Vec<EngineError>) -> EngineError {
    let rank = |e: &EngineError| match e {
        EngineError::Aborted(_) => 2,
        EngineError::Transport(_) => 1,
        _ => 0,
    };
    errors
        .into_iter()
        .min_by_key(rank)
        .unwrap_or_else(|| EngineError::Transport("run failed without a diagnostic".into()))
}

/// Runs `app` over `partitions` in this process. The socket transport runs
/// workers as threads connected over TCP using the configured addresses.
pub fn run<A: ComputeApp>(
    app: &A,
    partitions: Vec<Partition>,
    config: &EngineConfig,
) -> Result<RunOutput<A::Value>, EngineError> {
    config.check()?;
    let partitions = prepare(partitions)?;
    let k = partitions.len();
    let view = graph_view(&partitions);
    let diagnostics = Diagnostics::from_partitions(&partitions, is_directed(&partitions), config.pool_width);
    let pool = build_pool(config.pool_width)?;
    let env = WorkerEnv {
        view: &view,
        k,
        order: config.message_order,
        record_messages: config.record_messages,
        pool: pool.as_ref(),
    };
    info!("running {} on {k} partitions ({} transport)", app.name(), config.transport);

    let (supersteps, outcomes) = match config.transport {
        TransportKind::Memory => {
            let (links, mut mlink) = memory_links::<A::Message>(k, config.timeout());
            thread::scope(|s| {
                let handles: Vec<_> = partitions
                    .into_iter()
                    .zip(links)
                    .map(|(p, mut link)| {
                        let env = &env;
                        s.spawn(move || run_worker(app, p, env, &mut link))
                    })
                    .collect();
                let m = run_manager(&mut mlink, config.max_supersteps);
                collect(m, handles.into_iter().map(|h| h.join()))
            })?
        }
        TransportKind::Socket => {
            let cluster = config.cluster_view(k)?;
            let addrs = socket_addrs(&cluster, k)?;
            let manager_addr = config
                .manager
                .clone()
                .ok_or_else(|| EngineError::Config("socket transport needs a manager address".into()))?;
            let mlistener = TcpListener::bind(&manager_addr)
                .map_err(|e| EngineError::Transport(format!("bind {manager_addr}: {e}")))?;
            let manager_addr = mlistener.local_addr().map_err(|e| EngineError::Transport(e.to_string()))?.to_string();
            let listeners = addrs
                .iter()
                .map(|a| TcpListener::bind(a).map_err(|e| EngineError::Transport(format!("bind {a}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let peers: Vec<String> = listeners
                .iter()
                .map(|l| l.local_addr().map(|a| a.to_string()))
                .collect::<Result<_, _>>()
                .map_err(|e| EngineError::Transport(e.to_string()))?;
            let timeout = config.timeout();
            thread::scope(|s| {
                let handles: Vec<_> = partitions
                    .into_iter()
                    .zip(listeners)
                    .enumerate()
                    .map(|(i, (p, l))| {
                        let env = &env;
                        let peers = peers.clone();
                        let manager_addr = manager_addr.clone();
                        s.spawn(move || {
                            let mut link = SocketWorkerLink::<A::Message>::new(i, l, peers, &manager_addr, timeout)?;
                            run_worker(app, p, env, &mut link)
                        })
                    })
                    .collect();
                let m = SocketManagerLink::accept(&mlistener, k, timeout)
                    .and_then(|mut link| run_manager(&mut link, config.max_supersteps));
                collect(m, handles.into_iter().map(|h| h.join()))
            })?
        }
    };
    let (values, stats) = ExecutionStats::merge(supersteps, outcomes, diagnostics, config.record_messages);
    Ok(RunOutput { values, stats })
}

type Joined<V> = thread::Result<Result<WorkerOutcome<V>, EngineError>>;

fn collect<V>(
    manager: Result<u64, EngineError>,
    workers: impl Iterator<Item = Joined<V>>,
) -> Result<(u64, Vec<WorkerOutcome<V>>), EngineError> {
    let mut errors = Vec::new();
    let mut outcomes = Vec::new();
    for j in workers {
        match j {
            Ok(Ok(o)) => outcomes.push(o),
            Ok(Err(e)) => errors.push(e),
            Err(_) => errors.push(EngineError::Transport("worker thread panicked".into())),
        }
    }
    match manager {
        Ok(s) if errors.is_empty() => Ok((s, outcomes)),
        Ok(_) => Err(root_cause(errors)),
        Err(e) => {
            errors.push(e);
            Err(root_cause(errors))
        }
    }
}

fn socket_addrs(view: &crate::gofs::ClusterView, k: usize) -> Result<Vec<String>, EngineError> {
    (0..k)
        .map(|i| match view.endpoint(PartitionId(i as u32)) {
            Ok(Endpoint::Socket(a)) => Ok(a.clone()),
            Ok(other) => Err(EngineError::Config(format!("partition {i} has non-socket endpoint {other}"))),
            Err(e) => Err(EngineError::Config(e.to_string())),
        })
        .collect()
}

/// Socket worker for partition `me` in its own process. `partitions` must
/// hold every partition so the in-edge index and graph view are complete;
/// only partition `me` is executed.
pub fn run_socket_worker<A: ComputeApp>(
    app: &A,
    partitions: Vec<Partition>,
    me: PartitionId,
    config: &EngineConfig,
) -> Result<WorkerOutcome<A::Value>, EngineError> {
    config.check()?;
    let partitions = prepare(partitions)?;
    let k = partitions.len();
    let view = graph_view(&partitions);
    let addrs = socket_addrs(&config.cluster_view(k)?, k)?;
    let manager_addr = config
        .manager
        .as_deref()
        .ok_or_else(|| EngineError::Config("socket transport needs a manager address".into()))?;
    let own = addrs
        .get(me.index())
        .ok_or_else(|| EngineError::Config(format!("no worker address for {me}")))?;
    let listener = TcpListener::bind(own).map_err(|e| EngineError::Transport(format!("bind {own}: {e}")))?;
    let partition = partitions
        .into_iter()
        .nth(me.index())
        .ok_or_else(|| EngineError::Config(format!("no partition {me}")))?;
    let pool = build_pool(config.pool_width)?;
    let env = WorkerEnv {
        view: &view,
        k,
        order: config.message_order,
        record_messages: config.record_messages,
        pool: pool.as_ref(),
    };
    let mut link = SocketWorkerLink::<A::Message>::new(me.index(), listener, addrs, manager_addr, config.timeout())?;
    run_worker(app, partition, &env, &mut link)
}

/// Binds the manager address; call before spawning workers so they can
/// connect as soon as they start.
pub fn bind_manager(config: &EngineConfig) -> Result<TcpListener, EngineError> {
    let addr = config
        .manager
        .as_deref()
        .ok_or_else(|| EngineError::Config("socket transport needs a manager address".into()))?;
    TcpListener::bind(addr).map_err(|e| EngineError::Transport(format!("bind {addr}: {e}")))
}

/// Socket manager for `k` out-of-process workers.
pub fn run_socket_manager(listener: &TcpListener, k: usize, config: &EngineConfig) -> Result<u64, EngineError> {
    let mut link = SocketManagerLink::accept(listener, k, config.timeout())?;
    run_manager(&mut link, config.max_supersteps)
}
