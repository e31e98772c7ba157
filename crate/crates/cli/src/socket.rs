//! Multi-process socket runs: one child process per partition, the
//! manager in this process.

use std::fs;
use std::net::TcpListener;
use std::path::Path;
use std::process::{Child, Command, Stdio};

use anyhow::{bail, Context as _, Result};
use log::{debug, info};
use subgraph_core::algorithms::{merge_partition_outcomes, run_partition_worker, AlgorithmConfig, AlgorithmRun};
use subgraph_core::gofs::GraphStore;
use subgraph_core::gopher::config::WorkerAddress;
use subgraph_core::gopher::engine::{bind_manager, run_socket_manager};
use subgraph_core::gopher::{Diagnostics, EngineConfig, WorkerOutcome};
use subgraph_core::model::Partition;
use subgraph_core::PartitionId;

use crate::commands::load;
use crate::{Mode, WorkerArgs};

/// Picks free loopback ports by binding and releasing them.
fn free_ports(n: usize) -> Result<Vec<u16>> {
    let held: Vec<TcpListener> = (0..n)
        .map(|_| TcpListener::bind("127.0.0.1:0"))
        .collect::<Result<_, _>>()
        .context("reserving loopback ports")?;
    held.iter()
        .map(|l| Ok(l.local_addr()?.port()))
        .collect()
}

/// Fills in loopback addresses for anything the configuration leaves open.
fn complete(mut cfg: EngineConfig, k: usize) -> Result<EngineConfig> {
    let ports = free_ports(k + 1)?;
    if cfg.manager.is_none() {
        cfg.manager = Some(format!("127.0.0.1:{}", ports[k]));
    }
    if cfg.workers.is_empty() {
        cfg.workers = (0..k)
            .map(|p| WorkerAddress {
                partition: PartitionId(p as u32),
                host: "127.0.0.1".into(),
                port: ports[p],
            })
            .collect();
    }
    if cfg.workers.iter().any(|w| w.port == 0) {
        bail!("multi-process socket runs need fixed worker ports");
    }
    cfg.cluster_view(k)?;
    Ok(cfg)
}

struct Children(Vec<Child>);

impl Drop for Children {
    fn drop(&mut self) {
        for c in &mut self.0 {
            let _ = c.kill();
            let _ = c.wait();
        }
    }
}

pub fn run_processes(
    store: &Path,
    algo: &AlgorithmConfig,
    mode: Mode,
    partitions: Vec<Partition>,
    engine: &EngineConfig,
) -> Result<AlgorithmRun> {
    let k = partitions.len();
    let engine = complete(engine.clone(), k)?;
    let directed = partitions.iter().flat_map(|p| p.subgraphs.first()).any(|s| s.is_directed());
    let diagnostics = Diagnostics::from_partitions(&partitions, directed, engine.pool_width);
    drop(partitions);

    let dir = tempfile::tempdir().context("creating a scratch directory")?;
    let engine_file = dir.path().join("engine.json");
    let algo_file = dir.path().join("algorithm.json");
    fs::write(&engine_file, serde_json::to_string(&engine)?)?;
    fs::write(&algo_file, serde_json::to_string(algo)?)?;

    let listener = bind_manager(&engine)?;
    let exe = std::env::current_exe().context("locating the executable")?;
    let mut children = Children(Vec::with_capacity(k));
    for p in 0..k {
        let child = Command::new(&exe)
            .arg("worker")
            .arg("--store")
            .arg(store)
            .arg("--partition")
            .arg(p.to_string())
            .arg("--engine")
            .arg(&engine_file)
            .arg("--algorithm")
            .arg(&algo_file)
            .arg("--mode")
            .arg(mode.as_str())
            .arg("--result")
            .arg(dir.path().join(format!("p{p}.json")))
            .stdin(Stdio::null())
            .spawn()
            .with_context(|| format!("starting worker process for partition {p}"))?;
        debug!("worker p{p} is process {}", child.id());
        children.0.push(child);
    }
    info!("started {k} worker processes");
    let supersteps = run_socket_manager(&listener, k, &engine)?;

    let mut outcomes = Vec::with_capacity(k);
    for (p, child) in children.0.iter_mut().enumerate() {
        let status = child.wait()?;
        if !status.success() {
            bail!("worker process for partition {p} exited with {status}");
        }
        let path = dir.path().join(format!("p{p}.json"));
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        let outcome: WorkerOutcome<String> = serde_json::from_str(&text)?;
        outcomes.push(outcome);
    }
    children.0.clear();
    Ok(merge_partition_outcomes(
        algo.algorithm,
        supersteps,
        outcomes,
        diagnostics,
        engine.record_messages,
    )?)
}

pub fn worker(a: &WorkerArgs) -> Result<()> {
    let engine = EngineConfig::from_file(&a.engine)?;
    let algo: AlgorithmConfig = serde_json::from_str(&fs::read_to_string(&a.algorithm)?)?;
    let store = GraphStore::open(&a.store)?;
    let parts = load(&store, &algo, a.mode)?;
    let outcome = run_partition_worker(&algo, parts, PartitionId(a.partition), &engine)?;
    fs::write(&a.result, serde_json::to_string(&outcome)?).with_context(|| format!("writing {}", a.result.display()))?;
    Ok(())
}
