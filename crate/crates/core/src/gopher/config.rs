//! Engine configuration and its JSON file form.

use std::path::Path;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::EngineError;
use crate::gofs::ClusterView;
use crate::ids::PartitionId;

pub const DEFAULT_MAX_SUPERSTEPS: u64 = 10_000;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    #[default]
    Memory,
    Socket,
}

impl std::fmt::Display for TransportKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TransportKind::Memory => "memory",
            TransportKind::Socket => "socket",
        })
    }
}

/// Order in which a sub-graph's inbound messages are presented.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MessageOrder {
    /// Sorted by (source sub-graph, sequence).
    #[default]
    Deterministic,
    Arrival,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerAddress {
    pub partition: PartitionId,
    pub host: String,
    pub port: u16,
}

impl WorkerAddress {
    pub fn addr(&self) -> String {
        format!("{}:{}", self.host, self.port)
    }
}

pub fn default_pool_width() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn default_max_supersteps() -> u64 {
    DEFAULT_MAX_SUPERSTEPS
}

fn default_timeout() -> f64 {
    60.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    #[serde(default)]
    pub transport: TransportKind,
    #[serde(default)]
    pub workers: Vec<WorkerAddress>,
    /// `host:port` the manager listens on in socket mode.
    #[serde(default)]
    pub manager: Option<String>,
    #[serde(default = "default_pool_width")]
    pub pool_width: usize,
    #[serde(default)]
    pub message_order: MessageOrder,
    #[serde(default = "default_max_supersteps")]
    pub max_supersteps: u64,
    /// Keep a per-envelope log in the stats.
    #[serde(default)]
    pub record_messages: bool,
    /// Longest wait for any single protocol or data message, in seconds.
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            transport: TransportKind::Memory,
            workers: Vec::new(),
            manager: None,
            pool_width: default_pool_width(),
            message_order: MessageOrder::Deterministic,
            max_supersteps: DEFAULT_MAX_SUPERSTEPS,
            record_messages: false,
            timeout_secs: default_timeout(),
        }
    }
}

impl EngineConfig {
    pub fn from_json(text: &str) -> Result<Self, EngineError> {
        let cfg: EngineConfig = serde_json::from_str(text).map_err(|e| EngineError::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, EngineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EngineError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn check(&self) -> Result<(), EngineError> {
        if self.pool_width == 0 {
            return Err(EngineError::Config("pool_width must be at least 1".into()));
        }
        if self.max_supersteps == 0 {
            return Err(EngineError::Config("max_supersteps must be at least 1".into()));
        }
        if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 {
            return Err(EngineError::Config("timeout_secs must be positive".into()));
        }
        Ok(())
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Socket endpoints ordered by partition; every partition in `0..k` must
    /// appear exactly once.
    pub fn cluster_view(&self, k: usize) -> Result<ClusterView, EngineError> {
        match self.transport {
            TransportKind::Memory => Ok(ClusterView::in_memory(k)),
            TransportKind::Socket => {
                let mut addrs: Vec<Option<String>> = vec![None; k];
                for w in &self.workers {
                    let slot = addrs
                        .get_mut(w.partition.index())
                        .ok_or_else(|| EngineError::Config(format!("worker entry for {} but k = {k}", w.partition)))?;
                    if slot.replace(w.addr()).is_some() {
                        return Err(EngineError::Config(format!("duplicate worker entry for {}", w.partition)));
                    }
                }
                let mut view = ClusterView::default();
                for (i, a) in addrs.into_iter().enumerate() {
                    match a {
                        Some(a) => view.insert(PartitionId(i as u32), crate::gofs::Endpoint::Socket(a)),
                        None => {
                            return Err(EngineError::Config(format!(
                                "configuration error: no worker address for partition {i}"
                            )))
                        }
                    }
                }
                Ok(view)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_file_shape() {
        let cfg = EngineConfig::from_json(
            r#"{"transport":"socket","workers":[{"partition":0,"host":"127.0.0.1","port":7001},
                {"partition":1,"host":"127.0.0.1","port":7002}],
                "pool_width":2,"message_order":"arrival"}"#,
        )
        .unwrap();
        assert_eq!(cfg.transport, TransportKind::Socket);
        assert_eq!(cfg.max_supersteps, DEFAULT_MAX_SUPERSTEPS);
        assert_eq!(cfg.message_order, MessageOrder::Arrival);
        let view = cfg.cluster_view(2).unwrap();
        assert_eq!(
            view.endpoint(PartitionId(1)).unwrap(),
            &crate::gofs::Endpoint::Socket("127.0.0.1:7002".into())
        );
        assert!(cfg.cluster_view(3).is_err());
    }

    #[test]
    fn rejects_zero_pool() {
        assert!(EngineConfig::from_json(r#"{"pool_width":0}"#).is_err());
    }
}
