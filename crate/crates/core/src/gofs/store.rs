//! Partition directories: slice files plus a JSON metadata record.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use super::format::{self, SliceHeader, FORMAT_VERSION};
use crate::attr::{AttributeColumn, AttributeSchema};
use crate::error::StoreError;
use crate::ids::{PartitionId, SubgraphId};
use crate::model::{Partition, Subgraph};

pub const METADATA_FILE: &str = "metadata.json";

/// Byte counts per file read through a store handle. Clones share counts.
#[derive(Debug, Clone, Default)]
pub struct IoCounters {
    inner: Arc<Mutex<BTreeMap<PathBuf, u64>>>,
}

impl IoCounters {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&self, path: &Path, bytes: u64) {
        let mut m = self.inner.lock().expect("io counter lock");
        *m.entry(path.to_path_buf()).or_insert(0) += bytes;
    }

    pub fn total(&self) -> u64 {
        self.inner.lock().expect("io counter lock").values().sum()
    }

    pub fn bytes_for(&self, path: &Path) -> u64 {
        self.inner.lock().expect("io counter lock").get(path).copied().unwrap_or(0)
    }

    pub fn per_file(&self) -> BTreeMap<PathBuf, u64> {
        self.inner.lock().expect("io counter lock").clone()
    }

    pub fn reset(&self) {
        self.inner.lock().expect("io counter lock").clear();
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphEntry {
    pub id: SubgraphId,
    pub vertices: usize,
    pub local_edges: usize,
    pub remote_edges: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub name: String,
    pub bytes: u64,
    pub crc32c: u32,
}

/// Contents of `metadata.json` in a partition directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionMetadata {
    pub graph: String,
    pub directed: bool,
    pub k: usize,
    pub partition: PartitionId,
    pub schema: AttributeSchema,
    pub subgraphs: Vec<SubgraphEntry>,
    pub format_version: u16,
    pub graph_id: u64,
    pub files: Vec<FileEntry>,
}

/// Result of a successful [`write_slices`].
#[derive(Debug, Clone, PartialEq)]
pub struct SliceManifest {
    pub dir: PathBuf,
    pub files: Vec<FileEntry>,
    pub metadata: PartitionMetadata,
}

impl SliceManifest {
    pub fn topology_files(&self) -> usize {
        self.files.iter().filter(|f| f.name.ends_with(".top")).count()
    }

    pub fn attribute_files(&self) -> usize {
        self.files.iter().filter(|f| f.name.contains(".attr.")).count()
    }

    pub fn total_bytes(&self) -> u64 {
        self.files.iter().map(|f| f.bytes).sum()
    }
}

fn file_stem(graph: &str, sg: SubgraphId) -> String {
    let safe: String = graph
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("g{safe}.p{}.sg{}", sg.partition().0, sg.index())
}

pub fn topology_file_name(graph: &str, sg: SubgraphId) -> String {
    format!("{}.top", file_stem(graph, sg))
}

pub fn attribute_file_name(graph: &str, sg: SubgraphId, attr: &str) -> String {
    format!("{}.attr.{attr}", file_stem(graph, sg))
}

pub fn partition_dir_name(p: PartitionId) -> String {
    format!("p{}", p.0)
}

/// Parameters shared by every partition of one graph.
#[derive(Debug, Clone)]
pub struct GraphInfo<'a> {
    pub name: &'a str,
    pub directed: bool,
    pub k: usize,
    pub schema: &'a AttributeSchema,
}

/// Writes one partition's slices into `dir`, metadata last. The directory
/// must be absent or empty. On failure every file written so far is removed.
pub fn write_slices(partition: &Partition, info: &GraphInfo<'_>, dir: &Path) -> Result<SliceManifest, StoreError> {
    let created = match fs::read_dir(dir) {
        Ok(mut entries) => {
            if entries.next().is_some() {
                return Err(StoreError::StoreExists(dir.to_path_buf()));
            }
            false
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            fs::create_dir_all(dir).map_err(|e| StoreError::io(dir, e))?;
            true
        }
        Err(e) => return Err(StoreError::io(dir, e)),
    };
    let mut written: Vec<PathBuf> = Vec::new();
    let result = write_all(partition, info, dir, &mut written);
    if result.is_err() {
        for path in &written {
            let _ = fs::remove_file(path);
        }
        if created {
            let _ = fs::remove_dir(dir);
        }
    }
    result
}

fn write_all(
    partition: &Partition,
    info: &GraphInfo<'_>,
    dir: &Path,
    written: &mut Vec<PathBuf>,
) -> Result<SliceManifest, StoreError> {
    let gid = format::graph_id(info.name);
    let mut files = Vec::new();
    let mut subgraphs = Vec::with_capacity(partition.subgraphs.len());
    for sg in &partition.subgraphs {
        if sg.partition() != partition.id {
            return Err(StoreError::Schema(format!("sub-graph {} is not in partition {}", sg.id(), partition.id)));
        }
        let name = topology_file_name(info.name, sg.id());
        files.push(write_file(dir, &name, &format::encode_topology(gid, sg), written)?);
        for def in info.schema.iter() {
            let column = match sg.attribute(&def.name) {
                Some(c) if c.def() == def => c.clone(),
                Some(c) => {
                    return Err(StoreError::Schema(format!(
                        "attribute {} on {} is {} {:?}, schema says {} {:?}",
                        def.name,
                        sg.id(),
                        c.def().ty,
                        c.def().scope,
                        def.ty,
                        def.scope
                    )))
                }
                None => {
                    let len = match def.scope {
                        crate::attr::AttrScope::Vertex => sg.num_vertices(),
                        crate::attr::AttrScope::Edge => sg.num_edge_slots(),
                    };
                    AttributeColumn::nulls(def.clone(), len)
                }
            };
            let name = attribute_file_name(info.name, sg.id(), &def.name);
            files.push(write_file(dir, &name, &format::encode_attribute(gid, sg.id(), &column), written)?);
        }
        subgraphs.push(SubgraphEntry {
            id: sg.id(),
            vertices: sg.num_vertices(),
            local_edges: sg.num_local_arcs(),
            remote_edges: sg.num_remote_edges(),
        });
    }
    let metadata = PartitionMetadata {
        graph: info.name.to_string(),
        directed: info.directed,
        k: info.k,
        partition: partition.id,
        schema: info.schema.clone(),
        subgraphs,
        format_version: FORMAT_VERSION,
        graph_id: gid,
        files: files.clone(),
    };
    let json = serde_json::to_vec_pretty(&metadata).map_err(|e| StoreError::Metadata {
        file: dir.join(METADATA_FILE),
        reason: e.to_string(),
    })?;
    write_file(dir, METADATA_FILE, &json, written)?;
    Ok(SliceManifest {
        dir: dir.to_path_buf(),
        files,
        metadata,
    })
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], written: &mut Vec<PathBuf>) -> Result<FileEntry, StoreError> {
    let path = dir.join(name);
    let mut f = fs::OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(&path)
        .map_err(|e| {
            if e.kind() == std::io::ErrorKind::AlreadyExists {
                StoreError::StoreExists(path.clone())
            } else {
                StoreError::io(&path, e)
            }
        })?;
    written.push(path.clone());
    f.write_all(bytes).and_then(|_| f.sync_all()).map_err(|e| StoreError::io(&path, e))?;
    Ok(FileEntry {
        name: name.to_string(),
        bytes: bytes.len() as u64,
        crc32c: crc32c::crc32c(bytes),
    })
}

/// Read handle on one partition directory.
#[derive(Debug, Clone)]
pub struct PartitionStore {
    dir: PathBuf,
    metadata: PartitionMetadata,
    counters: IoCounters,
}

impl PartitionStore {
    pub fn open(dir: &Path) -> Result<Self, StoreError> {
        Self::open_with(dir, IoCounters::new())
    }

    pub fn open_with(dir: &Path, counters: IoCounters) -> Result<Self, StoreError> {
        let path = dir.join(METADATA_FILE);
        let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
        counters.record(&path, bytes.len() as u64);
        let metadata: PartitionMetadata = serde_json::from_slice(&bytes).map_err(|e| StoreError::Metadata {
            file: path.clone(),
            reason: e.to_string(),
        })?;
        if metadata.format_version != FORMAT_VERSION {
            return Err(StoreError::Metadata {
                file: path,
                reason: format!("unsupported format version {}", metadata.format_version),
            });
        }
        Ok(PartitionStore {
            dir: dir.to_path_buf(),
            metadata,
            counters,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn metadata(&self) -> &PartitionMetadata {
        &self.metadata
    }

    pub fn counters(&self) -> &IoCounters {
        &self.counters
    }

    pub fn subgraph_ids(&self) -> impl Iterator<Item = SubgraphId> + '_ {
        self.metadata.subgraphs.iter().map(|e| e.id)
    }

    fn entry(&self, id: SubgraphId) -> Result<&SubgraphEntry, StoreError> {
        self.metadata
            .subgraphs
            .iter()
            .find(|e| e.id == id)
            .ok_or(StoreError::NotFound(id))
    }

    fn read_checked(&self, name: &str) -> Result<(PathBuf, Vec<u8>), StoreError> {
        let path = self.dir.join(name);
        let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
        self.counters.record(&path, bytes.len() as u64);
        if let Some(f) = self.metadata.files.iter().find(|f| f.name == name) {
            if f.bytes != bytes.len() as u64 {
                return Err(StoreError::Corrupt {
                    file: path,
                    reason: format!("size {} differs from manifest {}", bytes.len(), f.bytes),
                });
            }
        }
        Ok((path, bytes))
    }

    fn check_header(&self, header: &SliceHeader, id: SubgraphId, path: &Path) -> Result<(), StoreError> {
        let expected = (self.metadata.graph_id, u64::from(self.metadata.partition.0), id.0);
        let found = (header.graph_id, header.partition, header.subgraph);
        if expected != found {
            return Err(StoreError::Corrupt {
                file: path.to_path_buf(),
                reason: format!("header ids {found:?} do not match expected {expected:?}"),
            });
        }
        Ok(())
    }

    /// Topology of one sub-graph; touches only that sub-graph's `.top` file.
    pub fn read_topology(&self, id: SubgraphId) -> Result<Subgraph, StoreError> {
        let entry = self.entry(id)?;
        let (path, bytes) = self.read_checked(&topology_file_name(&self.metadata.graph, id))?;
        let (header, sg) = format::decode_topology(&bytes, self.metadata.directed, &path)?;
        self.check_header(&header, id, &path)?;
        let counts = (sg.num_vertices(), sg.num_local_arcs(), sg.num_remote_edges());
        if counts != (entry.vertices, entry.local_edges, entry.remote_edges) {
            return Err(StoreError::Corrupt {
                file: path,
                reason: format!("counts {counts:?} disagree with metadata"),
            });
        }
        Ok(sg)
    }

    /// One attribute of one sub-graph; touches only that attribute's file.
    pub fn read_attribute(&self, id: SubgraphId, name: &str) -> Result<AttributeColumn, StoreError> {
        let def = self
            .metadata
            .schema
            .get(name)
            .ok_or_else(|| StoreError::Schema(format!("unknown attribute {name:?}")))?
            .clone();
        self.entry(id)?;
        let (path, bytes) = self.read_checked(&attribute_file_name(&self.metadata.graph, id, name))?;
        let (header, column) = format::decode_attribute(&bytes, &path)?;
        self.check_header(&header, id, &path)?;
        if column.def() != &def {
            return Err(StoreError::Corrupt {
                file: path,
                reason: format!("attribute definition {:?} disagrees with schema {def:?}", column.def()),
            });
        }
        Ok(column)
    }

    /// Loads every sub-graph with the requested attributes attached.
    pub fn load(&self, attrs: &[&str]) -> Result<Partition, StoreError> {
        let mut subgraphs = Vec::with_capacity(self.metadata.subgraphs.len());
        for id in self.subgraph_ids() {
            let mut sg = self.read_topology(id)?;
            for name in attrs {
                sg.set_attribute(self.read_attribute(id, name)?)?;
            }
            subgraphs.push(sg);
        }
        Ok(Partition::new(self.metadata.partition, subgraphs))
    }
}

pub fn read_topology_slice(dir: &Path, id: SubgraphId) -> Result<Subgraph, StoreError> {
    PartitionStore::open(dir)?.read_topology(id)
}

pub fn read_attribute_slice(dir: &Path, id: SubgraphId, name: &str) -> Result<AttributeColumn, StoreError> {
    PartitionStore::open(dir)?.read_attribute(id, name)
}

/// Writes every partition under `root/p<pid>/`.
pub fn write_store(root: &Path, info: &GraphInfo<'_>, partitions: &[Partition]) -> Result<Vec<SliceManifest>, StoreError> {
    partitions
        .iter()
        .map(|p| write_slices(p, info, &root.join(partition_dir_name(p.id))))
        .collect()
}

/// All partition directories of one store root.
#[derive(Debug, Clone)]
pub struct GraphStore {
    root: PathBuf,
    partitions: Vec<PartitionStore>,
}

impl GraphStore {
    pub fn open(root: &Path) -> Result<Self, StoreError> {
        Self::open_with(root, IoCounters::new())
    }

    pub fn open_with(root: &Path, counters: IoCounters) -> Result<Self, StoreError> {
        let mut partitions = Vec::new();
        for entry in fs::read_dir(root).map_err(|e| StoreError::io(root, e))? {
            let entry = entry.map_err(|e| StoreError::io(root, e))?;
            let path = entry.path();
            if path.join(METADATA_FILE).is_file() {
                partitions.push(PartitionStore::open_with(&path, counters.clone())?);
            }
        }
        partitions.sort_by_key(|p| p.metadata.partition);
        let meta_file = root.join(METADATA_FILE);
        let bad = |reason: String| StoreError::Metadata {
            file: meta_file.clone(),
            reason,
        };
        let first = partitions.first().ok_or_else(|| bad("no partition directories found".into()))?;
        let k = first.metadata.k;
        if partitions.len() != k {
            return Err(bad(format!("expected {k} partitions, found {}", partitions.len())));
        }
        for (i, p) in partitions.iter().enumerate() {
            let m = &p.metadata;
            if m.partition.index() != i || m.k != k || m.graph != first.metadata.graph || m.directed != first.metadata.directed {
                return Err(bad(format!("partition directory {} is inconsistent with the store", p.dir.display())));
            }
        }
        Ok(GraphStore {
            root: root.to_path_buf(),
            partitions,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn partitions(&self) -> &[PartitionStore] {
        &self.partitions
    }

    pub fn graph_name(&self) -> &str {
        &self.partitions[0].metadata.graph
    }

    pub fn directed(&self) -> bool {
        self.partitions[0].metadata.directed
    }

    pub fn schema(&self) -> &AttributeSchema {
        &self.partitions[0].metadata.schema
    }

    pub fn load(&self, attrs: &[&str]) -> Result<Vec<Partition>, StoreError> {
        self.partitions.iter().map(|p| p.load(attrs)).collect()
    }
}
