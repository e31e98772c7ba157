//! Binary slice encoding.
//!
//! Every slice file is `header | payload | trailer`:
//!
//! ```text
//! header  (32 bytes, little-endian)
//!   magic        4  "GOFS"
//!   version      u16
//!   kind         u8   0 = topology, 1 = attribute
//!   flags        u8   reserved for compression, always 0
//!   graph id     u64
//!   partition id u64
//!   subgraph id  u64
//! payload (unsigned LEB128 varints unless noted)
//!   topology:  vertex count, vertex ids (delta), then per vertex:
//!              local count, local targets (delta); then remote count and
//!              per remote edge: src, partition, subgraph, vertex (absolute)
//!   attribute: name (len + utf8), type u8, scope u8, count, then per value
//!              tag u8 (0 null, 1 present) and the value: int64 zigzag varint,
//!              float64 8 bytes LE, string len + utf8, bool u8
//! trailer
//!   crc32c       u32 over the payload
//! ```
//!
//! Header ids are not covered by the checksum; readers cross-check them
//! against the file name and partition metadata. Delta lists store the
//! first id as-is and each later id as the difference from its predecessor;
//! lists are sorted ascending so deltas are unsigned.

use std::path::Path;

use integer_encoding::VarInt;

use crate::attr::{AttrDef, AttrScope, AttrType, AttrValue, AttributeColumn};
use crate::error::StoreError;
use crate::ids::{PartitionId, SubgraphId, VertexId};
use crate::model::{RemoteRef, Subgraph, VertexAdjacency};

pub const MAGIC: &[u8; 4] = b"GOFS";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 32;
pub const TRAILER_LEN: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceKind {
    Topology,
    Attribute,
}

impl SliceKind {
    fn code(self) -> u8 {
        match self {
            SliceKind::Topology => 0,
            SliceKind::Attribute => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SliceHeader {
    pub kind: SliceKind,
    pub flags: u8,
    pub graph_id: u64,
    pub partition: u64,
    pub subgraph: u64,
}

/// FNV-1a 64 of the graph name; stored in every slice header.
pub fn graph_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

pub(crate) fn put_varint(buf: &mut Vec<u8>, v: u64) {
    let mut tmp = [0u8; 10];
    let n = v.encode_var(&mut tmp);
    buf.extend_from_slice(&tmp[..n]);
}

fn put_signed(buf: &mut Vec<u8>, v: i64) {
    let mut tmp = [0u8; 10];
    let n = v.encode_var(&mut tmp);
    buf.extend_from_slice(&tmp[..n]);
}

fn put_bytes(buf: &mut Vec<u8>, bytes: &[u8]) {
    put_varint(buf, bytes.len() as u64);
    buf.extend_from_slice(bytes);
}

fn put_delta_list(buf: &mut Vec<u8>, ids: impl ExactSizeIterator<Item = u64>) {
    put_varint(buf, ids.len() as u64);
    let mut prev = 0;
    for (i, id) in ids.enumerate() {
        put_varint(buf, if i == 0 { id } else { id - prev });
        prev = id;
    }
}

fn header(buf: &mut Vec<u8>, kind: SliceKind, graph_id: u64, partition: PartitionId, subgraph: SubgraphId) {
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.push(kind.code());
    buf.push(0);
    buf.extend_from_slice(&graph_id.to_le_bytes());
    buf.extend_from_slice(&u64::from(partition.0).to_le_bytes());
    buf.extend_from_slice(&subgraph.0.to_le_bytes());
}

fn seal(mut buf: Vec<u8>) -> Vec<u8> {
    let crc = crc32c::crc32c(&buf[HEADER_LEN..]);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

pub fn encode_topology(graph_id: u64, sg: &Subgraph) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 8 * sg.num_vertices());
    header(&mut buf, SliceKind::Topology, graph_id, sg.partition(), sg.id());
    put_delta_list(&mut buf, sg.vertices().iter().map(|v| v.0));
    for i in 0..sg.num_vertices() {
        put_delta_list(&mut buf, sg.local_neighbors(i).iter().map(|v| v.0));
    }
    put_varint(&mut buf, sg.num_remote_edges() as u64);
    for (src, r) in sg.remote_edges() {
        put_varint(&mut buf, src.0);
        put_varint(&mut buf, u64::from(r.partition.0));
        put_varint(&mut buf, r.subgraph.0);
        put_varint(&mut buf, r.vertex.0);
    }
    seal(buf)
}

pub fn encode_attribute(graph_id: u64, sg: SubgraphId, column: &AttributeColumn) -> Vec<u8> {
    let mut buf = Vec::with_capacity(HEADER_LEN + 2 * column.len() + 16);
    header(&mut buf, SliceKind::Attribute, graph_id, sg.partition(), sg);
    let def = column.def();
    put_bytes(&mut buf, def.name.as_bytes());
    buf.push(def.ty.code());
    buf.push(def.scope.code());
    put_varint(&mut buf, column.len() as u64);
    for v in column.values() {
        match v {
            None => buf.push(0),
            Some(v) => {
                buf.push(1);
                match v {
                    AttrValue::Int64(x) => put_signed(&mut buf, *x),
                    AttrValue::Float64(x) => buf.extend_from_slice(&x.to_le_bytes()),
                    AttrValue::String(s) => put_bytes(&mut buf, s.as_bytes()),
                    AttrValue::Bool(b) => buf.push(u8::from(*b)),
                }
            }
        }
    }
    seal(buf)
}

/// Cursor over a byte slice that turns every short read into a corruption
/// error naming the file.
pub(crate) struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    file: &'a Path,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(bytes: &'a [u8], file: &'a Path) -> Self {
        Reader { bytes, pos: 0, file }
    }

    pub(crate) fn corrupt(&self, reason: impl Into<String>) -> StoreError {
        StoreError::Corrupt {
            file: self.file.to_path_buf(),
            reason: reason.into(),
        }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], StoreError> {
        if self.bytes.len() - self.pos < n {
            return Err(self.corrupt(format!("unexpected end of data at byte {}", self.pos)));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub(crate) fn u8(&mut self) -> Result<u8, StoreError> {
        Ok(self.take(1)?[0])
    }

    fn u64_le(&mut self) -> Result<u64, StoreError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    pub(crate) fn varint(&mut self) -> Result<u64, StoreError> {
        match u64::decode_var(&self.bytes[self.pos..]) {
            Some((v, n)) => {
                self.pos += n;
                Ok(v)
            }
            None => Err(self.corrupt(format!("bad varint at byte {}", self.pos))),
        }
    }

    fn signed(&mut self) -> Result<i64, StoreError> {
        match i64::decode_var(&self.bytes[self.pos..]) {
            Some((v, n)) => {
                self.pos += n;
                Ok(v)
            }
            None => Err(self.corrupt(format!("bad varint at byte {}", self.pos))),
        }
    }

    /// Reads a length that must fit in the remaining bytes (each element
    /// takes at least `min_bytes`), so corrupt counts cannot trigger huge
    /// allocations.
    pub(crate) fn count(&mut self, min_bytes: usize) -> Result<usize, StoreError> {
        let n = self.varint()?;
        let remaining = (self.bytes.len() - self.pos) as u64;
        if n.saturating_mul(min_bytes as u64) > remaining {
            return Err(self.corrupt(format!("count {n} exceeds remaining {remaining} bytes")));
        }
        Ok(n as usize)
    }

    pub(crate) fn bytes_field(&mut self) -> Result<&'a [u8], StoreError> {
        let n = self.count(1)?;
        self.take(n)
    }

    fn delta_list(&mut self) -> Result<Vec<u64>, StoreError> {
        let n = self.count(1)?;
        let mut out = Vec::with_capacity(n);
        let mut prev = 0u64;
        for i in 0..n {
            let d = self.varint()?;
            let v = if i == 0 {
                d
            } else {
                prev.checked_add(d).ok_or_else(|| self.corrupt("delta overflow"))?
            };
            out.push(v);
            prev = v;
        }
        Ok(out)
    }

    pub(crate) fn is_done(&self) -> bool {
        self.pos == self.bytes.len()
    }
}

/// Checks framing and checksum, returning the header and the payload bytes.
pub fn open_slice<'a>(bytes: &'a [u8], file: &Path) -> Result<(SliceHeader, &'a [u8]), StoreError> {
    let corrupt = |reason: String| StoreError::Corrupt {
        file: file.to_path_buf(),
        reason,
    };
    if bytes.len() < HEADER_LEN + TRAILER_LEN {
        return Err(corrupt(format!("truncated: {} bytes", bytes.len())));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - TRAILER_LEN);
    let stored = u32::from_le_bytes(trailer.try_into().expect("4 bytes"));
    let actual = crc32c::crc32c(&body[HEADER_LEN..]);
    if stored != actual {
        return Err(corrupt(format!("checksum mismatch: stored {stored:08x}, computed {actual:08x}")));
    }
    let mut r = Reader::new(body, file);
    if r.take(4)? != MAGIC {
        return Err(corrupt("bad magic".into()));
    }
    let version = u16::from_le_bytes(r.take(2)?.try_into().expect("2 bytes"));
    if version != FORMAT_VERSION {
        return Err(corrupt(format!("unsupported format version {version}")));
    }
    let kind = match r.u8()? {
        0 => SliceKind::Topology,
        1 => SliceKind::Attribute,
        other => return Err(corrupt(format!("unknown slice kind {other}"))),
    };
    let flags = r.u8()?;
    if flags != 0 {
        return Err(corrupt(format!("unsupported flags {flags:#04x}")));
    }
    let header = SliceHeader {
        kind,
        flags,
        graph_id: r.u64_le()?,
        partition: r.u64_le()?,
        subgraph: r.u64_le()?,
    };
    Ok((header, &body[HEADER_LEN..]))
}

pub fn decode_topology(bytes: &[u8], directed: bool, file: &Path) -> Result<(SliceHeader, Subgraph), StoreError> {
    let (header, payload) = open_slice(bytes, file)?;
    let mut r = Reader::new(payload, file);
    if header.kind != SliceKind::Topology {
        return Err(r.corrupt("not a topology slice"));
    }
    let id = SubgraphId(header.subgraph);
    if u64::from(id.partition().0) != header.partition {
        return Err(r.corrupt("sub-graph id does not match partition id"));
    }
    let vertices = r.delta_list()?;
    let mut adjacency: Vec<VertexAdjacency> = Vec::with_capacity(vertices.len());
    for &v in &vertices {
        let local = r.delta_list()?.into_iter().map(VertexId).collect();
        adjacency.push(VertexAdjacency {
            vertex: VertexId(v),
            local,
            remote: Vec::new(),
        });
    }
    let remote_count = r.count(4)?;
    for _ in 0..remote_count {
        let src = VertexId(r.varint()?);
        let partition = r.varint()?;
        let subgraph = SubgraphId(r.varint()?);
        let vertex = VertexId(r.varint()?);
        let partition = u32::try_from(partition).map_err(|_| r.corrupt("partition id overflow"))?;
        let slot = vertices
            .binary_search(&src.0)
            .map_err(|_| r.corrupt(format!("remote edge source {src} is not local")))?;
        adjacency[slot].remote.push(RemoteRef {
            partition: PartitionId(partition),
            subgraph,
            vertex,
        });
    }
    if !r.is_done() {
        return Err(r.corrupt("trailing bytes after payload"));
    }
    Ok((header, Subgraph::new(id, directed, adjacency)))
}

pub fn decode_attribute(bytes: &[u8], file: &Path) -> Result<(SliceHeader, AttributeColumn), StoreError> {
    let (header, payload) = open_slice(bytes, file)?;
    let mut r = Reader::new(payload, file);
    if header.kind != SliceKind::Attribute {
        return Err(r.corrupt("not an attribute slice"));
    }
    let name = std::str::from_utf8(r.bytes_field()?)
        .map_err(|_| r.corrupt("attribute name is not utf-8"))?
        .to_string();
    let ty = AttrType::from_code(r.u8()?).ok_or_else(|| r.corrupt("unknown attribute type"))?;
    let scope = AttrScope::from_code(r.u8()?).ok_or_else(|| r.corrupt("unknown attribute scope"))?;
    let n = r.count(1)?;
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let value = match r.u8()? {
            0 => None,
            1 => Some(match ty {
                AttrType::Int64 => AttrValue::Int64(r.signed()?),
                AttrType::Float64 => AttrValue::Float64(f64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"))),
                AttrType::String => AttrValue::String(
                    std::str::from_utf8(r.bytes_field()?)
                        .map_err(|_| r.corrupt("string value is not utf-8"))?
                        .to_string(),
                ),
                AttrType::Bool => match r.u8()? {
                    0 => AttrValue::Bool(false),
                    1 => AttrValue::Bool(true),
                    _ => return Err(r.corrupt("bad bool")),
                },
            }),
            _ => return Err(r.corrupt("bad presence tag")),
        };
        values.push(value);
    }
    if !r.is_done() {
        return Err(r.corrupt("trailing bytes after payload"));
    }
    let column = AttributeColumn::new(AttrDef::new(name, ty, scope), values)?;
    Ok((header, column))
}
