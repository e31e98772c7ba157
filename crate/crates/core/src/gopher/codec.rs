//! Varint wire encoding shared by message payloads and socket frames.

use integer_encoding::VarInt;
use thiserror::Error;

use crate::ids::{PartitionId, SubgraphId, VertexId};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("decode error at byte {pos}: {reason}")]
pub struct CodecError {
    pub pos: usize,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn u8(&mut self, v: u8) -> &mut Self {
        self.buf.push(v);
        self
    }

    pub fn u64(&mut self, v: u64) -> &mut Self {
        let mut tmp = [0u8; 10];
        let n = v.encode_var(&mut tmp);
        self.buf.extend_from_slice(&tmp[..n]);
        self
    }

    pub fn i64(&mut self, v: i64) -> &mut Self {
        let mut tmp = [0u8; 10];
        let n = v.encode_var(&mut tmp);
        self.buf.extend_from_slice(&tmp[..n]);
        self
    }

    pub fn f64(&mut self, v: f64) -> &mut Self {
        self.buf.extend_from_slice(&v.to_le_bytes());
        self
    }

    pub fn bytes(&mut self, v: &[u8]) -> &mut Self {
        self.u64(v.len() as u64);
        self.buf.extend_from_slice(v);
        self
    }

    pub fn str(&mut self, v: &str) -> &mut Self {
        self.bytes(v.as_bytes())
    }

    pub fn vertex(&mut self, v: VertexId) -> &mut Self {
        self.u64(v.0)
    }

    pub fn subgraph(&mut self, v: SubgraphId) -> &mut Self {
        self.u64(v.0)
    }

    pub fn partition(&mut self, v: PartitionId) -> &mut Self {
        self.u64(u64::from(v.0))
    }
}

pub struct Decoder<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Decoder { bytes, pos: 0 }
    }

    fn err(&self, reason: impl Into<String>) -> CodecError {
        CodecError {
            pos: self.pos,
            reason: reason.into(),
        }
    }

    pub fn is_done(&self) -> bool {
        self.pos == self.bytes.len()
    }

    pub fn finish(&self) -> Result<(), CodecError> {
        if self.is_done() {
            Ok(())
        } else {
            Err(self.err("trailing bytes"))
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CodecError> {
        if self.bytes.len() - self.pos < n {
            return Err(self.err("unexpected end of input"));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    pub fn u8(&mut self) -> Result<u8, CodecError> {
        Ok(self.take(1)?[0])
    }

    pub fn u64(&mut self) -> Result<u64, CodecError> {
        let (v, n) = u64::decode_var(&self.bytes[self.pos..]).ok_or_else(|| self.err("bad varint"))?;
        self.pos += n;
        Ok(v)
    }

    pub fn i64(&mut self) -> Result<i64, CodecError> {
        let (v, n) = i64::decode_var(&self.bytes[self.pos..]).ok_or_else(|| self.err("bad varint"))?;
        self.pos += n;
        Ok(v)
    }

    pub fn f64(&mut self) -> Result<f64, CodecError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    /// A length prefix, bounded by the bytes left so corrupt input cannot
    /// request huge allocations.
    pub fn length_prefix(&mut self) -> Result<usize, CodecError> {
        let n = self.u64()?;
        if n > (self.bytes.len() - self.pos) as u64 {
            return Err(self.err(format!("length {n} exceeds input")));
        }
        Ok(n as usize)
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CodecError> {
        let n = self.length_prefix()?;
        self.take(n)
    }

    pub fn string(&mut self) -> Result<String, CodecError> {
        let b = self.bytes()?;
        String::from_utf8(b.to_vec()).map_err(|_| self.err("invalid utf-8"))
    }

    pub fn vertex(&mut self) -> Result<VertexId, CodecError> {
        self.u64().map(VertexId)
    }

    pub fn subgraph(&mut self) -> Result<SubgraphId, CodecError> {
        self.u64().map(SubgraphId)
    }

    pub fn partition(&mut self) -> Result<PartitionId, CodecError> {
        let v = self.u64()?;
        u32::try_from(v).map(PartitionId).map_err(|_| self.err("partition id overflow"))
    }
}

/// A message body that can cross process boundaries.
pub trait Payload: Clone + Send + Sync + std::fmt::Debug + 'static {
    fn encode(&self, enc: &mut Encoder);
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError>;
}

impl Payload for () {
    fn encode(&self, _: &mut Encoder) {}
    fn decode(_: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok(())
    }
}

impl Payload for u64 {
    fn encode(&self, enc: &mut Encoder) {
        enc.u64(*self);
    }
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.u64()
    }
}

impl Payload for f64 {
    fn encode(&self, enc: &mut Encoder) {
        enc.f64(*self);
    }
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.f64()
    }
}

impl Payload for VertexId {
    fn encode(&self, enc: &mut Encoder) {
        enc.vertex(*self);
    }
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        dec.vertex()
    }
}

impl<A: Payload, B: Payload> Payload for (A, B) {
    fn encode(&self, enc: &mut Encoder) {
        self.0.encode(enc);
        self.1.encode(enc);
    }
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        Ok((A::decode(dec)?, B::decode(dec)?))
    }
}

impl<T: Payload> Payload for Vec<T> {
    fn encode(&self, enc: &mut Encoder) {
        enc.u64(self.len() as u64);
        for x in self {
            x.encode(enc);
        }
    }
    fn decode(dec: &mut Decoder<'_>) -> Result<Self, CodecError> {
        let n = dec.length_prefix()?;
        (0..n).map(|_| T::decode(dec)).collect()
    }
}
