//! Typed vertex and edge attributes.
//!
//! A schema declares `(name, type, scope)` triples. Values are stored
//! column-wise per sub-graph, aligned with the sub-graph's vertex order
//! (vertex scope) or edge order (edge scope). A missing value is `None`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrType {
    Int64,
    Float64,
    String,
    Bool,
}

impl AttrType {
    pub fn code(self) -> u8 {
        match self {
            AttrType::Int64 => 0,
            AttrType::Float64 => 1,
            AttrType::String => 2,
            AttrType::Bool => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Some(match code {
            0 => AttrType::Int64,
            1 => AttrType::Float64,
            2 => AttrType::String,
            3 => AttrType::Bool,
            _ => return None,
        })
    }
}

impl fmt::Display for AttrType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            AttrType::Int64 => "int64",
            AttrType::Float64 => "float64",
            AttrType::String => "string",
            AttrType::Bool => "bool",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrScope {
    Vertex,
    Edge,
}

impl AttrScope {
    pub fn code(self) -> u8 {
        match self {
            AttrScope::Vertex => 0,
            AttrScope::Edge => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(AttrScope::Vertex),
            1 => Some(AttrScope::Edge),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttrValue {
    Int64(i64),
    Float64(f64),
    String(String),
    Bool(bool),
}

impl AttrValue {
    pub fn ty(&self) -> AttrType {
        match self {
            AttrValue::Int64(_) => AttrType::Int64,
            AttrValue::Float64(_) => AttrType::Float64,
            AttrValue::String(_) => AttrType::String,
            AttrValue::Bool(_) => AttrType::Bool,
        }
    }

    /// Numeric view used by algorithms; strings and bools have none.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AttrValue::Int64(v) => Some(*v as f64),
            AttrValue::Float64(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            AttrValue::Int64(v) => Some(*v),
            _ => None,
        }
    }

    /// Parses a textual value according to `ty`.
    pub fn parse(ty: AttrType, text: &str) -> Option<AttrValue> {
        Some(match ty {
            AttrType::Int64 => AttrValue::Int64(text.parse().ok()?),
            AttrType::Float64 => AttrValue::Float64(text.parse().ok()?),
            AttrType::String => AttrValue::String(text.to_string()),
            AttrType::Bool => AttrValue::Bool(text.parse().ok()?),
        })
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Int64(v) => write!(f, "{v}"),
            // `{:?}` on f64 prints the shortest representation that round-trips.
            AttrValue::Float64(v) => write!(f, "{v:?}"),
            AttrValue::String(v) => f.write_str(v),
            AttrValue::Bool(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AttrDef {
    pub name: String,
    #[serde(rename = "type")]
    pub ty: AttrType,
    pub scope: AttrScope,
}

impl AttrDef {
    pub fn new(name: impl Into<String>, ty: AttrType, scope: AttrScope) -> Self {
        AttrDef {
            name: name.into(),
            ty,
            scope,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeSchema {
    defs: Vec<AttrDef>,
}

impl AttributeSchema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, def: AttrDef) -> Self {
        self.insert(def);
        self
    }

    /// Adds or replaces a definition by name.
    pub fn insert(&mut self, def: AttrDef) {
        match self.defs.iter_mut().find(|d| d.name == def.name) {
            Some(slot) => *slot = def,
            None => self.defs.push(def),
        }
    }

    pub fn get(&self, name: &str) -> Option<&AttrDef> {
        self.defs.iter().find(|d| d.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &AttrDef> {
        self.defs.iter()
    }

    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }
}

/// One attribute's values for one sub-graph (or one whole graph).
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeColumn {
    def: AttrDef,
    values: Vec<Option<AttrValue>>,
}

impl AttributeColumn {
    /// Builds a column, rejecting any value whose type differs from `def.ty`.
    pub fn new(def: AttrDef, values: Vec<Option<AttrValue>>) -> Result<Self, ModelError> {
        for (i, v) in values.iter().enumerate() {
            if let Some(v) = v {
                if v.ty() != def.ty {
                    return Err(ModelError::AttributeType {
                        name: def.name.clone(),
                        expected: def.ty,
                        found: v.ty(),
                        position: i,
                    });
                }
            }
        }
        Ok(AttributeColumn { def, values })
    }

    pub fn nulls(def: AttrDef, len: usize) -> Self {
        AttributeColumn {
            def,
            values: vec![None; len],
        }
    }

    pub fn def(&self) -> &AttrDef {
        &self.def
    }

    pub fn name(&self) -> &str {
        &self.def.name
    }

    pub fn values(&self) -> &[Option<AttrValue>] {
        &self.values
    }

    pub fn get(&self, i: usize) -> Option<&AttrValue> {
        self.values.get(i).and_then(Option::as_ref)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Sets one value, enforcing the column type.
    pub fn set(&mut self, i: usize, value: Option<AttrValue>) -> Result<(), ModelError> {
        if let Some(v) = &value {
            if v.ty() != self.def.ty {
                return Err(ModelError::AttributeType {
                    name: self.def.name.clone(),
                    expected: self.def.ty,
                    found: v.ty(),
                    position: i,
                });
            }
        }
        self.values[i] = value;
        Ok(())
    }
}
