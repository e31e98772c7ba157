//! Whitespace-separated edge lists (`src dst [weight]`, `#` comments) and
//! tab-separated vertex attribute tables.
//!
//! Vertex labels are arbitrary tokens; they are remapped to dense ids in
//! order of first appearance and kept in the `label` vertex attribute.

use std::collections::HashMap;

use crate::attr::{AttrDef, AttrScope, AttrType, AttrValue, AttributeColumn};
use crate::error::ParseError;
use crate::graph::{Graph, GraphBuilder, LABEL_ATTR};

#[derive(Debug)]
pub struct EdgeList {
    pub graph: Graph,
    /// Original label per dense id.
    pub labels: Vec<String>,
    /// Parallel edges collapsed while building.
    pub duplicates: usize,
}

impl EdgeList {
    /// `dense_id<TAB>label` lines.
    pub fn id_map_text(&self) -> String {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{i}\t{l}\n"))
            .collect()
    }

    pub fn index(&self) -> HashMap<&str, u64> {
        self.labels.iter().enumerate().map(|(i, l)| (l.as_str(), i as u64)).collect()
    }
}

fn content(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn parse_edge_list(text: &str, directed: bool) -> Result<EdgeList, ParseError> {
    let mut ids: HashMap<String, u64> = HashMap::new();
    let mut labels: Vec<String> = Vec::new();
    let mut intern = |tok: &str| -> u64 {
        if let Some(&id) = ids.get(tok) {
            return id;
        }
        let id = labels.len() as u64;
        ids.insert(tok.to_string(), id);
        labels.push(tok.to_string());
        id
    };
    let mut edges = Vec::new();
    let mut any_weight = false;
    for (i, raw) in text.lines().enumerate() {
        let line = content(raw);
        if line.is_empty() {
            continue;
        }
        let err = |reason: String| ParseError::Line { line: i + 1, reason };
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !(2..=3).contains(&toks.len()) {
            return Err(err(format!("expected `src dst [weight]`, found {} fields", toks.len())));
        }
        let weight = match toks.get(2) {
            Some(w) => {
                let w: f64 = w.parse().map_err(|_| err(format!("bad weight {w:?}")))?;
                if w < 0.0 || !w.is_finite() {
                    return Err(err(format!("weight {w} must be finite and non-negative")));
                }
                any_weight = true;
                Some(w)
            }
            None => None,
        };
        let (u, v) = (intern(toks[0]), intern(toks[1]));
        edges.push((u, v, weight));
    }
    if labels.is_empty() {
        return Err(ParseError::Empty);
    }
    let mut b = GraphBuilder::new(labels.len(), directed);
    for (u, v, w) in edges {
        match (any_weight, w) {
            (true, w) => b.add_weighted_edge(u, v, w.unwrap_or(1.0)),
            (false, _) => b.add_edge(u, v),
        };
    }
    let built = b.build()?;
    let mut graph = built.graph;
    let def = AttrDef::new(LABEL_ATTR, AttrType::String, AttrScope::Vertex);
    let column = AttributeColumn::new(def, labels.iter().map(|l| Some(AttrValue::String(l.clone()))).collect())?;
    graph.set_vertex_attr(column)?;
    Ok(EdgeList {
        graph,
        labels,
        duplicates: built.duplicates,
    })
}

/// Reads a vertex attribute table into columns sized to `list.graph`.
///
/// The first non-comment line is a header `label<TAB>name:type...` with
/// types `int64`, `float64`, `string` or `bool`. Each following line holds
/// a vertex label and one value per column; `-` or an empty field is null,
/// as is every vertex the table does not mention.
pub fn parse_vertex_table(text: &str, list: &EdgeList) -> Result<Vec<AttributeColumn>, ParseError> {
    let index = list.index();
    let n = list.labels.len();
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, content(l)))
        .filter(|(_, l)| !l.is_empty());
    let Some((hline, header)) = lines.next() else {
        return Ok(Vec::new());
    };
    let herr = |reason: String| ParseError::Line { line: hline, reason };
    let mut defs = Vec::new();
    for field in header.split('\t').skip(1) {
        let (name, ty) = field
            .split_once(':')
            .ok_or_else(|| herr(format!("column {field:?} needs a `name:type` header")))?;
        let ty = match ty.trim() {
            "int64" => AttrType::Int64,
            "float64" => AttrType::Float64,
            "string" => AttrType::String,
            "bool" => AttrType::Bool,
            other => return Err(herr(format!("unknown type {other:?}"))),
        };
        defs.push(AttrDef::new(name.trim(), ty, AttrScope::Vertex));
    }
    let mut values: Vec<Vec<Option<AttrValue>>> = vec![vec![None; n]; defs.len()];
    for (line, row) in lines {
        let err = |reason: String| ParseError::Line { line, reason };
        let fields: Vec<&str> = row.split('\t').map(str::trim).collect();
        if fields.len() != defs.len() + 1 {
            return Err(err(format!("expected {} fields, found {}", defs.len() + 1, fields.len())));
        }
        let v = *index
            .get(fields[0])
            .ok_or_else(|| err(format!("unknown vertex {:?}", fields[0])))? as usize;
        for (c, (def, text)) in defs.iter().zip(&fields[1..]).enumerate() {
            if text.is_empty() || *text == "-" {
                continue;
            }
            let value =
                AttrValue::parse(def.ty, text).ok_or_else(|| err(format!("{text:?} is not a {}", def.ty)))?;
            values[c][v] = Some(value);
        }
    }
    defs.into_iter()
        .zip(values)
        .map(|(d, v)| AttributeColumn::new(d, v).map_err(ParseError::from))
        .collect()
}
