//! Graph files: a text edge list or a JSON document.
//!
//! Text form:
//!
//! ```text
//! # comment
//! n 4
//! 0 1 1.5
//! 1 2 2
//! 2 3
//! ```
//!
//! Edge lines are `u v [w]`, the weight defaulting to 1. JSON form is
//! `{"n": 4, "edges": [[0, 1, 1.5], [1, 2, 2.0]]}`, detected by a leading `{`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sparsify_core::{Error, Result, WeightedGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    Text,
    Json,
}

impl GraphFormat {
    /// JSON for paths ending in `.json`, text otherwise.
    pub fn from_path(path: &str) -> Self {
        if path.ends_with(".json") {
            GraphFormat::Json
        } else {
            GraphFormat::Text
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonGraph {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    if text.trim_start().starts_with('{') {
        parse_json(text)
    } else {
        parse_text(text)
    }
}

fn parse_json(text: &str) -> Result<WeightedGraph> {
    let doc: JsonGraph = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    WeightedGraph::from_edges(doc.n, doc.edges).map_err(|e| Error::Parse {
        line: 0,
        message: e.to_string(),
    })
}

fn parse_text(text: &str) -> Result<WeightedGraph> {
    let err = |line: usize, message: String| Error::Parse { line, message };
    let mut n = None;
    let mut edges = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some(count) = n else {
            if fields.len() != 2 || fields[0] != "n" {
                return Err(err(line, format!("expected header `n <count>`, found `{content}`")));
            }
            let count: usize = fields[1]
                .parse()
                .map_err(|_| err(line, format!("invalid vertex count `{}`", fields[1])))?;
            n = Some(count);
            continue;
        };
        if !(2..=3).contains(&fields.len()) {
            return Err(err(line, format!("expected `u v [w]`, found `{content}`")));
        }
        let vertex = |s: &str| -> Result<usize> {
            let v: usize = s
                .parse()
                .map_err(|_| err(line, format!("invalid vertex `{s}`")))?;
            if v >= count {
                return Err(err(line, format!("vertex {v} outside 0..{count}")));
            }
            Ok(v)
        };
        let (u, v) = (vertex(fields[0])?, vertex(fields[1])?);
        if u == v {
            return Err(err(line, format!("self-loop at vertex {u}")));
        }
        let w = match fields.get(2) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|_| err(line, format!("invalid weight `{s}`")))?,
            None => 1.0,
        };
        if !(w.is_finite() && w > 0.0) {
            return Err(err(line, format!("weight must be positive and finite, got {w}")));
        }
        edges.push((u, v, w));
    }
    let Some(count) = n else {
        return Err(err(0, "missing header `n <count>`".into()));
    };
    WeightedGraph::from_edges(count, edges)
}

/// Serializes with shortest round-trip float formatting.
pub fn format_graph(g: &WeightedGraph, format: GraphFormat) -> String {
    match format {
        GraphFormat::Text => {
            let mut out = format!("n {}\n", g.n());
            for e in g.edges() {
                writeln!(out, "{} {} {:?}", e.u, e.v, e.w).expect("writing to a String");
            }
            out
        }
        GraphFormat::Json => {
            let doc = JsonGraph {
                n: g.n(),
                edges: g.edges().iter().map(|e| (e.u, e.v, e.w)).collect(),
            };
            let mut out = serde_json::to_string(&doc).expect("graph serializes");
            out.push('\n');
            out
        }
    }
}
