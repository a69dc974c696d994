//! Graph files: a JSON document or a whitespace-separated edge list.
//!
//! JSON:
//!
//! ```json
//! {"directed": false, "nodes": 3, "edges": [{"u": 0, "v": 1, "w": 1.0, "omega": 1.0}]}
//! ```
//!
//! `omega` defaults to 1. Text: one edge per line as `u v w [omega]`;
//! blank lines and lines starting with `#` are skipped. A text file carries
//! neither the node count nor the orientation, so those come from
//! [`TextOptions`].

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use treedeg::Graph;

use crate::output::format_number;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: Option<usize>,
    pub field: Option<String>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, &self.field) {
            (Some(line), Some(field)) => write!(f, "line {line}, field {field}: {}", self.message),
            (Some(line), None) => write!(f, "line {line}: {}", self.message),
            (None, Some(field)) => write!(f, "field {field}: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug)]
pub enum LoadError {
    Io(std::io::Error),
    Parse(ParseError),
    Graph(treedeg::Error),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Io(e) => write!(f, "cannot read graph file: {e}"),
            LoadError::Parse(e) => write!(f, "malformed graph file: {e}"),
            LoadError::Graph(e) => write!(f, "invalid graph: {e}"),
        }
    }
}

impl std::error::Error for LoadError {}

/// Settings for text input.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TextOptions {
    pub directed: bool,
    /// Node count; the largest label plus one when absent.
    pub nodes: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonGraph {
    directed: bool,
    nodes: usize,
    edges: Vec<JsonEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct JsonEdge {
    u: usize,
    v: usize,
    w: f64,
    #[serde(default = "unit")]
    omega: f64,
}

fn unit() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

/// `.json` files are JSON, `.txt`/`.edges` text; otherwise the first
/// non-blank character decides.
pub fn detect_format(path: &Path, contents: &str) -> Format {
    match path.extension().and_then(|e| e.to_str()) {
        Some("json") => Format::Json,
        Some("txt") | Some("edges") => Format::Text,
        _ if contents.trim_start().starts_with('{') => Format::Json,
        _ => Format::Text,
    }
}

pub fn parse_json(contents: &str) -> Result<Graph, LoadError> {
    let doc: JsonGraph = serde_json::from_str(contents).map_err(|e| {
        LoadError::Parse(ParseError {
            line: Some(e.line()),
            field: None,
            message: e.to_string(),
        })
    })?;
    let edges = doc.edges.into_iter().map(|e| (e.u, e.v, e.w, e.omega));
    Graph::new(doc.nodes, doc.directed, edges).map_err(LoadError::Graph)
}

pub fn parse_text(contents: &str, opts: TextOptions) -> Result<Graph, LoadError> {
    let mut edges = Vec::new();
    for (idx, raw) in contents.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |field: &str, message: String| {
            LoadError::Parse(ParseError {
                line: Some(idx + 1),
                field: Some(field.to_string()),
                message,
            })
        };
        let fields: Vec<&str> = line.split_whitespace().collect();
        if !(3..=4).contains(&fields.len()) {
            return Err(LoadError::Parse(ParseError {
                line: Some(idx + 1),
                field: None,
                message: format!("expected `u v w [omega]`, found {} fields", fields.len()),
            }));
        }
        let node = |name: &str, s: &str| {
            s.parse::<usize>()
                .map_err(|_| err(name, format!("`{s}` is not a node index")))
        };
        let number = |name: &str, s: &str| {
            s.parse::<f64>()
                .map_err(|_| err(name, format!("`{s}` is not a number")))
        };
        let u = node("u", fields[0])?;
        let v = node("v", fields[1])?;
        let w = number("w", fields[2])?;
        let omega = fields.get(3).map(|s| number("omega", s)).transpose()?.unwrap_or(1.0);
        edges.push((u, v, w, omega));
    }
    let n = opts
        .nodes
        .unwrap_or_else(|| edges.iter().map(|&(u, v, _, _)| u.max(v) + 1).max().unwrap_or(0));
    Graph::new(n, opts.directed, edges).map_err(LoadError::Graph)
}

/// Reads a graph file in either format. `text` applies to text input only;
/// a JSON file that disagrees with an explicit `--directed` is rejected.
pub fn load(path: &Path, text: TextOptions) -> Result<Graph, LoadError> {
    let contents = std::fs::read_to_string(path).map_err(LoadError::Io)?;
    match detect_format(path, &contents) {
        Format::Json => {
            let g = parse_json(&contents)?;
            if text.directed && !g.is_directed() {
                return Err(LoadError::Parse(ParseError {
                    line: None,
                    field: Some("directed".into()),
                    message: "--directed given for an undirected JSON graph".into(),
                }));
            }
            Ok(g)
        }
        Format::Text => parse_text(&contents, text),
    }
}

pub fn to_json(g: &Graph) -> String {
    let mut out = format!(
        "{{\"directed\": {}, \"nodes\": {}, \"edges\": [",
        g.is_directed(),
        g.n_nodes()
    );
    for (i, e) in g.edges().iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        out.push_str(&format!(
            "{{\"u\": {}, \"v\": {}, \"w\": {}, \"omega\": {}}}",
            e.u,
            e.v,
            format_number(e.w),
            format_number(e.omega)
        ));
    }
    out.push_str("]}\n");
    out
}

pub fn to_text(g: &Graph) -> String {
    let mut out = format!(
        "# {} graph on {} nodes: u v w omega\n",
        if g.is_directed() { "directed" } else { "undirected" },
        g.n_nodes()
    );
    for e in g.edges() {
        out.push_str(&format!(
            "{} {} {} {}\n",
            e.u,
            e.v,
            format_number(e.w),
            format_number(e.omega)
        ));
    }
    out
}

/// SHA-256 of a canonical listing: orientation, node count, then edges
/// sorted by endpoints. Equal graphs hash equally whatever file they came
/// from.
pub fn digest(g: &Graph) -> String {
    let mut edges: Vec<_> = g.edges().iter().collect();
    edges.sort_by_key(|e| (e.u, e.v));
    let mut hasher = Sha256::new();
    hasher.update(format!("{} {}\n", g.is_directed(), g.n_nodes()));
    for e in edges {
        hasher.update(format!(
            "{} {} {} {}\n",
            e.u,
            e.v,
            format_number(e.w),
            format_number(e.omega)
        ));
    }
    let bytes = hasher.finalize();
    let hex: String = bytes.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}
