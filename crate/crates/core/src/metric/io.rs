//! JSON network files.
//!
//! ```json
//! {
//!   "vertices": [[0, 0], [1, 0]],
//!   "edges": [[0, 1, 1.0]],
//!   "geometry": [null],
//!   "meta": {"kind": "koch", "n": 0}
//! }
//! ```
//!
//! `geometry` is optional; when present it has one entry per edge, either
//! `null` or a polyline from the first to the second endpoint. `meta` is
//! carried through untouched.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::AmbientPoint;
use super::network::{Edge, Item, MetricNetwork};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NetworkFile {
    pub vertices: Vec<AmbientPoint>,
    pub edges: Vec<(usize, usize, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geometry: Option<Vec<Option<Vec<AmbientPoint>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<serde_json::Value>,
}

impl NetworkFile {
    pub fn from_network(net: &MetricNetwork) -> Self {
        let edges = net.edges().iter().map(|e| (e.a, e.b, e.length)).collect();
        let geometry = net
            .edges()
            .iter()
            .any(|e| e.geometry.is_some())
            .then(|| net.edges().iter().map(|e| e.geometry.clone()).collect());
        Self { vertices: net.vertices().to_vec(), edges, geometry, meta: None }
    }

    pub fn with_meta(mut self, meta: serde_json::Value) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }
}

impl MetricNetwork {
    /// Parse and validate a network file. Errors carry the 1-based line of
    /// the offending vertex or edge.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: NetworkFile = serde_json::from_str(text)
            .map_err(|e| Error::NetworkFile { line: e.line(), message: e.to_string() })?;
        if let Some(geometry) = &file.geometry {
            if geometry.len() != file.edges.len() {
                return Err(Error::NetworkFile {
                    line: element_line(text, "geometry", 0).unwrap_or(1),
                    message: format!(
                        "geometry has {} entries for {} edges",
                        geometry.len(),
                        file.edges.len()
                    ),
                });
            }
        }
        let mut geometry = file.geometry.unwrap_or_default().into_iter();
        let edges = file
            .edges
            .iter()
            .map(|&(a, b, length)| Edge { a, b, length, geometry: geometry.next().flatten() })
            .collect();
        MetricNetwork::checked(file.vertices, edges).map_err(|(item, message)| {
            let line = match item {
                Item::Network => None,
                Item::Vertex(i) => element_line(text, "vertices", i),
                Item::Edge(i) => element_line(text, "edges", i),
            };
            Error::NetworkFile { line: line.unwrap_or(1), message }
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        NetworkFile::from_network(self).to_json()
    }
}

/// 1-based line on which element `index` of the top-level array `key`
/// starts.
fn element_line(text: &str, key: &str, index: usize) -> Option<usize> {
    let bytes = text.as_bytes();
    let mut line = 1;
    let mut depth = 0usize;
    let mut i = 0;
    // `Some(count)` while scanning the target array
    let mut in_target: Option<usize> = None;
    let mut expect_element = false;
    let mut last_key: Option<(usize, usize)> = None;

    while i < bytes.len() {
        let c = bytes[i];
        if c == b'\n' {
            line += 1;
            i += 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if expect_element && depth == 2 && c != b']' {
            let count = in_target.unwrap_or(0);
            if count == index {
                return Some(line);
            }
            expect_element = false;
        }
        match c {
            b'"' => {
                let start = i + 1;
                i += 1;
                while i < bytes.len() && bytes[i] != b'"' {
                    if bytes[i] == b'\\' {
                        i += 1;
                    }
                    i += 1;
                }
                if depth == 1 {
                    last_key = Some((start, i));
                }
            }
            b'[' | b'{' => {
                depth += 1;
                if depth == 2 && c == b'[' {
                    let is_target = last_key.map(|(s, e)| &text[s..e] == key).unwrap_or(false);
                    if is_target {
                        in_target = Some(0);
                        expect_element = true;
                    }
                }
            }
            b']' | b'}' => {
                if depth == 2 && in_target.is_some() {
                    return None;
                }
                depth = depth.saturating_sub(1);
            }
            b',' => {
                if depth == 1 {
                    last_key = None;
                }
                if depth == 2 {
                    if let Some(count) = in_target.as_mut() {
                        *count += 1;
                        expect_element = true;
                    }
                }
            }
            _ => {}
        }
        i += 1;
    }
    None
}
