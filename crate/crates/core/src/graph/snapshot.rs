//! Deterministic on-disk format for assembled graphs.
//!
//! Layout: one JSON header line, one JSON line per node in id order, one per
//! edge in id order, then a checksum trailer covering every preceding byte.
//! Equal graphs serialize to equal bytes; any flipped byte is caught either
//! by the checksum or by record validation on load.

use super::{EdgeRecord, GraphMeta, NodeRecord, StvgGraph};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io::{BufRead, Write};

pub const MAGIC: &str = "STVG";
pub const VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    magic: String,
    version: u32,
    config_digest: String,
    input_digest: String,
    nodes: u64,
    edges: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Trailer {
    sha256: String,
}

#[derive(Debug, thiserror::Error)]
pub enum SnapshotError {
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
    #[error("not a graph snapshot: {0}")]
    BadHeader(String),
    #[error("snapshot version {found} is not supported (expected {VERSION})")]
    VersionMismatch { found: u32 },
    #[error("snapshot is truncated: {0}")]
    Truncated(String),
    #[error("snapshot checksum mismatch; the file is corrupt")]
    ChecksumMismatch,
    #[error("snapshot line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("snapshot records are inconsistent: {0}")]
    Inconsistent(#[from] super::GraphError),
}

/// Writes the snapshot. Output depends only on the records and meta.
pub fn save<W: Write>(graph: &StvgGraph, mut out: W) -> Result<(), SnapshotError> {
    let mut body: Vec<u8> = Vec::new();
    let header = Header {
        magic: MAGIC.to_string(),
        version: VERSION,
        config_digest: graph.meta().config_digest.clone(),
        input_digest: graph.meta().input_digest.clone(),
        nodes: graph.node_count() as u64,
        edges: graph.edge_count() as u64,
    };
    write_line(&mut body, &header)?;
    for node in graph.nodes() {
        write_line(&mut body, node)?;
    }
    for edge in graph.edges() {
        write_line(&mut body, edge)?;
    }

    let digest = hex::encode(Sha256::digest(&body));
    out.write_all(&body)?;
    write_line(&mut out, &Trailer { sha256: digest })?;
    out.flush()?;
    Ok(())
}

fn write_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<(), SnapshotError> {
    let text = serde_json::to_string(value)
        .map_err(|e| SnapshotError::MalformedRecord { line: 0, reason: e.to_string() })?;
    out.write_all(text.as_bytes())?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Reads and fully validates a snapshot, then rebuilds the derived indexes.
pub fn load<R: BufRead>(mut input: R) -> Result<StvgGraph, SnapshotError> {
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;

    // The trailer is the final newline-terminated line; everything before it
    // is covered by the checksum.
    if bytes.is_empty() {
        return Err(SnapshotError::Truncated("file is empty".to_string()));
    }
    if bytes.last() != Some(&b'\n') {
        return Err(SnapshotError::Truncated(
            "file does not end with a complete line".to_string(),
        ));
    }
    let body_end = match bytes[..bytes.len() - 1].iter().rposition(|&b| b == b'\n') {
        Some(pos) => pos + 1,
        None => return Err(SnapshotError::Truncated("missing checksum trailer".to_string())),
    };
    let (body, trailer_line) = bytes.split_at(body_end);
    let trailer: Trailer = serde_json::from_slice(trailer_line)
        .map_err(|_| SnapshotError::Truncated("missing checksum trailer".to_string()))?;
    let digest = hex::encode(Sha256::digest(body));
    if digest != trailer.sha256 {
        return Err(SnapshotError::ChecksumMismatch);
    }

    let mut lines = body.split(|&b| b == b'\n');
    let header_line = lines
        .next()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| SnapshotError::Truncated("missing header".to_string()))?;
    let header: Header = serde_json::from_slice(header_line)
        .map_err(|e| SnapshotError::BadHeader(e.to_string()))?;
    if header.magic != MAGIC {
        return Err(SnapshotError::BadHeader(format!(
            "magic is {:?}, expected {MAGIC:?}",
            header.magic
        )));
    }
    if header.version != VERSION {
        return Err(SnapshotError::VersionMismatch { found: header.version });
    }

    let mut nodes: Vec<NodeRecord> = Vec::with_capacity(header.nodes as usize);
    let mut edges: Vec<EdgeRecord> = Vec::with_capacity(header.edges as usize);
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue; // trailing split artifact after the last newline
        }
        let line_no = i + 2;
        if nodes.len() < header.nodes as usize {
            let node: NodeRecord = serde_json::from_slice(line).map_err(|e| {
                SnapshotError::MalformedRecord { line: line_no, reason: e.to_string() }
            })?;
            nodes.push(node);
        } else {
            let edge: EdgeRecord = serde_json::from_slice(line).map_err(|e| {
                SnapshotError::MalformedRecord { line: line_no, reason: e.to_string() }
            })?;
            edges.push(edge);
        }
    }
    if nodes.len() != header.nodes as usize || edges.len() != header.edges as usize {
        return Err(SnapshotError::Truncated(format!(
            "expected {} nodes and {} edges, found {} and {}",
            header.nodes,
            header.edges,
            nodes.len(),
            edges.len()
        )));
    }

    let meta = GraphMeta {
        config_digest: header.config_digest,
        input_digest: header.input_digest,
    };
    Ok(StvgGraph::from_parts(nodes, edges, meta)?)
}

/// Structural equality of two graphs: same records, same meta.
pub fn same_graph(a: &StvgGraph, b: &StvgGraph) -> bool {
    a.meta() == b.meta() && a.nodes() == b.nodes() && a.edges() == b.edges()
}
