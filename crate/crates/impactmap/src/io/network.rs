//! Edge-list TSV for sparse networks: `source_id<TAB>target_id<TAB>weight`
//! rows preceded by `#` header comments recording the kind, counts,
//! isolated nodes, and build parameters. Weights are written in shortest
//! round-trip form so a reload reproduces the exact bit pattern.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use impactmap_core::net::{NetworkKind, SparseNetwork};

use crate::error::PipelineError;

pub fn write_network(
    path: &Path,
    net: &SparseNetwork,
    params: &str,
) -> Result<(), PipelineError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(file, "# kind={}", net.kind().label())?;
    writeln!(file, "# nodes={} edges={}", net.node_count(), net.edge_count())?;
    let connected: BTreeSet<u32> = net
        .edges()
        .iter()
        .flat_map(|&(s, t, _)| [s, t])
        .collect();
    let isolated: Vec<&str> = net
        .nodes()
        .iter()
        .enumerate()
        .filter(|(i, _)| !connected.contains(&(*i as u32)))
        .map(|(_, id)| id.as_str())
        .collect();
    writeln!(file, "# isolated={}", isolated.join(";"))?;
    writeln!(file, "# params={params}")?;
    writeln!(file, "source_id\ttarget_id\tweight")?;
    let nodes = net.nodes();
    for &(s, t, w) in net.edges() {
        writeln!(file, "{}\t{}\t{}", nodes[s as usize], nodes[t as usize], w)?;
    }
    file.flush()?;
    Ok(())
}

pub fn read_network(path: &Path) -> Result<SparseNetwork, PipelineError> {
    let file = BufReader::new(std::fs::File::open(path).map_err(|e| {
        PipelineError::Validation(format!("{}: {e}", path.display()))
    })?);
    let mut kind: Option<NetworkKind> = None;
    let mut isolated: Vec<String> = Vec::new();
    let mut declared: Option<(usize, usize)> = None;
    let mut raw_edges: Vec<(String, String, f64)> = Vec::new();
    let mut header_seen = false;

    for (idx, line) in file.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(value) = comment.strip_prefix("kind=") {
                kind = Some(match value {
                    "citation-count" => NetworkKind::CitationCount,
                    "usage-transition-probability" => NetworkKind::UsageTransition,
                    other => {
                        return Err(PipelineError::Validation(format!(
                            "{} line {line_no}: unknown network kind {other:?}",
                            path.display()
                        )))
                    }
                });
            } else if let Some(value) = comment.strip_prefix("nodes=") {
                let mut parts = value.split_whitespace();
                let nodes = parts.next().and_then(|v| v.parse::<usize>().ok());
                let edges = parts
                    .next()
                    .and_then(|v| v.strip_prefix("edges="))
                    .and_then(|v| v.parse::<usize>().ok());
                if let (Some(n), Some(e)) = (nodes, edges) {
                    declared = Some((n, e));
                }
            } else if let Some(value) = comment.strip_prefix("isolated=") {
                if !value.is_empty() {
                    isolated = value.split(';').map(String::from).collect();
                }
            }
            continue;
        }
        if !header_seen {
            header_seen = true;
            continue;
        }
        let mut cells = line.split('\t');
        let source = cells.next().unwrap_or_default();
        let target = cells.next().unwrap_or_default();
        let weight_text = cells.next().ok_or_else(|| {
            PipelineError::Validation(format!(
                "{} line {line_no}: expected 3 tab-separated cells",
                path.display()
            ))
        })?;
        let weight: f64 = weight_text.parse().map_err(|_| {
            PipelineError::Validation(format!(
                "{} line {line_no}: unparsable weight {weight_text:?}",
                path.display()
            ))
        })?;
        raw_edges.push((source.to_string(), target.to_string(), weight));
    }

    let kind = kind.ok_or_else(|| {
        PipelineError::Validation(format!("{}: missing '# kind=' comment", path.display()))
    })?;
    let mut node_set: BTreeSet<String> = isolated.into_iter().collect();
    for (s, t, _) in &raw_edges {
        node_set.insert(s.clone());
        node_set.insert(t.clone());
    }
    let nodes: Vec<String> = node_set.into_iter().collect();
    let index: BTreeMap<&str, u32> = nodes
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i as u32))
        .collect();
    let mut edges = BTreeMap::new();
    for (s, t, w) in &raw_edges {
        edges.insert((index[s.as_str()], index[t.as_str()]), *w);
    }
    if let Some((n, e)) = declared {
        if n != nodes.len() || e != edges.len() {
            return Err(PipelineError::Validation(format!(
                "{}: declared {n} nodes / {e} edges but found {} / {}",
                path.display(),
                nodes.len(),
                edges.len()
            )));
        }
    }
    SparseNetwork::from_edge_map(kind, nodes, edges)
        .map_err(|e| PipelineError::Validation(format!("{}: {e}", path.display())))
}
