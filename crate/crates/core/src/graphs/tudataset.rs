//! Reader for the TU graph-benchmark text format (`DS_A.txt`,
//! `DS_graph_indicator.txt`, `DS_graph_labels.txt`). Node and edge attribute
//! files are ignored.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use super::{Graph, GraphDataset, Label};
use crate::{Error, Result};

fn find_prefix(dir: &Path) -> Result<String> {
    let mut prefixes = Vec::new();
    for entry in fs::read_dir(dir)? {
        let name = entry?.file_name().to_string_lossy().into_owned();
        if let Some(prefix) = name.strip_suffix("_A.txt") {
            prefixes.push(prefix.to_string());
        }
    }
    match prefixes.len() {
        1 => Ok(prefixes.pop().unwrap()),
        0 => Err(Error::Integrity(format!(
            "no *_A.txt edge file in {}",
            dir.display()
        ))),
        _ => Err(Error::Integrity(format!(
            "several *_A.txt edge files in {}",
            dir.display()
        ))),
    }
}

fn read_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let text = fs::read_to_string(path)?;
    Ok(text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim().to_string()))
        .filter(|(_, l)| !l.is_empty())
        .collect())
}

fn parse_int(path: &Path, line: usize, field: &str) -> Result<i64> {
    field.trim().parse::<i64>().map_err(|e| Error::Parse {
        file: path.display().to_string(),
        line,
        msg: format!("expected an integer, found {field:?} ({e})"),
    })
}

/// Loads a TU-format dataset directory.
///
/// Edges are treated as directed pairs and symmetrized; self-loops are
/// dropped. Graph labels are mapped to `Positive` for the larger of the two
/// raw label values (`1` in the 0/1 and -1/1 conventions).
pub fn load_tudataset(dir: &Path) -> Result<GraphDataset> {
    let prefix = find_prefix(dir)?;
    let file = |suffix: &str| -> PathBuf { dir.join(format!("{prefix}_{suffix}.txt")) };
    let indicator_path = file("graph_indicator");
    let labels_path = file("graph_labels");
    let edges_path = file("A");

    let mut node_graph = Vec::new();
    for (line, text) in read_lines(&indicator_path)? {
        let gid = parse_int(&indicator_path, line, &text)?;
        if gid < 1 {
            return Err(Error::Parse {
                file: indicator_path.display().to_string(),
                line,
                msg: format!("graph ids are 1-based, found {gid}"),
            });
        }
        node_graph.push(gid as usize - 1);
    }

    let mut raw_labels = Vec::new();
    for (line, text) in read_lines(&labels_path)? {
        raw_labels.push(parse_int(&labels_path, line, &text)?);
    }
    let graph_count = raw_labels.len();
    if let Some(&max_gid) = node_graph.iter().max() {
        if max_gid >= graph_count {
            return Err(Error::Integrity(format!(
                "node indicator references graph {} but only {graph_count} labels exist",
                max_gid + 1
            )));
        }
    }
    let distinct: BTreeSet<i64> = raw_labels.iter().copied().collect();
    if distinct.len() > 2 {
        return Err(Error::Integrity(format!(
            "expected binary graph labels, found {distinct:?}"
        )));
    }
    let positive_raw = distinct.iter().next_back().copied().unwrap_or(1);
    let positive_raw = if distinct.len() == 1 && positive_raw <= 0 {
        i64::MAX
    } else {
        positive_raw
    };

    // Local node indices in order of appearance within each graph.
    let mut local = Vec::with_capacity(node_graph.len());
    let mut counts = vec![0usize; graph_count];
    for &g in &node_graph {
        local.push(counts[g]);
        counts[g] += 1;
    }

    let mut edge_lists: Vec<Vec<(usize, usize)>> = vec![Vec::new(); graph_count];
    for (line, text) in read_lines(&edges_path)? {
        let mut fields = text.split(',');
        let (a, b) = match (fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), None) => (
                parse_int(&edges_path, line, a)?,
                parse_int(&edges_path, line, b)?,
            ),
            _ => {
                return Err(Error::Parse {
                    file: edges_path.display().to_string(),
                    line,
                    msg: format!("expected `u, v`, found {text:?}"),
                })
            }
        };
        let node = |x: i64| -> Result<usize> {
            if x < 1 || x as usize > node_graph.len() {
                return Err(Error::Integrity(format!(
                    "{}:{line}: node {x} not present in the graph indicator",
                    edges_path.display()
                )));
            }
            Ok(x as usize - 1)
        };
        let (a, b) = (node(a)?, node(b)?);
        if node_graph[a] != node_graph[b] {
            return Err(Error::Integrity(format!(
                "{}:{line}: edge ({}, {}) joins graphs {} and {}",
                edges_path.display(),
                a + 1,
                b + 1,
                node_graph[a] + 1,
                node_graph[b] + 1
            )));
        }
        if a != b {
            edge_lists[node_graph[a]].push((local[a], local[b]));
        }
    }

    let mut graphs = Vec::with_capacity(graph_count);
    for (g, edges) in edge_lists.into_iter().enumerate() {
        if counts[g] == 0 {
            return Err(Error::Integrity(format!("graph {} has no nodes", g + 1)));
        }
        let label = if raw_labels[g] == positive_raw {
            Label::Positive
        } else {
            Label::Negative
        };
        graphs.push(Graph::new(counts[g], edges)?.with_label(Some(label)));
    }
    Ok(GraphDataset::new(
        prefix,
        format!("TU format from {}", dir.display()),
        graphs,
    ))
}
