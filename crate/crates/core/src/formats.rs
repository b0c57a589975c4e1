//! Line-based text formats. UTF-8, `#` starts a comment, blank lines ignored.
//!
//! ```text
//! eog <n> <m>        edge-ordered:  m lines  <u> <v> <label>
//! elg <n> <m> <L>    edge-labeled:  m lines  <u> <v> <label in 1..=L>
//! vog <n> <m>        vertex-ordered: m lines <u> <v>
//! col <m> <q>        coloring:      m lines  <rank> <color in 1..=q>
//! ```
//!
//! Vertex ids are 1-based in files. Edge-ordered labels may be arbitrary
//! distinct positive integers; decoding normalizes them to ranks `1..=m`
//! preserving order. Encoding always writes canonical output: ranks `1..=m`
//! in rank order (`eog`), edges sorted by endpoints (`elg`, `vog`), ranks in
//! increasing order (`col`).

use thiserror::Error;

use crate::graph::{Coloring, EdgeLabeledGraph, EdgeOrderedGraph, VertexOrderedGraph};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        msg: msg.into(),
    })
}

/// Content lines with their 1-based source line numbers, comments stripped.
fn content_lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let fields: Vec<&str> = body.split_whitespace().collect();
            (!fields.is_empty()).then_some((i + 1, fields))
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T, FormatError> {
    s.parse()
        .map_err(|_| FormatError {
            line,
            msg: format!("invalid {what}: {s:?}"),
        })
}

struct Header {
    line: usize,
    fields: Vec<u64>,
}

fn split_header<'a>(
    text: &'a str,
    keyword: &str,
    arity: usize,
) -> Result<(Header, Vec<(usize, Vec<&'a str>)>), FormatError> {
    let mut lines = content_lines(text);
    if lines.is_empty() {
        return err(1, format!("missing `{keyword}` header"));
    }
    let (line, fields) = lines.remove(0);
    if fields[0] != keyword {
        return err(line, format!("expected `{keyword}` header, got {:?}", fields[0]));
    }
    if fields.len() != arity + 1 {
        return err(line, format!("`{keyword}` header takes {arity} fields"));
    }
    let nums = fields[1..]
        .iter()
        .map(|s| parse_field(line, s, "header field"))
        .collect::<Result<Vec<u64>, _>>()?;
    Ok((Header { line, fields: nums }, lines))
}

fn vertex_1based(line: usize, s: &str, n: usize) -> Result<usize, FormatError> {
    let v: usize = parse_field(line, s, "vertex id")?;
    if v == 0 || v > n {
        return err(line, format!("vertex id {v} outside 1..={n}"));
    }
    Ok(v - 1)
}

pub fn decode_edge_ordered(text: &str) -> Result<EdgeOrderedGraph, FormatError> {
    let (header, lines) = split_header(text, "eog", 2)?;
    let (n, m) = (header.fields[0] as usize, header.fields[1] as usize);
    if lines.len() != m {
        return err(header.line, format!("expected {m} edge lines, found {}", lines.len()));
    }
    let mut labeled = Vec::with_capacity(m);
    for (line, fields) in lines {
        if fields.len() != 3 {
            return err(line, "edge line takes `<u> <v> <label>`");
        }
        let u = vertex_1based(line, fields[0], n)?;
        let v = vertex_1based(line, fields[1], n)?;
        let label: i64 = parse_field(line, fields[2], "label")?;
        if label < 1 {
            return err(line, format!("label {label} must be a positive integer"));
        }
        labeled.push(((u, v, label), line));
    }
    let triples: Vec<_> = labeled.iter().map(|&(t, _)| t).collect();
    EdgeOrderedGraph::from_labeled_edges(n, triples).map_err(|e| FormatError {
        line: header.line,
        msg: e.to_string(),
    })
}

pub fn encode_edge_ordered(g: &EdgeOrderedGraph) -> String {
    let mut out = format!("eog {} {}\n", g.vertex_count(), g.edge_count());
    for (k, &(u, v)) in g.edges().iter().enumerate() {
        out.push_str(&format!("{} {} {}\n", u + 1, v + 1, k + 1));
    }
    out
}

pub fn decode_edge_labeled(text: &str) -> Result<EdgeLabeledGraph, FormatError> {
    let (header, lines) = split_header(text, "elg", 3)?;
    let (n, m, l) = (
        header.fields[0] as usize,
        header.fields[1] as usize,
        header.fields[2] as usize,
    );
    if lines.len() != m {
        return err(header.line, format!("expected {m} edge lines, found {}", lines.len()));
    }
    let mut triples = Vec::with_capacity(m);
    for (line, fields) in lines {
        if fields.len() != 3 {
            return err(line, "edge line takes `<u> <v> <label>`");
        }
        let u = vertex_1based(line, fields[0], n)?;
        let v = vertex_1based(line, fields[1], n)?;
        let label: usize = parse_field(line, fields[2], "label")?;
        if label == 0 || label > l {
            return err(line, format!("label {label} outside 1..={l}"));
        }
        triples.push((u, v, label));
    }
    EdgeLabeledGraph::new(n, l, triples).map_err(|e| FormatError {
        line: header.line,
        msg: e.to_string(),
    })
}

pub fn encode_edge_labeled(g: &EdgeLabeledGraph) -> String {
    let mut out = format!(
        "elg {} {} {}\n",
        g.vertex_count(),
        g.edge_count(),
        g.label_universe()
    );
    for &(u, v, label) in g.edges() {
        out.push_str(&format!("{} {} {}\n", u + 1, v + 1, label));
    }
    out
}

pub fn decode_vertex_ordered(text: &str) -> Result<VertexOrderedGraph, FormatError> {
    let (header, lines) = split_header(text, "vog", 2)?;
    let (n, m) = (header.fields[0] as usize, header.fields[1] as usize);
    if lines.len() != m {
        return err(header.line, format!("expected {m} edge lines, found {}", lines.len()));
    }
    let mut pairs = Vec::with_capacity(m);
    for (line, fields) in lines {
        if fields.len() != 2 {
            return err(line, "edge line takes `<u> <v>`");
        }
        let u = vertex_1based(line, fields[0], n)?;
        let v = vertex_1based(line, fields[1], n)?;
        pairs.push((u, v));
    }
    VertexOrderedGraph::new(n, pairs).map_err(|e| FormatError {
        line: header.line,
        msg: e.to_string(),
    })
}

pub fn encode_vertex_ordered(g: &VertexOrderedGraph) -> String {
    let mut out = format!("vog {} {}\n", g.vertex_count(), g.edges().len());
    for &(u, v) in g.edges() {
        out.push_str(&format!("{} {}\n", u + 1, v + 1));
    }
    out
}

pub fn decode_coloring(text: &str) -> Result<Coloring, FormatError> {
    let (header, lines) = split_header(text, "col", 2)?;
    let (m, q) = (header.fields[0] as usize, header.fields[1] as u32);
    if lines.len() != m {
        return err(header.line, format!("expected {m} entries, found {}", lines.len()));
    }
    let mut pairs = Vec::with_capacity(m);
    for (line, fields) in lines {
        if fields.len() != 2 {
            return err(line, "coloring line takes `<rank> <color>`");
        }
        let rank: usize = parse_field(line, fields[0], "rank")?;
        let color: u32 = parse_field(line, fields[1], "color")?;
        pairs.push((rank, color));
    }
    Coloring::from_pairs(q, m, &pairs).map_err(|e| FormatError {
        line: header.line,
        msg: e.to_string(),
    })
}

pub fn encode_coloring(c: &Coloring) -> String {
    let mut out = format!("col {} {}\n", c.len(), c.q());
    for rank in 1..=c.len() {
        out.push_str(&format!("{} {}\n", rank, c.color_of(rank)));
    }
    out
}
