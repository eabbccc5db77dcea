//! Reading and writing graphs: graph6 and a plain edge list.
//!
//! Edge-list files start with a line `n m` followed by `m` lines `u v`
//! (0-indexed). Blank lines and lines starting with `#` are skipped.
//! Duplicate edges and self-loops are rejected.

use std::path::Path;

use crate::error::{Error, Result};
use crate::f2linalg::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Graph6,
    EdgeList,
}

impl Format {
    /// `.g6` and `.graph6` are graph6; everything else is an edge list.
    pub fn from_path(path: &Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("g6") | Some("graph6") => Format::Graph6,
            _ => Format::EdgeList,
        }
    }
}

fn parse_error(location: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Parse { location: location.into(), msg: msg.into() }
}

pub fn parse(text: &str, format: Format) -> Result<Graph> {
    match format {
        Format::Graph6 => parse_graph6(text),
        Format::EdgeList => parse_edge_list(text),
    }
}

pub fn emit(g: &Graph, format: Format) -> String {
    match format {
        Format::Graph6 => format!("{}\n", to_graph6(g)),
        Format::EdgeList => to_edge_list(g),
    }
}

/// Parses the first non-empty line of `text` as graph6 (an optional
/// `>>graph6<<` header is accepted).
pub fn parse_graph6(text: &str) -> Result<Graph> {
    let line = text.lines().map(str::trim).find(|l| !l.is_empty()).unwrap_or("");
    let line = line.strip_prefix(">>graph6<<").unwrap_or(line);
    let bytes = line.as_bytes();
    if bytes.is_empty() {
        return Err(parse_error("byte 0", "empty graph6 string"));
    }
    if let Some(i) = bytes.iter().position(|&b| !(63..=126).contains(&b)) {
        return Err(parse_error(format!("byte {i}"), format!("character {:?} outside the graph6 range", bytes[i] as char)));
    }
    let (n, start) = if bytes[0] != 126 {
        ((bytes[0] - 63) as usize, 1)
    } else if bytes.len() >= 4 && bytes[1] != 126 {
        let n = bytes[1..4].iter().fold(0usize, |acc, &b| acc << 6 | (b - 63) as usize);
        (n, 4)
    } else {
        return Err(parse_error("byte 1", "vertex counts above 258047 are not supported"));
    };
    let mut g = Graph::new(n)?;
    let needed = (n * n.saturating_sub(1) / 2).div_ceil(6);
    let body = &bytes[start..];
    if body.len() != needed {
        return Err(parse_error(format!("byte {start}"), format!("expected {needed} data bytes for {n} vertices, found {}", body.len())));
    }
    let bit = |k: usize| (body[k / 6] - 63) >> (5 - k % 6) & 1 == 1;
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            if bit(k) {
                g.add_edge(i, j)?;
            }
            k += 1;
        }
    }
    // padding bits must be zero
    while k < needed * 6 {
        if bit(k) {
            return Err(parse_error(format!("byte {}", start + k / 6), "nonzero padding bit"));
        }
        k += 1;
    }
    Ok(g)
}

pub fn to_graph6(g: &Graph) -> String {
    let n = g.n();
    let mut out: Vec<u8> = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else {
        out.push(126);
        out.extend([(n >> 12) & 63, (n >> 6) & 63, n & 63].iter().map(|&x| x as u8 + 63));
    }
    let mut acc = 0u8;
    let mut filled = 0;
    for j in 1..n {
        for i in 0..j {
            acc = acc << 1 | g.has_edge(i, j) as u8;
            filled += 1;
            if filled == 6 {
                out.push(acc + 63);
                acc = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((acc << (6 - filled)) + 63);
    }
    String::from_utf8(out).expect("graph6 is ASCII")
}

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or_else(|| parse_error("line 1", "missing header \"n m\""))?;
    let nums = |line: usize, s: &str| -> Result<(usize, usize)> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        if parts.len() != 2 {
            return Err(parse_error(format!("line {line}"), format!("expected two integers, found {s:?}")));
        }
        let p = |x: &str| x.parse::<usize>().map_err(|_| parse_error(format!("line {line}"), format!("{x:?} is not a non-negative integer")));
        Ok((p(parts[0])?, p(parts[1])?))
    };
    let (n, m) = nums(hline, header)?;
    let mut g = Graph::new(n).map_err(|e| parse_error(format!("line {hline}"), e.to_string()))?;
    let mut count = 0;
    for (line, text) in lines {
        let (u, v) = nums(line, text)?;
        let at = format!("line {line}");
        if u >= n || v >= n {
            return Err(parse_error(at, format!("vertex out of range 0..{n}")));
        }
        if u == v {
            return Err(parse_error(at, format!("self-loop at vertex {u}")));
        }
        if g.has_edge(u, v) {
            return Err(parse_error(at, format!("duplicate edge {u} {v}")));
        }
        g.add_edge(u, v)?;
        count += 1;
    }
    if count != m {
        return Err(parse_error(format!("line {hline}"), format!("header announces {m} edges, found {count}")));
    }
    Ok(g)
}

pub fn to_edge_list(g: &Graph) -> String {
    let edges = g.edges();
    let mut out = format!("{} {}\n", g.n(), edges.len());
    for (u, v) in edges {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn read_graph(path: &Path, format: Option<Format>) -> Result<Graph> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_error(path.display().to_string(), e.to_string()))?;
    let format = format.unwrap_or_else(|| Format::from_path(path));
    parse(&text, format).map_err(|e| match e {
        Error::Parse { location, msg } => parse_error(format!("{}: {location}", path.display()), msg),
        e => e,
    })
}
