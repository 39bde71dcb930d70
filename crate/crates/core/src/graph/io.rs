//! Graph files.
//!
//! Text format: a header line `erg v1 n=<n> directed=<0|1>` followed by one
//! `i j` pair per line (0-indexed, `i < j` when undirected). Lines starting
//! with `#` and blank lines are ignored.
//!
//! Binary format: magic `ERG1`, little-endian `u32` node count, `u8` directed
//! flag, then the raw bitset, least significant bit first within each byte.
//! Undirected graphs store the strict upper triangle in row-major order;
//! directed graphs store all `n * n` entries in row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{AdjacencyMatrix, DirectedAdjacencyMatrix};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"ERG1";

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GraphFile {
    Undirected(AdjacencyMatrix),
    Directed(DirectedAdjacencyMatrix),
}

impl GraphFile {
    pub fn n(&self) -> usize {
        match self {
            GraphFile::Undirected(a) => a.n(),
            GraphFile::Directed(d) => d.n(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum GraphFormat {
    #[default]
    Text,
    Binary,
}

/// Reads an undirected graph (text or binary, detected from the content).
pub fn read_graph(path: impl AsRef<Path>) -> Result<AdjacencyMatrix> {
    let path = path.as_ref();
    match read_graph_file(path)? {
        GraphFile::Undirected(a) => Ok(a),
        GraphFile::Directed(_) => Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "expected an undirected graph, found directed=1".into(),
        }),
    }
}

/// Writes an undirected graph in the text format.
pub fn write_graph(a: &AdjacencyMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_graph_file(&GraphFile::Undirected(a.clone()), path, GraphFormat::Text)
}

pub fn read_graph_file(path: impl AsRef<Path>) -> Result<GraphFile> {
    let path = path.as_ref();
    let bytes = fs::read(path)?;
    if bytes.starts_with(MAGIC) {
        parse_binary(path, &bytes)
    } else {
        let text = String::from_utf8(bytes).map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: "file is neither ERG1 binary nor UTF-8 text".into(),
        })?;
        parse_text(path, &text)
    }
}

pub fn write_graph_file(g: &GraphFile, path: impl AsRef<Path>, format: GraphFormat) -> Result<()> {
    let bytes = match format {
        GraphFormat::Text => to_text(g).into_bytes(),
        GraphFormat::Binary => to_binary(g),
    };
    let mut f = fs::File::create(path)?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Text serialization used by the file writer.
pub fn to_text(g: &GraphFile) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    match g {
        GraphFile::Undirected(a) => {
            writeln!(out, "erg v1 n={} directed=0", a.n()).unwrap();
            for (i, j) in a.edges() {
                writeln!(out, "{i} {j}").unwrap();
            }
        }
        GraphFile::Directed(d) => {
            writeln!(out, "erg v1 n={} directed=1", d.n()).unwrap();
            for (i, j) in d.edges() {
                writeln!(out, "{i} {j}").unwrap();
            }
        }
    }
    out
}

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_header(path: &Path, line_no: usize, line: &str) -> Result<(usize, bool)> {
    let mut parts = line.split_whitespace();
    if parts.next() != Some("erg") || parts.next() != Some("v1") {
        return Err(parse_error(path, line_no, format!("malformed header `{line}`")));
    }
    let mut n = None;
    let mut directed = None;
    for part in parts {
        match part.split_once('=') {
            Some(("n", v)) => {
                let value: usize = v
                    .parse()
                    .map_err(|_| parse_error(path, line_no, format!("invalid node count `{v}`")))?;
                if value == 0 {
                    return Err(parse_error(path, line_no, "node count must be at least 1"));
                }
                n = Some(value);
            }
            Some(("directed", "0")) => directed = Some(false),
            Some(("directed", "1")) => directed = Some(true),
            _ => {
                return Err(parse_error(path, line_no, format!("unexpected header field `{part}`")))
            }
        }
    }
    match (n, directed) {
        (Some(n), Some(d)) => Ok((n, d)),
        _ => Err(parse_error(path, line_no, "header needs both n= and directed=")),
    }
}

fn parse_text(path: &Path, text: &str) -> Result<GraphFile> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (line_no, header) = lines
        .next()
        .ok_or_else(|| parse_error(path, 1, "missing header"))?;
    let (n, directed) = parse_header(path, line_no, header)?;
    let mut und = (!directed).then(|| AdjacencyMatrix::empty(n));
    let mut dir = directed.then(|| DirectedAdjacencyMatrix::empty(n));
    for (line_no, line) in lines {
        let mut it = line.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            return Err(parse_error(path, line_no, format!("expected `i j`, found `{line}`")));
        };
        let parse_id = |s: &str| -> Result<usize> {
            s.parse::<usize>()
                .map_err(|_| parse_error(path, line_no, format!("invalid node id `{s}`")))
        };
        let (i, j) = (parse_id(a)?, parse_id(b)?);
        if i >= n || j >= n {
            return Err(parse_error(
                path,
                line_no,
                format!("node id out of range in ({i},{j}) for n = {n}"),
            ));
        }
        if i == j {
            return Err(parse_error(path, line_no, format!("self-loop ({i},{j}) not allowed")));
        }
        if let Some(g) = und.as_mut() {
            if i > j {
                return Err(parse_error(
                    path,
                    line_no,
                    format!("undirected edge ({i},{j}) must be written with i < j"),
                ));
            }
            if g.has_edge(i, j) {
                return Err(parse_error(path, line_no, format!("duplicate edge ({i},{j})")));
            }
            g.set_edge(i, j, true);
        } else if let Some(g) = dir.as_mut() {
            if g.has_edge(i, j) {
                return Err(parse_error(path, line_no, format!("duplicate edge ({i},{j})")));
            }
            g.set_edge(i, j, true);
        }
    }
    Ok(match (und, dir) {
        (Some(g), _) => GraphFile::Undirected(g),
        (_, Some(g)) => GraphFile::Directed(g),
        _ => unreachable!(),
    })
}

struct BitWriter {
    bytes: Vec<u8>,
    len: usize,
}

impl BitWriter {
    fn push(&mut self, bit: bool) {
        if self.len % 8 == 0 {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 1 << (self.len % 8);
        }
        self.len += 1;
    }
}

fn to_binary(g: &GraphFile) -> Vec<u8> {
    let n = g.n();
    let mut w = BitWriter {
        bytes: Vec::new(),
        len: 0,
    };
    w.bytes.extend_from_slice(MAGIC);
    w.bytes.extend_from_slice(&(n as u32).to_le_bytes());
    match g {
        GraphFile::Undirected(a) => {
            w.bytes.push(0);
            w.len = w.bytes.len() * 8;
            for i in 0..n {
                for j in i + 1..n {
                    w.push(a.has_edge(i, j));
                }
            }
        }
        GraphFile::Directed(d) => {
            w.bytes.push(1);
            w.len = w.bytes.len() * 8;
            for i in 0..n {
                for j in 0..n {
                    w.push(d.has_edge(i, j));
                }
            }
        }
    }
    w.bytes
}

fn parse_binary(path: &Path, bytes: &[u8]) -> Result<GraphFile> {
    let err = |m: &str| parse_error(path, 1, m);
    if bytes.len() < 9 {
        return Err(err("truncated ERG1 header"));
    }
    let n = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    if n == 0 {
        return Err(err("node count must be at least 1"));
    }
    let directed = match bytes[8] {
        0 => false,
        1 => true,
        _ => return Err(err("directed flag must be 0 or 1")),
    };
    let payload = &bytes[9..];
    let bit_count = if directed { n * n } else { n * (n - 1) / 2 };
    if payload.len() != bit_count.div_ceil(8) {
        return Err(err(&format!(
            "payload holds {} bytes, expected {}",
            payload.len(),
            bit_count.div_ceil(8)
        )));
    }
    let bit = |k: usize| (payload[k / 8] >> (k % 8)) & 1 == 1;
    let mut k = 0usize;
    if directed {
        let mut d = DirectedAdjacencyMatrix::empty(n);
        for i in 0..n {
            for j in 0..n {
                if bit(k) {
                    if i == j {
                        return Err(err(&format!("self-loop ({i},{i}) not allowed")));
                    }
                    d.set_edge(i, j, true);
                }
                k += 1;
            }
        }
        Ok(GraphFile::Directed(d))
    } else {
        let mut a = AdjacencyMatrix::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                if bit(k) {
                    a.set_edge(i, j, true);
                }
                k += 1;
            }
        }
        Ok(GraphFile::Undirected(a))
    }
}

impl From<&Path> for GraphFormat {
    fn from(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("bin") | Some("erg1") => GraphFormat::Binary,
            _ => GraphFormat::Text,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_directed_er, sample_er, GraphParams};
    use crate::rng::RandomStream;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn text_round_trip() {
        let dir = tmp();
        let path = dir.path().join("g.erg");
        let g = sample_er(&GraphParams::new(50, 0.3), &mut RandomStream::from_seed(2)).unwrap();
        write_graph(&g, &path).unwrap();
        assert_eq!(read_graph(&path).unwrap(), g);
    }

    #[test]
    fn binary_round_trip_both_kinds() {
        let dir = tmp();
        let mut rng = RandomStream::from_seed(3);
        let g = sample_er(&GraphParams::new(37, 0.5), &mut rng).unwrap();
        let d = sample_directed_er(&GraphParams::new(21, 0.5), &mut rng).unwrap();
        for file in [GraphFile::Undirected(g), GraphFile::Directed(d)] {
            let path = dir.path().join("g.bin");
            write_graph_file(&file, &path, GraphFormat::Binary).unwrap();
            assert_eq!(read_graph_file(&path).unwrap(), file);
        }
    }

    fn parse(text: &str) -> Result<GraphFile> {
        parse_text(Path::new("mem"), text)
    }

    #[test]
    fn negative_n_rejected() {
        let e = parse("erg v1 n=-1 directed=0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
    }

    #[test]
    fn self_loop_rejected_with_line_number() {
        let e = parse("erg v1 n=6 directed=0\n# c\n0 1\n5 5\n").unwrap_err();
        match e {
            Error::Parse { line, message, .. } => {
                assert_eq!(line, 4);
                assert!(message.contains("self-loop"));
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn duplicates_and_range_rejected() {
        assert!(matches!(
            parse("erg v1 n=3 directed=0\n0 1\n0 1\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            parse("erg v1 n=3 directed=0\n0 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(parse("erg v2 n=3 directed=0\n").is_err());
        assert!(parse("erg v1 n=3\n").is_err());
    }

    #[test]
    fn comments_and_directed() {
        let g = parse("# leading\nerg v1 n=3 directed=1\n\n2 1\n1 2\n").unwrap();
        let GraphFile::Directed(d) = g else { panic!() };
        assert!(d.has_edge(2, 1) && d.has_edge(1, 2));
        assert_eq!(d.edge_count(), 2);
    }
}
