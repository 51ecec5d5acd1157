//! Edge-list text format: a header line `n d`, then one `u v` line per edge,
//! 0-indexed. Writers emit edges with `u < v` in lexicographic order, so a
//! written file reads back and re-writes byte for byte. Readers skip blank
//! lines and lines starting with `#`.

use std::io::{BufRead, Write};

use super::Graph;
use crate::error::{Error, Result};

pub fn write_edge_list<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "{} {}", g.n(), g.d())?;
    for (u, v) in g.edges() {
        writeln!(out, "{u} {v}")?;
    }
    out.flush()?;
    Ok(())
}

fn parse_pair(line: &str, lineno: usize) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let parse = |tok: Option<&str>| -> Result<usize> {
        tok.ok_or_else(|| Error::Parse { line: lineno, msg: "expected two integers".into() })?
            .parse()
            .map_err(|e| Error::Parse { line: lineno, msg: format!("{e}") })
    };
    let a = parse(it.next())?;
    let b = parse(it.next())?;
    if it.next().is_some() {
        return Err(Error::Parse { line: lineno, msg: "trailing tokens".into() });
    }
    Ok((a, b))
}

fn skippable(line: &str) -> bool {
    let t = line.trim_start();
    t.is_empty() || t.starts_with('#')
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<Graph> {
    let mut lines = input.lines().enumerate();
    let (n, d) = loop {
        match lines.next() {
            Some((i, line)) => {
                let line = line?;
                if !skippable(&line) {
                    break parse_pair(&line, i + 1)?;
                }
            }
            None => return Err(Error::Parse { line: 1, msg: "missing header".into() }),
        }
    };
    let mut edges = Vec::with_capacity(n * d / 2);
    for (i, line) in lines {
        let line = line?;
        if skippable(&line) {
            continue;
        }
        let (u, v) = parse_pair(&line, i + 1)?;
        if u >= n || v >= n {
            return Err(Error::Parse { line: i + 1, msg: format!("vertex out of range for n = {n}") });
        }
        edges.push((u as u32, v as u32));
    }
    if edges.len() * 2 != n * d {
        return Err(Error::Structure(format!(
            "header promises {} edges, file has {}",
            n * d / 2,
            edges.len()
        )));
    }
    let g = Graph::from_edges(n, &edges)?;
    if g.d() != d {
        return Err(Error::Structure(format!("header degree {d} but edges give {}", g.d())));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn to_bytes(g: &Graph) -> Vec<u8> {
        let mut buf = Vec::new();
        write_edge_list(g, &mut buf).unwrap();
        buf
    }

    #[test]
    fn k3_text() {
        let text = String::from_utf8(to_bytes(&Graph::complete(3).unwrap())).unwrap();
        assert_eq!(text, "3 2\n0 1\n0 2\n1 2\n");
    }

    #[test]
    fn unordered_input_is_accepted() {
        let g = read_edge_list("4 2\n\n3 0\n1 0\n2 1\n3 2\n".as_bytes()).unwrap();
        assert_eq!(g, Graph::cycle(4).unwrap());
    }

    #[test]
    fn comment_lines_are_skipped() {
        let g = read_edge_list("# kind: cycle\n3 2\n# edges\n0 1\n0 2\n1 2\n".as_bytes()).unwrap();
        assert_eq!(g, Graph::cycle(3).unwrap());
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(read_edge_list("".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(read_edge_list("3 2\n0 1\n".as_bytes()), Err(Error::Structure(_))));
        assert!(matches!(read_edge_list("3 2\n0 x\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(read_edge_list("3 2\n0 1\n0 5\n1 2\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(read_edge_list("3 2\n0 1\n0 1\n1 2\n".as_bytes()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn round_trip_is_byte_exact(seed: u64, half_n in 3usize..40, d in 1usize..6) {
            let n = 2 * half_n;
            prop_assume!(d < n);
            let g = Graph::random_regular(n, d, seed).unwrap();
            let bytes = to_bytes(&g);
            let back = read_edge_list(bytes.as_slice()).unwrap();
            prop_assert_eq!(&back, &g);
            prop_assert_eq!(to_bytes(&back), bytes);
        }
    }
}
