//! The HGR1 text format.
//!
//! ```text
//! # optional comments anywhere
//! k n m
//! v1 v2 ... vk     (m lines, ids ascending)
//! ```
//!
//! [`write_hgr1`] emits the canonical form: no comments, edges in
//! lexicographic order. Reading canonical output and writing it again gives
//! back the same bytes.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;

pub fn write_hgr1<W: Write>(h: &Hypergraph, mut w: W) -> Result<()> {
    writeln!(w, "{} {} {}", h.k(), h.n(), h.edge_count())?;
    let mut line = String::new();
    let mut err = None;
    h.for_each_edge(|e| {
        line.clear();
        for (i, v) in e.iter().enumerate() {
            if i > 0 {
                line.push(' ');
            }
            line.push_str(&v.to_string());
        }
        line.push('\n');
        if let Err(x) = w.write_all(line.as_bytes()) {
            err = Some(x);
            return false;
        }
        true
    });
    match err {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn to_hgr1_string(h: &Hypergraph) -> String {
    let mut buf = Vec::new();
    write_hgr1(h, &mut buf).expect("writing to memory cannot fail");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_numbers(line: &str, lineno: usize) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("not a nonnegative integer: {tok:?}"),
            })
        })
        .collect()
}

pub fn read_hgr1<R: BufRead>(r: R) -> Result<Hypergraph> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut edges: Vec<Vec<u32>> = Vec::new();
    let mut last_line = 0;
    for (i, line) in r.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let nums = parse_numbers(body, lineno)?;
        match header {
            None => {
                if nums.len() != 3 {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: "header must be `k n m`".into(),
                    });
                }
                header = Some((nums[0] as usize, nums[1] as usize, nums[2] as usize));
            }
            Some((k, n, _)) => {
                if nums.len() != k {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("expected {k} vertex ids, found {}", nums.len()),
                    });
                }
                if let Some(&v) = nums.iter().find(|&&v| v >= n as u64) {
                    return Err(Error::Parse {
                        line: lineno,
                        msg: format!("vertex {v} out of range 0..{n}"),
                    });
                }
                edges.push(nums.into_iter().map(|v| v as u32).collect());
            }
        }
    }
    let (k, n, m) = header.ok_or(Error::Parse {
        line: last_line,
        msg: "missing header".into(),
    })?;
    if edges.len() != m {
        return Err(Error::Parse {
            line: last_line,
            msg: format!("header announces {m} edges, found {}", edges.len()),
        });
    }
    Hypergraph::build(k, n, edges)
}

pub fn from_hgr1_str(s: &str) -> Result<Hypergraph> {
    read_hgr1(s.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::critical_n;

    #[test]
    fn round_trip_is_byte_identical() {
        let (h, _) = critical_n(3, 12).unwrap();
        let text = to_hgr1_string(&h);
        let back = from_hgr1_str(&text).unwrap();
        assert_eq!(back, h);
        assert_eq!(to_hgr1_string(&back), text);
        let first = text.lines().next().unwrap();
        assert_eq!(first, format!("3 12 {}", h.edge_count()));
    }

    #[test]
    fn comments_and_unsorted_input_are_accepted() {
        let h = from_hgr1_str("# a comment\n3 5 2\n2 1 0 # trailing\n\n4 3 2\n").unwrap();
        assert_eq!(h.edge_count(), 2);
        assert_eq!(to_hgr1_string(&h), "3 5 2\n0 1 2\n2 3 4\n");
    }

    #[test]
    fn malformed_inputs() {
        assert!(matches!(from_hgr1_str(""), Err(Error::Parse { .. })));
        assert!(matches!(from_hgr1_str("3 5\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(from_hgr1_str("3 5 1\n0 1\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(from_hgr1_str("3 5 1\n0 1 9\n"), Err(Error::Parse { line: 2, .. })));
        assert!(matches!(from_hgr1_str("3 5 2\n0 1 2\n"), Err(Error::Parse { .. })));
        assert!(matches!(from_hgr1_str("3 5 1\n0 1 x\n"), Err(Error::Parse { .. })));
        assert!(matches!(from_hgr1_str("3 5 1\n0 1 1\n"), Err(Error::BadEdge { .. })));
    }
}
