//! `sched/1` JSON Lines traces: a header line, then one move per line.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Move, MoveKind, Schedule};
use crate::cdag::Cdag;

pub const TRACE_SCHEMA: &str = "sched/1";

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    schema: String,
    cache: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Line {
    op: MoveKind,
    v: String,
}

pub fn write_trace<W: Write>(g: &Cdag, s: &Schedule, mut w: W) -> std::io::Result<()> {
    let header = Header {
        schema: TRACE_SCHEMA.to_string(),
        cache: s.declared_cache,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    for m in &s.moves {
        let line = Line {
            op: m.kind,
            v: g.id(m.vertex).to_string(),
        };
        serde_json::to_writer(&mut w, &line)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

/// Parses a trace against `g`. Line numbers in errors are 1-based; blank
/// lines are skipped.
pub fn read_trace<R: BufRead>(g: &Cdag, r: R) -> Result<Schedule, TraceError> {
    read_trace_lines(g, r).map(|(s, _)| s)
}

/// [`read_trace`], also returning the 1-based line of every move.
pub fn read_trace_lines<R: BufRead>(g: &Cdag, r: R) -> Result<(Schedule, Vec<usize>), TraceError> {
    let mut lines = r.lines().enumerate();
    let err = |line: usize, msg: String| TraceError::Parse { line, msg };
    let header: Header = match lines.next() {
        Some((_, l)) => serde_json::from_str(&l?).map_err(|e| err(1, e.to_string()))?,
        None => return Err(err(1, "empty trace".into())),
    };
    if header.schema != TRACE_SCHEMA {
        return Err(err(
            1,
            format!("expected schema `{TRACE_SCHEMA}`, found `{}`", header.schema),
        ));
    }
    let mut moves = Vec::new();
    let mut at = Vec::new();
    for (k, l) in lines {
        let l = l?;
        if l.trim().is_empty() {
            continue;
        }
        let line: Line = serde_json::from_str(&l).map_err(|e| err(k + 1, e.to_string()))?;
        let v = g.lookup_str(&line.v).map_err(|e| err(k + 1, e.to_string()))?;
        moves.push(Move {
            kind: line.op,
            vertex: v,
        });
        at.push(k + 1);
    }
    let s = Schedule {
        moves,
        declared_cache: header.cache,
    };
    Ok((s, at))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::build_strassen;

    #[test]
    fn roundtrip_and_line_numbers() {
        let (g, _) = build_strassen(1).unwrap();
        let (a, b, c) = (g.inputs()[0], g.inputs()[1], g.outputs()[0]);
        let s = Schedule {
            moves: vec![Move::load(a), Move::load(b), Move::compute(c), Move::store(c)],
            declared_cache: 3,
        };
        let mut buf = Vec::new();
        write_trace(&g, &s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with(r#"{"schema":"sched/1","cache":3}"#));
        assert!(text.contains(r#"{"op":"compute","v":"r/product"}"#));
        assert_eq!(read_trace(&g, text.as_bytes()).unwrap(), s);

        let bad = text.replace(r#""op":"compute""#, r#""op":"fly""#);
        match read_trace(&g, bad.as_bytes()) {
            Err(TraceError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let bad = text.replace("r/product", "r.9/product");
        assert!(matches!(
            read_trace(&g, bad.as_bytes()),
            Err(TraceError::Parse { line: 4, .. })
        ));

        let spaced = text.replacen('\n', "\n\n", 2);
        let (t, lines) = read_trace_lines(&g, spaced.as_bytes()).unwrap();
        assert_eq!(t, s);
        assert_eq!(lines, vec![3, 5, 6, 7]);
    }
}
