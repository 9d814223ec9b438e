//! Text file formats: raw event logs, prepared session files and
//! vocabulary tables.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::data::{ItemId, RawEvent, Vocabulary};
use crate::error::{Error, Result};

/// Parses `user \t item \t timestamp` lines. Blank lines are ignored.
pub fn parse_events(text: &str, path: &Path) -> Result<Vec<RawEvent>> {
    let mut events = Vec::new();
    for (n, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Parse {
            path: path.to_path_buf(),
            line: n + 1,
            msg,
        };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(bad(format!(
                "expected 3 tab-separated fields, found {}",
                fields.len()
            )));
        }
        let timestamp = fields[2]
            .trim()
            .parse::<i64>()
            .map_err(|e| bad(format!("bad timestamp `{}`: {e}", fields[2])))?;
        events.push(RawEvent {
            user: fields[0].to_string(),
            item: fields[1].to_string(),
            timestamp,
        });
    }
    Ok(events)
}

pub fn read_events(path: &Path) -> Result<Vec<RawEvent>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_events(&text, path)
}

pub fn format_sessions(rows: &[Vec<ItemId>], k: usize, vocab_size: usize) -> String {
    let mut out = format!("#k={k} V={vocab_size}\n");
    for row in rows {
        for (i, id) in row.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            write!(out, "{id}").unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn write_sessions(path: &Path, rows: &[Vec<ItemId>], k: usize, vocab_size: usize) -> Result<()> {
    fs::write(path, format_sessions(rows, k, vocab_size)).map_err(|e| Error::io(path, e))
}

/// Session rows plus the `(k, V)` header of a prepared sessions file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SessionsFile {
    pub k: usize,
    pub vocab_size: usize,
    pub rows: Vec<Vec<ItemId>>,
}

pub fn parse_sessions(text: &str, path: &Path) -> Result<SessionsFile> {
    let bad = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad(1, "missing `#k=<k> V=<V>` header".into()))?;
    let (mut k, mut v) = (None, None);
    for field in header.trim_start_matches('#').split_whitespace() {
        match field.split_once('=') {
            Some(("k", x)) => k = x.parse::<usize>().ok(),
            Some(("V", x)) => v = x.parse::<usize>().ok(),
            _ => return Err(bad(1, format!("unexpected header field `{field}`"))),
        }
    }
    let (Some(k), Some(vocab_size)) = (k, v) else {
        return Err(bad(1, format!("malformed header `{header}`")));
    };
    let mut rows = Vec::new();
    for (n, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| tok.parse::<ItemId>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(n + 2, e.to_string()))?;
        if row.len() != k {
            return Err(bad(n + 2, format!("row has {} ids, header says k={k}", row.len())));
        }
        if let Some(&id) = row.iter().find(|&&id| id as usize > vocab_size) {
            return Err(bad(n + 2, format!("id {id} exceeds V={vocab_size}")));
        }
        let pad = row.iter().take_while(|&&x| x == 0).count();
        if row[pad..].contains(&0) {
            return Err(bad(n + 2, "padding must be a contiguous prefix".into()));
        }
        rows.push(row);
    }
    Ok(SessionsFile {
        k,
        vocab_size,
        rows,
    })
}

pub fn read_sessions(path: &Path) -> Result<SessionsFile> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sessions(&text, path)
}

/// `index \t item` per line, indices starting at 1.
pub fn write_vocabulary(path: &Path, vocab: &Vocabulary) -> Result<()> {
    let mut out = String::new();
    for (i, item) in vocab.items().enumerate() {
        writeln!(out, "{}\t{item}", i + 1).unwrap();
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn read_vocabulary(path: &Path) -> Result<Vocabulary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut items = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let Some((ix, item)) = line.split_once('\t') else {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg: "expected `index<TAB>item`".into(),
            });
        };
        if ix.parse::<usize>().ok() != Some(n + 1) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: n + 1,
                msg: format!("expected index {}, found `{ix}`", n + 1),
            });
        }
        items.push(item.to_string());
    }
    Vocabulary::from_items(items)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_events() {
        let ev = parse_events("u1\ta\t10\n\nu2\tb\t-3\n", Path::new("x")).unwrap();
        assert_eq!(ev.len(), 2);
        assert_eq!(ev[1].timestamp, -3);
        let err = parse_events("u1\ta\n", Path::new("x")).unwrap_err();
        assert!(err.to_string().contains("x:1"));
    }

    #[test]
    fn sessions_header_and_rows() {
        let rows = vec![vec![0, 2, 1], vec![3, 1, 2]];
        let text = format_sessions(&rows, 3, 3);
        assert!(text.starts_with("#k=3 V=3\n0 2 1\n"));
        let f = parse_sessions(&text, Path::new("s")).unwrap();
        assert_eq!(f.rows, rows);
        assert_eq!((f.k, f.vocab_size), (3, 3));
    }

    #[test]
    fn sessions_reject_bad_rows() {
        let p = Path::new("s");
        assert!(parse_sessions("#k=3 V=3\n1 2\n", p).is_err());
        assert!(parse_sessions("#k=3 V=3\n1 0 2\n", p).is_err());
        assert!(parse_sessions("#k=3 V=3\n1 4 2\n", p).is_err());
        assert!(parse_sessions("", p).is_err());
    }
}
