//! The ranking TSV written by `mine` and read back by `eval`.

use std::io::{self, BufRead, Write};

use seqlev::{ItemTable, ScoredPattern};

pub const HEADER: &str = "rank\tpattern\tcount\tsupport\texpected_support\tleverage";

const DIGITS: u32 = 6;

pub fn write_ranking<W: Write>(mut out: W, ranking: &[ScoredPattern], items: &ItemTable) -> io::Result<()> {
    writeln!(out, "{HEADER}")?;
    for (i, sp) in ranking.iter().enumerate() {
        let (expected, leverage) = match sp.expected_support {
            Some(e) => (e.to_fixed(DIGITS), sp.score.to_fixed(DIGITS)),
            None => (String::new(), String::new()),
        };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            i + 1,
            items.render(&sp.pattern),
            sp.count,
            sp.support.to_fixed(DIGITS),
            expected,
            leverage
        )?;
    }
    Ok(())
}

#[derive(Debug)]
pub enum ReadError {
    Io(io::Error),
    Malformed { line: usize, reason: String },
}

impl std::fmt::Display for ReadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReadError::Io(e) => write!(f, "{e}"),
            ReadError::Malformed { line, reason } => write!(f, "line {line}: {reason}"),
        }
    }
}

/// Parses a ranking, checking the header, column count, numeric columns and
/// that ranks run 1, 2, 3, …. Returns the patterns in rank order.
pub fn read_ranking<R: BufRead>(reader: R) -> Result<Vec<Vec<String>>, ReadError> {
    let bad = |line: usize, reason: &str| ReadError::Malformed {
        line,
        reason: reason.to_owned(),
    };
    let mut lines = reader.lines();
    match lines.next() {
        Some(Ok(h)) if h.trim_end_matches('\r') == HEADER => {}
        Some(Err(e)) => return Err(ReadError::Io(e)),
        _ => return Err(bad(1, "missing ranking header")),
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(ReadError::Io)?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 6 {
            return Err(bad(lineno, "expected 6 tab-separated columns"));
        }
        let rank: usize = cols[0].parse().map_err(|_| bad(lineno, "rank is not an integer"))?;
        if rank != rows.len() + 1 {
            return Err(bad(lineno, "ranks must be contiguous from 1"));
        }
        let pattern: Vec<String> = cols[1].split(' ').map(str::to_owned).collect();
        if pattern.iter().any(String::is_empty) {
            return Err(bad(lineno, "empty pattern token"));
        }
        cols[2]
            .parse::<u64>()
            .map_err(|_| bad(lineno, "count is not an integer"))?;
        for (col, name) in [(3, "support"), (4, "expected_support"), (5, "leverage")] {
            if (col == 3 || !cols[col].is_empty()) && cols[col].parse::<f64>().is_err() {
                return Err(bad(lineno, &format!("{name} is not a decimal")));
            }
        }
        rows.push(pattern);
    }
    Ok(rows)
}
