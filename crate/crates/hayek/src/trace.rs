//! Trace files.
//!
//! ```text
//! # env blockworld
//! # instance 1 level 4
//! babc:cbb::a  *:*:*:*  1->3  7.78  993.1  0  -
//! ...
//! babc:babc::
//! ```
//!
//! (columns are tab-separated). Each instance starts with a `# instance N level L` header. Rows are
//! tab-separated `state rule action bid wealth agent flag`; `wealth` and
//! `agent` may be `-` (hand transcriptions), `flag` is `new` for an epsilon
//! bid, `cap` for a bid cut down to the bidder's wealth and `-` otherwise.
//! The last line of an instance holds only the final state. Bids are written
//! at full precision.

use std::io::{self, BufRead, Write};

use hayek_core::engine::{Trace, TraceRow};
use hayek_core::EnvKind;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
#[error("malformed trace at line {line}: {reason}")]
pub struct MalformedTrace {
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Error)]
pub enum ReadError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Malformed(#[from] MalformedTrace),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BidFlag {
    Plain,
    New,
    Capped,
}

impl BidFlag {
    fn of(row: &TraceRow) -> Self {
        if row.new_bid {
            BidFlag::New
        } else if row.capped {
            BidFlag::Capped
        } else {
            BidFlag::Plain
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            BidFlag::Plain => "-",
            BidFlag::New => "new",
            BidFlag::Capped => "cap",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    /// 1-based line in the file.
    pub line: usize,
    pub state: String,
    pub rule: String,
    pub action: String,
    pub bid: f64,
    pub wealth: Option<f64>,
    pub agent: Option<u64>,
    pub flag: BidFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub number: u64,
    pub level: usize,
    /// Line of the header.
    pub line: usize,
    pub rows: Vec<Row>,
    pub final_state: String,
    pub final_line: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub env: EnvKind,
    pub instances: Vec<Instance>,
}

pub fn write_header<W: Write + ?Sized>(out: &mut W, env: EnvKind) -> io::Result<()> {
    writeln!(out, "# env {env}")
}

pub fn write_instance<W: Write + ?Sized>(out: &mut W, number: u64, level: usize, trace: &Trace) -> io::Result<()> {
    writeln!(out, "# instance {number} level {level}")?;
    for row in &trace.rows {
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            row.state,
            row.rule,
            row.action,
            row.price,
            row.wealth,
            row.agent,
            BidFlag::of(row).as_str()
        )?;
    }
    writeln!(out, "{}", trace.final_state)
}

fn malformed(line: usize, reason: impl Into<String>) -> MalformedTrace {
    MalformedTrace {
        line,
        reason: reason.into(),
    }
}

fn optional<T: std::str::FromStr>(text: &str, what: &str, line: usize) -> Result<Option<T>, MalformedTrace> {
    if text == "-" {
        return Ok(None);
    }
    text.parse()
        .map(Some)
        .map_err(|_| malformed(line, format!("bad {what} {text:?}")))
}

fn parse_row(text: &str, line: usize) -> Result<Row, MalformedTrace> {
    let cols: Vec<&str> = text.split('\t').map(str::trim).collect();
    if !(4..=7).contains(&cols.len()) {
        return Err(malformed(line, format!("expected 4 to 7 columns, found {}", cols.len())));
    }
    let bid: f64 = cols[3]
        .parse()
        .map_err(|_| malformed(line, format!("bad bid {:?}", cols[3])))?;
    if !bid.is_finite() || bid < 0.0 {
        return Err(malformed(line, format!("bad bid {:?}", cols[3])));
    }
    let col = |i: usize| cols.get(i).copied().unwrap_or("-");
    let flag = match col(6) {
        "-" => BidFlag::Plain,
        "new" => BidFlag::New,
        "cap" => BidFlag::Capped,
        other => return Err(malformed(line, format!("bad flag {other:?}"))),
    };
    Ok(Row {
        line,
        state: cols[0].to_string(),
        rule: cols[1].to_string(),
        action: cols[2].to_string(),
        bid,
        wealth: optional(col(4), "wealth", line)?,
        agent: optional(col(5), "agent", line)?,
        flag,
    })
}

/// Parses a whole trace file.
pub fn parse_trace(text: &str) -> Result<TraceFile, MalformedTrace> {
    let mut env = None;
    let mut instances: Vec<Instance> = Vec::new();
    let mut open: Option<Instance> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim_end_matches('\r');
        if body.trim().is_empty() {
            continue;
        }
        if let Some(comment) = body.strip_prefix('#') {
            let words: Vec<&str> = comment.split_whitespace().collect();
            match words.as_slice() {
                ["env", name] => {
                    let kind = name
                        .parse::<EnvKind>()
                        .map_err(|_| malformed(line, format!("unknown environment {name:?}")))?;
                    env = Some(kind);
                }
                ["instance", n, "level", l] => {
                    if let Some(unfinished) = open.take() {
                        return Err(malformed(unfinished.line, "instance has no final state line"));
                    }
                    let number = n.parse().map_err(|_| malformed(line, "bad instance number"))?;
                    let level = l.parse().map_err(|_| malformed(line, "bad level"))?;
                    open = Some(Instance {
                        number,
                        level,
                        line,
                        rows: Vec::new(),
                        final_state: String::new(),
                        final_line: 0,
                    });
                }
                _ => {}
            }
            continue;
        }
        let Some(inst) = open.as_mut() else {
            return Err(malformed(line, "row outside an instance"));
        };
        if body.contains('\t') {
            inst.rows.push(parse_row(body, line)?);
        } else {
            inst.final_state = body.trim().to_string();
            inst.final_line = line;
            instances.push(open.take().expect("open instance"));
        }
    }
    if let Some(unfinished) = open {
        return Err(malformed(unfinished.line, "instance has no final state line"));
    }
    let env = env.ok_or_else(|| malformed(1, "missing `# env` header"))?;
    Ok(TraceFile { env, instances })
}

pub fn read_trace<R: BufRead>(mut input: R) -> Result<TraceFile, ReadError> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    Ok(parse_trace(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_hand_transcription() {
        let text = "# env blockworld\n# instance 1 level 1\na:::a\t*:*:*:*\t3->1\t7.78\n\na:a::\n";
        let file = parse_trace(text).unwrap();
        assert_eq!(file.env, EnvKind::Blockworld);
        let inst = &file.instances[0];
        assert_eq!(inst.rows[0].bid, 7.78);
        assert_eq!((inst.rows[0].wealth, inst.rows[0].agent), (None, None));
        assert_eq!((inst.final_state.as_str(), inst.final_line), ("a:a::", 5));
    }

    #[test]
    fn rejects_broken_files() {
        let cases = [
            ("# instance 1 level 1\na:::a\n", 1),
            ("# env blockworld\na:::a\n", 2),
            ("# env blockworld\n# instance 1 level 1\na:::a\t*\t3->1\tcheap\na:a::\n", 3),
            ("# env blockworld\n# instance 1 level 1\na:::a\t*\t3->1\t1\n", 2),
            ("# env mars\n", 1),
        ];
        for (text, line) in cases {
            assert_eq!(parse_trace(text).unwrap_err().line, line, "{text:?}");
        }
    }
}
