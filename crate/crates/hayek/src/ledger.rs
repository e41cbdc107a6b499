//! Ledger files: one money transfer per line,
//! `instance from to amount kind`, tab-separated. Accounts are `source`,
//! `sink` or an agent id.

use std::io::{self, Write};

use hayek_core::economy::{Account, Transfer, TransferKind};
use hayek_core::AgentId;

use crate::trace::MalformedTrace;

pub const HEADER: &str = "# instance\tfrom\tto\tamount\tkind";

pub fn write_header<W: Write + ?Sized>(out: &mut W) -> io::Result<()> {
    writeln!(out, "{HEADER}")
}

pub fn write_transfers<W: Write + ?Sized>(out: &mut W, transfers: &[Transfer]) -> io::Result<()> {
    for t in transfers {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", t.instance, t.from, t.to, t.amount, t.kind)?;
    }
    Ok(())
}

fn parse_account(text: &str) -> Option<Account> {
    match text {
        "source" => Some(Account::Source),
        "sink" => Some(Account::Sink),
        id => id.parse().ok().map(|n| Account::Agent(AgentId(n))),
    }
}

pub fn parse_ledger(text: &str) -> Result<Vec<Transfer>, MalformedTrace> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.trim();
        if body.is_empty() || body.starts_with('#') {
            continue;
        }
        let bad = |reason: &str| MalformedTrace {
            line,
            reason: format!("ledger: {reason}"),
        };
        let cols: Vec<&str> = body.split('\t').collect();
        let [instance, from, to, amount, kind] = cols[..] else {
            return Err(bad("expected 5 columns"));
        };
        out.push(Transfer {
            instance: instance.parse().map_err(|_| bad("bad instance"))?,
            from: parse_account(from).ok_or_else(|| bad("bad account"))?,
            to: parse_account(to).ok_or_else(|| bad("bad account"))?,
            amount: amount.parse().map_err(|_| bad("bad amount"))?,
            kind: TransferKind::parse(kind).ok_or_else(|| bad("bad kind"))?,
        });
    }
    Ok(out)
}
