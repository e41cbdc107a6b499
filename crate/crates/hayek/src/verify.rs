//! Re-checks a trace file row by row.

use std::collections::HashMap;
use std::fmt;

use hayek_core::blockworld::Blockworld;
use hayek_core::economy::{Account, Transfer, TransferKind};
use hayek_core::woods::Woods;
use hayek_core::{parse_rule, AgentId, EnvKind, Task};

use crate::trace::{BidFlag, Instance, Row, TraceFile};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: usize,
    pub instance: u64,
    pub problem: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} (instance {}): {}", self.line, self.instance, self.problem)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub instances: usize,
    pub rows: usize,
    /// First problem found, in file order.
    pub violation: Option<Violation>,
}

impl Report {
    pub fn is_ok(&self) -> bool {
        self.violation.is_none()
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            None => write!(f, "OK: {} instances, {} rows", self.instances, self.rows),
            Some(v) => write!(f, "VIOLATION at {v}"),
        }
    }
}

/// Checks every row of `file`: the state parses, the rule matches the
/// observation of that state, the action is one of the task's actions and
/// takes the world to the next row's state (or the final state line), and
/// an agent's non-epsilon bids agree within an instance. With a ledger, the
/// auction payments of each instance must equal the bid column in order.
pub fn verify_trace(file: &TraceFile, ledger: Option<&[Transfer]>) -> Report {
    match file.env {
        EnvKind::Blockworld => verify_with(&Blockworld::default(), file, ledger),
        EnvKind::Woods => verify_with(&Woods::default(), file, ledger),
    }
}

fn payments_by_instance(ledger: &[Transfer]) -> HashMap<u64, Vec<&Transfer>> {
    let mut out: HashMap<u64, Vec<&Transfer>> = HashMap::new();
    for t in ledger.iter().filter(|t| t.kind == TransferKind::Payment) {
        out.entry(t.instance).or_default().push(t);
    }
    out
}

fn verify_with<T: Task>(task: &T, file: &TraceFile, ledger: Option<&[Transfer]>) -> Report {
    let payments = ledger.map(payments_by_instance);
    let mut rows = 0;
    for inst in &file.instances {
        rows += inst.rows.len();
        let paid = payments
            .as_ref()
            .map(|p| p.get(&inst.number).map(Vec::as_slice).unwrap_or(&[]));
        if let Err(problem) = check_instance(task, inst, paid) {
            return Report {
                instances: file.instances.len(),
                rows,
                violation: Some(problem),
            };
        }
    }
    Report {
        instances: file.instances.len(),
        rows,
        violation: None,
    }
}

/// Agent identity for bid consistency: the id when recorded, otherwise the
/// rule and action text.
fn bidder_key(row: &Row) -> String {
    match row.agent {
        Some(id) => format!("#{id}"),
        None => format!("{}\t{}", row.rule, row.action),
    }
}

fn check_instance<T: Task>(task: &T, inst: &Instance, paid: Option<&[&Transfer]>) -> Result<(), Violation> {
    let fail = |line: usize, problem: String| Violation {
        line,
        instance: inst.number,
        problem,
    };
    let mut expected: Option<String> = None;
    let mut bids: HashMap<String, f64> = HashMap::new();
    for (i, row) in inst.rows.iter().enumerate() {
        let mut state = task
            .parse_state(&row.state)
            .ok_or_else(|| fail(row.line, format!("state {:?} does not parse", row.state)))?;
        if let Some(want) = &expected {
            if *want != task.state_text(&state) {
                return Err(fail(row.line, format!("state {:?} does not follow, expected {want:?}", row.state)));
            }
        }
        let observation = task.observe(&state);
        let rule = parse_rule(&row.rule, task.alphabet())
            .map_err(|e| fail(row.line, format!("rule {:?} does not parse: {e}", row.rule)))?;
        if !rule.is_match(&observation) {
            return Err(fail(row.line, format!("rule {} does not match {observation}", row.rule)));
        }
        let action = task
            .parse_action(&row.action)
            .ok_or_else(|| fail(row.line, format!("unknown action {:?}", row.action)))?;

        if row.flag == BidFlag::Plain {
            let key = bidder_key(row);
            if let Some(&first) = bids.get(&key) {
                if first != row.bid {
                    return Err(fail(row.line, format!("bid {} differs from this agent's earlier bid {first}", row.bid)));
                }
            } else {
                bids.insert(key, row.bid);
            }
        }

        if let Some(paid) = paid {
            let Some(payment) = paid.get(i) else {
                return Err(fail(row.line, "no ledger payment for this auction".to_string()));
            };
            if payment.amount != row.bid {
                return Err(fail(row.line, format!("bid {} but the ledger records {}", row.bid, payment.amount)));
            }
            if let Some(id) = row.agent {
                if payment.from != Account::Agent(AgentId(id)) {
                    return Err(fail(row.line, format!("ledger payment comes from {}, not {id}", payment.from)));
                }
            }
            if i > 0 {
                if let Some(prev) = inst.rows[i - 1].agent {
                    if payment.to != Account::Agent(AgentId(prev)) {
                        return Err(fail(row.line, format!("ledger payment goes to {}, not the owner {prev}", payment.to)));
                    }
                }
            }
        }

        task.act(&mut state, action);
        expected = Some(task.state_text(&state));
    }
    if let Some(paid) = paid {
        if paid.len() > inst.rows.len() {
            return Err(fail(inst.final_line, format!("ledger has {} payments for {} auctions", paid.len(), inst.rows.len())));
        }
    }
    let final_state = task
        .parse_state(&inst.final_state)
        .ok_or_else(|| fail(inst.final_line, format!("final state {:?} does not parse", inst.final_state)))?;
    if let Some(want) = expected {
        if want != task.state_text(&final_state) {
            return Err(fail(inst.final_line, format!("final state {:?} does not follow, expected {want:?}", inst.final_state)));
        }
    }
    Ok(())
}
