use hayek::ledger::parse_ledger;
use hayek::runner::run_one;
use hayek::trace::parse_trace;
use hayek::verify::verify_trace;
use hayek_core::{EnvKind, RunConfig};

const CLASSIC: &str = include_str!("fixtures/classic_height_four.trace");

fn produce(config: &RunConfig) -> (String, String) {
    let (mut trace, mut ledger) = (Vec::new(), Vec::new());
    run_one(config, Some(&mut trace), Some(&mut ledger)).unwrap();
    (String::from_utf8(trace).unwrap(), String::from_utf8(ledger).unwrap())
}

fn woods_run() -> (String, String) {
    let mut config = RunConfig::new(EnvKind::Woods);
    config.seed = 5;
    config.instances = 300;
    produce(&config)
}

fn blockworld_run() -> (String, String) {
    let mut config = RunConfig::new(EnvKind::Blockworld);
    config.seed = 5;
    config.instances = 200;
    produce(&config)
}

#[test]
fn hand_transcribed_classic_solution_verifies() {
    let file = parse_trace(CLASSIC).unwrap();
    assert_eq!(file.instances.len(), 1);
    assert_eq!(file.instances[0].rows.len(), 11);
    let report = verify_trace(&file, None);
    assert!(report.is_ok(), "{report}");
}

#[test]
fn self_produced_traces_verify_against_their_ledgers() {
    for (trace, ledger) in [woods_run(), blockworld_run()] {
        let file = parse_trace(&trace).unwrap();
        let transfers = parse_ledger(&ledger).unwrap();
        let report = verify_trace(&file, Some(&transfers));
        assert!(report.is_ok(), "{report}");
        assert!(report.rows > 0);
    }
}

#[test]
fn hardwired_replay_trace_verifies() {
    let mut config = RunConfig::hardwired_replay(EnvKind::Blockworld);
    config.instances = 300;
    let (trace, ledger) = produce(&config);
    let report = verify_trace(&parse_trace(&trace).unwrap(), Some(&parse_ledger(&ledger).unwrap()));
    assert!(report.is_ok(), "{report}");
}

#[test]
fn same_seed_same_files() {
    assert_eq!(woods_run(), woods_run());
}

/// Replaces column `col` of the `n`-th trace row (counting from 0).
fn tamper(trace: &str, n: usize, col: usize, value: &str) -> (String, usize) {
    let mut seen = 0;
    let mut hit = 0;
    let lines: Vec<String> = trace
        .lines()
        .enumerate()
        .map(|(i, line)| {
            if line.contains('\t') {
                seen += 1;
                if seen == n + 1 {
                    hit = i + 1;
                    let mut cols: Vec<&str> = line.split('\t').collect();
                    cols[col] = value;
                    return cols.join("\t");
                }
            }
            line.to_string()
        })
        .collect();
    (lines.join("\n") + "\n", hit)
}

#[test]
fn tampered_bid_is_reported_at_its_row() {
    let (text, line) = tamper(CLASSIC, 1, 3, "7.80");
    let report = verify_trace(&parse_trace(&text).unwrap(), None);
    let v = report.violation.expect("tampered bid");
    assert_eq!(v.line, line);
    assert!(v.problem.contains("bid"), "{}", v.problem);

    let (trace, ledger) = blockworld_run();
    let transfers = parse_ledger(&ledger).unwrap();
    let (text, line) = tamper(&trace, 40, 3, "3.5");
    let v = verify_trace(&parse_trace(&text).unwrap(), Some(&transfers)).violation.expect("tampered bid");
    assert_eq!(v.line, line);
}

#[test]
fn tampered_rule_action_and_state_are_reported() {
    // Stack 2 is empty, so a rule that needs a block there cannot match.
    let (text, line) = tamper(CLASSIC, 3, 1, "*.*:1:*2:*");
    let v = verify_trace(&parse_trace(&text).unwrap(), None).violation.unwrap();
    assert_eq!(v.line, line);

    let (text, line) = tamper(CLASSIC, 0, 1, "*:*:*:b");
    let v = verify_trace(&parse_trace(&text).unwrap(), None).violation.unwrap();
    assert_eq!(v.line, line);
    assert!(v.problem.contains("does not match"));

    // Moving 1->2 instead of 1->3 leaves the next row unexplained.
    let (text, line) = tamper(CLASSIC, 0, 2, "1->2");
    let v = verify_trace(&parse_trace(&text).unwrap(), None).violation.unwrap();
    assert_eq!(v.line, line + 1);

    let (text, _) = tamper(CLASSIC, 0, 2, "1->1");
    assert!(verify_trace(&parse_trace(&text).unwrap(), None).violation.is_some());

    let text = CLASSIC.replace("babc:babc::", "babc:bab:c:");
    let v = verify_trace(&parse_trace(&text).unwrap(), None).violation.unwrap();
    assert!(v.problem.contains("final state"));
}

#[test]
fn ledger_payment_order_is_checked() {
    let (trace, ledger) = woods_run();
    let mut transfers = parse_ledger(&ledger).unwrap();
    let k = transfers.iter().position(|t| t.kind == hayek_core::economy::TransferKind::Payment).unwrap();
    transfers[k].amount += 1e-9;
    let report = verify_trace(&parse_trace(&trace).unwrap(), Some(&transfers));
    assert!(report.violation.is_some());
}
