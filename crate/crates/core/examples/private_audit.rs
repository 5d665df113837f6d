//! Two banks show that the net of their eight transactions reaches a
//! threshold, once with local range proofs plus a small joint proof and once
//! as a single joint proof.

use colcp::cli::{run_audit, AuditMode, AuditScenario};

fn main() {
    let scenario = AuditScenario::generate(2, 8, None, 5).expect("valid scenario");
    println!(
        "net = {}, threshold = {}",
        scenario.net(),
        scenario.threshold
    );
    for mode in [AuditMode::Composed, AuditMode::Monolithic] {
        match run_audit(&scenario, mode, 5) {
            Ok(report) => println!("{}", report.summary()),
            Err(e) => println!("{}: {e}", mode.as_str()),
        }
    }
    let mut too_high = scenario.clone();
    too_high.threshold = (scenario.net() + 1) as i64;
    println!(
        "{:?}",
        run_audit(&too_high, AuditMode::Composed, 5)
            .err()
            .map(|e| e.to_string())
    );
}
