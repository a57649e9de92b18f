mod common;

use std::time::Duration;

use wordsolve::graph::{solve, SearchConfig, Verdict};
use wordsolve::oracle::{brute_force, OracleResult};

fn config() -> SearchConfig {
    SearchConfig { timeout: Some(Duration::from_secs(2)), max_nodes: 20_000, ..SearchConfig::default() }
}

#[test]
fn solver_agrees_with_bounded_oracle() {
    let mut r = common::rng(std::env::var("SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(7));
    let mut bad = Vec::new();
    let (mut sat, mut unsat, mut unknown) = (0, 0, 0);
    for _ in 0..1500 {
        let (v, eqs) = common::random_system(&mut r, 2, 3, &['a', 'b'], 4);
        let text = common::show(&v, &eqs);
        let out = solve(&eqs, v, &config());
        match &out.verdict {
            Verdict::Sat(m) => {
                sat += 1;
                if !m.satisfies_all(&eqs, 'a') {
                    bad.push(format!("bad model: {text}"));
                }
            }
            Verdict::Unsat => {
                unsat += 1;
                if let OracleResult::Sat(_) = brute_force(&eqs, 4, &['a', 'b']) {
                    bad.push(format!("wrong unsat: {text}"));
                }
            }
            Verdict::Unknown(_) => unknown += 1,
        }
    }
    eprintln!("sat {sat} unsat {unsat} unknown {unknown}");
    assert!(bad.is_empty(), "{bad:#?}");
}
