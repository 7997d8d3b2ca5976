//! Runs every built-in reproduction case end to end and requires all of them
//! to pass, printing one line per case.

use hopcycles::golden::{builtin_cases, run_all};

#[test]
fn all_builtin_cases_pass() {
    let cases = builtin_cases().unwrap();
    let outcomes = run_all(&cases);
    let mut all_pass = true;
    for outcome in &outcomes {
        match outcome {
            Ok(o) if o.passed => println!("PASS {}", o.name),
            Ok(o) => {
                all_pass = false;
                println!("FAIL {}: {:?}", o.name, o.failures);
            }
            Err(e) => {
                all_pass = false;
                println!("FAIL (error): {e}");
            }
        }
    }
    assert!(all_pass, "one or more reproduction cases failed");
}
