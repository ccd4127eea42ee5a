//! Acceptance suite: runs every criterion of the golden-constant check and
//! prints one PASS/FAIL line each. Exits nonzero if any criterion fails.

use magnus_umq::verify;

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    let mut ran = 0;
    for (id, run) in verify::criteria() {
        if !filter.is_empty() && !filter.iter().any(|f| f == &id.to_string()) {
            continue;
        }
        let r = run();
        println!("acceptance {r}");
        ran += 1;
        if !r.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} of {ran} criteria passed", ran - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
