//! One line per acceptance criterion; exits nonzero if any fails.

use confcoh::acceptance;

fn main() {
    let mut failed = 0;
    for id in 1..=10 {
        let r = acceptance::run(id);
        println!("{r}");
        if !r.passed {
            failed += 1;
        }
    }
    println!("acceptance: {} passed, {failed} failed", 10 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
