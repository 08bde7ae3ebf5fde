//! One PASS/FAIL line per acceptance criterion. Exits non-zero on any failure
//! other than a documented threshold miss, which is still printed as FAIL.

use singer_core::acceptance;

fn main() {
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
    let only: Vec<u8> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let results = match acceptance::run(workers, None, &only) {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL acceptance suite could not start: {e}");
            std::process::exit(1);
        }
    };
    for r in &results {
        println!("{}", r.line());
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    let documented = results.iter().filter(|r| r.documented_miss).count();
    println!(
        "{} of {} criteria passed; {documented} documented threshold miss(es)",
        results.len() - failed,
        results.len()
    );
    if failed > documented {
        std::process::exit(1);
    }
}
