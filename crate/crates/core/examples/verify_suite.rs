//! Run one property suite and print its JSON report.
//!
//! `cargo run --example verify_suite -- holder 2 7 40`

use hsk::verify::{run_suite, SuiteConfig};

fn main() -> hsk::Result<()> {
    let mut args = std::env::args().skip(1);
    let suite = args.next().unwrap_or_else(|| "power_identity".into());
    let dim: usize = args.next().map_or(Ok(1), |s| s.parse()).expect("dimension");
    let seed: u64 = args.next().map_or(Ok(7), |s| s.parse()).expect("seed");
    let trials: usize = args.next().map_or(Ok(20), |s| s.parse()).expect("trial count");

    let cfg = SuiteConfig::default_for(dim)?;
    let report = run_suite(&suite, &cfg, &cfg.default_family(seed, trials))?;
    print!("{}", report.to_json());
    eprintln!("{}: {}", suite, if report.passed() { "pass" } else { "FAIL" });
    Ok(())
}
