// Finite-difference gradient check of every variant at a tiny size.
//
// ```bash
// cargo run --release -p lcr-rot --example gradcheck
// ```

use lcr_rot::model::Variant;
use lcr_rot::training::{tiny_gradcheck, Regularization, GRADCHECK_TOLERANCE};

pub fn run() -> lcr_rot::Result<()> {
    let reg = Regularization { l2: 1e-5, include_biases: true };
    for variant in Variant::ALL {
        let report = tiny_gradcheck(variant, 1, reg)?;
        println!(
            "{:<20} entries={:<5} max_rel_err={:.3e} {}",
            variant.name(),
            report.entries_checked,
            report.max_relative_error,
            if report.passed() { "ok" } else { "FAIL" }
        );
        for (name, err) in &report.per_parameter {
            if *err > GRADCHECK_TOLERANCE / 100.0 {
                println!("    {name:<36} {err:.3e}");
            }
        }
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
