// Majority baseline and a paired t-test over per-seed accuracies.
//
// ```bash
// cargo run -p lcr-rot --example significance
// ```

use lcr_rot::corpus::Sentiment;
use lcr_rot::eval::{majority_baseline, paired_t_test};

fn labels(pos: usize, neu: usize, neg: usize) -> Vec<Sentiment> {
    let mut v = vec![Sentiment::Positive; pos];
    v.extend(vec![Sentiment::Neutral; neu]);
    v.extend(vec![Sentiment::Negative; neg]);
    v
}

pub fn run() -> lcr_rot::Result<()> {
    // Class counts of the three public benchmark splits (train, test).
    let splits = [
        ("restaurant", labels(2164, 637, 807), labels(728, 196, 196)),
        ("laptop", labels(994, 464, 870), labels(341, 169, 128)),
        ("twitter", labels(1561, 3127, 1560), labels(173, 346, 173)),
    ];
    for (name, train, test) in &splits {
        let b = majority_baseline(train, test)?;
        println!("{name:<10} majority = {:<8} {:.2}%", b.label, 100.0 * b.accuracy);
    }

    let full = [0.812, 0.809, 0.815, 0.811, 0.808];
    let ablated = [0.801, 0.803, 0.806, 0.799, 0.804];
    println!("full vs ablated: {}", paired_t_test(&full, &ablated)?);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
