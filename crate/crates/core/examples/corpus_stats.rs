// Class counts and target-length buckets of a corpus file.
//
// ```bash
// cargo run -p lcr-rot --example corpus_stats [-- path/to/corpus.txt]
// ```

use lcr_rot::corpus::{corpus_stats, load_examples};

pub fn run() -> lcr_rot::Result<()> {
    let path = std::env::args()
        .nth(1)
        .filter(|a| !a.starts_with('-'))
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/synthetic_train.txt").into());
    let examples = load_examples(&std::fs::read_to_string(&path)?)?;
    print!("{}", corpus_stats(&examples)?);
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
