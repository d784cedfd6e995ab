// Tokenize a sentence and split it around each target.
//
// ```bash
// cargo run -p lcr-rot --example segmentation
// ```

use lcr_rot::corpus::{split_sentence, tokenize, CorpusRecord, Sentiment, PLACEHOLDER};

pub fn run() -> lcr_rot::Result<()> {
    let sentence = "I am pleased with the life of battery, but the windows 8 operating system is so bad.";
    println!("tokens: {:?}", tokenize(sentence));
    for (target, label) in [("the life of battery", Sentiment::Positive), ("windows 8 operating system", Sentiment::Negative)] {
        let record = CorpusRecord {
            sentence: sentence.replacen(target, PLACEHOLDER, 1),
            target: target.to_string(),
            label,
        };
        let ex = split_sentence(&record)?;
        println!("\ntarget  {:?} ({label})", ex.target.join(" "));
        println!("left    {:?}", ex.left.join(" "));
        println!("right   {:?}", ex.right.join(" "));
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("{e}");
        std::process::exit(1);
    }
}
