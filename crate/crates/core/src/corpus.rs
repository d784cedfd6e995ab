//! Corpus parsing, left/target/right segmentation, and dataset statistics.
//!
//! The corpus format is three lines per record:
//!
//! ```text
//! i am pleased with $T$ , but the windows 8 operating system is so bad .
//! the life of battery
//! 1
//! ```
//!
//! The first line holds exactly one `$T$` placeholder, the second the target
//! phrase, the third the label (`-1`, `0` or `1`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PLACEHOLDER: &str = "$T$";

/// Sentiment polarity. The discriminant is the class index used by the
/// classifier, so ties in argmax resolve toward `Negative`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Negative = 0,
    Neutral = 1,
    Positive = 2,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Negative, Sentiment::Neutral, Sentiment::Positive];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Maps the corpus label `-1`, `0`, `1`.
    pub fn from_polarity(label: &str) -> Option<Self> {
        match label.trim() {
            "-1" => Some(Sentiment::Negative),
            "0" => Some(Sentiment::Neutral),
            "1" => Some(Sentiment::Positive),
            _ => None,
        }
    }

    pub fn polarity(self) -> i8 {
        self as i8 - 1
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
            Sentiment::Positive => "positive",
        })
    }
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(c, '\u{2000}'..='\u{206F}' | '\u{3000}'..='\u{303F}' | '¡' | '¿' | '«' | '»' | '·')
}

/// Lowercases, splits on whitespace, and emits each punctuation character as
/// its own token.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for c in text.chars() {
        if c.is_whitespace() {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
        } else if is_punctuation(c) {
            if !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            tokens.push(c.to_lowercase().collect());
        } else {
            current.extend(c.to_lowercase());
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// One raw record of the corpus file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRecord {
    pub sentence: String,
    pub target: String,
    pub label: Sentiment,
}

impl CorpusRecord {
    /// The sentence with the placeholder replaced by the target.
    pub fn full_sentence(&self) -> String {
        self.sentence.replacen(PLACEHOLDER, &self.target, 1)
    }
}

/// Parses the three-line record format. Errors carry the zero-based record
/// index.
pub fn parse_corpus(source: &str) -> Result<Vec<CorpusRecord>> {
    let lines: Vec<&str> = source.lines().collect();
    if !lines.len().is_multiple_of(3) {
        return Err(Error::Record {
            record: lines.len() / 3,
            message: format!("incomplete record: {} lines is not a multiple of 3", lines.len()),
        });
    }
    lines
        .chunks(3)
        .enumerate()
        .map(|(record, chunk)| {
            let sentence = chunk[0];
            let placeholders = sentence.matches(PLACEHOLDER).count();
            if placeholders != 1 {
                return Err(Error::Record {
                    record,
                    message: format!("expected exactly one {PLACEHOLDER} placeholder, found {placeholders}"),
                });
            }
            let label = Sentiment::from_polarity(chunk[2]).ok_or_else(|| Error::Record {
                record,
                message: format!("label {:?} is not one of -1, 0, 1", chunk[2]),
            })?;
            Ok(CorpusRecord {
                sentence: sentence.to_string(),
                target: chunk[1].trim().to_string(),
                label,
            })
        })
        .collect()
}

/// A tokenized (left context, target phrase, right context) triple.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    pub left: Vec<String>,
    pub target: Vec<String>,
    pub right: Vec<String>,
    pub label: Sentiment,
}

impl Example {
    pub fn new(left: Vec<String>, target: Vec<String>, right: Vec<String>, label: Sentiment) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::Domain("target phrase must contain at least one token".into()));
        }
        Ok(Example {
            left,
            target,
            right,
            label,
        })
    }

    /// Total sentence length `L + M + R`.
    pub fn len(&self) -> usize {
        self.left.len() + self.target.len() + self.right.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tokens(&self) -> impl Iterator<Item = &String> {
        self.left.iter().chain(&self.target).chain(&self.right)
    }
}

pub fn split_sentence(record: &CorpusRecord) -> Result<Example> {
    let (before, after) = record
        .sentence
        .split_once(PLACEHOLDER)
        .ok_or_else(|| Error::Domain(format!("sentence lacks {PLACEHOLDER}: {:?}", record.sentence)))?;
    let target = tokenize(&record.target);
    if target.is_empty() {
        return Err(Error::Domain(format!("target {:?} has no tokens", record.target)));
    }
    Example::new(tokenize(before), target, tokenize(after), record.label)
}

/// Parses and splits a whole corpus.
pub fn load_examples(source: &str) -> Result<Vec<Example>> {
    parse_corpus(source)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            split_sentence(r).map_err(|e| Error::Record {
                record: i,
                message: e.to_string(),
            })
        })
        .collect()
}

/// Class counts and target-length buckets (`M = 1`, `M = 2`, `M > 2`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub class_counts: [usize; 3],
    pub target_length_counts: [usize; 3],
}

impl CorpusStats {
    pub fn total(&self) -> usize {
        self.class_counts.iter().sum()
    }

    pub fn count(&self, label: Sentiment) -> usize {
        self.class_counts[label.index()]
    }

    /// Bucket percentages, rounded to one decimal.
    pub fn target_length_percentages(&self) -> [f64; 3] {
        let total = self.total() as f64;
        self.target_length_counts
            .map(|c| (1000.0 * c as f64 / total).round() / 10.0)
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "examples\t{}", self.total())?;
        writeln!(f, "Pos.(#)\tNeu.(#)\tNeg.(#)")?;
        writeln!(
            f,
            "{}\t{}\t{}",
            self.count(Sentiment::Positive),
            self.count(Sentiment::Neutral),
            self.count(Sentiment::Negative)
        )?;
        let pct = self.target_length_percentages();
        writeln!(f, "target length\tM=1\tM=2\tM>2")?;
        writeln!(
            f,
            "count/percent\t{}/{:.1}%\t{}/{:.1}%\t{}/{:.1}%",
            self.target_length_counts[0], pct[0], self.target_length_counts[1], pct[1], self.target_length_counts[2], pct[2]
        )
    }
}

pub fn corpus_stats(examples: &[Example]) -> Result<CorpusStats> {
    if examples.is_empty() {
        return Err(Error::Domain("statistics of an empty corpus".into()));
    }
    let mut stats = CorpusStats {
        class_counts: [0; 3],
        target_length_counts: [0; 3],
    };
    for ex in examples {
        stats.class_counts[ex.label.index()] += 1;
        let bucket = ex.target.len().min(3) - 1;
        stats.target_length_counts[bucket] += 1;
    }
    Ok(stats)
}
