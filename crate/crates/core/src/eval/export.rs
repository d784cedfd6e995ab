//! Attention-weight export as JSON or a self-contained HTML page.
//!
//! Context tokens are shaded blue and target tokens red, with opacity
//! proportional to the weight relative to the largest weight in the same
//! vector.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::predict_label;
use crate::corpus::{Example, Sentiment};
use crate::error::{Error, Result};
use crate::model::{AttentionRecord, EmbeddedExample, Model};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Html,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "html" => Ok(ExportFormat::Html),
            other => Err(Error::Usage(format!("unknown export format {other:?} (expected json or html)"))),
        }
    }
}

impl ExportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ExportFormat::Json => "json",
            ExportFormat::Html => "html",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportTokens {
    pub left: Vec<String>,
    pub target: Vec<String>,
    pub right: Vec<String>,
}

/// Weight vectors; `None` for those the variant does not compute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportWeights {
    pub alpha_l: Option<Vec<f64>>,
    pub alpha_r: Option<Vec<f64>>,
    pub alpha_tl: Option<Vec<f64>>,
    pub alpha_tr: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionExport {
    pub tokens: ExportTokens,
    pub weights: ExportWeights,
    pub predicted: Sentiment,
    pub gold: Sentiment,
}

impl AttentionExport {
    pub fn new(example: &Example, record: &AttentionRecord, predicted: Sentiment) -> Result<Self> {
        let check = |alpha: &Option<Vec<f64>>, tokens: &[String], what: &str| -> Result<()> {
            match alpha {
                Some(a) if a.len() != tokens.len() => Err(Error::Domain(format!(
                    "{what}: {} weights for {} tokens",
                    a.len(),
                    tokens.len()
                ))),
                _ => Ok(()),
            }
        };
        check(&record.alpha_left, &example.left, "left context")?;
        check(&record.alpha_right, &example.right, "right context")?;
        check(&record.alpha_target_left, &example.target, "left-aware target")?;
        check(&record.alpha_target_right, &example.target, "right-aware target")?;
        Ok(AttentionExport {
            tokens: ExportTokens {
                left: example.left.clone(),
                target: example.target.clone(),
                right: example.right.clone(),
            },
            weights: ExportWeights {
                alpha_l: record.alpha_left.clone(),
                alpha_r: record.alpha_right.clone(),
                alpha_tl: record.alpha_target_left.clone(),
                alpha_tr: record.alpha_target_right.clone(),
            },
            predicted,
            gold: example.label,
        })
    }

    /// JSON with every weight written to 17 significant digits.
    pub fn to_json(&self) -> String {
        let strings = |v: &[String]| serde_json::to_string(v).expect("string array");
        let weights = |v: &Option<Vec<f64>>| match v {
            None => "null".to_string(),
            Some(w) => format!("[{}]", w.iter().map(|&x| number(x)).collect::<Vec<_>>().join(",")),
        };
        format!(
            "{{\n  \"tokens\": {{\"left\": {}, \"target\": {}, \"right\": {}}},\n  \
             \"weights\": {{\"alpha_l\": {}, \"alpha_r\": {}, \"alpha_tl\": {}, \"alpha_tr\": {}}},\n  \
             \"predicted\": \"{}\",\n  \"gold\": \"{}\"\n}}\n",
            strings(&self.tokens.left),
            strings(&self.tokens.target),
            strings(&self.tokens.right),
            weights(&self.weights.alpha_l),
            weights(&self.weights.alpha_r),
            weights(&self.weights.alpha_tl),
            weights(&self.weights.alpha_tr),
            self.predicted,
            self.gold,
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Format {
            line: e.line(),
            message: e.to_string(),
        })
    }

    /// A standalone page with two rows: the left context with the left-aware
    /// target, and the right-aware target with the right context.
    pub fn to_html(&self) -> String {
        let mut body = String::new();
        let _ = writeln!(
            body,
            "<p class=\"labels\">predicted: <b>{}</b> &middot; gold: <b>{}</b></p>",
            self.predicted, self.gold
        );
        let _ = writeln!(body, "<div class=\"row\"><span class=\"tag\">left-aware</span>");
        render_tokens(&mut body, &self.tokens.left, self.weights.alpha_l.as_deref(), "context", "alpha_l");
        render_tokens(&mut body, &self.tokens.target, self.weights.alpha_tl.as_deref(), "target", "alpha_tl");
        let _ = writeln!(body, "</div>\n<div class=\"row\"><span class=\"tag\">right-aware</span>");
        render_tokens(&mut body, &self.tokens.target, self.weights.alpha_tr.as_deref(), "target", "alpha_tr");
        render_tokens(&mut body, &self.tokens.right, self.weights.alpha_r.as_deref(), "context", "alpha_r");
        let _ = writeln!(body, "</div>");
        format!(
            "<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n<title>attention weights</title>\n<style>\n\
             body {{ font-family: sans-serif; margin: 2em; }}\n\
             .row {{ margin: 0.6em 0; line-height: 2em; }}\n\
             .tag {{ display: inline-block; width: 7em; color: #666; font-size: 0.8em; }}\n\
             .tok {{ padding: 0.15em 0.3em; margin: 0 0.1em; border-radius: 3px; }}\n\
             </style>\n</head>\n<body>\n{body}</body>\n</html>\n"
        )
    }

    pub fn render(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Json => self.to_json(),
            ExportFormat::Html => self.to_html(),
        }
    }
}

fn render_tokens(out: &mut String, tokens: &[String], weights: Option<&[f64]>, role: &str, series: &str) {
    let (r, g, b) = if role == "target" { (220, 30, 30) } else { (20, 80, 230) };
    let max = weights
        .map(|w| w.iter().copied().fold(0.0, f64::max))
        .unwrap_or(0.0);
    for (i, tok) in tokens.iter().enumerate() {
        match weights {
            Some(w) => {
                let opacity = if max > 0.0 { w[i] / max } else { 0.0 };
                let _ = writeln!(
                    out,
                    "<span class=\"tok {role}\" data-series=\"{series}\" data-weight=\"{}\" \
                     style=\"background: rgba({r},{g},{b},{opacity:.3})\">{}</span>",
                    number(w[i]),
                    escape(tok)
                );
            }
            None => {
                let _ = writeln!(out, "<span class=\"tok {role}\">{}</span>", escape(tok));
            }
        }
    }
}

/// 17 significant digits, valid as a JSON number.
fn number(x: f64) -> String {
    format!("{x:.16e}")
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Runs the model on one example and builds its export record.
pub fn attention_export(model: &Model, example: &Example, embedded: &EmbeddedExample) -> Result<AttentionExport> {
    let (probs, record) = model.predict_proba(embedded)?;
    AttentionExport::new(example, &record, predict_label(&probs))
}

/// [`attention_export`] rendered in `format`.
pub fn export_attention(
    model: &Model,
    example: &Example,
    embedded: &EmbeddedExample,
    format: ExportFormat,
) -> Result<String> {
    Ok(attention_export(model, example, embedded)?.render(format))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> AttentionExport {
        let ex = Example::new(
            vec!["i".into(), "am".into(), "pleased".into()],
            vec!["the".into(), "<battery>".into()],
            vec![],
            Sentiment::Positive,
        )
        .unwrap();
        let record = AttentionRecord {
            alpha_left: Some(vec![0.1, 0.2, 0.7]),
            alpha_right: Some(vec![]),
            alpha_target_left: Some(vec![1.0 / 3.0, 2.0 / 3.0]),
            alpha_target_right: Some(vec![0.5, 0.5]),
            ..Default::default()
        };
        AttentionExport::new(&ex, &record, Sentiment::Positive).unwrap()
    }

    #[test]
    fn json_round_trip_is_exact() {
        let e = sample();
        let json = e.to_json();
        assert!(json.contains("3.3333333333333331e-1"), "{json}");
        assert_eq!(AttentionExport::from_json(&json).unwrap(), e);
    }

    #[test]
    fn html_embeds_json_numbers() {
        let e = sample();
        let html = e.to_html();
        assert!(html.contains("&lt;battery&gt;"));
        let weights: Vec<f64> = html
            .split("data-weight=\"")
            .skip(1)
            .map(|s| s.split('"').next().unwrap().parse().unwrap())
            .collect();
        let mut expected = e.weights.alpha_l.clone().unwrap();
        expected.extend(e.weights.alpha_tl.clone().unwrap());
        expected.extend(e.weights.alpha_tr.clone().unwrap());
        assert_eq!(weights, expected);
    }

    #[test]
    fn unknown_format_is_usage_error() {
        assert!(matches!("svg".parse::<ExportFormat>(), Err(Error::Usage(_))));
        assert_eq!("html".parse::<ExportFormat>().unwrap(), ExportFormat::Html);
    }

    #[test]
    fn length_mismatch_rejected() {
        let ex = Example::new(vec!["a".into()], vec!["b".into()], vec![], Sentiment::Neutral).unwrap();
        let record = AttentionRecord {
            alpha_left: Some(vec![0.5, 0.5]),
            ..Default::default()
        };
        assert!(AttentionExport::new(&ex, &record, Sentiment::Neutral).is_err());
    }
}
