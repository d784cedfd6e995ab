//! Frozen pretrained word vectors with lazily materialized random rows for
//! out-of-vocabulary tokens.
//!
//! OOV rows are drawn from `U(-0.1, 0.1)` with whatever generator the caller
//! passes in; the crate uses [`crate::rng::Rng`] (ChaCha8 seeded from a
//! `u64`) everywhere, so the sequence is stable for a given seed and lookup
//! order.

use std::collections::{BTreeSet, HashMap};
use std::io::BufRead;

use rand::Rng;

use crate::error::{Error, Result};

/// Bound of the uniform distribution used for unseen tokens.
pub const OOV_BOUND: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    dim: usize,
    index: HashMap<String, usize>,
    tokens: Vec<String>,
    rows: Vec<f64>,
    oov: BTreeSet<String>,
}

impl EmbeddingTable {
    pub fn new(dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        EmbeddingTable {
            dim,
            index: HashMap::new(),
            tokens: Vec::new(),
            rows: Vec::new(),
            oov: BTreeSet::new(),
        }
    }

    /// Parses `token v1 .. vd` lines. Blank lines are skipped and a repeated
    /// token keeps its first row.
    pub fn load_pretrained<R: BufRead>(source: R, dim: usize) -> Result<Self> {
        let mut table = EmbeddingTable::new(dim);
        let mut values = Vec::with_capacity(dim);
        for (i, line) in source.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let mut fields = line.split_whitespace();
            let Some(token) = fields.next() else { continue };
            values.clear();
            for f in fields {
                let v: f64 = f.parse().map_err(|_| Error::Format {
                    line: lineno,
                    message: format!("unparsable number {f:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::Format {
                        line: lineno,
                        message: format!("non-finite value {f:?}"),
                    });
                }
                values.push(v);
            }
            if values.len() != dim {
                return Err(Error::Format {
                    line: lineno,
                    message: format!("expected {dim} values, found {}", values.len()),
                });
            }
            let token = token.to_lowercase();
            if !table.index.contains_key(&token) {
                table.insert(token, &values);
            }
        }
        Ok(table)
    }

    fn insert(&mut self, token: String, values: &[f64]) -> usize {
        let row = self.tokens.len();
        self.rows.extend_from_slice(values);
        self.index.insert(token.clone(), row);
        self.tokens.push(token);
        row
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(&token.to_lowercase())
    }

    /// Row of a known token, without materializing anything.
    pub fn get(&self, token: &str) -> Option<&[f64]> {
        let row = *self.index.get(&token.to_lowercase())?;
        Some(self.row(row))
    }

    fn row(&self, row: usize) -> &[f64] {
        &self.rows[row * self.dim..(row + 1) * self.dim]
    }

    /// Tokens that were given a random row, in sorted order.
    pub fn oov_tokens(&self) -> impl Iterator<Item = &str> {
        self.oov.iter().map(String::as_str)
    }

    pub fn is_oov(&self, token: &str) -> bool {
        self.oov.contains(&token.to_lowercase())
    }

    /// Returns the row for `token`, drawing and caching a fresh random row the
    /// first time an unseen token is requested.
    pub fn lookup<R: Rng + ?Sized>(&mut self, token: &str, rng: &mut R) -> &[f64] {
        let token = token.to_lowercase();
        let row = match self.index.get(&token) {
            Some(&row) => row,
            None => {
                let values: Vec<f64> = (0..self.dim)
                    .map(|_| rng.gen_range(-OOV_BOUND..=OOV_BOUND))
                    .collect();
                self.oov.insert(token.clone());
                self.insert(token, &values)
            }
        };
        self.row(row)
    }

    /// Inserts a previously materialized OOV row (e.g. from a checkpoint).
    /// Known tokens are left untouched.
    pub fn restore_oov(&mut self, token: &str, values: &[f64]) -> Result<()> {
        if values.len() != self.dim {
            return Err(Error::shape("restore_oov", &[self.dim], &[values.len()]));
        }
        let token = token.to_lowercase();
        if !self.index.contains_key(&token) {
            self.oov.insert(token.clone());
            self.insert(token, values);
        }
        Ok(())
    }

    /// Flat row-major view of the whole matrix.
    pub fn matrix(&self) -> &[f64] {
        &self.rows
    }
}
