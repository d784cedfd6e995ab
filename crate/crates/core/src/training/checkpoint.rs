//! Binary checkpoint container.
//!
//! All integers and floats are little-endian; floats are raw IEEE-754 bits so
//! a round trip is bit-exact.
//!
//! ```text
//! magic          8 bytes   "LCRROTCK"
//! version        u32       FORMAT_VERSION
//! header_len     u32
//! header         UTF-8     `key = value` lines: variant, embed_dim,
//!                          hidden_dim, classes, learning_rate, l2, dropout,
//!                          momentum, batch_size, max_epochs, seed,
//!                          regularize_biases
//! param_count    u32
//!   name_len     u32
//!   name         UTF-8
//!   kind         u8        0 = weight, 1 = bias
//!   rank         u32
//!   dims         u64 × rank
//!   values       f64 × product(dims)
//! oov_count      u32
//!   token_len    u32
//!   token        UTF-8
//!   values       f64 × embed_dim
//! ```
//!
//! The OOV section stores the random rows drawn for unseen tokens during
//! training so evaluation sees the same inputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use super::Hyperparams;
use crate::embeddings::EmbeddingTable;
use crate::error::{Error, Result};
use crate::math::Tensor;
use crate::model::{Model, ModelConfig, ParamKind, ParamStore, Variant, CLASSES};

pub const MAGIC: &[u8; 8] = b"LCRROTCK";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub hyperparams: Hyperparams,
    /// Random rows of out-of-vocabulary tokens, sorted by token.
    pub oov_rows: Vec<(String, Vec<f64>)>,
}

impl Checkpoint {
    pub fn new(model: Model, hyperparams: Hyperparams, embeddings: Option<&EmbeddingTable>) -> Self {
        let oov_rows = embeddings
            .map(|t| {
                t.oov_tokens()
                    .map(|tok| (tok.to_string(), t.get(tok).expect("oov row").to_vec()))
                    .collect()
            })
            .unwrap_or_default();
        Checkpoint {
            model,
            hyperparams,
            oov_rows,
        }
    }

    /// Errors unless the checkpoint declares `variant`.
    pub fn expect_variant(&self, variant: Variant) -> Result<()> {
        let found = self.model.variant();
        if found != variant {
            return Err(Error::Checkpoint(format!(
                "checkpoint holds variant {found}, expected {variant}"
            )));
        }
        Ok(())
    }

    /// Adds the stored OOV rows to `table`.
    pub fn restore_oov(&self, table: &mut EmbeddingTable) -> Result<()> {
        for (tok, row) in &self.oov_rows {
            table.restore_oov(tok, row)?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let cfg = self.model.config();
        let hp = &self.hyperparams;
        let header = format!(
            "variant = {}\nembed_dim = {}\nhidden_dim = {}\nclasses = {}\nlearning_rate = {:?}\nl2 = {:?}\n\
             dropout = {:?}\nmomentum = {:?}\nbatch_size = {}\nmax_epochs = {}\nseed = {}\nregularize_biases = {}\n",
            cfg.variant,
            cfg.embed_dim,
            cfg.hidden_dim,
            CLASSES,
            hp.learning_rate,
            hp.l2,
            hp.dropout,
            hp.momentum,
            hp.batch_size,
            hp.max_epochs,
            hp.seed,
            hp.regularize_biases,
        );
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, FORMAT_VERSION);
        put_str(&mut out, &header);
        put_u32(&mut out, self.model.params().len() as u32);
        for p in self.model.params().iter() {
            put_str(&mut out, &p.name);
            out.push(match p.kind {
                ParamKind::Weight => 0,
                ParamKind::Bias => 1,
            });
            put_u32(&mut out, p.value.rank() as u32);
            for &d in p.value.shape() {
                out.extend_from_slice(&(d as u64).to_le_bytes());
            }
            for v in p.value.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        put_u32(&mut out, self.oov_rows.len() as u32);
        for (tok, row) in &self.oov_rows {
            put_str(&mut out, tok);
            for v in row {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file (bad magic)".into()));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "unsupported format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let header = parse_header(&r.string()?)?;
        let field = |key: &str| {
            header
                .get(key)
                .map(String::as_str)
                .ok_or_else(|| Error::Checkpoint(format!("header lacks {key}")))
        };
        let variant: Variant = field("variant")?
            .parse()
            .map_err(|_| Error::Checkpoint(format!("unknown variant {:?}", header["variant"])))?;
        let embed_dim: usize = parse_field(field("embed_dim")?, "embed_dim")?;
        let hidden_dim: usize = parse_field(field("hidden_dim")?, "hidden_dim")?;
        let classes: usize = parse_field(field("classes")?, "classes")?;
        if classes != CLASSES {
            return Err(Error::Checkpoint(format!("expected {CLASSES} classes, found {classes}")));
        }
        let hyperparams = Hyperparams {
            learning_rate: parse_field(field("learning_rate")?, "learning_rate")?,
            l2: parse_field(field("l2")?, "l2")?,
            dropout: parse_field(field("dropout")?, "dropout")?,
            momentum: parse_field(field("momentum")?, "momentum")?,
            batch_size: parse_field(field("batch_size")?, "batch_size")?,
            max_epochs: parse_field(field("max_epochs")?, "max_epochs")?,
            seed: parse_field(field("seed")?, "seed")?,
            regularize_biases: parse_field(field("regularize_biases")?, "regularize_biases")?,
        };

        let mut params = ParamStore::new();
        for _ in 0..r.u32()? {
            let name = r.string()?;
            let kind = match r.take(1)?[0] {
                0 => ParamKind::Weight,
                1 => ParamKind::Bias,
                k => return Err(Error::Checkpoint(format!("unknown parameter kind {k} for {name}"))),
            };
            let rank = r.u32()? as usize;
            let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n = shape.iter().product::<usize>();
            let data = r.f64s(n)?;
            let value = Tensor::new(shape, data).map_err(|e| Error::Checkpoint(format!("{name}: {e}")))?;
            params.add(name, kind, value);
        }
        let config = ModelConfig::new(variant, embed_dim, hidden_dim);
        let model = Model::from_params(config, params).map_err(|e| {
            Error::Checkpoint(format!("parameters do not match declared variant {variant}: {e}"))
        })?;

        let mut oov_rows = Vec::new();
        for _ in 0..r.u32()? {
            let tok = r.string()?;
            oov_rows.push((tok, r.f64s(embed_dim)?));
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        Ok(Checkpoint {
            model,
            hyperparams,
            oov_rows,
        })
    }
}

pub fn save_checkpoint(path: impl AsRef<Path>, checkpoint: &Checkpoint) -> Result<()> {
    fs::write(path, checkpoint.to_bytes())?;
    Ok(())
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    Checkpoint::from_bytes(&fs::read(path)?)
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn parse_header(text: &str) -> Result<BTreeMap<String, String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Checkpoint(format!("malformed header line {l:?}")))
        })
        .collect()
}

fn parse_field<T: std::str::FromStr>(value: &str, key: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Checkpoint(format!("bad value {value:?} for {key}")))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::Checkpoint("truncated checkpoint".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let raw = self.take(n.checked_mul(8).ok_or_else(|| Error::Checkpoint("tensor too large".into()))?)?;
        Ok(raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    fn string(&mut self) -> Result<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Error::Checkpoint("invalid UTF-8".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn sample(variant: Variant) -> Checkpoint {
        let model = Model::new(ModelConfig::new(variant, 4, 3), &mut seeded(3)).unwrap();
        let mut table = EmbeddingTable::new(4);
        table.lookup("unseen", &mut seeded(4));
        let hp = Hyperparams {
            learning_rate: 0.1 + 1e-17,
            l2: 1.0 / 3.0,
            ..Hyperparams::default()
        };
        Checkpoint::new(model, hp, Some(&table))
    }

    #[test]
    fn round_trip_is_bit_exact() {
        for v in Variant::ALL {
            let ck = sample(v);
            let back = Checkpoint::from_bytes(&ck.to_bytes()).unwrap();
            assert_eq!(back, ck);
            for (a, b) in ck.model.params().iter().zip(back.model.params().iter()) {
                let bits = |t: &Tensor| t.data().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
                assert_eq!(bits(&a.value), bits(&b.value));
            }
            assert_eq!(back.hyperparams.l2.to_bits(), (1.0f64 / 3.0).to_bits());
        }
    }

    #[test]
    fn variant_mismatch_is_checkpoint_error() {
        let ck = sample(Variant::LcrRot);
        assert!(matches!(ck.expect_variant(Variant::NoAttention), Err(Error::Checkpoint(_))));
        ck.expect_variant(Variant::LcrRot).unwrap();

        // A header that declares a different variant than the stored tensors.
        let bytes = ck.to_bytes();
        let text = String::from_utf8_lossy(&bytes).into_owned();
        assert!(text.contains("variant = lcr-rot"));
        let forged = replace_bytes(&bytes, b"variant = lcr-rot\n", b"variant = no-attention\n");
        assert!(matches!(Checkpoint::from_bytes(&forged), Err(Error::Checkpoint(_))));
    }

    fn replace_bytes(bytes: &[u8], from: &[u8], to: &[u8]) -> Vec<u8> {
        let at = bytes.windows(from.len()).position(|w| w == from).unwrap();
        // header length sits just before the header text
        let header_start = 16;
        let old_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let new_len = old_len + to.len() - from.len();
        let mut out = bytes[..12].to_vec();
        out.extend_from_slice(&(new_len as u32).to_le_bytes());
        out.extend_from_slice(&bytes[header_start..at]);
        out.extend_from_slice(to);
        out.extend_from_slice(&bytes[at + from.len()..]);
        out
    }

    #[test]
    fn version_and_magic_checked() {
        let mut bytes = sample(Variant::LcrRot).to_bytes();
        bytes[8] = 9;
        let err = Checkpoint::from_bytes(&bytes).unwrap_err();
        assert!(err.to_string().contains("version"), "{err}");
        bytes[0] = b'X';
        assert!(Checkpoint::from_bytes(&bytes).is_err());
    }

    #[test]
    fn truncation_detected() {
        let bytes = sample(Variant::NoAttention).to_bytes();
        assert!(matches!(
            Checkpoint::from_bytes(&bytes[..bytes.len() - 3]),
            Err(Error::Checkpoint(_))
        ));
    }

    #[test]
    fn oov_rows_restore() {
        let ck = sample(Variant::LcrRot);
        let mut table = EmbeddingTable::new(4);
        ck.restore_oov(&mut table).unwrap();
        assert!(table.is_oov("unseen"));
        assert_eq!(table.get("unseen").unwrap(), ck.oov_rows[0].1.as_slice());
    }
}
