//! Binary checkpoint container, little-endian throughout:
//!
//! ```text
//! magic            8 bytes   "KGEMBCK\0"
//! version          u32       1
//! config_len       u32       byte length of the JSON config that follows
//! config           utf-8     ModelConfig as JSON
//! entity_count     u64
//! relation_count   u64
//! dim              u64
//! set_count        u32       1 for TransE, 3 for MDE
//! labels_len       u32       byte length of the label block (0 = none)
//! labels           utf-8     entity labels then relation labels, one per
//!                            line, entity_count + relation_count lines
//! per set, in order i, j, k:
//!   entities       entity_count * dim f64, row-major
//!   relations      relation_count * dim f64, row-major
//! ```
//!
//! Nothing may follow the last block.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Vocabulary;

use super::config::ModelConfig;
use super::space::{EmbeddingSet, EmbeddingSpace, Table};
use super::Model;

pub const MAGIC: &[u8; 8] = b"KGEMBCK\0";
pub const VERSION: u32 = 1;

/// A model plus the vocabulary its ids refer to, when known.
#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub model: Model,
    pub vocab: Option<Vocabulary>,
}

impl Checkpoint {
    pub fn new(model: Model, vocab: Option<Vocabulary>) -> Self {
        Checkpoint { model, vocab }
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let space = &self.model.space;
        let config = serde_json::to_vec(&self.model.config).map_err(|e| Error::Checkpoint(e.to_string()))?;
        let labels = match &self.vocab {
            Some(v) => {
                if v.entity_count() != space.entity_count() || v.relation_count() != space.relation_count() {
                    return Err(Error::Checkpoint(
                        "vocabulary size differs from the embedding space".into(),
                    ));
                }
                let mut s = String::new();
                for l in v.entity_labels().iter().chain(v.relation_labels()) {
                    if l.contains('\n') {
                        return Err(Error::Checkpoint(format!("label {l:?} contains a newline")));
                    }
                    s.push_str(l);
                    s.push('\n');
                }
                s.into_bytes()
            }
            None => Vec::new(),
        };
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(config.len() as u32).to_le_bytes());
        out.extend_from_slice(&config);
        out.extend_from_slice(&(space.entity_count() as u64).to_le_bytes());
        out.extend_from_slice(&(space.relation_count() as u64).to_le_bytes());
        out.extend_from_slice(&(space.dim() as u64).to_le_bytes());
        out.extend_from_slice(&(space.sets().len() as u32).to_le_bytes());
        out.extend_from_slice(&(labels.len() as u32).to_le_bytes());
        out.extend_from_slice(&labels);
        for set in space.sets() {
            for x in set.entities.as_slice().iter().chain(set.relations.as_slice()) {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(Error::Checkpoint("not a checkpoint file".into()));
        }
        let version = r.u32()?;
        if version != VERSION {
            return Err(Error::Checkpoint(format!("unsupported version {version}")));
        }
        let config_len = r.u32()? as usize;
        let config: ModelConfig =
            serde_json::from_slice(r.take(config_len)?).map_err(|e| Error::Checkpoint(format!("config: {e}")))?;
        config.validate().map_err(|e| Error::Checkpoint(e.to_string()))?;
        let entity_count = r.u64()? as usize;
        let relation_count = r.u64()? as usize;
        let dim = r.u64()? as usize;
        let set_count = r.u32()? as usize;
        if dim != config.dim {
            return Err(Error::Checkpoint(format!(
                "block dim {dim} differs from config dim {}",
                config.dim
            )));
        }
        if set_count != config.model.sets() {
            return Err(Error::Checkpoint(format!(
                "{} expects {} sets, file has {set_count}",
                config.model,
                config.model.sets()
            )));
        }
        let labels_len = r.u32()? as usize;
        let labels = r.take(labels_len)?;
        let vocab = if labels_len == 0 {
            None
        } else {
            let text = std::str::from_utf8(labels).map_err(|e| Error::Checkpoint(e.to_string()))?;
            let lines: Vec<String> = text.lines().map(str::to_owned).collect();
            if lines.len() != entity_count + relation_count {
                return Err(Error::Checkpoint(format!(
                    "label block has {} lines, expected {}",
                    lines.len(),
                    entity_count + relation_count
                )));
            }
            let (e, rel) = lines.split_at(entity_count);
            Some(Vocabulary::from_labels(e.to_vec(), rel.to_vec()).map_err(|e| Error::Checkpoint(e.to_string()))?)
        };
        let mut sets = Vec::with_capacity(set_count);
        for _ in 0..set_count {
            let entities = Table::from_vec(entity_count, dim, r.f64s(entity_count * dim)?).expect("sized read");
            let relations = Table::from_vec(relation_count, dim, r.f64s(relation_count * dim)?).expect("sized read");
            sets.push(EmbeddingSet { entities, relations });
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint(format!("{} trailing bytes", bytes.len() - r.pos)));
        }
        let space = EmbeddingSpace::from_sets(config.model, sets)
            .ok_or_else(|| Error::Checkpoint("inconsistent embedding blocks".into()))?;
        Ok(Checkpoint {
            model: Model::new(config, space),
            vocab,
        })
    }

    /// Errors unless the space has exactly one row per vocabulary label.
    pub fn check_vocabulary(&self, vocab: &Vocabulary) -> Result<()> {
        let s = &self.model.space;
        if s.entity_count() != vocab.entity_count() || s.relation_count() != vocab.relation_count() {
            return Err(Error::Checkpoint(format!(
                "checkpoint has {} entities / {} relations, vocabulary has {} / {}",
                s.entity_count(),
                s.relation_count(),
                vocab.entity_count(),
                vocab.relation_count()
            )));
        }
        Ok(())
    }
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, checkpoint.to_bytes()?).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
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
            .ok_or_else(|| Error::Checkpoint(format!("truncated: wanted {n} bytes at offset {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Checkpoint("block too large".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
