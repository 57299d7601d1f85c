//! Binary model file.
//!
//! Little-endian layout: magic `MUSIMMLP`, format version (u32), schema
//! hash length (u32) and bytes, activation tag (u8), dropout (f64), the four
//! layer widths (u32 each), parameter count (u64), parameters (f64 each).

use super::mlp::{Activation, Mlp};
use super::ModelError;
use crate::features::feature_schema_hash;
use std::path::Path;

const MAGIC: &[u8; 8] = b"MUSIMMLP";
const VERSION: u32 = 1;

pub fn model_to_bytes(m: &Mlp) -> Vec<u8> {
    let hash = feature_schema_hash().as_bytes();
    let mut out = Vec::with_capacity(64 + m.params.len() * 8);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(hash.len() as u32).to_le_bytes());
    out.extend_from_slice(hash);
    out.push(m.activation.tag());
    out.extend_from_slice(&m.dropout.to_le_bytes());
    for d in m.dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.extend_from_slice(&(m.params.len() as u64).to_le_bytes());
    for p in &m.params {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], ModelError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len()).ok_or_else(|| {
            ModelError::CorruptFile(format!("truncated at byte {} (needed {n} more)", self.pos))
        })?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, ModelError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, ModelError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, ModelError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<Mlp, ModelError> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(8)? != MAGIC {
        return Err(ModelError::CorruptFile("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(ModelError::CorruptFile(format!("unsupported format version {version}")));
    }
    let hash_len = r.u32()? as usize;
    if hash_len > 256 {
        return Err(ModelError::CorruptFile("implausible schema hash length".into()));
    }
    let hash = String::from_utf8_lossy(r.take(hash_len)?).into_owned();
    if hash != feature_schema_hash() {
        return Err(ModelError::SchemaMismatch {
            expected: feature_schema_hash().to_string(),
            found: hash,
        });
    }
    let tag = r.take(1)?[0];
    let activation = Activation::from_tag(tag).ok_or_else(|| ModelError::CorruptFile(format!("unknown activation tag {tag}")))?;
    let dropout = r.f64()?;
    let mut dims = [0usize; 4];
    for d in &mut dims {
        *d = r.u32()? as usize;
    }
    let n = r.u64()? as usize;
    let expected = dims[1] * dims[0] + dims[1] + dims[2] * dims[1] + dims[2] + dims[3] * dims[2] + dims[3];
    if n != expected {
        return Err(ModelError::CorruptFile(format!(
            "parameter count {n} does not match layer widths ({expected})"
        )));
    }
    let mut params = Vec::with_capacity(n);
    for _ in 0..n {
        params.push(r.f64()?);
    }
    if r.pos != bytes.len() {
        return Err(ModelError::CorruptFile("trailing bytes".into()));
    }
    Ok(Mlp {
        dims,
        activation,
        dropout,
        params,
    })
}

pub fn save_model(m: &Mlp, path: impl AsRef<Path>) -> Result<(), ModelError> {
    crate::corpus::write_atomic(path.as_ref(), &model_to_bytes(m))?;
    Ok(())
}

pub fn load_model(path: impl AsRef<Path>) -> Result<Mlp, ModelError> {
    model_from_bytes(&std::fs::read(path)?)
}
