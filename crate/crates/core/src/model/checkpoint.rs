//! Binary checkpoint layout (all integers little-endian):
//!
//! ```text
//! b"ILNL" | version: u32 | K: u32 | n_dims: u32 | dims: n_dims × u32 | params: f64 LE
//! ```
//!
//! Parameters follow [`ClassifierModel::params`]: per layer, the
//! `fan_in × fan_out` weight matrix row-major, then the bias.

use std::fs;
use std::path::Path;

use super::ClassifierModel;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"ILNL";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_checkpoint(model: &ClassifierModel) -> Vec<u8> {
    let dims = model.layer_dims();
    let mut out = Vec::with_capacity(16 + 4 * dims.len() + 8 * model.param_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(model.num_classes() as u32).to_le_bytes());
    out.extend_from_slice(&(dims.len() as u32).to_le_bytes());
    for &d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for p in model.params() {
        out.extend_from_slice(&p.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        let out = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| Error::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<ClassifierModel> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!(
            "format version {version}, expected {CHECKPOINT_VERSION}"
        )));
    }
    let k = r.u32()? as usize;
    let n_dims = r.u32()? as usize;
    if n_dims > 64 {
        return Err(Error::Checkpoint(format!("implausible layer count {n_dims}")));
    }
    let dims = (0..n_dims)
        .map(|_| r.u32().map(|d| d as usize))
        .collect::<Result<Vec<_>>>()?;
    if dims.last() != Some(&k) {
        return Err(Error::Checkpoint(format!("K={k} disagrees with layer dims {dims:?}")));
    }
    let mut model = ClassifierModel::zeros(&dims).map_err(|e| Error::Checkpoint(e.to_string()))?;
    let raw = r.take(8 * model.param_count())?;
    let params: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    if r.pos != bytes.len() {
        return Err(Error::Checkpoint(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    model.set_params(&params)?;
    Ok(model)
}

pub fn save_checkpoint(model: &ClassifierModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_checkpoint(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<ClassifierModel> {
    let path = path.as_ref();
    read_checkpoint(&fs::read(path).map_err(|e| Error::io(path, e))?)
}
