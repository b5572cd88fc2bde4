//! Flat binary checkpoint: a schema version string, the vocabulary content
//! hash, the serialized run configuration, then each parameter as
//! name + shape + row-major 64-bit little-endian payload. Round trips are
//! bit-exact.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use super::params::ParamStore;
use super::tensor::Tensor;

const MAGIC: &[u8; 8] = b"MEMSUMCK";

/// Current checkpoint schema version.
pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckpointMeta {
    pub schema_version: String,
    pub vocab_hash: String,
    pub config_json: String,
}

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("checkpoint io: {0}")]
    Io(#[from] io::Error),
    #[error("not a checkpoint file (bad magic)")]
    BadMagic,
    #[error("unsupported checkpoint schema version `{0}`")]
    UnsupportedVersion(String),
    #[error("checkpoint field too large: {0} bytes")]
    OversizedField(u64),
    #[error("checkpoint contains invalid utf-8 in a name field")]
    BadString,
}

/// Serialize every parameter of `store` plus metadata to `path`. The write
/// goes to a temporary sibling first and is renamed into place.
pub fn save(path: &Path, store: &ParamStore, meta: &CheckpointMeta) -> Result<(), CheckpointError> {
    let tmp = path.with_extension("ckpt.tmp");
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        write_string(&mut w, SCHEMA_VERSION)?;
        write_string(&mut w, &meta.vocab_hash)?;
        write_string(&mut w, &meta.config_json)?;
        w.write_all(&(store.len() as u32).to_le_bytes())?;
        for (name, tensor) in store.iter() {
            write_string(&mut w, name)?;
            w.write_all(&(tensor.shape().len() as u32).to_le_bytes())?;
            for &dim in tensor.shape() {
                w.write_all(&(dim as u64).to_le_bytes())?;
            }
            for &value in tensor.data() {
                w.write_all(&value.to_le_bytes())?;
            }
        }
        w.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

/// Read a checkpoint back into a fresh store. Parameter order, shapes, and
/// payload bits are exactly as saved.
pub fn load(path: &Path) -> Result<(ParamStore, CheckpointMeta), CheckpointError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic);
    }
    let schema_version = read_string(&mut r)?;
    if schema_version != SCHEMA_VERSION {
        return Err(CheckpointError::UnsupportedVersion(schema_version));
    }
    let vocab_hash = read_string(&mut r)?;
    let config_json = read_string(&mut r)?;
    let count = read_u32(&mut r)?;
    let mut store = ParamStore::new();
    for _ in 0..count {
        let name = read_string(&mut r)?;
        let ndim = read_u32(&mut r)? as usize;
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            shape.push(read_u64(&mut r)? as usize);
        }
        let numel: usize = shape.iter().product();
        let mut data = vec![0.0; numel];
        let mut buf = [0u8; 8];
        for slot in &mut data {
            r.read_exact(&mut buf)?;
            *slot = f64::from_le_bytes(buf);
        }
        store.insert(name, Tensor::new(shape, data));
    }
    Ok((
        store,
        CheckpointMeta {
            schema_version,
            vocab_hash,
            config_json,
        },
    ))
}

fn write_string<W: Write>(w: &mut W, s: &str) -> Result<(), CheckpointError> {
    w.write_all(&(s.len() as u32).to_le_bytes())?;
    w.write_all(s.as_bytes())?;
    Ok(())
}

fn read_string<R: Read>(r: &mut R) -> Result<String, CheckpointError> {
    let len = read_u32(r)? as u64;
    if len > 64 * 1024 * 1024 {
        return Err(CheckpointError::OversizedField(len));
    }
    let mut buf = vec![0u8; len as usize];
    r.read_exact(&mut buf)?;
    String::from_utf8(buf).map_err(|_| CheckpointError::BadString)
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32, CheckpointError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64, CheckpointError> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}
