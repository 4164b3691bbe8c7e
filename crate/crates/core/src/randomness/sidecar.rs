//! Binary sidecar files for explicit permutation tables.
//!
//! Layout (little endian): magic `RSEDPERM1`, `n: u32`, `k: u32`,
//! `count: u32`, then `count` forward entries as `u32`.

use std::io::{Read, Write};
use std::path::Path;

use crate::bitcore::SystemShape;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 9] = b"RSEDPERM1";

pub fn write_table(path: &Path, shape: SystemShape, forward: &[u32]) -> Result<()> {
    let mut buf = Vec::with_capacity(MAGIC.len() + 12 + 4 * forward.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&shape.n().to_le_bytes());
    buf.extend_from_slice(&shape.k().to_le_bytes());
    buf.extend_from_slice(&(forward.len() as u32).to_le_bytes());
    for &v in forward {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Read a table and check that it is a bijection of the right size.
pub fn read_table(path: &Path) -> Result<(SystemShape, Vec<u32>)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn decode(bytes: &[u8]) -> Result<(SystemShape, Vec<u32>)> {
    let header = MAGIC.len() + 12;
    if bytes.len() < header || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::validation("missing RSEDPERM1 header"));
    }
    let word = |off: usize| u32::from_le_bytes(bytes[off..off + 4].try_into().unwrap());
    let n = word(MAGIC.len());
    let k = word(MAGIC.len() + 4);
    let count = word(MAGIC.len() + 8) as usize;
    let shape = SystemShape::new(n, k)?;
    if count != shape.full_dim() {
        return Err(Error::validation(format!(
            "table has {count} entries, expected {}",
            shape.full_dim()
        )));
    }
    if bytes.len() != header + 4 * count {
        return Err(Error::validation("truncated or oversized permutation table"));
    }
    let forward: Vec<u32> = (0..count).map(|i| word(header + 4 * i)).collect();
    let mut seen = vec![false; count];
    for &v in &forward {
        let v = v as usize;
        if v >= count || seen[v] {
            return Err(Error::validation("permutation table is not a bijection"));
        }
        seen[v] = true;
    }
    Ok((shape, forward))
}
