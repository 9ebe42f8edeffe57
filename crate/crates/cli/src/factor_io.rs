//! Little-endian binary factorization files.
//!
//! Layout: `"LCHO"`, version `u32`, `n u64`, `perm` (`n` × u64), `diag`
//! (`n` × f64), `col_ptr` (`n + 1` × u64), then `(row u64, value f64)` pairs.

use std::fs;
use std::path::Path;

use approxchol::{FactorError, Factorization};
use thiserror::Error;

pub const MAGIC: &[u8; 4] = b"LCHO";
pub const VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FactorIoError {
    #[error("cannot access {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("bad magic {0:?}; not a factorization file")]
    BadMagic([u8; 4]),
    #[error("unsupported factorization file version {0} (expected {VERSION})")]
    UnsupportedVersion(u32),
    #[error("truncated factorization file: needed {needed} more bytes at offset {offset}")]
    Truncated { offset: usize, needed: usize },
    #[error("{0} trailing bytes after factorization")]
    Trailing(usize),
    #[error("value {0} does not fit in usize")]
    Overflow(u64),
    #[error(transparent)]
    Invalid(#[from] FactorError),
}

pub fn encode(f: &Factorization) -> Vec<u8> {
    let n = f.n();
    let mut out = Vec::with_capacity(4 + 4 + 8 + 8 * (3 * n + 1) + 16 * f.fill());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(n as u64).to_le_bytes());
    for &p in f.perm() {
        out.extend_from_slice(&(p as u64).to_le_bytes());
    }
    for &d in f.diag() {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for &c in f.col_ptr() {
        out.extend_from_slice(&(c as u64).to_le_bytes());
    }
    for (&r, &v) in f.row_idx().iter().zip(f.values()) {
        out.extend_from_slice(&(r as u64).to_le_bytes());
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8], FactorIoError> {
        let rest = self.buf.len() - self.pos;
        if rest < len {
            return Err(FactorIoError::Truncated { offset: self.pos, needed: len - rest });
        }
        let s = &self.buf[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, FactorIoError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, FactorIoError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn index(&mut self) -> Result<usize, FactorIoError> {
        let x = self.u64()?;
        usize::try_from(x).map_err(|_| FactorIoError::Overflow(x))
    }

    fn f64(&mut self) -> Result<f64, FactorIoError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    /// Guards allocations against absurd counts in corrupt headers.
    fn check_room(&self, count: usize, width: usize) -> Result<(), FactorIoError> {
        let rest = self.buf.len() - self.pos;
        match count.checked_mul(width) {
            Some(need) if need <= rest => Ok(()),
            Some(need) => Err(FactorIoError::Truncated { offset: self.pos, needed: need - rest }),
            None => Err(FactorIoError::Overflow(count as u64)),
        }
    }
}

pub fn decode(buf: &[u8]) -> Result<Factorization, FactorIoError> {
    let mut r = Reader { buf, pos: 0 };
    let magic: [u8; 4] = r.take(4)?.try_into().unwrap();
    if &magic != MAGIC {
        return Err(FactorIoError::BadMagic(magic));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(FactorIoError::UnsupportedVersion(version));
    }
    let n = r.index()?;
    r.check_room(n, 8)?;
    let perm = (0..n).map(|_| r.index()).collect::<Result<Vec<_>, _>>()?;
    r.check_room(n, 8)?;
    let diag = (0..n).map(|_| r.f64()).collect::<Result<Vec<_>, _>>()?;
    r.check_room(n + 1, 8)?;
    let col_ptr = (0..=n).map(|_| r.index()).collect::<Result<Vec<_>, _>>()?;
    let nnz = *col_ptr.last().unwrap();
    r.check_room(nnz, 16)?;
    let mut row_idx = Vec::with_capacity(nnz);
    let mut values = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        row_idx.push(r.index()?);
        values.push(r.f64()?);
    }
    if r.pos != buf.len() {
        return Err(FactorIoError::Trailing(buf.len() - r.pos));
    }
    Ok(Factorization::from_parts(perm, diag, col_ptr, row_idx, values)?)
}

pub fn write_factorization(f: &Factorization, path: &Path) -> Result<(), FactorIoError> {
    fs::write(path, encode(f)).map_err(|source| FactorIoError::Io { path: path.display().to_string(), source })
}

pub fn read_factorization(path: &Path) -> Result<Factorization, FactorIoError> {
    let buf = fs::read(path).map_err(|source| FactorIoError::Io { path: path.display().to_string(), source })?;
    decode(&buf)
}
