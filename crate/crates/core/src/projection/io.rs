//! Binary and CSV persistence for embeddings.
//!
//! Binary layout, all integers little-endian:
//! `"RPNE"`, version `u32`, `n u64`, `q u64`, normalized `u8`, zero-row
//! count `u64`, zero-row ids `u64 × count`, then `n·q` `f64` values.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::EmbeddingMatrix;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RPNE";
const VERSION: u32 = 1;

pub fn write_embedding<W: Write>(x: &EmbeddingMatrix, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(x.n() as u64).to_le_bytes())?;
    w.write_all(&(x.q() as u64).to_le_bytes())?;
    w.write_all(&[x.is_normalized() as u8])?;
    w.write_all(&(x.zero_rows().len() as u64).to_le_bytes())?;
    for &u in x.zero_rows() {
        w.write_all(&(u as u64).to_le_bytes())?;
    }
    for v in x.data() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn to_usize(v: u64, what: &str) -> Result<usize> {
    usize::try_from(v).map_err(|_| Error::Data(format!("{what} {v} does not fit in memory")))
}

pub fn read_embedding<R: Read>(reader: R) -> Result<EmbeddingMatrix> {
    let mut r = BufReader::new(reader);
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Data("not an embedding file (bad magic)".into()));
    }
    let mut version = [0u8; 4];
    r.read_exact(&mut version)?;
    let version = u32::from_le_bytes(version);
    if version != VERSION {
        return Err(Error::Data(format!("unsupported embedding version {version}")));
    }
    let n = to_usize(read_u64(&mut r)?, "row count")?;
    let q = to_usize(read_u64(&mut r)?, "column count")?;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)?;
    let normalized = match flag[0] {
        0 => false,
        1 => true,
        other => return Err(Error::Data(format!("invalid normalized flag {other}"))),
    };
    let zeros = to_usize(read_u64(&mut r)?, "zero-row count")?;
    if zeros > n {
        return Err(Error::Data(format!("{zeros} zero rows in a {n}-row embedding")));
    }
    let mut zero_rows = Vec::with_capacity(zeros);
    for _ in 0..zeros {
        let u = to_usize(read_u64(&mut r)?, "zero-row id")?;
        if u >= n {
            return Err(Error::Bounds {
                what: "zero-row id",
                index: u,
                limit: n,
            });
        }
        zero_rows.push(u);
    }
    if zero_rows.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Data("zero-row ids are not strictly increasing".into()));
    }
    let len = n
        .checked_mul(q)
        .ok_or_else(|| Error::Data(format!("{n}x{q} embedding overflows")))?;
    let mut data = Vec::with_capacity(len);
    let mut buf = [0u8; 8];
    for _ in 0..len {
        r.read_exact(&mut buf)?;
        data.push(f64::from_le_bytes(buf));
    }
    if r.read(&mut buf)? != 0 {
        return Err(Error::Data("trailing bytes after embedding data".into()));
    }
    Ok(EmbeddingMatrix::from_parts(n, q, data, normalized, zero_rows, None))
}

pub fn save_embedding(x: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    write_embedding(x, File::create(path)?)
}

pub fn load_embedding(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    read_embedding(File::open(path)?)
}

/// One line per node: `node,x0,...,x{q-1}` with a header row.
pub fn write_embedding_csv<W: Write>(x: &EmbeddingMatrix, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    write!(w, "node")?;
    for j in 0..x.q() {
        write!(w, ",x{j}")?;
    }
    writeln!(w)?;
    for u in 0..x.n() {
        write!(w, "{u}")?;
        for v in x.row(u) {
            write!(w, ",{v:.16e}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}
