//! CSEB, the binary embedding-matrix format.
//!
//! Little-endian layout:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "CSEB"
//! 4       4     format version, u32 = 1
//! 8       1     space, u8 (0 = concept, 1 = skill)
//! 9       1     normalized flag, u8 (0/1)
//! 10      2     reserved, u16 = 0
//! 12      8     row count, u64
//! 20      4     dim, u32
//! 24      ..    payload: count * dim f32 values, row-major
//! ```
//!
//! Loading re-validates everything the header claims, so a CSEB file read
//! back is a fully checked [`EmbeddingMatrix`]. Writes followed by reads are
//! bit-identical.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::corpus::{EmbeddingMatrix, Space};
use crate::error::{Error, Result};

const MAGIC: [u8; 4] = *b"CSEB";
const VERSION: u32 = 1;

/// The header is exactly this many bytes.
pub const CSEB_HEADER_LEN: u64 = 24;

pub fn write_embedding_file(matrix: &EmbeddingMatrix, path: impl AsRef<Path>) -> Result<()> {
    matrix.validate()?;
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&[matrix.space().to_byte(), matrix.is_normalized() as u8])?;
    w.write_all(&0u16.to_le_bytes())?;
    w.write_all(&(matrix.count() as u64).to_le_bytes())?;
    w.write_all(&(matrix.dim() as u32).to_le_bytes())?;
    let mut buf = Vec::with_capacity(matrix.dim() * 4);
    for row in matrix.rows() {
        buf.clear();
        for v in row {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

pub fn load_embedding_file(path: impl AsRef<Path>) -> Result<EmbeddingMatrix> {
    let file = File::open(path.as_ref())?;
    let file_len = file.metadata()?.len();
    let mut r = BufReader::new(file);

    let mut header = [0u8; CSEB_HEADER_LEN as usize];
    r.read_exact(&mut header).map_err(|_| {
        Error::Truncation(format!(
            "file is {file_len} bytes, shorter than the {CSEB_HEADER_LEN}-byte header"
        ))
    })?;

    if header[0..4] != MAGIC {
        return Err(Error::Format(format!("bad magic {:?}", &header[0..4])));
    }
    let version = u32::from_le_bytes(header[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let space = Space::from_byte(header[8])
        .ok_or_else(|| Error::Format(format!("unknown space byte {}", header[8])))?;
    let normalized = match header[9] {
        0 => false,
        1 => true,
        other => return Err(Error::Format(format!("bad normalized byte {other}"))),
    };
    let reserved = u16::from_le_bytes(header[10..12].try_into().unwrap());
    if reserved != 0 {
        return Err(Error::Format(format!("reserved field is {reserved}, not 0")));
    }
    let count = u64::from_le_bytes(header[12..20].try_into().unwrap());
    let dim = u32::from_le_bytes(header[20..24].try_into().unwrap());
    if dim == 0 {
        return Err(Error::Format("dim must be positive".into()));
    }

    let payload_values = count
        .checked_mul(u64::from(dim))
        .ok_or_else(|| Error::Format(format!("count {count} x dim {dim} overflows")))?;
    let expected_len = CSEB_HEADER_LEN
        .checked_add(payload_values * 4)
        .ok_or_else(|| Error::Format("declared size overflows".into()))?;
    if file_len != expected_len {
        return Err(Error::Truncation(format!(
            "header declares {expected_len} bytes, file has {file_len}"
        )));
    }

    let count = usize::try_from(count)
        .map_err(|_| Error::Format(format!("count {count} too large for this platform")))?;
    let dim = dim as usize;
    let mut data = Vec::with_capacity(count * dim);
    let mut row_buf = vec![0u8; dim * 4];
    for row in 0..count {
        r.read_exact(&mut row_buf).map_err(|_| {
            Error::Truncation(format!("payload ended inside row {row} of {count}"))
        })?;
        data.extend(
            row_buf
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap())),
        );
    }

    EmbeddingMatrix::from_raw(space, dim, count, data, normalized)
}
