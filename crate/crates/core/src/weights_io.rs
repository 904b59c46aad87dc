//! Binary weight-vector files.
//!
//! Dense layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic  b"GVFW"
//! 4       4     format version (u32, currently 1)
//! 8       1     encoding tag: 0 = dense, 1 = sparse
//! 9       8     dimension (u64)
//! dense:  dimension × f64 values
//! sparse: count (u64), then count × (index u64, value f64), indices ascending
//! ```
//!
//! Readers accept either encoding; [`write_auto`] picks sparse when fewer
//! than a third of the entries are nonzero.

use std::io::{Read, Write};

use crate::error::{GvfError, Result};
use crate::sparse::DenseWeightVector;

pub const MAGIC: &[u8; 4] = b"GVFW";
pub const FORMAT_VERSION: u32 = 1;

const TAG_DENSE: u8 = 0;
const TAG_SPARSE: u8 = 1;

fn write_header<W: Write>(out: &mut W, tag: u8, dimension: usize) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&[tag])?;
    out.write_all(&(dimension as u64).to_le_bytes())?;
    Ok(())
}

pub fn write_dense<W: Write>(out: &mut W, w: &DenseWeightVector) -> Result<()> {
    write_header(out, TAG_DENSE, w.dimension())?;
    for v in w.values() {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_sparse<W: Write>(out: &mut W, w: &DenseWeightVector) -> Result<()> {
    write_header(out, TAG_SPARSE, w.dimension())?;
    // -0.0 is kept so that round trips are bit-exact.
    let nonzero: Vec<(usize, f64)> = w
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| v.to_bits() != 0)
        .map(|(i, v)| (i, *v))
        .collect();
    out.write_all(&(nonzero.len() as u64).to_le_bytes())?;
    for (i, v) in nonzero {
        out.write_all(&(i as u64).to_le_bytes())?;
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn write_auto<W: Write>(out: &mut W, w: &DenseWeightVector) -> Result<()> {
    let nonzero = w.values().iter().filter(|v| v.to_bits() != 0).count();
    if nonzero * 3 < w.dimension() {
        write_sparse(out, w)
    } else {
        write_dense(out, w)
    }
}

fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

fn read_f64<R: Read>(input: &mut R) -> Result<f64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Reads one vector in either encoding.
pub fn read<R: Read>(input: &mut R) -> Result<DenseWeightVector> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(GvfError::Format(format!("bad magic {magic:?}")));
    }
    let mut version = [0u8; 4];
    input.read_exact(&mut version)?;
    let version = u32::from_le_bytes(version);
    if version != FORMAT_VERSION {
        return Err(GvfError::Format(format!("unsupported version {version}")));
    }
    let mut tag = [0u8; 1];
    input.read_exact(&mut tag)?;
    let dimension = read_u64(input)? as usize;
    if dimension == 0 {
        return Err(GvfError::Format("zero dimension".into()));
    }
    let mut values = vec![0.0; dimension];
    match tag[0] {
        TAG_DENSE => {
            for v in values.iter_mut() {
                *v = read_f64(input)?;
            }
        }
        TAG_SPARSE => {
            let count = read_u64(input)? as usize;
            if count > dimension {
                return Err(GvfError::Format(format!(
                    "{count} sparse entries exceed dimension {dimension}"
                )));
            }
            let mut last: Option<usize> = None;
            for _ in 0..count {
                let i = read_u64(input)? as usize;
                if i >= dimension || last.is_some_and(|l| l >= i) {
                    return Err(GvfError::Format(format!("bad sparse index {i}")));
                }
                values[i] = read_f64(input)?;
                last = Some(i);
            }
        }
        other => return Err(GvfError::Format(format!("unknown encoding tag {other}"))),
    }
    DenseWeightVector::from_values(values).map_err(|e| GvfError::Format(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dense_header_layout() {
        let w = DenseWeightVector::from_values(vec![1.5, -2.0]).unwrap();
        let mut buf = Vec::new();
        write_dense(&mut buf, &w).unwrap();
        assert_eq!(&buf[0..4], b"GVFW");
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(buf[8], 0);
        assert_eq!(&buf[9..17], &2u64.to_le_bytes());
        assert_eq!(&buf[17..25], &1.5f64.to_le_bytes());
        assert_eq!(buf.len(), 17 + 16);
    }

    #[test]
    fn rejects_corrupt_input() {
        assert!(read(&mut &b"NOPE"[..]).is_err());
        let w = DenseWeightVector::zeros(4);
        let mut buf = Vec::new();
        write_dense(&mut buf, &w).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read(&mut buf.as_slice()).is_err());
    }

    proptest! {
        #[test]
        fn round_trips_bit_exact(
            values in proptest::collection::vec(prop_oneof![Just(0.0f64), -1e6f64..1e6], 1..300),
            sparse in any::<bool>(),
        ) {
            let w = DenseWeightVector::from_values(values).unwrap();
            let mut buf = Vec::new();
            if sparse { write_sparse(&mut buf, &w).unwrap() } else { write_dense(&mut buf, &w).unwrap() }
            let back = read(&mut buf.as_slice()).unwrap();
            prop_assert_eq!(
                back.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                w.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>()
            );
        }
    }
}
