//! NREC stream container.
//!
//! ```text
//! offset  size  field
//! 0       4     magic "NREC"
//! 4       1     version (1)
//! 5       1     canonical shape id
//! 6       4     block count, u32 little endian
//! 10      ..    range-coder payload
//! ```

use super::block::{BitAccount, BlockCoder};
use super::range::{RangeDecoder, RangeEncoder};
use crate::error::{Error, Result};
use crate::transform::CoefficientBlock;

pub const NREC_MAGIC: &[u8; 4] = b"NREC";
pub const NREC_VERSION: u8 = 1;
pub const NREC_HEADER: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub struct EncodedStream {
    pub bytes: Vec<u8>,
    pub account: BitAccount,
}

pub fn encode_stream(shape_id: usize, blocks: &[CoefficientBlock], coder: &mut BlockCoder<'_>) -> Result<EncodedStream> {
    let id = u8::try_from(shape_id).map_err(|_| Error::UnknownShape(shape_id))?;
    let count = u32::try_from(blocks.len()).map_err(|_| Error::InvalidParameter("too many blocks".into()))?;
    let mut enc = RangeEncoder::new();
    let mut account = BitAccount::default();
    for b in blocks {
        account.add(&coder.encode_block(&mut enc, b)?);
    }
    let mut bytes = Vec::with_capacity(NREC_HEADER + enc.bytes_so_far() + 5);
    bytes.extend_from_slice(NREC_MAGIC);
    bytes.push(NREC_VERSION);
    bytes.push(id);
    bytes.extend_from_slice(&count.to_le_bytes());
    bytes.extend(enc.finish());
    Ok(EncodedStream { bytes, account })
}

/// Header fields `(shape id, block count)`.
pub fn read_header(bytes: &[u8]) -> Result<(usize, usize)> {
    if bytes.len() < NREC_HEADER || &bytes[..4] != NREC_MAGIC {
        return Err(Error::BadContainer("missing NREC header".into()));
    }
    if bytes[4] != NREC_VERSION {
        return Err(Error::BadContainer(format!("unsupported NREC version {}", bytes[4])));
    }
    let count = u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")) as usize;
    Ok((bytes[5] as usize, count))
}

pub fn decode_stream(bytes: &[u8], coder: &mut BlockCoder<'_>) -> Result<(usize, Vec<CoefficientBlock>)> {
    let (shape_id, count) = read_header(bytes)?;
    let mut dec = RangeDecoder::new(&bytes[NREC_HEADER..])?;
    let blocks = (0..count).map(|_| coder.decode_block(&mut dec)).collect::<Result<Vec<_>>>()?;
    if !dec.is_exhausted() {
        return Err(Error::CorruptStream("trailing bytes after the last block"));
    }
    Ok((shape_id, blocks))
}
