//! Adaptive multi-symbol range coding of coefficient blocks.

mod block;
mod cdf;
mod container;
mod range;

pub use block::{BitAccount, BlockCoder, LR_CATEGORIES, LR_CLASSES};
pub use cdf::{Cdf15, MAX_ALPHABET, PROB_BITS, PROB_TOTAL};
pub use container::{decode_stream, encode_stream, read_header, EncodedStream, NREC_HEADER, NREC_MAGIC, NREC_VERSION};
pub use range::{RangeDecoder, RangeEncoder};
