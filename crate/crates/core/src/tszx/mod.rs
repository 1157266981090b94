//! Lossless terminal frame-stream codec.
//!
//! Layout: `"TSZX"`, version, outer stage, width u16 LE, height u16 LE,
//! frame count u32 LE, palette count u16 LE, palette entries (codepoint as
//! LEB128 + style byte), the frame bitstream (MSB first, zero padded once at
//! its end), action count u32 LE, NUL-terminated action records.
//!
//! Each frame is a token sequence covering its cells in row-major order:
//!
//! ```text
//! 0 idx[k]                       literal palette index, k = ceil(log2 |palette|)
//! 1 T L len[7:0] [len[15:8]]     run; T=0 copies the previous frame,
//!                                T=1 repeats the last emitted cell
//! ```

mod bits;
mod codec;

pub use bits::{BitReader, BitWriter};
pub use codec::{decode, decode_actions, encode, inspect, Decoder, Encoder, Header, Report, Token, TokenCounts};

pub const MAGIC: &[u8; 4] = b"TSZX";
pub const VERSION: u8 = 1;
/// The only outer stage this implementation writes or reads.
pub const OUTER_NONE: u8 = 0;
/// Fixed-size prefix before the palette.
pub const HEADER_LEN: usize = 16;
/// Naive per-cell cost: 32-bit codepoint plus 8-bit style.
pub const NAIVE_BYTES_PER_CELL: u64 = 5;
pub const MAX_RUN: usize = u16::MAX as usize;
pub const MAX_PALETTE: usize = u16::MAX as usize;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum TszxError {
    #[error("bad magic")]
    BadMagic,
    #[error("unsupported version {0}")]
    BadVersion(u8),
    #[error("unsupported outer stage {0}")]
    UnsupportedOuter(u8),
    #[error("invalid geometry {width}x{height}")]
    Geometry { width: u16, height: u16 },
    #[error("frame {index} is {width}x{height}, stream is {expected_width}x{expected_height}")]
    GeometryMismatch {
        index: usize,
        width: u16,
        height: u16,
        expected_width: u16,
        expected_height: u16,
    },
    #[error("stream truncated in {0}")]
    Truncated(&'static str),
    #[error("palette has more than {MAX_PALETTE} entries")]
    PaletteOverflow,
    #[error("palette entry {0} is invalid or duplicated")]
    BadPaletteEntry(usize),
    #[error("frame {frame}: palette index {index} out of range")]
    BadPaletteIndex { frame: usize, index: u32 },
    #[error("frame {frame}: run of {len} at cell {at} crosses the frame boundary")]
    RunCrossesFrame { frame: usize, at: usize, len: usize },
    #[error("frame {frame}: non-canonical run length {len}")]
    NonCanonicalRun { frame: usize, len: usize },
    #[error("nonzero padding bits")]
    NonZeroPadding,
    #[error("{actions} actions for {frames} frames")]
    ActionCount { frames: usize, actions: usize },
    #[error("action record {0} is not a supported action")]
    BadAction(usize),
    #[error("{0} trailing bytes")]
    TrailingBytes(usize),
    #[error("decoder used out of order")]
    State,
}
