//! Binary masks, the run-length codec, and track-level overlap.

mod rle;
mod track;

pub use rle::{rle_decode, rle_encode, BinaryGrid, FrameMask};
pub use track::{overlap_counts, spatiotemporal_iou, MaskTrack, OverlapCounts};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaskError {
    #[error("run lengths sum to {total}, expected {expected} (height x width)")]
    Codec { total: u64, expected: u64 },
    #[error("empty grid ({height}x{width})")]
    EmptyGrid { height: u32, width: u32 },
    #[error("rows have differing lengths")]
    Ragged,
    #[error("mask size {right:?} does not match {left:?}")]
    SizeMismatch { left: (u32, u32), right: (u32, u32) },
    #[error("track lengths differ: {left} vs {right} frames")]
    LengthMismatch { left: usize, right: usize },
}
