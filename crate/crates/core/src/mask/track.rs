//! Per-frame mask sequences and the spatiotemporal IoU kernel.

use std::ops::RangeInclusive;

use super::{FrameMask, MaskError};
use crate::scalar::Scalar;

/// Optional mask per frame of a `frame_count`-long video.
///
/// An absent entry is an empty mask. Explicit all-background masks are
/// normalized to absent on construction, so `masks[t].is_some()` holds
/// exactly on the support.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MaskTrack {
    height: u32,
    width: u32,
    masks: Vec<Option<FrameMask>>,
}

impl MaskTrack {
    pub fn new(
        height: u32,
        width: u32,
        masks: Vec<Option<FrameMask>>,
    ) -> Result<MaskTrack, MaskError> {
        let mut normalized = Vec::with_capacity(masks.len());
        for m in masks {
            match m {
                Some(m) if m.size() != (height, width) => {
                    return Err(MaskError::SizeMismatch {
                        left: (height, width),
                        right: m.size(),
                    })
                }
                Some(m) if m.is_empty() => normalized.push(None),
                Some(m) => normalized.push(Some(m.canonical())),
                None => normalized.push(None),
            }
        }
        Ok(MaskTrack {
            height,
            width,
            masks: normalized,
        })
    }

    /// Track with no foreground anywhere.
    pub fn absent(height: u32, width: u32, frame_count: usize) -> MaskTrack {
        MaskTrack {
            height,
            width,
            masks: vec![None; frame_count],
        }
    }

    pub fn frame_count(&self) -> usize {
        self.masks.len()
    }

    pub fn size(&self) -> (u32, u32) {
        (self.height, self.width)
    }

    pub fn masks(&self) -> &[Option<FrameMask>] {
        &self.masks
    }

    pub fn frame(&self, t: usize) -> Option<&FrameMask> {
        self.masks.get(t).and_then(Option::as_ref)
    }

    /// Frames carrying foreground.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.masks
            .iter()
            .enumerate()
            .filter_map(|(t, m)| m.as_ref().map(|_| t))
    }

    /// Contiguous hull of the support: the sounding interval.
    pub fn interval(&self) -> Option<RangeInclusive<usize>> {
        let first = self.support().next()?;
        let last = self.support().last()?;
        Some(first..=last)
    }

    pub fn total_area(&self) -> u64 {
        self.masks.iter().flatten().map(FrameMask::area).sum()
    }

    /// Pads with absent frames up to `frame_count`. No-op when already that long.
    pub fn padded(mut self, frame_count: usize) -> MaskTrack {
        if self.masks.len() < frame_count {
            self.masks.resize(frame_count, None);
        }
        self
    }

    /// Replaces frame `t`; all-background masks are stored as absent.
    pub fn set_frame(&mut self, t: usize, mask: Option<FrameMask>) -> Result<(), MaskError> {
        if let Some(m) = &mask {
            if m.size() != self.size() {
                return Err(MaskError::SizeMismatch {
                    left: self.size(),
                    right: m.size(),
                });
            }
        }
        self.masks[t] = mask.filter(|m| !m.is_empty()).map(|m| m.canonical());
        Ok(())
    }
}

/// Summed per-frame intersection and union pixel counts of two tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct OverlapCounts {
    pub intersection: u64,
    pub union: u64,
}

impl OverlapCounts {
    /// `intersection / union`; zero when the union is empty.
    pub fn ratio<S: Scalar>(&self) -> S {
        if self.union == 0 {
            S::zero()
        } else {
            S::from_ratio(self.intersection, self.union)
        }
    }
}

/// Sums `|a_t ∩ b_t|` and `|a_t ∪ b_t|` over every frame of both tracks.
pub fn overlap_counts(a: &MaskTrack, b: &MaskTrack) -> Result<OverlapCounts, MaskError> {
    if a.frame_count() != b.frame_count() {
        return Err(MaskError::LengthMismatch {
            left: a.frame_count(),
            right: b.frame_count(),
        });
    }
    if a.size() != b.size() {
        return Err(MaskError::SizeMismatch {
            left: a.size(),
            right: b.size(),
        });
    }
    let mut counts = OverlapCounts::default();
    for (ma, mb) in a.masks.iter().zip(&b.masks) {
        match (ma, mb) {
            (Some(ma), Some(mb)) => {
                let inter = ma.intersection_area(mb)?;
                counts.intersection += inter;
                counts.union += ma.area() + mb.area() - inter;
            }
            (Some(m), None) | (None, Some(m)) => counts.union += m.area(),
            (None, None) => {}
        }
    }
    Ok(counts)
}

/// Spatiotemporal IoU of a ground-truth and a predicted track.
///
/// Both tracks span the full video; frames absent in either are empty masks.
/// Returns zero when both tracks are empty everywhere.
pub fn spatiotemporal_iou<S: Scalar>(gt: &MaskTrack, hyp: &MaskTrack) -> Result<S, MaskError> {
    overlap_counts(gt, hyp).map(|c| c.ratio())
}
