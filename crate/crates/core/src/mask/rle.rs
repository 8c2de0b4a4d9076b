//! Run-length encoded binary masks.
//!
//! Pixels are enumerated column-major: pixel `(row, col)` sits at linear
//! index `row + height * col`. Runs alternate background/foreground and
//! always start with a (possibly empty) background run.

use std::ops::Range;

use super::MaskError;

/// Dense binary image, column-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryGrid {
    height: u32,
    width: u32,
    pixels: Vec<bool>,
}

impl BinaryGrid {
    pub fn new(height: u32, width: u32) -> Self {
        BinaryGrid {
            height,
            width,
            pixels: vec![false; height as usize * width as usize],
        }
    }

    /// Wraps an existing column-major pixel buffer.
    pub fn from_pixels(height: u32, width: u32, pixels: Vec<bool>) -> Result<Self, MaskError> {
        let expected = height as u64 * width as u64;
        if pixels.len() as u64 != expected {
            return Err(MaskError::Codec {
                total: pixels.len() as u64,
                expected,
            });
        }
        Ok(BinaryGrid {
            height,
            width,
            pixels,
        })
    }

    /// Builds a grid from row-major rows, as written in source code.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self, MaskError> {
        let height = rows.len() as u32;
        let width = rows.first().map_or(0, |r| r.as_ref().len()) as u32;
        if rows.iter().any(|r| r.as_ref().len() as u32 != width) {
            return Err(MaskError::Ragged);
        }
        let mut grid = BinaryGrid::new(height, width);
        for (row, values) in rows.iter().enumerate() {
            for (col, &v) in values.as_ref().iter().enumerate() {
                grid.set(row as u32, col as u32, v != 0);
            }
        }
        Ok(grid)
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn pixels(&self) -> &[bool] {
        &self.pixels
    }

    fn index(&self, row: u32, col: u32) -> usize {
        debug_assert!(row < self.height && col < self.width);
        row as usize + self.height as usize * col as usize
    }

    pub fn get(&self, row: u32, col: u32) -> bool {
        self.pixels[self.index(row, col)]
    }

    pub fn set(&mut self, row: u32, col: u32, value: bool) {
        let i = self.index(row, col);
        self.pixels[i] = value;
    }

    pub fn area(&self) -> u64 {
        self.pixels.iter().filter(|&&p| p).count() as u64
    }
}

/// Run-length encoded binary mask of one frame.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrameMask {
    height: u32,
    width: u32,
    counts: Vec<u32>,
}

impl FrameMask {
    /// Validates that the runs tile the frame exactly. Interior zero runs are
    /// accepted here; see [`FrameMask::canonical`].
    pub fn new(height: u32, width: u32, counts: Vec<u32>) -> Result<Self, MaskError> {
        if height == 0 || width == 0 {
            return Err(MaskError::EmptyGrid { height, width });
        }
        let expected = height as u64 * width as u64;
        let total: u64 = counts.iter().map(|&c| c as u64).sum();
        if total != expected {
            return Err(MaskError::Codec { total, expected });
        }
        Ok(FrameMask {
            height,
            width,
            counts,
        })
    }

    /// All-background mask.
    pub fn empty(height: u32, width: u32) -> Result<Self, MaskError> {
        let n = height as u64 * width as u64;
        let n = u32::try_from(n).map_err(|_| MaskError::EmptyGrid { height, width })?;
        FrameMask::new(height, width, vec![n])
    }

    /// Builds a mask from sorted, non-overlapping foreground index ranges.
    pub(crate) fn from_ranges(height: u32, width: u32, ranges: &[Range<u64>]) -> Self {
        let n = height as u64 * width as u64;
        let mut counts = Vec::with_capacity(ranges.len() * 2 + 1);
        let mut cursor = 0u64;
        for r in ranges.iter().filter(|r| !r.is_empty()) {
            debug_assert!(r.start >= cursor && r.end <= n);
            if r.start == cursor && !counts.is_empty() {
                // Adjacent to the previous foreground run: extend it.
                *counts.last_mut().unwrap() += (r.end - r.start) as u32;
            } else {
                counts.push((r.start - cursor) as u32);
                counts.push((r.end - r.start) as u32);
            }
            cursor = r.end;
        }
        if cursor < n || counts.is_empty() {
            counts.push((n - cursor) as u32);
        }
        FrameMask {
            height,
            width,
            counts,
        }
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn size(&self) -> (u32, u32) {
        (self.height, self.width)
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    /// True when only the leading run is zero and no trailing zero run is present.
    pub fn is_canonical(&self) -> bool {
        self.counts.iter().skip(1).all(|&c| c > 0)
    }

    /// Equivalent mask with zero-length interior runs merged away.
    pub fn canonical(&self) -> FrameMask {
        let ranges: Vec<_> = self.foreground_runs().collect();
        FrameMask::from_ranges(self.height, self.width, &ranges)
    }

    /// Half-open linear index ranges of the foreground runs, in order.
    pub fn foreground_runs(&self) -> impl Iterator<Item = Range<u64>> + '_ {
        let mut cursor = 0u64;
        self.counts.iter().enumerate().filter_map(move |(i, &c)| {
            let start = cursor;
            cursor += c as u64;
            (i % 2 == 1 && c > 0).then_some(start..cursor)
        })
    }

    /// Number of foreground pixels.
    pub fn area(&self) -> u64 {
        self.counts
            .iter()
            .skip(1)
            .step_by(2)
            .map(|&c| c as u64)
            .sum()
    }

    pub fn is_empty(&self) -> bool {
        self.area() == 0
    }

    fn check_same_size(&self, other: &FrameMask) -> Result<(), MaskError> {
        if self.size() != other.size() {
            return Err(MaskError::SizeMismatch {
                left: self.size(),
                right: other.size(),
            });
        }
        Ok(())
    }

    /// `|self ∩ other|`, by a merge scan over both run lists.
    pub fn intersection_area(&self, other: &FrameMask) -> Result<u64, MaskError> {
        self.check_same_size(other)?;
        let mut a = self.foreground_runs().peekable();
        let mut b = other.foreground_runs().peekable();
        let mut total = 0u64;
        while let (Some(ra), Some(rb)) = (a.peek(), b.peek()) {
            let lo = ra.start.max(rb.start);
            let hi = ra.end.min(rb.end);
            if hi > lo {
                total += hi - lo;
            }
            if ra.end <= rb.end {
                a.next();
            } else {
                b.next();
            }
        }
        Ok(total)
    }

    /// `|self ∪ other|`.
    pub fn union_area(&self, other: &FrameMask) -> Result<u64, MaskError> {
        let inter = self.intersection_area(other)?;
        Ok(self.area() + other.area() - inter)
    }

    /// Pixelwise union of several same-sized masks.
    pub fn union_all<'a, I>(height: u32, width: u32, masks: I) -> Result<FrameMask, MaskError>
    where
        I: IntoIterator<Item = &'a FrameMask>,
    {
        let mut ranges = Vec::new();
        for m in masks {
            if m.size() != (height, width) {
                return Err(MaskError::SizeMismatch {
                    left: (height, width),
                    right: m.size(),
                });
            }
            ranges.extend(m.foreground_runs());
        }
        ranges.sort_by_key(|r| r.start);
        let mut merged: Vec<Range<u64>> = Vec::with_capacity(ranges.len());
        for r in ranges {
            match merged.last_mut() {
                Some(last) if r.start <= last.end => last.end = last.end.max(r.end),
                _ => merged.push(r),
            }
        }
        Ok(FrameMask::from_ranges(height, width, &merged))
    }
}

/// Expands a mask into a dense grid.
pub fn rle_decode(mask: &FrameMask) -> BinaryGrid {
    let mut pixels = Vec::with_capacity(mask.height as usize * mask.width as usize);
    for (i, &c) in mask.counts.iter().enumerate() {
        let value = i % 2 == 1;
        pixels.extend(std::iter::repeat_n(value, c as usize));
    }
    BinaryGrid {
        height: mask.height,
        width: mask.width,
        pixels,
    }
}

/// Compresses a dense grid into a canonical mask.
pub fn rle_encode(grid: &BinaryGrid) -> Result<FrameMask, MaskError> {
    if grid.pixels.is_empty() {
        return Err(MaskError::EmptyGrid {
            height: grid.height,
            width: grid.width,
        });
    }
    let mut counts = Vec::new();
    let mut current = false;
    let mut run = 0u32;
    for &p in &grid.pixels {
        if p != current {
            counts.push(run);
            run = 0;
            current = p;
        }
        run += 1;
    }
    counts.push(run);
    Ok(FrameMask {
        height: grid.height,
        width: grid.width,
        counts,
    })
}
