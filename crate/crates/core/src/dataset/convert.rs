//! Derivation of saliency (binary) and semantic (per-category) targets
//! from instance annotations.

use super::model::DatasetManifest;
use super::DatasetError;
use crate::mask::{rle_encode, BinaryGrid, FrameMask};

/// Dense per-pixel category map, column-major; 0 is background.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelMap {
    height: u32,
    width: u32,
    labels: Vec<u32>,
}

impl LabelMap {
    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    pub fn get(&self, row: u32, col: u32) -> u32 {
        self.labels[row as usize + self.height as usize * col as usize]
    }

    /// Pixel count per category id, background excluded, ascending id.
    pub fn histogram(&self) -> Vec<(u32, u64)> {
        let mut counts = std::collections::BTreeMap::new();
        for &l in self.labels.iter().filter(|&&l| l != 0) {
            *counts.entry(l).or_insert(0u64) += 1;
        }
        counts.into_iter().collect()
    }

    /// One canonical mask per category present, ascending id.
    pub fn category_masks(&self) -> Vec<(u32, FrameMask)> {
        self.histogram()
            .into_iter()
            .map(|(id, _)| {
                let pixels = self.labels.iter().map(|&l| l == id).collect();
                let grid = BinaryGrid::from_pixels(self.height, self.width, pixels)
                    .expect("label map dimensions are consistent");
                (id, rle_encode(&grid).expect("label map is non-empty"))
            })
            .collect()
    }
}

/// Binary sounding-object mask per frame: the union of every instance
/// present at that frame. Frames with no instance get an all-background mask.
pub fn to_avsd(manifest: &DatasetManifest, video_id: u64) -> Result<Vec<FrameMask>, DatasetError> {
    let video = manifest
        .video(video_id)
        .ok_or(DatasetError::UnknownVideo(video_id))?;
    let tracks: Vec<_> = manifest.tracks_in_video(video_id).collect();
    (0..video.frame_count)
        .map(|t| {
            let present = tracks.iter().filter_map(|tr| tr.track.frame(t));
            FrameMask::union_all(video.height, video.width, present).map_err(DatasetError::from)
        })
        .collect()
}

/// Category label per pixel per frame. Where instances overlap, the one
/// with the higher track id wins, independent of document order.
pub fn to_avss(manifest: &DatasetManifest, video_id: u64) -> Result<Vec<LabelMap>, DatasetError> {
    let video = manifest
        .video(video_id)
        .ok_or(DatasetError::UnknownVideo(video_id))?;
    let mut tracks: Vec<_> = manifest.tracks_in_video(video_id).collect();
    tracks.sort_by_key(|t| t.id);
    let n = video.height as usize * video.width as usize;
    let maps = (0..video.frame_count)
        .map(|t| {
            let mut labels = vec![0u32; n];
            for tr in &tracks {
                if let Some(m) = tr.track.frame(t) {
                    for run in m.foreground_runs() {
                        labels[run.start as usize..run.end as usize].fill(tr.category_id);
                    }
                }
            }
            LabelMap {
                height: video.height,
                width: video.width,
                labels,
            }
        })
        .collect();
    Ok(maps)
}
