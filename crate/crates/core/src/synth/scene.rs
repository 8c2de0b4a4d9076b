//! Seeded synthetic scenes.

use std::ops::Range;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::SynthError;
use crate::dataset::schema::{
    AnnotationRecord, CategoryRecord, GroundTruthDocument, RleRecord, VideoRecord,
};
use crate::dataset::{DatasetManifest, Hypothesis, Scenario};
use crate::mask::{rle_encode, BinaryGrid, FrameMask, MaskTrack};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeFamily {
    #[default]
    Rectangle,
    Ellipse,
}

/// Parameters of a synthetic scene. Missing fields in a spec document take
/// the [`Default`] values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub seed: u64,
    pub videos: usize,
    pub frames: usize,
    pub height: u32,
    pub width: u32,
    pub instances_per_video: usize,
    pub categories: usize,
    /// Sounding-interval length range, inclusive.
    pub interval_min: usize,
    pub interval_max: usize,
    pub shape: ShapeFamily,
    /// The first `train_videos` videos are tagged train, the rest test.
    pub train_videos: usize,
    /// Centers every shape and makes all intervals share the middle frame,
    /// so instances in a video overlap.
    pub force_overlap: bool,
}

impl Default for SceneSpec {
    fn default() -> Self {
        SceneSpec {
            seed: 0,
            videos: 2,
            frames: 5,
            height: 16,
            width: 16,
            instances_per_video: 2,
            categories: 3,
            interval_min: 1,
            interval_max: 5,
            shape: ShapeFamily::Rectangle,
            train_videos: 0,
            force_overlap: false,
        }
    }
}

impl SceneSpec {
    pub fn validate(&self) -> Result<(), SynthError> {
        let fail = |m: &str| Err(SynthError::Infeasible(m.to_owned()));
        if self.videos == 0
            || self.frames == 0
            || self.instances_per_video == 0
            || self.categories == 0
        {
            return fail("videos, frames, instances_per_video and categories must be positive");
        }
        if self.height < 8 || self.width < 8 {
            return fail("grid must be at least 8x8");
        }
        if u32::try_from(self.height as u64 * self.width as u64).is_err() {
            return fail("grid has too many pixels");
        }
        if self.interval_min == 0
            || self.interval_min > self.interval_max
            || self.interval_max > self.frames
        {
            return fail(
                "sounding intervals must satisfy 1 <= interval_min <= interval_max <= frames",
            );
        }
        if self.train_videos > self.videos {
            return fail("train_videos exceeds videos");
        }
        Ok(())
    }
}

/// Where and how one ground-truth instance was drawn.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    pub track_id: u64,
    pub video_id: u64,
    pub category_id: u32,
    pub frames: Range<usize>,
    pub shape: ShapeFamily,
    /// Bounding box height and width of the shape.
    pub extent: (u32, u32),
    /// Top-left corner `(row, col)` per sounding frame.
    pub corners: Vec<(u32, u32)>,
}

#[derive(Debug, Clone)]
pub struct SyntheticScene {
    pub spec: SceneSpec,
    pub manifest: DatasetManifest,
    /// Exact copies of every ground-truth track with score 1.0, in track order.
    pub oracle: Vec<Hypothesis>,
    pub placements: Vec<Placement>,
}

impl SyntheticScene {
    pub fn ground_truth_json(&self) -> String {
        self.manifest.to_json()
    }

    pub fn oracle_json(&self) -> String {
        crate::dataset::predictions_to_json(&self.oracle)
    }
}

/// Rasterizes an axis-aligned rectangle or the ellipse inscribed in it.
///
/// Ellipse pixels are those whose centers lie inside the ellipse, tested in
/// doubled integer coordinates so there is no rounding.
pub fn rasterize(
    shape: ShapeFamily,
    grid: (u32, u32),
    corner: (u32, u32),
    extent: (u32, u32),
) -> BinaryGrid {
    let mut g = BinaryGrid::new(grid.0, grid.1);
    let (h, w) = (extent.0 as i64, extent.1 as i64);
    for r in corner.0..(corner.0 + extent.0).min(grid.0) {
        for c in corner.1..(corner.1 + extent.1).min(grid.1) {
            let inside = match shape {
                ShapeFamily::Rectangle => true,
                ShapeFamily::Ellipse => {
                    let dy = 2 * (r - corner.0) as i64 + 1 - h;
                    let dx = 2 * (c - corner.1) as i64 + 1 - w;
                    dx * dx * h * h + dy * dy * w * w <= w * w * h * h
                }
            };
            if inside {
                g.set(r, c, true);
            }
        }
    }
    g
}

fn category_name(id: u32) -> String {
    format!("category_{id}")
}

/// Generates a scene. Same spec, same bytes.
pub fn generate(spec: &SceneSpec) -> Result<SyntheticScene, SynthError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (gh, gw) = (spec.height, spec.width);
    let t_count = spec.frames;

    let categories: Vec<CategoryRecord> = (1..=spec.categories as u32)
        .map(|id| CategoryRecord {
            id,
            name: category_name(id),
            scenario: Scenario::ALL[(id as usize - 1) % Scenario::ALL.len()]
                .as_str()
                .to_owned(),
        })
        .collect();

    let mut videos = Vec::with_capacity(spec.videos);
    let mut annotations = Vec::new();
    let mut placements = Vec::new();
    let mut tracks = Vec::new();
    let mut next_track = 1u64;
    for v in 0..spec.videos {
        let video_id = v as u64 + 1;
        let name = format!("synthetic_{video_id:03}");
        videos.push(VideoRecord {
            id: video_id,
            name: name.clone(),
            width: gw,
            height: gh,
            frame_count: t_count,
            fps: 1.0,
            split: Some(
                if v < spec.train_videos {
                    "train"
                } else {
                    "test"
                }
                .to_owned(),
            ),
            scenario: None,
            file_names: (0..t_count).map(|t| format!("{name}/{t:05}.jpg")).collect(),
        });
        for _ in 0..spec.instances_per_video {
            let category_id = rng.gen_range(1..=spec.categories as u32);
            let len = rng.gen_range(spec.interval_min..=spec.interval_max);
            let start = if spec.force_overlap {
                // Every interval contains the middle frame.
                let mid = t_count / 2;
                let lo = (mid + 1).saturating_sub(len);
                let hi = mid.min(t_count - len);
                rng.gen_range(lo..=hi)
            } else {
                rng.gen_range(0..=t_count - len)
            };
            let extent = (rng.gen_range(2..=gh / 2), rng.gen_range(2..=gw / 2));
            let (max_r, max_c) = (gh - extent.0, gw - extent.1);
            let (origin, velocity) = if spec.force_overlap {
                ((max_r / 2, max_c / 2), (0i64, 0i64))
            } else {
                (
                    (rng.gen_range(0..=max_r), rng.gen_range(0..=max_c)),
                    (rng.gen_range(-1..=1), rng.gen_range(-1..=1)),
                )
            };
            let mut masks: Vec<Option<FrameMask>> = vec![None; t_count];
            let mut corners = Vec::with_capacity(len);
            for (step, t) in (start..start + len).enumerate() {
                let r = (origin.0 as i64 + velocity.0 * step as i64).clamp(0, max_r as i64) as u32;
                let c = (origin.1 as i64 + velocity.1 * step as i64).clamp(0, max_c as i64) as u32;
                corners.push((r, c));
                let grid = rasterize(spec.shape, (gh, gw), (r, c), extent);
                masks[t] = Some(rle_encode(&grid).expect("grid is non-empty"));
            }
            let track_id = next_track;
            next_track += 1;
            annotations.push(AnnotationRecord {
                id: track_id,
                video_id,
                category_id,
                segmentations: masks
                    .iter()
                    .map(|m| {
                        m.as_ref().map(|m| RleRecord {
                            size: [gh, gw],
                            counts: m.counts().to_vec(),
                        })
                    })
                    .collect(),
            });
            tracks.push((video_id, category_id, masks));
            placements.push(Placement {
                track_id,
                video_id,
                category_id,
                frames: start..start + len,
                shape: spec.shape,
                extent,
                corners,
            });
        }
    }

    let doc = GroundTruthDocument {
        info: json!({
            "description": "synthetic scene",
            "generator": "avis synth",
            "spec": spec,
        }),
        categories,
        videos,
        annotations,
    };
    let manifest = DatasetManifest::from_document(doc).map_err(SynthError::Schema)?;
    let oracle = tracks
        .into_iter()
        .enumerate()
        .map(|(id, (video_id, category_id, masks))| {
            Ok(Hypothesis {
                id,
                video_id,
                category_id,
                score: 1.0,
                track: MaskTrack::new(gh, gw, masks)?,
            })
        })
        .collect::<Result<Vec<_>, crate::mask::MaskError>>()
        .map_err(|e| SynthError::Infeasible(e.to_string()))?;

    Ok(SyntheticScene {
        spec: spec.clone(),
        manifest,
        oracle,
        placements,
    })
}
