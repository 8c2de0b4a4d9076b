//! Parsing, validation, and canonical serialization of documents.

use std::collections::{BTreeSet, HashMap, HashSet};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::error::Category;

use super::model::{
    CategoryDef, DatasetManifest, Hypothesis, InstanceTrack, Scenario, Split, VideoMeta,
};
use super::schema::{
    AnnotationRecord, GroundTruthDocument, PredictionRecord, RleRecord, VideoRecord,
};
use super::{LoadError, Violation, ViolationKind};
use crate::mask::{FrameMask, MaskTrack};

fn parse_document<T: DeserializeOwned>(source: &str) -> Result<T, LoadError> {
    let mut de = serde_json::Deserializer::from_str(source);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|err| {
        let path = err.path().to_string();
        let inner = err.into_inner();
        match inner.classify() {
            Category::Syntax | Category::Eof | Category::Io => LoadError::Syntax {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            },
            Category::Data => LoadError::Schema {
                path,
                message: inner.to_string(),
            },
        }
    })?;
    de.end().map_err(|inner| LoadError::Syntax {
        line: inner.line(),
        column: inner.column(),
        message: inner.to_string(),
    })?;
    Ok(value)
}

/// Parses and fully validates a ground-truth document.
pub fn load_ground_truth(source: &str) -> Result<DatasetManifest, LoadError> {
    let doc: GroundTruthDocument = parse_document(source)?;
    DatasetManifest::from_document(doc).map_err(LoadError::Invalid)
}

/// Parses prediction records and validates them against `manifest`.
/// Tracks shorter than their video are padded with absent frames.
pub fn load_predictions(
    source: &str,
    manifest: &DatasetManifest,
) -> Result<Vec<Hypothesis>, LoadError> {
    let records: Vec<PredictionRecord> = parse_document(source)?;
    hypotheses_from_records(records, manifest).map_err(LoadError::Invalid)
}

struct Collector(Vec<Violation>);

impl Collector {
    fn push(&mut self, kind: ViolationKind, path: impl Into<String>, message: impl Into<String>) {
        self.0.push(Violation {
            kind,
            path: path.into(),
            message: message.into(),
        });
    }
}

/// Builds a track of exactly `video.frame_count` frames from wire masks.
/// Returns `None` after recording violations when any mask is malformed.
fn build_track(
    segmentations: &[Option<RleRecord>],
    video: &VideoRecord,
    path: &str,
    allow_short: bool,
    out: &mut Collector,
) -> Option<MaskTrack> {
    let n = segmentations.len();
    let t = video.frame_count;
    if n > t || (n < t && !allow_short) {
        out.push(
            ViolationKind::Geometry,
            format!("{path}.segmentations"),
            format!("{n} frames given, video {} has {t}", video.id),
        );
        return None;
    }
    let mut masks = Vec::with_capacity(t);
    let mut ok = true;
    for (i, seg) in segmentations.iter().enumerate() {
        let Some(rle) = seg else {
            masks.push(None);
            continue;
        };
        let [h, w] = rle.size;
        let here = format!("{path}.segmentations[{i}]");
        if (h, w) != (video.height, video.width) {
            out.push(
                ViolationKind::Geometry,
                format!("{here}.size"),
                format!(
                    "mask size [{h}, {w}] does not match video {} size [{}, {}]",
                    video.id, video.height, video.width
                ),
            );
            ok = false;
            continue;
        }
        match FrameMask::new(h, w, rle.counts.clone()) {
            Ok(m) => masks.push(Some(m)),
            Err(e) => {
                out.push(
                    ViolationKind::Geometry,
                    format!("{here}.counts"),
                    e.to_string(),
                );
                ok = false;
            }
        }
    }
    if !ok {
        return None;
    }
    // Sizes were checked above, so construction cannot fail.
    MaskTrack::new(video.height, video.width, masks)
        .ok()
        .map(|track| track.padded(t))
}

impl DatasetManifest {
    /// Validates a parsed document, reporting every violation found.
    pub fn from_document(doc: GroundTruthDocument) -> Result<DatasetManifest, Vec<Violation>> {
        let mut out = Collector(Vec::new());

        let mut categories = Vec::with_capacity(doc.categories.len());
        let mut seen = HashSet::new();
        for (i, c) in doc.categories.iter().enumerate() {
            let path = format!("categories[{i}]");
            if !seen.insert(c.id) {
                out.push(
                    ViolationKind::Value,
                    format!("{path}.id"),
                    format!("duplicate category id {}", c.id),
                );
            }
            match c.scenario.parse::<Scenario>() {
                Ok(scenario) => categories.push(CategoryDef {
                    id: c.id,
                    name: c.name.clone(),
                    scenario,
                }),
                Err(e) => out.push(ViolationKind::Value, format!("{path}.scenario"), e),
            }
        }
        let ids: BTreeSet<u32> = doc.categories.iter().map(|c| c.id).collect();
        let n = ids.len() as u32;
        if ids.iter().copied().ne(1..=n) {
            let missing: Vec<String> = (1..=ids.last().copied().unwrap_or(0))
                .filter(|id| !ids.contains(id))
                .map(|id| id.to_string())
                .collect();
            out.push(
                ViolationKind::Value,
                "categories",
                format!(
                    "category ids must be contiguous from 1; missing {}",
                    missing.join(", ")
                ),
            );
        }

        let mut videos = Vec::with_capacity(doc.videos.len());
        let mut video_records: HashMap<u64, &VideoRecord> = HashMap::new();
        for (i, v) in doc.videos.iter().enumerate() {
            let path = format!("videos[{i}]");
            if video_records.insert(v.id, v).is_some() {
                out.push(
                    ViolationKind::Value,
                    format!("{path}.id"),
                    format!("duplicate video id {}", v.id),
                );
            }
            if v.width == 0 || v.height == 0 {
                out.push(
                    ViolationKind::Geometry,
                    path.clone(),
                    format!("frame size {}x{} is empty", v.height, v.width),
                );
            }
            if !(v.fps.is_finite() && v.fps > 0.0) {
                out.push(
                    ViolationKind::Value,
                    format!("{path}.fps"),
                    format!("fps must be positive, got {}", v.fps),
                );
            }
            if v.frame_count != v.file_names.len() {
                out.push(
                    ViolationKind::Value,
                    format!("{path}.file_names"),
                    format!(
                        "frame_count {} does not match {} file names",
                        v.frame_count,
                        v.file_names.len()
                    ),
                );
            }
            let split = match v.split.as_deref().map(str::parse::<Split>).transpose() {
                Ok(s) => s.unwrap_or_default(),
                Err(e) => {
                    out.push(ViolationKind::Value, format!("{path}.split"), e);
                    Split::default()
                }
            };
            let scenario = match v
                .scenario
                .as_deref()
                .map(str::parse::<Scenario>)
                .transpose()
            {
                Ok(s) => s,
                Err(e) => {
                    out.push(ViolationKind::Value, format!("{path}.scenario"), e);
                    None
                }
            };
            videos.push(VideoMeta {
                id: v.id,
                name: v.name.clone(),
                width: v.width,
                height: v.height,
                frame_count: v.frame_count,
                fps: v.fps,
                split,
                scenario,
                file_names: v.file_names.clone(),
            });
        }

        let mut tracks = Vec::with_capacity(doc.annotations.len());
        let mut seen = HashSet::new();
        for (i, a) in doc.annotations.iter().enumerate() {
            let path = format!("annotations[{i}]");
            if !seen.insert(a.id) {
                out.push(
                    ViolationKind::Value,
                    format!("{path}.id"),
                    format!("duplicate annotation id {}", a.id),
                );
            }
            if !ids.contains(&a.category_id) {
                out.push(
                    ViolationKind::Referential,
                    format!("{path}.category_id"),
                    format!("category_id {} does not exist", a.category_id),
                );
            }
            let Some(video) = video_records.get(&a.video_id) else {
                out.push(
                    ViolationKind::Referential,
                    format!("{path}.video_id"),
                    format!("video_id {} does not exist", a.video_id),
                );
                continue;
            };
            if let Some(track) = build_track(&a.segmentations, video, &path, false, &mut out) {
                if track.support().next().is_none() {
                    out.push(
                        ViolationKind::Value,
                        format!("{path}.segmentations"),
                        "ground-truth track has no foreground in any frame",
                    );
                }
                tracks.push(InstanceTrack {
                    id: a.id,
                    video_id: a.video_id,
                    category_id: a.category_id,
                    track,
                });
            }
        }

        if !out.0.is_empty() {
            return Err(out.0);
        }
        Ok(DatasetManifest::assemble(
            doc.info, categories, videos, tracks,
        ))
    }

    /// Canonical wire document for this manifest.
    pub fn to_document(&self) -> GroundTruthDocument {
        GroundTruthDocument {
            info: self.info.clone(),
            categories: self
                .categories
                .iter()
                .map(|c| super::schema::CategoryRecord {
                    id: c.id,
                    name: c.name.clone(),
                    scenario: c.scenario.as_str().to_owned(),
                })
                .collect(),
            videos: self
                .videos
                .iter()
                .map(|v| VideoRecord {
                    id: v.id,
                    name: v.name.clone(),
                    width: v.width,
                    height: v.height,
                    frame_count: v.frame_count,
                    fps: v.fps,
                    split: Some(v.split.as_str().to_owned()),
                    scenario: v.scenario.map(|s| s.as_str().to_owned()),
                    file_names: v.file_names.clone(),
                })
                .collect(),
            annotations: self
                .tracks
                .iter()
                .map(|t| AnnotationRecord {
                    id: t.id,
                    video_id: t.video_id,
                    category_id: t.category_id,
                    segmentations: track_to_records(&t.track),
                })
                .collect(),
        }
    }

    /// Canonical JSON serialization; byte-stable for equal manifests.
    pub fn to_json(&self) -> String {
        to_compact_json(&self.to_document())
    }
}

pub(crate) fn track_to_records(track: &MaskTrack) -> Vec<Option<RleRecord>> {
    track
        .masks()
        .iter()
        .map(|m| {
            m.as_ref().map(|m| RleRecord {
                size: [m.height(), m.width()],
                counts: m.counts().to_vec(),
            })
        })
        .collect()
}

fn to_compact_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("document types always serialize");
    s.push('\n');
    s
}

fn hypotheses_from_records(
    records: Vec<PredictionRecord>,
    manifest: &DatasetManifest,
) -> Result<Vec<Hypothesis>, Vec<Violation>> {
    let mut out = Collector(Vec::new());
    let mut hyps = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        let path = format!("[{i}]");
        if !(r.score.is_finite() && (0.0..=1.0).contains(&r.score)) {
            out.push(
                ViolationKind::Value,
                format!("{path}.score"),
                format!("score outside [0,1]: {}", r.score),
            );
        }
        if manifest.category(r.category_id).is_none() {
            out.push(
                ViolationKind::Referential,
                format!("{path}.category_id"),
                format!("unknown category_id {}", r.category_id),
            );
        }
        let Some(video) = manifest.video(r.video_id) else {
            out.push(
                ViolationKind::Referential,
                format!("{path}.video_id"),
                format!("video_id {} does not exist", r.video_id),
            );
            continue;
        };
        let record = VideoRecord {
            id: video.id,
            name: String::new(),
            width: video.width,
            height: video.height,
            frame_count: video.frame_count,
            fps: video.fps,
            split: None,
            scenario: None,
            file_names: Vec::new(),
        };
        if let Some(track) = build_track(&r.segmentations, &record, &path, true, &mut out) {
            hyps.push(Hypothesis {
                id: i,
                video_id: r.video_id,
                category_id: r.category_id,
                score: r.score,
                track,
            });
        }
    }
    if out.0.is_empty() {
        Ok(hyps)
    } else {
        Err(out.0)
    }
}

pub fn hypotheses_to_records(hyps: &[Hypothesis]) -> Vec<PredictionRecord> {
    hyps.iter()
        .map(|h| PredictionRecord {
            video_id: h.video_id,
            category_id: h.category_id,
            score: h.score,
            segmentations: track_to_records(&h.track),
        })
        .collect()
}

/// Canonical prediction document. Hypotheses are written in slice order,
/// which becomes their id order when loaded back.
pub fn predictions_to_json(hyps: &[Hypothesis]) -> String {
    to_compact_json(&hypotheses_to_records(hyps))
}
