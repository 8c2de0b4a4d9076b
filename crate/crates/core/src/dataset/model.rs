use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use serde_json::Value;

use crate::mask::MaskTrack;

/// Video grouping by primary sound source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Music,
    Speaking,
    Animal,
    Machine,
    Panorama,
}

impl Scenario {
    pub const ALL: [Scenario; 5] = [
        Scenario::Music,
        Scenario::Speaking,
        Scenario::Animal,
        Scenario::Machine,
        Scenario::Panorama,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Music => "music",
            Scenario::Speaking => "speaking",
            Scenario::Animal => "animal",
            Scenario::Machine => "machine",
            Scenario::Panorama => "panorama",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str() == s)
            .ok_or_else(|| format!("unknown scenario {s:?}"))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    #[default]
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoryDef {
    pub id: u32,
    pub name: String,
    pub scenario: Scenario,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VideoMeta {
    pub id: u64,
    pub name: String,
    pub width: u32,
    pub height: u32,
    pub frame_count: usize,
    pub fps: f64,
    pub split: Split,
    /// Optional explicit scenario tag; see [`crate::dataset::compute_stats`].
    pub scenario: Option<Scenario>,
    pub file_names: Vec<String>,
}

impl VideoMeta {
    pub fn duration_seconds(&self) -> f64 {
        self.frame_count as f64 / self.fps
    }
}

/// Ground-truth sounding instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceTrack {
    pub id: u64,
    pub video_id: u64,
    pub category_id: u32,
    pub track: MaskTrack,
}

/// Predicted instance. `id` is the record's position in its prediction
/// document and is the tie-breaker wherever scores are equal.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypothesis {
    pub id: usize,
    pub video_id: u64,
    pub category_id: u32,
    pub score: f64,
    pub track: MaskTrack,
}

/// A validated ground-truth document. Construct with
/// [`crate::dataset::load_ground_truth`] or [`DatasetManifest::from_document`].
#[derive(Debug, Clone)]
pub struct DatasetManifest {
    pub(crate) info: Value,
    pub(crate) categories: Vec<CategoryDef>,
    pub(crate) videos: Vec<VideoMeta>,
    pub(crate) tracks: Vec<InstanceTrack>,
    pub(crate) video_index: HashMap<u64, usize>,
    pub(crate) category_index: HashMap<u32, usize>,
}

impl DatasetManifest {
    pub(crate) fn assemble(
        info: Value,
        categories: Vec<CategoryDef>,
        videos: Vec<VideoMeta>,
        tracks: Vec<InstanceTrack>,
    ) -> DatasetManifest {
        let video_index = videos.iter().enumerate().map(|(i, v)| (v.id, i)).collect();
        let category_index = categories
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id, i))
            .collect();
        DatasetManifest {
            info,
            categories,
            videos,
            tracks,
            video_index,
            category_index,
        }
    }

    pub fn info(&self) -> &Value {
        &self.info
    }

    pub fn categories(&self) -> &[CategoryDef] {
        &self.categories
    }

    pub fn videos(&self) -> &[VideoMeta] {
        &self.videos
    }

    pub fn tracks(&self) -> &[InstanceTrack] {
        &self.tracks
    }

    pub fn video(&self, id: u64) -> Option<&VideoMeta> {
        self.video_index.get(&id).map(|&i| &self.videos[i])
    }

    pub fn category(&self, id: u32) -> Option<&CategoryDef> {
        self.category_index.get(&id).map(|&i| &self.categories[i])
    }

    pub fn tracks_in_video(&self, video_id: u64) -> impl Iterator<Item = &InstanceTrack> {
        self.tracks.iter().filter(move |t| t.video_id == video_id)
    }
}
