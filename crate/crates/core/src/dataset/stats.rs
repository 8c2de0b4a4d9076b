use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::model::{DatasetManifest, Scenario, Split};

/// Summary counts of a manifest. Serializes with a fixed key order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub videos: usize,
    pub train_videos: usize,
    pub test_videos: usize,
    pub frames: u64,
    pub tracks: usize,
    /// Non-empty per-frame masks over all tracks.
    pub masks: u64,
    /// Mean of `frame_count / fps`; absent for an empty manifest.
    pub mean_duration_seconds: Option<f64>,
    /// One row per category, most frequent first (ties by ascending id).
    pub category_histogram: Vec<CategoryFrequency>,
    /// Category rows in id order.
    pub scenario_incidence: Vec<ScenarioIncidence>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategoryFrequency {
    pub category_id: u32,
    pub name: String,
    pub videos: usize,
    pub instances: usize,
}

/// Videos containing the category, broken down by video scenario.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScenarioIncidence {
    pub category_id: u32,
    pub name: String,
    pub music: usize,
    pub speaking: usize,
    pub animal: usize,
    pub machine: usize,
    pub panorama: usize,
}

impl ScenarioIncidence {
    fn slot(&mut self, s: Scenario) -> &mut usize {
        match s {
            Scenario::Music => &mut self.music,
            Scenario::Speaking => &mut self.speaking,
            Scenario::Animal => &mut self.animal,
            Scenario::Machine => &mut self.machine,
            Scenario::Panorama => &mut self.panorama,
        }
    }
}

/// Computes dataset totals, the per-category video histogram, and the
/// category × scenario incidence matrix.
///
/// A video's scenarios are its explicit `scenario` tag when present,
/// otherwise the scenarios of the categories annotated in it.
pub fn compute_stats(manifest: &DatasetManifest) -> DatasetStats {
    let videos = manifest.videos();
    let mut by_id: Vec<_> = videos.iter().collect();
    by_id.sort_by_key(|v| v.id);

    let mut categories_in_video: BTreeMap<u64, BTreeSet<u32>> = BTreeMap::new();
    let mut instances: BTreeMap<u32, usize> = BTreeMap::new();
    let mut masks = 0u64;
    for t in manifest.tracks() {
        categories_in_video
            .entry(t.video_id)
            .or_default()
            .insert(t.category_id);
        *instances.entry(t.category_id).or_default() += 1;
        masks += t.track.support().count() as u64;
    }

    let mean_duration_seconds = (!by_id.is_empty()).then(|| {
        let total: f64 = by_id.iter().map(|v| v.duration_seconds()).sum();
        total / by_id.len() as f64
    });

    let mut category_histogram: Vec<CategoryFrequency> = manifest
        .categories()
        .iter()
        .map(|c| CategoryFrequency {
            category_id: c.id,
            name: c.name.clone(),
            videos: categories_in_video
                .values()
                .filter(|set| set.contains(&c.id))
                .count(),
            instances: instances.get(&c.id).copied().unwrap_or(0),
        })
        .collect();
    category_histogram.sort_by(|a, b| {
        b.videos
            .cmp(&a.videos)
            .then(a.category_id.cmp(&b.category_id))
    });

    let mut cats: Vec<_> = manifest.categories().iter().collect();
    cats.sort_by_key(|c| c.id);
    let mut scenario_incidence: Vec<ScenarioIncidence> = cats
        .iter()
        .map(|c| ScenarioIncidence {
            category_id: c.id,
            name: c.name.clone(),
            music: 0,
            speaking: 0,
            animal: 0,
            machine: 0,
            panorama: 0,
        })
        .collect();
    for v in &by_id {
        let Some(present) = categories_in_video.get(&v.id) else {
            continue;
        };
        let scenarios: BTreeSet<Scenario> = match v.scenario {
            Some(s) => [s].into(),
            None => present
                .iter()
                .filter_map(|&id| manifest.category(id).map(|c| c.scenario))
                .collect(),
        };
        for row in scenario_incidence.iter_mut() {
            if present.contains(&row.category_id) {
                for &s in &scenarios {
                    *row.slot(s) += 1;
                }
            }
        }
    }

    DatasetStats {
        videos: videos.len(),
        train_videos: videos.iter().filter(|v| v.split == Split::Train).count(),
        test_videos: videos.iter().filter(|v| v.split == Split::Test).count(),
        frames: videos.iter().map(|v| v.frame_count as u64).sum(),
        tracks: manifest.tracks().len(),
        masks,
        mean_duration_seconds,
        category_histogram,
        scenario_incidence,
    }
}
