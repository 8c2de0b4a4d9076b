//! Seeded perturbations of prediction sets.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::dataset::{DatasetManifest, Hypothesis};
use crate::mask::{rle_decode, rle_encode, BinaryGrid, MaskTrack};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbKind {
    /// Translate masks by `dx` columns and `dy` rows; pixels leaving the grid are lost.
    Shift {
        dx: i32,
        dy: i32,
    },
    /// Square structuring element of the given radius.
    Dilate {
        radius: u32,
    },
    /// Square structuring element; outside the grid counts as background.
    Erode {
        radius: u32,
    },
    /// Remove the last `frames` frames of the support.
    TruncateInterval {
        frames: usize,
    },
    /// Add `N(0, sigma)` noise to scores, clamped to `[0, 1]`.
    ScoreNoise {
        sigma: f64,
    },
    /// Move to the next category id (wrapping).
    FlipCategory,
    Drop,
    /// Append an identical copy (same score) after all current hypotheses.
    Duplicate,
    /// Replace scores with a seeded permutation of the distinct grid
    /// `{1/(n+1), ..., n/(n+1)}` over the targeted hypotheses.
    Rescore,
}

/// Which hypotheses an operation touches.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    #[default]
    All,
    /// Positions in the hypothesis list as it stands when the op runs.
    Ids(Vec<usize>),
    /// A seeded random subset of `round(fraction * n)` hypotheses.
    Fraction(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationOp {
    #[serde(flatten)]
    pub kind: PerturbKind,
    #[serde(default)]
    pub target: Target,
}

impl PerturbationOp {
    pub fn all(kind: PerturbKind) -> Self {
        PerturbationOp {
            kind,
            target: Target::All,
        }
    }

    pub fn on(kind: PerturbKind, ids: Vec<usize>) -> Self {
        PerturbationOp {
            kind,
            target: Target::Ids(ids),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Perturbed {
    /// Re-numbered so `id` equals list position.
    pub hypotheses: Vec<Hypothesis>,
    pub warnings: Vec<String>,
}

fn check(op: &PerturbationOp, n: usize, manifest: &DatasetManifest) -> Result<(), SynthError> {
    let bad = |m: String| Err(SynthError::BadOp(m));
    let max_side = manifest
        .videos()
        .iter()
        .map(|v| v.height.max(v.width))
        .max()
        .unwrap_or(0);
    match &op.kind {
        PerturbKind::Dilate { radius } | PerturbKind::Erode { radius } if *radius > max_side => {
            return bad(format!("radius {radius} exceeds grid side {max_side}"));
        }
        PerturbKind::ScoreNoise { sigma } if !(sigma.is_finite() && *sigma >= 0.0) => {
            return bad(format!(
                "sigma must be finite and non-negative, got {sigma}"
            ));
        }
        PerturbKind::FlipCategory if manifest.categories().len() < 2 => {
            return bad("flip_category needs at least two categories".to_owned());
        }
        _ => {}
    }
    match &op.target {
        Target::Ids(ids) => {
            if let Some(i) = ids.iter().find(|&&i| i >= n) {
                return bad(format!("target id {i} out of range for {n} hypotheses"));
            }
        }
        Target::Fraction(f) if !(0.0..=1.0).contains(f) => {
            return bad(format!("target fraction {f} outside [0, 1]"));
        }
        _ => {}
    }
    Ok(())
}

fn map_frames(track: &MaskTrack, f: impl Fn(&BinaryGrid) -> BinaryGrid) -> MaskTrack {
    let (h, w) = track.size();
    let masks = track
        .masks()
        .iter()
        .map(|m| {
            m.as_ref()
                .map(|m| rle_encode(&f(&rle_decode(m))).expect("non-empty grid"))
        })
        .collect();
    MaskTrack::new(h, w, masks).expect("sizes preserved")
}

fn shift(g: &BinaryGrid, dx: i32, dy: i32) -> BinaryGrid {
    let mut out = BinaryGrid::new(g.height(), g.width());
    for c in 0..g.width() {
        for r in 0..g.height() {
            if g.get(r, c) {
                let (nr, nc) = (r as i64 + dy as i64, c as i64 + dx as i64);
                if (0..g.height() as i64).contains(&nr) && (0..g.width() as i64).contains(&nc) {
                    out.set(nr as u32, nc as u32, true);
                }
            }
        }
    }
    out
}

/// Dilation (`grow`) or erosion with a `(2r+1)²` square.
fn morph(g: &BinaryGrid, radius: u32, grow: bool) -> BinaryGrid {
    let (h, w) = (g.height() as i64, g.width() as i64);
    let r = radius as i64;
    let mut out = BinaryGrid::new(g.height(), g.width());
    for c in 0..w {
        for row in 0..h {
            let mut any = false;
            let mut all = true;
            for dc in -r..=r {
                for dr in -r..=r {
                    let (nr, nc) = (row + dr, c + dc);
                    let v =
                        (0..h).contains(&nr) && (0..w).contains(&nc) && g.get(nr as u32, nc as u32);
                    any |= v;
                    all &= v;
                }
            }
            out.set(row as u32, c as u32, if grow { any } else { all });
        }
    }
    out
}

/// Applies `ops` in order. Deterministic for a given `seed`.
pub fn perturb(
    hyps: &[Hypothesis],
    ops: &[PerturbationOp],
    seed: u64,
    manifest: &DatasetManifest,
) -> Result<Perturbed, SynthError> {
    let mut list: Vec<Hypothesis> = hyps.to_vec();
    let mut warnings = Vec::new();
    for (step, op) in ops.iter().enumerate() {
        check(op, list.len(), manifest)?;
        let mut rng =
            ChaCha8Rng::seed_from_u64(seed ^ (step as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut targets: Vec<usize> = match &op.target {
            Target::All => (0..list.len()).collect(),
            Target::Ids(ids) => ids.clone(),
            Target::Fraction(f) => {
                let mut all: Vec<usize> = (0..list.len()).collect();
                all.shuffle(&mut rng);
                all.truncate((f * list.len() as f64).round() as usize);
                all
            }
        };
        targets.sort_unstable();
        targets.dedup();

        let n_categories = manifest.categories().len() as u32;
        match &op.kind {
            PerturbKind::Drop => {
                let mut position = 0;
                list.retain(|_| {
                    position += 1;
                    targets.binary_search(&(position - 1)).is_err()
                });
            }
            PerturbKind::Duplicate => {
                let copies: Vec<Hypothesis> = targets.iter().map(|&i| list[i].clone()).collect();
                list.extend(copies);
            }
            PerturbKind::Rescore => {
                let n = targets.len() as u64;
                let mut grid: Vec<u64> = (1..=n).collect();
                grid.shuffle(&mut rng);
                for (&i, k) in targets.iter().zip(grid) {
                    list[i].score = k as f64 / (n + 1) as f64;
                }
            }
            PerturbKind::ScoreNoise { sigma } => {
                let noise = Normal::new(0.0, *sigma).expect("sigma validated");
                for &i in &targets {
                    list[i].score = (list[i].score + noise.sample(&mut rng)).clamp(0.0, 1.0);
                }
            }
            PerturbKind::FlipCategory => {
                for &i in &targets {
                    list[i].category_id = list[i].category_id % n_categories + 1;
                }
            }
            PerturbKind::TruncateInterval { frames } => {
                for &i in &targets {
                    let support: Vec<usize> = list[i].track.support().collect();
                    let keep = support.len().saturating_sub(*frames);
                    for &t in &support[keep..] {
                        list[i].track.set_frame(t, None).expect("clearing a frame");
                    }
                    if keep == 0 && !support.is_empty() {
                        warnings.push(format!(
                            "op {step}: hypothesis at position {i} truncated to an empty track"
                        ));
                    }
                }
            }
            PerturbKind::Shift { .. } | PerturbKind::Dilate { .. } | PerturbKind::Erode { .. } => {
                for &i in &targets {
                    let before = list[i].track.support().next().is_some();
                    let track = &list[i].track;
                    list[i].track = match op.kind {
                        PerturbKind::Shift { dx, dy } => map_frames(track, |g| shift(g, dx, dy)),
                        PerturbKind::Dilate { radius } => {
                            map_frames(track, |g| morph(g, radius, true))
                        }
                        PerturbKind::Erode { radius } => {
                            map_frames(track, |g| morph(g, radius, false))
                        }
                        _ => unreachable!(),
                    };
                    if before && list[i].track.support().next().is_none() {
                        warnings.push(format!(
                            "op {step}: hypothesis at position {i} left the grid; track is now empty"
                        ));
                    }
                }
            }
        }
    }
    for (id, h) in list.iter_mut().enumerate() {
        h.id = id;
    }
    Ok(Perturbed {
        hypotheses: list,
        warnings,
    })
}
