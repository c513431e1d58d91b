//! Resource matching, RER, fine-grained metrics, and per-page reports.

use serde::{Deserialize, Serialize};

use crate::color::ciede2000;
use crate::error::{Error, Result};
use crate::raster::{self, mean_color_lab, EmbeddingVector, RasterImage};
use crate::resource::{normalize_url, ResourceEntry, ResourceList};

/// One-to-one pairing of reference entries with generated entries.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchResult {
    /// `(reference index, generated index)` in selection order.
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_reference: Vec<usize>,
    pub unmatched_generated: Vec<usize>,
}

impl MatchResult {
    /// Checks the one-to-one and coverage invariants against list sizes.
    pub fn is_consistent(&self, reference_len: usize, generated_len: usize) -> bool {
        let mut seen_ref = vec![0u8; reference_len];
        let mut seen_gen = vec![0u8; generated_len];
        for &(r, g) in &self.pairs {
            if r >= reference_len || g >= generated_len {
                return false;
            }
            seen_ref[r] += 1;
            seen_gen[g] += 1;
        }
        for &r in &self.unmatched_reference {
            if r >= reference_len {
                return false;
            }
            seen_ref[r] += 1;
        }
        for &g in &self.unmatched_generated {
            if g >= generated_len {
                return false;
            }
            seen_gen[g] += 1;
        }
        seen_ref.iter().chain(&seen_gen).all(|&c| c == 1)
    }
}

fn match_key(entry: &ResourceEntry, origin: &str) -> String {
    normalize_url(&entry.url, origin).unwrap_or_else(|_| entry.url.trim().to_string())
}

/// Pairs entries that point at the same normalized URL with a compatible kind.
///
/// Candidates are taken greedily by ascending position offset (measured in the
/// reference page's dimensions); ties go to the lower reference index, then
/// the lower generated index.
pub fn match_resources(reference: &ResourceList, generated: &ResourceList) -> MatchResult {
    let ref_keys: Vec<String> = reference.entries.iter().map(|e| match_key(e, &reference.origin)).collect();
    let gen_keys: Vec<String> = generated.entries.iter().map(|e| match_key(e, &generated.origin)).collect();

    let mut candidates = Vec::new();
    for (i, r) in reference.entries.iter().enumerate() {
        for (j, g) in generated.entries.iter().enumerate() {
            if ref_keys[i] == gen_keys[j] && r.kind.compatible_with(g.kind) {
                let offset = position_offset(r, g, reference.width, reference.height);
                candidates.push((offset, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut ref_used = vec![false; reference.len()];
    let mut gen_used = vec![false; generated.len()];
    let mut pairs = Vec::new();
    for (_, i, j) in candidates {
        if !ref_used[i] && !gen_used[j] {
            ref_used[i] = true;
            gen_used[j] = true;
            pairs.push((i, j));
        }
    }
    let unused = |used: &[bool]| used.iter().enumerate().filter(|(_, &u)| !u).map(|(i, _)| i).collect();
    MatchResult {
        pairs,
        unmatched_reference: unused(&ref_used),
        unmatched_generated: unused(&gen_used),
    }
}

/// Fraction of reference resources that were matched; `None` for an empty reference.
pub fn rer(matching: &MatchResult, reference_size: usize) -> Option<f64> {
    (reference_size > 0).then(|| matching.pairs.len() as f64 / reference_size as f64)
}

/// `max(|dx| / W, |dy| / H)` over bounding-box centers.
pub fn position_offset(reference: &ResourceEntry, generated: &ResourceEntry, width: f64, height: f64) -> f64 {
    let (xp, yp) = reference.position.center();
    let (xq, yq) = generated.position.center();
    ((xp - xq).abs() / width).max((yp - yq).abs() / height)
}

/// `|A_p - A_q| / A_p`; `None` when the reference box has no area.
pub fn area_difference(reference: &ResourceEntry, generated: &ResourceEntry) -> Option<f64> {
    let ap = reference.position.area();
    (ap > 0.0).then(|| (ap - generated.position.area()).abs() / ap)
}

/// CIEDE2000 between the mean colors of each entry's box on its own screenshot.
pub fn color_difference(
    reference_image: &RasterImage,
    generated_image: &RasterImage,
    reference: &ResourceEntry,
    generated: &ResourceEntry,
) -> Result<f64> {
    let c1 = mean_color_lab(reference_image, &reference.position)?;
    let c2 = mean_color_lab(generated_image, &generated.position)?;
    Ok(ciede2000(c1, c2))
}

fn lcs_len(a: &[char], b: &[char]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for &ca in a {
        let mut diag = 0;
        for (j, &cb) in b.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = if ca == cb { diag + 1 } else { above.max(row[j]) };
            diag = above;
        }
    }
    row[b.len()]
}

/// `1 - 2·LCS / (|ref| + |gen|)` on trimmed text, in `[0, 1]`.
pub fn text_difference(reference: &str, generated: &str) -> f64 {
    let a: Vec<char> = reference.trim().chars().collect();
    let b: Vec<char> = generated.trim().chars().collect();
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let m = lcs_len(&a, &b);
    1.0 - 2.0 * m as f64 / (a.len() + b.len()) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesStatus {
    Ok,
    NoPairs,
    AllUndefined,
}

/// Per-pair values aligned with `MatchResult::pairs`; `null` marks a value
/// that is undefined or not applicable and is left out of the mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSeries {
    pub values: Vec<Option<f64>>,
    pub mean: Option<f64>,
    pub undefined: usize,
    pub status: SeriesStatus,
}

impl MetricSeries {
    fn from_values(values: Vec<Option<f64>>) -> Self {
        let defined: Vec<f64> = values.iter().flatten().copied().collect();
        let status = if values.is_empty() {
            SeriesStatus::NoPairs
        } else if defined.is_empty() {
            SeriesStatus::AllUndefined
        } else {
            SeriesStatus::Ok
        };
        let mean = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);
        Self {
            undefined: values.len() - defined.len(),
            values,
            mean,
            status,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FineGrainedScores {
    pub position_offset: MetricSeries,
    pub area_difference: MetricSeries,
    pub color_difference: MetricSeries,
    pub text_difference: MetricSeries,
    pub rer: Option<f64>,
}

/// Computes all per-pair metrics for an existing matching.
pub fn fine_grained(
    reference: &ResourceList,
    generated: &ResourceList,
    reference_image: &RasterImage,
    generated_image: &RasterImage,
    matching: &MatchResult,
) -> FineGrainedScores {
    let mut pos = Vec::new();
    let mut area = Vec::new();
    let mut color = Vec::new();
    let mut text = Vec::new();
    for &(i, j) in &matching.pairs {
        let (r, g) = (&reference.entries[i], &generated.entries[j]);
        pos.push(Some(position_offset(r, g, reference.width, reference.height)));
        area.push(area_difference(r, g));
        color.push(color_difference(reference_image, generated_image, r, g).ok());
        text.push(
            r.text
                .as_deref()
                .map(|rt| text_difference(rt, g.text.as_deref().unwrap_or(""))),
        );
    }
    FineGrainedScores {
        position_offset: MetricSeries::from_values(pos),
        area_difference: MetricSeries::from_values(area),
        color_difference: MetricSeries::from_values(color),
        text_difference: MetricSeries::from_values(text),
        rer: rer(matching, reference.len()),
    }
}

/// Everything needed to score one side of a comparison.
#[derive(Debug, Clone)]
pub struct PageInputs {
    pub image: RasterImage,
    pub resources: ResourceList,
    pub embedding: Option<EmbeddingVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisualScores {
    pub mae: f64,
    pub psnr: f64,
    pub ssim: f64,
    pub nemd: f64,
    pub clip: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Covariates {
    pub reference_pixel_count: usize,
    pub reference_resource_count: usize,
    pub generated_resource_count: usize,
    pub padded_width: u32,
    pub padded_height: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub page: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    pub seed: u64,
    pub visual: VisualScores,
    pub rer: Option<f64>,
    pub matching: MatchResult,
    pub fine_grained: FineGrainedScores,
    pub covariates: Covariates,
    pub flags: Vec<String>,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("report serializes");
        out.push('\n');
        out
    }
}

fn for_page(page: &str, err: Error) -> Error {
    Error::Page {
        page: page.to_string(),
        source: Box::new(err),
    }
}

/// Scores a generated page against its reference.
///
/// Screenshots are padded with noise seeded by `seed` before the pixel
/// metrics; NEMD takes the reference as its first argument.
pub fn evaluate_pair(page: &str, reference: &PageInputs, generated: &PageInputs, seed: u64) -> Result<EvaluationReport> {
    let mut flags = Vec::new();
    for (side, list) in [("reference", &reference.resources), ("generated", &generated.resources)] {
        for v in list.validate() {
            flags.push(format!("{side}: {v}"));
        }
    }

    let (ri, gi) = raster::pad_pair(&reference.image, &generated.image, seed);
    let visual = (|| -> Result<VisualScores> {
        Ok(VisualScores {
            mae: raster::mae(&ri, &gi)?,
            psnr: raster::psnr(&ri, &gi)?,
            ssim: raster::ssim(&ri, &gi)?,
            nemd: raster::nemd(&ri, &gi)?,
            clip: match (&reference.embedding, &generated.embedding) {
                (Some(a), Some(b)) => Some(raster::clip_cosine(a, b)?),
                _ => None,
            },
        })
    })()
    .map_err(|e| for_page(page, e))?;

    let matching = match_resources(&reference.resources, &generated.resources);
    let fine = fine_grained(
        &reference.resources,
        &generated.resources,
        &reference.image,
        &generated.image,
        &matching,
    );
    if fine.rer.is_none() {
        flags.push("rer undefined: empty reference resource list".to_string());
    }
    for (name, series) in [
        ("position_offset", &fine.position_offset),
        ("area_difference", &fine.area_difference),
        ("color_difference", &fine.color_difference),
        ("text_difference", &fine.text_difference),
    ] {
        match series.status {
            SeriesStatus::NoPairs => flags.push(format!("{name}: no pairs")),
            _ if name != "text_difference" && series.undefined > 0 => {
                flags.push(format!("{name}: {} undefined pair(s) excluded", series.undefined))
            }
            _ => {}
        }
    }

    Ok(EvaluationReport {
        page: page.to_string(),
        strategy: None,
        seed,
        visual,
        rer: fine.rer,
        covariates: Covariates {
            reference_pixel_count: reference.image.pixel_count(),
            reference_resource_count: reference.resources.len(),
            generated_resource_count: generated.resources.len(),
            padded_width: ri.width(),
            padded_height: ri.height(),
        },
        matching,
        fine_grained: fine,
        flags,
    })
}
