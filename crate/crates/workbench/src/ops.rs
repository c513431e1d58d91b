use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use mrweb_core::eval::{evaluate_pair, EvaluationReport};
use mrweb_core::html::{extract_resources, insert_links, replace_images, simplify_html, GeometryDump, HtmlDocument};
use mrweb_core::iqa::{alignment_report, AlignmentReport, MetricScores, RatingRecord};
use mrweb_core::resource::ResourceList;
use mrweb_gen::{generate_page, ChatBackend, Error as GenError, GenerationInputs, HttpChat, PromptStrategy};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::api::{NextTask, RatingTask};
use crate::error::{Error, Result};
use crate::workspace::{atomic_write, parse_pair_id, Workspace};

pub fn simplify(html: &str) -> String {
    simplify_html(HtmlDocument::parse(html)).to_html()
}

pub fn synth_links(html: &str, pool: &[String], seed: u64) -> Result<String> {
    Ok(insert_links(HtmlDocument::parse(html), pool, seed)?.to_html())
}

/// Returns the rewritten document and any warnings about reused images.
pub fn synth_images(html: &str, images: &[String], seed: u64) -> Result<(String, Vec<String>)> {
    let out = replace_images(HtmlDocument::parse(html), images, seed)?;
    Ok((out.document.to_html(), out.warnings))
}

pub fn extract(geometry_json: &str, route_prefixes: &[String]) -> Result<ResourceList> {
    let dump = GeometryDump::from_json(geometry_json)?;
    dump.validate()?;
    Ok(extract_resources(&dump, route_prefixes)?)
}

/// Reads a list file: one entry per line, blank lines and `#` comments skipped.
pub fn read_list(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

/// The chat client described by the workspace config, keyed from the
/// configured environment variable unless `api_key` is given.
pub fn chat_client(ws: &Workspace, api_key: Option<&str>) -> Result<HttpChat> {
    let c = &ws.config;
    let chat = match api_key {
        Some(key) => HttpChat::new(&c.endpoint, key),
        None => HttpChat::from_env(&c.endpoint, &c.credential_env)?,
    };
    Ok(match c.min_request_interval_ms {
        0 => chat,
        _ => chat.with_min_interval(c.min_request_interval()),
    })
}

/// Generates one page and stores `page.html`, `page.png`, `geometry.json`,
/// `resources.json` and `transcript.json` under `generated/<id>/<strategy>/`.
pub fn generate(ws: &Workspace, page: &str, strategy: PromptStrategy, backend: &dyn ChatBackend) -> Result<()> {
    let page_dir = ws.page_dir(page)?;
    let screenshot_path = page_dir.join("original.png");
    let screenshot = std::fs::read(&screenshot_path).map_err(|_| Error::Missing(screenshot_path))?;
    let inputs = GenerationInputs {
        screenshot,
        resources: ws.reference_resources(page)?,
    };
    let renderer = ws.renderer()?;
    let out_dir = ws.generated_dir(page, strategy)?;
    std::fs::create_dir_all(&out_dir)?;
    let work = tempfile::Builder::new().prefix(".work-").tempdir_in(&out_dir)?;

    let output = match generate_page(&inputs, strategy, &ws.config.generation(), backend, Some(&renderer), work.path()) {
        Ok(o) => o,
        Err(GenError::EmptyExtraction { transcript }) => {
            atomic_write(&out_dir.join("transcript.json"), transcript.to_json().as_bytes())?;
            return Err(GenError::EmptyExtraction { transcript }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let html = work.path().join("page.html");
    std::fs::write(&html, &output.html)?;
    let rendered = renderer.render(&html, &work.path().join("page.png"), &work.path().join("geometry.json"))?;
    let resources = extract_resources(&rendered.dump, &ws.config.route_prefixes)?;

    atomic_write(&out_dir.join("page.html"), output.html.as_bytes())?;
    atomic_write(&out_dir.join("page.png"), &std::fs::read(&rendered.png)?)?;
    atomic_write(&out_dir.join("geometry.json"), &std::fs::read(&rendered.geometry)?)?;
    atomic_write(&out_dir.join("resources.json"), resources.to_json().as_bytes())?;
    atomic_write(&out_dir.join("transcript.json"), output.transcript.to_json().as_bytes())?;
    Ok(())
}

/// Runs `f` over `items` with at most `max_in_flight` running at once;
/// results come back in input order.
pub fn run_bounded<T: Sync, R: Send>(items: &[T], max_in_flight: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..max_in_flight.clamp(1, items.len().max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                results.lock().unwrap()[i] = Some(r);
            });
        }
    });
    results.into_inner().unwrap().into_iter().map(|r| r.expect("every item ran")).collect()
}

/// Scores one generated output and stores the report.
pub fn evaluate(ws: &Workspace, page: &str, strategy: PromptStrategy) -> Result<EvaluationReport> {
    let reference = ws.reference_inputs(page)?;
    let generated = ws.generated_inputs(page, strategy)?;
    let mut report = evaluate_pair(page, &reference, &generated, ws.config.seed)?;
    report.strategy = Some(strategy.to_string());
    atomic_write(&ws.report_path(page, strategy), report.to_json().as_bytes())?;
    Ok(report)
}

/// Evaluates one strategy, or every strategy generated for the page.
pub fn evaluate_page(ws: &Workspace, page: &str, strategy: Option<PromptStrategy>) -> Result<Vec<EvaluationReport>> {
    let strategies = match strategy {
        Some(s) => vec![s],
        None => ws.strategies(page)?,
    };
    if strategies.is_empty() {
        return Err(Error::Invalid(format!("page {page:?} has no generated outputs")));
    }
    strategies.into_iter().map(|s| evaluate(ws, page, s)).collect()
}

/// Stored reports, sorted by page then strategy.
pub fn load_reports(ws: &Workspace) -> Result<Vec<EvaluationReport>> {
    let mut reports = Vec::new();
    for id in ws.page_ids()? {
        for s in PromptStrategy::ALL {
            let path = ws.report_path(&id, s);
            if path.is_file() {
                let text = std::fs::read_to_string(&path)?;
                reports.push(serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(&path))?);
            }
        }
    }
    Ok(reports)
}

pub const SUMMARY_HEADER: [&str; 16] = [
    "page",
    "strategy",
    "mae",
    "psnr",
    "ssim",
    "nemd",
    "clip",
    "rer",
    "position_offset",
    "area_difference",
    "color_difference",
    "text_difference",
    "matched_pairs",
    "reference_resources",
    "generated_resources",
    "reference_pixels",
];

/// One CSV row per stored report. Undefined values are empty cells.
pub fn summarize(ws: &Workspace) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SUMMARY_HEADER)?;
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for r in load_reports(ws)? {
        let fg = &r.fine_grained;
        w.write_record([
            r.page.clone(),
            r.strategy.clone().unwrap_or_default(),
            r.visual.mae.to_string(),
            r.visual.psnr.to_string(),
            r.visual.ssim.to_string(),
            r.visual.nemd.to_string(),
            cell(r.visual.clip),
            cell(r.rer),
            cell(fg.position_offset.mean),
            cell(fg.area_difference.mean),
            cell(fg.color_difference.mean),
            cell(fg.text_difference.mean),
            r.matching.pairs.len().to_string(),
            r.covariates.reference_resource_count.to_string(),
            r.covariates.generated_resource_count.to_string(),
            r.covariates.reference_pixel_count.to_string(),
        ])?;
    }
    Ok(String::from_utf8(w.into_inner().map_err(|e| Error::Invalid(e.to_string()))?).expect("csv is utf-8"))
}

/// Reads a score file: a JSON object from pair id to metric value.
pub fn read_scores(path: &Path) -> Result<BTreeMap<String, f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::from(e).in_file(path))?;
    serde_json::from_str(&text).map_err(|e| Error::from(e).in_file(path))
}

/// Visual metric scores taken from the stored reports, keyed by pair id.
pub fn scores_from_reports(ws: &Workspace) -> Result<MetricScores> {
    let mut scores = MetricScores::new();
    for r in load_reports(ws)? {
        let pair = format!("{}/{}", r.page, r.strategy.as_deref().unwrap_or_default());
        let v = &r.visual;
        for (name, value) in [("mae", Some(v.mae)), ("psnr", Some(v.psnr)), ("ssim", Some(v.ssim)), ("nemd", Some(v.nemd)), ("clip", v.clip)] {
            if let Some(value) = value {
                scores.entry(name.to_string()).or_default().insert(pair.clone(), value);
            }
        }
    }
    Ok(scores)
}

pub fn iqa(scores: &MetricScores, ratings: &[RatingRecord]) -> Result<AlignmentReport> {
    if ratings.is_empty() {
        return Err(Error::Invalid("no ratings".into()));
    }
    Ok(alignment_report(scores, ratings)?)
}

/// Stable 64-bit FNV-1a, used to derive per-rater shuffle seeds.
fn fnv1a(text: &str) -> u64 {
    text.bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// The order in which `rater` sees the workspace's pairs.
pub fn rater_order(pairs: &[String], seed: u64, rater: &str) -> Vec<String> {
    let mut order = pairs.to_vec();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ fnv1a(rater)));
    order
}

pub fn next_task(ws: &Workspace, rater: &str) -> Result<NextTask> {
    let ratings = ws.load_ratings()?;
    let pairs = ws.rating_pairs()?;
    let unrated: Vec<String> = rater_order(&pairs, ws.config.seed, rater)
        .into_iter()
        .filter(|p| !ratings.iter().any(|r| r.rater == rater && &r.pair == p))
        .collect();
    let task = unrated.first().map(|pair| {
        let (page, strategy) = parse_pair_id(pair).expect("workspace pair ids parse");
        RatingTask {
            pair: pair.clone(),
            reference_image: format!("/api/pages/{page}/image"),
            generated_image: format!("/api/pages/{page}/generated/{strategy}/image"),
        }
    });
    Ok(NextTask {
        rater: rater.to_string(),
        remaining: unrated.len(),
        task,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatingOutcome {
    Stored,
    Duplicate,
    UnknownPair,
}

/// Appends a rating unless the rater already rated the pair. Callers must
/// serialize calls on one workspace.
pub fn add_rating(ws: &Workspace, record: &RatingRecord) -> Result<RatingOutcome> {
    record.check()?;
    if !ws.rating_pairs()?.contains(&record.pair) {
        return Ok(RatingOutcome::UnknownPair);
    }
    let mut ratings = ws.load_ratings()?;
    if ratings.iter().any(|r| r.rater == record.rater && r.pair == record.pair) {
        return Ok(RatingOutcome::Duplicate);
    }
    ratings.push(record.clone());
    let mut text = serde_json::to_string_pretty(&ratings)?;
    text.push('\n');
    atomic_write(&ws.ratings_path(), text.as_bytes())?;
    Ok(RatingOutcome::Stored)
}
