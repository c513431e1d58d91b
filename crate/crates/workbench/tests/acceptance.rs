//! Acceptance suite. Prints one line per criterion and exits non-zero if
//! any criterion fails.
//!
//! The human-data criterion runs only when `MRWEB_HUMAN_RATINGS` names a
//! ratings file and `MRWEB_HUMAN_SCORES` lists `metric=path` score files
//! separated by commas (both `mae` and `nemd` are required).

mod common;

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use common::*;
use kuchikiki::NodeRef;
use mrweb_core::color::{ciede2000, Lab};
use mrweb_core::eval::{evaluate_pair, match_resources, rer};
use mrweb_core::html::{simplify_html, HtmlDocument};
use mrweb_core::iqa::{logistic_fit, srocc, weighted_linear_fit, AlignmentReport, LogisticParams, MosEntry};
use mrweb_core::raster::{mae, nemd, RasterImage, PSNR_CAP};
use mrweb_core::resource::{BoundingBox, ResourceEntry, ResourceKind, ResourceList};
use mrweb_oracles::{delta_e_2000, spearman_bruteforce, wls_normal_equations, CIEDE2000_PAIRS};
use mrweb_workbench::Workspace;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

use Outcome::*;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took < limit, || format!("{what} took {took:?}, limit {limit:?}"))
}

fn ciede2000_pairs() -> Check {
    let start = Instant::now();
    let lab = |[l, a, b]: [f64; 3]| Lab::new(l, a, b);
    let mut worst: f64 = 0.0;
    for (i, (c1, c2, published)) in CIEDE2000_PAIRS.iter().enumerate() {
        let got = ciede2000(lab(*c1), lab(*c2));
        let oracle = delta_e_2000(*c1, *c2);
        ensure((got - oracle).abs() <= 1e-3, || format!("pair {}: {got} vs oracle {oracle}", i + 1))?;
        ensure((got - published).abs() <= 1e-3, || format!("pair {}: {got} vs published {published}", i + 1))?;
        worst = worst.max((got - published).abs());
    }
    let blue = ciede2000(Lab::new(50.0, 2.6772, -79.7751), Lab::new(50.0, 0.0, -82.7485));
    ensure((blue - 2.0425).abs() <= 1e-3, || format!("first pair gave {blue}"))?;
    within(start, Duration::from_secs(1), "sweep")?;
    Ok(format!("{} pairs, max deviation {worst:.1e}", CIEDE2000_PAIRS.len()))
}

fn srocc_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut checked, mut worst) = (0, 0.0f64);
    while checked < 200 {
        let n = rng.random_range(3..=10);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(0..5) as f64).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(0..6) as f64 * 0.5).collect();
        match (srocc(&x, &y), spearman_bruteforce(&x, &y)) {
            (Ok(got), Some(want)) => {
                let d = (got - want.abs()).abs();
                ensure(d <= 1e-12, || format!("{x:?} {y:?}: {got} vs {want}"))?;
                worst = worst.max(d);
                checked += 1;
            }
            (Err(_), None) => {}
            (got, want) => return Err(format!("definedness differs on {x:?} {y:?}: {got:?} vs {want:?}")),
        }
    }
    Ok(format!("200 lists, max deviation {worst:.1e}"))
}

fn metric_identities() -> Check {
    let start = Instant::now();
    let ws = Workspace::open(fixture("workspace")).map_err(|e| e.to_string())?;
    let pages = ws.page_ids().map_err(|e| e.to_string())?;
    ensure(pages.len() == 3, || format!("expected 3 fixture pages, found {}", pages.len()))?;
    for page in &pages {
        let inputs = ws.reference_inputs(page).map_err(|e| e.to_string())?;
        let r = evaluate_pair(page, &inputs, &inputs, 42).map_err(|e| e.to_string())?;
        let v = &r.visual;
        ensure(v.mae == 0.0, || format!("{page}: mae {}", v.mae))?;
        ensure((v.ssim - 1.0).abs() <= 1e-9, || format!("{page}: ssim {}", v.ssim))?;
        ensure(v.nemd == 1.0, || format!("{page}: nemd {}", v.nemd))?;
        ensure(v.psnr == PSNR_CAP, || format!("{page}: psnr {}", v.psnr))?;
        ensure(r.rer == Some(1.0), || format!("{page}: rer {:?}", r.rer))?;
    }
    within(start, Duration::from_secs(5), "identities")?;
    Ok(format!("{} pages in {:?}", pages.len(), start.elapsed()))
}

fn nemd_asymmetry() -> Check {
    let grey = RasterImage::filled(32, 32, [127; 3]);
    let white = RasterImage::filled(32, 32, [255; 3]);
    let forward = nemd(&grey, &white).map_err(|e| e.to_string())?;
    let backward = nemd(&white, &grey).map_err(|e| e.to_string())?;
    ensure(forward == 0.0, || format!("nemd(127, 255) = {forward}"))?;
    ensure((backward - 0.498).abs() <= 0.01, || format!("nemd(255, 127) = {backward}"))?;
    Ok(format!("{forward} and {backward:.4}"))
}

fn matchable_list(n: usize) -> ResourceList {
    let mut list = ResourceList::new("https://a.com", 1000.0, 2000.0);
    for i in 0..n {
        let kind = if i % 2 == 0 { ResourceKind::InternalLink } else { ResourceKind::Image };
        let y = 90.0 * i as f64;
        list.entries.push(ResourceEntry::new(BoundingBox::new(10.0, y, 200.0, y + 40.0), kind, format!("/item/{i}")));
    }
    list
}

fn rer_law() -> Check {
    let mut cases = 0;
    for n in 1..=20usize {
        let reference = matchable_list(n);
        for k in 0..=n {
            let doomed: Vec<usize> = (0..k).map(|i| i * n / k.max(1)).collect();
            let mut generated = reference.clone();
            generated.entries = reference
                .entries
                .iter()
                .enumerate()
                .filter(|(i, _)| !doomed.contains(i))
                .map(|(_, e)| e.clone())
                .collect();
            let got = rer(&match_resources(&reference, &generated), n);
            let want = (n - k) as f64 / n as f64;
            ensure(got == Some(want), || format!("n={n} k={k}: {got:?}, want {want}"))?;
            cases += 1;
        }
    }
    Ok(format!("{cases} (n, k) cases"))
}

fn mos_from(values: &[f64], variance: f64) -> Vec<MosEntry> {
    values
        .iter()
        .enumerate()
        .map(|(i, &mos)| MosEntry {
            pair: format!("p{i:04}"),
            mos,
            variance,
            retained_count: 4,
            raw_count: 4,
        })
        .collect()
}

fn logistic_recovery() -> Check {
    let start = Instant::now();
    let truth = LogisticParams {
        b1: 1.5,
        b2: -1.2,
        b3: 0.55,
        b4: 0.08,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.05).unwrap();
    let x: Vec<f64> = (0..100).map(|_| rng.random_range(0.0..1.0)).collect();
    let clean: Vec<f64> = x.iter().map(|v| truth.eval(*v)).collect();
    let noisy: Vec<f64> = clean.iter().map(|v| v + noise.sample(&mut rng)).collect();

    let fit = logistic_fit(&x, &mos_from(&noisy, 0.02)).map_err(|e| e.to_string())?;
    let rmse = (x.iter().zip(&noisy).map(|(xi, yi)| (fit.params.eval(*xi) - yi).powi(2)).sum::<f64>() / 100.0).sqrt();
    ensure(rmse <= 0.1, || format!("noisy rmse {rmse}"))?;

    let exact = logistic_fit(&x, &mos_from(&clean, 0.02)).map_err(|e| e.to_string())?;
    let sse: f64 = x.iter().zip(&clean).map(|(xi, yi)| (exact.params.eval(*xi) - yi).powi(2)).sum();
    ensure(sse < 1e-12, || format!("noiseless sse {sse:e}"))?;
    within(start, Duration::from_secs(2), "both fits")?;
    Ok(format!("rmse {rmse:.4}, noiseless sse {sse:.1e}"))
}

fn wls_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.random_range(3..40);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
        let y: Vec<f64> = x.iter().map(|v| 0.7 * v - 0.2 + rng.random_range(-1.0..1.0)).collect();
        let variances: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..2.0)).collect();
        let weights: Vec<f64> = variances.iter().map(|v| 1.0 / v).collect();
        let (slope, intercept) = wls_normal_equations(&x, &y, &weights);
        let mos: Vec<MosEntry> = mos_from(&y, 1.0)
            .into_iter()
            .zip(&variances)
            .map(|(m, &variance)| MosEntry { variance, ..m })
            .collect();
        let fit = weighted_linear_fit(&x, &mos).map_err(|e| e.to_string())?;
        let d = (fit.slope - slope).abs().max((fit.intercept - intercept).abs());
        ensure(d <= 1e-9, || format!("deviation {d:e} on n={n}"))?;
        worst = worst.max(d);
    }
    Ok(format!("100 datasets, max deviation {worst:.1e}"))
}

fn removed_subtree(node: &NodeRef) -> bool {
    let Some(el) = node.as_element() else { return false };
    let attrs = el.attributes.borrow();
    let style = attrs.get("style").unwrap_or("").to_ascii_lowercase().replace(' ', "");
    matches!(&*el.name.local, "script" | "noscript" | "meta" | "link" | "base")
        || attrs.contains("hidden")
        || style.contains("display:none")
        || style.contains("visibility:hidden")
}

fn visible_chars(root: &NodeRef) -> BTreeMap<char, usize> {
    let mut counts = BTreeMap::new();
    for node in root.descendants() {
        let Some(text) = node.as_text() else { continue };
        if node.ancestors().any(|a| removed_subtree(&a)) {
            continue;
        }
        for c in text.borrow().chars().filter(|c| !c.is_whitespace()) {
            *counts.entry(c).or_insert(0) += 1;
        }
    }
    counts
}

fn simplifier_properties() -> Check {
    let mut docs: Vec<_> = std::fs::read_dir(fixture("html"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "html"))
        .collect();
    docs.sort();
    ensure(docs.len() >= 20, || format!("only {} documents", docs.len()))?;
    for path in &docs {
        let name = path.file_name().unwrap().to_string_lossy();
        let src = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
        let before = visible_chars(HtmlDocument::parse(&src).root());
        let first = simplify_html(HtmlDocument::parse(&src)).to_html();
        let second = simplify_html(HtmlDocument::parse(&first)).to_html();
        ensure(first == second, || format!("{name}: second pass changed the output"))?;
        let reparsed = HtmlDocument::parse(&first);
        let survivors = reparsed
            .root()
            .descendants()
            .filter(|n| {
                n.as_comment().is_some()
                    || n.as_element().is_some_and(|e| matches!(&*e.name.local, "script" | "noscript"))
            })
            .count();
        ensure(survivors == 0, || format!("{name}: {survivors} comment/script nodes survive"))?;
        ensure(visible_chars(reparsed.root()) == before, || format!("{name}: visible text changed"))?;
    }
    Ok(format!("{} documents", docs.len()))
}

fn noisy(base: &RasterImage, sigma: f64, seed: u64) -> RasterImage {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).unwrap();
    RasterImage::from_fn(base.width(), base.height(), |x, y| {
        base.get(x, y)
            .map(|c| (c as f64 + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8)
    })
}

fn ranking_sanity() -> Check {
    let ws = Workspace::open(fixture("workspace")).map_err(|e| e.to_string())?;
    let mut trials = 0;
    for page in ws.page_ids().map_err(|e| e.to_string())? {
        let path = ws.reference_image_path(&page).map_err(|e| e.to_string())?;
        let reference = RasterImage::open(path).map_err(|e| e.to_string())?;
        let (mut mae_ok, mut nemd_ok) = (0, 0);
        for seed in 0..20u64 {
            let light = noisy(&reference, 5.0, 1000 + seed);
            let heavy = noisy(&reference, 80.0, 2000 + seed);
            let score = |f: fn(&RasterImage, &RasterImage) -> mrweb_core::Result<f64>, img| {
                f(&reference, img).map_err(|e| e.to_string())
            };
            if score(mae, &light)? < score(mae, &heavy)? {
                mae_ok += 1;
            }
            if score(nemd, &light)? > score(nemd, &heavy)? {
                nemd_ok += 1;
            }
            trials += 1;
        }
        ensure(mae_ok == 20, || format!("{page}: MAE ordered {mae_ok}/20"))?;
        ensure(nemd_ok == 20, || format!("{page}: NEMD ordered {nemd_ok}/20"))?;
    }
    Ok(format!("{trials} trials, MAE and NEMD always ordered"))
}

/// Generates every page with self-refine through the binary, then evaluates.
fn generate_and_evaluate() -> Result<BTreeMap<String, Vec<u8>>, String> {
    let ws = temp_workspace();
    let stub = page_stub(ws.path());
    set_endpoint(ws.path(), stub.url());
    let out = mrweb(ws.path(), &["generate", "--strategy", "self-refine"]);
    ensure(out.status.success(), || format!("generate failed: {}", stderr(&out)))?;
    let mut artifacts = BTreeMap::new();
    for page in ["contact", "home", "projects"] {
        let out = mrweb(ws.path(), &["evaluate", "--page", page, "--strategy", "self-refine"]);
        ensure(out.status.success(), || format!("evaluate {page} failed: {}", stderr(&out)))?;
        for rel in [
            format!("reports/{page}/self-refine.json"),
            format!("generated/{page}/self-refine/transcript.json"),
            format!("generated/{page}/self-refine/page.html"),
        ] {
            let bytes = std::fs::read(ws.path().join(&rel)).map_err(|e| format!("{rel}: {e}"))?;
            artifacts.insert(rel, bytes);
        }
    }
    Ok(artifacts)
}

fn end_to_end_determinism() -> Check {
    let first = generate_and_evaluate()?;
    let second = generate_and_evaluate()?;
    for (name, bytes) in &first {
        ensure(second.get(name) == Some(bytes), || format!("{name} differs between runs"))?;
    }
    Ok(format!("{} artifacts byte-identical across runs", first.len()))
}

fn human_data() -> Outcome {
    let (Ok(ratings), Ok(scores)) = (std::env::var("MRWEB_HUMAN_RATINGS"), std::env::var("MRWEB_HUMAN_SCORES")) else {
        return Skip("set MRWEB_HUMAN_RATINGS and MRWEB_HUMAN_SCORES to run".into());
    };
    let result = (|| -> Check {
        let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
        let json = dir.path().join("alignment.json");
        let mut args = vec!["iqa".to_string(), "--ratings".into(), ratings.clone()];
        for spec in scores.split(',').filter(|s| !s.trim().is_empty()) {
            args.extend(["--scores".to_string(), spec.trim().to_string()]);
        }
        args.extend(["--json".to_string(), json.display().to_string()]);
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = mrweb(dir.path(), &args);
        ensure(out.status.success(), || format!("iqa failed: {}", stderr(&out)))?;
        let report: AlignmentReport =
            serde_json::from_str(&std::fs::read_to_string(&json).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        let direct = |name: &str| report.metrics.iter().find(|m| m.metric == name).and_then(|m| m.srocc);
        let mut notes = Vec::new();
        for (name, target) in [("mae", 0.542), ("nemd", 0.508)] {
            let got = direct(name).ok_or_else(|| format!("no SROCC for {name}"))?;
            ensure((got - target).abs() <= 0.03, || format!("{name} SROCC {got:.3}, want {target} ± 0.03"))?;
            notes.push(format!("{name} {got:.3}"));
        }
        let human = report.inter_rater_srocc.ok_or("no inter-rater reliability")?;
        ensure((human - 0.640).abs() <= 0.03, || format!("inter-rater {human:.3}, want 0.640 ± 0.03"))?;
        notes.push(format!("inter-rater {human:.3}"));
        Ok(notes.join(", "))
    })();
    match result {
        Ok(msg) => Pass(msg),
        Err(msg) => Fail(msg),
    }
}

fn main() {
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome>)> = vec![
        ("ciede2000 verification pairs", Box::new(|| outcome(ciede2000_pairs()))),
        ("srocc matches brute-force oracle", Box::new(|| outcome(srocc_oracle()))),
        ("metric identities on fixture pages", Box::new(|| outcome(metric_identities()))),
        ("nemd asymmetry", Box::new(|| outcome(nemd_asymmetry()))),
        ("rer perturbation law", Box::new(|| outcome(rer_law()))),
        ("logistic recovery", Box::new(|| outcome(logistic_recovery()))),
        ("weighted regression oracle", Box::new(|| outcome(wls_oracle()))),
        ("simplifier properties", Box::new(|| outcome(simplifier_properties()))),
        ("ranking sanity under noise", Box::new(|| outcome(ranking_sanity()))),
        ("end-to-end determinism", Box::new(|| outcome(end_to_end_determinism()))),
        ("human rating reproduction", Box::new(human_data)),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        let result = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| check()))
            .unwrap_or_else(|_| Fail("panicked".into()));
        match result {
            Pass(msg) => println!("[PASS] {name}: {msg}"),
            Skip(msg) => println!("[SKIP] {name}: {msg}"),
            Fail(msg) => {
                failed += 1;
                println!("[FAIL] {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

fn outcome(check: Check) -> Outcome {
    match check {
        Ok(msg) => Pass(msg),
        Err(msg) => Fail(msg),
    }
}
