//! Agreement between objective metric scores and human similarity ratings.
//!
//! The pipeline follows the usual subjective-testing protocol: per-rater
//! z-scores, outlier-screened mean opinion scores (MOS), then three views of
//! alignment per metric (rank correlation, variance-weighted linear
//! regression, and a four-parameter logistic fit) plus inter-rater agreement.
//! Standard deviations are population deviations throughout. Correlations
//! are reported as absolute values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single Likert judgement (1 = highly dissimilar, 5 = highly similar).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub rater: String,
    pub pair: String,
    pub score: u8,
}

pub const LIKERT_LABELS: [&str; 5] = [
    "Highly Dissimilar",
    "Dissimilar",
    "Neutral",
    "Similar",
    "Highly Similar",
];

impl RatingRecord {
    pub fn new(rater: impl Into<String>, pair: impl Into<String>, score: u8) -> Result<Self> {
        let record = Self {
            rater: rater.into(),
            pair: pair.into(),
            score,
        };
        record.check()?;
        Ok(record)
    }

    pub fn check(&self) -> Result<()> {
        if !(1..=5).contains(&self.score) {
            return Err(Error::Statistics(format!(
                "score {} from rater {} on pair {} is outside 1..=5",
                self.score, self.rater, self.pair
            )));
        }
        Ok(())
    }
}

pub fn load_ratings(text: &str) -> Result<Vec<RatingRecord>> {
    let ratings: Vec<RatingRecord> = serde_json::from_str(text)?;
    ratings.iter().try_for_each(RatingRecord::check)?;
    Ok(ratings)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZRating {
    pub rater: String,
    pub pair: String,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ZScores {
    pub ratings: Vec<ZRating>,
    /// Raters whose scores had zero variance; their z-scores are all 0.
    pub flagged_raters: Vec<String>,
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn population_variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64
}

/// Standardizes each rater's scores by that rater's mean and population std.
pub fn zscore_normalize(ratings: &[RatingRecord]) -> ZScores {
    let mut by_rater: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in ratings {
        by_rater.entry(&r.rater).or_default().push(r.score as f64);
    }
    let stats: BTreeMap<&str, (f64, f64)> = by_rater
        .iter()
        .map(|(k, v)| (*k, (mean(v), population_variance(v).sqrt())))
        .collect();
    let flagged_raters = stats
        .iter()
        .filter(|(_, (_, sd))| *sd == 0.0)
        .map(|(k, _)| k.to_string())
        .collect();
    let ratings = ratings
        .iter()
        .map(|r| {
            let (m, sd) = stats[r.rater.as_str()];
            let z = if sd == 0.0 { 0.0 } else { (r.score as f64 - m) / sd };
            ZRating {
                rater: r.rater.clone(),
                pair: r.pair.clone(),
                z,
            }
        })
        .collect();
    ZScores { ratings, flagged_raters }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MosEntry {
    pub pair: String,
    pub mos: f64,
    pub variance: f64,
    pub retained_count: usize,
    pub raw_count: usize,
}

/// Per-pair MOS after discarding z-scores farther than 2σ from the pair mean.
///
/// Nothing is discarded when fewer than two ratings would survive. Output is
/// ordered by pair id.
pub fn compute_mos(z_ratings: &[ZRating]) -> Vec<MosEntry> {
    let mut by_pair: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for r in z_ratings {
        by_pair.entry(&r.pair).or_default().push(r.z);
    }
    by_pair
        .into_iter()
        .map(|(pair, zs)| {
            let mu = mean(&zs);
            let sigma = population_variance(&zs).sqrt();
            let kept: Vec<f64> = zs.iter().copied().filter(|z| (z - mu).abs() <= 2.0 * sigma).collect();
            let retained = if kept.len() < 2 { zs.clone() } else { kept };
            MosEntry {
                pair: pair.to_string(),
                mos: mean(&retained),
                variance: population_variance(&retained),
                retained_count: retained.len(),
                raw_count: zs.len(),
            }
        })
        .collect()
}

/// Fractional ranks (1-based) with ties sharing their average rank.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            out[i] = avg;
        }
        start = end;
    }
    out
}

fn weighted_pearson(x: &[f64], y: &[f64], w: &[f64]) -> Option<f64> {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() / sw;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for ((xi, yi), wi) in x.iter().zip(y).zip(w) {
        let (dx, dy) = (xi - mx, yi - my);
        sxy += wi * dx * dy;
        sxx += wi * dx * dx;
        syy += wi * dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    weighted_pearson(x, y, &vec![1.0; x.len()])
}

/// Absolute Spearman rank-order correlation.
pub fn srocc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Statistics(format!("srocc: lengths {} and {} differ", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::Statistics(format!("srocc: need at least 3 points, got {}", x.len())));
    }
    pearson(&ranks(x), &ranks(y))
        .map(f64::abs)
        .ok_or_else(|| Error::Statistics("undefined correlation: constant sequence".into()))
}

/// Agreement between predictions and MOS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitMetrics {
    pub cc: f64,
    pub mae: f64,
    pub rms: f64,
    pub or: f64,
}

/// Per-pair rating standard deviations with zeros replaced by the smallest
/// positive one. All-zero input stays zero.
fn floored_std(mos: &[MosEntry]) -> Vec<f64> {
    let min_var = mos.iter().map(|m| m.variance).filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    mos.iter()
        .map(|m| {
            if m.variance > 0.0 {
                m.variance.sqrt()
            } else if min_var.is_finite() {
                min_var.sqrt()
            } else {
                0.0
            }
        })
        .collect()
}

fn outlier_ratio(pred: &[f64], mos: &[MosEntry], std: &[f64]) -> f64 {
    let outliers = pred
        .iter()
        .zip(mos)
        .zip(std)
        .filter(|((p, m), s)| (*p - m.mos).abs() > 2.0 * *s)
        .count();
    outliers as f64 / pred.len() as f64
}

fn fit_metrics(pred: &[f64], mos: &[MosEntry], weights: &[f64], std: &[f64]) -> FitMetrics {
    let y: Vec<f64> = mos.iter().map(|m| m.mos).collect();
    let sw: f64 = weights.iter().sum();
    let (mut abs, mut sq) = (0.0, 0.0);
    for ((p, yi), w) in pred.iter().zip(&y).zip(weights) {
        abs += w * (p - yi).abs();
        sq += w * (p - yi).powi(2);
    }
    FitMetrics {
        cc: weighted_pearson(pred, &y, weights).map(f64::abs).unwrap_or(0.0),
        mae: abs / sw,
        rms: (sq / sw).sqrt(),
        or: outlier_ratio(pred, mos, std),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub metrics: FitMetrics,
}

impl LinearFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

fn check_lengths(x: &[f64], mos: &[MosEntry], min: usize, what: &str) -> Result<()> {
    if x.len() != mos.len() {
        return Err(Error::Statistics(format!("{what}: {} scores for {} MOS entries", x.len(), mos.len())));
    }
    if x.len() < min {
        return Err(Error::Statistics(format!("{what}: need at least {min} pairs, got {}", x.len())));
    }
    if x.iter().all(|&v| v == x[0]) {
        return Err(Error::Statistics(format!("{what}: metric scores are all equal")));
    }
    Ok(())
}

/// Least squares of MOS on `x`, each pair weighted by `1 / variance`.
///
/// Zero variances borrow the smallest positive variance. Reported MAE/RMS are
/// weighted by the same weights, CC is the absolute weighted Pearson
/// correlation, and OR counts predictions more than two rating standard
/// deviations from MOS.
pub fn weighted_linear_fit(x: &[f64], mos: &[MosEntry]) -> Result<LinearFit> {
    check_lengths(x, mos, 3, "weighted regression")?;
    let std = floored_std(mos);
    let weights: Vec<f64> = std.iter().map(|s| if *s > 0.0 { 1.0 / (s * s) } else { 1.0 }).collect();
    let y: Vec<f64> = mos.iter().map(|m| m.mos).collect();

    let sw: f64 = weights.iter().sum();
    let mx = x.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>() / sw;
    let my = y.iter().zip(&weights).map(|(a, w)| a * w).sum::<f64>() / sw;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for ((xi, yi), wi) in x.iter().zip(&y).zip(&weights) {
        sxy += wi * (xi - mx) * (yi - my);
        sxx += wi * (xi - mx) * (xi - mx);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let pred: Vec<f64> = x.iter().map(|xi| slope * xi + intercept).collect();
    Ok(LinearFit {
        slope,
        intercept,
        metrics: fit_metrics(&pred, mos, &weights, &std),
    })
}

/// `y = (b1 - b2) / (1 + exp(-(x - b3) / |b4|)) + b2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogisticParams {
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub b4: f64,
}

impl LogisticParams {
    pub fn eval(&self, x: f64) -> f64 {
        (self.b1 - self.b2) * sigmoid((x - self.b3) / self.b4.abs()) + self.b2
    }

    fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.b1, self.b2, self.b3, self.b4)
    }

    fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            b1: v[0],
            b2: v[1],
            b3: v[2],
            b4: v[3],
        }
    }

    /// Partial derivatives of the model output with respect to `b1..b4`.
    fn gradient(&self, x: f64) -> Vector4<f64> {
        let s = self.b4.abs();
        let u = (x - self.b3) / s;
        let g = sigmoid(u);
        let dg = g * (1.0 - g);
        let span = self.b1 - self.b2;
        Vector4::new(g, 1.0 - g, -span * dg / s, -span * dg * u / s * self.b4.signum())
    }
}

fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticFit {
    pub params: LogisticParams,
    pub sse: f64,
    pub iterations: usize,
    pub converged: bool,
    pub restarts: usize,
    pub metrics: FitMetrics,
}

const LM_MAX_ITERATIONS: usize = 500;
const LM_REL_TOL: f64 = 1e-10;

struct Descent {
    params: LogisticParams,
    sse: f64,
    iterations: usize,
    converged: bool,
}

fn sse(params: &LogisticParams, x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(xi, yi)| (yi - params.eval(*xi)).powi(2)).sum()
}

/// Damped Gauss-Newton (Levenberg-Marquardt with Marquardt scaling).
fn levenberg_marquardt(start: LogisticParams, x: &[f64], y: &[f64]) -> Descent {
    let mut params = start;
    let mut current = sse(&params, x, y);
    let mut lambda = 1e-3;
    let scale_floor = 1e-12 * (1.0 + y.iter().map(|v| v * v).sum::<f64>());
    for iteration in 1..=LM_MAX_ITERATIONS {
        if !current.is_finite() || params.b4 == 0.0 {
            return Descent {
                params,
                sse: current,
                iterations: iteration,
                converged: false,
            };
        }
        let mut jtj = Matrix4::zeros();
        let mut jtr = Vector4::zeros();
        for (xi, yi) in x.iter().zip(y) {
            let grad = params.gradient(*xi);
            let r = yi - params.eval(*xi);
            jtj += grad * grad.transpose();
            jtr += grad * r;
        }
        if jtr.norm() <= 1e-15 * (1.0 + current.sqrt()) || current <= 1e-30 * scale_floor {
            return Descent {
                params,
                sse: current,
                iterations: iteration,
                converged: true,
            };
        }
        loop {
            let mut damped = jtj;
            for k in 0..4 {
                damped[(k, k)] += lambda * jtj[(k, k)].max(1e-12);
            }
            let step = damped.lu().solve(&jtr);
            let candidate = step.map(|s| LogisticParams::from_vector(&(params.to_vector() + s)));
            let trial = candidate.filter(|c| c.b4 != 0.0).map(|c| (c, sse(&c, x, y)));
            match trial {
                Some((c, trial_sse)) if trial_sse.is_finite() && trial_sse <= current => {
                    let rel = (current - trial_sse) / current.max(f64::MIN_POSITIVE);
                    params = c;
                    current = trial_sse;
                    lambda = (lambda / 10.0).max(1e-15);
                    if rel < LM_REL_TOL {
                        return Descent {
                            params,
                            sse: current,
                            iterations: iteration,
                            converged: true,
                        };
                    }
                    break;
                }
                _ => {
                    lambda *= 10.0;
                    if lambda > 1e16 {
                        // No descent direction left: a stationary point.
                        return Descent {
                            params,
                            sse: current,
                            iterations: iteration,
                            converged: true,
                        };
                    }
                }
            }
        }
    }
    Descent {
        params,
        sse: current,
        iterations: LM_MAX_ITERATIONS,
        converged: false,
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        (s[n / 2 - 1] + s[n / 2]) / 2.0
    }
}

/// Fits the four-parameter logistic mapping from metric scores to MOS.
///
/// Starts from `b1 = max(mos)`, `b2 = min(mos)`, `b3 = median(x)`,
/// `b4 = std(x)`. If that descent does not converge within 500 iterations,
/// eight perturbed starts are tried and the lowest SSE wins. Reported
/// metrics are unweighted.
pub fn logistic_fit(x: &[f64], mos: &[MosEntry]) -> Result<LogisticFit> {
    check_lengths(x, mos, 5, "logistic regression")?;
    let y: Vec<f64> = mos.iter().map(|m| m.mos).collect();
    let (ymin, ymax) = y.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let xstd = population_variance(x).sqrt();
    let (xmin, xmax) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let start = LogisticParams {
        b1: ymax,
        b2: ymin,
        b3: median(x),
        b4: xstd,
    };

    let mut best = levenberg_marquardt(start, x, y.as_slice());
    let mut restarts = 0;
    if !best.converged {
        let span = xmax - xmin;
        let perturbations = [
            (false, 0.0, 0.5),
            (false, 0.0, 2.0),
            (false, -0.25, 1.0),
            (false, 0.25, 1.0),
            (true, 0.0, 1.0),
            (true, 0.0, 0.5),
            (false, -0.1, 0.25),
            (false, 0.1, 4.0),
        ];
        for (swap, shift, stretch) in perturbations {
            restarts += 1;
            let (b1, b2) = if swap { (ymin, ymax) } else { (ymax, ymin) };
            let attempt = levenberg_marquardt(
                LogisticParams {
                    b1,
                    b2,
                    b3: start.b3 + shift * span,
                    b4: xstd * stretch,
                },
                x,
                &y,
            );
            let better = attempt.sse.is_finite() && (!best.sse.is_finite() || attempt.sse < best.sse);
            if better {
                best = attempt;
            }
        }
    }

    let std = floored_std(mos);
    let pred: Vec<f64> = x.iter().map(|xi| best.params.eval(*xi)).collect();
    let fit = LogisticFit {
        params: best.params,
        sse: best.sse,
        iterations: best.iterations,
        converged: best.converged,
        restarts,
        metrics: fit_metrics(&pred, mos, &vec![1.0; pred.len()], &std),
    };
    if !fit.sse.is_finite() || pred.iter().any(|p| !p.is_finite()) {
        return Err(Error::FitFailed {
            message: "every start diverged".into(),
            best: Some(fit),
        });
    }
    Ok(fit)
}

/// Mean absolute SROCC over rater pairs sharing at least three rated pairs.
pub fn inter_rater_reliability(ratings: &[RatingRecord]) -> Result<f64> {
    let mut by_rater: BTreeMap<&str, BTreeMap<&str, f64>> = BTreeMap::new();
    for r in ratings {
        by_rater.entry(&r.rater).or_default().insert(&r.pair, r.score as f64);
    }
    let raters: Vec<&str> = by_rater.keys().copied().collect();
    let mut values = Vec::new();
    for (i, a) in raters.iter().enumerate() {
        for b in &raters[i + 1..] {
            let (ra, rb) = (&by_rater[a], &by_rater[b]);
            let common: Vec<&&str> = ra.keys().filter(|p| rb.contains_key(*p)).collect();
            if common.len() < 3 {
                continue;
            }
            let xa: Vec<f64> = common.iter().map(|p| ra[**p]).collect();
            let xb: Vec<f64> = common.iter().map(|p| rb[**p]).collect();
            if let Ok(s) = srocc(&xa, &xb) {
                values.push(s);
            }
        }
    }
    if values.is_empty() {
        return Err(Error::Statistics(
            "inter-rater reliability: no rater pair shares three or more varied ratings".into(),
        ));
    }
    Ok(mean(&values))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAlignment {
    pub metric: String,
    pub srocc: Option<f64>,
    pub weighted: Option<FitMetrics>,
    pub nonlinear: Option<FitMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub logistic: Option<LogisticParams>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub errors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    /// Sorted by SROCC, highest first.
    pub metrics: Vec<MetricAlignment>,
    pub inter_rater_srocc: Option<f64>,
    pub pair_count: usize,
    pub rater_count: usize,
    pub flagged_raters: Vec<String>,
}

/// Metric name to (pair id to score).
pub type MetricScores = BTreeMap<String, BTreeMap<String, f64>>;

/// Runs the whole protocol: z-scores, MOS, three analyses per metric, and
/// inter-rater agreement.
pub fn alignment_report(scores: &MetricScores, ratings: &[RatingRecord]) -> Result<AlignmentReport> {
    ratings.iter().try_for_each(RatingRecord::check)?;
    let z = zscore_normalize(ratings);
    let mos = compute_mos(&z.ratings);

    let mut missing = BTreeSet::new();
    for table in scores.values() {
        for m in &mos {
            if !table.contains_key(&m.pair) {
                missing.insert(m.pair.clone());
            }
        }
    }
    if !missing.is_empty() {
        let ids: Vec<String> = missing.into_iter().collect();
        return Err(Error::Statistics(format!("missing metric scores for rated pairs: {}", ids.join(", "))));
    }

    let y: Vec<f64> = mos.iter().map(|m| m.mos).collect();
    let mut metrics: Vec<MetricAlignment> = scores
        .iter()
        .map(|(name, table)| {
            let x: Vec<f64> = mos.iter().map(|m| table[&m.pair]).collect();
            let mut errors = Vec::new();
            let srocc = srocc(&x, &y).map_err(|e| errors.push(format!("srocc: {e}"))).ok();
            let weighted = weighted_linear_fit(&x, &mos)
                .map_err(|e| errors.push(e.to_string()))
                .ok()
                .map(|f| f.metrics);
            let logistic = logistic_fit(&x, &mos).map_err(|e| errors.push(e.to_string())).ok();
            MetricAlignment {
                metric: name.clone(),
                srocc,
                weighted,
                nonlinear: logistic.as_ref().map(|f| f.metrics),
                logistic: logistic.map(|f| f.params),
                errors,
            }
        })
        .collect();
    metrics.sort_by(|a, b| {
        b.srocc
            .unwrap_or(f64::NEG_INFINITY)
            .total_cmp(&a.srocc.unwrap_or(f64::NEG_INFINITY))
            .then_with(|| a.metric.cmp(&b.metric))
    });

    let rater_count = ratings.iter().map(|r| r.rater.as_str()).collect::<BTreeSet<_>>().len();
    Ok(AlignmentReport {
        metrics,
        inter_rater_srocc: inter_rater_reliability(ratings).ok(),
        pair_count: mos.len(),
        rater_count,
        flagged_raters: z.flagged_raters,
    })
}

impl AlignmentReport {
    /// Plain-text table: weighted regression, logistic regression, then SROCC.
    pub fn to_table(&self) -> String {
        let cell = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.3}"));
        let width = self.metrics.iter().map(|m| m.metric.len()).max().unwrap_or(0).max(6);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:width$} | {:^31} | {:^31} | {:>6}",
            "",
            "Variance-Weighted Regression",
            "Non-Linear Regression",
            "Direct"
        );
        let _ = writeln!(
            out,
            "{:width$} | {:>7}{:>8}{:>8}{:>8} | {:>7}{:>8}{:>8}{:>8} | {:>6}",
            "Metric", "CC", "MAE", "RMS", "OR", "CC", "MAE", "RMS", "OR", "SROCC"
        );
        for m in &self.metrics {
            let four = |f: &Option<FitMetrics>| {
                [f.map(|f| f.cc), f.map(|f| f.mae), f.map(|f| f.rms), f.map(|f| f.or)].map(cell)
            };
            let [a, b, c, d] = four(&m.weighted);
            let [e, f, g, h] = four(&m.nonlinear);
            let _ = writeln!(
                out,
                "{:width$} | {a:>7}{b:>8}{c:>8}{d:>8} | {e:>7}{f:>8}{g:>8}{h:>8} | {:>6}",
                m.metric,
                cell(m.srocc)
            );
        }
        let _ = writeln!(
            out,
            "{:width$} | {:31} | {:31} | {:>6}",
            "Human",
            "",
            "",
            cell(self.inter_rater_srocc)
        );
        out
    }
}
