//! Weight sequences for the spaces A²_ω, stored as log ω(n).
//!
//! Everything in this module works with `log ω(n)` directly; the step family
//! reaches ω = e¹²⁸ well inside the default horizon, so ω itself is never
//! materialized.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default materialized horizon, 2¹⁶.
pub const DEFAULT_HORIZON: usize = 1 << 16;

/// Slack used by the discrete concavity test; piecewise-linear envelopes sit
/// exactly on the boundary of the inequality and only differ by rounding.
const CONCAVITY_SLACK: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("unknown weight family `{0}`")]
    UnknownFamily(String),
    #[error("unknown or malformed parameter `{0}`")]
    BadParameter(String),
    #[error("parameter `{name}` must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("family `{0}` is non-conforming and requires the unchecked flag")]
    NeedsUnchecked(String),
    #[error("weight decreases at index {index}: log ω({index}) < log ω({prev})", prev = .index - 1)]
    NonMonotone { index: usize },
    #[error("log ω({index}) = {value} is negative")]
    Negative { index: usize, value: f64 },
    #[error("horizon must be at least 1")]
    EmptyHorizon,
    #[error("requested index {requested} exceeds horizon {horizon}")]
    BeyondHorizon { requested: usize, horizon: usize },
    #[error("ladder seed must satisfy s(n0) > 0, got s({n0}) = {value}")]
    LadderSeed { n0: usize, value: f64 },
    #[error("only {available} ladder rungs available, {requested} requested")]
    NotEnoughRungs { available: usize, requested: usize },
}

/// Parsed weight family, before materialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FamilySpec {
    /// log ω(n) = α·log(n+1)
    Power { alpha: f64 },
    /// log ω(n) = c·nᵝ, 0 < β < 1
    Stretched { c: f64, beta: f64 },
    /// Two-level step weight with log ω(n) = 2^(2ʲ−1) on [2^(2ʲ), 2^(2ʲ⁺¹)).
    Step,
    /// min(step, n / log²(n+2)); keeps log ω(n) = o(n).
    SmoothedStep,
    /// ω ≡ 1 (H² test mode). Non-conforming.
    Flat,
    /// ω(2n) = 1, ω(2n+1) = e^{√n}. Non-conforming, non-monotone.
    Remark3,
    /// Explicit log-values read from a file, one per line.
    Table { file: String },
}

impl FamilySpec {
    pub fn name(&self) -> &'static str {
        match self {
            FamilySpec::Power { .. } => "power",
            FamilySpec::Stretched { .. } => "stretched",
            FamilySpec::Step => "step",
            FamilySpec::SmoothedStep => "smoothed_step",
            FamilySpec::Flat => "flat",
            FamilySpec::Remark3 => "remark3",
            FamilySpec::Table { .. } => "table",
        }
    }

    fn requires_unchecked(&self) -> bool {
        matches!(self, FamilySpec::Flat | FamilySpec::Remark3)
    }
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilySpec::Power { alpha } => write!(f, "family=power,alpha={alpha}"),
            FamilySpec::Stretched { c, beta } => write!(f, "family=stretched,c={c},beta={beta}"),
            FamilySpec::Table { file } => write!(f, "family=table,file={file}"),
            other => write!(f, "family={}", other.name()),
        }
    }
}

/// Splits `key=value` tokens of a comma-separated spec string. The first
/// token may omit its key (`power,alpha=1` is the same as
/// `family=power,alpha=1`).
pub(crate) fn spec_tokens<'a>(
    s: &'a str,
    head_key: &str,
) -> Result<(String, Vec<(&'a str, &'a str)>), String> {
    let mut parts = s.split(',').map(str::trim).filter(|p| !p.is_empty());
    let head = parts.next().ok_or_else(|| s.to_string())?;
    let head = match head.split_once('=') {
        Some((k, v)) if k == head_key => v,
        Some(_) => return Err(head.to_string()),
        None => head,
    };
    let mut params = Vec::new();
    for p in parts {
        let (k, v) = p.split_once('=').ok_or_else(|| p.to_string())?;
        params.push((k.trim(), v.trim()));
    }
    Ok((head.to_ascii_lowercase(), params))
}

pub(crate) fn parse_param(params: &[(&str, &str)], key: &str, default: f64) -> Result<f64, String> {
    match params.iter().find(|(k, _)| *k == key) {
        Some((k, v)) => v.parse::<f64>().map_err(|_| format!("{k}={v}")),
        None => Ok(default),
    }
}

pub(crate) fn reject_unknown(params: &[(&str, &str)], allowed: &[&str]) -> Result<(), String> {
    match params.iter().find(|(k, _)| !allowed.contains(k)) {
        Some((k, v)) => Err(format!("{k}={v}")),
        None => Ok(()),
    }
}

impl FromStr for FamilySpec {
    type Err = WeightError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (head, params) = spec_tokens(s, "family").map_err(WeightError::BadParameter)?;
        let spec = match head.as_str() {
            "power" => {
                reject_unknown(&params, &["alpha"]).map_err(WeightError::BadParameter)?;
                let alpha = parse_param(&params, "alpha", 1.0).map_err(WeightError::BadParameter)?;
                FamilySpec::Power { alpha }
            }
            "stretched" => {
                reject_unknown(&params, &["c", "beta"]).map_err(WeightError::BadParameter)?;
                let c = parse_param(&params, "c", 1.0).map_err(WeightError::BadParameter)?;
                let beta = parse_param(&params, "beta", 0.5).map_err(WeightError::BadParameter)?;
                FamilySpec::Stretched { c, beta }
            }
            "step" | "smoothed_step" | "flat" | "remark3" => {
                reject_unknown(&params, &[]).map_err(WeightError::BadParameter)?;
                match head.as_str() {
                    "step" => FamilySpec::Step,
                    "smoothed_step" => FamilySpec::SmoothedStep,
                    "flat" => FamilySpec::Flat,
                    _ => FamilySpec::Remark3,
                }
            }
            "table" => {
                reject_unknown(&params, &["file"]).map_err(WeightError::BadParameter)?;
                let file = params
                    .iter()
                    .find(|(k, _)| *k == "file")
                    .map(|(_, v)| v.to_string())
                    .ok_or_else(|| WeightError::BadParameter("file".into()))?;
                FamilySpec::Table { file }
            }
            other => return Err(WeightError::UnknownFamily(other.to_string())),
        };
        Ok(spec)
    }
}

/// Closed-form families that can be evaluated past the materialized prefix.
#[derive(Debug, Clone, PartialEq)]
enum Law {
    Power { alpha: f64 },
    Stretched { c: f64, beta: f64 },
    Step,
    SmoothedStep,
    Flat,
    Remark3,
    Tabulated,
}

impl Law {
    fn eval(&self, n: usize) -> Option<f64> {
        let x = n as f64;
        Some(match *self {
            Law::Power { alpha } => alpha * (x + 1.0).ln(),
            Law::Stretched { c, beta } => c * x.powf(beta),
            Law::Step => step_log_weight(n),
            Law::SmoothedStep => {
                let step = step_log_weight(n);
                if n < 4 {
                    step
                } else {
                    let l = (x + 2.0).ln();
                    step.min(x / (l * l))
                }
            }
            Law::Flat => 0.0,
            Law::Remark3 => {
                if n.is_multiple_of(2) {
                    0.0
                } else {
                    ((n / 2) as f64).sqrt()
                }
            }
            Law::Tabulated => return None,
        })
    }
}

/// log ω(n) for the two-level step weight: 2^(2ʲ−1) on [2^(2ʲ), 2^(2ʲ⁺¹)),
/// zero below 4.
pub fn step_log_weight(n: usize) -> f64 {
    if n < 4 {
        return 0.0;
    }
    // largest j with 2^(2^j) <= n, i.e. 2^j <= log2 n
    let log2n = usize::BITS - 1 - n.leading_zeros();
    let j = u32::BITS - 1 - log2n.leading_zeros();
    2f64.powi((1i32 << j) - 1)
}

/// A weight sequence stored as log ω(n) for n = 0..=horizon.
#[derive(Debug, Clone)]
pub struct WeightSequence {
    logw: Arc<[f64]>,
    law: Law,
    tag: String,
    unchecked: bool,
}

impl PartialEq for WeightSequence {
    fn eq(&self, other: &Self) -> bool {
        self.logw == other.logw && self.unchecked == other.unchecked
    }
}

impl WeightSequence {
    /// Builds a tabulated weight from explicit log-values. Values must be
    /// nonnegative, and nondecreasing unless `unchecked` is set.
    pub fn from_log_values(
        values: Vec<f64>,
        tag: impl Into<String>,
        unchecked: bool,
    ) -> Result<Self, WeightError> {
        if values.len() < 2 {
            return Err(WeightError::EmptyHorizon);
        }
        Self::checked(values.into(), Law::Tabulated, tag.into(), unchecked)
    }

    fn checked(
        logw: Arc<[f64]>,
        law: Law,
        tag: String,
        unchecked: bool,
    ) -> Result<Self, WeightError> {
        for (index, &value) in logw.iter().enumerate() {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(WeightError::Negative { index, value });
            }
        }
        if !unchecked {
            if let Some(index) = (1..logw.len()).find(|&n| logw[n] < logw[n - 1]) {
                return Err(WeightError::NonMonotone { index });
            }
        }
        Ok(Self {
            logw,
            law,
            tag,
            unchecked,
        })
    }

    pub fn horizon(&self) -> usize {
        self.logw.len() - 1
    }

    /// Descriptive label (family and parameters).
    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn is_unchecked(&self) -> bool {
        self.unchecked
    }

    /// True when log ω is nondecreasing on the materialized prefix.
    pub fn is_monotone(&self) -> bool {
        self.logw.windows(2).all(|w| w[1] >= w[0])
    }

    /// log ω(n). Closed-form families are evaluated past the horizon;
    /// tabulated ones return `None` there.
    pub fn get(&self, n: usize) -> Option<f64> {
        self.logw.get(n).copied().or_else(|| self.law.eval(n))
    }

    /// log ω(n); panics past the horizon of a tabulated weight.
    pub fn log_weight(&self, n: usize) -> f64 {
        self.get(n).unwrap_or_else(|| {
            panic!(
                "log ω({n}) requested beyond horizon {} of tabulated weight `{}`",
                self.horizon(),
                self.tag
            )
        })
    }

    /// Materialized prefix log ω(0..=horizon).
    pub fn values(&self) -> &[f64] {
        &self.logw
    }

    /// Restriction (or lazy extension, for closed forms) to a new horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Self, WeightError> {
        let values: Option<Vec<f64>> = (0..=horizon).map(|n| self.get(n)).collect();
        let values = values.ok_or(WeightError::BeyondHorizon {
            requested: horizon,
            horizon: self.horizon(),
        })?;
        Ok(Self {
            logw: values.into(),
            law: self.law.clone(),
            tag: self.tag.clone(),
            unchecked: self.unchecked,
        })
    }

    fn require(&self, n: usize) -> Result<(), WeightError> {
        if n > self.horizon() {
            Err(WeightError::BeyondHorizon {
                requested: n,
                horizon: self.horizon(),
            })
        } else {
            Ok(())
        }
    }
}

/// Materializes a family on [0, horizon].
///
/// `table` supplies the values for [`FamilySpec::Table`]; it is ignored for
/// the closed-form families. Reading the file is the caller's job so that
/// this stays free of I/O.
pub fn make_family(
    spec: &FamilySpec,
    horizon: usize,
    unchecked: bool,
    table: Option<&[f64]>,
) -> Result<WeightSequence, WeightError> {
    if horizon < 1 {
        return Err(WeightError::EmptyHorizon);
    }
    if spec.requires_unchecked() && !unchecked {
        return Err(WeightError::NeedsUnchecked(spec.name().to_string()));
    }
    let law = match *spec {
        FamilySpec::Power { alpha } => {
            positive("alpha", alpha)?;
            Law::Power { alpha }
        }
        FamilySpec::Stretched { c, beta } => {
            positive("c", c)?;
            positive("beta", beta)?;
            if beta >= 1.0 {
                return Err(WeightError::BadParameter(format!("beta={beta} (need beta < 1)")));
            }
            Law::Stretched { c, beta }
        }
        FamilySpec::Step => Law::Step,
        FamilySpec::SmoothedStep => Law::SmoothedStep,
        FamilySpec::Flat => Law::Flat,
        FamilySpec::Remark3 => Law::Remark3,
        FamilySpec::Table { .. } => {
            let values = table.ok_or_else(|| WeightError::BadParameter("file".into()))?;
            if values.len() <= horizon {
                return Err(WeightError::BeyondHorizon {
                    requested: horizon,
                    horizon: values.len().saturating_sub(1),
                });
            }
            let logw: Arc<[f64]> = values[..=horizon].into();
            return WeightSequence::checked(logw, Law::Tabulated, spec.to_string(), unchecked);
        }
    };
    let logw: Arc<[f64]> = (0..=horizon).map(|n| law.eval(n).unwrap_or(0.0)).collect();
    WeightSequence::checked(logw, law, spec.to_string(), unchecked)
}

fn positive(name: &'static str, value: f64) -> Result<(), WeightError> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(WeightError::NonPositive { name, value })
    }
}

/// Parses a table file body: one log-value per line, blank lines and `#`
/// comments ignored.
pub fn parse_table(text: &str) -> Result<Vec<f64>, WeightError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| WeightError::BadParameter(format!("table value `{l}`")))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub horizon: usize,
    pub monotone: bool,
    pub logconcave: bool,
    /// First n with 2·log ω(n) < log ω(n−1) + log ω(n+1).
    pub first_concavity_violation: Option<usize>,
    /// (n, log ω(n)/n) at n = 2ᵏ ≤ horizon.
    pub ratio_trend: Vec<(usize, f64)>,
    /// Heuristic: log ω still rises over the last octave of the horizon.
    pub grows_unbounded: bool,
}

/// Discrete log-concavity at an interior index.
pub fn concave_at(logw: &[f64], n: usize) -> bool {
    let lhs = 2.0 * logw[n];
    let rhs = logw[n - 1] + logw[n + 1];
    lhs >= rhs - CONCAVITY_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

pub fn validate(w: &WeightSequence, horizon: usize) -> ValidationReport {
    let horizon = horizon.min(w.horizon());
    let l = &w.values()[..=horizon];
    let monotone = l.windows(2).all(|p| p[1] >= p[0]);
    let first_concavity_violation = (1..horizon).find(|&n| !concave_at(l, n));
    let ratio_trend = std::iter::successors(Some(1usize), |n| n.checked_mul(2))
        .take_while(|&n| n <= horizon)
        .map(|n| (n, l[n] / n as f64))
        .collect();
    let grows_unbounded = l[horizon] > 0.0 && l[horizon] > l[horizon / 2];
    ValidationReport {
        horizon,
        monotone,
        logconcave: first_concavity_violation.is_none(),
        first_concavity_violation,
        ratio_trend,
        grows_unbounded,
    }
}

/// Σ_{n=1..N} (log ω(n))²/n².
pub fn partial_sum_theorem1(w: &WeightSequence, n_max: usize) -> Result<f64, WeightError> {
    w.require(n_max)?;
    Ok((1..=n_max)
        .map(|n| {
            let l = w.log_weight(n);
            let x = n as f64;
            l * l / (x * x)
        })
        .sum())
}

/// Σ_{n=1..N} log ω(n)/n^{3/2}.
pub fn partial_sum_beurling(w: &WeightSequence, n_max: usize) -> Result<f64, WeightError> {
    w.require(n_max)?;
    Ok((1..=n_max)
        .map(|n| {
            let x = n as f64;
            w.log_weight(n) / (x * x.sqrt())
        })
        .sum())
}

/// Partial sums at the geometric checkpoints N = 2ᵏ ≤ horizon, with the
/// least-squares slope of log(partial sum) against log N over the checkpoints
/// whose sum is positive. The slope is a heuristic divergence indicator only.
#[derive(Debug, Clone, Serialize)]
pub struct Checkpoints {
    pub points: Vec<(usize, f64, f64)>,
    pub slope_theorem1: Option<f64>,
    pub slope_beurling: Option<f64>,
}

pub fn checkpoints(w: &WeightSequence) -> Checkpoints {
    let horizon = w.horizon();
    let mut points = Vec::new();
    let (mut s1, mut s2) = (0.0, 0.0);
    let mut next = 1usize;
    for n in 1..=horizon {
        let l = w.log_weight(n);
        let x = n as f64;
        s1 += l * l / (x * x);
        s2 += l / (x * x.sqrt());
        if n == next {
            points.push((n, s1, s2));
            next *= 2;
        }
    }
    let slope = |pick: fn(&(usize, f64, f64)) -> f64| {
        let pts: Vec<(f64, f64)> = points
            .iter()
            .filter(|p| pick(p) > 0.0)
            .map(|p| ((p.0 as f64).ln(), pick(p).ln()))
            .collect();
        log_log_slope(&pts)
    };
    Checkpoints {
        slope_theorem1: slope(|p| p.1),
        slope_beurling: slope(|p| p.2),
        points,
    }
}

fn log_log_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Indices where a monitored sequence at least doubles.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladder {
    pub rungs: Vec<usize>,
    /// Set when the horizon ran out before the requested number of rungs.
    pub truncated: bool,
}

/// Builds n₀ = `n0`, n_{j+1} = min{n > n_j : s(n) ≥ 2·s(n_j)}, scanning
/// ascending up to `horizon`, until `rungs` indices are found.
pub fn ladder<S>(s: S, horizon: usize, rungs: usize, n0: usize) -> Result<Ladder, WeightError>
where
    S: Fn(usize) -> f64,
{
    let seed = s(n0);
    if !(seed > 0.0) {
        return Err(WeightError::LadderSeed { n0, value: seed });
    }
    let mut out = vec![n0];
    let mut target = 2.0 * seed;
    let mut n = n0;
    while out.len() < rungs {
        n += 1;
        if n > horizon {
            return Ok(Ladder {
                rungs: out,
                truncated: true,
            });
        }
        let v = s(n);
        if v >= target {
            out.push(n);
            target = 2.0 * v;
        }
    }
    Ok(Ladder {
        rungs: out,
        truncated: false,
    })
}

/// Ladder on s = log ω, seeded at the first n ≥ 1 with log ω(n) > 0
/// (n₀ = 1 for every family except the step weights, which start flat).
pub fn weight_ladder(w: &WeightSequence, rungs: usize) -> Result<Ladder, WeightError> {
    let n0 = (1..=w.horizon()).find(|&n| w.log_weight(n) > 0.0).unwrap_or(1);
    ladder(|n| w.log_weight(n), w.horizon(), rungs, n0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LadderSumMode {
    /// Σ s(n_j)²/n_j
    Squared,
    /// Σ s(n_j)/n_j
    Plain,
}

pub fn ladder_divergence_partial<S>(
    s: S,
    rungs: &[usize],
    count: usize,
    mode: LadderSumMode,
) -> Result<f64, WeightError>
where
    S: Fn(usize) -> f64,
{
    if count > rungs.len() {
        return Err(WeightError::NotEnoughRungs {
            available: rungs.len(),
            requested: count,
        });
    }
    Ok(rungs[..count]
        .iter()
        .map(|&n| {
            let v = s(n);
            match mode {
                LadderSumMode::Squared => v * v / n as f64,
                LadderSumMode::Plain => v / n as f64,
            }
        })
        .sum())
}

/// Least concave majorant of n ↦ log ω(n) on [0, horizon]: upper hull of the
/// points by monotone chain, then linear interpolation between vertices.
pub fn log_concave_envelope(w: &WeightSequence, horizon: usize) -> Result<WeightSequence, WeightError> {
    w.require(horizon)?;
    let l = &w.values()[..=horizon];
    let hull = upper_hull(l);
    let mut out = vec![0.0; horizon + 1];
    for pair in hull.windows(2) {
        let (x0, x1) = (pair[0], pair[1]);
        let (y0, y1) = (l[x0], l[x1]);
        let span = (x1 - x0) as f64;
        for (n, slot) in out.iter_mut().enumerate().take(x1 + 1).skip(x0) {
            let t = (n - x0) as f64 / span;
            *slot = y0 + (y1 - y0) * t;
        }
    }
    if hull.len() == 1 {
        out[0] = l[0];
    }
    WeightSequence::checked(
        out.into(),
        Law::Tabulated,
        format!("envelope({})", w.tag()),
        w.is_unchecked(),
    )
}

/// Indices of the upper convex hull vertices of (n, y[n]), left to right.
/// Collinear interior points are dropped.
fn upper_hull(y: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for n in 0..y.len() {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // keep b only if it lies strictly above the chord a→n
            let cross = (b - a) as f64 * (y[n] - y[a]) - (n - a) as f64 * (y[b] - y[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(n);
    }
    hull
}
