//! Nonincreasing majorants Λ on (0, 2] and the boundary sets they refer to.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GrowthError;
use crate::grid::DiskPoint;
use crate::quad;
use crate::weights::{parse_param, reject_unknown, spec_tokens};

/// Boundary set E: the point {1} or the whole circle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySet {
    #[default]
    Point,
    Circle,
}

impl BoundarySet {
    /// d(z, E).
    pub fn distance(&self, p: &DiskPoint) -> f64 {
        match self {
            BoundarySet::Point => p.dist_to_one(),
            BoundarySet::Circle => p.one_minus_r,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum LambdaSpec {
    /// scale·t^{−α}
    Power { alpha: f64, scale: f64 },
    /// scale·logᵝ(e + 1/t)
    Logpower { beta: f64, scale: f64 },
    /// Λ ≡ value
    Const { value: f64 },
    /// Λ ≡ 0, test mode only.
    Zero,
    /// Tabulated (t, Λ) pairs from a file.
    Table { file: String },
}

impl LambdaSpec {
    pub fn name(&self) -> &'static str {
        match self {
            LambdaSpec::Power { .. } => "power",
            LambdaSpec::Logpower { .. } => "logpower",
            LambdaSpec::Const { .. } => "const",
            LambdaSpec::Zero => "zero",
            LambdaSpec::Table { .. } => "table",
        }
    }
}

impl fmt::Display for LambdaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LambdaSpec::Power { alpha, scale } => write!(f, "lambda=power,alpha={alpha},scale={scale}"),
            LambdaSpec::Logpower { beta, scale } => {
                write!(f, "lambda=logpower,beta={beta},scale={scale}")
            }
            LambdaSpec::Const { value } => write!(f, "lambda=const,value={value}"),
            LambdaSpec::Zero => write!(f, "lambda=zero"),
            LambdaSpec::Table { file } => write!(f, "lambda=table,file={file}"),
        }
    }
}

/// Parses `lambda=power,alpha=1.0`, optionally with `set=point|circle`.
/// Returns the family and the boundary set.
pub fn parse_lambda(s: &str) -> Result<(LambdaSpec, BoundarySet), GrowthError> {
    let (head, mut params) = spec_tokens(s, "lambda").map_err(GrowthError::BadParameter)?;
    let set = match params.iter().position(|(k, _)| *k == "set") {
        Some(i) => {
            let (_, v) = params.remove(i);
            match v {
                "point" | "1" => BoundarySet::Point,
                "circle" | "T" => BoundarySet::Circle,
                other => return Err(GrowthError::BadParameter(format!("set={other}"))),
            }
        }
        None => BoundarySet::Point,
    };
    let bad = GrowthError::BadParameter;
    let spec = match head.as_str() {
        "power" => {
            reject_unknown(&params, &["alpha", "scale"]).map_err(bad)?;
            LambdaSpec::Power {
                alpha: parse_param(&params, "alpha", 1.0).map_err(bad)?,
                scale: parse_param(&params, "scale", 1.0).map_err(bad)?,
            }
        }
        "logpower" => {
            reject_unknown(&params, &["beta", "scale"]).map_err(bad)?;
            LambdaSpec::Logpower {
                beta: parse_param(&params, "beta", 1.0).map_err(bad)?,
                scale: parse_param(&params, "scale", 1.0).map_err(bad)?,
            }
        }
        "const" => {
            reject_unknown(&params, &["value"]).map_err(bad)?;
            LambdaSpec::Const {
                value: parse_param(&params, "value", 1.0).map_err(bad)?,
            }
        }
        "zero" => {
            reject_unknown(&params, &[]).map_err(bad)?;
            LambdaSpec::Zero
        }
        "table" => {
            reject_unknown(&params, &["file"]).map_err(bad)?;
            let file = params
                .iter()
                .find(|(k, _)| *k == "file")
                .map(|(_, v)| v.to_string())
                .ok_or_else(|| GrowthError::BadParameter("file".into()))?;
            LambdaSpec::Table { file }
        }
        other => return Err(GrowthError::UnknownFamily(other.to_string())),
    };
    Ok((spec, set))
}

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Power { alpha: f64, scale: f64 },
    Logpower { beta: f64, scale: f64 },
    Const(f64),
    /// ascending t with log-log linear interpolation
    Table { log_t: Vec<f64>, log_v: Vec<f64> },
}

/// A nonincreasing Λ: (0, 2] → [0, ∞) together with its boundary set.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaMajorant {
    law: Law,
    spec: LambdaSpec,
    set: BoundarySet,
}

impl FromStr for LambdaMajorant {
    type Err = GrowthError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (spec, set) = parse_lambda(s)?;
        Self::build(spec, set, None)
    }
}

impl LambdaMajorant {
    /// Builds and validates. `table` supplies (t, Λ(t)) pairs for
    /// [`LambdaSpec::Table`].
    pub fn build(
        spec: LambdaSpec,
        set: BoundarySet,
        table: Option<&[(f64, f64)]>,
    ) -> Result<Self, GrowthError> {
        let law = match spec {
            LambdaSpec::Power { alpha, scale } => {
                positive("alpha", alpha)?;
                positive("scale", scale)?;
                Law::Power { alpha, scale }
            }
            LambdaSpec::Logpower { beta, scale } => {
                positive("beta", beta)?;
                positive("scale", scale)?;
                Law::Logpower { beta, scale }
            }
            LambdaSpec::Const { value } => {
                positive("value", value)?;
                Law::Const(value)
            }
            LambdaSpec::Zero => Law::Const(0.0),
            LambdaSpec::Table { .. } => {
                let pts = table.ok_or_else(|| GrowthError::BadParameter("file".into()))?;
                let mut pts = pts.to_vec();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                if pts.len() < 2 || pts.iter().any(|&(t, v)| !(t > 0.0) || !(v > 0.0)) {
                    return Err(GrowthError::BadParameter(
                        "table needs at least two rows with positive t and Λ".into(),
                    ));
                }
                Law::Table {
                    log_t: pts.iter().map(|p| p.0.ln()).collect(),
                    log_v: pts.iter().map(|p| p.1.ln()).collect(),
                }
            }
        };
        let lam = Self { law, spec, set };
        lam.validate()?;
        Ok(lam)
    }

    pub fn power(alpha: f64) -> Self {
        Self::build(
            LambdaSpec::Power { alpha, scale: 1.0 },
            BoundarySet::Point,
            None,
        )
        .expect("valid power family")
    }

    pub fn zero() -> Self {
        Self::build(LambdaSpec::Zero, BoundarySet::Point, None).expect("zero family")
    }

    pub fn with_set(mut self, set: BoundarySet) -> Self {
        self.set = set;
        self
    }

    pub fn spec(&self) -> &LambdaSpec {
        &self.spec
    }

    pub fn set(&self) -> BoundarySet {
        self.set
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.spec, LambdaSpec::Zero)
    }

    pub fn tag(&self) -> String {
        match self.set {
            BoundarySet::Point => self.spec.to_string(),
            BoundarySet::Circle => format!("{},set=circle", self.spec),
        }
    }

    /// Λ(t). Arguments above 2 are clamped to 2; Λ(0) is +∞ for the
    /// unbounded families.
    pub fn value(&self, t: f64) -> f64 {
        let t = t.min(2.0);
        match &self.law {
            Law::Power { alpha, scale } => scale * t.powf(-alpha),
            Law::Logpower { beta, scale } => {
                scale * (std::f64::consts::E + 1.0 / t).ln().powf(*beta)
            }
            Law::Const(v) => *v,
            Law::Table { log_t, log_v } => {
                let x = t.ln();
                let n = log_t.len();
                if x <= log_t[0] {
                    return log_v[0].exp();
                }
                if x >= log_t[n - 1] {
                    return log_v[n - 1].exp();
                }
                let i = log_t.partition_point(|&v| v <= x) - 1;
                let s = (x - log_t[i]) / (log_t[i + 1] - log_t[i]);
                (log_v[i] + s * (log_v[i + 1] - log_v[i])).exp()
            }
        }
    }

    /// Λ(d(z, E)).
    pub fn at(&self, p: &DiskPoint) -> f64 {
        self.value(self.set.distance(p))
    }

    /// Spot check on 256 log-spaced pairs in (0, 2]: nonincreasing and
    /// positive (the zero family is exempt from positivity).
    pub fn validate(&self) -> Result<(), GrowthError> {
        let ts: Vec<f64> = (0..=256)
            .map(|i| 2.0 * 2f64.powf(-40.0 * (256 - i) as f64 / 256.0))
            .collect();
        for pair in ts.windows(2) {
            let (v1, v2) = (self.value(pair[0]), self.value(pair[1]));
            if v1 < v2 * (1.0 - 1e-12) {
                return Err(GrowthError::NonMonotone {
                    t1: pair[0],
                    t2: pair[1],
                });
            }
            if !self.is_zero() && !(v2 > 0.0) {
                return Err(GrowthError::NonPositive { t: pair[1] });
            }
        }
        Ok(())
    }
}

fn positive(name: &str, v: f64) -> Result<(), GrowthError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(GrowthError::BadParameter(format!("{name}={v} (must be positive)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegrabilityPartial {
    pub eps: f64,
    /// ∫_ε² Λ(t) dt
    pub integral: f64,
    /// Σ_{n ≤ ⌈1/ε⌉} Λ(1/n)/n²
    pub series: f64,
    pub terms: usize,
}

/// Partial integrals ∫_ε² Λ and the matching series partial sums.
/// The integral runs in s = log t, where the integrand Λ(eˢ)eˢ is smooth.
pub fn integrability_partials(
    lam: &LambdaMajorant,
    eps_list: &[f64],
) -> Result<Vec<IntegrabilityPartial>, GrowthError> {
    eps_list
        .iter()
        .map(|&eps| {
            if !(eps > 0.0 && eps < 2.0) {
                return Err(GrowthError::BadParameter(format!("eps={eps} outside (0, 2)")));
            }
            let r = quad::integrate(|s: f64| lam.value(s.exp()) * s.exp(), eps.ln(), 2f64.ln())?;
            let terms = (1.0 / eps).ceil() as usize;
            let series = (1..=terms)
                .map(|n| {
                    let x = n as f64;
                    lam.value(1.0 / x) / (x * x)
                })
                .sum();
            Ok(IntegrabilityPartial {
                eps,
                integral: r.value,
                series,
                terms,
            })
        })
        .collect()
}
