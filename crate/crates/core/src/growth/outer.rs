//! The outer functions f_δ with |f_δ| = e^{−Λ(δ)} on the arc δ ≤ |t| ≤ π,
//! harmonic measure of arcs, and grid estimates of the Λ-growth norm.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lambda::{BoundarySet, LambdaMajorant};
use super::GrowthError;
use crate::corona::logaddexp;
use crate::grid::{argmax, argmin, stolz_points, DiskPoint, GridSpec};
use crate::quad;
use crate::series::{exp_series, inner_abs_polar, AtomicSingularMeasure, TaylorSeries};

/// Harmonic measure at `p` of the counterclockwise arc from e^{ia} to e^{ib}
/// (0 < b − a < 2π). Closed form ϖ = α/π − (b−a)/(2π) with α the angle
/// subtended at z, taken in [0, 2π).
pub fn arc_measure(p: &DiskPoint, a: f64, b: f64) -> f64 {
    let z = p.z();
    let q = (Complex64::from_polar(1.0, b) - z) / (Complex64::from_polar(1.0, a) - z);
    let mut alpha = q.arg();
    if alpha < 0.0 {
        alpha += TAU;
    }
    (alpha / PI - (b - a) / TAU).clamp(0.0, 1.0)
}

/// ϖ(z, E_δ) for E_δ = {e^{it} : δ ≤ |t| ≤ π}.
pub fn harmonic_measure_arc(p: &DiskPoint, delta: f64) -> f64 {
    arc_measure(p, delta, TAU - delta)
}

/// Poisson integral of the indicator of E_δ by adaptive quadrature.
pub fn harmonic_measure_arc_quad(z: Complex64, delta: f64) -> Result<f64, GrowthError> {
    if !(z.norm() < 1.0) {
        return Err(GrowthError::OutsideDisk);
    }
    let p = DiskPoint::from_z(z);
    let num = p.one_minus_r2();
    let mut th = p.theta;
    if th < 0.0 {
        th += TAU;
    }
    let r = quad::integrate_with(
        |t: f64| num / p.dist_sq_to_circle_point(t),
        delta,
        TAU - delta,
        &[th],
        1e-11,
        1e-300,
    )?;
    Ok(r.value / TAU)
}

/// f_δ(z) = exp(−Λδ ∫_{δ<|t|<π} (e^{it}+z)/(e^{it}−z) dt), no 1/2π in front.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterFdelta {
    pub lambda_delta: f64,
    pub delta: f64,
}

impl OuterFdelta {
    pub fn new(lambda_delta: f64, delta: f64) -> Self {
        Self {
            lambda_delta,
            delta,
        }
    }

    /// For δ and Λ(δ) read off a majorant.
    pub fn from_lambda(lam: &LambdaMajorant, delta: f64) -> Self {
        Self::new(lam.value(delta), delta)
    }

    /// log|f_δ(z)| = −2πΛδ·ϖ(z, E_δ).
    pub fn log_abs(&self, p: &DiskPoint) -> f64 {
        if self.lambda_delta == 0.0 {
            return 0.0;
        }
        -TAU * self.lambda_delta * harmonic_measure_arc(p, self.delta)
    }

    /// log f_δ(z); the imaginary part is 2Λδ·log(|e^{−iδ}−z| / |e^{iδ}−z|).
    pub fn log_value(&self, p: &DiskPoint) -> Complex64 {
        let l = self.lambda_delta;
        let im = l
            * (p.dist_sq_to_circle_point(-self.delta).ln()
                - p.dist_sq_to_circle_point(self.delta).ln());
        Complex64::new(self.log_abs(p), im)
    }

    /// Taylor coefficients of log f_δ: φ₀ = −2Λδ(π−δ), φₖ = 4Λδ·sin(kδ)/k.
    pub fn log_coeffs(&self, m: usize) -> TaylorSeries {
        let l = self.lambda_delta;
        let c = (0..=m)
            .map(|k| {
                let v = if k == 0 {
                    -2.0 * l * (PI - self.delta)
                } else {
                    4.0 * l * (k as f64 * self.delta).sin() / k as f64
                };
                Complex64::new(v, 0.0)
            })
            .collect();
        TaylorSeries::new(c).expect("finite coefficients")
    }

    /// Taylor coefficients of f_δ through degree m. With `normalized` the
    /// constant factor f_δ(0) is dropped.
    pub fn taylor(&self, m: usize, normalized: bool) -> TaylorSeries {
        exp_series(&self.log_coeffs(m), m, normalized)
    }
}

/// log f_δ(z) by direct quadrature of the Herglotz integral on [δ, 2π−δ].
pub fn outer_fdelta(lambda_delta: f64, delta: f64, z: Complex64) -> Result<Complex64, GrowthError> {
    if !(z.norm() < 1.0) {
        return Err(GrowthError::OutsideDisk);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(GrowthError::BadParameter(format!("delta={delta} outside (0, 1]")));
    }
    if lambda_delta == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let mut th = z.arg();
    if th < 0.0 {
        th += TAU;
    }
    let kernel = |t: f64| {
        let e = Complex64::from_polar(1.0, t);
        (e + z) / (e - z)
    };
    let re = quad::integrate_with(|t| kernel(t).re, delta, TAU - delta, &[th], 1e-9, 1e-300)?;
    // the conjugate kernel can integrate to zero, so it gets an absolute floor
    let im = quad::integrate_with(|t| kernel(t).im, delta, TAU - delta, &[th], 1e-9, 1e-12)?;
    Ok(Complex64::new(re.value, im.value) * -lambda_delta)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnormEstimate {
    /// max over the grid of log|f(z)| − Λ(d(z, E)); −∞ for f ≡ 0.
    pub log_value: f64,
    pub argmax: Complex64,
    pub points: usize,
}

/// Grid estimate of log ‖f‖_{Λ,E,∞} from a log-modulus evaluator. This is a
/// lower bound for the true supremum.
pub fn bnorm_estimate<F>(log_abs: F, lam: &LambdaMajorant, pts: &[DiskPoint]) -> BnormEstimate
where
    F: Fn(&DiskPoint) -> f64 + Sync,
{
    match argmax(pts, |p| {
        let lf = log_abs(p);
        if lf == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            lf - lam.at(p)
        }
    }) {
        Some((v, i)) => BnormEstimate {
            log_value: v,
            argmax: pts[i].z(),
            points: pts.len(),
        },
        None => BnormEstimate {
            log_value: f64::NEG_INFINITY,
            argmax: Complex64::new(0.0, 0.0),
            points: 0,
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma4Report {
    pub delta: f64,
    pub a: f64,
    pub lambda_delta: f64,
    /// min over the region of log|f_δ| + 4π²Λ(δ)a
    pub margin9: f64,
    pub argmin9: Complex64,
    pub region_points: usize,
    /// min over the disk grid of −πΛ(δ) + Λ(|1−z|) − log|f_δ|
    pub margin11: f64,
    pub argmin11: Complex64,
    /// the same minimum restricted to |1−z| > δ
    pub margin11_far: f64,
    pub disk_points: usize,
    pub origin_closed: f64,
    pub origin_quad: f64,
    pub pass9: bool,
    pub pass11: bool,
    pub grid: GridSpec,
}

fn check_delta_a(delta: f64, a: f64) -> Result<(), GrowthError> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(GrowthError::BadParameter(format!("delta={delta} outside (0, 1)")));
    }
    if !(a > 0.0 && a < 1.0 / TAU) {
        return Err(GrowthError::BadParameter(format!("a={a} outside (0, 1/2π)")));
    }
    Ok(())
}

fn in_region(p: &DiskPoint, k: f64) -> bool {
    p.dist_sq_to_circle_point(0.0) <= k * p.one_minus_r2()
}

fn region_points(grid_pts: &[DiskPoint], k: f64, side: usize) -> Result<Vec<DiskPoint>, GrowthError> {
    if !(k >= 1e-12) {
        return Err(GrowthError::EmptyRegion { k });
    }
    let mut pts: Vec<DiskPoint> = stolz_points(k, side)
        .into_iter()
        .filter(|p| in_region(p, k))
        .collect();
    pts.extend(grid_pts.iter().filter(|p| in_region(p, k)).copied());
    if pts.is_empty() {
        return Err(GrowthError::EmptyRegion { k });
    }
    Ok(pts)
}

/// Lower bound (9) on the region |1−z|²/(1−|z|²) ≤ aδ and the pointwise
/// upper bound (11) on the grid, for E = {1}.
pub fn check_lemma4(
    lam: &LambdaMajorant,
    delta: f64,
    a: f64,
    grid: &GridSpec,
) -> Result<Lemma4Report, GrowthError> {
    check_delta_a(delta, a)?;
    let lam = lam.clone().with_set(BoundarySet::Point);
    let f = OuterFdelta::from_lambda(&lam, delta);
    let l = f.lambda_delta;
    let k = a * delta;
    let grid = GridSpec {
        stolz_k: Some(k),
        ..grid.clone()
    };
    let disk: Vec<DiskPoint> = grid.build();
    let region = region_points(&disk, k, grid.stolz_side)?;

    let bound9 = -4.0 * PI * PI * l * a;
    let (m9, i9) = argmin(&region, |p| f.log_abs(p) - bound9).ok_or(GrowthError::EmptyRegion { k })?;
    let slack11 = |p: &DiskPoint| -PI * l + lam.value(p.dist_to_one()) - f.log_abs(p);
    let (m11, i11) = argmin(&disk, slack11).ok_or(GrowthError::EmptyRegion { k })?;
    let far: Vec<DiskPoint> = disk.iter().filter(|p| p.dist_to_one() > delta).copied().collect();
    let m11_far = argmin(&far, slack11).map_or(f64::INFINITY, |v| v.0);

    let origin_closed = -2.0 * l * (PI - delta);
    let origin_quad = outer_fdelta(l, delta, Complex64::new(0.0, 0.0))?.re;
    Ok(Lemma4Report {
        delta,
        a,
        lambda_delta: l,
        margin9: m9,
        argmin9: region[i9].z(),
        region_points: region.len(),
        margin11: m11,
        argmin11: disk[i11].z(),
        margin11_far: m11_far,
        disk_points: disk.len(),
        origin_closed,
        origin_quad,
        pass9: m9 >= 0.0,
        pass11: m11 >= 0.0,
        grid,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicFloor {
    pub delta: f64,
    pub min: f64,
    pub argmin: Complex64,
    pub points: usize,
}

/// min of ϖ(z, E_δ) over grid points with |z − 1| > δ.
pub fn harmonic_floor(delta: f64, grid: &GridSpec) -> HarmonicFloor {
    let pts: Vec<DiskPoint> = grid
        .build()
        .into_iter()
        .filter(|p| p.dist_to_one() > delta)
        .collect();
    let (min, i) = argmin(&pts, |p| harmonic_measure_arc(p, delta)).unwrap_or((f64::NAN, 0));
    HarmonicFloor {
        delta,
        min,
        argmin: pts.get(i).map_or(Complex64::new(0.0, 0.0), |p| p.z()),
        points: pts.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma5Report {
    pub c: f64,
    pub n: usize,
    pub lambda_n: f64,
    pub delta: f64,
    pub a: f64,
    /// grid min of log(|f_δ| + |I_c|)
    pub inf_log: f64,
    pub inf_bound_log: f64,
    pub inf_margin: f64,
    pub inf_argmin: Complex64,
    pub bnorm_log: f64,
    pub bnorm_bound_log: f64,
    pub bnorm_margin: f64,
    pub bnorm_argmax: Complex64,
    /// −inf_log / √(cnΛ(1/n)), the constant the infimum actually needs
    pub b_eff: Option<f64>,
    pub points: usize,
    pub pass: bool,
    pub grid: GridSpec,
}

/// Corona-type infimum and growth bound for the pair (f_{1/n}, I_c) with
/// δ = 1/n and a = √(cn/Λ(1/n)).
pub fn check_lemma5(c: f64, n: usize, lam: &LambdaMajorant) -> Result<Lemma5Report, GrowthError> {
    if !(c >= 0.0 && c.is_finite()) {
        return Err(GrowthError::BadParameter(format!("c={c}")));
    }
    if n < 2 {
        return Err(GrowthError::BadParameter(format!("n={n} (need n ≥ 2 so that δ < 1)")));
    }
    let lam = lam.clone().with_set(BoundarySet::Point);
    let nf = n as f64;
    let delta = 1.0 / nf;
    let lambda_n = lam.value(delta);
    let ratio = 4.0 * PI * PI * c * nf / lambda_n;
    if !(ratio <= 1.0) {
        return Err(GrowthError::HypothesisViolated { ratio });
    }
    let a = (c * nf / lambda_n).sqrt();
    let mut grid = GridSpec::standard().with_clusters(&[0.0], crate::corona::ATOM_CLUSTER);
    if a * delta >= 1e-12 {
        grid = grid.with_stolz(a * delta);
    }
    let pts = grid.build();
    let f = OuterFdelta::new(lambda_n, delta);
    let nu = if c > 0.0 {
        AtomicSingularMeasure::point_mass(c).map_err(|e| GrowthError::BadParameter(e.to_string()))?
    } else {
        AtomicSingularMeasure::empty()
    };
    let (inf_log, i) = argmin(&pts, |p| {
        logaddexp(f.log_abs(p), inner_abs_polar(&nu, p.r, p.one_minus_r, p.theta))
    })
    .ok_or(GrowthError::EmptyRegion { k: a * delta })?;
    let root = (c * nf * lambda_n).sqrt();
    let inf_bound = -4.0 * PI * PI * root;
    let b = bnorm_estimate(|p| f.log_abs(p), &lam, &pts);
    let bnorm_bound = -PI * lambda_n;
    let b_eff = (root > 0.0).then(|| (-inf_log).max(0.0) / root);
    Ok(Lemma5Report {
        c,
        n,
        lambda_n,
        delta,
        a,
        inf_log,
        inf_bound_log: inf_bound,
        inf_margin: inf_log - inf_bound,
        inf_argmin: pts[i].z(),
        bnorm_log: b.log_value,
        bnorm_bound_log: bnorm_bound,
        bnorm_margin: bnorm_bound - b.log_value,
        bnorm_argmax: b.argmax,
        b_eff,
        points: pts.len(),
        pass: inf_log >= inf_bound && b.log_value <= bnorm_bound,
        grid,
    })
}
