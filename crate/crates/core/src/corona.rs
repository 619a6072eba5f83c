//! Lower bounds for |U| + |z|ⁿ and least-squares Bezout pairs.
//!
//! No certified corona solver is attempted. Bezout pairs come from a
//! truncated-SVD least-squares fit of Taylor coefficients, and their sup
//! norms are measured on a circle close to 𝕋.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bergman::{self, BergmanError};
use crate::grid::{argmin, DiskPoint, GridSpec};
use crate::series::{
    inner_abs_polar, inner_coeffs, multiply, sup_circle_refined, AtomicSingularMeasure,
    SeriesError, TaylorSeries,
};
use crate::weights::WeightSequence;

/// Radius for sup-norm measurements.
pub const SUP_RADIUS: f64 = 1.0 - 1e-4;
pub const SUP_K0: usize = 4096;
pub const SUP_REL: f64 = 1e-3;
pub const SUP_K_MAX: usize = 1 << 20;
/// A least-squares pair counts as a Bezout solution below this residual.
pub const BEZOUT_RESIDUAL_TOL: f64 = 1e-6;
/// Extra angles per radius around each atom in the infimum grid.
pub const ATOM_CLUSTER: usize = 512;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoronaError {
    #[error("grid specification is empty")]
    EmptyGrid,
    #[error("matching degree M = {m} is below n + d = {need}")]
    MatchTooSmall { m: usize, need: usize },
    #[error("generator has degree {have} but matching needs {m}")]
    ShortGenerator { have: usize, m: usize },
    #[error("sup-norm sample count {k} too small for degree {d}")]
    TooFewSamples { k: usize, d: usize },
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Bergman(#[from] BergmanError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfimumReport {
    pub n: usize,
    pub c: f64,
    pub measured_inf_log: f64,
    pub bound_log: f64,
    pub margin: f64,
    pub argmin: Complex64,
    pub pass: bool,
    pub points: usize,
}

/// Standard infimum grid: radii 1 − 2⁻ᵏ (k ≤ 40) × 4096 angles, 512 extra
/// angles within 2⁻ᵏ of every atom, and the origin.
pub fn infimum_grid(nu: &AtomicSingularMeasure) -> GridSpec {
    let angles: Vec<f64> = nu.atoms().iter().map(|a| a.angle).collect();
    GridSpec::standard().with_clusters(&angles, ATOM_CLUSTER)
}

/// log(eᵃ + eᵇ) without overflow.
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// n·log r, with the convention 0·log 0 = 0.
fn log_rn(n: usize, p: &DiskPoint) -> f64 {
    if n == 0 {
        0.0
    } else if p.r == 0.0 {
        f64::NEG_INFINITY
    } else {
        n as f64 * (-p.one_minus_r).ln_1p()
    }
}

/// Grid minimum of log(|U(z)| + |z|ⁿ) against −2c√n, c² = ν(𝕋).
pub fn infimum_check(
    nu: &AtomicSingularMeasure,
    n: usize,
    grid: &GridSpec,
) -> Result<InfimumReport, CoronaError> {
    if grid.is_empty() {
        return Err(CoronaError::EmptyGrid);
    }
    let pts = grid.build();
    let (measured, idx) = argmin(&pts, |p| {
        let lu = inner_abs_polar(nu, p.r, p.one_minus_r, p.theta);
        logaddexp(lu, log_rn(n, p))
    })
    .ok_or(CoronaError::EmptyGrid)?;
    let c = nu.c();
    let bound = -2.0 * c * (n as f64).sqrt();
    Ok(InfimumReport {
        n,
        c,
        measured_inf_log: measured,
        bound_log: bound,
        margin: measured - bound,
        argmin: pts[idx].z(),
        pass: measured >= bound,
        points: pts.len(),
    })
}

/// Least-squares pair for f·U + g·V ≈ 1.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSolution {
    pub f: TaylorSeries,
    pub g: TaylorSeries,
    pub residual_l2: f64,
    pub rank: usize,
    pub columns: usize,
}

fn lsq<T>(a: DMatrix<T>, b: DVector<T>) -> (DVector<T>, usize)
where
    T: ComplexField<RealField = f64>,
{
    let (rows, cols) = a.shape();
    // column equilibration
    let scale: Vec<f64> = (0..cols)
        .map(|j| {
            let s = a.column(j).norm();
            if s > 0.0 {
                1.0 / s
            } else {
                1.0
            }
        })
        .collect();
    let mut a = a;
    for (j, &s) in scale.iter().enumerate() {
        a.column_mut(j).scale_mut(s);
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let eps = f64::EPSILON * rows.max(cols) as f64 * smax;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    let mut x = svd.solve(&b, eps).expect("u and v were computed");
    for (j, &s) in scale.iter().enumerate() {
        x[j] *= T::from_real(s);
    }
    (x, rank)
}

fn column_block(series: &TaylorSeries, d: usize, m: usize) -> Vec<Vec<Complex64>> {
    (0..=d)
        .map(|k| (0..=m).map(|row| if row >= k { series.coeff(row - k) } else { Complex64::default() }).collect())
        .collect()
}

/// Minimizes Σ_{m≤M} |coef_m(fU + gV − 1)|² over deg f, deg g ≤ d.
pub fn bezout_pair(u: &TaylorSeries, v: &TaylorSeries, d: usize, m: usize) -> PairSolution {
    let mut cols = column_block(u, d, m);
    cols.extend(column_block(v, d, m));
    let ncols = cols.len();
    let rows = m + 1;
    let real = u.is_real() && v.is_real();
    let (x, rank): (Vec<Complex64>, usize) = if real {
        let a = DMatrix::<f64>::from_fn(rows, ncols, |i, j| cols[j][i].re);
        let mut b = DVector::<f64>::zeros(rows);
        b[0] = 1.0;
        let (x, rank) = lsq(a, b);
        (x.iter().map(|&v| Complex64::new(v, 0.0)).collect(), rank)
    } else {
        let a = DMatrix::<Complex64>::from_fn(rows, ncols, |i, j| cols[j][i]);
        let mut b = DVector::<Complex64>::zeros(rows);
        b[0] = Complex64::new(1.0, 0.0);
        let (x, rank) = lsq(a, b);
        (x.iter().copied().collect(), rank)
    };
    // model residual A x − e₀
    let mut resid = vec![Complex64::default(); rows];
    resid[0] = Complex64::new(-1.0, 0.0);
    for (j, col) in cols.iter().enumerate() {
        if x[j] == Complex64::default() {
            continue;
        }
        for (r, &a) in resid.iter_mut().zip(col) {
            *r += a * x[j];
        }
    }
    let residual_l2 = resid.iter().map(|r| r.norm_sqr()).sum::<f64>().sqrt();
    PairSolution {
        f: TaylorSeries::new(x[..=d].to_vec()).expect("finite solve"),
        g: TaylorSeries::new(x[d + 1..].to_vec()).expect("finite solve"),
        residual_l2,
        rank,
        columns: ncols,
    }
}

/// Coefficients of fU + gV − 1 through degree M by direct convolution.
pub fn pair_residual(
    f: &TaylorSeries,
    u: &TaylorSeries,
    g: &TaylorSeries,
    v: &TaylorSeries,
    m: usize,
) -> TaylorSeries {
    multiply(f, u, m)
        .add(&multiply(g, v, m))
        .sub(&TaylorSeries::one(0))
        .truncated(m)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BezoutSolution {
    pub f: TaylorSeries,
    pub g: TaylorSeries,
    pub n: usize,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub residual_l2: f64,
    pub f_sup: f64,
    pub g_sup: f64,
    /// Final sample count of the sup measurement.
    pub sup_samples: usize,
    /// log(2⁵δ_n⁻³) = 5 log 2 + 6c√n.
    pub corona_bound_log: f64,
    pub corona_bound: f64,
    pub rank: usize,
    pub rank_deficient: bool,
    pub pass: bool,
}

/// Measured sup of a polynomial on |z| = 1 − 10⁻⁴, doubling the sample count.
pub fn measured_sup(p: &TaylorSeries) -> Result<(f64, usize), CoronaError> {
    Ok(sup_circle_refined(|z| p.eval(z), SUP_RADIUS, SUP_K0, SUP_REL, SUP_K_MAX)?)
}

/// Upper bound for max_{|z|=1}|p| from a K-point sample at radius r:
/// Bernstein gives max_r ≤ sample/(1 − πd/K), then max_1 ≤ max_r/rᵈ.
pub fn rigorous_sup(sample: f64, d: usize, r: f64, k: usize) -> Result<f64, CoronaError> {
    let q = std::f64::consts::PI * d as f64 / k as f64;
    if q >= 1.0 {
        return Err(CoronaError::TooFewSamples { k, d });
    }
    Ok(sample / ((1.0 - q) * r.powi(d as i32)))
}

/// Least-squares solution of fU + zⁿg = 1 with deg f, deg g ≤ d, matching
/// coefficients 0..=M. For a singular inner U, c² = −log U(0) recovers the
/// mass entering δ_n = e^{−2c√n}.
pub fn bezout_solve(
    u: &TaylorSeries,
    n: usize,
    d: usize,
    m: usize,
) -> Result<BezoutSolution, CoronaError> {
    if m < n + d {
        return Err(CoronaError::MatchTooSmall { m, need: n + d });
    }
    if u.degree() < m {
        return Err(CoronaError::ShortGenerator {
            have: u.degree(),
            m,
        });
    }
    let u0 = u.coeff(0).norm();
    let c = if u0 > 0.0 { (-u0.ln()).max(0.0).sqrt() } else { f64::INFINITY };
    let corona_bound_log = 5.0 * 2f64.ln() + 6.0 * c * (n as f64).sqrt();
    let is_one = u.coeff(0) == Complex64::new(1.0, 0.0)
        && u.coeffs()[1..].iter().all(|a| a.norm() == 0.0);

    let (f, g, residual_l2, rank, cols) = if n == 0 {
        (TaylorSeries::zero(d), TaylorSeries::one(d), 0.0, 1, 2 * d + 2)
    } else if is_one {
        (TaylorSeries::one(d), TaylorSeries::zero(d), 0.0, 2 * d + 2, 2 * d + 2)
    } else {
        let zn = TaylorSeries::monomial(n, m);
        let s = bezout_pair(&u.truncated(m), &zn, d, m);
        (s.f, s.g, s.residual_l2, s.rank, s.columns)
    };
    let (f_sup, kf) = measured_sup(&f)?;
    let (g_sup, kg) = measured_sup(&g)?;
    let rank_deficient = (n > 0 && u0 == 0.0) || (n > 0 && !is_one && rank < cols);
    let pass = residual_l2 <= BEZOUT_RESIDUAL_TOL
        && f_sup.max(g_sup).ln() <= corona_bound_log;
    Ok(BezoutSolution {
        f,
        g,
        n,
        d,
        m,
        residual_l2,
        f_sup,
        g_sup,
        sup_samples: kf.max(kg),
        corona_bound_log,
        corona_bound: corona_bound_log.exp(),
        rank,
        rank_deficient,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lemma3Report {
    pub n: usize,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub c: f64,
    /// ‖1 − fU‖_{ω,2} through degree M.
    pub lhs: f64,
    /// Rigorous ‖g‖∞/ω(n) + ‖fU + zⁿg − 1‖₂.
    pub rhs: f64,
    pub margin: f64,
    pub pass: bool,
    pub g_sup_bound: f64,
    pub residual_l2: f64,
    pub f_sup: f64,
    pub g_sup: f64,
    /// max(log f_sup, log g_sup)/(c√n + 1); absent for the degenerate n = 0 case.
    pub a_eff: Option<f64>,
    pub degenerate: bool,
}

/// Checks ‖1 − fU‖_{ω,2} ≤ ‖g‖∞·‖zⁿ‖_{ω,2} for the least-squares pair, with
/// the coefficient residual carried as an additive slack (ω ≥ 1 makes the
/// weighted residual norm at most the unweighted one).
pub fn lemma3_report(
    w: &WeightSequence,
    nu: &AtomicSingularMeasure,
    n: usize,
    d: usize,
    m: usize,
) -> Result<Lemma3Report, CoronaError> {
    let u = inner_coeffs(nu, m);
    let sol = bezout_solve(&u, n, d, m)?;
    let one_minus = TaylorSeries::one(m).sub(&multiply(&sol.f, &u, m));
    let lhs = bergman::norm(w, &one_minus)?;
    let k = sol.sup_samples;
    let g_sup_bound = rigorous_sup(sol.g_sup, d, SUP_RADIUS, k)?;
    let log_wn = w.get(n).ok_or(BergmanError::BeyondHorizon {
        degree: n,
        horizon: w.horizon(),
    })?;
    let rhs = g_sup_bound * (-log_wn).exp() + sol.residual_l2;
    let c = nu.c();
    let degenerate = n == 0;
    let a_eff = (!degenerate).then(|| {
        let top = sol.f_sup.max(sol.g_sup).ln();
        top / (c * (n as f64).sqrt() + 1.0)
    });
    Ok(Lemma3Report {
        n,
        d,
        m,
        c,
        lhs,
        rhs,
        margin: rhs - lhs,
        pass: lhs <= rhs,
        g_sup_bound,
        residual_l2: sol.residual_l2,
        f_sup: sol.f_sup,
        g_sup: sol.g_sup,
        a_eff,
        degenerate,
    })
}

/// (n, d, M) instances used to measure A_eff for ν = (1, 1).
pub const A_EFF_INSTANCES: [(usize, usize, usize); 3] = [(1, 16, 256), (4, 32, 512), (16, 64, 1024)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AEffReport {
    pub instances: Vec<Lemma3Report>,
    pub a_eff: f64,
}

/// Maximum A_eff over the standard instance set.
pub fn a_eff_standard(w: &WeightSequence) -> Result<AEffReport, CoronaError> {
    let nu = AtomicSingularMeasure::point_mass(1.0)?;
    let instances: Vec<Lemma3Report> = A_EFF_INSTANCES
        .iter()
        .map(|&(n, d, m)| lemma3_report(w, &nu, n, d, m))
        .collect::<Result<_, _>>()?;
    let a_eff = instances
        .iter()
        .filter_map(|r| r.a_eff)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(AEffReport { instances, a_eff })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_family, FamilySpec};

    fn nu(mass: f64) -> AtomicSingularMeasure {
        AtomicSingularMeasure::point_mass(mass).unwrap()
    }

    #[test]
    fn logaddexp_basics() {
        assert!((logaddexp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(logaddexp(f64::NEG_INFINITY, -3.0), -3.0);
        assert!((logaddexp(-1000.0, -1001.0) - (-1000.0 + (-1f64).exp().ln_1p())).abs() < 1e-12);
    }

    #[test]
    fn infimum_n0_is_tight() {
        let r = infimum_check(&nu(1.0), 0, &infimum_grid(&nu(1.0))).unwrap();
        assert_eq!(r.bound_log, 0.0);
        assert!(r.pass && r.margin >= 0.0 && r.margin < 1e-9);
    }

    #[test]
    fn infimum_examples() {
        let r = infimum_check(&nu(1.0), 4, &infimum_grid(&nu(1.0))).unwrap();
        assert_eq!(r.bound_log, -4.0);
        assert!(r.pass, "{r:?}");
        let q = infimum_check(&nu(0.25), 16, &infimum_grid(&nu(0.25))).unwrap();
        assert!((q.bound_log + 4.0).abs() < 1e-15);
        assert!(q.pass);
        let empty = GridSpec {
            levels: 0,
            include_origin: false,
            ..GridSpec::standard()
        };
        assert_eq!(infimum_check(&nu(1.0), 4, &empty), Err(CoronaError::EmptyGrid));
    }

    #[test]
    fn bezout_trivial_cases() {
        let u = inner_coeffs(&nu(1.0), 64);
        let s = bezout_solve(&u, 0, 8, 64).unwrap();
        assert_eq!(s.residual_l2, 0.0);
        assert_eq!(s.g.coeff(0).re, 1.0);
        let one = bezout_solve(&TaylorSeries::one(64), 3, 8, 64).unwrap();
        assert_eq!(one.f.coeff(0).re, 1.0);
        assert_eq!(one.g.l2_norm(), 0.0);
        assert_eq!(one.residual_l2, 0.0);
        assert!(matches!(bezout_solve(&u, 40, 40, 64), Err(CoronaError::MatchTooSmall { .. })));
    }

    #[test]
    fn bezout_i1_n4() {
        let u = inner_coeffs(&nu(1.0), 512);
        let s = bezout_solve(&u, 4, 32, 512).unwrap();
        assert!(s.residual_l2 <= 1e-6, "{}", s.residual_l2);
        assert!(s.f_sup <= s.corona_bound);
        assert!((s.corona_bound_log - (32f64.ln() + 12.0)).abs() < 1e-9);
        assert!(s.pass);
        // two convolution paths agree
        let zn = TaylorSeries::monomial(4, 512);
        let r = pair_residual(&s.f, &u, &s.g, &zn, 512);
        assert!((r.l2_norm() - s.residual_l2).abs() < 1e-11);
    }

    #[test]
    fn zero_constant_term_is_reported() {
        let u = TaylorSeries::monomial(1, 64);
        let s = bezout_solve(&u, 2, 8, 64).unwrap();
        assert!(s.rank_deficient);
        assert!(s.residual_l2 > 0.5);
    }

    #[test]
    fn residual_nonincreasing_in_degree() {
        let u = inner_coeffs(&nu(1.0), 256);
        let zn = TaylorSeries::monomial(4, 256);
        let mut prev = f64::INFINITY;
        for d in [2, 4, 8, 16, 32] {
            let s = bezout_pair(&u, &zn, d, 256);
            assert!(s.residual_l2 <= prev * (1.0 + 1e-9) + 1e-14);
            prev = s.residual_l2;
        }
    }

    #[test]
    fn complex_pair_matches_rotation() {
        let rot: AtomicSingularMeasure = "1.0@0.7".parse().unwrap();
        let u = inner_coeffs(&rot, 256);
        let s = bezout_pair(&u, &TaylorSeries::monomial(4, 256), 24, 256);
        let r = inner_coeffs(&nu(1.0), 256);
        let t = bezout_pair(&r, &TaylorSeries::monomial(4, 256), 24, 256);
        // both sit at the rounding floor of the truncated SVD
        assert!(s.residual_l2 < 1e-7 && t.residual_l2 < 1e-7, "{} vs {}", s.residual_l2, t.residual_l2);
    }

    #[test]
    fn rigorous_sup_needs_samples() {
        assert!(rigorous_sup(1.0, 100, 0.9, 64).is_err());
        let b = rigorous_sup(1.0, 4, 1.0, 4096).unwrap();
        assert!(b > 1.0 && b < 1.01);
    }

    #[test]
    fn lemma3_shape_holds() {
        let w = make_family(&FamilySpec::Stretched { c: 1.0, beta: 0.5 }, 2048, false, None).unwrap();
        let r = lemma3_report(&w, &nu(1.0), 16, 64, 1024).unwrap();
        assert!(r.pass, "{r:?}");
        let a = r.a_eff.unwrap();
        assert!(a.is_finite() && a > 0.0);
        let z = lemma3_report(&w, &nu(1.0), 0, 8, 64).unwrap();
        assert!(z.degenerate && z.a_eff.is_none());
    }
}
