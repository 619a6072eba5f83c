//! Truncated Taylor series and singular inner functions built from atoms.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this log-value the constant term is flushed to zero.
const LOG_UNDERFLOW: f64 = -700.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("cannot parse atom `{0}` (expected MASS@ANGLE)")]
    BadAtomSyntax(String),
    #[error("atom mass must be positive and finite, got {0}")]
    BadMass(f64),
    #[error("atom point {0} is not unimodular")]
    NotUnimodular(Complex64),
    #[error("duplicate atom at angle {0}")]
    DuplicateAtom(f64),
    #[error("point {0} is not inside the unit disk")]
    OutsideDisk(Complex64),
    #[error("radius must lie in (0, 1), got {0}")]
    BadRadius(f64),
    #[error("sample count must be a power of two >= 64, got {0}")]
    BadSampleCount(usize),
    #[error("coefficient vector contains a non-finite entry at index {0}")]
    NonFinite(usize),
}

/// Coefficients a_0..=a_M of a polynomial truncation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaylorSeries {
    coeffs: Vec<Complex64>,
}

impl TaylorSeries {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self, SeriesError> {
        if coeffs.is_empty() {
            return Ok(Self::zero(0));
        }
        if let Some(i) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(SeriesError::NonFinite(i));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self, SeriesError> {
        Self::new(coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zero(degree: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); degree + 1],
        }
    }

    pub fn one(degree: usize) -> Self {
        Self::monomial(0, degree)
    }

    /// zᵏ truncated at `degree` (all zero when k > degree).
    pub fn monomial(k: usize, degree: usize) -> Self {
        let mut s = Self::zero(degree);
        if k <= degree {
            s.coeffs[k] = Complex64::new(1.0, 0.0);
        }
        s
    }

    /// Truncation degree M.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// True when every imaginary part is exactly zero.
    pub fn is_real(&self) -> bool {
        self.coeffs.iter().all(|c| c.im == 0.0)
    }

    /// Zero-padded or truncated copy at a new degree.
    pub fn truncated(&self, degree: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(degree + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    /// f(z) ↦ f(zᵏ), truncated at `degree`.
    pub fn compose_power(&self, k: usize, degree: usize) -> Self {
        assert!(k >= 1);
        let mut out = Self::zero(degree);
        for (n, &a) in self.coeffs.iter().enumerate() {
            match n.checked_mul(k) {
                Some(m) if m <= degree => out.coeffs[m] = a,
                _ => break,
            }
        }
        out
    }

    /// zⁿ·f, truncated at `degree`.
    pub fn shifted(&self, n: usize, degree: usize) -> Self {
        let mut out = Self::zero(degree);
        for (m, &a) in self.coeffs.iter().enumerate() {
            if m + n > degree {
                break;
            }
            out.coeffs[m + n] = a;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let degree = self.degree().max(other.degree());
        let coeffs = (0..=degree).map(|n| self.coeff(n) - other.coeff(n)).collect();
        Self { coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        let degree = self.degree().max(other.degree());
        let coeffs = (0..=degree).map(|n| self.coeff(n) + other.coeff(n)).collect();
        Self { coeffs }
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Σ|a_n|².
    pub fn h2_mass(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        eval(self, z)
    }
}

/// Horner evaluation of the truncated polynomial.
pub fn eval(f: &TaylorSeries, z: Complex64) -> Complex64 {
    f.coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Direct Cauchy product truncated at degree `m`.
pub fn multiply(f: &TaylorSeries, g: &TaylorSeries, m: usize) -> TaylorSeries {
    let (a, b) = (f.coeffs(), g.coeffs());
    let coeffs = (0..m + 1)
        .into_par_iter()
        .with_min_len(64)
        .map(|n| {
            let lo = n.saturating_sub(b.len() - 1);
            let hi = n.min(a.len() - 1);
            if lo > hi {
                return Complex64::new(0.0, 0.0);
            }
            (lo..=hi).map(|i| a[i] * b[n - i]).sum()
        })
        .collect();
    TaylorSeries { coeffs }
}

/// Transform-based product. Errors are absolute (relative to the largest
/// coefficient), so tiny coefficients lose relative accuracy; [`multiply`]
/// is the reference.
pub fn multiply_fft(f: &TaylorSeries, g: &TaylorSeries, m: usize) -> TaylorSeries {
    let la = f.degree().min(m) + 1;
    let lb = g.degree().min(m) + 1;
    let size = (la + lb - 1).next_power_of_two();
    let mut x = vec![Complex64::new(0.0, 0.0); size];
    let mut y = vec![Complex64::new(0.0, 0.0); size];
    x[..la].copy_from_slice(&f.coeffs()[..la]);
    y[..lb].copy_from_slice(&g.coeffs()[..lb]);
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    fwd.process(&mut x);
    fwd.process(&mut y);
    for (p, q) in x.iter_mut().zip(&y) {
        *p *= q;
    }
    inv.process(&mut x);
    let scale = 1.0 / size as f64;
    let mut coeffs: Vec<Complex64> = x.into_iter().take(m + 1).map(|c| c * scale).collect();
    coeffs.resize(m + 1, Complex64::new(0.0, 0.0));
    TaylorSeries { coeffs }
}

/// Coefficients of exp(φ) through degree `m`, from n·a_n = Σ_{k=1}^n k·φ_k·a_{n−k}.
/// With `drop_constant` the factor e^{φ_0} is left out, which keeps the
/// coefficients representable when φ_0 is very negative.
pub fn exp_series(phi: &TaylorSeries, m: usize, drop_constant: bool) -> TaylorSeries {
    let mut a = vec![Complex64::new(0.0, 0.0); m + 1];
    let p0 = phi.coeff(0);
    if !drop_constant && p0.re < LOG_UNDERFLOW {
        log::warn!("exp({}) underflows; coefficients flushed to zero", p0.re);
        return TaylorSeries { coeffs: a };
    }
    a[0] = if drop_constant { Complex64::new(1.0, 0.0) } else { p0.exp() };
    let kphi: Vec<Complex64> = (0..=m).map(|k| phi.coeff(k) * k as f64).collect();
    for n in 1..=m {
        let s: Complex64 = (1..=n).map(|k| kphi[k] * a[n - k]).sum();
        a[n] = s / n as f64;
    }
    TaylorSeries { coeffs: a }
}

/// A point mass on the circle, stored by angle so that powers of the point
/// can be formed without drift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub mass: f64,
    pub angle: f64,
}

impl Atom {
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

/// Finite positive combination of point masses on 𝕋.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AtomicSingularMeasure {
    atoms: Vec<Atom>,
}

impl AtomicSingularMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self, SeriesError> {
        for (i, a) in atoms.iter().enumerate() {
            if !(a.mass > 0.0) || !a.mass.is_finite() {
                return Err(SeriesError::BadMass(a.mass));
            }
            if !a.angle.is_finite() {
                return Err(SeriesError::NotUnimodular(a.point()));
            }
            let p = a.point();
            for b in &atoms[..i] {
                if (b.point() - p).norm() < 1e-12 {
                    return Err(SeriesError::DuplicateAtom(a.angle));
                }
            }
        }
        Ok(Self { atoms })
    }

    /// From explicit points; each must be unimodular within 1e−12.
    pub fn from_points(atoms: &[(Complex64, f64)]) -> Result<Self, SeriesError> {
        let mut out = Vec::with_capacity(atoms.len());
        for &(z, mass) in atoms {
            if (z.norm() - 1.0).abs() > 1e-12 {
                return Err(SeriesError::NotUnimodular(z));
            }
            out.push(Atom {
                mass,
                angle: z.arg(),
            });
        }
        Self::new(out)
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Single atom of mass `c` at ζ = 1 (the function I_c).
    pub fn point_mass(c: f64) -> Result<Self, SeriesError> {
        Self::new(vec![Atom {
            mass: c,
            angle: 0.0,
        }])
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// ν(𝕋) = c².
    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// c = √ν(𝕋).
    pub fn c(&self) -> f64 {
        self.total_mass().sqrt()
    }

    /// Measure of U^s: every mass multiplied by s. Returns the empty measure
    /// for s = 0.
    pub fn scaled(&self, s: f64) -> Self {
        if s == 0.0 {
            return Self::empty();
        }
        Self {
            atoms: self
                .atoms
                .iter()
                .map(|a| Atom {
                    mass: a.mass * s,
                    angle: a.angle,
                })
                .collect(),
        }
    }
}

impl FromStr for AtomicSingularMeasure {
    type Err = SeriesError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() || s.eq_ignore_ascii_case("none") {
            return Ok(Self::empty());
        }
        let mut atoms = Vec::new();
        for tok in s.split(';').map(str::trim).filter(|t| !t.is_empty()) {
            let (m, a) = tok
                .split_once('@')
                .ok_or_else(|| SeriesError::BadAtomSyntax(tok.to_string()))?;
            let mass = m
                .trim()
                .parse::<f64>()
                .map_err(|_| SeriesError::BadAtomSyntax(tok.to_string()))?;
            let angle = a
                .trim()
                .parse::<f64>()
                .map_err(|_| SeriesError::BadAtomSyntax(tok.to_string()))?;
            atoms.push(Atom { mass, angle });
        }
        Self::new(atoms)
    }
}

impl fmt::Display for AtomicSingularMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "none");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, ";")?;
            }
            write!(f, "{}@{}", a.mass, a.angle)?;
        }
        Ok(())
    }
}

/// Taylor coefficients of U = exp(−Σ c_k (ζ_k+z)/(ζ_k−z)) through degree `m`.
///
/// With h = U′/U = Σ −2c_k ζ_k/(ζ_k−z)², so h_j = −2(j+1) Σ c_k ζ̄_k^{j+1},
/// the relation U′ = U·h gives (n+1)a_{n+1} = Σ_{j≤n} h_j a_{n−j}.
pub fn inner_coeffs(nu: &AtomicSingularMeasure, m: usize) -> TaylorSeries {
    let mut a = vec![Complex64::new(0.0, 0.0); m + 1];
    let log_a0 = -nu.total_mass();
    if log_a0 < LOG_UNDERFLOW {
        log::warn!("U(0) = exp({log_a0}) underflows; coefficients flushed to zero");
        return TaylorSeries { coeffs: a };
    }
    a[0] = Complex64::new(log_a0.exp(), 0.0);
    if m == 0 || nu.is_empty() {
        return TaylorSeries { coeffs: a };
    }
    let h: Vec<Complex64> = (0..m)
        .map(|j| {
            let p = (j + 1) as f64;
            let s: Complex64 = nu
                .atoms
                .iter()
                .map(|at| at.mass * Complex64::from_polar(1.0, -p * at.angle))
                .sum();
            -2.0 * p * s
        })
        .collect();
    for n in 0..m {
        let s: Complex64 = (0..=n).map(|j| h[j] * a[n - j]).sum();
        a[n + 1] = s / (n + 1) as f64;
    }
    TaylorSeries { coeffs: a }
}

/// log U(z) = −Σ c_k (ζ_k+z)/(ζ_k−z); real part is log|U|.
pub fn inner_log(nu: &AtomicSingularMeasure, z: Complex64) -> Result<Complex64, SeriesError> {
    if !(z.norm() < 1.0) {
        return Err(SeriesError::OutsideDisk(z));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for at in &nu.atoms {
        let zeta = at.point();
        s -= at.mass * (zeta + z) / (zeta - z);
    }
    // the real part is recomputed from the Poisson form, which is sign-safe
    Ok(Complex64::new(inner_abs(nu, z)?, s.im))
}

/// log|U(z)| = −Σ c_k (1−|z|²)/|ζ_k−z|².
pub fn inner_abs(nu: &AtomicSingularMeasure, z: Complex64) -> Result<f64, SeriesError> {
    let r = z.norm();
    if !(r < 1.0) {
        return Err(SeriesError::OutsideDisk(z));
    }
    Ok(inner_abs_polar(nu, r, 1.0 - r, z.arg()))
}

/// log|U(r e^{iθ})| with 1 − r passed separately so that points very close
/// to the circle keep full relative precision.
pub fn inner_abs_polar(nu: &AtomicSingularMeasure, r: f64, one_minus_r: f64, theta: f64) -> f64 {
    let num = one_minus_r * (1.0 + r);
    nu.atoms
        .iter()
        .map(|at| {
            let s = ((theta - at.angle) / 2.0).sin();
            let den = one_minus_r * one_minus_r + 4.0 * r * s * s;
            -at.mass * num / den
        })
        .sum()
}

fn check_circle(r: f64, k: usize) -> Result<(), SeriesError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(SeriesError::BadRadius(r));
    }
    if k < 64 || !k.is_power_of_two() {
        return Err(SeriesError::BadSampleCount(k));
    }
    Ok(())
}

/// max_k |f(r e^{2πik/K})|.
pub fn sup_circle<F>(f: F, r: f64, k: usize) -> Result<f64, SeriesError>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    check_circle(r, k)?;
    Ok((0..k)
        .into_par_iter()
        .map(|j| f(Complex64::from_polar(r, TAU * j as f64 / k as f64)).norm())
        .reduce(|| 0.0, f64::max))
}

/// Circle sup with the sample count doubled from `k0` until the estimate
/// moves by less than `rel` (or `k_max` is reached). Returns the estimate and
/// the final sample count.
pub fn sup_circle_refined<F>(
    f: F,
    r: f64,
    k0: usize,
    rel: f64,
    k_max: usize,
) -> Result<(f64, usize), SeriesError>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let mut k = k0;
    let mut prev = sup_circle(&f, r, k)?;
    while k < k_max {
        k *= 2;
        let next = sup_circle(&f, r, k)?;
        let done = (next - prev).abs() <= rel * next.abs().max(f64::MIN_POSITIVE);
        prev = next;
        if done {
            break;
        }
    }
    Ok((prev, k))
}

/// Coefficient estimates a_n ≈ r⁻ⁿ(1/K)Σ f(r e^{iθ_k}) e^{−inθ_k}, with K
/// the smallest power of two ≥ max(4(M+1), 64).
pub fn coeffs_via_cauchy<F>(f: F, r: f64, m: usize) -> Result<TaylorSeries, SeriesError>
where
    F: Fn(Complex64) -> Complex64 + Sync,
{
    let k = (4 * (m + 1)).next_power_of_two().max(64);
    check_circle(r, k)?;
    let mut samples: Vec<Complex64> = (0..k)
        .into_par_iter()
        .map(|j| f(Complex64::from_polar(r, 2.0 * PI * j as f64 / k as f64)))
        .collect();
    FftPlanner::new().plan_fft_forward(k).process(&mut samples);
    let scale = 1.0 / k as f64;
    let coeffs = samples
        .into_iter()
        .take(m + 1)
        .enumerate()
        .map(|(n, c)| c * scale * r.powi(-(n as i32)))
        .collect();
    TaylorSeries::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn i_c(mass: f64, m: usize) -> TaylorSeries {
        inner_coeffs(&AtomicSingularMeasure::point_mass(mass).unwrap(), m)
    }

    #[test]
    fn eval_basics() {
        let one = TaylorSeries::from_real(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(eval(&one, c(0.5, 0.0)), c(1.0, 0.0));
        let id = TaylorSeries::from_real(&[0.0, 1.0]).unwrap();
        assert_eq!(eval(&id, c(0.3, 0.4)), c(0.3, 0.4));
    }

    #[test]
    fn difference_of_squares() {
        let p = TaylorSeries::from_real(&[1.0, 1.0]).unwrap();
        let q = TaylorSeries::from_real(&[1.0, -1.0]).unwrap();
        let r = multiply(&p, &q, 2);
        assert_eq!(r.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn inner_first_coefficients() {
        let u = i_c(1.0, 4);
        assert_abs_diff_eq!(u.coeff(0).re, (-1f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(u.coeff(1).re, -2.0 * (-1f64).exp(), epsilon = 1e-15);
        // a_2 = e^{-c}(2c² − 2c) for a single atom at 1
        assert_abs_diff_eq!(u.coeff(2).re, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn inner_abs_examples() {
        let nu = AtomicSingularMeasure::point_mass(1.0).unwrap();
        assert_abs_diff_eq!(inner_abs(&nu, c(0.5, 0.0)).unwrap(), -3.0, epsilon = 1e-14);
        let v = inner_abs(&nu, c(0.0, 0.99)).unwrap();
        assert_abs_diff_eq!(v, -(1.0 - 0.9801) / (1.0 + 0.9801), epsilon = 1e-14);
        let two: AtomicSingularMeasure = "1.0@0.0;0.5@3.14".parse().unwrap();
        assert_abs_diff_eq!(inner_abs(&two, c(0.0, 0.0)).unwrap(), -1.5, epsilon = 1e-15);
        assert!(inner_abs(&nu, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn eval_matches_closed_form_at_half() {
        let u = i_c(1.0, 512);
        let v = eval(&u, c(0.5, 0.0));
        assert_abs_diff_eq!(v.re, (-3f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn atom_parsing() {
        let nu: AtomicSingularMeasure = "1.0@0.0;0.5@3.14".parse().unwrap();
        assert_eq!(nu.atoms().len(), 2);
        assert_eq!(nu.total_mass(), 1.5);
        assert!(matches!(
            "1.0".parse::<AtomicSingularMeasure>(),
            Err(SeriesError::BadAtomSyntax(_))
        ));
        assert!(matches!(
            "-1@0".parse::<AtomicSingularMeasure>(),
            Err(SeriesError::BadMass(_))
        ));
        assert!(matches!(
            "1@0;2@0".parse::<AtomicSingularMeasure>(),
            Err(SeriesError::DuplicateAtom(_))
        ));
        assert!("none".parse::<AtomicSingularMeasure>().unwrap().is_empty());
        assert_eq!(nu.to_string().parse::<AtomicSingularMeasure>().unwrap(), nu);
        assert!(AtomicSingularMeasure::from_points(&[(c(0.9, 0.0), 1.0)]).is_err());
    }

    #[test]
    fn sup_circle_examples() {
        let z5 = TaylorSeries::monomial(5, 5);
        let s = sup_circle(|z| eval(&z5, z), 0.8, 64).unwrap();
        assert_abs_diff_eq!(s, 0.8f64.powi(5), epsilon = 1e-15);
        assert_eq!(sup_circle(|_| c(1.0, 0.0), 0.3, 64).unwrap(), 1.0);
        let nu = AtomicSingularMeasure::point_mass(1.0).unwrap();
        let s = sup_circle(|z| inner_log(&nu, z).unwrap().exp(), 0.9, 4096).unwrap();
        let antipode = -(1.0 - 0.81) / (1.9f64 * 1.9);
        assert_abs_diff_eq!(s.ln(), antipode, epsilon = 1e-12);
        assert!(sup_circle(|z| z, 0.5, 100).is_err());
        assert!(sup_circle(|z| z, 1.0, 64).is_err());
    }

    #[test]
    fn cauchy_small_cases() {
        let p = TaylorSeries::from_real(&[1.0, 1.0]).unwrap();
        let est = coeffs_via_cauchy(|z| eval(&p, z), 0.5, 1).unwrap();
        assert_abs_diff_eq!(est.coeff(0).re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(est.coeff(1).re, 1.0, epsilon = 1e-12);
        let zero = coeffs_via_cauchy(|_| c(0.0, 0.0), 0.5, 8).unwrap();
        assert!(zero.coeffs().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn cauchy_cross_check_at_half() {
        // r = 0.5 amplifies rounding by 2ⁿ, so the f64 oracle is only usable
        // for the leading coefficients at this radius
        let nu = AtomicSingularMeasure::point_mass(1.0).unwrap();
        let u = inner_coeffs(&nu, 20);
        let est = coeffs_via_cauchy(|z| inner_log(&nu, z).unwrap().exp(), 0.5, 20).unwrap();
        for n in 0..=20 {
            assert!((u.coeff(n) - est.coeff(n)).norm() < 1e-10, "n = {n}");
        }
    }

    #[test]
    fn mass_partial_sums() {
        let u = i_c(1.0, 2048);
        let mut s = 0.0;
        for a in u.coeffs() {
            let next = s + a.norm_sqr();
            assert!(next >= s);
            s = next;
        }
        assert!(s <= 1.0 + 1e-9);
        // the tail decays like M^{-1/2}; 0.99 is reached, 0.999 is not
        assert!(s > 0.98);
    }

    #[test]
    fn multi_atom_recurrence_against_product() {
        let nu: AtomicSingularMeasure = "0.7@0.4;0.3@-2.0".parse().unwrap();
        let a = AtomicSingularMeasure::new(vec![nu.atoms()[0]]).unwrap();
        let b = AtomicSingularMeasure::new(vec![nu.atoms()[1]]).unwrap();
        let direct = inner_coeffs(&nu, 128);
        let prod = multiply(&inner_coeffs(&a, 128), &inner_coeffs(&b, 128), 128);
        for n in 0..=128 {
            assert!((direct.coeff(n) - prod.coeff(n)).norm() < 1e-12);
        }
    }

    #[test]
    fn fft_product_matches_direct() {
        let u = i_c(1.0, 300);
        let v = i_c(0.5, 300);
        let d = multiply(&u, &v, 300);
        let f = multiply_fft(&u, &v, 300);
        for n in 0..=300 {
            assert!((d.coeff(n) - f.coeff(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn exp_series_reproduces_inner_recurrence() {
        // log I_c = −c(1+z)/(1−z) = −c − 2cΣ zᵏ
        let c = 0.7;
        let mut phi = vec![Complex64::new(-2.0 * c, 0.0); 65];
        phi[0] = Complex64::new(-c, 0.0);
        let e = exp_series(&TaylorSeries::new(phi).unwrap(), 64, false);
        let u = i_c(c, 64);
        for n in 0..=64 {
            assert!((e.coeff(n) - u.coeff(n)).norm() < 1e-13);
        }
    }

    #[test]
    fn compose_and_shift() {
        let p = TaylorSeries::from_real(&[1.0, 2.0, 3.0]).unwrap();
        let q = p.compose_power(2, 5);
        assert_eq!(q.coeff(4).re, 3.0);
        assert_eq!(q.coeff(3).re, 0.0);
        let s = p.shifted(2, 3);
        assert_eq!(s.coeff(2).re, 1.0);
        assert_eq!(s.coeff(3).re, 2.0);
        assert_eq!(s.degree(), 3);
    }

    fn coeff_vec(len: usize) -> impl Strategy<Value = TaylorSeries> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..len).prop_map(|v| {
            TaylorSeries::new(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn multiply_commutes(f in coeff_vec(40), g in coeff_vec(40)) {
            let m = 48;
            let a = multiply(&f, &g, m);
            let b = multiply(&g, &f, m);
            for n in 0..=m {
                prop_assert!((a.coeff(n) - b.coeff(n)).norm() <= 1e-12 * (1.0 + a.coeff(n).norm()));
            }
        }

        #[test]
        fn multiply_associates(f in coeff_vec(24), g in coeff_vec(24), h in coeff_vec(24)) {
            let m = 40;
            let a = multiply(&multiply(&f, &g, m), &h, m);
            let b = multiply(&f, &multiply(&g, &h, m), m);
            for n in 0..=m {
                prop_assert!((a.coeff(n) - b.coeff(n)).norm() <= 1e-12 * (1.0 + a.coeff(n).norm()));
            }
        }

        #[test]
        fn multiply_identity(f in coeff_vec(40)) {
            let one = TaylorSeries::one(0);
            let p = multiply(&f, &one, f.degree());
            prop_assert_eq!(p, f);
        }

        #[test]
        fn closed_form_consistency(mass in 0.1f64..2.0, angle in -3.0f64..3.0,
                                   r in 0.0f64..0.9, t in 0.0f64..std::f64::consts::TAU) {
            let nu = AtomicSingularMeasure::new(vec![Atom { mass, angle }]).unwrap();
            let m = 400;
            let u = inner_coeffs(&nu, m);
            let z = Complex64::from_polar(r, t);
            let tail = r.powi(m as i32 + 1) / (1.0 - r);
            let lhs = inner_abs(&nu, z).unwrap().exp();
            let rhs = eval(&u, z).norm();
            prop_assert!((lhs - rhs).abs() <= tail + 1e-12);
        }
    }

    #[test]
    fn semigroup() {
        for &(a, b) in &[(0.5, 0.5), (0.5, 1.0), (1.0, 2.0), (2.0, 2.0), (1.0, 0.5)] {
            let p = multiply(&i_c(a, 256), &i_c(b, 256), 256);
            let q = i_c(a + b, 256);
            for n in 0..=256 {
                assert!((p.coeff(n) - q.coeff(n)).norm() < 1e-9);
            }
        }
    }
}
