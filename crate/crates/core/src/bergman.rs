//! Norms, inner products and least-squares distances in A²_ω.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::series::{inner_coeffs, AtomicSingularMeasure, TaylorSeries};
use crate::weights::{make_family, FamilySpec, WeightError, WeightSequence};

const RIDGE_TRIGGER: f64 = 1e12;
const RIDGE_SCALE: f64 = 1e-14;
const NEG_EIG_TOL: f64 = 1e-10;
const CLAMP_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BergmanError {
    #[error("series degree {degree} exceeds weight horizon {horizon}")]
    BeyondHorizon { degree: usize, horizon: usize },
    #[error("degree bound N = {n} exceeds truncation M = {m}")]
    DegreeTooLarge { n: usize, m: usize },
    #[error("generator has {have} coefficients, truncation M = {m} needs {need}", need = .m + 1)]
    ShortGenerator { have: usize, m: usize },
    #[error("weight is not monotone; tail bounds need a nondecreasing weight")]
    NonMonotone,
    #[error("Gram matrix is indefinite: minimum eigenvalue {min_eig} below -1e-10 * trace {trace}")]
    Indefinite { min_eig: f64, trace: f64 },
    #[error("negative squared distance {0} beyond rounding")]
    NegativeDistance(f64),
    #[error("degrees must be strictly ascending")]
    DegreesNotAscending,
    #[error("truncation must exceed the degree bound (M = {m}, N = {n})")]
    TailNeedsRoom { m: usize, n: usize },
    #[error(transparent)]
    Weight(#[from] WeightError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceResult {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub dist: f64,
    pub dist_sq: f64,
    /// Rigorous bound on |dist − true distance| coming from truncation.
    pub tail_bound: f64,
    pub gram_condition: f64,
    /// Ridge added to the equilibrated Gram matrix, when triggered.
    pub ridge: Option<f64>,
    /// Lower end of the bracket for dist² (equal to dist_sq when no tail
    /// completion is in play).
    pub dist_sq_lower: f64,
}

fn weights_upto(w: &WeightSequence, m: usize) -> Result<Vec<f64>, BergmanError> {
    (0..=m)
        .map(|n| {
            w.get(n).ok_or(BergmanError::BeyondHorizon {
                degree: m,
                horizon: w.horizon(),
            })
        })
        .collect()
}

/// ‖f‖_{ω,2} over the stored coefficients.
pub fn norm(w: &WeightSequence, f: &TaylorSeries) -> Result<f64, BergmanError> {
    Ok(inner_product(w, f, f)?.re.max(0.0).sqrt())
}

/// Σ a_n conj(b_n)/ω(n)².
pub fn inner_product(
    w: &WeightSequence,
    f: &TaylorSeries,
    g: &TaylorSeries,
) -> Result<Complex64, BergmanError> {
    let m = f.degree().min(g.degree());
    let l = weights_upto(w, f.degree().max(g.degree()))?;
    Ok((0..=m)
        .map(|n| f.coeff(n) * g.coeff(n).conj() * (-2.0 * l[n]).exp())
        .sum())
}

/// Bound on the squared weighted tail beyond degree M of p·U for deg p ≤ N,
/// per unit coefficient mass of p: mass/ω(M−N)².
pub fn truncation_tail_bound(
    w: &WeightSequence,
    u_h2_mass: f64,
    m: usize,
    n: usize,
) -> Result<f64, BergmanError> {
    if m <= n {
        return Err(BergmanError::TailNeedsRoom { m, n });
    }
    if !w.is_monotone() {
        return Err(BergmanError::NonMonotone);
    }
    if u_h2_mass == 0.0 {
        return Ok(0.0);
    }
    let l = w.get(m - n).ok_or(BergmanError::BeyondHorizon {
        degree: m - n,
        horizon: w.horizon(),
    })?;
    Ok(u_h2_mass * (-2.0 * l).exp())
}

/// Real symmetric embedding [[Re G, −Im G], [Im G, Re G]] of a Hermitian
/// matrix, or the real part alone when the matrix is real.
#[derive(Debug, Clone)]
struct Hermitian {
    re: DMatrix<f64>,
    im: Option<DMatrix<f64>>,
}

impl Hermitian {
    fn dim(&self) -> usize {
        self.re.nrows()
    }

    fn leading(&self, k: usize) -> Self {
        Self {
            re: self.re.view((0, 0), (k, k)).into_owned(),
            im: self.im.as_ref().map(|m| m.view((0, 0), (k, k)).into_owned()),
        }
    }

    fn diag(&self, i: usize) -> f64 {
        self.re[(i, i)]
    }

    fn embedded(&self) -> DMatrix<f64> {
        match &self.im {
            None => self.re.clone(),
            Some(im) => {
                let k = self.dim();
                let mut e = DMatrix::zeros(2 * k, 2 * k);
                e.view_mut((0, 0), (k, k)).copy_from(&self.re);
                e.view_mut((k, k), (k, k)).copy_from(&self.re);
                e.view_mut((k, 0), (k, k)).copy_from(im);
                e.view_mut((0, k), (k, k)).copy_from(&(-im));
                e
            }
        }
    }
}

/// Scaled least-squares data for dist(1, span{zᵏU : k ≤ N}) in A²_ω.
///
/// Column k is scaled by ω(k), so entries read
/// G̃_jk = Σ_m e^{(l_j−l_m)+(l_k−l_m)} u_{m−j} conj(u_{m−k}) and stay O(1)
/// for monotone weights however fast ω grows.
#[derive(Debug, Clone)]
struct GramSystem {
    lo: Hermitian,
    hi: Option<Hermitian>,
    l: Vec<f64>,
    u0: Complex64,
    m: usize,
}

fn assemble(
    w: &WeightSequence,
    u: &TaylorSeries,
    n: usize,
    m: usize,
    complete_inner: bool,
) -> Result<GramSystem, BergmanError> {
    if n > m {
        return Err(BergmanError::DegreeTooLarge { n, m });
    }
    if u.degree() < m {
        return Err(BergmanError::ShortGenerator {
            have: u.degree() + 1,
            m,
        });
    }
    let l = weights_upto(w, m)?;
    let uc = &u.coeffs()[..=m];
    let is_real = uc.iter().all(|c| c.im == 0.0);
    let rows = m + 1;
    let cols = n + 1;
    let mut ar = DMatrix::<f64>::zeros(rows, cols);
    let mut ai = DMatrix::<f64>::zeros(if is_real { 0 } else { rows }, if is_real { 0 } else { cols });
    for k in 0..cols {
        for mm in k..rows {
            let s = (l[k] - l[mm]).exp();
            let v = uc[mm - k] * s;
            ar[(mm, k)] = v.re;
            if !is_real {
                ai[(mm, k)] = v.im;
            }
        }
    }
    // A^H A = (ArᵀAr + AiᵀAi) + i(ArᵀAi − AiᵀAr)
    let lo = if is_real {
        Hermitian {
            re: ar.tr_mul(&ar),
            im: None,
        }
    } else {
        Hermitian {
            re: ar.tr_mul(&ar) + ai.tr_mul(&ai),
            im: Some(ar.tr_mul(&ai) - ai.tr_mul(&ar)),
        }
    };

    let hi = if complete_inner {
        // The unweighted Gram of the untruncated columns is the identity for
        // inner U; the weighted tail is bounded by ω(M+1)⁻²·(I − H), H the
        // truncated unweighted Gram.
        let l_tail = if w.is_monotone() {
            w.get(m + 1).unwrap_or(l[m])
        } else {
            0.0
        };
        let h = truncated_autocorrelation(uc, n, m);
        let mut hi = lo.clone();
        for j in 0..cols {
            for k in j..cols {
                let s = (l[j] + l[k] - 2.0 * l_tail).exp();
                let hjk = h(j, k).conj();
                let delta = if j == k { 1.0 } else { 0.0 };
                let add = (Complex64::new(delta, 0.0) - hjk) * s;
                hi.re[(j, k)] += add.re;
                if j != k {
                    hi.re[(k, j)] += add.re;
                }
                if let Some(im) = hi.im.as_mut() {
                    // lower triangle holds the conjugate
                    im[(j, k)] += add.im;
                    if j != k {
                        im[(k, j)] -= add.im;
                    }
                }
            }
        }
        Some(hi)
    } else {
        None
    };
    Ok(GramSystem {
        lo,
        hi,
        l,
        u0: uc[0],
        m,
    })
}

/// H_jk = Σ_{m=max(j,k)}^{M} u_{m−j} conj(u_{m−k}) as a lookup closure.
fn truncated_autocorrelation(u: &[Complex64], n: usize, m: usize) -> impl Fn(usize, usize) -> Complex64 {
    // table[d][k - d] = Σ_{i=0}^{M−k} u_{i+d} conj(u_i) for k = d..=n
    let mut table: Vec<Vec<Complex64>> = Vec::with_capacity(n + 1);
    for d in 0..=n {
        let mut row = vec![Complex64::new(0.0, 0.0); n + 1 - d];
        let mut s = Complex64::new(0.0, 0.0);
        let stop = m - n; // smallest upper index needed, M − n
        for i in 0..=(m - d) {
            s += u[i + d] * u[i].conj();
            // upper index i corresponds to k = M − i
            if i >= stop {
                let k = m - i;
                if k >= d && k <= n {
                    row[k - d] = s;
                }
            }
        }
        table.push(row);
    }
    move |j: usize, k: usize| {
        if k >= j {
            table[k - j][j]
        } else {
            table[j - k][k].conj()
        }
    }
}

struct Solved {
    dist_sq: f64,
    condition: f64,
    ridge: Option<f64>,
    /// Polynomial coefficients in the unscaled basis.
    coeffs: Vec<Complex64>,
}

fn solve_leading(h: &Hermitian, sys: &GramSystem, n: usize) -> Result<Solved, BergmanError> {
    let k = n + 1;
    let g = h.leading(k);
    let d: Vec<f64> = (0..k).map(|i| 1.0 / g.diag(i).sqrt()).collect();
    let mut e = g.embedded();
    let blocks = e.nrows() / k;
    for i in 0..e.nrows() {
        for j in 0..e.ncols() {
            e[(i, j)] *= d[i % k] * d[j % k];
        }
    }
    let trace = k as f64;
    let eig = SymmetricEigen::new(e);
    let max_eig = eig.eigenvalues.max();
    let min_eig = eig.eigenvalues.min();
    if min_eig < -NEG_EIG_TOL * trace {
        return Err(BergmanError::Indefinite { min_eig, trace });
    }
    let condition = if min_eig > 0.0 { max_eig / min_eig } else { f64::INFINITY };
    let ridge = (condition > RIDGE_TRIGGER).then_some(RIDGE_SCALE * trace / k as f64);
    let rho = ridge.unwrap_or(0.0);

    // b̂ = D·conj(u0)·e^{−l0}·e₀, embedded as [Re; Im]
    let b0 = sys.u0.conj() * (-sys.l[0]).exp() * d[0];
    let mut b = DVector::<f64>::zeros(blocks * k);
    b[0] = b0.re;
    if blocks == 2 {
        b[k] = b0.im;
    }
    let vt_b = eig.eigenvectors.tr_mul(&b);
    let mut y = DVector::<f64>::zeros(blocks * k);
    for (i, &lam) in eig.eigenvalues.iter().enumerate() {
        let lam = lam + rho;
        if lam > 0.0 {
            y += eig.eigenvectors.column(i) * (vt_b[i] / lam);
        }
    }
    let b_dot_y = b.dot(&y);
    let raw = (-2.0 * sys.l[0]).exp() - b_dot_y;
    let dist_sq = if raw < 0.0 {
        if raw < -CLAMP_TOL {
            return Err(BergmanError::NegativeDistance(raw));
        }
        0.0
    } else {
        raw
    };
    let coeffs = (0..k)
        .map(|i| {
            let im = if blocks == 2 { y[k + i] } else { 0.0 };
            Complex64::new(y[i], im) * d[i] * sys.l[i].exp()
        })
        .collect();
    Ok(Solved {
        dist_sq,
        condition,
        ridge,
        coeffs,
    })
}

fn result_generic(
    w: &WeightSequence,
    u: &TaylorSeries,
    sys: &GramSystem,
    n: usize,
) -> Result<(DistanceResult, Vec<Complex64>), BergmanError> {
    let s = solve_leading(&sys.lo, sys, n)?;
    let mass = u.coeffs()[..=sys.m].iter().map(|c| c.norm_sqr()).sum::<f64>();
    let factor = if sys.m > n {
        match truncation_tail_bound(w, mass, sys.m, n) {
            Ok(f) => f,
            // log ω ≥ 0 everywhere, so 1/ω² ≤ 1 bounds any weight
            Err(BergmanError::NonMonotone) => mass,
            Err(e) => return Err(e),
        }
    } else {
        mass
    };
    let c_norm = s.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let res = DistanceResult {
        n,
        m: sys.m,
        dist: s.dist_sq.sqrt(),
        dist_sq: s.dist_sq,
        tail_bound: c_norm * factor.sqrt(),
        gram_condition: s.condition,
        ridge: s.ridge,
        dist_sq_lower: s.dist_sq,
    };
    Ok((res, s.coeffs))
}

fn result_inner(sys: &GramSystem, n: usize) -> Result<DistanceResult, BergmanError> {
    let lo = solve_leading(&sys.lo, sys, n)?;
    let hi = solve_leading(sys.hi.as_ref().expect("completed system"), sys, n)?;
    let upper = hi.dist_sq.max(lo.dist_sq);
    Ok(DistanceResult {
        n,
        m: sys.m,
        dist: upper.sqrt(),
        dist_sq: upper,
        tail_bound: upper.sqrt() - lo.dist_sq.sqrt(),
        gram_condition: lo.condition,
        ridge: lo.ridge.or(hi.ridge),
        dist_sq_lower: lo.dist_sq,
    })
}

/// dist(1, span{zᵏU : k ≤ N}) in A²_ω with U truncated at degree M.
///
/// The tail is bounded by ‖c‖₂·√(Σ|u_n|²)/ω(M−N) for the minimizer c.
pub fn gram_distance(
    w: &WeightSequence,
    u: &TaylorSeries,
    n: usize,
    m: usize,
) -> Result<DistanceResult, BergmanError> {
    gram_minimizer(w, u, n, m).map(|(r, _)| r)
}

/// [`gram_distance`] together with the minimizing polynomial p, so that
/// ‖1 − pU‖ can be recomputed independently.
pub fn gram_minimizer(
    w: &WeightSequence,
    u: &TaylorSeries,
    n: usize,
    m: usize,
) -> Result<(DistanceResult, TaylorSeries), BergmanError> {
    let sys = assemble(w, u, n, m, false)?;
    let (res, coeffs) = result_generic(w, u, &sys, n)?;
    let p = TaylorSeries::new(coeffs).expect("finite minimizer");
    Ok((res, p))
}

/// As [`gram_distance`] for a generator known to be inner (unit H² norm,
/// orthonormal shifts). The discarded Gram tail is then bounded in the PSD
/// order, which brackets dist² between a truncated and a completed solve;
/// `dist_sq` is the upper end and `tail_bound` the width in dist.
pub fn gram_distance_inner(
    w: &WeightSequence,
    u: &TaylorSeries,
    n: usize,
    m: usize,
) -> Result<DistanceResult, BergmanError> {
    let sys = assemble(w, u, n, m, true)?;
    result_inner(&sys, n)
}

/// Default truncation max(4096, 8N).
pub fn default_truncation(n: usize) -> usize {
    4096.max(8 * n)
}

/// Distances for each N in `degrees`, from one Gram assembly at the largest N.
pub fn cyclicity_scan(
    w: &WeightSequence,
    nu: &AtomicSingularMeasure,
    degrees: &[usize],
    m: usize,
) -> Result<Vec<DistanceResult>, BergmanError> {
    if degrees.windows(2).any(|p| p[1] <= p[0]) {
        return Err(BergmanError::DegreesNotAscending);
    }
    let Some(&n_max) = degrees.last() else {
        return Ok(Vec::new());
    };
    let u = inner_coeffs(nu, m);
    let sys = assemble(w, &u, n_max, m, true)?;
    degrees.iter().map(|&n| result_inner(&sys, n)).collect()
}

/// Distance of 1 from span{zᵏU(z²)} under ω(2n) = 1, ω(2n+1) = e^{√n}.
pub fn remark3_counterexample(
    nu: &AtomicSingularMeasure,
    n: usize,
    m: usize,
) -> Result<DistanceResult, BergmanError> {
    let w = make_family(&FamilySpec::Remark3, m + 1, true, None)?;
    let u = inner_coeffs(nu, m / 2).compose_power(2, m);
    gram_distance_inner(&w, &u, n, m)
}

/// The H² floor √(1 − |U(0)|²) that the Remark 3 distance cannot go below.
pub fn remark3_floor(nu: &AtomicSingularMeasure) -> f64 {
    (1.0 - (-2.0 * nu.total_mass()).exp()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::multiply;
    use proptest::prelude::*;

    fn flat(h: usize) -> WeightSequence {
        make_family(&FamilySpec::Flat, h, true, None).unwrap()
    }

    fn fam(s: &str, h: usize) -> WeightSequence {
        make_family(&s.parse().unwrap(), h, false, None).unwrap()
    }

    fn i1() -> AtomicSingularMeasure {
        AtomicSingularMeasure::point_mass(1.0).unwrap()
    }

    #[test]
    fn norm_examples() {
        let w = fam("power,alpha=1", 64);
        assert_eq!(norm(&w, &TaylorSeries::one(0)).unwrap(), 1.0);
        let z5 = TaylorSeries::monomial(5, 5);
        assert!((norm(&w, &z5).unwrap() - 1.0 / 6.0).abs() < 1e-15);
        let p = TaylorSeries::from_real(&[1.0, 1.0]).unwrap();
        let q = TaylorSeries::from_real(&[1.0, -1.0]).unwrap();
        assert_eq!(inner_product(&flat(4), &p, &q).unwrap(), Complex64::new(0.0, 0.0));
        let zj = TaylorSeries::monomial(2, 6);
        let zk = TaylorSeries::monomial(5, 6);
        assert_eq!(inner_product(&w, &zj, &zk).unwrap().norm(), 0.0);
        let t = WeightSequence::from_log_values(vec![0.0; 65], "t", false).unwrap();
        assert!(norm(&t, &TaylorSeries::monomial(65, 65)).is_err());
    }

    #[test]
    fn tail_bound_examples() {
        let w = fam("stretched,c=1,beta=0.5", 1000);
        let f = truncation_tail_bound(&w, 1.0, 500, 100).unwrap();
        assert!((f.ln() + 40.0).abs() < 1e-10);
        assert_eq!(truncation_tail_bound(&w, 0.0, 500, 100).unwrap(), 0.0);
        assert_eq!(truncation_tail_bound(&flat(100), 0.7, 50, 10).unwrap(), 0.7);
        let r3 = make_family(&FamilySpec::Remark3, 100, true, None).unwrap();
        assert_eq!(truncation_tail_bound(&r3, 1.0, 50, 10), Err(BergmanError::NonMonotone));
    }

    #[test]
    fn constant_generator_is_exact() {
        let w = fam("power,alpha=2", 64);
        let r = gram_distance(&w, &TaylorSeries::one(64), 0, 64).unwrap();
        assert_eq!(r.dist, 0.0);
    }

    #[test]
    fn h2_oracle_independent_of_n() {
        let exact = 1.0 - (-2f64).exp();
        let u = inner_coeffs(&i1(), 4096);
        for n in [0, 1, 8, 32] {
            let r = gram_distance_inner(&flat(4097), &u, n, 4096).unwrap();
            assert!((r.dist_sq - exact).abs() < 1e-10, "N={n}: {}", r.dist_sq);
            assert!(r.dist_sq_lower <= r.dist_sq);
        }
    }

    #[test]
    fn plain_truncation_is_biased_without_completion() {
        // the truncated Gram alone underestimates by the missing tail mass
        let u = inner_coeffs(&i1(), 1024);
        let r = gram_distance(&flat(1025), &u, 8, 1024).unwrap();
        assert!(r.dist_sq < 1.0 - (-2f64).exp());
    }

    #[test]
    fn scan_is_nonincreasing_for_fast_weight() {
        let w = fam("stretched,c=1,beta=0.5", 4097);
        let res = cyclicity_scan(&w, &i1(), &[16, 32, 64, 128], 4096).unwrap();
        for p in res.windows(2) {
            assert!(p[1].dist < p[0].dist, "{} !< {}", p[1].dist, p[0].dist);
        }
        for r in &res {
            assert!(r.tail_bound < 1e-12);
            assert!((r.dist * r.dist - r.dist_sq).abs() < 1e-12);
        }
    }

    #[test]
    fn scan_empty_measure_and_order() {
        let w = fam("power,alpha=1", 300);
        let res = cyclicity_scan(&w, &AtomicSingularMeasure::empty(), &[1, 4], 256).unwrap();
        assert!(res.iter().all(|r| r.dist == 0.0));
        assert_eq!(
            cyclicity_scan(&w, &i1(), &[4, 2], 256),
            Err(BergmanError::DegreesNotAscending)
        );
        assert!(matches!(
            gram_distance(&w, &TaylorSeries::one(10), 20, 10),
            Err(BergmanError::DegreeTooLarge { .. })
        ));
    }

    #[test]
    fn complex_generator_matches_real_rotation() {
        // rotating the atom rotates coefficients by a unimodular factor per
        // degree, which is an isometry of A²_ω, so distances agree
        let w = fam("power,alpha=1", 600);
        let real = gram_distance_inner(&w, &inner_coeffs(&i1(), 512), 16, 512).unwrap();
        let nu: AtomicSingularMeasure = "1.0@1.3".parse().unwrap();
        let rot = gram_distance_inner(&w, &inner_coeffs(&nu, 512), 16, 512).unwrap();
        assert!((real.dist - rot.dist).abs() < 1e-9, "{} vs {}", real.dist, rot.dist);
    }

    #[test]
    fn remark3_respects_floor() {
        for (mass, n) in [(1.0, 64), (2.0, 32)] {
            let nu = AtomicSingularMeasure::point_mass(mass).unwrap();
            let r = remark3_counterexample(&nu, n, 2048).unwrap();
            assert!(r.dist >= remark3_floor(&nu) - r.tail_bound - 1e-9, "{r:?}");
        }
        let r = remark3_counterexample(&AtomicSingularMeasure::empty(), 8, 256).unwrap();
        assert_eq!(r.dist, 0.0);
    }

    #[test]
    fn shift_is_a_contraction() {
        let w = fam("stretched,c=1,beta=0.5", 64);
        let phi = TaylorSeries::from_real(&[0.3, -0.7, 0.2, 0.9]).unwrap();
        let zphi = phi.shifted(1, 4);
        assert!(norm(&w, &zphi).unwrap() <= norm(&w, &phi).unwrap());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn gram_is_psd_and_nested(mass in 0.2f64..2.0, alpha in 0.5f64..3.0) {
            let w = fam(&format!("power,alpha={alpha}"), 520);
            let nu = AtomicSingularMeasure::point_mass(mass).unwrap();
            let res = cyclicity_scan(&w, &nu, &[2, 4, 8, 16], 512).unwrap();
            for p in res.windows(2) {
                prop_assert!(p[1].dist <= p[0].dist + 1e-12);
            }
        }

        #[test]
        fn refinement_in_m(mass in 0.2f64..2.0) {
            let w = fam("stretched,c=1,beta=0.5", 2100);
            let nu = AtomicSingularMeasure::point_mass(mass).unwrap();
            let u = inner_coeffs(&nu, 2048);
            let a = gram_distance_inner(&w, &u, 8, 512).unwrap();
            let b = gram_distance_inner(&w, &u, 8, 2048).unwrap();
            prop_assert!(b.dist >= a.dist - a.tail_bound - 1e-12);
            prop_assert!(b.dist <= a.dist + 1e-12);
        }

        #[test]
        fn lemma2_direction(mass in 0.2f64..1.5, n in 1usize..12, extra in 0usize..24) {
            // for the optimal p at U², q = trunc_K(pU) sits in the U-span at
            // degree K and ‖1 − qU‖ ≤ ‖1 − pU²‖ + ‖pU − q‖ since |U| ≤ 1
            let w = fam("stretched,c=1,beta=0.5", 600);
            let nu = AtomicSingularMeasure::point_mass(mass).unwrap();
            let m = 256;
            let k = n + extra;
            let u = inner_coeffs(&nu, m);
            let u2 = multiply(&u, &u, m);
            let (sq, p) = gram_minimizer(&w, &u2, n, m).unwrap();
            let pu = multiply(&p, &u, m);
            let gap = norm(&w, &pu.sub(&pu.truncated(k).truncated(m))).unwrap();
            let lin = gram_distance(&w, &u, k, m).unwrap();
            prop_assert!(lin.dist <= sq.dist + gap + 1e-9, "{} > {} + {}", lin.dist, sq.dist, gap);
            // and the direct residual of the minimizer reproduces dist
            let resid = TaylorSeries::one(m).sub(&multiply(&p, &u2, m));
            prop_assert!((norm(&w, &resid).unwrap() - sq.dist).abs() < 1e-8);
        }
    }
}
