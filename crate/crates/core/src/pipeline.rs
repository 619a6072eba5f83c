//! Block constructions for cyclicity: allocation plans, per-block factor
//! solves, product assembly, residual trajectories and the contrast report.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bergman::{self, BergmanError};
use crate::corona::{bezout_pair, bezout_solve, CoronaError};
use crate::grid::{argmax, DiskPoint, GridSpec};
use crate::growth::{keldys_outer_f, BoundarySet, GrowthError, LambdaMajorant, OuterFdelta};
use crate::series::{inner_coeffs, inner_log, multiply, multiply_fft, AtomicSingularMeasure, TaylorSeries};
use crate::weights::{partial_sum_theorem1, weight_ladder, Ladder, WeightError, WeightSequence};

/// Largest index searched when building a ladder on Λ(1/n).
pub const LAMBDA_LADDER_CAP: u64 = 1 << 62;
/// f_δ is only representable while its boundary modulus spans less than this
/// many e-folds.
const LOG_RANGE: f64 = 600.0;
const MAX_BLOCKS: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PipelineError {
    #[error("threshold {threshold} not reached: partial sum {achieved} after {rungs} rungs")]
    HorizonExhausted {
        achieved: f64,
        threshold: f64,
        rungs: usize,
    },
    #[error("the singular measure is empty; theorem1 needs atoms")]
    NoAtoms,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("mode {mode} {reason}")]
    ModeGate { mode: Mode, reason: String },
    #[error("factor {j} (rung {n}) failed: {reason}")]
    FactorSolve { j: usize, n: u64, reason: String },
    #[error("block {j} violates 4π²·mass·n ≤ Λ(1/n): ratio {ratio}")]
    HypothesisViolated { j: usize, ratio: f64 },
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Corona(#[from] CoronaError),
    #[error(transparent)]
    Bergman(#[from] BergmanError),
    #[error(transparent)]
    Growth(#[from] GrowthError),
}

impl PipelineError {
    /// Planning or resolution limits, as opposed to invalid input.
    pub fn is_numeric(&self) -> bool {
        matches!(
            self,
            PipelineError::HorizonExhausted { .. }
                | PipelineError::FactorSolve { .. }
                | PipelineError::HypothesisViolated { .. }
                | PipelineError::Corona(_)
                | PipelineError::Bergman(_)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Theorem1,
    Theorem2,
    Theorem2Monomial,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Theorem1 => "theorem1",
            Mode::Theorem2 => "theorem2",
            Mode::Theorem2Monomial => "theorem2_monomial",
        })
    }
}

impl FromStr for Mode {
    type Err = PipelineError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "theorem1" => Ok(Mode::Theorem1),
            "theorem2" => Ok(Mode::Theorem2),
            "theorem2_monomial" => Ok(Mode::Theorem2Monomial),
            other => Err(PipelineError::BadParameter(format!("mode '{other}'"))),
        }
    }
}

/// Where the constant in a threshold came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantSource {
    Measured,
    Default,
    Override,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub j0: usize,
    #[serde(rename = "N")]
    pub n_blocks: usize,
    /// m_j = n_{j0+j}, j = 1..N
    pub rungs: Vec<u64>,
    pub lambdas: Vec<f64>,
    /// λ_j²·ν(𝕋), the mass of block j
    pub masses: Vec<f64>,
    pub constant_used: f64,
    pub constant_source: ConstantSource,
    pub mode: Mode,
    pub threshold: f64,
    pub partial_sum: f64,
}

impl AllocationPlan {
    pub fn lambda_sq_sum(&self) -> f64 {
        self.lambdas.iter().map(|l| l * l).sum()
    }
}

/// λ_j = √(t_j / Σt), renormalized once more so that Σλ² = 1 to rounding.
fn allocate(terms: &[f64]) -> Vec<f64> {
    let total: f64 = terms.iter().sum();
    let mut l: Vec<f64> = terms.iter().map(|t| (t / total).sqrt()).collect();
    let s = l.iter().map(|x| x * x).sum::<f64>().sqrt();
    l.iter_mut().for_each(|x| *x /= s);
    l
}

/// Collects ladder terms from rung j0+1 on until their sum reaches the
/// threshold. `rung(i)` returns the i-th ladder index (n₀ first) or None
/// when the ladder is exhausted.
fn accumulate<R, T>(j0: usize, threshold: f64, rung: R, term: T) -> Result<(Vec<u64>, Vec<f64>), PipelineError>
where
    R: Fn(usize) -> Option<u64>,
    T: Fn(u64) -> f64,
{
    let (mut rungs, mut terms, mut sum) = (Vec::new(), Vec::new(), 0.0);
    let mut j = 1;
    while sum < threshold || rungs.is_empty() {
        let Some(n) = rung(j0 + j).filter(|_| j <= MAX_BLOCKS) else {
            return Err(PipelineError::HorizonExhausted {
                achieved: sum,
                threshold,
                rungs: rungs.len(),
            });
        };
        let t = term(n);
        rungs.push(n);
        terms.push(t);
        sum += t;
        j += 1;
    }
    Ok((rungs, terms))
}

/// N = min{M : Σ_{j≤M} (log ω(m_j))²/m_j ≥ (4Ac)²} with
/// λ_j ∝ log ω(m_j)/√m_j.
pub fn plan_theorem1(
    w: &WeightSequence,
    nu: &AtomicSingularMeasure,
    j0: usize,
    a: f64,
    source: ConstantSource,
) -> Result<AllocationPlan, PipelineError> {
    if nu.is_empty() {
        return Err(PipelineError::NoAtoms);
    }
    if !(a > 0.0 && a.is_finite()) {
        return Err(PipelineError::BadParameter(format!("A = {a}")));
    }
    let c = nu.c();
    let threshold = (4.0 * a * c).powi(2);
    let ladder: Ladder = weight_ladder(w, j0 + 1 + MAX_BLOCKS.min(w.horizon()))?;
    let lw = |n: u64| w.log_weight(n as usize);
    let (rungs, terms) = accumulate(
        j0,
        threshold,
        |i| ladder.rungs.get(i).map(|&n| n as u64),
        |n| lw(n).powi(2) / n as f64,
    )?;
    let lambdas = allocate(&terms);
    let mass = nu.total_mass();
    Ok(AllocationPlan {
        j0,
        n_blocks: rungs.len(),
        masses: lambdas.iter().map(|l| l * l * mass).collect(),
        rungs,
        lambdas,
        constant_used: a,
        constant_source: source,
        mode: Mode::Theorem1,
        threshold,
        partial_sum: terms.iter().sum(),
    })
}

/// Ladder on s(n) = Λ(1/n) from n₀ = 1. Since s is nondecreasing each rung is
/// found by doubling and bisection, so indices up to 2⁶² are reachable.
pub fn lambda_ladder(lam: &LambdaMajorant, rungs: usize) -> Vec<u64> {
    let s = |n: u64| lam.value(1.0 / n as f64);
    let mut out = vec![1u64];
    while out.len() < rungs {
        let n = *out.last().expect("seeded");
        let target = 2.0 * s(n);
        if !(target > 0.0) || !target.is_finite() {
            break;
        }
        let (mut lo, mut hi) = (n, n + 1);
        while s(hi) < target {
            if hi >= LAMBDA_LADDER_CAP {
                return out;
            }
            lo = hi;
            hi = (2 * hi).min(LAMBDA_LADDER_CAP);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if s(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        out.push(hi);
    }
    out
}

/// N from Σ_j Λ(1/m_j)/m_j ≥ 4π²B², λ_j² ∝ Λ(1/m_j)/m_j, and the per-block
/// check 4π²·λ_j²ν(𝕋)·m_j ≤ Λ(1/m_j).
pub fn plan_theorem2(
    lam: &LambdaMajorant,
    nu: &AtomicSingularMeasure,
    j0: usize,
    b: f64,
    source: ConstantSource,
    mode: Mode,
) -> Result<AllocationPlan, PipelineError> {
    if mode == Mode::Theorem1 {
        return Err(PipelineError::ModeGate {
            mode,
            reason: "is not a Λ-growth mode".into(),
        });
    }
    if mode == Mode::Theorem2Monomial && lam.set() != BoundarySet::Circle {
        return Err(PipelineError::ModeGate {
            mode,
            reason: "needs Λ over the whole circle (set=circle)".into(),
        });
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(PipelineError::BadParameter(format!("B = {b}")));
    }
    let threshold = 4.0 * PI * PI * b * b;
    let ladder = lambda_ladder(lam, j0 + 1 + 256);
    let (rungs, terms) = accumulate(
        j0,
        threshold,
        |i| ladder.get(i).copied(),
        |n| lam.value(1.0 / n as f64) / n as f64,
    )?;
    let lambdas = allocate(&terms);
    let mass = nu.total_mass();
    let masses: Vec<f64> = lambdas.iter().map(|l| l * l * mass).collect();
    for (j, (&n, &m)) in rungs.iter().zip(&masses).enumerate() {
        let ratio = 4.0 * PI * PI * m * n as f64 / lam.value(1.0 / n as f64);
        if ratio > 1.0 + 1e-12 {
            return Err(PipelineError::HypothesisViolated { j: j + 1, ratio });
        }
    }
    Ok(AllocationPlan {
        j0,
        n_blocks: rungs.len(),
        rungs,
        lambdas,
        masses,
        constant_used: b,
        constant_source: source,
        mode,
        threshold,
        partial_sum: terms.iter().sum(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Largest polynomial degree a factor solve may use.
    pub max_degree: usize,
    /// Truncation for product assembly and weighted norms.
    #[serde(rename = "M")]
    pub m: usize,
    /// Grid for Λ-norm residuals.
    pub grid: GridSpec,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_degree: 1024,
            m: 4096,
            grid: GridSpec::standard(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorDiag {
    pub j: usize,
    pub n: u64,
    pub d: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub mass: f64,
    pub residual_l2: f64,
    pub f_sup: f64,
    pub g_sup: f64,
    /// ‖1 − U_j f_j‖ in the run's norm
    pub block_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRun {
    pub plan: AllocationPlan,
    pub residual: f64,
    /// telescoping bound evaluated with the plan's constant
    pub bound: f64,
    /// Σ_j (∏_{k<j} ‖f_k‖∞)·‖1 − U_j f_j‖, the triangle-inequality audit
    pub audit_bound: f64,
    pub factors: Vec<FactorDiag>,
    /// ℓ² coefficient mass after each assembly step
    pub mass_audit: Vec<f64>,
    pub options: SolverOptions,
}

fn resolution(j: usize, n: u64, need: u64, cap: usize) -> Result<usize, PipelineError> {
    if need > cap as u64 {
        return Err(PipelineError::FactorSolve {
            j,
            n,
            reason: format!("needs degree {need} beyond the resolution cap {cap}"),
        });
    }
    Ok(need as usize)
}

/// Solves f_jU_j + z^{m_j}g_j ≈ 1 for every block, assembles U·∏f_j at the
/// fixed truncation M and measures ‖1 − U·∏f_j‖_{ω,2}.
pub fn run_theorem1(
    plan: &AllocationPlan,
    w: &WeightSequence,
    nu: &AtomicSingularMeasure,
    opts: &SolverOptions,
) -> Result<PipelineRun, PipelineError> {
    if plan.mode != Mode::Theorem1 {
        return Err(PipelineError::ModeGate {
            mode: plan.mode,
            reason: "cannot run as theorem1".into(),
        });
    }
    let m = opts.m;
    for (j, &n) in plan.rungs.iter().enumerate() {
        let d = resolution(j + 1, n, n, opts.max_degree)?;
        if n as usize + d > m {
            return Err(PipelineError::FactorSolve {
                j: j + 1,
                n,
                reason: format!("match length {} exceeds M = {m}", n as usize + d),
            });
        }
    }
    let solves: Vec<Result<(TaylorSeries, FactorDiag), PipelineError>> = plan
        .rungs
        .par_iter()
        .enumerate()
        .map(|(j, &n)| {
            let n = n as usize;
            let nu_j = nu.scaled(plan.lambdas[j].powi(2));
            let mj = 2 * n;
            let sol = bezout_solve(&inner_coeffs(&nu_j, mj), n, n, mj)?;
            let uj = inner_coeffs(&nu_j, m);
            let block = TaylorSeries::one(m).sub(&multiply(&sol.f, &uj, m));
            let diag = FactorDiag {
                j: j + 1,
                n: n as u64,
                d: n,
                m: mj,
                mass: plan.masses[j],
                residual_l2: sol.residual_l2,
                f_sup: sol.f_sup,
                g_sup: sol.g_sup,
                block_residual: bergman::norm(w, &block)?,
            };
            Ok((sol.f, diag))
        })
        .collect();
    let mut factors = Vec::with_capacity(solves.len());
    let mut diags = Vec::with_capacity(solves.len());
    for s in solves {
        let (f, d) = s?;
        factors.push(f);
        diags.push(d);
    }

    let mut p = inner_coeffs(nu, m);
    let mut mass_audit = vec![p.l2_norm()];
    for f in &factors {
        p = multiply_fft(&p, f, m);
        mass_audit.push(p.l2_norm());
    }
    let residual = bergman::norm(w, &TaylorSeries::one(m).sub(&p))?;

    let a = plan.constant_used;
    let c = nu.c();
    let mut running = 0.0;
    let mut bound = 0.0;
    for (j, &n) in plan.rungs.iter().enumerate() {
        running += a * (c * plan.lambdas[j] * (n as f64).sqrt() + 1.0);
        bound += (running - w.log_weight(n as usize)).exp();
    }
    let mut sup_prod = 1.0;
    let mut audit_bound = 0.0;
    for d in &diags {
        audit_bound += sup_prod * d.block_residual;
        sup_prod *= d.f_sup;
    }
    Ok(PipelineRun {
        plan: plan.clone(),
        residual,
        bound,
        audit_bound,
        factors: diags,
        mass_audit,
        options: opts.clone(),
    })
}

/// Grid sup of log|h(z)| − Λ(d(z, E)) for h = 1 − ∏_j U_j(z)h_j(z).
fn lambda_residual(
    lam: &LambdaMajorant,
    blocks: &[(AtomicSingularMeasure, TaylorSeries)],
    pts: &[DiskPoint],
) -> f64 {
    argmax(pts, |p| {
        let z = p.z();
        let mut log_prod = Complex64::new(0.0, 0.0);
        for (nu_j, h) in blocks {
            let lu = inner_log(nu_j, z).unwrap_or(Complex64::new(f64::NEG_INFINITY, 0.0));
            log_prod += lu + h.eval(z).ln();
        }
        let r = Complex64::new(1.0, 0.0) - log_prod.exp();
        let lr = r.norm().ln();
        if lr == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            lr - lam.at(p)
        }
    })
    .map_or(f64::NEG_INFINITY, |v| v.0)
}

/// Solves h_jU_j + k_jv_j ≈ 1 with U_j = U^{λ_j²} and v_j = f_{1/m_j} (or
/// z^{⌊mΛ(1/m)⌋} in monomial mode), then measures ‖1 − U·∏h_j‖_{Λ,E,∞} on
/// the grid. The bound column is Σ_j exp(B·Σ_{k≤j}√(μ_k m_k Λ(1/m_k)) − κΛ(1/m_j))
/// with κ = π for f_δ blocks and κ = 1 for monomial blocks.
pub fn run_theorem2(
    plan: &AllocationPlan,
    lam: &LambdaMajorant,
    nu: &AtomicSingularMeasure,
    opts: &SolverOptions,
) -> Result<PipelineRun, PipelineError> {
    let monomial = match plan.mode {
        Mode::Theorem2 => false,
        Mode::Theorem2Monomial => true,
        Mode::Theorem1 => {
            return Err(PipelineError::ModeGate {
                mode: plan.mode,
                reason: "cannot run as theorem2".into(),
            })
        }
    };
    // feasibility first, before any heavy solve
    let mut shapes = Vec::with_capacity(plan.n_blocks);
    for (j, &n) in plan.rungs.iter().enumerate() {
        let lam_n = lam.value(1.0 / n as f64);
        let need = if monomial {
            ((n as f64 * lam_n).floor() as u64).max(64)
        } else {
            if TAU * lam_n > LOG_RANGE {
                return Err(PipelineError::FactorSolve {
                    j: j + 1,
                    n,
                    reason: format!("f_δ spans e^{:.1}, beyond double range", TAU * lam_n),
                });
            }
            n.saturating_mul(4).max(64)
        };
        let d = resolution(j + 1, n, need, opts.max_degree)?;
        shapes.push((n, lam_n, d));
    }

    let solved: Vec<Result<((AtomicSingularMeasure, TaylorSeries), FactorDiag), PipelineError>> = shapes
        .par_iter()
        .enumerate()
        .map(|(j, &(n, lam_n, d))| {
            let nu_j = nu.scaled(plan.lambdas[j].powi(2));
            let (v, mj) = if monomial {
                let k = (n as f64 * lam_n).floor() as usize;
                (TaylorSeries::monomial(k, k + d), k + d)
            } else {
                let f = OuterFdelta::new(lam_n, 1.0 / n as f64);
                (f.taylor(2 * d, true), 2 * d)
            };
            let (h, resid, f_sup) = if nu_j.is_empty() {
                (TaylorSeries::one(0), 0.0, 1.0)
            } else {
                let s = bezout_pair(&inner_coeffs(&nu_j, mj), &v, d, mj);
                let sup = crate::corona::measured_sup(&s.f)?.0;
                (s.f, s.residual_l2, sup)
            };
            let diag = FactorDiag {
                j: j + 1,
                n,
                d,
                m: mj,
                mass: plan.masses[j],
                residual_l2: resid,
                f_sup,
                g_sup: f64::NAN,
                block_residual: f64::NAN,
            };
            Ok(((nu_j, h), diag))
        })
        .collect();
    let mut blocks = Vec::with_capacity(solved.len());
    let mut diags = Vec::with_capacity(solved.len());
    for s in solved {
        let (b, d) = s?;
        blocks.push(b);
        diags.push(d);
    }
    let pts = opts.grid.build();
    for (i, d) in diags.iter_mut().enumerate() {
        d.block_residual = lambda_residual(lam, &blocks[i..=i], &pts).exp();
    }
    let residual = lambda_residual(lam, &blocks, &pts).exp();

    let kappa = if monomial { 1.0 } else { PI };
    let mut running = 0.0;
    let mut bound = 0.0;
    for (j, &(n, lam_n, _)) in shapes.iter().enumerate() {
        running += plan.constant_used * (plan.masses[j] * n as f64 * lam_n).sqrt();
        bound += (running - kappa * lam_n).exp();
    }
    let mut sup_prod = 1.0;
    let mut audit_bound = 0.0;
    for d in &diags {
        audit_bound += sup_prod * d.block_residual;
        sup_prod *= d.f_sup;
    }
    Ok(PipelineRun {
        plan: plan.clone(),
        residual,
        bound,
        audit_bound,
        factors: diags,
        mass_audit: Vec::new(),
        options: opts.clone(),
    })
}

/// One row of a residual trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub j0: usize,
    #[serde(rename = "N")]
    pub n_blocks: usize,
    pub mode: Mode,
    pub residual: f64,
    pub bound: f64,
    pub constant_used: f64,
}

impl From<&PipelineRun> for TrajectoryRow {
    fn from(r: &PipelineRun) -> Self {
        Self {
            j0: r.plan.j0,
            n_blocks: r.plan.n_blocks,
            mode: r.plan.mode,
            residual: r.residual,
            bound: r.bound,
            constant_used: r.plan.constant_used,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Decay,
    Plateau,
    /// planning never reached its threshold
    Stall,
    /// a factor solve or a run failed
    Failed,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Decay => "decay",
            Classification::Plateau => "plateau",
            Classification::Stall => "stall",
            Classification::Failed => "failed",
            Classification::Inconclusive => "inconclusive",
        })
    }
}

/// Decay when the last value is at most half the first; plateau when the
/// spread stays within 10% of the maximum.
pub fn classify(traj: &[f64]) -> Classification {
    if traj.len() < 2 || traj.iter().any(|v| !v.is_finite()) {
        return Classification::Inconclusive;
    }
    let first = traj[0];
    let last = traj[traj.len() - 1];
    let max = traj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = traj.iter().copied().fold(f64::INFINITY, f64::min);
    if last <= 0.5 * first {
        Classification::Decay
    } else if max - min <= 0.1 * max {
        Classification::Plateau
    } else {
        Classification::Inconclusive
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastEntry {
    pub label: String,
    /// degrees N for scans, j0 for pipeline sweeps
    pub xs: Vec<u64>,
    /// NaN where a run failed or stalled
    pub trajectory: Vec<f64>,
    /// divergence diagnostics matching each x
    pub partial_sums: Vec<f64>,
    pub classification: Classification,
    pub notes: Vec<String>,
}

/// Distances of a cyclicity scan as a trajectory, with the Σ(log ω)²/n²
/// partial sums at each degree.
pub fn scan_entry(
    label: &str,
    w: &WeightSequence,
    nu: &AtomicSingularMeasure,
    degrees: &[usize],
    m: usize,
) -> Result<ContrastEntry, PipelineError> {
    let rows = bergman::cyclicity_scan(w, nu, degrees, m)?;
    let partial_sums = degrees
        .iter()
        .map(|&n| partial_sum_theorem1(w, n))
        .collect::<Result<_, _>>()?;
    let trajectory: Vec<f64> = rows.iter().map(|r| r.dist).collect();
    Ok(ContrastEntry {
        label: label.to_string(),
        xs: degrees.iter().map(|&n| n as u64).collect(),
        classification: classify(&trajectory),
        trajectory,
        partial_sums,
        notes: Vec::new(),
    })
}

/// Theorem-2 sweep over j0. All plans stalling gives [`Classification::Stall`];
/// any other failure gives [`Classification::Failed`] with the reasons noted.
pub fn theorem2_entry(
    label: &str,
    lam: &LambdaMajorant,
    nu: &AtomicSingularMeasure,
    j0s: &[usize],
    b: f64,
    source: ConstantSource,
    opts: &SolverOptions,
) -> ContrastEntry {
    let mut xs = Vec::new();
    let mut trajectory = Vec::new();
    let mut partial_sums = Vec::new();
    let mut notes = Vec::new();
    let (mut stalls, mut failures) = (0, 0);
    for &j0 in j0s {
        xs.push(j0 as u64);
        let mut value = f64::NAN;
        match plan_theorem2(lam, nu, j0, b, source, Mode::Theorem2) {
            Err(PipelineError::HorizonExhausted { achieved, threshold, rungs }) => {
                stalls += 1;
                partial_sums.push(achieved);
                notes.push(format!(
                    "j0={j0}: planning stalled at partial sum {achieved:.6} < {threshold:.6} after {rungs} rungs"
                ));
            }
            Err(e) => {
                failures += 1;
                partial_sums.push(f64::NAN);
                notes.push(format!("j0={j0}: {e}"));
            }
            Ok(plan) => {
                partial_sums.push(plan.partial_sum);
                match run_theorem2(&plan, lam, nu, opts) {
                    Ok(run) => value = run.residual,
                    Err(e) => {
                        failures += 1;
                        notes.push(format!("j0={j0} (N={}): {e}", plan.n_blocks));
                    }
                }
            }
        }
        trajectory.push(value);
    }
    let classification = if stalls == j0s.len() {
        Classification::Stall
    } else if failures > 0 {
        Classification::Failed
    } else {
        classify(&trajectory)
    };
    ContrastEntry {
        label: label.to_string(),
        xs,
        trajectory,
        partial_sums,
        classification,
        notes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeldysEntry {
    pub label: String,
    pub converged: bool,
    pub log_abs_f0: Option<f64>,
    pub note: String,
}

pub fn keldys_entry(label: &str, lam: &LambdaMajorant) -> KeldysEntry {
    match keldys_outer_f(lam, Complex64::new(0.0, 0.0)) {
        Ok(r) => KeldysEntry {
            label: label.to_string(),
            converged: true,
            log_abs_f0: Some(r.log_value.re),
            note: format!("converged after {} dyadic levels", r.levels),
        },
        Err(e) => KeldysEntry {
            label: label.to_string(),
            converged: false,
            log_abs_f0: None,
            note: e.to_string(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub entries: Vec<ContrastEntry>,
    pub keldys: Vec<KeldysEntry>,
}

pub fn contrast_report(
    entries: Vec<ContrastEntry>,
    keldys: Vec<KeldysEntry>,
) -> Result<ContrastReport, PipelineError> {
    if entries.len() < 2 {
        return Err(PipelineError::BadParameter(
            "a contrast needs at least two configurations".into(),
        ));
    }
    Ok(ContrastReport { entries, keldys })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{make_family, FamilySpec};

    fn sqrt_weight() -> WeightSequence {
        make_family(&FamilySpec::Stretched { c: 1.0, beta: 0.5 }, 1 << 16, false, None).unwrap()
    }

    fn unit() -> AtomicSingularMeasure {
        AtomicSingularMeasure::point_mass(1.0).unwrap()
    }

    #[test]
    fn theorem1_equal_terms() {
        // every ladder term of e^{√n} is 1, so N = ⌈(4Ac)²⌉ and λ_j = 1/√N
        let p = plan_theorem1(&sqrt_weight(), &unit(), 1, 0.5, ConstantSource::Override).unwrap();
        assert_eq!(p.n_blocks, 4);
        assert_eq!(p.rungs, vec![16, 64, 256, 1024]);
        for l in &p.lambdas {
            assert!((l - 0.5).abs() < 1e-15);
        }
        assert!((p.lambda_sq_sum() - 1.0).abs() < 1e-12);
        assert!(matches!(
            plan_theorem1(&sqrt_weight(), &AtomicSingularMeasure::empty(), 1, 0.5, ConstantSource::Override),
            Err(PipelineError::NoAtoms)
        ));
    }

    #[test]
    fn theorem1_horizon_exhausted() {
        let e = plan_theorem1(&sqrt_weight(), &unit(), 1, 10.0, ConstantSource::Override);
        assert!(matches!(e, Err(PipelineError::HorizonExhausted { .. })));
    }

    #[test]
    fn lambda_ladder_inverse() {
        let l = lambda_ladder(&LambdaMajorant::power(1.0), 10);
        assert_eq!(l, (0..10).map(|j| 1u64 << j).collect::<Vec<_>>());
        let h = lambda_ladder(&LambdaMajorant::power(0.5), 6);
        assert_eq!(h, vec![1, 4, 16, 64, 256, 1024]);
    }

    #[test]
    fn theorem2_plans() {
        let inv = LambdaMajorant::power(1.0);
        let p = plan_theorem2(&inv, &unit(), 1, 1.0, ConstantSource::Default, Mode::Theorem2).unwrap();
        assert_eq!(p.n_blocks, (4.0 * PI * PI).ceil() as usize);
        assert!((p.lambda_sq_sum() - 1.0).abs() < 1e-12);
        for (&n, &m) in p.rungs.iter().zip(&p.masses) {
            assert!(4.0 * PI * PI * m * n as f64 <= inv.value(1.0 / n as f64) * (1.0 + 1e-12));
        }
        let half = LambdaMajorant::power(0.5);
        assert!(matches!(
            plan_theorem2(&half, &unit(), 1, 1.0, ConstantSource::Default, Mode::Theorem2),
            Err(PipelineError::HorizonExhausted { .. })
        ));
        assert!(matches!(
            plan_theorem2(&inv, &unit(), 1, 1.0, ConstantSource::Default, Mode::Theorem2Monomial),
            Err(PipelineError::ModeGate { .. })
        ));
    }

    #[test]
    fn theorem2_trivial_inner_has_zero_residual() {
        let inv = LambdaMajorant::power(1.0);
        let empty = AtomicSingularMeasure::empty();
        let plan = plan_theorem2(&inv, &empty, 1, 0.1, ConstantSource::Override, Mode::Theorem2).unwrap();
        assert_eq!(plan.n_blocks, 1);
        let opts = SolverOptions {
            grid: GridSpec {
                levels: 10,
                angles: 64,
                ..GridSpec::standard()
            },
            ..SolverOptions::default()
        };
        let run = run_theorem2(&plan, &inv, &empty, &opts).unwrap();
        assert_eq!(run.residual, 0.0);
    }

    #[test]
    fn theorem1_single_block_runs() {
        let w = sqrt_weight();
        let plan = plan_theorem1(&w, &unit(), 1, 0.25, ConstantSource::Override).unwrap();
        assert_eq!(plan.rungs, vec![16]);
        let opts = SolverOptions {
            m: 1024,
            ..SolverOptions::default()
        };
        let run = run_theorem1(&plan, &w, &unit(), &opts).unwrap();
        assert!(run.residual.is_finite() && run.residual > 0.0);
        // one block: the audit is the residual itself
        assert!((run.audit_bound - run.residual).abs() <= 1e-9 * run.residual.max(1.0));
        assert_eq!(run.mass_audit.len(), 2);
    }

    #[test]
    fn classification_rules() {
        assert_eq!(classify(&[1.0, 0.7, 0.4]), Classification::Decay);
        assert_eq!(classify(&[1.0, 0.95, 0.92]), Classification::Plateau);
        assert_eq!(classify(&[1.0, 0.8, 0.7]), Classification::Inconclusive);
        assert_eq!(classify(&[1.0]), Classification::Inconclusive);
    }
}
