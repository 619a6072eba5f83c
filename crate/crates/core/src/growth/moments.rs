//! Radial weights ω(n)⁻² = ∫₀¹ r^{2n+1} e^{−2Λ(1−r)} dr.

use rayon::prelude::*;

use super::lambda::LambdaMajorant;
use super::GrowthError;
use crate::quad;
use crate::weights::WeightSequence;

const SCAN: usize = 2049;
pub const MOMENT_REL_TOL: f64 = 1e-12;

fn log_integrand(lam: &LambdaMajorant, n: usize, r: f64) -> f64 {
    if r <= 0.0 {
        return f64::NEG_INFINITY;
    }
    (2 * n + 1) as f64 * r.ln() - 2.0 * lam.value(1.0 - r)
}

/// log of the n-th moment. The integrand is rescaled by its peak, found on
/// a 2049-point scan, and the peak is used as a breakpoint.
pub fn log_moment(lam: &LambdaMajorant, n: usize) -> Result<f64, GrowthError> {
    let (mut peak, mut at) = (f64::NEG_INFINITY, 1.0);
    for i in 1..SCAN {
        let r = i as f64 / (SCAN - 1) as f64;
        let v = log_integrand(lam, n, r);
        if v > peak {
            peak = v;
            at = r;
        }
    }
    if !peak.is_finite() {
        return Err(GrowthError::BadParameter(format!("moment {n} vanishes on the scan")));
    }
    let q = quad::integrate_with(
        |r: f64| (log_integrand(lam, n, r) - peak).exp(),
        0.0,
        1.0,
        &[at],
        MOMENT_REL_TOL,
        1e-300,
    )?;
    Ok(peak + q.value.ln())
}

/// log ω(n) = −½ log(moment n) for n = 0..=n_max, computed in parallel.
pub fn moment_weights(lam: &LambdaMajorant, n_max: usize) -> Result<WeightSequence, GrowthError> {
    let logs: Vec<f64> = (0..=n_max.max(1))
        .into_par_iter()
        .map(|n| log_moment(lam, n).map(|m| -0.5 * m))
        .collect::<Result<_, _>>()?;
    Ok(WeightSequence::from_log_values(
        logs,
        format!("moments({})", lam.tag()),
        false,
    )?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::concave_at;

    #[test]
    fn zero_lambda_closed_form() {
        let w = moment_weights(&LambdaMajorant::zero(), 32).unwrap();
        for n in 0..=32 {
            let exact = 0.5 * (2.0 * n as f64 + 2.0).ln();
            assert!((w.log_weight(n) - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_power_is_log_concave_and_increasing() {
        let w = moment_weights(&LambdaMajorant::power(1.0), 64).unwrap();
        assert!(w.is_monotone());
        for n in 1..64 {
            assert!(concave_at(w.values(), n), "n = {n}");
        }
    }

    #[test]
    fn matches_direct_quadrature() {
        // Λ ≡ 1: moment = e^{−2}/(2n+2)
        let lam: LambdaMajorant = "lambda=const,value=1".parse().unwrap();
        let w = moment_weights(&lam, 8).unwrap();
        for n in 0..=8 {
            let exact = -0.5 * (-2.0 - (2.0 * n as f64 + 2.0).ln());
            assert!((w.log_weight(n) - exact).abs() < 1e-12);
        }
    }
}
