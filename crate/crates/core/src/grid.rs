//! Deterministic sample grids on the unit disk.
//!
//! Points carry 1 − |z| explicitly so that samples at distance 2⁻⁴⁰ from the
//! circle keep full relative precision in Poisson-type kernels.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskPoint {
    pub r: f64,
    pub one_minus_r: f64,
    pub theta: f64,
}

impl DiskPoint {
    pub fn polar(one_minus_r: f64, theta: f64) -> Self {
        Self {
            r: 1.0 - one_minus_r,
            one_minus_r,
            theta,
        }
    }

    pub fn from_z(z: Complex64) -> Self {
        let r = z.norm();
        Self {
            r,
            one_minus_r: 1.0 - r,
            theta: z.arg(),
        }
    }

    pub fn z(&self) -> Complex64 {
        Complex64::from_polar(self.r, self.theta)
    }

    /// 1 − |z|².
    pub fn one_minus_r2(&self) -> f64 {
        self.one_minus_r * (1.0 + self.r)
    }

    /// |e^{iφ} − z|² in the cancellation-free form (1−r)² + 4r sin²((θ−φ)/2).
    pub fn dist_sq_to_circle_point(&self, phi: f64) -> f64 {
        let s = ((self.theta - phi) / 2.0).sin();
        self.one_minus_r * self.one_minus_r + 4.0 * self.r * s * s
    }

    /// |1 − z|.
    pub fn dist_to_one(&self) -> f64 {
        self.dist_sq_to_circle_point(0.0).sqrt()
    }
}

/// Parameters of a grid, recorded in reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Radii 1 − 2⁻ᵏ for k = 1..=levels.
    pub levels: u32,
    pub angles: usize,
    /// Extra angles per radius within arc distance 2⁻ᵏ of each listed angle.
    pub cluster_angles: Vec<f64>,
    pub cluster_count: usize,
    /// Stolz region |1−z|² ≤ k(1−|z|²) sampled with `stolz_side`² points plus
    /// as many points on the real segment, when present.
    pub stolz_k: Option<f64>,
    pub stolz_side: usize,
    pub include_origin: bool,
}

impl GridSpec {
    /// Radii 1 − 2⁻ᵏ (k = 1..40) × 4096 angles plus the origin.
    pub fn standard() -> Self {
        Self {
            levels: 40,
            angles: 4096,
            cluster_angles: Vec::new(),
            cluster_count: 0,
            stolz_k: None,
            stolz_side: 32,
            include_origin: true,
        }
    }

    pub fn with_clusters(mut self, angles: &[f64], count: usize) -> Self {
        self.cluster_angles = angles.to_vec();
        self.cluster_count = count;
        self
    }

    pub fn with_stolz(mut self, k: f64) -> Self {
        self.stolz_k = Some(k);
        self
    }

    pub fn build(&self) -> Vec<DiskPoint> {
        let mut pts = Vec::new();
        if self.include_origin {
            pts.push(DiskPoint::polar(1.0, 0.0));
        }
        for level in 1..=self.levels {
            let h = 0.5f64.powi(level as i32);
            for j in 0..self.angles {
                pts.push(DiskPoint::polar(h, TAU * j as f64 / self.angles as f64));
            }
            for &phi in &self.cluster_angles {
                let n = self.cluster_count;
                for i in 0..n {
                    let s = if n == 1 { 0.0 } else { 2.0 * i as f64 / (n - 1) as f64 - 1.0 };
                    pts.push(DiskPoint::polar(h, phi + h * s));
                }
            }
        }
        if let Some(k) = self.stolz_k {
            pts.extend(stolz_points(k, self.stolz_side));
        }
        pts
    }

    pub fn is_empty(&self) -> bool {
        !self.include_origin
            && (self.levels == 0 || (self.angles == 0 && self.cluster_count == 0))
            && self.stolz_k.is_none()
    }
}

/// Samples of {|1−z|² ≤ k(1−|z|²)}, the disk with center 1/(1+k) and radius
/// k/(1+k): `side` radial fractions × `side` angles, then `side` real points
/// z = 1 − k·2⁻ⁱ.
pub fn stolz_points(k: f64, side: usize) -> Vec<DiskPoint> {
    let big_r = k / (1.0 + k);
    let mut out = Vec::with_capacity(side * side + side);
    for i in 0..side {
        let rho = big_r * (i as f64 + 0.5) / side as f64;
        for j in 0..side {
            let phi = TAU * j as f64 / side as f64;
            // w = 1 − z = R − ρ e^{iφ}
            let w = Complex64::new(big_r, 0.0) - Complex64::from_polar(rho, phi);
            out.push(point_from_one_minus(w));
        }
    }
    for i in 0..side {
        let t = k * 0.5f64.powi(i as i32);
        out.push(DiskPoint::polar(t, 0.0));
    }
    out
}

/// Point z = 1 − w with 1 − |z| derived from 1 − |z|² = 2 Re w − |w|².
pub fn point_from_one_minus(w: Complex64) -> DiskPoint {
    let z = Complex64::new(1.0, 0.0) - w;
    let r = z.norm();
    let one_minus_r2 = 2.0 * w.re - w.norm_sqr();
    DiskPoint {
        r,
        one_minus_r: one_minus_r2 / (1.0 + r),
        theta: z.arg(),
    }
}

/// Minimum of `f` over the points, with the index of the first minimizer.
/// NaN values are treated as −∞ so that they cannot hide.
pub fn argmin<F>(pts: &[DiskPoint], f: F) -> Option<(f64, usize)>
where
    F: Fn(&DiskPoint) -> f64 + Sync,
{
    pts.par_iter()
        .enumerate()
        .map(|(i, p)| {
            let v = f(p);
            (if v.is_nan() { f64::NEG_INFINITY } else { v }, i)
        })
        .reduce_with(|a, b| match a.0.total_cmp(&b.0) {
            std::cmp::Ordering::Greater => b,
            std::cmp::Ordering::Less => a,
            std::cmp::Ordering::Equal => {
                if a.1 <= b.1 {
                    a
                } else {
                    b
                }
            }
        })
}

/// Maximum of `f`; NaN counts as +∞.
pub fn argmax<F>(pts: &[DiskPoint], f: F) -> Option<(f64, usize)>
where
    F: Fn(&DiskPoint) -> f64 + Sync,
{
    argmin(pts, |p| {
        let v = f(p);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            -v
        }
    })
    .map(|(v, i)| (-v, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_size() {
        let g = GridSpec::standard().build();
        assert_eq!(g.len(), 40 * 4096 + 1);
        assert!(g.iter().all(|p| p.r < 1.0 && p.one_minus_r > 0.0));
    }

    #[test]
    fn clusters_stay_near_atom() {
        let spec = GridSpec {
            levels: 3,
            angles: 0,
            include_origin: false,
            ..GridSpec::standard()
        }
        .with_clusters(&[1.0], 5);
        let g = spec.build();
        assert_eq!(g.len(), 15);
        for p in &g {
            assert!((p.theta - 1.0).abs() <= p.one_minus_r + 1e-15);
        }
    }

    #[test]
    fn stolz_points_lie_in_region() {
        for k in [0.005, 0.0007, 0.035] {
            for p in stolz_points(k, 32) {
                let lhs = p.dist_sq_to_circle_point(0.0);
                assert!(lhs <= k * p.one_minus_r2() * (1.0 + 1e-9), "{p:?}");
                assert!(p.r < 1.0);
            }
        }
    }

    #[test]
    fn dist_formula_matches_direct() {
        let p = DiskPoint::from_z(Complex64::new(0.3, -0.5));
        let direct = (Complex64::new(1.0, 0.0) - p.z()).norm();
        assert!((p.dist_to_one() - direct).abs() < 1e-15);
    }

    #[test]
    fn argmin_ties_and_nan() {
        let pts: Vec<DiskPoint> = (0..4).map(|i| DiskPoint::polar(0.5, i as f64)).collect();
        assert_eq!(argmin(&pts, |_| 1.0), Some((1.0, 0)));
        let (v, i) = argmin(&pts, |p| if p.theta == 2.0 { f64::NAN } else { 0.0 }).unwrap();
        assert_eq!((v, i), (f64::NEG_INFINITY, 2));
        assert_eq!(argmax(&pts, |p| p.theta), Some((3.0, 3)));
    }
}
