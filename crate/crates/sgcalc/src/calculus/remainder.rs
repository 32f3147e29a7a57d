//! Empirical order measurement of remainders along coordinate-space and
//! frequency-space rays.
//!
//! A remainder `r` claimed to be `O(⟨ξ⟩^{m1-δ}⟨x⟩^{m2-δ})` is probed by
//! sampling `log |r|` against `log ⟨·⟩` on rays where only one of the two
//! weights varies (`ξ = 0` on x-rays, `x = 0` on ξ-rays). After removing the
//! probe order, the fitted slope per ray is the measured *excess* exponent;
//! probing at order `(0, 0)` measures raw ray decay. Values below an
//! underflow floor are dropped: an identically-vanishing remainder is
//! reported as degenerate with slope `-∞`, which counts as unbounded decay,
//! not as a failure.

use super::SgOrder;
use crate::error::{SgError, SgResult};
use crate::expr::{unit_directions, Axis, EvalPoint};
use crate::fitting::line_fit;
use num_complex::Complex64;

/// Samples with modulus below this floor are treated as exact zeros.
pub const UNDERFLOW_FLOOR: f64 = 1e-280;

/// Minimum surviving samples for a ray to produce a fit.
const MIN_KEPT: usize = 3;

/// Log-spaced radii for ray probes. Requires at least two decades of span so
/// a slope fit is meaningful.
#[derive(Debug, Clone)]
pub struct RayGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub count: usize,
}

impl RayGrid {
    pub fn new(r_min: f64, r_max: f64, count: usize) -> SgResult<Self> {
        if !(r_min > 0.0) || !r_min.is_finite() || !r_max.is_finite() {
            return Err(SgError::InvalidParameter(format!(
                "ray radii must be positive and finite, got [{r_min}, {r_max}]"
            )));
        }
        if r_max < 100.0 * r_min {
            return Err(SgError::InvalidParameter(format!(
                "ray radii [{r_min}, {r_max}] span less than two decades"
            )));
        }
        if count < 4 {
            return Err(SgError::InvalidParameter(format!(
                "at least 4 radii required for a slope fit, got {count}"
            )));
        }
        Ok(RayGrid {
            r_min,
            r_max,
            count,
        })
    }

    pub fn radii(&self) -> Vec<f64> {
        let l0 = self.r_min.ln();
        let l1 = self.r_max.ln();
        (0..self.count)
            .map(|i| (l0 + (l1 - l0) * i as f64 / (self.count - 1) as f64).exp())
            .collect()
    }
}

/// Per-ray fit result.
#[derive(Debug, Clone, serde::Serialize)]
pub struct RayFit {
    /// which weight varies along this ray
    pub axis: Axis,
    pub direction: Vec<f64>,
    /// fitted excess exponent relative to the probe order
    pub slope: f64,
    pub slope_ci95: f64,
    pub resid_rms: f64,
    pub kept: usize,
    pub dropped: usize,
    /// too few surviving samples to fit (treated as slope `-∞`)
    pub degenerate: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct RemainderReport {
    pub probe: SgOrder,
    pub rays: Vec<RayFit>,
    /// worst (largest) slope over non-degenerate rays; `-∞` if all rays are
    /// degenerate
    pub slope: f64,
    /// true when every ray was degenerate (remainder below the floor
    /// everywhere sampled)
    pub degenerate: bool,
}

/// Measure the decay order of `f` relative to `probe` along `rays_per_axis`
/// rays of each of the two axes.
pub fn remainder_order<F>(
    f: &F,
    n: usize,
    probe: SgOrder,
    grid: &RayGrid,
    rays_per_axis: usize,
    seed: u64,
) -> SgResult<RemainderReport>
where
    F: Fn(&EvalPoint) -> SgResult<Complex64>,
{
    if n == 0 || rays_per_axis == 0 {
        return Err(SgError::InvalidParameter(
            "remainder probe needs n >= 1 and at least one ray per axis".into(),
        ));
    }
    let radii = grid.radii();
    let mut rays = Vec::new();
    for axis in [Axis::X, Axis::Xi] {
        let salt = match axis {
            Axis::X => 0x5851_f42d,
            Axis::Xi => 0x4c95_7f2d,
        };
        for dir in unit_directions(n, rays_per_axis, seed ^ salt) {
            let mut ts = Vec::with_capacity(radii.len());
            let mut ys = Vec::with_capacity(radii.len());
            let mut dropped = 0usize;
            for &r in &radii {
                let coords: Vec<f64> = dir.iter().map(|d| d * r).collect();
                let p = match axis {
                    Axis::X => EvalPoint::new(coords, vec![0.0; n]),
                    Axis::Xi => EvalPoint::new(vec![0.0; n], coords),
                };
                let v = f(&p)?.norm();
                if v < UNDERFLOW_FLOOR {
                    dropped += 1;
                    continue;
                }
                let t = match axis {
                    Axis::X => p.bracket_x().ln(),
                    Axis::Xi => p.bracket_xi().ln(),
                };
                let y = v.ln() - probe.m1 * p.bracket_xi().ln() - probe.m2 * p.bracket_x().ln();
                ts.push(t);
                ys.push(y);
            }
            if ts.len() < MIN_KEPT {
                rays.push(RayFit {
                    axis,
                    direction: dir,
                    slope: f64::NEG_INFINITY,
                    slope_ci95: 0.0,
                    resid_rms: 0.0,
                    kept: ts.len(),
                    dropped,
                    degenerate: true,
                });
                continue;
            }
            let fit = line_fit(&ts, &ys)?;
            rays.push(RayFit {
                axis,
                direction: dir,
                slope: fit.slope,
                slope_ci95: fit.slope_ci95,
                resid_rms: fit.resid_rms,
                kept: ts.len(),
                dropped,
                degenerate: false,
            });
        }
    }
    let slope = rays
        .iter()
        .filter(|r| !r.degenerate)
        .map(|r| r.slope)
        .fold(f64::NEG_INFINITY, f64::max);
    let degenerate = rays.iter().all(|r| r.degenerate);
    Ok(RemainderReport {
        probe,
        rays,
        slope,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RayGrid {
        RayGrid::new(10.0, 1000.0, 12).unwrap()
    }

    #[test]
    fn pure_weight_decay_is_recovered_exactly() {
        // |f| = ⟨x⟩^{-3}⟨ξ⟩^{-3}: raw slope -3 on both axes
        let f = |p: &EvalPoint| {
            Ok(Complex64::new(
                p.bracket_x().powi(-3) * p.bracket_xi().powi(-3),
                0.0,
            ))
        };
        let rep = remainder_order(&f, 1, SgOrder::new(0.0, 0.0), &grid(), 2, 7).unwrap();
        assert!(!rep.degenerate);
        assert!((rep.slope + 3.0).abs() < 1e-10, "slope {}", rep.slope);
        // probing at (-1,-1) leaves excess -2
        let rep2 = remainder_order(&f, 1, SgOrder::new(-1.0, -1.0), &grid(), 2, 7).unwrap();
        assert!((rep2.slope + 2.0).abs() < 1e-10);
    }

    #[test]
    fn vanishing_remainder_is_degenerate_pass() {
        let f = |_: &EvalPoint| Ok(Complex64::new(0.0, 0.0));
        let rep = remainder_order(&f, 2, SgOrder::new(0.0, 0.0), &grid(), 3, 1).unwrap();
        assert!(rep.degenerate);
        assert_eq!(rep.slope, f64::NEG_INFINITY);
        assert!(rep.rays.iter().all(|r| r.dropped == 12 && r.kept == 0));
    }

    #[test]
    fn growth_is_detected_on_the_growing_axis_only() {
        // f = x²: grows on x-rays, identically zero on ξ-rays (x = 0 there)
        let f = |p: &EvalPoint| Ok(Complex64::new(p.x[0] * p.x[0], 0.0));
        let rep = remainder_order(&f, 1, SgOrder::new(0.0, 0.0), &grid(), 2, 3).unwrap();
        assert!(!rep.degenerate);
        assert!((rep.slope - 2.0).abs() < 0.05, "slope {}", rep.slope);
        let xi_rays: Vec<_> = rep.rays.iter().filter(|r| r.axis == Axis::Xi).collect();
        assert!(xi_rays.iter().all(|r| r.degenerate));
    }

    #[test]
    fn narrow_radius_span_is_rejected() {
        assert!(matches!(
            RayGrid::new(10.0, 500.0, 12),
            Err(SgError::InvalidParameter(_))
        ));
        assert!(matches!(
            RayGrid::new(0.0, 1000.0, 12),
            Err(SgError::InvalidParameter(_))
        ));
        assert!(matches!(
            RayGrid::new(1.0, 1000.0, 3),
            Err(SgError::InvalidParameter(_))
        ));
    }

    #[test]
    fn eval_errors_propagate() {
        let f = |p: &EvalPoint| {
            if p.x[0] > 50.0 {
                Err(SgError::PoleHit {
                    location: format!("{:?}", p.x),
                    denom_abs: 0.0,
                })
            } else {
                Ok(Complex64::new(1.0, 0.0))
            }
        };
        assert!(matches!(
            remainder_order(&f, 1, SgOrder::new(0.0, 0.0), &grid(), 2, 3),
            Err(SgError::PoleHit { .. })
        ));
    }
}
