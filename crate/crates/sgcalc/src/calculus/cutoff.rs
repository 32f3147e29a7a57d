//! Radial Gevrey excision cutoff.
//!
//! `χ(ρ)` vanishes for `ρ ≤ B`, equals `1` for `ρ ≥ 2B`, and transitions via
//! the normalised primitive of the Gevrey bump
//!
//! ```text
//! φ(s) = exp(-(s(1-s))^{-1/(θ-1)}),   s ∈ (0,1),
//! Φ(s) = ∫₀ˢ φ / ∫₀¹ φ,              χ(ρ) = Φ((ρ-B)/B).
//! ```
//!
//! `φ ∈ G^θ` for `θ > 1`, so `χ` has derivative bounds `|χ^{(m)}| ≤ C D^m m!^θ`
//! and multiplies symbol classes without degrading their Gevrey order when
//! `θ` does not exceed the class order.

use crate::error::{SgError, SgResult};
use crate::jets::RJet;
use crate::quad::integrate_real;
use num_complex::Complex64;

/// Quadrature tolerance for the transition profile. The bump is smooth and
/// small (`∫φ ≈ 7e-3` at `θ = 2`), so an absolute tolerance near machine
/// precision of the *normalised* profile needs scaling by the mass.
const PROFILE_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct GevreyCutoff {
    /// excision radius: identically 0 on `[0, B]`, identically 1 on `[2B, ∞)`
    pub b_radius: f64,
    /// Gevrey order of the transition bump (must exceed 1)
    pub theta: f64,
    /// total mass `∫₀¹ φ(s) ds` of the unnormalised bump
    z_norm: f64,
}

/// Construct the radial cutoff at excision radius `b_radius` with transition
/// bump of Gevrey order `theta`.
pub fn gevrey_cutoff(b_radius: f64, theta: f64) -> SgResult<GevreyCutoff> {
    if !(b_radius > 0.0) || !b_radius.is_finite() {
        return Err(SgError::InvalidParameter(format!(
            "cutoff radius must be positive and finite, got {b_radius}"
        )));
    }
    if !(theta > 1.0) || !theta.is_finite() {
        return Err(SgError::InvalidParameter(format!(
            "cutoff Gevrey order must exceed 1, got {theta}"
        )));
    }
    let f = |s: f64| -> SgResult<Complex64> { Ok(Complex64::new(bump(s, theta), 0.0)) };
    let z = integrate_real(&f, 0.0, 1.0, PROFILE_TOL)?.re;
    if !(z > 0.0) {
        return Err(SgError::QuadratureFailure(format!(
            "cutoff bump mass non-positive ({z}) at theta = {theta}"
        )));
    }
    Ok(GevreyCutoff {
        b_radius,
        theta,
        z_norm: z,
    })
}

/// The unnormalised bump `φ(s)`, extended by 0 outside `(0,1)`.
fn bump(s: f64, theta: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let u = s * (1.0 - s);
    (-u.powf(-1.0 / (theta - 1.0))).exp()
}

impl GevreyCutoff {
    /// χ(ρ); exact 0 / 1 outside the transition annulus.
    pub fn value(&self, rho: f64) -> SgResult<f64> {
        let b = self.b_radius;
        if rho <= b {
            return Ok(0.0);
        }
        if rho >= 2.0 * b {
            return Ok(1.0);
        }
        let s = (rho - b) / b;
        let th = self.theta;
        let f = |t: f64| -> SgResult<Complex64> { Ok(Complex64::new(bump(t, th), 0.0)) };
        let m = integrate_real(&f, 0.0, s, PROFILE_TOL * self.z_norm)?.re;
        Ok((m / self.z_norm).clamp(0.0, 1.0))
    }

    /// Jet of χ at `rho` with `len` coefficients (`len-1` derivatives).
    /// Outside the open transition annulus the jet is the constant 0 or 1.
    pub fn jet(&self, rho: f64, len: usize) -> SgResult<RJet> {
        let b = self.b_radius;
        if rho <= b {
            return Ok(RJet::constant(0.0, len));
        }
        if rho >= 2.0 * b {
            return Ok(RJet::constant(1.0, len));
        }
        let s0 = (rho - b) / b;
        // φ-jet at s0: u = s(1-s), φ = exp(-u^{-1/(θ-1)})
        let s = RJet::variable(s0, len.max(1));
        let u = s.mul(&RJet::constant(1.0, len.max(1)).sub(&s));
        let w = u.powf(-1.0 / (self.theta - 1.0))?;
        let phi = w.neg().exp();
        // χ(ρ) = Φ((ρ-b)/b): χ' = φ(s)/(bZ), and each further ρ-derivative
        // pulls another 1/b from the chain rule.
        let mut c = vec![0.0; len];
        if len >= 1 {
            c[0] = self.value(rho)?;
        }
        for (m, cm) in c.iter_mut().enumerate().skip(1) {
            *cm = phi.derivative(m - 1) / (b.powi(m as i32) * self.z_norm) / crate::expr::factorial(m);
        }
        Ok(RJet { c })
    }

    /// m-th derivative of χ at `rho`.
    pub fn deriv(&self, rho: f64, m: usize) -> SgResult<f64> {
        Ok(self.jet(rho, m + 1)?.derivative(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_values_are_exact() {
        let chi = gevrey_cutoff(2.0, 2.0).unwrap();
        assert_eq!(chi.value(0.0).unwrap(), 0.0);
        assert_eq!(chi.value(2.0).unwrap(), 0.0);
        assert_eq!(chi.value(4.0).unwrap(), 1.0);
        assert_eq!(chi.value(1e9).unwrap(), 1.0);
        let v = chi.value(3.0).unwrap();
        assert!(v > 0.0 && v < 1.0);
        // symmetry of the bump: Φ(1/2) = 1/2
        assert!((v - 0.5).abs() < 1e-10, "midpoint {v}");
    }

    #[test]
    fn monotone_transition() {
        let chi = gevrey_cutoff(1.0, 2.0).unwrap();
        let mut last = -1.0;
        for i in 0..=40 {
            let rho = 1.0 + i as f64 / 40.0;
            let v = chi.value(rho).unwrap();
            assert!(v >= last - 1e-13);
            last = v;
        }
    }

    #[test]
    fn jet_matches_finite_differences() {
        let chi = gevrey_cutoff(1.0, 2.0).unwrap();
        let rho = 1.6;
        let j = chi.jet(rho, 4).unwrap();
        assert!((j.value() - chi.value(rho).unwrap()).abs() < 1e-13);
        let h = 1e-5;
        let d1 = (chi.value(rho + h).unwrap() - chi.value(rho - h).unwrap()) / (2.0 * h);
        assert!(
            (j.derivative(1) - d1).abs() < 1e-7 * (1.0 + d1.abs()),
            "jet {} fd {}",
            j.derivative(1),
            d1
        );
        let d2 = (chi.value(rho + h).unwrap() - 2.0 * chi.value(rho).unwrap()
            + chi.value(rho - h).unwrap())
            / (h * h);
        assert!(
            (j.derivative(2) - d2).abs() < 1e-4 * (1.0 + d2.abs()),
            "jet {} fd {}",
            j.derivative(2),
            d2
        );
    }

    #[test]
    fn plateau_jets_are_constant() {
        let chi = gevrey_cutoff(1.0, 2.0).unwrap();
        let j0 = chi.jet(0.5, 5).unwrap();
        let j1 = chi.jet(3.0, 5).unwrap();
        assert!(j0.c.iter().all(|&c| c == 0.0));
        assert_eq!(j1.value(), 1.0);
        assert!(j1.c[1..].iter().all(|&c| c == 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gevrey_cutoff(0.0, 2.0).is_err());
        assert!(gevrey_cutoff(1.0, 1.0).is_err());
        assert!(gevrey_cutoff(-3.0, 2.0).is_err());
    }

    #[test]
    fn gevrey_derivative_growth_is_subfactorial_squared() {
        // |χ^{(m)}| ≤ C D^m (m!)^θ with θ = 2: check the ratio stays bounded
        // for the first few orders at the steepest point.
        let chi = gevrey_cutoff(1.0, 2.0).unwrap();
        let j = chi.jet(1.5, 7).unwrap();
        for m in 1..7 {
            let bound = 40.0_f64.powi(m as i32) * crate::expr::factorial(m).powf(2.0);
            assert!(
                j.derivative(m).abs() < bound,
                "order {m}: {} vs {bound}",
                j.derivative(m)
            );
        }
    }
}
