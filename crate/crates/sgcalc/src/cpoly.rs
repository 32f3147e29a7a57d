//! Dense complex polynomials in one variable: arithmetic, Euclidean
//! division, Taylor recentering, Cauchy-type root bounds, and root finding
//! through companion-matrix Schur factorization.

use crate::error::{SgError, SgResult};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Relative threshold under which a leading coefficient counts as vanished.
const LEAD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    /// Coefficients in ascending powers; highest entry nonzero after `trim`.
    pub c: Vec<Complex64>,
}

impl CPoly {
    pub fn zero() -> Self {
        CPoly { c: vec![] }
    }

    pub fn constant(v: Complex64) -> Self {
        if v == Complex64::new(0.0, 0.0) {
            Self::zero()
        } else {
            CPoly { c: vec![v] }
        }
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    /// Monomial `z`.
    pub fn var() -> Self {
        CPoly {
            c: vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    pub fn from_coeffs(c: Vec<Complex64>) -> Self {
        let mut p = CPoly { c };
        p.trim();
        p
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut p = Self::one();
        for r in roots {
            p = p.mul(&CPoly {
                c: vec![-r, Complex64::new(1.0, 0.0)],
            });
        }
        p
    }

    /// Drop trailing coefficients that are exactly zero.
    pub fn trim(&mut self) {
        while let Some(last) = self.c.last() {
            if *last == Complex64::new(0.0, 0.0) {
                self.c.pop();
            } else {
                break;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        if self.c.is_empty() {
            None
        } else {
            Some(self.c.len() - 1)
        }
    }

    pub fn leading(&self) -> Complex64 {
        *self.c.last().unwrap_or(&Complex64::new(0.0, 0.0))
    }

    pub fn max_coeff_norm(&self) -> f64 {
        self.c.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for v in self.c.iter().rev() {
            acc = acc * z + v;
        }
        acc
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        for (i, v) in self.c.iter().enumerate() {
            c[i] += v;
        }
        for (i, v) in o.c.iter().enumerate() {
            c[i] += v;
        }
        Self::from_coeffs(c)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_coeffs(self.c.iter().map(|v| v * s).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut c = vec![Complex64::new(0.0, 0.0); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Self::from_coeffs(c)
    }

    pub fn derivative(&self) -> Self {
        if self.c.len() <= 1 {
            return Self::zero();
        }
        Self::from_coeffs(
            self.c[1..]
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::new((k + 1) as f64, 0.0))
                .collect(),
        )
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> SgResult<Self> {
        let lead = self.leading();
        if lead.norm() < LEAD_TOL * self.max_coeff_norm().max(1.0) {
            return Err(SgError::LeadingCoeffVanishes {
                witness: "monic normalization".into(),
                abs: lead.norm(),
            });
        }
        Ok(self.scale(lead.inv()))
    }

    /// Euclidean division: `self = q·div + r` with `deg r < deg div`.
    pub fn divrem(&self, div: &Self) -> SgResult<(Self, Self)> {
        let dd = div
            .degree()
            .ok_or_else(|| SgError::InvalidParameter("polynomial division by zero".into()))?;
        let lead = div.leading();
        if lead.norm() < LEAD_TOL * div.max_coeff_norm().max(1.0) {
            return Err(SgError::LeadingCoeffVanishes {
                witness: "polynomial division".into(),
                abs: lead.norm(),
            });
        }
        let mut r = self.c.clone();
        let nd = self.degree().unwrap_or(0);
        if self.is_zero() || nd < dd {
            return Ok((Self::zero(), self.clone()));
        }
        let mut q = vec![Complex64::new(0.0, 0.0); nd - dd + 1];
        for k in (0..=nd - dd).rev() {
            let coeff = r[k + dd] / lead;
            q[k] = coeff;
            for j in 0..=dd {
                r[k + j] -= coeff * div.c[j];
            }
        }
        r.truncate(dd);
        Ok((Self::from_coeffs(q), Self::from_coeffs(r)))
    }

    /// Coefficients of `p(z0 + t)` in powers of `t` (exact Taylor shift by
    /// repeated synthetic division), padded/truncated to `len`.
    pub fn taylor_at(&self, z0: Complex64, len: usize) -> Vec<Complex64> {
        let mut work = self.c.clone();
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            if work.is_empty() {
                out.push(Complex64::new(0.0, 0.0));
                continue;
            }
            // synthetic division of `work` by (z - z0): remainder is the
            // next Taylor coefficient
            let mut acc = Complex64::new(0.0, 0.0);
            for v in work.iter().rev() {
                acc = acc * z0 + v;
            }
            out.push(acc);
            // quotient coefficients (Horner intermediates)
            let mut quo = Vec::with_capacity(work.len().saturating_sub(1));
            let mut carry = Complex64::new(0.0, 0.0);
            for v in work.iter().rev() {
                carry = carry * z0 + v;
                quo.push(carry);
            }
            quo.pop(); // drop the remainder
            quo.reverse();
            work = quo;
        }
        out
    }

    /// Cauchy-type bound: every root lies in `|z| ≤ max_j (N·|c_j/c_N|)^{1/(N-j)}`.
    /// `None` when degree < 1 or the leading coefficient vanishes.
    pub fn root_bound(&self) -> Option<f64> {
        let n = self.degree()?;
        if n < 1 {
            return None;
        }
        let lead = self.leading();
        if lead.norm() < LEAD_TOL * self.max_coeff_norm().max(1.0) {
            return None;
        }
        let nn = n as f64;
        let mut best = 0.0f64;
        for (j, v) in self.c.iter().enumerate().take(n) {
            if v.norm() == 0.0 {
                continue;
            }
            let r = (nn * v.norm() / lead.norm()).powf(1.0 / (nn - j as f64));
            best = best.max(r);
        }
        Some(best)
    }

    /// All roots via companion-matrix Schur factorization. Degree-0 and
    /// constant polynomials return an empty list; a vanished leading
    /// coefficient is an error.
    pub fn roots(&self) -> SgResult<Vec<Complex64>> {
        let n = match self.degree() {
            None | Some(0) => return Ok(vec![]),
            Some(n) => n,
        };
        let monic = self.monic()?;
        if n == 1 {
            return Ok(vec![-monic.c[0]]);
        }
        if n == 2 {
            // quadratic formula with stable sign choice
            let b = monic.c[1];
            let c = monic.c[0];
            let disc = (b * b - 4.0 * c).sqrt();
            let q = if (b + disc).norm() >= (b - disc).norm() {
                -0.5 * (b + disc)
            } else {
                -0.5 * (b - disc)
            };
            let r1 = q;
            let r2 = if q.norm() > 0.0 { c / q } else { -b - q };
            return Ok(vec![r1, r2]);
        }
        let mut m = DMatrix::<Complex64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..n {
            m[(i, n - 1)] = -monic.c[i];
        }
        // Shifted QR needs only a handful of iterations per eigenvalue when
        // it converges at all, so fail over quickly instead of spinning.
        if let Some(schur) = m
            .clone()
            .try_schur(1e-14, 50 * n)
            .or_else(|| m.clone().try_schur(1e-12, 500 * n))
        {
            let (_, t) = schur.unpack();
            return Ok((0..n).map(|i| t[(i, i)]).collect());
        }
        // The QR iteration can stall when the spectrum is exactly symmetric
        // (e.g. double roots at ±i). A generic diagonal shift translates the
        // eigenvalues and breaks the symmetry; subtract it afterwards.
        let shift = Complex64::new(0.375, 0.21972);
        let mut ms = m;
        for i in 0..n {
            ms[(i, i)] += shift;
        }
        let schur = ms.try_schur(1e-12, 100_000).ok_or_else(|| {
            SgError::QuadratureFailure(
                "companion-matrix Schur iteration did not converge".into(),
            )
        })?;
        let (_, t) = schur.unpack();
        Ok((0..n).map(|i| t[(i, i)] - shift).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn divrem_round_trip() {
        let a = CPoly::from_coeffs(vec![c(1.0, 2.0), c(-3.0, 0.5), c(2.0, 0.0), c(0.0, 1.0)]);
        let b = CPoly::from_coeffs(vec![c(1.0, -1.0), c(2.0, 0.0)]);
        let (q, r) = a.divrem(&b).unwrap();
        let back = q.mul(&b).add(&r);
        assert_eq!(back.c.len(), a.c.len());
        for (x, y) in back.c.iter().zip(a.c.iter()) {
            assert!((x - y).norm() < 1e-13);
        }
        assert!(r.degree().unwrap_or(0) < b.degree().unwrap());
    }

    #[test]
    fn roots_of_known_quartic() {
        // (z² + 1)(z - 2)(z + 3): roots ±i, 2, -3
        let p = CPoly::from_roots(&[c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0), c(-3.0, 0.0)]);
        let roots = p.roots().unwrap();
        let want = [c(0.0, 1.0), c(0.0, -1.0), c(2.0, 0.0), c(-3.0, 0.0)];
        assert_eq!(roots.len(), want.len());
        for w in want {
            let best = roots.iter().map(|r| (r - w).norm()).fold(f64::MAX, f64::min);
            assert!(best < 1e-10, "no computed root near {w} (closest {best:.2e})");
        }
    }

    #[test]
    fn roots_satisfy_cauchy_bound() {
        // deterministic pseudo-random coefficients
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 4.0 - 2.0
        };
        for _ in 0..50 {
            let coeffs: Vec<Complex64> = (0..7).map(|_| c(next(), next())).collect();
            let p = CPoly::from_coeffs(coeffs);
            if p.degree().unwrap_or(0) < 1 {
                continue;
            }
            let bound = p.root_bound().unwrap();
            for r in p.roots().unwrap() {
                assert!(r.norm() <= bound, "|{r}| = {} > bound {bound}", r.norm());
            }
        }
    }

    #[test]
    fn taylor_shift_exact() {
        // p(z) = z³ - 2z + 1 at z0 = 1+i: compare against direct expansion
        let p = CPoly::from_coeffs(vec![c(1.0, 0.0), c(-2.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let z0 = c(1.0, 1.0);
        let t = p.taylor_at(z0, 4);
        assert!((t[0] - p.eval(z0)).norm() < 1e-13);
        assert!((t[1] - p.derivative().eval(z0)).norm() < 1e-13);
        assert!((t[2] - p.derivative().derivative().eval(z0) / 2.0).norm() < 1e-13);
        assert!((t[3] - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn double_root_detected_within_cluster_tolerance() {
        // (z - 1)² (z + 2): companion roots cluster at 1
        let p = CPoly::from_roots(&[c(1.0, 0.0), c(1.0, 0.0), c(-2.0, 0.0)]);
        let roots = p.roots().unwrap();
        let near_one = roots.iter().filter(|r| (*r - c(1.0, 0.0)).norm() < 1e-6).count();
        assert_eq!(near_one, 2);
    }
}
