//! Truncated Taylor-series (jet) arithmetic.
//!
//! A `Jet` of length `L` stores the Taylor coefficients `c_0..c_{L-1}` of a
//! function at a base point, i.e. `f(t0 + t) = Σ c_k t^k + O(t^L)`, so
//! `f^{(k)}(t0) = k! · c_k`. All operations truncate at the common length.
//! Jets are the workhorse for exact higher derivatives of composite
//! functions (cutoff profiles, Laurent data at poles, extension series).

use crate::error::{SgError, SgResult};
use num_complex::Complex64;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar types a jet can be built over.
pub trait JetScalar:
    Copy
    + std::fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_f64(v: f64) -> Self;
    fn norm(&self) -> f64;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
}

impl JetScalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_f64(v: f64) -> Self {
        v
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
}

impl JetScalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn from_f64(v: f64) -> Self {
        Complex64::new(v, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn exp(&self) -> Self {
        Complex64::exp(*self)
    }
    fn ln(&self) -> Self {
        Complex64::ln(*self)
    }
}

/// Division by a jet whose constant term is this small fails.
const JET_DIV_TOL: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T: JetScalar> {
    /// Taylor coefficients, index = power of the local variable.
    pub c: Vec<T>,
}

pub type RJet = Jet<f64>;
pub type CJet = Jet<Complex64>;

impl<T: JetScalar> Jet<T> {
    pub fn constant(v: T, len: usize) -> Self {
        assert!(len >= 1);
        let mut c = vec![T::zero(); len];
        c[0] = v;
        Jet { c }
    }

    /// The identity function `t0 + t` as a jet at `t0`.
    pub fn variable(t0: T, len: usize) -> Self {
        assert!(len >= 1);
        let mut c = vec![T::zero(); len];
        c[0] = t0;
        if len > 1 {
            c[1] = T::one();
        }
        Jet { c }
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// k-th derivative value at the base point: `k! · c_k`.
    pub fn derivative(&self, k: usize) -> T {
        let mut f = T::one();
        for i in 1..=k {
            f = f * T::from_f64(i as f64);
        }
        f * self.c[k]
    }

    pub fn value(&self) -> T {
        self.c[0]
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        Jet {
            c: (0..n).map(|i| self.c[i] + o.c[i]).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        Jet {
            c: (0..n).map(|i| self.c[i] - o.c[i]).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Jet {
            c: self.c.iter().map(|v| -*v).collect(),
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Jet {
            c: self.c.iter().map(|v| *v * s).collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let n = self.len().min(o.len());
        let mut c = vec![T::zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                c[i + j] = c[i + j] + self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }

    /// Quotient jet; requires the divisor's constant term to be nonzero.
    pub fn div(&self, o: &Self) -> SgResult<Self> {
        let n = self.len().min(o.len());
        if o.c[0].norm() < JET_DIV_TOL {
            return Err(SgError::PoleHit {
                location: "jet division by a jet with vanishing constant term".into(),
                denom_abs: o.c[0].norm(),
            });
        }
        let mut q = vec![T::zero(); n];
        for k in 0..n {
            let mut acc = self.c[k];
            for j in 1..=k {
                acc = acc - o.c[j] * q[k - j];
            }
            q[k] = acc / o.c[0];
        }
        Ok(Jet { c: q })
    }

    pub fn recip(&self) -> SgResult<Self> {
        Jet::constant(T::one(), self.len()).div(self)
    }

    /// exp of the jet: `e_0 = exp(a_0)`, `n e_n = Σ_{k=1..n} k a_k e_{n-k}`.
    pub fn exp(&self) -> Self {
        let n = self.len();
        let mut e = vec![T::zero(); n];
        e[0] = self.c[0].exp();
        for m in 1..n {
            let mut acc = T::zero();
            for k in 1..=m {
                acc = acc + T::from_f64(k as f64) * self.c[k] * e[m - k];
            }
            e[m] = acc / T::from_f64(m as f64);
        }
        Jet { c: e }
    }

    /// log of the jet; requires a nonzero constant term (for real jets it
    /// must be positive for a real result).
    pub fn ln(&self) -> SgResult<Self> {
        let n = self.len();
        if self.c[0].norm() < JET_DIV_TOL {
            return Err(SgError::PoleHit {
                location: "jet logarithm at zero".into(),
                denom_abs: self.c[0].norm(),
            });
        }
        let mut l = vec![T::zero(); n];
        l[0] = self.c[0].ln();
        for m in 1..n {
            let mut acc = self.c[m];
            for j in 1..m {
                acc = acc - T::from_f64(j as f64 / m as f64) * l[j] * self.c[m - j];
            }
            l[m] = acc / self.c[0];
        }
        Ok(Jet { c: l })
    }

    /// Real power via exp(p·ln); constant term must be valid for `ln`.
    pub fn powf(&self, p: f64) -> SgResult<Self> {
        Ok(self.ln()?.scale(T::from_f64(p)).exp())
    }

    /// Integer power by binary exponentiation; negative powers via recip.
    pub fn powi(&self, k: i64) -> SgResult<Self> {
        if k < 0 {
            return self.recip()?.powi(-k);
        }
        let mut out = Jet::constant(T::one(), self.len());
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        Ok(out)
    }

    /// Jet of the derivative function: coefficients shift down.
    pub fn differentiate(&self) -> Self {
        if self.len() == 1 {
            return Jet::constant(T::zero(), 1);
        }
        Jet {
            c: (1..self.len())
                .map(|k| T::from_f64(k as f64) * self.c[k])
                .collect(),
        }
    }

    /// Jet of an antiderivative with the given constant term; coefficients
    /// shift up (length grows by one).
    pub fn integrate(&self, constant: T) -> Self {
        let mut c = Vec::with_capacity(self.len() + 1);
        c.push(constant);
        for (k, v) in self.c.iter().enumerate() {
            c.push(*v / T::from_f64((k + 1) as f64));
        }
        Jet { c }
    }

    /// Evaluate the truncated polynomial at local offset `t` (Horner).
    pub fn eval_offset(&self, t: T) -> T {
        let mut acc = T::zero();
        for v in self.c.iter().rev() {
            acc = acc * t + *v;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_jet_matches_analytic() {
        // f(t) = exp(2t) at t0 = 0.3: f^{(k)} = 2^k e^{0.6}
        let t = RJet::variable(0.3, 8).scale(2.0);
        let e = t.exp();
        for k in 0..8 {
            let want = 2f64.powi(k as i32) * (0.6f64).exp();
            assert_relative_eq!(e.derivative(k), want, max_relative = 1e-12);
        }
    }

    #[test]
    fn ln_one_plus_t_coefficients() {
        // ln(1+t) = t - t²/2 + t³/3 - ...
        let l = RJet::variable(1.0, 7).ln().unwrap();
        assert_relative_eq!(l.c[0], 0.0, epsilon = 1e-15);
        for k in 1..7 {
            let want = if k % 2 == 1 { 1.0 } else { -1.0 } / k as f64;
            assert_relative_eq!(l.c[k], want, max_relative = 1e-13);
        }
    }

    #[test]
    fn powf_binomial_series() {
        // (1+t)^{1/2}: coefficients are binomial(1/2, k)
        let s = RJet::variable(1.0, 6).powf(0.5).unwrap();
        let mut binom = 1.0;
        for k in 0..6 {
            assert_relative_eq!(s.c[k], binom, max_relative = 1e-12, epsilon = 1e-14);
            binom *= (0.5 - k as f64) / (k as f64 + 1.0);
        }
    }

    #[test]
    fn div_round_trip() {
        let a = RJet {
            c: vec![2.0, -1.0, 0.5, 3.0, -0.25],
        };
        let b = RJet {
            c: vec![1.5, 0.7, -2.0, 0.1, 0.9],
        };
        let q = a.div(&b).unwrap();
        let back = q.mul(&b);
        for k in 0..5 {
            assert_relative_eq!(back.c[k], a.c[k], max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn complex_geometric_series() {
        // 1/(1 - i t) = Σ (i t)^k
        let i = Complex64::new(0.0, 1.0);
        let den = CJet {
            c: vec![
                Complex64::new(1.0, 0.0),
                -i,
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        };
        let r = den.recip().unwrap();
        for (k, coeff) in r.c.iter().enumerate() {
            let want = i.powu(k as u32);
            assert!((coeff - want).norm() < 1e-13);
        }
    }

    #[test]
    fn underflowed_exponential_is_clean_zero() {
        // exp of a hugely negative argument: every coefficient flushes to
        // exactly 0.0 because e_0 underflows and the recurrence is linear
        // in it. Relied upon by the extension jet-matching path.
        let g = RJet {
            c: vec![-2.0e7, 3.0e9, -1.0e11, 4.0e12],
        };
        let e = g.exp();
        assert!(e.c.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn integrate_then_differentiate() {
        let a = RJet {
            c: vec![1.0, 2.0, 3.0, 4.0],
        };
        let b = a.integrate(7.0).differentiate();
        assert_eq!(b.c, a.c);
    }
}
