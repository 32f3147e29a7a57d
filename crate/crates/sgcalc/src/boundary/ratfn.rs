//! Rational functions of the normal covariable with factored denominators.
//!
//! A [`RatFn`] is `num(z) / Π_i base_i(z)^{m_i}`, obtained by freezing a
//! symbol expression at a boundary point `(x', 0, ξ')` and reading the last
//! covariable as the complex variable `z`. The factored form is preserved
//! through the algebra so that poles keep exact multiplicities and residues
//! can be computed by truncated power series instead of numerically unstable
//! root clustering.

use crate::cpoly::CPoly;
use crate::error::{SgError, SgResult};
use crate::expr::{Axis, EvalPoint, Expr};
use crate::jets::CJet;
use num_complex::Complex64;

/// Two poles closer than this (relative) distance are merged into one pole
/// of summed multiplicity.
const POLE_CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct RatFn {
    pub num: CPoly,
    /// denominator factors with multiplicities; empty list means 1
    pub den: Vec<(CPoly, usize)>,
}

fn same_poly(a: &CPoly, b: &CPoly) -> bool {
    a.c.len() == b.c.len()
        && a.c.iter().zip(&b.c).all(|(u, v)| {
            u.re.to_bits() == v.re.to_bits() && u.im.to_bits() == v.im.to_bits()
        })
}

impl RatFn {
    pub fn constant(v: Complex64) -> Self {
        RatFn {
            num: CPoly::constant(v),
            den: Vec::new(),
        }
    }

    pub fn var_z() -> Self {
        RatFn {
            num: CPoly::from_coeffs(vec![Complex64::default(), Complex64::new(1.0, 0.0)]),
            den: Vec::new(),
        }
    }

    pub fn from_poly(p: CPoly) -> Self {
        RatFn {
            num: p,
            den: Vec::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.degree().is_none()
    }

    pub fn num_degree(&self) -> i64 {
        self.num.degree().map(|d| d as i64).unwrap_or(i64::MIN / 2)
    }

    pub fn den_degree(&self) -> i64 {
        self.den
            .iter()
            .map(|(p, m)| p.degree().unwrap_or(0) as i64 * *m as i64)
            .sum()
    }

    /// Total degree `deg num − deg den` (no cancellation assumed).
    pub fn degree(&self) -> i64 {
        self.num_degree() - self.den_degree()
    }

    fn push_den_factor(den: &mut Vec<(CPoly, usize)>, p: &CPoly, m: usize) {
        if m == 0 || p.degree().unwrap_or(0) == 0 {
            return;
        }
        for (q, mq) in den.iter_mut() {
            if same_poly(q, p) {
                *mq += m;
                return;
            }
        }
        den.push((p.clone(), m));
    }

    /// Fold degree-0 denominator factors into the numerator.
    fn normalise(mut self) -> SgResult<Self> {
        let mut scale = Complex64::new(1.0, 0.0);
        let mut den = Vec::new();
        for (p, m) in self.den.into_iter() {
            match p.degree() {
                None => {
                    return Err(SgError::PoleHit {
                        location: "rational normalisation: zero denominator factor".into(),
                        denom_abs: 0.0,
                    })
                }
                Some(0) => {
                    let c = p.c[0];
                    for _ in 0..m {
                        scale *= c;
                    }
                }
                Some(_) => den.push((p, m)),
            }
        }
        if scale != Complex64::new(1.0, 0.0) {
            let inv = Complex64::new(1.0, 0.0) / scale;
            self.num = self.num.scale(inv);
        }
        self.den = den;
        Ok(self)
    }

    pub fn mul(&self, o: &RatFn) -> SgResult<RatFn> {
        let mut den = self.den.clone();
        for (p, m) in &o.den {
            Self::push_den_factor(&mut den, p, *m);
        }
        RatFn {
            num: self.num.mul(&o.num),
            den,
        }
        .normalise()
    }

    pub fn div(&self, o: &RatFn) -> SgResult<RatFn> {
        if o.is_zero() {
            return Err(SgError::PoleHit {
                location: "rational division by zero".into(),
                denom_abs: 0.0,
            });
        }
        let mut num = self.num.clone();
        for (p, m) in &o.den {
            for _ in 0..*m {
                num = num.mul(p);
            }
        }
        let mut den = self.den.clone();
        Self::push_den_factor(&mut den, &o.num, 1);
        let mut out = RatFn { num, den }.normalise()?;
        if o.num.degree() == Some(0) {
            out.num = out.num.scale(Complex64::new(1.0, 0.0) / o.num.c[0]);
        }
        Ok(out)
    }

    pub fn add(&self, o: &RatFn) -> SgResult<RatFn> {
        // union denominator with per-factor maximal multiplicity
        let mut union: Vec<(CPoly, usize)> = self.den.clone();
        for (p, m) in &o.den {
            let mut found = false;
            for (q, mq) in union.iter_mut() {
                if same_poly(q, p) {
                    *mq = (*mq).max(*m);
                    found = true;
                    break;
                }
            }
            if !found {
                union.push((p.clone(), *m));
            }
        }
        let lift = |num: &CPoly, own: &[(CPoly, usize)]| -> CPoly {
            let mut out = num.clone();
            for (p, m) in &union {
                let have = own
                    .iter()
                    .find(|(q, _)| same_poly(q, p))
                    .map(|(_, mq)| *mq)
                    .unwrap_or(0);
                for _ in have..*m {
                    out = out.mul(p);
                }
            }
            out
        };
        RatFn {
            num: lift(&self.num, &self.den).add(&lift(&o.num, &o.den)),
            den: union,
        }
        .normalise()
    }

    pub fn powi(&self, k: i32) -> SgResult<RatFn> {
        if k == 0 {
            return Ok(RatFn::constant(Complex64::new(1.0, 0.0)));
        }
        let base = if k > 0 {
            self.clone()
        } else {
            RatFn::constant(Complex64::new(1.0, 0.0)).div(self)?
        };
        let mut out = base.clone();
        for _ in 1..k.unsigned_abs() {
            out = out.mul(&base)?;
        }
        Ok(out)
    }

    /// Multiply by `z^p`.
    pub fn mul_z_pow(&self, p: usize) -> RatFn {
        if self.is_zero() || p == 0 {
            return self.clone();
        }
        let mut c = vec![Complex64::default(); p];
        c.extend_from_slice(&self.num.c);
        RatFn {
            num: CPoly::from_coeffs(c),
            den: self.den.clone(),
        }
    }

    pub fn eval(&self, z: Complex64) -> SgResult<Complex64> {
        let mut den = Complex64::new(1.0, 0.0);
        for (p, m) in &self.den {
            let v = p.eval(z);
            for _ in 0..*m {
                den *= v;
            }
        }
        if den.norm() < 1e-14 {
            return Err(SgError::PoleHit {
                location: format!("rational evaluation at z = {z}"),
                denom_abs: den.norm(),
            });
        }
        Ok(self.num.eval(z) / den)
    }

    /// Distinct poles with total multiplicities, clustered across factors,
    /// sorted by (Im, Re) for determinism.
    pub fn poles(&self) -> SgResult<Vec<(Complex64, usize)>> {
        let mut raw: Vec<(Complex64, usize)> = Vec::new();
        for (p, m) in &self.den {
            for root in p.roots()? {
                raw.push((root, *m));
            }
        }
        let mut grouped: Vec<(Complex64, usize)> = Vec::new();
        for (z, m) in raw {
            let mut merged = false;
            for (w, mw) in grouped.iter_mut() {
                if (z - *w).norm() <= POLE_CLUSTER_TOL * (1.0 + w.norm()) {
                    // weighted centroid keeps clusters stable
                    *w = (*w * *mw as f64 + z * m as f64) / (*mw + m) as f64;
                    *mw += m;
                    merged = true;
                    break;
                }
            }
            if !merged {
                grouped.push((z, m));
            }
        }
        grouped.sort_by(|a, b| {
            (a.0.im, a.0.re)
                .partial_cmp(&(b.0.im, b.0.re))
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        Ok(grouped)
    }

    /// Jet (truncated Taylor expansion) of the full denominator at `z0`.
    fn den_jet(&self, z0: Complex64, len: usize) -> SgResult<CJet> {
        let mut out = CJet::constant(Complex64::new(1.0, 0.0), len);
        for (p, m) in &self.den {
            let factor = CJet {
                c: p.taylor_at(z0, len),
            };
            out = out.mul(&factor.powi(*m as i64)?);
        }
        Ok(out)
    }

    /// Residue at a pole of multiplicity `m`, optionally against an entire
    /// weight given as its jet at the pole (length ≥ m), e.g. `e^{ixz}`:
    /// `Res = [coefficient of (z-z0)^{m-1}] of num·weight/(den/(z-z0)^m)`.
    pub fn residue_at(
        &self,
        z0: Complex64,
        m: usize,
        weight: Option<&CJet>,
    ) -> SgResult<Complex64> {
        if m == 0 {
            return Ok(Complex64::default());
        }
        let len = m;
        // denominator jet to length 2m, then strip the m-fold zero
        let dj = self.den_jet(z0, 2 * m)?;
        let stripped = CJet {
            c: dj.c[m..].to_vec(),
        };
        if stripped.c[0].norm() == 0.0 {
            return Err(SgError::PoleHit {
                location: format!("residue at z = {z0}: pole order exceeds {m}"),
                denom_abs: 0.0,
            });
        }
        let mut h = CJet {
            c: self.num.taylor_at(z0, len),
        }
        .div(&stripped)?;
        if let Some(w) = weight {
            let wt = CJet {
                c: w.c[..len.min(w.c.len())].to_vec(),
            };
            h = h.mul(&CJet {
                c: {
                    let mut c = wt.c;
                    c.resize(len, Complex64::default());
                    c
                },
            });
        }
        Ok(h.c[m - 1])
    }

    /// `i · Σ_{Im z0 > 0} Res`, the upper-half residue functional used by all
    /// boundary symbol computations. `weight_jet(z0, m)` supplies the jet of
    /// an entire weight factor at each pole.
    pub fn upper_residue_sum<W>(&self, weight_jet: W) -> SgResult<Complex64>
    where
        W: Fn(Complex64, usize) -> SgResult<Option<CJet>>,
    {
        let mut acc = Complex64::default();
        for (z0, m) in self.poles()? {
            if z0.im <= 0.0 {
                continue;
            }
            let w = weight_jet(z0, m)?;
            acc += self.residue_at(z0, m, w.as_ref())?;
        }
        Ok(Complex64::new(0.0, 1.0) * acc)
    }
}

/// Freeze an expression at `x` (full, with `x_n` already set) and `ξ'`,
/// reading `ξ_n` as the rational variable `z`.
pub fn extract_ratfn(e: &Expr, n: usize, x: &[f64], xi_prime: &[f64]) -> SgResult<RatFn> {
    if x.len() != n || xi_prime.len() != n - 1 {
        return Err(SgError::InvalidParameter(format!(
            "rational extraction: point dimensions ({}, {}) vs n = {n}",
            x.len(),
            xi_prime.len()
        )));
    }
    let mut xi = xi_prime.to_vec();
    xi.push(0.0);
    let pt = EvalPoint::new(x.to_vec(), xi);
    walk(e, n, &pt)
}

fn walk(e: &Expr, n: usize, pt: &EvalPoint) -> SgResult<RatFn> {
    match e {
        Expr::Const(c) => Ok(RatFn::constant(*c)),
        Expr::Var(Axis::Xi, i) if *i == n - 1 => Ok(RatFn::var_z()),
        Expr::Var(_, _) => Ok(RatFn::constant(e.eval(pt)?)),
        Expr::Add(ts) => {
            let mut acc = RatFn::constant(Complex64::default());
            for t in ts {
                acc = acc.add(&walk(t, n, pt)?)?;
            }
            Ok(acc)
        }
        Expr::Mul(fs) => {
            let mut acc = RatFn::constant(Complex64::new(1.0, 0.0));
            for f in fs {
                acc = acc.mul(&walk(f, n, pt)?)?;
            }
            Ok(acc)
        }
        Expr::Div(a, b) => div_by(walk(a, n, pt)?, b, n, pt),
        Expr::Pow(b, k) => walk(b, n, pt)?.powi(*k),
        Expr::Bracket { axis, dim, power } => {
            if *axis == Axis::X || *dim < n {
                // fully frozen: a number
                return Ok(RatFn::constant(e.eval(pt)?));
            }
            // ⟨ξ⟩^p covering z: rational only for even integer p
            let half = power / 2.0;
            if (half - half.round()).abs() > 1e-12 {
                return Err(SgError::NotRational(format!(
                    "weight ⟨ξ⟩^{power} is not an even integer power"
                )));
            }
            let mut sq = 1.0;
            for k in 0..n - 1 {
                sq += pt.xi[k] * pt.xi[k];
            }
            let base = CPoly::from_coeffs(vec![
                Complex64::new(sq, 0.0),
                Complex64::default(),
                Complex64::new(1.0, 0.0),
            ]);
            let k = half.round() as i32;
            RatFn::from_poly(base).powi(k)
        }
        Expr::Exp(arg) => {
            if arg.depends_on(Axis::Xi, n - 1) {
                Err(SgError::NotRational(
                    "exponential depends on the normal covariable".into(),
                ))
            } else {
                Ok(RatFn::constant(e.eval(pt)?))
            }
        }
    }
}

/// Divide `acc` by the expression `e`, peeling powers, products, and even
/// weight nodes so that repeated denominator factors keep their exact
/// multiplicities instead of arriving as one expanded polynomial. Expanded
/// multiple roots would otherwise be split by the root finder into clusters
/// of ill-conditioned simple poles.
fn div_by(acc: RatFn, e: &Expr, n: usize, pt: &EvalPoint) -> SgResult<RatFn> {
    match e {
        Expr::Pow(b, k) if *k > 0 => {
            let mut out = acc;
            for _ in 0..*k {
                out = div_by(out, b, n, pt)?;
            }
            Ok(out)
        }
        Expr::Mul(fs) => {
            let mut out = acc;
            for f in fs {
                out = div_by(out, f, n, pt)?;
            }
            Ok(out)
        }
        Expr::Bracket { axis, dim, power }
            if *axis == Axis::Xi && *dim >= n && *power >= 4.0 =>
        {
            let half = power / 2.0;
            if (half - half.round()).abs() > 1e-12 {
                return Err(SgError::NotRational(format!(
                    "weight ⟨ξ⟩^{power} is not an even integer power"
                )));
            }
            let quad = walk(
                &Expr::Bracket {
                    axis: Axis::Xi,
                    dim: *dim,
                    power: 2.0,
                },
                n,
                pt,
            )?;
            let mut out = acc;
            for _ in 0..half.round() as usize {
                out = out.div(&quad)?;
            }
            Ok(out)
        }
        _ => acc.div(&walk(e, n, pt)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// 1/(z² + b²) as a RatFn.
    fn model(b: f64) -> RatFn {
        RatFn {
            num: CPoly::constant(c(1.0, 0.0)),
            den: vec![(
                CPoly::from_coeffs(vec![c(b * b, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
                1,
            )],
        }
    }

    #[test]
    fn simple_pole_residue() {
        // Res_{z=ib} 1/(z²+b²) = 1/(2ib); upper sum i·that = 1/(2b)
        let b = 3.0;
        let v = model(b).upper_residue_sum(|_, _| Ok(None)).unwrap();
        assert!((v - c(1.0 / (2.0 * b), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn double_pole_residue_with_weight() {
        // f = 1/(z²+1)², weight e^{ixz}: classical ∫ e^{ixz}/(1+z²)² dz/(2π)
        // = (1+x)e^{−x}/4 for x > 0
        let f = RatFn {
            num: CPoly::constant(c(1.0, 0.0)),
            den: vec![(
                CPoly::from_coeffs(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]),
                2,
            )],
        };
        for &x in &[0.5, 1.0, 2.5] {
            let v = f
                .upper_residue_sum(|z0, m| {
                    let mut cjs = Vec::with_capacity(m);
                    let e0 = (Complex64::new(0.0, x) * z0).exp();
                    let mut fac = 1.0;
                    for t in 0..m {
                        if t > 0 {
                            fac *= t as f64;
                        }
                        cjs.push(e0 * Complex64::new(0.0, x).powu(t as u32) / fac);
                    }
                    Ok(Some(CJet { c: cjs }))
                })
                .unwrap();
            let want = (1.0 + x) * (-x).exp() / 4.0;
            assert!((v - c(want, 0.0)).norm() < 1e-12, "x = {x}: {v} vs {want}");
        }
    }

    #[test]
    fn extraction_of_model_symbol() {
        // 1/(1+|ξ|²) in n = 2 frozen at ξ' = 2 → 1/(z²+5)
        let e = Expr::div(Expr::ONE, Expr::bracket(Axis::Xi, 2, 2.0));
        let r = extract_ratfn(&e, 2, &[0.7, 0.0], &[2.0]).unwrap();
        assert_eq!(r.num.degree(), Some(0));
        assert_eq!(r.den_degree(), 2);
        let z = c(0.3, 0.4);
        let direct = c(1.0, 0.0) / (z * z + c(5.0, 0.0));
        assert!((r.eval(z).unwrap() - direct).norm() < 1e-14);
        let poles = r.poles().unwrap();
        assert_eq!(poles.len(), 2);
        assert!((poles[1].0 - c(0.0, 5.0f64.sqrt())).norm() < 1e-10);
    }

    #[test]
    fn sum_over_common_denominator() {
        // 1/(z²+1) + z/(z²+1) = (1+z)/(z²+1): one factor, numerator degree 1
        let base = CPoly::from_coeffs(vec![c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let a = RatFn {
            num: CPoly::constant(c(1.0, 0.0)),
            den: vec![(base.clone(), 1)],
        };
        let b = RatFn {
            num: CPoly::from_coeffs(vec![c(0.0, 0.0), c(1.0, 0.0)]),
            den: vec![(base, 1)],
        };
        let s = a.add(&b).unwrap();
        assert_eq!(s.den.len(), 1);
        assert_eq!(s.den[0].1, 1);
        assert_eq!(s.num.degree(), Some(1));
    }

    #[test]
    fn odd_weight_power_is_not_rational() {
        let e = Expr::bracket(Axis::Xi, 1, 1.0);
        assert!(matches!(
            extract_ratfn(&e, 1, &[0.0], &[]),
            Err(SgError::NotRational(_))
        ));
    }

    #[test]
    fn polynomial_division_keeps_factored_structure() {
        // (z²+4)⁻¹ · (z²+4) cancels only on evaluation, but poles/residues
        // of the product are benign (residue ≈ 0 at the spurious pole)
        let base = CPoly::from_coeffs(vec![c(4.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        let f = RatFn {
            num: base.clone(),
            den: vec![(base, 1)],
        };
        let v = f.upper_residue_sum(|_, _| Ok(None)).unwrap();
        assert!(v.norm() < 1e-12);
    }
}
