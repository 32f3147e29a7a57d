//! Symbolic polynomial extraction in the normal covariable `ξ_n`.
//!
//! A differential symbol is polynomial in `ξ`; regrouping it by powers of the
//! normal covariable `ξ_n` (the last one) is the first step of every boundary
//! construction. Coefficients stay symbolic (`Expr` in `(x, ξ')`).

use super::{Axis, Expr};
use crate::error::{SgError, SgResult};

/// Dense polynomial in `ξ_n` with symbolic coefficients, ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyInNormal {
    pub coeffs: Vec<Expr>,
}

impl PolyInNormal {
    pub fn zero() -> Self {
        PolyInNormal { coeffs: vec![] }
    }

    pub fn constant(e: Expr) -> Self {
        if e.is_zero() {
            Self::zero()
        } else {
            PolyInNormal { coeffs: vec![e] }
        }
    }

    pub fn degree(&self) -> Option<usize> {
        if self.coeffs.is_empty() {
            None
        } else {
            Some(self.coeffs.len() - 1)
        }
    }

    /// Coefficient of `ξ_n^k` (zero expression when absent).
    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(k).cloned().unwrap_or(Expr::ZERO)
    }

    fn trim(mut self) -> Self {
        while matches!(self.coeffs.last(), Some(c) if c.is_zero()) {
            self.coeffs.pop();
        }
        self
    }

    fn add(mut self, other: PolyInNormal) -> PolyInNormal {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), Expr::ZERO);
        }
        for (i, c) in other.coeffs.into_iter().enumerate() {
            self.coeffs[i] = Expr::add(vec![std::mem::replace(&mut self.coeffs[i], Expr::ZERO), c]);
        }
        self.trim()
    }

    fn mul(&self, other: &PolyInNormal) -> PolyInNormal {
        if self.coeffs.is_empty() || other.coeffs.is_empty() {
            return PolyInNormal::zero();
        }
        let mut out = vec![Vec::new(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                out[i + j].push(Expr::mul(vec![a.clone(), b.clone()]));
            }
        }
        PolyInNormal {
            coeffs: out.into_iter().map(Expr::add).collect(),
        }
        .trim()
    }

    fn pow(&self, k: usize) -> PolyInNormal {
        let mut acc = PolyInNormal::constant(Expr::ONE);
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }
}

impl Expr {
    /// Regroup `self` as a polynomial in `ξ_n` (the covariable with index
    /// `n-1`). Coefficients must not involve `ξ_n`; quotients with
    /// `ξ_n`-dependent denominators, odd weight powers over `ξ_n`, and `exp`
    /// of `ξ_n` are rejected with [`SgError::NotPolynomial`].
    pub fn poly_in_normal(&self, n: usize) -> SgResult<PolyInNormal> {
        assert!(n >= 1);
        let idx = n - 1;
        let not_poly = |reason: &str| SgError::NotPolynomial {
            var: format!("xi_{}", idx + 1),
            reason: reason.to_string(),
        };
        match self {
            Expr::Const(_) => Ok(PolyInNormal::constant(self.clone())),
            Expr::Var(Axis::Xi, i) if *i == idx => Ok(PolyInNormal {
                coeffs: vec![Expr::ZERO, Expr::ONE],
            }),
            Expr::Var(..) => Ok(PolyInNormal::constant(self.clone())),
            Expr::Add(ts) => {
                let mut acc = PolyInNormal::zero();
                for t in ts {
                    acc = acc.add(t.poly_in_normal(n)?);
                }
                Ok(acc)
            }
            Expr::Mul(fs) => {
                let mut acc = PolyInNormal::constant(Expr::ONE);
                for f in fs {
                    acc = acc.mul(&f.poly_in_normal(n)?);
                }
                Ok(acc)
            }
            Expr::Div(num, den) => {
                if den.depends_on(Axis::Xi, idx) {
                    return Err(not_poly("denominator depends on the normal covariable"));
                }
                let p = num.poly_in_normal(n)?;
                Ok(PolyInNormal {
                    coeffs: p
                        .coeffs
                        .into_iter()
                        .map(|c| Expr::div(c, (**den).clone()))
                        .collect(),
                }
                .trim())
            }
            Expr::Pow(b, k) => {
                if !b.depends_on(Axis::Xi, idx) {
                    return Ok(PolyInNormal::constant(self.clone()));
                }
                if *k < 0 {
                    return Err(not_poly("negative power of the normal covariable"));
                }
                Ok(b.poly_in_normal(n)?.pow(*k as usize))
            }
            Expr::Bracket { axis, dim, power } => {
                if *axis != Axis::Xi || idx >= *dim {
                    return Ok(PolyInNormal::constant(self.clone()));
                }
                // ⟨ξ⟩^p = (⟨ξ'⟩² + ξ_n²)^(p/2): polynomial iff p is a
                // non-negative even integer. The split isolates the LAST
                // covered component, so it is only valid when that component
                // is the extraction variable; reject malformed brackets that
                // cover indices beyond it.
                if idx + 1 != *dim {
                    return Err(not_poly(
                        "weight covering components beyond the extraction variable",
                    ));
                }
                if *power < 0.0 || power.fract() != 0.0 || (*power as i64) % 2 != 0 {
                    return Err(not_poly("weight with non-even power of the normal covariable"));
                }
                let q = (*power as usize) / 2;
                let reduced = Expr::Bracket {
                    axis: Axis::Xi,
                    dim: dim - 1,
                    power: 2.0,
                }
                .simplified();
                let base = PolyInNormal {
                    coeffs: vec![reduced, Expr::ZERO, Expr::ONE],
                };
                Ok(base.pow(q))
            }
            Expr::Exp(b) => {
                if b.depends_on(Axis::Xi, idx) {
                    Err(not_poly("exponential of the normal covariable"))
                } else {
                    Ok(PolyInNormal::constant(self.clone()))
                }
            }
        }
    }

    /// Polynomial extraction in an arbitrary covariable (used for 1-D symbol
    /// work where the normal variable is the only one). `index` is 0-based.
    pub fn poly_in_xi(&self, index: usize) -> SgResult<PolyInNormal> {
        // reuse the normal-variable logic by construction: poly_in_normal
        // targets index n-1, so pass n = index+1. Brackets covering higher
        // indices are impossible then, matching full-dimension usage.
        self.poly_in_normal(index + 1)
    }
}

/// Build `Σ_k coeffs[k]·ξ_n^k` back into an expression (used by tests and by
/// symbol reconstruction).
pub fn poly_to_expr(p: &PolyInNormal, n: usize) -> Expr {
    let xi_n = Expr::Var(Axis::Xi, n - 1);
    Expr::add(
        p.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| Expr::mul(vec![c.clone(), Expr::pow(xi_n.clone(), k as i32)]))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::EvalPoint;

    #[test]
    fn laplace_symbol_extraction() {
        // 1 + ξ₁² + ξ₂² as polynomial in ξ₂: [1 + ξ₁², 0, 1]
        let a = Expr::bracket(Axis::Xi, 2, 2.0);
        let p = a.poly_in_normal(2).unwrap();
        assert_eq!(p.coeffs.len(), 3);
        assert_eq!(p.coeff(1), Expr::ZERO);
        assert_eq!(p.coeff(2), Expr::ONE);
        let c0 = p.coeff(0);
        let pt = EvalPoint::new(vec![0.0, 0.0], vec![3.0, 99.0]);
        assert!((c0.eval(&pt).unwrap().re - 10.0).abs() < 1e-14);
    }

    #[test]
    fn weighted_symbol_extraction() {
        // ⟨x⟩²(1+ξ²) in n=1: coefficients [⟨x⟩², ⟨x⟩²·0, ⟨x⟩²]
        let a = Expr::mul(vec![
            Expr::bracket(Axis::X, 1, 2.0),
            Expr::bracket(Axis::Xi, 1, 2.0),
        ]);
        let p = a.poly_in_normal(1).unwrap();
        assert_eq!(p.degree(), Some(2));
        assert_eq!(p.coeff(0), Expr::bracket(Axis::X, 1, 2.0));
        assert_eq!(p.coeff(2), Expr::bracket(Axis::X, 1, 2.0));
    }

    #[test]
    fn rejects_non_polynomial() {
        let e = Expr::div(Expr::ONE, Expr::bracket(Axis::Xi, 1, 2.0));
        assert!(matches!(
            e.poly_in_normal(1),
            Err(SgError::NotPolynomial { .. })
        ));
        let odd = Expr::bracket(Axis::Xi, 1, 3.0);
        assert!(odd.poly_in_normal(1).is_err());
    }

    #[test]
    fn reconstruction_matches() {
        let a = Expr::add(vec![
            Expr::mul(vec![Expr::var_x(0), Expr::pow(Expr::var_xi(0), 3)]),
            Expr::bracket(Axis::Xi, 1, 2.0),
        ]);
        let p = a.poly_in_normal(1).unwrap();
        let b = poly_to_expr(&p, 1);
        for &(xv, xiv) in &[(0.5, 2.0), (-1.0, -3.0)] {
            let pt = EvalPoint::new(vec![xv], vec![xiv]);
            let va = a.eval(&pt).unwrap();
            let vb = b.eval(&pt).unwrap();
            assert!((va - vb).norm() < 1e-13);
        }
    }
}
