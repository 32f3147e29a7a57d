//! Numerical evaluation of expressions, with complex continuation in the
//! single normal covariable `ξ_n` for contour work.

use super::{Axis, Expr};
use crate::error::{SgError, SgResult};
use num_complex::Complex64;

/// Absolute tolerance below which a quotient denominator counts as a pole.
pub const POLE_TOL: f64 = 1e-14;

/// An evaluation point `(x, ξ)`. All coordinates are real except that the
/// *last* covariable `ξ_n` may be overridden with a complex value (contour
/// integration in the normal direction). Complex values anywhere else are
/// rejected by construction: there is no way to supply them.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
    /// When set, replaces `xi[xi.len()-1]`.
    pub xi_n: Option<Complex64>,
}

impl EvalPoint {
    pub fn new(x: Vec<f64>, xi: Vec<f64>) -> Self {
        EvalPoint { x, xi, xi_n: None }
    }

    /// Point with a complex normal covariable; `xi` supplies the tangential
    /// components and a placeholder last entry (ignored).
    pub fn with_complex_normal(x: Vec<f64>, xi: Vec<f64>, z: Complex64) -> Self {
        assert!(!xi.is_empty(), "complex normal requires at least one covariable");
        EvalPoint { x, xi, xi_n: Some(z) }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    fn xi_value(&self, i: usize) -> Complex64 {
        if let Some(z) = self.xi_n {
            if i + 1 == self.xi.len() {
                return z;
            }
        }
        Complex64::new(self.xi[i], 0.0)
    }

    /// Euclidean norm of the concatenated (x, ξ) vector; with a complex ξ_n
    /// its modulus enters. Used by radial cutoffs.
    pub fn radius(&self) -> f64 {
        let mut s: f64 = self.x.iter().map(|v| v * v).sum();
        for i in 0..self.xi.len() {
            s += self.xi_value(i).norm_sqr();
        }
        s.sqrt()
    }

    pub fn bracket_x(&self) -> f64 {
        let s: f64 = self.x.iter().map(|v| v * v).sum();
        (1.0 + s).sqrt()
    }

    pub fn bracket_xi(&self) -> f64 {
        let s: f64 = self.xi.iter().map(|v| v * v).sum();
        (1.0 + s).sqrt()
    }
}

impl Expr {
    /// Evaluate at a point. Returns [`SgError::PoleHit`] when a denominator
    /// falls below [`POLE_TOL`] in absolute value.
    pub fn eval(&self, p: &EvalPoint) -> SgResult<Complex64> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(Axis::X, i) => {
                let v = *p.x.get(*i).ok_or_else(|| SgError::InvalidParameter(format!(
                    "variable x_{} out of range for dimension {}",
                    i + 1,
                    p.x.len()
                )))?;
                Ok(Complex64::new(v, 0.0))
            }
            Expr::Var(Axis::Xi, i) => {
                if *i >= p.xi.len() {
                    return Err(SgError::InvalidParameter(format!(
                        "variable xi_{} out of range for dimension {}",
                        i + 1,
                        p.xi.len()
                    )));
                }
                Ok(p.xi_value(*i))
            }
            Expr::Add(ts) => {
                let mut s = Complex64::new(0.0, 0.0);
                for t in ts {
                    s += t.eval(p)?;
                }
                Ok(s)
            }
            Expr::Mul(fs) => {
                let mut s = Complex64::new(1.0, 0.0);
                for f in fs {
                    s *= f.eval(p)?;
                    if s == Complex64::new(0.0, 0.0) {
                        // keep evaluating for error detection? No: zero is
                        // absorbing and remaining factors are finite or raise
                        // their own pole on direct evaluation elsewhere.
                        break;
                    }
                }
                Ok(s)
            }
            Expr::Div(n, d) => {
                let dv = d.eval(p)?;
                if dv.norm() < POLE_TOL {
                    return Err(SgError::PoleHit {
                        location: describe_point(p),
                        denom_abs: dv.norm(),
                    });
                }
                Ok(n.eval(p)? / dv)
            }
            Expr::Pow(b, k) => {
                let bv = b.eval(p)?;
                if *k < 0 && bv.norm() < POLE_TOL {
                    return Err(SgError::PoleHit {
                        location: describe_point(p),
                        denom_abs: bv.norm(),
                    });
                }
                Ok(bv.powi(*k))
            }
            Expr::Bracket { axis, dim, power } => {
                let mut s = Complex64::new(1.0, 0.0);
                match axis {
                    Axis::X => {
                        for i in 0..*dim {
                            let v = p.x.get(i).copied().ok_or_else(|| {
                                SgError::InvalidParameter(format!(
                                    "bracket over {dim} x-components exceeds dimension {}",
                                    p.x.len()
                                ))
                            })?;
                            s += v * v;
                        }
                    }
                    Axis::Xi => {
                        if *dim > p.xi.len() {
                            return Err(SgError::InvalidParameter(format!(
                                "bracket over {dim} xi-components exceeds dimension {}",
                                p.xi.len()
                            )));
                        }
                        for i in 0..*dim {
                            let z = p.xi_value(i);
                            s += z * z;
                        }
                    }
                }
                // principal branch of s^(p/2); for real points s ≥ 1 > 0 and
                // this is the ordinary real power.
                if s.im == 0.0 && s.re > 0.0 {
                    Ok(Complex64::new(s.re.powf(power * 0.5), 0.0))
                } else {
                    Ok(s.powf(power * 0.5))
                }
            }
            Expr::Exp(b) => Ok(b.eval(p)?.exp()),
        }
    }

    /// Evaluate expecting a real result (imaginary part below `tol`).
    pub fn eval_real(&self, p: &EvalPoint, tol: f64) -> SgResult<f64> {
        let v = self.eval(p)?;
        if v.im.abs() > tol * (1.0 + v.re.abs()) {
            return Err(SgError::InvalidParameter(format!(
                "expected real value, got {v}"
            )));
        }
        Ok(v.re)
    }
}

fn describe_point(p: &EvalPoint) -> String {
    let xi_desc: Vec<String> = (0..p.xi.len())
        .map(|i| {
            let z = if let Some(zn) = p.xi_n {
                if i + 1 == p.xi.len() {
                    return format!("{}+{}i", zn.re, zn.im);
                } else {
                    Complex64::new(p.xi[i], 0.0)
                }
            } else {
                Complex64::new(p.xi[i], 0.0)
            };
            format!("{}", z.re)
        })
        .collect();
    format!("x={:?}, xi=[{}]", p.x, xi_desc.join(", "))
}
