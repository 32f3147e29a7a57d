//! Symbolic differentiation, closed on the expression tree.

use super::{simplify, Axis, Expr};
use crate::error::{SgError, SgResult};

/// Default cap on total derivative order |α|+|β| for sweep operations.
pub const DEFAULT_DERIV_CAP: usize = 6;

impl Expr {
    /// Partial derivative `∂/∂v` where `v` is variable `index` on `axis`.
    /// The result is simplified.
    pub fn diff(&self, axis: Axis, index: usize) -> Expr {
        simplify(diff_raw(self, axis, index))
    }

    /// Mixed derivative `∂_x^β ∂_ξ^α`, one variable at a time, outermost last.
    /// Errors with [`SgError::TruncationCap`] when `|α|+|β| > cap`.
    pub fn diff_multi(&self, alpha: &[usize], beta: &[usize], cap: usize) -> SgResult<Expr> {
        let total: usize = alpha.iter().sum::<usize>() + beta.iter().sum::<usize>();
        if total > cap {
            return Err(SgError::TruncationCap {
                requested: total,
                cap,
            });
        }
        let mut e = self.clone();
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                e = e.diff(Axis::Xi, i);
            }
        }
        for (i, &k) in beta.iter().enumerate() {
            for _ in 0..k {
                e = e.diff(Axis::X, i);
            }
        }
        Ok(e)
    }

    /// `D^α = (-i ∂)^α` on the given axis variable, the convention used by
    /// operator compositions.
    pub fn d_op(&self, axis: Axis, index: usize) -> Expr {
        Expr::mul(vec![Expr::imag(-1.0), self.diff(axis, index)])
    }
}

fn diff_raw(e: &Expr, axis: Axis, index: usize) -> Expr {
    match e {
        Expr::Const(_) => Expr::ZERO,
        Expr::Var(a, i) => {
            if *a == axis && *i == index {
                Expr::ONE
            } else {
                Expr::ZERO
            }
        }
        Expr::Add(terms) => Expr::Add(terms.iter().map(|t| diff_raw(t, axis, index)).collect()),
        Expr::Mul(factors) => {
            let mut terms = Vec::with_capacity(factors.len());
            for (i, f) in factors.iter().enumerate() {
                if !f.depends_on(axis, index) {
                    continue;
                }
                let mut prod: Vec<Expr> = Vec::with_capacity(factors.len());
                for (j, g) in factors.iter().enumerate() {
                    if i == j {
                        prod.push(diff_raw(g, axis, index));
                    } else {
                        prod.push(g.clone());
                    }
                }
                terms.push(Expr::Mul(prod));
            }
            Expr::Add(terms)
        }
        Expr::Div(n, d) => {
            // d(u / b^k) = (u' b - k u b') / b^{k+1}; keeps denominators as
            // powers of the original base so repeated differentiation of
            // parametrix terms grows linearly, not exponentially.
            let (base, k) = match &**d {
                Expr::Pow(b, k) => ((**b).clone(), *k),
                other => (other.clone(), 1),
            };
            let du = diff_raw(n, axis, index);
            let db = diff_raw(&base, axis, index);
            let num = Expr::Add(vec![
                Expr::Mul(vec![du, base.clone()]),
                Expr::Mul(vec![
                    Expr::real(-(k as f64)),
                    (**n).clone(),
                    db,
                ]),
            ]);
            Expr::Div(Box::new(num), Box::new(Expr::Pow(Box::new(base), k + 1)))
        }
        Expr::Pow(b, k) => {
            if !b.depends_on(axis, index) {
                return Expr::ZERO;
            }
            Expr::Mul(vec![
                Expr::real(*k as f64),
                Expr::Pow(b.clone(), *k - 1),
                diff_raw(b, axis, index),
            ])
        }
        Expr::Bracket { axis: a, dim, power } => {
            if *a != axis || index >= *dim {
                return Expr::ZERO;
            }
            // ∂_{v_i} ⟨v⟩^p = p · v_i · ⟨v⟩^{p-2}
            Expr::Mul(vec![
                Expr::real(*power),
                Expr::Var(axis, index),
                Expr::Bracket {
                    axis: *a,
                    dim: *dim,
                    power: *power - 2.0,
                },
            ])
        }
        Expr::Exp(b) => Expr::Mul(vec![e.clone(), diff_raw(b, axis, index)]),
    }
}

/// Iterate all multi-indices of length `n` with total degree ≤ `cap`,
/// in graded lexicographic order. Deterministic.
pub fn multi_index_iter(n: usize, cap: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        // zero variables: only the empty multi-index, once
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for total in 0..=cap {
        let mut idx = vec![0usize; n];
        fill(&mut out, &mut idx, 0, total);
    }
    fn fill(out: &mut Vec<Vec<usize>>, idx: &mut Vec<usize>, pos: usize, remaining: usize) {
        if pos + 1 == idx.len() {
            idx[pos] = remaining;
            out.push(idx.clone());
            return;
        }
        for k in (0..=remaining).rev() {
            idx[pos] = k;
            fill(out, idx, pos + 1, remaining - k);
        }
    }
    out
}

/// α! for a multi-index.
pub fn multi_factorial(alpha: &[usize]) -> f64 {
    alpha.iter().map(|&k| factorial(k)).product()
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::EvalPoint;
    use num_complex::Complex64;

    fn x() -> Expr {
        Expr::var_x(0)
    }
    fn xi() -> Expr {
        Expr::var_xi(0)
    }

    #[test]
    fn derivative_of_weight() {
        // ∂_x ⟨x⟩² = 2x  (n = 1)
        let e = Expr::bracket(Axis::X, 1, 2.0);
        let d = e.diff(Axis::X, 0);
        assert_eq!(d, Expr::mul(vec![Expr::real(2.0), x()]));
    }

    #[test]
    fn quotient_rule_keeps_power_denominator() {
        // ∂_ξ (1/(1+ξ²)) = -2ξ/(1+ξ²)²
        let a = Expr::add(vec![Expr::ONE, Expr::pow(xi(), 2)]);
        let e = Expr::div(Expr::ONE, a.clone());
        let d = e.diff(Axis::Xi, 0);
        let expect = Expr::div(
            Expr::mul(vec![Expr::real(-2.0), xi()]),
            Expr::pow(a, 2),
        );
        assert_eq!(d, expect);
    }

    #[test]
    fn second_derivative_of_x_squared_expansion() {
        // Oracle for the product rule chain: ∂²(x²·u) with u = ⟨x⟩²
        // = 2u + 4x·u' ... checked numerically against a direct expansion
        // d²/dx²( x²(1+x²) ) = d²/dx²( x² + x⁴ ) = 2 + 12 x².
        let e = Expr::mul(vec![Expr::pow(x(), 2), Expr::bracket(Axis::X, 1, 2.0)]);
        let d2 = e.diff(Axis::X, 0).diff(Axis::X, 0);
        for &xv in &[0.0, 0.5, -1.25, 3.0] {
            let p = EvalPoint::new(vec![xv], vec![0.0]);
            let got = d2.eval(&p).unwrap();
            let want = Complex64::new(2.0 + 12.0 * xv * xv, 0.0);
            assert!((got - want).norm() < 1e-12, "x={xv}: {got} vs {want}");
        }
    }

    #[test]
    fn mixed_partials_commute_structurally() {
        let e = Expr::div(
            Expr::mul(vec![x(), xi()]),
            Expr::add(vec![Expr::ONE, Expr::pow(xi(), 2), Expr::pow(x(), 2)]),
        );
        let d1 = e.diff(Axis::X, 0).diff(Axis::Xi, 0);
        let d2 = e.diff(Axis::Xi, 0).diff(Axis::X, 0);
        // structural equality can differ; compare numerically
        for &(xv, xiv) in &[(0.3, -0.7), (2.0, 1.5), (-4.0, 0.25)] {
            let p = EvalPoint::new(vec![xv], vec![xiv]);
            let a = d1.eval(&p).unwrap();
            let b = d2.eval(&p).unwrap();
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn deriv_cap_enforced() {
        let e = Expr::pow(x(), 8);
        let err = e.diff_multi(&[3], &[4], DEFAULT_DERIV_CAP).unwrap_err();
        assert!(matches!(err, SgError::TruncationCap { requested: 7, cap: 6 }));
    }

    #[test]
    fn multi_indices_graded() {
        let idx = multi_index_iter(2, 2);
        assert_eq!(idx.len(), 6); // (0,0),(1,0),(0,1),(2,0),(1,1),(0,2)
        assert_eq!(idx[0], vec![0, 0]);
        assert!(idx.contains(&vec![1, 1]));
        assert_eq!(multi_index_iter(0, 3), vec![Vec::<usize>::new()]);
    }
}
