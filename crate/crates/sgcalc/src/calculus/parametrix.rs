//! Parametrix expansion for SG-elliptic differential symbols.
//!
//! For an elliptic symbol `a` the left parametrix `b ~ Σ b_l` satisfies
//! `b # a ~ 1` modulo smoothing. Matching orders in the composition
//! expansion gives the recursion
//!
//! ```text
//! b_0 = 1/a,
//! b_l = -(1/a) Σ_{j+|α|=l, j<l} (1/α!) ∂_ξ^α b_j · (-i)^{|α|} ∂_x^α a.
//! ```
//!
//! Every term is excised by the radial cutoff `χ_B`: the stored rational
//! expressions may have poles where `a` vanishes, but those sit in a compact
//! set for elliptic `a`, and evaluation inside the excision ball
//! short-circuits to zero. Term `l` has SG order `(-m1-l, -m2-l)`.

use super::compose::check_count;
use super::{multi_indices_of_degree, DiffSymbol, FormalSum, FsTerm, GevreyIndices, EXPANSION_CAP};
use crate::error::{SgError, SgResult};
use crate::expr::{multi_factorial, Expr};
use num_complex::Complex64;

/// Truncated left parametrix of `a` with `count` terms and excision radius
/// `b_radius`.
pub fn parametrix(a: &DiffSymbol, count: usize, b_radius: f64) -> SgResult<FormalSum> {
    check_count(count)?;
    if !(b_radius > 0.0) || !b_radius.is_finite() {
        return Err(SgError::InvalidParameter(format!(
            "excision radius must be positive and finite, got {b_radius}"
        )));
    }
    let n = a.n;
    let sa = a.symbol_expr();
    if sa.is_zero() {
        return Err(SgError::InvalidParameter(
            "cannot invert the zero symbol".into(),
        ));
    }
    let indices = GevreyIndices::new(1.0, a.nu)?;
    let mut out = FormalSum::new(n, -a.order, indices, b_radius);
    let b0 = Expr::div(Expr::ONE, sa.clone());
    let mut bs: Vec<Expr> = vec![b0.clone()];
    let zeros = vec![0usize; n];
    for l in 1..count {
        let mut parts: Vec<Expr> = Vec::new();
        for (j, bj) in bs.iter().enumerate().take(l) {
            let d = l - j;
            for alpha in multi_indices_of_degree(n, d) {
                let da = sa.diff_multi(&zeros, &alpha, EXPANSION_CAP)?;
                if da.is_zero() {
                    continue;
                }
                let db = bj.diff_multi(&alpha, &zeros, EXPANSION_CAP)?;
                if db.is_zero() {
                    continue;
                }
                let c = Complex64::new(0.0, -1.0).powu(d as u32) / multi_factorial(&alpha);
                parts.push(Expr::mul(vec![Expr::complex(c.re, c.im), db, da]));
            }
        }
        let bl = Expr::mul(vec![
            Expr::real(-1.0),
            b0.clone(),
            Expr::add(parts),
        ]);
        bs.push(bl);
    }
    for b in bs {
        out.push(FsTerm::excised(b));
    }
    Ok(out)
}
