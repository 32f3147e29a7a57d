//! Symbolic composition and formal adjoint of truncated asymptotic sums.
//!
//! For left/right quantised symbols the composition expansion is
//!
//! ```text
//! (a # b)_l = Σ_{j+k+|α|=l} (1/α!) ∂_ξ^α a_j · D_x^α b_k,   D = -i ∂,
//! ```
//!
//! and the adjoint expansion is
//!
//! ```text
//! (a*)_l = Σ_{j+|α|=l} (1/α!) ∂_ξ^α D_x^α conj(a_j).
//! ```
//!
//! Terms of the inputs beyond their stored truncation are treated as zero.
//! Both operations act on the stored rational parts; cutoff flags must be
//! uniform per input and combine by OR (the results are exact wherever the
//! excision cutoff is identically 1).

use super::{multi_indices_of_degree, EXPANSION_CAP};
use super::{FormalSum, FsTerm};
use crate::error::{SgError, SgResult};
use crate::expr::{multi_factorial, Expr};
use num_complex::Complex64;

fn uniform_flag(s: &FormalSum, side: &str) -> SgResult<bool> {
    s.uniform_flag().ok_or_else(|| {
        SgError::Unsupported(format!(
            "{side} operand mixes excised and plain terms; composition requires a uniform flag"
        ))
    })
}

pub(super) fn check_count(count: usize) -> SgResult<()> {
    if count == 0 {
        return Err(SgError::InvalidParameter(
            "expansion length must be at least 1".into(),
        ));
    }
    if count > EXPANSION_CAP {
        return Err(SgError::TruncationCap {
            requested: count,
            cap: EXPANSION_CAP,
        });
    }
    Ok(())
}

/// Truncated composition `a # b` with `count` terms.
pub fn compose(a: &FormalSum, b: &FormalSum, count: usize) -> SgResult<FormalSum> {
    check_count(count)?;
    if a.n != b.n {
        return Err(SgError::InvalidParameter(format!(
            "dimension mismatch in composition: {} vs {}",
            a.n, b.n
        )));
    }
    let fa = uniform_flag(a, "left")?;
    let fb = uniform_flag(b, "right")?;
    let flag = fa || fb;
    let constants_b = if flag {
        let ba = if fa { a.constants_b } else { 0.0 };
        let bb = if fb { b.constants_b } else { 0.0 };
        let m = ba.max(bb);
        if !(m > 0.0) {
            return Err(SgError::InvalidParameter(
                "excised operand with non-positive excision radius".into(),
            ));
        }
        m
    } else {
        0.0
    };
    let n = a.n;
    let indices = a.indices.join(b.indices)?;
    let mut out = FormalSum::new(n, a.base_order + b.base_order, indices, constants_b);
    let zeros = vec![0usize; n];
    for l in 0..count {
        let mut parts: Vec<Expr> = Vec::new();
        for j in 0..a.len().min(l + 1) {
            let aj = &a.terms()[j].expr;
            for k in 0..b.len().min(l - j + 1) {
                let d = l - j - k;
                let bk = &b.terms()[k].expr;
                for alpha in multi_indices_of_degree(n, d) {
                    let da = aj.diff_multi(&alpha, &zeros, EXPANSION_CAP)?;
                    if da.is_zero() {
                        continue;
                    }
                    let db = bk.diff_multi(&zeros, &alpha, EXPANSION_CAP)?;
                    if db.is_zero() {
                        continue;
                    }
                    let c = Complex64::new(0.0, -1.0).powu(d as u32) / multi_factorial(&alpha);
                    parts.push(Expr::mul(vec![Expr::complex(c.re, c.im), da, db]));
                }
            }
        }
        out.push(FsTerm {
            expr: Expr::add(parts),
            cutoff: flag,
        });
    }
    Ok(out)
}

/// Truncated formal adjoint `a*` with `count` terms.
pub fn adjoint(a: &FormalSum, count: usize) -> SgResult<FormalSum> {
    check_count(count)?;
    let flag = uniform_flag(a, "the")?;
    let n = a.n;
    let mut out = FormalSum::new(n, a.base_order, a.indices, a.constants_b);
    for l in 0..count {
        let mut parts: Vec<Expr> = Vec::new();
        for j in 0..a.len().min(l + 1) {
            let d = l - j;
            let cj = a.terms()[j].expr.conj();
            for alpha in multi_indices_of_degree(n, d) {
                // |α| derivatives on each axis: the per-axis order is capped
                // by the expansion length, the diff guard sees the sum
                let da = cj.diff_multi(&alpha, &alpha, 2 * EXPANSION_CAP)?;
                if da.is_zero() {
                    continue;
                }
                let c = Complex64::new(0.0, -1.0).powu(d as u32) / multi_factorial(&alpha);
                parts.push(Expr::mul(vec![Expr::complex(c.re, c.im), da]));
            }
        }
        out.push(FsTerm {
            expr: Expr::add(parts),
            cutoff: flag,
        });
    }
    Ok(out)
}
