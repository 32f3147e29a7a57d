//! Expression kernel: a small symbolic tree closed under the operations the
//! SG calculus needs.
//!
//! Nodes: complex constants, variables `x_i` / `ξ_i`, sums, products,
//! quotients, integer powers, the weights `⟨x⟩` / `⟨ξ⟩` (with real powers),
//! and `exp` for closed-form data functions.
//!
//! The weight `⟨·⟩^p` carries the number of leading components it covers, so
//! `⟨ξ'⟩` (all tangential covariables) and `⟨ξ⟩` (all of them) are both plain
//! nodes and restriction to the boundary `x_n = 0` stays inside the tree.
//! Differentiation is closed: `∂_{x_i}⟨x⟩^p = p·x_i·⟨x⟩^{p-2}`.
//!
//! Trees are kept in a canonical simplified form: flattened sums/products,
//! folded constants, like terms combined, factors sorted under a fixed total
//! order, quotients with power denominators normalised. Structural equality
//! of two simplified trees is plain `==`.

mod diff;
mod eval;
mod parse;
mod poly;
mod seminorm;

pub use diff::{factorial, multi_factorial, multi_index_iter, DEFAULT_DERIV_CAP};
pub use eval::EvalPoint;
pub use parse::{parse, print};
pub use poly::{poly_to_expr, PolyInNormal};
pub use seminorm::{
    sg_seminorm_estimate, unit_directions, SeminormEntry, SeminormGrid, SeminormReport,
};

use num_complex::Complex64;
use std::cmp::Ordering;
use std::fmt;

/// Which block of variables a node refers to: base variables `x` or
/// covariables `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub enum Axis {
    X,
    Xi,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Xi => "xi",
        }
    }
}

/// Symbolic expression tree. See the module docs for the node inventory.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    /// Variable with 0-based index on the given axis.
    Var(Axis, usize),
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power of an arbitrary subtree.
    Pow(Box<Expr>, i32),
    /// `⟨v⟩^power` where `v` runs over the first `dim` components of `axis`.
    /// `dim == 0` is the empty weight, identically 1.
    Bracket { axis: Axis, dim: usize, power: f64 },
    /// Exponential, used by closed-form data functions (not by symbols).
    Exp(Box<Expr>),
}

impl Expr {
    pub const ZERO: Expr = Expr::Const(Complex64::new(0.0, 0.0));
    pub const ONE: Expr = Expr::Const(Complex64::new(1.0, 0.0));

    pub fn real(v: f64) -> Expr {
        Expr::Const(Complex64::new(v, 0.0))
    }

    pub fn imag(v: f64) -> Expr {
        Expr::Const(Complex64::new(0.0, v))
    }

    pub fn complex(re: f64, im: f64) -> Expr {
        Expr::Const(Complex64::new(re, im))
    }

    pub fn var_x(i: usize) -> Expr {
        Expr::Var(Axis::X, i)
    }

    pub fn var_xi(i: usize) -> Expr {
        Expr::Var(Axis::Xi, i)
    }

    /// `⟨·⟩^power` over the first `dim` components of `axis`.
    pub fn bracket(axis: Axis, dim: usize, power: f64) -> Expr {
        Expr::Bracket { axis, dim, power }
    }

    pub fn add(terms: Vec<Expr>) -> Expr {
        simplify(Expr::Add(terms))
    }

    pub fn mul(factors: Vec<Expr>) -> Expr {
        simplify(Expr::Mul(factors))
    }

    pub fn div(num: Expr, den: Expr) -> Expr {
        simplify(Expr::Div(Box::new(num), Box::new(den)))
    }

    pub fn pow(base: Expr, k: i32) -> Expr {
        simplify(Expr::Pow(Box::new(base), k))
    }

    pub fn exp(arg: Expr) -> Expr {
        simplify(Expr::Exp(Box::new(arg)))
    }

    pub fn neg(self) -> Expr {
        Expr::mul(vec![Expr::real(-1.0), self])
    }

    pub fn sub(self, rhs: Expr) -> Expr {
        Expr::add(vec![self, rhs.neg()])
    }

    /// Simplified (canonical) copy of `self`.
    pub fn simplified(self) -> Expr {
        simplify(self)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.re == 0.0 && c.im == 0.0)
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.re == 1.0 && c.im == 0.0)
    }

    pub fn as_const(&self) -> Option<Complex64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    /// Node count, used as a size diagnostic in tests and reports.
    pub fn node_count(&self) -> usize {
        1 + match self {
            Expr::Add(v) | Expr::Mul(v) => v.iter().map(Expr::node_count).sum(),
            Expr::Div(a, b) => a.node_count() + b.node_count(),
            Expr::Pow(b, _) => b.node_count(),
            Expr::Exp(b) => b.node_count(),
            _ => 0,
        }
    }

    /// Structural complex conjugate: conjugates constants only. For real
    /// evaluation points this represents the conjugate function.
    pub fn conj(&self) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(c.conj()),
            Expr::Var(..) | Expr::Bracket { .. } => self.clone(),
            Expr::Add(v) => Expr::Add(v.iter().map(Expr::conj).collect()),
            Expr::Mul(v) => Expr::Mul(v.iter().map(Expr::conj).collect()),
            Expr::Div(a, b) => Expr::Div(Box::new(a.conj()), Box::new(b.conj())),
            Expr::Pow(b, k) => Expr::Pow(Box::new(b.conj()), *k),
            Expr::Exp(b) => Expr::Exp(Box::new(b.conj())),
        }
    }

    /// True if any node mentions the given variable.
    pub fn depends_on(&self, axis: Axis, index: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(a, i) => *a == axis && *i == index,
            Expr::Add(v) | Expr::Mul(v) => v.iter().any(|e| e.depends_on(axis, index)),
            Expr::Div(a, b) => a.depends_on(axis, index) || b.depends_on(axis, index),
            Expr::Pow(b, _) | Expr::Exp(b) => b.depends_on(axis, index),
            Expr::Bracket { axis: a, dim, .. } => *a == axis && index < *dim,
        }
    }

    /// Restriction to `v_{n-1} = 0` where `v_{n-1}` is the *last* variable of
    /// `axis` in an `n`-dimensional context. Weights over all `n` components
    /// collapse to weights over the first `n-1`:
    /// `⟨x⟩^p |_{x_n=0} = ⟨x'⟩^p`.
    pub fn restrict_last_zero(&self, axis: Axis, n: usize) -> Expr {
        assert!(n >= 1, "restriction needs at least one variable");
        let idx = n - 1;
        fn walk(e: &Expr, axis: Axis, idx: usize) -> Expr {
            match e {
                Expr::Const(_) => e.clone(),
                Expr::Var(a, i) => {
                    if *a == axis && *i == idx {
                        Expr::ZERO
                    } else {
                        e.clone()
                    }
                }
                Expr::Add(v) => Expr::Add(v.iter().map(|t| walk(t, axis, idx)).collect()),
                Expr::Mul(v) => Expr::Mul(v.iter().map(|t| walk(t, axis, idx)).collect()),
                Expr::Div(a, b) => Expr::Div(
                    Box::new(walk(a, axis, idx)),
                    Box::new(walk(b, axis, idx)),
                ),
                Expr::Pow(b, k) => Expr::Pow(Box::new(walk(b, axis, idx)), *k),
                Expr::Exp(b) => Expr::Exp(Box::new(walk(b, axis, idx))),
                Expr::Bracket { axis: a, dim, power } => {
                    if *a == axis && *dim > idx {
                        // the restricted variable is covered: drop it
                        Expr::Bracket {
                            axis: *a,
                            dim: idx,
                            power: *power,
                        }
                    } else {
                        e.clone()
                    }
                }
            }
        }
        simplify(walk(self, axis, idx))
    }

    /// Substitute an expression for the variable `axis[index]`. Fails when
    /// the variable is covered by a weight node (⟨·⟩ of a shifted argument is
    /// not representable) unless the weight does not actually cover it.
    pub fn subst(&self, axis: Axis, index: usize, rep: &Expr) -> crate::error::SgResult<Expr> {
        use crate::error::SgError;
        fn walk(e: &Expr, axis: Axis, idx: usize, rep: &Expr) -> crate::error::SgResult<Expr> {
            Ok(match e {
                Expr::Const(_) => e.clone(),
                Expr::Var(a, i) => {
                    if *a == axis && *i == idx {
                        rep.clone()
                    } else {
                        e.clone()
                    }
                }
                Expr::Add(v) => Expr::Add(
                    v.iter()
                        .map(|t| walk(t, axis, idx, rep))
                        .collect::<crate::error::SgResult<_>>()?,
                ),
                Expr::Mul(v) => Expr::Mul(
                    v.iter()
                        .map(|t| walk(t, axis, idx, rep))
                        .collect::<crate::error::SgResult<_>>()?,
                ),
                Expr::Div(a, b) => Expr::Div(
                    Box::new(walk(a, axis, idx, rep)?),
                    Box::new(walk(b, axis, idx, rep)?),
                ),
                Expr::Pow(b, k) => Expr::Pow(Box::new(walk(b, axis, idx, rep)?), *k),
                Expr::Exp(b) => Expr::Exp(Box::new(walk(b, axis, idx, rep)?)),
                Expr::Bracket { axis: a, dim, .. } => {
                    if *a == axis && idx < *dim {
                        return Err(SgError::Unsupported(format!(
                            "substitution into a weight node covering {}_{}",
                            axis.name(),
                            idx + 1
                        )));
                    }
                    e.clone()
                }
            })
        }
        Ok(simplify(walk(self, axis, index, rep)?))
    }
}

/// Total order on expressions used for canonical sorting. The exact order is
/// arbitrary but fixed; it only needs to be deterministic.
pub(crate) fn cmp_expr(a: &Expr, b: &Expr) -> Ordering {
    fn rank(e: &Expr) -> u8 {
        match e {
            Expr::Const(_) => 0,
            Expr::Bracket { .. } => 1,
            Expr::Var(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Exp(..) => 4,
            Expr::Mul(_) => 5,
            Expr::Add(_) => 6,
            Expr::Div(..) => 7,
        }
    }
    match rank(a).cmp(&rank(b)) {
        Ordering::Equal => {}
        o => return o,
    }
    match (a, b) {
        (Expr::Const(x), Expr::Const(y)) => x
            .re
            .total_cmp(&y.re)
            .then_with(|| x.im.total_cmp(&y.im)),
        (Expr::Var(ax, i), Expr::Var(bx, j)) => ax.cmp(bx).then(i.cmp(j)),
        (
            Expr::Bracket { axis: ax, dim: ad, power: ap },
            Expr::Bracket { axis: bx, dim: bd, power: bp },
        ) => ax.cmp(bx).then(ad.cmp(bd)).then(ap.total_cmp(bp)),
        (Expr::Pow(ba, ka), Expr::Pow(bb, kb)) => cmp_expr(ba, bb).then(ka.cmp(kb)),
        (Expr::Exp(x), Expr::Exp(y)) => cmp_expr(x, y),
        (Expr::Add(x), Expr::Add(y)) | (Expr::Mul(x), Expr::Mul(y)) => {
            for (u, v) in x.iter().zip(y.iter()) {
                match cmp_expr(u, v) {
                    Ordering::Equal => {}
                    o => return o,
                }
            }
            x.len().cmp(&y.len())
        }
        (Expr::Div(na, da), Expr::Div(nb, db)) => cmp_expr(na, nb).then_with(|| cmp_expr(da, db)),
        _ => unreachable!("rank made arms exhaustive"),
    }
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Normalise `-0.0` so printed output and comparisons are stable.
fn clean_const(c: Complex64) -> Complex64 {
    let re = if c.re == 0.0 { 0.0 } else { c.re };
    let im = if c.im == 0.0 { 0.0 } else { c.im };
    c64(re, im)
}

/// Recursive canonical simplification. Best-effort: guarantees constant
/// folding, flattening, like-term/like-factor grouping, power collapsing and
/// quotient normal forms, but performs no expansion of products of sums.
pub fn simplify(e: Expr) -> Expr {
    match e {
        Expr::Const(c) => Expr::Const(clean_const(c)),
        Expr::Var(..) => e,
        Expr::Bracket { axis, dim, power } => {
            if power == 0.0 || dim == 0 {
                Expr::ONE
            } else {
                Expr::Bracket { axis, dim, power }
            }
        }
        Expr::Exp(b) => {
            let b = simplify(*b);
            if let Expr::Const(c) = b {
                Expr::Const(clean_const(c.exp()))
            } else {
                Expr::Exp(Box::new(b))
            }
        }
        Expr::Pow(b, k) => simplify_pow(simplify(*b), k),
        Expr::Add(terms) => simplify_add(terms),
        Expr::Mul(factors) => simplify_mul(factors),
        Expr::Div(n, d) => simplify_div(simplify(*n), simplify(*d)),
    }
}

fn simplify_pow(base: Expr, k: i32) -> Expr {
    if k == 0 {
        return Expr::ONE;
    }
    if k == 1 {
        return base;
    }
    match base {
        Expr::Const(c) => Expr::Const(clean_const(c.powi(k))),
        Expr::Pow(inner, j) => simplify_pow(*inner, j.saturating_mul(k)),
        Expr::Bracket { axis, dim, power } => simplify(Expr::Bracket {
            axis,
            dim,
            power: power * k as f64,
        }),
        Expr::Mul(fs) => {
            // (a·b)^k = a^k · b^k keeps node counts flat and helps the
            // rational-function extractor see factored denominators.
            simplify_mul(fs.into_iter().map(|f| Expr::Pow(Box::new(f), k)).collect())
        }
        Expr::Div(n, d) => {
            if k > 0 {
                simplify_div(simplify_pow(*n, k), simplify_pow(*d, k))
            } else {
                simplify_div(simplify_pow(*d, -k), simplify_pow(*n, -k))
            }
        }
        b => {
            if k < 0 {
                Expr::Div(Box::new(Expr::ONE), Box::new(simplify_pow(b, -k)))
            } else {
                Expr::Pow(Box::new(b), k)
            }
        }
    }
}

fn simplify_add(terms: Vec<Expr>) -> Expr {
    let mut flat: Vec<Expr> = Vec::with_capacity(terms.len());
    let mut const_sum = c64(0.0, 0.0);
    for t in terms {
        match simplify(t) {
            Expr::Add(inner) => {
                for u in inner {
                    match u {
                        Expr::Const(c) => const_sum += c,
                        other => flat.push(other),
                    }
                }
            }
            Expr::Const(c) => const_sum += c,
            other => flat.push(other),
        }
    }
    // Combine like terms: split each term into (coefficient, kernel) where the
    // kernel is the term with any leading constant factor removed.
    let mut groups: Vec<(Expr, Complex64)> = Vec::new();
    for t in flat {
        let (coeff, kernel) = split_const_factor(t);
        match groups.iter_mut().find(|(k, _)| *k == kernel) {
            Some((_, c)) => *c += coeff,
            None => groups.push((kernel, coeff)),
        }
    }
    let mut out: Vec<Expr> = Vec::with_capacity(groups.len() + 1);
    for (kernel, coeff) in groups {
        if coeff.re == 0.0 && coeff.im == 0.0 {
            continue;
        }
        if kernel.is_one() {
            const_sum += coeff;
        } else if coeff.re == 1.0 && coeff.im == 0.0 {
            out.push(kernel);
        } else {
            out.push(rebuild_mul(vec![Expr::Const(clean_const(coeff)), kernel]));
        }
    }
    if const_sum.re != 0.0 || const_sum.im != 0.0 {
        out.push(Expr::Const(clean_const(const_sum)));
    }
    out.sort_by(cmp_expr);
    match out.len() {
        0 => Expr::ZERO,
        1 => out.pop().unwrap(),
        _ => Expr::Add(out),
    }
}

/// Split a simplified term into (constant coefficient, remaining kernel).
fn split_const_factor(t: Expr) -> (Complex64, Expr) {
    match t {
        Expr::Const(c) => (c, Expr::ONE),
        Expr::Mul(fs) => {
            let mut coeff = c64(1.0, 0.0);
            let mut rest: Vec<Expr> = Vec::with_capacity(fs.len());
            for f in fs {
                match f {
                    Expr::Const(c) => coeff *= c,
                    other => rest.push(other),
                }
            }
            (coeff, rebuild_mul(rest))
        }
        Expr::Div(n, d) => {
            let (c, kernel) = split_const_factor(*n);
            (c, Expr::Div(Box::new(kernel), d))
        }
        other => (c64(1.0, 0.0), other),
    }
}

/// Rebuild a product from already-simplified factors without re-running the
/// full grouping pass (used internally where factors are known canonical).
fn rebuild_mul(mut fs: Vec<Expr>) -> Expr {
    fs.retain(|f| !f.is_one());
    match fs.len() {
        0 => Expr::ONE,
        1 => fs.pop().unwrap(),
        _ => Expr::Mul(fs),
    }
}

fn simplify_mul(factors: Vec<Expr>) -> Expr {
    let mut flat: Vec<Expr> = Vec::with_capacity(factors.len());
    let mut const_prod = c64(1.0, 0.0);
    let mut num_parts: Vec<Expr> = Vec::new();
    let mut den_parts: Vec<Expr> = Vec::new();
    for f in factors {
        match simplify(f) {
            Expr::Mul(inner) => {
                for u in inner {
                    match u {
                        Expr::Const(c) => const_prod *= c,
                        Expr::Div(n, d) => {
                            num_parts.push(*n);
                            den_parts.push(*d);
                        }
                        other => flat.push(other),
                    }
                }
            }
            Expr::Const(c) => const_prod *= c,
            Expr::Div(n, d) => {
                num_parts.push(*n);
                den_parts.push(*d);
            }
            other => flat.push(other),
        }
    }
    if const_prod.re == 0.0 && const_prod.im == 0.0 {
        return Expr::ZERO;
    }
    if !den_parts.is_empty() {
        // Hoist quotients: a · (b/c) · (d/e) = (a·b·d) / (c·e).
        let mut num = flat;
        num.push(Expr::Const(const_prod));
        num.extend(num_parts);
        return simplify_div(simplify_mul(num), simplify_mul(den_parts));
    }
    // Group equal bases into powers. Bases are compared structurally.
    // Brackets with the same axis/dim merge by adding real powers.
    let mut bases: Vec<(Expr, i32)> = Vec::new();
    let mut brackets: Vec<(Axis, usize, f64)> = Vec::new();
    for f in flat {
        match f {
            Expr::Bracket { axis, dim, power } => {
                match brackets.iter_mut().find(|(a, d, _)| *a == axis && *d == dim) {
                    Some((_, _, p)) => *p += power,
                    None => brackets.push((axis, dim, power)),
                }
            }
            Expr::Pow(b, k) => match bases.iter_mut().find(|(e, _)| *e == *b) {
                Some((_, kk)) => *kk += k,
                None => bases.push((*b, k)),
            },
            other => match bases.iter_mut().find(|(e, _)| *e == other) {
                Some((_, kk)) => *kk += 1,
                None => bases.push((other, 1)),
            },
        }
    }
    let mut out: Vec<Expr> = Vec::with_capacity(bases.len() + brackets.len() + 1);
    let mut neg_pows: Vec<Expr> = Vec::new();
    for (b, k) in bases {
        if k == 0 {
            continue;
        }
        if k < 0 {
            neg_pows.push(simplify_pow(b, -k));
        } else {
            out.push(simplify_pow(b, k));
        }
    }
    for (axis, dim, power) in brackets {
        let e = simplify(Expr::Bracket { axis, dim, power });
        if !e.is_one() {
            out.push(e);
        }
    }
    if const_prod.re != 1.0 || const_prod.im != 0.0 {
        out.push(Expr::Const(clean_const(const_prod)));
    }
    out.sort_by(cmp_expr);
    let num = match out.len() {
        0 => Expr::ONE,
        1 => out.pop().unwrap(),
        _ => Expr::Mul(out),
    };
    if neg_pows.is_empty() {
        num
    } else {
        simplify_div(num, simplify_mul(neg_pows))
    }
}

fn simplify_div(num: Expr, den: Expr) -> Expr {
    if num.is_zero() {
        return Expr::ZERO;
    }
    if den.is_one() {
        return num;
    }
    if let Expr::Const(c) = den {
        return simplify_mul(vec![Expr::Const(c64(1.0, 0.0) / c), num]);
    }
    if num == den {
        return Expr::ONE;
    }
    // Nested quotient normal forms.
    match (num, den) {
        (Expr::Div(a, b), Expr::Div(c, d)) => {
            simplify_div(simplify_mul(vec![*a, *d]), simplify_mul(vec![*b, *c]))
        }
        (Expr::Div(a, b), den) => simplify_div(*a, simplify_mul(vec![*b, den])),
        (num, Expr::Div(c, d)) => simplify_div(simplify_mul(vec![num, *d]), *c),
        (num, den) => {
            // Cancel shared factors between numerator and denominator
            // (structural comparison of factor lists, powers subtracted).
            let (nf, df) = cancel_factors(factor_list(num), factor_list(den));
            let n = rebuild_pow_list(nf);
            let d = rebuild_pow_list(df);
            if d.is_one() {
                n
            } else if n.is_zero() {
                Expr::ZERO
            } else {
                Expr::Div(Box::new(n), Box::new(d))
            }
        }
    }
}

/// Decompose a simplified expression into (base, power) factors.
fn factor_list(e: Expr) -> Vec<(Expr, i32)> {
    match e {
        Expr::Mul(fs) => fs.into_iter().map(factor_item).collect(),
        other => vec![factor_item(other)],
    }
}

fn factor_item(e: Expr) -> (Expr, i32) {
    match e {
        Expr::Pow(b, k) => (*b, k),
        other => (other, 1),
    }
}

fn cancel_factors(
    num: Vec<(Expr, i32)>,
    den: Vec<(Expr, i32)>,
) -> (Vec<(Expr, i32)>, Vec<(Expr, i32)>) {
    let mut den: Vec<(Expr, i32)> = den;
    let mut num_out: Vec<(Expr, i32)> = Vec::with_capacity(num.len());
    for (nb, nk) in num {
        if let Expr::Const(_) = nb {
            num_out.push((nb, nk));
            continue;
        }
        let mut nk = nk;
        if let Some((_, dk)) = den.iter_mut().find(|(db, _)| *db == nb) {
            let cancel = nk.min(*dk);
            if cancel > 0 {
                nk -= cancel;
                *dk -= cancel;
            }
        }
        if nk != 0 {
            num_out.push((nb, nk));
        }
    }
    den.retain(|(_, k)| *k != 0);
    (num_out, den)
}

fn rebuild_pow_list(fs: Vec<(Expr, i32)>) -> Expr {
    simplify_mul(
        fs.into_iter()
            .map(|(b, k)| simplify_pow(b, k))
            .collect(),
    )
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", parse::print(self))
    }
}
