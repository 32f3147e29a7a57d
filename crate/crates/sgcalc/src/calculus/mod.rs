//! SG symbol calculus: orders, Gevrey index bookkeeping, truncated formal
//! (asymptotic) sums with an excision cutoff, and differential symbols.

mod compose;
mod cutoff;
mod parametrix;
mod remainder;

pub use compose::{adjoint, compose};
pub use cutoff::{gevrey_cutoff, GevreyCutoff};
pub use parametrix::parametrix;
pub use remainder::{remainder_order, RayFit, RayGrid, RemainderReport};

use crate::error::{SgError, SgResult};
use crate::expr::{multi_index_iter, print as expr_print, Axis, EvalPoint, Expr};
use num_complex::Complex64;
use std::sync::OnceLock;

/// Hard cap on expansion length: matches the derivative cap of the
/// expression kernel, since term `l` consumes `l` derivatives.
pub const EXPANSION_CAP: usize = crate::expr::DEFAULT_DERIV_CAP;

/// SG order pair `(m1, m2)`: decay/growth exponents in `⟨ξ⟩` and `⟨x⟩`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SgOrder {
    pub m1: f64,
    pub m2: f64,
}

impl SgOrder {
    pub fn new(m1: f64, m2: f64) -> Self {
        SgOrder { m1, m2 }
    }

    /// Order of the `l`-th term of an asymptotic sum based at `self`:
    /// each step lowers both exponents by one.
    pub fn step(self, l: usize) -> Self {
        SgOrder {
            m1: self.m1 - l as f64,
            m2: self.m2 - l as f64,
        }
    }
}

impl std::ops::Add for SgOrder {
    type Output = SgOrder;
    fn add(self, o: SgOrder) -> SgOrder {
        SgOrder::new(self.m1 + o.m1, self.m2 + o.m2)
    }
}

impl std::ops::Neg for SgOrder {
    type Output = SgOrder;
    fn neg(self) -> SgOrder {
        SgOrder::new(-self.m1, -self.m2)
    }
}

impl std::fmt::Display for SgOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.m1, self.m2)
    }
}

/// Gelfand–Shilov indices `(μ, ν)` with the associated Gevrey order
/// `θ ≥ μ + ν - 1` tracked explicitly.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct GevreyIndices {
    pub mu: f64,
    pub nu: f64,
    pub theta: f64,
}

impl GevreyIndices {
    /// Indices with the minimal admissible Gevrey order `θ = μ + ν - 1`.
    pub fn new(mu: f64, nu: f64) -> SgResult<Self> {
        Self::with_theta(mu, nu, mu + nu - 1.0)
    }

    pub fn with_theta(mu: f64, nu: f64, theta: f64) -> SgResult<Self> {
        if !(mu >= 1.0) || !(nu >= 1.0) {
            return Err(SgError::InvalidParameter(format!(
                "Gevrey indices must satisfy mu, nu >= 1, got ({mu}, {nu})"
            )));
        }
        if theta < mu + nu - 1.0 - 1e-12 {
            return Err(SgError::InvalidParameter(format!(
                "Gevrey order theta = {theta} below the admissible floor mu+nu-1 = {}",
                mu + nu - 1.0
            )));
        }
        Ok(GevreyIndices { mu, nu, theta })
    }

    /// Order of the excision cutoff attached to this class: the smaller of
    /// the two indices when it admits compactly supported functions
    /// (strictly above 1), otherwise the classical fallback 2.
    pub fn cutoff_order(&self) -> f64 {
        let m = self.mu.min(self.nu);
        if m > 1.0 {
            m
        } else {
            2.0
        }
    }

    /// Combined indices of a product/composition of two classes.
    pub fn join(self, o: GevreyIndices) -> SgResult<Self> {
        let mu = self.mu.max(o.mu);
        let nu = self.nu.max(o.nu);
        let theta = self.theta.max(o.theta).max(mu + nu - 1.0);
        Self::with_theta(mu, nu, theta)
    }
}

/// One term of a formal sum: a rational symbol expression, optionally
/// multiplied by the excision cutoff `χ_B(|(x,ξ)|)` when evaluated.
#[derive(Debug, Clone)]
pub struct FsTerm {
    pub expr: Expr,
    pub cutoff: bool,
}

impl FsTerm {
    pub fn plain(expr: Expr) -> Self {
        FsTerm {
            expr,
            cutoff: false,
        }
    }

    pub fn excised(expr: Expr) -> Self {
        FsTerm { expr, cutoff: true }
    }
}

/// Truncated asymptotic sum `Σ_{l<N} a_l` with `a_l` of SG order
/// `base_order - (l, l)`. Terms flagged `cutoff` are multiplied by the radial
/// excision cutoff of radius `constants_b` on evaluation; symbolic operations
/// act on the stored rational parts (exact wherever `χ ≡ 1`, i.e. for
/// `|(x,ξ)| ≥ 2B`).
#[derive(Debug, Clone)]
pub struct FormalSum {
    /// dimension: x and ξ each have `n` components
    pub n: usize,
    pub base_order: SgOrder,
    pub indices: GevreyIndices,
    /// excision radius `B`; positive iff any term carries the cutoff flag
    pub constants_b: f64,
    terms: Vec<FsTerm>,
    chi: OnceLock<GevreyCutoff>,
}

impl FormalSum {
    pub fn new(n: usize, base_order: SgOrder, indices: GevreyIndices, constants_b: f64) -> Self {
        FormalSum {
            n,
            base_order,
            indices,
            constants_b,
            terms: Vec::new(),
            chi: OnceLock::new(),
        }
    }

    /// Single-term sum holding a plain (un-excised) symbol.
    pub fn from_expr(expr: Expr, n: usize, base_order: SgOrder, indices: GevreyIndices) -> Self {
        let mut s = FormalSum::new(n, base_order, indices, 0.0);
        s.push(FsTerm::plain(expr));
        s
    }

    pub fn push(&mut self, term: FsTerm) {
        self.terms.push(term);
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[FsTerm] {
        &self.terms
    }

    pub fn term(&self, l: usize) -> Option<&FsTerm> {
        self.terms.get(l)
    }

    /// SG order of term `l`.
    pub fn term_order(&self, l: usize) -> SgOrder {
        self.base_order.step(l)
    }

    /// The excision cutoff of this sum. Fails when the sum has no excision
    /// radius (all-plain sums never need it).
    pub fn cutoff(&self) -> SgResult<&GevreyCutoff> {
        if self.chi.get().is_none() {
            if !(self.constants_b > 0.0) {
                return Err(SgError::InvalidParameter(
                    "formal sum has no excision radius but a cutoff was requested".into(),
                ));
            }
            let c = gevrey_cutoff(self.constants_b, self.indices.cutoff_order())?;
            let _ = self.chi.set(c);
        }
        Ok(self.chi.get().expect("cutoff initialised above"))
    }

    /// Value of the excision cutoff at the joint radius of `p`.
    pub fn chi_value(&self, p: &EvalPoint) -> SgResult<f64> {
        self.cutoff()?.value(p.radius())
    }

    /// Evaluate term `l` at `p`, honouring the cutoff flag. Inside the
    /// excision ball (`χ = 0`) flagged terms evaluate to exactly zero without
    /// touching the rational part, so parametrix terms stay pole-free there.
    pub fn eval_term(&self, l: usize, p: &EvalPoint) -> SgResult<Complex64> {
        let t = self.terms.get(l).ok_or_else(|| {
            SgError::InvalidParameter(format!("term index {l} out of range (N = {})", self.len()))
        })?;
        if t.cutoff {
            let c = self.chi_value(p)?;
            if c == 0.0 {
                return Ok(Complex64::new(0.0, 0.0));
            }
            Ok(t.expr.eval(p)? * c)
        } else {
            t.expr.eval(p)
        }
    }

    /// Evaluate the partial sum of the first `count` terms at `p`.
    pub fn eval_partial(&self, count: usize, p: &EvalPoint) -> SgResult<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for l in 0..count.min(self.len()) {
            acc += self.eval_term(l, p)?;
        }
        Ok(acc)
    }

    /// Evaluate the full stored sum at `p`.
    pub fn eval(&self, p: &EvalPoint) -> SgResult<Complex64> {
        self.eval_partial(self.len(), p)
    }

    /// Uniform cutoff flag of the terms: `Some(flag)` when all terms agree
    /// (the vacuous sum is plain), `None` when mixed.
    pub fn uniform_flag(&self) -> Option<bool> {
        let mut flag = None;
        for t in &self.terms {
            match flag {
                None => flag = Some(t.cutoff),
                Some(f) if f != t.cutoff => return None,
                _ => {}
            }
        }
        Some(flag.unwrap_or(false))
    }

    /// Serialise to JSON. The cutoff flag is carried by the sign convention
    /// on `constants_B`: positive means every term is excised, zero means
    /// every term is plain. Mixed sums are not representable.
    pub fn to_json(&self) -> SgResult<serde_json::Value> {
        let flag = self.uniform_flag().ok_or_else(|| {
            SgError::Unsupported(
                "formal sum mixes excised and plain terms; not serialisable".into(),
            )
        })?;
        if flag && !(self.constants_b > 0.0) {
            return Err(SgError::InvalidParameter(
                "excised formal sum with non-positive excision radius".into(),
            ));
        }
        Ok(serde_json::json!({
            "n": self.n,
            "base_order": { "m1": self.base_order.m1, "m2": self.base_order.m2 },
            "indices": { "mu": self.indices.mu, "nu": self.indices.nu, "theta": self.indices.theta },
            "N": self.len(),
            "constants_B": if flag { self.constants_b } else { 0.0 },
            "terms": self.terms.iter().map(|t| expr_print(&t.expr)).collect::<Vec<_>>(),
        }))
    }

    pub fn from_json(v: &serde_json::Value) -> SgResult<Self> {
        let get = |k: &str| -> SgResult<&serde_json::Value> {
            v.get(k)
                .ok_or_else(|| SgError::Json(format!("formal sum missing field '{k}'")))
        };
        let num = |val: &serde_json::Value, k: &str| -> SgResult<f64> {
            val.get(k)
                .and_then(|x| x.as_f64())
                .ok_or_else(|| SgError::Json(format!("formal sum field '{k}' not a number")))
        };
        let n = get("n")?
            .as_u64()
            .ok_or_else(|| SgError::Json("formal sum field 'n' not an integer".into()))?
            as usize;
        let bo = get("base_order")?;
        let base_order = SgOrder::new(num(bo, "m1")?, num(bo, "m2")?);
        let ix = get("indices")?;
        let indices = GevreyIndices::with_theta(num(ix, "mu")?, num(ix, "nu")?, num(ix, "theta")?)?;
        let constants_b = get("constants_B")?.as_f64().ok_or_else(|| {
            SgError::Json("formal sum field 'constants_B' not a number".into())
        })?;
        let flag = constants_b > 0.0;
        let terms = get("terms")?
            .as_array()
            .ok_or_else(|| SgError::Json("formal sum field 'terms' not an array".into()))?;
        let mut s = FormalSum::new(n, base_order, indices, constants_b);
        for t in terms {
            let src = t
                .as_str()
                .ok_or_else(|| SgError::Json("formal sum term not a string".into()))?;
            let e = crate::expr::parse(src)?;
            s.push(FsTerm { expr: e, cutoff: flag });
        }
        Ok(s)
    }
}

/// A differential symbol `P(x,ξ) = Σ_{|α| ≤ m} c_α(x) ξ^α`: polynomial in
/// `ξ` with `ξ`-free coefficients. The declared SG order is `(m, m2)` with
/// `m2` bounding coefficient growth in `⟨x⟩`; `ν` is the Gevrey order of the
/// coefficients in `x`.
#[derive(Debug, Clone)]
pub struct DiffSymbol {
    pub n: usize,
    pub order: SgOrder,
    pub nu: f64,
    /// pairs `(α, c_α)` with `α.len() == n`, zero coefficients pruned,
    /// sorted by graded-lexicographic `α`
    coeffs: Vec<(Vec<usize>, Expr)>,
}

impl DiffSymbol {
    /// Extract the coefficient table of `expr` as a polynomial in
    /// `ξ_1, …, ξ_n` (last variable first, so weight nodes `⟨ξ⟩^{2k}` are
    /// decomposed soundly). Fails with `NotPolynomial` when `expr` is not
    /// polynomial in `ξ`, and with `InvalidParameter` when the actual
    /// `ξ`-degree exceeds the declared `order.m1`.
    pub fn from_expr(expr: &Expr, n: usize, order: SgOrder, nu: f64) -> SgResult<Self> {
        if n == 0 {
            return Err(SgError::InvalidParameter(
                "dimension must be at least 1".into(),
            ));
        }
        if !(nu >= 1.0) {
            return Err(SgError::InvalidParameter(format!(
                "coefficient Gevrey order must satisfy nu >= 1, got {nu}"
            )));
        }
        let mut coeffs: Vec<(Vec<usize>, Expr)> = Vec::new();
        let mut stack = vec![(vec![0usize; n], expr.clone(), n)];
        while let Some((mut alpha, e, k)) = stack.pop() {
            if k == 0 {
                if !e.is_zero() {
                    coeffs.push((alpha, e));
                }
                continue;
            }
            let p = e.poly_in_normal(k)?;
            for (j, c) in p.coeffs.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                alpha[k - 1] = j;
                stack.push((alpha.clone(), c.clone(), k - 1));
            }
        }
        // collapse duplicate exponents (possible when the input was not in a
        // collected form), validate ξ-freeness, prune zeros
        coeffs.sort_by(|a, b| grlex(&a.0, &b.0));
        let mut merged: Vec<(Vec<usize>, Expr)> = Vec::new();
        for (alpha, c) in coeffs {
            match merged.last_mut() {
                Some((la, lc)) if *la == alpha => {
                    *lc = Expr::add(vec![lc.clone(), c]);
                }
                _ => merged.push((alpha, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        for (alpha, c) in &merged {
            for i in 0..n {
                if c.depends_on(Axis::Xi, i) {
                    return Err(SgError::NotPolynomial {
                        var: format!("xi_{}", i + 1),
                        reason: format!(
                            "coefficient of ξ^{alpha:?} still depends on the covariable"
                        ),
                    });
                }
            }
        }
        let deg = merged
            .iter()
            .map(|(a, _)| a.iter().sum::<usize>())
            .max()
            .unwrap_or(0);
        if (deg as f64) > order.m1 + 1e-12 {
            return Err(SgError::InvalidParameter(format!(
                "declared differential order {} below actual ξ-degree {deg}",
                order.m1
            )));
        }
        Ok(DiffSymbol {
            n,
            order,
            nu,
            coeffs: merged,
        })
    }

    pub fn coeffs(&self) -> &[(Vec<usize>, Expr)] {
        &self.coeffs
    }

    pub fn coeff(&self, alpha: &[usize]) -> Option<&Expr> {
        self.coeffs
            .iter()
            .find(|(a, _)| a.as_slice() == alpha)
            .map(|(_, c)| c)
    }

    /// Actual polynomial degree in `ξ`.
    pub fn deg_xi(&self) -> usize {
        self.coeffs
            .iter()
            .map(|(a, _)| a.iter().sum::<usize>())
            .max()
            .unwrap_or(0)
    }

    /// Reassemble the full symbol expression `Σ c_α ξ^α`.
    pub fn symbol_expr(&self) -> Expr {
        Expr::add(
            self.coeffs
                .iter()
                .map(|(alpha, c)| {
                    let mut fs = vec![c.clone()];
                    for (i, &k) in alpha.iter().enumerate() {
                        if k > 0 {
                            fs.push(Expr::pow(Expr::var_xi(i), k as i32));
                        }
                    }
                    Expr::mul(fs)
                })
                .collect(),
        )
    }

    pub fn eval(&self, p: &EvalPoint) -> SgResult<Complex64> {
        self.symbol_expr().eval(p)
    }

    /// View as a single-term plain formal sum (polynomial symbols need no
    /// excision).
    pub fn as_formal_sum(&self) -> SgResult<FormalSum> {
        let indices = GevreyIndices::new(1.0, self.nu)?;
        Ok(FormalSum::from_expr(
            self.symbol_expr(),
            self.n,
            self.order,
            indices,
        ))
    }
}

/// Graded-lexicographic comparison of exponent vectors.
fn grlex(a: &[usize], b: &[usize]) -> std::cmp::Ordering {
    let (sa, sb): (usize, usize) = (a.iter().sum(), b.iter().sum());
    sa.cmp(&sb).then_with(|| a.cmp(b))
}

/// All multi-indices of exact total degree `d` in `n` variables.
pub(crate) fn multi_indices_of_degree(n: usize, d: usize) -> Vec<Vec<usize>> {
    multi_index_iter(n, d)
        .into_iter()
        .filter(|a| a.iter().sum::<usize>() == d)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::EvalPoint;

    #[test]
    fn order_arithmetic() {
        let a = SgOrder::new(2.0, 1.0);
        let b = SgOrder::new(-1.0, 0.5);
        assert_eq!(a + b, SgOrder::new(1.0, 1.5));
        assert_eq!(-a, SgOrder::new(-2.0, -1.0));
        assert_eq!(a.step(2), SgOrder::new(0.0, -1.0));
    }

    #[test]
    fn indices_validation() {
        let g = GevreyIndices::new(1.0, 1.5).unwrap();
        assert!((g.theta - 1.5).abs() < 1e-15);
        assert!((g.cutoff_order() - 2.0).abs() < 1e-15); // min index 1 → fallback
        let h = GevreyIndices::new(1.5, 2.0).unwrap();
        assert!((h.cutoff_order() - 1.5).abs() < 1e-15);
        assert!(GevreyIndices::new(0.5, 1.0).is_err());
        assert!(GevreyIndices::with_theta(1.0, 2.0, 1.5).is_err());
        let j = g.join(h).unwrap();
        assert!((j.mu - 1.5).abs() < 1e-15 && (j.nu - 2.0).abs() < 1e-15);
        assert!(j.theta >= j.mu + j.nu - 1.0 - 1e-15);
    }

    #[test]
    fn diff_symbol_extraction_round_trip() {
        // P = ⟨x⟩² ξ₂² + x₁ ξ₁ ξ₂ + 7 in dimension 2
        let e = Expr::add(vec![
            Expr::mul(vec![
                Expr::bracket(Axis::X, 2, 2.0),
                Expr::pow(Expr::var_xi(1), 2),
            ]),
            Expr::mul(vec![Expr::var_x(0), Expr::var_xi(0), Expr::var_xi(1)]),
            Expr::real(7.0),
        ]);
        let p = DiffSymbol::from_expr(&e, 2, SgOrder::new(2.0, 2.0), 1.0).unwrap();
        assert_eq!(p.deg_xi(), 2);
        assert_eq!(p.coeffs().len(), 3);
        assert!(p.coeff(&[0, 2]).is_some());
        assert!(p.coeff(&[1, 1]).is_some());
        assert!(p.coeff(&[0, 0]).is_some());
        // round trip evaluates identically
        let pt = EvalPoint::new(vec![0.3, -1.2], vec![2.0, 0.7]);
        let v0 = e.eval(&pt).unwrap();
        let v1 = p.symbol_expr().eval(&pt).unwrap();
        assert!((v0 - v1).norm() < 1e-14 * v0.norm());
    }

    #[test]
    fn diff_symbol_rejects_non_polynomial_and_wrong_order() {
        let bad = Expr::div(Expr::ONE, Expr::bracket(Axis::Xi, 1, 2.0));
        assert!(matches!(
            DiffSymbol::from_expr(&bad, 1, SgOrder::new(0.0, 0.0), 1.0),
            Err(SgError::NotPolynomial { .. })
        ));
        let quad = Expr::pow(Expr::var_xi(0), 2);
        assert!(matches!(
            DiffSymbol::from_expr(&quad, 1, SgOrder::new(1.0, 0.0), 1.0),
            Err(SgError::InvalidParameter(_))
        ));
    }

    #[test]
    fn formal_sum_eval_and_cutoff_short_circuit() {
        // single excised term 1/ξ₁ with B = 1: inside |(x,ξ)| ≤ 1 the value
        // is exactly 0 even at the pole ξ₁ = 0.
        let indices = GevreyIndices::with_theta(1.0, 2.0, 2.0).unwrap();
        let mut s = FormalSum::new(1, SgOrder::new(-1.0, 0.0), indices, 1.0);
        s.push(FsTerm::excised(Expr::div(Expr::ONE, Expr::var_xi(0))));
        let inside = EvalPoint::new(vec![0.0], vec![0.0]);
        assert_eq!(s.eval(&inside).unwrap(), Complex64::new(0.0, 0.0));
        let outside = EvalPoint::new(vec![0.0], vec![4.0]);
        let v = s.eval(&outside).unwrap();
        assert!((v - Complex64::new(0.25, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn formal_sum_json_round_trip() {
        let indices = GevreyIndices::with_theta(1.0, 2.0, 2.0).unwrap();
        let mut s = FormalSum::new(2, SgOrder::new(-2.0, 0.0), indices, 3.0);
        s.push(FsTerm::excised(Expr::div(
            Expr::ONE,
            Expr::bracket(Axis::Xi, 2, 2.0),
        )));
        s.push(FsTerm::excised(Expr::div(
            Expr::var_x(0),
            Expr::bracket(Axis::Xi, 2, 4.0),
        )));
        let j = s.to_json().unwrap();
        let r = FormalSum::from_json(&j).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r.n, 2);
        assert_eq!(r.base_order, s.base_order);
        let p = EvalPoint::new(vec![1.0, 2.0], vec![3.0, 5.0]);
        assert!((s.eval(&p).unwrap() - r.eval(&p).unwrap()).norm() < 1e-15);
        // mixed flags refuse to serialise
        let mut m = FormalSum::new(1, SgOrder::new(0.0, 0.0), indices, 1.0);
        m.push(FsTerm::plain(Expr::ONE));
        m.push(FsTerm::excised(Expr::ONE));
        assert!(matches!(m.to_json(), Err(SgError::Unsupported(_))));
    }

    #[test]
    fn exact_degree_enumeration() {
        let d2 = multi_indices_of_degree(2, 2);
        assert_eq!(d2.len(), 3);
        assert!(d2.iter().all(|a| a.iter().sum::<usize>() == 2));
        assert_eq!(multi_indices_of_degree(0, 0), vec![Vec::<usize>::new()]);
        assert!(multi_indices_of_degree(0, 1).is_empty());
    }
}
