//! Boundary symbols of operators applied to `u ⊗ δ^{(j)}`.
//!
//! For a symbol term `a` rational in the normal covariable, the trace of
//! order `k` of `op(a)(u ⊗ δ^{(j)})` at the boundary is a tangential
//! operator with symbol
//!
//! ```text
//! q^{kj}(x',ξ') = (1/2π) ∫ ξ_n^k (iξ_n)^j a(x',0,ξ',ξ_n) dξ_n,
//! ```
//!
//! regularised through the interior limit `x_n → 0+` which closes the
//! contour upward and discards polynomial (δ-type) parts. Two independent
//! routes are implemented: the algebraic residue sum and adaptive quadrature
//! over the closed semicircle contour; Cauchy's theorem makes them agree.

use crate::boundary::contour::ContourPath;
use crate::boundary::ratfn::{extract_ratfn, RatFn};
use crate::calculus::{FormalSum, SgOrder};
use crate::error::{SgError, SgResult};
use crate::expr::{EvalPoint, Expr};
use crate::quad::integrate_segments;
use num_complex::Complex64;
use std::f64::consts::TAU;

/// Absolute tolerance of the quadrature route.
pub const BS_QUAD_TOL: f64 = 1e-10;

/// Required agreement between the residue and quadrature routes.
pub const BS_AGREE_TOL: f64 = 1e-8;

/// Poles with |Im z| below this band (relative to 1+|z|) count as real.
pub const POLE_DEAD_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsMethod {
    Residue,
    Quadrature,
}

/// The integrand `i^j · z^{k+j} · term(x',0,ξ',z)` as a rational function,
/// with the scalar `i^j` returned separately.
fn integrand(
    term: &Expr,
    n: usize,
    k: usize,
    j: usize,
    x_prime: &[f64],
    xi_prime: &[f64],
) -> SgResult<(RatFn, Complex64)> {
    let mut x = x_prime.to_vec();
    x.push(0.0);
    let rat = extract_ratfn(term, n, &x, xi_prime)?;
    Ok((rat.mul_z_pow(k + j), Complex64::new(0.0, 1.0).powu(j as u32)))
}

fn guard_poles(g: &RatFn, witness: &str) -> SgResult<Vec<(Complex64, usize)>> {
    if g.is_zero() {
        return Ok(Vec::new());
    }
    let poles = g.poles()?;
    if poles.is_empty() {
        // pure polynomial: the oscillatory limit is a δ-layer, not a trace
        return Err(SgError::DegreeTooHigh { degree: g.degree() });
    }
    for (z0, _) in &poles {
        if z0.im.abs() < POLE_DEAD_BAND * (1.0 + z0.norm()) {
            return Err(SgError::RealPoleOnPath {
                location: witness.to_string(),
                re: z0.re,
                im: z0.im,
            });
        }
    }
    Ok(poles)
}

/// `q^{kj}` for one rational term at a frozen boundary point.
///
/// `b_radius` sets the comparison contour `Γ_{ξ'}` for the quadrature route;
/// all poles must lie strictly inside it (Assumption-A style).
pub fn boundary_symbol_at(
    term: &Expr,
    n: usize,
    k: usize,
    j: usize,
    x_prime: &[f64],
    xi_prime: &[f64],
    b_radius: f64,
    method: BsMethod,
) -> SgResult<Complex64> {
    let witness = format!("x' = {x_prime:?}, xi' = {xi_prime:?} (k={k}, j={j})");
    let (g, scalar) = integrand(term, n, k, j, x_prime, xi_prime)?;
    if g.is_zero() {
        return Ok(Complex64::default());
    }
    let poles = guard_poles(&g, &witness)?;
    match method {
        BsMethod::Residue => Ok(scalar * g.upper_residue_sum(|_, _| Ok(None))?),
        BsMethod::Quadrature => {
            let bs = (1.0 + xi_prime.iter().map(|t| t * t).sum::<f64>()).sqrt();
            let path = ContourPath::semicircle(b_radius, bs)?;
            let r = path.radius();
            for (z0, _) in &poles {
                if z0.norm() >= r * (1.0 - 1e-9) {
                    return Err(SgError::RealPoleOnPath {
                        location: format!("pole on or outside Γ_ξ' (radius {r}): {witness}"),
                        re: z0.re,
                        im: z0.im,
                    });
                }
            }
            let v = integrate_segments(
                &|z| g.eval(z),
                &path.closed_with_chord(),
                BS_QUAD_TOL,
            )?;
            Ok(scalar * v / TAU)
        }
    }
}

/// Run both routes and check their agreement; returns the residue value.
pub fn boundary_symbol_dual(
    term: &Expr,
    n: usize,
    k: usize,
    j: usize,
    x_prime: &[f64],
    xi_prime: &[f64],
    b_radius: f64,
) -> SgResult<Complex64> {
    let res = boundary_symbol_at(term, n, k, j, x_prime, xi_prime, b_radius, BsMethod::Residue)?;
    let quad = boundary_symbol_at(
        term,
        n,
        k,
        j,
        x_prime,
        xi_prime,
        b_radius,
        BsMethod::Quadrature,
    )?;
    let diff = (res - quad).norm();
    if diff > BS_AGREE_TOL * (1.0 + res.norm()) {
        return Err(SgError::QuadratureFailure(format!(
            "residue and quadrature routes disagree by {diff:.3e} at x' = {x_prime:?}, \
             xi' = {xi_prime:?} (k={k}, j={j}): {res} vs {quad}"
        )));
    }
    Ok(res)
}

/// Assumption-A audit of the rational terms of a formal sum: pole
/// containment radii and absence of real poles outside the excision ball.
#[derive(Debug, Clone, serde::Serialize)]
pub struct AssumptionAProfile {
    /// excision radius B of the cutoffs
    pub b: f64,
    /// smallest ratio bound r with every pole inside |z| ≤ r⟨ξ'⟩
    pub r: f64,
    /// per-term maximal pole ratios |z0|/⟨ξ'⟩
    pub term_ratios: Vec<f64>,
    /// tail validity radii B·M^{μ+ν-1} for the audited M
    pub m_tail: usize,
    pub tail_radius: f64,
    pub points_checked: usize,
    pub pass: bool,
}

/// Audit the first `count` terms of `fs` over boundary points `(x', ξ')`.
///
/// Fails with [`SgError::RealPoleOnPath`] if a term has a (near-)real pole at
/// a sampled point whose phase radius lies outside the excision ball, where
/// the cutoff no longer shields it.
pub fn assumption_a_audit(
    fs: &FormalSum,
    count: usize,
    points: &[(Vec<f64>, Vec<f64>)],
    m_tail: usize,
) -> SgResult<AssumptionAProfile> {
    if count == 0 || count > fs.len() {
        return Err(SgError::InvalidParameter(format!(
            "audit count {count} outside 1..={}",
            fs.len()
        )));
    }
    let n = fs.n;
    let gs_exp = (fs.indices.mu + fs.indices.nu - 1.0).max(1.0);
    let b = fs.constants_b;
    let mut term_ratios = vec![0.0f64; count];
    let mut checked = 0usize;
    for (xp, sp) in points {
        checked += 1;
        let bs = (1.0 + sp.iter().map(|t| t * t).sum::<f64>()).sqrt();
        let mut x = xp.clone();
        x.push(0.0);
        for (l, ratio) in term_ratios.iter_mut().enumerate() {
            let term = &fs.term(l).expect("index below validated count").expr;
            let rat = extract_ratfn(term, n, &x, sp)?;
            if rat.is_zero() {
                continue;
            }
            for (z0, _) in rat.poles()? {
                *ratio = ratio.max(z0.norm() / bs);
                if z0.im.abs() < POLE_DEAD_BAND * (1.0 + z0.norm()) {
                    // a real pole is tolerable only inside the excision ball
                    let phase_radius = (xp.iter().map(|t| t * t).sum::<f64>()
                        + sp.iter().map(|t| t * t).sum::<f64>()
                        + z0.norm_sqr())
                    .sqrt();
                    if phase_radius > b {
                        return Err(SgError::RealPoleOnPath {
                            location: format!(
                                "term {l} at x' = {xp:?}, xi' = {sp:?}, phase radius \
                                 {phase_radius:.3e} > B = {b:.3e}"
                            ),
                            re: z0.re,
                            im: z0.im,
                        });
                    }
                }
            }
        }
    }
    let r = term_ratios.iter().copied().fold(0.0, f64::max);
    Ok(AssumptionAProfile {
        b,
        r,
        term_ratios,
        m_tail,
        tail_radius: b * (m_tail as f64).powf(gs_exp),
        points_checked: checked,
        pass: r < b || r == 0.0,
    })
}

/// Numeric table of boundary symbols `q^{kj}` of a truncated formal sum over
/// a boundary grid, with sampled order seminorms.
#[derive(Debug, Clone, serde::Serialize)]
pub struct BoundarySymbolTable {
    /// order of the source symbol (the table entries have order
    /// (m1 + k + j + 1, m2) relative to it)
    pub source_order: SgOrder,
    pub k_max: usize,
    pub j_max: usize,
    pub points: Vec<(Vec<f64>, Vec<f64>)>,
    /// values[p][k][j]
    pub values: Vec<Vec<Vec<Complex64>>>,
    /// sampled sup of |q^{kj}| ⟨ξ'⟩^{-(m1+k+j+1)} ⟨x'⟩^{-m2}
    pub seminorms: Vec<Vec<f64>>,
}

/// Build the table from the first `count` terms of `fs` by the residue
/// route. Every sampled point must lie on the cutoff plateau so that the
/// rational parts coincide with the flagged terms.
pub fn boundary_symbol_table(
    fs: &FormalSum,
    count: usize,
    k_max: usize,
    j_max: usize,
    points: &[(Vec<f64>, Vec<f64>)],
) -> SgResult<BoundarySymbolTable> {
    if count == 0 || count > fs.len() {
        return Err(SgError::InvalidParameter(format!(
            "table count {count} outside 1..={}",
            fs.len()
        )));
    }
    let n = fs.n;
    let mut values = Vec::with_capacity(points.len());
    let mut seminorms = vec![vec![0.0f64; j_max + 1]; k_max + 1];
    for (xp, sp) in points {
        plateau_guard(fs, xp, sp)?;
        let bx = (1.0 + xp.iter().map(|t| t * t).sum::<f64>()).sqrt();
        let bs = (1.0 + sp.iter().map(|t| t * t).sum::<f64>()).sqrt();
        let mut per_point = vec![vec![Complex64::default(); j_max + 1]; k_max + 1];
        for k in 0..=k_max {
            for j in 0..=j_max {
                let mut q = Complex64::default();
                for l in 0..count {
                    let term = &fs.term(l).expect("index below validated count").expr;
                    q += boundary_symbol_at(
                        term,
                        n,
                        k,
                        j,
                        xp,
                        sp,
                        fs.constants_b.max(1.0),
                        BsMethod::Residue,
                    )?;
                }
                per_point[k][j] = q;
                let order_x = fs.base_order.m1 + (k + j + 1) as f64;
                let w = bs.powf(-order_x) * bx.powf(-fs.base_order.m2);
                seminorms[k][j] = seminorms[k][j].max(q.norm() * w);
            }
        }
        values.push(per_point);
    }
    Ok(BoundarySymbolTable {
        source_order: fs.base_order,
        k_max,
        j_max,
        points: points.to_vec(),
        values,
        seminorms,
    })
}

/// Verify that the excision cutoff of `fs` is identically 1 on the whole
/// real ξ_n-line over the point `(x', 0, ξ')`, i.e. that the rational parts
/// of the flagged terms are exact there. The phase radius is minimal at
/// ξ_n = 0, so one check suffices.
pub fn plateau_guard(fs: &FormalSum, x_prime: &[f64], xi_prime: &[f64]) -> SgResult<()> {
    if fs.uniform_flag() != Some(true) {
        // plain terms carry no cutoff; nothing to check
        return Ok(());
    }
    let mut x = x_prime.to_vec();
    x.push(0.0);
    let mut xi = xi_prime.to_vec();
    xi.push(0.0);
    let pt = EvalPoint::new(x, xi);
    let chi = fs.chi_value(&pt)?;
    if chi != 1.0 {
        return Err(SgError::InvalidParameter(format!(
            "boundary point x' = {x_prime:?}, xi' = {xi_prime:?} lies off the cutoff \
             plateau (χ = {chi}); enlarge |(x',ξ')| beyond 2B = {}",
            2.0 * fs.constants_b
        )));
    }
    Ok(())
}
