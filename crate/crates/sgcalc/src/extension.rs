//! Explicit extension of smooth functions from the half-space `x_n > 0` to
//! the whole space, preserving Gelfand-Shilov regularity.
//!
//! The construction is completely explicit: cutoff profiles
//!
//! ```text
//! b_k(t) = exp(−k σ_k^{4r} / (|t|^{2r} (σ_k + t)^{2r}))   on (−σ_k, 0),
//! a_k(t) = ∫_{−∞}^{min(t,−|t|)} b_k / ∫ b_k,   σ_k = D^{−1} k^{−(μ−1)},
//! ```
//!
//! give `a_k(0) = 1` with all derivatives vanishing at 0, so the series
//!
//! ```text
//! h(x) = Σ_k (1/k!) a_k(x_n) (∂_{x_n}^k f)(x′,0) x_n^k
//! ```
//!
//! matches every normal derivative of `f` at the boundary while converging
//! geometrically once `D ≥ 2Be^{a+1}` (`a = (16/3)^{2r}`, `B` the source
//! seminorm constant). The module also provides the seminorm-growth and
//! decay diagnostics used to verify the function-class membership claims.

use crate::error::{SgError, SgResult};
use crate::fd::central_weights;
use crate::fitting::{line_fit, lsq_solve};
use crate::grid::{AxisSpec, GridFunction, GridSpec};
use crate::jets::{CJet, RJet};
use crate::quad::integrate_real;
use num_complex::Complex64;

/// Default relative tolerance of the normalization quadratures.
pub const DEFAULT_QUAD_TOL: f64 = 1e-12;

/// Default series truncation; with `D ≥ 2Be^{a+1}` the neglected tail is
/// bounded by a geometric series with ratio 1/2, i.e. by `2^{−K}`.
pub const DEFAULT_K_MAX: usize = 12;

/// Normalization integrals below this are an error (the profile underflowed).
pub const NORM_FLOOR: f64 = 1e-300;

/// Parameters of the extension operator.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ExtensionParams {
    /// regularity index of the source class (μ > 1)
    pub mu: f64,
    /// decay index of the source class (ν > 0)
    pub nu: f64,
    /// profile scale constant D ≥ 1
    pub d: f64,
    /// profile sharpness r with 1/(2r) < μ − 1
    pub r_exp: f64,
    /// series truncation
    pub k_max: usize,
    /// relative quadrature tolerance
    pub quad_tol: f64,
}

impl ExtensionParams {
    pub fn new(
        mu: f64,
        nu: f64,
        d: f64,
        r_exp: f64,
        k_max: usize,
        quad_tol: f64,
    ) -> SgResult<Self> {
        if !(mu > 1.0) {
            return Err(SgError::InvalidParameter(format!(
                "extension requires mu > 1, got {mu}"
            )));
        }
        if !(nu > 0.0) {
            return Err(SgError::InvalidParameter(format!(
                "extension requires nu > 0, got {nu}"
            )));
        }
        if !(d >= 1.0) || !d.is_finite() {
            return Err(SgError::InvalidParameter(format!(
                "profile constant must satisfy D >= 1, got {d}"
            )));
        }
        if !(r_exp > 0.0) || !(1.0 / (2.0 * r_exp) < mu - 1.0) {
            return Err(SgError::InvalidParameter(format!(
                "sharpness must satisfy 1/(2r) < mu - 1, got r = {r_exp}, mu = {mu}"
            )));
        }
        if k_max == 0 {
            return Err(SgError::InvalidParameter(
                "series truncation must be at least 1".into(),
            ));
        }
        if !(quad_tol > 0.0) || !quad_tol.is_finite() {
            return Err(SgError::InvalidParameter(format!(
                "quadrature tolerance must be positive, got {quad_tol}"
            )));
        }
        Ok(ExtensionParams {
            mu,
            nu,
            d,
            r_exp,
            k_max,
            quad_tol,
        })
    }

    /// Parameters adapted to a source with seminorm constant `B`: chooses
    /// `D = max{1, 2Be^{a+1}}`, the smallest scale for which the series
    /// tail is geometric with ratio ≤ 1/2.
    pub fn for_source(mu: f64, nu: f64, b: f64, r_exp: f64, k_max: usize) -> SgResult<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(SgError::InvalidParameter(format!(
                "source seminorm constant must be positive, got {b}"
            )));
        }
        let a = (16.0f64 / 3.0).powf(2.0 * r_exp);
        let d = (2.0 * b * (a + 1.0).exp()).max(1.0);
        ExtensionParams::new(mu, nu, d, r_exp, k_max, DEFAULT_QUAD_TOL)
    }

    /// The profile constant `a = (16/3)^{2r}` of the derivative bounds.
    pub fn a_const(&self) -> f64 {
        (16.0f64 / 3.0).powf(2.0 * self.r_exp)
    }

    /// Support radius `σ_k = D^{−1} k^{−(μ−1)}` of the k-th profile.
    pub fn sigma(&self, k: usize) -> f64 {
        let k = k.max(1);
        (k as f64).powf(-(self.mu - 1.0)) / self.d
    }

    /// A-priori bound on the neglected series tail.
    pub fn tail_bound(&self) -> f64 {
        0.5f64.powi(self.k_max as i32)
    }
}

/// The raw profile `b_k`: a bump supported in `[−σ_k, 0]` with essential
/// zeros at both endpoints. Exponent underflow flushes to an exact 0.
pub fn dzanasija_b(k: usize, t: f64, p: &ExtensionParams) -> f64 {
    if k == 0 {
        return dzanasija_b(1, t, p);
    }
    let s = p.sigma(k);
    if t <= -s || t >= 0.0 {
        return 0.0;
    }
    let r2 = 2.0 * p.r_exp;
    let denom = (-t).powf(r2) * (s + t).powf(r2);
    (-(k as f64) * s.powf(2.0 * r2) / denom).exp()
}

/// The profile family with cached normalization integrals (computed once at
/// construction; all later evaluation is read-only).
#[derive(Debug, Clone)]
pub struct DzanasijaFamily {
    pub params: ExtensionParams,
    norms: Vec<f64>,
}

impl DzanasijaFamily {
    pub fn new(params: ExtensionParams) -> SgResult<Self> {
        let mut norms = Vec::with_capacity(params.k_max);
        for k in 1..=params.k_max {
            let s = params.sigma(k);
            let peak = dzanasija_b(k, -0.5 * s, &params);
            if !(peak > NORM_FLOOR) {
                return Err(SgError::QuadratureFailure(format!(
                    "profile {k} underflowed: peak value {peak:.3e} at σ/2"
                )));
            }
            let tol = params.quad_tol * peak * s;
            let v = integrate_real(
                &|y| Ok(Complex64::new(dzanasija_b(k, y, &params), 0.0)),
                -s,
                0.0,
                tol,
            )?
            .re;
            if !(v > NORM_FLOOR) || !v.is_finite() {
                return Err(SgError::QuadratureFailure(format!(
                    "normalization integral of profile {k} is {v:.3e}"
                )));
            }
            norms.push(v);
        }
        Ok(DzanasijaFamily { params, norms })
    }

    /// Normalization `∫ b_k` (k ≥ 1).
    pub fn norm(&self, k: usize) -> f64 {
        self.norms[k.max(1) - 1]
    }

    /// The normalized cutoff `a_k` (with `a_0 = a_1`): even, `a_k(0) = 1`,
    /// supported in `[−σ_k, σ_k] ⊂ [−1, 1]`, all derivatives zero at 0.
    pub fn a(&self, k: usize, t: f64) -> SgResult<f64> {
        let k = k.max(1);
        let t = -t.abs(); // mirror symmetry a_k(t) = a_k(−t)
        let s = self.params.sigma(k);
        if t <= -s {
            return Ok(0.0);
        }
        if t == 0.0 {
            return Ok(1.0);
        }
        let p = self.params;
        let f = |y: f64| Ok(Complex64::new(dzanasija_b(k, y, &p), 0.0));
        let tol = self.params.quad_tol * self.norm(k);
        let v = if t <= -0.5 * s {
            integrate_real(&f, -s, t, tol)?.re / self.norm(k)
        } else {
            1.0 - integrate_real(&f, t, 0.0, tol)?.re / self.norm(k)
        };
        Ok(v.clamp(0.0, 1.0))
    }

    /// Jet (value and derivatives) of `a_k` at an interior point `t0 < 0`.
    /// Outside the support the jet is identically zero; `a_k′ = b_k / ∫b_k`
    /// supplies the higher coefficients.
    pub fn a_jet(&self, k: usize, t0: f64, len: usize) -> SgResult<RJet> {
        let k = k.max(1);
        if !(t0 < 0.0) {
            return Err(SgError::InvalidParameter(format!(
                "profile jets are taken at interior points t0 < 0, got {t0}"
            )));
        }
        let s = self.params.sigma(k);
        if t0 <= -s {
            return Ok(RJet::constant(0.0, len));
        }
        let value = self.a(k, t0)?;
        if len == 1 {
            return Ok(RJet::constant(value, len));
        }
        let b = self.b_jet(k, t0, len - 1)?;
        Ok(b.scale(1.0 / self.norm(k)).integrate(value))
    }

    /// Jet of the raw profile `b_k` at an interior point of its support.
    fn b_jet(&self, k: usize, t0: f64, len: usize) -> SgResult<RJet> {
        let k = k.max(1);
        let s = self.params.sigma(k);
        if t0 <= -s || t0 >= 0.0 {
            return Ok(RJet::constant(0.0, len));
        }
        let r2 = 2.0 * self.params.r_exp;
        let t = RJet::variable(t0, len);
        let u = t.neg(); // −t > 0
        let v = t.add(&RJet::constant(s, len)); // σ + t > 0
        let g = u
            .powf(-r2)?
            .mul(&v.powf(-r2)?)
            .scale(-(k as f64) * s.powf(2.0 * r2));
        Ok(g.exp())
    }
}

/// Boundary data of the extension: per boundary sample point, the normal
/// derivatives `∂_{x_n}^k f(x′, 0)` for `k = 0..=K`, plus the source
/// seminorm constant `B` of the growth bound `|jet_k| ≤ B^{k+1} (k!)^μ`.
#[derive(Debug, Clone)]
pub struct BoundaryJet {
    pub b: f64,
    jets: Vec<Vec<Complex64>>,
}

impl BoundaryJet {
    pub fn new(b: f64, jets: Vec<Vec<Complex64>>) -> SgResult<Self> {
        if !(b > 0.0) || !b.is_finite() {
            return Err(SgError::InvalidParameter(format!(
                "seminorm constant must be positive, got {b}"
            )));
        }
        if jets.is_empty() || jets[0].is_empty() {
            return Err(SgError::InvalidParameter(
                "boundary jet needs at least order 0 and one sample point".into(),
            ));
        }
        let pts = jets[0].len();
        if jets.iter().any(|row| row.len() != pts) {
            return Err(SgError::InvalidParameter(
                "jet orders have mismatched boundary sample counts".into(),
            ));
        }
        if jets
            .iter()
            .flatten()
            .any(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(SgError::InvalidParameter(
                "boundary jet contains non-finite values".into(),
            ));
        }
        Ok(BoundaryJet { b, jets })
    }

    /// Single-point (half-line) jet.
    pub fn scalar(b: f64, jet: Vec<Complex64>) -> SgResult<Self> {
        BoundaryJet::new(b, jet.into_iter().map(|v| vec![v]).collect())
    }

    /// Highest provided derivative order.
    pub fn order(&self) -> usize {
        self.jets.len() - 1
    }

    pub fn points(&self) -> usize {
        self.jets[0].len()
    }

    pub fn value(&self, k: usize, point: usize) -> Complex64 {
        self.jets[k][point]
    }

    /// Check the growth bound `|jet_k| ≤ B^{k+1} (k!)^μ` at every sample.
    pub fn check_growth(&self, mu: f64) -> SgResult<()> {
        for (k, row) in self.jets.iter().enumerate() {
            let allowed = self.b.powi(k as i32 + 1) * factorial(k).powf(mu);
            for v in row {
                if v.norm() > allowed * (1.0 + 1e-9) {
                    return Err(SgError::JetGrowthViolation {
                        order: k,
                        value: v.norm(),
                        allowed,
                    });
                }
            }
        }
        Ok(())
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

/// Evaluate the extension series on a grid of non-positive normal values.
/// Output: one axis (`x_n`) for single-point jets, two axes (boundary
/// sample index, `x_n`) otherwise. The result vanishes identically for
/// `x_n ≤ −1` (the profiles are supported in `[−σ_1, 0]` with `σ_1 ≤ 1`).
pub fn extend_half_space(
    fam: &DzanasijaFamily,
    jet: &BoundaryJet,
    xn: &AxisSpec,
) -> SgResult<GridFunction> {
    if xn.max > 0.0 {
        return Err(SgError::InvalidParameter(format!(
            "extension grid must satisfy x_n <= 0, got max {}",
            xn.max
        )));
    }
    jet.check_growth(fam.params.mu)?;
    let k_eff = jet.order().min(fam.params.k_max);
    let pts = jet.points();
    // cutoff values are shared across boundary points: cache per (k, node)
    let nodes = xn.nodes();
    let mut a_table = vec![vec![0.0f64; nodes.len()]; k_eff + 1];
    for (k, row) in a_table.iter_mut().enumerate() {
        for (i, &t) in nodes.iter().enumerate() {
            row[i] = fam.a(k, t)?;
        }
    }
    let spec = if pts == 1 {
        GridSpec {
            axes: vec![xn.clone()],
        }
    } else {
        GridSpec {
            axes: vec![AxisSpec::new(0.0, (pts - 1) as f64, pts)?, xn.clone()],
        }
    };
    let mut values = Vec::with_capacity(pts * nodes.len());
    for p in 0..pts {
        for (i, &t) in nodes.iter().enumerate() {
            let mut acc = Complex64::default();
            let mut tk = 1.0; // t^k
            for k in 0..=k_eff {
                if k > 0 {
                    tk *= t;
                }
                let a = a_table[k][i];
                if a != 0.0 && (tk != 0.0 || k == 0) {
                    acc += jet.value(k, p) * (a * tk / factorial(k));
                }
            }
            values.push(acc);
        }
    }
    GridFunction::new(spec, values)
}

/// Derivatives `h^{(m)}(t0)`, `m = 0..len`, of the extension along one
/// normal line, computed by exact jet arithmetic at an interior point
/// `t0 < 0`. Near the boundary the profile jets collapse to `[1, 0, …]`
/// (all their derivatives vanish at 0), so these converge to the input jet
/// as `t0 → 0⁻`.
pub fn extension_jet_at(
    fam: &DzanasijaFamily,
    jet: &BoundaryJet,
    point: usize,
    t0: f64,
    len: usize,
) -> SgResult<Vec<Complex64>> {
    if point >= jet.points() {
        return Err(SgError::InvalidParameter(format!(
            "boundary sample {point} out of range ({})",
            jet.points()
        )));
    }
    let k_eff = jet.order().min(fam.params.k_max);
    let mut acc = CJet::constant(Complex64::default(), len);
    for k in 0..=k_eff {
        let a = fam.a_jet(k, t0, len)?;
        let tk = RJet::variable(t0, len).powi(k as i64)?;
        let prod = a.mul(&tk);
        let lifted = CJet {
            c: prod.c.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        };
        acc = acc.add(&lifted.scale(jet.value(k, point) / factorial(k)));
    }
    Ok((0..len).map(|m| acc.derivative(m)).collect())
}

/// Jet-matching verification: compares the extension derivatives just
/// inside the boundary against the prescribed jet.
#[derive(Debug, Clone, serde::Serialize)]
pub struct JetMatchReport {
    pub t0: f64,
    /// per-order absolute mismatch, maximized over boundary samples
    pub errors: Vec<f64>,
    pub max_error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn jet_match_report(
    fam: &DzanasijaFamily,
    jet: &BoundaryJet,
    t0: f64,
    m_max: usize,
    tolerance: f64,
) -> SgResult<JetMatchReport> {
    let m_top = m_max.min(jet.order());
    let mut errors = vec![0.0f64; m_top + 1];
    for p in 0..jet.points() {
        let ders = extension_jet_at(fam, jet, p, t0, m_top + 1)?;
        for (m, err) in errors.iter_mut().enumerate() {
            *err = err.max((ders[m] - jet.value(m, p)).norm());
        }
    }
    let max_error = errors.iter().copied().fold(0.0, f64::max);
    Ok(JetMatchReport {
        t0,
        errors,
        max_error,
        tolerance,
        pass: max_error <= tolerance,
    })
}

/// Empirical spot check of the profile derivative bounds
/// `|∂^α (a_k(t) t^k)| ≤ 2^{α+1} e^{a·k or a(k+1)} D^{−k} k^{−k(μ−1)}
/// T^α D^α (α or k)^{μα}`: for each `(k, α)` the smallest admissible `T`
/// is measured; the table maximum is the reported constant.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProfileBoundReport {
    pub t_emp: f64,
    pub worst_k: usize,
    pub worst_alpha: usize,
    pub entries: usize,
}

pub fn profile_bound_check(
    fam: &DzanasijaFamily,
    k_max: usize,
    alpha_max: usize,
    samples: usize,
) -> SgResult<ProfileBoundReport> {
    if alpha_max == 0 || samples == 0 {
        return Err(SgError::InvalidParameter(
            "profile bound check needs alpha_max >= 1 and samples >= 1".into(),
        ));
    }
    let p = fam.params;
    let a_c = p.a_const();
    let mut t_emp = 0.0f64;
    let (mut worst_k, mut worst_alpha) = (0usize, 0usize);
    let mut entries = 0usize;
    for k in 0..=k_max.min(p.k_max) {
        let s = p.sigma(k);
        for alpha in 1..=alpha_max {
            let mut m_val = 0.0f64;
            for i in 0..samples {
                let t0 = -s * (i as f64 + 0.5) / samples as f64;
                let aj = fam.a_jet(k, t0, alpha + 1)?;
                let tk = RJet::variable(t0, alpha + 1).powi(k as i64)?;
                m_val = m_val.max(aj.mul(&tk).derivative(alpha).abs());
            }
            if m_val == 0.0 {
                continue;
            }
            let kf = k as f64;
            let af = alpha as f64;
            // log of the bound with T = 1
            let ln_rest = (af + 1.0) * 2.0f64.ln()
                + if k <= alpha { a_c * kf } else { a_c * (kf + 1.0) }
                - kf * p.d.ln()
                - if k >= 2 { kf * (p.mu - 1.0) * kf.ln() } else { 0.0 }
                + af * p.d.ln()
                + if k <= alpha {
                    p.mu * af * af.ln()
                } else {
                    p.mu * af * kf.ln()
                };
            let ln_t = (m_val.ln() - ln_rest) / af;
            let t_here = ln_t.exp();
            entries += 1;
            if t_here > t_emp {
                t_emp = t_here;
                worst_k = k;
                worst_alpha = alpha;
            }
        }
    }
    Ok(ProfileBoundReport {
        t_emp,
        worst_k,
        worst_alpha,
        entries,
    })
}

/// Result of the seminorm-growth regression
/// `log sup|x^α ∂^β u| ≈ log C + α log D₁ + β log D₂ + ν log α! + μ log β!`.
/// Separate linear slopes per direction keep the factorial regressors
/// identifiable; `d` reports the single dominating base `max(D₁, D₂)`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct SeminormFit {
    pub c: f64,
    pub d: f64,
    pub nu: f64,
    pub mu: f64,
    pub residual: f64,
    pub rows: usize,
}

/// Fit function-class indices from sampled weighted-derivative sup-norms on
/// a one-dimensional grid. Derivatives are taken by central stencils, so
/// `beta_max ≤ 8`; fewer than 3 derivative orders cannot separate the
/// regressors.
pub fn seminorm_fit(u: &GridFunction, alpha_max: usize, beta_max: usize) -> SgResult<SeminormFit> {
    if u.spec.dim() != 1 {
        return Err(SgError::InvalidParameter(format!(
            "seminorm fit runs on one-dimensional grids, got {} axes",
            u.spec.dim()
        )));
    }
    if beta_max < 3 {
        return Err(SgError::IllConditionedFit(format!(
            "need derivative orders up to at least 3 to separate the fit, got {beta_max}"
        )));
    }
    if beta_max > 8 {
        return Err(SgError::InvalidParameter(format!(
            "stencil derivatives are limited to order 8, got {beta_max}"
        )));
    }
    if alpha_max == 0 {
        return Err(SgError::IllConditionedFit(
            "need weight powers up to at least 1 to separate the fit".into(),
        ));
    }
    let axis = &u.spec.axes[0];
    let h = axis.step();
    let len = axis.count;
    let mut design = Vec::new();
    let mut rhs = Vec::new();
    let mut rows = 0usize;
    for beta in 0..=beta_max {
        let hw = beta / 2 + 1;
        if 2 * hw + 1 > len {
            return Err(SgError::IllConditionedFit(format!(
                "grid of {len} nodes cannot host an order-{beta} stencil"
            )));
        }
        let w = central_weights(beta, hw, h);
        // |∂^β u| on interior nodes
        let mut dmax = vec![0.0f64; len];
        for i in hw..len - hw {
            let mut acc = Complex64::default();
            for (j, &wj) in w.iter().enumerate() {
                acc += u.values[i - hw + j] * wj;
            }
            dmax[i] = acc.norm();
        }
        for alpha in 0..=alpha_max {
            let mut sup = 0.0f64;
            for i in hw..len - hw {
                let x = axis.node(i);
                sup = sup.max(x.abs().powi(alpha as i32) * dmax[i]);
            }
            if sup <= 0.0 {
                continue;
            }
            design.extend_from_slice(&[
                1.0,
                alpha as f64,
                beta as f64,
                factorial(alpha).ln(),
                factorial(beta).ln(),
            ]);
            rhs.push(sup.ln());
            rows += 1;
        }
    }
    if rows == 0 {
        // the zero function: no growth at all
        return Ok(SeminormFit {
            c: 0.0,
            d: 0.0,
            nu: 0.0,
            mu: 0.0,
            residual: 0.0,
            rows: 0,
        });
    }
    let (beta, residual) = lsq_solve(rows, 5, &design, &rhs)?;
    Ok(SeminormFit {
        c: beta[0].exp(),
        d: beta[1].max(beta[2]).exp(),
        nu: beta[3],
        mu: beta[4],
        residual,
        rows,
    })
}

/// Result of the exponential-decay regression `log|u| ≈ log C − ε·|x|^p`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct DecayFit {
    pub epsilon: f64,
    pub residual: f64,
    pub points: usize,
}

/// Fit the decay rate of `|u|` against `|x|^p` on a window. A small
/// residual certifies genuinely exponential-type decay; slowly decaying
/// functions show curvature and a large residual.
pub fn decay_fit(u: &GridFunction, window: (f64, f64), p: f64) -> SgResult<DecayFit> {
    if u.spec.dim() != 1 {
        return Err(SgError::InvalidParameter(format!(
            "decay fit runs on one-dimensional grids, got {} axes",
            u.spec.dim()
        )));
    }
    if !(p > 0.0) || window.0 >= window.1 {
        return Err(SgError::InvalidParameter(format!(
            "decay fit needs p > 0 and an ordered window, got p = {p}, window {window:?}"
        )));
    }
    let axis = &u.spec.axes[0];
    let mut ts = Vec::new();
    let mut ys = Vec::new();
    for i in 0..axis.count {
        let x = axis.node(i);
        if x < window.0 || x > window.1 {
            continue;
        }
        let m = u.values[i].norm();
        if m > NORM_FLOOR {
            ts.push(-x.abs().powf(p));
            ys.push(m.ln());
        }
    }
    if ts.is_empty() {
        return Err(SgError::AllZeroWindow {
            floor: NORM_FLOOR,
            window: format!("[{}, {}]", window.0, window.1),
        });
    }
    let fit = line_fit(&ts, &ys)?;
    Ok(DecayFit {
        epsilon: fit.slope,
        residual: fit.resid_rms,
        points: ts.len(),
    })
}
