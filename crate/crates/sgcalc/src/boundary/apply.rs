//! Application of rational-in-`ξ_n` operators on the half-space: the
//! Poisson-type map sending a boundary layer `v ⊗ δ(x_n)` to an interior
//! function, and the transmission map `r⁺ op(a) e⁺` realized through the
//! explicit half-space extension.
//!
//! Both maps share one engine: for `x_n > 0` the oscillatory `ξ_n`-integral
//! closes over the upper half-plane, so each evaluation is `i·Σ` residues
//! with an entire weight factor (`e^{i x_n ξ_n}` alone, or multiplied by the
//! transform of the extension collar).

use std::f64::consts::TAU;

use crate::boundary::ratfn::{extract_ratfn, RatFn};
use crate::calculus::FormalSum;
use crate::error::{SgError, SgResult};
use crate::extension::{BoundaryJet, DzanasijaFamily, ExtensionParams};
use crate::fd::{fd_weights, one_sided_weights};
use crate::grid::{AxisSpec, GridFunction, GridSpec};
use crate::jets::CJet;
use crate::quad::integrate_real;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Poles closer to the real axis than this (relative to their size) make the
/// contour integral ill-defined.
const POLE_DEAD_BAND: f64 = 1e-9;

/// Boundary data must have decayed to this relative level at the grid edge
/// before periodization by discrete transforms is acceptable.
const EDGE_DECAY: f64 = 1e-12;

fn guard_real_poles(rf: &RatFn) -> SgResult<()> {
    for (z0, _) in rf.poles()? {
        if z0.im.abs() <= POLE_DEAD_BAND * z0.norm().max(1.0) {
            return Err(SgError::RealPoleOnPath {
                location: format!("{z0}"),
                re: z0.re,
                im: z0.im,
            });
        }
    }
    Ok(())
}

/// Require every term plain (no excision cutoff): the `x_n`-integral sweeps
/// all of `ξ_n`, where excised parametrix terms are not rational.
fn require_plain(a: &FormalSum, what: &str) -> SgResult<()> {
    if a.uniform_flag() != Some(false) {
        return Err(SgError::InvalidParameter(format!(
            "{what} needs globally rational terms; excised (cutoff) terms are only \
             symbols outside a ball and cannot feed the ξ_n contour integral"
        )));
    }
    Ok(())
}

/// `i·Σ Res[rf(z) e^{i x_n z}]` with the Jordan-lemma degree check: strict
/// decay is needed on the closing arc (one extra order at `x_n = 0`, where
/// the exponential no longer helps).
fn layer_profile(rf: &RatFn, x_n: f64) -> SgResult<Complex64> {
    if rf.is_zero() {
        return Ok(Complex64::default());
    }
    let needed = if x_n > 0.0 { -1 } else { -2 };
    if rf.degree() > needed {
        return Err(SgError::DegreeTooHigh {
            degree: rf.degree(),
        });
    }
    guard_real_poles(rf)?;
    rf.upper_residue_sum(|z0, m| {
        Ok(Some(
            CJet::variable(z0, m).scale(Complex64::new(0.0, x_n)).exp(),
        ))
    })
}

/// Sum of the per-term layer profiles of `a` frozen at the spatial point `x`
/// (full, with its normal coordinate) and tangential frequency `ξ'`.
fn symbol_profile(a: &FormalSum, x: &[f64], xi_prime: &[f64], x_n: f64) -> SgResult<Complex64> {
    let mut acc = Complex64::default();
    for t in a.terms() {
        let rf = extract_ratfn(&t.expr, a.n, x, xi_prime)?;
        acc += layer_profile(&rf, x_n)?;
    }
    Ok(acc)
}

/// Signed DFT frequencies `2π k / (N Δ)` in transform order.
pub(crate) fn dft_freqs(n: usize, delta: f64) -> Vec<f64> {
    (0..n)
        .map(|k| {
            let ks = if k <= n / 2 {
                k as i64
            } else {
                k as i64 - n as i64
            };
            TAU * ks as f64 / (n as f64 * delta)
        })
        .collect()
}

/// Poisson-type application `r⁺ op(a) (v ⊗ δ(x_n))` on the half-space grid
/// `x' × x_n`. For `n = 1` the boundary is a point and `v` is scalar; for
/// `n = 2` the tangential direction is handled by a discrete transform of
/// `v` (periodic in `x'`), mode by mode.
pub fn poisson_apply(a: &FormalSum, v: &GridFunction, xn: &AxisSpec) -> SgResult<GridFunction> {
    require_plain(a, "Poisson application")?;
    if xn.min < 0.0 {
        return Err(SgError::InvalidParameter(format!(
            "Poisson output grid lives on x_n >= 0, got min {}",
            xn.min
        )));
    }
    match a.n {
        1 => {
            if v.spec.dim() != 0 {
                return Err(SgError::InvalidParameter(
                    "half-line boundary data is a single scalar sample".into(),
                ));
            }
            let val = v.values[0];
            let spec = GridSpec::line(xn.clone());
            if val == Complex64::default() {
                return Ok(GridFunction::zeros(spec));
            }
            let mut out = Vec::with_capacity(xn.count);
            for t in xn.nodes() {
                out.push(val * symbol_profile(a, &[t], &[], t)?);
            }
            GridFunction::new(spec, out)
        }
        2 => poisson_apply_halfplane(a, v, xn),
        d => Err(SgError::InvalidParameter(format!(
            "Poisson application supports n ∈ {{1, 2}}, got {d}"
        ))),
    }
}

fn poisson_apply_halfplane(
    a: &FormalSum,
    v: &GridFunction,
    xn: &AxisSpec,
) -> SgResult<GridFunction> {
    if v.spec.dim() != 1 {
        return Err(SgError::InvalidParameter(
            "half-plane boundary data lives on a one-dimensional grid".into(),
        ));
    }
    let axis = v.spec.axes[0];
    let nmodes = axis.count;
    let delta = axis.step();
    let mut planner = FftPlanner::<f64>::new();
    let mut hat = v.values.clone();
    planner.plan_fft_forward(nmodes).process(&mut hat);
    let freqs = dft_freqs(nmodes, delta);
    let x_free = a
        .terms()
        .iter()
        .all(|t| !t.expr.depends_on(crate::expr::Axis::X, 0) && !t.expr.depends_on(crate::expr::Axis::X, 1));

    let spec = GridSpec {
        axes: vec![axis, xn.clone()],
    };
    let mut values = vec![Complex64::default(); nmodes * xn.count];
    if x_free {
        // profiles depend on (mode, x_n) only: extract once per mode and
        // synthesize rows by inverse DFT
        let inverse = planner.plan_fft_inverse(nmodes);
        let nodes = xn.nodes();
        let needed = if nodes.iter().any(|t| *t == 0.0) { -2 } else { -1 };
        let mut prof = vec![Complex64::default(); nmodes * xn.count];
        for (k, &xi) in freqs.iter().enumerate() {
            if hat[k].norm() == 0.0 {
                continue;
            }
            for t in a.terms() {
                let rf = extract_ratfn(&t.expr, a.n, &[0.0, 0.0], &[xi])?;
                if rf.is_zero() {
                    continue;
                }
                if rf.degree() > needed {
                    return Err(SgError::DegreeTooHigh {
                        degree: rf.degree(),
                    });
                }
                guard_real_poles(&rf)?;
                let poles = rf.poles()?;
                for (j, &tn) in nodes.iter().enumerate() {
                    let mut acc = Complex64::default();
                    for &(z0, m) in poles.iter().filter(|(z, _)| z.im > 0.0) {
                        let w = CJet::variable(z0, m).scale(Complex64::new(0.0, tn)).exp();
                        acc += rf.residue_at(z0, m, Some(&w))?;
                    }
                    prof[k * xn.count + j] += Complex64::new(0.0, 1.0) * acc;
                }
            }
        }
        for j in 0..xn.count {
            let mut row: Vec<Complex64> = (0..nmodes)
                .map(|k| hat[k] * prof[k * xn.count + j])
                .collect();
            inverse.process(&mut row);
            for i in 0..nmodes {
                values[i * xn.count + j] = row[i] / nmodes as f64;
            }
        }
    } else {
        // symbol frozen at each output point: direct synthesis
        for i in 0..nmodes {
            let xp = axis.node(i);
            for (j, t) in xn.nodes().iter().enumerate() {
                let mut acc = Complex64::default();
                for (k, &xi) in freqs.iter().enumerate() {
                    let phase = Complex64::new(0.0, xi * (xp - axis.min)).exp();
                    acc += hat[k] * phase * symbol_profile(a, &[xp, *t], &[xi], *t)?;
                }
                values[i * xn.count + j] = acc / nmodes as f64;
            }
        }
    }
    GridFunction::new(spec, values)
}

/// Policy knobs of the transmission map: extension class indices, boundary
/// jet order recovered from the samples, collar resolution of the fine
/// transform grid, and the size cap that turns an unresolvable collar into a
/// typed failure instead of an silent accuracy loss.
#[derive(Debug, Clone, Copy)]
pub struct TransmissionConfig {
    pub mu: f64,
    pub nu: f64,
    pub r_exp: f64,
    pub jet_order: usize,
    /// minimum fine nodes across the first profile collar `σ₁`
    pub collar_nodes: f64,
    /// transform sizes beyond `2^max_fft_pow` are refused
    pub max_fft_pow: u32,
    /// padding (in x-units) between the data support and the periodic edge
    pub pad: f64,
}

impl Default for TransmissionConfig {
    fn default() -> Self {
        TransmissionConfig {
            mu: 2.0,
            nu: 1.0,
            r_exp: 0.51,
            jet_order: 6,
            collar_nodes: 16.0,
            max_fft_pow: 22,
            pad: 8.0,
        }
    }
}

/// The transmission map `r⁺ op(a) e⁺ f` for a half-line sample `f`, via the
/// decomposition `op(a)(f̃) − op(a)(e⁻h)`: the glued extension `f̃ = e⁺f + e⁻h`
/// is smooth, so its transform part is spectrally accurate, while the collar
/// part `e⁻h` is removed exactly by residues against the collar transform
/// `ĥ⁻(z) = ∫ e^{−isz} h(s) ds`.
pub fn transmission_apply(
    a: &FormalSum,
    f: &GridFunction,
    cfg: &TransmissionConfig,
) -> SgResult<GridFunction> {
    require_plain(a, "transmission application")?;
    if a.n != 1 {
        return Err(SgError::InvalidParameter(format!(
            "transmission application is implemented on the half-line (n = 1), got n = {}",
            a.n
        )));
    }
    if a.terms()
        .iter()
        .any(|t| t.expr.depends_on(crate::expr::Axis::X, 0))
    {
        return Err(SgError::InvalidParameter(
            "transmission application supports translation-invariant symbols; \
             spatial weights belong to the solver paths"
                .into(),
        ));
    }
    if f.spec.dim() != 1 {
        return Err(SgError::InvalidParameter(
            "transmission input lives on a one-dimensional half-line grid".into(),
        ));
    }
    let axis = f.spec.axes[0];
    if axis.min != 0.0 {
        return Err(SgError::InvalidParameter(format!(
            "half-line grid must start at the boundary x = 0, got {}",
            axis.min
        )));
    }
    if axis.count < cfg.jet_order + 4 {
        return Err(SgError::InvalidParameter(format!(
            "grid of {} nodes cannot support boundary jets of order {}",
            axis.count, cfg.jet_order
        )));
    }
    let fmax = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if fmax == 0.0 {
        return Ok(GridFunction::zeros(f.spec.clone()));
    }
    let edge = f.values[axis.count - 1].norm();
    if edge > EDGE_DECAY * fmax.max(1.0) {
        return Err(SgError::InvalidParameter(format!(
            "data must decay to a machine-negligible edge value before periodization: \
             |f| = {edge:.3e} at x = {}, max |f| = {fmax:.3e}",
            axis.max
        )));
    }

    // boundary jet from one-sided stencils, and the smallest admissible
    // seminorm constant for the growth bound |jet_k| <= B^{k+1} (k!)^mu
    let h_c = axis.step();
    let mut jets = Vec::with_capacity(cfg.jet_order + 1);
    for k in 0..=cfg.jet_order {
        let w = one_sided_weights(k, k + 3, h_c);
        let mut acc = Complex64::default();
        for (i, &wi) in w.iter().enumerate() {
            acc += f.values[i] * wi;
        }
        jets.push(acc);
    }
    let mut b = 1.0f64;
    for (k, j) in jets.iter().enumerate() {
        let kfac: f64 = (1..=k).map(|i| i as f64).product();
        b = b.max((j.norm() / kfac.powf(cfg.mu)).powf(1.0 / (k as f64 + 1.0)));
    }
    let params = ExtensionParams::for_source(cfg.mu, cfg.nu, b, cfg.r_exp, 12)?;
    let sigma1 = params.sigma(1);
    let jet = BoundaryJet::scalar(b, jets.clone())?;
    jet.check_growth(cfg.mu)?;
    let fam = DzanasijaFamily::new(params)?;

    // fine grid: Δ = h_c / 2^r resolving the collar, x = 0 on a node
    let refine = ((h_c * cfg.collar_nodes / sigma1).log2().ceil().max(0.0)) as u32;
    let stride = 1usize << refine;
    let dx = h_c / stride as f64;
    let wanted = (2.0 * (axis.max + cfg.pad) / dx).ceil() as usize;
    let nfft = wanted.next_power_of_two();
    if nfft > (1usize << cfg.max_fft_pow) {
        return Err(SgError::ExtensionFailure(format!(
            "collar σ₁ = {sigma1:.3e} needs a transform of {nfft} points \
             (cap 2^{}): the boundary jet forces an unresolvable profile scale",
            cfg.max_fft_pow
        )));
    }
    let half = nfft / 2;

    // interpolation tables: 8-node Lagrange weights per (stencil position,
    // fractional offset)
    let dimless: Vec<f64> = (0..8).map(|i| i as f64).collect();
    let mut tables: Vec<Vec<Vec<f64>>> = Vec::with_capacity(8);
    for pos in 0..8 {
        let mut per_q = Vec::with_capacity(stride);
        for q in 0..stride {
            let z = pos as f64 + q as f64 / stride as f64;
            per_q.push(fd_weights(z, &dimless, 0).swap_remove(0));
        }
        tables.push(per_q);
    }

    let collar_span = (sigma1 / dx).ceil() as usize + 1;
    let mut h_collar = vec![Complex64::default(); collar_span + 1];
    for (m, slot) in h_collar.iter_mut().enumerate() {
        let t = -(m as f64) * dx;
        if t <= -sigma1 {
            continue;
        }
        let mut acc = Complex64::default();
        let mut tk = 1.0;
        for (k, jv) in jets.iter().enumerate() {
            if k > 0 {
                tk *= t;
            }
            let kfac: f64 = (1..=k).map(|i| i as f64).product();
            let ak = fam.a(k, t)?;
            if ak != 0.0 {
                acc += jv * (ak * tk / kfac);
            }
        }
        *slot = acc;
    }

    let mut buf = vec![Complex64::default(); nfft];
    for (m, slot) in buf.iter_mut().enumerate() {
        if m > half {
            let fine = m - half;
            let cell = fine / stride;
            let q = fine % stride;
            if cell >= axis.count - 1 {
                if q == 0 && cell == axis.count - 1 {
                    *slot = f.values[cell];
                }
                continue; // beyond the data: decayed to ~0
            }
            if q == 0 {
                *slot = f.values[cell];
            } else {
                let base = cell.saturating_sub(3).min(axis.count - 8);
                let w = &tables[cell - base][q];
                let mut acc = Complex64::default();
                for (i, &wi) in w.iter().enumerate() {
                    acc += f.values[base + i] * wi;
                }
                *slot = acc;
            }
        } else if m == half {
            *slot = f.values[0];
        } else {
            let back = half - m;
            if back < h_collar.len() {
                *slot = h_collar[back];
            }
        }
    }

    // spectral application of the (x-free) symbol on the smooth glue
    let mut rfs = Vec::with_capacity(a.len());
    for t in a.terms() {
        let rf = extract_ratfn(&t.expr, 1, &[0.0], &[])?;
        guard_real_poles(&rf)?;
        if !rf.poles()?.is_empty() && rf.degree() > -1 {
            return Err(SgError::DegreeTooHigh {
                degree: rf.degree(),
            });
        }
        rfs.push(rf);
    }
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(nfft).process(&mut buf);
    for (k, &xi) in dft_freqs(nfft, dx).iter().enumerate() {
        let mut s = Complex64::default();
        for rf in &rfs {
            s += rf.eval(Complex64::new(xi, 0.0))?;
        }
        buf[k] *= s;
    }
    planner.plan_fft_inverse(nfft).process(&mut buf);

    // collar correction by residues: weight e^{i x z} · ĥ⁻(z) per pole
    let hhat_jet = |z0: Complex64, mlt: usize| -> SgResult<CJet> {
        let mut coeffs = Vec::with_capacity(mlt);
        let mut qfac = 1.0f64;
        for q in 0..mlt {
            if q > 0 {
                qfac *= q as f64;
            }
            let val = integrate_real(
                &|s: f64| {
                    let mut acc = Complex64::default();
                    let mut tk = 1.0;
                    for (k, jv) in jets.iter().enumerate() {
                        if k > 0 {
                            tk *= s;
                        }
                        let kfac: f64 = (1..=k).map(|i| i as f64).product();
                        let ak = fam.a(k, s)?;
                        if ak != 0.0 {
                            acc += jv * (ak * tk / kfac);
                        }
                    }
                    Ok(acc * (Complex64::new(0.0, -s) ).powu(q as u32)
                        * (Complex64::new(0.0, -1.0) * z0 * s).exp())
                },
                -sigma1,
                0.0,
                1e-13 * (1.0 + fmax) * sigma1,
            )?;
            coeffs.push(val / qfac);
        }
        Ok(CJet { c: coeffs })
    };
    let mut pole_jets: Vec<Vec<(Complex64, usize, CJet)>> = Vec::with_capacity(rfs.len());
    for rf in &rfs {
        let mut per = Vec::new();
        for (z0, mlt) in rf.poles()? {
            if z0.im > 0.0 {
                per.push((z0, mlt, hhat_jet(z0, mlt)?));
            }
        }
        pole_jets.push(per);
    }

    let mut out = Vec::with_capacity(axis.count);
    for i in 0..axis.count {
        let x = axis.node(i);
        let spectral = buf[half + i * stride] / nfft as f64;
        let mut corr = Complex64::default();
        for (rf, per) in rfs.iter().zip(&pole_jets) {
            corr += rf.upper_residue_sum(|z0, mlt| {
                let cached = per
                    .iter()
                    .find(|(z, m, _)| (z - z0).norm() <= 1e-9 * (1.0 + z0.norm()) && *m == mlt)
                    .map(|(_, _, j)| j.clone());
                let hj = match cached {
                    Some(j) => j,
                    None => hhat_jet(z0, mlt)?,
                };
                let ew = CJet::variable(z0, mlt).scale(Complex64::new(0.0, x)).exp();
                Ok(Some(ew.mul(&hj)))
            })?;
        }
        out.push(spectral - corr);
    }
    GridFunction::new(f.spec.clone(), out)
}
