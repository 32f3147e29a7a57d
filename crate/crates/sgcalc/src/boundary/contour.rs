//! Integration contours in the complex normal covariable.
//!
//! Three path families parameterised by the excision radius `B`, the frozen
//! tangential weight `⟨ξ'⟩`, the tail index `M`, and the regularity exponent
//! `e = μ+ν−1`:
//!
//! * semicircle: `{B⟨ξ'⟩ e^{iθ} : 0 ≤ θ ≤ π}`;
//! * bridged: real segments `[B·M^e, B⟨ξ'⟩]` and `[−B⟨ξ'⟩, −B·M^e]`
//!   spliced onto the semicircle, replacing the real-line tails;
//! * clipped: upper semicircle of radius `√(B²M^{2e} − ⟨ξ'⟩²)` when that is
//!   real, otherwise the empty path.

use crate::error::{SgError, SgResult};
use crate::quad::Segment;
use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum ContourKind {
    Semicircle,
    Bridged,
    Clipped,
}

#[derive(Debug, Clone)]
pub struct ContourPath {
    pub kind: ContourKind,
    pub b: f64,
    /// frozen tangential weight ⟨ξ'⟩
    pub xi_weight: f64,
    /// tail index M (bridged/clipped only)
    pub m_tail: usize,
    /// regularity exponent μ+ν−1 (bridged/clipped only)
    pub gs_exp: f64,
    pub segments: Vec<Segment>,
}

fn check_params(b: f64, xi_weight: f64) -> SgResult<()> {
    if !(b > 0.0) || !(xi_weight >= 1.0) {
        return Err(SgError::InvalidParameter(format!(
            "contour needs B > 0 and ⟨ξ'⟩ ≥ 1, got B = {b}, ⟨ξ'⟩ = {xi_weight}"
        )));
    }
    Ok(())
}

impl ContourPath {
    /// `Γ_{ξ'}`: the upper semicircle of radius `B⟨ξ'⟩`.
    pub fn semicircle(b: f64, xi_weight: f64) -> SgResult<Self> {
        check_params(b, xi_weight)?;
        let r = b * xi_weight;
        Ok(ContourPath {
            kind: ContourKind::Semicircle,
            b,
            xi_weight,
            m_tail: 0,
            gs_exp: 0.0,
            segments: vec![Segment::Arc {
                center: Complex64::default(),
                radius: r,
                theta0: 0.0,
                theta1: std::f64::consts::PI,
            }],
        })
    }

    /// `Γ_{ξ',M}`: the semicircle with real bridges from `±B·M^e`.
    pub fn bridged(b: f64, xi_weight: f64, m_tail: usize, gs_exp: f64) -> SgResult<Self> {
        check_params(b, xi_weight)?;
        if m_tail == 0 || !(gs_exp > 0.0) {
            return Err(SgError::InvalidParameter(format!(
                "bridged contour needs M ≥ 1 and μ+ν−1 > 0, got M = {m_tail}, e = {gs_exp}"
            )));
        }
        let r = b * xi_weight;
        let inner = b * (m_tail as f64).powf(gs_exp);
        let mut segments = Vec::new();
        if (inner - r).abs() > 0.0 {
            segments.push(Segment::Line {
                from: Complex64::new(inner, 0.0),
                to: Complex64::new(r, 0.0),
            });
        }
        segments.push(Segment::Arc {
            center: Complex64::default(),
            radius: r,
            theta0: 0.0,
            theta1: std::f64::consts::PI,
        });
        if (inner - r).abs() > 0.0 {
            segments.push(Segment::Line {
                from: Complex64::new(-r, 0.0),
                to: Complex64::new(-inner, 0.0),
            });
        }
        Ok(ContourPath {
            kind: ContourKind::Bridged,
            b,
            xi_weight,
            m_tail,
            gs_exp,
            segments,
        })
    }

    /// `Γ_{(ξ'),M}`: upper semicircle clipped to total phase radius
    /// `B·M^e`; empty when `⟨ξ'⟩` already exceeds that radius.
    pub fn clipped(b: f64, xi_weight: f64, m_tail: usize, gs_exp: f64) -> SgResult<Self> {
        check_params(b, xi_weight)?;
        if m_tail == 0 || !(gs_exp > 0.0) {
            return Err(SgError::InvalidParameter(format!(
                "clipped contour needs M ≥ 1 and μ+ν−1 > 0, got M = {m_tail}, e = {gs_exp}"
            )));
        }
        let total = b * (m_tail as f64).powf(gs_exp);
        let disc = total * total - xi_weight * xi_weight;
        let segments = if disc > 0.0 {
            vec![Segment::Arc {
                center: Complex64::default(),
                radius: disc.sqrt(),
                theta0: 0.0,
                theta1: std::f64::consts::PI,
            }]
        } else {
            Vec::new()
        };
        Ok(ContourPath {
            kind: ContourKind::Clipped,
            b,
            xi_weight,
            m_tail,
            gs_exp,
            segments,
        })
    }

    /// Arc radius of the path (0 for an empty clipped path).
    pub fn radius(&self) -> f64 {
        self.segments
            .iter()
            .filter_map(|s| match s {
                Segment::Arc { radius, .. } => Some(*radius),
                _ => None,
            })
            .fold(0.0, f64::max)
    }

    /// The path closed with the real chord between its endpoints, suitable
    /// for residue comparison (counterclockwise when traversed as returned).
    pub fn closed_with_chord(&self) -> Vec<Segment> {
        let mut segs = self.segments.clone();
        if let (Some(first), Some(last)) = (segs.first(), segs.last()) {
            let start = first.start();
            let end = last.end();
            if (start - end).norm() > 0.0 {
                segs.push(Segment::Line {
                    from: end,
                    to: start,
                });
            }
        }
        segs
    }
}
