//! Configuration for the verification pipeline and the CLI.
//!
//! Every threshold a report checks against is carried here and echoed into
//! the report, so pass flags are recomputable from the stored numbers and
//! no check site hard-codes a tolerance. Defaults pin the documented
//! contract values; problem files may override any subset through an
//! embedded `config` object.

use crate::error::{SgError, SgResult};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    /// Seed for the randomized ray directions of the sweep grids.
    pub seed: u64,
    /// Radial range of the margin sweeps.
    pub r_min: f64,
    pub r_max: f64,
    /// Radial and angular resolution of the margin sweeps.
    pub radii: usize,
    pub rays: usize,
    /// SG-ellipticity margin threshold.
    pub elliptic_c_min: f64,
    /// Lopatinski–Shapiro determinant threshold.
    pub ls_c_min: f64,
    /// Boundary-system smallest-singular-value threshold.
    pub left_c_min: f64,
    /// Number of parametrix terms behind the boundary system.
    pub parametrix_terms: usize,
    /// Excision radius of the parametrix formal sum.
    pub excision_radius: f64,
    /// Half-line solve domain `[0, halfline_length]` and its node count.
    pub halfline_length: f64,
    pub halfline_count: usize,
    /// Tangential periodic grid of the half-plane solve: left end, step,
    /// node count (the right end stops one step short of the period).
    pub tangential_min: f64,
    pub tangential_step: f64,
    pub tangential_count: usize,
    /// Normal axis of the half-plane solve: `[0, normal_length]`.
    pub normal_length: f64,
    pub normal_count: usize,
    /// Decay-regression window and pass thresholds; the fitted exponent is
    /// `p = 1/ν` of the problem.
    pub decay_window: (f64, f64),
    pub decay_eps_min: f64,
    pub decay_residual_max: f64,
    /// Seminorm-regression derivative/weight ranges.
    pub seminorm_alpha_max: usize,
    pub seminorm_beta_max: usize,
    /// Fitted class indices must stay within `θ + seminorm_slack`.
    pub seminorm_slack: f64,
    /// Target Gevrey order θ; `0` derives it from the problem (θ = ν).
    pub theta: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            seed: 7,
            r_min: 1.0,
            r_max: 1e3,
            radii: 16,
            rays: 16,
            elliptic_c_min: crate::ellipticity::DEFAULT_ELLIPTIC_CMIN,
            ls_c_min: crate::ellipticity::DEFAULT_LS_CMIN,
            left_c_min: crate::boundary::DEFAULT_LEFT_CMIN,
            parametrix_terms: 3,
            excision_radius: 2.0,
            halfline_length: 20.0,
            halfline_count: 801,
            tangential_min: -12.0,
            tangential_step: 0.375,
            tangential_count: 64,
            normal_length: 10.0,
            normal_count: 501,
            decay_window: (2.0, 8.0),
            decay_eps_min: 0.0,
            decay_residual_max: 0.1,
            seminorm_alpha_max: 8,
            seminorm_beta_max: 6,
            seminorm_slack: 0.5,
            theta: 0.0,
        }
    }
}

impl VerifyConfig {
    /// Overlay a JSON `config` object (or nothing) onto the defaults.
    pub fn overlaid(v: Option<&serde_json::Value>) -> SgResult<Self> {
        match v {
            None => Ok(Self::default()),
            Some(val) => serde_json::from_value(val.clone())
                .map_err(|e| SgError::Json(format!("bad config object: {e}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overlay_keeps_unmentioned_defaults() {
        let v = serde_json::json!({ "seed": 11, "decay_eps_min": 0.8 });
        let c = VerifyConfig::overlaid(Some(&v)).unwrap();
        assert_eq!(c.seed, 11);
        assert_eq!(c.decay_eps_min, 0.8);
        assert_eq!(c.halfline_length, VerifyConfig::default().halfline_length);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let v = serde_json::json!({ "sede": 11 });
        assert!(VerifyConfig::overlaid(Some(&v)).is_err());
    }

    #[test]
    fn round_trips_through_json() {
        let c = VerifyConfig::default();
        let v = serde_json::to_value(&c).unwrap();
        let back: VerifyConfig = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }
}
