//! Crate-wide error type.
//!
//! Every fallible operation in the library returns [`SgResult`]. Variants are
//! deliberately specific: callers (the CLI, the FFI layer, tests) match on
//! them to distinguish "the input is outside the calculus" from "the numerics
//! broke down" from "the mathematical hypothesis failed".

use thiserror::Error;

pub type SgResult<T> = Result<T, SgError>;

#[derive(Debug, Clone, Error)]
pub enum SgError {
    /// Evaluation walked into a quotient whose denominator is numerically
    /// zero (|den| < 1e-14) at the given point.
    #[error("pole hit during evaluation at {location}: |denominator| = {denom_abs:.3e}")]
    PoleHit { location: String, denom_abs: f64 },

    /// A derivative or expansion order exceeded the configured cap.
    #[error("truncation cap exceeded: requested {requested}, cap {cap}")]
    TruncationCap { requested: usize, cap: usize },

    /// An expression was required to be polynomial in a variable but is not.
    #[error("expression is not polynomial in {var}: {reason}")]
    NotPolynomial { var: String, reason: String },

    /// An expression was required to be rational in the normal covariable.
    #[error("expression is not rational in the normal covariable: {0}")]
    NotRational(String),

    /// SG-ellipticity margin fell below the threshold.
    #[error("symbol is not SG-elliptic: margin {margin:.3e} < {threshold:.3e} at {witness}")]
    NotElliptic {
        margin: f64,
        threshold: f64,
        witness: String,
    },

    /// A root of the normal-variable polynomial sits on (or within the dead
    /// band around) the real axis, so the upper/lower split is ill-defined.
    #[error("real root detected in normal polynomial at {witness}: root {root_re}+{root_im}i within dead band {dead_band:.1e}")]
    RealRootDetected {
        witness: String,
        root_re: f64,
        root_im: f64,
        dead_band: f64,
    },

    /// Leading coefficient of the normal-variable polynomial vanished at a
    /// grid point, so the root count degenerates there.
    #[error("leading coefficient vanishes at {witness}: |c_N| = {abs:.3e}")]
    LeadingCoeffVanishes { witness: String, abs: f64 },

    /// The symbol failed the proper-ellipticity root split r = m1/2.
    #[error("not properly elliptic at {witness}: {upper} roots in the upper half-plane, expected {expected}")]
    NotProperlyElliptic {
        witness: String,
        upper: usize,
        expected: usize,
    },

    /// Lopatinski-Shapiro determinant fell below the threshold.
    #[error("Lopatinski-Shapiro check failed: min |det| = {min_det:.3e} < {threshold:.3e} at {witness}")]
    LopatinskiFailed {
        min_det: f64,
        threshold: f64,
        witness: String,
    },

    /// A pole of a boundary integrand lies on the real axis / the contour.
    #[error("pole on integration path at {location}: z = {re}+{im}i")]
    RealPoleOnPath { location: String, re: f64, im: f64 },

    /// The boundary integrand does not decay and carries no poles, so neither
    /// residue closure nor contour quadrature defines a finite value.
    #[error("integrand degree too high for boundary symbol: relative degree {degree} with no poles")]
    DegreeTooHigh { degree: i64 },

    /// Numerical quadrature failed (non-finite value or vanishing
    /// normalisation integral).
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// A supplied boundary jet grows faster than the declared Gevrey class
    /// allows.
    #[error("jet growth violation at order {order}: |jet| = {value:.3e} exceeds allowed {allowed:.3e}")]
    JetGrowthViolation {
        order: usize,
        value: f64,
        allowed: f64,
    },

    /// Regression fit attempted with too little data to be meaningful.
    #[error("ill-conditioned fit: {0}")]
    IllConditionedFit(String),

    /// All samples in a fit window vanished, so no rate can be fitted.
    #[error("all samples are zero (below {floor:.1e}) in the fit window {window}")]
    AllZeroWindow { floor: f64, window: String },

    /// The half-space extension could not be constructed.
    #[error("extension failure: {0}")]
    ExtensionFailure(String),

    /// A discretised operator matrix is numerically singular.
    #[error("singular discretization: {0}")]
    SingularDiscretization(String),

    /// Parameters violate a documented invariant.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The requested operation is outside the supported problem class.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Text parse error (expression prefix form or problem file).
    #[error("parse error at byte {position}: {message}")]
    Parse { position: usize, message: String },

    /// I/O error carrying the offending path.
    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    /// JSON (de)serialisation error.
    #[error("json error: {0}")]
    Json(String),
}

impl SgError {
    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        SgError::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}

impl From<serde_json::Error> for SgError {
    fn from(e: serde_json::Error) -> Self {
        SgError::Json(e.to_string())
    }
}
