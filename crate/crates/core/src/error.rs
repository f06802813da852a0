use thiserror::Error;

/// Failures raised by model computations.
///
/// Input file problems are reported separately as
/// [`ProfileError`](crate::profiles::ProfileError); this enum covers the
/// numerical side: bad argument values, poles, missing series years,
/// violated constraints and refused resource budgets.
#[derive(Debug, Error)]
pub enum ModelError {
    /// An argument lies outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation hit a pole or an otherwise undefined point.
    #[error("singularity: {0}")]
    Singularity(String),

    /// A research series lookup found no usable entry.
    ///
    /// `year` is the year that was requested from the series (already
    /// shifted by the delay when the caller asked for lagged values).
    #[error("no research series entry for year {year}: {detail}")]
    MissingYear { year: i32, detail: String },

    /// A hard constraint of an optimization problem cannot be satisfied.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// The requested computation exceeds a built-in size or work limit.
    #[error("resource limit: {0}")]
    Resource(String),

    /// Arithmetic produced a non-finite or otherwise unusable value.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl ModelError {
    pub fn domain(msg: impl Into<String>) -> Self {
        ModelError::Domain(msg.into())
    }

    pub fn singularity(msg: impl Into<String>) -> Self {
        ModelError::Singularity(msg.into())
    }

    pub fn constraint(msg: impl Into<String>) -> Self {
        ModelError::Constraint(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        ModelError::Resource(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        ModelError::Numerical(msg.into())
    }
}

/// Checks that `value` is finite, returning a domain error naming `what`.
pub(crate) fn require_finite(value: f64, what: &str) -> Result<(), ModelError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{what} must be finite, got {value}")))
    }
}

/// Checks that `value` is finite and nonnegative.
pub(crate) fn require_nonnegative(value: f64, what: &str) -> Result<(), ModelError> {
    require_finite(value, what)?;
    if value >= 0.0 {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{what} must be nonnegative, got {value}")))
    }
}

/// Checks that `value` is finite and strictly positive.
pub(crate) fn require_positive(value: f64, what: &str) -> Result<(), ModelError> {
    require_finite(value, what)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{what} must be positive, got {value}")))
    }
}

/// Checks that `value` lies in `[lo, hi]`.
pub(crate) fn require_in_range(value: f64, lo: f64, hi: f64, what: &str) -> Result<(), ModelError> {
    require_finite(value, what)?;
    if value >= lo && value <= hi {
        Ok(())
    } else {
        Err(ModelError::Domain(format!("{what} must lie in [{lo}, {hi}], got {value}")))
    }
}
