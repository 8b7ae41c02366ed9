//! Numerical thresholds and resource limits.

use serde::{Deserialize, Serialize};

/// Entrywise Hermiticity tolerance.
pub const HERMITIAN: f64 = 1e-10;
/// Trace, norm and minimum-eigenvalue tolerance for states.
pub const STATE: f64 = 1e-10;
/// Eigenvalues below this are dropped from entropy sums.
pub const EIGEN_CLIP: f64 = 1e-12;
/// Kraus operators with smaller Frobenius norm are discarded.
pub const KRAUS_TRIM: f64 = 1e-12;
/// Allowed deviation of `sum K^dagger K` from the identity.
pub const TRACE_PRESERVING: f64 = 1e-10;
/// Relative singular-value threshold for every span computation.
pub const RANK_RELATIVE: f64 = 1e-9;
/// Absolute singular-value threshold for operator Schmidt ranks.
pub const SCHMIDT: f64 = 1e-9;

/// Default cap on the number of complex amplitudes held by one object.
pub const DEFAULT_MAX_AMPLITUDES: u64 = 1 << 24;

/// Tolerances used by the algebraic checks. Defaults are the pinned values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Span containment and equality.
    pub span: f64,
    /// Conditional-expectation fixed-point residuals.
    pub expectation: f64,
    /// Least-squares residual of the logical-operator system.
    pub logical: f64,
    /// Entropy-identity residuals of the saturation conditions.
    pub saturation: f64,
    /// A CMI above this counts as positive.
    pub cmi_positive: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            span: 1e-8,
            expectation: 1e-9,
            logical: 1e-8,
            saturation: 1e-8,
            cmi_positive: 1e-9,
        }
    }
}

/// Resource limits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    pub max_amplitudes: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_amplitudes: DEFAULT_MAX_AMPLITUDES,
        }
    }
}

impl Caps {
    pub fn unlimited() -> Self {
        Caps {
            max_amplitudes: u64::MAX,
        }
    }

    /// Fails with a resource-cap error when `amplitudes` exceeds the cap.
    pub fn check(&self, what: &str, amplitudes: u128) -> crate::Result<()> {
        if amplitudes > self.max_amplitudes as u128 {
            return Err(crate::LabError::cap(
                what,
                amplitudes,
                self.max_amplitudes as u128,
            ));
        }
        Ok(())
    }
}
