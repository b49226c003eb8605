use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every check in the crate.
///
/// * `eps_rank` - relative threshold for rank decisions, collinearity and
///   membership of a covector in a subspace.
/// * `eps_residual` - relative threshold for the vee-condition and WDVV residuals.
/// * `eps_regular` - minimal `|a(x)| / (|a| |x|)` accepted for a sample point.
/// * `rng_seed` - seed for every randomized routine.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    pub eps_rank: f64,
    pub eps_residual: f64,
    pub eps_regular: f64,
    pub rng_seed: u64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self {
            eps_rank: 1e-9,
            eps_residual: 1e-8,
            // The chamber of E_8 has inradius ~0.028 in this measure, so 0.05 is unreachable there.
            eps_regular: 0.01,
            rng_seed: 0,
        }
    }
}

impl TolerancePolicy {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn is_valid(&self) -> bool {
        self.eps_rank > 0.0 && self.eps_residual > 0.0 && self.eps_regular > 0.0
    }
}
