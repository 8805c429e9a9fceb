//! Synthetic pH benchmark models.

use nalgebra::{DMatrix, DVector};
use phmor::{PhMatrices, PhSystem, Tolerances};

use serde::{Deserialize, Serialize};

use crate::error::BenchError;

/// Parameters of a mass-spring-damper chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MsdChain {
    pub n_masses: usize,
    pub mass: f64,
    pub stiffness: f64,
    /// Damping of each mass to ground.
    pub damping: f64,
}

impl Default for MsdChain {
    fn default() -> Self {
        Self {
            n_masses: 100,
            mass: 1.0,
            stiffness: 100.0,
            damping: 5.0,
        }
    }
}

/// Mass-spring-damper chain in momentum form, state `(q, p)` with
/// `N = 2 n_masses`.
///
/// The first mass is attached to a wall, the last one is free. The input
/// is a force on the first mass.
pub fn generate_msd_chain(p: &MsdChain) -> Result<PhSystem, BenchError> {
    let MsdChain {
        n_masses: m,
        mass,
        stiffness,
        damping,
    } = *p;
    if m == 0 {
        return Err(BenchError::InvalidParameter("n_masses must be at least 1".into()));
    }
    if !(mass > 0.0 && mass.is_finite()) || !(stiffness > 0.0 && stiffness.is_finite()) {
        return Err(BenchError::InvalidParameter(
            "mass and stiffness must be positive".into(),
        ));
    }
    if !(damping >= 0.0 && damping.is_finite()) {
        return Err(BenchError::InvalidParameter("damping must be nonnegative".into()));
    }
    let n = 2 * m;
    let mut j = DMatrix::zeros(n, n);
    let mut d = DMatrix::zeros(n, n);
    let mut h = DMatrix::zeros(n, n);
    for i in 0..m {
        j[(i, m + i)] = 1.0;
        j[(m + i, i)] = -1.0;
        d[(m + i, m + i)] = damping;
        h[(m + i, m + i)] = 1.0 / mass;
        h[(i, i)] = if i + 1 == m { stiffness } else { 2.0 * stiffness };
        if i + 1 < m {
            h[(i, i + 1)] = -stiffness;
            h[(i + 1, i)] = -stiffness;
        }
    }
    let mut b = DMatrix::zeros(n, 1);
    b[(m, 0)] = 1.0;
    Ok(PhSystem::from_matrices(
        PhMatrices {
            j,
            d,
            h,
            b,
            x0: DVector::zeros(n),
        },
        Tolerances::default(),
    )?)
}
