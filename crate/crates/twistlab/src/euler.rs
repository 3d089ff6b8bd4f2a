//! Relative Euler class and volume via pants-decomposition bookkeeping.
//!
//! Volume obeys vol = 2*pi*k - sum(angles) and is additive over the chain
//! pants decomposition; each supra-maximal pants contributes k = 2 and each
//! k = 1 pants contributes 1, constrained by the n = 3 dichotomy.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TwistError};
use crate::hyp2::{rotation_angle, GroupElement};
use crate::surface::{curve_angle, holonomy, ChainCurve, ChainRep};

/// Tolerance on the dichotomy gap between angle sums 2pi and 4pi.
pub const TOL_DICHOTOMY: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeReport {
    /// Relative Euler class.
    pub k: i64,
    /// vol = 2*pi*k - sum of peripheral angles.
    pub vol: f64,
    /// Euler class of each pants in the chain decomposition.
    pub per_pants_k: Vec<i64>,
}

/// Euler class of an elliptic triple with product identity: 1 when the
/// rotation angles sum to at most 2pi, 2 when they sum to at least 4pi.
pub fn pants_euler_class(a1: &GroupElement, a2: &GroupElement, a3: &GroupElement) -> Result<i64> {
    if !a1.mul(a2).mul(a3).is_identity(1e-8) {
        return Err(TwistError::InvalidInput(
            "pants triple product is not the identity".into(),
        ));
    }
    let sum = rotation_angle(a1)? + rotation_angle(a2)? + rotation_angle(a3)?;
    if sum <= 2.0 * PI + TOL_DICHOTOMY {
        Ok(1)
    } else if sum >= 4.0 * PI - TOL_DICHOTOMY {
        Ok(2)
    } else {
        Err(TwistError::DichotomyViolated { sum })
    }
}

/// Relative Euler class and volume of a chain representation, computed by
/// cutting along b_1, ..., b_{n-3} and summing per-pants contributions.
pub fn relative_euler_class(rep: &ChainRep) -> Result<VolumeReport> {
    let n = rep.n;
    let dim = rep.moment_dim();
    let mut per_pants_k = Vec::with_capacity(dim + 1);
    let mut vol = 0.0;

    // Boundary angle triples of the chain pants; x_i = theta(b_i).
    let mut x = Vec::with_capacity(dim);
    for i in 1..=dim {
        x.push(curve_angle(rep, &ChainCurve::B(i)).map_err(|_| {
            TwistError::NotTotallyElliptic {
                curve: ChainCurve::B(i).to_string(),
            }
        })?);
    }
    let alpha: Vec<f64> = (1..=n)
        .map(|i| curve_angle(rep, &ChainCurve::Peripheral(i)))
        .collect::<Result<_>>()?;

    let mut triples: Vec<[f64; 3]> = Vec::with_capacity(dim + 1);
    if dim == 0 {
        triples.push([alpha[0], alpha[1], alpha[2]]);
    } else {
        triples.push([alpha[0], alpha[1], x[0]]);
        for j in 2..=dim {
            triples.push([2.0 * PI - x[j - 2], alpha[j], x[j - 1]]);
        }
        triples.push([2.0 * PI - x[dim - 1], alpha[n - 2], alpha[n - 1]]);
    }

    for t in &triples {
        let sum: f64 = t.iter().sum();
        let k = if sum <= 2.0 * PI + TOL_DICHOTOMY {
            1
        } else if sum >= 4.0 * PI - TOL_DICHOTOMY {
            2
        } else {
            return Err(TwistError::DichotomyViolated { sum });
        };
        per_pants_k.push(k);
        vol += 2.0 * PI * k as f64 - sum;
    }

    let k = per_pants_k.iter().sum::<i64>() - dim as i64;
    // cross-check the additive volume against 2*pi*k - sum(alpha)
    let direct = 2.0 * PI * k as f64 - alpha.iter().sum::<f64>();
    if (vol - direct).abs() > 1e-8 {
        return Err(TwistError::NumericalFailure(format!(
            "volume bookkeeping mismatch: {vol} vs {direct}"
        )));
    }
    Ok(VolumeReport {
        k,
        vol,
        per_pants_k,
    })
}

/// Convenience: volume of a chain representation.
pub fn volume(rep: &ChainRep) -> Result<f64> {
    Ok(relative_euler_class(rep)?.vol)
}

/// Checks that every b_i holonomy is elliptic before decomposition.
pub fn totally_elliptic_chain(rep: &ChainRep) -> bool {
    (1..=rep.moment_dim()).all(|i| {
        holonomy(rep, &ChainCurve::B(i))
            .map(|h| crate::hyp2::is_elliptic(&h))
            .unwrap_or(false)
    })
}
