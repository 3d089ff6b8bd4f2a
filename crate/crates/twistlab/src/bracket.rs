//! Angle functions, tangent cocycles, Poisson brackets of the pair
//! (theta_{b_i}, theta_{d_i}) and the closed-form bracket-zero condition
//! along b_i-orbits.
//!
//! With the representative normalized so that the holonomy of b_i fixes i,
//! writing the canonical lifts phi(c_{i+2})^{-1} = (a b; c d) and
//! phi(c_{i+1})^{-1} = (x y; z w), the bracket vanishes at flow time t iff
//! cos(2t) * P = sin(2t) * Q with
//!     P = (a-d)(y+z) - (b+c)(x-w),
//!     Q = (x-w)(d-a) - (b+c)(y+z),
//! so a non-degenerate orbit carries exactly two zeros, pi/2 apart.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::construct::{polytope_contains, ActionCoords, AngleVector};
use crate::dynamics::twist_flow;
use crate::error::{Result, TwistError};
use crate::hyp2::{
    ad, fixed_point, trace_mul, GroupElement, HPoint, LieVector, XI,
};
use crate::surface::{curve_angle, curve_word, holonomy, moment_map, ChainCurve, ChainRep, Word};

/// Below this bracket magnitude a twisted bracket counts as zero.
pub const TOL_E: f64 = 1e-7;
/// Default twist range probed by the set-E membership test.
pub const DEFAULT_M_MAX: i64 = 8;
/// Fixed-point normalization tolerance required by the cocycle formulas.
const TOL_NORMALIZED: f64 = 1e-8;
/// Central finite-difference step for bracket estimates.
const FD_STEP: f64 = 1e-5;

/// Tangent vector to the representation variety as a cocycle on generators,
/// extended to words by v(xy) = v(x) + Ad(phi(x)) v(y).
#[derive(Debug, Clone, PartialEq)]
pub struct TangentCocycle {
    pub values: Vec<LieVector>,
}

/// Zero scan of {theta_{b_i}, theta_{d_i}} along a b_i-orbit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BracketScan {
    /// Chain curve index.
    pub i: usize,
    /// Grid times in [0, pi); empty when only roots were requested.
    pub ts: Vec<f64>,
    /// Closed-form residual cos(2t) P - sin(2t) Q at the grid times.
    pub residuals: Vec<f64>,
    /// Finite-difference bracket along the orbit at the grid times.
    pub fd_values: Vec<f64>,
    /// Roots in [0, pi), at most two, pi/2 apart when both exist.
    pub zeros: Vec<f64>,
}

/// Rotation angle of the curve holonomy; errors on non-elliptic input.
pub fn angle_fn(rep: &ChainRep, c: &ChainCurve) -> Result<f64> {
    curve_angle(rep, c)
}

/// Evaluates a cocycle on a word via the cocycle rule, with
/// v(x^{-1}) = -Ad(phi(x)^{-1}) v(x) for inverse letters.
pub fn cocycle_eval(rep: &ChainRep, v: &TangentCocycle, w: &Word) -> LieVector {
    let mut acc = LieVector::zero();
    let mut prefix = GroupElement::identity();
    for &(i, e) in &w.0 {
        let g = rep.gen(i);
        let letter = if e >= 0 {
            v.values[i - 1]
        } else {
            ad(&g.inverse(), &v.values[i - 1]).scale(-1.0)
        };
        acc = acc.add(&ad(&prefix, &letter));
        prefix = if e >= 0 {
            prefix.mul(g)
        } else {
            prefix.mul(&g.inverse())
        };
    }
    acc
}

fn require_normalized(rep: &ChainRep, i: usize) -> Result<()> {
    let b = holonomy(rep, &ChainCurve::B(i))?;
    let p = fixed_point(&b)?;
    if p.dist_euclid(&HPoint::i()) > TOL_NORMALIZED {
        return Err(TwistError::NotNormalized);
    }
    Ok(())
}

/// Cocycle of the Hamiltonian vector field of theta_{b_i}: zero on the first
/// i+1 generators, Xi - Ad(phi(c_j)) Xi on the rest. Requires the
/// representative normalized at b_i.
pub fn hamiltonian_cocycle_b(rep: &ChainRep, i: usize) -> Result<TangentCocycle> {
    require_normalized(rep, i)?;
    let values = (1..=rep.n)
        .map(|j| {
            if j <= i + 1 {
                LieVector::zero()
            } else {
                XI.sub(&ad(rep.gen(j), &XI))
            }
        })
        .collect();
    Ok(TangentCocycle { values })
}

/// Coboundary cocycle v(c_j) = xi - Ad(phi(c_j)) xi; represents the trivial
/// tangent direction of conjugation by exp(t xi).
pub fn coboundary_cocycle(rep: &ChainRep, xi: &LieVector) -> TangentCocycle {
    TangentCocycle {
        values: (1..=rep.n)
            .map(|j| xi.sub(&ad(rep.gen(j), xi)))
            .collect(),
    }
}

/// trace(phi(a) v(a)) for the canonical lift: zero iff the directional
/// derivative of theta_a along [v] vanishes. The sign is lift-dependent,
/// the zero set is not.
pub fn differential_zero_test(rep: &ChainRep, c: &ChainCurve, v: &TangentCocycle) -> Result<f64> {
    let h = holonomy(rep, c)?;
    if !crate::hyp2::is_elliptic(&h) {
        return Err(TwistError::NotElliptic);
    }
    let w = curve_word(c)?;
    let va = cocycle_eval(rep, v, &w);
    Ok(trace_mul(&h, &va))
}

/// Central finite difference of theta_{d_i} along the b_i flow:
/// {theta_{b_i}, theta_{d_i}} up to the symplectic normalization.
pub fn poisson_bracket_fd(rep: &ChainRep, i: usize) -> Result<f64> {
    let plus = twist_flow(rep, &ChainCurve::B(i), FD_STEP)?;
    let minus = twist_flow(rep, &ChainCurve::B(i), -FD_STEP)?;
    let a = curve_angle(&plus, &ChainCurve::D(i))?;
    let b = curve_angle(&minus, &ChainCurve::D(i))?;
    Ok((a - b) / (2.0 * FD_STEP))
}

/// The (P, Q) pair of the closed-form zero condition; requires the
/// representative normalized at b_i.
pub fn bracket_pq(rep: &ChainRep, i: usize) -> Result<(f64, f64)> {
    require_normalized(rep, i)?;
    let m_a = rep.gen(i + 2).inverse().canonicalize();
    let m_x = rep.gen(i + 1).inverse().canonicalize();
    let (a, b, c, d) = (m_a.m11, m_a.m12, m_a.m21, m_a.m22);
    let (x, y, z, w) = (m_x.m11, m_x.m12, m_x.m21, m_x.m22);
    let p = (a - d) * (y + z) - (b + c) * (x - w);
    let q = (x - w) * (d - a) - (b + c) * (y + z);
    Ok((p, q))
}

/// Residual cos(2t) P - sin(2t) Q: zero iff {theta_{b_i}, theta_{d_i}}
/// vanishes at flow time t along the b_i-orbit.
pub fn bracket_zero_residual(rep: &ChainRep, i: usize, t: f64) -> Result<f64> {
    let (p, q) = bracket_pq(rep, i)?;
    Ok((2.0 * t).cos() * p - (2.0 * t).sin() * q)
}

fn angle_vector_of(rep: &ChainRep) -> Result<AngleVector> {
    AngleVector::new(rep.alpha.clone())
}

fn require_interior(rep: &ChainRep, margin: f64) -> Result<()> {
    let alpha = angle_vector_of(rep)?;
    let x = ActionCoords(moment_map(rep)?);
    if !polytope_contains(&alpha, &x, margin)? {
        return Err(TwistError::PolytopeViolation);
    }
    Ok(())
}

/// Closed-form roots of the bracket along the b_i-orbit through `rep`.
///
/// The representative is normalized internally. A degenerate pair P = Q = 0
/// means the bracket vanishes along the whole orbit; on the open polytope
/// interior this contradicts the two-zero bound and is reported as an error
/// naming the commutation case responsible.
pub fn find_bracket_zeros(rep: &ChainRep, i: usize) -> Result<BracketScan> {
    require_interior(rep, 1e-6)?;
    let norm = crate::surface::normalize_at(rep, &ChainCurve::B(i))?;
    let (p, q) = bracket_pq(&norm, i)?;
    let scale = norm.gen(i + 1).trace().abs().max(1.0);
    if p.hypot(q) < 1e-10 * scale {
        let m_a = norm.gen(i + 2).inverse().canonicalize();
        let case = if (m_a.m11 - m_a.m22).abs() < 1e-8 && (m_a.m12 + m_a.m21).abs() < 1e-8 {
            "a=d and b=-c"
        } else {
            "x=w and y=-z"
        };
        return Err(TwistError::DegenerateOrbit { case: case.into() });
    }
    let mut t0 = 0.5 * p.atan2(q);
    t0 = t0.rem_euclid(PI / 2.0);
    Ok(BracketScan {
        i,
        ts: Vec::new(),
        residuals: Vec::new(),
        fd_values: Vec::new(),
        zeros: vec![t0, t0 + PI / 2.0],
    })
}

/// Full grid scan: closed-form residual and finite-difference bracket on a
/// uniform t-grid over [0, pi), plus the closed-form roots.
pub fn bracket_scan(rep: &ChainRep, i: usize, grid: usize) -> Result<BracketScan> {
    let mut scan = find_bracket_zeros(rep, i)?;
    let norm = crate::surface::normalize_at(rep, &ChainCurve::B(i))?;
    for k in 0..grid {
        let t = PI * k as f64 / grid as f64;
        scan.ts.push(t);
        scan.residuals.push(bracket_zero_residual(&norm, i, t)?);
        let at_t = twist_flow(&norm, &ChainCurve::B(i), t)?;
        scan.fd_values.push(poisson_bracket_fd(&at_t, i)?);
    }
    Ok(scan)
}

/// Membership in the set E: true iff some twisted bracket
/// {theta_{b_i}, theta_{(tau_{b_i})^m d_i}} with |m| <= m_max is nonzero.
/// Evaluated along the orbit: the m-fold twist is the flow at m theta_b / 2.
pub fn in_e(rep: &ChainRep, i: usize, m_max: i64) -> Result<bool> {
    require_interior(rep, 1e-6)?;
    let norm = crate::surface::normalize_at(rep, &ChainCurve::B(i))?;
    let theta_b = angle_fn(&norm, &ChainCurve::B(i))?;
    for m in -m_max..=m_max {
        let t = m as f64 * theta_b / 2.0;
        if bracket_zero_residual(&norm, i, t)?.abs() > TOL_E {
            return Ok(true);
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_rep, random_dt_rep, ActionCoords, AngleVector};
    use crate::dynamics::dehn_twist_power;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn rep4() -> ChainRep {
        let alpha = AngleVector::new(vec![7.0 * PI / 4.0; 4]).unwrap();
        build_rep(&alpha, &ActionCoords(vec![1.1 * PI]), &[0.7]).unwrap()
    }

    #[test]
    fn angle_fn_matches_invariants() {
        let rep = rep4();
        assert_abs_diff_eq!(
            angle_fn(&rep, &ChainCurve::Peripheral(2)).unwrap(),
            7.0 * PI / 4.0,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            angle_fn(&rep, &ChainCurve::B(1)).unwrap(),
            1.1 * PI,
            epsilon = 1e-8
        );
        // pushforward identity for twisted curves
        let lhs = angle_fn(&rep, &ChainCurve::TwistedD(1, 3)).unwrap();
        let rhs = angle_fn(
            &dehn_twist_power(&rep, &ChainCurve::B(1), 3).unwrap(),
            &ChainCurve::D(1),
        )
        .unwrap();
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-9);
    }

    #[test]
    fn cocycle_eval_rule() {
        let rep = rep4();
        let mut rng = rand::rng();
        let v = TangentCocycle {
            values: (0..4)
                .map(|_| LieVector {
                    m11: rng.random_range(-1.0..1.0),
                    m12: rng.random_range(-1.0..1.0),
                    m21: rng.random_range(-1.0..1.0),
                })
                .collect(),
        };
        // v(c1 c1) = v(c1) + Ad(phi(c1)) v(c1)
        let w = Word(vec![(1, 1), (1, 1)]);
        let got = cocycle_eval(&rep, &v, &w);
        let expected = v.values[0].add(&ad(rep.gen(1), &v.values[0]));
        assert_abs_diff_eq!(got.m11, expected.m11, epsilon = 1e-12);
        assert_abs_diff_eq!(got.m12, expected.m12, epsilon = 1e-12);
        assert_abs_diff_eq!(got.m21, expected.m21, epsilon = 1e-12);
        // empty word evaluates to zero
        assert_eq!(cocycle_eval(&rep, &v, &Word::empty()), LieVector::zero());
        // inverse rule: v(x x^{-1}) = 0
        let winv = Word(vec![(2, 1), (2, -1)]);
        assert!(cocycle_eval(&rep, &v, &winv).norm() < 1e-12);
    }

    #[test]
    fn hamiltonian_cocycle_on_d_curve() {
        let rep = crate::surface::normalize_at(&rep4(), &ChainCurve::B(1)).unwrap();
        let v = hamiltonian_cocycle_b(&rep, 1).unwrap();
        assert_eq!(v.values[0], LieVector::zero());
        assert_eq!(v.values[1], LieVector::zero());
        // evaluated on d_1 the cocycle is Xi - Ad(phi(c_3^{-1})) Xi
        let got = cocycle_eval(&rep, &v, &curve_word(&ChainCurve::D(1)).unwrap());
        let expected = XI.sub(&ad(&rep.gen(3).inverse(), &XI));
        assert!(got.sub(&expected).norm() < 1e-10);
    }

    #[test]
    fn hamiltonian_cocycle_requires_normalization() {
        let rep = rep4();
        assert!(matches!(
            hamiltonian_cocycle_b(&rep, 1),
            Err(TwistError::NotNormalized)
        ));
    }

    #[test]
    fn self_conservation_and_coboundary_annihilation() {
        let rep = crate::surface::normalize_at(&rep4(), &ChainCurve::B(1)).unwrap();
        let v = hamiltonian_cocycle_b(&rep, 1).unwrap();
        // theta_{b_1} conserved along its own flow
        let val = differential_zero_test(&rep, &ChainCurve::B(1), &v).unwrap();
        assert!(val.abs() < 1e-9, "{val}");
        // coboundaries annihilate every angle differential
        let xi = LieVector {
            m11: 0.3,
            m12: -0.8,
            m21: 1.1,
        };
        let cob = coboundary_cocycle(&rep, &xi);
        for c in [
            ChainCurve::Peripheral(1),
            ChainCurve::Peripheral(3),
            ChainCurve::B(1),
            ChainCurve::D(1),
        ] {
            let val = differential_zero_test(&rep, &c, &cob).unwrap();
            assert!(val.abs() < 1e-9, "curve {c}: {val}");
        }
    }

    #[test]
    fn residual_phase_structure() {
        let norm = crate::surface::normalize_at(&rep4(), &ChainCurve::B(1)).unwrap();
        // residual(t + pi/2) = -residual(t)
        for &t in &[0.0, 0.3, 1.2, 2.8] {
            let r1 = bracket_zero_residual(&norm, 1, t).unwrap();
            let r2 = bracket_zero_residual(&norm, 1, t + PI / 2.0).unwrap();
            assert_abs_diff_eq!(r1, -r2, epsilon = 1e-10);
        }
        // t = 0 residual matches the trace condition
        let c3inv = norm.gen(3).inverse();
        let c2inv = norm.gen(2).inverse();
        let lhs = trace_xi_prod(&c3inv, &c2inv);
        let rhs = trace_xi_prod(&c2inv, &c3inv);
        let r0 = bracket_zero_residual(&norm, 1, 0.0).unwrap();
        assert_abs_diff_eq!(r0, rhs - lhs, epsilon = 1e-9);
    }

    // trace(Xi * g * h) on the literal canonical-lift product, without the
    // PSL sign renormalization mul() would apply
    fn trace_xi_prod(g: &GroupElement, h: &GroupElement) -> f64 {
        let g = g.canonicalize();
        let h = h.canonicalize();
        let p21 = g.m21 * h.m11 + g.m22 * h.m21;
        let p12 = g.m11 * h.m12 + g.m12 * h.m22;
        p21 - p12
    }

    #[test]
    fn zeros_match_fd_sign_changes() {
        let alpha = AngleVector::new(vec![1.92 * PI, 1.88 * PI, 1.95 * PI, 1.9 * PI]).unwrap();
        let rep = random_dt_rep(&alpha, 17).unwrap();
        let scan = find_bracket_zeros(&rep, 1).unwrap();
        assert_eq!(scan.zeros.len(), 2);
        assert_abs_diff_eq!(scan.zeros[1] - scan.zeros[0], PI / 2.0, epsilon = 1e-12);
        let norm = crate::surface::normalize_at(&rep, &ChainCurve::B(1)).unwrap();
        for &z in &scan.zeros {
            let delta = 1e-5;
            let lo = poisson_bracket_fd(
                &twist_flow(&norm, &ChainCurve::B(1), z - delta).unwrap(),
                1,
            )
            .unwrap();
            let hi = poisson_bracket_fd(
                &twist_flow(&norm, &ChainCurve::B(1), z + delta).unwrap(),
                1,
            )
            .unwrap();
            assert!(lo * hi < 0.0, "no sign change around root {z}: {lo} {hi}");
        }
    }

    #[test]
    fn fd_bracket_cross_derivatives() {
        let rep = rep4();
        let fd_bd = poisson_bracket_fd(&rep, 1).unwrap();
        // derivative of theta_b along the d-flow; the d-flow rotates the
        // block on the opposite side of its curve from the b-flow's block,
        // which absorbs the sign of Poisson antisymmetry: the two cross
        // derivatives coincide.
        let h = 1e-5;
        let plus = twist_flow(&rep, &ChainCurve::D(1), h).unwrap();
        let minus = twist_flow(&rep, &ChainCurve::D(1), -h).unwrap();
        let fd_db = (curve_angle(&plus, &ChainCurve::B(1)).unwrap()
            - curve_angle(&minus, &ChainCurve::B(1)).unwrap())
            / (2.0 * h);
        assert_abs_diff_eq!(fd_db, fd_bd, epsilon = 1e-4);
    }

    #[test]
    fn in_e_m0_equals_bracket_nonvanishing() {
        let alpha = AngleVector::new(vec![1.9 * PI, 1.85 * PI, 1.92 * PI, 1.95 * PI]).unwrap();
        let rep = random_dt_rep(&alpha, 23).unwrap();
        let norm = crate::surface::normalize_at(&rep, &ChainCurve::B(1)).unwrap();
        let r0 = bracket_zero_residual(&norm, 1, 0.0).unwrap();
        assert_eq!(in_e(&rep, 1, 0).unwrap(), r0.abs() > TOL_E);
        // generic reps are in E already for small m
        assert!(in_e(&rep, 1, 2).unwrap());
    }
}
