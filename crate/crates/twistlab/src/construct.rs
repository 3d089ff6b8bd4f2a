//! Constructors for Deroin-Tholozan chain representations: supra-maximal
//! pants triples realized on hyperbolic triangles, glued along the b_i
//! curves with prescribed action coordinates and twist parameters.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::twist_flow;
use crate::error::{Result, TwistError};
use crate::hyp2::{fixed_point, rotation_about, transvection_to_i, GroupElement, HPoint};
use crate::surface::{ChainCurve, ChainRep};

/// Target moment-map values x in R^{n-3}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionCoords(pub Vec<f64>);

/// Peripheral angle vector satisfying the angles condition, with its
/// scaling parameter lambda = sum(alpha) - 2pi(n-1) in (0, 2pi).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleVector {
    pub alpha: Vec<f64>,
    pub lambda: f64,
}

impl AngleVector {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        let n = alpha.len();
        if n < 3 {
            return Err(TwistError::InvalidInput(format!(
                "need at least 3 punctures, got {n}"
            )));
        }
        for &a in &alpha {
            if !(0.0 < a && a < 2.0 * PI) {
                return Err(TwistError::InvalidInput(format!(
                    "angle {a} outside (0, 2pi)"
                )));
            }
        }
        let sum: f64 = alpha.iter().sum();
        let bound = 2.0 * PI * (n as f64 - 1.0);
        if sum <= bound {
            return Err(TwistError::AnglesConditionViolated { sum, bound });
        }
        Ok(AngleVector {
            alpha,
            lambda: sum - bound,
        })
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }
}

/// Triangle chirality that makes the rotation product close up; fixed global
/// fact, computed once.
static TRIANGLE_MIRROR: OnceLock<bool> = OnceLock::new();

/// Builds a supra-maximal pants triple: three elliptic elements with product
/// identity and rotation angles beta_1, beta_2, beta_3, realized as rotations
/// about the vertices of the hyperbolic triangle with angles pi - beta_j/2.
pub fn pants_rep(
    beta1: f64,
    beta2: f64,
    beta3: f64,
) -> Result<(GroupElement, GroupElement, GroupElement)> {
    let sum = beta1 + beta2 + beta3;
    if sum <= 4.0 * PI + 1e-12 {
        return Err(TwistError::AnglesConditionViolated {
            sum,
            bound: 4.0 * PI,
        });
    }
    for &b in &[beta1, beta2, beta3] {
        if !(0.0 < b && b < 2.0 * PI) {
            return Err(TwistError::InvalidInput(format!(
                "pants angle {b} outside (0, 2pi)"
            )));
        }
    }
    let theta = [
        PI - beta1 / 2.0,
        PI - beta2 / 2.0,
        PI - beta3 / 2.0,
    ];

    // Exactly one chirality of the triangle closes the product; it does not
    // depend on the angles, so probe once with a well-conditioned triple.
    let mirror = *TRIANGLE_MIRROR.get_or_init(|| {
        let probe = [PI / 12.0; 3];
        let (a1, a2, a3) = triangle_rotations(probe, false);
        !a1.mul(&a2).mul(&a3).is_identity(1e-6)
    });
    let (a1, a2, a3) = triangle_rotations(theta, mirror);
    let prod = a1.mul(&a2).mul(&a3);
    // thin triangles have large matrix entries; closure is relative to scale
    let scale: f64 = [&a1, &a2, &a3]
        .iter()
        .map(|g| g.m11.abs().max(g.m12.abs()).max(g.m21.abs()).max(g.m22.abs()))
        .product();
    if !prod.is_identity(1e-12 * scale.max(1e3)) {
        return Err(TwistError::NumericalFailure(
            "pants triple product did not close up".into(),
        ));
    }
    Ok((a1, a2, a3))
}

/// Vertices of the hyperbolic triangle with interior angles theta, with the
/// first vertex at i and the second up the imaginary axis; the rotations
/// about each vertex by 2pi - 2*theta_j realize the prescribed angles.
fn triangle_rotations(theta: [f64; 3], mirror: bool) -> (GroupElement, GroupElement, GroupElement) {
    let (t1, t2, t3) = (theta[0], theta[1], theta[2]);
    // hyperbolic law of cosines for the side lengths (l_k opposite theta_k)
    let cosh_l3 = (t1.cos() * t2.cos() + t3.cos()) / (t1.sin() * t2.sin());
    let cosh_l2 = (t1.cos() * t3.cos() + t2.cos()) / (t1.sin() * t3.sin());
    let cosh_l1 = (t2.cos() * t3.cos() + t1.cos()) / (t2.sin() * t3.sin());
    let l3 = cosh_l3.acosh();

    let v1 = HPoint::i();
    let v2 = HPoint {
        re: 0.0,
        im: l3.exp(),
    };
    // Third vertex: intersect the hyperbolic circles around v1 (radius l2)
    // and v2 (radius l1). In upper half-plane coordinates a hyperbolic circle
    // around x + iy of radius r is the Euclidean circle with center
    // (x, y cosh r) and radius y sinh r.
    let c1 = cosh_l2; // center height of circle 1 (y0 = 1)
    let r1 = (cosh_l2 * cosh_l2 - 1.0).sqrt();
    let y2 = v2.im;
    let c2 = y2 * cosh_l1;
    // Intersection of x^2 + (y - c1)^2 = r1^2 and x^2 + (y - c2)^2 = r2^2.
    // c_j^2 - r_j^2 = y_j^2 exactly, which removes the cancellation in the
    // textbook radical-line formula for thin triangles.
    let y = (y2 * y2 - 1.0) / (2.0 * (c2 - c1));
    // x^2 = (r1 + c1 - y)(r1 - c1 + y) with r1 - c1 = -1/(r1 + c1)
    let x2 = (r1 + c1 - y) * (y - 1.0 / (r1 + c1));
    let x = x2.max(0.0).sqrt() * if mirror { -1.0 } else { 1.0 };
    let v3 = HPoint { re: x, im: y };

    let beta = [2.0 * PI - 2.0 * t1, 2.0 * PI - 2.0 * t2, 2.0 * PI - 2.0 * t3];
    (
        rotation_about(v1, beta[0]),
        rotation_about(v2, beta[1]),
        rotation_about(v3, beta[2]),
    )
}

/// Pants inequalities of the chain decomposition, each with the given margin.
/// Pants j is bounded by (b_{j-1}^{-1}, c_{j+1}, b_j) with the peripheral
/// chain ends closing the first and last pants.
pub fn polytope_contains(alpha: &AngleVector, x: &ActionCoords, margin: f64) -> Result<bool> {
    let n = alpha.n();
    let dim = n - 3;
    if x.0.len() != dim {
        return Err(TwistError::DimensionMismatch {
            expected: dim,
            got: x.0.len(),
        });
    }
    if dim == 0 {
        return Ok(true);
    }
    let a = &alpha.alpha;
    for &xi in &x.0 {
        if !(xi > margin && xi < 2.0 * PI - margin) {
            return Ok(false);
        }
    }
    // P_1
    if !(a[0] + a[1] + x.0[0] > 4.0 * PI + margin) {
        return Ok(false);
    }
    // P_j for 2 <= j <= n-3
    for j in 2..=dim {
        let lhs = (2.0 * PI - x.0[j - 2]) + a[j] + x.0[j - 1];
        if !(lhs > 4.0 * PI + margin) {
            return Ok(false);
        }
    }
    // P_{n-2}
    if !((2.0 * PI - x.0[dim - 1]) + a[n - 2] + a[n - 1] > 4.0 * PI + margin) {
        return Ok(false);
    }
    Ok(true)
}

/// Conjugator h with h u h^{-1} = target, for elliptic u and target of equal
/// rotation angle: move fix(u) onto fix(target).
fn align(u: &GroupElement, target: &GroupElement) -> Result<GroupElement> {
    let pu = fixed_point(u)?;
    let pt = fixed_point(target)?;
    Ok(transvection_to_i(pt).inverse().mul(&transvection_to_i(pu)))
}

/// Assembles the chain representation with peripheral angles alpha, moment
/// values x and twist parameters t.
pub fn build_rep(alpha: &AngleVector, x: &ActionCoords, twists: &[f64]) -> Result<ChainRep> {
    let n = alpha.n();
    let dim = n - 3;
    if twists.len() != dim {
        return Err(TwistError::DimensionMismatch {
            expected: dim,
            got: twists.len(),
        });
    }
    if !polytope_contains(alpha, x, 0.0)? {
        return Err(TwistError::PolytopeViolation);
    }
    let a = &alpha.alpha;

    let mut gens: Vec<GroupElement> = Vec::with_capacity(n);
    if dim == 0 {
        let (g1, g2, g3) = pants_rep(a[0], a[1], a[2])?;
        gens.extend([g1, g2, g3]);
    } else {
        // Pants 1: (c_1, c_2, b_1)
        let (g1, g2, mut b_prev) = pants_rep(a[0], a[1], x.0[0])?;
        gens.extend([g1, g2]);
        // Pants j = 2..=n-3: (b_{j-1}^{-1}, c_{j+1}, b_j), glued at b_{j-1}
        for j in 2..=dim {
            let (u, v, w) = pants_rep(2.0 * PI - x.0[j - 2], a[j], x.0[j - 1])?;
            let h = align(&u, &b_prev.inverse())?;
            let hinv = h.inverse();
            gens.push(h.mul(&v).mul(&hinv));
            b_prev = h.mul(&w).mul(&hinv);
        }
        // Pants n-2: (b_{n-3}^{-1}, c_{n-1}, c_n)
        let (u, v, w) = pants_rep(2.0 * PI - x.0[dim - 1], a[n - 2], a[n - 1])?;
        let h = align(&u, &b_prev.inverse())?;
        let hinv = h.inverse();
        gens.push(h.mul(&v).mul(&hinv));
        gens.push(h.mul(&w).mul(&hinv));
    }

    let mut rep = ChainRep {
        n,
        alpha: a.clone(),
        generators: gens,
    };
    if !rep.product().is_identity(1e-8) {
        return Err(TwistError::NumericalFailure(
            "assembled generator product deviates from the identity".into(),
        ));
    }
    rep.verify(1e-8)?;
    for (i, &t) in twists.iter().enumerate() {
        rep = twist_flow(&rep, &ChainCurve::B(i + 1), t)?;
    }
    Ok(rep)
}

/// Deterministic sampler over the interior of the moment polytope, twists
/// uniform in [0, pi).
pub fn random_dt_rep(alpha: &AngleVector, seed: u64) -> Result<ChainRep> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let x = sample_polytope(alpha, &mut rng)?;
    let twists: Vec<f64> = (0..alpha.n() - 3)
        .map(|_| rng.random_range(0.0..PI))
        .collect();
    build_rep(alpha, &x, &twists)
}

/// Uniform sample of the polytope interior.
///
/// In the slack coordinates y_1 = x_1 - (4pi - a_1 - a_2),
/// y_j = x_j - x_{j-1} - (2pi - a_{j+1}) the pants inequalities become the
/// open simplex {y_j > 0, sum y_j < lambda}; the bound x_dim < a_{n-1} + a_n
/// - 2pi telescopes to the simplex cap and the (0, 2pi) box never binds
/// because each alpha_i < 2pi. The map back to x is unit-triangular, so a
/// uniform simplex sample stays uniform.
pub fn sample_polytope(alpha: &AngleVector, rng: &mut impl Rng) -> Result<ActionCoords> {
    let n = alpha.n();
    let dim = n - 3;
    if dim == 0 {
        return Ok(ActionCoords(Vec::new()));
    }
    let a = &alpha.alpha;
    // Dirichlet(1,...,1): exponential spacings normalized over dim+1 slots
    let e: Vec<f64> = (0..=dim)
        .map(|_| -rng.random_range(f64::MIN_POSITIVE..1.0f64).ln())
        .collect();
    let total: f64 = e.iter().sum();
    let mut x = Vec::with_capacity(dim);
    let mut acc = 4.0 * PI - a[0] - a[1];
    for (j, ej) in e.iter().take(dim).enumerate() {
        if j > 0 {
            acc += 2.0 * PI - a[j + 1];
        }
        acc += alpha.lambda * ej / total;
        x.push(acc);
    }
    let x = ActionCoords(x);
    debug_assert!(polytope_contains(alpha, &x, 0.0)?);
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::euler::pants_euler_class;
    use crate::hyp2::rotation_angle;
    use crate::surface::{curve_angle, moment_map};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pants_rep_equilateral_matches_law_of_cosines() {
        // beta = 5pi/3 each: triangle angles pi/6, cosh(side) = 3 + 2 sqrt(3)
        let b = 5.0 * PI / 3.0;
        let (a1, a2, a3) = pants_rep(b, b, b).unwrap();
        assert!(a1.mul(&a2).mul(&a3).is_identity(1e-9));
        for g in [&a1, &a2, &a3] {
            assert_abs_diff_eq!(rotation_angle(g).unwrap(), b, epsilon = 1e-9);
        }
        let p1 = fixed_point(&a1).unwrap();
        let p2 = fixed_point(&a2).unwrap();
        let expected = (3.0f64 + 2.0 * 3.0f64.sqrt()).acosh();
        assert_abs_diff_eq!(p1.dist(&p2), expected, epsilon = 1e-9);
    }

    #[test]
    fn pants_rep_rejects_small_angle_sum() {
        assert!(matches!(
            pants_rep(PI, PI, PI),
            Err(TwistError::AnglesConditionViolated { .. })
        ));
    }

    #[test]
    fn pants_rep_euler_class_two() {
        let (a1, a2, a3) = pants_rep(5.0 * PI / 3.0, 1.9 * PI, 1.5 * PI).unwrap();
        assert_eq!(pants_euler_class(&a1, &a2, &a3).unwrap(), 2);
    }

    #[test]
    fn polytope_n4_interval() {
        // alpha = (7pi/4)^4: x_1 admissible iff x_1 in (pi/2, 3pi/2)
        let alpha = AngleVector::new(vec![7.0 * PI / 4.0; 4]).unwrap();
        assert_abs_diff_eq!(alpha.lambda, PI, epsilon = 1e-12);
        let lo = 4.0 * PI - 2.0 * (7.0 * PI / 4.0);
        let hi = 2.0 * (7.0 * PI / 4.0) - 2.0 * PI;
        assert_abs_diff_eq!(hi - lo, alpha.lambda, epsilon = 1e-12);
        for (x, inside) in [
            (lo + 0.01, true),
            (hi - 0.01, true),
            (lo - 0.01, false),
            (hi + 0.01, false),
            (lo, false), // faces are excluded at margin 0
            (hi, false),
        ] {
            assert_eq!(
                polytope_contains(&alpha, &ActionCoords(vec![x]), 0.0).unwrap(),
                inside,
                "x = {x}"
            );
        }
    }

    #[test]
    fn polytope_n3_trivial() {
        let alpha = AngleVector::new(vec![1.9 * PI; 3]).unwrap();
        assert!(polytope_contains(&alpha, &ActionCoords(vec![]), 0.0).unwrap());
        assert!(matches!(
            polytope_contains(&alpha, &ActionCoords(vec![1.0]), 0.0),
            Err(TwistError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn build_rep_postconditions_n4() {
        let alpha = AngleVector::new(vec![7.0 * PI / 4.0; 4]).unwrap();
        let rep = build_rep(&alpha, &ActionCoords(vec![PI]), &[0.0]).unwrap();
        assert_abs_diff_eq!(
            curve_angle(&rep, &ChainCurve::B(1)).unwrap(),
            PI,
            epsilon = 1e-8
        );
        for (i, &a) in alpha.alpha.iter().enumerate() {
            assert_abs_diff_eq!(
                curve_angle(&rep, &ChainCurve::Peripheral(i + 1)).unwrap(),
                a,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn moment_map_independent_of_twists() {
        let alpha = AngleVector::new(vec![1.8 * PI, 1.9 * PI, 1.7 * PI, 1.85 * PI, 1.95 * PI])
            .unwrap();
        let x = ActionCoords(vec![1.2 * PI, 1.6 * PI]);
        let m1 = moment_map(&build_rep(&alpha, &x, &[0.0, 0.0]).unwrap()).unwrap();
        let m2 = moment_map(&build_rep(&alpha, &x, &[0.8, 2.1]).unwrap()).unwrap();
        for (a, b) in m1.iter().zip(&m2) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
        for (a, b) in m1.iter().zip(&x.0) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn random_dt_rep_deterministic() {
        let alpha = AngleVector::new(vec![7.0 * PI / 4.0; 4]).unwrap();
        let r1 = random_dt_rep(&alpha, 42).unwrap();
        let r2 = random_dt_rep(&alpha, 42).unwrap();
        assert_eq!(r1, r2);
        let r3 = random_dt_rep(&alpha, 43).unwrap();
        assert_ne!(r1, r3);
    }

    #[test]
    fn random_dt_rep_x_marginal_uniform() {
        use rand::SeedableRng;
        let alpha = AngleVector::new(vec![7.0 * PI / 4.0; 4]).unwrap();
        let lo = PI / 2.0;
        let hi = 3.0 * PI / 2.0;
        let mut xs: Vec<f64> = Vec::new();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            xs.push(sample_polytope(&alpha, &mut rng).unwrap().0[0]);
        }
        let cdf = |x: f64| ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        let ks = crate::ergodics::ks_statistic(&xs, cdf).unwrap();
        assert!(ks < 0.02, "KS = {ks}");
    }
}
