//! Floating-point kernel for PSL(2,R), the upper half-plane and sl(2,R).
//!
//! Group elements are stored as sign-canonicalized unimodular 2x2 matrices:
//! the representative has positive trace, falling back to the first nonzero
//! entry in row-major order when the trace vanishes. All operations are pure.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TwistError};

/// Determinant / canonicalization tolerance.
pub const TOL_CANON: f64 = 1e-12;
/// Classification band around |trace| = 2.
pub const TOL_CLASS: f64 = 1e-9;
/// Entry-wise tolerance for PSL equality checks.
pub const TOL_EQ: f64 = 1e-9;

/// Element of PSL(2,R): a unimodular 2x2 matrix up to sign, stored canonically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "[f64; 4]", try_from = "[f64; 4]")]
pub struct GroupElement {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
    pub m22: f64,
}

impl From<GroupElement> for [f64; 4] {
    fn from(g: GroupElement) -> Self {
        [g.m11, g.m12, g.m21, g.m22]
    }
}

impl TryFrom<[f64; 4]> for GroupElement {
    type Error = TwistError;
    fn try_from(m: [f64; 4]) -> Result<Self> {
        GroupElement::new(m[0], m[1], m[2], m[3])
    }
}

/// Traceless 2x2 real matrix; m22 = -m11 is implied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieVector {
    pub m11: f64,
    pub m12: f64,
    pub m21: f64,
}

/// Point of the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub re: f64,
    pub im: f64,
}

/// Conjugacy type of a PSL(2,R) element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IsometryClass {
    Elliptic { angle: f64, fixed_point: HPoint },
    Parabolic,
    Hyperbolic,
    Identity,
}

/// The infinitesimal rotation (0 1; -1 0); generates the stabilizer of i.
pub const XI: LieVector = LieVector {
    m11: 0.0,
    m12: 1.0,
    m21: -1.0,
};

impl GroupElement {
    /// Builds an element from matrix entries, renormalizing the determinant
    /// to 1 and canonicalizing the sign. Fails on non-positive determinant.
    pub fn new(m11: f64, m12: f64, m21: f64, m22: f64) -> Result<Self> {
        let det = m11 * m22 - m12 * m21;
        if !(det > 0.0) || !det.is_finite() {
            return Err(TwistError::NumericalFailure(format!(
                "matrix determinant {det} is not positive"
            )));
        }
        let s = det.sqrt();
        let g = GroupElement {
            m11: m11 / s,
            m12: m12 / s,
            m21: m21 / s,
            m22: m22 / s,
        };
        Ok(g.canonicalize())
    }

    /// Accepts entries that are already near-unimodular without rescaling
    /// them, so serialized elements round-trip bit-for-bit. Sign
    /// canonicalization (exact in floating point) is still applied.
    pub fn from_entries(m11: f64, m12: f64, m21: f64, m22: f64) -> Result<Self> {
        let det = m11 * m22 - m12 * m21;
        if !((det - 1.0).abs() < 1e-9) {
            return Err(TwistError::NumericalFailure(format!(
                "matrix determinant {det} is not 1"
            )));
        }
        Ok(GroupElement { m11, m12, m21, m22 }.canonicalize())
    }

    pub fn identity() -> Self {
        GroupElement {
            m11: 1.0,
            m12: 0.0,
            m21: 0.0,
            m22: 1.0,
        }
    }

    /// Picks the sign representative: trace > 0, or first nonzero entry
    /// positive when the trace is zero within tolerance. Idempotent.
    pub fn canonicalize(self) -> Self {
        let tr = self.m11 + self.m22;
        let flip = if tr.abs() > TOL_CANON {
            tr < 0.0
        } else {
            let lead = [self.m11, self.m12, self.m21, self.m22]
                .into_iter()
                .find(|e| e.abs() > TOL_CANON)
                .unwrap_or(0.0);
            lead < 0.0
        };
        if flip {
            GroupElement {
                m11: -self.m11,
                m12: -self.m12,
                m21: -self.m21,
                m22: -self.m22,
            }
        } else {
            self
        }
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m21
    }

    /// Renormalizes the determinant without changing the PSL class.
    pub fn renormalize(self) -> Self {
        let s = self.det().sqrt();
        GroupElement {
            m11: self.m11 / s,
            m12: self.m12 / s,
            m21: self.m21 / s,
            m22: self.m22 / s,
        }
        .canonicalize()
    }

    pub fn mul(&self, rhs: &GroupElement) -> GroupElement {
        GroupElement {
            m11: self.m11 * rhs.m11 + self.m12 * rhs.m21,
            m12: self.m11 * rhs.m12 + self.m12 * rhs.m22,
            m21: self.m21 * rhs.m11 + self.m22 * rhs.m21,
            m22: self.m21 * rhs.m12 + self.m22 * rhs.m22,
        }
        .canonicalize()
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement {
            m11: self.m22,
            m12: -self.m12,
            m21: -self.m21,
            m22: self.m11,
        }
        .canonicalize()
    }

    /// Entry-wise PSL equality of canonical representatives.
    pub fn approx_eq(&self, other: &GroupElement, tol: f64) -> bool {
        let a = self.canonicalize();
        let b = other.canonicalize();
        (a.m11 - b.m11).abs() <= tol
            && (a.m12 - b.m12).abs() <= tol
            && (a.m21 - b.m21).abs() <= tol
            && (a.m22 - b.m22).abs() <= tol
    }

    pub fn is_identity(&self, tol: f64) -> bool {
        self.approx_eq(&GroupElement::identity(), tol)
    }

    /// Mobius action on the upper half-plane.
    pub fn apply(&self, p: HPoint) -> HPoint {
        // (a z + b) / (c z + d) in complex arithmetic
        let (a, b, c, d) = (self.m11, self.m12, self.m21, self.m22);
        let nr = a * p.re + b;
        let ni = a * p.im;
        let dr = c * p.re + d;
        let di = c * p.im;
        let den = dr * dr + di * di;
        HPoint {
            re: (nr * dr + ni * di) / den,
            im: (ni * dr - nr * di) / den,
        }
    }
}

impl LieVector {
    pub fn zero() -> Self {
        LieVector {
            m11: 0.0,
            m12: 0.0,
            m21: 0.0,
        }
    }

    pub fn add(&self, rhs: &LieVector) -> LieVector {
        LieVector {
            m11: self.m11 + rhs.m11,
            m12: self.m12 + rhs.m12,
            m21: self.m21 + rhs.m21,
        }
    }

    pub fn sub(&self, rhs: &LieVector) -> LieVector {
        LieVector {
            m11: self.m11 - rhs.m11,
            m12: self.m12 - rhs.m12,
            m21: self.m21 - rhs.m21,
        }
    }

    pub fn scale(&self, s: f64) -> LieVector {
        LieVector {
            m11: s * self.m11,
            m12: s * self.m12,
            m21: s * self.m21,
        }
    }

    pub fn norm(&self) -> f64 {
        let m22 = -self.m11;
        (self.m11 * self.m11 + self.m12 * self.m12 + self.m21 * self.m21 + m22 * m22).sqrt()
    }
}

impl HPoint {
    pub fn new(re: f64, im: f64) -> Result<Self> {
        if !(im > 0.0) {
            return Err(TwistError::InvalidInput(format!(
                "point {re}+{im}i is not in the upper half-plane"
            )));
        }
        Ok(HPoint { re, im })
    }

    pub fn i() -> Self {
        HPoint { re: 0.0, im: 1.0 }
    }

    pub fn dist_euclid(&self, other: &HPoint) -> f64 {
        ((self.re - other.re).powi(2) + (self.im - other.im).powi(2)).sqrt()
    }

    /// Hyperbolic distance in the upper half-plane.
    pub fn dist(&self, other: &HPoint) -> f64 {
        let d2 = (self.re - other.re).powi(2) + (self.im - other.im).powi(2);
        (1.0 + d2 / (2.0 * self.im * other.im)).acosh()
    }
}

/// rot_theta = exp(theta/2 * Xi): rotation fixing i with rotation angle theta.
pub fn rot(theta: f64) -> GroupElement {
    let (s, c) = (theta / 2.0).sin_cos();
    GroupElement {
        m11: c,
        m12: s,
        m21: -s,
        m22: c,
    }
    .canonicalize()
}

/// Transvection mapping p to i: translate the real part away, then rescale.
pub fn transvection_to_i(p: HPoint) -> GroupElement {
    let s = p.im.sqrt();
    // [[1/s, -re/s], [0, s]] sends p to i
    GroupElement {
        m11: 1.0 / s,
        m12: -p.re / s,
        m21: 0.0,
        m22: s,
    }
    .canonicalize()
}

/// Classifies an element by the trace of its canonical representative.
///
/// A band of half-width `TOL_CLASS` around |trace| = 2 resolves to Parabolic
/// (or Identity when the matrix is entry-wise close to the identity).
pub fn classify(g: &GroupElement) -> IsometryClass {
    let g = g.canonicalize();
    if g.is_identity(TOL_CLASS) {
        return IsometryClass::Identity;
    }
    let tr = g.trace().abs();
    if (tr - 2.0).abs() < TOL_CLASS {
        IsometryClass::Parabolic
    } else if tr < 2.0 {
        let fixed_point = fixed_point_unchecked(&g);
        let angle = rotation_angle_at(&g, fixed_point);
        IsometryClass::Elliptic { angle, fixed_point }
    } else {
        IsometryClass::Hyperbolic
    }
}

pub fn is_elliptic(g: &GroupElement) -> bool {
    matches!(classify(g), IsometryClass::Elliptic { .. })
}

fn fixed_point_unchecked(g: &GroupElement) -> HPoint {
    // Root of m21 z^2 + (m22 - m11) z - m12 with positive imaginary part.
    let disc = 4.0 - g.trace().powi(2);
    let im = disc.max(0.0).sqrt() / (2.0 * g.m21);
    let re = (g.m11 - g.m22) / (2.0 * g.m21);
    HPoint { re, im: im.abs() }
}

/// Unique fixed point in H of an elliptic element.
pub fn fixed_point(g: &GroupElement) -> Result<HPoint> {
    match classify(g) {
        IsometryClass::Elliptic { fixed_point, .. } => Ok(fixed_point),
        _ => Err(TwistError::NotElliptic),
    }
}

fn rotation_angle_at(g: &GroupElement, fix: HPoint) -> f64 {
    // Conjugate to fix i, then read the half-angle off the rotation matrix.
    let t = transvection_to_i(fix);
    let r = t.mul(g).mul(&t.inverse());
    let mut half = r.m12.atan2(r.m11);
    // Fold to (0, pi): the other SL(2,R) lift gives the same PSL element.
    if half < 0.0 {
        half += std::f64::consts::PI;
    }
    2.0 * half
}

/// Rotation angle in (0, 2pi) of an elliptic element.
pub fn rotation_angle(g: &GroupElement) -> Result<f64> {
    match classify(g) {
        IsometryClass::Elliptic { angle, .. } => Ok(angle),
        _ => Err(TwistError::NotElliptic),
    }
}

/// Elliptic element with fixed point p and rotation angle theta (mod 2pi).
pub fn rotation_about(p: HPoint, theta: f64) -> GroupElement {
    let t = transvection_to_i(p);
    t.inverse().mul(&rot(theta)).mul(&t)
}

/// Adjoint action g . xi . g^{-1}; well-defined on PSL since the sign cancels.
pub fn ad(g: &GroupElement, xi: &LieVector) -> LieVector {
    let (a, b, c, d) = (g.m11, g.m12, g.m21, g.m22);
    let (x11, x12, x21) = (xi.m11, xi.m12, xi.m21);
    let x22 = -x11;
    // g * xi
    let p11 = a * x11 + b * x21;
    let p12 = a * x12 + b * x22;
    let p21 = c * x11 + d * x21;
    let p22 = c * x12 + d * x22;
    // (g * xi) * g^{-1}, with g^{-1} = (d -b; -c a)
    LieVector {
        m11: p11 * d + p12 * (-c),
        m12: p11 * (-b) + p12 * a,
        m21: p21 * d + p22 * (-c),
    }
    .assert_traceless_consistent(p21 * (-b) + p22 * a)
}

impl LieVector {
    #[inline]
    fn assert_traceless_consistent(self, m22: f64) -> LieVector {
        debug_assert!((self.m11 + m22).abs() < 1e-9);
        self
    }
}

/// Trace form trace(xi * eta) on sl(2,R).
pub fn trace_form(xi: &LieVector, eta: &LieVector) -> f64 {
    2.0 * xi.m11 * eta.m11 + xi.m12 * eta.m21 + xi.m21 * eta.m12
}

/// trace(g * xi) for the canonical (positive-trace) lift of g.
pub fn trace_mul(g: &GroupElement, xi: &LieVector) -> f64 {
    let g = g.canonicalize();
    g.m11 * xi.m11 + g.m12 * xi.m21 + g.m21 * xi.m12 + g.m22 * (-xi.m11)
}
