//! Symbolic layer for the n-punctured sphere group: generators c_1..c_n with
//! c_1 * ... * c_n = 1, the chain curves b_i and d_i, and concrete
//! representations as tuples of PSL(2,R) elements.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TwistError};
use crate::hyp2::{
    self, classify, fixed_point, rotation_angle, transvection_to_i, GroupElement, IsometryClass,
    TOL_EQ,
};

/// Tolerance for lazily re-verified peripheral angle drift.
pub const TOL_ALPHA_DRIFT: f64 = 1e-7;

/// Chain curve on the n-punctured sphere.
///
/// Indices are 1-based as usual for the generators: `Peripheral(i)` is c_i,
/// `B(i)` is b_i = c_{i+1}^{-1} ... c_1^{-1}, `D(i)` is d_i = c_{i+2}^{-1}
/// c_{i+1}^{-1}, and `TwistedD(i, m)` is the image of d_i under m iterations
/// of the Dehn twist along b_i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChainCurve {
    Peripheral(usize),
    B(usize),
    D(usize),
    TwistedD(usize, i64),
}

impl ChainCurve {
    pub fn validate(&self, n: usize) -> Result<()> {
        let ok = match *self {
            ChainCurve::Peripheral(i) => (1..=n).contains(&i),
            ChainCurve::B(i) | ChainCurve::D(i) | ChainCurve::TwistedD(i, _) => {
                n >= 4 && (1..=n - 3).contains(&i)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(TwistError::InvalidInput(format!(
                "curve {self} out of range for n = {n}"
            )))
        }
    }
}

impl fmt::Display for ChainCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ChainCurve::Peripheral(i) => write!(f, "c{i}"),
            ChainCurve::B(i) => write!(f, "b{i}"),
            ChainCurve::D(i) => write!(f, "d{i}"),
            ChainCurve::TwistedD(i, m) => write!(f, "d{i}~m{m}"),
        }
    }
}

impl FromStr for ChainCurve {
    type Err = TwistError;

    /// Parses "c3", "b1", "d2" and "d2~m-3".
    fn from_str(s: &str) -> Result<Self> {
        let bad = || TwistError::InvalidInput(format!("cannot parse curve {s:?}"));
        if let Some((head, m)) = s.split_once("~m") {
            let i = head.strip_prefix('d').ok_or_else(bad)?;
            let i: usize = i.parse().map_err(|_| bad())?;
            let m: i64 = m.parse().map_err(|_| bad())?;
            return Ok(ChainCurve::TwistedD(i, m));
        }
        let (kind, idx) = s.split_at(1);
        let i: usize = idx.parse().map_err(|_| bad())?;
        match kind {
            "c" => Ok(ChainCurve::Peripheral(i)),
            "b" => Ok(ChainCurve::B(i)),
            "d" => Ok(ChainCurve::D(i)),
            _ => Err(bad()),
        }
    }
}

/// Free-group word over the generators: (index, exponent) letters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Word(pub Vec<(usize, i8)>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }
}

/// Defining word of a curve. `TwistedD` has no fixed word here: its holonomy
/// is evaluated through the twist-flow pushforward instead.
pub fn curve_word(c: &ChainCurve) -> Result<Word> {
    match *c {
        ChainCurve::Peripheral(i) => Ok(Word(vec![(i, 1)])),
        ChainCurve::B(i) => Ok(Word((1..=i + 1).rev().map(|j| (j, -1)).collect())),
        ChainCurve::D(i) => Ok(Word(vec![(i + 2, -1), (i + 1, -1)])),
        ChainCurve::TwistedD(..) => Err(TwistError::UnsupportedCurve(c.to_string())),
    }
}

/// Concrete representation of the chain group: images of the generators plus
/// the target peripheral angle vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRep {
    pub n: usize,
    pub alpha: Vec<f64>,
    #[serde(
        serialize_with = "serialize_gens",
        deserialize_with = "deserialize_gens"
    )]
    pub generators: Vec<GroupElement>,
}

fn serialize_gens<S: serde::Serializer>(
    gens: &[GroupElement],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(gens.len()))?;
    for g in gens {
        seq.serialize_element(&[[g.m11, g.m12], [g.m21, g.m22]])?;
    }
    seq.end()
}

fn deserialize_gens<'de, D: serde::Deserializer<'de>>(
    d: D,
) -> std::result::Result<Vec<GroupElement>, D::Error> {
    let raw: Vec<[[f64; 2]; 2]> = Vec::deserialize(d)?;
    raw.into_iter()
        .map(|m| {
            GroupElement::from_entries(m[0][0], m[0][1], m[1][0], m[1][1])
                .map_err(serde::de::Error::custom)
        })
        .collect()
}

impl ChainRep {
    /// Builds a representation and checks the product relation and the
    /// prescribed peripheral angles.
    pub fn new(alpha: Vec<f64>, generators: Vec<GroupElement>) -> Result<Self> {
        let n = alpha.len();
        if generators.len() != n {
            return Err(TwistError::DimensionMismatch {
                expected: n,
                got: generators.len(),
            });
        }
        let rep = ChainRep {
            n,
            alpha,
            generators,
        };
        rep.verify(TOL_EQ)?;
        Ok(rep)
    }

    /// 1-based access to the image of c_i.
    pub fn gen(&self, i: usize) -> &GroupElement {
        &self.generators[i - 1]
    }

    pub fn product(&self) -> GroupElement {
        self.generators
            .iter()
            .fold(GroupElement::identity(), |acc, g| acc.mul(g))
    }

    /// Checks the product relation (at `tol`) and the peripheral angles
    /// (at the drift tolerance).
    pub fn verify(&self, tol: f64) -> Result<()> {
        // roundoff in the product grows with the partial-product entries, so
        // the identity check is relative to their scale
        let mut prod = GroupElement::identity();
        let mut scale = 1.0f64;
        for g in &self.generators {
            prod = prod.mul(g);
            scale = scale.max(
                prod.m11
                    .abs()
                    .max(prod.m12.abs())
                    .max(prod.m21.abs())
                    .max(prod.m22.abs()),
            );
        }
        if !prod.is_identity(tol * scale) {
            return Err(TwistError::IntegrityFailure {
                step: 0,
                what: "generator product is not the identity".into(),
            });
        }
        for (i, g) in self.generators.iter().enumerate() {
            let a = rotation_angle(g).map_err(|_| TwistError::NotTotallyElliptic {
                curve: format!("c{}", i + 1),
            })?;
            let drift = (a - self.alpha[i]).abs();
            if drift > TOL_ALPHA_DRIFT.max(tol) {
                return Err(TwistError::IntegrityFailure {
                    step: 0,
                    what: format!("peripheral angle {} drifted by {drift:.3e}", i + 1),
                });
            }
        }
        Ok(())
    }

    /// Renormalizes all generator determinants; counters drift on long orbits.
    pub fn renormalize(&mut self) {
        for g in &mut self.generators {
            *g = g.renormalize();
        }
    }

    pub fn moment_dim(&self) -> usize {
        self.n.saturating_sub(3)
    }
}

/// Product of generator images along a word.
pub fn word_holonomy(rep: &ChainRep, w: &Word) -> GroupElement {
    w.0.iter().fold(GroupElement::identity(), |acc, &(i, e)| {
        let g = rep.gen(i);
        if e >= 0 {
            acc.mul(g)
        } else {
            acc.mul(&g.inverse())
        }
    })
}

/// Holonomy of a chain curve. Word-backed curves are evaluated directly;
/// `TwistedD(i, m)` evaluates d_i on the m-fold twisted representation.
pub fn holonomy(rep: &ChainRep, c: &ChainCurve) -> Result<GroupElement> {
    c.validate(rep.n)?;
    match *c {
        ChainCurve::TwistedD(i, m) => {
            let twisted = crate::dynamics::dehn_twist_power(rep, &ChainCurve::B(i), m)?;
            Ok(word_holonomy(&twisted, &curve_word(&ChainCurve::D(i))?))
        }
        _ => Ok(word_holonomy(rep, &curve_word(c)?)),
    }
}

/// Conjugates every generator by h. All angle functions are unchanged.
pub fn conjugate_rep(rep: &ChainRep, h: &GroupElement) -> ChainRep {
    let hinv = h.inverse();
    ChainRep {
        n: rep.n,
        alpha: rep.alpha.clone(),
        generators: rep
            .generators
            .iter()
            .map(|g| h.mul(g).mul(&hinv))
            .collect(),
    }
}

/// Moves the representative within the conjugacy class so that the holonomy
/// of `c` fixes the complex unit i.
pub fn normalize_at(rep: &ChainRep, c: &ChainCurve) -> Result<ChainRep> {
    let h = holonomy(rep, c)?;
    let p = fixed_point(&h)?;
    Ok(conjugate_rep(rep, &transvection_to_i(p)))
}

/// Checks that every peripheral, b, d and twisted-d curve (|m| <= m_max) has
/// elliptic holonomy. On the Deroin-Tholozan locus this always holds.
pub fn total_ellipticity_check(rep: &ChainRep, m_max: i64) -> Result<()> {
    let mut curves: Vec<ChainCurve> = (1..=rep.n).map(ChainCurve::Peripheral).collect();
    for i in 1..=rep.moment_dim() {
        curves.push(ChainCurve::B(i));
        curves.push(ChainCurve::D(i));
        for m in -m_max..=m_max {
            if m != 0 {
                curves.push(ChainCurve::TwistedD(i, m));
            }
        }
    }
    for c in curves {
        let h = holonomy(rep, &c)?;
        if !matches!(classify(&h), IsometryClass::Elliptic { .. }) {
            return Err(TwistError::NotTotallyElliptic {
                curve: c.to_string(),
            });
        }
    }
    Ok(())
}

/// Rotation angle of the holonomy of a curve; the basic angle function.
pub fn curve_angle(rep: &ChainRep, c: &ChainCurve) -> Result<f64> {
    let h = holonomy(rep, c)?;
    rotation_angle(&h).map_err(|_| TwistError::NotTotallyElliptic {
        curve: c.to_string(),
    })
}

/// Moment map values (theta_{b_1}, ..., theta_{b_{n-3}}).
pub fn moment_map(rep: &ChainRep) -> Result<Vec<f64>> {
    (1..=rep.moment_dim())
        .map(|i| curve_angle(rep, &ChainCurve::B(i)))
        .collect()
}

pub use hyp2::HPoint;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{build_rep, ActionCoords, AngleVector};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sample_rep() -> ChainRep {
        let alpha = AngleVector::new(vec![7.0 * PI / 4.0; 4]).unwrap();
        build_rep(&alpha, &ActionCoords(vec![PI]), &[0.3]).unwrap()
    }

    #[test]
    fn curve_words() {
        assert_eq!(
            curve_word(&ChainCurve::B(1)).unwrap(),
            Word(vec![(2, -1), (1, -1)])
        );
        assert_eq!(
            curve_word(&ChainCurve::D(1)).unwrap(),
            Word(vec![(3, -1), (2, -1)])
        );
        assert_eq!(
            curve_word(&ChainCurve::Peripheral(2)).unwrap(),
            Word(vec![(2, 1)])
        );
        assert!(matches!(
            curve_word(&ChainCurve::TwistedD(1, 2)),
            Err(TwistError::UnsupportedCurve(_))
        ));
    }

    #[test]
    fn curve_string_roundtrip() {
        for s in ["c3", "b1", "d2", "d2~m-3", "d1~m7"] {
            let c: ChainCurve = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        assert!("q7".parse::<ChainCurve>().is_err());
        assert_eq!(
            "d2~m-3".parse::<ChainCurve>().unwrap(),
            ChainCurve::TwistedD(2, -3)
        );
    }

    #[test]
    fn word_consistency_b_curve() {
        // holonomy(b_i) * (c_1 ... c_{i+1}) = identity
        let rep = sample_rep();
        let b = holonomy(&rep, &ChainCurve::B(1)).unwrap();
        let head = rep.gen(1).mul(rep.gen(2));
        assert!(b.mul(&head).is_identity(1e-9));
    }

    #[test]
    fn twisted_d_m0_equals_d() {
        let rep = sample_rep();
        let d = holonomy(&rep, &ChainCurve::D(1)).unwrap();
        let d0 = holonomy(&rep, &ChainCurve::TwistedD(1, 0)).unwrap();
        assert!(d.approx_eq(&d0, 1e-12));
    }

    #[test]
    fn conjugate_rep_preserves_angles() {
        let rep = sample_rep();
        let h = rotation_about(HPoint { re: 0.5, im: 2.0 }, 1.1);
        let conj = conjugate_rep(&rep, &h);
        assert!(conj.approx_eq_id());
        for c in [ChainCurve::B(1), ChainCurve::D(1), ChainCurve::Peripheral(3)] {
            assert_abs_diff_eq!(
                curve_angle(&rep, &c).unwrap(),
                curve_angle(&conj, &c).unwrap(),
                epsilon = 1e-10
            );
        }
        // fixed point moves by the Mobius action of h
        let p = fixed_point(&holonomy(&rep, &ChainCurve::B(1)).unwrap()).unwrap();
        let q = fixed_point(&holonomy(&conj, &ChainCurve::B(1)).unwrap()).unwrap();
        assert!(h.apply(p).dist_euclid(&q) < 1e-9);
        assert!(conjugate_rep(&rep, &GroupElement::identity())
            .generators
            .iter()
            .zip(&rep.generators)
            .all(|(a, b)| a.approx_eq(b, 1e-14)));
    }

    impl ChainRep {
        fn approx_eq_id(&self) -> bool {
            self.product().is_identity(1e-9)
        }
    }

    #[test]
    fn normalize_at_moves_fixed_point_to_i() {
        let rep = sample_rep();
        let norm = normalize_at(&rep, &ChainCurve::B(1)).unwrap();
        let p = fixed_point(&holonomy(&norm, &ChainCurve::B(1)).unwrap()).unwrap();
        assert!(p.dist_euclid(&HPoint::i()) < 1e-9);
        // idempotent in the fixed-point sense
        let again = normalize_at(&norm, &ChainCurve::B(1)).unwrap();
        let q = fixed_point(&holonomy(&again, &ChainCurve::B(1)).unwrap()).unwrap();
        assert!(q.dist_euclid(&HPoint::i()) < 1e-9);
    }

    #[test]
    fn json_schema_roundtrip() {
        let rep = sample_rep();
        let json = serde_json::to_string(&rep).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["n"], 4);
        assert_eq!(v["generators"][0].as_array().unwrap().len(), 2);
        let back: ChainRep = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rep);
    }

    #[test]
    fn pants_angle_complementarity() {
        // the two pants angles at b_{n-3} sum to 2pi
        let rep = sample_rep();
        let b = holonomy(&rep, &ChainCurve::B(1)).unwrap();
        let t1 = rotation_angle(&b).unwrap();
        let t2 = rotation_angle(&b.inverse()).unwrap();
        assert_abs_diff_eq!(t1 + t2, 2.0 * PI, epsilon = 1e-10);
    }

    use crate::hyp2::rotation_about;
}
