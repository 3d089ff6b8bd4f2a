//! Twist flows along the chain curves, Dehn twists via the flow identity,
//! and twist words over the subgroup generated by tau_{b_i} and tau_{d_i}.
//!
//! The flow at time t conjugates the moving block of generators by the
//! rotation of angle 2t about the fixed point of the curve holonomy; the
//! Dehn twist is the flow at half the rotation angle.

use std::fmt;
use std::str::FromStr;

use crate::error::{Result, TwistError};
use crate::hyp2::{fixed_point, rotation_angle, rotation_about};
use crate::surface::{holonomy, ChainCurve, ChainRep};

/// Generators conjugated by the flow of `c`, as a 1-based inclusive range.
fn moving_block(c: &ChainCurve, n: usize) -> Result<(usize, usize)> {
    match *c {
        ChainCurve::B(i) => Ok((i + 2, n)),
        ChainCurve::D(i) => Ok((i + 1, i + 2)),
        _ => Err(TwistError::UnsupportedCurve(format!(
            "twist flow is only defined along b_i and d_i, got {c}"
        ))),
    }
}

/// Twist flow at time t along b_i or d_i. Exactly pi-periodic; conserves the
/// rotation angle of `c` and all peripheral angles.
pub fn twist_flow(rep: &ChainRep, c: &ChainCurve, t: f64) -> Result<ChainRep> {
    let (lo, hi) = moving_block(c, rep.n)?;
    let h = holonomy(rep, c)?;
    let p = fixed_point(&h)?;
    let r = rotation_about(p, 2.0 * t);
    let rinv = r.inverse();
    let mut generators = rep.generators.clone();
    for g in &mut generators[lo - 1..hi] {
        *g = r.mul(g).mul(&rinv);
    }
    Ok(ChainRep {
        n: rep.n,
        alpha: rep.alpha.clone(),
        generators,
    })
}

/// Dehn twist along `c`: the flow at half the rotation angle of the holonomy.
pub fn dehn_twist(rep: &ChainRep, c: &ChainCurve) -> Result<ChainRep> {
    let theta = rotation_angle(&holonomy(rep, c)?)?;
    twist_flow(rep, c, theta / 2.0)
}

/// Dehn twist by direct conjugation with the curve holonomy itself; agrees
/// with `dehn_twist` and exists as an independent code path.
pub fn dehn_twist_direct(rep: &ChainRep, c: &ChainCurve) -> Result<ChainRep> {
    let (lo, hi) = moving_block(c, rep.n)?;
    let h = holonomy(rep, c)?;
    if !crate::hyp2::is_elliptic(&h) {
        return Err(TwistError::NotElliptic);
    }
    let hinv = h.inverse();
    let mut generators = rep.generators.clone();
    for g in &mut generators[lo - 1..hi] {
        *g = h.mul(g).mul(&hinv);
    }
    Ok(ChainRep {
        n: rep.n,
        alpha: rep.alpha.clone(),
        generators,
    })
}

/// m-fold Dehn twist in a single flow step, using angle conservation along
/// the curve's own flow; negative m is the inverse twist.
pub fn dehn_twist_power(rep: &ChainRep, c: &ChainCurve, m: i64) -> Result<ChainRep> {
    if m == 0 {
        return Ok(rep.clone());
    }
    let theta = rotation_angle(&holonomy(rep, c)?)?;
    twist_flow(rep, c, m as f64 * theta / 2.0)
}

/// Word in the twist generators tau_{b_i}^{+-1}, tau_{d_i}^{+-1}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistWord(pub Vec<(ChainCurve, i64)>);

impl TwistWord {
    pub fn empty() -> Self {
        TwistWord(Vec::new())
    }

    /// Number of elementary twist letters, counting powers.
    pub fn letter_count(&self) -> u64 {
        self.0.iter().map(|&(_, m)| m.unsigned_abs()).sum()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        for &(c, m) in &self.0 {
            match c {
                ChainCurve::B(_) | ChainCurve::D(_) => c.validate(n)?,
                _ => {
                    return Err(TwistError::UnsupportedCurve(format!(
                        "twist words range over b_i and d_i, got {c}"
                    )))
                }
            }
            if m == 0 {
                return Err(TwistError::InvalidInput("zero twist power".into()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for TwistWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(c, m)| if *m == 1 { c.to_string() } else { format!("{c}^{m}") })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl FromStr for TwistWord {
    type Err = TwistError;

    /// Grammar: whitespace-separated `b<i>^<m>` / `d<i>^<m>`; `^1` optional.
    fn from_str(s: &str) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in s.split_whitespace() {
            let (curve, power) = match tok.split_once('^') {
                Some((c, m)) => (
                    c.parse::<ChainCurve>()?,
                    m.parse::<i64>().map_err(|_| {
                        TwistError::InvalidInput(format!("bad twist power in {tok:?}"))
                    })?,
                ),
                None => (tok.parse::<ChainCurve>()?, 1),
            };
            if power == 0 {
                return Err(TwistError::InvalidInput(format!(
                    "zero twist power in {tok:?}"
                )));
            }
            letters.push((curve, power));
        }
        Ok(TwistWord(letters))
    }
}

/// Interval between determinant renormalizations on long twist words.
const RECANON_INTERVAL: u64 = 64;

/// Applies a twist word left to right. Every 64 elementary letters the
/// generators are renormalized and the representation invariants re-checked;
/// a failure there signals drift off the Deroin-Tholozan locus.
pub fn apply_twist_word(rep: &ChainRep, word: &TwistWord) -> Result<ChainRep> {
    word.validate(rep.n)?;
    let mut out = rep.clone();
    let mut total: u64 = 0;
    let mut since_recanon: u64 = 0;
    for &(c, m) in &word.0 {
        out = dehn_twist_power(&out, &c, m)?;
        total += m.unsigned_abs();
        since_recanon += m.unsigned_abs();
        if since_recanon >= RECANON_INTERVAL {
            since_recanon = 0;
            out.renormalize();
            out.verify(1e-5).map_err(|e| TwistError::IntegrityFailure {
                step: total as usize,
                what: format!("twist word drift: {e}"),
            })?;
        }
    }
    Ok(out)
}
