//! Random walks on the twist subgroup and moment-map equidistribution
//! experiments against the Duistermaat-Heckman reference measure, which for
//! a toric manifold is uniform on the moment polytope.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::construct::{polytope_contains, random_dt_rep, sample_polytope, ActionCoords, AngleVector};
use crate::dynamics::dehn_twist_power;
use crate::error::{Result, TwistError};
use crate::surface::{curve_angle, moment_map, ChainCurve, ChainRep};

/// Walk steps between integrity audits (angle drift, Euler class,
/// ellipticity of the chain curves).
const AUDIT_INTERVAL: usize = 100;
/// Steps between renormalization of the generator matrices.
const RECANON_INTERVAL: usize = 64;
/// Allowed drift of the peripheral angles along a walk.
const TOL_ALPHA_DRIFT: f64 = 1e-6;

/// Which Dehn twists generate the walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeneratorSet {
    /// All 2(n-3) twists: tau_{b_i} and tau_{d_i}.
    All,
    /// Only the torus directions tau_{b_i}; the moment coordinates are
    /// frozen, so this walk cannot equidistribute.
    BOnly,
}

impl GeneratorSet {
    pub fn curves(&self, n: usize) -> Vec<ChainCurve> {
        let mut out = Vec::new();
        for i in 1..=n - 3 {
            out.push(ChainCurve::B(i));
            if *self == GeneratorSet::All {
                out.push(ChainCurve::D(i));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub alpha: AngleVector,
    pub steps: usize,
    pub seed: u64,
    pub generator_set: GeneratorSet,
    /// Record every k-th step (k >= 1); step 0 is always recorded.
    pub thinning: usize,
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        if self.alpha.n() < 4 {
            return Err(TwistError::InvalidInput(
                "walks need n >= 4 (no twist generators below that)".into(),
            ));
        }
        if self.thinning == 0 {
            return Err(TwistError::InvalidInput("thinning must be >= 1".into()));
        }
        Ok(())
    }
}

/// One recorded moment-map value along a walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub step: usize,
    pub x: Vec<f64>,
}

fn audit(rep: &ChainRep, alpha: &AngleVector, k_expected: i64, step: usize) -> Result<()> {
    for j in 1..=rep.n {
        let theta = curve_angle(rep, &ChainCurve::Peripheral(j))?;
        if (theta - alpha.alpha[j - 1]).abs() > TOL_ALPHA_DRIFT {
            return Err(TwistError::IntegrityFailure {
                step,
                what: format!("peripheral angle {j} drifted to {theta}"),
            });
        }
    }
    let report = crate::euler::relative_euler_class(rep).map_err(|e| {
        TwistError::IntegrityFailure {
            step,
            what: format!("euler class evaluation failed: {e}"),
        }
    })?;
    if report.k != k_expected {
        return Err(TwistError::IntegrityFailure {
            step,
            what: format!("euler class changed to {}", report.k),
        });
    }
    if !crate::euler::totally_elliptic_chain(rep) {
        return Err(TwistError::IntegrityFailure {
            step,
            what: "chain curve lost ellipticity".into(),
        });
    }
    Ok(())
}

/// Symmetric random walk on the twist subgroup: each step applies a
/// uniformly chosen generator Dehn twist or its inverse. Deterministic in
/// the seed; starts from `random_dt_rep(alpha, seed)`.
pub fn random_walk(cfg: &WalkConfig) -> Result<Vec<MomentSample>> {
    cfg.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(cfg.seed);
    let mut rep = random_dt_rep(&cfg.alpha, cfg.seed)?;
    let k_expected = (cfg.alpha.n() - 1) as i64;
    let curves = cfg.generator_set.curves(cfg.alpha.n());
    let mut samples = vec![MomentSample {
        step: 0,
        x: moment_map(&rep)?,
    }];
    for step in 1..=cfg.steps {
        let c = curves[rng.random_range(0..curves.len())];
        let m: i64 = if rng.random_bool(0.5) { 1 } else { -1 };
        rep = dehn_twist_power(&rep, &c, m)?;
        if step % RECANON_INTERVAL == 0 {
            rep.renormalize();
        }
        if step % AUDIT_INTERVAL == 0 {
            audit(&rep, &cfg.alpha, k_expected, step)?;
        }
        if step % cfg.thinning == 0 {
            samples.push(MomentSample {
                step,
                x: moment_map(&rep)?,
            });
        }
    }
    for s in &samples {
        let x = ActionCoords(s.x.clone());
        if !polytope_contains(&cfg.alpha, &x, -1e-6)? {
            return Err(TwistError::IntegrityFailure {
                step: s.step,
                what: "moment sample left the polytope".into(),
            });
        }
    }
    Ok(samples)
}

/// I.i.d. uniform samples on the moment polytope, the pushforward of the
/// normalized symplectic measure under the moment map.
pub fn dh_reference_sampler(
    alpha: &AngleVector,
    n_samples: usize,
    seed: u64,
) -> Result<Vec<ActionCoords>> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    (0..n_samples)
        .map(|_| sample_polytope(alpha, &mut rng))
        .collect()
}

/// Sup-norm distance between the empirical CDF of `sample` and `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(TwistError::EmptySample);
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    Ok(d)
}

/// CDF of the uniform law on (lo, hi).
pub fn uniform_cdf(lo: f64, hi: f64) -> impl Fn(f64) -> f64 {
    move |x| ((x - lo) / (hi - lo)).clamp(0.0, 1.0)
}

/// Interval of attainable theta_{b_1} values for n = 4.
pub fn n4_moment_interval(alpha: &AngleVector) -> Result<(f64, f64)> {
    if alpha.n() != 4 {
        return Err(TwistError::DimensionMismatch {
            expected: 4,
            got: alpha.n(),
        });
    }
    let a = &alpha.alpha;
    let lo = 4.0 * std::f64::consts::PI - a[0] - a[1];
    let hi = a[2] + a[3] - 2.0 * std::f64::consts::PI;
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn symmetric_alpha() -> AngleVector {
        AngleVector::new(vec![7.0 * PI / 4.0; 4]).unwrap()
    }

    fn cfg(steps: usize, gens: GeneratorSet) -> WalkConfig {
        WalkConfig {
            alpha: symmetric_alpha(),
            steps,
            seed: 42,
            generator_set: gens,
            thinning: 10,
        }
    }

    #[test]
    fn zero_steps_single_sample() {
        let samples = random_walk(&cfg(0, GeneratorSet::All)).unwrap();
        assert_eq!(samples.len(), 1);
        assert_eq!(samples[0].step, 0);
        assert_eq!(samples[0].x.len(), 1);
    }

    #[test]
    fn deterministic_in_seed() {
        let a = random_walk(&cfg(300, GeneratorSet::All)).unwrap();
        let b = random_walk(&cfg(300, GeneratorSet::All)).unwrap();
        assert_eq!(a, b);
        let mut other = cfg(300, GeneratorSet::All);
        other.seed = 43;
        assert_ne!(random_walk(&other).unwrap(), a);
    }

    #[test]
    fn volume_conserved_along_walk() {
        let alpha = symmetric_alpha();
        let mut rep = random_dt_rep(&alpha, 7).unwrap();
        let v0 = crate::euler::volume(&rep).unwrap();
        assert_abs_diff_eq!(v0, -alpha.lambda, epsilon = 1e-8);
        let mut rng = ChaCha12Rng::seed_from_u64(9);
        for _ in 0..200 {
            let c = if rng.random_bool(0.5) {
                ChainCurve::B(1)
            } else {
                ChainCurve::D(1)
            };
            let m = if rng.random_bool(0.5) { 1 } else { -1 };
            rep = dehn_twist_power(&rep, &c, m).unwrap();
        }
        assert_abs_diff_eq!(crate::euler::volume(&rep).unwrap(), v0, epsilon = 1e-7);
    }

    #[test]
    fn b_only_walk_freezes_moments() {
        let samples = random_walk(&cfg(2000, GeneratorSet::BOnly)).unwrap();
        let x0 = samples[0].x[0];
        for s in &samples {
            assert!((s.x[0] - x0).abs() < 1e-8, "step {}: {}", s.step, s.x[0]);
        }
    }

    #[test]
    fn dh_reference_n4_uniform() {
        let alpha = symmetric_alpha();
        let (lo, hi) = n4_moment_interval(&alpha).unwrap();
        assert_abs_diff_eq!(lo, PI / 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(hi, 3.0 * PI / 2.0, epsilon = 1e-12);
        let samples = dh_reference_sampler(&alpha, 20_000, 3).unwrap();
        for s in &samples {
            assert!(polytope_contains(&alpha, s, 0.0).unwrap());
        }
        let xs: Vec<f64> = samples.iter().map(|s| s.0[0]).collect();
        let d = ks_statistic(&xs, uniform_cdf(lo, hi)).unwrap();
        assert!(d < 0.02, "KS = {d}");
        // mean within 3 sigma of the centroid
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let sigma = (hi - lo) / (12.0f64).sqrt() / (xs.len() as f64).sqrt();
        assert!((mean - (lo + hi) / 2.0).abs() < 3.0 * sigma);
    }

    #[test]
    fn ks_statistic_properties() {
        assert!(matches!(
            ks_statistic(&[], uniform_cdf(0.0, 1.0)),
            Err(TwistError::EmptySample)
        ));
        // degenerate sample against a continuous law
        let d = ks_statistic(&[0.5; 10], uniform_cdf(0.0, 1.0)).unwrap();
        assert!(d >= 0.5);
        // order-independence
        let a = ks_statistic(&[0.9, 0.1, 0.4], uniform_cdf(0.0, 1.0)).unwrap();
        let b = ks_statistic(&[0.1, 0.4, 0.9], uniform_cdf(0.0, 1.0)).unwrap();
        assert_eq!(a, b);
        // calibration: uniform sample of 1e5 points
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..100_000).map(|_| rng.random_range(0.0..1.0)).collect();
        assert!(ks_statistic(&xs, uniform_cdf(0.0, 1.0)).unwrap() < 0.01);
    }
}
