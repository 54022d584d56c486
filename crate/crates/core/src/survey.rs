//! Sampled comparison of a symbol against its Gaussian or semigroup
//! approximant, with the pointwise envelope the residual should obey.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::SphereSpec;
use crate::multiplier::{
    cos_sq_sum, count_negative_cos, eval_folded_symbol, eval_gaussian_approximant,
    eval_semigroup_symbol, periodic_norm, sin_sq_sum, Branch, MultiplierMethod, SphereMultiplier,
    TorusPoint, DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `d >= 5`, `kappa <= 1/5`: `m_t` against `p^1` or `p^2`.
    Small,
    /// `100 d <= lambda <= d^3`: `m_t` against `p^1` or `p^2`.
    Intermediate,
    /// `a_t` against the semigroup symbol at time `t^2 / d`.
    Folded,
}

impl Regime {
    /// Checks the range of `(d, lambda)` the envelope is stated for.
    pub fn check(self, spec: SphereSpec) -> Result<()> {
        let d = spec.dim() as u128;
        let lambda = spec.radius_sq() as u128;
        match self {
            Regime::Small => {
                if d < 5 {
                    return Err(Error::RegimeViolation(format!(
                        "small regime needs d >= 5, got d = {d}"
                    )));
                }
                if 25 * lambda > d {
                    return Err(Error::RegimeViolation(format!(
                        "small regime needs kappa <= 1/5, i.e. 25 lambda <= d, got 25*{lambda} > {d}"
                    )));
                }
            }
            Regime::Intermediate => {
                if lambda < 100 * d {
                    return Err(Error::RegimeViolation(format!(
                        "intermediate regime needs 100 d <= lambda, got {lambda} < 100*{d}"
                    )));
                }
                if lambda > d * d * d {
                    return Err(Error::RegimeViolation(format!(
                        "intermediate regime needs lambda <= d^3, got {lambda} > {d}^3"
                    )));
                }
            }
            Regime::Folded => {
                if d < 2 {
                    return Err(Error::RegimeViolation("folded symbol needs d >= 2".into()));
                }
                if lambda == 0 {
                    return Err(Error::RegimeViolation(
                        "folded comparison needs lambda >= 1 (semigroup time t^2/d > 0)".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

impl std::str::FromStr for Regime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "small" => Ok(Regime::Small),
            "intermediate" => Ok(Regime::Intermediate),
            "folded" => Ok(Regime::Folded),
            other => Err(Error::Parse(format!("unknown regime '{other}'"))),
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Small => "small",
            Regime::Intermediate => "intermediate",
            Regime::Folded => "folded",
        })
    }
}

/// One sampled frequency with the symbol, its approximant and the envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSample {
    pub index: usize,
    pub xi: TorusPoint,
    pub m_value: Complex64,
    pub approx_value: Complex64,
    pub branch: Branch,
    pub v_cardinality: usize,
    /// `|m_value - approx_value|`.
    pub residual: f64,
    pub bound_value: f64,
    pub ratio: f64,
}

/// `residual / bound`, with `0/0 = 0` and `x/0 = inf` for `x > 0`.
pub fn safe_ratio(residual: f64, bound: f64) -> f64 {
    if residual == 0.0 {
        0.0
    } else if bound == 0.0 {
        f64::INFINITY
    } else {
        residual / bound
    }
}

/// `min{e^{-c kappa^2 S / 400}, kappa^2 S}`.
pub fn small_scale_envelope(kappa_sq: f64, s: f64, c: f64) -> f64 {
    (-c * kappa_sq * s / 400.0).exp().min(kappa_sq * s)
}

/// `min{kappa r, (kappa r)^{-1}} + kappa^{-1}`.
pub fn intermediate_envelope(kappa: f64, r: f64) -> f64 {
    let x = kappa * r;
    let head = if x == 0.0 { 0.0 } else { x.min(1.0 / x) };
    head + 1.0 / kappa
}

/// `min{t^2 |xi|^2 / d, t^{-1/2} d^{1/4} |xi|^{-1/2}}`.
pub fn folded_envelope(dim: usize, t: f64, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    let d = dim as f64;
    (t * t * r * r / d).min(t.powf(-0.5) * d.powf(0.25) * r.powf(-0.5))
}

/// Uniform pseudorandom points of `[-1/2, 1/2)^d`, deterministic in `seed`.
pub fn sample_torus_points(dim: usize, count: usize, seed: u64) -> Vec<TorusPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let coords = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            TorusPoint::new(coords).expect("gen::<f64>() lies in [0, 1)")
        })
        .collect()
}

/// Evaluates the residual and envelope at `xi = 0` followed by `samples`
/// pseudorandom frequencies.
pub fn residual_survey(
    spec: SphereSpec,
    regime: Regime,
    samples: usize,
    seed: u64,
) -> Result<Vec<SymbolSample>> {
    regime.check(spec)?;
    let mut points = vec![TorusPoint::zero(spec.dim())];
    points.extend(sample_torus_points(spec.dim(), samples, seed));
    match regime {
        Regime::Small | Regime::Intermediate => {
            let multiplier = SphereMultiplier::new(
                spec,
                MultiplierMethod::CoeffExtract,
                DEFAULT_ENUMERATION_CAP,
            )?;
            points
                .into_iter()
                .enumerate()
                .map(|(i, xi)| Ok(gaussian_sample(&multiplier, regime, i, xi)))
                .collect()
        }
        Regime::Folded => points
            .into_iter()
            .enumerate()
            .map(|(i, xi)| folded_sample(spec, i, xi))
            .collect(),
    }
}

fn gaussian_sample(
    multiplier: &SphereMultiplier,
    regime: Regime,
    index: usize,
    xi: TorusPoint,
) -> SymbolSample {
    let spec = multiplier.spec();
    let c = xi.coords();
    let branch = Branch::for_point(c);
    let m_value = multiplier.eval(c);
    let approx = eval_gaussian_approximant(spec, c, branch);
    let kappa = spec.kappa();
    let bound_value = match regime {
        Regime::Small => {
            let s = match branch {
                Branch::P1 => sin_sq_sum(c),
                Branch::P2 => cos_sq_sum(c),
            };
            small_scale_envelope(kappa * kappa, s, 1.0)
        }
        _ => {
            let r = match branch {
                Branch::P1 => periodic_norm(c),
                Branch::P2 => {
                    let shifted: Vec<f64> = c.iter().map(|v| v + 0.5).collect();
                    periodic_norm(&shifted)
                }
            };
            intermediate_envelope(kappa, r)
        }
    };
    let approx_value = Complex64::new(approx, 0.0);
    let residual = (m_value - approx_value).norm();
    SymbolSample {
        index,
        v_cardinality: count_negative_cos(c),
        xi,
        m_value,
        approx_value,
        branch,
        residual,
        bound_value,
        ratio: safe_ratio(residual, bound_value),
    }
}

fn folded_sample(spec: SphereSpec, index: usize, xi: TorusPoint) -> Result<SymbolSample> {
    let c = xi.coords();
    let t = spec.radius();
    let a = eval_folded_symbol(spec, c)?;
    let p = eval_semigroup_symbol(spec.radius_sq() as f64 / spec.dim() as f64, c)?;
    let residual = (a - p).abs();
    let bound_value = folded_envelope(spec.dim(), t, xi.norm());
    Ok(SymbolSample {
        index,
        v_cardinality: count_negative_cos(c),
        branch: Branch::P1,
        m_value: Complex64::new(a, 0.0),
        approx_value: Complex64::new(p, 0.0),
        xi,
        residual,
        bound_value,
        ratio: safe_ratio(residual, bound_value),
    })
}

/// Aggregate statistics of a survey.
#[derive(Debug, Clone, PartialEq)]
pub struct SurveySummary {
    pub samples: usize,
    pub max_ratio: f64,
    pub argmax: usize,
    pub max_residual: f64,
    pub mean_ratio: f64,
}

pub fn summarize(samples: &[SymbolSample]) -> SurveySummary {
    let mut summary = SurveySummary {
        samples: samples.len(),
        max_ratio: 0.0,
        argmax: 0,
        max_residual: 0.0,
        mean_ratio: 0.0,
    };
    let mut total = 0.0;
    for s in samples {
        if s.ratio > summary.max_ratio {
            summary.max_ratio = s.ratio;
            summary.argmax = s.index;
        }
        summary.max_residual = summary.max_residual.max(s.residual);
        total += s.ratio;
    }
    if !samples.is_empty() {
        summary.mean_ratio = total / samples.len() as f64;
    }
    summary
}

/// Largest `c` in `(0, 1]` for which every small-regime residual lies below
/// `min{e^{-c kappa^2 S / 400}, kappa^2 S}` with implicit constant 1.
///
/// `None` when even the limit `c -> 0` fails.
pub fn fit_small_scale_constant(spec: SphereSpec, samples: &[SymbolSample]) -> Option<f64> {
    let kappa_sq = spec.radius_sq() as f64 / spec.dim() as f64;
    let data: Vec<(f64, f64)> = samples
        .iter()
        .map(|s| {
            let c = s.xi.coords();
            let sum = match s.branch {
                Branch::P1 => sin_sq_sum(c),
                Branch::P2 => cos_sq_sum(c),
            };
            (s.residual, sum)
        })
        .collect();
    let holds = |c: f64| {
        data.iter()
            .all(|&(r, s)| r <= small_scale_envelope(kappa_sq, s, c))
    };
    if !data.iter().all(|&(r, s)| r <= (kappa_sq * s).min(1.0)) {
        return None;
    }
    if holds(1.0) {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo > 0.0).then_some(lo)
}
