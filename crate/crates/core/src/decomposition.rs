//! Major-arc approximation of the discrete sphere symbol.
//!
//! `m_t = sum_{q < n} a_{t,p/q} + b_{t,n} + E_{t,n}`, where the sums run
//! over the Farey set `H_N` with `N = floor(t)`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cutoff::BumpCutoff;
use crate::error::{Error, Result};
use crate::gauss::{farey_set, gauss_sum, FareyFraction};
use crate::lattice::{density_ratio_from_count, representation_count, surface_measure, SphereSpec};
use crate::multiplier::{
    eval_continuous_sphere_symbol, nearest_lattice, MultiplierMethod, SphereMultiplier, TorusPoint,
    DEFAULT_ENUMERATION_CAP,
};

/// Default cap on the `d * lambda^2` cost estimate.
pub const DEFAULT_COST_BUDGET: f64 = 1e10;

/// Scalars shared by every arc term of one sphere.
#[derive(Debug, Clone, Copy)]
struct ArcContext {
    spec: SphereSpec,
    /// `lambda^{d/2-1} sigma(S) / (2 r_d(lambda))`.
    scale: f64,
}

impl ArcContext {
    fn new(spec: SphereSpec) -> Result<Self> {
        let count = representation_count(spec);
        if num_traits::Zero::is_zero(&count) {
            return Err(Error::EmptySphere {
                dim: spec.dim(),
                radius_sq: spec.radius_sq(),
            });
        }
        let ratio = density_ratio_from_count(spec, &count);
        Ok(Self {
            spec,
            scale: 0.5 * ratio * surface_measure(spec.dim())?,
        })
    }

    /// `e^{-2 pi i lambda p / q}` with `lambda p` reduced modulo `q` exactly.
    fn phase(&self, frac: FareyFraction) -> Complex64 {
        let q = frac.q() as u128;
        let e = (self.spec.radius_sq() as u128 % q) * (frac.p() as u128) % q;
        Complex64::cis(-2.0 * PI * e as f64 / q as f64)
    }

    /// The arc term at the lattice point `x`, without any cutoff.
    fn term_at(&self, frac: FareyFraction, xi: &[f64], x: &[i64]) -> Result<Complex64> {
        let q = frac.q() as f64;
        let dist = x
            .iter()
            .zip(xi)
            .map(|(&xj, &w)| (xj as f64 / q - w).powi(2))
            .sum::<f64>()
            .sqrt();
        let mu = eval_continuous_sphere_symbol(self.spec.dim(), self.spec.radius() * dist)?;
        let g = gauss_sum(frac.p() as i64, frac.q(), x)?;
        Ok(self.phase(frac) * g * (self.scale * mu))
    }

    fn major(&self, frac: FareyFraction, xi: &[f64]) -> Result<Complex64> {
        let scaled: Vec<f64> = xi.iter().map(|w| w * frac.q() as f64).collect();
        self.term_at(frac, xi, &nearest_lattice(&scaled))
    }

    /// Only `x = [[q xi]]` can put `q xi - x` inside the cutoff support,
    /// since the support half-width `1/4` is below `1/2`.
    fn localized(&self, frac: FareyFraction, xi: &[f64], cut: &BumpCutoff) -> Result<Complex64> {
        let scaled: Vec<f64> = xi.iter().map(|w| w * frac.q() as f64).collect();
        let x = nearest_lattice(&scaled);
        let offset: Vec<f64> = scaled
            .iter()
            .zip(&x)
            .map(|(s, &xj)| s - xj as f64)
            .collect();
        let weight = cut.eval(&offset);
        if weight == 0.0 {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(self.term_at(frac, xi, &x)? * weight)
    }
}

fn check_dim(spec: SphereSpec, xi: &[f64]) -> Result<()> {
    if xi.len() != spec.dim() {
        return Err(Error::Shape(format!(
            "frequency has dimension {}, sphere has {}",
            xi.len(),
            spec.dim()
        )));
    }
    Ok(())
}

/// `a_{t,p/q}(xi) = (lambda^{d/2-1} / (2 r_d(lambda))) e^{-2 pi i lambda p/q}
/// G(p/q; [[q xi]]) sigma(S) mu_hat(t |[[q xi]]/q - xi|)`.
pub fn eval_major_arc_term(spec: SphereSpec, frac: FareyFraction, xi: &[f64]) -> Result<Complex64> {
    check_dim(spec, xi)?;
    ArcContext::new(spec)?.major(frac, xi)
}

fn check_cutoff_index(spec: SphereSpec, n: u64) -> Result<()> {
    let hi = spec.floor_radius() + 1;
    if n < 1 || n > hi {
        return Err(Error::Range {
            index: n as i64,
            lo: 1,
            hi: hi as i64,
        });
    }
    Ok(())
}

fn farey_for(spec: SphereSpec) -> Result<Vec<FareyFraction>> {
    farey_set(spec.floor_radius().max(1)).map(|set| {
        set.into_iter()
            .filter(|f| f.q() <= spec.floor_radius())
            .collect()
    })
}

/// `b_{t,n}(xi)`: the arc terms with `q >= n`, each localized by
/// `Theta(q xi - x)`.
pub fn eval_minor_term(spec: SphereSpec, n: u64, xi: &[f64]) -> Result<Complex64> {
    check_dim(spec, xi)?;
    check_cutoff_index(spec, n)?;
    let ctx = ArcContext::new(spec)?;
    minor_sum(&ctx, &farey_for(spec)?, n, xi)
}

fn minor_sum(ctx: &ArcContext, farey: &[FareyFraction], n: u64, xi: &[f64]) -> Result<Complex64> {
    let cut = BumpCutoff::theta();
    farey
        .iter()
        .filter(|f| f.q() >= n)
        .map(|&f| ctx.localized(f, xi, &cut))
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub spec: SphereSpec,
    pub cutoff_index: u64,
    pub xi: TorusPoint,
    pub m_value: Complex64,
    pub major_sum: Complex64,
    pub minor_term: Complex64,
    /// `m_value - major_sum - minor_term`.
    pub total_error: Complex64,
    /// `d^{3d/4} / lambda^{d/4 - 1}`.
    pub error_bound: f64,
}

impl DecompositionReport {
    /// `|major + minor + E - m_t|`; zero up to the rounding of two subtractions.
    pub fn bookkeeping_residual(&self) -> f64 {
        (self.major_sum + self.minor_term + self.total_error - self.m_value).norm()
    }
}

/// `d^{3d/4} / lambda^{d/4 - 1}`, evaluated in the log domain.
pub fn decomposition_envelope(spec: SphereSpec) -> f64 {
    let d = spec.dim() as f64;
    if spec.radius_sq() == 0 {
        return f64::INFINITY;
    }
    (0.75 * d * d.ln() - (d / 4.0 - 1.0) * (spec.radius_sq() as f64).ln()).exp()
}

/// `d * lambda^2`, the coefficient-extraction cost estimate.
pub fn decomposition_cost(spec: SphereSpec) -> f64 {
    spec.dim() as f64 * (spec.radius_sq() as f64).powi(2)
}

pub fn decomposition_error(
    spec: SphereSpec,
    n: u64,
    xi: &TorusPoint,
    budget: f64,
) -> Result<DecompositionReport> {
    let multiplier = prepare(spec, budget)?;
    decompose_with(&multiplier, n, xi)
}

/// Checks the cost guard and builds the symbol evaluator for
/// [`decompose_with`].
pub fn prepare(spec: SphereSpec, budget: f64) -> Result<SphereMultiplier> {
    let cost = decomposition_cost(spec);
    if cost > budget {
        return Err(Error::InfeasibleScale { cost, budget });
    }
    SphereMultiplier::new(
        spec,
        MultiplierMethod::CoeffExtract,
        DEFAULT_ENUMERATION_CAP,
    )
}

/// [`decomposition_error`] reusing a prepared symbol evaluator.
pub fn decompose_with(
    multiplier: &SphereMultiplier,
    n: u64,
    xi: &TorusPoint,
) -> Result<DecompositionReport> {
    let spec = multiplier.spec();
    check_dim(spec, xi.coords())?;
    check_cutoff_index(spec, n)?;
    let ctx = ArcContext::new(spec)?;
    let farey = farey_for(spec)?;
    let c = xi.coords();
    let m_value = multiplier.eval(c);
    let major_sum: Complex64 = farey
        .iter()
        .filter(|f| f.q() < n)
        .map(|&f| ctx.major(f, c))
        .sum::<Result<Complex64>>()?;
    let minor_term = minor_sum(&ctx, &farey, n, c)?;
    Ok(DecompositionReport {
        spec,
        cutoff_index: n,
        xi: xi.clone(),
        m_value,
        major_sum,
        minor_term,
        total_error: m_value - major_sum - minor_term,
        error_bound: decomposition_envelope(spec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, l: u64) -> SphereSpec {
        SphereSpec::new(d, l).unwrap()
    }

    #[test]
    fn major_arc_at_origin_q1() {
        let s = spec(4, 5);
        let one = FareyFraction::new(1, 1).unwrap();
        let v = eval_major_arc_term(s, one, &[0.0; 4]).unwrap();
        // r_4(5) = 48, lambda^{d/2-1} = 5, sigma(S^3) = 2 pi^2
        let expect = 5.0 * 2.0 * PI * PI / (2.0 * 48.0);
        assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cutoff_index_range() {
        let s = spec(2, 4);
        assert!(matches!(
            eval_minor_term(s, 0, &[0.0, 0.0]),
            Err(Error::Range { .. })
        ));
        assert!(matches!(
            eval_minor_term(s, 4, &[0.0, 0.0]),
            Err(Error::Range { .. })
        ));
        assert_eq!(
            eval_minor_term(s, 3, &[0.1, 0.2]).unwrap(),
            Complex64::new(0.0, 0.0)
        );
    }

    #[test]
    fn first_cutoff_has_empty_major_sum() {
        let r = decomposition_error(
            spec(3, 9),
            1,
            &TorusPoint::new(vec![0.1, -0.2, 0.3]).unwrap(),
            1e10,
        )
        .unwrap();
        assert_eq!(r.major_sum, Complex64::new(0.0, 0.0));
        assert!(r.bookkeeping_residual() < 1e-12);
    }

    #[test]
    fn cost_guard() {
        let err = decomposition_error(spec(16, 1024), 1, &TorusPoint::zero(16), 1e6).unwrap_err();
        assert!(matches!(err, Error::InfeasibleScale { .. }));
    }

    #[test]
    fn envelope_value() {
        let b = decomposition_envelope(spec(16, 1024));
        let expect = 16f64.powi(12) / 1024f64.powi(3);
        assert!((b - expect).abs() < 1e-9 * expect);
    }
}
