//! Pointwise evaluation of the Fourier symbols attached to discrete and
//! continuous spherical averages.
//!
//! Frequencies live on the torus `T^d`, identified with the half-open cube
//! `Q = [-1/2, 1/2)^d`. The discrete sphere symbol `m_t` is evaluated either
//! by summing over the enumerated sphere or by extracting one coefficient of
//! a product of one-dimensional theta-type polynomials; the continuous
//! symbol of the normalized surface measure is evaluated by quadrature.

use std::f64::consts::{FRAC_PI_2, PI};

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::lattice::{enumerate_sphere, representation_count, SphereSpec};
use crate::quadrature;

/// Enumeration cap used when callers do not pass one explicitly.
pub const DEFAULT_ENUMERATION_CAP: u64 = 2_000_000;

/// Absolute tolerance of the quadrature behind [`eval_continuous_sphere_symbol`].
pub const SPHERE_SYMBOL_TOL: f64 = 1e-10;

/// A frequency in the fundamental cube `[-1/2, 1/2)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusPoint {
    coords: Vec<f64>,
}

impl TorusPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some(bad) = coords.iter().find(|c| !(-0.5..0.5).contains(*c)) {
            return Err(Error::Domain(format!(
                "torus coordinate {bad} is outside [-1/2, 1/2)"
            )));
        }
        Ok(Self { coords })
    }

    /// Reduces an arbitrary real vector into the fundamental cube.
    pub fn reduce(x: &[f64]) -> Self {
        let coords = x
            .iter()
            .map(|&v| {
                let r = v - (v + 0.5).floor();
                // guard against v - floor landing on +1/2 through rounding
                if r >= 0.5 {
                    r - 1.0
                } else {
                    r
                }
            })
            .collect();
        Self { coords }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            coords: vec![0.0; dim],
        }
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Euclidean norm, which coincides with the periodic norm on `Q`.
    pub fn norm(&self) -> f64 {
        self.coords.iter().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// `||x|| = (sum_j dist(x_j, Z)^2)^{1/2}`.
pub fn periodic_norm(x: &[f64]) -> f64 {
    x.iter()
        .map(|&v| {
            let d = v - (v + 0.5).floor();
            d * d
        })
        .sum::<f64>()
        .sqrt()
}

/// The unique integer vector `[[x]]` with `x - [[x]]` in `[-1/2, 1/2)^d`.
pub fn nearest_lattice(x: &[f64]) -> Vec<i64> {
    x.iter().map(|&v| (v + 0.5).floor() as i64).collect()
}

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub(crate) fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.carry += (self.sum - t) + v;
        } else {
            self.carry += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CompensatedComplex {
    re: Compensated,
    im: Compensated,
}

impl CompensatedComplex {
    fn add(&mut self, v: Complex64) {
        self.re.add(v.re);
        self.im.add(v.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// How the discrete sphere symbol is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MultiplierMethod {
    /// Sum `e^{2 pi i <xi, x>}` over the enumerated sphere.
    Direct,
    /// Extract the `z^lambda` coefficient of `prod_j sum_k e^{2 pi i xi_j k} z^{k^2}`.
    CoeffExtract,
}

/// The discrete sphere symbol `m_t` for a fixed sphere, with the count
/// `r_d(lambda)` and (for [`MultiplierMethod::Direct`]) the point list
/// computed once.
#[derive(Debug, Clone)]
pub struct SphereMultiplier {
    spec: SphereSpec,
    count: BigUint,
    count_f64: f64,
    points: Option<Vec<Vec<i64>>>,
}

impl SphereMultiplier {
    pub fn new(spec: SphereSpec, method: MultiplierMethod, cap: u64) -> Result<Self> {
        let count = representation_count(spec);
        if count.is_zero() {
            return Err(Error::EmptySphere {
                dim: spec.dim(),
                radius_sq: spec.radius_sq(),
            });
        }
        let points = match method {
            MultiplierMethod::Direct => Some(enumerate_sphere(spec, cap)?),
            MultiplierMethod::CoeffExtract => None,
        };
        let count_f64 = count.to_f64().unwrap_or(f64::INFINITY);
        Ok(Self {
            spec,
            count,
            count_f64,
            points,
        })
    }

    pub fn spec(&self) -> SphereSpec {
        self.spec
    }

    pub fn count(&self) -> &BigUint {
        &self.count
    }

    pub fn method(&self) -> MultiplierMethod {
        if self.points.is_some() {
            MultiplierMethod::Direct
        } else {
            MultiplierMethod::CoeffExtract
        }
    }

    /// `m_t(xi)`. Coordinates need not be reduced; the symbol is 1-periodic.
    pub fn eval(&self, xi: &[f64]) -> Complex64 {
        assert_eq!(xi.len(), self.spec.dim(), "frequency dimension mismatch");
        let numerator = match &self.points {
            Some(points) => direct_numerator(points, xi),
            None => coefficient_numerator(self.spec.radius_sq(), xi),
        };
        numerator / self.count_f64
    }
}

fn direct_numerator(points: &[Vec<i64>], xi: &[f64]) -> Complex64 {
    let mut acc = CompensatedComplex::default();
    for x in points {
        let phase: f64 = x.iter().zip(xi).map(|(&k, &w)| k as f64 * w).sum();
        acc.add(Complex64::cis(2.0 * PI * phase));
    }
    acc.value()
}

fn coefficient_numerator(radius_sq: u64, xi: &[f64]) -> Complex64 {
    let lambda = radius_sq as usize;
    let max_k = radius_sq.isqrt() as usize;
    let factor = |w: f64| -> Vec<Complex64> {
        (0..=max_k)
            .map(|k| {
                if k == 0 {
                    Complex64::new(1.0, 0.0)
                } else {
                    let theta = 2.0 * PI * w * k as f64;
                    Complex64::cis(theta) + Complex64::cis(-theta)
                }
            })
            .collect()
    };
    let mut acc = vec![Complex64::zero(); lambda + 1];
    acc[0] = Complex64::new(1.0, 0.0);
    let (last, init) = xi.split_last().expect("dimension at least one");
    for &w in init {
        let coeffs = factor(w);
        let mut next = vec![Complex64::zero(); lambda + 1];
        for (n, slot) in next.iter_mut().enumerate() {
            let mut sum = CompensatedComplex::default();
            for (k, c) in coeffs.iter().enumerate() {
                let s = k * k;
                if s > n {
                    break;
                }
                let a = acc[n - s];
                if a.re != 0.0 || a.im != 0.0 {
                    sum.add(a * c);
                }
            }
            *slot = sum.value();
        }
        acc = next;
    }
    let coeffs = factor(*last);
    let mut sum = CompensatedComplex::default();
    for (k, c) in coeffs.iter().enumerate() {
        let s = k * k;
        if s > lambda {
            break;
        }
        sum.add(acc[lambda - s] * c);
    }
    sum.value()
}

/// `m_t(xi) = r_d(lambda)^{-1} sum_{|x|^2 = lambda} e^{2 pi i <xi, x>}`.
pub fn eval_sphere_multiplier(
    spec: SphereSpec,
    xi: &TorusPoint,
    method: MultiplierMethod,
) -> Result<Complex64> {
    if xi.dim() != spec.dim() {
        return Err(Error::Shape(format!(
            "frequency has dimension {}, sphere has {}",
            xi.dim(),
            spec.dim()
        )));
    }
    Ok(SphereMultiplier::new(spec, method, DEFAULT_ENUMERATION_CAP)?.eval(xi.coords()))
}

/// Which Gaussian approximant is used at a frequency.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// `exp(-kappa^2 sum sin^2(pi xi_j))`, used when `|V_xi| <= d/2`.
    P1,
    /// `(-1)^lambda exp(-kappa^2 sum cos^2(pi xi_j))`, used when `|V_xi| > d/2`.
    P2,
}

impl Branch {
    pub fn for_point(xi: &[f64]) -> Self {
        if 2 * count_negative_cos(xi) <= xi.len() {
            Branch::P1
        } else {
            Branch::P2
        }
    }
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Branch::P1 => "P1",
            Branch::P2 => "P2",
        })
    }
}

/// `|V_xi| = #{j : cos(2 pi xi_j) < 0} = #{j : 1/4 < ||xi_j|| <= 1/2}`.
pub fn count_negative_cos(xi: &[f64]) -> usize {
    xi.iter()
        .filter(|&&v| (v - (v + 0.5).floor()).abs() > 0.25)
        .count()
}

pub(crate) fn sin_sq_sum(xi: &[f64]) -> f64 {
    xi.iter().map(|&v| (PI * v).sin().powi(2)).sum()
}

pub(crate) fn cos_sq_sum(xi: &[f64]) -> f64 {
    xi.iter().map(|&v| (PI * v).cos().powi(2)).sum()
}

/// The Gaussian approximants `p^1_lambda` and `p^2_lambda`.
pub fn eval_gaussian_approximant(spec: SphereSpec, xi: &[f64], branch: Branch) -> f64 {
    let kappa_sq = spec.radius_sq() as f64 / spec.dim() as f64;
    match branch {
        Branch::P1 => (-kappa_sq * sin_sq_sum(xi)).exp(),
        Branch::P2 => {
            let sign = if spec.radius_sq().is_multiple_of(2) { 1.0 } else { -1.0 };
            sign * (-kappa_sq * cos_sq_sum(xi)).exp()
        }
    }
}

/// Symbol of the heat-type semigroup generated by the discrete Laplacian,
/// `exp(-time * sum_k sin^2(pi xi_k))`.
pub fn eval_semigroup_symbol(time: f64, xi: &[f64]) -> Result<f64> {
    if !(time > 0.0) {
        return Err(Error::Domain(format!(
            "semigroup time must be positive, got {time}"
        )));
    }
    Ok((-time * sin_sq_sum(xi)).exp())
}

/// `int_0^{pi/2} cos^n(u) du`.
fn wallis(n: usize) -> f64 {
    let (mut k, mut w) = if n.is_multiple_of(2) { (0, FRAC_PI_2) } else { (1, 1.0) };
    while k < n {
        k += 2;
        w *= (k - 1) as f64 / k as f64;
    }
    w
}

/// Fourier transform of the normalized surface measure on `S^{d-1}` at any
/// frequency of Euclidean length `radius`.
///
/// Uses `mu_hat(r) = c_d int_{-1}^{1} cos(2 pi r s) (1 - s^2)^{(d-3)/2} ds`
/// after the substitution `s = sin u`, which removes the endpoint
/// singularity at `d = 2`.
pub fn eval_continuous_sphere_symbol(dim: usize, radius: f64) -> Result<f64> {
    eval_continuous_sphere_symbol_tol(dim, radius, SPHERE_SYMBOL_TOL)
}

pub fn eval_continuous_sphere_symbol_tol(dim: usize, radius: f64, tol: f64) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(format!(
            "sphere symbol needs d >= 2, got {dim}"
        )));
    }
    let r = radius.abs();
    if r == 0.0 {
        return Ok(1.0);
    }
    if !r.is_finite() {
        return Err(Error::Domain("radius must be finite".into()));
    }
    let power = (dim - 2) as i32;
    let norm = wallis(dim - 2);
    let panels = (2.0 * r).ceil() as usize + 1;
    let integral = quadrature::integrate(
        |u: f64| (2.0 * PI * r * u.sin()).cos() * u.cos().powi(power),
        0.0,
        FRAC_PI_2,
        tol * norm,
        panels,
        panels + 4000,
    )?;
    Ok(integral / norm)
}

/// `a_t(xi) = mu_hat(t (xi - [[xi]]))`, 1-periodic in every coordinate.
pub fn eval_folded_symbol(spec: SphereSpec, xi: &[f64]) -> Result<f64> {
    eval_continuous_sphere_symbol(spec.dim(), spec.radius() * periodic_norm(xi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(d: usize, l: u64) -> SphereSpec {
        SphereSpec::new(d, l).unwrap()
    }

    #[test]
    fn periodic_norm_examples() {
        assert_eq!(periodic_norm(&[0.5, 0.0]), 0.5);
        assert_eq!(periodic_norm(&[1.0, 1.0]), 0.0);
        assert_eq!(periodic_norm(&[0.75]), 0.25);
    }

    #[test]
    fn nearest_lattice_examples() {
        assert_eq!(nearest_lattice(&[0.4, -0.4]), vec![0, 0]);
        assert_eq!(nearest_lattice(&[0.5, 1.5]), vec![1, 2]);
        assert_eq!(nearest_lattice(&[-0.5]), vec![0]);
    }

    #[test]
    fn torus_point_validation_and_reduction() {
        assert!(TorusPoint::new(vec![0.5]).is_err());
        assert!(TorusPoint::new(vec![-0.5, 0.49]).is_ok());
        assert_eq!(
            TorusPoint::reduce(&[0.5, 1.25, -0.75]).coords(),
            &[-0.5, 0.25, 0.25]
        );
    }

    #[test]
    fn multiplier_at_origin_is_one() {
        for method in [MultiplierMethod::Direct, MultiplierMethod::CoeffExtract] {
            let v = eval_sphere_multiplier(spec(3, 5), &TorusPoint::zero(3), method).unwrap();
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn four_point_circle() {
        let xi = TorusPoint::new(vec![0.25, 0.0]).unwrap();
        for method in [MultiplierMethod::Direct, MultiplierMethod::CoeffExtract] {
            let v = eval_sphere_multiplier(spec(2, 1), &xi, method).unwrap();
            assert!(
                (v - Complex64::new(0.5, 0.0)).norm() < 1e-15,
                "{method:?} {v}"
            );
        }
    }

    #[test]
    fn methods_agree_at_half_point() {
        let xi = TorusPoint::new(vec![-0.5, -0.5, -0.5]).unwrap();
        let a = eval_sphere_multiplier(spec(3, 2), &xi, MultiplierMethod::Direct).unwrap();
        let b = eval_sphere_multiplier(spec(3, 2), &xi, MultiplierMethod::CoeffExtract).unwrap();
        assert!((a - b).norm() < 1e-12);
        // 12 points (+-1, +-1, 0) and permutations: every phase is e^{i pi * even} = 1
        assert!((a.re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_sphere_errors() {
        let xi = TorusPoint::zero(2);
        assert!(matches!(
            eval_sphere_multiplier(spec(2, 3), &xi, MultiplierMethod::CoeffExtract),
            Err(Error::EmptySphere { .. })
        ));
    }

    #[test]
    fn gaussian_approximants() {
        assert_eq!(
            eval_gaussian_approximant(spec(4, 3), &[0.0; 4], Branch::P1),
            1.0
        );
        let v = eval_gaussian_approximant(spec(4, 2), &[-0.5; 4], Branch::P2);
        assert!((v - 1.0).abs() < 1e-15);
        let mut xi = vec![0.0; 25];
        xi[0] = -0.5;
        let v = eval_gaussian_approximant(spec(25, 1), &xi, Branch::P1);
        assert!((v - (-1.0f64 / 25.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn semigroup_examples() {
        assert_eq!(eval_semigroup_symbol(3.0, &[0.0, 0.0]).unwrap(), 1.0);
        let v = eval_semigroup_symbol(1.0, &[-0.5]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
        assert!(eval_semigroup_symbol(0.0, &[0.1]).is_err());
    }

    #[test]
    fn sphere_symbol_closed_forms() {
        assert_eq!(eval_continuous_sphere_symbol(7, 0.0).unwrap(), 1.0);
        for &r in &[0.05, 0.3, 1.7, 6.2, 40.0] {
            let z = 2.0 * PI * r;
            let v3 = eval_continuous_sphere_symbol(3, r).unwrap();
            assert!((v3 - z.sin() / z).abs() < 1e-10, "d=3 r={r}");
            // d = 5: 3 j_1(z) / z
            let j1 = z.sin() / (z * z) - z.cos() / z;
            let v5 = eval_continuous_sphere_symbol(5, r).unwrap();
            assert!((v5 - 3.0 * j1 / z).abs() < 1e-10, "d=5 r={r}");
        }
        assert!(eval_continuous_sphere_symbol(1, 0.3).is_err());
    }

    #[test]
    fn sphere_symbol_small_frequency_bound() {
        let v = eval_continuous_sphere_symbol(16, 0.1).unwrap();
        assert!((v - 1.0).abs() <= 2.0 * PI * PI * 0.01 / 16.0);
    }

    #[test]
    fn folded_symbol_examples() {
        let s = spec(3, 4);
        assert_eq!(eval_folded_symbol(s, &[1.0, -2.0, 0.0]).unwrap(), 1.0);
        let a = eval_folded_symbol(s, &[0.1, 0.2, 0.3]).unwrap();
        let b = eval_folded_symbol(s, &[1.1, 0.2, 0.3]).unwrap();
        assert!((a - b).abs() < 1e-12);
        let z = 0.4 * PI;
        let v = eval_folded_symbol(s, &[0.1, 0.0, 0.0]).unwrap();
        assert!((v - z.sin() / z).abs() < 1e-10);
    }

    #[test]
    fn negative_cosine_counts() {
        assert_eq!(count_negative_cos(&[0.0, 0.0]), 0);
        assert_eq!(count_negative_cos(&[0.5, 0.5, 0.0]), 2);
        assert_eq!(count_negative_cos(&[0.3, 0.2]), 1);
        assert_eq!(Branch::for_point(&[0.3, 0.2]), Branch::P1);
        assert_eq!(Branch::for_point(&[0.3, 0.4, 0.1]), Branch::P2);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut c = Compensated::default();
        c.add(1e16);
        c.add(1.0);
        c.add(-1e16);
        assert_eq!(c.value(), 1.0);
    }
}
