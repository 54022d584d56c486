//! Lattice points on spheres in `Z^d`.
//!
//! Counting is done exactly by extracting coefficients of the truncated
//! theta series `(sum_k z^{k^2})^d`; enumeration is only offered for spheres
//! below a caller-supplied cap, because `r_d(lambda)` grows like
//! `lambda^{d/2 - 1}`.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// A lattice sphere `{x in Z^d : |x|^2 = lambda}`.
///
/// Only the squared radius is stored; `t = sqrt(lambda)` is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SphereSpec {
    dim: usize,
    radius_sq: u64,
}

impl SphereSpec {
    pub fn new(dim: usize, radius_sq: u64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be at least 1".into()));
        }
        Ok(Self { dim, radius_sq })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The squared radius `lambda = t^2`.
    pub fn radius_sq(&self) -> u64 {
        self.radius_sq
    }

    /// The radius `t`.
    pub fn radius(&self) -> f64 {
        (self.radius_sq as f64).sqrt()
    }

    /// `kappa(d, lambda) = sqrt(lambda / d)`.
    pub fn kappa(&self) -> f64 {
        (self.radius_sq as f64 / self.dim as f64).sqrt()
    }

    /// `N = floor(t)`, computed exactly.
    pub fn floor_radius(&self) -> u64 {
        self.radius_sq.isqrt()
    }
}

/// Truncation of the one-dimensional theta series `sum_{k in Z} z^{k^2}`
/// to exponents `0..=degree_cap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThetaPolynomial {
    coefficients: Vec<BigUint>,
}

impl ThetaPolynomial {
    pub fn new(degree_cap: u64) -> Self {
        let len = degree_cap as usize + 1;
        let mut coefficients = vec![BigUint::zero(); len];
        coefficients[0] = BigUint::one();
        let mut k = 1usize;
        while k * k < len {
            coefficients[k * k] = BigUint::from(2u32);
            k += 1;
        }
        Self { coefficients }
    }

    pub fn degree_cap(&self) -> u64 {
        self.coefficients.len() as u64 - 1
    }

    pub fn coefficients(&self) -> &[BigUint] {
        &self.coefficients
    }

    /// Coefficients of the `power`-th truncated power, i.e. `r_power(m)` for
    /// every `m <= degree_cap`.
    pub fn power(&self, power: usize) -> Vec<BigUint> {
        let len = self.coefficients.len();
        let squares: Vec<usize> = (0..)
            .map(|k: usize| k * k)
            .take_while(|&s| s < len)
            .collect();
        let mut acc = vec![BigUint::zero(); len];
        acc[0] = BigUint::one();
        for _ in 0..power {
            let mut next = vec![BigUint::zero(); len];
            for (m, slot) in next.iter_mut().enumerate() {
                for &s in squares.iter().take_while(|&&s| s <= m) {
                    let c = &acc[m - s];
                    if c.is_zero() {
                        continue;
                    }
                    if s == 0 {
                        *slot += c;
                    } else {
                        *slot += c << 1u32;
                    }
                }
            }
            acc = next;
        }
        acc
    }
}

/// `r_d(m)` for all `m <= cap`.
pub fn sphere_counts(dim: usize, cap: u64) -> Vec<BigUint> {
    ThetaPolynomial::new(cap).power(dim)
}

/// `r_d(lambda) = #{x in Z^d : |x|^2 = lambda}`, exactly.
pub fn representation_count(spec: SphereSpec) -> BigUint {
    sphere_counts(spec.dim, spec.radius_sq)
        .pop()
        .unwrap_or_default()
}

/// All points of the sphere in lexicographic order.
///
/// Refuses with [`Error::CapExceeded`] when the sphere has more than `cap`
/// points.
pub fn enumerate_sphere(spec: SphereSpec, cap: u64) -> Result<Vec<Vec<i64>>> {
    let count = representation_count(spec);
    if count > BigUint::from(cap) {
        return Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    let mut out = Vec::with_capacity(count.to_usize().unwrap_or(0));
    let mut current = vec![0i64; spec.dim];
    enumerate_rec(0, spec.radius_sq as i64, &mut current, &mut out);
    debug_assert_eq!(BigUint::from(out.len()), count);
    Ok(out)
}

fn enumerate_rec(axis: usize, remaining: i64, current: &mut [i64], out: &mut Vec<Vec<i64>>) {
    let dim = current.len();
    let bound = (remaining as u64).isqrt() as i64;
    if axis + 1 == dim {
        if bound * bound == remaining {
            if bound == 0 {
                current[axis] = 0;
                out.push(current.to_vec());
            } else {
                current[axis] = -bound;
                out.push(current.to_vec());
                current[axis] = bound;
                out.push(current.to_vec());
            }
        }
        return;
    }
    for x in -bound..=bound {
        current[axis] = x;
        enumerate_rec(axis + 1, remaining - x * x, current, out);
    }
}

/// Surface measure `sigma(S^{d-1}) = 2 pi^{d/2} / Gamma(d/2)` of the unit
/// sphere in `R^d`.
pub fn surface_measure(dim: usize) -> Result<f64> {
    if dim < 2 {
        return Err(Error::Domain(format!(
            "surface measure needs d >= 2, got {dim}"
        )));
    }
    // sigma_d = 2 pi sigma_{d-2} / (d - 2), seeded with sigma_2 = 2 pi, sigma_3 = 4 pi.
    let (mut d, mut sigma) = if dim.is_multiple_of(2) {
        (2, 2.0 * PI)
    } else {
        (3, 4.0 * PI)
    };
    while d < dim {
        d += 2;
        sigma *= 2.0 * PI / (d - 2) as f64;
    }
    Ok(sigma)
}

/// Natural logarithm of a big integer, without overflowing `f64`.
pub fn big_ln(value: &BigUint) -> f64 {
    let bits = value.bits();
    if bits <= 1000 {
        return value.to_f64().map_or(f64::INFINITY, f64::ln);
    }
    let shift = bits - 64;
    let top = (value >> shift).to_f64().unwrap_or(f64::INFINITY);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// `lambda^{d/2 - 1} / r_d(lambda)`.
pub fn density_ratio(spec: SphereSpec) -> Result<f64> {
    let count = representation_count(spec);
    if count.is_zero() {
        return Err(Error::EmptySphere {
            dim: spec.dim,
            radius_sq: spec.radius_sq,
        });
    }
    Ok(density_ratio_from_count(spec, &count))
}

pub(crate) fn density_ratio_from_count(spec: SphereSpec, count: &BigUint) -> f64 {
    let exponent = spec.dim as f64 / 2.0 - 1.0;
    if spec.radius_sq == 0 {
        return if exponent == 0.0 { 1.0 } else { 0.0 };
    }
    // direct quotient while both sides are exact or at least finite in f64
    if let Some(c) = count.to_u64().filter(|&c| c < 1 << 53) {
        let num = (spec.radius_sq as f64).powf(exponent);
        if num.is_normal() {
            return num / c as f64;
        }
    }
    (exponent * (spec.radius_sq as f64).ln() - big_ln(count)).exp()
}
