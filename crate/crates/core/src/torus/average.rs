//! Spatial-side averaging: spherical averages, dyadic maximal functions and
//! sampled-kernel convolution.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use rustfft::FftDirection;

use super::fourier::fft_in_place;
use super::{shifted_indices, TorusField, ValueKind};
use crate::error::{Error, Result};
use crate::lattice::{enumerate_sphere, representation_count, SphereSpec};
use crate::multiplier::DEFAULT_ENUMERATION_CAP;

fn check_sphere(f: &TorusField, spec: SphereSpec) -> Result<()> {
    if spec.dim() != f.dim() {
        return Err(Error::Shape(format!(
            "sphere dimension {} does not match field dimension {}",
            spec.dim(),
            f.dim()
        )));
    }
    Ok(())
}

/// `(A_t f)(x) = r_d(lambda)^{-1} sum_{|y|^2 = lambda} f(x - y mod L)`,
/// entrywise on matrix fibers.
pub fn spherical_average(f: &TorusField, spec: SphereSpec) -> Result<TorusField> {
    spherical_average_with_cap(f, spec, DEFAULT_ENUMERATION_CAP)
}

pub fn spherical_average_with_cap(
    f: &TorusField,
    spec: SphereSpec,
    cap: u64,
) -> Result<TorusField> {
    check_sphere(f, spec)?;
    let points = sphere_points(spec, cap)?;
    let fl = f.fiber_len();
    let src = f.values();
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for y in &points {
        let shift: Vec<i64> = y.iter().map(|v| -v).collect();
        let idx = shifted_indices(f.dim(), f.side(), &shift);
        for (site, &from) in idx.iter().enumerate() {
            for c in 0..fl {
                out[site * fl + c] += src[from * fl + c];
            }
        }
    }
    let scale = 1.0 / points.len() as f64;
    out.iter_mut().for_each(|v| *v *= scale);
    Ok(f.with_values(out))
}

fn sphere_points(spec: SphereSpec, cap: u64) -> Result<Vec<Vec<i64>>> {
    let points = enumerate_sphere(spec, cap)?;
    if points.is_empty() {
        return Err(Error::EmptySphere {
            dim: spec.dim(),
            radius_sq: spec.radius_sq(),
        });
    }
    Ok(points)
}

/// Dyadic scales `t = 2^m` with `2 t < L` for every `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DyadicRange {
    exponents: BTreeSet<u32>,
}

impl DyadicRange {
    pub fn new(exponents: impl IntoIterator<Item = u32>, side: usize) -> Result<Self> {
        let exponents: BTreeSet<u32> = exponents.into_iter().collect();
        let Some(&max) = exponents.last() else {
            return Err(Error::Domain(
                "dyadic range must contain at least one scale".into(),
            ));
        };
        if max >= 62 || (2u128 << max) >= side as u128 {
            return Err(Error::Domain(format!(
                "scale 2^{max} needs a torus side above {}, got {side}",
                2u128 << max.min(62)
            )));
        }
        Ok(Self { exponents })
    }

    pub fn exponents(&self) -> impl Iterator<Item = u32> + '_ {
        self.exponents.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    /// The sphere of radius `2^m` for each exponent.
    pub fn spheres(&self, dim: usize) -> Result<Vec<SphereSpec>> {
        self.exponents
            .iter()
            .map(|&m| SphereSpec::new(dim, 1u64 << (2 * m)))
            .collect()
    }
}

/// How [`dyadic_maximal_with`] evaluates the averages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaximalPath {
    /// Pick the cheaper of the two by a flop estimate.
    Auto,
    Direct,
    /// Convolve through the transform of the sphere's indicator kernel.
    Fourier,
}

/// `M(x) = max_{t = 2^m} |(A_t f)(x)|` for a scalar field.
pub fn dyadic_maximal(f: &TorusField, range: &DyadicRange) -> Result<TorusField> {
    dyadic_maximal_with(f, range, MaximalPath::Auto, DEFAULT_ENUMERATION_CAP)
}

pub fn dyadic_maximal_with(
    f: &TorusField,
    range: &DyadicRange,
    path: MaximalPath,
    cap: u64,
) -> Result<TorusField> {
    if f.kind() != ValueKind::Scalar {
        return Err(Error::Shape(
            "dyadic maximal function needs a scalar field".into(),
        ));
    }
    let spheres = range.spheres(f.dim())?;
    let sites = f.sites() as f64;
    // unit: one gathered sphere point per site; a transform pass measures
    // about 0.2 units per axis and radix-2 stage, plus one for the product
    let per_transform = sites * (0.2 * f.dim() as f64 * (f.side() as f64).log2().max(1.0) + 1.0);
    let mut counts = Vec::with_capacity(spheres.len());
    for &spec in &spheres {
        let count = representation_count(spec);
        if count > BigUint::from(cap) {
            return Err(Error::CapExceeded {
                count: count.to_string(),
                cap,
            });
        }
        counts.push(count.to_f64().unwrap_or(f64::INFINITY));
    }
    let direct_cost: f64 = counts.iter().map(|r| r * sites).sum();
    let fourier_cost = per_transform * (1.0 + 2.0 * spheres.len() as f64);
    let use_fourier = match path {
        MaximalPath::Auto => fourier_cost < direct_cost,
        MaximalPath::Direct => false,
        MaximalPath::Fourier => true,
    };
    let mut max = vec![0.0f64; f.sites()];
    if use_fourier {
        let mut f_hat = f.values().to_vec();
        fft_in_place(&mut f_hat, f.dim(), f.side(), 1, FftDirection::Forward);
        let mut kernel = vec![Complex64::new(0.0, 0.0); f.sites()];
        for &spec in &spheres {
            let points = sphere_points(spec, cap)?;
            let weight = 1.0 / points.len() as f64;
            kernel
                .iter_mut()
                .for_each(|v| *v = Complex64::new(0.0, 0.0));
            for y in &points {
                kernel[f.site_index(y)] += weight;
            }
            fft_in_place(&mut kernel, f.dim(), f.side(), 1, FftDirection::Forward);
            kernel.iter_mut().zip(&f_hat).for_each(|(k, v)| *k *= v);
            fft_in_place(&mut kernel, f.dim(), f.side(), 1, FftDirection::Inverse);
            for (m, v) in max.iter_mut().zip(&kernel) {
                *m = m.max(v.norm() / sites);
            }
        }
    } else {
        for &spec in &spheres {
            let avg = spherical_average_with_cap(f, spec, cap)?;
            for (m, v) in max.iter_mut().zip(avg.values()) {
                *m = m.max(v.norm());
            }
        }
    }
    Ok(f.with_values(max.into_iter().map(|m| Complex64::new(m, 0.0)).collect()))
}

/// `g(x) = sum_m f(x - q m) q^d K(q m)` over `m in (Z_{L/q})^d`, with each
/// `q m` represented in `[-L/2, L/2)^d`.
pub fn sampled_kernel_apply(
    f: &TorusField,
    q: u64,
    kernel: impl Fn(&[i64]) -> f64,
) -> Result<TorusField> {
    let side = f.side();
    if q == 0 || !(side as u64).is_multiple_of(q) {
        return Err(Error::IndivisibleSide { side, q });
    }
    let q = q as usize;
    let coarse = side / q;
    let weight_scale = (q as f64).powi(f.dim() as i32);
    let fl = f.fiber_len();
    let src = f.values();
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    let mut m = vec![0usize; f.dim()];
    let total = coarse.pow(f.dim() as u32);
    for _ in 0..total {
        let y: Vec<i64> = m
            .iter()
            .map(|&mj| {
                let v = (q * mj) as i64;
                if 2 * v >= side as i64 {
                    v - side as i64
                } else {
                    v
                }
            })
            .collect();
        let w = weight_scale * kernel(&y);
        if w != 0.0 {
            let shift: Vec<i64> = y.iter().map(|v| -v).collect();
            let idx = shifted_indices(f.dim(), side, &shift);
            for (site, &from) in idx.iter().enumerate() {
                for c in 0..fl {
                    out[site * fl + c] += src[from * fl + c] * w;
                }
            }
        }
        for j in (0..m.len()).rev() {
            m[j] += 1;
            if m[j] < coarse {
                break;
            }
            m[j] = 0;
        }
    }
    Ok(f.with_values(out))
}
