//! Fields on finite tori `(Z_L)^d` with scalar or `n x n` matrix values.
//!
//! Sites are stored row-major with coordinate 0 most significant; each site
//! owns a contiguous fiber of 1 (scalar) or `n^2` (row-major matrix)
//! complex entries.

mod average;
mod fourier;
mod io;

pub use average::{
    dyadic_maximal, dyadic_maximal_with, sampled_kernel_apply, spherical_average,
    spherical_average_with_cap, DyadicRange, MaximalPath,
};
pub use fourier::{
    apply_multiplier, dft, discrete_laplacian, frequency, idft, periodized_multiplier_apply,
    sign_flip_modulation,
};
pub use io::{read_binary, write_binary, write_csv};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default cap on `L^d`.
pub const DEFAULT_SITE_BUDGET: usize = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ValueKind {
    Scalar,
    Matrix(usize),
}

impl ValueKind {
    pub fn fiber_len(self) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::Matrix(n) => n * n,
        }
    }

    /// Matrix order; 1 for scalars.
    pub fn order(self) -> usize {
        match self {
            ValueKind::Scalar => 1,
            ValueKind::Matrix(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    dim: usize,
    side: usize,
    kind: ValueKind,
    values: Vec<Complex64>,
}

/// `side^dim`, refusing anything above `budget`.
pub fn site_count(dim: usize, side: usize, budget: usize) -> Result<usize> {
    if dim == 0 || side == 0 {
        return Err(Error::Shape("torus needs d >= 1 and L >= 1".into()));
    }
    let sites = (side as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
    if sites > budget as u128 {
        return Err(Error::MemoryBudget { sites, budget });
    }
    Ok(sites as usize)
}

impl TorusField {
    pub fn new(dim: usize, side: usize, kind: ValueKind, values: Vec<Complex64>) -> Result<Self> {
        let sites = site_count(dim, side, usize::MAX)?;
        if let ValueKind::Matrix(0) = kind {
            return Err(Error::Shape("matrix order must be positive".into()));
        }
        if values.len() != sites * kind.fiber_len() {
            return Err(Error::Shape(format!(
                "expected {} values, got {}",
                sites * kind.fiber_len(),
                values.len()
            )));
        }
        Ok(Self {
            dim,
            side,
            kind,
            values,
        })
    }

    pub fn zeros(dim: usize, side: usize, kind: ValueKind) -> Result<Self> {
        Self::zeros_with_budget(dim, side, kind, DEFAULT_SITE_BUDGET)
    }

    pub fn zeros_with_budget(
        dim: usize,
        side: usize,
        kind: ValueKind,
        budget: usize,
    ) -> Result<Self> {
        let sites = site_count(dim, side, budget)?;
        Self::new(
            dim,
            side,
            kind,
            vec![Complex64::new(0.0, 0.0); sites * kind.fiber_len()],
        )
    }

    /// Scalar field from a function of the site coordinates.
    pub fn from_fn(dim: usize, side: usize, f: impl Fn(&[usize]) -> Complex64) -> Result<Self> {
        let mut field = Self::zeros(dim, side, ValueKind::Scalar)?;
        let mut coords = vec![0usize; dim];
        for i in 0..field.sites() {
            field.site_coords_into(i, &mut coords);
            field.values[i] = f(&coords);
        }
        Ok(field)
    }

    /// Real scalar field with entries uniform in `[-1, 1)`.
    pub fn random_real(dim: usize, side: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Self::zeros(dim, side, ValueKind::Scalar)?;
        for v in &mut field.values {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
        }
        Ok(field)
    }

    /// Complex scalar field with both parts uniform in `[-1, 1)`.
    pub fn random_complex(dim: usize, side: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Self::zeros(dim, side, ValueKind::Scalar)?;
        for v in &mut field.values {
            *v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        Ok(field)
    }

    /// Hermitian `n x n` field; entries of the upper triangle uniform in `[-1, 1)`.
    pub fn random_hermitian(dim: usize, side: usize, n: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = Self::zeros(dim, side, ValueKind::Matrix(n))?;
        for fiber in field.values.chunks_mut(n * n) {
            for i in 0..n {
                fiber[i * n + i] = Complex64::new(rng.gen_range(-1.0..1.0), 0.0);
                for j in i + 1..n {
                    let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                    fiber[i * n + j] = z;
                    fiber[j * n + i] = z.conj();
                }
            }
        }
        Ok(field)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn kind(&self) -> ValueKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.values.len() / self.kind.fiber_len()
    }

    pub fn fiber_len(&self) -> usize {
        self.kind.fiber_len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn fiber(&self, site: usize) -> &[Complex64] {
        let fl = self.fiber_len();
        &self.values[site * fl..(site + 1) * fl]
    }

    pub fn fiber_mut(&mut self, site: usize) -> &mut [Complex64] {
        let fl = self.fiber_len();
        &mut self.values[site * fl..(site + 1) * fl]
    }

    /// The fiber at `site` as a dense matrix.
    pub fn matrix(&self, site: usize) -> DMatrix<Complex64> {
        let n = self.kind.order();
        DMatrix::from_row_slice(n, n, self.fiber(site))
    }

    pub fn site_index(&self, coords: &[i64]) -> usize {
        let l = self.side as i64;
        coords
            .iter()
            .fold(0usize, |acc, &c| acc * self.side + c.rem_euclid(l) as usize)
    }

    pub fn site_coords(&self, site: usize) -> Vec<usize> {
        let mut coords = vec![0; self.dim];
        self.site_coords_into(site, &mut coords);
        coords
    }

    fn site_coords_into(&self, mut site: usize, coords: &mut [usize]) {
        for c in coords.iter_mut().rev() {
            *c = site % self.side;
            site /= self.side;
        }
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.dim == other.dim && self.side == other.side && self.kind == other.kind
    }

    pub(crate) fn with_values(&self, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), self.values.len());
        Self {
            dim: self.dim,
            side: self.side,
            kind: self.kind,
            values,
        }
    }

    /// `g(x) = f(x - v)`.
    pub fn translate(&self, v: &[i64]) -> Self {
        let shift: Vec<i64> = v.iter().map(|&c| -c).collect();
        let idx = shifted_indices(self.dim, self.side, &shift);
        let fl = self.fiber_len();
        let mut out = Vec::with_capacity(self.values.len());
        for &src in &idx {
            out.extend_from_slice(&self.values[src * fl..(src + 1) * fl]);
        }
        self.with_values(out)
    }

    /// `max_x max_{ij} |f(x)_{ij} - conj(f(x)_{ji})|`; 0 for scalar fields
    /// with vanishing imaginary part.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.kind.order();
        let mut worst = 0.0f64;
        for fiber in self.values.chunks(n * n) {
            for i in 0..n {
                for j in i..n {
                    worst = worst.max((fiber[i * n + j] - fiber[j * n + i].conj()).norm());
                }
            }
        }
        worst
    }

    /// `sum_x tr(f(x)^* f(x))`.
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert!(self.same_shape(other), "shape mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// For every site `x` in row-major order, the index of `x + shift`.
pub(crate) fn shifted_indices(dim: usize, side: usize, shift: &[i64]) -> Vec<usize> {
    debug_assert_eq!(shift.len(), dim);
    let l = side as i64;
    let mut cur = vec![0usize];
    for &s in shift {
        let mut next = Vec::with_capacity(cur.len() * side);
        for &c in &cur {
            for x in 0..l {
                next.push(c * side + (x + s).rem_euclid(l) as usize);
            }
        }
        cur = next;
    }
    cur
}
