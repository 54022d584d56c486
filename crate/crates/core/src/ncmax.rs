//! Matrix-valued `L_p` norms and the order-interval maximal norm
//! `inf{ ||a||_p : -a <= x_k <= a }` for finite Hermitian families.
//!
//! Both objectives decouple over sites. For `p = inf` the optimum at a site
//! is `max_k ||x_k||_op` times the identity. For `p = 2` each site solves
//! `min tr(a^2)` subject to `a +- x_k >= 0` by a primal log-det barrier
//! method in real coordinates of the Hermitian matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lattice::SphereSpec;
use crate::torus::{dyadic_maximal, spherical_average, DyadicRange, TorusField, ValueKind};

/// Largest fiber order accepted by the majorant solver.
pub const MAX_ORDER: usize = 8;

/// Newton iterations allowed per site.
pub const NEWTON_BUDGET: usize = 500;

/// Default solver tolerance.
pub const DEFAULT_TOL: f64 = 1e-6;

const HERMITIAN_TOL: f64 = 1e-12;

// Newton decrement below which an iterate counts as centered
const CENTERING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormP {
    Two,
    Infinity,
}

impl std::fmt::Display for NormP {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            NormP::Two => "2",
            NormP::Infinity => "inf",
        })
    }
}

impl std::str::FromStr for NormP {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "2" | "two" => Ok(NormP::Two),
            "inf" | "infinity" => Ok(NormP::Infinity),
            other => Err(Error::Parse(format!("unsupported exponent '{other}'"))),
        }
    }
}

type CMat = DMatrix<Complex64>;

/// An ordered family `x_1, ..., x_K` of Hermitian fields on a common torus,
/// restricted to a set of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianStack {
    family: Vec<TorusField>,
    sites: Vec<usize>,
}

impl HermitianStack {
    /// Uses every site of the torus.
    pub fn new(family: Vec<TorusField>) -> Result<Self> {
        let sites = family.first().map_or(0, |f| f.sites());
        Self::with_sites(family, (0..sites).collect())
    }

    pub fn with_sites(family: Vec<TorusField>, sites: Vec<usize>) -> Result<Self> {
        let Some(first) = family.first() else {
            return Err(Error::Shape(
                "family must contain at least one field".into(),
            ));
        };
        for f in &family {
            if !f.same_shape(first) {
                return Err(Error::Shape("family members differ in shape".into()));
            }
            let scale = f.max_abs().max(1.0);
            let deviation = f.hermitian_deviation();
            if deviation > HERMITIAN_TOL * scale {
                return Err(Error::NonHermitianInput { deviation });
            }
        }
        if let Some(&bad) = sites.iter().find(|&&s| s >= first.sites()) {
            return Err(Error::Shape(format!("site {bad} outside the torus")));
        }
        Ok(Self { family, sites })
    }

    /// A stack on the one-site torus built from explicit matrices.
    pub fn single_site(matrices: &[CMat]) -> Result<Self> {
        let n = matrices.first().map_or(0, |m| m.nrows());
        let family = matrices
            .iter()
            .map(|m| {
                if m.nrows() != n || m.ncols() != n {
                    return Err(Error::Shape(
                        "matrices must be square of equal order".into(),
                    ));
                }
                let values: Vec<Complex64> = m.transpose().iter().copied().collect();
                TorusField::new(1, 1, ValueKind::Matrix(n), values)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(family)
    }

    pub fn order(&self) -> usize {
        self.family[0].kind().order()
    }

    pub fn len(&self) -> usize {
        self.family.len()
    }

    pub fn is_empty(&self) -> bool {
        self.family.is_empty()
    }

    pub fn family(&self) -> &[TorusField] {
        &self.family
    }

    pub fn sites(&self) -> &[usize] {
        &self.sites
    }

    /// Appends a member, keeping the site set.
    pub fn push(&mut self, x: TorusField) -> Result<()> {
        let mut family = std::mem::take(&mut self.family);
        family.push(x);
        match Self::with_sites(family, self.sites.clone()) {
            Ok(s) => {
                *self = s;
                Ok(())
            }
            Err(e) => Err(e),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let family = self
            .family
            .iter()
            .map(|f| f.with_values(f.values().iter().map(|v| v * c).collect()))
            .collect();
        Self {
            family,
            sites: self.sites.clone(),
        }
    }

    fn site_matrices(&self, site: usize) -> Vec<CMat> {
        self.family.iter().map(|f| f.matrix(site)).collect()
    }
}

/// The result of [`order_interval_majorant`].
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantSolution {
    /// Positive semidefinite field, zero off the stack's site set.
    pub majorant: TorusField,
    /// `||majorant||_p`.
    pub value: f64,
    /// `max(0, -min eig(a +- x_k))` over sites and members.
    pub certificate_gap: f64,
    /// Largest per-site duality-gap bound, relative to the site's scale.
    pub duality_gap: f64,
    pub newton_iterations: usize,
}

fn hermitian_eigenvalues(m: &CMat) -> DVector<f64> {
    m.clone().symmetric_eigen().eigenvalues
}

fn spectral_norm(m: &CMat) -> f64 {
    if m.nrows() == 1 {
        return m[(0, 0)].norm();
    }
    m.clone().singular_values().max()
}

/// `|x| = (x^* x)^{1/2}` for Hermitian `x`.
fn hermitian_abs(x: &CMat) -> CMat {
    let eig = x.clone().symmetric_eigen();
    let u = &eig.eigenvectors;
    let d = CMat::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(l.abs(), 0.0)));
    u * d * u.adjoint()
}

/// `p = 2`: Schatten-2 norm summed over sites. `p = inf`: largest singular
/// value over sites.
pub fn lp_norm(f: &TorusField, p: NormP) -> f64 {
    match p {
        NormP::Two => f.energy().sqrt(),
        NormP::Infinity => match f.kind() {
            ValueKind::Scalar => f.max_abs(),
            ValueKind::Matrix(_) => (0..f.sites())
                .map(|s| spectral_norm(&f.matrix(s)))
                .fold(0.0, f64::max),
        },
    }
}

/// Orthonormal basis of the `n x n` Hermitian matrices under `Re tr(A B)`.
fn hermitian_basis(n: usize) -> Vec<CMat> {
    let mut basis = Vec::with_capacity(n * n);
    let one = Complex64::new(1.0, 0.0);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        let mut e = CMat::zeros(n, n);
        e[(i, i)] = one;
        basis.push(e);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut e = CMat::zeros(n, n);
            e[(i, j)] = Complex64::new(r, 0.0);
            e[(j, i)] = Complex64::new(r, 0.0);
            basis.push(e);
            let mut e = CMat::zeros(n, n);
            e[(i, j)] = Complex64::new(0.0, r);
            e[(j, i)] = Complex64::new(0.0, -r);
            basis.push(e);
        }
    }
    basis
}

fn re_trace_product(a: &CMat, b: &CMat) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for l in 0..n {
            s += (a[(i, l)] * b[(l, i)]).re;
        }
    }
    s
}

/// Lower factor `l` with `a = l l^*`, or `None` unless `a` is positive
/// definite. Pivots are checked on their real parts.
fn hermitian_cholesky(a: &CMat) -> Option<CMat> {
    let n = a.nrows();
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return None;
        }
        let pivot = d.sqrt();
        l[(j, j)] = Complex64::new(pivot, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / pivot;
        }
    }
    Some(l)
}

/// `(l l^*)^{-1}` from a lower factor.
fn inverse_from_cholesky(l: &CMat) -> CMat {
    let n = l.nrows();
    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        for i in col..n {
            let mut s = if i == col {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            };
            for k in col..i {
                s -= l[(i, k)] * inv[(k, col)];
            }
            inv[(i, col)] = s / l[(i, i)];
        }
    }
    inv.adjoint() * inv
}

struct SiteProblem<'a> {
    basis: &'a [CMat],
    /// The matrices `+- x_k`.
    shifts: Vec<CMat>,
}

struct SiteResult {
    a: CMat,
    gap: f64,
    iterations: usize,
    stalled: bool,
}

impl SiteProblem<'_> {
    fn assemble(&self, v: &DVector<f64>) -> CMat {
        let n = self.basis[0].nrows();
        let mut a = CMat::zeros(n, n);
        for (e, &c) in self.basis.iter().zip(v.iter()) {
            a += e * Complex64::new(c, 0.0);
        }
        a
    }

    /// Cholesky factors of every `a +- x_k`, or `None` outside the interior.
    fn factor(&self, a: &CMat) -> Option<Vec<CMat>> {
        self.shifts.iter().map(|s| hermitian_cholesky(&(a + s))).collect()
    }

    fn barrier(&self, t: f64, v: &DVector<f64>) -> Option<f64> {
        let chol = self.factor(&self.assemble(v))?;
        let logdet: f64 = chol
            .iter()
            .map(|l| l.diagonal().iter().map(|d| 2.0 * d.re.ln()).sum::<f64>())
            .sum();
        Some(t * v.norm_squared() - logdet)
    }

    fn derivatives(&self, t: f64, v: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
        let dim = self.basis.len();
        let a = self.assemble(v);
        let chol = self.factor(&a).expect("iterate is interior");
        let mut g = v * (2.0 * t);
        let mut h = DMatrix::<f64>::identity(dim, dim) * (2.0 * t);
        for c in &chol {
            let w = inverse_from_cholesky(c);
            let products: Vec<CMat> = self.basis.iter().map(|e| &w * e).collect();
            for (alpha, p) in products.iter().enumerate() {
                g[alpha] -= p.trace().re;
                for beta in alpha..dim {
                    let val = re_trace_product(p, &products[beta]);
                    h[(alpha, beta)] += val;
                    if beta != alpha {
                        h[(beta, alpha)] += val;
                    }
                }
            }
        }
        (g, h)
    }

    fn coordinates(&self, a: &CMat) -> DVector<f64> {
        DVector::from_iterator(
            self.basis.len(),
            self.basis.iter().map(|e| re_trace_product(a, e)),
        )
    }

    /// Path-following until the duality-gap bound `nu / t` drops below `tol`.
    fn solve(&self, start: &CMat, tol: f64) -> SiteResult {
        let nu = (self.shifts.len() * self.basis[0].nrows()) as f64;
        let mut v = self.coordinates(start);
        let mut t = nu / v.norm_squared().max(1.0);
        let mut iterations = 0;
        loop {
            loop {
                if iterations >= NEWTON_BUDGET {
                    return SiteResult {
                        a: self.assemble(&v),
                        gap: nu / t,
                        iterations,
                        stalled: true,
                    };
                }
                iterations += 1;
                let (g, h) = self.derivatives(t, &v);
                let step = match h.cholesky() {
                    Some(c) => -c.solve(&g),
                    None => -g.clone(),
                };
                let decrement = -g.dot(&step);
                if decrement <= CENTERING_TOL {
                    break;
                }
                let current = self.barrier(t, &v).expect("iterate is interior");
                let mut s = 1.0;
                let mut accepted = false;
                for _ in 0..80 {
                    let trial = &v + &step * s;
                    if let Some(val) = self.barrier(t, &trial) {
                        // strict decrease guards against stalling at roundoff level
                        if val < current && val <= current - 0.25 * s * decrement {
                            v = trial;
                            accepted = true;
                            break;
                        }
                    }
                    s *= 0.5;
                }
                if !accepted || decrement <= CENTERING_TOL {
                    break;
                }
            }
            if nu / t <= tol {
                return SiteResult {
                    a: self.assemble(&v),
                    gap: nu / t,
                    iterations,
                    stalled: false,
                };
            }
            t *= 20.0;
        }
    }
}

/// `inf{ ||a||_p : a >= 0, -a <= x_k <= a for all k }` with a feasible
/// minimizer.
///
/// For `p = 2`, `tol` bounds the per-site duality gap of `tr(a^2)`
/// normalized by the site scale `max_k ||x_k||_op^2`, so the returned value
/// exceeds the infimum by at most a relative `tol / 2`.
pub fn order_interval_majorant(
    stack: &HermitianStack,
    p: NormP,
    tol: f64,
) -> Result<MajorantSolution> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = stack.order();
    if n > MAX_ORDER {
        return Err(Error::Domain(format!(
            "fiber order {n} exceeds {MAX_ORDER}"
        )));
    }
    let first = &stack.family[0];
    let mut majorant =
        TorusField::zeros_with_budget(first.dim(), first.side(), ValueKind::Matrix(n), usize::MAX)?;
    let basis = hermitian_basis(n);
    let mut duality_gap = 0.0f64;
    let mut newton_iterations = 0;
    let mut stalled_gap = None;
    let mut certificate_gap = 0.0f64;
    for &site in &stack.sites {
        let xs = stack.site_matrices(site);
        let scale = xs.iter().map(spectral_norm).fold(0.0, f64::max);
        let a = if scale == 0.0 {
            CMat::zeros(n, n)
        } else {
            match p {
                NormP::Infinity => CMat::identity(n, n) * Complex64::new(scale, 0.0),
                NormP::Two => {
                    let inv = Complex64::new(1.0 / scale, 0.0);
                    let normalized: Vec<CMat> = xs.iter().map(|x| x * inv).collect();
                    let mut start = CMat::identity(n, n);
                    for x in &normalized {
                        start += hermitian_abs(x);
                    }
                    let problem = SiteProblem {
                        basis: &basis,
                        shifts: normalized
                            .iter()
                            .flat_map(|x| [x.clone(), -x.clone()])
                            .collect(),
                    };
                    let r = problem.solve(&start, tol);
                    duality_gap = duality_gap.max(r.gap);
                    newton_iterations += r.iterations;
                    if r.stalled {
                        stalled_gap = Some(stalled_gap.map_or(r.gap, |g: f64| g.max(r.gap)));
                    }
                    r.a * Complex64::new(scale, 0.0)
                }
            }
        };
        for x in &xs {
            for candidate in [&a + x, &a - x] {
                let low = hermitian_eigenvalues(&candidate).min();
                certificate_gap = certificate_gap.max(-low);
            }
        }
        majorant
            .fiber_mut(site)
            .copy_from_slice(a.transpose().as_slice());
    }
    let solution = MajorantSolution {
        value: lp_norm(&majorant, p),
        majorant,
        certificate_gap,
        duality_gap,
        newton_iterations,
    };
    match stalled_gap {
        Some(gap) => Err(Error::SolverStall {
            gap,
            best: Box::new(solution),
        }),
        None => Ok(solution),
    }
}

/// `max(||(sum_k x_k^* x_k)^{1/2}||_p, ||(sum_k x_k x_k^*)^{1/2}||_p)` over the
/// stack's sites.
pub fn square_function_norm(stack: &HermitianStack, p: NormP) -> f64 {
    let n = stack.order();
    let mut col_acc = 0.0f64;
    let mut row_acc = 0.0f64;
    for &site in &stack.sites {
        let mut col = CMat::zeros(n, n);
        let mut row = CMat::zeros(n, n);
        for x in stack.site_matrices(site) {
            col += x.adjoint() * &x;
            row += &x * x.adjoint();
        }
        match p {
            NormP::Two => {
                col_acc += col.trace().re;
                row_acc += row.trace().re;
            }
            NormP::Infinity => {
                col_acc = col_acc.max(hermitian_eigenvalues(&col).max());
                row_acc = row_acc.max(hermitian_eigenvalues(&row).max());
            }
        }
    }
    col_acc.max(0.0).sqrt().max(row_acc.max(0.0).sqrt())
}

/// `|| sup_{t in range} |A_t f| ||_p` for a scalar field.
pub fn maximal_norm_commutative(f: &TorusField, range: &DyadicRange, p: NormP) -> Result<f64> {
    Ok(lp_norm(&dyadic_maximal(f, range)?, p))
}

/// Ratios `||M f||_2 / ||f||_2` over pseudorandom real fields.
#[derive(Debug, Clone, PartialEq)]
pub struct MaximalRatioStats {
    pub dim: usize,
    pub side: usize,
    pub scales: usize,
    /// Per-trial field seeds, in trial order.
    pub seeds: Vec<u64>,
    /// Per-trial `||f||_2`.
    pub input_norms: Vec<f64>,
    pub ratios: Vec<f64>,
    pub max: f64,
    pub mean: f64,
}

/// Per-trial field seeds derived from `seed`.
pub fn trial_seeds(seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..trials).map(|_| rng.gen()).collect()
}

pub fn empirical_maximal_ratio(
    dim: usize,
    side: usize,
    range: &DyadicRange,
    trials: usize,
    seed: u64,
) -> Result<MaximalRatioStats> {
    let seeds = trial_seeds(seed, trials);
    let mut ratios = Vec::with_capacity(trials);
    let mut input_norms = Vec::with_capacity(trials);
    for &s in &seeds {
        let f = TorusField::random_real(dim, side, s)?;
        let norm = lp_norm(&f, NormP::Two);
        ratios.push(maximal_norm_commutative(&f, range, NormP::Two)? / norm);
        input_norms.push(norm);
    }
    let max = ratios.iter().cloned().fold(0.0, f64::max);
    let mean = if ratios.is_empty() {
        0.0
    } else {
        ratios.iter().sum::<f64>() / ratios.len() as f64
    };
    Ok(MaximalRatioStats {
        dim,
        side,
        scales: range.len(),
        seeds,
        input_norms,
        ratios,
        max,
        mean,
    })
}

/// One matrix-valued maximal trial: the family `A_t f` over the range for a
/// random Hermitian field `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixMaximalTrial {
    pub value: f64,
    pub input_norm: f64,
    /// `max_t ||A_t f||_2`, a lower bound for `value`.
    pub lower: f64,
    pub square_function: f64,
    pub certificate_gap: f64,
    pub duality_gap: f64,
}

pub fn matrix_maximal_trial(
    dim: usize,
    side: usize,
    n: usize,
    range: &DyadicRange,
    seed: u64,
    tol: f64,
) -> Result<MatrixMaximalTrial> {
    let f = TorusField::random_hermitian(dim, side, n, seed)?;
    let family = range
        .spheres(dim)?
        .into_iter()
        .map(|spec: SphereSpec| spherical_average(&f, spec))
        .collect::<Result<Vec<_>>>()?;
    let lower = family
        .iter()
        .map(|x| lp_norm(x, NormP::Two))
        .fold(0.0, f64::max);
    let stack = HermitianStack::new(family)?;
    let sol = order_interval_majorant(&stack, NormP::Two, tol)?;
    Ok(MatrixMaximalTrial {
        value: sol.value,
        input_norm: lp_norm(&f, NormP::Two),
        lower,
        square_function: square_function_norm(&stack, NormP::Two),
        certificate_gap: sol.certificate_gap,
        duality_gap: sol.duality_gap,
    })
}
