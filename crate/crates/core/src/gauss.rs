//! Farey fractions and normalized quadratic Gauss sums.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;

use crate::error::{Error, Result};

/// A reduced fraction `p/q` with `0 <= p <= q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FareyFraction {
    // field order gives the (q, p) ordering used by `farey_set`
    q: u64,
    p: u64,
}

impl FareyFraction {
    pub fn new(p: u64, q: u64) -> Result<Self> {
        if q == 0 || p > q {
            return Err(Error::Domain(format!(
                "{p}/{q} is not in [0, 1] with q >= 1"
            )));
        }
        if p.gcd(&q) != 1 {
            return Err(Error::NotCoprime(p as i64, q));
        }
        Ok(Self { q, p })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }
}

impl std::fmt::Display for FareyFraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

/// `H_N = {p/q : 0 <= p <= q <= N, gcd(p, q) = 1}`, ordered by `(q, p)`.
pub fn farey_set(n: u64) -> Result<Vec<FareyFraction>> {
    if n == 0 {
        return Err(Error::Domain("Farey order must be at least 1".into()));
    }
    let mut out = Vec::new();
    for q in 1..=n {
        for p in 0..=q {
            if p.gcd(&q) == 1 {
                out.push(FareyFraction { q, p });
            }
        }
    }
    Ok(out)
}

fn check_coprime(p: i64, q: u64) -> Result<()> {
    if q == 0 {
        return Err(Error::Domain("denominator must be positive".into()));
    }
    if p.unsigned_abs().gcd(&q) != 1 {
        return Err(Error::NotCoprime(p, q));
    }
    Ok(())
}

/// `q^{-1} sum_{n=1}^{q} e^{2 pi i (n^2 p + x n) / q}`.
///
/// The exponent is reduced modulo `q` in exact integer arithmetic before
/// the exponential is taken.
pub fn gauss_sum_1d(p: i64, q: u64, x: i64) -> Result<Complex64> {
    check_coprime(p, q)?;
    Ok(gauss_sum_1d_unchecked(p, q, x))
}

pub(crate) fn gauss_sum_1d_unchecked(p: i64, q: u64, x: i64) -> Complex64 {
    let qi = q as i128;
    let pm = (p as i128).rem_euclid(qi);
    let xm = (x as i128).rem_euclid(qi);
    let mut re = crate::multiplier::Compensated::default();
    let mut im = crate::multiplier::Compensated::default();
    for n in 1..=qi {
        let e = (n * n % qi * pm + xm * n) % qi;
        let z = Complex64::cis(2.0 * PI * e as f64 / q as f64);
        re.add(z.re);
        im.add(z.im);
    }
    Complex64::new(re.value(), im.value()) / q as f64
}

/// `G(p/q; x) = prod_j gauss_sum_1d(p, q, x_j)`.
pub fn gauss_sum(p: i64, q: u64, x: &[i64]) -> Result<Complex64> {
    check_coprime(p, q)?;
    Ok(x.iter()
        .map(|&xj| gauss_sum_1d_unchecked(p, q, xj))
        .product())
}

/// Worst deviations for one denominator `q` in dimension `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRow {
    pub q: u64,
    /// Numerator attaining the larger of the two deviations.
    pub p: u64,
    pub d: usize,
    /// `max_p |sum_{n in N_q^d} |G(p/q; n)|^2 - 1|`.
    pub max_abs_dev_sum_identity: f64,
    /// `max_p max_x |G(p/q; x)| - (2/q)^{d/2}`; nonpositive when the bound holds.
    pub max_bound_excess: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaussReport {
    pub rows: Vec<GaussRow>,
}

impl GaussReport {
    pub fn worst_sum_deviation(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.max_abs_dev_sum_identity)
            .fold(0.0, f64::max)
    }

    pub fn worst_bound_excess(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.max_bound_excess)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Checks `sum_n |G(p/q; n)|^2 = 1` and `|G(p/q; x)| <= (2/q)^{d/2}` for
/// every `q <= q_max` and every residue `p` coprime to `q`.
///
/// Both quantities factor over coordinates, so the `q^d`-point sums are
/// obtained from the `q` one-dimensional values.
pub fn verify_gauss_identities(q_max: u64, d: usize) -> Result<GaussReport> {
    if q_max == 0 || d == 0 {
        return Err(Error::Domain(
            "verify_gauss_identities needs q_max >= 1 and d >= 1".into(),
        ));
    }
    let mut rows = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        let bound = (2.0 / q as f64).powf(d as f64 / 2.0);
        let mut row = GaussRow {
            q,
            p: 0,
            d,
            max_abs_dev_sum_identity: 0.0,
            max_bound_excess: f64::NEG_INFINITY,
        };
        let mut worst = f64::NEG_INFINITY;
        for p in (0..q).filter(|p| p.gcd(&q) == 1) {
            let moduli: Vec<f64> = (1..=q as i64)
                .map(|n| gauss_sum_1d_unchecked(p as i64, q, n).norm())
                .collect();
            let energy: f64 = moduli.iter().map(|m| m * m).sum();
            let sum_dev = (energy.powi(d as i32) - 1.0).abs();
            let peak = moduli.iter().cloned().fold(0.0, f64::max).powi(d as i32);
            let excess = peak - bound;
            row.max_abs_dev_sum_identity = row.max_abs_dev_sum_identity.max(sum_dev);
            row.max_bound_excess = row.max_bound_excess.max(excess);
            let score = sum_dev.max(excess);
            if score > worst {
                worst = score;
                row.p = p;
            }
        }
        rows.push(row);
    }
    Ok(GaussReport { rows })
}
