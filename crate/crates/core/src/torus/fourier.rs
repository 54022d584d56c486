//! Frequency-side operators: DFT, multipliers, Laplacian, modulation and
//! periodized symbols.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

use super::TorusField;
use crate::error::{Error, Result};
use crate::multiplier::nearest_lattice;

// lines gathered per FFT call on strided axes
const BATCH: usize = 64;

/// In-place unnormalized transform over every torus axis, leaving the fiber
/// index untouched.
pub(crate) fn fft_in_place(
    values: &mut [Complex64],
    dim: usize,
    side: usize,
    fiber_len: usize,
    direction: FftDirection,
) {
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(side, direction);
    let total = values.len();
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut buffer = vec![Complex64::new(0.0, 0.0); side * BATCH];
    for axis in 0..dim {
        let stride = side.pow((dim - 1 - axis) as u32) * fiber_len;
        let block = stride * side;
        for base in (0..total).step_by(block) {
            for c0 in (0..stride).step_by(BATCH) {
                let w = BATCH.min(stride - c0);
                let buf = &mut buffer[..w * side];
                for j in 0..side {
                    let row = base + j * stride + c0;
                    for (i, v) in values[row..row + w].iter().enumerate() {
                        buf[i * side + j] = *v;
                    }
                }
                fft.process_with_scratch(buf, &mut scratch);
                for j in 0..side {
                    let row = base + j * stride + c0;
                    for (i, v) in values[row..row + w].iter_mut().enumerate() {
                        *v = buf[i * side + j];
                    }
                }
            }
        }
    }
}

/// `f_hat(k) = sum_x f(x) e^{-2 pi i <x, k> / L}`, entrywise on matrix fibers.
pub fn dft(f: &TorusField) -> TorusField {
    let mut values = f.values().to_vec();
    fft_in_place(
        &mut values,
        f.dim(),
        f.side(),
        f.fiber_len(),
        FftDirection::Forward,
    );
    f.with_values(values)
}

/// Inverse of [`dft`], including the `L^{-d}` factor.
pub fn idft(f_hat: &TorusField) -> TorusField {
    let mut values = f_hat.values().to_vec();
    fft_in_place(
        &mut values,
        f_hat.dim(),
        f_hat.side(),
        f_hat.fiber_len(),
        FftDirection::Inverse,
    );
    let scale = 1.0 / f_hat.sites() as f64;
    values.iter_mut().for_each(|v| *v *= scale);
    f_hat.with_values(values)
}

/// The frequency `k / L` reduced to `[-1/2, 1/2)`.
pub fn frequency(k: usize, side: usize) -> f64 {
    if 2 * k >= side {
        (k as f64 - side as f64) / side as f64
    } else {
        k as f64 / side as f64
    }
}

/// Multiplies every Fourier coefficient by `symbol` evaluated at the
/// fiber's reduced frequency, in place on `f_hat`.
pub(crate) fn multiply_in_place(f_hat: &mut TorusField, symbol: impl Fn(&[f64]) -> Complex64) {
    let (dim, side, fl) = (f_hat.dim(), f_hat.side(), f_hat.fiber_len());
    let axis_freq: Vec<f64> = (0..side).map(|k| frequency(k, side)).collect();
    let mut xi = vec![0.0; dim];
    let mut k = vec![0usize; dim];
    for fiber in f_hat.values_mut().chunks_mut(fl) {
        for (x, &kj) in xi.iter_mut().zip(&k) {
            *x = axis_freq[kj];
        }
        let m = symbol(&xi);
        fiber.iter_mut().for_each(|v| *v *= m);
        for j in (0..dim).rev() {
            k[j] += 1;
            if k[j] < side {
                break;
            }
            k[j] = 0;
        }
    }
}

/// `idft(symbol(k/L) * dft(f))`.
pub fn apply_multiplier(f: &TorusField, symbol: impl Fn(&[f64]) -> Complex64) -> TorusField {
    let mut f_hat = dft(f);
    multiply_in_place(&mut f_hat, symbol);
    idft(&f_hat)
}

/// `f(x)/2 - (f(x + e_k) + f(x - e_k))/4` along coordinate `coordinate`
/// (1-based), with periodic wraparound.
pub fn discrete_laplacian(f: &TorusField, coordinate: usize) -> Result<TorusField> {
    if coordinate < 1 || coordinate > f.dim() {
        return Err(Error::Domain(format!(
            "coordinate index {coordinate} outside 1..={}",
            f.dim()
        )));
    }
    let mut plus = vec![0i64; f.dim()];
    plus[coordinate - 1] = 1;
    let minus: Vec<i64> = plus.iter().map(|v| -v).collect();
    let fwd = super::shifted_indices(f.dim(), f.side(), &plus);
    let bwd = super::shifted_indices(f.dim(), f.side(), &minus);
    let fl = f.fiber_len();
    let src = f.values();
    let mut out = Vec::with_capacity(src.len());
    for site in 0..f.sites() {
        for c in 0..fl {
            let here = src[site * fl + c];
            let nb = src[fwd[site] * fl + c] + src[bwd[site] * fl + c];
            out.push(here * 0.5 - nb * 0.25);
        }
    }
    Ok(f.with_values(out))
}

/// `F(x) = (-1)^{x_1 + ... + x_d} f(x)`.
pub fn sign_flip_modulation(f: &TorusField) -> Result<TorusField> {
    if f.side() % 2 == 1 {
        return Err(Error::OddSide(f.side()));
    }
    let fl = f.fiber_len();
    let mut values = f.values().to_vec();
    for site in 0..f.sites() {
        let parity: usize = f.site_coords(site).iter().sum::<usize>() % 2;
        if parity == 1 {
            values[site * fl..(site + 1) * fl]
                .iter_mut()
                .for_each(|v| *v = -*v);
        }
    }
    Ok(f.with_values(values))
}

/// Applies `sum_{x in Z^d} m(xi - x/q)` for a base symbol supported in
/// `q^{-1} Q`; at each frequency only `x = [[q xi]]` can contribute.
pub fn periodized_multiplier_apply(
    f: &TorusField,
    q: u64,
    base_symbol: impl Fn(&[f64]) -> Complex64,
) -> Result<TorusField> {
    if q == 0 || !(f.side() as u64).is_multiple_of(q) {
        return Err(Error::IndivisibleSide { side: f.side(), q });
    }
    let qf = q as f64;
    Ok(apply_multiplier(f, |xi| {
        let scaled: Vec<f64> = xi.iter().map(|v| v * qf).collect();
        let x = nearest_lattice(&scaled);
        let local: Vec<f64> = xi
            .iter()
            .zip(&x)
            .map(|(v, &xj)| v - xj as f64 / qf)
            .collect();
        base_symbol(&local)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::ValueKind;
    use std::f64::consts::PI;

    #[test]
    fn delta_and_constant_transforms() {
        let mut delta = TorusField::zeros(2, 4, ValueKind::Scalar).unwrap();
        delta.values_mut()[0] = Complex64::new(1.0, 0.0);
        let d_hat = dft(&delta);
        assert!(d_hat
            .values()
            .iter()
            .all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let one = TorusField::from_fn(2, 4, |_| Complex64::new(1.0, 0.0)).unwrap();
        let o_hat = dft(&one);
        assert!((o_hat.values()[0] - Complex64::new(16.0, 0.0)).norm() < 1e-13);
        assert!(o_hat.values()[1..].iter().all(|v| v.norm() < 1e-13));
    }

    #[test]
    fn round_trip_on_matrix_field() {
        let f = TorusField::random_hermitian(3, 5, 2, 11).unwrap();
        let g = idft(&dft(&f));
        assert!(f.max_abs_diff(&g) < 1e-13);
    }

    #[test]
    fn dft_matches_naive_sum() {
        let f = TorusField::random_complex(2, 6, 3).unwrap();
        let f_hat = dft(&f);
        for k in [[0usize, 0usize], [1, 4], [5, 2]] {
            let mut s = Complex64::new(0.0, 0.0);
            for site in 0..f.sites() {
                let x = f.site_coords(site);
                let phase = (x[0] * k[0] + x[1] * k[1]) as f64 / 6.0;
                s += f.values()[site] * Complex64::cis(-2.0 * PI * phase);
            }
            let idx = f.site_index(&[k[0] as i64, k[1] as i64]);
            assert!((f_hat.values()[idx] - s).norm() < 1e-12);
        }
    }

    #[test]
    fn frequency_reduction() {
        assert_eq!(frequency(0, 8), 0.0);
        assert_eq!(frequency(3, 8), 0.375);
        assert_eq!(frequency(4, 8), -0.5);
        assert_eq!(frequency(2, 5), 0.4);
        assert_eq!(frequency(3, 5), -0.4);
    }

    #[test]
    fn laplacian_kills_constants_and_checks_index() {
        let one = TorusField::from_fn(2, 5, |_| Complex64::new(3.0, 0.0)).unwrap();
        assert!(discrete_laplacian(&one, 2).unwrap().max_abs() < 1e-15);
        assert!(discrete_laplacian(&one, 0).is_err());
        assert!(discrete_laplacian(&one, 3).is_err());
    }

    #[test]
    fn laplacian_eigenfunction() {
        let l = 7;
        let f = TorusField::from_fn(2, l, |x| Complex64::cis(2.0 * PI * x[1] as f64 / l as f64))
            .unwrap();
        let g = discrete_laplacian(&f, 2).unwrap();
        let s = (PI / l as f64).sin().powi(2);
        for (a, b) in g.values().iter().zip(f.values()) {
            assert!((a - b * s).norm() < 1e-14);
        }
    }

    #[test]
    fn modulation_requires_even_side_and_is_involutive() {
        let f = TorusField::random_complex(2, 5, 1).unwrap();
        assert!(matches!(sign_flip_modulation(&f), Err(Error::OddSide(5))));
        let f = TorusField::random_complex(2, 6, 1).unwrap();
        let twice = sign_flip_modulation(&sign_flip_modulation(&f).unwrap()).unwrap();
        assert_eq!(twice, f);
    }

    #[test]
    fn periodization_needs_divisible_side() {
        let f = TorusField::random_complex(2, 10, 1).unwrap();
        assert!(matches!(
            periodized_multiplier_apply(&f, 3, |_| Complex64::new(1.0, 0.0)),
            Err(Error::IndivisibleSide { side: 10, q: 3 })
        ));
    }
}
