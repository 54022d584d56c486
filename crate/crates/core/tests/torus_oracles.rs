use std::f64::consts::PI;

use num_complex::Complex64;
use sphavg_core::cutoff::BumpCutoff;
use sphavg_core::multiplier::{
    eval_continuous_sphere_symbol, eval_semigroup_symbol, MultiplierMethod, SphereMultiplier,
};
use sphavg_core::torus::{
    apply_multiplier, dft, discrete_laplacian, dyadic_maximal, frequency, idft,
    periodized_multiplier_apply, read_binary, sampled_kernel_apply, sign_flip_modulation,
    spherical_average, write_binary, DyadicRange, ValueKind,
};
use sphavg_core::{SphereSpec, TorusField};

fn spec(d: usize, l: u64) -> SphereSpec {
    SphereSpec::new(d, l).unwrap()
}

#[test]
fn averages_match_their_multipliers() {
    let f = TorusField::random_complex(3, 16, 1).unwrap();
    for l in [1u64, 2, 3, 5, 9] {
        let s = spec(3, l);
        let m = SphereMultiplier::new(s, MultiplierMethod::CoeffExtract, 0).unwrap();
        let spatial = spherical_average(&f, s).unwrap();
        let fourier = apply_multiplier(&f, |xi| m.eval(xi));
        assert!(spatial.max_abs_diff(&fourier) < 1e-10, "lambda={l}");
    }
}

#[test]
fn laplacian_matches_sine_symbol() {
    let f = TorusField::random_complex(3, 16, 2).unwrap();
    for k in 1..=3 {
        let spatial = discrete_laplacian(&f, k).unwrap();
        let fourier = apply_multiplier(&f, |xi| Complex64::new((PI * xi[k - 1]).sin().powi(2), 0.0));
        assert!(spatial.max_abs_diff(&fourier) < 1e-12);
    }
}

#[test]
fn plancherel_scalar_and_matrix() {
    for f in [
        TorusField::random_complex(3, 16, 3).unwrap(),
        TorusField::random_hermitian(3, 16, 2, 4).unwrap(),
    ] {
        let lhs = f.energy();
        let rhs = dft(&f).energy() / f.sites() as f64;
        assert!((lhs - rhs).abs() <= 1e-10 * lhs);
    }
}

#[test]
fn modulation_is_a_half_period_shift() {
    let f = TorusField::random_complex(3, 16, 5).unwrap();
    let big_f = dft(&sign_flip_modulation(&f).unwrap());
    let f_hat = dft(&f);
    let scale = f_hat.max_abs();
    for k in 0..f.sites() {
        let c: Vec<i64> = f.site_coords(k).iter().map(|&v| v as i64 - 8).collect();
        let diff = (big_f.values()[k] - f_hat.values()[f.site_index(&c)]).norm();
        assert!(diff <= 1e-12 * scale);
    }
    assert!((sign_flip_modulation(&f).unwrap().energy() - f.energy()).abs() < 1e-9);
}

#[test]
fn constant_modulates_to_the_corner_frequency() {
    let one = TorusField::from_fn(2, 8, |_| Complex64::new(1.0, 0.0)).unwrap();
    let g = dft(&sign_flip_modulation(&one).unwrap());
    let corner = g.site_index(&[4, 4]);
    for (k, v) in g.values().iter().enumerate() {
        let expect = if k == corner { 64.0 } else { 0.0 };
        assert!((v - Complex64::new(expect, 0.0)).norm() < 1e-12);
    }
}

/// `K_L(y) = L^{-d} sum_{j in Z^d} m(j/L) cos(2 pi <j, y>/L)` for an even
/// symbol supported in `q^{-1} Q`.
fn kernel_oracle(m: &dyn Fn(&[f64]) -> f64, l: usize, q: usize, y: &[i64]) -> f64 {
    let reach = (l / (2 * q)) as i64;
    let mut sum = 0.0;
    for j0 in -reach..=reach {
        for j1 in -reach..=reach {
            let eta = [j0 as f64 / l as f64, j1 as f64 / l as f64];
            let phase = (j0 * y[0] + j1 * y[1]) as f64 / l as f64;
            sum += m(&eta) * (2.0 * PI * phase).cos();
        }
    }
    sum / (l * l) as f64
}

#[test]
fn periodization_matches_sampled_kernel() {
    let l = 12;
    for q in [2usize, 3] {
        let f = TorusField::random_complex(2, l, q as u64).unwrap();
        let cut = BumpCutoff::phi();
        let base = move |eta: &[f64]| {
            let scaled: Vec<f64> = eta.iter().map(|v| v * q as f64).collect();
            let r = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
            cut.eval(&scaled) * eval_continuous_sphere_symbol(2, 3.0 * r).unwrap()
        };
        let a = periodized_multiplier_apply(&f, q as u64, |eta| Complex64::new(base(eta), 0.0)).unwrap();
        let b = sampled_kernel_apply(&f, q as u64, |y| kernel_oracle(&base, l, q, y)).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10, "q={q}");
        assert!(a.energy().sqrt() <= f.energy().sqrt() * (1.0 + 1e-12));
    }
}

#[test]
fn unit_period_reduces_to_the_folded_multiplier() {
    let f = TorusField::random_complex(2, 10, 4).unwrap();
    let cut = BumpCutoff::theta();
    let base = |eta: &[f64]| {
        let r = (eta[0] * eta[0] + eta[1] * eta[1]).sqrt();
        Complex64::new(cut.eval(eta) * eval_continuous_sphere_symbol(2, 2.0 * r).unwrap(), 0.0)
    };
    let a = periodized_multiplier_apply(&f, 1, base).unwrap();
    let b = apply_multiplier(&f, base);
    assert!(a.max_abs_diff(&b) < 1e-15);
}

#[test]
fn sampled_kernel_with_unit_period_is_convolution() {
    let f = TorusField::random_complex(2, 6, 9).unwrap();
    let k = |y: &[i64]| if y == [1, 0] || y == [0, 0] { 0.5 } else { 0.0 };
    let g = sampled_kernel_apply(&f, 1, k).unwrap();
    let expect = f.with_shift_average();
    assert!(g.max_abs_diff(&expect) < 1e-15);
}

trait ShiftAverage {
    fn with_shift_average(&self) -> TorusField;
}

impl ShiftAverage for TorusField {
    fn with_shift_average(&self) -> TorusField {
        let moved = self.translate(&[1, 0]);
        let values = self
            .values()
            .iter()
            .zip(moved.values())
            .map(|(a, b)| (a + b) * 0.5)
            .collect();
        TorusField::new(self.dim(), self.side(), self.kind(), values).unwrap()
    }
}

#[test]
fn semigroup_preserves_positivity() {
    let f = TorusField::random_real(2, 12, 6).unwrap();
    let pos = TorusField::new(
        2,
        12,
        ValueKind::Scalar,
        f.values().iter().map(|v| Complex64::new(v.re.abs(), 0.0)).collect(),
    )
    .unwrap();
    for t in [0.1, 1.0, 7.0] {
        let g = apply_multiplier(&pos, |xi| Complex64::new(eval_semigroup_symbol(t, xi).unwrap(), 0.0));
        assert!(g.values().iter().all(|v| v.re >= -1e-12));
    }
    // positive semidefinite fibers: f(x) = b(x) b(x)^*
    let b = TorusField::random_hermitian(2, 8, 2, 7).unwrap();
    let mut psd = TorusField::zeros(2, 8, ValueKind::Matrix(2)).unwrap();
    for site in 0..b.sites() {
        let m = b.matrix(site);
        let p = &m * m.adjoint();
        psd.fiber_mut(site).copy_from_slice(p.transpose().as_slice());
    }
    let g = apply_multiplier(&psd, |xi| Complex64::new(eval_semigroup_symbol(2.0, xi).unwrap(), 0.0));
    for site in 0..g.sites() {
        let m = g.matrix(site);
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        assert!(h.symmetric_eigen().eigenvalues.min() >= -1e-10);
    }
}

#[test]
fn semigroup_composition() {
    let f = TorusField::random_complex(2, 9, 8).unwrap();
    let p = |t: f64| move |xi: &[f64]| Complex64::new(eval_semigroup_symbol(t, xi).unwrap(), 0.0);
    let two_steps = apply_multiplier(&apply_multiplier(&f, p(0.7)), p(1.9));
    let one_step = apply_multiplier(&f, p(2.6));
    assert!(two_steps.max_abs_diff(&one_step) < 1e-12);
    let same = apply_multiplier(&f, |_| Complex64::new(1.0, 0.0));
    assert!(same.max_abs_diff(&f) < 1e-14);
}

#[test]
fn averages_respect_range_and_translation() {
    let f = TorusField::random_real(3, 10, 10).unwrap();
    let lo = f.values().iter().map(|v| v.re).fold(f64::INFINITY, f64::min);
    let hi = f.values().iter().map(|v| v.re).fold(f64::NEG_INFINITY, f64::max);
    let s = spec(3, 6);
    let g = spherical_average(&f, s).unwrap();
    assert!(g.values().iter().all(|v| v.re >= lo - 1e-14 && v.re <= hi + 1e-14));
    let shift = [3, -1, 7];
    let a = spherical_average(&f.translate(&shift), s).unwrap();
    let b = g.translate(&shift);
    assert_eq!(a, b);
}

#[test]
fn maximal_function_bounds() {
    let f = TorusField::random_complex(2, 16, 11).unwrap();
    let range = DyadicRange::new([0, 1, 2], 16).unwrap();
    let m = dyadic_maximal(&f, &range).unwrap();
    assert!(m.energy().sqrt() <= 3.0 * f.energy().sqrt());
    for s in range.spheres(2).unwrap() {
        let avg = spherical_average(&f, s).unwrap();
        for (a, b) in m.values().iter().zip(avg.values()) {
            assert!(a.re >= b.norm() - 1e-12);
        }
    }
    let single = DyadicRange::new([1], 16).unwrap();
    let ms = dyadic_maximal(&f, &single).unwrap();
    let avg = spherical_average(&f, spec(2, 4)).unwrap();
    for (a, b) in ms.values().iter().zip(avg.values()) {
        assert!((a.re - b.norm()).abs() < 1e-12);
    }
}

#[test]
fn binary_serialization_round_trip() {
    let f = TorusField::random_hermitian(2, 4, 3, 12).unwrap();
    let mut buf = Vec::new();
    write_binary(&f, &mut buf).unwrap();
    assert_eq!(&buf[..8], &2u64.to_le_bytes());
    assert_eq!(read_binary(buf.as_slice()).unwrap(), f);
}

#[test]
fn inverse_transform_and_frequencies() {
    let f = TorusField::random_complex(3, 7, 13).unwrap();
    assert!(idft(&dft(&f)).max_abs_diff(&f) < 1e-13);
    let freqs: Vec<f64> = (0..6).map(|k| frequency(k, 6)).collect();
    assert_eq!(freqs, vec![0.0, 1.0 / 6.0, 2.0 / 6.0, -0.5, -2.0 / 6.0, -1.0 / 6.0]);
}
