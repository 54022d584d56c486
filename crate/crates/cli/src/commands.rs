//! The five harness commands. Each returns its table, the verification
//! failures it found, and the values it would freeze under `--refreeze`.

use sphavg_core::decomposition::{decompose_with, decomposition_cost, prepare};
use sphavg_core::gauss::verify_gauss_identities;
use sphavg_core::lattice::{density_ratio, representation_count, surface_measure};
use sphavg_core::ncmax::{
    empirical_maximal_ratio, matrix_maximal_trial, trial_seeds, MatrixMaximalTrial,
};
use sphavg_core::pilot::{round_up_sig, PilotTable};
use sphavg_core::survey::{fit_small_scale_constant, residual_survey, sample_torus_points, summarize, Regime};
use sphavg_core::torus::DyadicRange;
use sphavg_core::{Error, SphereSpec, TorusPoint};

use crate::args::{DecomposeArgs, GaussArgs, MaximalArgs, RatioArgs, ResidualArgs};
use crate::output::{float, xi_hash, Table};
use crate::CliError;

/// Tolerance of the Gauss-sum normalization identity.
pub const GAUSS_SUM_TOL: f64 = 1e-10;
/// Slack allowed above the Gauss-sum size bound.
pub const GAUSS_BOUND_TOL: f64 = 1e-12;
/// Tolerance of `major + minor + E = m_t`.
pub const BOOKKEEPING_TOL: f64 = 1e-12;
/// Relative agreement required when reproducing a frozen value.
pub const REPRODUCTION_TOL: f64 = 1e-8;
/// Slack above 1 for a single contraction.
pub const CONTRACTION_TOL: f64 = 1e-10;
/// Significant digits kept when a threshold is frozen (rounded up).
pub const THRESHOLD_DIGITS: usize = 10;

/// A value for the pilot file together with its provenance comment lines.
#[derive(Debug, Clone, PartialEq)]
pub struct Frozen {
    pub key: String,
    pub value: f64,
    pub provenance: Vec<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub failures: Vec<String>,
    pub frozen: Vec<Frozen>,
}

/// `value` reproduces `frozen` to [`REPRODUCTION_TOL`] relative.
pub fn reproduces(value: f64, frozen: f64) -> bool {
    (value - frozen).abs() <= REPRODUCTION_TOL * frozen.abs().max(f64::MIN_POSITIVE)
}

/// As [`reproduces`] with an absolute floor of [`REPRODUCTION_TOL`]: `|E|`
/// comes from cancelling terms of size up to 1, so digits below that scale
/// are round-off and vary with the build.
pub fn reproduces_unit_scale(value: f64, frozen: f64) -> bool {
    (value - frozen).abs() <= REPRODUCTION_TOL * frozen.abs().max(1.0)
}

pub fn verify_gauss(args: &GaussArgs) -> Result<Outcome, CliError> {
    if args.qmax == 0 {
        return Err(CliError::Usage("--qmax must be at least 1".into()));
    }
    let mut out = Outcome {
        table: Table::new(&["q", "p", "d", "max_abs_dev_sum_identity", "max_bound_excess"]),
        ..Outcome::default()
    };
    for &d in &args.d.0 {
        let report = verify_gauss_identities(args.qmax, d as usize)?;
        for row in report.rows {
            if row.max_abs_dev_sum_identity > GAUSS_SUM_TOL {
                out.failures.push(format!(
                    "q={} p={} d={}: sum identity off by {:e}",
                    row.q, row.p, row.d, row.max_abs_dev_sum_identity
                ));
            }
            if row.max_bound_excess > GAUSS_BOUND_TOL {
                out.failures.push(format!(
                    "q={} p={} d={}: bound exceeded by {:e}",
                    row.q, row.p, row.d, row.max_bound_excess
                ));
            }
            out.table.push(vec![
                row.q.to_string(),
                row.p.to_string(),
                row.d.to_string(),
                float(row.max_abs_dev_sum_identity),
                float(row.max_bound_excess),
            ]);
        }
    }
    Ok(out)
}

pub fn residual_key(regime: Regime, d: usize, lambda: u64) -> String {
    format!("residual.{regime}.d{d}.lambda{lambda}.max_ratio")
}

pub fn residual(args: &ResidualArgs, pilot: &PilotTable, refreeze: bool) -> Result<Outcome, CliError> {
    let spec = SphereSpec::new(args.d, args.lambda)?;
    args.regime.check(spec)?;
    if args.regime != Regime::Folded {
        let cost = decomposition_cost(spec);
        if cost > args.budget {
            return Err(Error::InfeasibleScale { cost, budget: args.budget }.into());
        }
    }
    let samples = residual_survey(spec, args.regime, args.samples, args.seed)?;
    let mut out = Outcome {
        table: Table::new(&["index", "xi_hash", "v_cardinality", "branch", "residual", "bound", "ratio"]),
        ..Outcome::default()
    };
    for s in &samples {
        out.table.push(vec![
            s.index.to_string(),
            xi_hash(s.xi.coords()),
            s.v_cardinality.to_string(),
            s.branch.to_string(),
            float(s.residual),
            float(s.bound_value),
            float(s.ratio),
        ]);
    }
    let summary = summarize(&samples);
    out.table.push(vec![
        "summary".into(),
        String::new(),
        String::new(),
        String::new(),
        float(summary.max_residual),
        String::new(),
        float(summary.max_ratio),
    ]);
    if samples[0].residual != 0.0 {
        out.failures
            .push(format!("residual at the origin is {:e}, not 0", samples[0].residual));
    }
    let command = format!(
        "residual --regime {} --d {} --lambda {} --samples {} --seed {}",
        args.regime, args.d, args.lambda, args.samples, args.seed
    );
    let key = residual_key(args.regime, args.d, args.lambda);
    if refreeze {
        out.frozen.push(Frozen {
            key,
            value: round_up_sig(summary.max_ratio, THRESHOLD_DIGITS),
            provenance: vec![
                command.clone(),
                "largest residual / envelope ratio, rounded up to 10 significant digits".into(),
            ],
        });
        if args.regime == Regime::Small {
            if let Some(c) = fit_small_scale_constant(spec, &samples) {
                out.frozen.push(Frozen {
                    key: format!("residual.small.d{}.lambda{}.fitted_c", args.d, args.lambda),
                    value: c,
                    provenance: vec![
                        command,
                        "largest exponent constant c with implicit constant 1".into(),
                    ],
                });
            }
        }
    } else if let Some(threshold) = pilot.get(&key) {
        if summary.max_ratio > threshold {
            out.failures.push(format!(
                "max ratio {:e} exceeds the frozen threshold {:e} ({key})",
                summary.max_ratio, threshold
            ));
        }
    }
    Ok(out)
}

pub fn ratio_survey(args: &RatioArgs) -> Result<Outcome, CliError> {
    if args.lambda.0.contains(&0) {
        return Err(CliError::Usage("lambda = 0 is not a sphere; use lambda >= 1".into()));
    }
    let mut out = Outcome {
        table: Table::new(&["d", "lambda", "status", "ratio", "inv_sigma", "ratio_times_sigma"]),
        ..Outcome::default()
    };
    for &d in &args.d.0 {
        let sigma = surface_measure(d as usize)?;
        for &lambda in &args.lambda.0 {
            let spec = SphereSpec::new(d as usize, lambda)?;
            let mut row = vec![d.to_string(), lambda.to_string()];
            if representation_count(spec) == 0u32.into() {
                row.extend(["empty".into(), String::new(), float(1.0 / sigma), String::new()]);
            } else {
                let ratio = density_ratio(spec)?;
                row.extend(["ok".into(), float(ratio), float(1.0 / sigma), float(ratio * sigma)]);
            }
            out.table.push(row);
        }
    }
    Ok(out)
}

pub fn decompose_key(d: usize, lambda: u64, n: u64, seed: u64, index: usize) -> String {
    format!("decompose.d{d}.lambda{lambda}.n{n}.seed{seed}.xi{index}.abs_error")
}

pub fn decompose(args: &DecomposeArgs, pilot: &PilotTable, refreeze: bool) -> Result<Outcome, CliError> {
    let spec = SphereSpec::new(args.d, args.lambda)?;
    let multiplier = prepare(spec, args.budget)?;
    let mut points = vec![TorusPoint::zero(args.d)];
    points.extend(sample_torus_points(args.d, args.samples, args.seed));
    let mut out = Outcome {
        table: Table::new(&[
            "d", "lambda", "n", "xi_index", "xi_hash", "abs_major", "abs_minor", "abs_error",
            "error_bound", "bookkeeping",
        ]),
        ..Outcome::default()
    };
    for &n in &args.n.0 {
        for (i, xi) in points.iter().enumerate() {
            let r = decompose_with(&multiplier, n, xi)?;
            let book = r.bookkeeping_residual();
            let err = r.total_error.norm();
            if !(book <= BOOKKEEPING_TOL) {
                out.failures
                    .push(format!("n={n} xi#{i}: major + minor + E - m_t = {book:e}"));
            }
            let key = decompose_key(args.d, args.lambda, n, args.seed, i);
            if refreeze {
                out.frozen.push(Frozen {
                    key,
                    value: err,
                    provenance: vec![format!(
                        "decompose --d {} --lambda {} --n {n} --samples {} --seed {}",
                        args.d, args.lambda, args.samples, args.seed
                    )],
                });
            } else if let Some(frozen) = pilot.get(&key) {
                if !reproduces_unit_scale(err, frozen) {
                    out.failures
                        .push(format!("{key}: |E| = {err:e}, frozen {frozen:e}"));
                }
            }
            out.table.push(vec![
                args.d.to_string(),
                args.lambda.to_string(),
                n.to_string(),
                i.to_string(),
                xi_hash(xi.coords()),
                float(r.major_sum.norm()),
                float(r.minor_term.norm()),
                float(err),
                float(r.error_bound),
                float(book),
            ]);
        }
    }
    Ok(out)
}

pub fn maximal_key(d: usize, side: usize, scales: &[u32], trials: usize, seed: u64, stat: &str) -> String {
    let s: Vec<String> = scales.iter().map(ToString::to_string).collect();
    format!(
        "maximal.d{d}.L{side}.scales{}.trials{trials}.seed{seed}.{stat}",
        s.join("-")
    )
}

/// The constant is only comparable across runs of the same configuration.
pub fn square_function_key(
    dims: &[u32],
    side: usize,
    n: usize,
    scales: &[u32],
    trials: usize,
    seed: u64,
) -> String {
    let join = |v: &[u32]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join("-");
    format!(
        "maximal.matrix.d{}.L{side}.n{n}.scales{}.trials{trials}.seed{seed}.square_function_constant",
        join(dims),
        join(scales)
    )
}

pub const MAXIMAL_HEADER: [&str; 15] = [
    "kind", "d", "L", "n", "K", "p", "trial", "seed", "value", "input_norm", "ratio", "lower",
    "square_function", "certificate_gap", "duality_gap",
];

/// `sites * log2(sites) * (scales + 1)`, the FFT work estimate.
pub fn maximal_cost(d: usize, side: usize, scales: usize) -> f64 {
    let sites = (side as f64).powi(d as i32);
    sites * sites.log2().max(1.0) * (scales + 1) as f64
}

pub fn maximal_survey(args: &MaximalArgs, pilot: &PilotTable, refreeze: bool) -> Result<Outcome, CliError> {
    let scales = &args.scales.0;
    let k = scales.len();
    let mut out = Outcome {
        table: Table::new(&MAXIMAL_HEADER),
        ..Outcome::default()
    };
    for &d in &args.dims.0 {
        let d = d as usize;
        let cost = maximal_cost(d, args.side, k);
        if cost > args.budget {
            return Err(Error::InfeasibleScale { cost, budget: args.budget }.into());
        }
        let range = DyadicRange::new(scales.iter().copied(), args.side)?;
        let stats = empirical_maximal_ratio(d, args.side, &range, args.trials, args.seed)?;
        for (t, &ratio) in stats.ratios.iter().enumerate() {
            if k == 1 && ratio > 1.0 + CONTRACTION_TOL {
                out.failures
                    .push(format!("d={d} trial {t}: single-scale ratio {ratio:e} > 1"));
            }
            if ratio > k as f64 {
                out.failures
                    .push(format!("d={d} trial {t}: ratio {ratio:e} > {k} scales"));
            }
            let norm = stats.input_norms[t];
            out.table.push(vec![
                "scalar".into(),
                d.to_string(),
                args.side.to_string(),
                "1".into(),
                k.to_string(),
                "2".into(),
                t.to_string(),
                stats.seeds[t].to_string(),
                float(ratio * norm),
                float(norm),
                float(ratio),
                String::new(),
                String::new(),
                String::new(),
                String::new(),
            ]);
        }
        for (stat, value) in [("max", stats.max), ("mean", stats.mean)] {
            let key = maximal_key(d, args.side, scales, args.trials, args.seed, stat);
            if refreeze {
                out.frozen.push(Frozen {
                    key,
                    value,
                    provenance: vec![format!(
                        "maximal-survey --dims {d} --side {} --scales {} --trials {} --seed {}",
                        args.side, args.scales, args.trials, args.seed
                    )],
                });
            } else if let Some(frozen) = pilot.get(&key) {
                if !reproduces(value, frozen) {
                    out.failures
                        .push(format!("{key}: {value:e} does not reproduce {frozen:e}"));
                }
            }
        }
    }
    let sf_key = square_function_key(
        &args.matrix_dims.0,
        args.matrix_side,
        args.matrix_n,
        scales,
        args.matrix_trials,
        args.seed,
    );
    let mut sf_constant = 0.0f64;
    if args.matrix_trials > 0 {
        for &d in &args.matrix_dims.0 {
            let d = d as usize;
            let range = DyadicRange::new(scales.iter().copied(), args.matrix_side)?;
            for (t, s) in trial_seeds(args.seed, args.matrix_trials).into_iter().enumerate() {
                let trial = match matrix_maximal_trial(d, args.matrix_side, args.matrix_n, &range, s, args.tol) {
                    Ok(trial) => trial,
                    Err(Error::SolverStall { gap, best }) => {
                        out.failures
                            .push(format!("d={d} trial {t}: solver stalled at gap {gap:e}"));
                        MatrixMaximalTrial {
                            value: best.value,
                            input_norm: f64::NAN,
                            lower: f64::NAN,
                            square_function: f64::NAN,
                            certificate_gap: best.certificate_gap,
                            duality_gap: best.duality_gap,
                        }
                    }
                    Err(e) => return Err(e.into()),
                };
                if !(trial.certificate_gap <= args.tol) {
                    out.failures.push(format!(
                        "d={d} trial {t}: certificate gap {:e} above tol",
                        trial.certificate_gap
                    ));
                }
                if trial.value < trial.lower * (1.0 - args.tol) {
                    out.failures.push(format!(
                        "d={d} trial {t}: value {:e} below the lower bound {:e}",
                        trial.value, trial.lower
                    ));
                }
                let c = trial.value / trial.square_function;
                if c.is_finite() {
                    sf_constant = sf_constant.max(c);
                }
                out.table.push(vec![
                    "matrix".into(),
                    d.to_string(),
                    args.matrix_side.to_string(),
                    args.matrix_n.to_string(),
                    k.to_string(),
                    "2".into(),
                    t.to_string(),
                    s.to_string(),
                    float(trial.value),
                    float(trial.input_norm),
                    float(trial.value / trial.input_norm),
                    float(trial.lower),
                    float(trial.square_function),
                    float(trial.certificate_gap),
                    float(trial.duality_gap),
                ]);
            }
        }
        if refreeze {
            out.frozen.push(Frozen {
                key: sf_key,
                value: round_up_sig(sf_constant, THRESHOLD_DIGITS),
                provenance: vec![
                    format!(
                        "maximal-survey --matrix-dims {} --matrix-side {} --matrix-n {} --matrix-trials {} --scales {} --seed {}",
                        args.matrix_dims, args.matrix_side, args.matrix_n, args.matrix_trials, args.scales, args.seed
                    ),
                    "largest order-interval value / square-function norm, rounded up".into(),
                ],
            });
        } else if let Some(c) = pilot.get(&sf_key) {
            if sf_constant > c {
                out.failures.push(format!(
                    "square-function constant {sf_constant:e} exceeds the frozen {c:e}"
                ));
            }
        }
    }
    Ok(out)
}
