//! End-to-end acceptance checks; prints one line per criterion and exits
//! non-zero if any fails.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use dispersive_core::decomposition::{bilinear_reconstruction_residual, bilinear_restriction_ratio, theta_weight};
use dispersive_core::extremizers::{
    envelope_check, focusing_check, sample_smoothing_extremizer, smoothing_frame, ExtremizerSpec, Family,
    DECIMATED_POINTS, DEFAULT_EPSILON, FOCUS_FLOOR,
};
use dispersive_core::harness::{
    fit_loglog, measure, verify_airy_measured, verify_maximal_measured, verify_sharpness_measured, SweepConfig,
    SweepRecord,
};
use dispersive_core::norms::{admissibility_threshold, lp_norm, maximal_exponent, smoothing_exponent, ExponentQuery};
use dispersive_core::propagator::{evolve, kernel_tail_mass, smooth_ball};
use dispersive_core::spectral::CutoffSpec;
use dispersive_core::{DispersionParams, EllipticPhase, Field, GridSpec, Representation};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, fn() -> Outcome);

const SLOPE_TOLERANCE: f64 = 0.1;
const LAMBDAS: [f64; 5] = [16.0, 32.0, 64.0, 128.0, 256.0];

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn band_limited(grid: GridSpec, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cut = 0.5 * grid.nyquist();
    let samples = (0..grid.len())
        .map(|i| {
            let z = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let xi = grid.frequency_vector(i);
            if xi.iter().map(|v| v * v).sum::<f64>().sqrt() <= cut {
                z
            } else {
                c(0.0)
            }
        })
        .collect();
    Field::new(grid, Representation::Frequency, samples).unwrap()
}

fn unitarity() -> Outcome {
    let grid = GridSpec::new(1, 4096, 100.0).map_err(|e| e.to_string())?;
    let mut l2_drift = 0.0f64;
    let mut group = 0.0f64;
    for (i, alpha) in [1.5, 2.0, 3.0].into_iter().enumerate() {
        let params = DispersionParams::new(alpha, 1).map_err(|e| e.to_string())?;
        let f = band_limited(grid, i as u64).to_physical().map_err(|e| e.to_string())?;
        let n0 = lp_norm(&f, 2.0).map_err(|e| e.to_string())?;
        for t in [0.0, 0.3, 1.0] {
            let u = evolve(&f, t, &params).map_err(|e| e.to_string())?;
            l2_drift = l2_drift.max((lp_norm(&u, 2.0).map_err(|e| e.to_string())? / n0 - 1.0).abs());
        }
        let (s, t) = (0.3, 0.7);
        let two = evolve(&evolve(&f, s, &params).map_err(|e| e.to_string())?, t, &params).map_err(|e| e.to_string())?;
        let one = evolve(&f, s + t, &params).map_err(|e| e.to_string())?;
        group = group.max(two.max_distance(&one).map_err(|e| e.to_string())? / f.max_abs());
    }
    Ok((
        l2_drift <= 1e-12 && group <= 1e-11,
        format!("L2 drift {l2_drift:.2e} (<= 1e-12), group law {group:.2e} (<= 1e-11)"),
    ))
}

fn transform_oracle() -> Outcome {
    let mut worst = 0.0f64;
    for (dim, n, l) in [(1, 16, 2.0), (1, 64, 9.0), (2, 16, 1.0), (2, 64, 4.0)] {
        let grid = GridSpec::new(dim, n, l).map_err(|e| e.to_string())?;
        let f = band_limited(grid, n as u64).to_physical().map_err(|e| e.to_string())?;
        let fast = f.dft_forward().map_err(|e| e.to_string())?;
        let mut err = 0.0f64;
        let mut scale = 0.0f64;
        for k in 0..grid.len() {
            let xi = grid.frequency_vector(k);
            let mut z = c(0.0);
            for m in 0..grid.len() {
                let x = grid.position(m);
                let ph: f64 = x.iter().zip(&xi).map(|(a, b)| a * b).sum();
                z += f.samples()[m] * Complex64::from_polar(1.0, -ph);
            }
            z *= grid.cell_volume();
            err = err.max((z - fast.samples()[k]).norm());
            scale = scale.max(z.norm());
        }
        worst = worst.max(err / scale);
    }
    Ok((worst <= 1e-12, format!("max relative error {worst:.2e} (<= 1e-12), N <= 64, d = 1, 2")))
}

fn partitions() -> Outcome {
    let cut = CutoffSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut lp, mut cubes, mut tele) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let r = rng.gen_range(0.0..4096.0);
        let s: f64 = (0..20).map(|k| cut.lp_piece(k, r)).sum();
        lp = lp.max((s - 1.0).abs());
        let (u, v) = (rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0));
        let mut s = 0.0;
        for a in -22i64..=22 {
            for b in -22i64..=22 {
                s += cut.vartheta(&[u - a as f64, v - b as f64]);
            }
        }
        cubes = cubes.max((s - 1.0).abs());
        let lambda = rng.gen_range(1.0..1024.0);
        let xi = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let eta = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
        let s: f64 = (0..40).map(|j| theta_weight(j, lambda, &xi, &eta)).sum();
        tele = tele.max((s - 1.0).abs());
    }
    let worst = lp.max(cubes).max(tele);
    Ok((
        worst <= 1e-12,
        format!("dyadic {lp:.1e}, cube translates {cubes:.1e}, near-diagonal weights {tele:.1e} (<= 1e-12)"),
    ))
}

fn reconstruction() -> Outcome {
    let grid = GridSpec::new(1, 128, 32.0 * PI).map_err(|e| e.to_string())?;
    let ep = EllipticPhase::quadratic(vec![0.0], 1.5).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut draw = || {
        let mut samples = vec![c(0.0); grid.len()];
        for m in -32i64..32 {
            samples[grid.wrapped_slot(m).unwrap()] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        Field::new(grid, Representation::Frequency, samples).unwrap()
    };
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let (f, g) = (draw(), draw());
        let r = bilinear_reconstruction_residual(&f, &g, 256.0, &[0.0, 0.5, 1.0], &ep).map_err(|e| e.to_string())?;
        worst = worst.max(r);
    }
    Ok((worst <= 1e-10, format!("max residual {worst:.2e} (<= 1e-10), 3 instances, 64 modes, lambda = 256")))
}

fn kernel_tails() -> Outcome {
    let mut worst = 0.0f64;
    let mut at = (0.0, 0, 0.0);
    for alpha in [1.5, 2.0, 3.0] {
        let params = DispersionParams::new(alpha, 1).map_err(|e| e.to_string())?;
        for k in 3..=8 {
            for t in [0.0, 0.5, 1.0] {
                let m = kernel_tail_mass(k, t, &params).map_err(|e| e.to_string())?;
                if m >= worst {
                    worst = m;
                    at = (alpha, k, t);
                }
            }
        }
    }
    Ok((
        worst < 0.01,
        format!("largest tail mass {worst:.2e} (< 0.01) at alpha = {}, k = {}, t = {}", at.0, at.1, at.2),
    ))
}

fn sharpness() -> Outcome {
    let mut lines = Vec::new();
    let mut pass = true;
    for alpha in [2.0, 3.0] {
        let q = ExponentQuery::new(alpha, 1, 6.0).map_err(|e| e.to_string())?;
        let crit = smoothing_exponent(&q);
        let cfg = SweepConfig::smoothing(alpha, 1, 6.0, crit, LAMBDAS.to_vec());
        let m = measure(&cfg).map_err(|e| e.to_string())?;
        let mut slopes = Vec::new();
        for shift in [-0.2, 0.0, 0.2] {
            let v = verify_sharpness_measured(&m, crit + shift, SLOPE_TOLERANCE).map_err(|e| e.to_string())?;
            pass &= v.pass && (v.expected + shift).abs() < 1e-12;
            slopes.push(format!("{:+.3}", v.slope));
        }
        lines.push(format!("alpha = {alpha}: slopes {} at beta = {crit:.4} +0.2/0/-0.2", slopes.join("/")));
    }
    Ok((pass, format!("{} (targets 0.2/0/-0.2 +- 0.1)", lines.join("; "))))
}

fn envelope() -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for alpha in [2.0, 3.0] {
        let params = DispersionParams::new(alpha, 1).map_err(|e| e.to_string())?;
        let mut records = Vec::new();
        for &lambda in &LAMBDAS {
            let frame = smoothing_frame(lambda, &params, 0.0, false, DECIMATED_POINTS).map_err(|e| e.to_string())?;
            let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, lambda, params, DEFAULT_EPSILON)
                .map_err(|e| e.to_string())?;
            let rep = envelope_check(&frame.samples, &spec).map_err(|e| e.to_string())?;
            records.push(SweepRecord {
                lambda,
                points: frame.fine.points(),
                half_width: frame.fine.half_width(),
                t_samples: 1,
                numerator: rep.peak_ratio,
                denominator: 1.0,
                ratio: rep.peak_ratio,
            });
        }
        let slope = fit_loglog(&records).map_err(|e| e.to_string())?.slope;
        let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, 64.0, params, DEFAULT_EPSILON)
            .map_err(|e| e.to_string())?;
        let f = sample_smoothing_extremizer(&spec, DECIMATED_POINTS).map_err(|e| e.to_string())?;
        let tail = envelope_check(&f, &spec).map_err(|e| e.to_string())?;
        pass &= slope.abs() <= 0.15 && tail.tail_samples > 0 && tail.tail_ratio <= 1e-4;
        parts.push(format!("alpha = {alpha}: peak slope {slope:+.3}, tail {:.1e}", tail.tail_ratio));
    }
    Ok((pass, format!("{} (slope 0 +- 0.15, tail <= 1e-4 at lambda = 64)", parts.join("; "))))
}

fn focusing() -> Outcome {
    let params = DispersionParams::new(2.0, 1).map_err(|e| e.to_string())?;
    let mut mins = Vec::new();
    let mut exact = 0.0f64;
    for lambda in [16.0, 32.0, 64.0] {
        let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, lambda, params, DEFAULT_EPSILON)
            .map_err(|e| e.to_string())?;
        let rep = focusing_check(&spec).map_err(|e| e.to_string())?;
        mins.push(rep.min_modulus_ratio);
        exact = exact.max((rep.focus_ratio - c(rep.predicted_focus_ratio)).norm() / rep.predicted_focus_ratio);
    }
    let lo = mins.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = mins.iter().cloned().fold(0.0, f64::max);
    let mean = mins.iter().sum::<f64>() / mins.len() as f64;
    let stable = hi <= 1.2 * mean && lo >= 0.8 * mean;
    Ok((
        lo >= FOCUS_FLOOR && stable && exact <= 1e-8,
        format!("min ratios {mins:.4?} (>= {FOCUS_FLOOR}, +-20%), focal value error {exact:.1e} (<= 1e-8)"),
    ))
}

fn maximal() -> Outcome {
    let cfg = SweepConfig::maximal(3.0, 1, 6.0, 0.25, LAMBDAS.to_vec());
    let m = measure(&cfg).map_err(|e| e.to_string())?;
    let at = verify_maximal_measured(&m, 0.25, SLOPE_TOLERANCE).map_err(|e| e.to_string())?;
    let below = verify_maximal_measured(&m, 0.05, SLOPE_TOLERANCE).map_err(|e| e.to_string())?;
    Ok((
        at.pass && below.pass,
        format!(
            "slope {:+.3} at beta = 1/4 (>= -0.1), {:+.3} at beta = 0.05 (> 0.1)",
            at.slope, below.slope
        ),
    ))
}

fn airy() -> Outcome {
    let cfg = SweepConfig::airy(6.0, 0.5, vec![16.0, 32.0, 64.0, 128.0]);
    let m = measure(&cfg).map_err(|e| e.to_string())?;
    let crit = verify_airy_measured(&m, 0.5, SLOPE_TOLERANCE).map_err(|e| e.to_string())?;
    let zero = verify_airy_measured(&m, 0.0, SLOPE_TOLERANCE).map_err(|e| e.to_string())?;
    Ok((
        crit.pass && zero.pass,
        format!("p = 6: slope {:+.3} at beta = 1/2 (0 +- 0.1), {:+.3} at beta = 0 (0.5 +- 0.1)", crit.slope, zero.slope),
    ))
}

fn restriction() -> Outcome {
    let grid = GridSpec::new(1, 2048, 512.0).map_err(|e| e.to_string())?;
    let ep = EllipticPhase::quadratic(vec![0.0], 1.2).map_err(|e| e.to_string())?;
    let h1 = Field::from_frequency_fn(grid, |xi| c(smooth_ball(xi, &[-0.75], 0.25)));
    let h2 = Field::from_frequency_fn(grid, |xi| c(smooth_ball(xi, &[0.75], 0.25)));
    let mut records = Vec::new();
    for lambda in [16.0, 32.0, 64.0, 128.0] {
        let r = bilinear_restriction_ratio(&h1, &h2, 6.0, lambda, &ep, None).map_err(|e| e.to_string())?;
        records.push(SweepRecord {
            lambda,
            points: grid.points(),
            half_width: grid.half_width(),
            t_samples: 0,
            numerator: r,
            denominator: 1.0,
            ratio: r,
        });
    }
    let slope = fit_loglog(&records).map_err(|e| e.to_string())?.slope;
    Ok((slope <= 0.05, format!("ratio slope {slope:+.4} (<= 0.05), p = 6, lambda 16..128")))
}

fn exponent_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let alpha = rng.gen_range(0.05..4.0);
        let dim = rng.gen_range(1..=4);
        let p = rng.gen_range(1.0..50.0);
        let q = ExponentQuery::new(alpha, dim, p).map_err(|e| e.to_string())?;
        worst = worst.max((smoothing_exponent(&q) + alpha / p - maximal_exponent(&q)).abs());
    }
    let exact = admissibility_threshold(1) == 4.0 && admissibility_threshold(2) == 10.0 / 3.0;
    Ok((
        worst <= 1e-14 && exact,
        format!("identity error {worst:.1e} (<= 1e-14) over 10^4 queries, thresholds exact: {exact}"),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("unitarity and group law", unitarity),
        ("transform oracle", transform_oracle),
        ("partition identities", partitions),
        ("bilinear reconstruction", reconstruction),
        ("kernel localization", kernel_tails),
        ("smoothing sharpness", sharpness),
        ("stationary-phase envelope", envelope),
        ("focusing lower bound", focusing),
        ("maximal necessary condition", maximal),
        ("airy endpoint", airy),
        ("bilinear restriction", restriction),
        ("exponent algebra", exponent_algebra),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (pass, detail) = match check() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} [{:.1}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 12 passed", 12 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
