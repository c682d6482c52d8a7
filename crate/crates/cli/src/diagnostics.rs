use std::f64::consts::PI;
use std::path::PathBuf;

use clap::Args;
use dispersive_core::decomposition::{bilinear_reconstruction_residual, bilinear_restriction_ratio};
use dispersive_core::extremizers::{
    envelope_check, focusing_check, ridge_check, sample_smoothing_extremizer, ExtremizerSpec, Family,
    DECIMATED_POINTS, DEFAULT_EPSILON, FOCUS_FLOOR, RIDGE_FLOOR,
};
use dispersive_core::harness::{fit_loglog, SweepRecord};
use dispersive_core::propagator::{kernel_tail_mass, smooth_ball};
use dispersive_core::{DispersionParams, EllipticPhase, Field, GridSpec, Representation};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::config::{CliError, CliResult, Layer, EXIT_FAIL, EXIT_PASS};
use crate::output::{self, num, Format, RunConfig};

pub const NAMES: [&str; 6] = [
    "kernel",
    "bilinear-reconstruction",
    "bilinear-restriction",
    "envelope",
    "focusing",
    "ridge",
];

const KERNEL_LIMIT: f64 = 0.01;
const RECONSTRUCTION_LIMIT: f64 = 1e-10;
const RESTRICTION_SLOPE_LIMIT: f64 = 0.05;
const ENVELOPE_TAIL_LIMIT: f64 = 1e-4;
const RESTRICTION_LAMBDAS: [f64; 4] = [16.0, 32.0, 64.0, 128.0];

#[derive(Debug, Args)]
pub struct DiagnosticsArgs {
    /// Diagnostics to run; all of them when empty.
    names: Vec<String>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Dyadic band of the kernel diagnostic.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, allow_hyphen_values = true)]
    t: Option<f64>,
    /// Frequency scale; each diagnostic has its own default.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Relation {
    Below,
    AtMost,
    AtLeast,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Below => "<",
            Relation::AtMost => "<=",
            Relation::AtLeast => ">=",
        }
    }

    fn holds(self, value: f64, threshold: f64) -> bool {
        match self {
            Relation::Below => value < threshold,
            Relation::AtMost => value <= threshold,
            Relation::AtLeast => value >= threshold,
        }
    }
}

struct Row {
    name: String,
    value: f64,
    relation: Relation,
    threshold: f64,
}

impl Row {
    fn pass(&self) -> bool {
        self.value.is_finite() && self.relation.holds(self.value, self.threshold)
    }
}

struct Settings {
    alpha: f64,
    k: u32,
    t: f64,
    lambda: Option<f64>,
    p: f64,
    epsilon: f64,
    modes: usize,
    seed: u64,
}

pub fn run(args: DiagnosticsArgs, mut layer: Layer) -> CliResult<i32> {
    let names: Vec<String> = layer
        .pick(
            "names",
            (!args.names.is_empty()).then_some(args.names),
            Some(NAMES.iter().map(|s| s.to_string()).collect()),
        )?
        .unwrap_or_default();
    for n in &names {
        if !NAMES.contains(&n.as_str()) {
            return Err(CliError::config(format!(
                "unknown diagnostic {n:?}; known: {}",
                NAMES.join(", ")
            )));
        }
    }
    let s = Settings {
        alpha: layer.pick("alpha", args.alpha, Some(2.0))?.unwrap_or(2.0),
        k: layer.pick("k", args.k, Some(6))?.unwrap_or(6),
        t: layer.pick("t", args.t, Some(1.0))?.unwrap_or(1.0),
        lambda: layer.pick("lambda", args.lambda, None)?,
        p: layer.pick("p", args.p, Some(6.0))?.unwrap_or(6.0),
        epsilon: layer
            .pick("epsilon", args.epsilon, Some(DEFAULT_EPSILON))?
            .unwrap_or(DEFAULT_EPSILON),
        modes: layer.pick("modes", args.modes, Some(64))?.unwrap_or(64),
        seed: layer.pick("seed", args.seed, Some(1))?.unwrap_or(1),
    };
    let out_path = layer.pick("output", args.output, None)?;
    let format = layer.pick("format", args.format, Some(Format::Csv))?.unwrap_or(Format::Csv);
    let run = RunConfig {
        command: "diagnostics".into(),
        params: layer.finish()?,
        output: out_path.clone(),
        format,
        plot: false,
    };
    run.echo();

    let mut rows = Vec::with_capacity(names.len());
    for n in &names {
        rows.push(evaluate(n, &s)?);
    }
    let all_pass = rows.iter().all(Row::pass);
    let text = match format {
        Format::Csv => {
            let mut out = run.csv_header();
            out.push_str("diagnostic,value,relation,threshold,pass\n");
            for r in &rows {
                out.push_str(&output::row(&[
                    r.name.clone(),
                    num(r.value),
                    r.relation.symbol().into(),
                    num(r.threshold),
                    r.pass().to_string(),
                ]));
            }
            out
        }
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|r| {
                    json!({
                        "diagnostic": r.name,
                        "value": r.value,
                        "relation": r.relation.symbol(),
                        "threshold": r.threshold,
                        "pass": r.pass(),
                    })
                })
                .collect();
            let doc = json!({"config": run.to_json(), "diagnostics": items, "pass": all_pass});
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap_or_default())
        }
    };
    let mut out = output::open(out_path.as_deref())?;
    output::write_all(&mut *out, &text)?;
    Ok(if all_pass { EXIT_PASS } else { EXIT_FAIL })
}

fn evaluate(name: &str, s: &Settings) -> CliResult<Row> {
    let row = |value: f64, relation: Relation, threshold: f64| Row {
        name: name.to_string(),
        value,
        relation,
        threshold,
    };
    Ok(match name {
        "kernel" => {
            let params = DispersionParams::new(s.alpha, 1)?;
            row(kernel_tail_mass(s.k, s.t, &params)?, Relation::Below, KERNEL_LIMIT)
        }
        "bilinear-reconstruction" => {
            let (f, g, ep) = reconstruction_instance(s.modes, s.seed)?;
            let lambda = s.lambda.unwrap_or(256.0);
            let r = bilinear_reconstruction_residual(&f, &g, lambda, &[0.0, 0.5], &ep)?;
            row(r, Relation::AtMost, RECONSTRUCTION_LIMIT)
        }
        "bilinear-restriction" => row(restriction_slope(s.p)?, Relation::AtMost, RESTRICTION_SLOPE_LIMIT),
        "envelope" => {
            let params = DispersionParams::new(s.alpha, 1)?;
            let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, s.lambda.unwrap_or(64.0), params, s.epsilon)?;
            let f = sample_smoothing_extremizer(&spec, DECIMATED_POINTS)?;
            let rep = envelope_check(&f, &spec)?;
            if rep.tail_samples == 0 {
                return Err(CliError::numeric("envelope tail window holds no samples"));
            }
            row(rep.tail_ratio, Relation::AtMost, ENVELOPE_TAIL_LIMIT)
        }
        "focusing" => {
            let params = DispersionParams::new(s.alpha, 1)?;
            let spec = ExtremizerSpec::sized(Family::SmoothingFLambda, s.lambda.unwrap_or(32.0), params, s.epsilon)?;
            row(focusing_check(&spec)?.min_modulus_ratio, Relation::AtLeast, FOCUS_FLOOR)
        }
        "ridge" => {
            let params = DispersionParams::new(s.alpha, 1)?;
            let spec = ExtremizerSpec::sized(Family::MaximalGLambda, s.lambda.unwrap_or(32.0), params, s.epsilon)?;
            row(ridge_check(&spec, s.epsilon)?.min_ridge_ratio, Relation::AtLeast, RIDGE_FLOOR)
        }
        other => return Err(CliError::config(format!("unknown diagnostic {other:?}"))),
    })
}

/// Two fields with `modes` consecutive random lattice modes around the
/// origin, and a quadratic phase covering them.
pub fn reconstruction_instance(modes: usize, seed: u64) -> CliResult<(Field, Field, EllipticPhase)> {
    let grid = GridSpec::new(1, 128, 32.0 * PI)?;
    if modes == 0 || modes > grid.points() {
        return Err(CliError::config(format!("modes must lie in 1..={}", grid.points())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> CliResult<Field> {
        let mut samples = vec![Complex64::new(0.0, 0.0); grid.len()];
        let start = -(modes as i64) / 2;
        for m in start..start + modes as i64 {
            let slot = grid
                .wrapped_slot(m)
                .ok_or_else(|| CliError::config(format!("mode {m} is off the lattice")))?;
            samples[slot] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
        Ok(Field::new(grid, Representation::Frequency, samples)?)
    };
    let f = draw()?;
    let g = draw()?;
    let radius = 1.5 * (modes as f64 / 2.0 + 1.0) * grid.frequency_step();
    let ep = EllipticPhase::quadratic(vec![0.0], radius.max(1.5))?;
    Ok((f, g, ep))
}

/// Log-log slope of the restriction ratio for bumps on `[-1, -1/2]` and
/// `[1/2, 1]` under `xi^2 / 2`.
pub fn restriction_slope(p: f64) -> CliResult<f64> {
    let grid = GridSpec::new(1, 2048, 512.0)?;
    let ep = EllipticPhase::quadratic(vec![0.0], 1.2)?;
    let h1 = Field::from_frequency_fn(grid, |xi| Complex64::new(smooth_ball(xi, &[-0.75], 0.25), 0.0));
    let h2 = Field::from_frequency_fn(grid, |xi| Complex64::new(smooth_ball(xi, &[0.75], 0.25), 0.0));
    let mut records = Vec::with_capacity(RESTRICTION_LAMBDAS.len());
    for &lambda in &RESTRICTION_LAMBDAS {
        let ratio = bilinear_restriction_ratio(&h1, &h2, p, lambda, &ep, None)?;
        records.push(SweepRecord {
            lambda,
            points: grid.points(),
            half_width: grid.half_width(),
            t_samples: 0,
            numerator: ratio,
            denominator: 1.0,
            ratio,
        });
    }
    Ok(fit_loglog(&records)?.slope)
}
