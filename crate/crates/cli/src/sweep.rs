use std::path::{Path, PathBuf};

use clap::Args;
use dispersive_core::extremizers::{Family, DECIMATED_POINTS, DEFAULT_EPSILON};
use dispersive_core::harness::{
    fit_loglog, measure, verify_airy_measured, verify_maximal_measured, verify_sharpness_measured, with_workers,
    Denominator, FitResult, Flow, SweepConfig, SweepNorm, SweepRecord, TimePolicy, DEFAULT_TOLERANCE,
    DEFAULT_UNIFORM_SAMPLES,
};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::config::{CliError, CliResult, Layer, EXIT_FAIL, EXIT_PASS};
use crate::output::{self, num, Format, RunConfig};

/// Fewest lambda values for which a slope verdict is evaluated.
const MIN_VERDICT_POINTS: usize = 4;

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// f-lambda (smoothing) or g-lambda (maximal).
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Comma-separated, increasing.
    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    /// mixed-spacetime or maximal.
    #[arg(long)]
    norm: Option<String>,
    /// Uniform time samples on [0, 1].
    #[arg(long)]
    uniform: Option<usize>,
    /// Refine the time grid near t = 1.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    focusing: Option<bool>,
    /// fractional or airy.
    #[arg(long)]
    flow: Option<String>,
    /// weighted or sobolev.
    #[arg(long)]
    denominator: Option<String>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    max_points: Option<usize>,
    #[arg(long)]
    tolerance: Option<f64>,
    /// Override the predicted slope, as `slope=X`.
    #[arg(long, allow_hyphen_values = true)]
    expect: Option<String>,
    /// Table destination; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Also write a gnuplot script next to the table.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    plot: Option<bool>,
}

/// Parses `snake_case` or `kebab-case` enum names through serde.
fn parse_enum<T: DeserializeOwned>(what: &str, s: &str) -> CliResult<T> {
    serde_json::from_value(Value::String(s.replace('-', "_")))
        .map_err(|_| CliError::config(format!("unknown {what} {s:?}")))
}

fn parse_expect(s: &str) -> CliResult<f64> {
    s.strip_prefix("slope=")
        .and_then(|v| v.trim().parse::<f64>().ok())
        .filter(|v| v.is_finite())
        .ok_or_else(|| CliError::config(format!("--expect must look like slope=X, got {s:?}")))
}

struct Outcome {
    fit: Option<FitResult>,
    expected: Option<f64>,
    tolerance: f64,
    /// `None` when no verdict was evaluated.
    pass: Option<bool>,
    note: String,
}

pub fn run(args: SweepArgs, mut layer: Layer) -> CliResult<i32> {
    let family_name: String = layer
        .pick("family", args.family, Some("smoothing_f_lambda".into()))?
        .unwrap_or_default();
    let family: Family = family_name.parse()?;
    let alpha = layer.require("alpha", args.alpha)?;
    let d = layer.pick("d", args.d, Some(1))?.unwrap_or(1);
    let p = layer.require("p", args.p)?;
    let beta = layer.require("beta", args.beta)?;
    let lambdas: Vec<f64> = layer.require("lambdas", args.lambdas)?;
    let mut cfg = match family {
        Family::SmoothingFLambda => SweepConfig::smoothing(alpha, d, p, beta, lambdas),
        Family::MaximalGLambda => SweepConfig::maximal(alpha, d, p, beta, lambdas),
    };
    let norm: String = layer
        .pick("norm", args.norm, Some(enum_name(&cfg.norm)))?
        .unwrap_or_default();
    cfg.norm = parse_enum::<SweepNorm>("norm", &norm)?;
    cfg.time = TimePolicy {
        uniform: layer
            .pick("uniform", args.uniform, Some(DEFAULT_UNIFORM_SAMPLES))?
            .unwrap_or(DEFAULT_UNIFORM_SAMPLES),
        focusing: layer
            .pick("focusing", args.focusing, Some(cfg.time.focusing))?
            .unwrap_or(cfg.time.focusing),
    };
    let flow: String = layer.pick("flow", args.flow, Some(enum_name(&cfg.flow)))?.unwrap_or_default();
    cfg.flow = parse_enum::<Flow>("flow", &flow)?;
    let denominator: String = layer
        .pick("denominator", args.denominator, Some(enum_name(&cfg.denominator)))?
        .unwrap_or_default();
    cfg.denominator = parse_enum::<Denominator>("denominator", &denominator)?;
    cfg.epsilon = layer
        .pick("epsilon", args.epsilon, Some(DEFAULT_EPSILON))?
        .unwrap_or(DEFAULT_EPSILON);
    cfg.max_points = layer
        .pick("max_points", args.max_points, Some(DECIMATED_POINTS))?
        .unwrap_or(DECIMATED_POINTS);
    let tolerance = layer
        .pick("tolerance", args.tolerance, Some(DEFAULT_TOLERANCE))?
        .unwrap_or(DEFAULT_TOLERANCE);
    let expect = match layer.pick::<String>("expect", args.expect, None)? {
        Some(s) => Some(parse_expect(&s)?),
        None => None,
    };
    let out_path = layer.pick("output", args.output, None)?;
    let format = layer.pick("format", args.format, Some(Format::Csv))?.unwrap_or(Format::Csv);
    let plot = layer.pick("plot", args.plot, Some(false))?.unwrap_or(false);
    if !(tolerance.is_finite() && tolerance > 0.0) {
        return Err(CliError::config(format!("tolerance must be positive, got {tolerance}")));
    }
    if plot && (out_path.is_none() || format != Format::Csv) {
        return Err(CliError::config("--plot needs --output and csv format"));
    }
    let evaluate = cfg.lambdas.len() >= MIN_VERDICT_POINTS;
    cfg.validate(evaluate)?;

    let run = RunConfig {
        command: "sweep".into(),
        params: layer.finish()?,
        output: out_path.clone(),
        format,
        plot,
    };
    run.echo();

    let m = with_workers(|| measure(&cfg))?;
    let records = m.records(beta)?;
    let outcome = if !evaluate {
        Outcome {
            fit: fit_loglog(&records).ok(),
            expected: None,
            tolerance,
            pass: None,
            note: format!("not evaluated: fewer than {MIN_VERDICT_POINTS} lambda values"),
        }
    } else if let Some(x) = expect {
        let fit = fit_loglog(&records)?;
        Outcome {
            fit: Some(fit),
            expected: Some(x),
            tolerance,
            pass: Some((fit.slope - x).abs() <= tolerance),
            note: "two-sided: expected slope from --expect".into(),
        }
    } else {
        let (v, note) = if cfg.flow == Flow::Airy {
            (verify_airy_measured(&m, beta, tolerance)?, "two-sided: airy")
        } else if cfg.norm == SweepNorm::Maximal {
            (verify_maximal_measured(&m, beta, tolerance)?, "one-sided: maximal necessary condition")
        } else {
            (verify_sharpness_measured(&m, beta, tolerance)?, "two-sided: smoothing sharpness")
        };
        Outcome {
            fit: Some(v.fit),
            expected: Some(v.expected),
            tolerance,
            pass: Some(v.pass),
            note: note.into(),
        }
    };

    let text = match format {
        Format::Csv => csv(&run, &records, &outcome),
        Format::Json => json_doc(&run, &records, &outcome),
    };
    let mut out = output::open(out_path.as_deref())?;
    output::write_all(&mut *out, &text)?;
    if plot {
        if let Some(p) = &out_path {
            write_plot(p, &outcome)?;
        }
    }
    if let Some(f) = &outcome.fit {
        eprintln!("# slope {}", num(f.slope));
    }
    Ok(match outcome.pass {
        Some(false) => EXIT_FAIL,
        _ => EXIT_PASS,
    })
}

fn enum_name<T: serde::Serialize>(v: &T) -> String {
    match serde_json::to_value(v) {
        Ok(Value::String(s)) => s,
        _ => String::new(),
    }
}

fn verdict_word(pass: Option<bool>) -> &'static str {
    match pass {
        Some(true) => "pass",
        Some(false) => "fail",
        None => "not_evaluated",
    }
}

fn csv(run: &RunConfig, records: &[SweepRecord], o: &Outcome) -> String {
    let mut s = run.csv_header();
    s.push_str("lambda,N,L,t_samples,numerator,denominator,ratio,log_lambda,log_ratio\n");
    for r in records {
        s.push_str(&output::row(&[
            num(r.lambda),
            r.points.to_string(),
            num(r.half_width),
            r.t_samples.to_string(),
            num(r.numerator),
            num(r.denominator),
            num(r.ratio),
            num(r.lambda.ln()),
            num(r.ratio.ln()),
        ]));
    }
    if let Some(f) = &o.fit {
        s.push_str(&format!("# slope,{}\n", num(f.slope)));
        s.push_str(&format!("# intercept,{}\n", num(f.intercept)));
        s.push_str(&format!("# max_residual,{}\n", num(f.max_residual)));
    }
    if let Some(e) = o.expected {
        s.push_str(&format!("# expected,{}\n", num(e)));
    }
    s.push_str(&format!("# tolerance,{}\n", num(o.tolerance)));
    s.push_str(&format!("# rule,{}\n", o.note));
    s.push_str(&format!("# verdict,{}\n", verdict_word(o.pass)));
    s
}

fn json_doc(run: &RunConfig, records: &[SweepRecord], o: &Outcome) -> String {
    let rows: Vec<Value> = records
        .iter()
        .map(|r| {
            json!({
                "lambda": r.lambda,
                "N": r.points,
                "L": r.half_width,
                "t_samples": r.t_samples,
                "numerator": r.numerator,
                "denominator": r.denominator,
                "ratio": r.ratio,
                "log_lambda": r.lambda.ln(),
                "log_ratio": r.ratio.ln(),
            })
        })
        .collect();
    let verdict = json!({
        "slope": o.fit.map(|f| f.slope),
        "intercept": o.fit.map(|f| f.intercept),
        "max_residual": o.fit.map(|f| f.max_residual),
        "expected": o.expected,
        "tolerance": o.tolerance,
        "rule": o.note,
        "verdict": verdict_word(o.pass),
    });
    let doc = json!({"config": run.to_json(), "records": rows, "verdict": verdict});
    format!("{}\n", serde_json::to_string_pretty(&doc).unwrap_or_default())
}

fn write_plot(csv_path: &Path, o: &Outcome) -> CliResult<()> {
    let script = csv_path.with_extension("gp");
    let name = csv_path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut s = String::new();
    s.push_str("# gnuplot script; run from the directory holding the table\n");
    s.push_str("set datafile separator ','\n");
    s.push_str("set datafile commentschars '#'\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set logscale xy\n");
    s.push_str("set xlabel 'lambda'\n");
    s.push_str("set ylabel 'ratio'\n");
    match &o.fit {
        Some(f) => s.push_str(&format!(
            "plot '{name}' using 1:7 with linespoints title 'ratio', exp({}) * x**({}) title 'fit' with lines\n",
            num(f.intercept),
            num(f.slope)
        )),
        None => s.push_str(&format!("plot '{name}' using 1:7 with linespoints title 'ratio'\n")),
    }
    let mut out = output::open(Some(&script))?;
    output::write_all(&mut *out, &s)
}
