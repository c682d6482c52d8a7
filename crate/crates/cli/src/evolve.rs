use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use dispersive_core::extremizers::{
    make_maximal_extremizer, make_smoothing_extremizer, ExtremizerSpec, Family, DEFAULT_EPSILON,
};
use dispersive_core::norms::lp_norm;
use dispersive_core::propagator::evolve;
use dispersive_core::spectral::io::write_field;
use dispersive_core::{DispersionParams, Field, GridSpec};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{CliError, CliResult, Layer, EXIT_PASS};
use crate::output::{self, num, Format, RunConfig};

const DEFAULT_POINTS: usize = 256;
const DEFAULT_HALF_WIDTH: f64 = 8.0 * PI;
const DEFAULT_LAMBDA: f64 = 16.0;
/// Plane-wave frequencies must sit this close to a lattice point.
const LATTICE_SLACK: f64 = 1e-9;

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    /// gaussian, plane-wave, f-lambda or g-lambda.
    #[arg(long)]
    datum: Option<String>,
    /// Comma-separated evolution times.
    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',', allow_hyphen_values = true)]
    t: Option<Vec<f64>>,
    #[arg(long)]
    points: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    half_width: Option<f64>,
    /// Plane-wave frequency; one value per axis, or one value for the first axis.
    #[arg(long, action = clap::ArgAction::Set, value_delimiter = ',', allow_hyphen_values = true)]
    xi0: Option<Vec<f64>>,
    /// Gaussian standard deviation.
    #[arg(long)]
    width: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Directory receiving the dumps and the manifest.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Manifest format.
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Datum {
    Gaussian,
    PlaneWave,
    FLambda,
    GLambda,
}

impl Datum {
    fn parse(s: &str) -> CliResult<Self> {
        match s.replace('_', "-").as_str() {
            "gaussian" => Ok(Datum::Gaussian),
            "plane-wave" => Ok(Datum::PlaneWave),
            "f-lambda" | "smoothing-f-lambda" => Ok(Datum::FLambda),
            "g-lambda" | "maximal-g-lambda" => Ok(Datum::GLambda),
            _ => Err(CliError::config(format!(
                "unknown datum {s:?}; expected gaussian, plane-wave, f-lambda or g-lambda"
            ))),
        }
    }
}

pub fn run(args: EvolveArgs, mut layer: Layer) -> CliResult<i32> {
    let alpha = layer.pick("alpha", args.alpha, Some(2.0))?.unwrap_or(2.0);
    let d = layer.pick("d", args.d, Some(1))?.unwrap_or(1);
    let datum_name: String = layer.require("datum", args.datum)?;
    let datum = Datum::parse(&datum_name)?;
    let times = layer.pick("t", args.t, Some(vec![0.0]))?.unwrap_or_default();
    let points: Option<usize> = layer.pick("points", args.points, None)?;
    let half_width: Option<f64> = layer.pick("half_width", args.half_width, None)?;
    let format = layer.pick("format", args.format, Some(Format::Csv))?.unwrap_or(Format::Csv);
    let out_dir = layer
        .pick("output", args.output, Some(PathBuf::from("evolve-out")))?
        .unwrap_or_default();
    let params = DispersionParams::new(alpha, d)?;
    if times.is_empty() || times.iter().any(|t| !t.is_finite()) {
        return Err(CliError::config("--t needs finite times"));
    }

    let field = match datum {
        Datum::Gaussian | Datum::PlaneWave => {
            let points = points.unwrap_or(DEFAULT_POINTS);
            let half_width = half_width.unwrap_or(DEFAULT_HALF_WIDTH);
            layer.record("points", points);
            layer.record("half_width", half_width);
            let grid = GridSpec::new(d, points, half_width)?;
            if datum == Datum::Gaussian {
                let width = layer.pick("width", args.width, Some(1.0))?.unwrap_or(1.0);
                if !(width.is_finite() && width > 0.0) {
                    return Err(CliError::config(format!("width must be positive, got {width}")));
                }
                Field::from_physical_fn(grid, |x| {
                    let r2: f64 = x.iter().map(|v| v * v).sum();
                    Complex64::new((-r2 / (2.0 * width * width)).exp(), 0.0)
                })
            } else {
                let xi0 = layer.pick("xi0", args.xi0, Some(vec![1.0]))?.unwrap_or_default();
                let xi0 = lattice_frequency(&grid, &xi0)?;
                Field::from_physical_fn(grid, |x| {
                    Complex64::from_polar(1.0, x.iter().zip(&xi0).map(|(a, b)| a * b).sum())
                })
            }
        }
        Datum::FLambda | Datum::GLambda => {
            let lambda = layer.pick("lambda", args.lambda, Some(DEFAULT_LAMBDA))?.unwrap_or(DEFAULT_LAMBDA);
            let epsilon = layer
                .pick("epsilon", args.epsilon, Some(DEFAULT_EPSILON))?
                .unwrap_or(DEFAULT_EPSILON);
            let family = if datum == Datum::FLambda {
                Family::SmoothingFLambda
            } else {
                Family::MaximalGLambda
            };
            let spec = match (points, half_width) {
                (Some(n), Some(l)) => ExtremizerSpec::new(family, lambda, params, GridSpec::new(d, n, l)?)?,
                (None, None) => ExtremizerSpec::sized(family, lambda, params, epsilon)?,
                _ => return Err(CliError::config("give both --points and --half-width, or neither")),
            };
            layer.record("points", spec.grid.points());
            layer.record("half_width", spec.grid.half_width());
            match family {
                Family::SmoothingFLambda => make_smoothing_extremizer(&spec)?,
                Family::MaximalGLambda => make_maximal_extremizer(&spec, epsilon)?,
            }
            .to_physical()?
        }
    };

    let cfg = RunConfig {
        command: "evolve".into(),
        params: layer.finish()?,
        output: Some(out_dir.clone()),
        format,
        plot: false,
    };
    cfg.echo();
    std::fs::create_dir_all(&out_dir).map_err(|e| output::io_error(&out_dir, e))?;
    dump(&field, &out_dir.join("datum.fld"))?;

    let mut rows = Vec::with_capacity(times.len());
    for (i, &t) in times.iter().enumerate() {
        let frame = evolve(&field, t, &params)?.to_physical()?;
        if frame.samples().iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(CliError::numeric(format!("non-finite samples in frame at t = {t}")));
        }
        let file = format!("frame_{i:04}.fld");
        dump(&frame, &out_dir.join(&file))?;
        rows.push((i, t, lp_norm(&frame, 2.0)?, frame.max_abs(), file));
    }

    let (name, text) = match format {
        Format::Csv => {
            let mut s = cfg.csv_header();
            s.push_str("index,t,l2_norm,max_abs,file\n");
            for (i, t, l2, m, file) in &rows {
                s.push_str(&output::row(&[i.to_string(), num(*t), num(*l2), num(*m), file.clone()]));
            }
            ("manifest.csv", s)
        }
        Format::Json => {
            let frames: Vec<_> = rows
                .iter()
                .map(|(i, t, l2, m, file)| json!({"index": i, "t": t, "l2_norm": l2, "max_abs": m, "file": file}))
                .collect();
            let doc = json!({"config": cfg.to_json(), "datum": "datum.fld", "frames": frames});
            ("manifest.json", format!("{}\n", serde_json::to_string_pretty(&doc).unwrap_or_default()))
        }
    };
    let path = out_dir.join(name);
    let mut out = output::open(Some(&path))?;
    output::write_all(&mut *out, &text)?;
    Ok(EXIT_PASS)
}

fn dump(field: &Field, path: &std::path::Path) -> CliResult<()> {
    let mut out = output::open(Some(path))?;
    write_field(field, &mut out)?;
    out.flush().map_err(|e| output::io_error(path, e))
}

/// Expands `xi0` to a full vector and insists it lies on the lattice, so the
/// plane wave is periodic on the box.
fn lattice_frequency(grid: &GridSpec, xi0: &[f64]) -> CliResult<Vec<f64>> {
    let d = grid.dim();
    let full = match xi0.len() {
        n if n == d => xi0.to_vec(),
        1 => {
            let mut v = vec![0.0; d];
            v[0] = xi0[0];
            v
        }
        n => return Err(CliError::config(format!("--xi0 has {n} components, expected 1 or {d}"))),
    };
    let step = grid.frequency_step();
    for &x in &full {
        let m = x / step;
        if !x.is_finite() || (m - m.round()).abs() > LATTICE_SLACK {
            return Err(CliError::config(format!(
                "xi0 = {x} is not a multiple of the lattice step {step}"
            )));
        }
        if x.abs() * 4.0 > grid.nyquist() {
            return Err(CliError::config(format!(
                "xi0 = {x} is not resolved; Nyquist is {}",
                grid.nyquist()
            )));
        }
    }
    Ok(full)
}
