use clap::Args;
use dispersive_core::norms::{
    admissibility_threshold, airy_exponent, maximal_exponent, maximal_necessary_exponent, smoothing_exponent,
    ExponentQuery,
};
use serde_json::{json, Value};

use crate::config::{CliResult, Layer, EXIT_PASS};
use crate::output::{self, num, Format, RunConfig};

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    output: Option<std::path::PathBuf>,
}

pub fn run(args: ExponentsArgs, mut layer: Layer) -> CliResult<i32> {
    let alpha = layer.require("alpha", args.alpha)?;
    let d = layer.pick("d", args.d, Some(1))?.unwrap_or(1);
    let p = layer.require("p", args.p)?;
    let format = layer.pick("format", args.format, Some(Format::Csv))?.unwrap_or(Format::Csv);
    let out_path = layer.pick("output", args.output, None)?;
    let q = ExponentQuery::new(alpha, d, p)?;
    let cfg = RunConfig {
        command: "exponents".into(),
        params: layer.finish()?,
        output: out_path.clone(),
        format,
        plot: false,
    };
    cfg.echo();
    let rows: Vec<(&str, f64)> = vec![
        ("smoothing", smoothing_exponent(&q)),
        ("maximal", maximal_exponent(&q)),
        ("maximal_necessary", maximal_necessary_exponent(&q)),
        ("airy", airy_exponent(p)),
        ("admissibility_threshold", admissibility_threshold(d)),
    ];
    let text = match format {
        Format::Csv => {
            let mut s = cfg.csv_header();
            s.push_str("quantity,value\n");
            for (k, v) in &rows {
                s.push_str(&output::row(&[k.to_string(), num(*v)]));
            }
            s.push_str(&format!("admissible,{}\n", q.is_admissible()));
            s
        }
        Format::Json => {
            let mut m = serde_json::Map::new();
            for (k, v) in &rows {
                m.insert(k.to_string(), json!(v));
            }
            m.insert("admissible".into(), json!(q.is_admissible()));
            let doc = json!({ "config": cfg.to_json(), "exponents": Value::Object(m) });
            format!("{}\n", serde_json::to_string_pretty(&doc).unwrap_or_default())
        }
    };
    let mut out = output::open(out_path.as_deref())?;
    output::write_all(&mut *out, &text)?;
    Ok(EXIT_PASS)
}
