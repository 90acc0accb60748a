#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod output;

use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::Parser;
use serde::Serialize;
use serde_json::{json, Value};

use args::{Cli, Command, Format, Global};
use smpleak::bounds::{crossover, log_space, sweep, QuantumModel};
use smpleak::leakage::{il_worst, Registers};
use smpleak::smp::fixtures;
use smpleak::smp::{costs_with_error, make_equality, set_cell_cap, FunctionTable, SmpProtocol};
use smpleak::suite::{run_suite, SuiteConfig};
use smpleak::transforms::{parse_pipeline, run_pipeline, PipelineConfig};
use smpleak::{Error, Exec};

/// A run that completed but whose bound checks did not all hold.
#[derive(Debug)]
struct CheckFailed;

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("bound check failed")
    }
}

impl std::error::Error for CheckFailed {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<CheckFailed>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::SearchFailed { .. }) => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.downcast_ref::<CheckFailed>().is_none() {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let g = &cli.global;
    set_cell_cap(g.cell_cap);
    match &cli.command {
        Command::Bounds => cmd_bounds(g),
        Command::Crossover => cmd_crossover(g),
        Command::Simulate {
            protocol,
            function,
            prior,
        } => cmd_simulate(g, protocol, function, prior.as_deref()),
        Command::Transform {
            protocol,
            function,
            pipeline,
            restarts,
            stream_cap,
            report,
        } => cmd_transform(
            g,
            protocol,
            function,
            pipeline,
            *restarts,
            *stream_cap,
            report.as_deref(),
        ),
        Command::Verify {
            count,
            protocols,
            no_compress,
        } => cmd_verify(g, *count, protocols, *no_compress),
        Command::Fixture { name } => emit(g, &fixture(name)?.to_json()),
    }
}

fn emit(g: &Global, text: &str) -> Result<()> {
    write_to(g.out.as_deref(), text)
}

fn write_to(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn model(g: &Global) -> Result<QuantumModel> {
    let m = QuantumModel {
        mu: g.mu,
        scale: g.qil_scale,
        ..QuantumModel::default()
    };
    m.validate()?;
    Ok(m)
}

fn check_range(g: &Global) -> Result<()> {
    if !(0.0..0.5).contains(&g.epsilon) {
        bail!(Error::Domain(format!(
            "--epsilon must lie in [0, 1/2), got {}",
            g.epsilon
        )));
    }
    if g.steps == 0 || !(g.n_min >= 1.0) || !(g.n_max >= g.n_min) {
        bail!(Error::Domain(format!(
            "empty sweep: n from {} to {} in {} steps",
            g.n_min, g.n_max, g.steps
        )));
    }
    Ok(())
}

fn cmd_bounds(g: &Global) -> Result<()> {
    check_range(g)?;
    let m = model(g)?;
    let ns: Vec<f64> = log_space(g.n_min, g.n_max, g.steps)?
        .into_iter()
        .map(f64::round)
        .collect();
    let curve = sweep(g.epsilon, &ns, &m, Exec::default())?;
    let text = match g.format {
        Format::Csv => output::csv(&curve),
        Format::Json => pretty(&curve),
        Format::Svg => output::svg(&curve),
    };
    emit(g, &text)
}

fn cmd_crossover(g: &Global) -> Result<()> {
    check_range(g)?;
    let m = model(g)?;
    let c = crossover(&m, g.epsilon, g.n_min, g.n_max, g.steps, Exec::default())?;
    let v = match c.crossover_n {
        Some(_) => serde_json::to_value(c)?,
        None => json!({ "crossover_n": null }),
    };
    emit(g, &pretty(&v))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn load_protocol(path: &Path) -> Result<SmpProtocol> {
    let text = read(path)?;
    SmpProtocol::from_json(&text).with_context(|| format!("loading {}", path.display()))
}

fn function(spec: &str) -> Result<FunctionTable> {
    if let Some(n) = spec.strip_prefix("eq:") {
        let n: u32 = n.trim().parse().with_context(|| format!("`{spec}`: bad bit count"))?;
        return Ok(make_equality(n)?);
    }
    FunctionTable::from_json(&read(Path::new(spec))?).with_context(|| format!("loading function table {spec}"))
}

fn load_prior(path: &Path, p: &SmpProtocol) -> Result<Vec<f64>> {
    let v: Value = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let probs = match &v {
        Value::Object(m) => m.get("probs").cloned().unwrap_or(Value::Null),
        other => other.clone(),
    };
    let probs: Vec<f64> =
        serde_json::from_value(probs).context("prior must be an array of numbers or {\"probs\": [...]}")?;
    smpleak::leakage::prior(p, probs.clone())?;
    Ok(probs)
}

fn cmd_simulate(g: &Global, path: &Path, spec: &str, prior: Option<&Path>) -> Result<()> {
    let p = load_protocol(path)?;
    let f = function(spec)?;
    let costs = costs_with_error(&p, &f)?;
    let mut report = json!({
        "model": p.model,
        "worst_error": costs.worst_error,
        "costs": costs,
    });
    let leak = if p.has_stages() {
        None
    } else {
        Some((il_worst(&p)?, Registers::new(&p)?))
    };
    match leak {
        Some((worst, regs)) => {
            let n = p.x.len() * p.y.len();
            let mu = match prior {
                Some(path) => load_prior(path, &p)?,
                None => vec![1.0 / n as f64; n],
            };
            let forms = regs.forms(&mu)?;
            report["leakage"] = serde_json::to_value(&worst)?;
            report["identity_residual"] = json!(forms.residual());
            report["identity_prior"] = json!(if prior.is_some() { "given" } else { "uniform" });
            if prior.is_some() {
                report["distributional"] = serde_json::to_value(forms)?;
            }
        }
        None => {
            report["leakage"] = Value::Null;
            report["leakage_note"] = json!("leakage registers of transformed sides are not enumerated");
        }
    }
    emit(g, &pretty(&report))
}

fn cmd_transform(
    g: &Global,
    path: &Path,
    spec: &str,
    pipeline: &str,
    restarts: usize,
    cap: u32,
    report_path: Option<&Path>,
) -> Result<()> {
    let text = read(path)?;
    let p = SmpProtocol::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
    let f = function(spec)?;
    let stages = parse_pipeline(pipeline)?;
    let cfg = PipelineConfig {
        seed: g.seed,
        restarts,
        cap,
    };
    let (q, report) = run_pipeline(&p, &f, &stages, &cfg)?;
    // the empty pipeline hands back the input untouched
    let out = if stages.is_empty() { text } else { q.to_json() };
    emit(g, &out)?;
    let rendered = pretty(&report);
    match report_path {
        Some(rp) => write_to(Some(rp), &rendered)?,
        None => eprint!("{rendered}"),
    }
    if !report.pass {
        bail!(CheckFailed);
    }
    Ok(())
}

fn cmd_verify(g: &Global, count: usize, protocols: &[std::path::PathBuf], no_compress: bool) -> Result<()> {
    if !protocols.is_empty() {
        let mut checked = Vec::new();
        for path in protocols {
            let p = load_protocol(path)?;
            checked.push(json!({ "file": path.display().to_string(), "model": p.model, "valid": true }));
        }
        return emit(g, &pretty(&json!({ "protocols": checked, "pass": true })));
    }
    if count == 0 {
        bail!(Error::Domain("--count must be at least 1".into()));
    }
    let mut cfg = SuiteConfig::new(g.seed, count);
    cfg.compress = !no_compress;
    let report = run_suite(&cfg, Exec::default())?;
    emit(g, &pretty(&report))?;
    if !report.pass {
        bail!(CheckFailed);
    }
    Ok(())
}

fn numbers<T: std::str::FromStr>(args: &str, want: usize, name: &str) -> Result<Vec<T>> {
    let v: Vec<T> = args
        .split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow::anyhow!(Error::Domain(format!("fixture `{name}`: bad arguments `{args}`"))))?;
    if v.len() != want {
        bail!(Error::Domain(format!("fixture `{name}` takes {want} arguments")));
    }
    Ok(v)
}

fn hash_args(args: &str, name: &str, max: u32) -> Result<(u32, u32)> {
    let v = numbers::<u32>(args, 2, name)?;
    let (n, k) = (v[0], v[1]);
    if n == 0 || k == 0 || n * k > max {
        bail!(Error::Domain(format!(
            "fixture `{name}` needs n, k ≥ 1 and n·k ≤ {max}"
        )));
    }
    Ok((n, k))
}

fn fixture(spec: &str) -> Result<SmpProtocol> {
    let (name, args) = spec.split_once(':').unwrap_or((spec, ""));
    Ok(match name {
        "verbatim" => fixtures::verbatim(&make_equality(numbers(args, 1, name)?[0])?),
        "constant" => fixtures::constant_messages(&make_equality(numbers(args, 1, name)?[0])?),
        "shared-hash" => {
            let (n, k) = hash_args(args, name, 20)?;
            fixtures::shared_hash_equality(n, k)
        }
        "private-hash" => {
            let (n, k) = hash_args(args, name, 12)?;
            fixtures::private_hash_equality(n, k)
        }
        "two-length" => {
            let v = numbers::<f64>(args, 3, name)?;
            if v[1].fract() != 0.0 || v[1] < 1.0 {
                bail!(Error::Domain(
                    "two-length: the long length must be a positive integer".into()
                ));
            }
            fixtures::two_length_equality(v[0], v[1] as u32, v[2])?
        }
        "uniform-bit" => fixtures::uniform_bit_alice(),
        _ => bail!(Error::Domain(format!("unknown fixture `{spec}`"))),
    })
}
