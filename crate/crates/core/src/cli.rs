//! Command-line front end. Every number it prints comes from a library call.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::Value;

use crate::bounds::{complexity_measure, theorem2_interval, DecayProfile, ErrorCurveTable};
use crate::error::Error;
use crate::experiments::{comparison_report, figure1_report, make_target, reproduce, Scenario, Status, Target};
use crate::models::{coverage_depth, synthesize_lowrank, synthesize_radix, CnnSpecFile};
use crate::sequence::{parse_sequence_json, Scalar, Sequence};
use crate::svg::{LineChart, Series};
use crate::tensor::{checked_pow, Spectrum, Tensor, RANK_RTOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTATION: i32 = 2;
pub const EXIT_CONFORMANCE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "memlens", version, about = "Memory-structure analysis for linear CNN and RNN sequence models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tensorise a target and print its pooled singular spectrum and rank per depth.
    Spectrum(SpectrumArgs),
    /// Complexity measure of a target for a decay profile g.
    Measure(MeasureArgs),
    /// Lower and upper approximation bounds for explicit channel counts.
    Bounds(BoundsArgs),
    /// Upper-bound curves over M = 1..=M_max.
    Curve(CurveArgs),
    /// Build an exact CNN for a target and replay it.
    Synth(SynthArgs),
    /// RNN-vs-CNN requirement report.
    Compare(CompareArgs),
    /// Run the worked-example conformance suite.
    Reproduce(OutputArgs),
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output directory; without it the primary artifact goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output formats (comma-separated).
    #[arg(long, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Args, Debug)]
struct TargetArgs {
    /// Builtin id (rho1, rho2, rho3, exp:<gamma>, impulse:<t>) or a sequence JSON file.
    #[arg(long)]
    target: String,
    #[arg(long, default_value_t = 2)]
    l: usize,
}

#[derive(Args, Debug)]
struct GArgs {
    /// Decay family: exp, power or table.
    #[arg(long)]
    g: String,
    /// Comma-separated key=value pairs, e.g. "a=1,b=0.5" or "v0=1,v1=0.5,cutoff=4".
    #[arg(long = "g-params", default_value = "")]
    g_params: String,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long = "K", value_delimiter = ',', required = true)]
    k: Vec<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[command(flatten)]
    g: GArgs,
    /// Truncate to [0, l^K - 1] first (required for infinite-support targets).
    #[arg(long = "K")]
    k: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long = "K")]
    k: usize,
    /// Channel counts M_1..M_K (comma-separated).
    #[arg(long, value_delimiter = ',', required = true)]
    channels: Vec<usize>,
    #[command(flatten)]
    g: GArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct CurveArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long = "K", value_delimiter = ',', default_value = "4,5,6")]
    k: Vec<usize>,
    #[arg(long = "M-max", default_value_t = 64)]
    m_max: usize,
    /// Logarithmic y axis in the SVG chart.
    #[arg(long)]
    log_y: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Radix,
    Lowrank,
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long, value_enum, default_value = "radix")]
    method: Method,
    /// Depth; defaults to the smallest depth covering the support.
    #[arg(long = "K")]
    k: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ScenarioName {
    ExpDecay,
    ImpulseCopy,
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioName,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 2)]
    l: usize,
    #[arg(long = "K")]
    k: Option<usize>,
    #[command(flatten)]
    output: OutputArgs,
}

enum Failure {
    Usage(String),
    Computation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Computation(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn io_err(path: &Path, e: std::io::Error) -> Failure {
    Failure::Computation(format!("{}: {e}", path.display()))
}

/// Entry point used by the binary. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let mut args: Vec<String> = args.into_iter().map(Into::into).collect();
    if args.get(1).map(String::as_str) == Some("--config") {
        match args.get(2).ok_or_else(|| "--config needs a file".to_string()).and_then(|p| config_to_args(Path::new(p))) {
            Ok(rest) => args = std::iter::once(args[0].clone()).chain(rest).collect(),
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
        }
    }
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Computation(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_COMPUTATION
        }
    }
}

/// Turn `{"command": "curve", "target": "rho1", "K": [4, 5]}` into argv.
fn config_to_args(path: &Path) -> std::result::Result<Vec<String>, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let Value::Object(map) = v else {
        return Err("config must be a JSON object".into());
    };
    let command = map.get("command").and_then(Value::as_str).ok_or("config needs a \"command\" string")?;
    let mut argv = vec![command.to_string()];
    for (key, val) in &map {
        if key == "command" {
            continue;
        }
        let flag = format!("--{key}");
        match val {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar_text).collect();
                argv.push(flag);
                argv.push(parts.join(","));
            }
            Value::Object(obj) => {
                let parts: Vec<String> = obj.iter().map(|(k, v)| format!("{k}={}", scalar_text(v))).collect();
                argv.push(flag);
                argv.push(parts.join(","));
            }
            other => {
                argv.push(flag);
                argv.push(scalar_text(other));
            }
        }
    }
    Ok(argv)
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn load_target(spec: &str) -> CliResult<Sequence> {
    if let Ok(t) = spec.parse::<Target>() {
        return Ok(make_target(t)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        return Err(Failure::Usage(format!("{spec:?} is neither a builtin target nor an existing file")));
    }
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    Ok(parse_sequence_json(&text)?)
}

fn target_label(spec: &str) -> String {
    match spec.parse::<Target>() {
        Ok(t) => t.to_string(),
        Err(_) => Path::new(spec).file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned()),
    }
}

fn parse_g(g: &GArgs) -> CliResult<DecayProfile> {
    let params = g
        .g_params
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|kv| {
            let (k, v) = kv.split_once('=').ok_or_else(|| Failure::Usage(format!("bad --g-params entry {kv:?}")))?;
            let v = v.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("--g-params {k}: {e}")))?;
            Ok((k.trim().to_string(), v))
        })
        .collect::<CliResult<Vec<_>>>()?;
    DecayProfile::from_params(&g.g, &params).map_err(|e| Failure::Usage(e.to_string()))
}

/// Artifacts a command can emit, keyed by format.
struct Artifacts {
    stem: String,
    csv: Option<String>,
    json: String,
    svg: Option<String>,
    summary: String,
}

fn emit(a: Artifacts, opts: &OutputArgs, default: Format, out: &mut dyn Write) -> CliResult<()> {
    let formats = if opts.format.is_empty() { vec![default] } else { opts.format.clone() };
    let pick = |f: Format| -> CliResult<&str> {
        match f {
            Format::Json => Ok(&a.json),
            Format::Csv => a.csv.as_deref().ok_or_else(|| Failure::Usage(format!("{} has no CSV form", a.stem))),
            Format::Svg => a.svg.as_deref().ok_or_else(|| Failure::Usage(format!("{} has no SVG form", a.stem))),
        }
    };
    let write_out = |out: &mut dyn Write, s: &str| -> CliResult<()> {
        out.write_all(s.as_bytes()).map_err(|e| Failure::Computation(format!("stdout: {e}")))
    };
    match &opts.out {
        None => {
            let body = pick(formats[0])?;
            write_out(out, body)?;
            if !body.ends_with('\n') {
                write_out(out, "\n")?;
            }
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            write_out(out, &a.summary)?;
            for f in formats {
                let ext = match f {
                    Format::Csv => "csv",
                    Format::Json => "json",
                    Format::Svg => "svg",
                };
                let path = dir.join(format!("{}.{ext}", a.stem));
                let mut body = pick(f)?.to_string();
                if !body.ends_with('\n') {
                    body.push('\n');
                }
                fs::write(&path, body).map_err(|e| io_err(&path, e))?;
                write_out(out, &format!("wrote {}\n", path.display()))?;
            }
        }
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serialisable report")
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Spectrum(a) => cmd_spectrum(a, out),
        Command::Measure(a) => cmd_measure(a, out),
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Curve(a) => cmd_curve(a, out),
        Command::Synth(a) => cmd_synth(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Reproduce(a) => cmd_reproduce(a, out),
    }
}

#[derive(Serialize)]
struct SpectrumRecord {
    #[serde(rename = "K")]
    depth: usize,
    rank: usize,
    spectrum: Spectrum,
}

fn cmd_spectrum(a: SpectrumArgs, out: &mut dyn Write) -> CliResult<i32> {
    let rho = load_target(&a.target.target)?;
    let l = a.target.l;
    let mut records = Vec::new();
    for &k in &a.k {
        let head = rho.head(checked_pow(l, k)?);
        let mut ranks = Vec::new();
        // vector targets are tensorised channel by channel
        for c in 0..rho.dim() {
            let t = Tensor::tensorize(&head.channel(c)?, l, k)?;
            let spectrum = t.singular_values();
            ranks.push(spectrum.rank(RANK_RTOL));
            records.push((c, SpectrumRecord { depth: k, rank: spectrum.rank(RANK_RTOL), spectrum }));
        }
    }
    let mut csv = String::from("channel,K,index,value,mode\n");
    let mut summary = String::new();
    for (c, r) in &records {
        for (i, e) in r.spectrum.entries().iter().enumerate() {
            csv.push_str(&format!("{c},{},{},{},{}\n", r.depth, i + 1, e.value, e.mode));
        }
        summary.push_str(&format!("channel {c}, K={}: rank {}\n", r.depth, r.rank));
    }
    let json: Vec<_> = records.iter().map(|(c, r)| serde_json::json!({"channel": c, "record": r})).collect();
    emit(
        Artifacts { stem: "spectrum".into(), csv: Some(csv), json: to_json(&json), svg: None, summary },
        &a.output,
        Format::Csv,
        out,
    )?;
    Ok(EXIT_OK)
}

fn cmd_measure(a: MeasureArgs, out: &mut dyn Write) -> CliResult<i32> {
    let rho = load_target(&a.target.target)?;
    let g = parse_g(&a.g)?;
    let l = a.target.l;
    let (head, tail) = match a.k {
        Some(k) => {
            let n = checked_pow(l, k)?;
            (rho.head(n), rho.tail_norm(n))
        }
        None if rho.is_finite() => (rho.clone(), Scalar::ZERO),
        None => return Err(Failure::Usage("infinite-support target: pass --K to truncate".into())),
    };
    let c = complexity_measure(&head, l, &g)?;
    let record = serde_json::json!({"target": target_label(&a.target.target), "l": l, "K": a.k, "g": g, "complexity": c, "discarded_tail": tail});
    let csv = format!("target,l,complexity,discarded_tail\n{},{l},{},{}\n", target_label(&a.target.target), c.value, tail.value);
    emit(
        Artifacts { stem: "measure".into(), csv: Some(csv), json: to_json(&record), svg: None, summary: format!("complexity {c}, discarded tail {tail}\n") },
        &a.output,
        Format::Json,
        out,
    )?;
    Ok(EXIT_OK)
}

fn cmd_bounds(a: BoundsArgs, out: &mut dyn Write) -> CliResult<i32> {
    let rho = load_target(&a.target.target)?;
    let g = parse_g(&a.g)?;
    let b = theorem2_interval(&rho, a.target.l, a.k, &a.channels, &g)?;
    let csv = format!(
        "target,l,K,M,rank_budget,lower,upper\n{},{},{},{},{},{},{}\n",
        target_label(&a.target.target),
        a.target.l,
        a.k,
        b.effective_filters,
        b.rank_budget,
        b.lower.value,
        b.upper.value
    );
    let summary = format!("lower {} <= error <= upper {}\n", b.lower, b.upper);
    emit(Artifacts { stem: "bounds".into(), csv: Some(csv), json: to_json(&b), svg: None, summary }, &a.output, Format::Json, out)?;
    Ok(EXIT_OK)
}

fn curve_chart(table: &ErrorCurveTable, log_y: bool) -> String {
    LineChart {
        title: format!("upper bound, {}", table.target),
        x_label: "M".into(),
        y_label: "upper bound".into(),
        log_y,
        series: table
            .depths()
            .into_iter()
            .map(|k| Series {
                label: format!("K={k}"),
                points: table.curve(k).iter().map(|r| (r.m as f64, r.upper_bound.value)).collect(),
            })
            .collect(),
    }
    .render()
}

fn cmd_curve(a: CurveArgs, out: &mut dyn Write) -> CliResult<i32> {
    let rho = load_target(&a.target.target)?;
    let label = target_label(&a.target.target);
    let table = crate::bounds::error_curve(&rho, &label, a.target.l, &a.k, a.m_max)?;
    let summary = table
        .depths()
        .into_iter()
        .map(|k| {
            let c = table.curve(k);
            format!("K={k}: upper {} at M=1, {} at M={}\n", c[0].upper_bound, c[c.len() - 1].upper_bound, a.m_max)
        })
        .collect();
    emit(
        Artifacts {
            stem: format!("curve_{}", label.replace([':', '/'], "_")),
            csv: Some(table.to_csv()),
            json: to_json(&table),
            svg: Some(curve_chart(&table, a.log_y)),
            summary,
        },
        &a.output,
        Format::Csv,
        out,
    )?;
    Ok(EXIT_OK)
}

fn cmd_synth(a: SynthArgs, out: &mut dyn Write) -> CliResult<i32> {
    let rho = load_target(&a.target.target)?;
    let l = a.target.l;
    let rho = match (a.k, rho.is_finite()) {
        (Some(k), _) => rho.head(checked_pow(l, k)?),
        (None, true) => rho,
        (None, false) => return Err(Failure::Usage("infinite-support target: pass --K to truncate".into())),
    };
    let spec = match a.method {
        Method::Radix => synthesize_radix(&rho, l)?,
        Method::Lowrank => {
            let k = a.k.unwrap_or_else(|| rho.radius().map_or(1, |r| coverage_depth(r, l)));
            synthesize_lowrank(&rho, l, k)?
        }
    };
    let rep = spec.representation();
    let n = spec.receptive_field().max(rho.span());
    let residual = (0..n).map(|t| (rep.at(t) - rho.at(t)).powi(2)).sum::<f64>().sqrt();
    let record = serde_json::json!({
        "spec": CnnSpecFile::from(&spec),
        "filters": spec.filter_count(),
        "residual": residual,
    });
    let summary = format!(
        "depth {}, channels {:?}, {} filters, replay residual {residual:e}\n",
        spec.depth(),
        spec.channels(),
        spec.filter_count()
    );
    emit(Artifacts { stem: "synth".into(), csv: None, json: to_json(&record), svg: None, summary }, &a.output, Format::Json, out)?;
    Ok(EXIT_OK)
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> CliResult<i32> {
    let scenario = match a.scenario {
        ScenarioName::ExpDecay => Scenario::ExpDecay {
            gamma: a.gamma.ok_or_else(|| Failure::Usage("exp-decay needs --gamma".into()))?,
            eps: a.eps,
            l: a.l,
        },
        ScenarioName::ImpulseCopy => Scenario::ImpulseCopy {
            depth: a.k.ok_or_else(|| Failure::Usage("impulse-copy needs --K".into()))?,
            eps: a.eps,
            l: a.l,
        },
    };
    let r = comparison_report(scenario)?;
    let csv = format!(
        "scenario,cnn_depth,cnn_filters,rnn_width\n{},{},{},{}\n",
        r.scenario, r.cnn.depth, r.cnn.filters, r.rnn.width
    );
    let summary = format!("{}\n", r.verdict);
    emit(Artifacts { stem: "compare".into(), csv: Some(csv), json: to_json(&r), svg: None, summary }, &a.output, Format::Json, out)?;
    Ok(EXIT_OK)
}

fn cmd_reproduce(a: OutputArgs, out: &mut dyn Write) -> CliResult<i32> {
    let notes = reproduce()?;
    let text: String = notes.iter().map(|n| format!("{n}\n")).collect();
    let failed = notes.iter().any(|n| n.status == Status::Fail);
    if let Some(dir) = &a.out {
        let fig = figure1_report(2, &[4, 5, 6], 64)?;
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        for t in &fig.tables {
            let p = dir.join(format!("figure1_{}.csv", t.target));
            fs::write(&p, t.to_csv()).map_err(|e| io_err(&p, e))?;
            let p = dir.join(format!("figure1_{}.svg", t.target));
            fs::write(&p, curve_chart(t, true)).map_err(|e| io_err(&p, e))?;
        }
        let p = dir.join("figure1.json");
        fs::write(&p, to_json(&fig)).map_err(|e| io_err(&p, e))?;
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for n in &notes {
        *counts.entry(n.status.to_string()).or_default() += 1;
    }
    let tally: Vec<String> = counts.iter().map(|(k, v)| format!("{k} {v}")).collect();
    let body = if a.format.contains(&Format::Json) { to_json(&notes) + "\n" } else { format!("{text}{}\n", tally.join(", ")) };
    out.write_all(body.as_bytes()).map_err(|e| Failure::Computation(format!("stdout: {e}")))?;
    if let Some(dir) = &a.out {
        let p = dir.join("reproduce.json");
        fs::write(&p, to_json(&notes)).map_err(|e| io_err(&p, e))?;
        let p = dir.join("reproduce.txt");
        fs::write(&p, &text).map_err(|e| io_err(&p, e))?;
    }
    Ok(if failed { EXIT_CONFORMANCE } else { EXIT_OK })
}
