use clap::{Args, Parser, Subcommand, ValueEnum};
use dunkl_core::certify::{certify, evaluate_point, CertifyReport, GridPoint, Kernel, OutputFormat, Range, SweepConfig};
use dunkl_core::par::Execution;
use dunkl_core::selftest::{run_selftest, SelfTestOptions};
use dunkl_core::Error;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;

#[derive(Parser)]
#[command(name = "dunkl", version, about = "Evaluate and certify W-invariant Dunkl kernels of type A")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one kernel at one point
    Eval(EvalArgs),
    /// Sweep exact/envelope ratios over a grid
    Certify(CertifyArgs),
    /// Run one of the integral-inequality checks
    Lemma(LemmaArgs),
    /// Fast invariant suite
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum PointKernel {
    Spherical,
    Heat,
    Newton,
    Stable,
}

#[derive(Args)]
struct SystemArgs {
    /// Rank of A_n
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Ambient dimension (default n + 1)
    #[arg(long)]
    dim: Option<usize>,
    /// Realize A_n on the trace-zero hyperplane
    #[arg(long)]
    trace_zero: bool,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(value_enum)]
    kernel: PointKernel,
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long, default_value_t = 1.0)]
    k: f64,
    #[arg(long, value_parser = parse_vec, allow_hyphen_values = true)]
    lambda: Option<Coords>,
    #[arg(long = "X", value_parser = parse_vec, allow_hyphen_values = true)]
    x: Coords,
    #[arg(long = "Y", value_parser = parse_vec, allow_hyphen_values = true)]
    y: Option<Coords>,
    #[arg(long)]
    t: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Refine the top-level rules to report an error indicator
    #[arg(long)]
    error_estimate: bool,
}

#[derive(Args)]
struct OutputArgs {
    /// Report file; without it the report goes to stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Worker threads (1 runs sequentially)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct CertifyArgs {
    /// JSON sweep configuration; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// spherical, heat, newton, stable or lemma:<id>
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    trace_zero: bool,
    /// Comma-separated multiplicities
    #[arg(long, value_parser = parse_vec)]
    k: Option<Coords>,
    /// Comma-separated stability indices
    #[arg(long, value_parser = parse_vec)]
    s: Option<Coords>,
    /// lo:hi:count[:log]
    #[arg(long, value_parser = parse_range)]
    lambda: Option<Range>,
    #[arg(long = "x", value_parser = parse_range)]
    x: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    offset: Option<Range>,
    #[arg(long, value_parser = parse_range)]
    t: Option<Range>,
    #[arg(long)]
    shapes: Option<usize>,
    #[arg(long)]
    threshold: Option<f64>,
    #[arg(long)]
    slope_limit: Option<f64>,
    #[arg(long)]
    top_nodes: Option<usize>,
    #[arg(long)]
    inner_nodes: Option<usize>,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args)]
struct LemmaArgs {
    /// lemma_A, lemma_ai, lemma_a1, lemma_a2, prop_truncated or prop_In
    id: String,
    #[arg(long, value_parser = parse_vec)]
    k: Option<Coords>,
    /// Rank for the proposition checks
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[command(flatten)]
    out: OutputArgs,
}

/// Comma-separated numbers taken as a single argument.
#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

fn parse_vec(s: &str) -> Result<Coords, String> {
    let v: Result<Vec<f64>, _> = s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(Coords(v)),
        _ => Err(format!("expected comma-separated finite numbers, got '{s}'")),
    }
}

fn parse_range(s: &str) -> Result<Range, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || format!("expected lo:hi:count[:log], got '{s}'");
    if parts.len() < 3 || parts.len() > 4 || (parts.len() == 4 && parts[3] != "log") {
        return Err(bad());
    }
    let lo = parts[0].parse::<f64>().map_err(|_| bad())?;
    let hi = parts[1].parse::<f64>().map_err(|_| bad())?;
    let count = parts[2].parse::<usize>().map_err(|_| bad())?;
    Ok(Range { lo, hi, count, log: parts.len() == 4 })
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    match e {
        Error::BudgetExceeded { .. } => ExitCode::from(EXIT_BUDGET),
        _ => ExitCode::from(EXIT_USAGE),
    }
}

fn eval(a: EvalArgs) -> Result<ExitCode, Error> {
    let kernel = match a.kernel {
        PointKernel::Spherical => Kernel::Spherical,
        PointKernel::Heat => Kernel::Heat,
        PointKernel::Newton => Kernel::Newton,
        PointKernel::Stable => Kernel::Stable,
    };
    let mut cfg = SweepConfig::for_kernel(kernel, a.system.n);
    cfg.dim = a.system.dim;
    cfg.trace_zero = a.system.trace_zero;
    let rs = cfg.root_system(a.k)?;
    let need = |v: Option<Coords>, name: &str| v.map(|c| c.0).ok_or_else(|| Error::Config(format!("--{name} is required")));
    let need_f = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Config(format!("--{name} is required")));
    let p = match kernel {
        Kernel::Spherical => GridPoint { k: a.k, s: None, t: None, lambda: need(a.lambda, "lambda")?, x: a.x.0.clone(), y: vec![] },
        Kernel::Heat => GridPoint { k: a.k, s: None, t: Some(need_f(a.t, "t")?), lambda: vec![], x: a.x.0.clone(), y: need(a.y, "Y")? },
        Kernel::Newton => GridPoint { k: a.k, s: None, t: None, lambda: vec![], x: a.x.0.clone(), y: need(a.y, "Y")? },
        _ => GridPoint {
            k: a.k,
            s: Some(need_f(a.s, "s")?),
            t: Some(need_f(a.t, "t")?),
            lambda: vec![],
            x: a.x.0.clone(),
            y: need(a.y, "Y")?,
        },
    };
    let mut quad = cfg.quad.apply(Execution::default());
    quad.estimate_error = a.error_estimate;
    let (v, env, _) = evaluate_point(&cfg, &rs, &p, &quad)?;
    println!("value        {:.16e}", v.value());
    println!("ln_value     {:.16e}", v.ln_abs);
    println!("envelope     {:.16e}", env.exp());
    println!("ln_envelope  {env:.16e}");
    println!("ratio        {:.16e}", (v.ln_abs - env).exp());
    println!("err          {:.3e}", v.rel_error);
    Ok(ExitCode::SUCCESS)
}

fn apply_output(cfg: &mut SweepConfig, out: &OutputArgs) {
    if out.output.is_some() {
        cfg.output = out.output.clone();
    }
    if let Some(f) = out.format {
        cfg.format = match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        };
    }
    if out.threads.is_some() {
        cfg.threads = out.threads;
    }
}

fn emit(report: &CertifyReport, cfg: &SweepConfig) -> Result<ExitCode, Error> {
    match &cfg.output {
        Some(path) => {
            report.write(path, cfg.format)?;
            println!("{}", report.summary());
        }
        None => {
            let text = match cfg.format {
                OutputFormat::Csv => report.to_csv()?,
                OutputFormat::Json => report.to_json()?,
            };
            print!("{text}");
            eprintln!("{}", report.summary());
        }
    }
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(EXIT_FAIL) })
}

fn run_certify(a: CertifyArgs) -> Result<ExitCode, Error> {
    let mut cfg = match (&a.config, &a.kernel) {
        (Some(path), _) => SweepConfig::from_json(&std::fs::read_to_string(path)?)?,
        (None, Some(k)) => SweepConfig::for_kernel(Kernel::parse(k)?, a.n.unwrap_or(1)),
        (None, None) => return Err(Error::Config("give --config or --kernel".into())),
    };
    if a.config.is_some() {
        if let Some(k) = &a.kernel {
            cfg.kernel = Kernel::parse(k)?;
        }
        if let Some(n) = a.n {
            cfg.n = n;
        }
    }
    if a.dim.is_some() {
        cfg.dim = a.dim;
    }
    if a.trace_zero {
        cfg.trace_zero = true;
    }
    if let Some(k) = a.k {
        cfg.k = k.0;
    }
    if let Some(s) = a.s {
        cfg.s = s.0;
    }
    for (dst, src) in [(&mut cfg.lambda, a.lambda), (&mut cfg.x, a.x), (&mut cfg.offset, a.offset), (&mut cfg.t, a.t)] {
        if let Some(r) = src {
            *dst = r;
        }
    }
    if let Some(v) = a.shapes {
        cfg.shapes = v;
    }
    if let Some(v) = a.threshold {
        cfg.threshold = v;
    }
    if a.slope_limit.is_some() {
        cfg.slope_limit = a.slope_limit;
    }
    if a.top_nodes.is_some() {
        cfg.quad.top_nodes = a.top_nodes;
    }
    if a.inner_nodes.is_some() {
        cfg.quad.inner_nodes = a.inner_nodes;
    }
    apply_output(&mut cfg, &a.out);
    let report = certify(&cfg)?;
    emit(&report, &cfg)
}

fn run_lemma(a: LemmaArgs) -> Result<ExitCode, Error> {
    let kernel = Kernel::parse(&format!("lemma:{}", a.id))?;
    let mut cfg = SweepConfig::for_kernel(kernel, a.n);
    if let Some(k) = a.k {
        cfg.k = k.0;
    }
    apply_output(&mut cfg, &a.out);
    let report = certify(&cfg)?;
    emit(&report, &cfg)
}

fn selftest() -> ExitCode {
    let start = Instant::now();
    let report = run_selftest(&SelfTestOptions::default());
    println!("{}", report.render());
    eprintln!("selftest finished in {:.2} s", start.elapsed().as_secs_f64());
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval(a) => eval(a),
        Command::Certify(a) => run_certify(a),
        Command::Lemma(a) => run_lemma(a),
        Command::Selftest => return selftest(),
    };
    result.unwrap_or_else(|e| exit_for(&e))
}
