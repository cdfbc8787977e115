//! Argument parsing and command execution.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lp2norm::functional::{fnorm_21, fnorm_22_g, fnorm_22_h, yq_norm, Fnorm22Options};
use lp2norm::geometry::volume;
use lp2norm::grid::{
    function_csv, kernel_csv, make_rule, sample_function, sample_kernel, FunctionSpec, KernelSpec, RuleKind,
};
use lp2norm::two_norm::{gahler_norm, gunawan_norm, AscentOptions, NormEstimate};
use lp2norm::verify::{run_suite_with_threads, Report, SuiteConfig, SuiteId};
use lp2norm::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SUITE_FAILED: i32 = 3;
pub const EXIT_NOT_CONVERGED: i32 = 4;

#[derive(Parser, Debug)]
#[command(
    name = "lp2norm",
    version,
    about = "2-norms and 2-functional norms on a discretized L^p[0,1]"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Gunawan or Gähler 2-norm, or the volume of a pair of functions.
    Norm2(Norm2Args),
    /// Norm of the bilinear 2-functional or operator given by a kernel.
    Fnorm(FnormArgs),
    /// Run verification suites and write their reports.
    Verify(VerifyArgs),
    /// Sample a function or kernel spec to CSV.
    Gen(GenArgs),
}

#[derive(Args, Debug)]
pub struct AscentArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Iteration cap of each ascent run.
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Number of random starts.
    #[arg(long)]
    pub starts: Option<usize>,
}

impl AscentArgs {
    fn apply(&self, base: AscentOptions) -> AscentOptions {
        AscentOptions {
            seed: self.seed,
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            starts: self.starts.unwrap_or(base.starts),
            ..base
        }
    }
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Number of quadrature nodes.
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
    /// midpoint, trapezoid, gauss or gauss:<nodes per panel>.
    #[arg(long, default_value = "midpoint")]
    pub rule: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum NormKind {
    Gunawan,
    Gahler,
    Volume,
}

#[derive(Args, Debug)]
pub struct Norm2Args {
    #[arg(long, value_enum)]
    pub norm: NormKind,
    #[arg(long)]
    pub p: String,
    #[arg(long)]
    pub f1: String,
    #[arg(long)]
    pub f2: String,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Also write the result as JSON to this path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub ascent: AscentArgs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FnormKind {
    #[value(name = "y")]
    Y,
    #[value(name = "21")]
    TwoOne,
    #[value(name = "g22")]
    G22,
    #[value(name = "h22")]
    H22,
}

#[derive(Args, Debug)]
pub struct FnormArgs {
    #[arg(long, value_enum)]
    pub kind: FnormKind,
    #[arg(long, default_value = "2")]
    pub p: String,
    #[arg(long)]
    pub kernel: String,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value = "midpoint")]
    pub rule: String,
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub ascent: AscentArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite id or `all`.
    #[arg(long, default_value = "all")]
    pub suite: String,
    /// Comma-separated exponents.
    #[arg(long, default_value = "1,1.5,2,3")]
    pub p_list: String,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Grid size; each suite has its own default.
    #[arg(long)]
    pub grid: Option<usize>,
    #[arg(long, default_value = "midpoint")]
    pub rule: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the reports as one JSON array to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Number of worker threads.
    #[arg(long, default_value_t = 1)]
    pub parallel: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum GenKind {
    Function,
    Kernel,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub what: GenKind,
    #[arg(long)]
    pub spec: String,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out: PathBuf,
}

/// `%.12g`: twelve significant digits, trailing zeros removed.
pub fn format_value(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-5..12).contains(&exp) {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent present");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        let e: i32 = e.parse().expect("integer exponent");
        return format!("{mantissa}e{}{:02}", if e < 0 { '-' } else { '+' }, e.abs());
    }
    let s = format!("{v:.*}", (11 - exp).max(0) as usize);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn parse_p(s: &str) -> Result<f64> {
    let p: f64 = s.trim().parse().map_err(|_| Error::Parse {
        input: s.to_string(),
        reason: "expected a real exponent".into(),
    })?;
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Domain(format!("p = {p} is outside [1, ∞)")));
    }
    Ok(p)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

fn write_json(path: &Option<PathBuf>, value: &serde_json::Value) -> Result<()> {
    match path {
        Some(path) => write_file(
            path,
            &(serde_json::to_string_pretty(value).expect("serializable") + "\n"),
        ),
        None => Ok(()),
    }
}

/// Prints an estimate and returns its exit code.
fn report_estimate(estimate: &NormEstimate) -> i32 {
    if estimate.converged {
        println!("{}", format_value(estimate.value));
        EXIT_OK
    } else {
        println!("{} (not converged)", format_value(estimate.value));
        EXIT_NOT_CONVERGED
    }
}

fn norm2(args: &Norm2Args) -> Result<i32> {
    let p = parse_p(&args.p)?;
    let rule = make_rule(args.grid.rule.parse::<RuleKind>()?, args.grid.grid)?;
    let f1 = sample_function(&rule, &args.f1.parse::<FunctionSpec>()?)?;
    let f2 = sample_function(&rule, &args.f2.parse::<FunctionSpec>()?)?;
    let estimate = match args.norm {
        NormKind::Gunawan => NormEstimate {
            value: gunawan_norm(&f1, &f2, p)?,
            converged: true,
            iterations: 0,
            starts: 0,
            maximizers: Vec::new(),
            is_lower_bound: false,
        },
        NormKind::Volume => NormEstimate {
            value: volume(&f1, &f2, p)?,
            converged: true,
            iterations: 0,
            starts: 0,
            maximizers: Vec::new(),
            is_lower_bound: false,
        },
        NormKind::Gahler => gahler_norm(&f1, &f2, p, &args.ascent.apply(AscentOptions::default()))?,
    };
    write_json(
        &args.json,
        &json!({
            "command": "norm2",
            "norm": format!("{:?}", args.norm).to_lowercase(),
            "p": p,
            "f1": args.f1,
            "f2": args.f2,
            "grid": args.grid.grid,
            "rule": args.grid.rule,
            "seed": args.ascent.seed,
            "value": estimate.value,
            "converged": estimate.converged,
            "is_lower_bound": estimate.is_lower_bound,
        }),
    )?;
    Ok(report_estimate(&estimate))
}

fn fnorm(args: &FnormArgs) -> Result<i32> {
    let p = parse_p(&args.p)?;
    let rule = make_rule(args.rule.parse::<RuleKind>()?, args.grid)?;
    let theta = sample_kernel(&rule, &args.kernel.parse::<KernelSpec>()?)?;
    let defaults = Fnorm22Options::default();
    let ascent = args.ascent.apply(AscentOptions::default());
    let f22 = || Fnorm22Options {
        ascent: args.ascent.apply(defaults.ascent),
        gahler: AscentOptions {
            seed: args.ascent.seed,
            ..defaults.gahler
        },
        fnorm21: args.ascent.apply(defaults.fnorm21),
        ..defaults.clone()
    };
    let estimate = match args.kind {
        FnormKind::Y => yq_norm(&theta, p, &ascent)?,
        FnormKind::TwoOne => fnorm_21(&theta, p, &f22().fnorm21)?,
        FnormKind::G22 => fnorm_22_g(&theta, p, &f22())?,
        FnormKind::H22 => fnorm_22_h(&theta, p, &f22())?,
    };
    let kind = match args.kind {
        FnormKind::Y => "y",
        FnormKind::TwoOne => "21",
        FnormKind::G22 => "g22",
        FnormKind::H22 => "h22",
    };
    write_json(
        &args.json,
        &json!({
            "command": "fnorm",
            "kind": kind,
            "p": p,
            "kernel": args.kernel,
            "grid": args.grid,
            "rule": args.rule,
            "seed": args.ascent.seed,
            "value": estimate.value,
            "converged": estimate.converged,
            "is_lower_bound": estimate.is_lower_bound,
        }),
    )?;
    Ok(report_estimate(&estimate))
}

fn verify(args: &VerifyArgs) -> Result<i32> {
    let suites: Vec<SuiteId> = if args.suite == "all" {
        SuiteId::ALL.to_vec()
    } else {
        vec![args.suite.parse()?]
    };
    let p_list = args.p_list.split(',').map(parse_p).collect::<Result<Vec<f64>>>()?;
    let rule_kind: RuleKind = args.rule.parse()?;
    let mut reports: Vec<Report> = Vec::new();
    for suite in suites {
        let config = SuiteConfig {
            p_list: p_list.clone(),
            grid_n: args.grid.unwrap_or(suite.default_grid()),
            rule_kind,
            trials: args.trials,
            master_seed: args.seed,
            ..SuiteConfig::new(suite)
        };
        for report in run_suite_with_threads(&config, args.parallel)? {
            println!(
                "suite={} p={} pass={} fail={} min_margin={}",
                report.suite,
                format_value(report.p),
                report.summary.pass,
                report.summary.fail,
                report.min_margin().map_or("none".to_string(), format_value),
            );
            reports.push(report);
        }
    }
    if let Some(out) = &args.out {
        write_file(
            out,
            &(serde_json::to_string_pretty(&reports).expect("serializable") + "\n"),
        )?;
    }
    Ok(if reports.iter().all(Report::passed) {
        EXIT_OK
    } else {
        EXIT_SUITE_FAILED
    })
}

fn gen(args: &GenArgs) -> Result<i32> {
    let rule = make_rule(args.grid.rule.parse::<RuleKind>()?, args.grid.grid)?;
    let text = match args.what {
        GenKind::Function => function_csv(&sample_function(&rule, &args.spec.parse()?)?),
        GenKind::Kernel => kernel_csv(&sample_kernel(&rule, &args.spec.parse()?)?),
    };
    write_file(&args.out, &text)?;
    Ok(EXIT_OK)
}

/// Runs a parsed command; input errors are reported on stderr with exit code 2.
pub fn execute(cli: &Cli) -> i32 {
    let outcome = match &cli.command {
        Command::Norm2(a) => norm2(a),
        Command::Fnorm(a) => fnorm(a),
        Command::Verify(a) => verify(a),
        Command::Gen(a) => gen(a),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_INPUT
    })
}
