//! `liouville`: batch verifier, flow-trace emitter and `Sp` sampler.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use liouville_core::liouville::LiouvilleStructure;
use liouville_core::suite::{emit_flow_trace, run_verification_suite_with, sample_sp, VerifyConfig};
use liouville_core::symplectic::{Sign, SymplecticSpace, Vector};

const EXIT_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "liouville", version, about = "Exact checks for monomial Liouville structures on R^2m")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the invariant suite and write a JSON report.
    Verify(VerifyArgs),
    /// Write a CSV comparing the closed-form flow with RK4.
    Flow(FlowArgs),
    /// Sample an element of Sp(2m) as a product of transvections.
    SampleSp(SampleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
}

#[derive(Args)]
struct VerifyArgs {
    /// Half-dimensions to test.
    #[arg(long = "m", value_delimiter = ',', default_value = "1,2")]
    m_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3,4,5,6")]
    degrees: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "+,-", allow_hyphen_values = true)]
    signs: Vec<Sign>,
    #[arg(long, default_value_t = 50)]
    trials: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    float_tol_flow: f64,
    #[arg(long, default_value_t = 1e-5)]
    float_tol_scaling: f64,
    #[arg(long, default_value_t = 2000)]
    rk4_steps: u32,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Perturb one coefficient of f_a so the conjugation check must fail.
    #[arg(long)]
    inject_fault: bool,
    /// Print one line per finished check on stderr.
    #[arg(long)]
    progress: bool,
}

#[derive(Args)]
struct FlowArgs {
    /// Perturbation vector p_1,..,p_m,q_1,..,q_m; zero if omitted.
    #[arg(long, allow_hyphen_values = true)]
    a: Option<Vector>,
    /// Initial point p_1,..,p_m,q_1,..,q_m.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', required = true)]
    z: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    degree: u32,
    #[arg(long, default_value = "+", allow_hyphen_values = true)]
    sign: Sign,
    /// min:max:step
    #[arg(long, default_value = "0:1:0.1", allow_hyphen_values = true)]
    t_range: TimeRange,
    #[arg(long, default_value_t = 2000)]
    rk4_steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long = "m")]
    m: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of transvection factors.
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy)]
struct TimeRange {
    min: f64,
    max: f64,
    step: f64,
}

impl std::str::FromStr for TimeRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, step] = parts[..] else {
            return Err(format!("expected min:max:step, got {s:?}"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x:?}: {e}"));
        Ok(TimeRange { min: num(min)?, max: num(max)?, step: num(step)? })
    }
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn verify(args: VerifyArgs) -> ExitCode {
    let Format::Json = args.format;
    let config = VerifyConfig {
        m_list: args.m_list,
        degrees: args.degrees,
        signs: args.signs,
        trials: args.trials,
        seed: args.seed,
        float_tol_flow: args.float_tol_flow,
        float_tol_scaling: args.float_tol_scaling,
        rk4_steps: args.rk4_steps,
        inject_fault: args.inject_fault,
    };
    let progress = args.progress;
    let report = match run_verification_suite_with(&config, |done, total, check| {
        if progress {
            let params: Vec<String> = check.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            eprintln!("[{done}/{total}] {} {:?} {}", check.name, check.status, params.join(" "));
        }
    }) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    if let Err(e) = write_output(args.out.as_ref(), &report.to_json()) {
        return usage(e);
    }
    let s = report.summary;
    eprintln!("{} checks: {} pass, {} fail, {} error", s.total, s.pass, s.fail, s.error);
    if report.is_success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILED)
    }
}

fn flow(args: FlowArgs) -> ExitCode {
    if args.z.is_empty() || args.z.len() % 2 != 0 {
        return usage("--z needs an even, nonzero number of coordinates");
    }
    let space = match SymplecticSpace::new(args.z.len() / 2) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let a = args.a.unwrap_or_else(|| space.zero());
    let l = match LiouvilleStructure::new(space, a, args.degree, args.sign) {
        Ok(l) => l,
        Err(e) => return usage(format!("--a does not match --z: {e}")),
    };
    let r = args.t_range;
    let csv = match emit_flow_trace(&l, &args.z, r.min, r.max, r.step, args.rk4_steps) {
        Ok(csv) => csv,
        Err(e) => return usage(e),
    };
    match write_output(args.out.as_ref(), &csv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage(e),
    }
}

fn sample(args: SampleArgs) -> ExitCode {
    let sample = match sample_sp(args.m, args.seed, args.count) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let mut text = serde_json::to_string_pretty(&sample).expect("plain data");
    text.push('\n');
    match write_output(args.out.as_ref(), &text) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => usage(e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Verify(args) => verify(args),
        Command::Flow(args) => flow(args),
        Command::SampleSp(args) => sample(args),
    }
}
