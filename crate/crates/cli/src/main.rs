mod commands;
mod error;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::error::CliError;

/// Worker-thread count for the parallel kernels.
pub const THREADS_ENV: &str = "CYCLAB_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "cyclab",
    version,
    about = "Cyclicity experiments for singular inner functions in weighted Bergman-type spaces",
    after_help = "Exit codes: 0 ok, 1 invalid input, 2 numerical or horizon failure, 3 margin failure.\n\
                  Set CYCLAB_THREADS to fix the worker-thread count. Every command writes a\n\
                  JSON manifest next to its main output."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct WeightArgs {
    /// Weight family, e.g. `power,alpha=1`, `stretched,c=1,beta=0.5`, `step`,
    /// `smoothed_step`, `flat`, `remark3`, `table,file=PATH`
    #[arg(long)]
    pub family: String,
    /// Accept non-conforming weights (flat, remark3, non-monotone tables)
    #[arg(long)]
    pub unchecked: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate a weight; write partial-sum checkpoints, ladder and envelope
    #[command(after_help = "CSV columns (main): N,partial_theorem1,partial_beurling\n\
                            <out>.ladder.csv: j,n,logw\n\
                            <out>.envelope.csv (with --envelope): n,logw,envelope\n\
                            <out>.report.json: validation report")]
    Weights {
        #[command(flatten)]
        weight: WeightArgs,
        #[arg(long, default_value_t = cyclab::weights::DEFAULT_HORIZON)]
        horizon: usize,
        /// Number of ladder rungs to build
        #[arg(long, default_value_t = 8)]
        rungs: usize,
        /// Also write the least log-concave majorant
        #[arg(long)]
        envelope: bool,
        #[arg(long, default_value = "weights.csv")]
        out: PathBuf,
    },
    /// Distances dist(1, span{zᵏU : k ≤ N}) for a list of N
    #[command(after_help = "CSV columns: N,M,dist,dist_sq,tail_bound,gram_condition")]
    Scan {
        #[command(flatten)]
        weight: WeightArgs,
        /// Atoms `mass@angle;mass@angle`
        #[arg(long, default_value = "1.0@0.0")]
        inner: String,
        /// Strictly ascending degree bounds N
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4,8,16,32,64")]
        degrees: Vec<usize>,
        /// Truncation; defaults to max(4096, 8·max N)
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, default_value = "scan.csv")]
        out: PathBuf,
    },
    /// Least-squares corona pairs fU + zⁿg ≈ 1
    #[command(after_help = "CSV columns: n,d,M,residual_l2,f_sup,g_sup,corona_bound,pass")]
    Bezout {
        #[arg(long, default_value = "1.0@0.0")]
        inner: String,
        #[arg(long, value_delimiter = ',', default_value = "1,4,16")]
        n: Vec<usize>,
        /// Degree of f and g; defaults to max(16, 4n)
        #[arg(long)]
        d: Option<usize>,
        /// Matched coefficients; defaults to 16d
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long, default_value = "bezout.csv")]
        out: PathBuf,
    },
    /// Check a lemma's inequalities on the standard grid (JSON report)
    #[command(after_help = "Writes a JSON margin report; exit 0 iff every margin is nonnegative.")]
    Verify {
        #[arg(long, value_parser = clap::value_parser!(u8).range(3..=5))]
        lemma: u8,
        /// Lemma 3: atoms
        #[arg(long, default_value = "1.0@0.0")]
        inner: String,
        /// Lemma 3 and 5: index n
        #[arg(long)]
        n: Option<usize>,
        /// Lemma 4: δ
        #[arg(long)]
        delta: Option<f64>,
        /// Lemma 4: a
        #[arg(long)]
        a: Option<f64>,
        /// Lemma 5: mass c of I_c
        #[arg(long)]
        c: Option<f64>,
        /// Lemma 4 and 5: majorant, e.g. `power,alpha=1`
        #[arg(long, default_value = "power,alpha=1")]
        lambda: String,
        #[arg(long, default_value = "verify.json")]
        out: PathBuf,
    },
    /// Moment weights ω(n)⁻² = ∫₀¹ r^{2n+1}e^{−2Λ(1−r)}dr
    #[command(after_help = "CSV columns: n,logw")]
    Moments {
        #[arg(long, default_value = "power,alpha=1")]
        lambda: String,
        #[arg(long, default_value_t = 64)]
        n_max: usize,
        #[arg(long, default_value = "moments.csv")]
        out: PathBuf,
    },
    /// Block constructions swept over j0
    #[command(after_help = "CSV columns: j0,N,mode,residual,bound,constant_used\n\
                            <out>.runs.json: plans and per-factor diagnostics")]
    Pipeline {
        /// theorem1, theorem2 or theorem2_monomial
        #[arg(long)]
        mode: String,
        /// theorem1: weight family
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        unchecked: bool,
        /// Atoms; required for theorem1, defaults to `1.0@0.0` for theorem2
        #[arg(long)]
        inner: Option<String>,
        /// theorem2: majorant (use `set=circle` for theorem2_monomial)
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        j0: Vec<usize>,
        /// Override the measured A_eff (theorem1) or the default B = 1 (theorem2)
        #[arg(long)]
        constant: Option<f64>,
        #[arg(long, default_value_t = 1024)]
        max_degree: usize,
        #[arg(long = "M", default_value_t = 4096)]
        m: usize,
        #[arg(long, default_value = "pipeline.csv")]
        out: PathBuf,
    },
    /// Side-by-side trajectories on both sides of a divergence condition
    #[command(after_help = "CSV columns: label,x,value,partial_sum,classification\n\
                            <out>.report.json: full report including Keldyš diagnostics")]
    Contrast {
        /// scan, theorem2 or all
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        j0: Vec<usize>,
        #[arg(long, default_value = "contrast.csv")]
        out: PathBuf,
    },
}

/// Arguments after the subcommand name with `--out` removed.
fn rerun_args() -> Vec<String> {
    let mut out = Vec::new();
    let mut args = std::env::args().skip(2);
    while let Some(a) = args.next() {
        if a == "--out" {
            args.next();
        } else if !a.starts_with("--out=") {
            out.push(a);
        }
    }
    out
}

fn configure_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Spec(format!("{THREADS_ENV}={v} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Numeric(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let argv = rerun_args();
    match cli.command {
        Command::Weights {
            weight,
            horizon,
            rungs,
            envelope,
            out,
        } => commands::weights(&weight, horizon, rungs, envelope, &out, argv),
        Command::Scan {
            weight,
            inner,
            degrees,
            m,
            out,
        } => commands::scan(&weight, &inner, &degrees, m, &out, argv),
        Command::Bezout { inner, n, d, m, out } => commands::bezout(&inner, &n, d, m, &out, argv),
        Command::Verify {
            lemma,
            inner,
            n,
            delta,
            a,
            c,
            lambda,
            out,
        } => commands::verify(
            commands::VerifyArgs {
                lemma,
                inner,
                n,
                delta,
                a,
                c,
                lambda,
            },
            &out,
            argv,
        ),
        Command::Moments { lambda, n_max, out } => commands::moments(&lambda, n_max, &out, argv),
        Command::Pipeline {
            mode,
            family,
            unchecked,
            inner,
            lambda,
            j0,
            constant,
            max_degree,
            m,
            out,
        } => commands::pipeline(
            commands::PipelineArgs {
                mode,
                family,
                unchecked,
                inner,
                lambda,
                j0,
                constant,
                max_degree,
                m,
            },
            &out,
            argv,
        ),
        Command::Contrast { suite, j0, out } => commands::contrast(&suite, &j0, &out, argv),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // clap exits with 2 on usage errors; usage errors here are input errors
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cyclab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
