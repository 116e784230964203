use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nsym_cli::{
    cmd_check, cmd_classify, cmd_reduce, cmd_transform, cmd_verify, CheckInput, ClassifyArgs, InputError, ReduceInput,
    Report, Source, TransformArgs,
};
use nsym_core::dde::ConjRule;

#[derive(Parser)]
#[command(name = "nsym", version, about = "Point symmetries, reductions and DDE transforms of nonlocal equations")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report a wall time of 0 so that reports compare byte for byte.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Checks generators against the linearized symmetry condition.
    Verify {
        system: String,
        #[arg(required = true)]
        generators: Vec<String>,
    },
    /// Solves the determining equations for a polynomial ansatz.
    Classify {
        system: String,
        #[arg(long, default_value_t = 2)]
        degree: u32,
        /// Restrict generator coefficients to real numbers.
        #[arg(long)]
        real_fields: bool,
        /// Split a complex system into real and imaginary parts first.
        #[arg(long)]
        realify: bool,
    },
    /// Runs a built-in catalog entry or `reduce` blocks from a file.
    Reduce {
        #[arg(long, conflicts_with_all = ["system", "spec"])]
        entry: Option<String>,
        #[arg(required_unless_present = "entry")]
        system: Option<String>,
        #[arg(required_unless_present = "entry")]
        spec: Option<String>,
    },
    /// Samples residuals of closed-form solutions.
    Check {
        #[arg(required_unless_present = "quadrature")]
        solutions: Option<String>,
        #[arg(long)]
        samples: Option<usize>,
        /// `a,b,C1,C2` of the quadrature solution.
        #[arg(long, value_delimiter = ',', conflicts_with = "solutions")]
        quadrature: Option<Vec<f64>>,
    },
    /// Exponential substitution and rescaling of independent variables.
    Transform {
        system: String,
        /// Axes to map by x = exp(x'), comma separated.
        #[arg(long, value_delimiter = ',')]
        exp: Vec<String>,
        /// `axis=factor` for x = factor*x'; repeatable.
        #[arg(long)]
        rescale: Vec<String>,
        #[arg(long, value_enum, default_value_t = Conj::Formal)]
        conj: Conj,
        /// System file with the expected equations.
        #[arg(long)]
        expect: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Conj {
    Formal,
    Schwarz,
}

fn run(cli: &Cli) -> Result<Report, InputError> {
    let seed = cli.common.seed;
    match &cli.command {
        Command::Verify { system, generators } => {
            let gens = generators.iter().map(|g| Source::read(g)).collect::<Result<Vec<_>, _>>()?;
            cmd_verify(&Source::read(system)?, &gens, seed)
        }
        Command::Classify { system, degree, real_fields, realify } => cmd_classify(
            &Source::read(system)?,
            &ClassifyArgs { degree: *degree, real_fields: *real_fields, realify: *realify },
            seed,
        ),
        Command::Reduce { entry: Some(name), .. } => cmd_reduce(ReduceInput::Entry(name), seed),
        Command::Reduce { system, spec, .. } => {
            let system = Source::read(system.as_deref().unwrap_or_default())?;
            let spec = Source::read(spec.as_deref().unwrap_or_default())?;
            cmd_reduce(ReduceInput::Files { system: &system, spec: &spec }, seed)
        }
        Command::Check { solutions, samples, quadrature } => match (solutions, quadrature) {
            (_, Some(q)) => match q.as_slice() {
                &[a, b, c1, c2] => cmd_check(CheckInput::Quadrature([a, b, c1, c2]), *samples, seed),
                _ => Err(InputError(format!("--quadrature takes a,b,C1,C2; got {} values", q.len()))),
            },
            (Some(path), None) => cmd_check(CheckInput::File(&Source::read(path)?), *samples, seed),
            (None, None) => Err(InputError("a solution file or --quadrature is needed".into())),
        },
        Command::Transform { system, exp, rescale, conj, expect } => {
            let rule = match conj {
                Conj::Formal => ConjRule::Formal,
                Conj::Schwarz => ConjRule::Schwarz,
            };
            let expected = expect.as_deref().map(Source::read).transpose()?;
            let args = TransformArgs { exp: exp.clone(), rescale: rescale.clone(), rule };
            cmd_transform(&Source::read(system)?, &args, expected.as_ref(), seed)
        }
    }
}

fn configure_threads() -> Result<(), InputError> {
    if let Ok(v) = std::env::var("NSYM_THREADS") {
        let n: usize = v.trim().parse().map_err(|_| InputError(format!("NSYM_THREADS={v}: expected a positive integer")))?;
        if n == 0 {
            return Err(InputError("NSYM_THREADS must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| InputError(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let start = Instant::now();
    let report = configure_threads().and_then(|_| run(&cli));
    let mut report = match report {
        Ok(r) => r,
        Err(e) => {
            eprintln!("nsym: {e}");
            return ExitCode::from(2);
        }
    };
    if !cli.common.no_timing {
        report.wall_time_ms = start.elapsed().as_millis() as u64;
    }
    for v in &report.verdicts {
        eprintln!("{} {}", if v.passed { "ok  " } else { "FAIL" }, v.name);
    }
    let json = report.to_json();
    match &cli.common.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json + "\n") {
                eprintln!("nsym: {path}: {e}");
                return ExitCode::from(2);
            }
        }
        None => println!("{json}"),
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
