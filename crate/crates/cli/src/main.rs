use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use horolab_cli::lab::{point, resolve_domain};
use horolab_cli::scenario::DomainRef;
use horolab_cli::{emit_plotdata, run_scenario, CliError, CliResult, PlotKind, Report, RunOptions};
use horolab_core::asymptotics::{enveloping_domain, squeezing_lower_bound};
use horolab_core::conformal::RiemannMap;
use horolab_core::metric::{solve_metric_field, MethodChoice, MetricEngine, TRANSPORT_SPACING};

#[derive(Parser)]
#[command(
    name = "horolab",
    version,
    about = "Hyperbolic geometry of planar domains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its report.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory; defaults to the scenario's, then `out/<name>`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run operations concurrently.
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        no_cache: bool,
        #[arg(long, default_value = "cache")]
        cache_dir: PathBuf,
    },
    /// Hyperbolic distance between two points, given as `x,y`.
    Dist {
        /// Built-in name or domain spec file.
        domain: String,
        #[arg(allow_hyphen_values = true)]
        z: String,
        #[arg(allow_hyphen_values = true)]
        w: String,
        #[arg(long, default_value_t = TRANSPORT_SPACING)]
        h: f64,
        #[arg(long, default_value = "auto")]
        method: String,
    },
    /// Lower bound for the squeezing function at `z`.
    Squeeze {
        domain: String,
        #[arg(allow_hyphen_values = true)]
        z: String,
    },
    /// Re-emit plot data from a report directory.
    Report {
        dir: PathBuf,
        #[arg(long, value_enum)]
        kind: Option<PlotKind>,
    },
}

fn parse_point(s: &str) -> CliResult<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts[..] {
        [x, y] => match (x.parse(), y.parse()) {
            (Ok(x), Ok(y)) => Ok([x, y]),
            _ => Err(CliError::Usage(format!("bad point `{s}`, expected `x,y`"))),
        },
        _ => Err(CliError::Usage(format!("bad point `{s}`, expected `x,y`"))),
    }
}

fn domain_ref(s: &str) -> DomainRef {
    if std::path::Path::new(s).is_file() {
        DomainRef::File { file: s.into() }
    } else {
        DomainRef::Builtin(s.into())
    }
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Run {
            scenario,
            h,
            seed,
            out,
            parallel,
            no_cache,
            cache_dir,
        } => {
            let opts = RunOptions {
                h,
                seed,
                out,
                parallel,
                cache_dir: (!no_cache).then_some(cache_dir),
            };
            let report = run_scenario(&scenario, &opts)?;
            for r in &report.records {
                let status = if r.passed { "pass" } else { "FAIL" };
                match &r.error {
                    Some(e) => println!("{status} {:02} {}: {e}", r.index, r.op),
                    None => println!("{status} {:02} {}", r.index, r.op),
                }
            }
            println!(
                "{}: {}",
                report.scenario,
                if report.passed { "pass" } else { "FAIL" }
            );
            Ok(report.exit_code())
        }
        Command::Dist {
            domain,
            z,
            w,
            h,
            method,
        } => {
            let d = Arc::new(resolve_domain(&domain_ref(&domain), ".".as_ref())?);
            let field = solve_metric_field(d, h, MethodChoice::from_str(&method)?)?;
            let engine = MetricEngine::new(Arc::new(field));
            let k = engine.distance(point(parse_point(&z)?), point(parse_point(&w)?))?;
            println!("{k:.16e}");
            Ok(0)
        }
        Command::Squeeze { domain, z } => {
            let d = resolve_domain(&domain_ref(&domain), ".".as_ref())?;
            let env = Arc::new(enveloping_domain(&d)?);
            let map = RiemannMap::compute(env.clone(), env.base_point())?;
            let s = squeezing_lower_bound(&d, point(parse_point(&z)?), &map)?;
            match s.disk_gap {
                Some(g) => println!("{:.16e} (disk gap {g:.16e})", s.lower_bound),
                None => println!("{:.16e} (no holes)", s.lower_bound),
            }
            Ok(0)
        }
        Command::Report { dir, kind } => {
            let report = Report::load(&dir)?;
            let kinds = kind.map_or(PlotKind::ALL.to_vec(), |k| vec![k]);
            for k in kinds {
                for f in emit_plotdata(&report, k, &dir)? {
                    println!("{}", f.display());
                }
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
