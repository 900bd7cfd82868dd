use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conelab::chart::Point;
use conelab::cone::{build_cone, CaseTag, ConeSolution};
use conelab::families::{round_sphere_2, sphere_height_squared};
use conelab::geodesic::integrate_geodesic;
use conelab::suite::{export_path, run_suite, RunConfig, SuiteKind};

#[derive(Parser)]
#[command(name = "conelab", version, about = "Cone verification suites and geodesic export")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a verification suite and write report.json
    Run(RunArgs),
    /// Integrate a sample geodesic and export it as CSV
    ExportGeodesic(ExportArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON config file; flags below override its fields
    #[arg(long)]
    config: Option<PathBuf>,
    /// suite: obata | parallel | family | geodesic | projective | pseudosphere | all
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// output directory for report.json and data files
    #[arg(long)]
    out: Option<PathBuf>,
    /// sample count per chart
    #[arg(long)]
    n_points: Option<usize>,
}

#[derive(Args)]
struct ExportArgs {
    /// metric: sphere | flat | cone-sphere
    #[arg(long, default_value = "sphere")]
    metric: String,
    /// initial point, comma separated
    #[arg(long)]
    p0: Option<String>,
    /// initial velocity, comma separated
    #[arg(long)]
    v0: Option<String>,
    #[arg(long, default_value_t = 3.0)]
    t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    step: f64,
    /// output CSV file
    #[arg(long)]
    out: PathBuf,
}

fn parse_vec(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("bad number '{p}': {e}")))
        .collect()
}

fn run(args: RunArgs) -> Result<bool, String> {
    let mut config = match &args.config {
        Some(path) => RunConfig::from_json_file(path).map_err(|e| e.to_string())?,
        None => RunConfig::new(SuiteKind::All),
    };
    if let Some(s) = &args.suite {
        config.suite = SuiteKind::parse(s).map_err(|e| e.to_string())?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(n) = args.n_points {
        config.n_points = n;
    }
    if let Some(out) = args.out {
        config.output_dir = Some(out);
    }
    let report = run_suite(&config).map_err(|e| e.to_string())?;
    for check in &report.checks {
        let status = if check.pass { "pass" } else { "FAIL" };
        let rel = match check.direction {
            conelab::suite::Direction::Below => "<",
            conelab::suite::Direction::Above => ">",
        };
        println!(
            "[{status}] {name}: residual {residual:.3e} {rel} {tol:.1e}",
            name = check.name,
            residual = check.residual,
            tol = check.tolerance,
        );
    }
    println!("{}: {} passed, {} failed", report.suite, report.n_pass, report.n_fail);
    if let Some(dir) = &config.output_dir {
        println!("report written to {}", dir.join("report.json").display());
    }
    Ok(report.passed())
}

fn export(args: ExportArgs) -> Result<(), String> {
    let (g, default_p0, default_v0): (_, Vec<f64>, Vec<f64>) = match args.metric.as_str() {
        "sphere" => (round_sphere_2(), vec![1.2, 0.5], vec![0.6, 0.5]),
        "flat" => {
            let chart = conelab::chart::Chart::new("flat2", &[-100.0, -100.0], &[100.0, 100.0]);
            let g = conelab::field::MetricField::constant(
                chart,
                "flat2",
                nalgebra_identity(2),
            );
            (g, vec![0.0, 0.0], vec![1.0, 0.5])
        }
        "cone-sphere" => {
            let base = round_sphere_2();
            let solution = ConeSolution::new(
                build_cone(&base),
                sphere_height_squared(),
                CaseTag::Projector,
            );
            let p0 = solution.cone.point(1.0, &[std::f64::consts::FRAC_PI_4, 0.7]);
            let y = solution.y_vector(&p0).map_err(|e| e.to_string())?;
            let v0: Vec<f64> = y.iter().copied().collect();
            (solution.cone.metric.clone(), p0.coords.clone(), v0)
        }
        other => return Err(format!("unknown metric '{other}'")),
    };
    let p0 = match &args.p0 {
        Some(s) => parse_vec(s)?,
        None => default_p0,
    };
    let v0 = match &args.v0 {
        Some(s) => parse_vec(s)?,
        None => default_v0,
    };
    let point = Point::new(p0, &g.chart.id);
    let path =
        integrate_geodesic(&g, &point, &v0, args.t_end, args.step).map_err(|e| e.to_string())?;
    let csv = export_path(&path, &g).map_err(|e| e.to_string())?;
    std::fs::write(&args.out, csv).map_err(|e| e.to_string())?;
    println!("{} nodes written to {}", path.len(), args.out.display());
    Ok(())
}

fn nalgebra_identity(n: usize) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::identity(n, n)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => run(args),
        Command::ExportGeodesic(args) => export(args).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
