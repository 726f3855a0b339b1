//! Command-line surface for the torsion log-Minkowski solver.
//!
//! `solve` recovers a polygon from a measure on the circle, `forward`
//! evaluates the torsion rigidity and facet measures of a polygon,
//! `discretize` runs the partition-and-sample step on a general measure,
//! `validate` checks the built-in invariant suite, and `bench` times the
//! finite-element core. Artifacts are JSON and CSV in full double precision;
//! reruns with the same configuration and seed are byte-identical. Errors
//! leave a machine-readable JSON object on stderr and exit 2 (input
//! rejected), 3 (no convergence), or 4 (internal failure).

mod checks;
mod svg;

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use torlog::geometry::{DiscreteSphericalMeasure, Polygon};
use torlog::io;
use torlog::measures::{
    approximate_solve, discretize, ApproximationRun, Density, DiscretizationResult, GeneralMeasure,
};
use torlog::solver::{solve_discrete, SolveOptions, SolveReport, Target};
use torlog::torsion::{build_mesh, facet_torsion_measure, refine_and_extrapolate, solve_torsion};

#[derive(Parser)]
#[command(
    name = "torlog",
    version,
    about = "Planar torsion log-Minkowski solver",
    long_about = "Given a finite positive measure on the unit circle, recovers a convex \
                  polygon whose cone-torsion measure matches it; also evaluates the \
                  forward torsion map, discretizes general measures, validates built-in \
                  invariants, and benchmarks the finite-element core.\n\nTORLOG_THREADS \
                  caps internal parallelism; the numerical kernels are sequential, so \
                  any positive value is honored."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Recover a polygon whose torsion measure matches the input measure.
    Solve(SolveArgs),
    /// Evaluate torsion rigidity and facet measures of a polygon.
    Forward(ForwardArgs),
    /// Partition the circle, sample directions, and discretize a general measure.
    Discretize(DiscretizeArgs),
    /// Run the built-in invariant suite and print a pass/fail table.
    Validate,
    /// Time mesh construction and the torsion solve at levels 2..=5 on the pentagon.
    Bench,
}

#[derive(clap::Args)]
struct SolveArgs {
    /// Measure JSON file, or a density spec: constant[:c], cosine:a,b, atoms:file, table:file.
    #[arg(long)]
    input: String,
    /// Directory receiving polygon.json, report.json, trace.csv, and optional plots.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Mesh refinement level for the inner forward solves.
    #[arg(long, default_value_t = 3)]
    level: u32,
    /// Report the final rigidity from a three-level refinement study.
    #[arg(long)]
    extrapolate: bool,
    /// Residual tolerance that counts as converged.
    #[arg(long, default_value_t = 1e-2)]
    tol: f64,
    /// Outer descent iteration cap.
    #[arg(long, default_value_t = 500)]
    max_outer: usize,
    /// Facet quantity the residual compares.
    #[arg(long, value_enum, default_value_t = TargetArg::Cone)]
    target: TargetArg,
    /// Seed for jittered direction sampling of general measures.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fineness schedule j1,j2,... for general measures; with a plain atom
    /// list it forces the general pipeline instead of the discrete solver.
    #[arg(long)]
    schedule: Option<String>,
    /// Write polygon.svg: outline, origin marker, facet arrows scaled by cone-torsion mass.
    #[arg(long)]
    plot: bool,
}

#[derive(clap::Args)]
struct ForwardArgs {
    /// Polygon JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving forward.json, facets.csv, and optional extras.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Mesh refinement level.
    #[arg(long, default_value_t = 3)]
    level: u32,
    /// Solve levels level-2..level, report the extrapolated rigidity, write convergence.csv.
    #[arg(long)]
    extrapolate: bool,
    /// Write polygon.svg with facet arrows scaled by cone-torsion mass.
    #[arg(long)]
    plot: bool,
}

#[derive(clap::Args)]
struct DiscretizeArgs {
    /// General measure JSON file, or a density spec string.
    #[arg(long)]
    input: String,
    /// Directory receiving one discretization_<j>.json per schedule entry.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Fineness values j1,j2,...
    #[arg(long)]
    schedule: String,
    /// Sampling seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetArg {
    /// Match cone-torsion masses.
    Cone,
    /// Match raw facet torsion measures.
    L0,
}

impl From<TargetArg> for Target {
    fn from(t: TargetArg) -> Target {
        match t {
            TargetArg::Cone => Target::Cone,
            TargetArg::L0 => Target::L0,
        }
    }
}

enum CliError {
    Lib(torlog::Error),
    /// Bad flags, paths, or environment; exits 2.
    Config(String),
    /// Filesystem failure while writing artifacts; exits 4.
    Io {
        context: String,
        source: std::io::Error,
    },
    /// The last schedule stage produced no converged report; exits 3.
    StageFailed(String),
    /// `validate` found failing checks; exits 4.
    ChecksFailed(usize),
}

impl From<torlog::Error> for CliError {
    fn from(e: torlog::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn kind(&self) -> &'static str {
        match self {
            CliError::Lib(e) => lib_kind(e),
            CliError::Config(_) => "InvalidInput",
            CliError::Io { .. } => "Io",
            CliError::StageFailed(_) => "StageFailed",
            CliError::ChecksFailed(_) => "ValidationFailed",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Lib(e) => e.to_string(),
            CliError::Config(m) => m.clone(),
            CliError::Io { context, source } => format!("{context}: {source}"),
            CliError::StageFailed(m) => m.clone(),
            CliError::ChecksFailed(n) => format!("{n} validation check(s) failed"),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(e) => lib_exit_code(e),
            CliError::Config(_) => 2,
            CliError::StageFailed(_) => 3,
            CliError::Io { .. } | CliError::ChecksFailed(_) => 4,
        }
    }
}

fn lib_kind(e: &torlog::Error) -> &'static str {
    use torlog::Error as E;
    match e {
        E::HemisphereViolation { .. } => "HemisphereViolation",
        E::DegenerateBody => "DegenerateBody",
        E::OriginOutside { .. } => "OriginOutside",
        E::SolverDivergence { .. } => "SolverDivergence",
        E::MeshMismatch(_) => "MeshMismatch",
        E::InvalidSchedule(_) => "InvalidSchedule",
        E::OutsideDomain { .. } => "OutsideDomain",
        E::NoConvergence(_) => "NoConvergence",
        E::FacetLost(_) => "FacetLost",
        E::MaxIterations { .. } => "MaxIterations",
        E::SamplingFailure(_) => "SamplingFailure",
        E::QuadratureFailure { .. } => "QuadratureFailure",
        E::InvalidInput(_) => "InvalidInput",
    }
}

/// 2 marks rejected input, 3 marks a run that started but did not converge.
fn lib_exit_code(e: &torlog::Error) -> u8 {
    use torlog::Error as E;
    match e {
        E::HemisphereViolation { .. }
        | E::DegenerateBody
        | E::OriginOutside { .. }
        | E::MeshMismatch(_)
        | E::InvalidSchedule(_)
        | E::InvalidInput(_) => 2,
        E::SolverDivergence { .. }
        | E::OutsideDomain { .. }
        | E::NoConvergence(_)
        | E::FacetLost(_)
        | E::MaxIterations { .. }
        | E::SamplingFailure(_)
        | E::QuadratureFailure { .. } => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!(
                "{}",
                json!({"error": {"kind": e.kind(), "message": e.message()}})
            );
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    let _cap = thread_cap()?;
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Forward(args) => cmd_forward(args),
        Command::Discretize(args) => cmd_discretize(args),
        Command::Validate => cmd_validate(),
        Command::Bench => cmd_bench(),
    }
}

/// Reads and validates TORLOG_THREADS. The numerical kernels run on one
/// thread, so any positive cap is honored; the value only needs to be sane.
fn thread_cap() -> Result<usize, CliError> {
    match env::var("TORLOG_THREADS") {
        Err(env::VarError::NotPresent) => Ok(1),
        Err(env::VarError::NotUnicode(_)) => {
            Err(CliError::Config("TORLOG_THREADS is not valid UTF-8".into()))
        }
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(CliError::Config(format!(
                "TORLOG_THREADS must be a positive integer, got {raw:?}"
            ))),
        },
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))
}

fn ensure_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| {
        CliError::Config(format!(
            "output directory {} is not writable: {e}",
            dir.display()
        ))
    })
}

fn write_artifact(dir: &Path, name: &str, text: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| CliError::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })?;
    println!("wrote {}", path.display());
    Ok(())
}

enum MeasureInput {
    Discrete(DiscreteSphericalMeasure),
    General(GeneralMeasure),
}

/// Loads `--input` for solve and discretize. An existing file is parsed as
/// JSON: a `density` key (or `force_general`) sends it down the general
/// pipeline, a plain atom list makes a discrete measure. Anything else must
/// be a density spec string; its file references resolve against the working
/// directory.
fn load_measure_input(input: &str, force_general: bool) -> Result<MeasureInput, CliError> {
    let path = Path::new(input);
    if path.is_file() {
        let text = read_text(path)?;
        let doc: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: malformed JSON: {e}", path.display())))?;
        if doc.get("density").is_some() || force_general {
            return Ok(MeasureInput::General(io::general_measure_from_json(
                &text,
            )?));
        }
        return Ok(MeasureInput::Discrete(io::measure_from_json(&text)?));
    }
    let spec = io::parse_density_spec(input).map_err(|e| {
        CliError::Config(format!(
            "input {input:?} is neither an existing file nor a density spec ({e})"
        ))
    })?;
    let measure = match spec {
        io::DensitySpec::Constant(c) => GeneralMeasure::new(Some(Density::Constant(c)), vec![])?,
        io::DensitySpec::Cosine { base, amplitude } => {
            GeneralMeasure::new(Some(Density::Cosine { base, amplitude }), vec![])?
        }
        io::DensitySpec::Table(knots) => {
            GeneralMeasure::new(Some(Density::Table(knots)), vec![])?
        }
        io::DensitySpec::AtomsFile(p) => {
            io::general_measure_from_json(&read_text(Path::new(&p))?)?
        }
        io::DensitySpec::TableFile(p) => {
            let text = read_text(Path::new(&p))?;
            let knots: Vec<[f64; 2]> = serde_json::from_str(&text).map_err(|e| {
                CliError::Config(format!("{p}: expected [[angle, value], ...] pairs: {e}"))
            })?;
            GeneralMeasure::new(
                Some(Density::Table(
                    knots.into_iter().map(|[a, v]| (a, v)).collect(),
                )),
                vec![],
            )?
        }
    };
    Ok(MeasureInput::General(measure))
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out)?;
    let opts = SolveOptions {
        mesh_level: args.level,
        extrapolate: args.extrapolate,
        max_outer: args.max_outer,
        residual_tol: args.tol,
        target: args.target.into(),
        seed: args.seed,
        ..SolveOptions::default()
    };
    match load_measure_input(&args.input, args.schedule.is_some())? {
        MeasureInput::Discrete(mu) => match solve_discrete(&mu, &opts) {
            Ok(report) => {
                write_solve_artifacts(&args.out, &report, args.plot, args.level)?;
                print_solve_summary(&report, args.tol);
                Ok(())
            }
            // the iteration cap leaves a best-effort report; keep its
            // artifacts around for inspection before failing
            Err(torlog::Error::MaxIterations { report }) => {
                write_solve_artifacts(&args.out, &report, args.plot, args.level)?;
                print_solve_summary(&report, args.tol);
                Err(CliError::Lib(torlog::Error::MaxIterations { report }))
            }
            Err(e) => Err(e.into()),
        },
        MeasureInput::General(mu) => {
            let schedule_text = args.schedule.as_deref().ok_or_else(|| {
                CliError::Config(
                    "general measures need --schedule j1,j2,... for the discretization stages"
                        .into(),
                )
            })?;
            let schedule = io::parse_schedule(schedule_text)?;
            let run = approximate_solve(&mu, &schedule, &opts)?;
            write_artifact(&args.out, "stages.json", &stages_json(&run))?;
            if run.diagnostics.smi_warning {
                if let Some(smi) = &run.diagnostics.smi {
                    println!(
                        "warning: atom mass concentrates near a line (worst ratio {:.3})",
                        smi.worst_ratio
                    );
                }
            }
            let last = run.stages.last().expect("schedule is non-empty");
            match &last.report {
                Some(report) => {
                    write_solve_artifacts(&args.out, report, args.plot, args.level)?;
                    print_solve_summary(report, args.tol);
                    if report.converged {
                        Ok(())
                    } else {
                        Err(CliError::StageFailed(format!(
                            "final stage j = {} stopped at residual {:.3e} above tolerance {:.3e}",
                            last.j, report.residual, args.tol
                        )))
                    }
                }
                None => Err(CliError::StageFailed(format!(
                    "final stage j = {} failed: {}",
                    last.j,
                    last.error.as_deref().unwrap_or("no report produced")
                ))),
            }
        }
    }
}

fn write_solve_artifacts(
    out: &Path,
    report: &SolveReport,
    plot: bool,
    level: u32,
) -> Result<(), CliError> {
    write_artifact(out, "polygon.json", &io::polygon_to_json(&report.polygon))?;
    write_artifact(out, "report.json", &io::report_to_json(report))?;
    write_artifact(out, "trace.csv", &io::trace_csv(&report.objective_trace))?;
    if plot {
        // arrows need the cone measure of the final body: one more forward
        // solve at the working level
        let sol = solve_torsion(build_mesh(&report.polygon, level))?;
        let g = facet_torsion_measure(&sol, &report.polygon)?.g_tor;
        write_artifact(out, "polygon.svg", &svg::polygon_plot(&report.polygon, &g))?;
    }
    Ok(())
}

fn print_solve_summary(report: &SolveReport, tol: f64) {
    let status = if report.converged {
        "converged"
    } else {
        "not converged"
    };
    println!(
        "{status}: residual {:.3e} (tolerance {tol:.3e}) after {} outer iterations, T = {:.12}",
        report.residual, report.iterations, report.t_final
    );
    for w in &report.warnings {
        println!("warning: {w}");
    }
}

fn stages_json(run: &ApproximationRun) -> String {
    let stages: Vec<serde_json::Value> = run
        .stages
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let hausdorff = if i == 0 {
                None
            } else {
                run.diagnostics.consecutive_hausdorff.get(i - 1).copied().flatten()
            };
            json!({
                "j": s.j,
                "converged": s.report.as_ref().map(|r| r.converged),
                "iterations": s.report.as_ref().map(|r| r.iterations),
                "residual": run.diagnostics.residuals[i],
                "outer_radius": run.diagnostics.outer_radii[i],
                "hausdorff_from_previous": hausdorff,
                "error": s.error,
            })
        })
        .collect();
    let smi = run.diagnostics.smi.as_ref().map(|r| {
        json!({
            "pass": r.pass,
            "worst_ratio": r.worst_ratio,
            "witness_angle": r.witness.map(|d| d.angle()),
        })
    });
    let doc = json!({
        "stages": stages,
        "subspace_mass": smi,
        "subspace_mass_warning": run.diagnostics.smi_warning,
    });
    serde_json::to_string_pretty(&doc).expect("stage serialization cannot fail")
}

fn cmd_forward(args: ForwardArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out)?;
    let poly = io::polygon_from_json(&read_text(&args.input)?)?;
    let (t, mu, order, nodes) = if args.extrapolate {
        if args.level < 2 {
            return Err(CliError::Config(
                "--extrapolate runs levels level-2..level, so --level must be at least 2".into(),
            ));
        }
        let study = refine_and_extrapolate(&poly, &[args.level - 2, args.level - 1, args.level])?;
        write_artifact(
            &args.out,
            "convergence.csv",
            &io::convergence_table_csv(&study.table),
        )?;
        let nodes = study.table.last().map_or(0, |r| r.nodes);
        (study.t, study.mu_tor, Some(study.order), nodes)
    } else {
        let sol = solve_torsion(build_mesh(&poly, args.level))?;
        let fm = facet_torsion_measure(&sol, &poly)?;
        (sol.t, fm.mu_tor, None, sol.mesh.nodes.len())
    };
    let g: Vec<f64> = poly
        .supports()
        .iter()
        .zip(&mu)
        .map(|(h, m)| h * m / 4.0)
        .collect();
    let identity_gap = (t - g.iter().sum::<f64>()).abs() / t;

    let doc = json!({
        "t": t,
        "level": args.level,
        "extrapolated": args.extrapolate,
        "order": order,
        "nodes": nodes,
        "mu_tor": mu,
        "g_tor": g,
        "identity_gap": identity_gap,
    });
    write_artifact(
        &args.out,
        "forward.json",
        &serde_json::to_string_pretty(&doc).expect("forward serialization cannot fail"),
    )?;
    write_artifact(&args.out, "facets.csv", &facets_csv(&poly, &mu, &g))?;
    if args.plot {
        write_artifact(&args.out, "polygon.svg", &svg::polygon_plot(&poly, &g))?;
    }
    println!(
        "T = {t:.12} at level {}{}, identity gap {identity_gap:.3e}",
        args.level,
        if args.extrapolate {
            " (extrapolated)"
        } else {
            ""
        }
    );
    Ok(())
}

fn facets_csv(poly: &Polygon, mu: &[f64], g: &[f64]) -> String {
    let mut out = String::from("facet,nx,ny,support,length,mu_tor,g_tor\n");
    for (k, d) in poly.directions().iter().enumerate() {
        out.push_str(&format!(
            "{k},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e},{:.17e}\n",
            d.x(),
            d.y(),
            poly.supports()[k],
            poly.facets()[k].length,
            mu[k],
            g[k]
        ));
    }
    out
}

fn cmd_discretize(args: DiscretizeArgs) -> Result<(), CliError> {
    ensure_out_dir(&args.out)?;
    let measure = match load_measure_input(&args.input, true)? {
        MeasureInput::General(m) => m,
        MeasureInput::Discrete(_) => unreachable!("force_general loads made general measures"),
    };
    let schedule = io::parse_schedule(&args.schedule)?;
    for j in schedule {
        let result = discretize(&measure, j, args.seed)?;
        write_artifact(
            &args.out,
            &format!("discretization_{j}.json"),
            &discretization_json(&result),
        )?;
    }
    Ok(())
}

fn discretization_json(d: &DiscretizationResult) -> String {
    let doc = json!({
        "j": d.j,
        "arcs": d
            .arcs
            .iter()
            .map(|a| json!({"start": a.start, "end": a.end}))
            .collect::<Vec<_>>(),
        "dirs": d.dirs.iter().map(|dir| dir.as_array()).collect::<Vec<_>>(),
        "raw": measure_value(&d.raw),
        "normalized": measure_value(&d.normalized),
    });
    serde_json::to_string_pretty(&doc).expect("discretization serialization cannot fail")
}

fn measure_value(m: &DiscreteSphericalMeasure) -> serde_json::Value {
    json!({
        "atoms": m
            .atoms()
            .iter()
            .map(|a| json!({"dir": a.direction.as_array(), "weight": a.weight}))
            .collect::<Vec<_>>()
    })
}

fn cmd_validate() -> Result<(), CliError> {
    let results = checks::run_all();
    let width = results.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut failed = 0usize;
    for c in &results {
        let status = if c.pass { "PASS" } else { "FAIL" };
        println!("{:width$}  {status}  {}", c.name, c.detail);
        if !c.pass {
            failed += 1;
        }
    }
    println!("{} checks, {failed} failed", results.len());
    if failed > 0 {
        Err(CliError::ChecksFailed(failed))
    } else {
        Ok(())
    }
}

fn cmd_bench() -> Result<(), CliError> {
    let pentagon = torlog::fixtures::pentagon();
    println!("level    nodes    mesh_ms    solve_ms    T");
    for level in 2..=5 {
        let start = Instant::now();
        let mesh = build_mesh(&pentagon, level);
        let mesh_ms = start.elapsed().as_secs_f64() * 1e3;
        let nodes = mesh.nodes.len();
        let start = Instant::now();
        let sol = solve_torsion(mesh)?;
        let solve_ms = start.elapsed().as_secs_f64() * 1e3;
        println!(
            "{level:>5} {nodes:>8} {mesh_ms:>10.2} {solve_ms:>11.2}    {:.12}",
            sol.t
        );
    }
    Ok(())
}
