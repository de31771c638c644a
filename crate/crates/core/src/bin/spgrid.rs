use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use spgrid::bench::{self, Algorithm, Format, Metric, ReportConfig};
use spgrid::mesh::{Mesh, MeshSpec};
use spgrid::problem::AnyProblem;
use spgrid::quasi::{self, NewtonConfig};
use spgrid::twogrid::{self, TwoGridPlan};
use spgrid::{Error, FluxForm, LayerSides, MeshFamily, ProblemId};

#[derive(Parser)]
#[command(
    name = "spgrid",
    version,
    about = "Layer-adapted meshes and two-grid solvers for singularly perturbed problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem on one mesh.
    Solve(SolveArgs),
    /// Error/order table over eps and N.
    Table(TableArgs),
    /// Share of mesh points inside the boundary layers.
    Layers(LayersArgs),
    /// Wall time of the direct fine solve against Algorithm 1.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct MeshArgs {
    /// Layer parameter of the graded meshes.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 0.4)]
    q: f64,
    /// Shishkin stability constant.
    #[arg(long, default_value_t = 1.0)]
    gamma0: f64,
    /// `both` or `left_only`.
    #[arg(long, default_value = "both")]
    layer_sides: LayerSides,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long)]
    problem: ProblemId,
    #[arg(long)]
    mesh: MeshFamily,
    #[arg(long)]
    eps: f64,
    /// Intervals of the (finest) mesh.
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    params: MeshArgs,
    #[arg(long, default_value = "direct")]
    algorithm: Algorithm,
    /// Coarse intervals for the two-grid algorithms.
    #[arg(long)]
    coarse: Option<usize>,
    /// Fine size `round(N^r)` for tg1 when --n is absent.
    #[arg(long)]
    r: Option<f64>,
    /// Fine levels for tg2.
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[arg(long)]
    flux: Option<FluxForm>,
    #[arg(long, default_value = "json")]
    out: SolveOutput,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum SolveOutput {
    Json,
    Nodes,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    problem: ProblemId,
    /// One or more families, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    mesh: Vec<MeshFamily>,
    #[arg(long, value_delimiter = ',', required = true)]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    coarse: Vec<usize>,
    #[arg(long, default_value = "tg1")]
    algorithm: Algorithm,
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 2)]
    levels: usize,
    #[command(flatten)]
    params: MeshArgs,
    #[arg(long)]
    flux: Option<FluxForm>,
    #[arg(long, default_value = "markdown")]
    format: Format,
    #[arg(long, default_value = "nodal")]
    metric: Metric,
    /// Newton stopping tolerance on the update.
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
}

#[derive(Args)]
struct LayersArgs {
    #[arg(long, default_value_t = 1.0 / 256.0)]
    eps: f64,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    coarse: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "64,256,1024,4096")]
    fine: Vec<usize>,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "shishkin,vulanovic,bakhvalov"
    )]
    mesh: Vec<MeshFamily>,
    #[command(flatten)]
    params: MeshArgs,
    /// Separate `a` for the Bakhvalov mesh.
    #[arg(long, default_value_t = 4.0)]
    bakhvalov_a: f64,
    #[arg(long, default_value = "markdown")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value = "ex1")]
    problem: ProblemId,
    #[arg(long, default_value = "bakhvalov")]
    mesh: MeshFamily,
    #[arg(long, default_value_t = 1e-2)]
    eps: f64,
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    coarse: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[command(flatten)]
    params: MeshArgs,
    #[arg(long, default_value = "markdown")]
    format: Format,
}

/// 2 for bad input, 3 for failures inside a solve.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Validation(_)
        | Error::DegenerateMesh { .. }
        | Error::NoRoot
        | Error::MissingExact
        | Error::Domain(_)
        | Error::MemoryBudget { .. } => 2,
        _ => 3,
    }
}

fn spec(family: MeshFamily, eps: f64, p: &MeshArgs) -> MeshSpec<f64> {
    MeshSpec::new(family, eps, 0)
        .with_aq(p.a, p.q)
        .with_gamma0(p.gamma0)
        .with_layer_sides(p.layer_sides)
}

fn build_problem(
    id: ProblemId,
    eps: f64,
    flux: Option<FluxForm>,
) -> Result<AnyProblem<f64>, Error> {
    Ok(match (id.build(eps)?, flux) {
        (AnyProblem::Diffusion(p), Some(f)) => AnyProblem::Diffusion(p.with_flux(f)?),
        (p, _) => p,
    })
}

fn solve(args: SolveArgs) -> Result<(), Error> {
    let problem = build_problem(args.problem, args.eps, args.flux)?;
    let spec = spec(args.mesh, args.eps, &args.params);
    let cfg = NewtonConfig::default();
    let exact = problem.exact().cloned();
    let error_of = |mesh: &Mesh<f64>, y: &[f64]| {
        exact
            .as_ref()
            .and_then(|u| bench::nodal_error(mesh, y, Some(&**u)).ok())
    };

    let (mesh, y, steps) = match args.algorithm {
        Algorithm::Direct => {
            let n = args
                .n
                .ok_or_else(|| Error::Validation("direct solve needs --n".into()))?;
            let mesh = Mesh::build(&spec.with_n(n))?;
            let out = quasi::solve(&mesh, &problem, &cfg)?;
            let step = json!({
                "step": 1, "n": n, "iterations": out.iterations, "final_update": out.final_update,
                "residual": out.residual, "seconds": out.wall_time, "error": error_of(&mesh, &out.y),
            });
            (mesh, out.y, vec![step])
        }
        alg => {
            let coarse = args
                .coarse
                .ok_or_else(|| Error::Validation("two-grid algorithms need --coarse".into()))?;
            let plan = match alg {
                Algorithm::Tg1 => match (args.n, args.r) {
                    (Some(n), _) => TwoGridPlan {
                        fine: n,
                        ..TwoGridPlan::squared(spec, coarse)
                    },
                    (None, r) => TwoGridPlan::with_exponent(spec, coarse, r.unwrap_or(2.0)),
                },
                Algorithm::Tg1Ropt => {
                    let (_, fine) = twogrid::choose_r(coarse)?;
                    TwoGridPlan {
                        fine,
                        ..TwoGridPlan::squared(spec, coarse)
                    }
                }
                _ => TwoGridPlan::cascade(spec, coarse, args.levels),
            };
            let res = twogrid::run(&problem, &plan, &cfg)?;
            let mut steps = vec![json!({
                "step": 1, "n": coarse, "iterations": res.coarse.iterations,
                "final_update": res.coarse.final_update, "residual": res.coarse.residual,
                "seconds": res.coarse_seconds, "error": error_of(&res.coarse_mesh, &res.coarse.y),
            })];
            for (k, level) in res.levels.iter().enumerate() {
                steps.push(json!({
                    "step": k + 2, "n": level.mesh.n(), "iterations": level.outcome.iterations,
                    "residual": level.outcome.residual, "seconds": level.seconds,
                    "error": error_of(&level.mesh, &level.outcome.y),
                }));
            }
            let (mesh, y) = res.finest();
            (mesh.clone(), y.to_vec(), steps)
        }
    };

    match args.out {
        SolveOutput::Nodes => print!("{}", mesh.to_listing()),
        SolveOutput::Json => {
            let out = json!({
                "problem": args.problem,
                "mesh": mesh.spec(),
                "algorithm": args.algorithm,
                "fallback": mesh.fallback().map(|e| e.to_string()),
                "steps": steps,
                "x": mesh.nodes(),
                "y": y,
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&out).expect("json values are finite")
            );
        }
    }
    Ok(())
}

fn table(args: TableArgs) -> Result<bool, Error> {
    let meshes = args
        .mesh
        .iter()
        .map(|&f| spec(f, args.eps[0], &args.params))
        .collect();
    let cfg = ReportConfig {
        meshes,
        r: args.r,
        levels: args.levels,
        metric: args.metric,
        flux: args.flux,
        tol: args.tol,
        max_iter: args.max_iter,
        ..ReportConfig::new(
            args.problem,
            spec(args.mesh[0], args.eps[0], &args.params),
            args.eps,
            args.coarse,
            args.algorithm,
        )
    };
    let report = bench::run_report(&cfg)?;
    print!("{}", bench::render(&report, args.format)?);
    for f in &report.failures {
        eprintln!(
            "cell failed: {} eps={:e} N={}: {}",
            f.mesh, f.eps, f.coarse, f.message
        );
    }
    Ok(report.has_failures())
}

fn layers(args: LayersArgs) -> Result<(), Error> {
    let specs: Vec<_> = args
        .mesh
        .iter()
        .map(|&f| {
            let s = spec(f, args.eps, &args.params);
            if f == MeshFamily::Bakhvalov {
                s.with_aq(args.bakhvalov_a, args.params.q)
            } else {
                s
            }
        })
        .collect();
    let t = bench::layer_report(args.eps, &specs, &args.coarse, &args.fine)?;
    match args.format {
        Format::Markdown => print!("{}", t.to_markdown()),
        Format::Csv => print!("{}", t.to_csv()),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&t).expect("json values are finite")
        ),
    }
    Ok(())
}

fn bench_cmd(args: BenchArgs) -> Result<(), Error> {
    let problem = args.problem.build(args.eps)?;
    let rows = bench::timing_comparison(
        &problem,
        spec(args.mesh, args.eps, &args.params),
        &args.coarse,
        args.repeats,
    )?;
    match args.format {
        Format::Markdown => print!("{}", bench::timing_markdown(&rows)),
        Format::Csv => print!("{}", bench::timing_csv(&rows)),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&rows).expect("json values are finite")
        ),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(a) => solve(a).map(|_| false),
        Command::Table(a) => table(a),
        Command::Layers(a) => layers(a).map(|_| false),
        Command::Bench(a) => bench_cmd(a).map(|_| false),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
