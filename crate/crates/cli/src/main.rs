//! Command-line front end: solve → continue → prove → render as
//! reproducible batch runs.
//!
//! Exit codes: 0 success (for `prove`: certified), 1 runtime failure,
//! 2 bounds computed but no negative radius, 3 proof precondition failure
//! (truncation condition / injectivity / tail sign), 64 usage or
//! configuration error.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use boussinesq::certify::verify_certificate;
use boussinesq::pipeline::{prove_file, ProveCfg};
use boussinesq::problem::energy;
use boussinesq::render::{eval_grid, write_grid_csv};
use boussinesq::solver::{
    continue_branch, newton_augmented, seed_branch, write_manifest, AugmentedSystem,
    BranchEntry, ContinueCfg, NewtonCfg,
};
use boussinesq::space::files::{read_solution, write_solution};
use boussinesq::space::{MultiIndex, Params};
use config::{ConfigMap, IndexPair};

const USAGE_EXIT: u8 = 64;

#[derive(Parser)]
#[command(
    name = "boussinesq",
    about = "Periodic orbits of the ill-posed Boussinesq equation, with rigorous existence certificates",
    version
)]
struct Cli {
    /// Worker threads for the parallel kernels (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seed an orbit near a bifurcation and converge it with Newton.
    Solve(SolveArgs),
    /// Continue a branch of orbits in lambda, writing one solution file per
    /// accepted step plus a manifest.
    Continue(ContinueArgs),
    /// Rigorously certify the orbit in a solution file and write a proof
    /// certificate.
    Prove(ProveArgs),
    /// Sample an orbit on a space-time grid as CSV.
    Render(RenderArgs),
    /// Re-check a certificate against its solution file.
    VerifyCert(VerifyArgs),
}

#[derive(Args)]
struct CommonSolveArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dispersion coefficient λ.
    #[arg(long)]
    lambda: Option<f64>,
    /// Temporal frequency scale L (time period 2π/L).
    #[arg(long)]
    l: Option<f64>,
    /// Norm decay rate ν.
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    /// Seed mode `k1,k2`.
    #[arg(long)]
    seed_mode: Option<IndexPair>,
    /// Seed amplitude (default: leading-order balance; 0 gives the trivial
    /// solution).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Energy level of the augmented system (default: energy of the seed).
    #[arg(long)]
    e_target: Option<f64>,
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonSolveArgs,
    /// Output solution file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ContinueArgs {
    #[command(flatten)]
    common: CommonSolveArgs,
    /// Start from an existing solution file instead of seeding.
    #[arg(long)]
    from: Option<PathBuf>,
    /// Continuation target λ.
    #[arg(long)]
    lambda_end: Option<f64>,
    /// Initial λ step.
    #[arg(long)]
    dlambda: Option<f64>,
    /// Smallest λ step before giving up.
    #[arg(long)]
    dlambda_min: Option<f64>,
    /// Output directory for solution files and the manifest.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write only every Nth accepted step (the endpoint is always written).
    #[arg(long)]
    keep_every: Option<usize>,
}

#[derive(Args)]
struct ProveArgs {
    /// Solution file to certify.
    solution: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Certificate output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Certify at a larger truncation than stored (upward only).
    #[arg(long)]
    m1: Option<usize>,
    #[arg(long)]
    m2: Option<usize>,
    #[arg(long)]
    newton_tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// Trailing-coefficient relative mass that triggers truncation growth.
    #[arg(long)]
    border_tol: Option<f64>,
}

#[derive(Args)]
struct RenderArgs {
    /// Solution file to sample.
    solution: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Temporal samples.
    #[arg(long)]
    nt: Option<usize>,
    /// Spatial samples.
    #[arg(long)]
    ny: Option<usize>,
}

#[derive(Args)]
struct VerifyArgs {
    certificate: PathBuf,
    solution: PathBuf,
    /// Recompute all bounds and require them to reproduce the stored ones.
    #[arg(long)]
    full: bool,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Failure {
        Failure {
            code: USAGE_EXIT,
            message: message.into(),
        }
    }
    fn runtime(message: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version go to stdout with success; real usage errors get 64
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(USAGE_EXIT);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("boussinesq: cannot configure {n} threads: {e}");
            return ExitCode::from(USAGE_EXIT);
        }
    }
    let result = match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Continue(args) => cmd_continue(args),
        Command::Prove(args) => cmd_prove(args),
        Command::Render(args) => cmd_render(args),
        Command::VerifyCert(args) => cmd_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("boussinesq: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ConfigMap, Failure> {
    match path {
        Some(p) => ConfigMap::load(p).map_err(|e| Failure::usage(e.to_string())),
        None => Ok(ConfigMap::empty()),
    }
}

struct SolveSetup {
    params: Params,
    seed_mode: MultiIndex,
    amplitude: Option<f64>,
    e_target: Option<f64>,
    newton: NewtonCfg,
}

fn solve_setup(cfg: &ConfigMap, args: &CommonSolveArgs) -> Result<SolveSetup, Failure> {
    let usage = |e: config::ConfigError| Failure::usage(e.to_string());
    let params = Params {
        lambda: cfg.resolve("lambda", args.lambda, 0.1446).map_err(usage)?,
        l: cfg
            .resolve("l", args.l, 2.0 * std::f64::consts::PI)
            .map_err(usage)?,
        nu: cfg.resolve("nu", args.nu, 1.01).map_err(usage)?,
        m1: cfg.resolve("m1", args.m1, 35).map_err(usage)?,
        m2: cfg.resolve("m2", args.m2, 35).map_err(usage)?,
    };
    params
        .validate()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let mode = cfg
        .resolve("seed_mode", args.seed_mode, IndexPair(0, 1))
        .map_err(usage)?;
    let seed_mode = MultiIndex::new(mode.0, mode.1);
    if !seed_mode.in_quarter() || !params.trunc().contains(seed_mode) {
        return Err(Failure::usage(format!(
            "seed mode {seed_mode:?} is outside the stored truncation"
        )));
    }
    let newton = NewtonCfg {
        tol: cfg
            .resolve("newton_tol", args.newton_tol, NewtonCfg::default().tol)
            .map_err(usage)?,
        max_iter: cfg
            .resolve("max_iter", args.max_iter, NewtonCfg::default().max_iter)
            .map_err(usage)?,
    };
    Ok(SolveSetup {
        params,
        seed_mode,
        amplitude: cfg
            .resolve_opt("amplitude", args.amplitude)
            .map_err(usage)?,
        e_target: cfg.resolve_opt("e_target", args.e_target).map_err(usage)?,
        newton,
    })
}

fn solve_entry(setup: &SolveSetup) -> Result<BranchEntry, Failure> {
    let seed = seed_branch(setup.seed_mode, &setup.params, setup.amplitude);
    let e_target = setup.e_target.unwrap_or_else(|| energy(&seed, &setup.params));
    let sys = AugmentedSystem {
        params: setup.params,
        e_target,
    };
    let (x, diag) = newton_augmented(&sys, seed, &setup.newton)
        .map_err(|e| Failure::runtime(format!("newton failed: {e}")))?;
    eprintln!(
        "converged at lambda = {} in {} iterations (residual {:.3e})",
        setup.params.lambda, diag.iterations, diag.residual_inf
    );
    Ok(BranchEntry::from_converged(setup.params, x, e_target, &diag))
}

fn cmd_solve(args: SolveArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.common.config)?;
    let setup = solve_setup(&cfg, &args.common)?;
    let out = cfg
        .resolve_path("out", args.out)
        .ok_or_else(|| Failure::usage("missing --out solution path"))?;
    cfg.ensure_consumed()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let entry = solve_entry(&setup)?;
    write_solution(&out, &entry.params, &entry.x)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_continue(args: ContinueArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.common.config)?;
    let usage = |e: config::ConfigError| Failure::usage(e.to_string());
    let out_dir = cfg
        .resolve_path("out_dir", args.out_dir)
        .ok_or_else(|| Failure::usage("missing --out-dir"))?;
    let lambda_end: f64 = cfg
        .resolve_opt("lambda_end", args.lambda_end)
        .map_err(usage)?
        .ok_or_else(|| Failure::usage("missing --lambda-end"))?;
    let from = cfg.resolve_path("from", args.from.clone());
    let keep_every = cfg
        .resolve("keep_every", args.keep_every, 1usize)
        .map_err(usage)?
        .max(1);

    // resolves and validates the seed keys even when --from supersedes them,
    // so unknown-key checking stays exact
    let setup = solve_setup(&cfg, &args.common)?;
    let start = match from {
        Some(path) => {
            let (params, x) = read_solution(&path).map_err(|e| Failure::runtime(e.to_string()))?;
            let e_target = energy(&x, &params);
            let norm = x.norm_nu(params.nu);
            let resid = boussinesq::problem::residual(&x, &params, params.trunc())
                .into_iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            BranchEntry {
                e_target,
                residual_inf: resid,
                norm_nu: norm,
                energy: e_target,
                params,
                x,
            }
        }
        None => solve_entry(&setup)?,
    };
    let newton = NewtonCfg {
        tol: cfg
            .resolve("newton_tol", args.common.newton_tol, NewtonCfg::default().tol)
            .map_err(usage)?,
        max_iter: cfg
            .resolve(
                "max_iter",
                args.common.max_iter,
                NewtonCfg::default().max_iter,
            )
            .map_err(usage)?,
    };
    let ccfg = ContinueCfg {
        dlambda: cfg
            .resolve("dlambda", args.dlambda, ContinueCfg::default().dlambda)
            .map_err(usage)?,
        dlambda_min: cfg
            .resolve(
                "dlambda_min",
                args.dlambda_min,
                ContinueCfg::default().dlambda_min,
            )
            .map_err(usage)?,
        newton,
        nontrivial_floor: ContinueCfg::default().nontrivial_floor,
    };
    cfg.ensure_consumed()
        .map_err(|e| Failure::usage(e.to_string()))?;

    std::fs::create_dir_all(&out_dir)
        .map_err(|e| Failure::runtime(format!("cannot create {}: {e}", out_dir.display())))?;

    let (branch, failure) = match continue_branch(start, lambda_end, &ccfg) {
        Ok(b) => (b, None),
        Err(f) => (f.partial, Some(f.source)),
    };
    let total = branch.entries.len();
    let mut rows = Vec::new();
    for (i, entry) in branch.entries.iter().enumerate() {
        if i % keep_every != 0 && i != total - 1 {
            continue;
        }
        let name = format!("sol_{i:05}.txt");
        write_solution(&out_dir.join(&name), &entry.params, &entry.x)
            .map_err(|e| Failure::runtime(e.to_string()))?;
        rows.push((entry.params.lambda, entry.energy, entry.norm_nu, name));
    }
    write_manifest(&out_dir.join("manifest.txt"), &rows)
        .map_err(|e| Failure::runtime(e.to_string()))?;
    println!(
        "wrote {} of {} entries to {} (lambda {} .. {})",
        rows.len(),
        total,
        out_dir.display(),
        branch.entries.first().map(|e| e.params.lambda).unwrap_or(f64::NAN),
        branch.entries.last().map(|e| e.params.lambda).unwrap_or(f64::NAN),
    );
    match failure {
        Some(e) => Err(Failure::runtime(format!(
            "continuation stopped early: {e} (partial manifest preserved)"
        ))),
        None => Ok(()),
    }
}

fn cmd_prove(args: ProveArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let usage = |e: config::ConfigError| Failure::usage(e.to_string());
    let out = cfg
        .resolve_path("out", args.out)
        .unwrap_or_else(|| args.solution.with_extension("cert.txt"));
    let m1 = cfg.resolve_opt("m1", args.m1).map_err(usage)?;
    let m2 = cfg.resolve_opt("m2", args.m2).map_err(usage)?;
    let m_override = match (m1, m2) {
        (None, None) => None,
        (Some(a), Some(b)) => Some((a, b)),
        (Some(a), None) => Some((a, a)),
        (None, Some(b)) => Some((b, b)),
    };
    let mut prove_cfg = ProveCfg {
        m_override,
        newton: NewtonCfg {
            tol: cfg
                .resolve("newton_tol", args.newton_tol, NewtonCfg::default().tol)
                .map_err(usage)?,
            max_iter: cfg
                .resolve("max_iter", args.max_iter, NewtonCfg::default().max_iter)
                .map_err(usage)?,
        },
        border_tol: cfg
            .resolve("border_tol", args.border_tol, ProveCfg::default().border_tol)
            .map_err(usage)?,
        ..ProveCfg::default()
    };
    prove_cfg.config_echo = cfg.entries();
    cfg.ensure_consumed()
        .map_err(|e| Failure::usage(e.to_string()))?;

    match prove_file(&args.solution, &out, &prove_cfg) {
        Ok(artifacts) => {
            let c = &artifacts.certificate;
            println!(
                "certified: lambda = {}, m = ({}, {}), r = {:.6e}",
                c.params.lambda, c.params.m1, c.params.m2, c.r_star
            );
            println!(
                "  Y <= {:.6e}  Z0 <= {:.6e}  Z1 <= {:.6e}  Z2 <= {:.6e}",
                c.bounds.y.hi(),
                c.bounds.z0.hi(),
                c.bounds.z1.hi(),
                c.bounds.z2.hi()
            );
            println!(
                "  C0/L2 error bounds: {:.6e} (= 4r), wall time {:.2}s",
                c.c0_error, c.wall_time_secs
            );
            if artifacts.solution_used != args.solution {
                println!(
                    "certified a refined candidate: {}",
                    artifacts.solution_used.display()
                );
            }
            println!("wrote {}", out.display());
            Ok(())
        }
        Err(e) => Err(Failure {
            code: e.exit_code().clamp(0, 255) as u8,
            message: e.to_string(),
        }),
    }
}

fn cmd_render(args: RenderArgs) -> Result<(), Failure> {
    let cfg = load_config(&args.config)?;
    let usage = |e: config::ConfigError| Failure::usage(e.to_string());
    let nt = cfg.resolve("nt", args.nt, 64usize).map_err(usage)?;
    let ny = cfg.resolve("ny", args.ny, 64usize).map_err(usage)?;
    let out = cfg
        .resolve_path("out", args.out)
        .unwrap_or_else(|| args.solution.with_extension("csv"));
    cfg.ensure_consumed()
        .map_err(|e| Failure::usage(e.to_string()))?;
    if nt < 2 || ny < 2 {
        return Err(Failure::usage("grid needs nt >= 2 and ny >= 2"));
    }
    let (params, x) = read_solution(&args.solution).map_err(|e| Failure::runtime(e.to_string()))?;
    let grid = eval_grid(&x, &params, nt, ny);
    write_grid_csv(&out, &grid).map_err(|e| Failure::runtime(e.to_string()))?;
    println!("wrote {}", out.display());
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    match verify_certificate(&args.certificate, &args.solution, args.full) {
        Ok(()) => {
            println!(
                "certificate {} verifies against {}",
                args.certificate.display(),
                args.solution.display()
            );
            Ok(())
        }
        Err(e) => Err(Failure::runtime(e.to_string())),
    }
}
