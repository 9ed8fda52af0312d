//! `varsep-mor`: runs the model-reduction solvers and benchmark studies from
//! config files and writes CSV/VTK artifacts.
//!
//! Exit status: 0 on success, 1 when a solver fails, 2 on a config error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use varsep::experiments::{self as ex, ExperimentConfig};
use varsep::Error;

#[derive(Parser)]
#[command(name = "varsep-mor", version, about = "Separated-variable model reduction for 2D advection-diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Experiment file ([experiment], [solver] and a problem).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Reference grid four times finer per axis.
    #[arg(long)]
    full_reference: bool,
    /// Seed for the random parameter draws.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Full-order Q1 finite-element solve.
    SolveFe(Common),
    /// HiMod solve with a sine modal basis.
    SolveHimod(Common),
    /// PGD with fixed or adaptive mode count.
    SolvePgd(Common),
    /// PGD with the diffusivity as an extra coordinate.
    SolvePgdParam(Common),
    /// HiPOD offline phase: snapshots and POD basis.
    HipodOffline(Common),
    /// HiPOD online query at [solver] mu using the stored basis.
    HipodOnline(Common),
    /// HiMod and PGD against the FE reference.
    Fig1(Common),
    /// PGD tolerance sweep.
    Table1(Common),
    /// Parametric PGD against FE at several mu.
    Fig2(Common),
    /// HiPOD error table and speedup.
    Fig3(Common),
}

fn load(c: &Common) -> varsep::Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(out) = &c.out {
        cfg.out_dir = out.clone();
    }
    if c.full_reference {
        cfg.use_full_reference();
    }
    if let Some(seed) = c.seed {
        cfg.solver.seed = seed;
    }
    Ok(cfg)
}

fn run(command: &Command) -> varsep::Result<()> {
    use Command::*;
    let (SolveFe(c) | SolveHimod(c) | SolvePgd(c) | SolvePgdParam(c) | HipodOffline(c) | HipodOnline(c) | Fig1(c)
    | Table1(c) | Fig2(c) | Fig3(c)) = command;
    let cfg = load(c)?;
    let manifest = match command {
        SolveFe(_) => ex::run_solve_fe(&cfg)?.1,
        SolveHimod(_) => ex::run_solve_himod(&cfg)?.1,
        SolvePgd(_) => {
            let (sol, m) = ex::run_solve_pgd(&cfg)?;
            println!("modes {}", sol.m());
            m
        }
        SolvePgdParam(_) => {
            let (sol, m) = ex::run_solve_pgd_param(&cfg)?;
            println!("modes {}", sol.modes.len());
            m
        }
        HipodOffline(_) => {
            let (pod, m) = ex::run_hipod_offline(&cfg)?;
            println!("l {}", pod.l);
            m
        }
        HipodOnline(_) => ex::run_hipod_online(&cfg)?.1,
        Fig1(_) => {
            let (r, m) = ex::run_fig1_compare(&cfg)?;
            println!("himod error {:.6e}", r.himod_error);
            println!("pgd error {:.6e} ({} modes)", r.pgd_error, r.pgd_modes);
            m
        }
        Table1(_) => {
            let (cells, m) = ex::run_table1_sweep(&cfg)?;
            for c in &cells {
                match (&c.m, &c.failure) {
                    (Some(modes), _) => println!("tol_e {:e} tol_fp {:e}: m {modes} iterations {:?}", c.tol_e, c.tol_fp, c.fp_iterations),
                    (None, Some(f)) => println!("tol_e {:e} tol_fp {:e}: failed ({f})", c.tol_e, c.tol_fp),
                    (None, None) => unreachable!(),
                }
            }
            m
        }
        Fig2(_) => {
            let (r, m) = ex::run_fig2_param(&cfg)?;
            for (mu, e) in &r.errors {
                println!("mu {mu}: error {e:.6e}");
            }
            m
        }
        Fig3(_) => {
            let (r, m) = ex::run_fig3_hipod(&cfg)?;
            println!("l {} (keep {}, first-below {})", r.pod.l, r.l_keep, r.l_first_below);
            for row in &r.table {
                let at = row.mu_star.map_or("random".to_string(), |mu| mu.to_string());
                println!("l {} mu {at}: error {:.6e}", row.l, row.relative_error);
            }
            println!("speedup {:.1}", r.speedup.speedup);
            m
        }
    };
    println!("wrote {} files to {}", manifest.files.len(), cfg.out_dir.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::Config { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
