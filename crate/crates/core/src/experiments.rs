//! Experiment runners: config loading, the four benchmark studies and the
//! single-solver commands, each writing CSV/VTK artifacts plus a run manifest.
//!
//! An experiment file names the experiment, points at a problem file (or
//! carries the problem sections inline) and overrides solver defaults:
//!
//! ```text
//! [experiment]
//! name = fig1-compare
//! problem = two_gaussian.ini
//! out = out/fig1
//! [solver]
//! himod_m = 9
//! ```

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::fe::{fe2d_solve_with, relative_l2_error, Field2D, Grid1D, Grid2D};
use crate::himod::{himod_evaluate, himod_solve_with, HiModSolution, ModalBasis};
use crate::hipod::{
    himod_relative_error, hipod_offline, hipod_speedup_report, pod_truncate, random_samples, uniform_samples, MeanHandling,
    OnlineMode, PODBasis, ReducedModel, SpeedupReport, TruncationRule,
};
use crate::pgd::{pgd_evaluate, pgd_solve, PgdSettings};
use crate::pgd_param::{pgd_param_evaluate, pgd_param_solve, ParamGrid};
use crate::problem::{parse_number_list, validate_problem, Diffusivity, Ini, IniSection, ProblemSpec, SolverTarget};

pub const DEFAULT_SEED: u64 = 20190001;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Fig1Compare,
    Table1Sweep,
    Fig2Param,
    Fig3Hipod,
    Custom,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Fig1Compare => "fig1-compare",
            ExperimentKind::Table1Sweep => "table1-sweep",
            ExperimentKind::Fig2Param => "fig2-param",
            ExperimentKind::Fig3Hipod => "fig3-hipod",
            ExperimentKind::Custom => "custom",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            ExperimentKind::Fig1Compare,
            ExperimentKind::Table1Sweep,
            ExperimentKind::Fig2Param,
            ExperimentKind::Fig3Hipod,
            ExperimentKind::Custom,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment '{s}'")))
    }
}

/// Discretization and solver knobs; every field has a per-experiment default
/// and can be overridden by a `[solver]` key of the same name.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    /// Diffusivity used by the non-parametric solvers on a parametric problem.
    pub mu: Option<f64>,
    pub reference_nx: usize,
    pub reference_ny: usize,
    pub himod_m: usize,
    pub himod_nx: usize,
    pub pgd_nx: usize,
    pub pgd_ny: usize,
    /// Fixed mode count; `None` runs the adaptive criterion with `tol_e`.
    pub pgd_modes: Option<usize>,
    pub tol_e: f64,
    pub tol_fp: f64,
    pub max_fp: usize,
    pub max_modes: usize,
    pub initial_scale: f64,
    pub table1_tol_e: Vec<f64>,
    pub table1_tol_fp: Vec<f64>,
    pub param_nx: usize,
    pub param_ny: usize,
    pub param_nmu: usize,
    pub param_modes: usize,
    pub param_eval: Vec<f64>,
    pub param_plot: Vec<f64>,
    pub pod_m: usize,
    pub pod_nx: usize,
    pub pod_samples: usize,
    pub pod_epsilon: f64,
    pub pod_rule: TruncationRule,
    pub pod_mean: MeanHandling,
    pub pod_ls: Vec<usize>,
    pub pod_mu_star: Vec<f64>,
    pub pod_random: usize,
    pub timing_reps: usize,
    pub seed: u64,
    pub parallel: bool,
}

impl SolverSettings {
    pub fn defaults(kind: ExperimentKind) -> Self {
        let (reference_nx, reference_ny) = match kind {
            ExperimentKind::Fig2Param => (300, 100),
            ExperimentKind::Fig3Hipod => (150, 50),
            _ => (625, 125),
        };
        Self {
            mu: None,
            reference_nx,
            reference_ny,
            himod_m: 9,
            himod_nx: 285,
            pgd_nx: 285,
            pgd_ny: 20,
            pgd_modes: Some(6),
            tol_e: 8e-3,
            tol_fp: 1e-2,
            max_fp: 50,
            max_modes: 30,
            initial_scale: 1.0,
            table1_tol_e: vec![2e-2, 8e-3],
            table1_tol_fp: vec![1e-1, 1e-2, 1e-3],
            param_nx: 150,
            param_ny: 50,
            param_nmu: 500,
            param_modes: 2,
            param_eval: vec![1.0, 2.5, 5.0],
            param_plot: vec![1.0, 2.5],
            pod_m: 15,
            pod_nx: 50,
            pod_samples: 100,
            pod_epsilon: 2.5e-15,
            pod_rule: TruncationRule::KeepAboveTolerance,
            pod_mean: MeanHandling::Offset,
            pod_ls: vec![1, 4, 6, 8],
            pod_mu_star: vec![1.0, 2.5],
            pod_random: 30,
            timing_reps: 5,
            seed: DEFAULT_SEED,
            parallel: true,
        }
    }

    pub fn exec(&self) -> Exec {
        if self.parallel {
            Exec::Parallel
        } else {
            Exec::Sequential
        }
    }

    pub fn pgd_settings(&self) -> PgdSettings {
        let mut s = match self.pgd_modes {
            Some(m) => PgdSettings::fixed(m, self.tol_fp),
            None => PgdSettings::adaptive(self.tol_e, self.tol_fp),
        };
        if let crate::separated::ModeCount::Adaptive { max, .. } = &mut s.modes {
            *max = self.max_modes;
        }
        s.max_fp = self.max_fp;
        s.initial_scale = self.initial_scale;
        s
    }

    fn apply(&mut self, sec: &IniSection) -> Result<()> {
        sec.check_keys(|k| SOLVER_KEYS.contains(&k))?;
        let err = |key: &str, msg: String| Error::Config { line: sec.line_of(key), message: msg };
        let list = |key: &str| -> Result<Option<Vec<f64>>> {
            sec.get(key).map(|v| parse_number_list(v).map_err(|e| err(key, e.to_string()))).transpose()
        };
        macro_rules! count {
            ($($k:ident),*) => {$(
                if let Some(v) = sec.count(stringify!($k))? { self.$k = v; }
            )*};
        }
        macro_rules! number {
            ($($k:ident),*) => {$(
                if let Some(v) = sec.number(stringify!($k))? { self.$k = v; }
            )*};
        }
        macro_rules! numbers {
            ($($k:ident),*) => {$(
                if let Some(v) = list(stringify!($k))? { self.$k = v; }
            )*};
        }
        count!(reference_nx, reference_ny, himod_m, himod_nx, pgd_nx, pgd_ny, max_fp, max_modes);
        count!(param_nx, param_ny, param_nmu, param_modes, pod_m, pod_nx, pod_samples, pod_random, timing_reps);
        number!(tol_e, tol_fp, initial_scale, pod_epsilon);
        numbers!(table1_tol_e, table1_tol_fp, param_eval, param_plot, pod_mu_star);
        if let Some(v) = sec.number("mu")? {
            self.mu = Some(v);
        }
        if let Some(v) = sec.get("pgd_modes") {
            self.pgd_modes = match v.trim() {
                "adaptive" => None,
                s => Some(s.parse().map_err(|_| err("pgd_modes", format!("'pgd_modes' must be a count or 'adaptive', got '{s}'")))?),
            };
        }
        if let Some(v) = list("pod_ls")? {
            self.pod_ls = v
                .iter()
                .map(|x| if *x >= 1.0 && x.fract() == 0.0 { Ok(*x as usize) } else { Err(err("pod_ls", format!("basis size {x} is not a positive integer"))) })
                .collect::<Result<_>>()?;
        }
        if let Some(v) = sec.get("pod_rule") {
            self.pod_rule = match v.trim() {
                "keep" => TruncationRule::KeepAboveTolerance,
                "first-below" => TruncationRule::FirstBelowTolerance,
                s => return Err(err("pod_rule", format!("'pod_rule' must be 'keep' or 'first-below', got '{s}'"))),
            };
        }
        if let Some(v) = sec.get("pod_mean") {
            self.pod_mean = match v.trim() {
                "offset" => MeanHandling::Offset,
                "lift" => MeanHandling::Lift,
                "append" => MeanHandling::Append,
                s => return Err(err("pod_mean", format!("'pod_mean' must be offset, lift or append, got '{s}'"))),
            };
        }
        if let Some(v) = sec.get("seed") {
            self.seed = v.trim().parse().map_err(|_| err("seed", format!("'seed' must be a non-negative integer, got '{v}'")))?;
        }
        if let Some(v) = sec.get("parallel") {
            self.parallel = match v.trim() {
                "true" => true,
                "false" => false,
                s => return Err(err("parallel", format!("'parallel' must be true or false, got '{s}'"))),
            };
        }
        Ok(())
    }

    /// `[solver]` section reproducing these settings.
    pub fn render(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x:?}")).collect::<Vec<_>>().join(", ");
        let mut s = String::from("[solver]\n");
        if let Some(mu) = self.mu {
            let _ = writeln!(s, "mu = {mu:?}");
        }
        let pgd_modes = self.pgd_modes.map_or("adaptive".to_string(), |m| m.to_string());
        let rule = match self.pod_rule {
            TruncationRule::KeepAboveTolerance => "keep",
            TruncationRule::FirstBelowTolerance => "first-below",
        };
        let mean = match self.pod_mean {
            MeanHandling::Offset => "offset",
            MeanHandling::Lift => "lift",
            MeanHandling::Append => "append",
        };
        let ls = self.pod_ls.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(", ");
        let _ = write!(
            s,
            "reference_nx = {}\nreference_ny = {}\nhimod_m = {}\nhimod_nx = {}\npgd_nx = {}\npgd_ny = {}\n\
             pgd_modes = {pgd_modes}\ntol_e = {:?}\ntol_fp = {:?}\nmax_fp = {}\nmax_modes = {}\ninitial_scale = {:?}\n\
             table1_tol_e = {}\ntable1_tol_fp = {}\nparam_nx = {}\nparam_ny = {}\nparam_nmu = {}\nparam_modes = {}\n\
             param_eval = {}\nparam_plot = {}\npod_m = {}\npod_nx = {}\npod_samples = {}\npod_epsilon = {:?}\n\
             pod_rule = {rule}\npod_mean = {mean}\npod_ls = {ls}\npod_mu_star = {}\npod_random = {}\ntiming_reps = {}\n\
             seed = {}\nparallel = {}\n",
            self.reference_nx,
            self.reference_ny,
            self.himod_m,
            self.himod_nx,
            self.pgd_nx,
            self.pgd_ny,
            self.tol_e,
            self.tol_fp,
            self.max_fp,
            self.max_modes,
            self.initial_scale,
            list(&self.table1_tol_e),
            list(&self.table1_tol_fp),
            self.param_nx,
            self.param_ny,
            self.param_nmu,
            self.param_modes,
            list(&self.param_eval),
            list(&self.param_plot),
            self.pod_m,
            self.pod_nx,
            self.pod_samples,
            self.pod_epsilon,
            list(&self.pod_mu_star),
            self.pod_random,
            self.timing_reps,
            self.seed,
            self.parallel,
        );
        s
    }
}

const SOLVER_KEYS: [&str; 34] = [
    "mu",
    "reference_nx",
    "reference_ny",
    "himod_m",
    "himod_nx",
    "pgd_nx",
    "pgd_ny",
    "pgd_modes",
    "tol_e",
    "tol_fp",
    "max_fp",
    "max_modes",
    "initial_scale",
    "table1_tol_e",
    "table1_tol_fp",
    "param_nx",
    "param_ny",
    "param_nmu",
    "param_modes",
    "param_eval",
    "param_plot",
    "pod_m",
    "pod_nx",
    "pod_samples",
    "pod_epsilon",
    "pod_rule",
    "pod_mean",
    "pod_ls",
    "pod_mu_star",
    "pod_random",
    "timing_reps",
    "seed",
    "parallel",
    "full_reference",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// `None` when the problem sections are inline.
    pub problem_path: Option<PathBuf>,
    pub problem: ProblemSpec,
    pub solver: SolverSettings,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    /// Reads an experiment file; relative paths inside it resolve against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Config { line: 0, message: format!("{}: {e}", path.display()) })?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let ini = Ini::parse(text)?;
        let exp = ini.section("experiment").ok_or_else(|| Error::Config { line: 0, message: "missing section [experiment]".into() })?;
        exp.check_keys(|k| matches!(k, "name" | "problem" | "out"))?;
        let kind: ExperimentKind = exp
            .require("name")?
            .trim()
            .parse()
            .map_err(|e: Error| Error::Config { line: exp.line_of("name"), message: e.to_string() })?;

        let (problem_path, problem) = match exp.get("problem") {
            Some(p) => {
                if ini.sections.iter().any(|s| !matches!(s.name.as_str(), "experiment" | "solver")) {
                    return Err(Error::Config { line: exp.line_of("problem"), message: "give either a problem file or inline problem sections".into() });
                }
                let path = base_dir.join(p.trim());
                let text = fs::read_to_string(&path)
                    .map_err(|e| Error::Config { line: exp.line_of("problem"), message: format!("{}: {e}", path.display()) })?;
                let problem = ProblemSpec::parse(&text).map_err(|e| match e {
                    Error::Config { line, message } => Error::Config { line, message: format!("{}: {message}", path.display()) },
                    e => e,
                })?;
                (Some(path), problem)
            }
            None => (None, ProblemSpec::from_ini(&ini, &["experiment", "solver"])?),
        };
        if let Some(d) = validate_problem(&problem, SolverTarget::Any).into_iter().next() {
            return Err(Error::Config { line: 0, message: d.0 });
        }

        let mut solver = SolverSettings::defaults(kind);
        if let Some(sec) = ini.section("solver") {
            solver.apply(sec)?;
            if sec.get("full_reference") == Some("true") {
                solver.reference_nx *= 4;
                solver.reference_ny *= 4;
            }
        }
        let out_dir = base_dir.join(exp.get("out").map_or_else(|| format!("out/{}", kind.name()), |o| o.trim().to_string()));
        Ok(Self { kind, problem_path, problem, solver, out_dir })
    }

    /// Quadruples the reference resolution per axis.
    pub fn use_full_reference(&mut self) {
        self.solver.reference_nx *= 4;
        self.solver.reference_ny *= 4;
    }

    /// The problem with a fixed diffusivity, taking `solver.mu` for parametric problems.
    pub fn fixed_problem(&self) -> Result<ProblemSpec> {
        match (self.problem.mu, self.solver.mu) {
            (_, Some(mu)) => {
                if let Diffusivity::Interval { min, max } = self.problem.mu {
                    if !(min..=max).contains(&mu) {
                        return Err(Error::OutOfRange { value: mu, min, max });
                    }
                }
                Ok(self.problem.with_mu(mu))
            }
            (Diffusivity::Constant(_), None) => Ok(self.problem.clone()),
            (Diffusivity::Interval { .. }, None) => {
                Err(Error::Config { line: 0, message: "parametric problem: set 'mu' in [solver] for this command".into() })
            }
        }
    }

    fn reference_grid(&self) -> Result<Grid2D> {
        Grid2D::over(&self.problem.domain, self.solver.reference_nx, self.solver.reference_ny)
    }
}

/// Echo of the run, wall times per stage and the files produced.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunManifest {
    pub experiment: String,
    pub config: String,
    pub code_version: String,
    pub timings: Vec<(String, f64)>,
    pub files: Vec<String>,
    pub notes: Vec<String>,
}

impl RunManifest {
    /// `manifest-<experiment>.ini`, so commands sharing a directory keep separate manifests.
    pub fn file_name(experiment: &str) -> String {
        format!("manifest-{experiment}.ini")
    }

    pub fn render(&self) -> String {
        let mut s = format!("[run]\nexperiment = {}\ncode_version = {}\n\n{}\n[timings]\n", self.experiment, self.code_version, self.config);
        for (stage, t) in &self.timings {
            let _ = writeln!(s, "{stage} = {t:.6}");
        }
        s.push_str("\n[files]\n");
        for (i, f) in self.files.iter().enumerate() {
            let _ = writeln!(s, "file{} = {f}", i + 1);
        }
        if !self.notes.is_empty() {
            s.push_str("\n[notes]\n");
            for (i, n) in self.notes.iter().enumerate() {
                let _ = writeln!(s, "note{} = {n}", i + 1);
            }
        }
        s
    }
}

/// Output directory bookkeeping shared by every runner.
struct Run<'a> {
    cfg: &'a ExperimentConfig,
    manifest: RunManifest,
}

impl<'a> Run<'a> {
    fn start(cfg: &'a ExperimentConfig, experiment: &str) -> Result<Self> {
        fs::create_dir_all(&cfg.out_dir)?;
        let problem = cfg.problem.render();
        Ok(Self {
            cfg,
            manifest: RunManifest {
                experiment: experiment.to_string(),
                config: format!("{}\n{problem}", cfg.solver.render()),
                code_version: env!("CARGO_PKG_VERSION").to_string(),
                ..Default::default()
            },
        })
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let start = Instant::now();
        let out = f().map_err(|e| Error::Stage { stage: name.to_string(), source: Box::new(e) })?;
        self.manifest.timings.push((name.to_string(), start.elapsed().as_secs_f64()));
        Ok(out)
    }

    fn write(&mut self, name: &str, f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        fs::write(self.cfg.out_dir.join(name), buf)?;
        self.manifest.files.push(name.to_string());
        Ok(())
    }

    fn vtk(&mut self, name: &str, field: &Field2D, title: &str) -> Result<()> {
        self.write(name, |w| field.write_vtk(w, title))
    }

    /// Writes the manifest through a temporary file and a rename.
    fn finish(self) -> Result<RunManifest> {
        let name = RunManifest::file_name(&self.manifest.experiment);
        let tmp = self.cfg.out_dir.join(format!("{name}.tmp"));
        fs::write(&tmp, self.manifest.render())?;
        fs::rename(&tmp, self.cfg.out_dir.join(name))?;
        Ok(self.manifest)
    }
}

fn e(v: f64) -> String {
    format!("{v:.14e}")
}

fn mu_tag(mu: f64) -> String {
    format!("{mu}").replace('.', "p")
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig1Result {
    pub himod_error: f64,
    pub pgd_error: f64,
    pub pgd_modes: usize,
}

/// HiMod and PGD against the FE reference on one fixed-diffusivity problem.
pub fn run_fig1_compare(cfg: &ExperimentConfig) -> Result<(Fig1Result, RunManifest)> {
    let mut run = Run::start(cfg, ExperimentKind::Fig1Compare.name())?;
    let s = &cfg.solver;
    let p = cfg.fixed_problem()?;
    let grid = cfg.reference_grid()?;
    let reference = run.stage("reference", || fe2d_solve_with(&p, &grid, s.exec()))?.field;
    let himod = run.stage("himod", || {
        let basis = ModalBasis::sine(s.himod_m)?;
        let gx = Grid1D::uniform(p.domain.x0, p.domain.x1, s.himod_nx)?;
        himod_evaluate(&himod_solve_with(&p, &basis, &gx, s.exec())?, &grid)
    })?;
    let (pgd, pgd_modes) = run.stage("pgd", || {
        let gx = Grid1D::uniform(p.domain.x0, p.domain.x1, s.pgd_nx)?;
        let gy = Grid1D::uniform(p.domain.y0, p.domain.y1, s.pgd_ny)?;
        let sol = pgd_solve(&p, &gx, &gy, &s.pgd_settings())?;
        Ok((pgd_evaluate(&sol, &grid)?, sol.m()))
    })?;
    let result = Fig1Result {
        himod_error: relative_l2_error(&himod, &reference)?,
        pgd_error: relative_l2_error(&pgd, &reference)?,
        pgd_modes,
    };
    run.vtk("reference.vtk", &reference, "FE reference")?;
    run.vtk("himod.vtk", &himod, "HiMod")?;
    run.vtk("pgd.vtk", &pgd, "PGD")?;
    run.write("errors.csv", |w| {
        writeln!(w, "method,relative_l2_error")?;
        writeln!(w, "himod,{}", e(result.himod_error))?;
        writeln!(w, "pgd,{}", e(result.pgd_error))?;
        Ok(())
    })?;
    Ok((result, run.finish()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1Cell {
    pub tol_e: f64,
    pub tol_fp: f64,
    /// Fixed-point iteration count per accepted mode.
    pub fp_iterations: Vec<usize>,
    pub m: Option<usize>,
    pub failure: Option<String>,
    pub seconds: f64,
}

/// Adaptive PGD over the `tol_e × tol_fp` grid; a failing cell is recorded and the sweep continues.
pub fn run_table1_sweep(cfg: &ExperimentConfig) -> Result<(Vec<Table1Cell>, RunManifest)> {
    let mut run = Run::start(cfg, ExperimentKind::Table1Sweep.name())?;
    let s = &cfg.solver;
    let p = cfg.fixed_problem()?;
    let gx = Grid1D::uniform(p.domain.x0, p.domain.x1, s.pgd_nx)?;
    let gy = Grid1D::uniform(p.domain.y0, p.domain.y1, s.pgd_ny)?;
    let pairs: Vec<(f64, f64)> = s.table1_tol_e.iter().flat_map(|&te| s.table1_tol_fp.iter().map(move |&tf| (te, tf))).collect();
    let cells = run.stage("sweep", || {
        Ok(s.exec().map_indexed(pairs.len(), |i| {
            let (tol_e, tol_fp) = pairs[i];
            let settings = SolverSettings { pgd_modes: None, tol_e, tol_fp, ..s.clone() }.pgd_settings();
            let start = Instant::now();
            let out = pgd_solve(&p, &gx, &gy, &settings);
            let seconds = start.elapsed().as_secs_f64();
            match out {
                Ok(sol) => Table1Cell {
                    tol_e,
                    tol_fp,
                    fp_iterations: sol.report.steps.iter().map(|st| st.iterations).collect(),
                    m: Some(sol.m()),
                    failure: None,
                    seconds,
                },
                Err(err) => Table1Cell { tol_e, tol_fp, fp_iterations: Vec::new(), m: None, failure: Some(err.to_string()), seconds },
            }
        }))
    })?;
    for c in &cells {
        run.manifest.timings.push((format!("cell_{:e}_{:e}", c.tol_e, c.tol_fp), c.seconds));
    }
    run.write("table1.csv", |w| {
        writeln!(w, "tol_e,tol_fp,m,fp_iterations,status")?;
        for c in &cells {
            let its = c.fp_iterations.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(";");
            let status = c.failure.as_deref().map_or("ok".to_string(), |f| format!("\"{}\"", f.replace('"', "'")));
            writeln!(w, "{},{},{},{its},{status}", e(c.tol_e), e(c.tol_fp), c.m.map_or(String::new(), |m| m.to_string()))?;
        }
        Ok(())
    })?;
    Ok((cells, run.finish()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig2Result {
    pub modes: usize,
    /// `(μ, relative L² error vs FE)` in `param_eval` order.
    pub errors: Vec<(f64, f64)>,
}

/// Parametric PGD solved once, evaluated at several μ against FE references.
pub fn run_fig2_param(cfg: &ExperimentConfig) -> Result<(Fig2Result, RunManifest)> {
    let mut run = Run::start(cfg, ExperimentKind::Fig2Param.name())?;
    let s = &cfg.solver;
    let p = &cfg.problem;
    let (lo, hi) = p.mu_interval()?;
    if let Some(&mu) = s.param_eval.iter().chain(&s.param_plot).find(|mu| !(lo..=hi).contains(*mu)) {
        return Err(Error::OutOfRange { value: mu, min: lo, max: hi });
    }
    let sol = run.stage("pgd_param", || {
        let gx = Grid1D::uniform(p.domain.x0, p.domain.x1, s.param_nx)?;
        let gy = Grid1D::uniform(p.domain.y0, p.domain.y1, s.param_ny)?;
        let pg = ParamGrid::uniform(lo, hi, s.param_nmu)?;
        pgd_param_solve(p, &gx, &gy, &pg, &SolverSettings { pgd_modes: Some(s.param_modes), ..s.clone() }.pgd_settings())
    })?;
    let grid = cfg.reference_grid()?;
    let mut mus = s.param_eval.clone();
    mus.extend(s.param_plot.iter().filter(|m| !s.param_eval.contains(m)));
    let fields = run.stage("references", || {
        s.exec()
            .map_indexed(mus.len(), |i| {
                let reference = fe2d_solve_with(&p.with_mu(mus[i]), &grid, Exec::Sequential)?.field;
                let approx = pgd_param_evaluate(&sol, &grid, mus[i])?;
                Ok((approx, reference))
            })
            .into_iter()
            .collect::<Result<Vec<_>>>()
    })?;
    let mut errors = Vec::new();
    for (mu, (approx, reference)) in mus.iter().zip(&fields) {
        if s.param_eval.contains(mu) {
            errors.push((*mu, relative_l2_error(approx, reference)?));
        }
        if s.param_plot.contains(mu) {
            run.vtk(&format!("pgd_param_mu{}.vtk", mu_tag(*mu)), approx, &format!("parametric PGD mu={mu}"))?;
            run.vtk(&format!("reference_mu{}.vtk", mu_tag(*mu)), reference, &format!("FE reference mu={mu}"))?;
        }
    }
    run.write("errors.csv", |w| {
        writeln!(w, "mu,relative_l2_error")?;
        for (mu, err) in &errors {
            writeln!(w, "{},{}", e(*mu), e(*err))?;
        }
        Ok(())
    })?;
    run.write("pgd_param_report.csv", |w| sol.report.write_csv(w))?;
    Ok((Fig2Result { modes: sol.modes.len(), errors }, run.finish()?))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fig3Row {
    pub l: usize,
    /// `Some(μ*)`, or `None` for the mean over the random draws.
    pub mu_star: Option<f64>,
    pub relative_error: f64,
}

#[derive(Debug, Clone)]
pub struct Fig3Result {
    pub pod: PODBasis,
    /// Basis size under each truncation reading.
    pub l_keep: usize,
    pub l_first_below: usize,
    pub table: Vec<Fig3Row>,
    pub random_mu: Vec<f64>,
    pub speedup: SpeedupReport,
}

/// HiPOD offline phase, error table over basis sizes and the online timing study.
pub fn run_fig3_hipod(cfg: &ExperimentConfig) -> Result<(Fig3Result, RunManifest)> {
    let mut run = Run::start(cfg, ExperimentKind::Fig3Hipod.name())?;
    let s = &cfg.solver;
    let p = &cfg.problem;
    let (lo, hi) = p.mu_interval()?;
    let basis = ModalBasis::sine(s.pod_m)?;
    let grid = Grid1D::uniform(p.domain.x0, p.domain.x1, s.pod_nx)?;
    let (_, pod, notes) = run.stage("offline", || {
        hipod_offline(p, &basis, &grid, &uniform_samples(lo, hi, s.pod_samples), s.pod_epsilon, s.pod_rule, s.exec())
    })?;
    let l_keep = pod_truncate(&pod.sigma, s.pod_epsilon, TruncationRule::KeepAboveTolerance);
    let l_first_below = pod_truncate(&pod.sigma, s.pod_epsilon, TruncationRule::FirstBelowTolerance);

    let random_mu = random_samples(lo, hi, s.pod_random, s.seed);
    let mut queries: Vec<f64> = s.pod_mu_star.clone();
    queries.extend(&random_mu);
    let references: Vec<HiModSolution> = run.stage("himod_references", || {
        s.exec()
            .map_indexed(queries.len(), |i| himod_solve_with(&p.with_mu(queries[i]), &basis, &grid, Exec::Sequential))
            .into_iter()
            .collect()
    })?;

    let table = run.stage("online", || {
        let mut rows = Vec::new();
        for &l in &s.pod_ls {
            let model = ReducedModel::new(p, &basis, &grid, &pod.with_l(l.min(pod.vectors.cols()))?, s.pod_mean)?;
            let errs = queries
                .iter()
                .zip(&references)
                .map(|(&mu, r)| himod_relative_error(&model.online(mu, OnlineMode::Affine)?, r))
                .collect::<Result<Vec<f64>>>()?;
            let n_star = s.pod_mu_star.len();
            for (i, &mu) in s.pod_mu_star.iter().enumerate() {
                rows.push(Fig3Row { l, mu_star: Some(mu), relative_error: errs[i] });
            }
            if !random_mu.is_empty() {
                let mean = errs[n_star..].iter().sum::<f64>() / random_mu.len() as f64;
                rows.push(Fig3Row { l, mu_star: None, relative_error: mean });
            }
        }
        Ok(rows)
    })?;

    let speedup = run.stage("timing", || {
        let model = ReducedModel::new(p, &basis, &grid, &pod, s.pod_mean)?;
        hipod_speedup_report(&model, &s.pod_mu_star, s.timing_reps)
    })?;

    run.write("fig3_table.csv", |w| {
        writeln!(w, "l,mu_star_or_random,relative_error")?;
        for r in &table {
            writeln!(w, "{},{},{}", r.l, r.mu_star.map_or("random".to_string(), e), e(r.relative_error))?;
        }
        Ok(())
    })?;
    run.write("pod_sigma.csv", |w| {
        writeln!(w, "index,sigma,sigma_squared")?;
        for (i, sg) in pod.sigma.iter().enumerate() {
            writeln!(w, "{},{},{}", i + 1, e(*sg), e(sg * sg))?;
        }
        Ok(())
    })?;
    run.write("pod_truncation.csv", |w| {
        writeln!(w, "rule,epsilon,l")?;
        writeln!(w, "keep,{},{l_keep}", e(s.pod_epsilon))?;
        writeln!(w, "first-below,{},{l_first_below}", e(s.pod_epsilon))?;
        Ok(())
    })?;
    run.write("random_mu.csv", |w| {
        writeln!(w, "seed,index,mu")?;
        for (i, mu) in random_mu.iter().enumerate() {
            writeln!(w, "{},{},{}", s.seed, i + 1, e(*mu))?;
        }
        Ok(())
    })?;
    run.write("pod_basis.csv", |w| pod.write_csv(w))?;
    run.write("speedup.csv", |w| speedup.write_csv(w))?;
    run.manifest.notes.extend(notes);
    let result = Fig3Result { pod, l_keep, l_first_below, table, random_mu, speedup };
    Ok((result, run.finish()?))
}

/// Single full-order FE solve.
pub fn run_solve_fe(cfg: &ExperimentConfig) -> Result<(Field2D, RunManifest)> {
    let mut run = Run::start(cfg, "solve-fe")?;
    let p = cfg.fixed_problem()?;
    let grid = cfg.reference_grid()?;
    let sol = run.stage("fe", || fe2d_solve_with(&p, &grid, cfg.solver.exec()))?;
    run.vtk("fe.vtk", &sol.field, "FE")?;
    run.write("fe.csv", |w| sol.field.write_csv(w))?;
    Ok((sol.field, run.finish()?))
}

pub fn run_solve_himod(cfg: &ExperimentConfig) -> Result<(HiModSolution, RunManifest)> {
    let mut run = Run::start(cfg, "solve-himod")?;
    let s = &cfg.solver;
    let p = cfg.fixed_problem()?;
    let sol = run.stage("himod", || {
        let gx = Grid1D::uniform(p.domain.x0, p.domain.x1, s.himod_nx)?;
        himod_solve_with(&p, &ModalBasis::sine(s.himod_m)?, &gx, s.exec())
    })?;
    run.write("himod.csv", |w| sol.write_csv(w))?;
    let field = himod_evaluate(&sol, &cfg.reference_grid()?)?;
    run.vtk("himod.vtk", &field, "HiMod")?;
    Ok((sol, run.finish()?))
}

pub fn run_solve_pgd(cfg: &ExperimentConfig) -> Result<(crate::pgd::PGDSolution, RunManifest)> {
    let mut run = Run::start(cfg, "solve-pgd")?;
    let s = &cfg.solver;
    let p = cfg.fixed_problem()?;
    let sol = run.stage("pgd", || {
        let gx = Grid1D::uniform(p.domain.x0, p.domain.x1, s.pgd_nx)?;
        let gy = Grid1D::uniform(p.domain.y0, p.domain.y1, s.pgd_ny)?;
        pgd_solve(&p, &gx, &gy, &s.pgd_settings())
    })?;
    run.write("pgd.csv", |w| sol.write_csv(w))?;
    run.write("pgd_report.csv", |w| sol.report.write_csv(w))?;
    let field = pgd_evaluate(&sol, &cfg.reference_grid()?)?;
    run.vtk("pgd.vtk", &field, "PGD")?;
    Ok((sol, run.finish()?))
}

pub fn run_solve_pgd_param(cfg: &ExperimentConfig) -> Result<(crate::pgd_param::PGDParamSolution, RunManifest)> {
    let mut run = Run::start(cfg, "solve-pgd-param")?;
    let s = &cfg.solver;
    let p = &cfg.problem;
    let (lo, hi) = p.mu_interval()?;
    let sol = run.stage("pgd_param", || {
        let gx = Grid1D::uniform(p.domain.x0, p.domain.x1, s.param_nx)?;
        let gy = Grid1D::uniform(p.domain.y0, p.domain.y1, s.param_ny)?;
        let pg = ParamGrid::uniform(lo, hi, s.param_nmu)?;
        pgd_param_solve(p, &gx, &gy, &pg, &SolverSettings { pgd_modes: Some(s.param_modes), ..s.clone() }.pgd_settings())
    })?;
    run.write("pgd_param.csv", |w| sol.write_csv(w))?;
    run.write("pgd_param_report.csv", |w| sol.report.write_csv(w))?;
    let grid = cfg.reference_grid()?;
    for &mu in &s.param_plot {
        let field = pgd_param_evaluate(&sol, &grid, mu)?;
        run.vtk(&format!("pgd_param_mu{}.vtk", mu_tag(mu)), &field, &format!("parametric PGD mu={mu}"))?;
    }
    Ok((sol, run.finish()?))
}

/// Offline phase only; writes `pod_basis.csv` for a later `hipod-online`.
pub fn run_hipod_offline(cfg: &ExperimentConfig) -> Result<(PODBasis, RunManifest)> {
    let mut run = Run::start(cfg, "hipod-offline")?;
    let s = &cfg.solver;
    let p = &cfg.problem;
    let (lo, hi) = p.mu_interval()?;
    let (_, pod, _) = run.stage("offline", || {
        let grid = Grid1D::uniform(p.domain.x0, p.domain.x1, s.pod_nx)?;
        hipod_offline(p, &ModalBasis::sine(s.pod_m)?, &grid, &uniform_samples(lo, hi, s.pod_samples), s.pod_epsilon, s.pod_rule, s.exec())
    })?;
    run.write("pod_basis.csv", |w| pod.write_csv(w))?;
    run.write("pod_sigma.csv", |w| {
        writeln!(w, "index,sigma,sigma_squared")?;
        for (i, sg) in pod.sigma.iter().enumerate() {
            writeln!(w, "{},{},{}", i + 1, e(*sg), e(sg * sg))?;
        }
        Ok(())
    })?;
    Ok((pod, run.finish()?))
}

/// Online query at `solver.mu` using the basis stored in the output directory.
pub fn run_hipod_online(cfg: &ExperimentConfig) -> Result<(HiModSolution, RunManifest)> {
    let path = cfg.out_dir.join("pod_basis.csv");
    let text = fs::read_to_string(&path)
        .map_err(|e| Error::Config { line: 0, message: format!("{}: {e} (run hipod-offline first)", path.display()) })?;
    let pod = PODBasis::read_csv(&text)?;
    let mu = cfg.solver.mu.ok_or_else(|| Error::Config { line: 0, message: "set 'mu' in [solver] for hipod-online".into() })?;
    let mut run = Run::start(cfg, "hipod-online")?;
    let s = &cfg.solver;
    let p = &cfg.problem;
    let basis = ModalBasis::sine(s.pod_m)?;
    let grid = Grid1D::uniform(p.domain.x0, p.domain.x1, s.pod_nx)?;
    let sol = run.stage("online", || ReducedModel::new(p, &basis, &grid, &pod, s.pod_mean)?.online(mu, OnlineMode::Affine))?;
    run.write("hipod.csv", |w| sol.write_csv(w))?;
    let field = himod_evaluate(&sol, &cfg.reference_grid()?)?;
    run.vtk("hipod.vtk", &field, &format!("HiPOD mu={mu}"))?;
    Ok((sol, run.finish()?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::presets;

    fn inline(name: &str, problem: &ProblemSpec, solver: &str) -> String {
        format!("[experiment]\nname = {name}\nout = out\n\n{}\n{solver}", problem.render())
    }

    #[test]
    fn kinds_round_trip() {
        for k in ["fig1-compare", "table1-sweep", "fig2-param", "fig3-hipod", "custom"] {
            assert_eq!(k.parse::<ExperimentKind>().unwrap().name(), k);
        }
        assert!("fig4".parse::<ExperimentKind>().is_err());
    }

    #[test]
    fn inline_config_and_overrides() {
        let text = inline("fig1-compare", &presets::two_gaussian_source(), "[solver]\nhimod_m = 3\npgd_modes = adaptive\npod_ls = 1, 2\n");
        let cfg = ExperimentConfig::parse(&text, Path::new("/tmp/x")).unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Fig1Compare);
        assert_eq!(cfg.solver.himod_m, 3);
        assert_eq!(cfg.solver.pgd_modes, None);
        assert_eq!(cfg.solver.pod_ls, vec![1, 2]);
        assert_eq!(cfg.solver.reference_nx, 625);
        assert_eq!(cfg.out_dir, Path::new("/tmp/x/out"));
    }

    #[test]
    fn settings_render_round_trip() {
        let mut s = SolverSettings::defaults(ExperimentKind::Fig3Hipod);
        s.mu = Some(2.0);
        s.pod_rule = TruncationRule::FirstBelowTolerance;
        s.pod_mean = MeanHandling::Append;
        s.pgd_modes = None;
        let text = format!("[experiment]\nname = fig3-hipod\n\n{}\n{}", presets::inlet_channel().render(), s.render());
        let cfg = ExperimentConfig::parse(&text, Path::new(".")).unwrap();
        assert_eq!(cfg.solver, s);
    }

    #[test]
    fn config_errors_carry_lines() {
        let text = inline("fig1-compare", &presets::two_gaussian_source(), "[solver]\nhimod_q = 3\n");
        let line = text.lines().position(|l| l.starts_with("himod_q")).unwrap() + 1;
        assert!(matches!(ExperimentConfig::parse(&text, Path::new(".")), Err(Error::Config { line: l, .. }) if l == line));
        let text = inline("nope", &presets::two_gaussian_source(), "");
        assert!(matches!(ExperimentConfig::parse(&text, Path::new(".")), Err(Error::Config { line: 2, .. })));
        let text = "[experiment]\nname = custom\nproblem = missing.ini\n";
        assert!(matches!(ExperimentConfig::parse(text, Path::new("/nonexistent")), Err(Error::Config { line: 3, .. })));
    }

    #[test]
    fn fixed_problem_needs_mu_for_parametric() {
        let text = inline("custom", &presets::inlet_channel(), "");
        let mut cfg = ExperimentConfig::parse(&text, Path::new(".")).unwrap();
        assert!(matches!(cfg.fixed_problem(), Err(Error::Config { .. })));
        cfg.solver.mu = Some(9.0);
        assert!(matches!(cfg.fixed_problem(), Err(Error::OutOfRange { .. })));
        cfg.solver.mu = Some(2.0);
        assert_eq!(cfg.fixed_problem().unwrap().mu, Diffusivity::Constant(2.0));
    }

    #[test]
    fn stage_errors_name_the_stage() {
        let err = Error::Stage { stage: "pgd".into(), source: Box::new(Error::DegenerateMode("x".into())) };
        assert_eq!(err.to_string(), "pgd: degenerate mode: x");
        assert_eq!(err.root(), &Error::DegenerateMode("x".into()));
    }
}
