use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::thread;

use anyhow::{Context, Result};
use qlbm_core::complexity::{qlsa_complexity, timemarch_complexity};
use qlbm_core::encoding::lbm::alpha_m;
use qlbm_core::gauss::{run_case, BenchReport, GaussCase};
use qlbm_core::lattice::{check_low_mach, diffusion_coefficient, LowMachReport, VelocityField};
use qlbm_core::classical::relaxation_regime;
use qlbm_core::report::{self, CheckRow};
use qlbm_core::verify::{self, SuiteConfig};
use serde::Serialize;

use crate::config::{BenchConfig, ComplexityConfig, ConfigError};

/// Result of a command that ran to completion.
#[derive(Debug)]
pub enum Outcome {
    Pass,
    /// Human-readable descriptions of every failed check.
    Fail(Vec<String>),
}

impl Outcome {
    fn from_failures(failures: Vec<String>) -> Self {
        if failures.is_empty() {
            Outcome::Pass
        } else {
            Outcome::Fail(failures)
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn prepare_out(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create output directory {}", out.display()))
}

#[derive(Serialize)]
struct Derived {
    tau_star: f64,
    omega: f64,
    regime: &'static str,
    diffusion_lattice: f64,
    diffusion_physical: f64,
    alpha_m: f64,
}

#[derive(Serialize)]
struct LowMach {
    holds: bool,
    max_ux: f64,
    max_uy: f64,
    bound: f64,
}

impl From<LowMachReport> for LowMach {
    fn from(r: LowMachReport) -> Self {
        LowMach {
            holds: r.holds,
            max_ux: r.max_ux,
            max_uy: r.max_uy,
            bound: r.bound,
        }
    }
}

#[derive(Serialize)]
struct CaseRecord {
    id: String,
    file: String,
    success_probs: Option<Vec<f64>>,
    qlsa_residual: Option<f64>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    command: &'static str,
    config: &'a BenchConfig,
    derived: Vec<Derived>,
    low_mach: LowMach,
    summary: &'static str,
    cases: Vec<CaseRecord>,
}

fn build_cases(cfg: &BenchConfig) -> Result<Vec<GaussCase>> {
    let vs = cfg.velocity_set();
    let grid = cfg.grid();
    let table = match &cfg.velocity_table {
        Some(p) => Some(VelocityField::from_csv(p, &grid).map_err(|e| ConfigError {
            key: "velocity_table".into(),
            message: e.to_string(),
        })?),
        None => None,
    };
    let mut cases = Vec::new();
    for &tau in &cfg.tau_star {
        let case = GaussCase {
            id: format!("gauss{}d_tau{tau}", vs.d),
            vs: vs.clone(),
            grid,
            phi0: cfg.phi0,
            sigma0: cfg.sigma0,
            x0: [cfg.x0, cfg.y0],
            u: [cfg.ux, cfg.uy],
            velocity_table: table.clone(),
            tau_star: tau,
            omega: cfg.omega.resolve(tau),
            steps: cfg.steps.clone(),
            path: cfg.run_path(),
        };
        case.validate().map_err(|e| ConfigError {
            key: "config".into(),
            message: e.to_string(),
        })?;
        cases.push(case);
    }
    Ok(cases)
}

/// Gaussian hill runs: one CSV per case, a summary and a manifest.
pub fn bench(cfg: &BenchConfig) -> Result<Outcome> {
    let cases = build_cases(cfg)?;
    let out = &cfg.common.out;
    prepare_out(out)?;
    let file_of = |c: &GaussCase| format!("{}_{}.csv", c.id, c.path);

    let reports: Vec<BenchReport> = thread::scope(|s| {
        let handles: Vec<_> = cases
            .iter()
            .map(|case| {
                let path = out.join(file_of(case));
                s.spawn(move || -> Result<BenchReport> {
                    log::info!("running {} on the {} path", case.id, case.path);
                    let rep = run_case(case)?;
                    report::write_bench_case(create(&path)?, &rep)?;
                    Ok(rep)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("case thread panicked")).collect::<Result<Vec<_>>>()
    })?;
    report::write_bench_summary(create(&out.join("summary.csv"))?, &reports)?;

    let grid = cfg.grid();
    let field = cases[0].field();
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        command: "bench",
        config: cfg,
        derived: cases
            .iter()
            .map(|c| Derived {
                tau_star: c.tau_star,
                omega: c.omega,
                regime: relaxation_regime(c.tau_star),
                diffusion_lattice: c.diffusion(),
                diffusion_physical: diffusion_coefficient(c.tau_star, &grid),
                alpha_m: alpha_m(c.omega),
            })
            .collect(),
        low_mach: check_low_mach(&field).into(),
        summary: "summary.csv",
        cases: reports
            .iter()
            .map(|r| CaseRecord {
                id: r.case.id.clone(),
                file: file_of(&r.case),
                success_probs: r.success_probs.clone(),
                qlsa_residual: r.qlsa_residual,
            })
            .collect(),
    };
    let mut json = serde_json::to_string_pretty(&manifest)?;
    json.push('\n');
    fs::write(out.join("manifest.json"), json)?;

    let tol = cfg.common.tol;
    let mut failures = Vec::new();
    for rep in &reports {
        for r in &rep.results {
            if !(r.path_vs_classical_max <= tol) {
                failures.push(format!(
                    "{} step {}: path vs classical deviation {:e} > {tol:e}",
                    rep.case.id, r.step, r.path_vs_classical_max
                ));
            }
            if !(r.mass_drift <= tol) {
                failures.push(format!("{} step {}: mass drift {:e} > {tol:e}", rep.case.id, r.step, r.mass_drift));
            }
        }
        let last = rep.results.last();
        println!(
            "{:<18} {:<9} rel L2 (corrected) {:.3e}  path vs classical {:.3e}",
            rep.case.id,
            rep.case.path.as_str(),
            last.map_or(f64::NAN, |r| r.rel_l2_corrected),
            rep.results.iter().map(|r| r.path_vs_classical_max).fold(0.0, f64::max),
        );
    }
    Ok(Outcome::from_failures(failures))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Norm,
    Be,
    Dilation,
    Qlsa,
    All,
}

impl Suite {
    const EACH: [Suite; 4] = [Suite::Norm, Suite::Be, Suite::Dilation, Suite::Qlsa];

    fn name(self) -> &'static str {
        match self {
            Suite::Norm => "norm",
            Suite::Be => "be",
            Suite::Dilation => "dilation",
            Suite::Qlsa => "qlsa",
            Suite::All => "all",
        }
    }

    fn run(self, cfg: &SuiteConfig) -> Result<Vec<CheckRow>> {
        Ok(match self {
            Suite::Norm => verify::norm_suite(cfg)?,
            Suite::Be => verify::be_suite(cfg)?,
            Suite::Dilation => {
                let mut rows = verify::dilation_suite(cfg)?;
                rows.extend(verify::usva_suite(cfg)?);
                rows
            }
            Suite::Qlsa => {
                let mut rows = verify::qlsa_suite(cfg)?;
                rows.extend(verify::lbm_qlsa_suite(cfg, &verify::default_lbm_instances()?)?);
                rows
            }
            Suite::All => unreachable!("expanded by the caller"),
        })
    }
}

/// Runs the named suites concurrently, writing `verify_<suite>.csv` each.
pub fn verify(suite: Suite, cfg: &SuiteConfig, out: &Path) -> Result<Outcome> {
    prepare_out(out)?;
    let suites: Vec<Suite> = if suite == Suite::All { Suite::EACH.to_vec() } else { vec![suite] };
    let results: Vec<(Suite, PathBuf, Vec<CheckRow>)> = thread::scope(|s| {
        let handles: Vec<_> = suites
            .iter()
            .map(|&su| {
                s.spawn(move || -> Result<(Suite, PathBuf, Vec<CheckRow>)> {
                    let rows = su.run(cfg)?;
                    let path = out.join(format!("verify_{}.csv", su.name()));
                    report::write_checks(create(&path)?, &rows)?;
                    Ok((su, path, rows))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("suite thread panicked")).collect::<Result<Vec<_>>>()
    })?;
    let mut failures = Vec::new();
    for (su, path, rows) in &results {
        let passed = rows.iter().filter(|r| r.pass).count();
        println!("{:<9} {passed}/{} checks passed -> {}", su.name(), rows.len(), path.display());
        failures.extend(
            rows.iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{}: {} = {:e} (bound {:e})", r.suite, r.check, r.value, r.bound)),
        );
    }
    Ok(Outcome::from_failures(failures))
}

/// Side-by-side analytic query counts over the configured sweep.
pub fn complexity(cfg: &ComplexityConfig, out: &Path) -> Result<Outcome> {
    prepare_out(out)?;
    let mut rows = Vec::new();
    for &eps in &cfg.epsilon {
        for &n_t in &cfg.n_t {
            let tm = timemarch_complexity(n_t, eps, cfg.norm_ratio, cfg.omega)?;
            let ql = qlsa_complexity(n_t, eps, 1.0, cfg.norm_ratio, cfg.omega)?;
            println!(
                "N_t = {n_t:<8} eps = {eps:<8e} timemarch {:>12.4e}  qlsa {:>12.4e}  ratio {:.4}",
                tm.headline_queries,
                ql.headline_queries,
                tm.headline_queries / ql.headline_queries
            );
            rows.push((tm, ql));
        }
    }
    let path = out.join("complexity.csv");
    report::write_complexity(create(&path)?, &rows)?;
    println!("-> {}", path.display());
    Ok(Outcome::Pass)
}
