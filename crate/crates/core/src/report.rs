//! CSV output. Floats use 17 significant digits and a `.` decimal point.

use std::io::Write;

use csv::Writer;

use crate::complexity::ComplexityReport;
use crate::dilation::StepRecord;
use crate::error::Result;
use crate::gauss::BenchReport;
use crate::qlsa::SingularBoundReport;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn bool_str(b: bool) -> &'static str {
    if b {
        "true"
    } else {
        "false"
    }
}

/// One row per node and evaluated step.
pub fn write_bench_case<W: Write>(out: W, report: &BenchReport) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record([
        "step",
        "ix",
        "iy",
        "phi_numeric",
        "phi_classical",
        "phi_analytic_nominal",
        "phi_analytic_corrected",
    ])?;
    let grid = &report.case.grid;
    for r in &report.results {
        for j in 0..grid.nodes() {
            let (ix, iy) = grid.coords(j);
            w.write_record([
                r.step.to_string(),
                ix.to_string(),
                iy.to_string(),
                fmt_f64(r.phi_numeric[j]),
                fmt_f64(r.phi_classical[j]),
                fmt_f64(r.phi_nominal[j]),
                fmt_f64(r.phi_corrected[j]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub const SUMMARY_HEADER: [&str; 10] = [
    "case_id",
    "path",
    "tau_star",
    "steps",
    "rel_l2_nominal",
    "rel_l2_corrected",
    "rel_linf_nominal",
    "rel_linf_corrected",
    "mass_drift",
    "path_vs_classical_max",
];

pub fn write_bench_summary<W: Write>(out: W, reports: &[BenchReport]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER)?;
    for rep in reports {
        for r in &rep.results {
            w.write_record([
                rep.case.id.clone(),
                rep.case.path.to_string(),
                fmt_f64(rep.case.tau_star),
                r.step.to_string(),
                fmt_f64(r.rel_l2_nominal),
                fmt_f64(r.rel_l2_corrected),
                fmt_f64(r.rel_linf_nominal),
                fmt_f64(r.rel_linf_corrected),
                fmt_f64(r.mass_drift),
                fmt_f64(r.path_vs_classical_max),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Counter-block norms per step of a dilated run.
pub fn write_dilation_records<W: Write>(out: W, records: &[StepRecord]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    let counters = records.first().map(|r| r.counter_norms.len()).unwrap_or(0);
    let mut header = vec!["step".to_string()];
    header.extend((0..counters).map(|c| format!("counter_norm_{c}")));
    header.push("success_prob_running".into());
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![r.step.to_string()];
        row.extend(r.counter_norms.iter().map(|&x| fmt_f64(x)));
        row.push(fmt_f64(r.success_prob));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bound_reports<W: Write>(out: W, reports: &[SingularBoundReport]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["N_t", "block_dim", "sigma_max", "sigma_min", "bound_max", "bound_min", "pass"])?;
    for r in reports {
        w.write_record([
            r.n_t.to_string(),
            r.block_dim.to_string(),
            fmt_f64(r.sigma_max),
            fmt_f64(r.sigma_min),
            fmt_f64(r.bound_max),
            fmt_f64(r.bound_min),
            bool_str(r.passes()).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Side-by-side query counts; each pair shares `N_t` and `ε`.
pub fn write_complexity<W: Write>(out: W, rows: &[(ComplexityReport, ComplexityReport)]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record([
        "N_t",
        "epsilon",
        "norm_ratio",
        "alpha_m",
        "delta",
        "timemarch_per_step",
        "timemarch_usva_per_step",
        "timemarch_g_bound",
        "timemarch_queries",
        "timemarch_total",
        "qlsa_per_solve",
        "qlsa_queries",
        "ratio",
    ])?;
    for (tm, ql) in rows {
        w.write_record([
            tm.n_t.to_string(),
            fmt_f64(tm.epsilon),
            fmt_f64(tm.norm_ratio),
            fmt_f64(tm.alpha_m),
            fmt_f64(tm.delta.unwrap_or(f64::NAN)),
            fmt_f64(tm.queries_per_step),
            fmt_f64(tm.usva_queries.unwrap_or(f64::NAN)),
            fmt_f64(tm.g_bound),
            fmt_f64(tm.headline_queries),
            fmt_f64(tm.total_queries),
            fmt_f64(ql.queries_per_step),
            fmt_f64(ql.headline_queries),
            fmt_f64(tm.headline_queries / ql.headline_queries),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// A single named verification outcome.
#[derive(Clone, Debug)]
pub struct CheckRow {
    pub suite: &'static str,
    pub check: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

pub fn write_checks<W: Write>(out: W, rows: &[CheckRow]) -> Result<()> {
    let mut w = Writer::from_writer(out);
    w.write_record(["suite", "check", "value", "bound", "pass"])?;
    for r in rows {
        w.write_record([
            r.suite.to_string(),
            r.check.clone(),
            fmt_f64(r.value),
            fmt_f64(r.bound),
            bool_str(r.pass).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauss::{case_1d, run_case, Path};

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn summary_rows_per_step() {
        let rep = run_case(&case_1d(1.0, vec![0, 2], Path::Marching).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_bench_summary(&mut buf, &[rep.clone()]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.lines().nth(1).unwrap().starts_with("gauss1d_tau1,marching,"));
        let mut buf = Vec::new();
        write_bench_case(&mut buf, &rep).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + 2 * 128);
    }
}
