//! Per-subject result assembly and report emission (JSON, wide CSV, and
//! long-format plot tables).

use crate::admissibility::{admissibility_matrix, with_attention_rules, Dataset};
use crate::diagnostics::{diagnostics, DiagnosticsReport};
use crate::error::Result;
use crate::inference::{permutation_test, PermTestResult};
use crate::rules::RuleId;
use crate::solver::{solve, SolveMethod, SolverSettings};
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Duration;

pub const FORMAT_VERSION: u32 = 1;

/// One run's full configuration, echoed into every report for reproducibility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Rule library; the attention rules are always forced in.
    pub library: Vec<RuleId>,
    /// Heuristic restarts for the headline value.
    pub restarts: usize,
    /// Permutations B of the concentration test.
    pub permutations: usize,
    /// Heuristic restarts per permutation.
    pub inner_restarts: usize,
    /// Random deletion orders for stability scores.
    pub orders: usize,
    pub seed: u64,
    pub method: SolveMethod,
    pub time_budget_secs: f64,
}

impl RunConfig {
    /// An empty `subset` selects the full baseline library.
    pub fn new(subset: &[RuleId]) -> Self {
        let library = if subset.is_empty() {
            crate::admissibility::baseline_library()
        } else {
            with_attention_rules(subset)
        };
        RunConfig {
            library,
            restarts: 100,
            permutations: 500,
            inner_restarts: 100,
            orders: 100,
            seed: 0,
            method: SolveMethod::Auto,
            time_budget_secs: 10.0,
        }
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            method: self.method,
            restarts: self.restarts,
            seed: self.seed,
            time_budget: Duration::from_secs_f64(self.time_budget_secs),
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::new(&[])
    }
}

/// Everything the pipeline knows about one subject.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectReport {
    pub format_version: u32,
    pub subject: String,
    pub t: usize,
    pub alpha: f64,
    pub joint_menus: usize,
    pub mrci: f64,
    pub numerator: u64,
    pub n_eff: f64,
    pub method: SolveMethod,
    pub certified: bool,
    pub seed: u64,
    pub coverage: Vec<(RuleId, f64)>,
    pub gains: Vec<(RuleId, f64)>,
    pub stability: Vec<(RuleId, f64)>,
    pub p_value: Option<f64>,
    pub p_raw: Option<f64>,
    pub permutations: Option<usize>,
}

/// Run the full pipeline (solve, diagnostics, permutation test) on one
/// subject.
pub fn analyze_subject(d: &Dataset, config: &RunConfig) -> SubjectReport {
    let mat = admissibility_matrix(d, &config.library);
    let settings = config.solver_settings();
    let solved = solve(&mat, &settings);
    let diag: DiagnosticsReport = diagnostics(&mat, config.orders, config.seed, &settings);
    let perm: PermTestResult = permutation_test(
        d,
        &config.library,
        config.permutations,
        config.inner_restarts,
        config.seed,
    );
    SubjectReport {
        format_version: FORMAT_VERSION,
        subject: d.subject_id.clone(),
        t: d.len(),
        alpha: d.alpha(),
        joint_menus: d.observations.iter().filter(|o| o.menu.is_joint()).count(),
        mrci: solved.value,
        numerator: solved.numerator,
        n_eff: 1.0 / solved.value,
        method: solved.method,
        certified: solved.certified,
        seed: config.seed,
        coverage: mat.coverage(),
        gains: diag.gains,
        stability: diag.stability,
        p_value: Some(perm.p_value),
        p_raw: Some(perm.p_raw),
        permutations: Some(perm.b),
    }
}

/// JSON emission: config echo plus all subject reports, stable field order.
pub fn write_reports_json<W: Write>(
    reports: &[SubjectReport],
    config: &RunConfig,
    mut out: W,
) -> Result<()> {
    let doc = serde_json::json!({
        "format_version": FORMAT_VERSION,
        "config": config,
        "subjects": reports,
    });
    serde_json::to_writer_pretty(&mut out, &doc)?;
    out.write_all(b"\n")?;
    Ok(())
}

fn lookup(pairs: &[(RuleId, f64)], rule: RuleId) -> String {
    pairs
        .iter()
        .find(|(r, _)| *r == rule)
        .map(|(_, v)| v.to_string())
        .unwrap_or_default()
}

/// Wide CSV: one row per subject. `library` fixes the per-rule column set so
/// an empty report list still yields a stable header.
pub fn write_reports_csv<W: Write>(
    reports: &[SubjectReport],
    library: &[RuleId],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "subject".to_string(),
        "t".into(),
        "alpha".into(),
        "mrci".into(),
        "n_eff".into(),
        "numerator".into(),
        "method".into(),
        "certified".into(),
        "p_value".into(),
        "p_raw".into(),
        "seed".into(),
    ];
    let scored: Vec<RuleId> = library.iter().copied().filter(|r| !r.is_attention()).collect();
    header.extend(library.iter().map(|r| format!("cov_{r}")));
    header.extend(scored.iter().map(|r| format!("gain_{r}")));
    header.extend(scored.iter().map(|r| format!("kappa_{r}")));
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            r.subject.clone(),
            r.t.to_string(),
            r.alpha.to_string(),
            r.mrci.to_string(),
            r.n_eff.to_string(),
            r.numerator.to_string(),
            r.method.name().to_string(),
            r.certified.to_string(),
            r.p_value.map(|p| p.to_string()).unwrap_or_default(),
            r.p_raw.map(|p| p.to_string()).unwrap_or_default(),
            r.seed.to_string(),
        ];
        row.extend(library.iter().map(|&f| lookup(&r.coverage, f)));
        row.extend(scored.iter().map(|&f| lookup(&r.gains, f)));
        row.extend(scored.iter().map(|&f| lookup(&r.stability, f)));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_long<W: Write>(
    out: W,
    value_name: &str,
    rows: impl Iterator<Item = (String, RuleId, f64)>,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["subject", "rule", value_name])?;
    for (subject, rule, value) in rows {
        w.write_record([subject, rule.to_string(), value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Long-format coverage table (one row per subject and rule), plot-ready.
pub fn write_coverage_long<W: Write>(reports: &[SubjectReport], out: W) -> Result<()> {
    write_long(
        out,
        "coverage",
        reports.iter().flat_map(|r| {
            r.coverage.iter().map(move |&(f, v)| (r.subject.clone(), f, v))
        }),
    )
}

/// Long-format concentration-gain table.
pub fn write_gains_long<W: Write>(reports: &[SubjectReport], out: W) -> Result<()> {
    write_long(
        out,
        "gain",
        reports.iter().flat_map(|r| {
            r.gains.iter().map(move |&(f, v)| (r.subject.clone(), f, v))
        }),
    )
}

/// Long-format stability-score table.
pub fn write_stability_long<W: Write>(reports: &[SubjectReport], out: W) -> Result<()> {
    write_long(
        out,
        "kappa",
        reports.iter().flat_map(|r| {
            r.stability.iter().map(move |&(f, v)| (r.subject.clone(), f, v))
        }),
    )
}

/// Per-subject p-value table for histogramming.
pub fn write_pvalues_long<W: Write>(reports: &[SubjectReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["subject", "mrci", "p_value", "p_raw"])?;
    for r in reports {
        w.write_record([
            r.subject.clone(),
            r.mrci.to_string(),
            r.p_value.map(|p| p.to_string()).unwrap_or_default(),
            r.p_raw.map(|p| p.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
