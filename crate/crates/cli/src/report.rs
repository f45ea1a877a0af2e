//! Report documents and their json / csv / table renderings.
//!
//! All floating-point values are rounded to 12 significant digits before they
//! are stored in a report, so every format prints the same numbers.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;
use tsvsim::simulate::{format_number, round_sig12};
use tsvsim::stats::FrequencyReport;
use tsvsim::OutcomeDistribution;

use crate::Format;

#[derive(Clone, Debug, Serialize)]
pub struct AnalyticEntry {
    pub eigenvalue: f64,
    pub probability: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EmpiricalEntry {
    pub eigenvalue: f64,
    pub count: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChiSquareSummary {
    pub stat: Option<f64>,
    pub dof: usize,
    pub p: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct PostSelectionSummary {
    pub target: f64,
    pub selected: u64,
    pub total: u64,
    pub fraction: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Result of `run` for one scenario.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub params: Value,
    pub seed: u64,
    pub trials: u64,
    /// What the analytic and empirical columns describe.
    pub check: String,
    pub postselection: Option<PostSelectionSummary>,
    pub analytic: Vec<AnalyticEntry>,
    pub empirical: Vec<EmpiricalEntry>,
    pub chi_square: Option<ChiSquareSummary>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

pub fn analytic_entries(dist: &OutcomeDistribution) -> Vec<AnalyticEntry> {
    dist.entries
        .iter()
        .map(|e| AnalyticEntry {
            eigenvalue: round_sig12(e.eigenvalue),
            probability: round_sig12(e.probability),
        })
        .collect()
}

pub fn empirical_entries(freq: &FrequencyReport) -> Vec<EmpiricalEntry> {
    freq.counts
        .iter()
        .map(|c| EmpiricalEntry {
            eigenvalue: round_sig12(c.eigenvalue),
            count: c.count,
            estimate: round_sig12(c.estimate),
            ci_low: round_sig12(c.ci_low),
            ci_high: round_sig12(c.ci_high),
        })
        .collect()
}

pub fn chi_square_summary(freq: &FrequencyReport) -> Option<ChiSquareSummary> {
    freq.chi_square.as_ref().map(|c| ChiSquareSummary {
        stat: c.statistic.is_finite().then(|| round_sig12(c.statistic)),
        dof: c.dof,
        p: round_sig12(c.p_value),
    })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

fn params_inline(params: &Value) -> String {
    match params {
        Value::Object(map) if !map.is_empty() => map
            .iter()
            .map(|(k, v)| format!("{k}={}", v.as_str().map_or_else(|| v.to_string(), str::to_string)))
            .collect::<Vec<_>>()
            .join(" "),
        _ => "-".to_string(),
    }
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn opt_number(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

pub fn render_runs(reports: &[RunReport], format: Format) -> String {
    match format {
        Format::Json if reports.len() == 1 => json(&reports[0]),
        Format::Json => json(&reports),
        Format::Csv => {
            let mut out = String::from(
                "scenario,seed,trials,eigenvalue,analytic,count,estimate,ci_low,ci_high,chi_square,dof,p,verdict\n",
            );
            for r in reports {
                let verdict = if r.verdict == Verdict::Pass { "pass" } else { "fail" };
                let (stat, dof, p) = match &r.chi_square {
                    Some(c) => (opt_number(c.stat), c.dof.to_string(), format_number(c.p)),
                    None => (String::new(), String::new(), String::new()),
                };
                for e in &r.empirical {
                    let analytic = r
                        .analytic
                        .iter()
                        .find(|a| a.eigenvalue == e.eigenvalue)
                        .map(|a| a.probability);
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                        csv_escape(&r.scenario),
                        r.seed,
                        r.trials,
                        format_number(e.eigenvalue),
                        opt_number(analytic),
                        e.count,
                        format_number(e.estimate),
                        format_number(e.ci_low),
                        format_number(e.ci_high),
                        stat,
                        dof,
                        p,
                        verdict
                    );
                }
            }
            out
        }
        Format::Table => reports.iter().map(run_table).collect::<Vec<_>>().join("\n"),
    }
}

fn run_table(r: &RunReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario      {}", r.scenario);
    let _ = writeln!(out, "params        {}", params_inline(&r.params));
    let _ = writeln!(out, "seed          {}", r.seed);
    let _ = writeln!(out, "trials        {}", r.trials);
    let _ = writeln!(out, "check         {}", r.check);
    if let Some(ps) = &r.postselection {
        let _ = writeln!(
            out,
            "postselected  {} / {} with t2 = {} (fraction {})",
            ps.selected,
            ps.total,
            format_number(ps.target),
            format_number(ps.fraction)
        );
    }
    let _ = writeln!(
        out,
        "\n  {:>10}  {:>14}  {:>8}  {:>14}  {:>31}",
        "outcome", "analytic", "count", "estimate", "95% Wilson interval"
    );
    for e in &r.empirical {
        let analytic = r
            .analytic
            .iter()
            .find(|a| a.eigenvalue == e.eigenvalue)
            .map_or("-".to_string(), |a| format_number(a.probability));
        let _ = writeln!(
            out,
            "  {:>10}  {:>14}  {:>8}  {:>14}  [{:>14}, {:>14}]",
            format_number(e.eigenvalue),
            analytic,
            e.count,
            format_number(e.estimate),
            format_number(e.ci_low),
            format_number(e.ci_high)
        );
    }
    out.push('\n');
    match &r.chi_square {
        Some(c) => {
            let stat = c.stat.map_or("inf".to_string(), format_number);
            let _ = writeln!(out, "chi-square    stat={stat} dof={} p={}", c.dof, format_number(c.p));
        }
        None => {
            let _ = writeln!(out, "chi-square    not computed");
        }
    }
    let _ = writeln!(
        out,
        "verdict       {}",
        if r.verdict == Verdict::Pass { "pass" } else { "fail" }
    );
    for note in &r.notes {
        let _ = writeln!(out, "note          {note}");
    }
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct TermSummary {
    pub final_outcome: f64,
    pub weight: f64,
    pub conditional: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub theta_ab_deg: f64,
    pub theta_bc_deg: f64,
    pub mode: String,
    pub outcome: f64,
    pub terms: Vec<TermSummary>,
    pub lhs: f64,
    pub rhs: f64,
    pub delta: f64,
    pub verdict: String,
}

pub fn render_decomposition(r: &DecompositionReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => format!(
            "mode,theta_ab_deg,theta_bc_deg,outcome,lhs,rhs,delta,verdict\n{},{},{},{},{},{},{},{}\n",
            r.mode,
            format_number(r.theta_ab_deg),
            format_number(r.theta_bc_deg),
            format_number(r.outcome),
            format_number(r.lhs),
            format_number(r.rhs),
            format_number(r.delta),
            r.verdict
        ),
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "mode          {}", r.mode);
            let _ = writeln!(
                out,
                "angles        θab={}° θbc={}°",
                format_number(r.theta_ab_deg),
                format_number(r.theta_bc_deg)
            );
            let _ = writeln!(out, "outcome       {} at t", format_number(r.outcome));
            for t in &r.terms {
                let _ = writeln!(
                    out,
                    "term          Prob(t2={}) = {}  ×  ABL = {}",
                    format_number(t.final_outcome),
                    format_number(t.weight),
                    format_number(t.conditional)
                );
            }
            let _ = writeln!(out, "lhs           {}", format_number(r.lhs));
            let _ = writeln!(out, "rhs (Born)    {}", format_number(r.rhs));
            let _ = writeln!(out, "|lhs - rhs|   {}", format_number(r.delta));
            let _ = writeln!(out, "verdict       {}", r.verdict);
            out
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WeakReport {
    pub scenario: String,
    pub operator: String,
    pub g_over_sigma: f64,
    pub coupling: f64,
    pub pointer_width: f64,
    pub grid_points: usize,
    pub weak_value: ComplexValue,
    pub mean_shift: f64,
    pub shift_ratio: f64,
    pub deviation: f64,
}

pub fn render_weak(r: &WeakReport, pointer_csv: &str, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => pointer_csv.to_string(),
        Format::Table => format!(
            "{} {} at g/σ = {}: mean shift / g = {}, Re(weak value) = {}, |difference| = {}\n",
            r.scenario,
            r.operator,
            format_number(r.g_over_sigma),
            format_number(r.shift_ratio),
            format_number(r.weak_value.re),
            format_number(r.deviation)
        ),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AblOutcome {
    pub eigenvalue: f64,
    pub abl: f64,
    pub abl_swapped: f64,
    pub weak_value: Option<ComplexValue>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AblReport {
    pub observable: String,
    pub dim: usize,
    pub outcomes: Vec<AblOutcome>,
    pub swap_max_difference: f64,
    pub element_of_reality: Option<f64>,
    pub notes: Vec<String>,
}

pub fn render_abl(r: &AblReport, format: Format) -> String {
    match format {
        Format::Json => json(r),
        Format::Csv => {
            let mut out = String::from("eigenvalue,abl,abl_swapped,weak_re,weak_im\n");
            for o in &r.outcomes {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    format_number(o.eigenvalue),
                    format_number(o.abl),
                    format_number(o.abl_swapped),
                    opt_number(o.weak_value.as_ref().map(|w| w.re)),
                    opt_number(o.weak_value.as_ref().map(|w| w.im))
                );
            }
            out
        }
        Format::Table => {
            let mut out = String::new();
            let _ = writeln!(out, "observable    {} (dim {})", r.observable, r.dim);
            let _ = writeln!(
                out,
                "\n  {:>10}  {:>14}  {:>14}  {:>30}",
                "outcome", "ABL", "ABL swapped", "weak value of projector"
            );
            for o in &r.outcomes {
                let weak = o.weak_value.as_ref().map_or("undefined".to_string(), |w| {
                    format!("{} {:+}i", format_number(w.re), round_sig12(w.im))
                });
                let _ = writeln!(
                    out,
                    "  {:>10}  {:>14}  {:>14}  {:>30}",
                    format_number(o.eigenvalue),
                    format_number(o.abl),
                    format_number(o.abl_swapped),
                    weak
                );
            }
            out.push('\n');
            let _ = writeln!(out, "swap max |Δ|  {}", format_number(r.swap_max_difference));
            let _ = writeln!(
                out,
                "element of reality  {}",
                r.element_of_reality.map_or("none".to_string(), format_number)
            );
            for note in &r.notes {
                let _ = writeln!(out, "note          {note}");
            }
            out
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioListing {
    pub name: &'static str,
    pub arguments: &'static str,
    pub description: &'static str,
}

pub fn render_listing(items: &[ScenarioListing], format: Format) -> String {
    match format {
        Format::Json => json(&items),
        Format::Csv => {
            let mut out = String::from("name,arguments,description\n");
            for i in items {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    i.name,
                    csv_escape(i.arguments),
                    csv_escape(i.description)
                );
            }
            out
        }
        Format::Table => items
            .iter()
            .map(|i| format!("{:<20} {:<52} {}\n", i.name, i.arguments, i.description))
            .collect(),
    }
}
