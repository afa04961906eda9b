//! File formats: instance JSON, report JSON, and the CSV tables consumed
//! by plotting tools.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};

use pvqa_core::dynamics::Distribution;
use pvqa_core::model::SpinConfig;
use pvqa_core::problems::{parse_qkp_benchmark, ProblemInstance, QkpInstance};

use crate::harness::{ExperimentReport, SummaryRow, TunePoint};

pub fn read_instance(path: &Path) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading instance file {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing instance file {}", path.display()))
}

pub fn write_instance(path: &Path, instance: &ProblemInstance) -> Result<()> {
    let text = serde_json::to_string_pretty(instance)?;
    fs::write(path, text + "\n")
        .with_context(|| format!("writing instance file {}", path.display()))?;
    Ok(())
}

/// Reads a QKP base in the plain-text benchmark layout.
pub fn read_qkp_benchmark(path: &Path) -> Result<QkpInstance> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading benchmark file {}", path.display()))?;
    parse_qkp_benchmark(&text)
        .map_err(|e| anyhow::anyhow!("parsing benchmark file {}: {e}", path.display()))
}

pub fn report_json(report: &ExperimentReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(report)? + "\n")
}

pub fn write_report(path: &Path, report: &ExperimentReport) -> Result<()> {
    fs::write(path, report_json(report)?)
        .with_context(|| format!("writing report {}", path.display()))?;
    Ok(())
}

/// One report per line, for appending across runs.
pub fn reports_json_lines(reports: &[ExperimentReport]) -> Result<String> {
    let mut out = String::new();
    for r in reports {
        out.push_str(&serde_json::to_string(r)?);
        out.push('\n');
    }
    Ok(out)
}

pub const REPORT_CSV_HEADER: &str = "instance,variant,schedule,T,A,a_prime,p_fs,raw_p_fs,c_ave,p_suc,residual,c_opt,evaluations,iterations,wall_time_s";

pub fn report_csv_row(r: &ExperimentReport) -> String {
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.instance,
        r.variant.as_str(),
        r.schedule_family,
        r.horizon,
        r.penalty_a,
        r.a_prime,
        r.p_fs,
        r.raw_p_fs,
        opt(r.c_ave),
        r.p_suc,
        opt(r.residual),
        r.c_opt,
        r.evaluations,
        r.iterations,
        r.wall_time_s,
    )
}

pub const SUMMARY_CSV_HEADER: &str = "variant,T,schedule,A,p_fs_mean,p_fs_std,c_ave_mean,c_ave_std,p_suc_mean,p_suc_std,residual_mean,residual_std,instances";

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(SUMMARY_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.variant.as_str(),
            r.horizon,
            r.schedule,
            r.mean_penalty_a,
            r.p_fs.mean,
            r.p_fs.std,
            r.c_ave.mean,
            r.c_ave.std,
            r.p_suc.mean,
            r.p_suc.std,
            r.residual.mean,
            r.residual.std,
            r.instances,
        ));
    }
    out
}

/// `config,probability` rows over the full support, configs as bitstrings
/// with variable 0 first.
pub fn distribution_csv(d: &Distribution) -> String {
    let n = d.n();
    let mut out = String::from("config,probability\n");
    for (b, &p) in d.mass().iter().enumerate() {
        out.push_str(&format!("{},{}\n", SpinConfig::from_index(b, n), p));
    }
    out
}

/// Flip sequences of the greedy repair for every populated configuration,
/// as a JSON map bitstring → [flipped variables…].
pub fn repair_traces_json(
    repair: &pvqa_core::repair::RepairModel,
    d: &Distribution,
) -> Result<String> {
    let n = d.n();
    let mut map = serde_json::Map::new();
    for (b, &p) in d.mass().iter().enumerate() {
        if p > 0.0 {
            let x = SpinConfig::from_index(b, n);
            let (_, flips) = repair.greedy_repair_trace(&x);
            map.insert(x.to_string(), serde_json::json!(flips));
        }
    }
    Ok(serde_json::to_string_pretty(&serde_json::Value::Object(map))? + "\n")
}

/// `iteration,value,p0,p1,…` rows of an optimizer trace.
pub fn trace_csv(trace: &[(Vec<f64>, f64)]) -> String {
    let dim = trace.first().map_or(0, |(p, _)| p.len());
    let mut out = String::from("iteration,value");
    for i in 0..dim {
        out.push_str(&format!(",p{i}"));
    }
    out.push('\n');
    for (iter, (params, value)) in trace.iter().enumerate() {
        out.push_str(&format!("{iter},{value}"));
        for p in params {
            out.push_str(&format!(",{p}"));
        }
        out.push('\n');
    }
    out
}

pub const TUNE_CSV_HEADER: &str = "A,raw_p_fs,c_ave,admissible";

pub fn tune_csv(points: &[TunePoint]) -> String {
    let mut out = String::from(TUNE_CSV_HEADER);
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            p.a,
            p.raw_p_fs,
            p.c_ave.map_or(String::new(), |c| c.to_string()),
            p.admissible,
        ));
    }
    out
}
