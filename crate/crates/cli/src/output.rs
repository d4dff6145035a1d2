//! Deterministic file emission: CSV curves with 17-significant-digit numbers,
//! versioned JSON, and the aligned verdict table.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

use gravcat_core::rates::RateReport;
use gravcat_core::scenario::ScenarioResult;
use gravcat_core::two_site::{EventKind, ForceRecord};
use gravcat_core::verdict::VerdictCell;

use crate::config::{fmt_full, OutputFormat, RunConfig};

pub const SCHEMA_VERSION: u32 = 1;

pub type IoResult<T> = std::io::Result<T>;

fn want(cfg: &RunConfig, format: OutputFormat) -> bool {
    cfg.formats.contains(&format)
}

fn write_file(dir: &Path, name: &str, content: &str, files: &mut Vec<PathBuf>) -> IoResult<()> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, content)?;
    files.push(path);
    Ok(())
}

fn json_doc<T: Serialize>(payload: &T) -> String {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        schema_version: u32,
        #[serde(flatten)]
        payload: &'a T,
    }
    let mut text = serde_json::to_string_pretty(&Doc { schema_version: SCHEMA_VERSION, payload })
        .expect("serializable");
    text.push('\n');
    text
}

fn opt(value: Option<f64>) -> String {
    value.map(fmt_full).unwrap_or_default()
}

pub fn rates_csv(reports: &[RateReport]) -> String {
    let mut out = String::from(
        "theory,intrinsic_rate,effective_cm_rate,collapse_width,damping_time,hits_within_coherence,collapse_effective_on_cat\n",
    );
    for r in reports {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.theory,
            fmt_full(r.intrinsic_rate),
            fmt_full(r.effective_cm_rate),
            opt(r.collapse_width),
            opt(r.damping_time),
            r.hits_within_coherence,
            r.collapse_effective_on_cat,
        ));
    }
    out
}

/// CSV for one trajectory: time, force, event_kind. Events are attached to
/// the first sample at or after their timestamp.
pub fn trajectory_csv(record: &ForceRecord) -> String {
    let mut out = String::from("time,force,event_kind\n");
    let mut events = record.events.iter().peekable();
    for (i, (&t, &f)) in record.times.iter().zip(&record.forces).enumerate() {
        let mut kinds: Vec<&str> = Vec::new();
        while events
            .peek()
            .map(|e| e.time <= t || i + 1 == record.times.len())
            .unwrap_or(false)
        {
            let e = events.next().unwrap();
            kinds.push(match e.kind {
                EventKind::Jump => "jump",
                EventKind::Hit => "hit",
                EventKind::Tunnel => "tunnel",
            });
        }
        out.push_str(&format!("{},{},{}\n", fmt_full(t), fmt_full(f), kinds.join(";")));
    }
    out
}

pub fn mean_csv(result: &ScenarioResult) -> String {
    let mut out = String::from("t,mean_force,stderr,analytic\n");
    if let Some(ens) = &result.ensemble {
        for (i, &t) in ens.times.iter().enumerate() {
            let analytic = result
                .analytic
                .as_ref()
                .map(|a| fmt_full(a.mean[i]))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_full(t),
                fmt_full(ens.mean[i]),
                fmt_full(ens.stderr[i]),
                analytic
            ));
        }
    }
    out
}

pub fn corr_csv(result: &ScenarioResult) -> String {
    let mut out = String::from("lag,corr,stderr,analytic\n");
    if let Some(ens) = &result.ensemble {
        for (i, &lag) in ens.corr_lags.iter().enumerate() {
            let analytic = result
                .analytic
                .as_ref()
                .map(|a| fmt_full(a.corr[i]))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_full(lag),
                fmt_full(ens.corr[i]),
                fmt_full(ens.corr_stderr[i]),
                analytic
            ));
        }
    }
    out
}

pub fn verdict_csv(cells: &[VerdictCell]) -> String {
    let mut out = String::from("theory,protocol,signal_class,rationale_codes,constant_prob,jump_prob\n");
    for cell in cells {
        let v = &cell.verdict;
        let codes: Vec<String> = v
            .rationale_codes
            .iter()
            .map(|c| serde_json::to_value(c).unwrap().as_str().unwrap().to_string())
            .collect();
        let (cp, jp) = v
            .split
            .map(|s| (fmt_full(s.constant_single_minimum_prob), fmt_full(s.telegraph_jump_prob)))
            .unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            v.theory,
            v.protocol,
            v.signal_class,
            codes.join(";"),
            cp,
            jp
        ));
    }
    out
}

/// Aligned text table of the verdict cells, one row per theory.
pub fn verdict_text(cells: &[VerdictCell]) -> String {
    let mut protocols: Vec<String> = Vec::new();
    for cell in cells {
        if !protocols.contains(&cell.verdict.protocol) {
            protocols.push(cell.verdict.protocol.clone());
        }
    }
    let mut theories: Vec<String> = Vec::new();
    for cell in cells {
        let name = cell.verdict.theory.to_string();
        if !theories.contains(&name) {
            theories.push(name);
        }
    }
    let theory_w = theories.iter().map(|t| t.len()).max().unwrap_or(6).max("theory".len());
    let col_w = cells
        .iter()
        .map(|c| c.verdict.signal_class.name().len())
        .max()
        .unwrap_or(10)
        .max(protocols.iter().map(|p| p.len()).max().unwrap_or(0));

    let mut out = format!("{:<theory_w$}", "theory");
    for p in &protocols {
        out.push_str(&format!("  {p:<col_w$}"));
    }
    out.push('\n');
    out.push_str(&"-".repeat(theory_w + protocols.len() * (col_w + 2)));
    out.push('\n');
    for t in &theories {
        out.push_str(&format!("{t:<theory_w$}"));
        for p in &protocols {
            let class = cells
                .iter()
                .find(|c| c.verdict.theory.to_string() == *t && c.verdict.protocol == *p)
                .map(|c| c.verdict.signal_class.name())
                .unwrap_or("");
            out.push_str(&format!("  {class:<col_w$}"));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct VerdictDoc<'a> {
    cells: &'a [VerdictCell],
}

pub fn write_verdict_outputs(
    cfg: &RunConfig,
    dir: &Path,
    cells: &[VerdictCell],
    files: &mut Vec<PathBuf>,
) -> IoResult<()> {
    if want(cfg, OutputFormat::Json) {
        write_file(dir, "verdict.json", &json_doc(&VerdictDoc { cells }), files)?;
    }
    if want(cfg, OutputFormat::Csv) {
        write_file(dir, "verdict.csv", &verdict_csv(cells), files)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct RatesDoc<'a> {
    protocol: &'a gravcat_core::ExperimentProtocol,
    reports: &'a [RateReport],
}

pub fn write_rates_outputs(
    cfg: &RunConfig,
    dir: &Path,
    reports: &[RateReport],
    files: &mut Vec<PathBuf>,
) -> IoResult<()> {
    if want(cfg, OutputFormat::Csv) {
        write_file(dir, "rates.csv", &rates_csv(reports), files)?;
    }
    if want(cfg, OutputFormat::Json) {
        let doc = RatesDoc { protocol: &cfg.protocol, reports };
        write_file(dir, "rates.json", &json_doc(&doc), files)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct ScenarioDoc<'a> {
    theory: String,
    protocol: &'a gravcat_core::ExperimentProtocol,
    f0: f64,
    probe_sensitivity: Option<f64>,
    verdict: &'a gravcat_core::Verdict,
    rates: &'a RateReport,
    empirical_class: Option<gravcat_core::scenario::EmpiricalClass>,
    consistent: Option<bool>,
    n_traj: usize,
    ensemble: Option<&'a gravcat_core::EnsembleSummary>,
}

/// Emit the scenario file set: verdict.json, rates.csv, mean.csv, corr.csv,
/// traj_<i>.csv. With n_traj = 0 only verdict.json and rates.csv appear.
pub fn write_scenario_outputs(
    cfg: &RunConfig,
    dir: &Path,
    result: &ScenarioResult,
    files: &mut Vec<PathBuf>,
) -> IoResult<()> {
    let doc = ScenarioDoc {
        theory: result.verdict.theory.to_string(),
        protocol: &cfg.protocol,
        f0: result.f0,
        probe_sensitivity: cfg.probe_sensitivity,
        verdict: &result.verdict,
        rates: &result.rates,
        empirical_class: result.empirical_class,
        consistent: result.consistent,
        n_traj: result.records.len(),
        ensemble: result.ensemble.as_ref(),
    };
    write_file(dir, "verdict.json", &json_doc(&doc), files)?;
    write_file(dir, "rates.csv", &rates_csv(std::slice::from_ref(&result.rates)), files)?;
    if result.records.is_empty() {
        return Ok(());
    }
    if want(cfg, OutputFormat::Csv) {
        write_file(dir, "mean.csv", &mean_csv(result), files)?;
        write_file(dir, "corr.csv", &corr_csv(result), files)?;
        for (i, rec) in result.records.iter().enumerate() {
            write_file(dir, &format!("traj_{i}.csv"), &trajectory_csv(rec), files)?;
        }
    }
    Ok(())
}
