use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::ExperimentConfig;
use super::run::{record_line, ExperimentReport};
use crate::criteria::Verdict;
use crate::error::{Error, Result};

pub const SUMMARY_CSV: &str = "summary.csv";
pub const HITS_JSONL: &str = "hits.jsonl";
pub const SUMMARY_MD: &str = "summary.md";
pub const CRITERIA_JSON: &str = "criteria.json";
pub const REPORT_JSON: &str = "report.json";
pub const CONFIG_JSON: &str = "config.json";
pub const MANIFEST_JSON: &str = "manifest.json";

pub const CSV_HEADER: &str = "checkpoint,mean_ratio,median_S,q10,q90,hit_frac_late";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReportFormat {
    Csv,
    Jsonl,
    Md,
}

impl ReportFormat {
    pub fn file_name(self) -> &'static str {
        match self {
            ReportFormat::Csv => SUMMARY_CSV,
            ReportFormat::Jsonl => HITS_JSONL,
            ReportFormat::Md => SUMMARY_MD,
        }
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv(report: &ExperimentReport) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for c in &report.checkpoints {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            c.n,
            opt(c.mean_ratio),
            c.median_s,
            opt(c.q10),
            opt(c.q90),
            c.hit_frac_late
        );
    }
    s
}

fn jsonl(report: &ExperimentReport) -> Result<String> {
    let mut s = String::new();
    for r in &report.records {
        s.push_str(&record_line(r)?);
        s.push('\n');
    }
    Ok(s)
}

fn md(report: &ExperimentReport) -> String {
    let mut s = String::from("# Experiment summary\n\n");
    let _ = writeln!(s, "- config digest: `{}`", report.config_digest);
    let _ = writeln!(s, "- horizon: {}", report.horizon);
    let _ = writeln!(s, "- trajectories: {}", report.trajectories);
    let _ = writeln!(s, "- seed: {}", report.run.seed);
    let _ = writeln!(s, "- E_n source: {:?}\n", report.mass_source);

    s.push_str(
        "## Verdicts\n\n| criterion | verdict | deciding clause | note |\n|---|---|---|---|\n",
    );
    for c in &report.criteria {
        // every clause of a satisfied conjunction holds; the last is the substantive one
        let mut matching = c.diagnostics.clauses.iter().filter(|cl| cl.verdict == c.verdict);
        let decisive = if c.verdict == Verdict::Satisfied {
            matching.last()
        } else {
            matching.next()
        };
        let decisive = decisive
            .map(|cl| (cl.name.as_str(), cl.note.as_deref().unwrap_or("")))
            .unwrap_or(("", ""));
        let _ = writeln!(
            s,
            "| {} | {:?} | {} | {} |",
            c.criterion, c.verdict, decisive.0, decisive.1
        );
    }
    if let Some(v) = &report.verdict {
        let _ = writeln!(
            s,
            "| prediction {:?} | {:?} | {} | {} |",
            v.prediction,
            v.outcome,
            v.margins
                .iter()
                .map(|m| format!("{} {} {:?} {}", m.name, m.value, m.bound, m.threshold))
                .collect::<Vec<_>>()
                .join("; "),
            v.note.as_deref().unwrap_or("")
        );
    }

    s.push_str("\n## Checkpoints\n\n| n | E_n | mean ratio | median S | q10 | q90 | late hits |\n|---|---|---|---|---|---|---|\n");
    for c in &report.checkpoints {
        let _ = writeln!(
            s,
            "| {} | {:.4} | {} | {} | {} | {} | {:.3} |",
            c.n,
            c.e_n,
            c.mean_ratio.map_or("-".into(), |x| format!("{x:.4}")),
            c.median_s,
            c.q10.map_or("-".into(), |x| format!("{x:.4}")),
            c.q90.map_or("-".into(), |x| format!("{x:.4}")),
            c.hit_frac_late
        );
    }
    s
}

/// The report in one format, byte-stable for a given report.
pub fn render(report: &ExperimentReport, format: ReportFormat) -> Result<String> {
    Ok(match format {
        ReportFormat::Csv => csv(report),
        ReportFormat::Jsonl => jsonl(report)?,
        ReportFormat::Md => md(report),
    })
}

/// Writes one format into `dir` and returns the file path.
pub fn emit_report(report: &ExperimentReport, format: ReportFormat, dir: &Path) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(format.file_name());
    std::fs::write(&path, render(report, format)?)?;
    Ok(path)
}

/// Writes every artifact of a run. On an IO failure a manifest of what was
/// written is left behind before the error is returned.
pub fn persist_run(cfg: &ExperimentConfig, report: &ExperimentReport, dir: &Path) -> Result<()> {
    let files: Vec<(&str, String)> = vec![
        (CONFIG_JSON, serde_json::to_string_pretty(cfg)?),
        (HITS_JSONL, render(report, ReportFormat::Jsonl)?),
        (SUMMARY_CSV, render(report, ReportFormat::Csv)?),
        (
            CRITERIA_JSON,
            serde_json::to_string_pretty(&report.criteria)?,
        ),
        (SUMMARY_MD, render(report, ReportFormat::Md)?),
        (REPORT_JSON, serde_json::to_string_pretty(report)?),
    ];
    let mut written = Vec::new();
    let result = std::fs::create_dir_all(dir).and_then(|_| {
        for (name, body) in &files {
            std::fs::write(dir.join(name), body)?;
            written.push(name.to_string());
        }
        Ok(())
    });
    match result {
        Ok(()) => Ok(()),
        Err(source) => {
            let manifest = json!({"written": written, "error": source.to_string()});
            // best effort: the directory itself may be unwritable
            let _ = std::fs::write(dir.join(MANIFEST_JSON), manifest.to_string());
            Err(Error::Persist {
                dir: dir.to_path_buf(),
                written,
                source,
            })
        }
    }
}
