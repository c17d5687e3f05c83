//! Report files: `<scenario>.<study>.csv`, `<scenario>.<study>.json` and a
//! `.meta.json` sidecar holding everything that changes between runs.

use std::path::{Path, PathBuf};

use anyhow::Context;
use serde_json::{json, Map, Value};

use crate::studies::StudyOutput;

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// CSV with the union of all row keys as header, in first-seen order.
pub fn to_csv(rows: &[Map<String, Value>]) -> anyhow::Result<Vec<u8>> {
    let mut header: Vec<&String> = Vec::new();
    for r in rows {
        for k in r.keys() {
            if !header.contains(&k) {
                header.push(k);
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header.iter().map(|k| k.as_str()))?;
    for r in rows {
        w.write_record(header.iter().map(|k| r.get(*k).map(cell).unwrap_or_default()))?;
    }
    Ok(w.into_inner()?)
}

pub fn study_json(scenario: &str, tolerance_scale: f64, out: &StudyOutput) -> Value {
    json!({
        "scenario": scenario,
        "study": out.study,
        "passed": out.passed,
        "tolerance_scale": tolerance_scale,
        "checks": out.checks,
        "summary": out.summary,
        "rows": out.rows,
    })
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn pretty(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_vec_pretty(v).expect("json serializes");
    s.push(b'\n');
    s
}

/// Run-dependent metadata, kept out of the deterministic payloads.
pub struct Meta<'a> {
    pub config_path: &'a Path,
    pub overrides: &'a [String],
    pub elapsed_seconds: f64,
}

/// Writes the three files of one study and returns the payload paths.
pub fn write_study(
    dir: &Path,
    scenario: &str,
    tolerance_scale: f64,
    out: &StudyOutput,
    meta: &Meta,
) -> anyhow::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let stem = format!("{scenario}.{}", out.study);
    let csv_path = dir.join(format!("{stem}.csv"));
    let json_path = dir.join(format!("{stem}.json"));
    write(&csv_path, &to_csv(&out.rows)?)?;
    write(&json_path, &pretty(&study_json(scenario, tolerance_scale, out)))?;
    let sidecar = json!({
        "generated_at": chrono::Utc::now().to_rfc3339(),
        "tool_version": env!("CARGO_PKG_VERSION"),
        "config": meta.config_path.display().to_string(),
        "overrides": meta.overrides,
        "elapsed_seconds": meta.elapsed_seconds,
    });
    write(&dir.join(format!("{stem}.meta.json")), &pretty(&sidecar))?;
    Ok(vec![csv_path, json_path])
}

/// The aggregate written by `report`: one row per check across all studies.
pub fn write_aggregate(dir: &Path, scenario: &str, tolerance_scale: f64, outs: &[StudyOutput]) -> anyhow::Result<()> {
    let rows: Vec<Map<String, Value>> = outs
        .iter()
        .flat_map(|o| {
            o.checks.iter().map(move |c| {
                let mut m = Map::new();
                m.insert("study".into(), json!(o.study));
                m.insert("check".into(), json!(c.name));
                m.insert("value".into(), json!(c.value));
                m.insert("comparison".into(), json!(c.comparison));
                m.insert("threshold".into(), json!(c.threshold));
                m.insert("passed".into(), json!(c.passed));
                m
            })
        })
        .collect();
    let studies: Vec<Value> =
        outs.iter().map(|o| json!({ "study": o.study, "passed": o.passed, "checks": o.checks.len() })).collect();
    let payload = json!({
        "scenario": scenario,
        "passed": outs.iter().all(|o| o.passed),
        "tolerance_scale": tolerance_scale,
        "studies": studies,
    });
    write(&dir.join(format!("{scenario}.report.csv")), &to_csv(&rows)?)?;
    write(&dir.join(format!("{scenario}.report.json")), &pretty(&payload))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_union_of_columns() {
        let a: Map<String, Value> = serde_json::from_str(r#"{"x": 1, "y": "s"}"#).unwrap();
        let b: Map<String, Value> = serde_json::from_str(r#"{"x": 2.5, "z": null, "w": true}"#).unwrap();
        let text = String::from_utf8(to_csv(&[a, b]).unwrap()).unwrap();
        assert_eq!(text, "x,y,z,w\n1,s,,\n2.5,,,true\n");
    }
}
