//! Parameter sweeps over scenario keys.

use rayon::prelude::*;

use super::{Calibration, ScenarioConfig, ScenarioError, Summary};

/// `key=v1,v2,...` with `key` either a dotted path (`pairs.0.thickness_mm`)
/// or a bare key applied wherever it occurs.
#[derive(Debug, Clone, PartialEq)]
pub struct Variation {
    pub key: String,
    pub values: Vec<String>,
}

pub fn parse_vary(spec: &str) -> Result<Variation, ScenarioError> {
    let (key, list) = spec.split_once('=').ok_or_else(|| ScenarioError::Invalid {
        key: spec.to_string(),
        line: None,
        reason: "expected key=v1,v2,...".to_string(),
    })?;
    let key = key.trim();
    if key.is_empty() {
        return Err(ScenarioError::UnknownKey(String::new()));
    }
    let values: Vec<String> = list
        .split(',')
        .map(|v| v.trim().to_string())
        .filter(|v| !v.is_empty())
        .collect();
    if values.is_empty() {
        return Err(ScenarioError::EmptyList(key.to_string()));
    }
    Ok(Variation {
        key: key.to_string(),
        values,
    })
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    toml::from_str::<toml::Table>(&doc)
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

fn replace_everywhere(table: &mut toml::Table, key: &str, value: &toml::Value) -> usize {
    let mut hits = 0;
    for (k, v) in table.iter_mut() {
        if k == key && !v.is_table() {
            *v = value.clone();
            hits += 1;
        } else {
            hits += replace_in(v, key, value);
        }
    }
    hits
}

fn replace_in(v: &mut toml::Value, key: &str, value: &toml::Value) -> usize {
    match v {
        toml::Value::Table(t) => replace_everywhere(t, key, value),
        toml::Value::Array(a) => a.iter_mut().map(|x| replace_in(x, key, value)).sum(),
        _ => 0,
    }
}

/// Sets `key` to `raw` (parsed as a TOML value, else a string). Returns the
/// number of places changed; unknown keys are an error.
pub fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<usize, ScenarioError> {
    let value = parse_value(raw);
    if !key.contains('.') {
        let hits = replace_everywhere(table, key, &value);
        return if hits == 0 {
            Err(ScenarioError::UnknownKey(key.to_string()))
        } else {
            Ok(hits)
        };
    }
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().expect("dotted key has parts");
    let mut node = &mut *table;
    for p in path {
        node = match node.get_mut(*p) {
            Some(toml::Value::Table(t)) => t,
            _ => return Err(ScenarioError::UnknownKey(key.to_string())),
        };
    }
    match node.get_mut(*last) {
        Some(v) if !v.is_table() => {
            *v = value;
            Ok(1)
        }
        _ => Err(ScenarioError::UnknownKey(key.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: String,
    pub summary: Summary,
}

/// Runs one variant per value on the rayon pool; rows keep the input order.
pub fn sweep(text: &str, variation: &Variation, calibration: &Calibration) -> Result<Vec<SweepRow>, ScenarioError> {
    let base: toml::Table = toml::from_str(text).map_err(|e| ScenarioError::from_toml(text, &e))?;
    let variants = variation
        .values
        .iter()
        .map(|v| {
            let mut t = base.clone();
            apply_override(&mut t, &variation.key, v)?;
            let doc = toml::to_string(&t).expect("table serializes");
            let cfg = ScenarioConfig::parse(&doc)?;
            Ok((v.clone(), cfg.build(&doc)?))
        })
        .collect::<Result<Vec<_>, ScenarioError>>()?;
    variants
        .into_par_iter()
        .map(|(value, sc)| {
            let r = sc.run(calibration)?;
            Ok(SweepRow {
                value,
                summary: r.summary,
            })
        })
        .collect()
}

pub fn sweep_csv(key: &str, rows: &[SweepRow]) -> String {
    let mut out = format!("{key},displacement_bl,final_heading_deg,strokes,no_snap\n");
    for r in rows {
        let s = &r.summary;
        out.push_str(&format!(
            "{},{:.6},{:.6},{},{}\n",
            r.value,
            s.displacement_bl,
            s.final_heading_deg,
            s.strokes.len(),
            s.no_snap
        ));
    }
    out
}
