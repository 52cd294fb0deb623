use std::path::Path;

use serde_json::{json, Map, Value};
use udg_core::C64;

pub fn cval(z: C64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn fmt_f(x: f64) -> String {
    if x.abs() < 1e-14 {
        "0.0".into()
    } else {
        format!("{x:?}")
    }
}

fn is_complex(v: &Value) -> Option<(f64, f64)> {
    let m = v.as_object()?;
    if m.len() != 2 {
        return None;
    }
    Some((m.get("re")?.as_f64()?, m.get("im")?.as_f64()?))
}

fn human(v: &Value) -> String {
    if let Some((re, im)) = is_complex(v) {
        return if im.abs() < 1e-14 {
            fmt_f(re)
        } else {
            format!(
                "{} {} {}i",
                fmt_f(re),
                if im < 0.0 { '-' } else { '+' },
                fmt_f(im.abs())
            )
        };
    }
    match v {
        Value::Number(n) => n.as_f64().map(fmt_f).unwrap_or_else(|| n.to_string()),
        Value::String(s) => s.clone(),
        Value::Array(a) if a.iter().all(|x| !x.is_object() && !x.is_array()) => {
            a.iter().map(human).collect::<Vec<_>>().join(", ")
        }
        other => other.to_string(),
    }
}

fn print_tree(m: &Map<String, Value>, indent: usize) {
    for (k, v) in m {
        match v {
            Value::Object(inner) if is_complex(v).is_none() => {
                println!("{:indent$}{k}:", "");
                print_tree(inner, indent + 2);
            }
            Value::Array(a) if a.iter().any(|x| x.is_object()) => {
                println!("{:indent$}{k}:", "");
                for (i, x) in a.iter().enumerate() {
                    match x.as_object() {
                        Some(o) => {
                            println!("{:w$}[{i}]", "", w = indent + 2);
                            print_tree(o, indent + 4);
                        }
                        None => println!("{:w$}{}", "", human(x), w = indent + 2),
                    }
                }
            }
            _ => println!("{:indent$}{k}: {}", "", human(v)),
        }
    }
}

/// Flattens a report into rows: `rows` entries if present, else one row.
fn csv_rows(report: &Value) -> Vec<Map<String, Value>> {
    fn flatten(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    flatten(&key, x, out);
                }
            }
            Value::Array(_) => {
                out.insert(prefix.into(), Value::String(v.to_string()));
            }
            _ => {
                out.insert(prefix.into(), v.clone());
            }
        }
    }
    let rows: Vec<&Value> = match report.get("rows").and_then(Value::as_array) {
        Some(r) => r.iter().collect(),
        None => vec![report],
    };
    rows.into_iter()
        .map(|r| {
            let mut m = Map::new();
            flatten("", r, &mut m);
            m
        })
        .collect()
}

fn write_csv(report: &Value, path: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let rows = csv_rows(report);
    let mut header: Vec<String> = Vec::new();
    for r in &rows {
        for k in r.keys() {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(&header)?;
    for r in &rows {
        w.write_record(header.iter().map(|k| match r.get(k) {
            None | Some(Value::Null) => String::new(),
            Some(Value::String(s)) => s.clone(),
            Some(v) => v.to_string(),
        }))?;
    }
    w.flush()?;
    Ok(())
}

/// Keys come out sorted since serde_json maps are ordered.
pub fn emit(
    report: &Value,
    as_json: bool,
    skip_text: bool,
    csv: Option<&Path>,
) -> Result<(), Box<dyn std::error::Error>> {
    if as_json {
        println!("{}", serde_json::to_string_pretty(report)?);
    } else if !skip_text {
        if let Some(m) = report.as_object() {
            print_tree(m, 0);
        }
    }
    if let Some(p) = csv {
        write_csv(report, p)?;
    }
    Ok(())
}
