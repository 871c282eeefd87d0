use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde_json::{json, Map, Value};

pub const FORMAT_VERSION: u32 = 1;

/// Decimal with 18 significant digits.
pub fn dec(x: f64) -> String {
    format!("{x:.17e}")
}

/// The command and its effective settings, embedded in every output.
pub fn config(command: &str, fields: &[(&str, Value)]) -> Value {
    let mut m = Map::new();
    m.insert("format_version".into(), json!(FORMAT_VERSION));
    m.insert("command".into(), json!(command));
    for (k, v) in fields {
        m.insert((*k).into(), v.clone());
    }
    Value::Object(m)
}

pub fn csv_header(config: &Value) -> String {
    format!("# recwalk format-version {FORMAT_VERSION}\n# config: {config}\n")
}

pub fn json_document(config: &Value, body: Value) -> String {
    let mut doc = Map::new();
    doc.insert("format_version".into(), json!(FORMAT_VERSION));
    doc.insert("config".into(), config.clone());
    if let Value::Object(fields) = body {
        for (k, v) in fields {
            doc.insert(k, v);
        }
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
    s.push('\n');
    s
}

pub fn emit(path: Option<&Path>, text: &str) -> io::Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, text)
        }
        None => io::stdout().lock().write_all(text.as_bytes()),
    }
}
