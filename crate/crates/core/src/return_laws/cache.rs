//! CSV cache for `ν` laws, keyed by `(l_max, k_max)`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::nu::{nu_law, NuLaw};
use crate::error::{Error, Result};
use crate::exec::Exec;

pub fn cache_file_name(l_max: u64, k_max: u64) -> String {
    format!("nu_L{l_max}_K{k_max}.csv")
}

pub fn write_nu_csv(nu: &NuLaw) -> String {
    let mut out = String::from("kind,param,truncation\n");
    let _ = writeln!(out, "nu,{},{}", nu.l_max(), nu.k_max());
    out.push_str("index,probability\n");
    for (k, p) in nu.values().iter().enumerate() {
        let _ = writeln!(out, "{},{:.17e}", 2 * k, p);
    }
    out
}

pub fn read_nu_csv(text: &str, path: &Path) -> Result<NuLaw> {
    let corrupt = |reason: String| Error::CacheCorrupted {
        path: path.display().to_string(),
        reason,
    };
    let mut lines = text.lines();
    if lines.next() != Some("kind,param,truncation") {
        return Err(corrupt("missing header".into()));
    }
    let meta = lines.next().ok_or_else(|| corrupt("missing metadata row".into()))?;
    let fields: Vec<&str> = meta.split(',').collect();
    if fields.len() != 3 || fields[0] != "nu" {
        return Err(corrupt(format!("bad metadata row {meta:?}")));
    }
    let l_max: u64 = fields[1].parse().map_err(|_| corrupt("bad l_max".into()))?;
    let k_max: u64 = fields[2].parse().map_err(|_| corrupt("bad k_max".into()))?;
    if lines.next() != Some("index,probability") {
        return Err(corrupt("missing column header".into()));
    }
    let mut probs = Vec::new();
    for (row, line) in lines.enumerate() {
        let (idx, p) = line
            .split_once(',')
            .ok_or_else(|| corrupt(format!("row {row} is not index,probability")))?;
        let idx: u64 = idx.parse().map_err(|_| corrupt(format!("row {row}: bad index")))?;
        if idx != 2 * row as u64 {
            return Err(corrupt(format!("row {row}: expected index {}", 2 * row)));
        }
        let p: f64 = p.parse().map_err(|_| corrupt(format!("row {row}: bad probability")))?;
        probs.push(p);
    }
    NuLaw::from_parts(l_max, k_max, probs).map_err(|e| corrupt(e.to_string()))
}

/// Load `ν` from `dir` when cached, otherwise compute and store it. Returns
/// the law and whether it came from the cache.
pub fn load_or_compute_nu(dir: Option<&Path>, l_max: u64, k_max: u64, exec: Exec) -> Result<(NuLaw, bool)> {
    let Some(dir) = dir else {
        return Ok((nu_law(l_max, k_max, exec)?, false));
    };
    let path: PathBuf = dir.join(cache_file_name(l_max, k_max));
    if path.exists() {
        let text = fs::read_to_string(&path)?;
        let nu = read_nu_csv(&text, &path)?;
        if nu.l_max() != l_max || nu.k_max() != k_max {
            return Err(Error::CacheCorrupted {
                path: path.display().to_string(),
                reason: "truncation bounds do not match the file name".into(),
            });
        }
        return Ok((nu, true));
    }
    let nu = nu_law(l_max, k_max, exec)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension("csv.tmp");
    fs::write(&tmp, write_nu_csv(&nu))?;
    fs::rename(&tmp, &path)?;
    Ok((nu, false))
}
