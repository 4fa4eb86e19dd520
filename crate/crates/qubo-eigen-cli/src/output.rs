//! Trace/summary serialization. Files are written atomically (temp file in
//! the target directory, then rename) so partially written cells never
//! appear, and floats use Rust's shortest round-trip formatting so traces
//! are byte-identical across runs with the same seeds.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use qubo_eigen::eigensolver::TraceRecord;

pub const TRACE_HEADER: &str = "iter,phase,lambda,eval_err,evec_err,precision,anneal_s";

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn trace_csv(trace: &[TraceRecord]) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for r in trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.iteration,
            r.phase.as_str(),
            r.lambda,
            fmt_opt(r.eigenvalue_error),
            fmt_opt(r.eigenvector_error),
            r.precision,
            r.anneal_seconds,
        ));
    }
    out
}

pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f =
            fs::File::create(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, &text)
}
