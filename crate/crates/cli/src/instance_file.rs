//! Instance file parsing: a single JSON object
//!
//! ```json
//! { "s": "3/2", "jobs": [ { "size": 1, "favorite": 1 },
//!                         { "size": "2/3", "favorite": 2 } ] }
//! ```
//!
//! `s` and `size` accept numbers or rational strings `"p/q"`; numbers
//! are converted by exact decimal parsing (never through `f64`), which
//! is why the JSON tree is walked by hand over arbitrary-precision
//! numbers. Unknown fields are rejected.

use favgame_core::model::{Instance, Job, Machine};
use favgame_core::scalar::Scalar;
use serde_json::Value;

pub fn parse_instance(text: &str) -> Result<Instance, String> {
    let root: Value = serde_json::from_str(text).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = root.as_object().ok_or("top level must be an object")?;
    reject_unknown(obj, &["s", "jobs"], "top level")?;

    let s = scalar_field(obj.get("s").ok_or("missing field `s`")?, "s")?;
    if s < Scalar::one() {
        return Err(format!("s must be ≥ 1, got {s}"));
    }

    let jobs_value = obj.get("jobs").ok_or("missing field `jobs`")?;
    let jobs_array = jobs_value.as_array().ok_or("`jobs` must be an array")?;
    let mut jobs = Vec::with_capacity(jobs_array.len());
    for (i, entry) in jobs_array.iter().enumerate() {
        let job = entry
            .as_object()
            .ok_or_else(|| format!("job {} must be an object", i + 1))?;
        reject_unknown(job, &["size", "favorite"], &format!("job {}", i + 1))?;
        let size = scalar_field(
            job.get("size").ok_or_else(|| format!("job {}: missing `size`", i + 1))?,
            "size",
        )?;
        if size <= Scalar::zero() {
            return Err(format!("job {}: size must be positive, got {size}", i + 1));
        }
        let favorite = match job
            .get("favorite")
            .ok_or_else(|| format!("job {}: missing `favorite`", i + 1))?
            .as_u64()
        {
            Some(1) => Machine::M1,
            Some(2) => Machine::M2,
            _ => return Err(format!("job {}: `favorite` must be 1 or 2", i + 1)),
        };
        jobs.push(Job::new(size, favorite));
    }
    Ok(Instance::new(s, jobs))
}

fn reject_unknown(
    obj: &serde_json::Map<String, Value>,
    allowed: &[&str],
    context: &str,
) -> Result<(), String> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(format!("{context}: unknown field `{key}`"));
        }
    }
    Ok(())
}

/// A number (taken verbatim from the JSON text) or a rational string.
fn scalar_field(value: &Value, name: &str) -> Result<Scalar, String> {
    let raw = match value {
        Value::Number(n) => n.to_string(),
        Value::String(s) => s.clone(),
        _ => return Err(format!("`{name}` must be a number or a rational string")),
    };
    raw.parse()
        .map_err(|e| format!("`{name}` = `{raw}`: {e}"))
}
