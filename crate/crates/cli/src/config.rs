//! Config file loading and `--set` overrides.
//!
//! The file is JSON: the scenario fields (`phy`, `links`, `assignment`,
//! `acs`) at the top level, plus optional `solver` and `ga` sections.
//! Durations are microseconds except `dmax_ms`; payloads are bytes.

use anyhow::{anyhow, bail, Context, Result};
use mledca::fixed_point::SolverOptions;
use mledca::optimizer::GaConfig;
use mledca::scenario::MloScenario;
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Deserialize)]
pub struct RunConfig {
    #[serde(flatten)]
    pub scenario: MloScenario,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub ga: GaConfig,
}

/// Load a config, apply `key=value` overrides, and deserialize.
pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    let mut value: serde_json::Value =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    for entry in overrides {
        let (key, raw) = entry
            .split_once('=')
            .ok_or_else(|| anyhow!("override `{entry}` is not key=value"))?;
        set_path(&mut value, key, parse_scalar(raw))?;
    }
    let config: RunConfig = serde_json::from_value(value).context("interpreting config")?;
    Ok(config)
}

/// Parse an override value: JSON scalar if possible, else a string.
pub fn parse_scalar(raw: &str) -> serde_json::Value {
    serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()))
}

/// Set a dotted path (`acs.1.aifsn`, `ga.population`) in a JSON tree. The
/// path must lead through existing structure; this is an override tool, not
/// a constructor.
pub fn set_path(root: &mut serde_json::Value, path: &str, new: serde_json::Value) -> Result<()> {
    let mut cursor = root;
    let parts: Vec<&str> = path.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let last = i + 1 == parts.len();
        match cursor {
            serde_json::Value::Object(map) => {
                if last {
                    if !map.contains_key(*part) {
                        bail!("unknown field `{part}` in `{path}`");
                    }
                    map.insert(part.to_string(), new);
                    return Ok(());
                }
                cursor = map
                    .get_mut(*part)
                    .ok_or_else(|| anyhow!("unknown field `{part}` in `{path}`"))?;
            }
            serde_json::Value::Array(items) => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| anyhow!("`{part}` is not an array index in `{path}`"))?;
                let slot = items
                    .get_mut(idx)
                    .ok_or_else(|| anyhow!("index {idx} out of bounds in `{path}`"))?;
                if last {
                    *slot = new;
                    return Ok(());
                }
                cursor = slot;
            }
            _ => bail!("`{path}` descends into a scalar"),
        }
    }
    bail!("empty override path")
}

/// A swept field: dotted path plus inclusive start:end:step values.
#[derive(Debug, Clone)]
pub struct Sweep {
    pub path: String,
    pub values: Vec<f64>,
}

impl Sweep {
    /// Parse `path=start:end:step`.
    pub fn parse(spec: &str) -> Result<Sweep> {
        let (path, rng) = spec
            .split_once('=')
            .ok_or_else(|| anyhow!("sweep `{spec}` is not path=start:end:step"))?;
        let parts: Vec<&str> = rng.split(':').collect();
        if parts.len() != 3 {
            bail!("sweep `{spec}` needs start:end:step");
        }
        let start: f64 = parts[0].parse().context("sweep start")?;
        let end: f64 = parts[1].parse().context("sweep end")?;
        let step: f64 = parts[2].parse().context("sweep step")?;
        if step <= 0.0 || end < start {
            bail!("sweep `{spec}` must have positive step and end >= start");
        }
        let mut values = Vec::new();
        let mut v = start;
        while v <= end + 1e-9 {
            values.push(v);
            v += step;
        }
        Ok(Sweep { path: path.to_string(), values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn override_paths() {
        let mut v: serde_json::Value =
            serde_json::from_str(r#"{"a": {"b": 1}, "list": [{"x": 2}]}"#).unwrap();
        set_path(&mut v, "a.b", serde_json::json!(5)).unwrap();
        set_path(&mut v, "list.0.x", serde_json::json!(7)).unwrap();
        assert_eq!(v["a"]["b"], 5);
        assert_eq!(v["list"][0]["x"], 7);
        assert!(set_path(&mut v, "a.missing", serde_json::json!(1)).is_err());
        assert!(set_path(&mut v, "list.3.x", serde_json::json!(1)).is_err());
    }

    #[test]
    fn sweep_parsing() {
        let s = Sweep::parse("acs.1.aifsn=2:15:1").unwrap();
        assert_eq!(s.values.len(), 14);
        let s = Sweep::parse("acs.1.txop_us=0:8160:544").unwrap();
        assert_eq!(s.values.len(), 16);
        assert!(Sweep::parse("nonsense").is_err());
        assert!(Sweep::parse("a=1:0:1").is_err());
    }
}
