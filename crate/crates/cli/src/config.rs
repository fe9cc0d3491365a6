//! Experiment configuration files (TOML, or JSON with the same layout).
//!
//! ```toml
//! command = "count run"
//! seed = 7
//! out = "counts.csv"
//!
//! [args]
//! poly = "1,-3,2"
//! radii = [128, 256, 512]
//! ```
//!
//! Each key of `[args]` becomes the command-line flag of the same name, so a
//! config file and a command line share one schema.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: String,
    pub seed: Option<u64>,
    pub precision: Option<u32>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub check: bool,
    #[serde(default)]
    pub args: BTreeMap<String, Value>,
}

pub fn load(path: &Path) -> Result<ExperimentConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("config {}: {e}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| format!("config {}: {e}", path.display()))
}

fn scalar(v: &Value, key: &str, path: &Path) -> Result<String, String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        _ => Err(format!("config {}: args.{key} must be a string, number or list of those", path.display())),
    }
}

/// Command-line words equivalent to the config (program name first).
pub fn to_argv(cfg: &ExperimentConfig, path: &Path) -> Result<Vec<String>, String> {
    let mut argv = vec!["nondiv".to_string()];
    argv.extend(cfg.command.split_whitespace().map(String::from));
    for (key, v) in &cfg.args {
        let flag = format!("--{key}");
        match v {
            Value::Bool(true) => argv.push(flag),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts = items.iter().map(|x| scalar(x, key, path)).collect::<Result<Vec<_>, _>>()?;
                argv.push(flag);
                argv.push(parts.join(","));
            }
            Value::String(s) if key == "name" => argv.push(s.clone()),
            other => {
                argv.push(flag);
                argv.push(scalar(other, key, path)?);
            }
        }
    }
    if let Some(s) = cfg.seed {
        argv.extend(["--seed".into(), s.to_string()]);
    }
    if let Some(p) = cfg.precision {
        argv.extend(["--precision".into(), p.to_string()]);
    }
    if let Some(w) = cfg.workers {
        argv.extend(["--workers".into(), w.to_string()]);
    }
    if let Some(o) = &cfg.out {
        // relative outputs resolve against the config's directory
        let o = if o.is_relative() { path.parent().unwrap_or(Path::new(".")).join(o) } else { o.clone() };
        argv.extend(["--out".into(), o.display().to_string()]);
    }
    if cfg.check {
        argv.push("--check".into());
    }
    Ok(argv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toml_and_json_agree() {
        let t: ExperimentConfig = toml::from_str(
            "command = \"count run\"\nseed = 3\ncheck = true\n[args]\npoly = \"1,0,-2\"\nradii = [4, 8]\n",
        )
        .unwrap();
        let j: ExperimentConfig = serde_json::from_str(
            r#"{"command": "count run", "seed": 3, "check": true, "args": {"poly": "1,0,-2", "radii": [4, 8]}}"#,
        )
        .unwrap();
        let p = Path::new("x.toml");
        assert_eq!(to_argv(&t, p).unwrap(), to_argv(&j, p).unwrap());
        assert_eq!(
            to_argv(&t, p).unwrap(),
            ["nondiv", "count", "run", "--poly", "1,0,-2", "--radii", "4,8", "--seed", "3", "--check"]
        );
        assert!(toml::from_str::<ExperimentConfig>("command = \"x\"\nbogus = 1\n").is_err());
    }
}
