//! Parameter resolution: built-in defaults, then the INI file, then the
//! command-line overrides.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use ini::Ini;
use randvort::lattice_sum::LatticeRange;
use randvort::weights::Distribution;
use randvort::Point2;

use crate::error::CliError;

/// Keys accepted by every command.
pub const RUN_KEYS: [&str; 3] = ["seed", "threads", "out"];

/// `(key, default)` pairs of one command.
pub type Schema = &'static [(&'static str, &'static str)];

#[derive(Debug, Clone)]
pub struct Params {
    values: BTreeMap<String, String>,
    pub config_text: Option<String>,
}

/// Split trailing arguments into `key -> value` pairs. Accepts `--key value`,
/// `--key=value` and `key=value`; dashes in keys become underscores.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < args.len() {
        let a = &args[i];
        let (key, value) = if let Some(rest) = a.strip_prefix("--") {
            match rest.split_once('=') {
                Some((k, v)) => (k.to_string(), v.to_string()),
                None => {
                    let v = args
                        .get(i + 1)
                        .ok_or_else(|| CliError::Config(format!("option --{rest} needs a value")))?;
                    i += 1;
                    (rest.to_string(), v.clone())
                }
            }
        } else if let Some((k, v)) = a.split_once('=') {
            (k.to_string(), v.to_string())
        } else {
            return Err(CliError::Config(format!("unexpected argument '{a}'; use key=value or --key value")));
        };
        out.push((key.replace('-', "_"), value));
        i += 1;
    }
    Ok(out)
}

impl Params {
    /// Resolve `schema` for `command`. The INI file may hold a `[run]`
    /// section (seed, threads, out) and a section named after the command.
    pub fn resolve(
        command: &str,
        schema: Schema,
        config: Option<&Path>,
        overrides: &[(String, String)],
    ) -> Result<Self, CliError> {
        let known = |k: &str| RUN_KEYS.contains(&k) || schema.iter().any(|(s, _)| *s == k);
        let mut values: BTreeMap<String, String> =
            schema.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        values.insert("seed".into(), "1".into());
        values.insert("threads".into(), "0".into());
        let mut config_text = None;
        if let Some(path) = config {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
            let ini = Ini::load_from_str(&text)
                .map_err(|e| CliError::Config(format!("cannot parse config {}: {e}", path.display())))?;
            for (section, props) in ini.iter() {
                let name = section.unwrap_or("run");
                if name != "run" && name != command {
                    continue;
                }
                for (k, v) in props.iter() {
                    let k = k.trim().replace('-', "_");
                    let allowed = if name == "run" { RUN_KEYS.contains(&k.as_str()) } else { known(&k) };
                    if !allowed {
                        return Err(CliError::Config(format!("unknown key '{k}' in section [{name}]")));
                    }
                    values.insert(k, v.trim().to_string());
                }
            }
            config_text = Some(text);
        }
        for (k, v) in overrides {
            if !known(k) {
                return Err(CliError::Config(format!("unknown parameter '{k}' for {command}")));
            }
            values.insert(k.clone(), v.clone());
        }
        Ok(Self { values, config_text })
    }

    pub fn set(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| CliError::Config(format!("cannot parse {key} = '{raw}'")))
    }

    pub fn positive(&self, key: &str) -> Result<f64, CliError> {
        let v: f64 = self.get(key)?;
        if v > 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(CliError::Config(format!("{key} must be positive (got {v})")))
        }
    }

    pub fn count(&self, key: &str, min: usize) -> Result<usize, CliError> {
        let v: usize = self.get(key)?;
        if v >= min {
            Ok(v)
        } else {
            Err(CliError::Config(format!("{key} must be at least {min} (got {v})")))
        }
    }

    pub fn list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let raw = self.raw(key);
        let v: Result<Vec<f64>, _> = raw.split(',').map(|s| s.trim().parse::<f64>()).collect();
        match v {
            Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
            _ => Err(CliError::Config(format!("{key} must be a comma-separated list of numbers (got '{raw}')"))),
        }
    }

    pub fn positive_list(&self, key: &str) -> Result<Vec<f64>, CliError> {
        let v = self.list(key)?;
        if v.iter().all(|x| *x > 0.0) {
            Ok(v)
        } else {
            Err(CliError::Config(format!("{key} entries must be positive")))
        }
    }

    /// Points written `x1:x2`, separated by commas.
    pub fn points(&self, key: &str) -> Result<Vec<Point2>, CliError> {
        let raw = self.raw(key);
        let bad = || CliError::Config(format!("{key} must look like 1:0,10:0 (got '{raw}')"));
        raw.split(',')
            .map(|p| {
                let (a, b) = p.split_once(':').ok_or_else(bad)?;
                let x = Point2::new(a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
                if x.is_finite() { Ok(x) } else { Err(bad()) }
            })
            .collect()
    }

    pub fn range(&self, key: &str) -> Result<LatticeRange, CliError> {
        self.raw(key).parse().map_err(|e| CliError::Config(format!("{key}: {e}")))
    }

    pub fn distribution(&self, key: &str) -> Result<Distribution, CliError> {
        self.raw(key).parse().map_err(|e| CliError::Config(format!("{key}: {e}")))
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.get("seed")
    }

    pub fn threads(&self) -> Result<usize, CliError> {
        self.get("threads")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCHEMA: Schema = &[("radii", "1,10"), ("angle", "0")];

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn override_forms() {
        let o = parse_overrides(&args(&["--radii", "1,2", "angle=0.5", "--mc-samples=3"])).unwrap();
        assert_eq!(o[0], ("radii".into(), "1,2".into()));
        assert_eq!(o[1], ("angle".into(), "0.5".into()));
        assert_eq!(o[2], ("mc_samples".into(), "3".into()));
        assert!(parse_overrides(&args(&["--radii"])).is_err());
        assert!(parse_overrides(&args(&["stray"])).is_err());
    }

    #[test]
    fn precedence_and_unknown_keys() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.ini");
        std::fs::write(&path, "[run]\nseed = 5\n[growth]\nangle = 0.25\nradii = 3\n[other]\nzzz = 1\n").unwrap();
        let o = parse_overrides(&args(&["--radii", "7,8"])).unwrap();
        let p = Params::resolve("growth", SCHEMA, Some(&path), &o).unwrap();
        assert_eq!(p.seed().unwrap(), 5);
        assert_eq!(p.get::<f64>("angle").unwrap(), 0.25);
        assert_eq!(p.list("radii").unwrap(), vec![7.0, 8.0]);
        let bad = parse_overrides(&args(&["--nope", "1"])).unwrap();
        assert!(Params::resolve("growth", SCHEMA, None, &bad).is_err());
        std::fs::write(&path, "[growth]\nnope = 1\n").unwrap();
        assert!(Params::resolve("growth", SCHEMA, Some(&path), &[]).is_err());
    }

    #[test]
    fn typed_getters() {
        let o = parse_overrides(&args(&["radii=1,-2"])).unwrap();
        let p = Params::resolve("growth", SCHEMA, None, &o).unwrap();
        assert!(p.positive_list("radii").is_err());
        assert_eq!(p.list("radii").unwrap(), vec![1.0, -2.0]);
        let o = parse_overrides(&args(&["radii=1:0,10:7.5"])).unwrap();
        let p = Params::resolve("growth", SCHEMA, None, &o).unwrap();
        assert_eq!(p.points("radii").unwrap(), vec![Point2::new(1.0, 0.0), Point2::new(10.0, 7.5)]);
    }
}
