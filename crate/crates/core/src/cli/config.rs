//! Layered `key = value` settings: config file first, flags on top.

use std::collections::BTreeMap;
use std::fmt::{Display, Write as _};
use std::path::Path;
use std::str::FromStr;

use super::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FitDensity,
    FitPmf,
    Simulate,
    Eval,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FitDensity => "fit-density",
            Mode::FitPmf => "fit-pmf",
            Mode::Simulate => "simulate",
            Mode::Eval => "eval",
        }
    }
}

const CHAIN_KEYS: [&str; 8] = ["kernel", "iters", "burnin", "thin", "seed", "hmax", "alpha-update", "shape-moves"];
pub const BASE_KEYS: [&str; 7] = ["xi0", "kappa", "a", "b", "psi0", "a-alpha", "b-alpha"];

/// Keys a mode accepts besides `output`, in the order they are written back.
pub fn keys(mode: Mode) -> Vec<&'static str> {
    let mut out = Vec::new();
    match mode {
        Mode::FitDensity => {
            out.extend(["input", "preset"]);
            out.extend(CHAIN_KEYS);
            out.extend(BASE_KEYS);
            out.push("grid-points");
        }
        Mode::FitPmf => {
            out.push("input");
            out.extend(CHAIN_KEYS);
            out.extend(BASE_KEYS);
            out.push("rounding");
        }
        Mode::Simulate => out.extend([
            "scenario",
            "n",
            "kernel",
            "replicates",
            "seed",
            "iters",
            "burnin",
            "thin",
            "hmax",
            "grid-points",
            "rounding",
            "s1-variance",
            "s3-gamma-scale",
        ]),
        Mode::Eval => out.extend(["input", "scenario", "s1-variance", "s3-gamma-scale"]),
    }
    out
}

#[derive(Debug, Clone)]
enum Origin {
    Flag,
    File { line: usize },
}

#[derive(Debug, Clone)]
pub struct Settings {
    mode: Mode,
    values: BTreeMap<String, (String, Origin)>,
}

impl Settings {
    pub fn new(mode: Mode) -> Self {
        Settings {
            mode,
            values: BTreeMap::new(),
        }
    }

    /// Reads `key = value` lines. Blank lines and `#` comments are skipped; a
    /// `mode` line must name this command.
    pub fn load_file(&mut self, path: &Path) -> Result<(), CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let at = |m: String| CliError::Usage(format!("{}:{}: {m}", path.display(), k + 1));
            let Some((key, value)) = line.split_once('=') else {
                return Err(at(format!("expected `key = value`, got `{line}`")));
            };
            let (key, value) = (key.trim(), value.trim());
            if key == "mode" {
                if value != self.mode.as_str() {
                    return Err(at(format!("config is for `{value}`, not `{}`", self.mode.as_str())));
                }
                continue;
            }
            self.insert(key, value, Origin::File { line: k + 1 }).map_err(|e| at(e.to_string()))?;
        }
        Ok(())
    }

    pub fn set_flag(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        self.insert(key, value, Origin::Flag)
    }

    fn insert(&mut self, key: &str, value: &str, origin: Origin) -> Result<(), CliError> {
        if key != "output" && !keys(self.mode).contains(&key) {
            return Err(CliError::Usage(format!("`{key}` does not apply to {}", self.mode.as_str())));
        }
        self.values.insert(key.to_string(), (value.to_string(), origin));
        Ok(())
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(|(v, _)| v.as_str())
    }

    /// Parsed value of `key`, if set.
    pub fn get<T>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        let Some((value, origin)) = self.values.get(key) else {
            return Ok(None);
        };
        value.parse().map(Some).map_err(|e| {
            let place = match origin {
                Origin::Flag => format!("--{key}"),
                Origin::File { line } => format!("config line {line}, `{key}`"),
            };
            CliError::Usage(format!("{place}: cannot use `{value}`: {e}"))
        })
    }

    /// Parsed value of `key`, checked against an inclusive range.
    pub fn get_in<T>(&self, key: &str, default: T, lo: T, hi: T) -> Result<T, CliError>
    where
        T: FromStr + PartialOrd + Display + Copy,
        T::Err: Display,
    {
        let v = self.get(key)?.unwrap_or(default);
        if !(v >= lo && v <= hi) {
            return Err(CliError::Usage(format!("`{key}` must lie in [{lo}, {hi}], got {v}")));
        }
        Ok(v)
    }
}

/// Fully resolved settings, written back in the config format so a bundle
/// can be refit from its own `config.txt`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Resolved(pub Vec<(&'static str, String)>);

impl Resolved {
    pub fn push(&mut self, key: &'static str, value: impl Display) {
        self.0.push((key, value.to_string()));
    }

    pub fn render(&self, mode: Mode) -> String {
        let mut out = format!("mode = {}\n", mode.as_str());
        for (k, v) in &self.0 {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Object(
            self.0
                .iter()
                .map(|(k, v)| (k.to_string(), serde_json::Value::String(v.clone())))
                .collect(),
        )
    }
}

/// Comma-separated list.
pub fn parse_list<T>(key: &str, text: &str) -> Result<Vec<T>, CliError>
where
    T: FromStr,
    T::Err: Display,
{
    text.split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|e| CliError::Usage(format!("`{key}`: cannot use `{}`: {e}", s.trim())))
        })
        .collect()
}

pub fn join<T: Display>(items: &[T]) -> String {
    items.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}
