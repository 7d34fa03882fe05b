//! Flat `key=value` configuration, overridable by flags of the same names.
//!
//! Every value a command reads is recorded (defaults included) so that the
//! run directory gets an exact echo of the effective configuration.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{CliError, CliResult};
use crate::output::fmt_f64;

/// Every key any command understands.
pub const KEYS: &[&str] = &[
    "a", "b", "A", "beta", "V0", "q", "lambda", "j", "R", "Nx", "Ny", "tol", "max_iter", "dt", "T", "outdir",
    "eps", "slack", "h", "nu", "t_min", "stamps", "lambda_min", "lambda_max", "n_lambda", "betas", "levels",
    "fit_rows", "n", "n_theta", "margin",
];

#[derive(Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
    used: RefCell<BTreeMap<String, String>>,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_text(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("line {}: expected key=value, got {line:?}", n + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Accepts plain floats, `p/q` fractions and `pi` multiples such as `pi/2`.
pub fn parse_number(s: &str) -> Option<f64> {
    let atom = |t: &str| -> Option<f64> {
        let t = t.trim();
        if t == "pi" {
            return Some(std::f64::consts::PI);
        }
        if let Some(m) = t.strip_suffix("*pi") {
            return m.trim().parse::<f64>().ok().map(|m| m * std::f64::consts::PI);
        }
        t.parse().ok()
    };
    match s.split_once('/') {
        Some((p, q)) => Some(atom(p)? / atom(q)?),
        None => atom(s),
    }
}

impl Config {
    /// Merges the optional file with flag values (flags win). Keys outside
    /// `allowed` are rejected, wherever they come from.
    pub fn load(
        file: Option<&Path>,
        flags: Vec<(String, String)>,
        command: &str,
        allowed: &[&str],
    ) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        if let Some(p) = file {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Validation(format!("cannot read config {}: {e}", p.display())))?;
            for (k, v) in parse_text(&text)? {
                values.insert(k, v);
            }
        }
        for (k, v) in flags {
            values.insert(k, v);
        }
        for k in values.keys() {
            if !KEYS.contains(&k.as_str()) {
                return Err(CliError::Validation(format!("unknown key {k:?}")));
            }
            if k != "outdir" && !allowed.contains(&k.as_str()) {
                return Err(CliError::Validation(format!("key {k:?} is not used by {command}")));
            }
        }
        Ok(Config { values, used: RefCell::new(BTreeMap::new()) })
    }

    pub fn from_pairs(pairs: &[(&str, &str)], command: &str, allowed: &[&str]) -> CliResult<Self> {
        let flags = pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        Config::load(None, flags, command, allowed)
    }

    fn record(&self, key: &str, v: String) {
        self.used.borrow_mut().insert(key.to_string(), v);
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn opt_f64(&self, key: &str) -> CliResult<Option<f64>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(s) => {
                let v = parse_number(s)
                    .filter(|v| !v.is_nan())
                    .ok_or_else(|| CliError::Validation(format!("{key} = {s:?} is not a number")))?;
                self.record(key, fmt_f64(v));
                Ok(Some(v))
            }
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> CliResult<f64> {
        match self.opt_f64(key)? {
            Some(v) => Ok(v),
            None => {
                self.record(key, fmt_f64(default));
                Ok(default)
            }
        }
    }

    pub fn usize(&self, key: &str, default: usize) -> CliResult<usize> {
        let v = match self.values.get(key) {
            None => default,
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| CliError::Validation(format!("{key} = {s:?} is not a nonnegative integer")))?,
        };
        self.record(key, v.to_string());
        Ok(v)
    }

    /// Comma-separated list.
    pub fn f64_list(&self, key: &str, default: &[f64]) -> CliResult<Vec<f64>> {
        let v = match self.values.get(key) {
            None => default.to_vec(),
            Some(s) => s
                .split(',')
                .map(|t| parse_number(t).ok_or_else(|| CliError::Validation(format!("{key}: bad entry {t:?}"))))
                .collect::<CliResult<Vec<_>>>()?,
        };
        self.record(key, v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(","));
        Ok(v)
    }

    /// Every value read so far, one `key=value` per line, sorted.
    pub fn echo(&self) -> String {
        self.used.borrow().iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }
}
