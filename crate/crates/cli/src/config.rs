//! Run options from flags, with `key=value` config files filling the gaps.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;

use crate::output::Format;
use crate::CliError;

#[derive(Args, Debug, Clone, Default)]
pub struct RunConfig {
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub n: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub kappa: Option<f64>,
    /// Diameter, or START:END:COUNT for sweeps.
    #[arg(long = "D", allow_hyphen_values = true)]
    pub d: Option<String>,
    /// Start of the initial value problem, or START:END:COUNT for sweeps.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Model family 0 (cos), 1 (sinh), 2 (exp) or 3 (cosh).
    #[arg(long)]
    pub family: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub horizon: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Exit nonzero when a sweep breaks its expected monotonicity.
    #[arg(long)]
    pub strict: bool,
    /// Use the model eigenvalue for the given diameter.
    #[arg(long = "at-lambda-D")]
    pub at_lambda_d: bool,
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn read_config(path: &Path) -> Result<HashMap<String, String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<HashMap<String, String>, CliError> {
    let mut map = HashMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected key=value", i + 1)))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parsed<T: FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("config value for {key} is not valid: {value}")))
}

impl RunConfig {
    /// Fills options not given on the command line from a config map.
    pub fn merge(&mut self, cfg: &HashMap<String, String>) -> Result<(), CliError> {
        for (key, value) in cfg {
            match key.as_str() {
                "p" => fill(&mut self.p, key, value)?,
                "n" => fill(&mut self.n, key, value)?,
                "kappa" => fill(&mut self.kappa, key, value)?,
                "D" | "d" => fill(&mut self.d, key, value)?,
                "a" => fill(&mut self.a, key, value)?,
                "alpha" => fill(&mut self.alpha, key, value)?,
                "lambda" => fill(&mut self.lambda, key, value)?,
                "family" => fill(&mut self.family, key, value)?,
                "tol" => fill(&mut self.tol, key, value)?,
                "horizon" => fill(&mut self.horizon, key, value)?,
                "format" => fill(&mut self.format, key, value)?,
                "out" => fill(&mut self.out, key, value)?,
                "strict" => self.strict |= parsed::<bool>(key, value)?,
                "at-lambda-D" | "at_lambda_d" => self.at_lambda_d |= parsed::<bool>(key, value)?,
                "suite" | "config" => {}
                _ => return Err(CliError::Usage(format!("unknown config key '{key}'"))),
            }
        }
        Ok(())
    }

    pub fn require<T: Copy>(value: Option<T>, flag: &str) -> Result<T, CliError> {
        value.ok_or_else(|| CliError::Usage(format!("missing required --{flag}")))
    }
}

fn fill<T: FromStr>(slot: &mut Option<T>, key: &str, value: &str) -> Result<(), CliError> {
    if slot.is_none() {
        *slot = Some(parsed(key, value)?);
    }
    Ok(())
}

/// A single value or an inclusive `START:END:COUNT` grid.
#[derive(Debug, Clone, PartialEq)]
pub enum Span {
    Point(f64),
    Range(Vec<f64>),
}

impl Span {
    pub fn parse(flag: &str, s: &str) -> Result<Span, CliError> {
        let bad = || CliError::Usage(format!("--{flag} expects a number or START:END:COUNT, got '{s}'"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [v] => Ok(Span::Point(v.trim().parse().map_err(|_| bad())?)),
            [start, end, count] => {
                let start: f64 = start.trim().parse().map_err(|_| bad())?;
                let end: f64 = end.trim().parse().map_err(|_| bad())?;
                let count: usize = count.trim().parse().map_err(|_| bad())?;
                if count == 0 || !start.is_finite() || !end.is_finite() {
                    return Err(CliError::Usage(format!("--{flag} range '{s}' is empty")));
                }
                if count == 1 {
                    return Ok(Span::Range(vec![start]));
                }
                if !(end > start) {
                    return Err(CliError::Usage(format!("--{flag} range '{s}' is empty: END must exceed START")));
                }
                let step = (end - start) / (count - 1) as f64;
                let mut grid: Vec<f64> = (0..count).map(|i| start + step * i as f64).collect();
                grid[count - 1] = end;
                Ok(Span::Range(grid))
            }
            _ => Err(bad()),
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Span::Point(v) => vec![*v],
            Span::Range(g) => g.clone(),
        }
    }
}
