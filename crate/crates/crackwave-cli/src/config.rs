//! Run configuration: a flat `key = value` file overridden by command-line flags.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crackwave::boundary_op::SymmetryClass;
use serde::Serialize;

use crate::error::{io_err, CliError, Result};

pub const KEYS: &[&str] = &[
    "dimension", "class", "ell", "N", "tol", "out", "route", "workers", "seed", "cache", "branches", "xi", "omega",
    "omega_im", "delta", "input",
];

pub const GRID_DEFAULT: [f64; 5] = [0.1, 0.07, 0.05, 0.035, 0.025];
pub const GRID_M1: [f64; 5] = [0.4, 0.28, 0.2, 0.14, 0.1];
/// Ratio 2^{-1/4}: the steeper higher channels need larger cracks to stay above the gap floor.
pub const GRID_HIGH: [f64; 5] = [1.0, 0.840_896_415_253_714_6, std::f64::consts::FRAC_1_SQRT_2, 0.594_603_557_501_360_5, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Dispersion,
    Threshold,
    Symbol,
    Assemble,
    Solve,
    Fit,
    Constants,
    Reproduce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassSelector {
    All,
    One(SymmetryClass),
}

impl Serialize for ClassSelector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ClassSelector::All => s.serialize_str("all"),
            ClassSelector::One(c) => s.serialize_str(&c.label()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RouteSelector {
    Direct,
    BirmanSchwinger,
    Both,
}

/// Inclusive grid start:stop:step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.start + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub dimension: Option<u8>,
    pub class: ClassSelector,
    pub ell: Option<Vec<f64>>,
    #[serde(rename = "N")]
    pub n: usize,
    pub tol: f64,
    pub out: PathBuf,
    pub route: RouteSelector,
    /// 0 lets the thread pool pick.
    pub workers: usize,
    pub seed: u64,
    pub cache: bool,
    pub branches: usize,
    pub xi: Range,
    pub omega: Option<f64>,
    pub omega_im: f64,
    pub delta: f64,
    pub input: Option<PathBuf>,
}

fn bad(key: &str, value: &str, why: &str) -> CliError {
    CliError::Config(format!("{key} = {value:?}: {why}"))
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim().parse().map_err(|_| bad(key, v, "not a number"))
}

/// Reads `key = value` lines; `#` starts a comment.
pub fn parse_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(CliError::Config(format!("line {}: unknown key {k:?}", i + 1)));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

/// Descending list "0.1,0.05,..." or geometric "geom:start:ratio:count".
pub fn parse_grid(v: &str) -> Result<Vec<f64>> {
    let grid: Vec<f64> = if let Some(rest) = v.strip_prefix("geom:") {
        let p: Vec<&str> = rest.split(':').collect();
        if p.len() != 3 {
            return Err(bad("ell", v, "expected geom:start:ratio:count"));
        }
        let (start, ratio, count): (f64, f64, usize) = (num("ell", p[0])?, num("ell", p[1])?, num("ell", p[2])?);
        (0..count).map(|k| start * ratio.powi(k as i32)).collect()
    } else {
        v.split(',').map(|s| num("ell", s)).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
        return Err(bad("ell", v, "values must be positive and finite"));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(bad("ell", v, "values must be strictly decreasing"));
    }
    Ok(grid)
}

fn parse_range(key: &str, v: &str) -> Result<Range> {
    let p: Vec<&str> = v.split(':').collect();
    if p.len() != 3 {
        return Err(bad(key, v, "expected start:stop:step"));
    }
    let r = Range { start: num(key, p[0])?, stop: num(key, p[1])?, step: num(key, p[2])? };
    if !(r.step > 0.0) || !(r.stop >= r.start) || !r.start.is_finite() || !r.stop.is_finite() {
        return Err(bad(key, v, "need step > 0 and stop >= start"));
    }
    if (r.stop - r.start) / r.step > 1e6 {
        return Err(bad(key, v, "more than 10^6 points"));
    }
    Ok(r)
}

impl RunConfig {
    pub fn from_settings(command: Command, s: &BTreeMap<String, String>) -> Result<Self> {
        let get = |k: &str| s.get(k).map(String::as_str);
        let class = match get("class") {
            None | Some("all") => ClassSelector::All,
            Some(v) => ClassSelector::One(v.parse().map_err(|e: crackwave::Error| bad("class", v, &e.to_string()))?),
        };
        let dimension = match get("dimension") {
            None => None,
            Some(v) => match num::<u8>("dimension", v)? {
                d @ (2 | 3) => Some(d),
                _ => return Err(bad("dimension", v, "must be 2 or 3")),
            },
        };
        if let (Some(d), ClassSelector::One(c)) = (dimension, class) {
            if class_dimension(c) != d {
                return Err(CliError::Config(format!("class {} belongs to dimension {}", c.label(), class_dimension(c))));
            }
        }
        let n = match get("N") {
            None => crackwave::boundary_op::DEFAULT_N,
            Some(v) => num("N", v)?,
        };
        if !(8..=256).contains(&n) {
            return Err(CliError::Config(format!("N = {n}: must lie in [8, 256]")));
        }
        let pos = |k: &str, default: f64| -> Result<f64> {
            match get(k) {
                None => Ok(default),
                Some(v) => {
                    let x: f64 = num(k, v)?;
                    if x > 0.0 && x.is_finite() {
                        Ok(x)
                    } else {
                        Err(bad(k, v, "must be positive"))
                    }
                }
            }
        };
        let route = match get("route") {
            None | Some("direct") => RouteSelector::Direct,
            Some("bs") | Some("birman_schwinger") => RouteSelector::BirmanSchwinger,
            Some("both") => RouteSelector::Both,
            Some(v) => return Err(bad("route", v, "expected direct, bs or both")),
        };
        let cache = match get("cache") {
            None | Some("on") | Some("true") => true,
            Some("off") | Some("false") => false,
            Some(v) => return Err(bad("cache", v, "expected on or off")),
        };
        let branches = match get("branches") {
            None => 3,
            Some(v) => num("branches", v)?,
        };
        if branches == 0 {
            return Err(CliError::Config("branches must be at least 1".into()));
        }
        let omega = get("omega").map(|v| num::<f64>("omega", v)).transpose()?;
        if omega.is_some_and(|w| !w.is_finite()) {
            return Err(CliError::Config("omega must be finite".into()));
        }
        Ok(Self {
            command,
            dimension,
            class,
            ell: get("ell").map(parse_grid).transpose()?,
            n,
            tol: pos("tol", crackwave::spectral::DIRECT_TOL)?,
            out: PathBuf::from(get("out").unwrap_or("out")),
            route,
            workers: get("workers").map(|v| num("workers", v)).transpose()?.unwrap_or(0),
            seed: get("seed").map(|v| num("seed", v)).transpose()?.unwrap_or(0),
            cache,
            branches,
            xi: parse_range("xi", get("xi").unwrap_or("0:3:0.01"))?,
            omega,
            omega_im: get("omega_im").map(|v| num("omega_im", v)).transpose()?.unwrap_or(0.0),
            delta: pos("delta", 1e-3)?,
            input: get("input").map(PathBuf::from),
        })
    }

    /// Classes selected, in output order.
    pub fn classes(&self) -> Vec<SymmetryClass> {
        match self.class {
            ClassSelector::One(c) => vec![c],
            ClassSelector::All => match self.dimension {
                Some(3) => vec![SymmetryClass::Channel(-1), SymmetryClass::Channel(0), SymmetryClass::Channel(1)],
                Some(2) => vec![SymmetryClass::Symmetric, SymmetryClass::Antisymmetric],
                _ => {
                    if self.command == Command::Reproduce {
                        vec![
                            SymmetryClass::Symmetric,
                            SymmetryClass::Antisymmetric,
                            SymmetryClass::Channel(0),
                            SymmetryClass::Channel(1),
                        ]
                    } else {
                        vec![SymmetryClass::Symmetric, SymmetryClass::Antisymmetric]
                    }
                }
            },
        }
    }

    /// The ℓ grid for a class: the configured one, else a class default.
    pub fn grid(&self, class: SymmetryClass) -> Vec<f64> {
        if let Some(g) = &self.ell {
            return g.clone();
        }
        match class {
            SymmetryClass::Channel(m) if m.abs() == 1 => GRID_M1.to_vec(),
            SymmetryClass::Channel(m) if m.abs() >= 2 => GRID_HIGH.to_vec(),
            _ => GRID_DEFAULT.to_vec(),
        }
    }
}

pub fn class_dimension(c: SymmetryClass) -> u8 {
    match c {
        SymmetryClass::Channel(_) => 3,
        _ => 2,
    }
}
