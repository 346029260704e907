//! Plain-text `key = value` experiment configs.
//!
//! ```text
//! experiment = removability
//! shape = disk
//! ladder = 32, 64, 128
//! masses = 2, 8, 11, 14, 20
//! atoms = 0.5 0.5 1      # x y mass; entries separated by ';'
//! target = points 0.5 0.5
//! ```

use std::path::PathBuf;

use crate::error::{Error, Result};
use crate::experiments::{ExperimentConfig, TargetSpec};

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: '{}'", s.trim())))
}

fn parse_list<T, F: Fn(&str) -> Result<T>>(value: &str, f: F) -> Result<Vec<T>> {
    value.split(',').map(str::trim).filter(|s| !s.is_empty()).map(f).collect()
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split_whitespace().map(parse_f64).collect()
}

fn point(v: &[f64]) -> [f64; 2] {
    [v[0], v.get(1).copied().unwrap_or(0.0)]
}

/// `x y m; x y m; ...`
pub fn parse_atoms(value: &str) -> Result<Vec<([f64; 2], f64)>> {
    value
        .split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let v = numbers(s)?;
            if v.len() != 3 {
                return Err(Error::Parse(format!("atom '{s}' needs x y mass")));
            }
            Ok(([v[0], v[1]], v[2]))
        })
        .collect()
}

/// `empty`, `points x y; x y`, `segment x0 y0 x1 y1` or `arc x y radius`.
pub fn parse_target(value: &str) -> Result<TargetSpec> {
    let value = value.trim();
    let (head, rest) = value.split_once(char::is_whitespace).unwrap_or((value, ""));
    match head {
        "empty" => Ok(TargetSpec::Empty),
        "points" => {
            let pts = rest
                .split(';')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    let v = numbers(s)?;
                    if v.len() != 2 {
                        return Err(Error::Parse(format!("point '{s}' needs x y")));
                    }
                    Ok(point(&v))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TargetSpec::Points(pts))
        }
        "segment" => {
            let v = numbers(rest)?;
            if v.len() != 4 {
                return Err(Error::Parse("segment needs x0 y0 x1 y1".into()));
            }
            Ok(TargetSpec::Segment([v[0], v[1]], [v[2], v[3]]))
        }
        "arc" => {
            let v = numbers(rest)?;
            if v.len() != 3 || v[2] < 0.0 || v[2].fract() != 0.0 {
                return Err(Error::Parse("arc needs x y and a whole radius".into()));
            }
            Ok(TargetSpec::BoundaryArc { point: [v[0], v[1]], radius: v[2] as usize })
        }
        other => Err(Error::Parse(format!("unknown target kind '{other}'"))),
    }
}

/// Sets one key. Unknown keys are errors.
pub fn apply(cfg: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    let value = value.trim();
    match key.trim() {
        "experiment" | "name" => cfg.name = value.to_string(),
        "shape" => cfg.shape = value.parse()?,
        "ladder" => {
            cfg.ladder = parse_list(value, |s| s.parse::<usize>().map_err(|_| Error::Parse(format!("bad grid size '{s}'"))))?
        }
        "masses" => cfg.masses = parse_list(value, parse_f64)?,
        "atoms" => cfg.measure.atoms = parse_atoms(value)?,
        "density" => cfg.measure.density = parse_f64(value)?,
        "target" => cfg.target = parse_target(value)?,
        "radii" => cfg.radii = parse_list(value, parse_f64)?,
        "charge" => cfg.charge = parse_f64(value)?,
        "threshold_tol" => cfg.tol.threshold = parse_f64(value)?,
        "slope_tol" => cfg.tol.slope = parse_f64(value)?,
        "residual_tol" => cfg.tol.residual = parse_f64(value)?,
        "decay_tol" => cfg.tol.decay = parse_f64(value)?,
        "output" => cfg.output = Some(PathBuf::from(value)),
        "field_output" => cfg.field_output = Some(PathBuf::from(value)),
        other => return Err(Error::Config(format!("unknown key '{other}'"))),
    }
    Ok(())
}

/// Splits `key = value` lines, dropping blank lines and `#` comments.
pub fn entries(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", no + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Parses a config on top of the preset named by its `experiment` key, or of `default` if absent.
pub fn parse(text: &str, default: &str) -> Result<ExperimentConfig> {
    let entries = entries(text)?;
    let name = entries
        .iter()
        .find(|(k, _)| k == "experiment" || k == "name")
        .map(|(_, v)| v.as_str())
        .unwrap_or(default);
    let mut cfg = ExperimentConfig::preset(name)?;
    for (k, v) in &entries {
        apply(&mut cfg, k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}
