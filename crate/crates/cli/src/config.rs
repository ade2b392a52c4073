//! Plain-text run configuration.
//!
//! ```text
//! # comments start with '#'; ';' also ends a line
//! preset = quartic            # or: order = 2 and rhs = -a*x1^3, ...
//! [parameters]
//! a = 1
//! h = 0.1
//! [initial]
//! window = 0.31, 0.3          # or: ode = position, derivatives...
//! steps = 1000
//! ```
//!
//! Keys before any section belong to `[system]`, except initial data and
//! analysis options, which keep their usual section.

use std::collections::BTreeMap;
use std::fmt;

use kahan_core::casebook::{BeamParams, CaseError};
use kahan_core::poly::{parse_polynomial, parse_rational, q, qi, rational_to_f64, Polynomial, Rational};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("invalid configuration: {0}")]
    Validation(String),
}

fn parse_err(line: usize, reason: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, reason: reason.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Lv,
    Quartic,
    Weierstrass,
    BeamSym,
    BeamLag,
}

impl Preset {
    pub const ALL: [Preset; 5] = [Preset::Lv, Preset::Quartic, Preset::Weierstrass, Preset::BeamSym, Preset::BeamLag];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Lv => "lv",
            Preset::Quartic => "quartic",
            Preset::Weierstrass => "weierstrass",
            Preset::BeamSym => "beam-sym",
            Preset::BeamLag => "beam-lag",
        }
    }

    pub fn from_name(s: &str) -> Option<Preset> {
        Preset::ALL.into_iter().find(|p| p.name() == s)
    }

    pub fn is_beam(self) -> bool {
        matches!(self, Preset::BeamSym | Preset::BeamLag)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SystemSource {
    Preset(Preset),
    Inline { order: usize, rhs: Vec<Polynomial> },
}

#[derive(Clone, Debug, PartialEq)]
pub enum Initial {
    /// Map state `x^(0), ..., x^(n-1)`, level-major.
    Window(Vec<f64>),
    /// Position and derivatives at `t = 0`, derivative-major.
    Ode(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analysis {
    pub darboux_maxdeg: Option<u32>,
    pub spectra: bool,
    /// Measure the order against an RK4 oracle over `t ∈ [0, 1]`.
    pub convergence: bool,
    pub fixed_point: Option<Vec<f64>>,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Outputs {
    pub csv: String,
    pub svg: String,
    pub report: String,
    /// State coordinates drawn in the phase portrait.
    pub plot: (usize, usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub system: SystemSource,
    /// Exact parameter values, not including `h`.
    pub parameters: BTreeMap<String, Rational>,
    pub h: Rational,
    pub initial: Initial,
    pub steps: usize,
    pub beam: Option<BeamParams>,
    pub analysis: Analysis,
    pub outputs: Outputs,
}

impl RunConfig {
    pub fn h_f64(&self) -> f64 {
        rational_to_f64(&self.h)
    }

    pub fn preset(&self) -> Option<Preset> {
        match self.system {
            SystemSource::Preset(p) => Some(p),
            SystemSource::Inline { .. } => None,
        }
    }

    /// Defaults for a preset.
    pub fn for_preset(p: Preset) -> RunConfig {
        let params = |pairs: &[(&str, Rational)]| -> BTreeMap<String, Rational> {
            pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
        };
        let w_star = 1.5f64.sqrt();
        let (parameters, initial, maxdeg, fixed_point, steps) = match p {
            Preset::Lv => (params(&[("alpha", qi(1))]), vec![0.5, 1.0], Some(2), Some(vec![1.0, 1.0]), 1000),
            Preset::Quartic => (
                params(&[("a", qi(1)), ("b", qi(2)), ("c", qi(3)), ("d", qi(5))]),
                vec![0.31, 0.3],
                Some(4),
                None,
                1000,
            ),
            Preset::Weierstrass => (params(&[("b", qi(2)), ("d", qi(5))]), vec![0.3, 0.0], Some(3), None, 1000),
            Preset::BeamSym | Preset::BeamLag => (
                BTreeMap::new(),
                vec![w_star + 1e-3, w_star, w_star, w_star],
                None,
                Some(vec![w_star; 4]),
                40,
            ),
        };
        let beam = p.is_beam().then(|| {
            BeamParams::on_site(qi(0), qi(0), qi(0), q(1, 10))
                .normal_form(1, q(1, 4))
                .expect("valid normal form")
        });
        RunConfig {
            system: SystemSource::Preset(p),
            parameters,
            h: q(1, 10),
            initial: Initial::Window(initial),
            steps,
            beam,
            analysis: Analysis {
                darboux_maxdeg: maxdeg,
                spectra: fixed_point.is_some(),
                convergence: p == Preset::Quartic,
                fixed_point,
                samples: 20,
                seed: 1,
            },
            outputs: Outputs {
                csv: "orbit.csv".into(),
                svg: "phase.svg".into(),
                report: "report.txt".into(),
                plot: (0, 1),
            },
        }
    }
}

struct Entry {
    line: usize,
    value: String,
}

const SECTIONS: [&str; 6] = ["system", "parameters", "initial", "beam", "analysis", "output"];

fn tokenize(text: &str) -> Result<BTreeMap<(String, String), Entry>, ConfigError> {
    let mut out = BTreeMap::new();
    let mut section = "system".to_string();
    // keys before any header may name initial data and analysis options too
    let mut explicit = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("");
        for piece in body.split(';') {
            let piece = piece.trim();
            if piece.is_empty() {
                continue;
            }
            if let Some(name) = piece.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| parse_err(line, "unterminated section header"))?
                    .trim();
                if !SECTIONS.contains(&name) {
                    return Err(parse_err(line, format!("unknown section [{name}]")));
                }
                section = name.to_string();
                explicit = true;
                continue;
            }
            let split = piece
                .find(['=', ':'])
                .ok_or_else(|| parse_err(line, format!("expected 'key = value', found '{piece}'")))?;
            let key = piece[..split].trim().to_string();
            let value = piece[split + 1..].trim().to_string();
            if key.is_empty() {
                return Err(parse_err(line, "empty key"));
            }
            let home = match (explicit, key.as_str()) {
                (false, "window" | "ode") => "initial",
                (false, "darboux_maxdeg" | "spectra" | "convergence" | "fixed_point" | "samples" | "seed") => "analysis",
                _ => section.as_str(),
            };
            let k = (home.to_string(), key.clone());
            if out.contains_key(&k) {
                return Err(parse_err(line, format!("duplicate key '{key}'")));
            }
            out.insert(k, Entry { line, value });
        }
    }
    Ok(out)
}

fn rational(e: &Entry) -> Result<Rational, ConfigError> {
    parse_rational(&e.value).ok_or_else(|| parse_err(e.line, format!("'{}' is not a number", e.value)))
}

fn list(e: &Entry) -> Result<Vec<Rational>, ConfigError> {
    e.value
        .split(',')
        .map(|s| {
            parse_rational(s.trim()).ok_or_else(|| parse_err(e.line, format!("'{}' is not a number", s.trim())))
        })
        .collect()
}

fn floats(e: &Entry) -> Result<Vec<f64>, ConfigError> {
    Ok(list(e)?.iter().map(rational_to_f64).collect())
}

fn integer<T: std::str::FromStr>(e: &Entry) -> Result<T, ConfigError> {
    e.value
        .parse()
        .map_err(|_| parse_err(e.line, format!("'{}' is not a nonnegative integer", e.value)))
}

fn boolean(e: &Entry) -> Result<bool, ConfigError> {
    match e.value.as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        v => Err(parse_err(e.line, format!("'{v}' is not a boolean"))),
    }
}

fn weights<const N: usize>(e: &Entry, name: &str) -> Result<[Rational; N], ConfigError> {
    let v = list(e)?;
    v.try_into()
        .map_err(|v: Vec<Rational>| parse_err(e.line, format!("{name} needs {N} entries, got {}", v.len())))
}

/// Parses a configuration. `preset` supplies the system when the text names
/// none; naming a different one is an error.
pub fn parse_config_with(text: &str, preset: Option<Preset>) -> Result<RunConfig, ConfigError> {
    let mut raw = tokenize(text)?;
    let mut take = |s: &str, k: &str| raw.remove(&(s.to_string(), k.to_string()));

    let named = match take("system", "preset") {
        Some(e) => Some(
            Preset::from_name(&e.value).ok_or_else(|| parse_err(e.line, format!("unknown preset '{}'", e.value)))?,
        ),
        None => None,
    };
    if let (Some(a), Some(b)) = (named, preset) {
        if a != b {
            return Err(ConfigError::Validation(format!("preset '{a}' in the file conflicts with '{b}'")));
        }
    }
    let order = take("system", "order");
    let rhs = take("system", "rhs");
    let mut cfg = match (named.or(preset), rhs) {
        (Some(_), Some(e)) => {
            return Err(parse_err(e.line, "give either a preset or an inline rhs, not both"));
        }
        (Some(p), None) => {
            if let Some(e) = order {
                return Err(parse_err(e.line, "order is fixed by the preset"));
            }
            RunConfig::for_preset(p)
        }
        (None, Some(e)) => {
            let order_entry = order.ok_or_else(|| parse_err(e.line, "inline systems need 'order'"))?;
            let n: usize = integer(&order_entry)?;
            if n == 0 {
                return Err(parse_err(order_entry.line, "order must be at least 1"));
            }
            let rhs: Vec<Polynomial> = e
                .value
                .split(',')
                .map(|s| parse_polynomial(s.trim()).map_err(|err| parse_err(e.line, err.to_string())))
                .collect::<Result<_, _>>()?;
            let mut cfg = RunConfig::for_preset(Preset::Quartic);
            cfg.system = SystemSource::Inline { order: n, rhs };
            cfg.parameters.clear();
            cfg.initial = Initial::Window(Vec::new());
            cfg.analysis.darboux_maxdeg = None;
            cfg.analysis.spectra = false;
            cfg.analysis.convergence = false;
            cfg.analysis.fixed_point = None;
            cfg
        }
        (None, None) => return Err(ConfigError::Validation("no system: set 'preset' or 'order' and 'rhs'".into())),
    };

    for key in ["h", "steps"] {
        let sys = take("system", key);
        let other = take(if key == "h" { "parameters" } else { "initial" }, key);
        let e = match (sys, other) {
            (Some(e), Some(_)) => return Err(parse_err(e.line, format!("'{key}' given twice"))),
            (a, b) => a.or(b),
        };
        if let Some(e) = e {
            if key == "h" {
                cfg.h = rational(&e)?;
            } else {
                cfg.steps = integer(&e)?;
            }
        }
    }

    let window = take("initial", "window");
    let ode = take("initial", "ode");
    match (window, ode) {
        (Some(e), Some(_)) => return Err(parse_err(e.line, "give either 'window' or 'ode', not both")),
        (Some(e), None) => cfg.initial = Initial::Window(floats(&e)?),
        (None, Some(e)) => cfg.initial = Initial::Ode(floats(&e)?),
        (None, None) => {}
    }

    if let Some(e) = take("analysis", "darboux_maxdeg") {
        cfg.analysis.darboux_maxdeg = Some(integer(&e)?);
    }
    if let Some(e) = take("analysis", "spectra") {
        cfg.analysis.spectra = boolean(&e)?;
    }
    if let Some(e) = take("analysis", "convergence") {
        cfg.analysis.convergence = boolean(&e)?;
    }
    if let Some(e) = take("analysis", "fixed_point") {
        cfg.analysis.fixed_point = Some(floats(&e)?);
    }
    if let Some(e) = take("analysis", "samples") {
        cfg.analysis.samples = integer(&e)?;
    }
    if let Some(e) = take("analysis", "seed") {
        cfg.analysis.seed = integer(&e)?;
    }
    for key in ["csv", "svg", "report"] {
        if let Some(e) = take("output", key) {
            let slot = match key {
                "csv" => &mut cfg.outputs.csv,
                "svg" => &mut cfg.outputs.svg,
                _ => &mut cfg.outputs.report,
            };
            *slot = e.value;
        }
    }
    if let Some(e) = take("output", "plot") {
        let idx: Vec<usize> = e
            .value
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| parse_err(e.line, "plot needs two indices")))
            .collect::<Result<_, _>>()?;
        match idx[..] {
            [i, j] => cfg.outputs.plot = (i, j),
            _ => return Err(parse_err(e.line, "plot needs two indices")),
        }
    }

    // beam weights and normal form
    let alpha = take("beam", "alpha");
    let beta = take("beam", "beta");
    let preset_weights = take("beam", "weights");
    let epsilon = take("beam", "epsilon");
    let delta = take("beam", "delta");

    let params: Vec<(String, Entry)> = {
        let keys: Vec<(String, String)> = raw.keys().filter(|(s, _)| s == "parameters").cloned().collect();
        keys.into_iter()
            .map(|k| {
                let e = raw.remove(&k).expect("present");
                (k.1, e)
            })
            .collect()
    };
    for (name, e) in &params {
        if !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
            || !name.starts_with(|c: char| c.is_ascii_alphabetic())
        {
            return Err(parse_err(e.line, format!("'{name}' is not a parameter name")));
        }
        cfg.parameters.insert(name.clone(), rational(e)?);
    }

    if let Some(((s, k), e)) = raw.into_iter().next() {
        return Err(parse_err(e.line, format!("unknown key '{k}' in [{s}]")));
    }

    if let Some(mut beam) = cfg.beam.take() {
        if let Some(e) = &preset_weights {
            let base = match e.value.as_str() {
                "on-site" => BeamParams::on_site(qi(0), qi(0), qi(0), qi(0)),
                "uniform" => BeamParams::uniform(qi(0), qi(0), qi(0), qi(0)),
                v => return Err(parse_err(e.line, format!("unknown weights '{v}'"))),
            };
            beam.alphas = base.alphas;
            beam.betas = base.betas;
        }
        if let Some(e) = &alpha {
            beam.alphas = weights(e, "alpha")?;
        }
        if let Some(e) = &beta {
            beam.betas = weights(e, "beta")?;
        }
        for (name, slot) in [("a", &mut beam.a), ("b", &mut beam.b), ("c", &mut beam.c)] {
            if let Some(v) = cfg.parameters.get(name) {
                *slot = v.clone();
            }
        }
        match (&epsilon, &delta) {
            (Some(e), Some(d)) => {
                let eps: i64 = e.value.parse().map_err(|_| parse_err(e.line, "epsilon must be 1 or -1"))?;
                beam = beam
                    .normal_form(eps, rational(d)?)
                    .map_err(|err| ConfigError::Validation(err.to_string()))?;
            }
            (None, None) => {}
            (Some(e), None) | (None, Some(e)) => {
                return Err(parse_err(e.line, "epsilon and delta go together"));
            }
        }
        beam.h = cfg.h.clone();
        cfg.beam = Some(
            BeamParams::new(beam.a, beam.b, beam.c, beam.h, beam.alphas, beam.betas).map_err(|err| match err {
                CaseError::AffineConstraintViolated { .. } => ConfigError::Validation(err.to_string()),
                other => ConfigError::Validation(other.to_string()),
            })?,
        );
        cfg.parameters.clear();
    } else if let Some(e) = alpha.or(beta).or(preset_weights).or(epsilon).or(delta) {
        return Err(parse_err(e.line, "[beam] keys need a beam preset"));
    }

    validate(&cfg)?;
    Ok(cfg)
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with(text, None)
}

fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    if cfg.h <= qi(0) {
        return Err(ConfigError::Validation("h must be positive".into()));
    }
    if let SystemSource::Inline { order, rhs } = &cfg.system {
        let want = order * rhs.len();
        match &cfg.initial {
            Initial::Window(w) if w.len() != want => {
                return Err(ConfigError::Validation(format!(
                    "initial window needs {want} values, got {}",
                    w.len()
                )))
            }
            Initial::Ode(y) if y.len() != want => {
                return Err(ConfigError::Validation(format!(
                    "initial ode data needs {want} values, got {}",
                    y.len()
                )))
            }
            _ => {}
        }
    }
    if cfg.analysis.samples == 0 {
        return Err(ConfigError::Validation("samples must be positive".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartic_preset_with_parameters() {
        let cfg = parse_config("preset = quartic\n[parameters]\na = 1\nb = 2\nc = 3\nd = 5\nh = 0.1\n").unwrap();
        assert_eq!(cfg.preset(), Some(Preset::Quartic));
        assert_eq!(cfg.h, q(1, 10));
        assert_eq!(cfg.parameters["d"], qi(5));
    }

    #[test]
    fn inline_one_liner() {
        let cfg = parse_config("order=2; rhs: -a*x1^3; window = 0.1, 0.2\n[parameters]\na = 1").unwrap();
        match &cfg.system {
            SystemSource::Inline { order, rhs } => {
                assert_eq!(*order, 2);
                assert_eq!(rhs[0], parse_polynomial("-a*x1^3").unwrap());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn weights_must_sum_to_one() {
        let err = parse_config("preset = beam-lag\n[beam]\nalpha = 0.1, 0.1, 0.1, 0.1, 0.1, 0.4").unwrap_err();
        assert!(matches!(err, ConfigError::Validation(_)), "{err}");
    }

    #[test]
    fn errors_carry_lines() {
        let err = parse_config("preset = quartic\n[parameters]\na = one").unwrap_err();
        assert_eq!(err, parse_err(3, "'one' is not a number"));
        let err = parse_config("preset = quartic\nbogus = 1").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }));
        let err = parse_config("preset = nope").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn exactly_one_system_source() {
        assert!(parse_config("preset = quartic\nrhs = x1").is_err());
        assert!(parse_config("[parameters]\na = 1").is_err());
    }

    #[test]
    fn step_must_be_positive() {
        assert!(matches!(
            parse_config("preset = lv\nh = 0"),
            Err(ConfigError::Validation(_))
        ));
    }

    #[test]
    fn beam_normal_form() {
        let cfg = parse_config("preset = beam-sym\n[beam]\nweights = uniform\nepsilon = -1\ndelta = 1/2").unwrap();
        let b = cfg.beam.unwrap();
        assert_eq!((b.a, b.b, b.c), (qi(1), qi(2), q(1, 2)));
        assert_eq!(b.alphas[0], q(1, 6));
    }
}
