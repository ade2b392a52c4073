//! The subcommands. Each one returns the files it wants written, keyed by
//! name, so the report text can be tested without touching the disk.

use std::collections::BTreeMap;
use std::fmt::Write;

use kahan_core::casebook::{
    beam_fixed_point_analysis, beam_lagrangian, beam_measure_check, beam_symmetric, float_params,
    kahan_weierstrass, lotka_volterra, quartic_oscillator, symplecticity_check, BeamMapKind, BeamParams,
    CaseError, QuarticParams,
};
use kahan_core::darboux::{find_darboux, first_integral, DarbouxCertificate, DarbouxError};
use kahan_core::dynamics::{
    char_poly_and_roots, convergence_order, rk4_oracle, Orbit, OrbitStatus, SpectrumReport,
};
use kahan_core::poly::{rational_to_f64, Polynomial, Rational, RationalFunction, Var};
use kahan_core::scheme::{discretize, step_var, SchemeError};
use kahan_core::{BirationalMap, DynamicsError, NumericMap, PolyOdeSystem};
use thiserror::Error;

use crate::config::{ConfigError, Initial, Preset, RunConfig, SystemSource};
use crate::output::{orbit_csv, phase_svg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) | CliError::Io(_) => 3,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        }
    )*};
}
numeric_from!(CaseError, DynamicsError, DarbouxError, SchemeError, kahan_core::PolyError);

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(ConfigError::Validation(msg.into()))
}

/// Everything the subcommands need about the configured system.
pub struct Model {
    pub label: String,
    pub system: PolyOdeSystem,
    /// Scheme equations with parameters left symbolic.
    pub equations: Vec<Polynomial>,
    pub map: BirationalMap,
    /// Exact values for every parameter of `map`, including `h`.
    pub bindings: BTreeMap<Var, Rational>,
    pub beam: Option<(BeamMapKind, BeamParams)>,
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Model, CliError> {
        let mut bindings: BTreeMap<Var, Rational> =
            cfg.parameters.iter().map(|(k, v)| (Var::param(k), v.clone())).collect();
        bindings.insert(step_var(), cfg.h.clone());
        let (label, system, map, beam) = match &cfg.system {
            SystemSource::Inline { order, rhs } => {
                let sys = PolyOdeSystem::new(*order, rhs.clone()).map_err(|e| invalid(e.to_string()))?;
                let map = kahan_core::solve_forward(&discretize(&sys)?)?;
                ("inline".to_string(), sys, map, None)
            }
            SystemSource::Preset(p) => match p {
                Preset::Lv => {
                    let case = lotka_volterra(None)?;
                    let map = kahan_core::solve_forward(&discretize(&case.system)?)?;
                    (p.to_string(), case.system, map, None)
                }
                Preset::Quartic => {
                    let case = quartic_oscillator(None)?;
                    (p.to_string(), case.system, case.map, None)
                }
                Preset::Weierstrass => {
                    let case = kahan_weierstrass()?;
                    (p.to_string(), case.system, case.map, None)
                }
                Preset::BeamSym | Preset::BeamLag => {
                    let params = cfg.beam.clone().expect("beam presets carry weights");
                    let coeffs = params.coefficients();
                    let sym = beam_symmetric(&coeffs)?;
                    let (kind, map) = if *p == Preset::BeamSym {
                        (BeamMapKind::Symmetric, sym.map)
                    } else {
                        (BeamMapKind::Lagrangian, beam_lagrangian(&coeffs)?.map)
                    };
                    bindings = params.bindings();
                    (p.to_string(), sym.system, map, Some((kind, params)))
                }
            },
        };
        let missing: Vec<String> = map
            .parameters()
            .into_iter()
            .filter(|v| !bindings.contains_key(v))
            .map(|v| v.to_string())
            .collect();
        if !missing.is_empty() {
            return Err(invalid(format!("no value for parameter(s) {}", missing.join(", "))));
        }
        Ok(Model {
            label,
            equations: map.equations().to_vec(),
            system,
            map,
            bindings,
            beam,
        })
    }

    pub fn float_params(&self) -> BTreeMap<Var, f64> {
        float_params(&self.bindings)
    }

    pub fn numeric(&self, cfg: &RunConfig) -> Result<NumericMap, CliError> {
        Ok(NumericMap::new(&self.map, cfg.h_f64(), &self.float_params())?)
    }

    pub fn bound(&self) -> Result<BirationalMap, CliError> {
        Ok(self.map.bind(&self.bindings)?)
    }

    /// The starting window, sampling an RK4 solution when ODE data is given.
    pub fn initial_window(&self, cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
        let dim = self.map.dim();
        let (given, w) = match &cfg.initial {
            Initial::Window(w) => (w.len(), w.clone()),
            Initial::Ode(y0) => {
                if y0.len() != dim {
                    return Err(invalid(format!("initial ode data needs {dim} values, got {}", y0.len())));
                }
                let n = self.system.order();
                let comps = self.system.dim();
                let h = cfg.h_f64();
                let mut w = Vec::with_capacity(dim);
                for k in 0..n {
                    let y = rk4_oracle(&self.system, &self.float_params(), y0, k as f64 * h, h / 100.0)?;
                    w.extend_from_slice(&y[..comps]);
                }
                (dim, w)
            }
        };
        if given != dim {
            return Err(invalid(format!("initial window needs {dim} values, got {given}")));
        }
        Ok(w)
    }
}

pub type Artifacts = BTreeMap<String, String>;

fn fmt_params(model: &Model) -> String {
    model
        .bindings
        .iter()
        .map(|(k, v)| format!("{k} = {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn scheme_section(model: &Model) -> Result<String, CliError> {
    let mut s = String::new();
    let _ = writeln!(s, "system: {}", model.label);
    let _ = writeln!(
        s,
        "order {}, components {}, map dimension {}",
        model.map.order(),
        model.map.components(),
        model.map.dim()
    );
    let _ = writeln!(s, "parameters: {}", fmt_params(model));
    let _ = writeln!(s, "\nright-hand side:");
    for (j, f) in model.system.rhs().iter().enumerate() {
        let _ = writeln!(s, "  x{}^({}) = {f}", j + 1, model.system.order());
    }
    let _ = writeln!(s, "\nscheme:");
    for (j, e) in model.equations.iter().enumerate() {
        let _ = writeln!(s, "  E{} = {e}", j + 1);
    }
    let bound = model.bound()?;
    let _ = writeln!(s, "\nsolved map (parameters bound):");
    match bound.forward() {
        Some(fwd) => {
            for (v, f) in bound.state_vars().iter().zip(fwd) {
                let _ = writeln!(s, "  {v} -> {f}");
            }
        }
        None => {
            let _ = writeln!(s, "  no closed form; each step solves the linear system numerically");
        }
    }
    Ok(s)
}

pub fn discretize_cmd(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let model = Model::build(cfg)?;
    Ok(Artifacts::from([("scheme.txt".to_string(), scheme_section(&model)?)]))
}

fn status_line(orbit: &Orbit, steps: usize) -> String {
    match &orbit.status {
        OrbitStatus::Complete => format!("complete, {steps} steps"),
        OrbitStatus::Singular { step, condition } => {
            format!("singular at step {step} of {steps} (condition {condition:e})")
        }
    }
}

fn orbit_artifacts(cfg: &RunConfig, model: &Model) -> Result<(Orbit, Artifacts), CliError> {
    let num = model.numeric(cfg)?;
    let orbit = num.iterate(&model.initial_window(cfg)?, cfg.steps);
    let (i, j) = cfg.outputs.plot;
    let dim = model.map.dim();
    let comps = model.map.components();
    let label = |k: usize| format!("x{}_{}", k % comps + 1, k / comps);
    let svg = if dim == 1 {
        // nothing to pair with, so plot against the step index
        let pts: Vec<Vec<f64>> = orbit.points.iter().enumerate().map(|(k, p)| vec![k as f64, p[0]]).collect();
        phase_svg(&pts, (0, 1), ("step", &label(0)))
    } else if i >= dim || j >= dim {
        return Err(invalid(format!("plot indices must be below {dim}")));
    } else {
        phase_svg(&orbit.points, (i, j), (&label(i), &label(j)))
    };
    let mut out = Artifacts::new();
    out.insert(cfg.outputs.csv.clone(), orbit_csv(model.map.order(), comps, &orbit.points));
    out.insert(cfg.outputs.svg.clone(), svg);
    Ok((orbit, out))
}

pub fn orbit_cmd(cfg: &RunConfig) -> Result<(Artifacts, String), CliError> {
    let model = Model::build(cfg)?;
    let (orbit, out) = orbit_artifacts(cfg, &model)?;
    Ok((out, format!("orbit: {}", status_line(&orbit, cfg.steps))))
}

fn darboux_maxdeg(cfg: &RunConfig, model: &Model) -> u32 {
    cfg.analysis
        .darboux_maxdeg
        .unwrap_or(if model.map.dim() == 2 { 4 } else { 2 })
}

fn darboux_section(model: &Model, maxdeg: u32) -> Result<(String, Vec<DarbouxCertificate>), CliError> {
    let bound = model.bound()?;
    let certs = find_darboux(&bound, maxdeg)?;
    let mut s = String::new();
    let tag = if bound.dim() == 2 { "" } else { " (experimental above dimension 2)" };
    let _ = writeln!(s, "darboux search, maxdeg {maxdeg}{tag}: {} polynomial(s)", certs.len());
    for (k, c) in certs.iter().enumerate() {
        let _ = writeln!(s, "  [{}]", k + 1);
        for line in c.to_string().lines() {
            let _ = writeln!(s, "    {line}");
        }
    }
    Ok((s, certs))
}

pub fn darboux_cmd(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let model = Model::build(cfg)?;
    let (s, _) = darboux_section(&model, darboux_maxdeg(cfg, &model))?;
    Ok(Artifacts::from([("darboux.txt".to_string(), s)]))
}

/// Largest relative change of `K = P_b/P_a` along the orbit, for the first
/// pair of certificates sharing a cofactor.
fn drift_section(model: &Model, certs: &[DarbouxCertificate], orbit: &Orbit) -> Result<String, CliError> {
    let bound = model.bound()?;
    let mut pair = None;
    'outer: for (a, ca) in certs.iter().enumerate() {
        for cb in &certs[a + 1..] {
            if ca.cofactor() == cb.cofactor() {
                pair = Some((ca, cb));
                break 'outer;
            }
        }
    }
    let Some((ca, cb)) = pair else {
        return Ok("first integral: fewer than two certificates share a cofactor\n".into());
    };
    let k = first_integral(&bound, ca, cb)?;
    let (k0, drift) = ratio_drift(&k, &bound.state_vars(), orbit)?;
    let mut s = String::new();
    let _ = writeln!(s, "first integral K = {k}");
    let _ = writeln!(s, "K at start: {k0:e}");
    let _ = writeln!(s, "relative drift of K over {} points: {drift:e}", orbit.points.len());
    Ok(s)
}

/// Relative drift of `K` along the orbit, with `K(s0)` as the scale.
fn ratio_drift(k: &RationalFunction, vars: &[Var], orbit: &Orbit) -> Result<(f64, f64), CliError> {
    let eval = |p: &[f64]| -> Result<f64, CliError> {
        let pt: BTreeMap<Var, f64> = vars.iter().cloned().zip(p.iter().copied()).collect();
        Ok(k.eval(&pt)?)
    };
    let k0 = eval(&orbit.points[0])?;
    let scale = k0.abs().max(f64::MIN_POSITIVE);
    let mut drift: f64 = 0.0;
    for p in &orbit.points {
        drift = drift.max((eval(p)? - k0).abs() / scale);
    }
    Ok((k0, drift))
}

/// Drift of the closed-form ratio `P2/P1` for the quartic oscillator.
fn pencil_drift_section(cfg: &RunConfig, orbit: &Orbit) -> Result<String, CliError> {
    let get = |k: &str| cfg.parameters.get(k).cloned().ok_or_else(|| invalid(format!("quartic needs {k}")));
    let params = QuarticParams::new(get("a")?, get("b")?, get("c")?, get("d")?, cfg.h.clone());
    let case = quartic_oscillator(Some(&params))?;
    let k = RationalFunction::new(case.p2.clone(), case.p1.clone())?;
    let (k0, drift) = ratio_drift(&k, &case.map.state_vars(), orbit)?;
    let mut s = String::new();
    let _ = writeln!(s, "pencil P1 = {}", case.p1);
    let _ = writeln!(s, "pencil P2 = {}", case.p2);
    let _ = writeln!(s, "P2/P1 at start: {k0:e}");
    let _ = writeln!(s, "relative drift of P2/P1 over {} points: {drift:e}", orbit.points.len());
    Ok(s)
}

/// Order of the scheme from runs at `h, h/2, h/4, h/8` up to `t = 1`.
fn convergence_section(cfg: &RunConfig, model: &Model) -> Result<String, CliError> {
    let n = model.system.order();
    let comps = model.system.dim();
    let h = cfg.h_f64();
    let y0: Vec<f64> = match &cfg.initial {
        Initial::Ode(y) => y.clone(),
        Initial::Window(w) if n == 1 => w.clone(),
        Initial::Window(w) if n == 2 && w.len() == 2 * comps => {
            // velocity from the first difference of the window
            let mut y = w[..comps].to_vec();
            y.extend((0..comps).map(|j| (w[comps + j] - w[j]) / h));
            y
        }
        Initial::Window(_) => {
            return Ok("convergence: skipped, needs ode-style initial data for order above 2\n".into());
        }
    };
    let hs = [h, h / 2.0, h / 4.0, h / 8.0];
    let r = convergence_order(&model.system, &model.float_params(), &y0, 1.0, &hs)?;
    let mut s = String::new();
    let y: Vec<String> = y0.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(s, "convergence to t = 1 from ({}):", y.join(", "));
    for (step, err) in &r.errors {
        let _ = writeln!(s, "  h = {step}: error {err:e}");
    }
    for (step, why) in &r.excluded {
        let _ = writeln!(s, "  h = {step}: excluded ({why})");
    }
    let _ = writeln!(s, "  oracle error estimate: {:e}", r.oracle_error);
    let _ = writeln!(s, "  measured order: {:.4}", r.order);
    Ok(s)
}

fn spectrum_lines(s: &mut String, r: &SpectrumReport) {
    let coeffs: Vec<String> = r.coefficients.iter().map(|c| format!("{c:.12e}")).collect();
    let _ = writeln!(s, "  characteristic coefficients: {}", coeffs.join(", "));
    for (z, class) in r.roots.iter().zip(&r.classes) {
        let _ = writeln!(s, "  root {:+.12e} {:+.12e}i  |root| {:.12}  {class:?}", z.re, z.im, z.norm());
    }
    let _ = writeln!(s, "  palindromic defect: {:e}", r.palindromic_defect);
    let _ = writeln!(s, "  root residual: {:e}", r.root_residual());
}

fn spectrum_section(cfg: &RunConfig, model: &Model, p: &[f64]) -> Result<String, CliError> {
    if p.len() != model.map.dim() {
        return Err(invalid(format!("fixed_point needs {} values", model.map.dim())));
    }
    let num = model.numeric(cfg)?;
    let mut s = String::new();
    let pts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
    let _ = writeln!(s, "spectrum at ({}):", pts.join(", "));
    let r = char_poly_and_roots(&num.linearize_at(p)?)?;
    spectrum_lines(&mut s, &r);
    Ok(s)
}

fn beam_section(cfg: &RunConfig, kind: BeamMapKind, params: &BeamParams) -> Result<String, CliError> {
    let mut s = String::new();
    let (samples, seed) = (cfg.analysis.samples, cfg.analysis.seed);
    let alphas: Vec<String> = params.alphas.iter().map(|a| a.to_string()).collect();
    let betas: Vec<String> = params.betas.iter().map(|b| b.to_string()).collect();
    let _ = writeln!(s, "beam weights: alpha = {}; beta = {}", alphas.join(", "), betas.join(", "));

    let m = beam_measure_check(params, samples, seed)?;
    let _ = writeln!(s, "\nmeasure of the symmetric map ({samples} samples, seed {seed}):");
    let _ = writeln!(s, "  dF/dw(-2) equals dF/dw(2) shifted: {}", m.g_equals_h);
    let _ = writeln!(s, "  max |det / density ratio - 1|: {:e}", m.max_mismatch);
    let _ = writeln!(s, "  same with h^2 in the ratio: {:e}", m.max_mismatch_h2);

    for k in [BeamMapKind::Lagrangian, BeamMapKind::Symmetric] {
        let r = symplecticity_check(k, params, samples, seed)?;
        let _ = writeln!(s, "\nsymplecticity of the {} map ({samples} samples, seed {seed}):", kind_name(k));
        let _ = writeln!(s, "  euler-lagrange form matches: {}", r.euler_lagrange_matches);
        let _ = writeln!(s, "  max defect: {:e}", r.max_defect);
        let _ = writeln!(s, "  max round trip error: {:e}", r.max_roundtrip);
        let _ = writeln!(s, "  resampled: {}", r.resampled);
    }

    let _ = writeln!(s, "\nfixed points of the {} map:", kind_name(kind));
    match beam_fixed_point_analysis(kind, params) {
        Ok(r) => {
            let fps: Vec<String> = r.fixed_points.iter().map(|v| format!("{v:.12}")).collect();
            let _ = writeln!(s, "  epsilon {}, delta {}", r.epsilon, r.delta);
            let _ = writeln!(s, "  real fixed points: {}", fps.join(", "));
            let _ = writeln!(s, "  analysed at w* = {:.12}", r.w_star);
            match r.exact_residual_zero {
                Some(z) => {
                    let _ = writeln!(s, "  exact residual vanishes: {z}");
                }
                None => {
                    let _ = writeln!(s, "  exact residual: not checked (sqrt(delta) irrational)");
                }
            }
            spectrum_lines(&mut s, &r.spectrum);
            let _ = writeln!(s, "  continuous gamma: {:.12}", r.continuous_gamma);
            if let Some(g) = r.discrete_gamma {
                let _ = writeln!(s, "  discrete gamma: {g:.12}");
            }
            if let Some(d) = r.reciprocal_defect {
                let _ = writeln!(s, "  reciprocal pair defect: {d:e}");
            }
            if let Some(d) = r.unit_modulus_defect {
                let _ = writeln!(s, "  unit modulus defect: {d:e}");
            }
        }
        Err(CaseError::NoRealFixedPoint) => {
            let _ = writeln!(s, "  none real");
        }
        Err(CaseError::Invalid(_)) | Err(CaseError::InvalidEpsilon) => {
            let _ = writeln!(s, "  skipped: parameters are not in normal form");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(s)
}

fn kind_name(k: BeamMapKind) -> &'static str {
    match k {
        BeamMapKind::Symmetric => "symmetric",
        BeamMapKind::Lagrangian => "variational",
    }
}

pub fn analyze_beam_cmd(cfg: &RunConfig) -> Result<Artifacts, CliError> {
    let model = Model::build(cfg)?;
    let Some((kind, params)) = &model.beam else {
        return Err(invalid("analyze-beam needs the beam-sym or beam-lag preset"));
    };
    Ok(Artifacts::from([("beam.txt".to_string(), beam_section(cfg, *kind, params)?)]))
}

pub fn report_cmd(cfg: &RunConfig) -> Result<(Artifacts, String), CliError> {
    let model = Model::build(cfg)?;
    let mut s = scheme_section(&model)?;
    let (orbit, mut out) = orbit_artifacts(cfg, &model)?;
    let _ = writeln!(s, "\nh = {} ({})", cfg.h, rational_to_f64(&cfg.h));
    let _ = writeln!(s, "orbit: {}", status_line(&orbit, cfg.steps));
    let _ = writeln!(s, "  points written: {}", orbit.points.len());
    if let Some(last) = orbit.points.last() {
        let v: Vec<String> = last.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "  last point: ({})", v.join(", "));
    }
    let num = model.numeric(cfg)?;
    let residual = orbit
        .points
        .windows(2)
        .map(|w| num.step_residual(&w[0], &w[1]))
        .fold(0.0, f64::max);
    let _ = writeln!(s, "  max scheme residual along the orbit: {residual:e}");

    if let Some(maxdeg) = cfg.analysis.darboux_maxdeg {
        let (text, certs) = darboux_section(&model, maxdeg)?;
        let _ = write!(s, "\n{text}");
        let _ = write!(s, "{}", drift_section(&model, &certs, &orbit)?);
    }
    if cfg.preset() == Some(Preset::Quartic) {
        let _ = write!(s, "\n{}", pencil_drift_section(cfg, &orbit)?);
    }
    if cfg.analysis.convergence {
        let _ = write!(s, "\n{}", convergence_section(cfg, &model)?);
    }
    if cfg.analysis.spectra {
        if let Some(p) = &cfg.analysis.fixed_point {
            let _ = write!(s, "\n{}", spectrum_section(cfg, &model, p)?);
        }
    }
    if let Some((kind, params)) = &model.beam {
        let _ = write!(s, "\n{}", beam_section(cfg, *kind, params)?);
    }
    out.insert(cfg.outputs.report.clone(), s);
    Ok((out, format!("report: orbit {}", status_line(&orbit, cfg.steps))))
}
