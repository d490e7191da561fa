//! Scenario configs: parsing, validation and dispatch to the experiments.
//!
//! A config is validated completely (schema version, system, matrices,
//! parameters) before any computation starts. Numerical failures during the
//! run become failed check records rather than errors.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::bipartite::{
    bracket_xp_distinct, bracket_xp_same, bracket_xx_distinct, bracket_xx_same, momentum_response, BipartitePair,
};
use crate::covariance::{
    analytic_covariance, build_entangled_state, covariance_parts, mc_covariance, quantum_covariance, ObservablePair,
    MIN_SAMPLES,
};
use crate::error::{Error, Result};
use crate::field::{sample_realization, ModeKey};
use crate::phase::{PhaseParameter, SpinLabel};
use crate::report::{Check, RunReport, Trace, SCHEMA_VERSION};
use crate::response::{
    commutator, harmonic_oscillator, heisenberg_residual, momentum_matrix, poisson_bracket_numeric, trk_sum,
    BracketOptions, LevelSystem, ParticleLabel, ParticleResponse, ResponseMatrix,
};
use crate::spin::{
    build_complete_state, complete_state_covariance, exchange_factor, exchange_parity, pauli_feasibility,
    required_zeta_parity, spin_covariance, swap_parity, ExchangeDirection, PauliOutcome,
};
use crate::suite::{run_suite, SuiteOptions};

/// Hand-written JSON Schema of the config format, printed by `zpflab schema`.
pub const CONFIG_SCHEMA: &str = include_str!("../schema/config.schema.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Trk,
    Commutator,
    Bracket2,
    Covariance,
    Entangle,
    Spin,
    Pauli,
    FullSuite,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::Trk => "trk",
            Experiment::Commutator => "commutator",
            Experiment::Bracket2 => "bracket2",
            Experiment::Covariance => "covariance",
            Experiment::Entangle => "entangle",
            Experiment::Spin => "spin",
            Experiment::Pauli => "pauli",
            Experiment::FullSuite => "full-suite",
        }
    }
}

/// Integer or half-odd value, written as a number (`1.5`), a string
/// (`"3/2"`, `"-1"`) or `{"half_units": 3}`. Stored doubled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(into = "String")]
pub struct Half(pub i64);

impl From<Half> for String {
    fn from(h: Half) -> String {
        PhaseParameter::from_half_units(h.0).to_string()
    }
}

pub fn parse_half(s: &str) -> Result<i64> {
    let s = s.trim();
    let bad = || Error::Config(format!("`{s}` is not an integer or half-integer"));
    if let Some(num) = s.strip_suffix("/2") {
        let n: i64 = num.trim().parse().map_err(|_| bad())?;
        if n % 2 == 0 {
            return Err(bad());
        }
        return Ok(n);
    }
    if let Ok(n) = s.parse::<i64>() {
        return Ok(2 * n);
    }
    let x: f64 = s.parse().map_err(|_| bad())?;
    half_from_f64(x).ok_or_else(bad)
}

fn half_from_f64(x: f64) -> Option<i64> {
    let h = 2.0 * x;
    (h.is_finite() && h.fract() == 0.0 && h.abs() < 1e15).then_some(h as i64)
}

impl<'de> Deserialize<'de> for Half {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match Value::deserialize(d)? {
            Value::Number(n) => n
                .as_f64()
                .and_then(half_from_f64)
                .map(Half)
                .ok_or_else(|| D::Error::custom(format!("{n} is not an integer or half-integer"))),
            Value::String(s) => parse_half(&s).map(Half).map_err(D::Error::custom),
            Value::Object(o) if o.len() == 1 && o.contains_key("half_units") => o["half_units"]
                .as_i64()
                .map(Half)
                .ok_or_else(|| D::Error::custom("half_units must be an integer")),
            other => Err(D::Error::custom(format!("expected number, string or {{\"half_units\": n}}, got {other}"))),
        }
    }
}

/// Seed written as a non-negative integer, a decimal string or a `0x` hex
/// string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Seed(pub u64);

pub fn parse_seed(s: &str) -> Result<u64> {
    let s = s.trim();
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| Error::Config(format!("`{s}` is not a decimal or 0x-prefixed hex seed")))
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match Value::deserialize(d)? {
            Value::Number(n) => n
                .as_u64()
                .map(Seed)
                .ok_or_else(|| D::Error::custom(format!("seed {n} is not a non-negative integer"))),
            Value::String(s) => parse_seed(&s).map(Seed).map_err(D::Error::custom),
            other => Err(D::Error::custom(format!("expected seed, got {other}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SystemSpec {
    /// `"oscillator(d, m, omega0, hbar)"`.
    Oscillator(String),
    Explicit(LevelSystem),
}

/// Matrix given inline as real rows, inline in the complex wire format, or
/// as a path (relative to the config file) to a wire-format JSON file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Path(String),
    Rows(Vec<Vec<f64>>),
    Wire(ResponseMatrix),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Matrices {
    pub x: Option<MatrixSpec>,
    pub f: Option<MatrixSpec>,
    pub g: Option<MatrixSpec>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    pub zeta: Option<Half>,
    /// Phase of particle 2 in `bracket2`; defaults to zero.
    pub zeta2: Option<Half>,
    pub gamma_n: Option<Half>,
    pub gamma_m: Option<Half>,
    pub n: Option<usize>,
    pub m: Option<usize>,
    pub samples: Option<usize>,
    pub seed: Option<Seed>,
    pub tolerance: Option<f64>,
    /// Largest accepted Monte Carlo z-score.
    pub z_max: Option<f64>,
    pub phi: Option<Vec<f64>>,
    pub upsilon: Option<Half>,
    pub k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default)]
    pub system: Option<SystemSpec>,
    #[serde(default)]
    pub matrices: Matrices,
    #[serde(default)]
    pub params: Params,
}

impl ScenarioConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// Parses `"oscillator(d, m, omega0, hbar)"`.
pub fn parse_oscillator(spec: &str) -> Result<(LevelSystem, ResponseMatrix)> {
    let bad = || Error::Config(format!("`{spec}` is not of the form oscillator(d,m,omega0,hbar)"));
    let inner = spec
        .trim()
        .strip_prefix("oscillator(")
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(bad)?;
    let parts: Vec<&str> = inner.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(bad());
    }
    let d: usize = parts[0].parse().map_err(|_| bad())?;
    let nums: Vec<f64> = parts[1..]
        .iter()
        .map(|p| p.parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    harmonic_oscillator(d, nums[0], nums[1], nums[2]).map_err(|e| Error::Config(e.to_string()))
}

fn load_matrix(spec: &MatrixSpec, base: &Path) -> Result<ResponseMatrix> {
    let m = match spec {
        MatrixSpec::Wire(m) => m.clone(),
        MatrixSpec::Rows(rows) => {
            let d = rows.len();
            if rows.iter().any(|r| r.len() != d) {
                return Err(Error::Config("matrix rows must form a square".into()));
            }
            ResponseMatrix::from_real_rows(d, &rows.concat())?
        }
        MatrixSpec::Path(p) => {
            let path: PathBuf = base.join(p);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| Error::Config(format!("cannot read matrix {}: {e}", path.display())))?;
            ResponseMatrix::from_json(&text)?
        }
    };
    Ok(m)
}

/// A config with its system and matrices loaded and its parameters checked.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub experiment: Experiment,
    pub system: Option<LevelSystem>,
    pub x: Option<ResponseMatrix>,
    pub f: Option<ResponseMatrix>,
    pub g: Option<ResponseMatrix>,
    pub params: Params,
}

impl Scenario {
    fn seed(&self) -> u64 {
        self.params.seed.map(|s| s.0).unwrap_or(1)
    }

    fn tol(&self, default: f64) -> f64 {
        self.params.tolerance.unwrap_or(default)
    }

    fn sys(&self) -> &LevelSystem {
        self.system.as_ref().expect("validated")
    }

    fn x(&self) -> &ResponseMatrix {
        self.x.as_ref().expect("validated")
    }

    fn zeta(&self) -> PhaseParameter {
        PhaseParameter::from_half_units(self.params.zeta.map(|h| h.0).unwrap_or(0))
    }

    fn level(&self, v: Option<usize>, name: &str) -> Result<usize> {
        let l = v.ok_or_else(|| Error::Config(format!("params.{name} is required")))?;
        let d = self.sys().dim();
        if l >= d {
            return Err(Error::Config(format!("params.{name} = {l} is outside 0..{d}")));
        }
        Ok(l)
    }

    fn pair(&self) -> Result<ObservablePair> {
        let f = self.f.clone().or_else(|| self.x.clone());
        let g = self.g.clone().or_else(|| self.x.clone());
        match (f, g) {
            (Some(f), Some(g)) => ObservablePair::new(f, g),
            _ => Err(Error::Config("observables f and g (or x) are required".into())),
        }
    }
}

fn require_integer_zeta(s: &Scenario) -> Result<()> {
    if !s.zeta().is_integer() {
        return Err(Error::Config(format!("params.zeta = {} must be an integer here", s.zeta())));
    }
    Ok(())
}

/// Resolves and validates a config. `base` is the directory matrix paths are
/// relative to.
pub fn validate(config: &ScenarioConfig, base: &Path) -> Result<Scenario> {
    if config.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "schema_version {} is not supported (expected {SCHEMA_VERSION})",
            config.schema_version
        )));
    }
    let (system, default_x) = match &config.system {
        Some(SystemSpec::Oscillator(s)) => {
            let (sys, x) = parse_oscillator(s)?;
            (Some(sys), Some(x))
        }
        Some(SystemSpec::Explicit(sys)) => (Some(sys.clone()), None),
        None => (None, None),
    };
    let load = |m: &Option<MatrixSpec>| m.as_ref().map(|spec| load_matrix(spec, base)).transpose();
    let x = load(&config.matrices.x)?.or(default_x);
    let f = load(&config.matrices.f)?;
    let g = load(&config.matrices.g)?;
    let s = Scenario {
        experiment: config.experiment,
        system,
        x,
        f,
        g,
        params: config.params.clone(),
    };
    let p = &s.params;
    if let Some(t) = p.tolerance {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("params.tolerance must be positive, got {t}")));
        }
    }
    let needs_system = !matches!(s.experiment, Experiment::Pauli | Experiment::FullSuite);
    if needs_system && s.system.is_none() {
        return Err(Error::Config(format!("experiment {} needs a system", s.experiment.name())));
    }
    if let Some(sys) = &s.system {
        for m in [&s.x, &s.f, &s.g].into_iter().flatten() {
            if m.dim() != sys.dim() {
                return Err(Error::Config(format!(
                    "matrix dimension {} does not match the system's {}",
                    m.dim(),
                    sys.dim()
                )));
            }
        }
    }
    match s.experiment {
        Experiment::Trk | Experiment::Commutator => {
            s.x.as_ref().ok_or_else(|| Error::Config("matrices.x is required".into()))?;
        }
        Experiment::Bracket2 => {
            s.x.as_ref().ok_or_else(|| Error::Config("matrices.x is required".into()))?;
            s.level(p.n, "n")?;
            s.level(p.m, "m")?;
            let z12 = (s.zeta().half_units - p.zeta2.map(|h| h.0).unwrap_or(0)).abs();
            if z12 % 2 != 0 {
                return Err(Error::Config("bracket2 needs an integer zeta - zeta2".into()));
            }
        }
        Experiment::Covariance | Experiment::Entangle => {
            s.pair()?;
            require_integer_zeta(&s)?;
            let (n, m) = (s.level(p.n, "n")?, s.level(p.m, "m")?);
            if n == m {
                return Err(Error::Config("params.n and params.m must differ".into()));
            }
            if s.experiment == Experiment::Covariance {
                let samples = p.samples.unwrap_or(200_000);
                if samples < MIN_SAMPLES {
                    return Err(Error::Config(format!("params.samples must be at least {MIN_SAMPLES}")));
                }
            }
        }
        Experiment::Spin => {
            s.pair()?;
            require_integer_zeta(&s)?;
            s.level(p.n, "n")?;
            s.level(p.m, "m")?;
            let gn = p.gamma_n.ok_or_else(|| Error::Config("params.gamma_n is required".into()))?;
            let gm = p.gamma_m.ok_or_else(|| Error::Config("params.gamma_m is required".into()))?;
            if (gn.0 - gm.0) % 2 != 0 {
                return Err(Error::Config("gamma_n and gamma_m must both be integer or both half-odd".into()));
            }
        }
        Experiment::Pauli => {
            let u = p.upsilon.ok_or_else(|| Error::Config("params.upsilon is required".into()))?;
            if u.0 < 0 {
                return Err(Error::Config("params.upsilon must be non-negative".into()));
            }
            if p.k.unwrap_or(0) == 0 {
                return Err(Error::Config("params.k must be at least 1".into()));
            }
        }
        Experiment::FullSuite => {}
    }
    Ok(s)
}

/// Validates and runs a config. Errors are config errors only.
pub fn run_scenario(config: &ScenarioConfig, base: &Path) -> Result<RunReport> {
    let s = validate(config, base)?;
    Ok(run_validated(&s))
}

struct Outcome {
    checks: Vec<Check>,
    certificates: Vec<Value>,
    trace: Option<Trace>,
}

impl Outcome {
    fn checks(checks: Vec<Check>) -> Self {
        Outcome {
            checks,
            certificates: vec![],
            trace: None,
        }
    }
}

pub fn run_validated(s: &Scenario) -> RunReport {
    let result = match s.experiment {
        Experiment::Trk => run_trk(s),
        Experiment::Commutator => run_commutator(s),
        Experiment::Bracket2 => run_bracket2(s),
        Experiment::Covariance => run_covariance(s),
        Experiment::Entangle => run_entangle(s),
        Experiment::Spin => run_spin(s),
        Experiment::Pauli => run_pauli(s),
        Experiment::FullSuite => run_full_suite(s),
    };
    let out = result.unwrap_or_else(|e| Outcome::checks(vec![Check::failure(s.experiment.name(), &e)]));
    let mut report = RunReport::new(s.experiment.name(), out.checks, Some(s.seed()));
    report.certificates = out.certificates;
    report.trace = out.trace;
    report
}

fn run_trk(s: &Scenario) -> Result<Outcome> {
    let (sys, x) = (s.sys(), s.x());
    let tol = s.tol(1e-12);
    let d = sys.dim();
    let mut checks = Vec::new();
    let mut trace = Trace::new(&["level", "sum", "deviation"]);
    for n in 0..d {
        let sum = trk_sum(x, sys, n)?;
        let dev = sum - sys.hbar();
        trace.rows.push(vec![n as f64, sum, dev]);
        if n + 1 < d {
            checks.push(Check::within(format!("trk[{n}]"), sys.hbar(), sum, tol));
        } else {
            checks.push(Check::verdict(
                format!("trk[{n}] truncation boundary"),
                "flagged (sum != hbar)",
                sum,
                dev.abs() > tol,
            ));
        }
    }
    Ok(Outcome {
        checks,
        certificates: vec![],
        trace: Some(trace),
    })
}

fn run_commutator(s: &Scenario) -> Result<Outcome> {
    let (sys, x) = (s.sys(), s.x());
    let tol = s.tol(1e-12);
    let p = momentum_matrix(x, sys)?;
    let c = commutator(x, &p)?;
    let d = sys.dim();
    let mut worst: f64 = 0.0;
    let mut trace = Trace::new(&["level", "diag_re", "diag_im", "deviation"]);
    for i in 0..d {
        let ihbar = Complex64::new(0.0, sys.hbar());
        trace.rows.push(vec![i as f64, c[(i, i)].re, c[(i, i)].im, (c[(i, i)] - ihbar).norm()]);
        if i + 1 < d {
            for j in 0..d - 1 {
                let want = if i == j { ihbar } else { Complex64::new(0.0, 0.0) };
                worst = worst.max((c[(i, j)] - want).norm());
            }
        }
    }
    let h = heisenberg_residual(x, &p, sys)?;
    let mut checks = vec![Check::at_most(format!("max |[x,p] - i hbar| on levels 0..{}", d - 2), tol, worst)];
    if h.empty_interior {
        checks.push(Check::verdict("heisenberg residual", "non-empty interior", "empty interior", true));
    } else {
        checks.push(Check::at_most("heisenberg residual on interior levels", tol, h.residual));
    }
    Ok(Outcome {
        checks,
        certificates: vec![],
        trace: Some(trace),
    })
}

fn complex_value(z: Complex64) -> Value {
    serde_json::json!([z.re, z.im])
}

fn run_bracket2(s: &Scenario) -> Result<Outcome> {
    let (sys, x) = (s.sys(), s.x());
    let tol = s.tol(1e-6);
    let n = s.level(s.params.n, "n")?;
    let m = s.level(s.params.m, "m")?;
    let z1 = s.zeta();
    let z2 = PhaseParameter::from_half_units(s.params.zeta2.map(|h| h.0).unwrap_or(0));
    let p1 = ParticleResponse::new(sys.clone(), x.clone(), z1, ParticleLabel::One)?;
    let p2 = ParticleResponse::new(sys.clone(), x.clone(), z2, ParticleLabel::Two)?;
    let pair = BipartitePair::new(p1.clone(), p2.clone(), n, m)?;
    let mom2 = momentum_response(&p2)?;
    let r = sample_realization(&ModeKey::all(sys.dim()), s.seed())?;
    let opts = BracketOptions::default();
    let num_xx = poisson_bracket_numeric(&p1, &p2, n, m, &r, opts)?;
    let num_xp = poisson_bracket_numeric(&p1, &mom2, n, m, &r, opts)?;
    let mut checks = Vec::new();
    let (xx, xp) = if n == m {
        let same = bracket_xp_same(&pair)?;
        let sign = pair.zeta12().parity()?.sign() as f64;
        if same.boundary {
            checks.push(Check::verdict("level is a truncation boundary", "interior level", n as u64, false));
        } else {
            checks.push(Check::within(
                "[x1,p2]_nn / (i hbar)",
                sign,
                (same.value / Complex64::new(0.0, sys.hbar())).re,
                1e-12,
            ));
        }
        (bracket_xx_same(&pair)?, same.value)
    } else {
        (bracket_xx_distinct(&pair)?, bracket_xp_distinct(&pair)?)
    };
    checks.push(Check::exact("[x1,x2] closed form", [0.0, 0.0], [xx.re, xx.im]));
    checks.push(Check::verdict(
        "[x1,x2] numeric vs closed form",
        complex_value(xx),
        complex_value(num_xx),
        (num_xx - xx).norm() <= tol * xx.norm().max(1.0),
    ));
    checks.push(Check::verdict(
        "[x1,p2] numeric vs closed form",
        complex_value(xp),
        complex_value(num_xp),
        (num_xp - xp).norm() <= tol * xp.norm().max(1.0),
    ));
    Ok(Outcome::checks(checks))
}

fn run_covariance(s: &Scenario) -> Result<Outcome> {
    let pair = s.pair()?;
    let (n, m) = (s.level(s.params.n, "n")?, s.level(s.params.m, "m")?);
    let z = s.zeta();
    let samples = s.params.samples.unwrap_or(200_000);
    let z_max = s.params.z_max.unwrap_or(4.0);
    let r = mc_covariance(s.sys(), &pair, n, m, z, samples, s.seed())?;
    let parts = covariance_parts(&pair, n, m, z)?;
    let checks = vec![
        Check::within("analytic vs quantum covariance", r.quantum, r.analytic, s.tol(1e-12)),
        Check::within("analytic vs closed form", parts.total(), r.analytic, s.tol(1e-12)),
        Check::verdict(
            format!("Monte Carlo estimate within {z_max} SE"),
            r.analytic,
            serde_json::json!({"estimate": r.estimate, "standard_error": r.standard_error, "z_score": r.z_score}),
            r.z_score <= z_max,
        ),
    ];
    let mut trace = Trace::new(&["samples", "estimate", "stderr", "analytic"]);
    for p in &r.trace {
        trace.rows.push(vec![p.samples as f64, p.estimate, p.stderr, p.analytic]);
    }
    Ok(Outcome {
        checks,
        certificates: vec![],
        trace: Some(trace),
    })
}

fn run_entangle(s: &Scenario) -> Result<Outcome> {
    let pair = s.pair()?;
    let (n, m) = (s.level(s.params.n, "n")?, s.level(s.params.m, "m")?);
    let z = s.zeta();
    let psi = build_entangled_state(n, m, z)?;
    let v = psi.vector(pair.dim())?;
    let expected_parity = if psi.sign > 0 { "symmetric" } else { "antisymmetric" };
    Ok(Outcome::checks(vec![
        Check::within("state norm", 1.0, v.norm(), 1e-12),
        Check::exact("swap parity", expected_parity, psi.swap_parity(pair.dim())?),
        Check::within(
            "quantum vs analytic covariance",
            analytic_covariance(&pair, n, m, z)?,
            quantum_covariance(&pair, &psi)?,
            s.tol(1e-12),
        ),
    ]))
}

fn run_spin(s: &Scenario) -> Result<Outcome> {
    let pair = s.pair()?;
    let (n, m) = (s.level(s.params.n, "n")?, s.level(s.params.m, "m")?);
    let z = s.zeta();
    let gn = SpinLabel::from_half_units(s.params.gamma_n.map(|h| h.0).unwrap_or(0));
    let gm = SpinLabel::from_half_units(s.params.gamma_m.map(|h| h.0).unwrap_or(0));
    let tol = s.tol(1e-12);
    let mut checks = Vec::new();
    let state = build_complete_state(n, gn, m, gm, z)?;
    let factor = exchange_factor(z, gn)?;
    for dir in [ExchangeDirection::Forward, ExchangeDirection::Backward] {
        checks.push(Check::exact(
            format!("brute-force exchange ({dir:?}) vs exchange factor"),
            Some(factor),
            exchange_parity(&state, dir).sign(),
        ));
    }
    checks.push(Check::exact("zeta parity required by the spin labels", required_zeta_parity(gn), z.parity()?));
    checks.push(Check::verdict("label-swap parity", "informational", serde_json::to_value(swap_parity(&state))?, true));
    if n != m {
        let analytic = analytic_covariance(&pair, n, m, z)?;
        let phis = s.params.phi.clone().unwrap_or_else(|| vec![0.0, std::f64::consts::FRAC_PI_3, std::f64::consts::PI]);
        for phi in phis {
            let sc = spin_covariance(&pair, n, m, z, (gn, gm), phi)?;
            checks.push(Check::within(format!("spin covariance at phi={phi}"), analytic, sc, tol));
            let q = complete_state_covariance(&pair, &state.clone().with_rotation(phi))?;
            checks.push(Check::within(format!("complete-state covariance at phi={phi}"), sc, q, tol));
        }
    }
    Ok(Outcome::checks(checks))
}

fn run_pauli(s: &Scenario) -> Result<Outcome> {
    let upsilon = PhaseParameter::from_half_units(s.params.upsilon.map(|h| h.0).unwrap_or(1));
    let k = s.params.k.unwrap_or(2);
    let outcome = pauli_feasibility(upsilon, k)?;
    let mut certificates = Vec::new();
    let checks = match &outcome {
        PauliOutcome::NotApplicable => vec![Check::verdict(
            "exclusion search",
            "half-odd upsilon",
            "not applicable (integer upsilon)",
            true,
        )],
        PauliOutcome::Feasible { witnesses } => {
            certificates.push(serde_json::to_value(&outcome)?);
            vec![Check::verdict(
                format!("k={k} feasibility"),
                if k <= 2 { "feasible" } else { "infeasible" },
                format!("feasible ({} witnesses)", witnesses.len()),
                k <= 2,
            )]
        }
        PauliOutcome::Infeasible { certificate } => {
            certificates.push(serde_json::to_value(&outcome)?);
            vec![
                Check::verdict(
                    format!("k={k} feasibility"),
                    if k <= 2 { "feasible" } else { "infeasible" },
                    "infeasible",
                    k > 2,
                ),
                Check::exact("certificate verifies", true, certificate.verify()),
            ]
        }
    };
    Ok(Outcome {
        checks,
        certificates,
        trace: None,
    })
}

fn run_full_suite(s: &Scenario) -> Result<Outcome> {
    let mut opts = SuiteOptions {
        seed: s.seed(),
        ..SuiteOptions::default()
    };
    if let Some(n) = s.params.samples {
        opts.covariance_samples = n;
        opts.pairing_samples = n;
    }
    let mut checks = Vec::new();
    let mut certificates = Vec::new();
    for c in run_suite(&opts) {
        for mut check in c.checks {
            check.name = format!("criterion {}: {}", c.id, check.name);
            checks.push(check);
        }
        certificates.extend(c.certificates);
    }
    Ok(Outcome {
        checks,
        certificates,
        trace: None,
    })
}
