//! Field-induced covariance of two particles' observables.
//!
//! Two particles on levels `n ≠ m` share the mode `(n,m)`. Averaging over the
//! field and over the two equally likely level assignments C and D gives a
//! covariance that coincides with the quantum covariance in the entangled
//! state `(|n⟩|m⟩ + (-1)^ζ |m⟩|n⟩)/√2`.
//!
//! The Monte Carlo estimator pairs the positive-frequency parts of the two
//! responses, `u = f_aa + F⁺` and `v = g_bb + G⁺`, and reports
//! `Re(E[uv] - E[u]E[v])`. Correlating the full real signals instead counts
//! the shared mode twice (once from `F⁺G⁻`, once from `F⁻G⁺`) and converges
//! to the classical part plus twice the quantum part; that model is kept as
//! [`SignalModel::Real`] for comparison.

use std::f64::consts::TAU;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{derive_seed, sample_stream, uniform_phase, ModeKey};
use crate::phase::PhaseParameter;
use crate::response::{CMatrix, LevelSystem, ResponseMatrix};
use crate::stats::{batch_standard_error, run_batches, PairedCovariance};

/// Imaginary parts of exact covariances above this fail loudly.
pub const IMAGINARY_TOL: f64 = 1e-10;
/// Fewest samples accepted by the Monte Carlo estimators.
pub const MIN_SAMPLES: usize = 1000;
/// Floor on the standard error when forming z-scores.
pub const SE_FLOOR: f64 = 1e-12;

/// Observable `f` of particle 1 and `g` of particle 2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservablePair {
    pub f: ResponseMatrix,
    pub g: ResponseMatrix,
}

impl ObservablePair {
    pub fn new(f: ResponseMatrix, g: ResponseMatrix) -> Result<Self> {
        g.check_dim(f.dim())?;
        Ok(ObservablePair { f, g })
    }

    pub fn dim(&self) -> usize {
        self.f.dim()
    }

    pub(crate) fn check_levels(&self, n: usize, m: usize) -> Result<()> {
        for l in [n, m] {
            if l >= self.dim() {
                return Err(Error::IndexOutOfRange {
                    index: l,
                    dim: self.dim(),
                });
            }
        }
        if n == m {
            return Err(Error::SameLevel(n));
        }
        Ok(())
    }
}

/// Assignment of the two levels to the two particles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Configuration {
    /// Particle 1 on `n`, particle 2 on `m`.
    C,
    /// Particle 1 on `m`, particle 2 on `n`.
    D,
}

impl Configuration {
    /// Levels of (particle 1, particle 2).
    pub fn levels(self, n: usize, m: usize) -> (usize, usize) {
        match self {
            Configuration::C => (n, m),
            Configuration::D => (m, n),
        }
    }
}

fn sign_of(zeta: PhaseParameter) -> Result<f64> {
    Ok(zeta.parity()?.sign() as f64)
}

/// Field average of `f g` in one configuration:
/// `f_aa g_bb + (-1)^ζ Re(f_ab g_ba)` with `(a, b)` the configuration's levels.
pub fn config_average(
    pair: &ObservablePair,
    n: usize,
    m: usize,
    zeta: PhaseParameter,
    cfg: Configuration,
) -> Result<f64> {
    pair.check_levels(n, m)?;
    let s = sign_of(zeta)?;
    let (a, b) = cfg.levels(n, m);
    let (f, g) = (&pair.f, &pair.g);
    Ok(f.mean(a) * g.mean(b) + s * (f.entry(a, b) * g.entry(b, a)).re)
}

/// `½(⟨fg⟩_C + ⟨fg⟩_D) - f̄ ḡ` with `f̄ = ½(f_nn + f_mm)`.
pub fn analytic_covariance(pair: &ObservablePair, n: usize, m: usize, zeta: PhaseParameter) -> Result<f64> {
    let c = config_average(pair, n, m, zeta, Configuration::C)?;
    let d = config_average(pair, n, m, zeta, Configuration::D)?;
    let fbar = 0.5 * (pair.f.mean(n) + pair.f.mean(m));
    let gbar = 0.5 * (pair.g.mean(n) + pair.g.mean(m));
    Ok(0.5 * (c + d) - fbar * gbar)
}

/// Split of the covariance into its classical and shared-mode parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovarianceParts {
    /// `-¼(f_nn - f_mm)(g_nn - g_mm)`.
    pub classical: f64,
    /// `½(-1)^ζ (f_nm g_mn + f_mn g_nm)`.
    pub quantum: f64,
}

impl CovarianceParts {
    pub fn total(&self) -> f64 {
        self.classical + self.quantum
    }
}

/// Closed form of [`analytic_covariance`], computed independently.
pub fn covariance_parts(pair: &ObservablePair, n: usize, m: usize, zeta: PhaseParameter) -> Result<CovarianceParts> {
    pair.check_levels(n, m)?;
    let s = sign_of(zeta)?;
    let (f, g) = (&pair.f, &pair.g);
    let classical = -0.25 * (f.mean(n) - f.mean(m)) * (g.mean(n) - g.mean(m));
    let q = f.entry(n, m) * g.entry(m, n) + f.entry(m, n) * g.entry(n, m);
    if q.im.abs() > IMAGINARY_TOL * q.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidual(q.im.abs()));
    }
    Ok(CovarianceParts {
        classical,
        quantum: 0.5 * s * q.re,
    })
}

/// Covariance of particles driven by independent realizations: always zero.
pub fn independent_covariance(_pair: &ObservablePair) -> f64 {
    0.0
}

/// Which signal each particle contributes to the Monte Carlo product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalModel {
    /// Mean plus positive-frequency part; converges to the analytic value.
    #[default]
    PositiveFrequency,
    /// Full real response; the shared-mode term comes out doubled.
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub batches: usize,
    /// Probability of configuration C. Anything but ½ is a negative control.
    pub weight_c: f64,
    pub signal: SignalModel,
}

impl Default for McOptions {
    fn default() -> Self {
        McOptions {
            batches: 20,
            weight_c: 0.5,
            signal: SignalModel::PositiveFrequency,
        }
    }
}

/// Running estimate after each completed batch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub samples: u64,
    pub estimate: f64,
    pub stderr: f64,
    pub analytic: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    pub estimate: f64,
    pub standard_error: f64,
    pub samples: u64,
    pub analytic: f64,
    pub quantum: f64,
    /// `|estimate - analytic|` in standard errors.
    pub z_score: f64,
    pub trace: Vec<ConvergencePoint>,
}

/// One term `coef · a_{mode} e^{-iωt}` of a positive-frequency part.
#[derive(Clone, Copy)]
struct Term {
    mode: usize,
    reversed: bool,
    coef: Complex64,
    omega: f64,
}

/// Positive-frequency terms of `x` in state `level` for a particle with
/// phase `zeta`, indexed into `modes`.
fn signal_terms(
    x: &ResponseMatrix,
    sys: &LevelSystem,
    zeta: PhaseParameter,
    level: usize,
    modes: &[ModeKey],
) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for k in 0..x.dim() {
        let amp = x.entry(level, k);
        if k == level || amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let (key, reversed) = ModeKey::oriented(level, k)?;
        let mode = modes
            .binary_search(&key)
            .map_err(|_| Error::MissingMode { from: level, to: k })?;
        let s = if level < k { 1.0 } else { -1.0 };
        let phase = Complex64::new(zeta.cos_pi(), s * zeta.sin_pi());
        out.push(Term {
            mode,
            reversed,
            coef: phase * amp,
            omega: sys.omega(k, level),
        });
    }
    Ok(out)
}

fn positive_part(terms: &[Term], a: &[Complex64], t: f64) -> Complex64 {
    terms.iter().fold(Complex64::new(0.0, 0.0), |acc, term| {
        let v = if term.reversed { a[term.mode].conj() } else { a[term.mode] };
        acc + term.coef * v * Complex64::from_polar(1.0, -term.omega * t)
    })
}

fn signal_value(mean: f64, terms: &[Term], a: &[Complex64], t: f64, model: SignalModel) -> Complex64 {
    let osc = positive_part(terms, a, t);
    match model {
        SignalModel::PositiveFrequency => mean + osc,
        SignalModel::Real => Complex64::new(mean + 2.0 * osc.re, 0.0),
    }
}

struct Particles {
    modes: Vec<ModeKey>,
    /// Indexed by configuration: (f mean, f terms, g mean, g terms).
    cfg: [(f64, Vec<Term>, f64, Vec<Term>); 2],
}

fn prepare(system: &LevelSystem, pair: &ObservablePair, n: usize, m: usize, zeta: PhaseParameter) -> Result<Particles> {
    pair.f.check_dim(system.dim())?;
    pair.check_levels(n, m)?;
    zeta.parity()?;
    let modes = ModeKey::touching_any(&[n, m], system.dim());
    let build = |cfg: Configuration| -> Result<(f64, Vec<Term>, f64, Vec<Term>)> {
        let (a, b) = cfg.levels(n, m);
        Ok((
            pair.f.mean(a),
            signal_terms(&pair.f, system, zeta, a, &modes)?,
            pair.g.mean(b),
            signal_terms(&pair.g, system, PhaseParameter::ZERO, b, &modes)?,
        ))
    };
    let cfg = [build(Configuration::C)?, build(Configuration::D)?];
    Ok(Particles { modes, cfg })
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_SAMPLES,
            found: samples,
        });
    }
    Ok(())
}

fn summarize(parts: Vec<PairedCovariance>, analytic: f64, quantum: f64) -> CovarianceReport {
    let mut trace = Vec::with_capacity(parts.len());
    let mut running = PairedCovariance::default();
    let mut batch_estimates = Vec::with_capacity(parts.len());
    for p in &parts {
        running.merge(p);
        batch_estimates.push(p.covariance().re);
        trace.push(ConvergencePoint {
            samples: running.count(),
            estimate: running.covariance().re,
            stderr: batch_standard_error(&batch_estimates),
            analytic,
        });
    }
    let estimate = running.covariance().re;
    let standard_error = batch_standard_error(&batch_estimates);
    CovarianceReport {
        estimate,
        standard_error,
        samples: running.count(),
        analytic,
        quantum,
        z_score: (estimate - analytic).abs() / standard_error.max(SE_FLOOR),
        trace,
    }
}

/// Monte Carlo covariance over configurations, field realizations and time.
///
/// Sample `j` draws, from its own stream, the configuration, a time uniform in
/// one period of the shared mode and one phase per mode touching `n` or `m`.
/// Particle 1 carries phase `ζ`, particle 2 phase zero.
pub fn mc_covariance(
    system: &LevelSystem,
    pair: &ObservablePair,
    n: usize,
    m: usize,
    zeta: PhaseParameter,
    samples: usize,
    seed: u64,
) -> Result<CovarianceReport> {
    mc_covariance_with(system, pair, n, m, zeta, samples, seed, McOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn mc_covariance_with(
    system: &LevelSystem,
    pair: &ObservablePair,
    n: usize,
    m: usize,
    zeta: PhaseParameter,
    samples: usize,
    seed: u64,
    opts: McOptions,
) -> Result<CovarianceReport> {
    check_samples(samples)?;
    if !(0.0..=1.0).contains(&opts.weight_c) {
        return Err(Error::Domain(format!("weight_c must lie in [0,1], got {}", opts.weight_c)));
    }
    let prep = prepare(system, pair, n, m, zeta)?;
    let period = TAU / system.omega(m, n).abs();
    let parts = run_batches(samples, opts.batches, |_, range| {
        let mut acc = PairedCovariance::default();
        let mut a = vec![Complex64::new(0.0, 0.0); prep.modes.len()];
        for j in range {
            let mut rng = sample_stream(seed, j as u64);
            let idx = if rng.random::<f64>() < opts.weight_c { 0 } else { 1 };
            let t = rng.random::<f64>() * period;
            for v in a.iter_mut() {
                *v = Complex64::from_polar(1.0, uniform_phase(&mut rng));
            }
            let (fm, ft, gm, gt) = &prep.cfg[idx];
            let u = signal_value(*fm, ft, &a, t, opts.signal);
            let v = signal_value(*gm, gt, &a, t, opts.signal);
            acc.push(u, v);
        }
        acc
    });
    let cov = covariance_parts(pair, n, m, zeta)?;
    let analytic = analytic_covariance(pair, n, m, zeta)?;
    let quantum = quantum_covariance(pair, &build_entangled_state(n, m, zeta)?)?;
    debug_assert!((cov.total() - analytic).abs() < 1e-9);
    Ok(summarize(parts, analytic, quantum))
}

/// Stream family tag for the second particle's independent field.
const INDEPENDENT_STREAM: u64 = 1;

/// Monte Carlo covariance of particle 1 on `n` and particle 2 on `m` when the
/// two see unrelated realizations (particle 2 reads a stream family derived
/// from `seed`). Converges to zero.
pub fn mc_independent_covariance(
    system: &LevelSystem,
    pair: &ObservablePair,
    n: usize,
    m: usize,
    samples: usize,
    seed: u64,
) -> Result<CovarianceReport> {
    check_samples(samples)?;
    let prep = prepare(system, pair, n, m, PhaseParameter::ZERO)?;
    let other = derive_seed(seed, INDEPENDENT_STREAM);
    let period = TAU / system.omega(m, n).abs();
    let parts = run_batches(samples, McOptions::default().batches, |_, range| {
        let mut acc = PairedCovariance::default();
        let mut a1 = vec![Complex64::new(0.0, 0.0); prep.modes.len()];
        let mut a2 = a1.clone();
        for j in range {
            let mut r1 = sample_stream(seed, j as u64);
            let mut r2 = sample_stream(other, j as u64);
            let t = r1.random::<f64>() * period;
            for (x, y) in a1.iter_mut().zip(a2.iter_mut()) {
                *x = Complex64::from_polar(1.0, uniform_phase(&mut r1));
                *y = Complex64::from_polar(1.0, uniform_phase(&mut r2));
            }
            let (fm, ft, gm, gt) = &prep.cfg[0];
            let u = signal_value(*fm, ft, &a1, t, SignalModel::Real);
            let v = signal_value(*gm, gt, &a2, t, SignalModel::Real);
            acc.push(u, v);
        }
        acc
    });
    Ok(summarize(parts, independent_covariance(pair), 0.0))
}

/// `(|n⟩₁|m⟩₂ + sign |m⟩₁|n⟩₂)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntangledState {
    pub n: usize,
    pub m: usize,
    pub sign: i32,
}

pub fn build_entangled_state(n: usize, m: usize, zeta: PhaseParameter) -> Result<EntangledState> {
    if n == m {
        return Err(Error::SameLevel(n));
    }
    Ok(EntangledState {
        n,
        m,
        sign: zeta.parity()?.sign(),
    })
}

impl EntangledState {
    /// Amplitudes in the product basis, index `i·dim + j` for `|i⟩₁|j⟩₂`.
    pub fn vector(&self, dim: usize) -> Result<DVector<Complex64>> {
        for l in [self.n, self.m] {
            if l >= dim {
                return Err(Error::IndexOutOfRange { index: l, dim });
            }
        }
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = DVector::zeros(dim * dim);
        v[self.n * dim + self.m] += Complex64::new(h, 0.0);
        v[self.m * dim + self.n] += Complex64::new(self.sign as f64 * h, 0.0);
        Ok(v)
    }

    pub fn swap_parity(&self, dim: usize) -> Result<SwapParity> {
        Ok(swap_parity_vector(&self.vector(dim)?, dim))
    }
}

/// `|n⟩₁|m⟩₂`.
pub fn product_state(n: usize, m: usize, dim: usize) -> Result<DVector<Complex64>> {
    for l in [n, m] {
        if l >= dim {
            return Err(Error::IndexOutOfRange { index: l, dim });
        }
    }
    let mut v = DVector::zeros(dim * dim);
    v[n * dim + m] = Complex64::new(1.0, 0.0);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwapParity {
    Symmetric,
    Antisymmetric,
    NotEigenstate,
}

impl SwapParity {
    pub fn sign(self) -> Option<i32> {
        match self {
            SwapParity::Symmetric => Some(1),
            SwapParity::Antisymmetric => Some(-1),
            SwapParity::NotEigenstate => None,
        }
    }
}

const STATE_TOL: f64 = 1e-12;

/// Compares `P ψ` with `±ψ`, where `P` exchanges the two particle slots of
/// a vector indexed `i·local + j`.
pub fn swap_parity_vector(psi: &DVector<Complex64>, local: usize) -> SwapParity {
    let swapped = DVector::from_fn(psi.len(), |idx, _| {
        let (i, j) = (idx / local, idx % local);
        psi[j * local + i]
    });
    classify_exchange(psi, &swapped)
}

/// `Symmetric` if `other = ψ`, `Antisymmetric` if `other = -ψ`.
pub(crate) fn classify_exchange(psi: &DVector<Complex64>, other: &DVector<Complex64>) -> SwapParity {
    let scale = psi.norm().max(1.0);
    if psi.norm() < STATE_TOL {
        return SwapParity::NotEigenstate;
    }
    if (other - psi).norm() <= STATE_TOL * scale {
        SwapParity::Symmetric
    } else if (other + psi).norm() <= STATE_TOL * scale {
        SwapParity::Antisymmetric
    } else {
        SwapParity::NotEigenstate
    }
}

/// `⟨ψ|F⊗G|ψ⟩ - ⟨ψ|F⊗1|ψ⟩⟨ψ|1⊗G|ψ⟩` for a normalized two-particle vector.
pub fn state_covariance(f: &CMatrix, g: &CMatrix, psi: &DVector<Complex64>) -> Result<f64> {
    let (df, dg) = (f.nrows(), g.nrows());
    if psi.len() != df * dg {
        return Err(Error::DimensionMismatch {
            expected: df * dg,
            found: psi.len(),
        });
    }
    if (psi.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!("state norm is {}, expected 1", psi.norm())));
    }
    let expect = |op: CMatrix| psi.dotc(&(op * psi));
    let fg = expect(f.kronecker(g));
    let f1 = expect(f.kronecker(&CMatrix::identity(dg, dg)));
    let g1 = expect(CMatrix::identity(df, df).kronecker(g));
    let cov = fg - f1 * g1;
    if cov.im.abs() > IMAGINARY_TOL * cov.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidual(cov.im.abs()));
    }
    Ok(cov.re)
}

/// Quantum covariance of `f ⊗ g` in the entangled state.
pub fn quantum_covariance(pair: &ObservablePair, psi: &EntangledState) -> Result<f64> {
    let v = psi.vector(pair.dim())?;
    state_covariance(pair.f.as_matrix(), pair.g.as_matrix(), &v)
}
