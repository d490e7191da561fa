//! Response time series driven by a field realization, and the Poisson
//! bracket with respect to the normal variables.
//!
//! Phase convention: a particle with phase parameter ζ multiplies the term of
//! mode `(n,k)` by `e^{iπζ}` when `n < k` and by `e^{-iπζ}` when `n > k`. The
//! response phase is attached to the canonical mode variable, so the shared
//! mode of two particles on levels `n < m` enters as `e^{iπζ¹}a` and
//! `e^{-iπζ²}a*`. Brackets then depend on `ζ¹ - ζ²`, both for particles on
//! distinct levels and for particles on the same level.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LevelSystem, ResponseMatrix};
use crate::error::{Error, Result};
use crate::field::{FieldRealization, ModeVariables};
use crate::phase::PhaseParameter;

const REALNESS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ParticleLabel {
    One,
    Two,
}

/// One particle's response: mechanics, amplitudes and its phase parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleResponse {
    pub system: LevelSystem,
    pub matrix: ResponseMatrix,
    pub zeta: PhaseParameter,
    pub label: ParticleLabel,
}

impl ParticleResponse {
    pub fn new(
        system: LevelSystem,
        matrix: ResponseMatrix,
        zeta: PhaseParameter,
        label: ParticleLabel,
    ) -> Result<Self> {
        matrix.check_dim(system.dim())?;
        Ok(ParticleResponse {
            system,
            matrix,
            zeta,
            label,
        })
    }

    pub fn dim(&self) -> usize {
        self.system.dim()
    }

    /// Phase factor on the term of mode `(n, k)`.
    fn mode_phase(&self, n: usize, k: usize) -> Complex64 {
        let s = if n < k { 1.0 } else { -1.0 };
        Complex64::new(self.zeta.cos_pi(), s * self.zeta.sin_pi())
    }
}

/// `e^{±iπζ} Σ_{k≠n} f_{nk} a_{nk} e^{-iω_{kn} t}`, the positive-frequency
/// part of the response in state `n`. Terms with a zero amplitude are skipped
/// and need no mode.
pub fn positive_frequency_part(
    pr: &ParticleResponse,
    n: usize,
    vars: &ModeVariables,
    t: f64,
) -> Result<Complex64> {
    pr.system.check_index(n)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..pr.dim() {
        if k == n {
            continue;
        }
        let amp = pr.matrix.entry(n, k);
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        let a = vars.get(n, k)?;
        let clock = Complex64::from_polar(1.0, -pr.system.omega(k, n) * t);
        sum += pr.mode_phase(n, k) * amp * a * clock;
    }
    Ok(sum)
}

/// Response value for arbitrary (not necessarily unit-modulus) mode variables.
pub fn evaluate_response_vars(
    pr: &ParticleResponse,
    n: usize,
    vars: &ModeVariables,
    t: f64,
) -> Result<f64> {
    let osc = positive_frequency_part(pr, n, vars, t)?;
    let total = pr.matrix.entry(n, n) + osc + osc.conj();
    if total.im.abs() > REALNESS_TOL * total.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidual(total.im.abs()));
    }
    Ok(total.re)
}

/// `f_n(t) = f_nn + e^{±iπζ} Σ_k f_{nk} a_{nk} e^{-iω_{kn} t} + c.c.`
pub fn evaluate_response(
    pr: &ParticleResponse,
    n: usize,
    r: &FieldRealization,
    t: f64,
) -> Result<f64> {
    evaluate_response_vars(pr, n, &r.normal_variables(), t)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketOptions {
    /// Central-difference step on each quadrature of `a`.
    pub step: f64,
    /// Evaluation time; brackets of linear responses do not depend on it.
    pub time: f64,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions {
            step: 1e-5,
            time: 0.0,
        }
    }
}

/// Wirtinger pair `(∂/∂a, ∂/∂a*)` of a real function of `a`, from central
/// differences on `Re a` and `Im a`.
fn wirtinger<F>(f: F, vars: &ModeVariables, n: usize, k: usize, h: f64) -> Result<(Complex64, Complex64)>
where
    F: Fn(&ModeVariables) -> Result<f64>,
{
    let shifted = |delta: Complex64| -> Result<f64> {
        let mut v = vars.clone();
        v.shift(n, k, delta)?;
        f(&v)
    };
    let d_re = (shifted(Complex64::new(h, 0.0))? - shifted(Complex64::new(-h, 0.0))?) / (2.0 * h);
    let d_im = (shifted(Complex64::new(0.0, h))? - shifted(Complex64::new(0.0, -h))?) / (2.0 * h);
    let d_a = Complex64::new(0.5 * d_re, -0.5 * d_im);
    let d_astar = Complex64::new(0.5 * d_re, 0.5 * d_im);
    Ok((d_a, d_astar))
}

/// Numerical Poisson bracket of `f` in state `n` and `g` in state `n2` with
/// respect to the normal variables `{a_{nk}}` of state `n`:
/// `Σ_k (∂f/∂a_{nk} ∂g/∂a*_{nk} - ∂g/∂a_{nk} ∂f/∂a*_{nk})`.
///
/// Two different particles share the realization, so `g` feels every mode it
/// has in common with `f`, including `a_{mn} = a*_{nm}`. Two states of the
/// same particle respond to distinct, independent sets of field variables, so
/// `g` in state `n2 ≠ n` is held fixed while the modes of state `n` vary.
pub fn poisson_bracket_numeric(
    f: &ParticleResponse,
    g: &ParticleResponse,
    n: usize,
    n2: usize,
    r: &FieldRealization,
    opts: BracketOptions,
) -> Result<Complex64> {
    if !(opts.step > 0.0 && opts.step.is_finite()) {
        return Err(Error::InvalidStep(opts.step));
    }
    f.matrix.check_dim(g.dim())?;
    f.system.check_index(n)?;
    g.system.check_index(n2)?;
    let vars = r.normal_variables();
    let shares_modes = f.label != g.label || n == n2;
    let t = opts.time;
    let f_of = |v: &ModeVariables| evaluate_response_vars(f, n, v, t);
    let g_of = |v: &ModeVariables| evaluate_response_vars(g, n2, v, t);
    // g must at least be evaluable on the unperturbed realization
    g_of(&vars)?;

    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..f.dim() {
        if k == n || !vars.contains(n, k) {
            continue;
        }
        let (fa, fs) = wirtinger(f_of, &vars, n, k, opts.step)?;
        if !shares_modes {
            continue;
        }
        let (ga, gs) = wirtinger(g_of, &vars, n, k, opts.step)?;
        total += fa * gs - ga * fs;
    }
    Ok(total)
}

/// Closed form of the single-particle bracket `{x, p}_{nn} = 2im Σ ω_{kn}|x_{nk}|^2`.
pub fn analytic_bracket_xp(x: &ResponseMatrix, sys: &LevelSystem, n: usize) -> Result<Complex64> {
    Ok(Complex64::new(0.0, super::trk_sum(x, sys, n)?))
}
