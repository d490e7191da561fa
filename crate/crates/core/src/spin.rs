//! Internal rotation, spin-dressed covariance, exchange parity and the
//! exclusion bound for half-integer γ.
//!
//! A particle in a state of internal label γ carries the rotation factor
//! `e^{-iγφ}`. Dressed observables pick up `e^{i(γ - γ')φ}` between states of
//! labels γ and γ'; those factors cancel pairwise in the shared-mode product,
//! so the covariance does not depend on φ.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::covariance::{
    classify_exchange, state_covariance, Configuration, ObservablePair, SwapParity, IMAGINARY_TOL,
};
use crate::error::{Error, Result};
use crate::phase::{Parity, PhaseParameter, SpinLabel};
use crate::response::CMatrix;

/// `e^{i(γ_a - γ_b)φ}`.
pub fn rotation_factor(a: SpinLabel, b: SpinLabel, phi: f64) -> Complex64 {
    let diff = (a.gamma_half_units - b.gamma_half_units) as f64 / 2.0;
    Complex64::from_polar(1.0, diff * phi)
}

/// Configuration average with rotation factors on the shared-mode amplitudes:
/// C gives `f_nn g_mm + (-1)^ζ f_nm e^{iγ_{nm}φ} g_mn e^{iγ_{mn}φ}`, D the same
/// with `n` and `m` exchanged.
pub fn spin_config_average(
    pair: &ObservablePair,
    n: usize,
    m: usize,
    zeta: PhaseParameter,
    gammas: (SpinLabel, SpinLabel),
    phi: f64,
    cfg: Configuration,
) -> Result<Complex64> {
    pair.check_levels(n, m)?;
    let s = zeta.parity()?.sign() as f64;
    let (a, b) = cfg.levels(n, m);
    let (ga, gb) = match cfg {
        Configuration::C => gammas,
        Configuration::D => (gammas.1, gammas.0),
    };
    let (f, g) = (&pair.f, &pair.g);
    let shared = f.entry(a, b) * rotation_factor(ga, gb, phi) * g.entry(b, a) * rotation_factor(gb, ga, phi);
    Ok(f.mean(a) * g.mean(b) + s * shared)
}

/// Covariance with spin-dressed amplitudes, averaged over C and D.
pub fn spin_covariance(
    pair: &ObservablePair,
    n: usize,
    m: usize,
    zeta: PhaseParameter,
    gammas: (SpinLabel, SpinLabel),
    phi: f64,
) -> Result<f64> {
    let c = spin_config_average(pair, n, m, zeta, gammas, phi, Configuration::C)?;
    let d = spin_config_average(pair, n, m, zeta, gammas, phi, Configuration::D)?;
    let fbar = 0.5 * (pair.f.mean(n) + pair.f.mean(m));
    let gbar = 0.5 * (pair.g.mean(n) + pair.g.mean(m));
    let cov = 0.5 * (c + d) - fbar * gbar;
    if cov.im.abs() > IMAGINARY_TOL * cov.re.abs().max(1.0) {
        return Err(Error::ImaginaryResidual(cov.im.abs()));
    }
    Ok(cov.re)
}

/// `|n γ⟩`: a level together with its internal label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Orbital {
    pub level: usize,
    pub spin: SpinLabel,
}

/// `amplitude · |first⟩₁ |second⟩₂`, before rotation factors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub amplitude: Complex64,
    pub first: Orbital,
    pub second: Orbital,
}

/// Two-particle state with internal labels. Each branch is evaluated at
/// rotation angles `(φ₁, φ₂)` as `amplitude · e^{-iγ₁φ₁} e^{-iγ₂φ₂}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompleteState {
    pub branches: Vec<Branch>,
    /// `(-1)^ζ`.
    pub sign: i32,
    /// Common rotation angle used when the state enters a covariance.
    pub phi: f64,
}

/// `(|n γ_n⟩₁|m γ_m⟩₂ + (-1)^ζ |m γ_m⟩₁|n γ_n⟩₂)/√2`.
///
/// Equal labels with even ζ collapse to the single product `|nγ⟩|nγ⟩`; with
/// odd ζ the state vanishes and is rejected.
pub fn build_complete_state(
    n: usize,
    gamma_n: SpinLabel,
    m: usize,
    gamma_m: SpinLabel,
    zeta: PhaseParameter,
) -> Result<CompleteState> {
    let sign = zeta.parity()?.sign();
    let a = Orbital { level: n, spin: gamma_n };
    let b = Orbital { level: m, spin: gamma_m };
    let branches = if a == b {
        if sign < 0 {
            return Err(Error::VanishingState(format!(
                "antisymmetric combination of |{n}, {gamma_n}⟩ with itself"
            )));
        }
        vec![Branch {
            amplitude: Complex64::new(1.0, 0.0),
            first: a,
            second: a,
        }]
    } else {
        vec![
            Branch {
                amplitude: Complex64::new(FRAC_1_SQRT_2, 0.0),
                first: a,
                second: b,
            },
            Branch {
                amplitude: Complex64::new(sign as f64 * FRAC_1_SQRT_2, 0.0),
                first: b,
                second: a,
            },
        ]
    };
    Ok(CompleteState { branches, sign, phi: 0.0 })
}

/// Angles at which exchange is compared with the original state.
const PROBE_ANGLES: [(f64, f64); 4] = [(0.0, 0.0), (0.3, 1.1), (2.0, 0.4), (5.5, 3.3)];

/// Which particle is carried once around by the exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeDirection {
    /// `φ₁ → φ₂`, `φ₂ → φ₁ + 2π`.
    Forward,
    /// `φ₂ → φ₁`, `φ₁ → φ₂ + 2π`.
    Backward,
}

impl CompleteState {
    pub fn with_rotation(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    /// Distinct internal labels, ascending.
    pub fn spins(&self) -> Vec<SpinLabel> {
        let mut s: Vec<_> = self
            .branches
            .iter()
            .flat_map(|b| [b.first.spin, b.second.spin])
            .collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    fn max_level(&self) -> usize {
        self.branches
            .iter()
            .map(|b| b.first.level.max(b.second.level))
            .max()
            .unwrap_or(0)
    }

    fn local_index(&self, o: Orbital, spins: &[SpinLabel]) -> usize {
        let si = spins.binary_search(&o.spin).expect("spin listed");
        o.level * spins.len() + si
    }

    /// Amplitudes in the basis `|l, γ⟩₁|l', γ'⟩₂` of `dim` levels, index
    /// `(l·s + i)·(dim·s) + (l'·s + i')` with `s` the number of labels.
    fn vector_with<F>(&self, dim: usize, amp: F) -> Result<DVector<Complex64>>
    where
        F: Fn(&Branch) -> (Orbital, Orbital, Complex64),
    {
        if self.max_level() >= dim {
            return Err(Error::IndexOutOfRange {
                index: self.max_level(),
                dim,
            });
        }
        let spins = self.spins();
        let local = dim * spins.len();
        let mut v = DVector::zeros(local * local);
        for b in &self.branches {
            let (first, second, a) = amp(b);
            v[self.local_index(first, &spins) * local + self.local_index(second, &spins)] += a;
        }
        Ok(v)
    }

    /// State at rotation angles `(φ₁, φ₂)`.
    pub fn vector_at(&self, dim: usize, phi1: f64, phi2: f64) -> Result<DVector<Complex64>> {
        self.vector_with(dim, |b| {
            (b.first, b.second, b.amplitude * spin_phase(b.first.spin, phi1) * spin_phase(b.second.spin, phi2))
        })
    }

    /// Exchanged state at `(φ₁, φ₂)`: the particles swap slots and angles, the
    /// one carried around gaining `2π`.
    fn exchanged_at(&self, dim: usize, phi1: f64, phi2: f64, dir: ExchangeDirection) -> Result<DVector<Complex64>> {
        self.vector_with(dim, |b| {
            // the former particle 1 now sits in slot 2 and vice versa
            let (angle_old1, angle_old2) = match dir {
                ExchangeDirection::Forward => (phi2, phi1 + TAU),
                ExchangeDirection::Backward => (phi2 + TAU, phi1),
            };
            let a = b.amplitude * spin_phase(b.first.spin, angle_old1) * spin_phase(b.second.spin, angle_old2);
            (b.second, b.first, a)
        })
    }
}

fn spin_phase(g: SpinLabel, phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, -g.value() * phi)
}

/// Exchange of the labels alone (levels and internal labels), no rotation.
pub fn swap_parity(state: &CompleteState) -> SwapParity {
    let dim = state.max_level() + 1;
    let (Ok(v), Ok(w)) = (
        state.vector_with(dim, |b| (b.first, b.second, b.amplitude)),
        state.vector_with(dim, |b| (b.second, b.first, b.amplitude)),
    ) else {
        return SwapParity::NotEigenstate;
    };
    classify_exchange(&v, &w)
}

/// Full exchange including the `2π` rotation of one particle, compared with
/// the original state at several angle pairs. Must agree with
/// [`exchange_factor`] for physical states.
pub fn exchange_parity(state: &CompleteState, dir: ExchangeDirection) -> SwapParity {
    let dim = state.max_level() + 1;
    let mut verdict = None;
    for (p1, p2) in PROBE_ANGLES {
        let (Ok(v), Ok(w)) = (state.vector_at(dim, p1, p2), state.exchanged_at(dim, p1, p2, dir)) else {
            return SwapParity::NotEigenstate;
        };
        let here = classify_exchange(&v, &w);
        if here == SwapParity::NotEigenstate || verdict.is_some_and(|v| v != here) {
            return SwapParity::NotEigenstate;
        }
        verdict = Some(here);
    }
    verdict.unwrap_or(SwapParity::NotEigenstate)
}

/// `(-1)^ζ (-1)^{2γ}`, the factor a complete state picks up under exchange.
pub fn exchange_factor(zeta: PhaseParameter, gamma: SpinLabel) -> Result<i32> {
    let z = zeta.as_integer()?;
    Ok(Parity::of(z + gamma.gamma_half_units).sign())
}

/// Parity ζ must have for exchange to leave the complete state unchanged.
pub fn required_zeta_parity(gamma: SpinLabel) -> Parity {
    gamma.doubled_parity()
}

/// Quantum covariance of the spin-dressed observables `f ⊗ R(φ)`, `g ⊗ R(φ)`
/// in a complete state, with `R_{γγ'} = e^{i(γ - γ')φ}` and `φ = state.phi`.
pub fn complete_state_covariance(pair: &ObservablePair, state: &CompleteState) -> Result<f64> {
    let d = pair.dim();
    let spins = state.spins();
    let r = CMatrix::from_fn(spins.len(), spins.len(), |i, j| rotation_factor(spins[i], spins[j], state.phi));
    let f = pair.f.as_matrix().kronecker(&r);
    let g = pair.g.as_matrix().kronecker(&r);
    let v = state.vector_at(d, state.phi, state.phi)?;
    state_covariance(&f, &g, &v)
}

/// One entry of the exclusion certificate: a third label tested against an
/// admissible pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThirdSpinCheck {
    pub pair: (SpinLabel, SpinLabel),
    pub gamma3: SpinLabel,
    /// Members of `pair` that `gamma3` is not one unit away from.
    pub conflicts: Vec<SpinLabel>,
    /// The member of `pair` that `gamma3` differs from by an even integer.
    /// The pair members are one unit apart, so exactly one qualifies.
    pub even_partner: SpinLabel,
}

/// Every admissible pair with the reason each candidate third label fails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PauliCertificate {
    pub upsilon: PhaseParameter,
    pub k: usize,
    pub checks: Vec<ThirdSpinCheck>,
}

impl PauliCertificate {
    /// Re-checks every entry: each candidate has at least one conflict, every
    /// listed conflict really is not one unit away, and the even partner
    /// belongs to the pair and differs by an even integer.
    pub fn verify(&self) -> bool {
        self.checks.iter().all(|c| {
            let (a, b) = c.pair;
            !c.conflicts.is_empty()
                && c.conflicts.iter().all(|&p| !unit_apart(p, c.gamma3))
                && (c.even_partner == a || c.even_partner == b)
                && (c.even_partner.gamma_half_units - c.gamma3.gamma_half_units).rem_euclid(4) == 0
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PauliOutcome {
    /// Integer Υ: the condition concerns half-integer labels only.
    NotApplicable,
    Feasible { witnesses: Vec<Vec<SpinLabel>> },
    Infeasible { certificate: PauliCertificate },
}

fn unit_apart(a: SpinLabel, b: SpinLabel) -> bool {
    (a.gamma_half_units - b.gamma_half_units).abs() == 2
}

fn collect_subsets(domain: &[SpinLabel], k: usize, from: usize, cur: &mut Vec<SpinLabel>, out: &mut Vec<Vec<SpinLabel>>) {
    if cur.len() == k {
        out.push(cur.clone());
        return;
    }
    for i in from..domain.len() {
        if cur.iter().all(|c| unit_apart(*c, domain[i])) {
            cur.push(domain[i]);
            collect_subsets(domain, k, i + 1, cur, out);
            cur.pop();
        }
    }
}

/// All labels `-Υ, -Υ+1, …, Υ`.
pub fn spin_range(upsilon: PhaseParameter) -> Vec<SpinLabel> {
    let u = upsilon.half_units;
    (-u..=u).step_by(2).map(SpinLabel::from_half_units).collect()
}

/// Searches all `k`-subsets of `{-Υ, …, Υ}` for labels pairwise one unit
/// apart. Returns every witness, or a certificate that records, for each
/// admissible pair and each third label, which pair member it clashes with.
pub fn pauli_feasibility(upsilon: PhaseParameter, k: usize) -> Result<PauliOutcome> {
    if upsilon.half_units < 0 {
        return Err(Error::NegativeUpsilon(upsilon.to_string()));
    }
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    if upsilon.is_integer() {
        return Ok(PauliOutcome::NotApplicable);
    }
    let domain = spin_range(upsilon);
    let mut witnesses = Vec::new();
    collect_subsets(&domain, k, 0, &mut Vec::new(), &mut witnesses);
    if !witnesses.is_empty() {
        return Ok(PauliOutcome::Feasible { witnesses });
    }
    let mut pairs = Vec::new();
    collect_subsets(&domain, 2, 0, &mut Vec::new(), &mut pairs);
    let checks = pairs
        .iter()
        .flat_map(|p| {
            let (g1, g2) = (p[0], p[1]);
            domain.iter().map(move |&g3| ThirdSpinCheck {
                pair: (g1, g2),
                gamma3: g3,
                conflicts: [g1, g2].into_iter().filter(|&x| !unit_apart(x, g3)).collect(),
                even_partner: if (g1.gamma_half_units - g3.gamma_half_units).rem_euclid(4) == 0 {
                    g1
                } else {
                    g2
                },
            })
        })
        .collect();
    Ok(PauliOutcome::Infeasible {
        certificate: PauliCertificate { upsilon, k, checks },
    })
}
