//! Background-field modes, random-phase realizations and quadratures.
//!
//! A mode connects two levels and is stored once, in canonical orientation
//! `from < to`. Its normal variable is `a = exp(iφ)`; the reversed orientation
//! is the complex conjugate and is derived on lookup, never stored.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{run_batches, ComplexMean};

/// Canonical (unordered) mode connecting two distinct levels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeKey {
    pub from: usize,
    pub to: usize,
}

impl ModeKey {
    /// Canonical key for the pair `(n, k)` in either orientation.
    pub fn new(n: usize, k: usize) -> Result<Self> {
        Self::oriented(n, k).map(|(key, _)| key)
    }

    /// Canonical key plus a flag telling whether `(n, k)` is the reversed
    /// orientation.
    pub fn oriented(n: usize, k: usize) -> Result<(Self, bool)> {
        match n.cmp(&k) {
            std::cmp::Ordering::Less => Ok((ModeKey { from: n, to: k }, false)),
            std::cmp::Ordering::Greater => Ok((ModeKey { from: k, to: n }, true)),
            std::cmp::Ordering::Equal => Err(Error::DegenerateMode(n)),
        }
    }

    /// Every mode of a `dim`-level ladder.
    pub fn all(dim: usize) -> Vec<ModeKey> {
        let mut out = Vec::new();
        for from in 0..dim {
            for to in from + 1..dim {
                out.push(ModeKey { from, to });
            }
        }
        out
    }

    /// Modes `(level, k)` for every other level `k < dim`, canonicalised.
    pub fn touching(level: usize, dim: usize) -> Vec<ModeKey> {
        (0..dim)
            .filter(|&k| k != level)
            .map(|k| ModeKey::new(level, k).expect("k != level"))
            .collect()
    }

    /// Sorted, deduplicated union of the modes touching any of `levels`.
    pub fn touching_any(levels: &[usize], dim: usize) -> Vec<ModeKey> {
        let mut out: Vec<_> = levels
            .iter()
            .flat_map(|&l| ModeKey::touching(l, dim))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

/// Deterministic random stream for sample `counter` under `seed`.
///
/// ChaCha supports 2^64 independent streams per key, so sample `j` always sees
/// the same numbers no matter which worker draws it or in what order.
pub fn sample_stream(seed: u64, counter: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(counter);
    rng
}

/// Derives an unrelated seed for a second, statistically independent family of
/// streams (splitmix64 finaliser).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform angle on `[0, 2π)`.
pub fn uniform_phase<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let phi = rng.random::<f64>() * TAU;
    // u * 2π can round up to 2π for u just below 1
    if phi >= TAU {
        0.0
    } else {
        phi
    }
}

/// One draw of random phases, one per canonical mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldRealization {
    modes: Vec<ModeKey>,
    phases: Vec<f64>,
    pub seed: u64,
    pub counter: u64,
}

impl FieldRealization {
    /// Builds a realization from explicit phases (wrapped into `[0, 2π)`).
    pub fn from_phases<I>(phases: I, seed: u64) -> Result<Self>
    where
        I: IntoIterator<Item = (ModeKey, f64)>,
    {
        let mut pairs: Vec<(ModeKey, f64)> = phases.into_iter().collect();
        if pairs.is_empty() {
            return Err(Error::EmptyModeSet);
        }
        for (k, _) in &pairs {
            if k.from >= k.to {
                return Err(Error::Domain(format!(
                    "mode ({},{}) is not in canonical orientation",
                    k.from, k.to
                )));
            }
        }
        pairs.sort_by_key(|p| p.0);
        pairs.dedup_by(|a, b| a.0 == b.0);
        let (modes, phases) = pairs
            .into_iter()
            .map(|(k, p)| (k, p.rem_euclid(TAU)))
            .unzip();
        Ok(FieldRealization {
            modes,
            phases,
            seed,
            counter: 0,
        })
    }

    pub fn modes(&self) -> &[ModeKey] {
        &self.modes
    }

    pub fn phase(&self, key: ModeKey) -> Option<f64> {
        self.modes
            .binary_search(&key)
            .ok()
            .map(|i| self.phases[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeKey, f64)> + '_ {
        self.modes.iter().copied().zip(self.phases.iter().copied())
    }

    pub fn contains(&self, n: usize, k: usize) -> bool {
        ModeKey::new(n, k)
            .map(|key| self.modes.binary_search(&key).is_ok())
            .unwrap_or(false)
    }

    /// Normal variables `a = exp(iφ)` for every stored mode.
    pub fn normal_variables(&self) -> ModeVariables {
        ModeVariables {
            modes: self.modes.clone(),
            values: self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect(),
        }
    }
}

/// Draws a realization for sample `counter` of the stream keyed by `seed`.
pub fn sample_realization_at(modes: &[ModeKey], seed: u64, counter: u64) -> Result<FieldRealization> {
    let mut modes = modes.to_vec();
    if modes.is_empty() {
        return Err(Error::EmptyModeSet);
    }
    for m in &mut modes {
        *m = ModeKey::new(m.from, m.to)?;
    }
    modes.sort_unstable();
    modes.dedup();
    let mut rng = sample_stream(seed, counter);
    let phases = modes.iter().map(|_| uniform_phase(&mut rng)).collect();
    Ok(FieldRealization {
        modes,
        phases,
        seed,
        counter,
    })
}

/// Draws a realization; a deterministic function of `(modes, seed)`.
pub fn sample_realization(modes: &[ModeKey], seed: u64) -> Result<FieldRealization> {
    sample_realization_at(modes, seed, 0)
}

/// `a_{nk}`: the stored variable for canonical orientation, its conjugate
/// otherwise.
pub fn normal_variable(r: &FieldRealization, n: usize, k: usize) -> Result<Complex64> {
    let (key, reversed) = ModeKey::oriented(n, k)?;
    let phi = r.phase(key).ok_or(Error::MissingMode { from: n, to: k })?;
    let a = Complex64::from_polar(1.0, phi);
    Ok(if reversed { a.conj() } else { a })
}

/// Complex mode variables, not necessarily of unit modulus. Used where the
/// response has to be evaluated off the unit circle, e.g. for finite
/// differences.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVariables {
    modes: Vec<ModeKey>,
    values: Vec<Complex64>,
}

impl ModeVariables {
    pub fn get(&self, n: usize, k: usize) -> Result<Complex64> {
        let (key, reversed) = ModeKey::oriented(n, k)?;
        let i = self
            .modes
            .binary_search(&key)
            .map_err(|_| Error::MissingMode { from: n, to: k })?;
        let a = self.values[i];
        Ok(if reversed { a.conj() } else { a })
    }

    /// Shifts `a_{nk}` by `delta`; the reversed orientation moves by the
    /// conjugate so `a_{kn} = a*_{nk}` keeps holding.
    pub fn shift(&mut self, n: usize, k: usize, delta: Complex64) -> Result<()> {
        let (key, reversed) = ModeKey::oriented(n, k)?;
        let i = self
            .modes
            .binary_search(&key)
            .map_err(|_| Error::MissingMode { from: n, to: k })?;
        self.values[i] += if reversed { delta.conj() } else { delta };
        Ok(())
    }

    pub fn contains(&self, n: usize, k: usize) -> bool {
        ModeKey::new(n, k)
            .map(|key| self.modes.binary_search(&key).is_ok())
            .unwrap_or(false)
    }
}

/// Canonical field quadratures of one mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadratures {
    pub q: f64,
    pub p: f64,
}

fn check_mode_params(omega: f64, hbar: f64) -> Result<()> {
    if omega == 0.0 || !omega.is_finite() {
        return Err(Error::Domain(format!("mode frequency must be nonzero, got {omega}")));
    }
    if hbar <= 0.0 || !hbar.is_finite() {
        return Err(Error::Domain(format!("hbar must be positive, got {hbar}")));
    }
    Ok(())
}

/// `q = sqrt(ħ/2|ω|)(a + a*)`, `p = -i sqrt(ħ|ω|/2)(a - a*)`.
pub fn quadratures_from_normal(a: Complex64, omega: f64, hbar: f64) -> Result<Quadratures> {
    check_mode_params(omega, hbar)?;
    let w = omega.abs();
    let q = (hbar / (2.0 * w)).sqrt() * (a + a.conj());
    let p = Complex64::new(0.0, -1.0) * (hbar * w / 2.0).sqrt() * (a - a.conj());
    Ok(Quadratures { q: q.re, p: p.re })
}

/// Inverse of [`quadratures_from_normal`].
pub fn normal_from_quadratures(qp: Quadratures, omega: f64, hbar: f64) -> Result<Complex64> {
    check_mode_params(omega, hbar)?;
    let w = omega.abs();
    let re = qp.q / (2.0 * (hbar / (2.0 * w)).sqrt());
    let im = qp.p / (2.0 * (hbar * w / 2.0).sqrt());
    Ok(Complex64::new(re, im))
}

/// Monte Carlo estimate of a mode-variable moment with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub mean: Complex64,
    pub standard_error: f64,
    pub samples: u64,
}

impl MomentEstimate {
    /// Deviation from `expected` in units of the standard error. A zero error
    /// bar (a deterministic product) is compared against `floor` instead.
    pub fn z_score(&self, expected: Complex64, floor: f64) -> f64 {
        let dev = (self.mean - expected).norm();
        dev / self.standard_error.max(floor)
    }
}

const MOMENT_BATCHES: usize = 20;

/// Estimates `E[f(a)]` over `samples` realizations of `modes`, where `f` reads
/// mode variables from the realization.
pub fn estimate_moment<F>(modes: &[ModeKey], samples: usize, seed: u64, f: F) -> Result<MomentEstimate>
where
    F: Fn(&FieldRealization) -> Result<Complex64> + Sync,
{
    // validate once up front so workers cannot fail on the mode set itself
    sample_realization(modes, seed)?;
    let parts: Vec<Result<ComplexMean>> = run_batches(samples, MOMENT_BATCHES, |_, range| {
        let mut acc = ComplexMean::default();
        for j in range {
            let r = sample_realization_at(modes, seed, j as u64)?;
            acc.push(f(&r)?);
        }
        Ok(acc)
    });
    let mut total = ComplexMean::default();
    for p in parts {
        total.merge(&p?);
    }
    Ok(MomentEstimate {
        mean: total.mean(),
        standard_error: total.standard_error(),
        samples: total.count(),
    })
}

/// Monte Carlo estimate of the pairing moment `E[a_{nk} a_{ml}]`.
pub fn pairing_moment(
    modes: &[ModeKey],
    first: (usize, usize),
    second: (usize, usize),
    samples: usize,
    seed: u64,
) -> Result<MomentEstimate> {
    estimate_moment(modes, samples, seed, |r| {
        Ok(normal_variable(r, first.0, first.1)? * normal_variable(r, second.0, second.1)?)
    })
}

/// One entry of the pairing table: `E[a_{first} a_{second}]` against
/// `δ_{nl} δ_{km}` for `first = (n,k)`, `second = (m,l)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairingEntry {
    pub first: (usize, usize),
    pub second: (usize, usize),
    pub estimate: MomentEstimate,
    pub expected: f64,
}

/// Every ordered pair of oriented modes of a `dim`-level ladder, estimated
/// from one shared set of `samples` realizations.
pub fn pairing_table(dim: usize, samples: usize, seed: u64) -> Result<Vec<PairingEntry>> {
    let modes = ModeKey::all(dim);
    if modes.is_empty() {
        return Err(Error::EmptyModeSet);
    }
    let oriented: Vec<(usize, usize)> = (0..dim)
        .flat_map(|n| (0..dim).filter(move |&k| k != n).map(move |k| (n, k)))
        .collect();
    let count = oriented.len();
    let parts: Vec<Result<Vec<ComplexMean>>> = run_batches(samples, MOMENT_BATCHES, |_, range| {
        let mut acc = vec![ComplexMean::default(); count * count];
        for j in range {
            let vars = sample_realization_at(&modes, seed, j as u64)?.normal_variables();
            let a: Vec<Complex64> = oriented
                .iter()
                .map(|&(n, k)| vars.get(n, k))
                .collect::<Result<_>>()?;
            for (i, x) in a.iter().enumerate() {
                for (l, y) in a.iter().enumerate() {
                    acc[i * count + l].push(x * y);
                }
            }
        }
        Ok(acc)
    });
    let mut total = vec![ComplexMean::default(); count * count];
    for p in parts {
        for (t, b) in total.iter_mut().zip(p?) {
            t.merge(&b);
        }
    }
    let mut out = Vec::with_capacity(count * count);
    for (i, &first) in oriented.iter().enumerate() {
        for (l, &second) in oriented.iter().enumerate() {
            let acc = &total[i * count + l];
            let paired = first.0 == second.1 && first.1 == second.0;
            out.push(PairingEntry {
                first,
                second,
                estimate: MomentEstimate {
                    mean: acc.mean(),
                    standard_error: acc.standard_error(),
                    samples: acc.count(),
                },
                expected: if paired { 1.0 } else { 0.0 },
            });
        }
    }
    Ok(out)
}
