//! Level systems, response matrices and the single-particle identities that
//! tie them together: the TRK sum, the canonical commutator and the
//! Heisenberg equation of motion.
//!
//! Frequency convention: `ω_{kn} = (E_k - E_n)/ħ` is the frequency carried by
//! the response amplitude `x_{nk}` in `x_{nk} e^{-iω_{kn} t}`. It is the only
//! orientation under which that time dependence coincides with
//! `<n(t)|x|k(t)>` for `|n(t)> = e^{-iE_n t/ħ}|n>`.

mod signal;

pub use signal::{
    analytic_bracket_xp, evaluate_response, evaluate_response_vars, poisson_bracket_numeric,
    positive_frequency_part, BracketOptions, ParticleLabel, ParticleResponse,
};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

const HERMITIAN_TOL: f64 = 1e-12;

/// Energies of the stationary states plus the mechanical constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "LevelSystemJson", into = "LevelSystemJson")]
pub struct LevelSystem {
    energies: Vec<f64>,
    mass: f64,
    hbar: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LevelSystemJson {
    energies: Vec<f64>,
    mass: f64,
    hbar: f64,
}

impl TryFrom<LevelSystemJson> for LevelSystem {
    type Error = Error;
    fn try_from(j: LevelSystemJson) -> Result<Self> {
        LevelSystem::new(j.energies, j.mass, j.hbar)
    }
}

impl From<LevelSystem> for LevelSystemJson {
    fn from(s: LevelSystem) -> Self {
        LevelSystemJson {
            energies: s.energies,
            mass: s.mass,
            hbar: s.hbar,
        }
    }
}

impl LevelSystem {
    pub fn new(energies: Vec<f64>, mass: f64, hbar: f64) -> Result<Self> {
        if energies.len() < 2 {
            return Err(Error::DimensionTooSmall {
                min: 2,
                found: energies.len(),
            });
        }
        if energies.iter().any(|e| !e.is_finite()) {
            return Err(Error::InvalidSystem("non-finite energy".into()));
        }
        if energies.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidSystem("energies must be strictly increasing".into()));
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidSystem(format!("mass must be positive, got {mass}")));
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(Error::InvalidSystem(format!("hbar must be positive, got {hbar}")));
        }
        Ok(LevelSystem {
            energies,
            mass,
            hbar,
        })
    }

    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `ω_{kn} = (E_k - E_n)/ħ`; antisymmetric in its indices.
    pub fn omega(&self, k: usize, n: usize) -> f64 {
        (self.energies[k] - self.energies[n]) / self.hbar
    }

    pub(crate) fn check_index(&self, n: usize) -> Result<()> {
        if n < self.dim() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: n,
                dim: self.dim(),
            })
        }
    }
}

/// Hermitian matrix of response amplitudes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ResponseMatrixJson", into = "ResponseMatrixJson")]
pub struct ResponseMatrix(CMatrix);

/// Wire form: `{"dim": d, "entries": [[re, im], ...]}`, row-major.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ResponseMatrixJson {
    dim: usize,
    entries: Vec<[f64; 2]>,
}

impl TryFrom<ResponseMatrixJson> for ResponseMatrix {
    type Error = Error;
    fn try_from(j: ResponseMatrixJson) -> Result<Self> {
        if j.entries.len() != j.dim * j.dim {
            return Err(Error::DimensionMismatch {
                expected: j.dim * j.dim,
                found: j.entries.len(),
            });
        }
        let m = CMatrix::from_row_iterator(
            j.dim,
            j.dim,
            j.entries.iter().map(|[re, im]| Complex64::new(*re, *im)),
        );
        ResponseMatrix::new(m)
    }
}

impl From<ResponseMatrix> for ResponseMatrixJson {
    fn from(m: ResponseMatrix) -> Self {
        let d = m.dim();
        let mut entries = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let z = m.0[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        ResponseMatrixJson { dim: d, entries }
    }
}

fn hermitian_deviation(m: &CMatrix) -> f64 {
    let d = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..d {
        for j in i..d {
            dev = dev.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    dev
}

impl ResponseMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        if m.nrows() < 2 {
            return Err(Error::DimensionTooSmall {
                min: 2,
                found: m.nrows(),
            });
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let dev = hermitian_deviation(&m);
        if !dev.is_finite() || dev > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian(dev));
        }
        Ok(ResponseMatrix(m))
    }

    /// Real symmetric matrix from row-major entries.
    pub fn from_real_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: rows.len(),
            });
        }
        Self::new(CMatrix::from_row_iterator(
            dim,
            dim,
            rows.iter().map(|&x| Complex64::new(x, 0.0)),
        ))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("matrix serialises")
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn entry(&self, n: usize, k: usize) -> Complex64 {
        self.0[(n, k)]
    }

    /// Real part of a diagonal element, the mean value in that state.
    pub fn mean(&self, n: usize) -> f64 {
        self.0[(n, n)].re
    }

    pub fn as_matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn is_diagonal(&self) -> bool {
        let d = self.dim();
        (0..d).all(|i| (0..d).all(|j| i == j || self.0[(i, j)] == Complex64::new(0.0, 0.0)))
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() == dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: dim,
                found: self.dim(),
            })
        }
    }
}

/// Truncated harmonic oscillator: `E_n = ħω0(n + 1/2)` and the ladder
/// position matrix `x_{n,n+1} = sqrt((n+1)ħ/(2mω0))`.
pub fn harmonic_oscillator(
    dim: usize,
    mass: f64,
    omega0: f64,
    hbar: f64,
) -> Result<(LevelSystem, ResponseMatrix)> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall { min: 2, found: dim });
    }
    if !(omega0 > 0.0 && omega0.is_finite()) {
        return Err(Error::InvalidSystem(format!("omega0 must be positive, got {omega0}")));
    }
    let energies = (0..dim).map(|n| hbar * omega0 * (n as f64 + 0.5)).collect();
    let system = LevelSystem::new(energies, mass, hbar)?;
    let mut x = CMatrix::zeros(dim, dim);
    for n in 0..dim - 1 {
        let amp = ((n + 1) as f64 * hbar / (2.0 * mass * omega0)).sqrt();
        x[(n, n + 1)] = Complex64::new(amp, 0.0);
        x[(n + 1, n)] = Complex64::new(amp, 0.0);
    }
    Ok((system, ResponseMatrix(x)))
}

/// Random Hermitian matrix with entries uniform in the unit square. The
/// diagonal is zero unless `with_diagonal` is set.
pub fn random_hermitian<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R, with_diagonal: bool) -> ResponseMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        if with_diagonal {
            m[(i, i)] = Complex64::new(rng.random_range(-1.0..1.0), 0.0);
        }
        for j in i + 1..dim {
            let z = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    ResponseMatrix(m)
}

/// `p_{nk} = -i m ω_{kn} x_{nk}`, the response of `p = m dx/dt`.
pub fn momentum_matrix(x: &ResponseMatrix, sys: &LevelSystem) -> Result<ResponseMatrix> {
    x.check_dim(sys.dim())?;
    let d = x.dim();
    let m = sys.mass();
    let p = CMatrix::from_fn(d, d, |n, k| {
        Complex64::new(0.0, -m * sys.omega(k, n)) * x.entry(n, k)
    });
    ResponseMatrix::new(p)
}

/// `ab - ba`.
pub fn commutator(a: &ResponseMatrix, b: &ResponseMatrix) -> Result<CMatrix> {
    a.check_dim(b.dim())?;
    Ok(a.as_matrix() * b.as_matrix() - b.as_matrix() * a.as_matrix())
}

/// `2m Σ_{k≠n} ω_{kn} |x_{nk}|^2`, which equals ħ wherever the sum rule holds.
pub fn trk_sum(x: &ResponseMatrix, sys: &LevelSystem, n: usize) -> Result<f64> {
    x.check_dim(sys.dim())?;
    sys.check_index(n)?;
    let s: f64 = (0..x.dim())
        .filter(|&k| k != n)
        .map(|k| sys.omega(k, n) * x.entry(n, k).norm_sqr())
        .sum();
    Ok(2.0 * sys.mass() * s)
}

/// Result of checking `[x, H]/iħ = p/m` on the strict interior of the ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HeisenbergCheck {
    /// Max entrywise modulus of `[x,H]/iħ - p/m` over the interior block.
    pub residual: f64,
    /// Number of interior levels (those with a neighbour on both sides).
    pub interior_levels: usize,
    /// Set when the interior is empty and the residual is vacuous.
    pub empty_interior: bool,
}

/// Evaluates the Heisenberg equation for `x` with `H` diagonal in the energy
/// basis, `H_{nn} = E_n`, over levels `1..=d-2`.
pub fn heisenberg_residual(
    x: &ResponseMatrix,
    p: &ResponseMatrix,
    sys: &LevelSystem,
) -> Result<HeisenbergCheck> {
    x.check_dim(sys.dim())?;
    p.check_dim(sys.dim())?;
    let d = sys.dim();
    let h = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        d,
        sys.energies().iter().map(|&e| Complex64::new(e, 0.0)),
    ));
    let xh = x.as_matrix() * &h - &h * x.as_matrix();
    let lhs = xh / Complex64::new(0.0, sys.hbar());
    let rhs = p.as_matrix() / Complex64::new(sys.mass(), 0.0);
    let interior: Vec<usize> = (1..d.saturating_sub(1)).collect();
    let mut residual: f64 = 0.0;
    for &i in &interior {
        for &j in &interior {
            residual = residual.max((lhs[(i, j)] - rhs[(i, j)]).norm());
        }
    }
    Ok(HeisenbergCheck {
        residual,
        interior_levels: interior.len(),
        empty_interior: interior.is_empty(),
    })
}

/// `x̂(t) = Σ x_{nk} e^{-iω_{kn} t} |n><k|`, the Heisenberg-picture operator.
pub fn heisenberg_operator(x: &ResponseMatrix, sys: &LevelSystem, t: f64) -> Result<CMatrix> {
    x.check_dim(sys.dim())?;
    let d = x.dim();
    Ok(CMatrix::from_fn(d, d, |n, k| {
        x.entry(n, k) * Complex64::from_polar(1.0, -sys.omega(k, n) * t)
    }))
}

/// `<n(t)| x̂ |k(t)>` with `|n(t)> = e^{-iE_n t/ħ}|n>`, computed from explicit
/// time-evolved basis vectors.
pub fn schrodinger_element(
    x: &ResponseMatrix,
    sys: &LevelSystem,
    n: usize,
    k: usize,
    t: f64,
) -> Result<Complex64> {
    x.check_dim(sys.dim())?;
    sys.check_index(n)?;
    sys.check_index(k)?;
    let d = x.dim();
    let evolve = |level: usize| {
        let mut v = nalgebra::DVector::<Complex64>::zeros(d);
        v[level] = Complex64::from_polar(1.0, -sys.energy(level) * t / sys.hbar());
        v
    };
    let bra = evolve(n);
    let ket = evolve(k);
    Ok(bra.dotc(&(x.as_matrix() * ket)))
}
