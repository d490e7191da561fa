//! Acceptance battery. Each criterion is checked against an oracle written
//! here from closed forms or brute force, not against the library's own
//! reference functions. Prints one PASS/FAIL line per criterion.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use zpflab::bipartite::{
    bracket_xp_same, bracket_xx_distinct, phase_assignment, momentum_response, BipartitePair, Family, FamilyTag,
    PhaseAssignment,
};
use zpflab::covariance::{analytic_covariance, build_entangled_state, mc_covariance, quantum_covariance, ObservablePair};
use zpflab::field::{pairing_table, sample_realization, ModeKey};
use zpflab::phase::{Parity, PhaseParameter, SpinLabel};
use zpflab::response::{
    commutator, harmonic_oscillator, momentum_matrix, poisson_bracket_numeric, trk_sum, BracketOptions, CMatrix,
    LevelSystem, ParticleLabel, ParticleResponse, ResponseMatrix,
};
use zpflab::spin::{
    build_complete_state, exchange_factor, exchange_parity, pauli_feasibility, required_zeta_parity, spin_covariance,
    ExchangeDirection, PauliOutcome,
};

type Outcome = Result<String, String>;

/// Criterion id, body and runtime limit.
type Criterion = (u32, fn() -> Outcome, Option<Duration>);

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: zpflab::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// `x_{n,n+1} = sqrt((n+1) ħ / (2 m ω))`, the textbook ladder-operator result.
fn oscillator_x(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            ((i + 1) as f64 / 2.0).sqrt()
        } else if i == j + 1 {
            ((j + 1) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    })
}

/// `p = i sqrt(m ħ ω / 2) (a† - a)` with ħ = m = ω = 1.
fn oscillator_p(d: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(d, d, |i, j| {
        if j == i + 1 {
            c(0.0, -((i + 1) as f64 / 2.0).sqrt())
        } else if i == j + 1 {
            c(0.0, ((j + 1) as f64 / 2.0).sqrt())
        } else {
            c(0.0, 0.0)
        }
    })
}

fn hermitian(d: usize, rng: &mut ChaCha8Rng) -> ResponseMatrix {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, i)] = c(rng.random_range(-1.0..1.0), 0.0);
        for j in i + 1..d {
            let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    ResponseMatrix::new(m).expect("hermitian by construction")
}

fn distinct_levels(d: usize, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let n = rng.random_range(0..d);
    let mut m = rng.random_range(0..d - 1);
    if m >= n {
        m += 1;
    }
    (n, m)
}

fn basis(d: usize, i: usize) -> DVector<Complex64> {
    let mut v = DVector::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

/// `<F⊗G> - <F⊗1><1⊗G>` in `(|n>|m> + (-1)^ζ |m>|n>)/√2`, built from
/// explicit tensor products.
fn explicit_covariance(f: &CMatrix, g: &CMatrix, n: usize, m: usize, zeta_odd: bool) -> f64 {
    let d = f.nrows();
    let s = if zeta_odd { -1.0 } else { 1.0 };
    let psi = (basis(d, n).kronecker(&basis(d, m)) + basis(d, m).kronecker(&basis(d, n)) * c(s, 0.0))
        * c(0.5f64.sqrt(), 0.0);
    let id = CMatrix::identity(d, d);
    let expect = |op: &CMatrix| psi.dotc(&(op * &psi));
    let v = expect(&f.kronecker(g)) - expect(&f.kronecker(&id)) * expect(&id.kronecker(g));
    v.re
}

fn trk_criterion() -> Outcome {
    let (sys, x) = lib(harmonic_oscillator(10, 1.0, 1.0, 1.0))?;
    let want = oscillator_x(10);
    for i in 0..10 {
        for j in 0..10 {
            ensure((x.entry(i, j) - c(want[(i, j)], 0.0)).norm() <= 1e-15, || format!("x[{i},{j}] differs from closed form"))?;
        }
    }
    let mut worst: f64 = 0.0;
    for n in 0..=8 {
        worst = worst.max((lib(trk_sum(&x, &sys, n))? - 1.0).abs());
    }
    ensure(worst <= 1e-12, || format!("max |trk - 1| = {worst:e}"))?;
    // truncation leaves only the downward term: 2·(-1)·|x_{9,8}|² = -9
    let top = lib(trk_sum(&x, &sys, 9))?;
    ensure((top + 9.0).abs() <= 1e-12, || format!("trk(9) = {top}, closed form -9"))?;
    Ok(format!("max |trk-1| {worst:.1e}, level 9 flagged at {top}"))
}

fn commutator_criterion() -> Outcome {
    let (sys, x) = lib(harmonic_oscillator(12, 1.0, 1.0, 1.0))?;
    let p = lib(momentum_matrix(&x, &sys))?;
    let want_p = oscillator_p(12);
    let p_err = (p.as_matrix() - &want_p).camax();
    ensure(p_err <= 1e-12, || format!("momentum differs from ladder form by {p_err:e}"))?;
    let cm = lib(commutator(&x, &p))?;
    let mut worst: f64 = 0.0;
    for i in 0..=10 {
        for j in 0..=10 {
            let want = if i == j { c(0.0, 1.0) } else { c(0.0, 0.0) };
            worst = worst.max((cm[(i, j)] - want).norm());
        }
    }
    ensure(worst <= 1e-12, || format!("max entry deviation {worst:e}"))?;
    Ok(format!("max deviation on 0..10 block {worst:.1e}"))
}

/// `2im Σ_k ω_{kn} |x_{nk}|²` with `ω_{kn} = (E_k - E_n)/ħ`.
fn bracket_closed_form(x: &ResponseMatrix, sys: &LevelSystem, n: usize) -> Complex64 {
    let s: f64 = (0..sys.dim())
        .map(|k| (sys.energy(k) - sys.energy(n)) / sys.hbar() * x.entry(n, k).norm_sqr())
        .sum();
    c(0.0, 2.0 * sys.mass() * s)
}

fn numeric_bracket_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (osc, osc_x) = lib(harmonic_oscillator(10, 1.0, 1.0, 1.0))?;
    let energies = vec![0.0, 0.7, 1.9, 2.4, 3.8];
    let random_sys = lib(LevelSystem::new(energies, 1.3, 0.8))?;
    let random_x = hermitian(5, &mut rng);
    let cases = [(osc, osc_x, 0..=8usize), (random_sys, random_x, 0..=4usize)];
    let (mut worst_rel, mut worst_off) = (0.0f64, 0.0f64);
    for (sys, x, interior) in cases {
        let d = sys.dim();
        let xr = lib(ParticleResponse::new(sys.clone(), x.clone(), PhaseParameter::ZERO, ParticleLabel::One))?;
        let pr = lib(momentum_response(&xr))?;
        let r = lib(sample_realization(&ModeKey::all(d), 11))?;
        let bo = BracketOptions::default();
        for n in interior {
            let num = lib(poisson_bracket_numeric(&xr, &pr, n, n, &r, bo))?;
            let exact = bracket_closed_form(&x, &sys, n);
            worst_rel = worst_rel.max((num - exact).norm() / exact.norm());
        }
        for n in 0..d {
            for n2 in (0..d).filter(|&k| k != n) {
                worst_off = worst_off.max(lib(poisson_bracket_numeric(&xr, &pr, n, n2, &r, bo))?.norm());
            }
        }
    }
    ensure(worst_rel <= 1e-6, || format!("relative error {worst_rel:e}"))?;
    ensure(worst_off <= 1e-8, || format!("off-diagonal bracket {worst_off:e}"))?;
    Ok(format!("relative error {worst_rel:.1e}, off-diagonal {worst_off:.1e}"))
}

fn bracket_signs_criterion() -> Outcome {
    let d = 9;
    let (sys, x) = lib(harmonic_oscillator(d, 1.0, 1.0, 1.0))?;
    let mut worst: f64 = 0.0;
    for z12 in 0..=5i64 {
        let sign = if z12 % 2 == 0 { 1.0 } else { -1.0 };
        for (h1, h2) in [(2 * z12, 0), (2 * z12 + 1, 1), (2 * z12 - 3, -3)] {
            let p1 = lib(ParticleResponse::new(sys.clone(), x.clone(), PhaseParameter::from_half_units(h1), ParticleLabel::One))?;
            let p2 = lib(ParticleResponse::new(sys.clone(), x.clone(), PhaseParameter::from_half_units(h2), ParticleLabel::Two))?;
            for n in 0..d {
                for m in (0..d).filter(|&m| m != n) {
                    let v = lib(bracket_xx_distinct(&lib(BipartitePair::new(p1.clone(), p2.clone(), n, m))?))?;
                    ensure(v == c(0.0, 0.0), || format!("[x1,x2] = {v} at zeta12={z12}, n={n}, m={m}"))?;
                }
            }
            for n in 0..d - 1 {
                let b = lib(bracket_xp_same(&lib(BipartitePair::new(p1.clone(), p2.clone(), n, n))?))?;
                worst = worst.max((b.value / c(0.0, 1.0) - c(sign, 0.0)).norm());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max |ratio - (-1)^zeta12| = {worst:e}"))?;
    Ok(format!("[x1,x2] exactly 0; sign deviation {worst:.1e}"))
}

fn covariance_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for i in 0..100 {
        let d = 2 + i % 5;
        let (f, g) = (hermitian(d, &mut rng), hermitian(d, &mut rng));
        let (n, m) = distinct_levels(d, &mut rng);
        let pair = lib(ObservablePair::new(f.clone(), g.clone()))?;
        for odd in [false, true] {
            let z = PhaseParameter::integer(odd as i64);
            let oracle = explicit_covariance(f.as_matrix(), g.as_matrix(), n, m, odd);
            let a = lib(analytic_covariance(&pair, n, m, z))?;
            let q = lib(quantum_covariance(&pair, &lib(build_entangled_state(n, m, z))?))?;
            worst = worst.max((a - oracle).abs()).max((q - oracle).abs());
        }
    }
    ensure(worst <= 1e-12, || format!("analytic/quantum vs explicit vectors {worst:e}"))?;

    let mut within = 0;
    let mut worst_z: f64 = 0.0;
    for run in 0..100u64 {
        let d = 2 + (run % 5) as usize;
        let mut e = 0.0;
        let energies = (0..d)
            .map(|_| {
                e += rng.random_range(0.5..1.5);
                e
            })
            .collect();
        let sys = lib(LevelSystem::new(energies, 1.0, 1.0))?;
        let (f, g) = (hermitian(d, &mut rng), hermitian(d, &mut rng));
        let (n, m) = distinct_levels(d, &mut rng);
        let odd = run % 2 == 1;
        let oracle = explicit_covariance(f.as_matrix(), g.as_matrix(), n, m, odd);
        let pair = lib(ObservablePair::new(f, g))?;
        let r = lib(mc_covariance(&sys, &pair, n, m, PhaseParameter::integer(odd as i64), 200_000, 1000 + run))?;
        let z = (r.estimate - oracle).abs() / r.standard_error.max(1e-12);
        worst_z = worst_z.max(z);
        if z <= 4.0 {
            within += 1;
        }
    }
    ensure(within >= 95, || format!("{within}/100 runs within 4 SE"))?;
    Ok(format!("exact agreement {worst:.1e}; {within}/100 MC runs within 4 SE (max z {worst_z:.2})"))
}

fn pairing_criterion() -> Outcome {
    let table = lib(pairing_table(4, 100_000, 6))?;
    ensure(table.len() == 144, || format!("{} entries, expected 12·12 oriented pairs", table.len()))?;
    let mut worst: f64 = 0.0;
    for e in &table {
        let ((n, k), (m, l)) = (e.first, e.second);
        let want = if n == l && k == m { 1.0 } else { 0.0 };
        ensure(e.expected == want, || format!("table expects {} for {:?}", e.expected, (e.first, e.second)))?;
        let z = (e.estimate.mean - c(want, 0.0)).norm() / e.estimate.standard_error.max(1e-12);
        worst = worst.max(z);
    }
    ensure(worst <= 3.0, || format!("max z-score {worst:.2}"))?;
    Ok(format!("144 mode pairs, max z-score {worst:.2}"))
}

fn swap_sign(psi: &DVector<Complex64>, d: usize) -> Option<i32> {
    let swapped = DVector::from_fn(d * d, |idx, _| psi[(idx % d) * d + idx / d]);
    if (&swapped - psi).camax() < 1e-12 {
        Some(1)
    } else if (&swapped + psi).camax() < 1e-12 {
        Some(-1)
    } else {
        None
    }
}

fn spin_statistics_criterion() -> Outcome {
    for g2 in -7..=7i64 {
        for zeta in 0..=7i64 {
            let want = if zeta.rem_euclid(2) == g2.rem_euclid(2) { 1 } else { -1 };
            let gamma = SpinLabel::from_half_units(g2);
            let got = lib(exchange_factor(PhaseParameter::integer(zeta), gamma))?;
            ensure(got == want, || format!("exchange_factor(zeta={zeta}, 2gamma={g2}) = {got}"))?;
            let state = lib(build_complete_state(0, gamma, 2, gamma, PhaseParameter::integer(zeta)))?;
            for dir in [ExchangeDirection::Forward, ExchangeDirection::Backward] {
                let p = exchange_parity(&state, dir).sign();
                ensure(p == Some(want), || format!("explicit {dir:?} exchange gives {p:?} at zeta={zeta}, 2gamma={g2}"))?;
            }
        }
    }
    let parity = required_zeta_parity(SpinLabel::from_half_units(1));
    ensure(parity == Parity::Odd, || format!("required parity for 1/2 is {parity:?}"))?;
    let psi = lib(lib(build_entangled_state(0, 1, PhaseParameter::integer(1)))?.vector(2))?;
    let s = swap_sign(&psi, 2);
    ensure(s == Some(-1), || format!("energy state swap sign {s:?}"))?;
    Ok("120 (zeta, gamma) cases, both exchange directions; gamma=1/2 needs odd zeta; swap sign -1".into())
}

/// Every unordered `k`-subset of `{-Υ..Υ}` (as doubled labels) whose
/// members are pairwise one unit apart.
fn brute_unit_sets(upsilon_half: i64, k: usize) -> BTreeSet<Vec<i64>> {
    let range: Vec<i64> = (-upsilon_half..=upsilon_half).step_by(2).collect();
    let mut out = BTreeSet::new();
    for mask in 0u32..(1 << range.len()) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let set: Vec<i64> = (0..range.len()).filter(|i| mask & (1 << i) != 0).map(|i| range[i]).collect();
        if set.iter().all(|a| set.iter().all(|b| a == b || (a - b).abs() == 2)) {
            out.insert(set);
        }
    }
    out
}

fn pauli_criterion() -> Outcome {
    for h in [1, 3, 5, 7] {
        let u = PhaseParameter::from_half_units(h);
        let pairs = brute_unit_sets(h, 2);
        match lib(pauli_feasibility(u, 2))? {
            PauliOutcome::Feasible { witnesses } => {
                let got: BTreeSet<Vec<i64>> = witnesses
                    .iter()
                    .map(|w| {
                        let mut v: Vec<i64> = w.iter().map(|g| g.gamma_half_units).collect();
                        v.sort();
                        v
                    })
                    .collect();
                ensure(got == pairs && got.len() == witnesses.len(), || format!("k=2 witnesses differ from brute force at {u}"))?;
            }
            other => return Err(format!("k=2 at {u}: {other:?}")),
        }
        for k in 3..=5 {
            let brute = brute_unit_sets(h, k);
            ensure(brute.is_empty(), || format!("brute force found {brute:?} at {u}, k={k}"))?;
            let PauliOutcome::Infeasible { certificate } = lib(pauli_feasibility(u, k))? else {
                return Err(format!("k={k} at {u} not infeasible"));
            };
            ensure(certificate.verify(), || format!("certificate at {u}, k={k} does not verify"))?;
            // every admissible pair paired with every third label, each refuted
            let covered: BTreeSet<(i64, i64, i64)> = certificate
                .checks
                .iter()
                .filter(|c| {
                    let (a, b) = c.pair;
                    [a, b].iter().any(|p| (p.gamma_half_units - c.gamma3.gamma_half_units).abs() != 2)
                })
                .map(|c| (c.pair.0.gamma_half_units, c.pair.1.gamma_half_units, c.gamma3.gamma_half_units))
                .collect();
            for p in &pairs {
                for g3 in (-h..=h).step_by(2) {
                    ensure(covered.contains(&(p[0], p[1], g3)), || format!("pair {p:?} with {g3}/2 not refuted"))?;
                }
            }
        }
    }
    Ok("upsilon 1/2..7/2: k=2 witnesses match brute force, k=3..5 certified infeasible".into())
}

fn phase_assignment_criterion() -> Outcome {
    let b = lib(phase_assignment(10, lib(FamilyTag::new(Family::B, PhaseParameter::integer(2)))?))?;
    let PhaseAssignment::Feasible { members } = &b else {
        return Err(format!("B family N=10: {b:?}"));
    };
    ensure(members.len() == 10, || format!("{} members", members.len()))?;
    for a in members {
        ensure(a.half_units % 2 == 0 && a.half_units.abs() <= 4, || format!("member {a} outside the B family"))?;
        for b in members {
            ensure((a.half_units - b.half_units).rem_euclid(4) == 0, || format!("{a} and {b} differ by an odd integer"))?;
        }
    }
    let f = lib(phase_assignment(3, lib(FamilyTag::new(Family::F, PhaseParameter::from_half_units(9)))?))?;
    let PhaseAssignment::Infeasible { certificate } = &f else {
        return Err(format!("F family N=3: {f:?}"));
    };
    let halves: Vec<i64> = (-9..=9).step_by(2).collect();
    let mut triples = 0;
    for &a in &halves {
        for &b in &halves {
            for &cc in &halves {
                triples += 1;
                let t = [a, b, cc];
                let odd = |x: i64, y: i64| (x - y).rem_euclid(4) == 2;
                ensure(!(odd(a, b) && odd(a, cc) && odd(b, cc)), || format!("pairwise-odd triple {t:?}"))?;
                let tuple: Vec<PhaseParameter> = t.iter().map(|&h| PhaseParameter::from_half_units(h)).collect();
                match certificate.find_violation(&tuple) {
                    Some((i, j)) if i != j && !odd(t[i], t[j]) => {}
                    other => return Err(format!("certificate gives {other:?} for {t:?}")),
                }
            }
        }
    }
    Ok(format!("B N=10 coherent; F N=3 infeasible, certificate checked on {triples} triples"))
}

fn spin_reduction_criterion() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let d = 2 + i % 5;
        let (f, g) = (hermitian(d, &mut rng), hermitian(d, &mut rng));
        let (n, m) = distinct_levels(d, &mut rng);
        let gammas = (
            SpinLabel::from_half_units(2 * rng.random_range(-3..=3) + 1),
            SpinLabel::from_half_units(2 * rng.random_range(-3..=3) + 1),
        );
        let pair = lib(ObservablePair::new(f.clone(), g.clone()))?;
        for odd in [false, true] {
            let oracle = explicit_covariance(f.as_matrix(), g.as_matrix(), n, m, odd);
            for phi in [0.0, PI / 3.0, PI, 2.0 * PI] {
                let v = lib(spin_covariance(&pair, n, m, PhaseParameter::integer(odd as i64), gammas, phi))?;
                worst = worst.max((v - oracle).abs());
            }
        }
    }
    ensure(worst <= 1e-12, || format!("max deviation {worst:e}"))?;
    Ok(format!("50 pairs x 4 angles x 2 parities, max deviation {worst:.1e}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, trk_criterion, Some(Duration::from_secs(1))),
        (2, commutator_criterion, Some(Duration::from_secs(1))),
        (3, numeric_bracket_criterion, Some(Duration::from_secs(5))),
        (4, bracket_signs_criterion, Some(Duration::from_secs(1))),
        (5, covariance_criterion, Some(Duration::from_secs(60))),
        (6, pairing_criterion, Some(Duration::from_secs(10))),
        (7, spin_statistics_criterion, None),
        (8, pauli_criterion, Some(Duration::from_secs(1))),
        (9, phase_assignment_criterion, None),
        (10, spin_reduction_criterion, None),
    ];
    let mut failed = 0;
    for (id, run, limit) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let elapsed = start.elapsed();
        if let (Ok(_), Some(limit)) = (&outcome, limit) {
            if elapsed > limit {
                outcome = Err(format!("took {elapsed:.2?}, limit {limit:?}"));
            }
        }
        match outcome {
            Ok(detail) => println!("criterion {id}: PASS ({elapsed:.2?}) {detail}"),
            Err(why) => {
                failed += 1;
                println!("criterion {id}: FAIL ({elapsed:.2?}) {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
