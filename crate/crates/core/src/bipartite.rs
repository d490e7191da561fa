//! Two identical particles in one field: relative phase parameters, the B/F
//! families, bipartite Poisson brackets and multiparticle phase assignment.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::phase::{Parity, PhaseParameter};
use crate::response::{momentum_matrix, trk_sum, ParticleLabel, ParticleResponse};

/// `ζ¹² = |ζ¹ - ζ²|`.
pub fn zeta12(z1: PhaseParameter, z2: PhaseParameter) -> PhaseParameter {
    PhaseParameter::from_half_units((z1.half_units - z2.half_units).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    /// Integer member phases; shared modes are answered in phase.
    B,
    /// Half-odd member phases; shared modes are answered in antiphase.
    F,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyTag {
    pub tag: Family,
    /// Largest member |ζ|, written Υ.
    pub upsilon: PhaseParameter,
}

impl FamilyTag {
    pub fn new(tag: Family, upsilon: PhaseParameter) -> Result<Self> {
        if upsilon.half_units < 0 {
            return Err(Error::NegativeUpsilon(upsilon.to_string()));
        }
        let ok = match tag {
            Family::B => upsilon.is_integer(),
            Family::F => upsilon.is_half_odd(),
        };
        if !ok {
            return Err(Error::MixedParity);
        }
        Ok(FamilyTag { tag, upsilon })
    }

    /// Member phase values admitted by the family, ascending.
    pub fn members(&self) -> Vec<PhaseParameter> {
        let u = self.upsilon.half_units;
        (-u..=u)
            .step_by(2)
            .map(PhaseParameter::from_half_units)
            .collect()
    }
}

/// Sorts member phases into a family; Υ is the largest |ζ|.
pub fn classify_family(members: &[PhaseParameter]) -> Result<FamilyTag> {
    let first = members.first().ok_or(Error::EmptyList)?;
    let integer = first.is_integer();
    if members.iter().any(|z| z.is_integer() != integer) {
        return Err(Error::MixedParity);
    }
    let upsilon = members.iter().map(|z| z.abs()).max().expect("non-empty");
    let tag = if integer { Family::B } else { Family::F };
    Ok(FamilyTag { tag, upsilon })
}

/// `g = 2Υ + 1` states for a family member bound Υ.
pub fn degeneracy(upsilon: PhaseParameter) -> Result<u64> {
    if upsilon.half_units < 0 {
        return Err(Error::NegativeUpsilon(upsilon.to_string()));
    }
    Ok(upsilon.half_units as u64 + 1)
}

/// Two identical particles with their occupied levels.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartitePair {
    pub particle1: ParticleResponse,
    pub particle2: ParticleResponse,
    pub level1: usize,
    pub level2: usize,
}

impl BipartitePair {
    pub fn new(
        particle1: ParticleResponse,
        particle2: ParticleResponse,
        level1: usize,
        level2: usize,
    ) -> Result<Self> {
        if particle1.label != ParticleLabel::One || particle2.label != ParticleLabel::Two {
            return Err(Error::Domain("pair needs particles labelled One and Two".into()));
        }
        if particle1.system != particle2.system {
            return Err(Error::Domain("identical particles must share the level system".into()));
        }
        let d = particle1.dim();
        particle2.matrix.check_dim(d)?;
        for i in 0..d {
            for j in 0..d {
                let (a, b) = (particle1.matrix.entry(i, j), particle2.matrix.entry(i, j));
                if (a.norm() - b.norm()).abs() > 1e-12 * a.norm().max(1.0) {
                    return Err(Error::Domain(format!(
                        "identical particles need equal response magnitudes; entry ({i},{j}) differs"
                    )));
                }
            }
        }
        particle1.system.check_index(level1)?;
        particle1.system.check_index(level2)?;
        Ok(BipartitePair {
            particle1,
            particle2,
            level1,
            level2,
        })
    }

    pub fn zeta12(&self) -> PhaseParameter {
        zeta12(self.particle1.zeta, self.particle2.zeta)
    }

    fn distinct_levels(&self) -> Result<(usize, usize)> {
        if self.level1 == self.level2 {
            Err(Error::SameLevel(self.level1))
        } else {
            Ok((self.level1, self.level2))
        }
    }

    fn shared_amplitude_sq(&self) -> f64 {
        self.particle1.matrix.entry(self.level1, self.level2).norm_sqr()
    }
}

/// `[x₁, x₂]_{(nm)} = 2i |x_{nm}|² sin(πζ¹²)`, exactly zero for integer ζ¹².
pub fn bracket_xx_distinct(pair: &BipartitePair) -> Result<Complex64> {
    pair.distinct_levels()?;
    let s = pair.zeta12().sin_pi();
    Ok(Complex64::new(0.0, 2.0 * pair.shared_amplitude_sq() * s))
}

/// `[x₁, p₂]_{(nm)} = (-1)^{ζ¹²} 2im ω_{mn} |x_{nm}|²`.
pub fn bracket_xp_distinct(pair: &BipartitePair) -> Result<Complex64> {
    let (n, m) = pair.distinct_levels()?;
    let sign = pair.zeta12().parity()?.sign() as f64;
    let sys = &pair.particle1.system;
    let value = 2.0 * sys.mass() * sys.omega(m, n) * pair.shared_amplitude_sq();
    Ok(Complex64::new(0.0, sign * value))
}

/// Same-level bracket `[x₁, p₂]_{(nn)}` with the truncation diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SameLevelBracket {
    pub value: Complex64,
    /// `2m Σ ω_{kn}|x_{nk}|²` at the shared level.
    pub trk: f64,
    /// Set when the sum rule fails at this level (a truncation edge), in which
    /// case `value` is not `±iħ`.
    pub boundary: bool,
}

const TRK_TOL: f64 = 1e-9;

/// `[x₁, p₂]_{(nn)} = (-1)^{ζ¹²} 2im Σ_k ω_{kn}|x_{nk}|²`, equal to
/// `(-1)^{ζ¹²} iħ` where the sum rule holds.
pub fn bracket_xp_same(pair: &BipartitePair) -> Result<SameLevelBracket> {
    if pair.level1 != pair.level2 {
        return Err(Error::Domain(format!(
            "same-level bracket needs equal levels, got {} and {}",
            pair.level1, pair.level2
        )));
    }
    let sign = pair.zeta12().parity()?.sign() as f64;
    let sys = &pair.particle1.system;
    let trk = trk_sum(&pair.particle1.matrix, sys, pair.level1)?;
    Ok(SameLevelBracket {
        value: Complex64::new(0.0, sign * trk),
        trk,
        boundary: (trk - sys.hbar()).abs() > TRK_TOL * sys.hbar(),
    })
}

/// `[x₁, x₂]_{(nn)} = 2i Σ_k sin(πζ¹²) |x_{nk}|²`.
pub fn bracket_xx_same(pair: &BipartitePair) -> Result<Complex64> {
    if pair.level1 != pair.level2 {
        return Err(Error::Domain("same-level bracket needs equal levels".into()));
    }
    let n = pair.level1;
    let s = pair.zeta12().sin_pi();
    let sum: f64 = (0..pair.particle1.dim())
        .filter(|&k| k != n)
        .map(|k| pair.particle1.matrix.entry(n, k).norm_sqr())
        .sum();
    Ok(Complex64::new(0.0, 2.0 * s * sum))
}

/// Momentum response of a particle with the same phase parameter and label.
pub fn momentum_response(x: &ParticleResponse) -> Result<ParticleResponse> {
    let p = momentum_matrix(&x.matrix, &x.system)?;
    ParticleResponse::new(x.system.clone(), p, x.zeta, x.label)
}

/// Shows that no phase tuple of more than two F-family members is pairwise
/// odd. Half-odd ζ have `2ζ ≡ 1` or `3 (mod 4)`, two members differ by an odd
/// integer exactly when their classes differ, and three members cannot occupy
/// three distinct classes out of two.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityCertificate {
    pub members: usize,
    /// Residues of `2ζ mod 4` available to half-odd phases.
    pub classes: Vec<i64>,
    pub reason: String,
}

impl ParityCertificate {
    fn new(members: usize) -> Self {
        ParityCertificate {
            members,
            classes: vec![1, 3],
            reason: format!(
                "{members} half-odd phases fall into 2 residue classes of 2ζ mod 4; \
                 two share a class and differ by an even integer"
            ),
        }
    }

    /// For a tuple of half-odd phases, returns indices of two members whose
    /// difference is even, which is what the certificate promises exists.
    pub fn find_violation(&self, tuple: &[PhaseParameter]) -> Option<(usize, usize)> {
        let mut seen: [Option<usize>; 4] = [None; 4];
        for (i, z) in tuple.iter().enumerate() {
            let class = z.half_units.rem_euclid(4) as usize;
            if let Some(j) = seen[class] {
                return Some((j, i));
            }
            seen[class] = Some(i);
        }
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum PhaseAssignment {
    Feasible { members: Vec<PhaseParameter> },
    Infeasible { certificate: ParityCertificate },
}

impl PhaseAssignment {
    pub fn is_feasible(&self) -> bool {
        matches!(self, PhaseAssignment::Feasible { .. })
    }
}

/// True when every pair in `members` has `ζ¹²` of the family's parity
/// (even for B, odd for F).
pub fn coherent(members: &[PhaseParameter], family: Family) -> bool {
    let want = match family {
        Family::B => Parity::Even,
        Family::F => Parity::Odd,
    };
    members.iter().enumerate().all(|(i, a)| {
        members[i + 1..]
            .iter()
            .all(|b| zeta12(*a, *b).parity().map(|p| p == want).unwrap_or(false))
    })
}

fn search_odd(domain: &[PhaseParameter], need: usize, chosen: &mut Vec<PhaseParameter>, from: usize) -> bool {
    if chosen.len() == need {
        return true;
    }
    for i in from..domain.len() {
        let z = domain[i];
        if chosen
            .iter()
            .all(|c| zeta12(*c, z).parity() == Ok(Parity::Odd))
        {
            chosen.push(z);
            if search_odd(domain, need, chosen, i + 1) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Assigns phase parameters to `count` members of one family so that all of
/// them respond coherently to shared modes.
///
/// B members can always share one phase class: the assignment cycles through
/// the even integers in `[-Υ, Υ]`. F members need pairwise odd `ζ¹²`; the
/// admitted values are searched exhaustively and, when no tuple exists, the
/// parity certificate is returned.
pub fn phase_assignment(count: usize, family: FamilyTag) -> Result<PhaseAssignment> {
    if count == 0 {
        return Err(Error::Domain("need at least one particle".into()));
    }
    let domain = family.members();
    match family.tag {
        Family::B => {
            let evens: Vec<_> = domain
                .iter()
                .copied()
                .filter(|z| z.parity() == Ok(Parity::Even))
                .collect();
            let members = (0..count).map(|i| evens[i % evens.len()]).collect();
            Ok(PhaseAssignment::Feasible { members })
        }
        Family::F => {
            let mut chosen = Vec::with_capacity(count);
            if search_odd(&domain, count, &mut chosen, 0) {
                Ok(PhaseAssignment::Feasible { members: chosen })
            } else {
                Ok(PhaseAssignment::Infeasible {
                    certificate: ParityCertificate::new(count),
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::{harmonic_oscillator, ResponseMatrix};

    fn half(h: i64) -> PhaseParameter {
        PhaseParameter::from_half_units(h)
    }

    fn pair(d: usize, z1: PhaseParameter, z2: PhaseParameter, n: usize, m: usize) -> BipartitePair {
        let (sys, x) = harmonic_oscillator(d, 1.0, 1.0, 1.0).unwrap();
        BipartitePair::new(
            ParticleResponse::new(sys.clone(), x.clone(), z1, ParticleLabel::One).unwrap(),
            ParticleResponse::new(sys, x, z2, ParticleLabel::Two).unwrap(),
            n,
            m,
        )
        .unwrap()
    }

    #[test]
    fn zeta12_examples() {
        assert_eq!(zeta12(half(3), half(1)), PhaseParameter::integer(1));
        assert_eq!(zeta12(half(5), half(5)), PhaseParameter::ZERO);
        assert_eq!(zeta12(PhaseParameter::integer(2), PhaseParameter::ZERO), PhaseParameter::integer(2));
    }

    #[test]
    fn classify_examples() {
        let f = classify_family(&[half(-1), half(1)]).unwrap();
        assert_eq!((f.tag, f.upsilon), (Family::F, half(1)));
        let b = classify_family(&[PhaseParameter::ZERO, PhaseParameter::integer(1), PhaseParameter::integer(-1)]).unwrap();
        assert_eq!((b.tag, b.upsilon), (Family::B, PhaseParameter::integer(1)));
        assert_eq!(classify_family(&[half(1), half(2)]), Err(Error::MixedParity));
        assert_eq!(classify_family(&[]), Err(Error::EmptyList));
    }

    #[test]
    fn degeneracy_examples() {
        assert_eq!(degeneracy(half(1)).unwrap(), 2);
        assert_eq!(degeneracy(PhaseParameter::ZERO).unwrap(), 1);
        assert_eq!(degeneracy(half(3)).unwrap(), 4);
        assert!(degeneracy(half(-1)).is_err());
    }

    #[test]
    fn distinct_level_xx_bracket() {
        for z in 0..6 {
            let p = pair(5, PhaseParameter::integer(z), PhaseParameter::ZERO, 1, 2);
            assert_eq!(bracket_xx_distinct(&p).unwrap(), Complex64::new(0.0, 0.0));
        }
        // non-identical phase as a negative control: sin(π/2) = 1
        let p = pair(5, half(1), PhaseParameter::ZERO, 1, 2);
        let x12 = p.particle1.matrix.entry(1, 2).norm_sqr();
        assert_eq!(bracket_xx_distinct(&p).unwrap(), Complex64::new(0.0, 2.0 * x12));
        let p = pair(5, PhaseParameter::ZERO, PhaseParameter::ZERO, 1, 3);
        assert_eq!(bracket_xx_distinct(&p).unwrap(), Complex64::new(0.0, 0.0));
        let p = pair(5, PhaseParameter::ZERO, PhaseParameter::ZERO, 2, 2);
        assert_eq!(bracket_xx_distinct(&p), Err(Error::SameLevel(2)));
    }

    #[test]
    fn distinct_level_xp_bracket_sign() {
        let even = bracket_xp_distinct(&pair(4, PhaseParameter::integer(2), PhaseParameter::ZERO, 0, 1)).unwrap();
        let odd = bracket_xp_distinct(&pair(4, PhaseParameter::integer(1), PhaseParameter::ZERO, 0, 1)).unwrap();
        // 2 m ω_{10} |x_{01}|² = 2 · 1 · 1/2
        assert!((even - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(odd, -even);
        let none = bracket_xp_distinct(&pair(4, PhaseParameter::ZERO, PhaseParameter::ZERO, 0, 2)).unwrap();
        assert_eq!(none, Complex64::new(0.0, 0.0));
        assert!(matches!(
            bracket_xp_distinct(&pair(4, half(1), PhaseParameter::ZERO, 0, 1)),
            Err(Error::NonIntegerZeta(_))
        ));
    }

    #[test]
    fn same_level_brackets() {
        let b = bracket_xp_same(&pair(8, PhaseParameter::integer(2), PhaseParameter::ZERO, 3, 3)).unwrap();
        assert!((b.value - Complex64::new(0.0, 1.0)).norm() < 1e-12 && !b.boundary);
        let f = bracket_xp_same(&pair(8, half(1), half(-1), 3, 3)).unwrap();
        assert!((f.value - Complex64::new(0.0, -1.0)).norm() < 1e-12);
        let top = bracket_xp_same(&pair(8, PhaseParameter::ZERO, PhaseParameter::ZERO, 7, 7)).unwrap();
        assert!(top.boundary);
        for z in 0..5 {
            let p = pair(6, PhaseParameter::integer(z), PhaseParameter::ZERO, 2, 2);
            assert_eq!(bracket_xx_same(&p).unwrap(), Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn pair_requires_identical_particles() {
        let (sys, x) = harmonic_oscillator(3, 1.0, 1.0, 1.0).unwrap();
        let y = ResponseMatrix::from_real_rows(3, &[0.0, 2.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let p1 = ParticleResponse::new(sys.clone(), x, PhaseParameter::ZERO, ParticleLabel::One).unwrap();
        let p2 = ParticleResponse::new(sys, y, PhaseParameter::ZERO, ParticleLabel::Two).unwrap();
        assert!(BipartitePair::new(p1, p2, 0, 1).is_err());
    }

    #[test]
    fn b_family_assignment() {
        let fam = FamilyTag::new(Family::B, PhaseParameter::integer(3)).unwrap();
        let PhaseAssignment::Feasible { members } = phase_assignment(10, fam).unwrap() else {
            panic!("B family must be feasible");
        };
        assert_eq!(members.len(), 10);
        assert!(members.iter().all(|z| z.is_integer() && z.abs() <= fam.upsilon));
        assert!(coherent(&members, Family::B));
    }

    #[test]
    fn f_family_assignment() {
        let fam = FamilyTag::new(Family::F, half(1)).unwrap();
        assert_eq!(
            phase_assignment(2, fam).unwrap(),
            PhaseAssignment::Feasible { members: vec![half(-1), half(1)] }
        );
        let wide = FamilyTag::new(Family::F, half(9)).unwrap();
        let out = phase_assignment(3, wide).unwrap();
        let PhaseAssignment::Infeasible { certificate } = out else {
            panic!("three F members cannot be pairwise odd");
        };
        assert_eq!(certificate.members, 3);
        assert_eq!(certificate.find_violation(&[half(1), half(3), half(-3)]), Some((0, 2)));
    }

    #[test]
    fn family_tag_validation() {
        assert!(FamilyTag::new(Family::F, PhaseParameter::integer(1)).is_err());
        assert!(FamilyTag::new(Family::B, half(1)).is_err());
        assert!(FamilyTag::new(Family::B, PhaseParameter::integer(-1)).is_err());
    }

    #[test]
    fn closed_forms_match_numeric_brackets() {
        use crate::field::{sample_realization, ModeKey};
        use crate::response::{poisson_bracket_numeric, BracketOptions};
        let opts = BracketOptions::default();
        let r = sample_realization(&ModeKey::all(6), 5).unwrap();
        for (z1, z2) in [(4, 0), (2, 0), (3, 1), (1, -1), (5, 1)] {
            for (n, m) in [(1, 2), (2, 2), (0, 1), (3, 3)] {
                let p = pair(6, half(z1), half(z2), n, m);
                let p2 = momentum_response(&p.particle2).unwrap();
                let num = poisson_bracket_numeric(&p.particle1, &p2, n, m, &r, opts).unwrap();
                let exact = if n == m {
                    bracket_xp_same(&p).unwrap().value
                } else {
                    bracket_xp_distinct(&p).unwrap()
                };
                assert!((num - exact).norm() < 1e-7, "{z1} {z2} {n} {m}: {num} vs {exact}");
                let num = poisson_bracket_numeric(&p.particle1, &p.particle2, n, m, &r, opts).unwrap();
                let exact = if n == m { bracket_xx_same(&p).unwrap() } else { bracket_xx_distinct(&p).unwrap() };
                assert!((num - exact).norm() < 1e-7, "xx {z1} {z2} {n} {m}: {num} vs {exact}");
            }
        }
    }
}
