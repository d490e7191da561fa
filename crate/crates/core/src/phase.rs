//! Exact half-unit quantities.
//!
//! Both the response phase parameter ζ and the internal rotation label γ take
//! integer or half-odd-integer values. They are stored doubled, so every
//! parity decision is integer arithmetic and never touches a float.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(value: i64) -> Self {
        if value.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    /// `(-1)^k` for a `k` of this parity.
    pub fn sign(self) -> i32 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }
}

fn fmt_half(half_units: i64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if half_units % 2 == 0 {
        write!(f, "{}", half_units / 2)
    } else {
        write!(f, "{}/2", half_units)
    }
}

/// Response phase parameter ζ, in units of π, stored as `2ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PhaseParameter {
    pub half_units: i64,
}

impl PhaseParameter {
    pub const ZERO: PhaseParameter = PhaseParameter { half_units: 0 };

    pub const fn from_half_units(half_units: i64) -> Self {
        PhaseParameter { half_units }
    }

    pub const fn integer(value: i64) -> Self {
        PhaseParameter {
            half_units: 2 * value,
        }
    }

    pub fn is_integer(self) -> bool {
        self.half_units % 2 == 0
    }

    pub fn is_half_odd(self) -> bool {
        !self.is_integer()
    }

    pub fn value(self) -> f64 {
        self.half_units as f64 / 2.0
    }

    pub fn abs(self) -> Self {
        PhaseParameter {
            half_units: self.half_units.abs(),
        }
    }

    /// The integer value, or an error for half-odd inputs.
    pub fn as_integer(self) -> Result<i64> {
        if self.is_integer() {
            Ok(self.half_units / 2)
        } else {
            Err(Error::NonIntegerZeta(self.to_string()))
        }
    }

    /// Parity of an integer ζ, i.e. the sign `(-1)^ζ`.
    pub fn parity(self) -> Result<Parity> {
        self.as_integer().map(Parity::of)
    }

    /// `sin(πζ)` evaluated exactly: 0 for integers, ±1 for half-odd values.
    pub fn sin_pi(self) -> f64 {
        if self.is_integer() {
            0.0
        } else if (self.half_units - 1).rem_euclid(4) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `cos(πζ)` evaluated exactly: ±1 for integers, 0 for half-odd values.
    pub fn cos_pi(self) -> f64 {
        if self.is_half_odd() {
            0.0
        } else {
            Parity::of(self.half_units / 2).sign() as f64
        }
    }
}

impl fmt::Display for PhaseParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_half(self.half_units, f)
    }
}

/// Internal rotation label γ in units of ħ, stored as `2γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpinLabel {
    pub gamma_half_units: i64,
}

impl SpinLabel {
    pub const fn from_half_units(gamma_half_units: i64) -> Self {
        SpinLabel { gamma_half_units }
    }

    pub fn value(self) -> f64 {
        self.gamma_half_units as f64 / 2.0
    }

    pub fn is_half_odd(self) -> bool {
        self.gamma_half_units % 2 != 0
    }

    /// Parity of `2γ`.
    pub fn doubled_parity(self) -> Parity {
        Parity::of(self.gamma_half_units)
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_half(self.gamma_half_units, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_tables_match_floats() {
        for h in -12..=12 {
            let z = PhaseParameter::from_half_units(h);
            let x = std::f64::consts::PI * z.value();
            assert!((z.sin_pi() - x.sin()).abs() < 1e-12, "sin at {z}");
            assert!((z.cos_pi() - x.cos()).abs() < 1e-12, "cos at {z}");
        }
    }

    #[test]
    fn parity_of_negative_values() {
        assert_eq!(Parity::of(-3), Parity::Odd);
        assert_eq!(Parity::of(-4), Parity::Even);
        assert_eq!(PhaseParameter::integer(-1).parity().unwrap(), Parity::Odd);
        assert!(PhaseParameter::from_half_units(1).parity().is_err());
    }

    #[test]
    fn display() {
        assert_eq!(PhaseParameter::from_half_units(3).to_string(), "3/2");
        assert_eq!(PhaseParameter::from_half_units(-1).to_string(), "-1/2");
        assert_eq!(PhaseParameter::integer(2).to_string(), "2");
        assert_eq!(SpinLabel::from_half_units(-3).to_string(), "-3/2");
    }

    #[test]
    fn json_shape() {
        let z = PhaseParameter::from_half_units(3);
        assert_eq!(serde_json::to_string(&z).unwrap(), r#"{"half_units":3}"#);
    }
}
