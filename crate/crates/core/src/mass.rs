//! Fixed-point mass in kilograms with six fractional digits.
//!
//! Values are held as an integer count of 1e-6 kg (milligrams), so
//! summation is exact and independent of order. The textual form is a
//! plain decimal string such as `"0.005"` or `"-12.250000"`.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Number of fractional digits carried by [`Mass`].
pub const MASS_SCALE_DIGITS: u32 = 6;
const UNITS_PER_KG: i128 = 1_000_000;

/// Largest magnitude accepted by the parser, in kilograms.
///
/// Keeps single reports well inside the accumulator range.
const MAX_PARSE_KG: i128 = 1_000_000_000_000;

/// Exact mass in kilograms, resolution 1e-6 kg.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Mass(i128);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MassParseError {
    #[error("empty mass string")]
    Empty,
    #[error("mass `{0}` is not a plain decimal number")]
    Syntax(String),
    #[error("mass `{0}` has more than 6 fractional digits")]
    TooPrecise(String),
    #[error("mass `{0}` is out of range")]
    OutOfRange(String),
}

impl Mass {
    pub const ZERO: Mass = Mass(0);

    /// Builds a mass from a count of milligrams (1e-6 kg).
    pub const fn from_micro_kg(units: i128) -> Self {
        Mass(units)
    }

    pub const fn micro_kg(self) -> i128 {
        self.0
    }

    pub const fn is_zero(self) -> bool {
        self.0 == 0
    }

    pub const fn is_negative(self) -> bool {
        self.0 < 0
    }

    /// Lossy conversion for display and plotting only.
    pub fn to_f64(self) -> f64 {
        self.0 as f64 / UNITS_PER_KG as f64
    }

    pub fn abs(self) -> Self {
        Mass(self.0.abs())
    }

    /// Splits off `fraction` of this mass, rounding half away from zero to
    /// the nearest milligram. The returned pair always sums back to `self`.
    pub fn split(self, fraction: f64) -> (Mass, Mass) {
        let fraction = fraction.clamp(0.0, 1.0);
        let part = (self.0 as f64 * fraction).round() as i128;
        let part = part.clamp(self.0.min(0), self.0.max(0));
        (Mass(part), Mass(self.0 - part))
    }
}

impl fmt::Display for Mass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        let units = UNITS_PER_KG as u128;
        write!(f, "{sign}{}.{:06}", abs / units, abs % units)
    }
}

impl FromStr for Mass {
    type Err = MassParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.is_empty() {
            return Err(MassParseError::Empty);
        }
        let syntax = || MassParseError::Syntax(s.to_string());
        let (negative, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (whole, frac) = match body.split_once('.') {
            Some((w, f)) => (w, f),
            None => (body, ""),
        };
        if whole.is_empty() || !whole.bytes().all(|b| b.is_ascii_digit()) {
            return Err(syntax());
        }
        if body.contains('.') && frac.is_empty() {
            return Err(syntax());
        }
        if !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(syntax());
        }
        if frac.len() > MASS_SCALE_DIGITS as usize {
            return Err(MassParseError::TooPrecise(s.to_string()));
        }
        // Leading zeros are fine; length bound keeps the parse from overflowing.
        let whole_trimmed = whole.trim_start_matches('0');
        if whole_trimmed.len() > 13 {
            return Err(MassParseError::OutOfRange(s.to_string()));
        }
        let whole_val: i128 = if whole_trimmed.is_empty() {
            0
        } else {
            whole_trimmed.parse().map_err(|_| syntax())?
        };
        if whole_val > MAX_PARSE_KG {
            return Err(MassParseError::OutOfRange(s.to_string()));
        }
        let mut frac_val: i128 = 0;
        for i in 0..MASS_SCALE_DIGITS as usize {
            let digit = frac.as_bytes().get(i).map_or(0, |b| (b - b'0') as i128);
            frac_val = frac_val * 10 + digit;
        }
        let units = whole_val * UNITS_PER_KG + frac_val;
        Ok(Mass(if negative { -units } else { units }))
    }
}

impl Serialize for Mass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Mass {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = <std::borrow::Cow<'de, str>>::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for Mass {
    type Output = Mass;
    fn add(self, rhs: Mass) -> Mass {
        Mass(self.0 + rhs.0)
    }
}

impl AddAssign for Mass {
    fn add_assign(&mut self, rhs: Mass) {
        self.0 += rhs.0;
    }
}

impl Sub for Mass {
    type Output = Mass;
    fn sub(self, rhs: Mass) -> Mass {
        Mass(self.0 - rhs.0)
    }
}

impl SubAssign for Mass {
    fn sub_assign(&mut self, rhs: Mass) {
        self.0 -= rhs.0;
    }
}

impl Neg for Mass {
    type Output = Mass;
    fn neg(self) -> Mass {
        Mass(-self.0)
    }
}

impl Sum for Mass {
    fn sum<I: Iterator<Item = Mass>>(iter: I) -> Mass {
        iter.fold(Mass::ZERO, Add::add)
    }
}

impl<'a> Sum<&'a Mass> for Mass {
    fn sum<I: Iterator<Item = &'a Mass>>(iter: I) -> Mass {
        iter.copied().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(s: &str) -> Mass {
        s.parse().unwrap()
    }

    #[test]
    fn parses_plain_decimals() {
        assert_eq!(m("1").micro_kg(), 1_000_000);
        assert_eq!(m("0.005").micro_kg(), 5_000);
        assert_eq!(m("0.000001").micro_kg(), 1);
        assert_eq!(m("-2.5").micro_kg(), -2_500_000);
        assert_eq!(m("007.10").micro_kg(), 7_100_000);
    }

    #[test]
    fn rejects_bad_syntax() {
        for bad in [
            "", "1.", ".5", "1e3", "+1", "1.2.3", " 1", "0x10", "--1", "NaN",
        ] {
            assert!(bad.parse::<Mass>().is_err(), "{bad:?} should be rejected");
        }
        assert!(matches!(
            "0.0000001".parse::<Mass>(),
            Err(MassParseError::TooPrecise(_))
        ));
        assert!(matches!(
            "99999999999999".parse::<Mass>(),
            Err(MassParseError::OutOfRange(_))
        ));
    }

    #[test]
    fn displays_six_digits() {
        assert_eq!(m("1").to_string(), "1.000000");
        assert_eq!(m("0.4").to_string(), "0.400000");
        assert_eq!(m("-0.000001").to_string(), "-0.000001");
        assert_eq!(Mass::ZERO.to_string(), "0.000000");
    }

    #[test]
    fn decimal_addition_is_exact() {
        // 0.1 + 0.2 in binary floating point is not 0.3; here it is.
        assert_eq!(m("0.1") + m("0.2"), m("0.3"));
        assert_eq!(m("0.4") + m("0.6"), m("1.0"));
    }

    #[test]
    fn split_conserves() {
        let (a, b) = m("0.000003").split(0.7);
        assert_eq!(a + b, m("0.000003"));
        assert_eq!(a, m("0.000002"));
        let (a, b) = m("1").split(0.7);
        assert_eq!((a, b), (m("0.7"), m("0.3")));
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(units in -1_000_000_000_000_000i128..1_000_000_000_000_000i128) {
            let mass = Mass::from_micro_kg(units);
            prop_assert_eq!(mass.to_string().parse::<Mass>().unwrap(), mass);
        }

        #[test]
        fn split_parts_sum_to_whole(units in 0i128..1_000_000_000_000, frac in 0.0f64..=1.0) {
            let mass = Mass::from_micro_kg(units);
            let (a, b) = mass.split(frac);
            prop_assert_eq!(a + b, mass);
            prop_assert!(!a.is_negative() && !b.is_negative());
        }
    }
}
