//! Unit-suffixed quantity parsing for configuration and report boundaries.
//!
//! Everything inside the crate is SI. A quantity string is a number followed
//! by an optional unit symbol, e.g. `"50 G"`, `"115 um"`, `"1.6 s"`.

use crate::{Error, Result};

/// Conversion to SI as `value * mul / div`. Splitting the factor keeps
/// decimal prefixes correctly rounded (`115 / 1e6` rather than `115 * 1e-6`).
#[derive(Debug, Clone, Copy)]
struct Factor {
    mul: f64,
    div: f64,
}

const fn f(mul: f64, div: f64) -> Factor {
    Factor { mul, div }
}

const TAU: f64 = std::f64::consts::TAU;

fn lookup(unit: &str) -> Option<Factor> {
    let factor = match unit {
        "" | "1" => f(1.0, 1.0),
        // magnetic field
        "T" => f(1.0, 1.0),
        "mT" => f(1.0, 1e3),
        "uT" | "µT" | "μT" => f(1.0, 1e6),
        "G" => f(1.0, 1e4),
        "mG" => f(1.0, 1e7),
        "kG" => f(1e3, 1e4),
        // field gradient
        "T/m" => f(1.0, 1.0),
        "G/cm" => f(1.0, 1e2),
        "kG/cm" => f(10.0, 1.0),
        // length
        "m" => f(1.0, 1.0),
        "cm" => f(1.0, 1e2),
        "mm" => f(1.0, 1e3),
        "um" | "µm" | "μm" => f(1.0, 1e6),
        "nm" => f(1.0, 1e9),
        // current
        "A" => f(1.0, 1.0),
        "mA" => f(1.0, 1e3),
        "uA" | "µA" | "μA" => f(1.0, 1e6),
        // temperature
        "K" => f(1.0, 1.0),
        "mK" => f(1.0, 1e3),
        "uK" | "µK" | "μK" => f(1.0, 1e6),
        "nK" => f(1.0, 1e9),
        // time
        "s" => f(1.0, 1.0),
        "ms" => f(1.0, 1e3),
        "us" | "µs" | "μs" => f(1.0, 1e6),
        "ns" => f(1.0, 1e9),
        // frequency (cycles per second, not angular)
        "Hz" => f(1.0, 1.0),
        "kHz" => f(1e3, 1.0),
        "MHz" => f(1e6, 1.0),
        "rad/s" => f(1.0, 1.0),
        // angle
        "rad" => f(1.0, 1.0),
        "deg" => f(std::f64::consts::PI, 180.0),
        // energy
        "J" => f(1.0, 1.0),
        _ => return None,
    };
    Some(factor)
}

/// Parses a unit-suffixed quantity into its SI value.
///
/// Frequencies in Hz/kHz/MHz stay cycle frequencies; use [`angular`] to turn
/// them into rad/s.
pub fn parse_quantity(text: &str) -> Result<f64> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Unit("empty quantity".into()));
    }
    let split = text
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E') && is_exponent(text, i)))
        })
        .map(|(i, _)| i)
        .unwrap_or(text.len());
    let (num, unit) = text.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Unit(format!("malformed number in {text:?}")))?;
    let unit = unit.trim();
    let factor = lookup(unit).ok_or_else(|| Error::Unit(format!("unknown unit {unit:?} in {text:?}")))?;
    Ok(value * factor.mul / factor.div)
}

/// Physical dimension of a unit symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Dimensionless,
    Field,
    Gradient,
    Length,
    Current,
    Temperature,
    Time,
    Frequency,
    AngularFrequency,
    Angle,
    Energy,
}

impl Dimension {
    pub fn name(self) -> &'static str {
        match self {
            Dimension::Dimensionless => "dimensionless",
            Dimension::Field => "magnetic field",
            Dimension::Gradient => "field gradient",
            Dimension::Length => "length",
            Dimension::Current => "current",
            Dimension::Temperature => "temperature",
            Dimension::Time => "time",
            Dimension::Frequency => "frequency",
            Dimension::AngularFrequency => "angular frequency",
            Dimension::Angle => "angle",
            Dimension::Energy => "energy",
        }
    }
}

/// Dimension of a unit symbol accepted by [`parse_quantity`].
pub fn dimension_of(unit: &str) -> Option<Dimension> {
    lookup(unit)?;
    Some(match unit {
        "" | "1" => Dimension::Dimensionless,
        "T" | "mT" | "uT" | "µT" | "μT" | "G" | "mG" | "kG" => Dimension::Field,
        "T/m" | "G/cm" | "kG/cm" => Dimension::Gradient,
        "m" | "cm" | "mm" | "um" | "µm" | "μm" | "nm" => Dimension::Length,
        "A" | "mA" | "uA" | "µA" | "μA" => Dimension::Current,
        "K" | "mK" | "uK" | "µK" | "μK" | "nK" => Dimension::Temperature,
        "s" | "ms" | "us" | "µs" | "μs" | "ns" => Dimension::Time,
        "Hz" | "kHz" | "MHz" => Dimension::Frequency,
        "rad/s" => Dimension::AngularFrequency,
        "rad" | "deg" => Dimension::Angle,
        _ => Dimension::Energy,
    })
}

/// Parses a quantity and checks that its unit has the expected dimension.
/// Only dimensionless quantities may omit the unit.
pub fn parse_dimensioned(text: &str, expected: Dimension) -> Result<f64> {
    let value = parse_quantity(text)?;
    let unit = text
        .trim()
        .trim_start_matches(|c: char| c.is_ascii_digit() || c == '.' || c == '+' || c == '-')
        .trim_start_matches(|c: char| c == 'e' || c == 'E')
        .trim_start_matches(|c: char| c.is_ascii_digit() || c == '+' || c == '-')
        .trim();
    let found = dimension_of(unit).unwrap_or(Dimension::Dimensionless);
    if found != expected {
        return Err(Error::Unit(format!(
            "{text:?} is a {} but a {} is required",
            found.name(),
            expected.name()
        )));
    }
    Ok(value)
}

// An 'e' is an exponent marker only if a digit (optionally signed) follows.
fn is_exponent(text: &str, i: usize) -> bool {
    let rest = &text[i + 1..];
    let rest = rest.strip_prefix(['+', '-']).unwrap_or(rest);
    rest.starts_with(|c: char| c.is_ascii_digit()) && i > 0
}

/// Formats an SI value in the given unit, with the shortest representation
/// that parses back to the same number in that unit.
pub fn format_quantity(value_si: f64, unit: &str) -> Result<String> {
    let factor = lookup(unit).ok_or_else(|| Error::Unit(format!("unknown unit {unit:?}")))?;
    let v = value_si * factor.div / factor.mul;
    if unit.is_empty() {
        Ok(format!("{v}"))
    } else {
        Ok(format!("{v} {unit}"))
    }
}

/// SI value expressed in `unit` (for report columns).
pub fn to_unit(value_si: f64, unit: &str) -> Result<f64> {
    let factor = lookup(unit).ok_or_else(|| Error::Unit(format!("unknown unit {unit:?}")))?;
    Ok(value_si * factor.div / factor.mul)
}

/// Cycle frequency (Hz) to angular frequency (rad/s).
pub fn angular(freq_hz: f64) -> f64 {
    TAU * freq_hz
}
