//! JSON instance files.
//!
//! ```json
//! {"name": "two-task", "tasks": [{"t": 1, "d": 1, "w": 1}, {"t": 2, "d": 2, "w": 1}]}
//! ```
//!
//! Numbers are read from their literal text, so `0.1` is exactly one tenth.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use qtwt_core::sched::{Instance, Task};
use qtwt_core::Rational;
use serde::de::{self, Deserializer};
use serde::ser::{self, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskRecord {
    pub t: Decimal,
    pub d: Decimal,
    pub w: Decimal,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub name: String,
    #[serde(deserialize_with = "nonempty_tasks")]
    pub tasks: Vec<TaskRecord>,
}

fn nonempty_tasks<'de, D: Deserializer<'de>>(de: D) -> Result<Vec<TaskRecord>, D::Error> {
    let tasks = Vec::<TaskRecord>::deserialize(de)?;
    if tasks.is_empty() {
        return Err(de::Error::custom("task list is empty"));
    }
    Ok(tasks)
}

impl InstanceFile {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: strip_position(&e),
        })
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_instance(name: impl Into<String>, inst: &Instance) -> Self {
        InstanceFile {
            name: name.into(),
            tasks: inst
                .tasks()
                .iter()
                .filter(|t| !t.is_dummy)
                .map(|t| TaskRecord {
                    t: Decimal(t.length),
                    d: Decimal(t.deadline),
                    w: Decimal(t.weight),
                })
                .collect(),
        }
    }

    pub fn instance(&self) -> Result<Instance, CliError> {
        let tasks = self
            .tasks
            .iter()
            .map(|r| Task::new(r.t.0, r.d.0, r.w.0))
            .collect::<qtwt_core::Result<Vec<_>>>()?;
        Ok(Instance::new(tasks)?)
    }
}

fn strip_position(e: &serde_json::Error) -> String {
    let full = e.to_string();
    let suffix = format!(" at line {} column {}", e.line(), e.column());
    full.strip_suffix(&suffix).unwrap_or(&full).to_string()
}

/// A nonnegative rational read from, and written as, a terminating decimal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decimal(pub Rational);

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecimalError {
    Syntax,
    Negative,
    OutOfRange,
    NonTerminating,
}

impl fmt::Display for DecimalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DecimalError::Syntax => "malformed decimal",
            DecimalError::Negative => "value must be >= 0",
            DecimalError::OutOfRange => "decimal out of range",
            DecimalError::NonTerminating => "value has no finite decimal expansion",
        })
    }
}

impl std::error::Error for DecimalError {}

/// Parses a JSON-style decimal literal (`12`, `-0.5`, `1.25e-3`) exactly.
pub fn parse_decimal(text: &str) -> Result<Rational, DecimalError> {
    let (negative, rest) = match text.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, text.strip_prefix('+').unwrap_or(text)),
    };
    let (mantissa, exponent) = match rest.find(['e', 'E']) {
        Some(i) => {
            let exp: i64 = rest[i + 1..].parse().map_err(|_| DecimalError::Syntax)?;
            (&rest[..i], exp)
        }
        None => (rest, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty()
        || !int_part
            .bytes()
            .chain(frac_part.bytes())
            .all(|b| b.is_ascii_digit())
    {
        return Err(DecimalError::Syntax);
    }
    let frac_part = frac_part.trim_end_matches('0');
    let digits = format!("{int_part}{frac_part}");
    let digits = digits.trim_start_matches('0');
    let scale = exponent
        .checked_sub(frac_part.len() as i64)
        .ok_or(DecimalError::OutOfRange)?;
    if digits.is_empty() {
        return Ok(Rational::zero());
    }
    let mut numer: i128 = digits.parse().map_err(|_| DecimalError::OutOfRange)?;
    if negative {
        numer = -numer;
    }
    let power = pow10(scale.unsigned_abs())?;
    let value = if scale >= 0 {
        Rational::from_integer(numer.checked_mul(power).ok_or(DecimalError::OutOfRange)?)
    } else {
        Rational::new(numer, power)
    };
    Ok(value)
}

fn pow10(exp: u64) -> Result<i128, DecimalError> {
    u32::try_from(exp)
        .ok()
        .and_then(|e| 10i128.checked_pow(e))
        .ok_or(DecimalError::OutOfRange)
}

/// Exact decimal text for `value`, without trailing zeros.
pub fn format_decimal(value: &Rational) -> Result<String, DecimalError> {
    let mut den = *value.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return Err(DecimalError::NonTerminating);
    }
    let places = twos.max(fives);
    let factor = 10i128.checked_pow(places).ok_or(DecimalError::OutOfRange)? / value.denom();
    let scaled = value
        .numer()
        .checked_mul(factor)
        .ok_or(DecimalError::OutOfRange)?;
    let sign = if scaled < 0 { "-" } else { "" };
    let digits = scaled.unsigned_abs().to_string();
    if places == 0 {
        return Ok(format!("{sign}{digits}"));
    }
    let places = places as usize;
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    Ok(format!("{sign}{int_part}.{frac_part}"))
}

/// Decimal text when it exists, `p/q` otherwise.
pub fn display_rational(value: &Rational) -> String {
    format_decimal(value).unwrap_or_else(|_| value.to_string())
}

impl FromStr for Decimal {
    type Err = DecimalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_decimal(s)?;
        if v.is_negative() {
            return Err(DecimalError::Negative);
        }
        Ok(Decimal(v))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&display_rational(&self.0))
    }
}

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let text = format_decimal(&self.0).map_err(ser::Error::custom)?;
        let number = serde_json::Number::from_str(&text).map_err(ser::Error::custom)?;
        number.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let number = serde_json::Number::deserialize(de)?;
        number.as_str().parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn parses_exact_decimals() {
        assert_eq!(parse_decimal("0.1").unwrap(), r(1, 10));
        assert_eq!(parse_decimal("12").unwrap(), r(12, 1));
        assert_eq!(parse_decimal("1.25e-3").unwrap(), r(1, 800));
        assert_eq!(parse_decimal("2.5E2").unwrap(), r(250, 1));
        assert_eq!(parse_decimal("-0.50").unwrap(), r(-1, 2));
        assert_eq!(parse_decimal("0.000").unwrap(), r(0, 1));
        assert_eq!(
            parse_decimal("1.000000000000000000000000000000000000000000").unwrap(),
            r(1, 1)
        );
        assert_eq!(parse_decimal("abc"), Err(DecimalError::Syntax));
        assert_eq!(parse_decimal("."), Err(DecimalError::Syntax));
        assert_eq!(parse_decimal("1e400"), Err(DecimalError::OutOfRange));
    }

    #[test]
    fn formats_exact_decimals() {
        assert_eq!(format_decimal(&r(1, 10)).unwrap(), "0.1");
        assert_eq!(format_decimal(&r(1, 800)).unwrap(), "0.00125");
        assert_eq!(format_decimal(&r(-7, 2)).unwrap(), "-3.5");
        assert_eq!(format_decimal(&r(42, 1)).unwrap(), "42");
        assert_eq!(format_decimal(&r(1, 3)), Err(DecimalError::NonTerminating));
        assert_eq!(display_rational(&r(1, 3)), "1/3");
    }

    #[test]
    fn reads_example_file() {
        let f = InstanceFile::parse(
            r#"{"name": "two", "tasks": [{"t": 1, "d": 1, "w": 1}, {"t": 2, "d": 2.5, "w": 0.1}]}"#,
        )
        .unwrap();
        assert_eq!(f.name, "two");
        assert_eq!(f.tasks[1].d.0, r(5, 2));
        assert_eq!(f.tasks[1].w.0, r(1, 10));
        assert_eq!(f.instance().unwrap().len(), 2);
    }

    #[test]
    fn rejects_bad_files_with_position() {
        for (text, line) in [
            (r#"{"name": "x", "tasks": []}"#, 1),
            (
                "{\"name\": \"x\",\n \"tasks\": [{\"t\": -1, \"d\": 0, \"w\": 1}]}",
                2,
            ),
            (r#"{"name": "x", "tasks": [{"t": 1, "d": 0}]}"#, 1),
            (
                r#"{"name": "x", "tasks": [{"t": 1, "d": 0, "w": 1, "q": 2}]}"#,
                1,
            ),
            (r#"{"name": "x", "tasks": [{"t": "1", "d": 0, "w": 1}]}"#, 1),
            ("{\"name\": \"x\",\n\n \"tasks\": [", 3),
        ] {
            let e = InstanceFile::parse(text).unwrap_err();
            assert_eq!(e.line(), line, "{text}");
            assert!(e.column() > 0);
        }
    }

    #[test]
    fn writes_numbers_not_strings() {
        let f = InstanceFile {
            name: "n".into(),
            tasks: vec![TaskRecord {
                t: Decimal(r(3, 2)),
                d: Decimal(r(0, 1)),
                w: Decimal(r(7, 1)),
            }],
        };
        let text = f.to_json().unwrap();
        assert!(text.contains("\"t\": 1.5"), "{text}");
        assert_eq!(InstanceFile::parse(&text).unwrap(), f);
    }
}
