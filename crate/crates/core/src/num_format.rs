//! Decimal rendering of doubles with 17 significant digits, for CSV cells
//! and JSON numbers.

use serde::ser::Error as _;
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

/// `x` to 17 significant digits, positional when that stays short, with
/// trailing zeros dropped. Non-finite values render as `NaN`/`inf`.
pub fn sig17(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-6..=16).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        trim_zeros(s)
    } else {
        let s = format!("{x:.16e}");
        let (mantissa, exponent) = s.split_once('e').expect("exponent form");
        format!("{}e{exponent}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn raw(x: f64) -> Result<Box<RawValue>, serde_json::Error> {
    if x.is_finite() {
        RawValue::from_string(sig17(x))
    } else {
        RawValue::from_string("null".into())
    }
}

pub fn ser<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
    raw(*x).map_err(S::Error::custom)?.serialize(s)
}

pub fn ser_opt<S: Serializer>(x: &Option<f64>, s: S) -> Result<S::Ok, S::Error> {
    match x {
        Some(v) => ser(v, s),
        None => s.serialize_none(),
    }
}

pub fn ser_slice<S: Serializer>(xs: &[f64], s: S) -> Result<S::Ok, S::Error> {
    let items = xs
        .iter()
        .map(|&x| raw(x))
        .collect::<Result<Vec<_>, _>>()
        .map_err(S::Error::custom)?;
    items.serialize(s)
}
