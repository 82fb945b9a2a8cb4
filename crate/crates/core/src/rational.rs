//! Exact rational helpers: decimal parsing/printing and rigorous logarithm bounds.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number used for costs, probabilities and expected costs.
pub type Rational = BigRational;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses a plain decimal string such as `"3"`, `"0.25"` or `"-1.5"` into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::InvalidArgument(format!("not a decimal number: {s:?}"));
    let t = s.trim();
    if t.is_empty() {
        return Err(bad());
    }
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let (whole, frac) = match body.split_once('.') {
        Some((w, f)) => (w, f),
        None => (body, ""),
    };
    if whole.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !whole.chars().all(|c| c.is_ascii_digit()) || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{whole}{frac}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    let denom = num::pow(BigInt::from(10u32), frac.len());
    let value = Rational::new(numer, denom);
    Ok(if neg { -value } else { value })
}

/// Prints a rational as a terminating decimal string, or `None` if the
/// denominator has prime factors other than 2 and 5.
pub fn to_decimal(r: &Rational) -> Option<String> {
    let mut den = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut twos = 0usize;
    let mut fives = 0usize;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = r * Rational::from_integer(num::pow(BigInt::from(10), places));
    debug_assert!(scaled.is_integer());
    let n = scaled.to_integer();
    let neg = n.is_negative();
    let digits = n.abs().to_string();
    let s = if places == 0 {
        digits
    } else {
        let padded = format!("{digits:0>width$}", width = places + 1);
        let (w, f) = padded.split_at(padded.len() - places);
        let f = f.trim_end_matches('0');
        if f.is_empty() {
            w.to_string()
        } else {
            format!("{w}.{f}")
        }
    };
    Some(if neg { format!("-{s}") } else { s })
}

/// Serializes as `"p/q"` (or `"p"` for integers).
pub fn serialize<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `2 * atanh(z)` summed to `terms` terms plus a geometric bound on the tail,
/// valid for `0 <= z < 1`. The result is `>= ln((1+z)/(1-z))`.
fn atanh2_upper(z: &Rational, terms: usize) -> Rational {
    let z2 = z * z;
    let mut power = z.clone();
    let mut sum = Rational::zero();
    for k in 0..terms {
        sum += &power / int(2 * k as i64 + 1);
        power *= &z2;
    }
    // power == z^(2*terms+1)
    let tail = &power / (int(2 * terms as i64 + 1) * (Rational::one() - &z2));
    (sum + tail) * int(2)
}

/// A rational upper bound on `ln(q)` that is tight to far below `1e-15`.
///
/// Uses `ln q = m ln 2 + ln r` with `r = q / 2^m` in `[1, 2)`; both pieces are
/// bounded from above by truncated `atanh` series plus their tail bounds.
pub fn ln_upper_bound(q: u64) -> Rational {
    assert!(q >= 1, "ln of zero is undefined");
    if q == 1 {
        return Rational::zero();
    }
    let m = 63 - q.leading_zeros() as i64;
    let r = Rational::new(BigInt::from(q), num::pow(BigInt::from(2), m as usize));
    let terms = 24;
    let ln2 = atanh2_upper(&ratio(1, 3), terms);
    let z = (&r - Rational::one()) / (&r + Rational::one());
    let ln_r = if z.is_zero() {
        Rational::zero()
    } else {
        atanh2_upper(&z, terms)
    };
    ln2 * int(m) + ln_r
}
