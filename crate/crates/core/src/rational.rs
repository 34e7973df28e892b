//! Exact rational scores.

use alloc::format;
use alloc::string::String;

use num_integer::Integer;
use num_traits::{Signed, Zero};

pub type Rational = num_rational::Ratio<i64>;

/// Renders `r` as an exact decimal when its expansion terminates
/// (denominator of the form `2^a 5^b`), otherwise as `num/den`.
///
/// `1/2` → `0.5`, `-6` → `-6`, `1/3` → `1/3`.
pub fn format_rational(r: &Rational) -> String {
    let (num, den) = (*r.numer(), *r.denom());
    if den == 1 {
        return format!("{num}");
    }
    let mut d = den;
    let (mut twos, mut fives) = (0u32, 0u32);
    while d % 2 == 0 {
        d /= 2;
        twos += 1;
    }
    while d % 5 == 0 {
        d /= 5;
        fives += 1;
    }
    if d != 1 {
        return format!("{num}/{den}");
    }
    let digits = twos.max(fives);
    let scale = 10i128.pow(digits);
    let scaled = (num as i128) * scale / (den as i128);
    let sign = if r.is_negative() { "-" } else { "" };
    let abs = scaled.abs();
    let (int, frac) = abs.div_rem(&scale);
    format!("{sign}{int}.{frac:0width$}", width = digits as usize)
}

/// Renders with an explicit `+` on positive values.
pub fn format_signed(r: &Rational) -> String {
    if r.is_positive() {
        format!("+{}", format_rational(r))
    } else if r.is_zero() {
        String::from("0")
    } else {
        format_rational(r)
    }
}
