//! Exact parsing of decimal and rational literals.

use rug::{Integer, Rational};

use super::NumericsError;

/// Parses `[-+]digits[.digits][e[-+]digits]` or `[-+]p/q` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, NumericsError> {
    let t = text.trim();
    let fail = || NumericsError::Parse(text.to_string());
    if t.is_empty() {
        return Err(fail());
    }
    if let Some((num, den)) = t.split_once('/') {
        let num = parse_integer(num.trim()).ok_or_else(fail)?;
        let den = parse_integer(den.trim()).ok_or_else(fail)?;
        if den == 0 {
            return Err(NumericsError::ZeroDenominator(text.to_string()));
        }
        return Ok(Rational::from((num, den)));
    }
    parse_decimal(t).ok_or_else(fail)
}

fn parse_integer(s: &str) -> Option<Integer> {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    Integer::from_str_radix(s.strip_prefix('+').unwrap_or(s), 10).ok()
}

fn parse_decimal(s: &str) -> Option<Rational> {
    let (negative, body) = match s.as_bytes()[0] {
        b'-' => (true, &s[1..]),
        b'+' => (false, &s[1..]),
        _ => (false, s),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(pos) => {
            let exp_text = &body[pos + 1..];
            let exp_digits = exp_text.strip_prefix(['+', '-']).unwrap_or(exp_text);
            if exp_digits.is_empty() || !exp_digits.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            (&body[..pos], exp_text.parse::<i32>().ok()?)
        }
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.bytes().chain(frac_part.bytes()).all(|b| b.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from(Integer::from_str_radix(&digits, 10).ok()?);
    let scale = exponent.checked_sub(i32::try_from(frac_part.len()).ok()?)?;
    let ten_pow = Integer::from(Integer::u_pow_u(10, scale.unsigned_abs()));
    if scale >= 0 {
        value *= ten_pow;
    } else {
        value /= ten_pow;
    }
    if negative {
        value = -value;
    }
    Some(value)
}
