//! Parsers for complex numbers (`a+bi`) and angles (`0.3`, `2/5pi`, `-pi/2`).

use num_complex::Complex64;
use std::f64::consts::PI;

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

/// `3`, `-2.5e-1`, `2i`, `-i`, `1+2i`, `1.5e3-4e-2i`.
pub fn complex(s: &str) -> Result<Complex64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err("empty complex number".into());
    }
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(number(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(i) => (number(&body[..i])?, &body[i..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        x => number(x)?,
    };
    Ok(Complex64::new(re, im))
}

/// Radians, or a rational multiple of pi: `pi`, `-pi`, `2pi`, `2/5pi`,
/// `pi/2`, `0.25pi`.
pub fn angle(s: &str) -> Result<f64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
    let (sign, body) = match t.strip_prefix('-') {
        Some(r) => (-1.0, r),
        None => (1.0, t.strip_prefix('+').unwrap_or(&t)),
    };
    if !body.contains("pi") {
        return Ok(sign * number(body).map_err(|_| format!("'{s}' is not an angle"))?);
    }
    let ratio = |x: &str| -> Result<f64, String> {
        match x.split_once('/') {
            Some((p, q)) => {
                let q = number(q)?;
                if q == 0.0 {
                    return Err(format!("zero denominator in '{s}'"));
                }
                Ok(number(p)? / q)
            }
            None if x.is_empty() => Ok(1.0),
            None => number(x),
        }
    };
    let factor = if let Some(coeff) = body.strip_suffix("pi") {
        ratio(coeff.trim_end_matches('*'))?
    } else if let Some(den) = body.strip_prefix("pi/") {
        1.0 / ratio(den)?
    } else {
        return Err(format!("'{s}' is not an angle"));
    };
    Ok(sign * factor * PI)
}
