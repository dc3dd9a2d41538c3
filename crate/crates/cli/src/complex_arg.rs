//! Argument parsers for complex literals and image sizes.

use per3_core::Complex;

fn real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("`{s}` is not finite"))
    }
}

/// Accepts "RE,IM", "RE+IMi", "RE-IMi", "IMi" and "RE".
pub fn parse_complex(s: &str) -> Result<Complex, String> {
    let t = s.trim();
    if let Some((re, im)) = t.split_once(',') {
        return Ok(Complex::new(real(re)?, real(im)?));
    }
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Complex::new(real(t)?, 0.0));
    };
    // the sign that splits the parts is the last one not opening the string
    // and not belonging to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let imag = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        other => real(other),
    };
    match split {
        Some(k) => Ok(Complex::new(real(&body[..k])?, imag(&body[k..])?)),
        None => Ok(Complex::new(0.0, imag(body)?)),
    }
    .map_err(|e: String| format!("malformed complex literal `{s}`: {e}"))
}

/// "WIDTHxHEIGHT" or a single positive number.
pub fn parse_size(s: &str) -> Result<(usize, usize), String> {
    let dim = |x: &str| match x.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("malformed size `{s}`")),
    };
    match s.split_once(['x', 'X']) {
        Some((w, h)) => Ok((dim(w)?, dim(h)?)),
        None => {
            let n = dim(s)?;
            Ok((n, n))
        }
    }
}
