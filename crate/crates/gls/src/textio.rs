//! Round-trippable decimal formatting and the sample-file format.

use crate::error::{Error, Result};
use std::fmt::Write as _;

/// Formats a float with 17 significant digits, positional where compact
/// (C's %.17g convention). 17 digits round-trip any finite f64 exactly.
pub fn fmt_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.to_string();
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("e-notation");
    let exp: i32 = exp.parse().expect("exponent");
    let neg = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), 17);

    let body = if (-4..17).contains(&exp) {
        let mut s = String::new();
        if exp >= 0 {
            let k = exp as usize + 1;
            s.push_str(&digits[..k]);
            let frac = digits[k..].trim_end_matches('0');
            if !frac.is_empty() {
                s.push('.');
                s.push_str(frac);
            }
        } else {
            s.push_str("0.");
            for _ in 0..(-exp - 1) {
                s.push('0');
            }
            s.push_str(digits.trim_end_matches('0'));
        }
        s
    } else {
        let frac = digits[1..].trim_end_matches('0');
        let mut s = String::new();
        s.push_str(&digits[..1]);
        if !frac.is_empty() {
            s.push('.');
            s.push_str(frac);
        }
        let _ = write!(s, "e{exp}");
        s
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    let t = s.trim();
    match t {
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        "nan" => return Ok(f64::NAN),
        _ => {}
    }
    t.parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad float {t:?}: {e}")))
}

/// Writes samples as plain text: `#` header comments, one value per line.
pub fn write_sample_text(values: &[f64], comments: &[String]) -> String {
    let mut out = String::new();
    for c in comments {
        let _ = writeln!(out, "# {c}");
    }
    for v in values {
        let _ = writeln!(out, "{}", fmt_g17(*v));
    }
    out
}

/// Reads the sample text format: skips blank lines and `#` comments.
pub fn read_sample_text(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        out.push(parse_f64(t).map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formats_match_g17_shapes() {
        assert_eq!(fmt_g17(2.0), "2");
        assert_eq!(fmt_g17(0.5), "0.5");
        assert_eq!(fmt_g17(-1.25), "-1.25");
        assert_eq!(fmt_g17(0.0), "0");
        let t = fmt_g17(2.0f64.powf(-0.25));
        assert!(t.starts_with("0.840896415253714"), "{t}");
        assert!(fmt_g17(1e300).contains('e'));
        assert!(fmt_g17(1e-7).contains('e'));
    }

    #[test]
    fn round_trips_exactly() {
        for x in [
            1.0 / 3.0,
            std::f64::consts::PI,
            2.0f64.sqrt(),
            1e-308,
            6.02e23,
            -0.1,
            f64::MAX,
            f64::MIN_POSITIVE,
        ] {
            let back = parse_f64(&fmt_g17(x)).unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {}", fmt_g17(x));
        }
    }

    #[test]
    fn sample_text_round_trip() {
        let vals = vec![1.5, -2.25, 3e-12];
        let text = write_sample_text(&vals, &["model: test".into(), "seed: 9".into()]);
        let back = read_sample_text(&text).unwrap();
        assert_eq!(vals, back);
    }

    #[test]
    fn rejects_garbage() {
        assert!(read_sample_text("1.0\nnot-a-number\n").is_err());
    }
}
