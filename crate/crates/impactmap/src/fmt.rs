//! Fixed float formatting for CSV cells: 12 significant digits, plain
//! decimal notation for moderate magnitudes, trailing zeros trimmed.
//! A pure function of the value, so emitted bytes never depend on the
//! run.

const SIG_DIGITS: usize = 12;

pub fn sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let formatted = format!("{:.*e}", SIG_DIGITS - 1, x);
    let (mantissa, exp_str) = formatted
        .split_once('e')
        .expect("scientific format always contains e");
    let exponent: i32 = exp_str.parse().expect("exponent is an integer");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    debug_assert_eq!(digits.len(), SIG_DIGITS);

    let body = if (-4..=14).contains(&exponent) {
        plain_decimal(&digits, exponent)
    } else {
        scientific(&digits, exponent)
    };
    if negative {
        format!("-{body}")
    } else {
        body
    }
}

fn plain_decimal(digits: &str, exponent: i32) -> String {
    let mut out = String::new();
    if exponent < 0 {
        // The mantissa's lead digit is nonzero, so trimming never
        // empties the fraction.
        out.push_str("0.");
        for _ in 0..(-exponent - 1) {
            out.push('0');
        }
        out.push_str(digits.trim_end_matches('0'));
        return out;
    }
    let point = exponent as usize + 1;
    if point >= digits.len() {
        out.push_str(digits);
        for _ in 0..(point - digits.len()) {
            out.push('0');
        }
        return out;
    }
    let (int_part, frac_part) = digits.split_at(point);
    let frac = frac_part.trim_end_matches('0');
    out.push_str(int_part);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(frac);
    }
    out
}

fn scientific(digits: &str, exponent: i32) -> String {
    let (head, tail) = digits.split_at(1);
    let tail = tail.trim_end_matches('0');
    if tail.is_empty() {
        format!("{head}e{exponent}")
    } else {
        format!("{head}.{tail}e{exponent}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_values() {
        assert_eq!(sig(0.0), "0");
        assert_eq!(sig(-0.0), "0");
        assert_eq!(sig(0.5), "0.5");
        assert_eq!(sig(2.0), "2");
        assert_eq!(sig(-3.25), "-3.25");
        assert_eq!(sig(50.0), "50");
        assert_eq!(sig(1.5), "1.5");
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(sig(1.0 / 3.0), "0.333333333333");
        assert_eq!(sig(2.0 / 3.0), "0.666666666667");
        assert_eq!(sig(897_608.0 / (7388.0 * 7387.0)), "0.0164471907327");
    }

    #[test]
    fn large_and_small_magnitudes() {
        assert_eq!(sig(123_456_789_012_345.0), "123456789012000");
        assert_eq!(sig(1e15), "1e15");
        assert_eq!(sig(1.25e-5), "1.25e-5");
        assert_eq!(sig(1.0e-6), "1e-6");
        assert_eq!(sig(-4.2e20), "-4.2e20");
    }

    #[test]
    fn deterministic_and_pure() {
        for &x in &[0.1, 123.456, -9.80665, 1e-9, 3.0e22] {
            assert_eq!(sig(x), sig(x));
        }
    }
}
