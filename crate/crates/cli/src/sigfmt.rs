//! Decimal formatting with a fixed number of significant digits, in the
//! style of C's `%g`: trailing zeros trimmed, scientific notation only for
//! extreme magnitudes. Used for the results CSV so files stay compact and
//! byte-stable across runs.

/// Formats `x` with up to 10 significant digits.
pub fn sig10(x: f64) -> String {
    sig(x, 10)
}

/// Formats `x` with up to `digits` significant digits (`%.*g` semantics).
pub fn sig(x: f64, digits: usize) -> String {
    assert!(digits > 0);
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let neg = x < 0.0;
    // round to `digits` significant digits via exponent notation
    let e = format!("{:.*e}", digits - 1, x.abs());
    let (mantissa, exp) = e.split_once('e').expect("{:e} always contains an exponent");
    let exp: i32 = exp.parse().expect("{:e} exponent is an integer");
    let digits_only: String = mantissa.chars().filter(|c| *c != '.').collect();

    let body = if exp < -4 || exp >= digits as i32 {
        let trimmed = trim_zeros(&digits_only);
        let mant = if trimmed.len() == 1 {
            trimmed.to_string()
        } else {
            format!("{}.{}", &trimmed[..1], &trimmed[1..])
        };
        format!("{mant}e{exp}")
    } else if exp >= 0 {
        let point = exp as usize + 1;
        let int_part = &digits_only[..point];
        let frac = trim_zeros(&digits_only[point..]);
        if frac.is_empty() {
            int_part.to_string()
        } else {
            format!("{int_part}.{frac}")
        }
    } else {
        let frac = trim_zeros(&digits_only);
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("0.{zeros}{frac}")
    };
    if neg { format!("-{body}") } else { body }
}

fn trim_zeros(s: &str) -> &str {
    s.trim_end_matches('0')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_decimals() {
        assert_eq!(sig10(0.0), "0");
        assert_eq!(sig10(1.0), "1");
        assert_eq!(sig10(-2.5), "-2.5");
        assert_eq!(sig10(0.2), "0.2");
        assert_eq!(sig10(0.05), "0.05");
        assert_eq!(sig10(100.0), "100");
        assert_eq!(sig10(16.459333277303077), "16.45933328");
        assert_eq!(sig10(6.347642958785057), "6.347642959");
        assert_eq!(sig10(2.0574166596628847), "2.05741666");
    }

    #[test]
    fn rounding_is_half_even_at_the_cutoff() {
        assert_eq!(sig(1.25, 2), "1.2");
        assert_eq!(sig(1.35, 2), "1.4");
        assert_eq!(sig(0.999999999999, 10), "1");
    }

    #[test]
    fn extreme_magnitudes_use_exponent_notation() {
        assert_eq!(sig10(1e-12), "1e-12");
        assert_eq!(sig10(1.5e15), "1.5e15");
        assert_eq!(sig10(0.0001), "0.0001");
        assert_eq!(sig10(0.00001), "1e-5");
        assert_eq!(sig10(9999999999.0), "9999999999");
        assert_eq!(sig10(99999999999.0), "1e11");
    }

    #[test]
    fn tiny_sweep_values_survive() {
        // the values the results CSV actually carries: axis points, per-packet
        // energies, and signed percentages
        assert_eq!(sig10(0.45), "0.45");
        assert_eq!(sig10(-3.3428), "-3.3428");
        assert_eq!(sig10(87.15786979), "87.15786979");
    }
}
