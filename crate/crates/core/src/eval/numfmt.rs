/// Shortest decimal text that parses back to the same `f64`; integral values
/// have no decimal point and negative zero prints as `0`.
pub fn num_to_str(n: f64) -> String {
    if n == 0.0 {
        return "0".to_string();
    }
    // `Display` for f64 is shortest-round-trip and never uses exponent notation.
    format!("{n}")
}

/// Renders `n` with exactly `decimals` fractional digits, rounding half away
/// from zero on the shortest decimal representation of `n`.
pub fn format_fixed(n: f64, decimals: usize) -> String {
    if !n.is_finite() {
        return num_to_str(n);
    }
    let text = num_to_str(n.abs());
    let (int_part, frac_part) = text.split_once('.').unwrap_or((&text, ""));
    let mut digits: Vec<u8> = int_part.bytes().map(|b| b - b'0').collect();
    let int_len = digits.len();
    let frac: Vec<u8> = frac_part.bytes().map(|b| b - b'0').collect();
    digits.extend(frac.iter().take(decimals));
    digits.resize(int_len + decimals, 0);

    if frac.get(decimals).is_some_and(|&d| d >= 5) {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, 1);
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }

    let split = digits.len() - decimals;
    let mut out = String::new();
    if n < 0.0 && digits.iter().any(|&d| d != 0) {
        out.push('-');
    }
    out.extend(digits[..split].iter().map(|d| char::from(b'0' + d)));
    if decimals > 0 {
        out.push('.');
        out.extend(digits[split..].iter().map(|d| char::from(b'0' + d)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent oracle: exact decimal arithmetic on scaled integers.
    fn half_up_oracle(text: &str, decimals: u32) -> String {
        let neg = text.starts_with('-');
        let body = text.trim_start_matches('-');
        let (i, f) = body.split_once('.').unwrap_or((body, ""));
        let scale = f.len() as u32;
        let units: u128 = format!("{i}{f}").parse().unwrap();
        let rounded = if scale > decimals {
            let div = 10u128.pow(scale - decimals);
            (units + div / 2) / div
        } else {
            units * 10u128.pow(decimals - scale)
        };
        let s = format!("{:0width$}", rounded, width = decimals as usize + 1);
        let (a, b) = s.split_at(s.len() - decimals as usize);
        let mut out = String::new();
        if neg && rounded != 0 {
            out.push('-');
        }
        out.push_str(a);
        if decimals > 0 {
            out.push('.');
            out.push_str(b);
        }
        out
    }

    #[test]
    fn integers_have_no_point() {
        assert_eq!(num_to_str(3.0), "3");
        assert_eq!(num_to_str(-0.0), "0");
        assert_eq!(num_to_str(91.57), "91.57");
        assert_eq!(num_to_str(1e21), "1000000000000000000000");
    }

    #[test]
    fn fixed_decimals() {
        assert_eq!(format_fixed(52.8, 2), "52.80");
        assert_eq!(format_fixed(91.174, 2), "91.17");
        assert_eq!(format_fixed(2.675, 2), "2.68");
        assert_eq!(format_fixed(9.995, 2), "10.00");
        assert_eq!(format_fixed(-1.005, 2), "-1.01");
        assert_eq!(format_fixed(-0.001, 2), "0.00");
        assert_eq!(format_fixed(7.0, 0), "7");
        assert_eq!(format_fixed(0.5, 0), "1");
    }

    #[test]
    fn fixed_decimals_agree_with_scaled_integer_oracle() {
        let samples = ["91.174", "52.8", "0.125", "13.505", "99.999", "1234.5678", "-3.14159", "0.004"];
        for s in samples {
            let n: f64 = s.parse().unwrap();
            for d in 0..5 {
                assert_eq!(format_fixed(n, d as usize), half_up_oracle(&num_to_str(n), d), "{s} to {d}");
            }
        }
    }
}
