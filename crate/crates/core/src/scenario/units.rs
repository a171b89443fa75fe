//! Unit-suffixed values. Byte and bit prefixes are decimal.

fn split_number(s: &str) -> Result<(f64, &str), String> {
    let s = s.trim();
    let end = s
        .char_indices()
        .find(|&(i, c)| !(c.is_ascii_digit() || c == '.' || c == '-' || c == '+' || ((c == 'e' || c == 'E') && i > 0 && s[i + 1..].starts_with(|d: char| d.is_ascii_digit() || d == '-' || d == '+'))))
        .map_or(s.len(), |(i, _)| i);
    let (num, unit) = s.split_at(end);
    let value: f64 = num
        .parse()
        .map_err(|_| format!("'{s}' does not start with a number"))?;
    if !value.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok((value, unit.trim()))
}

/// Seconds from `100ms`, `1.5s`, `250us` or a bare number of seconds.
pub fn parse_secs(s: &str) -> Result<f64, String> {
    let (v, unit) = split_number(s)?;
    let scale = match unit {
        "" | "s" => 1.0,
        "ms" => 1e-3,
        "us" => 1e-6,
        "ns" => 1e-9,
        "min" => 60.0,
        _ => return Err(format!("unknown time unit '{unit}'")),
    };
    Ok(v * scale)
}

pub fn is_time(s: &str) -> bool {
    split_number(s).is_ok_and(|(_, u)| matches!(u, "s" | "ms" | "us" | "ns" | "min"))
}

/// Bytes from `1500B`, `150kB`, `1.25MB`, `1GB` or a bare byte count.
pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let (v, unit) = split_number(s)?;
    let scale = match unit {
        "" | "B" => 1.0,
        "kB" | "KB" => 1e3,
        "MB" => 1e6,
        "GB" => 1e9,
        _ => return Err(format!("unknown size unit '{unit}'")),
    };
    let bytes = v * scale;
    let rounded = bytes.round();
    if bytes < 0.0 || (bytes - rounded).abs() > 1e-6 * rounded.max(1.0) {
        return Err(format!("'{s}' is not a whole number of bytes"));
    }
    Ok(rounded as u64)
}

pub fn is_bytes(s: &str) -> bool {
    split_number(s).is_ok_and(|(_, u)| matches!(u, "B" | "kB" | "KB" | "MB" | "GB"))
}

/// Bytes per second from `100Mbit`, `10kbit/s`, `1Gbit`, `12500000B/s` or a
/// bare number of bits per second.
pub fn parse_rate(s: &str) -> Result<f64, String> {
    let (v, unit) = split_number(s)?;
    let unit = unit.strip_suffix("/s").unwrap_or(unit);
    let bits = match unit {
        "" | "bit" | "bps" => 1.0,
        "kbit" | "kbps" => 1e3,
        "Mbit" | "Mbps" => 1e6,
        "Gbit" | "Gbps" => 1e9,
        "B" => return Ok(v),
        "kB" => return Ok(v * 1e3),
        "MB" => return Ok(v * 1e6),
        _ => return Err(format!("unknown rate unit '{unit}'")),
    };
    Ok(v * bits / 8.0)
}

pub fn format_secs(v: f64) -> String {
    format!("{v}s")
}

pub fn format_bytes(v: u64) -> String {
    format!("{v}B")
}

/// Rates print in bits per second; scaling by eight is exact in binary.
pub fn format_rate(bytes_per_sec: f64) -> String {
    format!("{}bit", bytes_per_sec * 8.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn times() {
        assert_eq!(parse_secs("100ms"), Ok(0.1));
        assert_eq!(parse_secs("2s"), Ok(2.0));
        assert_eq!(parse_secs(" 30 "), Ok(30.0));
        assert_eq!(parse_secs("250us"), Ok(0.00025));
        assert!(parse_secs("5 parsecs").is_err());
        assert!(parse_secs("ms").is_err());
    }

    #[test]
    fn sizes() {
        assert_eq!(parse_bytes("1500B"), Ok(1500));
        assert_eq!(parse_bytes("150kB"), Ok(150_000));
        assert_eq!(parse_bytes("1.25MB"), Ok(1_250_000));
        assert_eq!(parse_bytes("1500"), Ok(1500));
        assert!(parse_bytes("1.5B").is_err());
        assert!(parse_bytes("-3B").is_err());
    }

    #[test]
    fn rates() {
        assert_eq!(parse_rate("100Mbit"), Ok(12_500_000.0));
        assert_eq!(parse_rate("10Mbit/s"), Ok(1_250_000.0));
        assert_eq!(parse_rate("1Gbit"), Ok(125_000_000.0));
        assert_eq!(parse_rate("8000"), Ok(1000.0));
        assert_eq!(parse_rate("1000B/s"), Ok(1000.0));
        assert!(parse_rate("3 furlongs").is_err());
    }

    #[test]
    fn exponent_notation() {
        assert_eq!(parse_secs("1e-3s"), Ok(0.001));
        assert_eq!(parse_rate("1e8bit"), Ok(12_500_000.0));
    }

    #[test]
    fn threshold_kind_detection() {
        assert!(is_time("10ms"));
        assert!(!is_time("10MB"));
        assert!(is_bytes("1MB"));
        assert!(!is_bytes("10"));
    }

    proptest! {
        #[test]
        fn formatted_values_parse_back(secs in 0.0f64..1e6, bytes in 0u64..1u64 << 50, rate in 1.0f64..1e12) {
            prop_assert_eq!(parse_secs(&format_secs(secs)), Ok(secs));
            prop_assert_eq!(parse_bytes(&format_bytes(bytes)), Ok(bytes));
            prop_assert_eq!(parse_rate(&format_rate(rate)), Ok(rate));
        }
    }
}
