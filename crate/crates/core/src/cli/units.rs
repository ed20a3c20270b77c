//! Parsing of frequencies, times, bands and ranges given on the command line.

use crate::network::Band;

fn split_unit(s: &str) -> (&str, &str) {
    let s = s.trim();
    let idx = s
        .char_indices()
        .rev()
        .take_while(|(_, c)| c.is_ascii_alphabetic())
        .last()
        .map_or(s.len(), |(i, _)| i);
    // "1e9" ends in a digit, "inf" is a number, not a unit.
    let (num, unit) = s.split_at(idx);
    if num.is_empty() || num.ends_with(['e', 'E']) {
        (s, "")
    } else {
        (num.trim_end(), unit)
    }
}

fn scaled(s: &str, units: &[(&str, f64)], kind: &str) -> Result<f64, String> {
    let (num, unit) = split_unit(s);
    let value: f64 = num.parse().map_err(|_| format!("invalid {kind} '{s}'"))?;
    let mult = if unit.is_empty() {
        1.0
    } else {
        units
            .iter()
            .find(|(u, _)| u.eq_ignore_ascii_case(unit))
            .map(|&(_, m)| m)
            .ok_or_else(|| format!("unknown {kind} unit '{unit}' in '{s}'"))?
    };
    let v = value * mult;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{kind} '{s}' is not finite"))
    }
}

/// `4e9`, `4GHz`, `4.5 ghz`, `500MHz`.
pub fn parse_frequency(s: &str) -> Result<f64, String> {
    scaled(s, &[("hz", 1.0), ("khz", 1e3), ("mhz", 1e6), ("ghz", 1e9), ("thz", 1e12)], "frequency")
}

/// `5e-11`, `50ps`, `1ns`.
pub fn parse_time(s: &str) -> Result<f64, String> {
    scaled(s, &[("s", 1.0), ("ms", 1e-3), ("us", 1e-6), ("ns", 1e-9), ("ps", 1e-12), ("fs", 1e-15)], "time")
}

/// `lo:hi` in frequency units.
pub fn parse_interval(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(':').ok_or_else(|| format!("expected LO:HI, got '{s}'"))?;
    Ok((parse_frequency(lo)?, parse_frequency(hi)?))
}

/// `start:stop:step`, inclusive of `stop` when it lies on the lattice.
pub fn parse_range(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("invalid number '{p}' in range '{s}'")))
        .collect::<Result<Vec<_>, _>>()?;
    match nums.as_slice() {
        [v] if v.is_finite() => Ok(vec![*v]),
        &[start, stop, step] => {
            if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
                return Err(format!("range '{s}' needs finite start <= stop and step > 0"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n > 10_000_000 {
                return Err(format!("range '{s}' has too many points"));
            }
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        _ => Err(format!("expected START:STOP:STEP, got '{s}'")),
    }
}

/// Comma-separated list or a single range.
pub fn parse_values(s: &str) -> Result<Vec<f64>, String> {
    if s.contains(':') {
        parse_range(s)
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| format!("invalid number '{p}'")))
            .collect()
    }
}

pub fn build_band(band: Option<(f64, f64)>, exclude: &[(f64, f64)], default: Band) -> Result<Band, String> {
    match band {
        None if exclude.is_empty() => Ok(default),
        None => Band::new(default.f_lo(), default.f_hi(), exclude.to_vec()).map_err(|e| e.to_string()),
        Some((lo, hi)) => Band::new(lo, hi, exclude.to_vec()).map_err(|e| e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequencies() {
        assert_eq!(parse_frequency("4e9").unwrap(), 4e9);
        assert_eq!(parse_frequency("4GHz").unwrap(), 4e9);
        assert_eq!(parse_frequency("4.5 ghz").unwrap(), 4.5e9);
        assert_eq!(parse_frequency("500MHz").unwrap(), 5e8);
        assert_eq!(parse_frequency("1E9").unwrap(), 1e9);
        assert_eq!(parse_frequency("5.8659GHz").unwrap(), 5.8659e9);
        assert!(parse_frequency("4 parsecs").is_err());
        assert!(parse_frequency("GHz").is_err());
        assert!(parse_frequency("inf").is_err());
    }

    #[test]
    fn times() {
        assert_eq!(parse_time("50ps").unwrap(), 50e-12);
        assert_eq!(parse_time("5e-11").unwrap(), 5e-11);
        assert_eq!(parse_time("1ns").unwrap(), 1e-9);
    }

    #[test]
    fn ranges() {
        let g = parse_range("0:15:0.5").unwrap();
        assert_eq!(g.len(), 31);
        assert_eq!(g[30], 15.0);
        assert_eq!(parse_range("1:1:1").unwrap(), vec![1.0]);
        assert!(parse_range("5:1:1").is_err());
        assert!(parse_range("0:1:0").is_err());
        assert_eq!(parse_values("1,2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
    }

    #[test]
    fn bands() {
        let iv = parse_interval("4e9:8GHz").unwrap();
        assert_eq!(iv, (4e9, 8e9));
        let b = build_band(Some(iv), &[parse_interval("5.5e9:6.5e9").unwrap()], Band::amplifier_band()).unwrap();
        assert_eq!(b, Band::amplifier_band());
        assert!(build_band(Some((8e9, 4e9)), &[], Band::amplifier_band()).is_err());
    }
}
