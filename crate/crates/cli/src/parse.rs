//! Flag value parsers: scientific-notation counts, `start:step:stop`
//! ranges, bit strings and front-end specs.

use anyhow::{anyhow, bail, Context, Result};

/// Non-negative integer written plainly or in scientific notation (`1e6`).
pub fn count(s: &str) -> Result<u64> {
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().with_context(|| format!("`{s}` is not a number"))?;
    if !(v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64) {
        bail!("`{s}` is not a non-negative integer");
    }
    Ok(v as u64)
}

pub fn count_usize(s: &str) -> Result<usize> {
    Ok(usize::try_from(count(s)?)?)
}

pub fn real(s: &str) -> Result<f64> {
    let v: f64 = s.parse().with_context(|| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        bail!("`{s}` is not finite");
    }
    Ok(v)
}

/// Points of a sweep flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Points(pub Vec<f64>);

pub fn points(s: &str) -> Result<Points> {
    range(s).map(Points)
}

/// `v`, or `start:step:stop` inclusive of `stop` (to within rounding).
pub fn range(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![real(v)?]),
        [a, step, b] => {
            let (a, step, b) = (real(a)?, real(step)?, real(b)?);
            if step <= 0.0 || b < a {
                bail!("range `{s}` needs a positive step and stop ≥ start");
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            if n > 100_000 {
                bail!("range `{s}` has too many points");
            }
            Ok((0..=n).map(|i| a + step * i as f64).collect())
        }
        _ => bail!("range `{s}` must be `value` or `start:step:stop`"),
    }
}

/// String of `0`/`1` characters; whitespace and `_` are ignored.
pub fn bit_string(s: &str) -> Result<Vec<u8>> {
    s.chars()
        .filter(|c| !c.is_whitespace() && *c != '_')
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            other => Err(anyhow!("bit string contains `{other}`")),
        })
        .collect()
}

/// Hex text with optional whitespace.
pub fn hex_bytes(s: &str) -> Result<Vec<u8>> {
    let clean: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let clean = clean.strip_prefix("0x").unwrap_or(&clean);
    hex::decode(clean).context("payload is not valid hex")
}

/// Bytes to bits, most significant bit first.
pub fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    bytes.iter().flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrontEndSpec {
    Identity,
    /// Saturation is absolute, or `None` for 1.2 × RMS of the ideal signal.
    Rapp { p: f64, sat: Option<f64> },
}

pub const AUTO_SATURATION_FACTOR: f64 = 1.2;

/// `identity` or `rapp:p=<p>,sat=<auto|value>`.
pub fn front_end(s: &str) -> Result<FrontEndSpec> {
    if s == "identity" {
        return Ok(FrontEndSpec::Identity);
    }
    let body = s
        .strip_prefix("rapp")
        .ok_or_else(|| anyhow!("front end `{s}` must be `identity` or `rapp:p=..,sat=..`"))?;
    let mut p = 2.0;
    let mut sat = None;
    for kv in body.trim_start_matches(':').split(',').filter(|kv| !kv.is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("expected key=value, got `{kv}`"))?;
        match k {
            "p" => p = real(v)?,
            "sat" if v == "auto" => sat = None,
            "sat" => sat = Some(real(v)?),
            other => bail!("unknown front-end parameter `{other}`"),
        }
    }
    Ok(FrontEndSpec::Rapp { p, sat })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        assert_eq!(count("1e6").unwrap(), 1_000_000);
        assert_eq!(count("250").unwrap(), 250);
        assert!(count("1.5").is_err());
        assert!(count("-1").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(range("0:2:12").unwrap(), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0]);
        assert_eq!(range("4").unwrap(), vec![4.0]);
        assert_eq!(range("0:0.5:1").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(range("3:1:1").is_err());
        assert!(range("1:2").is_err());
    }

    #[test]
    fn bits_and_hex() {
        assert_eq!(bit_string("0001 1011").unwrap(), vec![0, 0, 0, 1, 1, 0, 1, 1]);
        assert!(bit_string("012").is_err());
        assert_eq!(hex_bytes("de ad\nbe ef").unwrap(), vec![0xde, 0xad, 0xbe, 0xef]);
        assert_eq!(bytes_to_bits(&[0xa0]), vec![1, 0, 1, 0, 0, 0, 0, 0]);
    }

    #[test]
    fn front_ends() {
        assert_eq!(front_end("rapp:p=2,sat=auto").unwrap(), FrontEndSpec::Rapp { p: 2.0, sat: None });
        assert_eq!(front_end("rapp:p=3,sat=0.5").unwrap(), FrontEndSpec::Rapp { p: 3.0, sat: Some(0.5) });
        assert_eq!(front_end("identity").unwrap(), FrontEndSpec::Identity);
        assert!(front_end("saleh").is_err());
    }
}
