//! Self-describing text bundles that reproduce a finding exactly.
//!
//! ```text
//! distill-lab-bundle 1
//! kind rank2-violation
//! d 3
//! n 2
//! beta -0x1p-1
//! seed 12345
//! value 0x1.4p-30
//! scalar sigma1 0x1.6a09e667f3bcdp-1
//! vector u1 9
//! 0x1.8p-2 -0x1p-3
//! ...
//! end
//! ```
//!
//! Every float is a C99-style hexadecimal literal, so values round-trip
//! bit for bit. Vector entries are one `re im` pair per line in row-major
//! order. Lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub const BUNDLE_MAGIC: &str = "distill-lab-bundle";
pub const BUNDLE_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ReproBundle {
    pub kind: String,
    pub d: usize,
    pub n: usize,
    pub beta: f64,
    pub seed: u64,
    /// The offending value (a negative functional, a positive slack, ...).
    pub value: f64,
    pub scalars: Vec<(String, f64)>,
    pub vectors: Vec<(String, Vec<Complex64>)>,
}

impl ReproBundle {
    pub fn new(kind: &str, d: usize, n: usize, beta: f64, seed: u64, value: f64) -> Self {
        ReproBundle {
            kind: kind.to_string(),
            d,
            n,
            beta,
            seed,
            value,
            scalars: Vec::new(),
            vectors: Vec::new(),
        }
    }

    pub fn with_scalar(mut self, name: &str, v: f64) -> Self {
        self.scalars.push((name.to_string(), v));
        self
    }

    pub fn with_vector(mut self, name: &str, v: Vec<Complex64>) -> Self {
        self.vectors.push((name.to_string(), v));
        self
    }

    pub fn with_real_vector(self, name: &str, v: &[f64]) -> Self {
        self.with_vector(name, v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(k, _)| k == name).map(|(_, v)| *v)
    }

    pub fn vector(&self, name: &str) -> Option<&[Complex64]> {
        self.vectors.iter().find(|(k, _)| k == name).map(|(_, v)| v.as_slice())
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{BUNDLE_MAGIC} {BUNDLE_VERSION}");
        let _ = writeln!(s, "kind {}", self.kind);
        let _ = writeln!(s, "d {}", self.d);
        let _ = writeln!(s, "n {}", self.n);
        let _ = writeln!(s, "beta {}", format_hex(self.beta));
        let _ = writeln!(s, "seed {}", self.seed);
        let _ = writeln!(s, "value {}", format_hex(self.value));
        for (k, v) in &self.scalars {
            let _ = writeln!(s, "scalar {k} {}", format_hex(*v));
        }
        for (k, v) in &self.vectors {
            let _ = writeln!(s, "vector {k} {}", v.len());
            for z in v {
                let _ = writeln!(s, "{} {}", format_hex(z.re), format_hex(z.im));
            }
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let mut next = |what: &str| {
            lines
                .next()
                .ok_or_else(|| Error::Parse(format!("unexpected end of bundle, expected {what}")))
        };
        let header = next("header")?;
        if header != format!("{BUNDLE_MAGIC} {BUNDLE_VERSION}") {
            return Err(Error::Parse(format!("unrecognized bundle header {header:?}")));
        }
        let field = |line: &str, key: &str| -> Result<String> {
            line.strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .map(str::to_string)
                .ok_or_else(|| Error::Parse(format!("expected `{key} ...`, got {line:?}")))
        };
        let int = |s: String| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse(format!("bad integer {s:?}")))
        };
        let kind = field(next("kind")?, "kind")?;
        let d = int(field(next("d")?, "d")?)? as usize;
        let n = int(field(next("n")?, "n")?)? as usize;
        let beta = parse_hex(&field(next("beta")?, "beta")?)?;
        let seed = int(field(next("seed")?, "seed")?)?;
        let value = parse_hex(&field(next("value")?, "value")?)?;
        let mut b = ReproBundle::new(&kind, d, n, beta, seed, value);
        loop {
            let line = next("`end`")?;
            if line == "end" {
                return Ok(b);
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["scalar", name, v] => b.scalars.push((name.to_string(), parse_hex(v)?)),
                ["vector", name, len] => {
                    let len = int(len.to_string())? as usize;
                    let mut v = Vec::with_capacity(len);
                    for _ in 0..len {
                        let pair: Vec<&str> = next("vector entry")?.split_whitespace().collect();
                        match pair.as_slice() {
                            [re, im] => v.push(Complex64::new(parse_hex(re)?, parse_hex(im)?)),
                            _ => return Err(Error::Parse(format!("bad vector entry {pair:?}"))),
                        }
                    }
                    b.vectors.push((name.to_string(), v));
                }
                _ => return Err(Error::Parse(format!("unexpected line {line:?}"))),
            }
        }
    }

    /// Conventional file name, unique per kind, seed and index.
    pub fn file_name(&self, index: usize) -> String {
        format!("{}-{:016x}-{index:05}.bundle", self.kind, self.seed)
    }

    pub fn write_to_dir(&self, dir: &Path, index: usize) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name(index));
        std::fs::write(&path, self.to_text())?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Hexadecimal float literal, e.g. `-0x1.8p+1` for -3.
pub fn format_hex(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sign = if x.is_sign_negative() { "-" } else { "" };
    let bits = x.to_bits();
    let exp = ((bits >> 52) & 0x7ff) as i64;
    let mant = bits & ((1u64 << 52) - 1);
    if exp == 0 && mant == 0 {
        return format!("{sign}0x0p+0");
    }
    let (lead, e) = if exp == 0 { (0, -1022) } else { (1, exp - 1023) };
    let frac = format!("{mant:013x}");
    let frac = frac.trim_end_matches('0');
    if frac.is_empty() {
        format!("{sign}0x{lead}p{e:+}")
    } else {
        format!("{sign}0x{lead}.{frac}p{e:+}")
    }
}

/// Inverse of [`format_hex`]; also accepts plain decimal literals.
pub fn parse_hex(s: &str) -> Result<f64> {
    let bad = || Error::Parse(format!("bad float literal {s:?}"));
    match s {
        "nan" => return Ok(f64::NAN),
        "inf" => return Ok(f64::INFINITY),
        "-inf" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let Some(hex) = body.strip_prefix("0x").or_else(|| body.strip_prefix("0X")) else {
        return s.parse::<f64>().map_err(|_| bad());
    };
    let (mantissa, exp) = hex.split_once(['p', 'P']).ok_or_else(bad)?;
    let exp: i64 = exp.parse().map_err(|_| bad())?;
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits.len() > 15 {
        return Err(bad());
    }
    let m = u64::from_str_radix(&digits, 16).map_err(|_| bad())?;
    let mut v = m as f64;
    let mut e = exp - 4 * frac_part.len() as i64;
    // exact power-of-two scaling in steps that stay in the normal range
    while e != 0 {
        let step = e.clamp(-1000, 1000);
        v *= 2f64.powi(step as i32);
        e -= step;
    }
    Ok(if neg { -v } else { v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn known_literals() {
        assert_eq!(format_hex(1.0), "0x1p+0");
        assert_eq!(format_hex(-3.0), "-0x1.8p+1");
        assert_eq!(format_hex(0.5), "0x1p-1");
        assert_eq!(format_hex(0.0), "0x0p+0");
        assert_eq!(format_hex(-0.0), "-0x0p+0");
        assert_eq!(format_hex(f64::MIN_POSITIVE / 4.0), "0x0.4p-1022");
        assert_eq!(parse_hex("0x1.8p+1").unwrap(), 3.0);
        assert_eq!(parse_hex("-0x1p-1").unwrap(), -0.5);
        assert_eq!(parse_hex("0.25").unwrap(), 0.25);
        assert!(parse_hex("0x1.zp+0").is_err());
        assert!(parse_hex("0x1.8").is_err());
    }

    #[test]
    fn extremes_round_trip() {
        for x in [f64::MAX, f64::MIN_POSITIVE, 5e-324, -5e-324, f64::EPSILON, 1.0 / 3.0] {
            assert_eq!(parse_hex(&format_hex(x)).unwrap().to_bits(), x.to_bits());
        }
        assert!(parse_hex(&format_hex(f64::NAN)).unwrap().is_nan());
        assert_eq!(parse_hex(&format_hex(f64::NEG_INFINITY)).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn bundle_round_trip() {
        let b = ReproBundle::new("rank2-violation", 3, 2, -0.5, 42, 1.0 / 7.0)
            .with_scalar("sigma1", 0.6)
            .with_vector("u1", vec![Complex64::new(0.1, -0.2), Complex64::new(1e-300, 3.5)])
            .with_real_vector("w", &[1.0, -2.0]);
        let text = b.to_text();
        assert!(text.starts_with("distill-lab-bundle 1\nkind rank2-violation\n"));
        let back = ReproBundle::parse(&text).unwrap();
        assert_eq!(back, b);
        assert_eq!(back.scalar("sigma1"), Some(0.6));
        assert_eq!(back.vector("w").unwrap()[1].re, -2.0);

        let dir = tempfile::tempdir().unwrap();
        let path = b.write_to_dir(dir.path(), 3).unwrap();
        assert_eq!(ReproBundle::read(&path).unwrap(), b);
    }

    #[test]
    fn malformed_bundles_are_rejected() {
        assert!(ReproBundle::parse("").is_err());
        assert!(ReproBundle::parse("distill-lab-bundle 2\n").is_err());
        let b = ReproBundle::new("x", 2, 1, 0.0, 0, 0.0).with_vector("v", vec![Complex64::new(1.0, 0.0)]);
        let text = b.to_text().replace("vector v 1", "vector v 2");
        assert!(ReproBundle::parse(&text).is_err());
        let text = b.to_text().replace("\nend\n", "\n");
        assert!(ReproBundle::parse(&text).is_err());
    }

    proptest! {
        #[test]
        fn hex_round_trips_bits(bits in any::<u64>()) {
            let x = f64::from_bits(bits);
            let y = parse_hex(&format_hex(x)).unwrap();
            if x.is_nan() {
                prop_assert!(y.is_nan());
            } else {
                prop_assert_eq!(y.to_bits(), x.to_bits());
            }
        }
    }
}
