//! Flag-value parsers: scheme grammar, sweep ranges, complex amplitudes and
//! the key=value config files that mirror every flag.

use std::collections::HashMap;
use std::str::FromStr;

use cvghz::ghz::{Mode, OpKind};
use cvghz::GridRange;
use num_complex::Complex64;

/// Photon-operation scheme: one kind applied to a set of modes, e.g.
/// `sub:A,C`, `add:B`, or `none` for the bare state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemeSpec {
    pub kind: Option<OpKind>,
    pub modes: Vec<Mode>,
}

impl SchemeSpec {
    pub fn none() -> Self {
        Self {
            kind: None,
            modes: Vec::new(),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            None => "none".into(),
            Some(kind) => {
                let tag = match kind {
                    OpKind::Subtract => "sub",
                    OpKind::Add => "add",
                };
                let modes: Vec<String> = self.modes.iter().map(|m| m.to_string()).collect();
                format!("{tag}:{}", modes.join(","))
            }
        }
    }
}

impl FromStr for SchemeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("none") {
            return Ok(Self::none());
        }
        let (kind_str, modes_str) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `sub:MODES`, `add:MODES` or `none`, got `{s}`"))?;
        let kind = match kind_str {
            "sub" => OpKind::Subtract,
            "add" => OpKind::Add,
            other => return Err(format!("unknown operation `{other}` (use `sub` or `add`)")),
        };
        let mut modes = Vec::new();
        for part in modes_str.split(',') {
            let mode = parse_mode(part)?;
            if modes.contains(&mode) {
                return Err(format!("mode {mode} listed twice"));
            }
            modes.push(mode);
        }
        if modes.is_empty() {
            return Err("scheme needs at least one mode".into());
        }
        Ok(Self {
            kind: Some(kind),
            modes,
        })
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.trim() {
        "A" | "a" => Ok(Mode::A),
        "B" | "b" => Ok(Mode::B),
        "C" | "c" => Ok(Mode::C),
        other => Err(format!("unknown mode `{other}` (use A, B or C)")),
    }
}

/// `min:max:steps` with an integer point count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeSpec(pub GridRange);

impl FromStr for RangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected `min:max:steps`, got `{s}`"));
        }
        let min: f64 = parts[0].parse().map_err(|e| format!("bad min: {e}"))?;
        let max: f64 = parts[1].parse().map_err(|e| format!("bad max: {e}"))?;
        let steps: usize = parts[2].parse().map_err(|e| format!("bad steps: {e}"))?;
        GridRange::new(min, max, steps)
            .map(RangeSpec)
            .map_err(|e| e.to_string())
    }
}

/// `min:max:step` with a float step, inclusive of both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRangeSpec {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl StepRangeSpec {
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step).round() as usize;
        (0..=n).map(|k| self.min + self.step * k as f64).collect()
    }
}

impl FromStr for StepRangeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("expected `min:max:step`, got `{s}`"));
        }
        let min: f64 = parts[0].parse().map_err(|e| format!("bad min: {e}"))?;
        let max: f64 = parts[1].parse().map_err(|e| format!("bad max: {e}"))?;
        let step: f64 = parts[2].parse().map_err(|e| format!("bad step: {e}"))?;
        if !(min < max) || !(step > 0.0) {
            return Err(format!("grid needs min < max and step > 0, got `{s}`"));
        }
        Ok(Self { min, max, step })
    }
}

/// `A,C`-style mode pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairSpec(pub Mode, pub Mode);

impl FromStr for PairSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| format!("expected `M,M` pair, got `{s}`"))?;
        let (a, b) = (parse_mode(a)?, parse_mode(b)?);
        if a == b {
            return Err("pair needs two distinct modes".into());
        }
        Ok(Self(a, b))
    }
}

/// Coherent amplitudes in the forms `1`, `-0.5`, `2+3i`, `1-0.5i`, `3i`, `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexSpec(pub Complex64);

impl FromStr for ComplexSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().replace(' ', "");
        let err = || format!("cannot parse complex amplitude `{s}`");
        if let Some(im_part) = s.strip_suffix(['i', 'j']) {
            // Split the imaginary suffix from an optional real part at the
            // last +/- that is not an exponent sign or leading sign.
            let bytes = im_part.as_bytes();
            let mut split = None;
            for k in (1..bytes.len()).rev() {
                let c = bytes[k] as char;
                if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
                    split = Some(k);
                    break;
                }
            }
            match split {
                Some(k) => {
                    let re: f64 = im_part[..k].parse().map_err(|_| err())?;
                    let im_str = &im_part[k..];
                    let im: f64 = if im_str == "+" {
                        1.0
                    } else if im_str == "-" {
                        -1.0
                    } else {
                        im_str.parse().map_err(|_| err())?
                    };
                    Ok(Self(Complex64::new(re, im)))
                }
                None => {
                    let im: f64 = if im_part.is_empty() {
                        1.0
                    } else if im_part == "-" {
                        -1.0
                    } else {
                        im_part.parse().map_err(|_| err())?
                    };
                    Ok(Self(Complex64::new(0.0, im)))
                }
            }
        } else {
            let re: f64 = s.parse().map_err(|_| err())?;
            Ok(Self(Complex64::new(re, 0.0)))
        }
    }
}

/// key=value file mirroring the long flags; `#` starts a comment.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn load(path: &str) -> Result<Self, String> {
        let text =
            std::fs::read_to_string(path).map_err(|e| format!("cannot read `{path}`: {e}"))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{path}:{}: expected key=value", lineno + 1))?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    /// Fills `slot` from the config when the command line left it empty.
    pub fn fill<T: FromStr>(&self, slot: &mut Option<T>, key: &str) -> Result<(), String>
    where
        T::Err: std::fmt::Display,
    {
        if slot.is_none() {
            if let Some(raw) = self.values.get(key) {
                *slot = Some(
                    raw.parse()
                        .map_err(|e| format!("config key `{key}`: {e}"))?,
                );
            }
        }
        Ok(())
    }
}
