//! System parameters, bit budget and bit-stream partitioning for one cluster.
//!
//! A cluster has `n` subcarriers of which `k` are active. Each transmission
//! carries `p = p1 + p2 + p3` bits: `p1` select the active-subcarrier tuple,
//! `p2` select the spreading code and `p3` select the PSK symbol. Bits are
//! ordered SI first, then code, then M-ary.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Largest cluster size supported; index sets are stored as `u32` masks.
pub const MAX_SUBCARRIERS: usize = 32;

/// How the subcarrier-index family is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MapperKind {
    /// First `2^p1` subsets in combinatorial-number-system order.
    Combinatorial,
    /// Reduced family of `2^sisr_p1` tuples chosen for diversity.
    Sisr,
    /// Balanced family with per-tuple index reordering.
    #[default]
    Osi,
}

impl FromStr for MapperKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "comb" | "combinatorial" => Ok(Self::Combinatorial),
            "sisr" => Ok(Self::Sisr),
            "osi" => Ok(Self::Osi),
            other => Err(Error::Parse(format!("unknown mapper '{other}'"))),
        }
    }
}

impl fmt::Display for MapperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Combinatorial => "comb",
            Self::Sisr => "sisr",
            Self::Osi => "osi",
        })
    }
}

/// Pairwise score used when reordering indices inside SI tuples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OsiMetric {
    /// Count of positions holding different subcarrier indices.
    Positional,
    /// Minimum number of differing subcarriers over every code/symbol pair
    /// the two tuples can carry, with the positional count as tie-break.
    #[default]
    Diversity,
}

impl FromStr for OsiMetric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "positional" | "omega" => Ok(Self::Positional),
            "diversity" => Ok(Self::Diversity),
            other => Err(Error::Parse(format!("unknown OSI metric '{other}'"))),
        }
    }
}

impl fmt::Display for OsiMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Positional => "positional",
            Self::Diversity => "diversity",
        })
    }
}

/// Raw, unvalidated system parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub zc_d: i64,
    pub zc_u: i64,
    pub mapper: MapperKind,
    pub rotation: bool,
    /// SI bits kept by the SISR mapper; defaults to one less than the full budget.
    pub sisr_p1: Option<u32>,
    pub osi_metric: OsiMetric,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n: 4,
            k: 2,
            m: 2,
            zc_d: 1,
            zc_u: 0,
            mapper: MapperKind::default(),
            rotation: true,
            sisr_p1: None,
            osi_metric: OsiMetric::default(),
        }
    }
}

impl SystemConfig {
    pub fn new(n: usize, k: usize, m: usize) -> Self {
        Self {
            n,
            k,
            m,
            ..Self::default()
        }
    }

    pub fn with_mapper(mut self, mapper: MapperKind) -> Self {
        self.mapper = mapper;
        self
    }

    /// Checks every parameter invariant and attaches the bit budget.
    pub fn validate(&self) -> Result<CheckedConfig> {
        let (n, k, m) = (self.n, self.k, self.m);
        if n < 2 {
            return Err(Error::Config(format!("N must be at least 2, got {n}")));
        }
        if n > MAX_SUBCARRIERS {
            return Err(Error::Config(format!(
                "N must be at most {MAX_SUBCARRIERS}, got {n}"
            )));
        }
        if k == 0 || k > n {
            return Err(Error::Config(format!(
                "K must satisfy 1 <= K <= N, got K={k}, N={n}"
            )));
        }
        if m < 2 || !m.is_power_of_two() {
            return Err(Error::Config(format!(
                "M must be a power of two >= 2, got {m}"
            )));
        }
        if gcd(self.zc_d.unsigned_abs(), k as u64) != 1 {
            return Err(Error::Config(format!(
                "ZC root d={} must be relatively prime to K={k}",
                self.zc_d
            )));
        }
        let b = (m * k) as u64 - 1;
        if b < 1 {
            return Err(Error::Config(
                "rotation denominator MK-1 must be >= 1".into(),
            ));
        }
        if self.rotation && (gcd(b, 2) != 1 || gcd(b, (m * k) as u64) != 1) {
            return Err(Error::Config(format!(
                "rotation denominator {b} is not coprime to 2MK"
            )));
        }

        let full_p1 = floor_log2(binomial(n, k));
        let p1 = match self.mapper {
            MapperKind::Sisr => {
                let target = self.sisr_p1.unwrap_or(full_p1.saturating_sub(1));
                if target == 0 || target >= full_p1 {
                    return Err(Error::Config(format!(
                        "SISR needs 1 <= p1 < {full_p1}, got {target}"
                    )));
                }
                target
            }
            _ => full_p1,
        };
        let budget = BitBudget {
            p1,
            p2: floor_log2(k as u64),
            p3: m.trailing_zeros(),
        };
        if budget.total() > 62 {
            return Err(Error::Config(format!(
                "{} bits per cluster exceeds the supported 62",
                budget.total()
            )));
        }
        Ok(CheckedConfig {
            config: self.clone(),
            budget,
        })
    }

    /// Applies `key=value` lines on top of `self`. Blank lines and `#` comments
    /// are ignored.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", lineno + 1)))?;
            let key = key.trim().to_ascii_lowercase().replace('-', "_");
            let value = value.trim();
            let bad =
                |what: &str| Error::Parse(format!("line {}: bad {what} '{value}'", lineno + 1));
            match key.as_str() {
                "n" => self.n = value.parse().map_err(|_| bad("n"))?,
                "k" => self.k = value.parse().map_err(|_| bad("k"))?,
                "m" => self.m = value.parse().map_err(|_| bad("m"))?,
                "zc_d" => self.zc_d = value.parse().map_err(|_| bad("zc_d"))?,
                "zc_u" => self.zc_u = value.parse().map_err(|_| bad("zc_u"))?,
                "mapper" => self.mapper = value.parse()?,
                "osi_metric" => self.osi_metric = value.parse()?,
                "sisr_p1" => self.sisr_p1 = Some(value.parse().map_err(|_| bad("sisr_p1"))?),
                "rotation" => self.rotation = parse_bool(value).ok_or_else(|| bad("rotation"))?,
                "no_rotation" => {
                    self.rotation = !parse_bool(value).ok_or_else(|| bad("no_rotation"))?
                }
                other => {
                    return Err(Error::Parse(format!(
                        "line {}: unknown key '{other}'",
                        lineno + 1
                    )))
                }
            }
        }
        Ok(())
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Some(true),
        "0" | "false" | "no" | "off" => Some(false),
        _ => None,
    }
}

/// Bits carried per cluster in each of the three domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitBudget {
    pub p1: u32,
    pub p2: u32,
    pub p3: u32,
}

impl BitBudget {
    pub fn total(&self) -> u32 {
        self.p1 + self.p2 + self.p3
    }

    /// Splits an MSB-first word of `total()` bits into (SI, code, M-ary) fields.
    pub fn split_word(&self, word: u64) -> (u64, u64, u64) {
        let mary = word & mask(self.p3);
        let code = (word >> self.p3) & mask(self.p2);
        let si = (word >> (self.p2 + self.p3)) & mask(self.p1);
        (si, code, mary)
    }

    pub fn join_word(&self, si: u64, code: u64, mary: u64) -> u64 {
        (si << (self.p2 + self.p3)) | (code << self.p3) | mary
    }

    /// Positional split of a bit slice: SI bits first, then code, then M-ary.
    pub fn split_bits<'a>(&self, bits: &'a [bool]) -> Result<(&'a [bool], &'a [bool], &'a [bool])> {
        let p = self.total() as usize;
        if bits.len() != p {
            return Err(Error::BitLength {
                expected: p,
                actual: bits.len(),
            });
        }
        let (si, rest) = bits.split_at(self.p1 as usize);
        let (code, mary) = rest.split_at(self.p2 as usize);
        Ok((si, code, mary))
    }

    pub fn join_bits(&self, si: &[bool], code: &[bool], mary: &[bool]) -> Result<Vec<bool>> {
        for (field, want) in [(si, self.p1), (code, self.p2), (mary, self.p3)] {
            if field.len() != want as usize {
                return Err(Error::BitLength {
                    expected: want as usize,
                    actual: field.len(),
                });
            }
        }
        Ok([si, code, mary].concat())
    }
}

fn mask(bits: u32) -> u64 {
    if bits == 0 {
        0
    } else {
        u64::MAX >> (64 - bits)
    }
}

/// A validated configuration together with its bit budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckedConfig {
    pub config: SystemConfig,
    pub budget: BitBudget,
}

impl CheckedConfig {
    pub fn n(&self) -> usize {
        self.config.n
    }

    pub fn k(&self) -> usize {
        self.config.k
    }

    pub fn m(&self) -> usize {
        self.config.m
    }

    /// Rotation denominator `MK - 1`.
    pub fn rotation_denominator(&self) -> u64 {
        (self.config.m * self.config.k) as u64 - 1
    }

    /// Bits per second per hertz: `p / N`.
    pub fn spectral_efficiency(&self) -> f64 {
        self.budget.total() as f64 / self.config.n as f64
    }
}

/// Interprets an MSB-first bit slice as an integer.
pub fn bits_to_word(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

/// MSB-first bit expansion of the low `width` bits of `word`.
pub fn word_to_bits(word: u64, width: u32) -> Vec<bool> {
    (0..width).rev().map(|i| (word >> i) & 1 == 1).collect()
}

/// Parses a string of `0`/`1` characters, ignoring `_` and whitespace.
pub fn parse_bit_string(s: &str) -> Result<Vec<bool>> {
    s.chars()
        .filter(|c| *c != '_' && !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            other => Err(Error::Parse(format!("invalid bit '{other}'"))),
        })
        .collect()
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `floor(log2(x))` for `x >= 1`.
pub fn floor_log2(x: u64) -> u32 {
    debug_assert!(x >= 1);
    63 - x.leading_zeros()
}
