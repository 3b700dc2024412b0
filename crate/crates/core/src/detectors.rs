//! Receivers for one cluster: exhaustive ML, near-ML, and LLR-MRC.
//!
//! All detectors work from the receiver's channel estimate `h_hat`. Every
//! argmin breaks ties toward the lowest enumeration index (SI tuple, then
//! code, then symbol). Each detector tallies real floating-point operations
//! (one add, subtract, multiply or divide each) so that its cost can be
//! checked against the closed-form complexity model; quantisation and
//! sorting are not counted.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index_maps::{set_mask, SiTuple};
use crate::modem::Modem;
use crate::sysconfig::MAX_SUBCARRIERS;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Ml,
    NearMl,
    LlrMrc,
}

impl DetectorKind {
    pub const ALL: [DetectorKind; 3] = [Self::Ml, Self::NearMl, Self::LlrMrc];
}

impl FromStr for DetectorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "ml" => Ok(Self::Ml),
            "near-ml" | "nearml" => Ok(Self::NearMl),
            "llr-mrc" | "llrmrc" | "llr" => Ok(Self::LlrMrc),
            other => Err(Error::Parse(format!("unknown detector '{other}'"))),
        }
    }
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ml => "ml",
            Self::NearMl => "near-ml",
            Self::LlrMrc => "llr-mrc",
        })
    }
}

/// Points an active subcarrier is matched against when scoring its activity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LlrAlphabet {
    /// Every chip value `c_k[i] * s` an active subcarrier can carry.
    #[default]
    Spread,
    /// The bare PSK constellation.
    Psk,
}

impl FromStr for LlrAlphabet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "spread" => Ok(Self::Spread),
            "psk" => Ok(Self::Psk),
            other => Err(Error::Parse(format!("unknown LLR alphabet '{other}'"))),
        }
    }
}

/// Estimated hypothesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub si_index: usize,
    pub code_index: usize,
    pub mary_index: usize,
    /// `||y - H_hat x_hat||^2` of the returned hypothesis.
    pub metric: f64,
    /// LLR-MRC only: the top-K set was not in the family and the
    /// replacement cascade (or the final fallback) chose the tuple.
    pub replaced: bool,
}

impl Detection {
    pub fn theta<'a>(&self, modem: &'a Modem) -> &'a SiTuple {
        modem.family().get(self.si_index)
    }

    pub fn word(&self, modem: &Modem) -> u64 {
        modem.hypothesis_word(self.si_index, self.code_index, self.mary_index)
    }
}

/// Unit-modulus points sorted by phase, for nearest-point lookup.
#[derive(Debug, Clone)]
struct UnitAlphabet {
    phases: Vec<f64>,
    points: Vec<Complex64>,
}

impl UnitAlphabet {
    fn new(mut pts: Vec<Complex64>) -> Self {
        pts.sort_by(|a, b| a.arg().total_cmp(&b.arg()));
        pts.dedup_by(|a, b| (*a - *b).norm_sqr() < 1e-24);
        Self {
            phases: pts.iter().map(|p| p.arg()).collect(),
            points: pts,
        }
    }

    /// Maximum of `Re(z conj(x))` over the alphabet.
    fn best_correlation(&self, z: Complex64) -> f64 {
        let len = self.points.len();
        let at = self.phases.partition_point(|&p| p < z.arg());
        let hi = self.points[at % len];
        let lo = self.points[(at + len - 1) % len];
        (z * hi.conj()).re.max((z * lo.conj()).re)
    }
}

/// A detector bound to one modem's tables.
#[derive(Debug, Clone)]
pub struct Detector {
    kind: DetectorKind,
    alphabet: UnitAlphabet,
}

impl Detector {
    pub fn new(kind: DetectorKind, modem: &Modem) -> Self {
        Self::with_alphabet(kind, modem, LlrAlphabet::default())
    }

    pub fn with_alphabet(kind: DetectorKind, modem: &Modem, alphabet: LlrAlphabet) -> Self {
        let pts = match alphabet {
            LlrAlphabet::Psk => modem.psk().points().to_vec(),
            LlrAlphabet::Spread => (0..modem.codebook().len())
                .flat_map(|c| (0..modem.m()).flat_map(move |m| modem.spread(c, m).to_vec()))
                .collect(),
        };
        Self {
            kind,
            alphabet: UnitAlphabet::new(pts),
        }
    }

    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    pub fn detect(&self, modem: &Modem, y: &[Complex64], h_hat: &[Complex64]) -> Detection {
        let mut ops = 0;
        self.detect_counted(modem, y, h_hat, &mut ops)
    }

    /// As [`detect`](Self::detect), adding the operation count to `ops`.
    pub fn detect_counted(
        &self,
        modem: &Modem,
        y: &[Complex64],
        h_hat: &[Complex64],
        ops: &mut u64,
    ) -> Detection {
        debug_assert_eq!(y.len(), modem.n());
        debug_assert_eq!(h_hat.len(), modem.n());
        match self.kind {
            DetectorKind::Ml => ml(modem, y, h_hat, ops),
            DetectorKind::NearMl => near_ml(modem, y, h_hat, ops),
            DetectorKind::LlrMrc => llr_mrc(modem, &self.alphabet, y, h_hat, ops),
        }
    }

    /// Activity scores `lambda_n = |y_n|^2 - min_x |y_n - h_n x|^2`.
    pub fn activity_scores(&self, y: &[Complex64], h_hat: &[Complex64]) -> Vec<f64> {
        let mut ops = 0;
        activity(&self.alphabet, y, h_hat, &mut ops)
    }
}

pub fn detect_ml(modem: &Modem, y: &[Complex64], h_hat: &[Complex64]) -> Detection {
    ml(modem, y, h_hat, &mut 0)
}

pub fn detect_near_ml(modem: &Modem, y: &[Complex64], h_hat: &[Complex64]) -> Detection {
    near_ml(modem, y, h_hat, &mut 0)
}

pub fn detect_llr_mrc(modem: &Modem, y: &[Complex64], h_hat: &[Complex64]) -> Detection {
    Detector::new(DetectorKind::LlrMrc, modem).detect(modem, y, h_hat)
}

/// `||y - H x||^2` for the hypothesis placing `chips` on `theta`, summed in
/// subcarrier order.
pub fn full_metric(y: &[Complex64], h: &[Complex64], theta: &SiTuple, chips: &[Complex64]) -> f64 {
    let mut x = [Complex64::new(0.0, 0.0); MAX_SUBCARRIERS];
    for (&idx, &c) in theta.indices().iter().zip(chips) {
        x[idx - 1] = c;
    }
    y.iter()
        .zip(h)
        .zip(&x)
        .map(|((yn, hn), xn)| (yn - hn * xn).norm_sqr())
        .sum()
}

fn ml(modem: &Modem, y: &[Complex64], h: &[Complex64], ops: &mut u64) -> Detection {
    let (n, k) = (modem.n() as u64, modem.k() as u64);
    let mut best = Detection {
        si_index: 0,
        code_index: 0,
        mary_index: 0,
        metric: f64::INFINITY,
        replaced: false,
    };
    for (si, theta) in modem.family().tuples().iter().enumerate() {
        for code in 0..modem.codebook().len() {
            for m in 0..modem.m() {
                let metric = full_metric(y, h, theta, modem.spread(code, m));
                // c*s, h*(cs), subtraction on actives; |.|^2 and accumulation over N
                *ops += 14 * k + 4 * n;
                if metric < best.metric {
                    best = Detection {
                        si_index: si,
                        code_index: code,
                        mary_index: m,
                        metric,
                        replaced: false,
                    };
                }
            }
        }
    }
    best
}

/// Best (code, symbol) on a fixed tuple by per-code MRC and quantisation.
/// Returns `None` when the tuple sees an all-zero channel.
fn mrc_on_tuple(
    modem: &Modem,
    theta: &SiTuple,
    y: &[Complex64],
    h: &[Complex64],
    ops: &mut u64,
) -> Option<(usize, usize)> {
    let k = modem.k();
    let pos: Vec<usize> = theta.indices().iter().map(|i| i - 1).collect();
    let w: f64 = pos.iter().map(|&p| h[p].norm_sqr()).sum();
    *ops += 4 * k as u64;
    if w == 0.0 {
        return None;
    }
    let mut best: Option<(f64, usize, usize)> = None;
    let mut heff = vec![Complex64::new(0.0, 0.0); k];
    for (ci, code) in modem.codebook().codes().iter().enumerate() {
        for j in 0..k {
            heff[j] = h[pos[j]] * code[j];
        }
        let z: Complex64 = (0..k).map(|j| heff[j].conj() * y[pos[j]]).sum();
        let m = modem.psk().nearest(z / w);
        let s = modem.psk().point(m);
        let delta: f64 = (0..k).map(|j| (y[pos[j]] - heff[j] * s).norm_sqr()).sum();
        *ops += 6 * k as u64 + 8 * k as u64 + 12 * k as u64;
        if best.is_none_or(|(d, _, _)| delta < d) {
            best = Some((delta, ci, m));
        }
    }
    best.map(|(_, c, m)| (c, m))
}

fn near_ml(modem: &Modem, y: &[Complex64], h: &[Complex64], ops: &mut u64) -> Detection {
    let (n, k) = (modem.n() as u64, modem.k() as u64);
    let mut best: Option<Detection> = None;
    for (si, theta) in modem.family().tuples().iter().enumerate() {
        let Some((code, m)) = mrc_on_tuple(modem, theta, y, h, ops) else {
            continue;
        };
        let metric = full_metric(y, h, theta, modem.spread(code, m));
        *ops += 14 * k + 5 * n;
        if best.is_none_or(|b| metric < b.metric) {
            best = Some(Detection {
                si_index: si,
                code_index: code,
                mary_index: m,
                metric,
                replaced: false,
            });
        }
    }
    best.unwrap_or_else(|| {
        let metric = full_metric(y, h, modem.family().get(0), modem.spread(0, 0));
        Detection {
            si_index: 0,
            code_index: 0,
            mary_index: 0,
            metric,
            replaced: false,
        }
    })
}

fn activity(alphabet: &UnitAlphabet, y: &[Complex64], h: &[Complex64], ops: &mut u64) -> Vec<f64> {
    y.iter()
        .zip(h)
        .map(|(yn, hn)| {
            // |y - h x|^2 = |y|^2 + |h|^2 - 2 Re(y conj(h) conj(x)) for |x| = 1
            let z = yn * hn.conj();
            let corr = alphabet.best_correlation(z);
            *ops += 6 + 3 + 3 + 2;
            2.0 * corr - hn.norm_sqr()
        })
        .collect()
}

fn llr_mrc(
    modem: &Modem,
    alphabet: &UnitAlphabet,
    y: &[Complex64],
    h: &[Complex64],
    ops: &mut u64,
) -> Detection {
    let (n, k) = (modem.n(), modem.k());
    let lambda = activity(alphabet, y, h, ops);
    let mut rank: Vec<usize> = (0..n).collect();
    // descending, equal scores keep subcarrier order
    rank.sort_by(|&a, &b| lambda[b].total_cmp(&lambda[a]).then(a.cmp(&b)));

    let family = modem.family();
    let lookup = |set: &[usize]| {
        let one_based: Vec<usize> = set.iter().map(|p| p + 1).collect();
        family.index_of_mask(set_mask(&one_based))
    };
    let mut set: Vec<usize> = rank[..k].to_vec();
    let mut si = lookup(&set);
    let replaced = si.is_none();
    // swap alpha_K <-> alpha_{K+1}, then alpha_{K-1} <-> alpha_{K+2}, ...
    let max_swaps = k.min(n - k);
    let mut swaps = 0;
    while si.is_none() && swaps < max_swaps {
        set[k - 1 - swaps] = rank[k + swaps];
        swaps += 1;
        si = lookup(&set);
    }
    let si = si.unwrap_or(0);

    let theta = family.get(si);
    let (code, m) = mrc_on_tuple(modem, theta, y, h, ops).unwrap_or((0, 0));
    Detection {
        si_index: si,
        code_index: code,
        mary_index: m,
        metric: full_metric(y, h, theta, modem.spread(code, m)),
        replaced,
    }
}
