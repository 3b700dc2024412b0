//! Pairwise error analysis, the union bound on BEP, diversity census and the
//! detector complexity model.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::trial_rng;
use crate::detectors::DetectorKind;
use crate::error::{Error, Result};
use crate::modem::Modem;
use crate::sysconfig::CheckedConfig;

/// `beta_n` values at or below this count as zero.
pub const BETA_TOL: f64 = 1e-12;

/// Largest bit count `p` handled by exhaustive pair enumeration.
pub const EXHAUSTIVE_BITS_LIMIT: u32 = 16;

/// Unconditional PEP under the two-exponential Q-function approximation.
pub fn pep_unconditional(beta: &[f64], snr: f64) -> f64 {
    let prod = |den: f64| {
        beta.iter()
            .map(|b| 1.0 / (1.0 + b * snr / den))
            .product::<f64>()
    };
    prod(4.0) / 12.0 + prod(3.0) / 4.0
}

/// One ordered pairwise error event `x -> x_hat`.
#[derive(Debug, Clone, PartialEq)]
pub struct PeeRecord {
    pub x: u64,
    pub x_hat: u64,
    pub beta: Vec<f64>,
    /// Number of subcarriers with nonzero `beta`.
    pub d: usize,
    /// Hamming distance between the two bit words.
    pub w: u32,
}

impl PeeRecord {
    pub fn pep(&self, snr: f64) -> f64 {
        pep_unconditional(&self.beta, snr)
    }
}

pub fn pee(modem: &Modem, x: u64, x_hat: u64) -> PeeRecord {
    let a = modem.encode_word(x).x;
    let b = modem.encode_word(x_hat).x;
    let beta: Vec<f64> = a.iter().zip(&b).map(|(u, v)| (u - v).norm_sqr()).collect();
    PeeRecord {
        x,
        x_hat,
        d: beta.iter().filter(|&&v| v > BETA_TOL).count(),
        beta,
        w: (x ^ x_hat).count_ones(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiversityReport {
    pub g_d: usize,
    /// Ordered pairs `x -> x_hat` with `d = g_d`.
    pub n_d_ordered: u64,
    pub n_d_unordered: u64,
    /// Ordered count divided by `2M`: one representative per common PSK
    /// rotation and per direction.
    pub n_d_per_rotation: u64,
    pub pairs: u64,
}

fn check_exhaustive(modem: &Modem) -> Result<()> {
    let bits = modem.bits_per_cluster();
    if bits > EXHAUSTIVE_BITS_LIMIT {
        return Err(Error::SpaceTooLarge {
            bits,
            limit: EXHAUSTIVE_BITS_LIMIT,
        });
    }
    Ok(())
}

fn all_vectors(modem: &Modem) -> Vec<Vec<Complex64>> {
    (0..modem.hypothesis_count() as u64)
        .map(|w| modem.encode_word(w).x)
        .collect()
}

fn diff_count(a: &[Complex64], b: &[Complex64]) -> usize {
    a.iter()
        .zip(b)
        .filter(|(u, v)| (*u - *v).norm_sqr() > BETA_TOL)
        .count()
}

/// Exhaustive diversity census over all ordered hypothesis pairs.
pub fn enumerate_pees(modem: &Modem) -> Result<DiversityReport> {
    check_exhaustive(modem)?;
    let xs = all_vectors(modem);
    let (g_d, n_d) = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (usize::MAX, 0u64);
            for (j, other) in xs.iter().enumerate() {
                if i == j {
                    continue;
                }
                let d = diff_count(&xs[i], other);
                if d < best.0 {
                    best = (d, 1);
                } else if d == best.0 {
                    best.1 += 1;
                }
            }
            best
        })
        .reduce(
            || (usize::MAX, 0),
            |a, b| match a.0.cmp(&b.0) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => (a.0, a.1 + b.1),
            },
        );
    let count = xs.len() as u64;
    Ok(DiversityReport {
        g_d,
        n_d_ordered: n_d,
        n_d_unordered: n_d / 2,
        n_d_per_rotation: n_d / (2 * modem.m() as u64),
        pairs: count * count.saturating_sub(1),
    })
}

/// Union bound on BEP at each linear SNR, by direct double summation.
pub fn bep_upper_bound(modem: &Modem, snrs: &[f64]) -> Result<Vec<f64>> {
    check_exhaustive(modem)?;
    let xs = all_vectors(modem);
    let sums = (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = vec![0.0; snrs.len()];
            let mut beta = Vec::with_capacity(modem.n());
            for (j, other) in xs.iter().enumerate() {
                if i == j {
                    continue;
                }
                beta.clear();
                beta.extend(xs[i].iter().zip(other).map(|(u, v)| (u - v).norm_sqr()));
                let w = (i ^ j).count_ones() as f64;
                for (a, &snr) in acc.iter_mut().zip(snrs) {
                    *a += pep_unconditional(&beta, snr) * w;
                }
            }
            acc
        })
        .reduce(
            || vec![0.0; snrs.len()],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let p = modem.bits_per_cluster() as f64;
    let scale = 1.0 / (xs.len() as f64 * p);
    Ok(sums.into_iter().map(|s| s * scale).collect())
}

/// Diversity statistics from uniformly sampled ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledDiversity {
    /// Smallest `d` seen; an upper bound on the true `G_d`.
    pub min_d: usize,
    /// Sampled pairs achieving `min_d`.
    pub hits: u64,
    pub samples: u64,
    /// Estimated ordered `N_d`, valid only if `min_d` is the true minimum.
    pub n_d_estimate: f64,
}

fn sample_pair<R: Rng>(rng: &mut R, count: u64) -> (u64, u64) {
    let a = rng.random_range(0..count);
    let mut b = rng.random_range(0..count - 1);
    if b >= a {
        b += 1;
    }
    (a, b)
}

pub fn sampled_diversity(modem: &Modem, samples: u64, seed: u64) -> SampledDiversity {
    let count = modem.hypothesis_count() as u64;
    let mut rng = trial_rng(seed, 0);
    let (mut min_d, mut hits) = (usize::MAX, 0u64);
    for _ in 0..samples {
        let (a, b) = sample_pair(&mut rng, count);
        let d = pee(modem, a, b).d;
        if d < min_d {
            (min_d, hits) = (d, 1);
        } else if d == min_d {
            hits += 1;
        }
    }
    let pairs = count as f64 * (count - 1) as f64;
    SampledDiversity {
        min_d,
        hits,
        samples,
        n_d_estimate: hits as f64 / samples as f64 * pairs,
    }
}

/// Sampled estimate of the union bound with a 95% normal half-width.
pub fn sampled_bound(modem: &Modem, snrs: &[f64], samples: u64, seed: u64) -> Vec<(f64, f64)> {
    let count = modem.hypothesis_count() as u64;
    let mut rng = trial_rng(seed, 0);
    let mut sum = vec![0.0; snrs.len()];
    let mut sum_sq = vec![0.0; snrs.len()];
    for _ in 0..samples {
        let (a, b) = sample_pair(&mut rng, count);
        let rec = pee(modem, a, b);
        for (i, &snr) in snrs.iter().enumerate() {
            let v = rec.pep(snr) * rec.w as f64;
            sum[i] += v;
            sum_sq[i] += v * v;
        }
    }
    let n = samples as f64;
    // total = count (count - 1) * mean, bound = total / (count p)
    let scale = (count - 1) as f64 / modem.bits_per_cluster() as f64;
    sum.iter()
        .zip(&sum_sq)
        .map(|(&s, &q)| {
            let mean = s / n;
            let var = (q / n - mean * mean).max(0.0) * n / (n - 1.0).max(1.0);
            (mean * scale, 1.96 * (var / n).sqrt() * scale)
        })
        .collect()
}

/// Closed-form real flops per subcarrier.
pub fn flops(kind: DetectorKind, cfg: &CheckedConfig) -> f64 {
    let (n, k, m) = (cfg.n() as f64, cfg.k() as f64, cfg.m() as f64);
    let si = 2f64.powi(cfg.budget.p1 as i32);
    let codes = 2f64.powi(cfg.budget.p2 as i32);
    match kind {
        DetectorKind::Ml => si * codes * (4.0 * n + 14.0 * k) * m / n,
        DetectorKind::NearMl => si * ((26.0 * codes + 18.0) * k + 4.0 * n) / n,
        DetectorKind::LlrMrc => (codes * 26.0 * k + 4.0 * k) / n + 15.0,
    }
}

/// Fraction of ML flops saved by `kind`.
pub fn flop_saving(kind: DetectorKind, cfg: &CheckedConfig) -> f64 {
    1.0 - flops(kind, cfg) / flops(DetectorKind::Ml, cfg)
}
