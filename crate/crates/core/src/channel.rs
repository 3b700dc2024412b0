//! Per-subcarrier Rayleigh fading, additive noise and CSI error.
//!
//! `y_n = h_n x_n + w_n` with `h_n ~ CN(0, 1)` and `w_n ~ CN(0, N0)`. The
//! average SNR is `1 / N0`. Imperfect CSI follows the MMSE pilot-estimation
//! model `h_hat = h + e`, `e ~ CN(0, 1 / (1 + snr))`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Random stream for one trial: the ChaCha key comes from `master_seed` and
/// the stream id is the trial counter, so a trial never depends on how many
/// other trials ran before it or on which thread.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

/// One `CN(0, 1)` draw.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn sample_channel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<Complex64> {
    (0..n).map(|_| complex_normal(rng)).collect()
}

/// `y = h .* x + w`. One noise sample is drawn per subcarrier even when
/// `n0 == 0`, keeping the stream aligned across SNR points.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &[Complex64],
    h: &[Complex64],
    n0: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if x.len() != h.len() {
        return Err(Error::LengthMismatch(x.len(), h.len()));
    }
    let sigma = n0.sqrt();
    Ok(x.iter()
        .zip(h)
        .map(|(xn, hn)| hn * xn + complex_normal(rng) * sigma)
        .collect())
}

/// MMSE channel-estimation error variance at linear SNR `snr`.
pub fn mmse_error_variance(snr: f64) -> f64 {
    if snr.is_infinite() {
        0.0
    } else {
        1.0 / (1.0 + snr)
    }
}

/// `h_hat = h + e` with `e ~ CN(0, 1 / (1 + snr))`.
pub fn corrupt_csi<R: Rng + ?Sized>(h: &[Complex64], snr: f64, rng: &mut R) -> Vec<Complex64> {
    let sigma = mmse_error_variance(snr).sqrt();
    h.iter()
        .map(|hn| hn + complex_normal(rng) * sigma)
        .collect()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Noise variance `N0 = 1 / snr`; zero for an infinite SNR.
pub fn noise_variance(snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        0.0
    } else {
        1.0 / db_to_linear(snr_db)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CsiMode {
    #[default]
    Perfect,
    Mmse,
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "perfect" => Ok(Self::Perfect),
            "mmse" | "imperfect" => Ok(Self::Mmse),
            other => Err(Error::Parse(format!("unknown CSI mode '{other}'"))),
        }
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Perfect => "perfect",
            Self::Mmse => "mmse",
        })
    }
}

/// Channel state for one trial.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    pub h: Vec<Complex64>,
    /// What the receiver believes `h` to be.
    pub h_hat: Vec<Complex64>,
    pub n0: f64,
    pub snr_db: f64,
}

impl ChannelRealization {
    /// Draws `h`, then the CSI error, from `rng`. The CSI error is drawn in
    /// both modes so that perfect and MMSE runs consume identical streams.
    pub fn draw<R: Rng + ?Sized>(n: usize, snr_db: f64, csi: CsiMode, rng: &mut R) -> Self {
        let h = sample_channel(n, rng);
        let snr = if snr_db == f64::INFINITY {
            f64::INFINITY
        } else {
            db_to_linear(snr_db)
        };
        let corrupted = corrupt_csi(&h, snr, rng);
        let h_hat = match csi {
            CsiMode::Perfect => h.clone(),
            CsiMode::Mmse => corrupted,
        };
        Self {
            h,
            h_hat,
            n0: noise_variance(snr_db),
            snr_db,
        }
    }
}
