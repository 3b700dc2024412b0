//! Seeded Monte Carlo BER sweeps and CSV output.
//!
//! Trial `t` at any SNR point draws its bits, channel, CSI error and noise
//! from `trial_rng(seed, t)` in that order. The noise and CSI error are unit
//! normals scaled by the SNR, so every SNR point and every detector sees the
//! same underlying random numbers. Trials run in fixed batches and the stop
//! rule is only checked between batches, which makes the statistics
//! independent of the worker count.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;
use rand::Rng;
use rayon::prelude::*;

use crate::channel::{apply_channel, trial_rng, ChannelRealization, CsiMode};
use crate::detectors::{Detector, DetectorKind, LlrAlphabet};
use crate::error::{Error, Result};
use crate::modem::Modem;
use crate::sysconfig::SystemConfig;

pub const BATCH_TRIALS: u64 = 1024;
pub const DEFAULT_MIN_ERRORS: u64 = 200;
pub const DEFAULT_MAX_BITS: u64 = 10_000_000;

pub const CSV_HEADER: &str = "snr_db,detector,mapper,n,k,m,csi,bits_sent,bit_errors,ber,ci95";

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub system: SystemConfig,
    pub detector: DetectorKind,
    pub snr_db: Vec<f64>,
    pub min_errors: u64,
    pub max_bits: u64,
    pub seed: u64,
    pub csi: CsiMode,
    /// Worker threads; 0 uses all cores.
    pub workers: usize,
    pub llr_alphabet: LlrAlphabet,
}

impl SweepConfig {
    pub fn new(system: SystemConfig, detector: DetectorKind, snr_db: Vec<f64>) -> Self {
        Self {
            system,
            detector,
            snr_db,
            min_errors: DEFAULT_MIN_ERRORS,
            max_bits: DEFAULT_MAX_BITS,
            seed: 1,
            csi: CsiMode::Perfect,
            workers: 0,
            llr_alphabet: LlrAlphabet::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::Config("empty SNR list".into()));
        }
        if self
            .snr_db
            .iter()
            .any(|s| s.is_nan() || *s == f64::NEG_INFINITY)
        {
            return Err(Error::Config("SNR values must be numbers or +inf".into()));
        }
        if self.snr_db.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("SNR list must be strictly increasing".into()));
        }
        if self.min_errors == 0 || self.max_bits == 0 {
            return Err(Error::Config(
                "min_errors and max_bits must be positive".into(),
            ));
        }
        if self.min_errors < 100 {
            warn!(
                "min_errors = {} is below 100; BER points will be noisy",
                self.min_errors
            );
        }
        self.system.validate().map(|_| ())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BerStats {
    pub snr_db: f64,
    pub trials: u64,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub si_errors: u64,
    pub code_errors: u64,
    pub mary_errors: u64,
    /// LLR-MRC trials whose SI tuple came from the replacement cascade.
    pub replaced: u64,
}

impl BerStats {
    pub fn ber(&self) -> f64 {
        if self.bits_sent == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits_sent as f64
        }
    }

    /// Half-width of the Wilson 95% interval on the BER.
    pub fn ci95(&self) -> f64 {
        wilson_halfwidth(self.bit_errors, self.bits_sent)
    }

    fn merge(mut self, o: &Self) -> Self {
        self.trials += o.trials;
        self.bits_sent += o.bits_sent;
        self.bit_errors += o.bit_errors;
        self.si_errors += o.si_errors;
        self.code_errors += o.code_errors;
        self.mary_errors += o.mary_errors;
        self.replaced += o.replaced;
        self
    }
}

pub fn wilson_halfwidth(errors: u64, n: u64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = errors as f64 / n;
    z / (1.0 + z * z / n) * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt()
}

/// Result of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub sent: u64,
    pub detected: u64,
    pub replaced: bool,
}

/// Runs trial `trial` at `snr_db`.
pub fn run_trial(
    modem: &Modem,
    detector: &Detector,
    seed: u64,
    trial: u64,
    snr_db: f64,
    csi: CsiMode,
) -> TrialOutcome {
    let mut rng = trial_rng(seed, trial);
    let sent = rng.random_range(0..modem.hypothesis_count() as u64);
    let sym = modem.encode_word(sent);
    let ch = ChannelRealization::draw(modem.n(), snr_db, csi, &mut rng);
    let y = apply_channel(&sym.x, &ch.h, ch.n0, &mut rng).expect("lengths match");
    let det = detector.detect(modem, &y, &ch.h_hat);
    TrialOutcome {
        sent,
        detected: det.word(modem),
        replaced: det.replaced,
    }
}

fn tally(modem: &Modem, out: &TrialOutcome) -> BerStats {
    let budget = modem.config().budget;
    let (a, b) = (budget.split_word(out.sent), budget.split_word(out.detected));
    BerStats {
        trials: 1,
        bits_sent: budget.total() as u64,
        bit_errors: (out.sent ^ out.detected).count_ones() as u64,
        si_errors: (a.0 != b.0) as u64,
        code_errors: (a.1 != b.1) as u64,
        mary_errors: (a.2 != b.2) as u64,
        replaced: out.replaced as u64,
        ..Default::default()
    }
}

fn run_point(sweep: &SweepConfig, modem: &Modem, detector: &Detector, snr_db: f64) -> BerStats {
    let mut stats = BerStats {
        snr_db,
        ..Default::default()
    };
    let mut next = 0u64;
    while stats.bit_errors < sweep.min_errors && stats.bits_sent < sweep.max_bits {
        let batch = (next..next + BATCH_TRIALS)
            .into_par_iter()
            .map(|t| {
                tally(
                    modem,
                    &run_trial(modem, detector, sweep.seed, t, snr_db, sweep.csi),
                )
            })
            .reduce(BerStats::default, |a, b| a.merge(&b));
        stats = stats.merge(&batch);
        next += BATCH_TRIALS;
    }
    stats
}

pub fn run_sweep(sweep: &SweepConfig) -> Result<Vec<BerStats>> {
    sweep.validate()?;
    let modem = Modem::new(&sweep.system.validate()?)?;
    let detector = Detector::with_alphabet(sweep.detector, &modem, sweep.llr_alphabet);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| {
        sweep
            .snr_db
            .iter()
            .map(|&s| run_point(sweep, &modem, &detector, s))
            .collect()
    }))
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list. `inf`
/// denotes a noiseless point.
pub fn parse_snr_list(text: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad SNR value '{t}'")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if step.is_nan() || step <= 0.0 || !a.is_finite() || !b.is_finite() || b < a {
                return Err(Error::Parse(format!("bad SNR range '{text}'")));
            }
            let count = ((b - a) / step + 1e-9).floor() as usize + 1;
            Ok((0..count).map(|i| a + i as f64 * step).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(Error::Parse(format!("bad SNR range '{text}'"))),
    }
}

/// One CSV data row.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub snr_db: f64,
    pub detector: String,
    pub mapper: String,
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub csi: String,
    pub bits_sent: u64,
    pub bit_errors: u64,
    pub ber: f64,
    pub ci95: f64,
}

pub fn sweep_rows(sweep: &SweepConfig, stats: &[BerStats]) -> Vec<CsvRow> {
    stats
        .iter()
        .map(|s| CsvRow {
            snr_db: s.snr_db,
            detector: sweep.detector.to_string(),
            mapper: sweep.system.mapper.to_string(),
            n: sweep.system.n,
            k: sweep.system.k,
            m: sweep.system.m,
            csi: sweep.csi.to_string(),
            bits_sent: s.bits_sent,
            bit_errors: s.bit_errors,
            ber: s.ber(),
            ci95: s.ci95(),
        })
        .collect()
}

pub fn bound_rows(system: &SystemConfig, snr_db: &[f64], bound: &[f64]) -> Vec<CsvRow> {
    snr_db
        .iter()
        .zip(bound)
        .map(|(&s, &b)| CsvRow {
            snr_db: s,
            detector: "bound".into(),
            mapper: system.mapper.to_string(),
            n: system.n,
            k: system.k,
            m: system.m,
            csi: CsiMode::Perfect.to_string(),
            bits_sent: 0,
            bit_errors: 0,
            ber: b,
            ci95: 0.0,
        })
        .collect()
}

/// `Eb/N0` in dB for a per-subcarrier SNR, with `K` unit-energy chips
/// carrying `p` bits.
pub fn ebn0_db(snr_db: f64, k: usize, bits: u32) -> f64 {
    snr_db + 10.0 * (k as f64 / bits as f64).log10()
}

/// Writes the header and rows. With `ebn0_bits = Some(p)` an `ebn0_db`
/// column is appended.
pub fn write_csv<W: Write>(mut w: W, rows: &[CsvRow], ebn0_bits: Option<u32>) -> Result<()> {
    let io = |e: std::io::Error| Error::Config(e.to_string());
    write!(w, "{CSV_HEADER}").map_err(io)?;
    if ebn0_bits.is_some() {
        write!(w, ",ebn0_db").map_err(io)?;
    }
    writeln!(w).map_err(io)?;
    for r in rows {
        write!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.snr_db,
            r.detector,
            r.mapper,
            r.n,
            r.k,
            r.m,
            r.csi,
            r.bits_sent,
            r.bit_errors,
            r.ber,
            r.ci95
        )
        .map_err(io)?;
        if let Some(p) = ebn0_bits {
            write!(w, ",{}", ebn0_db(r.snr_db, r.k, p)).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

pub fn emit_csv(path: &Path, rows: &[CsvRow], ebn0_bits: Option<u32>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    write_csv(BufWriter::new(file), rows, ebn0_bits)
}
