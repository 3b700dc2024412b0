//! Link-level simulator for spread-spectrum subcarrier-index-modulated OFDM.
//!
//! A cluster of `N` subcarriers carries `p = p1 + p2 + p3` bits: `p1` select
//! which `K` subcarriers are active, `p2` select a rotated Zadoff-Chu
//! spreading code and `p3` select an `M`-PSK symbol.

pub mod analysis;
pub mod channel;
pub mod detectors;
pub mod error;
pub mod index_maps;
pub mod modem;
pub mod sim;
pub mod spread_codes;
pub mod sysconfig;

pub use channel::{trial_rng, ChannelRealization, CsiMode};
pub use detectors::{Detection, Detector, DetectorKind, LlrAlphabet};
pub use error::{Error, Result};
pub use index_maps::{SiFamily, SiTuple};
pub use modem::{ClusterSymbol, Modem};
pub use sim::{run_sweep, BerStats, SweepConfig};
pub use spread_codes::Codebook;
pub use sysconfig::{BitBudget, CheckedConfig, MapperKind, OsiMetric, SystemConfig};
