//! Bits to transmit vector and back.
//!
//! The transmit vector of one cluster is `x = T(theta, c) * s`: chip `k` of
//! the selected code goes to subcarrier `theta[k]`, every other subcarrier is
//! zero, and the whole vector is scaled by one PSK symbol. No power
//! normalisation is applied, so `||x||^2 = K`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::index_maps::{
    build_equiprobable_family, combinatorial_family, osi_reorder, sisr_family, ChipDistance,
    Positional, SiFamily, SiTuple, TupleDistance, SISR_EXHAUSTIVE_LIMIT,
};
use crate::spread_codes::{psk_points, Codebook};
use crate::sysconfig::{
    binomial, bits_to_word, word_to_bits, CheckedConfig, MapperKind, OsiMetric,
};

/// Largest `K` for which the `K!` permutation search is attempted.
pub const MAX_REORDER_K: usize = 10;

/// Rough operation budget for building an OSI or SISR family.
pub const MAX_MAPPER_WORK: f64 = 2e9;

/// Estimated operations to build the configured SI family.
pub fn mapper_work(cfg: &CheckedConfig) -> f64 {
    let (n, k) = (cfg.n() as f64, cfg.k());
    let total = binomial(cfg.n(), k) as f64;
    let keep = 2f64.powi(cfg.budget.p1 as i32);
    let perms: f64 = (1..=k).map(|v| v as f64).product();
    let codes = 2f64.powi(cfg.budget.p2 as i32);
    let dist = match cfg.config.osi_metric {
        OsiMetric::Positional => k as f64,
        OsiMetric::Diversity => codes * codes * k as f64 + k as f64,
    };
    let reorder = |f: f64| perms * f * f / 2.0 * dist;
    match cfg.config.mapper {
        MapperKind::Combinatorial => total.min(keep) * n,
        MapperKind::Osi => (total - keep) * total * (n + k as f64) + reorder(keep),
        MapperKind::Sisr => {
            let selections = binomial(cfg.n(), k)
                .try_into()
                .map(|t: usize| binomial(t, 1 << cfg.budget.p1))
                .unwrap_or(u64::MAX);
            if selections != 0 && selections <= SISR_EXHAUSTIVE_LIMIT {
                selections as f64 * reorder(keep)
            } else {
                keep * total * reorder(keep)
            }
        }
    }
}

pub fn gray_encode(m: u64) -> u64 {
    m ^ (m >> 1)
}

pub fn gray_decode(mut g: u64) -> u64 {
    let mut m = g;
    while g > 1 {
        g >>= 1;
        m ^= g;
    }
    m
}

/// Unit-circle M-PSK: point `m` is `exp(j 2 pi m / M)`, labelled by the Gray
/// code of `m`.
#[derive(Debug, Clone)]
pub struct Psk {
    points: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PskSymbol {
    pub index: usize,
    pub value: Complex64,
}

impl Psk {
    pub fn new(m: usize) -> Self {
        Self {
            points: (0..m)
                .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64))
                .collect(),
        }
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Symbol for a `log2 M`-bit label (MSB first).
    pub fn modulate(&self, bits: &[bool]) -> PskSymbol {
        self.modulate_word(bits_to_word(bits))
    }

    pub fn modulate_word(&self, label: u64) -> PskSymbol {
        let index = gray_decode(label) as usize % self.order();
        PskSymbol {
            index,
            value: self.points[index],
        }
    }

    pub fn label(&self, index: usize) -> u64 {
        gray_encode(index as u64)
    }

    /// Nearest constellation point to `z` (the `Q{.}` demodulator).
    pub fn nearest(&self, z: Complex64) -> usize {
        let m = self.order() as f64;
        let turns = z.arg() / (2.0 * PI);
        ((turns * m).round().rem_euclid(m)) as usize
    }
}

/// Precoding vector `v` of length `n`: `v[theta[k]] = code[k]`, zero elsewhere.
pub fn precode(theta: &SiTuple, code: &[Complex64], n: usize) -> Result<Vec<Complex64>> {
    if theta.len() != code.len() {
        return Err(Error::LengthMismatch(theta.len(), code.len()));
    }
    let checked = SiTuple::new(theta.indices().to_vec(), n)?;
    let mut v = vec![Complex64::new(0.0, 0.0); n];
    for (&idx, &c) in checked.indices().iter().zip(code) {
        v[idx - 1] = c;
    }
    Ok(v)
}

/// One transmit hypothesis and its frequency-domain vector.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSymbol {
    pub si_index: usize,
    pub theta: SiTuple,
    pub code_index: usize,
    pub mary_index: usize,
    pub x: Vec<Complex64>,
}

/// Immutable tables for one configuration: SI family, codebook, PSK alphabet.
#[derive(Debug, Clone)]
pub struct Modem {
    cfg: CheckedConfig,
    family: SiFamily,
    codebook: Codebook,
    psk: Psk,
    /// `spread[code * M + m] = code * psk[m]`
    spread: Vec<Vec<Complex64>>,
}

impl Modem {
    pub fn new(cfg: &CheckedConfig) -> Result<Self> {
        let codebook = Codebook::build(cfg)?;
        let family = build_family(cfg, &codebook)?;
        Self::assemble(cfg, family, codebook)
    }

    /// Uses a caller-supplied family instead of the configured mapper.
    pub fn with_family(cfg: &CheckedConfig, family: SiFamily) -> Result<Self> {
        let codebook = Codebook::build(cfg)?;
        Self::assemble(cfg, family, codebook)
    }

    fn assemble(cfg: &CheckedConfig, family: SiFamily, codebook: Codebook) -> Result<Self> {
        if family.len() != 1usize << cfg.budget.p1 {
            return Err(Error::Config(format!(
                "family has {} tuples, budget needs {}",
                family.len(),
                1u64 << cfg.budget.p1
            )));
        }
        for t in family.tuples() {
            if t.len() != cfg.k() {
                return Err(Error::LengthMismatch(cfg.k(), t.len()));
            }
            SiTuple::new(t.indices().to_vec(), cfg.n())?;
        }
        let spread = codebook.spread_vectors(cfg.m());
        Ok(Self {
            cfg: cfg.clone(),
            family,
            codebook,
            psk: Psk::new(cfg.m()),
            spread,
        })
    }

    pub fn config(&self) -> &CheckedConfig {
        &self.cfg
    }

    pub fn family(&self) -> &SiFamily {
        &self.family
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn psk(&self) -> &Psk {
        &self.psk
    }

    pub fn n(&self) -> usize {
        self.cfg.n()
    }

    pub fn k(&self) -> usize {
        self.cfg.k()
    }

    pub fn m(&self) -> usize {
        self.cfg.m()
    }

    pub fn bits_per_cluster(&self) -> u32 {
        self.cfg.budget.total()
    }

    /// Number of hypotheses `2^p`.
    pub fn hypothesis_count(&self) -> usize {
        1usize << self.bits_per_cluster()
    }

    /// Spread chips `c_code * s_m` of length `K`.
    pub fn spread(&self, code: usize, mary: usize) -> &[Complex64] {
        &self.spread[code * self.m() + mary]
    }

    pub fn transmit_vector(&self, si: usize, code: usize, mary: usize) -> Vec<Complex64> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.n()];
        for (&idx, &chip) in self
            .family
            .get(si)
            .indices()
            .iter()
            .zip(self.spread(code, mary))
        {
            x[idx - 1] = chip;
        }
        x
    }

    /// Bit word of the hypothesis `(si, code, mary)`.
    pub fn hypothesis_word(&self, si: usize, code: usize, mary: usize) -> u64 {
        self.cfg
            .budget
            .join_word(si as u64, code as u64, self.psk.label(mary))
    }

    pub fn encode_word(&self, word: u64) -> ClusterSymbol {
        let (si, code, label) = self.cfg.budget.split_word(word);
        let (si, code) = (si as usize, code as usize);
        let mary = self.psk.modulate_word(label).index;
        ClusterSymbol {
            si_index: si,
            theta: self.family.get(si).clone(),
            code_index: code,
            mary_index: mary,
            x: self.transmit_vector(si, code, mary),
        }
    }

    pub fn encode(&self, bits: &[bool]) -> Result<ClusterSymbol> {
        let (si, code, mary) = self.cfg.budget.split_bits(bits)?;
        let si = bits_to_word(si) as usize;
        let code = bits_to_word(code) as usize;
        let s = self.psk.modulate(mary);
        let theta = self.family.get(si).clone();
        let v = precode(&theta, self.codebook.code(code), self.n())?;
        Ok(ClusterSymbol {
            si_index: si,
            theta,
            code_index: code,
            mary_index: s.index,
            x: v.into_iter().map(|e| e * s.value).collect(),
        })
    }

    /// Bits for a detected `(theta, code, symbol)`; fails when `theta`'s index
    /// set is not in the family.
    pub fn decode(&self, theta: &SiTuple, code: usize, mary: usize) -> Result<Vec<bool>> {
        let si = self
            .family
            .index_of_mask(theta.mask())
            .ok_or_else(|| Error::NotInFamily(theta.sorted()))?;
        if code >= self.codebook.len() {
            return Err(Error::OutOfRange {
                value: code as u64,
                bound: self.codebook.len() as u64,
            });
        }
        if mary >= self.m() {
            return Err(Error::OutOfRange {
                value: mary as u64,
                bound: self.m() as u64,
            });
        }
        Ok(word_to_bits(
            self.hypothesis_word(si, code, mary),
            self.bits_per_cluster(),
        ))
    }
}

fn build_family(cfg: &CheckedConfig, codebook: &Codebook) -> Result<SiFamily> {
    let (n, k, p1) = (cfg.n(), cfg.k(), cfg.budget.p1);
    if cfg.config.mapper == MapperKind::Combinatorial {
        return combinatorial_family(n, k, p1);
    }
    if k > MAX_REORDER_K {
        return Err(Error::Config(format!(
            "{} mapper searches K! orderings; K={k} exceeds {MAX_REORDER_K}",
            cfg.config.mapper
        )));
    }
    let work = mapper_work(cfg);
    if work > MAX_MAPPER_WORK {
        return Err(Error::Config(format!(
            "building the {} family for (N,K)=({n},{k}) needs about {work:.1e} operations; use the comb mapper",
            cfg.config.mapper
        )));
    }
    let chip = ChipDistance::new(codebook.codes(), &psk_points(cfg.m()));
    let metric: &dyn TupleDistance = match cfg.config.osi_metric {
        OsiMetric::Positional => &Positional,
        OsiMetric::Diversity => &chip,
    };
    match cfg.config.mapper {
        MapperKind::Sisr => sisr_family(n, k, p1, metric),
        _ => {
            let base = build_equiprobable_family(n, k, p1)?;
            if !base.balanced {
                log::warn!("({n},{k}) index family could not be fully balanced");
            }
            SiFamily::new(osi_reorder(&base.tuples, metric), MapperKind::Osi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysconfig::{parse_bit_string, SystemConfig};
    use std::collections::HashSet;

    fn modem(n: usize, k: usize, m: usize, mapper: MapperKind) -> Modem {
        Modem::new(
            &SystemConfig::new(n, k, m)
                .with_mapper(mapper)
                .validate()
                .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn gray_ring() {
        let psk = Psk::new(4);
        let idx = |s: &str| psk.modulate(&parse_bit_string(s).unwrap()).index;
        assert_eq!((idx("00"), idx("01"), idx("11"), idx("10")), (0, 1, 2, 3));
        // Oracle: neighbouring points differ in exactly one label bit.
        for m in [2u64, 4, 8, 16, 64] {
            for i in 0..m {
                let a = gray_encode(i);
                let b = gray_encode((i + 1) % m);
                assert_eq!((a ^ b).count_ones(), 1);
                assert_eq!(gray_decode(a), i);
            }
        }
    }

    #[test]
    fn bpsk_and_quantiser() {
        let psk = Psk::new(2);
        assert_eq!(psk.modulate(&[false]).value, Complex64::new(1.0, 0.0));
        assert!((psk.modulate(&[true]).value - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(psk.nearest(Complex64::new(0.9, -0.1)), 0);
        let p8 = Psk::new(8);
        for i in 0..8 {
            let z = p8.point(i) * Complex64::from_polar(1.3, 0.2);
            assert_eq!(p8.nearest(z), i);
            assert!((p8.point(i).norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn precode_examples() {
        let c = [Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0)];
        let z = Complex64::new(0.0, 0.0);
        let v = precode(&SiTuple::new(vec![2, 3], 4).unwrap(), &c, 4).unwrap();
        assert_eq!(v, vec![z, c[0], c[1], z]);
        let v = precode(&SiTuple::new(vec![3, 2], 4).unwrap(), &c, 4).unwrap();
        assert_eq!(v, vec![z, c[1], c[0], z]);
        let all = SiTuple::new(vec![1, 2], 2).unwrap();
        assert_eq!(precode(&all, &c, 2).unwrap(), c.to_vec());
        assert!(precode(&all, &c[..1], 2).is_err());
    }

    #[test]
    fn encode_examples() {
        let md = modem(4, 2, 2, MapperKind::Osi);
        let zero = md.encode(&[false; 4]).unwrap();
        assert_eq!((zero.si_index, zero.code_index, zero.mary_index), (0, 0, 0));
        let nz: Vec<_> = zero.x.iter().filter(|e| e.norm() > 0.0).copied().collect();
        assert_eq!(nz.len(), 2);

        let sym = md.encode(&parse_bit_string("1011").unwrap()).unwrap();
        assert_eq!(sym.theta, *md.family().get(2));
        assert_eq!((sym.code_index, sym.mary_index), (1, 1));
        assert_eq!(sym, md.encode_word(0b1011));
    }

    #[test]
    fn roundtrip_and_injectivity() {
        for (n, k, m, mapper) in [
            (4, 2, 2, MapperKind::Osi),
            (4, 2, 2, MapperKind::Combinatorial),
            (4, 3, 4, MapperKind::Sisr),
            (5, 4, 4, MapperKind::Osi),
            (5, 3, 8, MapperKind::Combinatorial),
            (6, 3, 4, MapperKind::Osi),
        ] {
            let md = modem(n, k, m, mapper);
            let p = md.bits_per_cluster();
            assert!(p <= 12);
            let mut seen = HashSet::new();
            for word in 0..(1u64 << p) {
                let bits = word_to_bits(word, p);
                let sym = md.encode(&bits).unwrap();
                assert_eq!(
                    md.decode(&sym.theta, sym.code_index, sym.mary_index)
                        .unwrap(),
                    bits
                );
                let nz = sym.x.iter().filter(|e| e.norm() > 1e-12).count();
                assert_eq!(nz, k);
                let energy: f64 = sym.x.iter().map(|e| e.norm_sqr()).sum();
                assert!((energy - k as f64).abs() < 1e-12);
                let key: Vec<(i64, i64)> = sym
                    .x
                    .iter()
                    .map(|e| ((e.re * 1e9).round() as i64, (e.im * 1e9).round() as i64))
                    .collect();
                assert!(seen.insert(key), "duplicate x for word {word}");
            }
        }
    }

    #[test]
    fn domain_attribution() {
        let md = modem(5, 4, 4, MapperKind::Osi);
        let b = md.config().budget;
        for word in 0..(1u64 << b.total()) {
            let base = md.encode_word(word);
            let flip_mary = md.encode_word(word ^ 1);
            assert_eq!(base.theta, flip_mary.theta);
            assert_eq!(base.code_index, flip_mary.code_index);
            assert_ne!(base.mary_index, flip_mary.mary_index);
            let flip_si = md.encode_word(word ^ (1 << (b.p2 + b.p3)));
            assert_ne!(base.theta, flip_si.theta);
            assert_eq!(base.code_index, flip_si.code_index);
            assert_eq!(base.mary_index, flip_si.mary_index);
        }
    }

    #[test]
    fn decode_rejects_unknown_set() {
        let md = modem(4, 2, 2, MapperKind::Combinatorial);
        let outside = SiTuple::new(vec![3, 4], 4).unwrap();
        assert!(matches!(
            md.decode(&outside, 0, 0),
            Err(Error::NotInFamily(_))
        ));
    }
}
