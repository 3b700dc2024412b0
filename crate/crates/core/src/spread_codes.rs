//! Rotated Zadoff-Chu spreading codes.
//!
//! Code `k` (1-based) is the base ZC sequence cyclically shifted right by
//! `k - 1` places and multiplied by `exp(j 2 pi (k-1) / B)` with `B = MK - 1`.
//! Because `B` is coprime to `2MK`, no chip of one rotated code times a PSK
//! symbol can coincide with the same chip of another code times any PSK
//! symbol, which gives every same-tuple error event full diversity `K`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sysconfig::{gcd, CheckedConfig};

/// Squared-magnitude threshold for "this chip difference is nonzero".
pub const CHIP_DIFF_TOL: f64 = 1e-18;

/// Base ZC sequence of length `k`, entries indexed from 1.
pub fn zc_base(k: usize, d: i64, u: i64) -> Result<Vec<Complex64>> {
    if k == 0 || gcd(d.unsigned_abs(), k as u64) != 1 {
        return Err(Error::Config(format!(
            "ZC root d={d} is not coprime to K={k}"
        )));
    }
    let len = k as i128;
    let (d, u) = (d as i128, u as i128);
    Ok((1..=len)
        .map(|idx| {
            // exponent numerator in units of pi/K, reduced mod 2K
            let quad = if len % 2 == 0 {
                idx * idx
            } else {
                idx * (idx + 1)
            };
            let t = (d * (quad + 2 * u * idx)).rem_euclid(2 * len);
            Complex64::from_polar(1.0, -PI * t as f64 / len as f64)
        })
        .collect())
}

/// The `k`-th cyclic shift (1-based): `k = 1` is `base`, `k = 2` is
/// `[c_K, c_1, ..., c_{K-1}]`.
pub fn cyclic_shift(base: &[Complex64], k: usize) -> Result<Vec<Complex64>> {
    if k == 0 || k > base.len() {
        return Err(Error::OutOfRange {
            value: k as u64,
            bound: base.len() as u64 + 1,
        });
    }
    let mut out = base.to_vec();
    out.rotate_right(k - 1);
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct Codebook {
    codes: Vec<Vec<Complex64>>,
    denominator: u64,
    rotated: bool,
}

impl Codebook {
    /// Builds the first `2^p2` rotated cyclic shifts. With rotation enabled the
    /// full-difference property is checked exhaustively against the
    /// configured PSK alphabet.
    pub fn build(cfg: &CheckedConfig) -> Result<Self> {
        let k = cfg.k();
        let base = zc_base(k, cfg.config.zc_d, cfg.config.zc_u)?;
        let denominator = cfg.rotation_denominator();
        let rotated = cfg.config.rotation;
        let used = 1usize << cfg.budget.p2;
        let codes = (1..=used)
            .map(|idx| {
                let shifted = cyclic_shift(&base, idx)?;
                if !rotated {
                    return Ok(shifted);
                }
                let rot =
                    Complex64::from_polar(1.0, 2.0 * PI * (idx - 1) as f64 / denominator as f64);
                Ok(shifted.into_iter().map(|c| c * rot).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        let book = Self {
            codes,
            denominator,
            rotated,
        };
        if rotated {
            book.verify_full_difference(cfg.m())?;
        }
        Ok(book)
    }

    pub fn codes(&self) -> &[Vec<Complex64>] {
        &self.codes
    }

    pub fn code(&self, i: usize) -> &[Complex64] {
        &self.codes[i]
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn code_len(&self) -> usize {
        self.codes.first().map_or(0, Vec::len)
    }

    pub fn denominator(&self) -> u64 {
        self.denominator
    }

    pub fn is_rotated(&self) -> bool {
        self.rotated
    }

    /// Every spread chip vector `c_i * s_m`, code-major.
    pub fn spread_vectors(&self, m: usize) -> Vec<Vec<Complex64>> {
        let psk = psk_points(m);
        self.codes
            .iter()
            .flat_map(|c| psk.iter().map(move |s| c.iter().map(|x| x * s).collect()))
            .collect()
    }

    /// Checks that for every `(c, s) != (c', s')` all `K` chip products differ.
    pub fn verify_full_difference(&self, m: usize) -> Result<()> {
        let spread = self.spread_vectors(m);
        for (a, u) in spread.iter().enumerate() {
            for (b, w) in spread.iter().enumerate().skip(a + 1) {
                if u.iter()
                    .zip(w)
                    .any(|(x, y)| (x - y).norm_sqr() <= CHIP_DIFF_TOL)
                {
                    return Err(Error::FullDiversityViolated(a / m, b / m));
                }
            }
        }
        Ok(())
    }
}

pub(crate) fn psk_points(m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|i| Complex64::from_polar(1.0, 2.0 * PI * i as f64 / m as f64))
        .collect()
}

/// Hermitian inner product `sum a_i conj(b_i)`.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x * y.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysconfig::SystemConfig;

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() < 1e-12
    }

    fn book(k: usize, m: usize, rotation: bool) -> Codebook {
        let mut cfg = SystemConfig::new(k.max(2) + 1, k, m);
        cfg.rotation = rotation;
        Codebook::build(&cfg.validate().unwrap()).unwrap()
    }

    #[test]
    fn zc_even_and_odd_examples() {
        let j = Complex64::i();
        let c = zc_base(2, 1, 0).unwrap();
        assert!(close(c[0], -j) && close(c[1], Complex64::new(1.0, 0.0)));
        let c = zc_base(3, 1, 0).unwrap();
        assert!(close(c[0], Complex64::from_polar(1.0, -2.0 * PI / 3.0)));
        assert!(close(c[1], 1.0.into()) && close(c[2], 1.0.into()));
        assert!(zc_base(4, 2, 0).is_err());
    }

    #[test]
    fn shift_examples() {
        let base = zc_base(2, 1, 0).unwrap();
        let s = cyclic_shift(&base, 2).unwrap();
        assert!(close(s[0], 1.0.into()) && close(s[1], -Complex64::i()));
        assert_eq!(cyclic_shift(&base, 1).unwrap(), base);
        let b3: Vec<Complex64> = (1..=3).map(|x| Complex64::new(x as f64, 0.0)).collect();
        let s = cyclic_shift(&b3, 3).unwrap();
        assert_eq!(s, vec![b3[1], b3[2], b3[0]]);
        assert!(cyclic_shift(&b3, 0).is_err());
        assert!(cyclic_shift(&b3, 4).is_err());
    }

    #[test]
    fn rotated_code_two() {
        let cb = book(2, 2, true);
        assert_eq!(cb.denominator(), 3);
        let rot = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!(close(cb.code(1)[0], rot));
        assert!(close(cb.code(1)[1], -Complex64::i() * rot));
        let plain = book(2, 2, false);
        assert!(close(plain.code(1)[0], 1.0.into()));
    }

    #[test]
    fn k4_m16_orthogonal() {
        let cb = book(4, 16, true);
        assert_eq!(cb.denominator(), 63);
        assert_eq!(cb.len(), 4);
        for i in 0..4 {
            for j in 0..4 {
                let ip = inner(cb.code(i), cb.code(j)).norm();
                if i == j {
                    assert!((ip - 4.0).abs() < 1e-12);
                } else {
                    assert!(ip < 1e-9);
                }
            }
        }
    }

    #[test]
    fn properties_over_parameter_grid() {
        for k in 1..=12 {
            for m in [2usize, 4, 8, 16, 32, 64] {
                for u in [0i64, 1, 3] {
                    let mut cfg = SystemConfig::new(k + 1, k, m);
                    cfg.zc_u = u;
                    let rotated = Codebook::build(&cfg.validate().unwrap()).unwrap();
                    cfg.rotation = false;
                    let plain = Codebook::build(&cfg.validate().unwrap()).unwrap();
                    for (i, c) in rotated.codes().iter().enumerate() {
                        assert!(c.iter().all(|x| (x.norm() - 1.0).abs() < 1e-12));
                        assert!((inner(c, c).re - k as f64).abs() < 1e-12);
                        for j in 0..i {
                            let r = inner(c, rotated.code(j)).norm();
                            let p = inner(plain.code(i), plain.code(j)).norm();
                            assert!(r < 1e-9 && p < 1e-9);
                            assert!((r - p).abs() < 1e-9);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn plain_shifts_can_collide() {
        // Without rotation, K=2 code 1 chip -j times QPSK j equals code 2 chip 1 times 1.
        let plain = book(2, 4, false);
        assert!(plain.verify_full_difference(4).is_err());
        assert!(book(2, 4, true).verify_full_difference(4).is_ok());
    }
}
