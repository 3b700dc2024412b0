//! Subcarrier-index (SI) families: which `K` of `N` subcarriers are active,
//! and in what order the spreading-code chips are placed on them.
//!
//! Three mappers are provided. The combinatorial mapper takes the first
//! `2^p1` subsets in combinadic order with ascending indices. OSI starts from
//! an occurrence-balanced selection of subsets and permutes each tuple so
//! that tuples differ in as many positions as possible. SISR keeps a smaller
//! family to raise the minimum pairwise difference further.

mod combinadic;
mod osi;
mod sisr;

use std::collections::HashMap;
use std::fmt;

pub use combinadic::{
    combinadic_decode, combinadic_encode, combinatorial_family, lexicographic_subsets,
};
pub use osi::{
    build_equiprobable_family, osi_reorder, ChipDistance, EquiprobableFamily, Positional,
    TupleDistance,
};
pub use sisr::{sisr_family, SISR_EXHAUSTIVE_LIMIT};

use crate::error::{Error, Result};
use crate::sysconfig::MapperKind;

/// Ordered tuple of distinct 1-based subcarrier indices.
///
/// Position `k` of the tuple carries chip `k` of the spreading code, so the
/// order is significant and never canonicalised.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SiTuple(Vec<usize>);

impl SiTuple {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        let mut seen = 0u64;
        for &i in &indices {
            if i == 0 || i > n || seen & (1 << i) != 0 {
                return Err(Error::InvalidTuple(indices));
            }
            seen |= 1 << i;
        }
        Ok(Self(indices))
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Bit `i - 1` is set for every index `i` in the tuple.
    pub fn mask(&self) -> u32 {
        set_mask(&self.0)
    }

    /// Indices in ascending order.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.0.clone();
        v.sort_unstable();
        v
    }

    pub(crate) fn permuted(&self, order: &[usize]) -> Self {
        Self(order.iter().map(|&p| self.0[p]).collect())
    }
}

impl fmt::Display for SiTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

pub fn set_mask(indices: &[usize]) -> u32 {
    indices.iter().fold(0, |m, &i| m | (1u32 << (i - 1)))
}

/// Ordered list of SI tuples; list position is the transmitted SI value.
#[derive(Debug, Clone)]
pub struct SiFamily {
    tuples: Vec<SiTuple>,
    kind: MapperKind,
    by_set: HashMap<u32, usize>,
}

impl SiFamily {
    /// Fails if two tuples share an index set, since the receiver could not
    /// tell them apart by activity alone.
    pub fn new(tuples: Vec<SiTuple>, kind: MapperKind) -> Result<Self> {
        let mut by_set = HashMap::with_capacity(tuples.len());
        let k = tuples.first().map_or(0, SiTuple::len);
        for (i, t) in tuples.iter().enumerate() {
            if t.len() != k {
                return Err(Error::LengthMismatch(k, t.len()));
            }
            if by_set.insert(t.mask(), i).is_some() {
                return Err(Error::InvalidTuple(t.indices().to_vec()));
            }
        }
        Ok(Self {
            tuples,
            kind,
            by_set,
        })
    }

    pub fn tuples(&self) -> &[SiTuple] {
        &self.tuples
    }

    pub fn kind(&self) -> MapperKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn get(&self, i: usize) -> &SiTuple {
        &self.tuples[i]
    }

    /// Family position of the tuple whose index set equals `mask`.
    pub fn index_of_mask(&self, mask: u32) -> Option<usize> {
        self.by_set.get(&mask).copied()
    }

    /// The family tuple carrying the given index set, in family order.
    pub fn resolve_theta_order(&self, set: &[usize]) -> Result<&SiTuple> {
        self.index_of_mask(set_mask(set))
            .map(|i| &self.tuples[i])
            .ok_or_else(|| Error::NotInFamily(set.to_vec()))
    }

    pub fn metrics(&self) -> FamilyMetrics {
        family_metrics(&self.tuples)
    }
}

/// Number of positions at which two equal-length tuples hold different indices.
pub fn omega(a: &SiTuple, b: &SiTuple) -> Result<usize> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    Ok(omega_unchecked(a, b))
}

pub(crate) fn omega_unchecked(a: &SiTuple, b: &SiTuple) -> usize {
    a.0.iter().zip(&b.0).filter(|(x, y)| x != y).count()
}

/// Minimum (`kappa`) and ordered-pair total (`gamma`) of the positional
/// difference over all tuple pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyMetrics {
    pub kappa: usize,
    pub gamma: usize,
}

pub fn family_metrics(tuples: &[SiTuple]) -> FamilyMetrics {
    let mut kappa = usize::MAX;
    let mut gamma = 0;
    for (i, a) in tuples.iter().enumerate() {
        for (j, b) in tuples.iter().enumerate() {
            if i != j {
                let w = omega_unchecked(a, b);
                kappa = kappa.min(w);
                gamma += w;
            }
        }
    }
    if kappa == usize::MAX {
        kappa = tuples.first().map_or(0, SiTuple::len);
    }
    FamilyMetrics { kappa, gamma }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(v: &[usize]) -> SiTuple {
        SiTuple::new(v.to_vec(), 8).unwrap()
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega(&t(&[1, 3]), &t(&[4, 1])).unwrap(), 2);
        assert_eq!(omega(&t(&[1, 2]), &t(&[1, 2])).unwrap(), 0);
        assert_eq!(omega(&t(&[1, 2, 3]), &t(&[1, 2, 4])).unwrap(), 1);
        assert!(omega(&t(&[1, 2]), &t(&[1, 2, 3])).is_err());
    }

    #[test]
    fn metrics_of_reference_families() {
        let osi = [t(&[1, 3]), t(&[4, 1]), t(&[3, 2]), t(&[2, 4])];
        assert_eq!(
            family_metrics(&osi),
            FamilyMetrics {
                kappa: 2,
                gamma: 24
            }
        );
        let comb = combinatorial_family(4, 2, 2).unwrap();
        assert_eq!(
            comb.metrics(),
            FamilyMetrics {
                kappa: 1,
                gamma: 16
            }
        );
    }

    #[test]
    fn tuple_validation() {
        assert!(SiTuple::new(vec![1, 1], 4).is_err());
        assert!(SiTuple::new(vec![0, 2], 4).is_err());
        assert!(SiTuple::new(vec![5, 2], 4).is_err());
        assert_eq!(t(&[3, 1]).mask(), 0b101);
    }

    #[test]
    fn resolve_against_osi_family() {
        let fam = SiFamily::new(
            vec![t(&[1, 3]), t(&[4, 1]), t(&[3, 2]), t(&[2, 4])],
            MapperKind::Osi,
        )
        .unwrap();
        assert_eq!(fam.resolve_theta_order(&[3, 1]).unwrap(), &t(&[1, 3]));
        assert_eq!(fam.resolve_theta_order(&[2, 3]).unwrap(), &t(&[3, 2]));
        assert!(matches!(
            fam.resolve_theta_order(&[1, 2]),
            Err(Error::NotInFamily(_))
        ));
    }

    #[test]
    fn duplicate_sets_rejected() {
        assert!(SiFamily::new(vec![t(&[1, 2]), t(&[2, 1])], MapperKind::Osi).is_err());
    }
}
