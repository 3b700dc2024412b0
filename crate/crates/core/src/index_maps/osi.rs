use num_complex::Complex64;

use super::{lexicographic_subsets, omega_unchecked, SiTuple};
use crate::error::{Error, Result};
use crate::sysconfig::binomial;

/// Squared chip difference below which two chips count as equal.
pub(crate) const CHIP_EQ_TOL: f64 = 1e-12;

/// Pairwise distance between SI tuples used by the reordering search.
pub trait TupleDistance {
    fn distance(&self, a: &SiTuple, b: &SiTuple) -> usize;
}

/// Number of differing positions.
#[derive(Debug, Clone, Copy, Default)]
pub struct Positional;

impl TupleDistance for Positional {
    fn distance(&self, a: &SiTuple, b: &SiTuple) -> usize {
        omega_unchecked(a, b)
    }
}

/// Minimum number of subcarriers on which two transmit vectors differ, taken
/// over every spread symbol (code times data symbol) either tuple may carry.
///
/// This is the diversity order of the worst error event between the two
/// tuples. It is never larger than the positional count plus the number of
/// subcarriers active in only one tuple, and is smaller whenever a code has
/// repeated chip values.
///
/// Chip `c_i[a] s` equals chip `c_j[b] s'` exactly when `c_i[a] / c_j[b]`
/// equals `s' / s`, so the search runs over code pairs and symbol ratios
/// rather than over all pairs of spread vectors.
#[derive(Debug, Clone)]
pub struct ChipDistance {
    codes: usize,
    k: usize,
    ratios: usize,
    /// `ratio_id[((i * k + a) * codes + j) * k + b]`, or `NO_RATIO`.
    ratio_id: Vec<u32>,
}

const NO_RATIO: u32 = u32::MAX;

impl ChipDistance {
    /// `codes` are the length-`K` chip sequences and `symbols` the data
    /// alphabet they are multiplied by.
    pub fn new(codes: &[Vec<Complex64>], symbols: &[Complex64]) -> Self {
        let k = codes.first().map_or(0, Vec::len);
        let mut ratios: Vec<Complex64> = Vec::new();
        for s in symbols {
            for t in symbols {
                let r = t / s;
                if !ratios.iter().any(|x| (x - r).norm_sqr() <= CHIP_EQ_TOL) {
                    ratios.push(r);
                }
            }
        }
        let mut ratio_id = Vec::with_capacity(codes.len() * codes.len() * k * k);
        for ci in codes {
            for &x in ci.iter().take(k) {
                for cj in codes {
                    for &y in cj.iter().take(k) {
                        let r = x / y;
                        let id = ratios
                            .iter()
                            .position(|x| (x - r).norm_sqr() <= CHIP_EQ_TOL);
                        ratio_id.push(id.map_or(NO_RATIO, |i| i as u32));
                    }
                }
            }
        }
        Self {
            codes: codes.len(),
            k,
            ratios: ratios.len(),
            ratio_id,
        }
    }
}

impl TupleDistance for ChipDistance {
    fn distance(&self, a: &SiTuple, b: &SiTuple) -> usize {
        let ai = a.indices();
        let bi = b.indices();
        // (position in a, position in b) for every shared subcarrier
        let shared: Vec<(usize, usize)> = ai
            .iter()
            .enumerate()
            .filter_map(|(pa, idx)| bi.iter().position(|x| x == idx).map(|pb| (pa, pb)))
            .collect();
        let exclusive = ai.len() + bi.len() - 2 * shared.len();
        let (c, k) = (self.codes, self.k);
        let mut agree = vec![0usize; self.ratios];
        let mut most = 0;
        for i in 0..c {
            for j in 0..c {
                agree.iter_mut().for_each(|v| *v = 0);
                for &(pa, pb) in &shared {
                    let id = self.ratio_id[((i * k + pa) * c + j) * k + pb];
                    if id != NO_RATIO {
                        agree[id as usize] += 1;
                        most = most.max(agree[id as usize]);
                    }
                }
                if most == shared.len() {
                    return exclusive;
                }
            }
        }
        exclusive + shared.len() - most
    }
}

/// Output of the balancing step: `2^p1` index sets (ascending, lexicographic).
#[derive(Debug, Clone)]
pub struct EquiprobableFamily {
    pub tuples: Vec<SiTuple>,
    /// Per-index occurrence counts differ by at most one.
    pub balanced: bool,
}

/// Selects `2^p1` of the `C(n,k)` index sets so that every subcarrier is used
/// about equally often, by greedily removing `C(n,k) - 2^p1` sets.
///
/// Each removal takes the set that minimises the largest remaining occurrence
/// count, then the sum of squared counts; ties go to the lexicographically
/// first set.
pub fn build_equiprobable_family(n: usize, k: usize, p1: u32) -> Result<EquiprobableFamily> {
    let total = binomial(n, k);
    let keep = 1u64 << p1;
    if keep > total {
        return Err(Error::Config(format!(
            "cannot keep 2^{p1} of C({n},{k}) = {total} index sets"
        )));
    }
    let mut remaining = lexicographic_subsets(n, k);
    let mut counts = vec![0usize; n + 1];
    for set in &remaining {
        for &i in set {
            counts[i] += 1;
        }
    }
    for _ in 0..(total - keep) {
        let mut best: Option<((usize, usize), usize)> = None;
        for (pos, set) in remaining.iter().enumerate() {
            for &i in set {
                counts[i] -= 1;
            }
            let live = &counts[1..];
            let score = (
                *live.iter().max().unwrap_or(&0),
                live.iter().map(|c| c * c).sum::<usize>(),
            );
            for &i in set {
                counts[i] += 1;
            }
            if best.is_none_or(|(s, _)| score < s) {
                best = Some((score, pos));
            }
        }
        let (_, pos) = best.expect("at least one set remains");
        for &i in &remaining.remove(pos) {
            counts[i] -= 1;
        }
    }
    let live = &counts[1..];
    let balanced = live.iter().max().unwrap_or(&0) - live.iter().min().unwrap_or(&0) <= 1;
    let tuples = remaining
        .into_iter()
        .map(|s| SiTuple::new(s, n))
        .collect::<Result<Vec<_>>>()?;
    Ok(EquiprobableFamily { tuples, balanced })
}

/// Sequentially permutes each tuple to maximise its separation from the
/// tuples already placed. The first tuple is kept verbatim.
///
/// Candidates are the `K!` permutations in lexicographic order of positions.
/// Against the placed tuples a candidate is scored by the minimum and then
/// the sum of `metric`, then by the minimum and sum of the positional
/// difference. The first candidate with the highest score wins.
pub fn osi_reorder(family: &[SiTuple], metric: &dyn TupleDistance) -> Vec<SiTuple> {
    let mut out: Vec<SiTuple> = Vec::with_capacity(family.len());
    let Some(first) = family.first() else {
        return out;
    };
    out.push(first.clone());
    for tuple in &family[1..] {
        let mut order: Vec<usize> = (0..tuple.len()).collect();
        let mut best: Option<((usize, usize, usize, usize), SiTuple)> = None;
        loop {
            let cand = tuple.permuted(&order);
            let key = placement_score(&cand, &out, metric);
            if best.as_ref().is_none_or(|(k, _)| key > *k) {
                best = Some((key, cand));
            }
            if !next_permutation(&mut order) {
                break;
            }
        }
        out.push(best.expect("at least the identity permutation").1);
    }
    out
}

fn placement_score(
    cand: &SiTuple,
    placed: &[SiTuple],
    metric: &dyn TupleDistance,
) -> (usize, usize, usize, usize) {
    let (mut dmin, mut dsum, mut omin, mut osum) = (usize::MAX, 0, usize::MAX, 0);
    for p in placed {
        let d = metric.distance(cand, p);
        let o = omega_unchecked(cand, p);
        dmin = dmin.min(d);
        dsum += d;
        omin = omin.min(o);
        osum += o;
    }
    (dmin, dsum, omin, osum)
}

/// Minimum and ordered-pair sum of `metric` over a family.
pub(crate) fn family_distance_score(
    tuples: &[SiTuple],
    metric: &dyn TupleDistance,
) -> (usize, usize) {
    let mut min = usize::MAX;
    let mut sum = 0;
    for (i, a) in tuples.iter().enumerate() {
        for (j, b) in tuples.iter().enumerate() {
            if i != j {
                let d = metric.distance(a, b);
                min = min.min(d);
                sum += d;
            }
        }
    }
    (min, sum)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::family_metrics;

    fn t(v: &[usize]) -> SiTuple {
        SiTuple::new(v.to_vec(), 8).unwrap()
    }

    #[test]
    fn permutations_are_lexicographic() {
        let mut v = vec![0, 1, 2];
        let mut seen = vec![v.clone()];
        while next_permutation(&mut v) {
            seen.push(v.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }

    #[test]
    fn equiprobable_four_two() {
        let fam = build_equiprobable_family(4, 2, 2).unwrap();
        let got: Vec<_> = fam.tuples.iter().map(|t| t.indices().to_vec()).collect();
        assert_eq!(got, vec![vec![1, 3], vec![1, 4], vec![2, 3], vec![2, 4]]);
        assert!(fam.balanced);
    }

    #[test]
    fn equiprobable_no_removal() {
        let fam = build_equiprobable_family(4, 3, 2).unwrap();
        assert_eq!(fam.tuples.len(), 4);
        assert!(build_equiprobable_family(4, 2, 3).is_err());
    }

    #[test]
    fn equiprobable_three_two_spread() {
        // Oracle: every 2-of-3 choice of the C(3,2) sets has spread <= 1.
        let fam = build_equiprobable_family(3, 2, 1).unwrap();
        assert_eq!(fam.tuples.len(), 2);
        let mut counts = [0; 4];
        for t in &fam.tuples {
            for &i in t.indices() {
                counts[i] += 1;
            }
        }
        let c = &counts[1..];
        assert!(c.iter().max().unwrap() - c.iter().min().unwrap() <= 1);
    }

    #[test]
    fn equiprobable_balance_when_divisible() {
        for (n, k) in [(4, 2), (5, 4), (5, 3), (6, 3), (6, 2), (8, 4), (7, 3)] {
            let p1 = crate::sysconfig::floor_log2(binomial(n, k));
            let fam = build_equiprobable_family(n, k, p1).unwrap();
            let mut counts = vec![0usize; n + 1];
            for t in &fam.tuples {
                for &i in t.indices() {
                    counts[i] += 1;
                }
            }
            let target = (k << p1) as f64 / n as f64;
            for &c in &counts[1..] {
                assert!(
                    (c as f64 - target).abs() <= 1.0,
                    "({n},{k}) count {c} vs {target}"
                );
            }
            assert!(fam.balanced);
        }
    }

    #[test]
    fn osi_positional_reference_example() {
        let i1 = [t(&[1, 3]), t(&[1, 4]), t(&[2, 3]), t(&[2, 4])];
        let fam = osi_reorder(&i1, &Positional);
        assert_eq!(fam, vec![t(&[1, 3]), t(&[4, 1]), t(&[3, 2]), t(&[2, 4])]);
        let m = family_metrics(&fam);
        assert_eq!((m.kappa, m.gamma), (2, 24));
    }

    #[test]
    fn osi_positional_five_four_reaches_full_kappa() {
        let i1 = build_equiprobable_family(5, 4, 2).unwrap().tuples;
        let fam = osi_reorder(&i1, &Positional);
        assert_eq!(family_metrics(&fam).kappa, 4);
    }

    #[test]
    fn osi_single_tuple_unchanged() {
        let fam = osi_reorder(&[t(&[2, 1, 3])], &Positional);
        assert_eq!(fam, vec![t(&[2, 1, 3])]);
        assert!(osi_reorder(&[], &Positional).is_empty());
    }

    fn brute_chip_distance(spread: &[Vec<Complex64>], a: &SiTuple, b: &SiTuple) -> usize {
        let mut best = usize::MAX;
        for u in spread {
            for w in spread {
                let mut xa = [Complex64::new(0.0, 0.0); 16];
                let mut xb = xa;
                for (p, &i) in a.indices().iter().enumerate() {
                    xa[i - 1] = u[p];
                }
                for (p, &i) in b.indices().iter().enumerate() {
                    xb[i - 1] = w[p];
                }
                let d = xa
                    .iter()
                    .zip(&xb)
                    .filter(|(x, y)| (*x - *y).norm_sqr() > 1e-12)
                    .count();
                best = best.min(d);
            }
        }
        best
    }

    #[test]
    fn chip_distance_matches_spread_vector_search() {
        use crate::spread_codes::{psk_points, Codebook};
        use crate::sysconfig::SystemConfig;
        for (n, k, m, rotation) in [
            (5, 3, 2, true),
            (6, 4, 4, true),
            (6, 4, 4, false),
            (7, 2, 8, false),
        ] {
            let mut cfg = SystemConfig::new(n, k, m);
            cfg.rotation = rotation;
            let cb = Codebook::build(&cfg.validate().unwrap()).unwrap();
            let fast = ChipDistance::new(cb.codes(), &psk_points(m));
            let spread = cb.spread_vectors(m);
            let mut tuples = Vec::new();
            for s in lexicographic_subsets(n, k).into_iter().take(6) {
                let base = t(&s);
                let mut order: Vec<usize> = (0..k).collect();
                loop {
                    tuples.push(base.permuted(&order));
                    if !next_permutation(&mut order) {
                        break;
                    }
                }
            }
            for a in tuples.iter().step_by(3) {
                for b in tuples.iter().step_by(2) {
                    assert_eq!(
                        fast.distance(a, b),
                        brute_chip_distance(&spread, a, b),
                        "{a} {b}"
                    );
                }
            }
        }
    }

    #[test]
    fn chip_distance_sees_repeated_chips() {
        // Chips 2 and 3 are equal, so swapping them does not separate tuples.
        let one = Complex64::new(1.0, 0.0);
        let w = Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI / 3.0);
        let metric = ChipDistance::new(&[vec![w, one, one]], &[one]);
        assert_eq!(metric.distance(&t(&[1, 2, 3]), &t(&[1, 3, 2])), 0);
        assert_eq!(metric.distance(&t(&[1, 2, 3]), &t(&[2, 3, 4])), 3);
        assert_eq!(Positional.distance(&t(&[1, 2, 3]), &t(&[1, 3, 2])), 2);
    }
}
