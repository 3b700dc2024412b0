use super::osi::family_distance_score;
use super::{family_metrics, lexicographic_subsets, osi_reorder, SiFamily, SiTuple, TupleDistance};
use crate::error::{Error, Result};
use crate::sysconfig::{binomial, floor_log2, MapperKind};

/// Largest number of candidate set selections searched exhaustively.
pub const SISR_EXHAUSTIVE_LIMIT: u64 = 20_000;

/// Reduced family of `2^p1_target` tuples.
///
/// Every selection of index sets is reordered with [`osi_reorder`] and scored
/// by the minimum and sum of `metric`, then by positional `kappa` and
/// `gamma`. Selections are searched exhaustively when there are at most
/// [`SISR_EXHAUSTIVE_LIMIT`] of them and greedily (one set at a time)
/// otherwise.
pub fn sisr_family(
    n: usize,
    k: usize,
    p1_target: u32,
    metric: &dyn TupleDistance,
) -> Result<SiFamily> {
    let total = binomial(n, k);
    let full = floor_log2(total);
    if p1_target == 0 || p1_target >= full {
        return Err(Error::Config(format!(
            "SISR target p1 must satisfy 1 <= p1 < {full}, got {p1_target}"
        )));
    }
    let pool: Vec<SiTuple> = lexicographic_subsets(n, k)
        .into_iter()
        .map(|s| SiTuple::new(s, n))
        .collect::<Result<_>>()?;
    let size = 1usize << p1_target;

    let selections = binomial(pool.len(), size);
    let best = if selections != 0 && selections <= SISR_EXHAUSTIVE_LIMIT {
        exhaustive(&pool, size, metric)
    } else {
        greedy(&pool, size, metric)
    };
    SiFamily::new(best, MapperKind::Sisr)
}

type Score = (usize, usize, usize, usize);

fn score(tuples: &[SiTuple], metric: &dyn TupleDistance) -> Score {
    let (dmin, dsum) = family_distance_score(tuples, metric);
    let m = family_metrics(tuples);
    (dmin, dsum, m.kappa, m.gamma)
}

fn exhaustive(pool: &[SiTuple], size: usize, metric: &dyn TupleDistance) -> Vec<SiTuple> {
    let mut best: Option<(Score, Vec<SiTuple>)> = None;
    let mut pick: Vec<usize> = (0..size).collect();
    loop {
        let chosen: Vec<SiTuple> = pick.iter().map(|&i| pool[i].clone()).collect();
        let fam = osi_reorder(&chosen, metric);
        let s = score(&fam, metric);
        if best.as_ref().is_none_or(|(b, _)| s > *b) {
            best = Some((s, fam));
        }
        // advance to the next combination of pool positions
        let mut i = size;
        while i > 0 && pick[i - 1] == pool.len() - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        pick[i - 1] += 1;
        for j in i..size {
            pick[j] = pick[j - 1] + 1;
        }
    }
    best.expect("at least one selection").1
}

fn greedy(pool: &[SiTuple], size: usize, metric: &dyn TupleDistance) -> Vec<SiTuple> {
    let mut chosen = vec![pool[0].clone()];
    let mut used = vec![false; pool.len()];
    used[0] = true;
    while chosen.len() < size {
        let mut best: Option<(Score, usize, Vec<SiTuple>)> = None;
        for (i, cand) in pool.iter().enumerate() {
            if used[i] {
                continue;
            }
            let mut trial = chosen.clone();
            trial.push(cand.clone());
            let fam = osi_reorder(&trial, metric);
            let s = score(&fam, metric);
            if best.as_ref().is_none_or(|(b, _, _)| s > *b) {
                best = Some((s, i, fam));
            }
        }
        let (_, i, fam) = best.expect("pool larger than target");
        used[i] = true;
        chosen = fam;
    }
    chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index_maps::Positional;

    #[test]
    fn four_three_reaches_full_positional_kappa() {
        let fam = sisr_family(4, 3, 1, &Positional).unwrap();
        assert_eq!(fam.len(), 2);
        assert_eq!(fam.metrics().kappa, 3);
    }

    #[test]
    fn rejects_bad_targets() {
        assert!(sisr_family(4, 3, 0, &Positional).is_err());
        assert!(sisr_family(4, 3, 2, &Positional).is_err());
        assert!(sisr_family(4, 2, 2, &Positional).is_err());
    }

    #[test]
    fn greedy_path_on_large_pool() {
        // C(C(8,4), 16) is far above the exhaustive limit
        let fam = sisr_family(8, 4, 4, &Positional).unwrap();
        assert_eq!(fam.len(), 16);
        assert!(fam.metrics().kappa >= 2);
    }
}
