use super::{SiFamily, SiTuple};
use crate::error::{Error, Result};
use crate::sysconfig::{binomial, MapperKind};

/// The `j`-th `k`-subset of `{1..n}` in combinatorial-number-system order,
/// indices ascending: `j = C(c_k, k) + ... + C(c_1, 1)` with `c_k > ... > c_1 >= 0`.
pub fn combinadic_encode(j: u64, n: usize, k: usize) -> Result<SiTuple> {
    let total = binomial(n, k);
    if j >= total {
        return Err(Error::OutOfRange {
            value: j,
            bound: total,
        });
    }
    let mut rest = j;
    let mut out = Vec::with_capacity(k);
    let mut upper = n;
    for i in (1..=k).rev() {
        // largest c < upper with C(c, i) <= rest
        let mut c = upper - 1;
        while binomial(c, i) > rest {
            c -= 1;
        }
        rest -= binomial(c, i);
        out.push(c + 1);
        upper = c;
    }
    out.reverse();
    SiTuple::new(out, n)
}

/// Inverse of [`combinadic_encode`]; intra-tuple order is ignored. Fails when
/// the rank is not below `2^p1`, i.e. the set is not used by the mapper.
pub fn combinadic_decode(theta: &SiTuple, p1: u32) -> Result<u64> {
    let sorted = theta.sorted();
    let j: u64 = sorted
        .iter()
        .enumerate()
        .map(|(i, &idx)| binomial(idx - 1, i + 1))
        .sum();
    if j >= 1u64 << p1 {
        return Err(Error::NotInFamily(sorted));
    }
    Ok(j)
}

pub fn combinatorial_family(n: usize, k: usize, p1: u32) -> Result<SiFamily> {
    let tuples = (0..1u64 << p1)
        .map(|j| combinadic_encode(j, n, k))
        .collect::<Result<Vec<_>>>()?;
    SiFamily::new(tuples, MapperKind::Combinatorial)
}

/// All `k`-subsets of `{1..n}` as ascending vectors, in lexicographic order.
pub fn lexicographic_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(n, k) as usize);
    if k == 0 || k > n {
        return out;
    }
    let mut cur: Vec<usize> = (1..=k).collect();
    loop {
        out.push(cur.clone());
        let mut i = k;
        while i > 0 && cur[i - 1] == n - k + i {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        cur[i - 1] += 1;
        for j in i..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sysconfig::{floor_log2, word_to_bits};

    // Independent ranking: count subsets preceding `set` in colex order.
    fn colex_rank_by_enumeration(n: usize, k: usize, set: &[usize]) -> u64 {
        let target: u32 = set.iter().map(|&i| 1u32 << (i - 1)).sum();
        let mut masks: Vec<u32> = (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == k)
            .collect();
        // colex order on masks is plain numeric order
        masks.sort_unstable();
        masks.iter().position(|&m| m == target).unwrap() as u64
    }

    #[test]
    fn encode_examples() {
        assert_eq!(combinadic_encode(0, 4, 2).unwrap().indices(), &[1, 2]);
        assert_eq!(combinadic_encode(2, 4, 2).unwrap().indices(), &[2, 3]);
        assert_eq!(combinadic_encode(3, 4, 2).unwrap().indices(), &[1, 4]);
        assert!(combinadic_encode(6, 4, 2).is_err());
    }

    #[test]
    fn decode_examples() {
        let t = |v: &[usize]| SiTuple::new(v.to_vec(), 4).unwrap();
        assert_eq!(
            word_to_bits(combinadic_decode(&t(&[1, 2]), 2).unwrap(), 2),
            [false, false]
        );
        assert_eq!(
            word_to_bits(combinadic_decode(&t(&[2, 3]), 2).unwrap(), 2),
            [true, false]
        );
        assert_eq!(combinadic_decode(&t(&[2, 1]), 2).unwrap(), 0);
        // (3,4) has rank 5, outside a 4-entry family
        assert!(combinadic_decode(&t(&[3, 4]), 2).is_err());
    }

    #[test]
    fn bijection_matches_enumeration_oracle() {
        for n in 2..=8 {
            for k in 1..=n {
                let total = binomial(n, k);
                let p1 = floor_log2(total);
                for j in 0..total {
                    let t = combinadic_encode(j, n, k).unwrap();
                    assert_eq!(colex_rank_by_enumeration(n, k, t.indices()), j);
                    if j < 1 << p1 {
                        assert_eq!(combinadic_decode(&t, p1).unwrap(), j);
                    }
                }
            }
        }
    }

    #[test]
    fn lexicographic_order() {
        let s = lexicographic_subsets(4, 2);
        assert_eq!(
            s,
            vec![
                vec![1, 2],
                vec![1, 3],
                vec![1, 4],
                vec![2, 3],
                vec![2, 4],
                vec![3, 4]
            ]
        );
        assert_eq!(lexicographic_subsets(5, 5), vec![vec![1, 2, 3, 4, 5]]);
        for n in 2..=8 {
            for k in 1..=n {
                assert_eq!(lexicographic_subsets(n, k).len() as u64, binomial(n, k));
            }
        }
    }
}
