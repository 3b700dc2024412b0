use num_complex::Complex64;
use proptest::prelude::*;

use sssim::channel::{apply_channel, sample_channel, trial_rng};
use sssim::detectors::{Detector, DetectorKind};
use sssim::index_maps::{combinadic_decode, combinadic_encode};
use sssim::sysconfig::{
    binomial, bits_to_word, floor_log2, word_to_bits, MapperKind, SystemConfig,
};
use sssim::Modem;

fn config() -> impl Strategy<Value = (usize, usize, usize)> {
    (3usize..=8).prop_flat_map(|n| (Just(n), 1..n, prop::sample::select(vec![2usize, 4, 8, 16])))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn word_split_join((n, k, m) in config(), seed in any::<u64>()) {
        let b = SystemConfig::new(n, k, m).validate().unwrap().budget;
        let w = seed & ((1u64 << b.total()) - 1);
        let (s, c, q) = b.split_word(w);
        prop_assert_eq!(b.join_word(s, c, q), w);
        let bits = word_to_bits(w, b.total());
        let (bs, bc, bq) = b.split_bits(&bits).unwrap();
        prop_assert_eq!((bits_to_word(bs), bits_to_word(bc), bits_to_word(bq)), (s, c, q));
    }

    #[test]
    fn combinadic_round_trip(n in 2usize..=20, kf in 0.0f64..1.0, j in any::<u64>()) {
        let k = 1 + ((n - 1) as f64 * kf) as usize;
        let p1 = floor_log2(binomial(n, k));
        prop_assume!(p1 > 0);
        let j = j % (1u64 << p1);
        let t = combinadic_encode(j, n, k).unwrap();
        prop_assert_eq!(t.len(), k);
        prop_assert!(t.indices().windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(combinadic_decode(&t, p1).unwrap(), j);
    }

    #[test]
    fn encode_decode_round_trip((n, k, m) in config(), mapper in prop::sample::select(vec![MapperKind::Osi, MapperKind::Combinatorial]), w in any::<u64>()) {
        let cfg = SystemConfig::new(n, k, m).with_mapper(mapper).validate();
        prop_assume!(cfg.as_ref().is_ok_and(|c| c.budget.p1 > 0 && k <= 6));
        let md = Modem::new(&cfg.unwrap()).unwrap();
        let w = w % md.hypothesis_count() as u64;
        let sym = md.encode_word(w);
        prop_assert_eq!(sym.x.iter().filter(|x| x.norm() > 0.5).count(), k);
        let bits = md.decode(&sym.theta, sym.code_index, sym.mary_index).unwrap();
        prop_assert_eq!(bits_to_word(&bits), w);
    }

    #[test]
    fn noiseless_detection((n, k, m) in config(), w in any::<u64>(), t in any::<u64>()) {
        let cfg = SystemConfig::new(n, k, m).validate();
        prop_assume!(cfg.as_ref().is_ok_and(|c| c.budget.p1 > 0 && c.budget.total() <= 10 && k <= 6));
        let md = Modem::new(&cfg.unwrap()).unwrap();
        let w = w % md.hypothesis_count() as u64;
        let mut rng = trial_rng(t, 0);
        let h = sample_channel(n, &mut rng);
        let y = apply_channel(&md.encode_word(w).x, &h, 0.0, &mut rng).unwrap();
        for kind in DetectorKind::ALL {
            prop_assert_eq!(Detector::new(kind, &md).detect(&md, &y, &h).word(&md), w);
        }
    }

    #[test]
    fn ml_metric_never_exceeds_others(w in 0u64..32, t in any::<u64>(), n0 in 0.01f64..2.0) {
        let md = Modem::new(&SystemConfig::new(4, 2, 4).validate().unwrap()).unwrap();
        let mut rng = trial_rng(t, 1);
        let h = sample_channel(4, &mut rng);
        let y: Vec<Complex64> = apply_channel(&md.encode_word(w).x, &h, n0, &mut rng).unwrap();
        let ml = Detector::new(DetectorKind::Ml, &md).detect(&md, &y, &h).metric;
        for kind in [DetectorKind::NearMl, DetectorKind::LlrMrc] {
            prop_assert!(ml <= Detector::new(kind, &md).detect(&md, &y, &h).metric);
        }
    }
}
