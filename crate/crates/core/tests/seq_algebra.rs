use num_bigint::BigUint;
use proptest::prelude::*;
use symwcet::awcet::{AwcetError, WcetSeq};

/// Ranks compared against the expansion.
const L: usize = 40;

fn expand(s: &WcetSeq<u64>, len: usize) -> Vec<u64> {
    (0..len as u64).map(|i| *s.index(i)).collect()
}

fn seq() -> impl Strategy<Value = WcetSeq<u64>> {
    (0u64..6, prop::collection::vec(0u64..30, 0..6)).prop_map(|(tail, extra)| {
        let mut prefix: Vec<u64> = extra.into_iter().map(|v| v + tail).collect();
        prefix.sort_unstable_by(|a, b| b.cmp(a));
        WcetSeq::new(prefix, tail)
    })
}

fn non_increasing(v: &[u64]) -> bool {
    v.windows(2).all(|w| w[0] >= w[1])
}

proptest! {
    #[test]
    fn merge_is_the_sorted_union(a in seq(), b in seq()) {
        let m = a.merge(&b).unwrap();
        let mut pool = expand(&a, L);
        pool.extend(expand(&b, L));
        pool.sort_unstable_by(|x, y| y.cmp(x));
        pool.truncate(L);
        prop_assert_eq!(expand(&m, L), pool);
    }

    #[test]
    fn ranksum_adds_ranks(a in seq(), b in seq()) {
        let s = a.ranksum(&b).unwrap();
        let want: Vec<u64> = expand(&a, L).iter().zip(expand(&b, L)).map(|(x, y)| x + y).collect();
        prop_assert_eq!(expand(&s, L), want);
    }

    #[test]
    fn scalar_multiplies_ranks(a in seq(), n in 0u64..5) {
        let want: Vec<u64> = expand(&a, L).iter().map(|x| x * n).collect();
        prop_assert_eq!(expand(&a.scalar(n).unwrap(), L), want);
    }

    #[test]
    fn restrict_keeps_the_greatest(a in seq(), n in 0u64..8) {
        let r = a.restrict(Some(n)).unwrap();
        let full = expand(&a, L);
        let want: Vec<u64> = (0..L).map(|i| if (i as u64) < n { full[i] } else { 0 }).collect();
        prop_assert_eq!(expand(&r, L), want);
        prop_assert_eq!(a.restrict(None).unwrap(), a);
    }

    #[test]
    fn repeat_duplicates_ranks(a in seq(), k in 1u64..5) {
        let full = expand(&a, L);
        let want: Vec<u64> = (0..L).map(|i| full[i / k as usize]).collect();
        prop_assert_eq!(expand(&a.repeat(Some(k)).unwrap(), L), want);
    }

    #[test]
    fn group_sums_add_consecutive_ranks(a in seq(), x in 1u64..5) {
        let full = expand(&a, L * 5);
        let want: Vec<u64> = (0..L).map(|i| full[i * x as usize..(i + 1) * x as usize].iter().sum()).collect();
        prop_assert_eq!(expand(&a.group_sums(x).unwrap(), L), want);
    }

    #[test]
    fn eval_sums_the_n_greatest_of_the_repetition(a in seq(), e in 1u64..4, k in 1u64..4) {
        let n = e * k;
        let full = expand(&a, L);
        let want: u64 = (0..n as usize).map(|i| full[i / e as usize]).sum();
        prop_assert_eq!(a.eval(e, n).unwrap(), want);
        prop_assert_eq!(a.eval(2, 4).unwrap(), 2 * a.eval(1, 2).unwrap());
        prop_assert_eq!(a.eval(1, 1).unwrap(), *a.greatest());
    }

    #[test]
    fn results_stay_non_increasing(a in seq(), b in seq(), n in 1u64..4) {
        for s in [a.merge(&b).unwrap(), a.ranksum(&b).unwrap(), a.group_sums(n).unwrap(), a.restrict(Some(n)).unwrap()] {
            prop_assert!(non_increasing(&expand(&s, L)));
        }
    }

    #[test]
    fn text_round_trip(a in seq()) {
        prop_assert_eq!(a.to_string().parse::<WcetSeq<u64>>().unwrap(), a);
    }

    #[test]
    fn big_integers_agree_with_u64(a in seq(), b in seq(), x in 1u64..4) {
        let big = |s: &WcetSeq<u64>| s.to_string().parse::<WcetSeq<BigUint>>().unwrap();
        let (ba, bb) = (big(&a), big(&b));
        prop_assert_eq!(ba.merge(&bb).unwrap().to_string(), a.merge(&b).unwrap().to_string());
        prop_assert_eq!(ba.ranksum(&bb).unwrap().to_string(), a.ranksum(&b).unwrap().to_string());
        prop_assert_eq!(ba.group_sums(x).unwrap().to_string(), a.group_sums(x).unwrap().to_string());
    }
}

#[test]
fn worked_merge() {
    let a: WcetSeq<u64> = "[8,8|4]".parse().unwrap();
    let b: WcetSeq<u64> = "[9,8,3|2]".parse().unwrap();
    assert_eq!(a.merge(&b).unwrap().to_string(), "[9,8,8,8|4]");
}

#[test]
fn overflow_is_reported() {
    let a = WcetSeq::constant(u64::MAX);
    assert_eq!(a.ranksum(&a), Err(AwcetError::Overflow));
    assert_eq!(a.scalar(2), Err(AwcetError::Overflow));
    let big = WcetSeq::constant(BigUint::from(u64::MAX));
    assert_eq!(
        big.ranksum(&big).unwrap().greatest(),
        &(BigUint::from(u64::MAX) * 2u32)
    );
}

#[test]
fn eval_requires_a_multiple() {
    let a: WcetSeq<u64> = "[11|1]".parse().unwrap();
    assert_eq!(a.eval(1, 4).unwrap(), 14);
    assert_eq!(a.eval(2, 3), Err(AwcetError::NotMultiple { e: 2, n: 3 }));
}
