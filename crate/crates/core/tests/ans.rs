mod support;

use multiset_ans::ans::{HEAD_MIN, MAX_PRECISION};
use multiset_ans::{AnsState, CodeTriple, Error};
use proptest::prelude::*;
use rand::Rng;
use support::ExactAns;

fn t(c: u64, p: u64, n: u64) -> CodeTriple {
    CodeTriple::new(c, p, n).unwrap()
}

#[test]
fn exact_formulas_by_hand() {
    let mut s = ExactAns::new(5);
    s.encode(1, 2, 4);
    assert_eq!(s.value, 10u32.into());
    assert_eq!(s.peek(4), 2);
    s.decode(1, 2, 4);
    assert_eq!(s.value, 5u32.into());

    let mut s = ExactAns::new(1 << 20);
    s.encode(0, 1, 2);
    assert_eq!(s.value, (1u64 << 21).into());
}

#[test]
fn minimal_state() {
    let s = AnsState::new();
    assert_eq!(s.head(), 1 << 31);
    assert_eq!(s.length_bits(), 64);
    assert_eq!(s.peek(8).unwrap(), 0);
    assert_eq!(s.peek(1).unwrap(), 0);
    let bytes = s.to_bytes();
    assert_eq!(bytes.len(), 8);
    assert_eq!(u64::from_be_bytes(bytes.try_into().unwrap()), 1 << 31);
}

#[test]
fn serialized_length_follows_words() {
    let s = AnsState::from_parts(HEAD_MIN + 7, vec![1, 2]).unwrap();
    assert_eq!(s.to_bytes().len(), 16);
    assert_eq!(s.length_bits(), 128);
    let s = AnsState::from_parts(HEAD_MIN, vec![1, 2, 3]).unwrap();
    assert_eq!(s.length_bits(), 160);
}

#[test]
fn bad_serializations() {
    for len in [0usize, 4, 7, 9, 13] {
        assert!(matches!(AnsState::from_bytes(&vec![0x80; len]), Err(Error::Format(_))));
    }
    // head below L
    assert!(AnsState::from_bytes(&[0u8; 8]).is_err());
    assert!(AnsState::from_parts(1 << 63, vec![]).is_err());
}

#[test]
fn invalid_triples() {
    assert!(CodeTriple::new(0, 0, 4).is_err());
    assert!(CodeTriple::new(3, 2, 4).is_err());
    assert!(CodeTriple::new(0, 1, MAX_PRECISION + 1).is_err());
    assert!(CodeTriple::new(0, 1, 0).is_err());
    assert!(CodeTriple::new(0, 1, MAX_PRECISION).is_ok());
}

#[test]
fn decode_outside_interval_leaves_state() {
    let mut s = AnsState::new();
    s.encode(t(3, 1, 8)).unwrap();
    let before = s.clone();
    assert!(matches!(
        s.decode(t(0, 2, 8)),
        Err(Error::IndexOutsideInterval { index: 3, .. })
    ));
    assert_eq!(s, before);
}

#[test]
fn uniform_256_costs_eight_bits() {
    let mut rng = support::rng(11);
    let mut s = AnsState::new();
    let k = 10_000;
    for _ in 0..k {
        s.encode(t(rng.random_range(0..256), 1, 256)).unwrap();
    }
    let per = (s.content_bits() - 31.0) / k as f64;
    assert!((per - 8.0).abs() < 0.01, "{per}");
}

#[test]
fn growth_within_redundancy_bound() {
    let mut rng = support::rng(12);
    let mut s = AnsState::new();
    let start = s.content_bits();
    let mut ideal = 0.0;
    let k = 20_000u64;
    for _ in 0..k {
        let n = rng.random_range(1..=1u64 << 24);
        let p = rng.random_range(1..=n);
        let c = rng.random_range(0..=n - p);
        ideal += (n as f64 / p as f64).log2();
        s.encode(t(c, p, n)).unwrap();
    }
    let grown = s.content_bits() - start;
    assert!(grown <= ideal + k as f64 * 2.2e-5 + 1.0, "{grown} vs {ideal}");
}

fn arb_triple() -> impl Strategy<Value = CodeTriple> {
    (1u64..=MAX_PRECISION)
        .prop_flat_map(|n| (Just(n), 1..=n))
        .prop_flat_map(|(n, p)| (0..=n - p).prop_map(move |c| t(c, p, n)))
}

fn arb_state() -> impl Strategy<Value = AnsState> {
    (HEAD_MIN..HEAD_MIN << 32, prop::collection::vec(any::<u32>(), 0..6))
        .prop_map(|(h, w)| AnsState::from_parts(h, w).unwrap())
}

proptest! {
    #[test]
    fn decode_inverts_encode(s in arb_state(), tr in arb_triple()) {
        let mut x = s.clone();
        x.encode(tr).unwrap();
        let i = x.peek(tr.precision()).unwrap();
        prop_assert!(i >= tr.cumulative() && i < tr.cumulative() + tr.mass());
        x.decode(tr).unwrap();
        prop_assert_eq!(x, s);
    }

    #[test]
    fn encode_inverts_decode(s in arb_state(), n in 1u64..=MAX_PRECISION, cut in any::<u64>()) {
        // pick the interval containing the current index
        let i = s.peek(n).unwrap();
        let c = cut % (i + 1);
        let p = i - c + 1 + (cut >> 32) % (n - i);
        let tr = t(c, p, n);
        let mut x = s.clone();
        x.decode(tr).unwrap();
        x.encode(tr).unwrap();
        prop_assert_eq!(x, s);
    }

    #[test]
    fn identity_triple_is_noop(s in arb_state(), n in 1u64..=MAX_PRECISION) {
        let mut x = s.clone();
        x.encode(t(0, n, n)).unwrap();
        prop_assert_eq!(&x, &s);
        x.decode(t(0, n, n)).unwrap();
        prop_assert_eq!(x, s);
    }

    #[test]
    fn serialization_round_trip(s in arb_state()) {
        let bytes = s.to_bytes();
        prop_assert_eq!(bytes.len() as u64 * 8, s.length_bits());
        prop_assert_eq!(AnsState::from_bytes(&bytes).unwrap(), s);
    }

    #[test]
    fn head_stays_in_range(s in arb_state(), ops in prop::collection::vec(arb_triple(), 1..40)) {
        let mut x = s;
        for tr in &ops {
            x.encode(*tr).unwrap();
            prop_assert!((HEAD_MIN..HEAD_MIN << 32).contains(&x.head()));
        }
        for tr in ops.iter().rev() {
            x.decode(*tr).unwrap();
            prop_assert!((HEAD_MIN..HEAD_MIN << 32).contains(&x.head()));
        }
    }

    #[test]
    fn length_never_shrinks_on_encode(s in arb_state(), tr in arb_triple()) {
        let mut x = s.clone();
        x.encode(tr).unwrap();
        prop_assert!(x.length_bits() >= s.length_bits());
    }
}
