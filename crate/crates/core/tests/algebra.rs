use knotcov::algebra::{
    alexander_polynomial, determinant, fox_derivative, mat_mul, smith_normal_form, to_big_matrix,
    GroupRingElement,
};
use knotcov::diagram::parse_corpus;
use knotcov::presentation::{free_reduce, gen_of, letter, Word};
use knotcov::spine::spine_data;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

const CORPUS: &str = include_str!("../../../corpus/knots.pd");

/// Fox derivative from the prefix formula, accumulated in a plain map of
/// reduced words.
fn fox_oracle(w: &[i32], i: usize) -> BTreeMap<Word, i64> {
    let mut out: BTreeMap<Word, i64> = BTreeMap::new();
    for (j, &l) in w.iter().enumerate() {
        if gen_of(l) != i {
            continue;
        }
        let (prefix, c) = if l > 0 { (&w[..j], 1) } else { (&w[..=j], -1) };
        *out.entry(free_reduce(prefix)).or_default() += c;
    }
    out.retain(|_, c| *c != 0);
    out
}

fn as_map(e: &GroupRingElement) -> BTreeMap<Word, i64> {
    e.terms().iter().map(|(w, c)| (w.clone(), i64::try_from(c.clone()).unwrap())).collect()
}

fn random_word(rng: &mut ChaCha8Rng, gens: usize, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| letter(rng.gen_range(0..gens), if rng.gen_bool(0.5) { 1 } else { -1 })).collect()
}

#[test]
fn fox_fundamental_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (name, d) in parse_corpus(CORPUS).unwrap() {
        let g = d.wirtinger_presentation().generator_count;
        for _ in 0..1000 {
            let w = random_word(&mut rng, g, 12);
            let lhs = GroupRingElement::word(&w).sub(&GroupRingElement::one());
            let mut rhs = GroupRingElement::zero();
            for i in 0..g {
                let di = fox_derivative(&w, i, g).unwrap();
                assert_eq!(as_map(&di), fox_oracle(&w, i), "{name}: {w:?}");
                let xi = GroupRingElement::word(&[letter(i, 1)]).sub(&GroupRingElement::one());
                rhs = rhs.add(&di.mul(&xi));
            }
            assert_eq!(lhs, rhs, "{name}: {w:?}");
        }
    }
}

#[test]
fn alexander_degree_bound() {
    for (name, d) in parse_corpus(CORPUS).unwrap() {
        if d.crossing_count() < 2 {
            continue;
        }
        let sd = spine_data(&d).unwrap();
        let n = sd.spine.vertex_count() as u32;
        let delta = alexander_polynomial(&sd.presentation).unwrap();
        let bound = 3u64.pow(n + 1) * (n as u64) * (n as u64 + 1);
        assert!((delta.span() as u64) <= bound, "{name}");
    }
}

fn check_smith(m: Vec<Vec<i64>>) {
    let mb = to_big_matrix(&m);
    let s = smith_normal_form(&mb);
    let d = mat_mul(&mat_mul(&s.u, &mb), &s.v);
    for (i, row) in d.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            if i == j && i < s.rank {
                assert_eq!(x, &s.diagonal[i]);
                assert!(x.is_positive());
            } else {
                assert!(x.is_zero(), "off-diagonal entry in {d:?}");
            }
        }
    }
    for w in s.diagonal[..s.rank].windows(2) {
        assert!((&w[1] % &w[0]).is_zero());
    }
    assert!(determinant(&s.u).abs().is_one());
    assert!(determinant(&s.v).abs().is_one());
    // rank from the oracle: largest nonzero minor size via fraction-free elimination
    assert_eq!(s.rank, rank_oracle(&m));
}

fn rank_oracle(m: &[Vec<i64>]) -> usize {
    let mut a: Vec<Vec<BigInt>> = to_big_matrix(m);
    let cols = a.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..a.len()).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        for i in r + 1..a.len() {
            let f = a[i][c].clone();
            let pv = a[r][c].clone();
            for j in 0..cols {
                a[i][j] = &a[i][j] * &pv - &a[r][j] * &f;
            }
        }
        r += 1;
    }
    r
}

proptest! {
    #[test]
    fn smith_form_properties(m in (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec(-20i64..20, c), r)
    })) {
        check_smith(m);
    }
}
