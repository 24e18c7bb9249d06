use knotcov::algebra::{
    abelianization_exponents, alexander_polynomial, homology, LaurentPolynomial,
};
use knotcov::diagram::{parse_corpus, parse_dt, parse_pd, torus_diagram};
use num_bigint::BigInt;

const CORPUS: &str = include_str!("../../../corpus/knots.pd");

/// Plain i64 polynomial helpers, independent of the library's arithmetic.
fn mul(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut out = vec![0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn div_exact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut r = a.to_vec();
    let mut q = vec![0; a.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let c = r[i + b.len() - 1] / b[b.len() - 1];
        q[i] = c;
        for (j, y) in b.iter().enumerate() {
            r[i + j] -= c * y;
        }
    }
    assert!(r.iter().all(|&x| x == 0));
    q
}

fn t_pow_minus_one(n: usize) -> Vec<i64> {
    let mut v = vec![0; n + 1];
    v[0] = -1;
    v[n] = 1;
    v
}

fn torus_oracle(u: usize, v: usize) -> Vec<i64> {
    let num = mul(&t_pow_minus_one(u * v), &t_pow_minus_one(1));
    let den = mul(&t_pow_minus_one(u), &t_pow_minus_one(v));
    div_exact(&num, &den)
}

fn lp(cs: &[i64]) -> LaurentPolynomial {
    LaurentPolynomial::from_coeffs(cs)
}

#[test]
fn torus_knots_match_closed_form() {
    for (u, v) in [(2, 3), (2, 5), (2, 7), (3, 4), (3, 5), (4, 3)] {
        let d = torus_diagram(u, v).unwrap();
        let delta = alexander_polynomial(&d.wirtinger_presentation()).unwrap();
        let want = torus_oracle(u as usize, v as usize);
        assert_eq!(delta, lp(&want), "T({u},{v})");
        assert_eq!(delta.span(), ((u - 1) * (v - 1)) as usize);
    }
}

#[test]
fn torus_symmetry() {
    let a = alexander_polynomial(&torus_diagram(2, 5).unwrap().wirtinger_presentation()).unwrap();
    let b = alexander_polynomial(&torus_diagram(5, 2).unwrap().wirtinger_presentation()).unwrap();
    assert!(a.unit_equivalent(&b));
}

#[test]
fn corpus_alexander_table() {
    let table: &[(&str, &[i64])] = &[
        ("unknot1", &[1]),
        ("3_1", &[1, -1, 1]),
        ("4_1", &[1, -3, 1]),
        ("4_1dt", &[1, -3, 1]),
        ("5_1", &[1, -1, 1, -1, 1]),
        ("5_2", &[2, -3, 2]),
        ("6_1", &[2, -5, 2]),
        ("6_2", &[1, -3, 3, -3, 1]),
        ("6_3", &[1, -3, 5, -3, 1]),
        ("7_1", &[1, -1, 1, -1, 1, -1, 1]),
        ("7_2", &[3, -5, 3]),
        ("7_4", &[4, -7, 4]),
        ("8_19", &[1, -1, 0, 1, 0, -1, 1]),
        ("8_19dt", &[1, -1, 0, 1, 0, -1, 1]),
    ];
    let corpus = parse_corpus(CORPUS).unwrap();
    assert_eq!(corpus.len(), table.len());
    for ((name, d), (want_name, want)) in corpus.iter().zip(table) {
        assert_eq!(name, want_name);
        let p = d.wirtinger_presentation();
        let h = homology(&p);
        assert_eq!((h.free_rank, h.torsion.len()), (1, 0), "{name}");
        assert!(abelianization_exponents(&p).unwrap().0.iter().all(|&x| x == 1), "{name}");
        let delta = alexander_polynomial(&p).unwrap();
        assert_eq!(delta, lp(want), "{name}");
        assert!(delta.unit_equivalent(&delta.reflect()));
        assert_eq!(delta.eval_normal(1).magnitude(), BigInt::from(1).magnitude());
    }
}

#[test]
fn dt_trefoil_matches_pd() {
    let a = alexander_polynomial(&parse_dt("4 6 2").unwrap().wirtinger_presentation()).unwrap();
    let b = alexander_polynomial(
        &parse_pd("X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)").unwrap().wirtinger_presentation(),
    )
    .unwrap();
    assert_eq!(a, b);
}

#[test]
fn round_trip_canonical() {
    for (name, d) in parse_corpus(CORPUS).unwrap() {
        assert_eq!(parse_pd(&d.emit_pd()).unwrap(), d, "{name}");
    }
}
