use knotcov::algebra::{alexander_polynomial, exponent_minors, homology};
use knotcov::diagram::{parse_corpus, torus_diagram, KnotDiagram};
use knotcov::presentation::exponent_sums;
use knotcov::spine::{build_initial_spine, spine_data, verify_standard};
use num_bigint::BigInt;
use num_traits::Signed;
use proptest::prelude::*;

const CORPUS: &str = include_str!("../../../corpus/knots.pd");

fn knots() -> Vec<(String, KnotDiagram)> {
    parse_corpus(CORPUS)
        .unwrap()
        .into_iter()
        .filter(|(_, d)| d.crossing_count() > 1)
        .collect()
}

fn check_diagram(name: &str, d: &KnotDiagram) {
    let c = d.crossing_count();
    let cp = build_initial_spine(d);
    assert_eq!(cp.vertex_count(), 4 * c, "{name}");
    let local = verify_standard(&cp);
    assert!(local.passes(), "{name}: {:?}", local.messages);
    assert_ne!(local.euler_characteristic, 0, "{name}: C' is not a spine of the complement");

    let sd = spine_data(d).unwrap_or_else(|e| panic!("{name}: {e}"));
    let n = sd.spine.vertex_count();
    let r = verify_standard(&sd.spine);
    assert!(r.passes(), "{name}: {:?}", r.messages);
    assert!(n < 4 * c, "{name}");
    assert_eq!(sd.spine.edge_count(), 2 * n, "{name}");
    assert_eq!(sd.spine.face_count(), n, "{name}");

    let t = &sd.triangulation;
    assert_eq!(t.tetrahedra(), n);
    assert_eq!(t.face_pairs().len(), 2 * n);
    assert!(t.is_consistent() && t.is_orientable(), "{name}");

    let p = &sd.presentation;
    assert_eq!(p.generator_count, n + 1, "{name}");
    assert_eq!(p.relators.len(), n, "{name}");
    assert_eq!(p.total_relator_length(), 3 * (n + 1), "{name}");
    let h = homology(p);
    assert_eq!((h.free_rank, h.torsion.len()), (1, 0), "{name}: H1 = {h}");

    let bound = BigInt::from(3).pow(n as u32);
    for m in exponent_minors(p).unwrap() {
        assert!(m.abs() <= bound, "{name}: minor {m} exceeds 3^n");
    }

    let spine_delta = alexander_polynomial(p).unwrap();
    let wirt_delta = alexander_polynomial(&d.wirtinger_presentation()).unwrap();
    assert!(spine_delta.unit_equivalent(&wirt_delta), "{name}: {spine_delta} vs {wirt_delta}");

    let per = p.peripheral.as_ref().unwrap();
    assert_eq!(sd.boundary.euler_characteristic, 0);
    assert!(per.x.len() <= 4 * n && per.y.len() <= 4 * n, "{name}");
    let nu = knotcov::algebra::abelianization_exponents(p).unwrap();
    let image = |w: &[i32]| -> i64 {
        exponent_sums(w, p.generator_count).iter().zip(&nu.0).map(|(a, b)| a * b).sum()
    };
    assert_eq!((image(&per.x), image(&per.y)), (per.a, per.b));
    assert_eq!(image(&per.longitude), 0, "{name}");
    // the boundary torus surjects onto H1 of a knot complement
    assert_eq!(num_integer::gcd(per.a, per.b), 1, "{name}");
}

#[test]
fn corpus_spines() {
    let ks = knots();
    assert!(ks.len() >= 10);
    for (name, d) in &ks {
        check_diagram(name, d);
    }
}

#[test]
fn spine_export_is_deterministic() {
    let (_, d) = &knots()[0];
    let a = spine_data(d).unwrap();
    let b = spine_data(d).unwrap();
    assert_eq!(a.spine.to_json(), b.spine.to_json());
    assert_eq!(a.triangulation.gluing_table(), b.triangulation.gluing_table());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn torus_spines(p in 2u32..5, q in 3u32..8) {
        prop_assume!(num_integer::gcd(p, q) == 1 && p < q);
        let d = torus_diagram(p, q).unwrap();
        check_diagram(&format!("T({p},{q})"), &d);
    }
}
