use knotcov::algebra::alexander_polynomial;
use knotcov::covers::*;
use knotcov::diagram::{parse_corpus, parse_pd};
use knotcov::presentation::GroupPresentation;
use knotcov::repvar::{build_system, solve_mod_p};
use knotcov::spine::spine_data;
use num_integer::Integer;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS: &str = include_str!("../../../corpus/knots.pd");
const TREFOIL: &str = "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)";
const FIGURE_EIGHT: &str = "X(4,2,5,1) X(8,6,1,5) X(6,3,7,4) X(2,7,3,8)";

fn primes_upto(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| (2..p).take_while(|d| d * d <= p).all(|d| p % d != 0)).collect()
}

#[test]
fn colorings_exist_iff_prime_divides_determinant() {
    for (name, d) in parse_corpus(CORPUS).unwrap() {
        let det = alexander_polynomial(&d.wirtinger_presentation()).unwrap().eval_normal(-1);
        for p in primes_upto(13).into_iter().filter(|&p| p > 2) {
            let h = pcoloring_cover(&d, p).unwrap();
            let divides = (&det % p as i64) == 0.into();
            assert_eq!(h.is_some(), divides, "{name}, p = {p}, det = {det}");
            if let Some(h) = h {
                assert!(h.verified);
                assert_eq!(h.image_order, 2 * p);
                assert_eq!(h.certificate(), Certificate::Nonabelian);
            }
        }
    }
}

#[test]
fn named_colorings() {
    let trefoil = parse_pd(TREFOIL).unwrap();
    let eight = parse_pd(FIGURE_EIGHT).unwrap();
    assert!(pcoloring_cover(&trefoil, 3).unwrap().is_some());
    assert!(pcoloring_cover(&trefoil, 5).unwrap().is_none());
    assert!(pcoloring_cover(&eight, 5).unwrap().is_some());
    assert!(pcoloring_cover(&eight, 3).unwrap().is_none());
}

#[test]
fn trefoil_sl2_cover() {
    let p = parse_pd(TREFOIL).unwrap().wirtinger_presentation();
    let found = sl2_rep_search(&p, 5, 10_000_000).unwrap();
    assert!(found.complete);
    assert!(!found.homs.is_empty());
    let per = p.peripheral.clone().unwrap();
    let theta = theta_hom(&p, 5).unwrap();
    assert_eq!(theta.certificate(), Certificate::Cyclic);
    for rho in &found.homs {
        assert!(rho.verified && !rho.abelian_image);
        // the boundary torus maps to an abelian subgroup
        assert!(images_commute(rho, &per.x, &per.longitude));
        let cover = product_cover(rho, &theta).unwrap();
        assert_eq!(cover.certificate, Certificate::Nonabelian);
        assert!(cover.sheets <= 600);
        assert_eq!(cover.sheets % rho.image_order, 0);
    }
}

fn engines_agree(p: &GroupPresentation, x0: &[i32], q: u64) -> usize {
    let s = build_system(p, x0, None).unwrap();
    let a = solve_mod_p(&s, q, u64::MAX).unwrap();
    let b = sl2_assignments(p, q, u64::MAX, Some((x0, PARABOLIC))).unwrap();
    assert!(a.complete && b.complete);
    let flat: Vec<Vec<u64>> = b.assignments.iter().map(|m| m.iter().flatten().copied().collect()).collect();
    assert_eq!(a.solutions, flat);
    flat.len()
}

#[test]
fn search_engines_agree() {
    for pd in [TREFOIL, FIGURE_EIGHT] {
        let d = parse_pd(pd).unwrap();
        let w = d.wirtinger_presentation();
        let x0 = w.peripheral.as_ref().unwrap().x.clone();
        let sd = spine_data(&d).unwrap();
        let sx = sd.presentation.peripheral.as_ref().unwrap().x.clone();
        for q in [3, 5] {
            engines_agree(&w, &x0, q);
            engines_agree(&sd.presentation, &sx, q);
        }
    }
    // the trefoil has parabolic representations over F_5
    let w = parse_pd(TREFOIL).unwrap().wirtinger_presentation();
    assert!(engines_agree(&w, &w.peripheral.clone().unwrap().x, 5) > 0);
}

#[test]
fn spine_presentation_reps_pull_back() {
    let sd = spine_data(&parse_pd(TREFOIL).unwrap()).unwrap();
    let p = &sd.presentation;
    let found = sl2_rep_search(p, 5, 10_000_000).unwrap();
    assert!(!found.homs.is_empty());
    let per = p.peripheral.as_ref().unwrap();
    for h in &found.homs {
        assert!(images_commute(h, &per.x, &per.y));
    }
    let theta = theta_hom(p, 7).unwrap();
    assert_eq!(theta.image_order, 7);
}

#[test]
fn homology_cover_grid() {
    for p in primes_upto(97) {
        for w in 1..=100i64 {
            let r = homology_cover(w, p);
            if w % p as i64 == 0 {
                assert_eq!(r, Err(CoverError::PrimeDividesWinding { p, w }));
                continue;
            }
            let c = r.unwrap();
            assert_eq!(c.sheets, p * p);
            assert_eq!(c.certificate, Certificate::AbelianNoncyclic);
            assert_eq!(c.boundary_index, vec![p * p, p * p]);
            assert_eq!(homology_cover(-w, p).unwrap().sheets, p * p);
        }
    }
    assert!(homology_cover(3, 4).is_err());
}

#[test]
fn random_assembly_plans() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let primes = primes_upto(13);
    for _ in 0..2000 {
        let p = primes[rng.gen_range(0..primes.len())];
        let k: Vec<u64> = (0..rng.gen_range(1..5)).map(|_| rng.gen_range(1..40)).collect();
        let m: Vec<u64> = k.iter().map(|x| x * p * p).collect();
        let plan = assemble(&m, p).unwrap();
        let l = k.iter().fold(1u64, |a, &b| a / a.gcd(&b) * b);
        assert_eq!(plan.total, p * p * l);
        for (mi, ci) in m.iter().zip(&plan.copies) {
            assert_eq!(plan.total % mi, 0);
            assert_eq!(plan.total / mi, *ci);
        }
        // m_0 ... m_r with r = len - 1
        let r = m.len() as u32 - 1;
        let prod: u128 = m.iter().map(|&x| x as u128).product();
        let denom = (p as u128 * p as u128).pow(r) / (p as u128 * p as u128);
        if r >= 1 {
            assert!(plan.total as u128 * denom <= prod);
        } else {
            assert!(plan.total as u128 <= prod * (p as u128).pow(2));
        }
    }
    let plan = assemble(&[50, 75], 5).unwrap();
    assert_eq!((plan.total, plan.copies), (150, vec![3, 2]));
}

#[test]
fn seifert_and_accounting() {
    assert_eq!(seifert_sheets(2, 3, 5).unwrap(), (300, 300));
    for (u, v) in [(2u64, 3u64), (2, 5), (3, 4), (3, 5)] {
        for p in [5u64, 7, 11, 13] {
            let (actual, stated) = seifert_sheets(u, v, p).unwrap();
            assert!(actual <= stated);
        }
    }
    let regions = vec![RegionCounts { a: 2, b: 1, c: 1, d: 1 }; 3];
    let comps = [FaceComponent { genus: 1, boundary: 2 }, FaceComponent { genus: 0, boundary: 3 }];
    let a = decomposition_accountant(3, &regions, &comps, 2).unwrap();
    assert_eq!(a.arcs, 3 + 2);
    assert_eq!(a.vertex_bound, 3 + 10);
    assert!(decomposition_accountant(3, &regions, &comps, 6).is_err());
    assert!(decomposition_accountant(2, &regions, &comps, 1).is_err());
}

fn element(t: &Target, rng: &mut ChaCha8Rng) -> Vec<u64> {
    match t {
        Target::Dihedral { p } => vec![rng.gen_range(0..*p), rng.gen_range(0..2)],
        Target::Sl2 { q } => {
            let all = sl2_elements(*q);
            all[rng.gen_range(0..all.len())].to_vec()
        }
        Target::Cyclic { n } => vec![rng.gen_range(0..*n)],
        _ => unreachable!(),
    }
}

proptest! {
    #[test]
    fn target_group_laws(seed in 0u64..10_000, which in 0usize..3) {
        let t = [Target::Dihedral { p: 7 }, Target::Sl2 { q: 5 }, Target::Cyclic { n: 9 }][which].clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (a, b, c) = (element(&t, &mut rng), element(&t, &mut rng), element(&t, &mut rng));
        prop_assert_eq!(t.mul(&t.mul(&a, &b), &c), t.mul(&a, &t.mul(&b, &c)));
        prop_assert_eq!(t.mul(&a, &t.inv(&a)), t.identity());
        prop_assert_eq!(t.mul(&t.identity(), &b), b.clone());
        prop_assert_eq!(t.order() % t.element_order(&a) as u128, 0);
    }
}
