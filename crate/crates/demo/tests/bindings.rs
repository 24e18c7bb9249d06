use knotcov_demo::{analyze_json, bound_json, cover_json};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn analyze_trefoil() {
    let v = parse(&analyze_json("X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)").unwrap());
    assert_eq!(v["degree"], 2);
    assert_eq!(v["determinant"], "3");
    assert_eq!(v["spine"]["generators"].as_u64().unwrap(), v["spine"]["relators"].as_u64().unwrap() + 1);
    assert!(analyze_json("X(1,2").is_err());
}

#[test]
fn covers_by_strategy() {
    assert_eq!(parse(&cover_json("torus 2 3", 100_000).unwrap())["strategy"], "coloring");
    // T(3,5) has determinant 1, so only an SL2 representation can work
    let v = parse(&cover_json("torus 3 5", 2_000_000).unwrap());
    assert_eq!(v["strategy"], "sl2", "{v}");
    assert_eq!(v["certificate"], "nonabelian");
}

#[test]
fn bounds_render() {
    assert_eq!(parse(&bound_json("phi", 2).unwrap())["level"], 2);
    assert_eq!(parse(&bound_json("d", 1).unwrap())["level"], 1);
    assert!(bound_json("x", 1).is_err());
}
