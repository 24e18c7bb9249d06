//! Browser bindings. Each exported function takes plain strings and numbers
//! and returns a JSON string for the page to render.

use knotcov::algebra::{alexander_polynomial, homology};
use knotcov::bounds;
use knotcov::covers::{self, CoverDescriptor};
use knotcov::diagram::{parse_dt, parse_pd, torus_diagram, KnotDiagram};
use knotcov::spine::spine_data;
use serde_json::json;
use wasm_bindgen::prelude::*;

const COLORING_PRIMES: [u64; 5] = [3, 5, 7, 11, 13];
const SL2_FIELDS: [u64; 4] = [2, 3, 5, 7];

/// `pd ...`, `dt ...`, `torus u v`, or a bare PD/DT code.
pub fn diagram(text: &str) -> Result<KnotDiagram, String> {
    let text = text.trim();
    match text.split_once(char::is_whitespace) {
        Some(("pd", rest)) => parse_pd(rest).map_err(|e| e.to_string()),
        Some(("dt", rest)) => parse_dt(rest).map_err(|e| e.to_string()),
        Some(("torus", rest)) => {
            let v: Vec<u32> = rest.split_whitespace().filter_map(|s| s.parse().ok()).collect();
            match v[..] {
                [u, w] => torus_diagram(u, w).map_err(|e| e.to_string()),
                _ => Err("torus needs two integers".into()),
            }
        }
        _ if text.contains('X') => parse_pd(text).map_err(|e| e.to_string()),
        _ => parse_dt(text).map_err(|e| e.to_string()),
    }
}

pub fn analyze_json(text: &str) -> Result<String, String> {
    let d = diagram(text)?;
    let w = d.wirtinger_presentation();
    let delta = alexander_polynomial(&w).map_err(|e| e.to_string())?;
    let mut out = json!({
        "crossings": d.crossing_count(),
        "pd": d.emit_pd(),
        "alexander": delta.to_string(),
        "degree": delta.span(),
        "determinant": delta.eval_normal(-1).magnitude().to_string(),
        "homology": homology(&w).to_string(),
    });
    match spine_data(&d) {
        Ok(sd) => {
            out["spine"] = json!({
                "vertices": sd.spine.vertex_count(),
                "edges": sd.spine.edge_count(),
                "faces": sd.spine.face_count(),
                "tetrahedra": sd.triangulation.tetrahedra(),
                "generators": sd.presentation.generator_count,
                "relators": sd.presentation.relators.len(),
            })
        }
        Err(e) => out["spine"] = json!({ "error": e.to_string() }),
    }
    Ok(out.to_string())
}

fn found(strategy: &str, p: u64, c: &CoverDescriptor) -> String {
    json!({ "strategy": strategy, "p": p, "sheets": c.sheets, "certificate": c.certificate, "image": c.image.kind })
        .to_string()
}

/// Colorings first, then SL2 representations paired with the mod-q homology map.
pub fn cover_json(text: &str, budget: u64) -> Result<String, String> {
    let d = diagram(text)?;
    for p in COLORING_PRIMES {
        if let Some(h) = covers::pcoloring_cover(&d, p).map_err(|e| e.to_string())? {
            return Ok(found("coloring", p, &CoverDescriptor::from_hom(&h)));
        }
    }
    let w = d.wirtinger_presentation();
    let mut remaining = budget;
    for q in SL2_FIELDS {
        let r = covers::sl2_rep_search(&w, q, remaining).map_err(|e| e.to_string())?;
        remaining = remaining.saturating_sub(r.nodes);
        if let Some(rho) = r.homs.first() {
            let theta = covers::theta_hom(&w, q).map_err(|e| e.to_string())?;
            let c = covers::product_cover(rho, &theta).map_err(|e| e.to_string())?;
            return Ok(found("sl2", q, &c));
        }
        if remaining == 0 {
            break;
        }
    }
    Ok(json!({ "strategy": null, "message": "no noncyclic cover within budget" }).to_string())
}

/// `quantity` is `d` (argument n) or `phi` (argument c).
pub fn bound_json(quantity: &str, arg: u64) -> Result<String, String> {
    let v = match quantity {
        "d" => bounds::d_of(arg),
        "phi" => bounds::phi_of(arg),
        other => return Err(format!("unknown quantity {other:?}")),
    }
    .map_err(|e| e.to_string())?;
    Ok(json!({ "level": v.level(), "mantissa": v.mantissa_digits(40), "text": v.to_string() }).to_string())
}

#[wasm_bindgen]
pub fn analyze(text: &str) -> Result<String, JsError> {
    analyze_json(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn find_cover(text: &str, budget: u32) -> Result<String, JsError> {
    cover_json(text, budget as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn bound(quantity: &str, arg: u32) -> Result<String, JsError> {
    bound_json(quantity, arg as u64).map_err(|e| JsError::new(&e))
}
