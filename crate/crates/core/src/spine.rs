//! Spines of knot complements and their dual ideal triangulations.
//!
//! The initial complex C′ is built from the diagram as follows. The knot lies
//! on the equatorial sphere S except for a bridge over each crossing. Its
//! tube meets S in two side curves, and under every bridge a vertical wall
//! runs from the bridge down to S and over the under-strand's tube. Cell ids:
//!
//! * vertices, per crossing k: `4k` bridge foot where the over-strand leaves
//!   S, `4k+1` foot where it returns, `4k+2`/`4k+3` where the wall meets the
//!   left/right side of the under-strand;
//! * edges: `2(x-1)` and `2(x-1)+1` are the left and right side curves of arc
//!   x; per crossing, `4c+4k` is the seam under the bridge, `+1` the wall's
//!   arc over the under-tube (left to right), `+2` the wall's foot on the side
//!   the over-strand arrives from (foot to tube), `+3` the other wall foot
//!   (tube to foot);
//! * faces: lower tube pieces, upper tube pieces, walls, then regions of S.
//!
//! Edge letters in face boundaries use the signed convention of
//! [`crate::presentation`]: `+(e+1)` traverses edge e forward.

use crate::algebra::{abelianization_exponents, smith_normal_form, IntegerMatrix};
use crate::diagram::KnotDiagram;
use crate::presentation::{gen_of, letter, GroupPresentation, Peripheral, Word};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpineError {
    #[error("internal consistency failure: {0}")]
    Internal(String),
    #[error("spine is not standard: {0}")]
    NotStandard(String),
    #[error("spine 1-skeleton is disconnected")]
    Disconnected,
    #[error("boundary is not a single torus: {0}")]
    Boundary(String),
}

fn internal(msg: impl Into<String>) -> SpineError {
    SpineError::Internal(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum FaceKind {
    LowerTube(usize),
    UpperTube(usize),
    Wall(usize),
    Region(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Edge {
    tail: usize,
    head: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Face {
    boundary: Word,
    origins: Vec<FaceKind>,
}

/// A 2-complex given by vertices, oriented edges and faces with boundary words.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spine2Complex {
    vertices: Vec<bool>,
    edges: Vec<Option<Edge>>,
    faces: Vec<Option<Face>>,
}

/// One end of an edge at a vertex: (edge, 0 = tail / 1 = head).
type Dart = (usize, u8);

fn arrival(l: i32) -> Dart {
    (gen_of(l), if l > 0 { 1 } else { 0 })
}

fn departure(l: i32) -> Dart {
    (gen_of(l), if l > 0 { 0 } else { 1 })
}

impl Spine2Complex {
    fn with_capacity(v: usize) -> Self {
        Spine2Complex { vertices: vec![true; v], edges: Vec::new(), faces: Vec::new() }
    }

    fn add_edge(&mut self, tail: usize, head: usize) -> usize {
        self.edges.push(Some(Edge { tail, head }));
        self.edges.len() - 1
    }

    fn add_face(&mut self, boundary: Word, kind: FaceKind) {
        self.faces.push(Some(Face { boundary, origins: vec![kind] }));
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.iter().filter(|&&a| a).count()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.iter().flatten().count()
    }

    pub fn face_count(&self) -> usize {
        self.faces.iter().flatten().count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Alive vertex ids in increasing order.
    pub fn vertex_ids(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&v| self.vertices[v]).collect()
    }

    pub fn edge_ids(&self) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_some()).collect()
    }

    pub fn face_ids(&self) -> Vec<usize> {
        (0..self.faces.len()).filter(|&f| self.faces[f].is_some()).collect()
    }

    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        let ed = self.edges[e].as_ref().expect("alive edge");
        (ed.tail, ed.head)
    }

    pub fn boundary(&self, f: usize) -> &[i32] {
        &self.faces[f].as_ref().expect("alive face").boundary
    }

    pub fn origins(&self, f: usize) -> &[FaceKind] {
        &self.faces[f].as_ref().expect("alive face").origins
    }

    fn tail_of(&self, l: i32) -> usize {
        let (t, h) = self.endpoints(gen_of(l));
        if l > 0 {
            t
        } else {
            h
        }
    }

    fn head_of(&self, l: i32) -> usize {
        let (t, h) = self.endpoints(gen_of(l));
        if l > 0 {
            h
        } else {
            t
        }
    }

    fn dart_vertex(&self, d: Dart) -> usize {
        let (t, h) = self.endpoints(d.0);
        if d.1 == 0 {
            t
        } else {
            h
        }
    }

    /// Face-sides of every alive edge: (face, position in boundary).
    pub fn sides(&self) -> BTreeMap<usize, Vec<(usize, usize)>> {
        let mut m: BTreeMap<usize, Vec<(usize, usize)>> =
            self.edge_ids().into_iter().map(|e| (e, Vec::new())).collect();
        for f in self.face_ids() {
            for (p, &l) in self.boundary(f).iter().enumerate() {
                m.entry(gen_of(l)).or_default().push((f, p));
            }
        }
        m
    }

    /// Darts at each alive vertex, sorted.
    fn darts(&self) -> BTreeMap<usize, Vec<Dart>> {
        let mut m: BTreeMap<usize, Vec<Dart>> =
            self.vertex_ids().into_iter().map(|v| (v, Vec::new())).collect();
        for e in self.edge_ids() {
            let (t, h) = self.endpoints(e);
            m.entry(t).or_default().push((e, 0));
            m.entry(h).or_default().push((e, 1));
        }
        for v in m.values_mut() {
            v.sort();
        }
        m
    }

    /// Corners of faces: for each face position p, the pair (arrival dart of
    /// letter p, departure dart of letter p+1).
    fn corners(&self) -> Vec<(usize, Dart, Dart)> {
        let mut out = Vec::new();
        for f in self.face_ids() {
            let b = self.boundary(f);
            for p in 0..b.len() {
                let q = (p + 1) % b.len();
                let d1 = arrival(b[p]);
                out.push((self.dart_vertex(d1), d1, departure(b[q])));
            }
        }
        out
    }

    // -- mutation helpers used by pop_walls ---------------------------------

    fn remove_face(&mut self, f: usize) {
        self.faces[f] = None;
    }

    fn remove_edge(&mut self, e: usize) {
        self.edges[e] = None;
    }

    /// Merge the two distinct faces sharing edge e, deleting e.
    fn merge_across(&mut self, e: usize, (f, p): (usize, usize), (g, q): (usize, usize)) {
        let fb = self.faces[f].take().expect("face");
        let gb = self.faces[g].take().expect("face");
        let mut gw = gb.boundary.clone();
        let mut q = q;
        if gw[q] == fb.boundary[p] {
            gw = crate::presentation::inverse(&gw);
            q = gw.len() - 1 - q;
        }
        let mut merged: Word = fb.boundary[p + 1..].to_vec();
        merged.extend_from_slice(&fb.boundary[..p]);
        merged.extend_from_slice(&gw[q + 1..]);
        merged.extend_from_slice(&gw[..q]);
        let mut origins = fb.origins;
        origins.extend(gb.origins);
        origins.sort();
        let keep = f.min(g);
        self.faces[keep] = Some(Face { boundary: merged, origins });
        self.remove_edge(e);
    }

    /// Splice out a vertex with exactly two darts by joining its edges.
    fn merge_at_vertex(&mut self, v: usize, d1: Dart, d2: Dart) -> Result<(), SpineError> {
        if d1.0 == d2.0 {
            return Err(internal(format!("vertex {v} carries a circle")));
        }
        let o1 = letter(d1.0, if d1.1 == 1 { 1 } else { -1 });
        let o2 = letter(d2.0, if d2.1 == 0 { 1 } else { -1 });
        let new = self.add_edge(self.tail_of(o1), self.head_of(o2));
        let el = letter(new, 1);
        for f in self.face_ids() {
            let b = self.faces[f].as_ref().unwrap().boundary.clone();
            if !b.iter().any(|&l| gen_of(l) == d1.0 || gen_of(l) == d2.0) {
                continue;
            }
            let second = |l: i32| l == o2 || l == -o1;
            let Some(start) = (0..b.len()).find(|&i| !second(b[i])) else {
                return Err(internal("face consists only of merged edges"));
            };
            let mut rot = b[start..].to_vec();
            rot.extend_from_slice(&b[..start]);
            let mut out = Vec::with_capacity(rot.len());
            let mut i = 0;
            while i < rot.len() {
                let l = rot[i];
                if l == o1 || l == -o2 {
                    let want = if l == o1 { o2 } else { -o1 };
                    if i + 1 >= rot.len() || rot[i + 1] != want {
                        return Err(internal(format!("vertex {v}: unmatched corner while splicing")));
                    }
                    out.push(if l == o1 { el } else { -el });
                    i += 2;
                } else if second(l) {
                    return Err(internal(format!("vertex {v}: unmatched corner while splicing")));
                } else {
                    out.push(l);
                    i += 1;
                }
            }
            self.faces[f].as_mut().unwrap().boundary = out;
        }
        self.remove_edge(d1.0);
        self.remove_edge(d2.0);
        self.vertices[v] = false;
        Ok(())
    }

    /// Remove 0/1/2-sided edges and 0/2-valent vertices until every edge has
    /// three sides and every vertex four darts.
    fn regularize(&mut self) -> Result<(), SpineError> {
        'outer: loop {
            let sides = self.sides();
            for (&e, s) in &sides {
                match s.len() {
                    0 => {
                        self.remove_edge(e);
                        continue 'outer;
                    }
                    1 => {
                        // free face: collapse it through e
                        self.remove_face(s[0].0);
                        self.remove_edge(e);
                        continue 'outer;
                    }
                    2 if s[0].0 != s[1].0 => {
                        self.merge_across(e, s[0], s[1]);
                        continue 'outer;
                    }
                    2 => {
                        let f = s[0].0;
                        let b = self.boundary(f).to_vec();
                        let n = b.len();
                        let (p, q) = (s[0].1, s[1].1);
                        let (i, j) = if (p + 1) % n == q {
                            (p, q)
                        } else if (q + 1) % n == p {
                            (q, p)
                        } else {
                            return Err(internal(format!("edge {e} has both sides on face {f} non-adjacently")));
                        };
                        if b[i] != -b[j] {
                            return Err(internal(format!("edge {e} traversed twice in one direction")));
                        }
                        let out: Word = b
                            .iter()
                            .enumerate()
                            .filter(|&(k, _)| k != i && k != j)
                            .map(|(_, &l)| l)
                            .collect();
                        if out.is_empty() {
                            return Err(internal(format!("face {f} collapsed to a sphere")));
                        }
                        self.faces[f].as_mut().unwrap().boundary = out;
                        self.remove_edge(e);
                        continue 'outer;
                    }
                    3 => {}
                    k => return Err(internal(format!("edge {e} has {k} face-sides"))),
                }
            }
            let darts = self.darts();
            for (&v, d) in &darts {
                match d.len() {
                    0 => {
                        self.vertices[v] = false;
                        continue 'outer;
                    }
                    2 => {
                        self.merge_at_vertex(v, d[0], d[1])?;
                        continue 'outer;
                    }
                    4 => {}
                    k => return Err(internal(format!("vertex {v} has valence {k}"))),
                }
            }
            return Ok(());
        }
    }

    /// Renumber alive cells densely in increasing id order.
    fn compact(&self) -> Spine2Complex {
        let vmap: BTreeMap<usize, usize> =
            self.vertex_ids().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
        let emap: BTreeMap<usize, usize> =
            self.edge_ids().into_iter().enumerate().map(|(i, e)| (e, i)).collect();
        let edges = self
            .edge_ids()
            .into_iter()
            .map(|e| {
                let (t, h) = self.endpoints(e);
                Some(Edge { tail: vmap[&t], head: vmap[&h] })
            })
            .collect();
        let faces = self
            .face_ids()
            .into_iter()
            .map(|f| {
                let fc = self.faces[f].as_ref().unwrap();
                Some(Face {
                    boundary: fc.boundary.iter().map(|&l| letter(emap[&gen_of(l)], l.signum())).collect(),
                    origins: fc.origins.clone(),
                })
            })
            .collect();
        Spine2Complex { vertices: vec![true; vmap.len()], edges, faces }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let sides = self.sides();
        let edges: Vec<serde_json::Value> = self
            .edge_ids()
            .into_iter()
            .map(|e| {
                let (t, h) = self.endpoints(e);
                let s: Vec<[usize; 2]> = sides[&e].iter().map(|&(f, p)| [f, p]).collect();
                serde_json::json!({ "id": e, "tail": t, "head": h, "sides": s })
            })
            .collect();
        let faces: Vec<serde_json::Value> = self
            .face_ids()
            .into_iter()
            .map(|f| serde_json::json!({ "id": f, "boundary": self.boundary(f) }))
            .collect();
        serde_json::json!({
            "vertices": self.vertex_ids(),
            "edges": edges,
            "faces": faces,
        })
    }
}

/// Build the complex C′ from a diagram.
pub fn build_initial_spine(d: &KnotDiagram) -> Spine2Complex {
    let c = d.crossing_count();
    let n_arcs = d.arc_count();
    let mut s = Spine2Complex::with_capacity(4 * c);
    let f_in = |k: usize| 4 * k;
    let f_out = |k: usize| 4 * k + 1;
    let v_side = |k: usize, right: bool| 4 * k + 2 + right as usize;
    let e_side = |x: u32, right: bool| 2 * (x as usize - 1) + right as usize;
    let sigma = |k: usize| 4 * c + 4 * k;
    let wt = |k: usize| 4 * c + 4 * k + 1;
    let ws_in = |k: usize| 4 * c + 4 * k + 2;
    let ws_out = |k: usize| 4 * c + 4 * k + 3;
    // inside (over-strand arrival side) is right when it enters through slot b
    let inside_right = |k: usize| d.over_in_slot(k) == 1;

    for x in 1..=n_arcs {
        let (ks, ss) = d.arc_start(x);
        let (ke, se) = d.arc_end(x);
        for right in [false, true] {
            let tail = if ss == 2 { v_side(ks, right) } else { f_out(ks) };
            let head = if se == 0 { v_side(ke, right) } else { f_in(ke) };
            s.add_edge(tail, head);
        }
    }
    for k in 0..c {
        let ir = inside_right(k);
        s.add_edge(f_in(k), f_out(k));
        s.add_edge(v_side(k, false), v_side(k, true));
        s.add_edge(f_in(k), v_side(k, ir));
        s.add_edge(v_side(k, !ir), f_out(k));
    }
    let fwd = |e: usize| letter(e, 1);
    let bwd = |e: usize| letter(e, -1);
    let over_crossing = |x: u32| d.arc_end(x).0;

    // lower tube: maximal runs of arcs between over-passages
    let mut j = 0;
    for x0 in 1..=n_arcs {
        if d.passage_is_under(d.prev_arc(x0)) {
            continue;
        }
        let mut run = vec![x0];
        let mut x = x0;
        while d.passage_is_under(x) {
            x = d.next_arc(x);
            run.push(x);
        }
        let mut w: Word = run.iter().map(|&x| fwd(e_side(x, false))).collect();
        w.extend(run.iter().rev().map(|&x| bwd(e_side(x, true))));
        s.add_face(w, FaceKind::LowerTube(j));
        j += 1;
    }
    // upper tube: runs between under-passages, crossing the bridges
    let mut j = 0;
    for x0 in 1..=n_arcs {
        if !d.passage_is_under(d.prev_arc(x0)) {
            continue;
        }
        let mut run = vec![x0];
        let mut x = x0;
        while !d.passage_is_under(x) {
            x = d.next_arc(x);
            run.push(x);
        }
        let mut w: Word = Vec::new();
        for (i, &x) in run.iter().enumerate() {
            if i > 0 {
                w.push(fwd(sigma(over_crossing(run[i - 1]))));
            }
            w.push(fwd(e_side(x, false)));
        }
        w.push(fwd(wt(d.arc_end(*run.last().unwrap()).0)));
        for (i, &x) in run.iter().enumerate().rev() {
            w.push(bwd(e_side(x, true)));
            if i > 0 {
                w.push(bwd(sigma(over_crossing(run[i - 1]))));
            }
        }
        w.push(bwd(wt(d.arc_start(x0).0)));
        s.add_face(w, FaceKind::UpperTube(j));
        j += 1;
    }
    // walls: seam, outer foot back to the tube, over the tube, inner foot
    for k in 0..c {
        let ir = inside_right(k);
        // wt runs left -> right; we need outside -> inside
        let across = if ir { fwd(wt(k)) } else { bwd(wt(k)) };
        s.add_face(vec![fwd(sigma(k)), bwd(ws_out(k)), across, bwd(ws_in(k))], FaceKind::Wall(k));
    }
    // regions of S, one per projection face
    let foot_to_tube = |k: usize, slot: usize| -> i32 {
        if d.over_in_slot(k) == slot {
            fwd(ws_in(k))
        } else {
            bwd(ws_out(k))
        }
    };
    let arcs = |k: usize, slot: usize| d.crossings()[k].arcs[slot];
    for (j, face) in d.faces().iter().enumerate() {
        let mut w: Word = Vec::new();
        for &(k, i) in face {
            w.push(match i {
                0 => -foot_to_tube(k, 1),
                1 => foot_to_tube(k, 1),
                2 => -foot_to_tube(k, 3),
                _ => foot_to_tube(k, 3),
            });
            let slot = (i + 1) % 4;
            let y = arcs(k, slot);
            if d.arc_start(y) == (k, slot) {
                w.push(fwd(e_side(y, true)));
            } else {
                w.push(bwd(e_side(y, false)));
            }
        }
        s.add_face(w, FaceKind::Region(j));
    }
    let _ = (f_in, f_out);
    s
}

/// Index of the projection region lying to the right of arc 1.
fn region_right_of_arc1(d: &KnotDiagram) -> usize {
    let start = d.arc_start(1);
    d.faces()
        .iter()
        .position(|f| f.iter().any(|&(k, i)| (k, (i + 1) % 4) == start))
        .expect("arc 1 borders a region")
}

/// Pop the walls of C′ to obtain a standard spine of the knot complement.
pub fn pop_walls(cprime: &Spine2Complex, d: &KnotDiagram) -> Result<Spine2Complex, SpineError> {
    let c = d.crossing_count();
    let mut s = cprime.clone();
    let lambda = 4 * c; // seam of crossing 0
    let d1 = s
        .face_ids()
        .into_iter()
        .find(|&f| {
            s.origins(f).iter().any(|k| matches!(k, FaceKind::UpperTube(_)))
                && s.boundary(f).iter().any(|&l| gen_of(l) == lambda)
        })
        .ok_or_else(|| internal("no tube disk contains the first seam"))?;
    let d2 = s
        .face_ids()
        .into_iter()
        .find(|&f| s.origins(f) == [FaceKind::Wall(0)])
        .ok_or_else(|| internal("wall of crossing 0 missing"))?;
    s.remove_face(d1);
    s.remove_face(d2);
    s.remove_edge(lambda);
    s.regularize().map_err(|e| SpineError::NotStandard(e.to_string()))?;
    let r1 = FaceKind::Region(region_right_of_arc1(d));
    // The equatorial disk next to arc 1 is tried first. When it has merged
    // with tube pieces its removal can leave an annular face, so the other
    // equatorial faces are tried in order after it.
    let mut candidates: Vec<usize> = s
        .face_ids()
        .into_iter()
        .filter(|&f| s.origins(f).iter().any(|k| matches!(k, FaceKind::Region(_))))
        .collect();
    candidates.sort_by_key(|&f| {
        let o = s.origins(f);
        (!o.contains(&r1), !o.iter().all(|k| matches!(k, FaceKind::Region(_))), f)
    });
    let mut last = internal("no equatorial disk left to remove");
    for d3 in candidates {
        let mut t = s.clone();
        t.remove_face(d3);
        match t.regularize() {
            Ok(()) => {
                let t = t.compact();
                let report = verify_standard(&t);
                if report.passes() {
                    return Ok(t);
                }
                last = SpineError::NotStandard(report.messages.join("; "));
            }
            Err(e) => last = SpineError::NotStandard(e.to_string()),
        }
    }
    Err(last)
}

/// Outcome of the three standard-spine checks.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StandardReport {
    pub neighborhood: bool,
    pub disk_faces: bool,
    pub arc_only: bool,
    pub euler_characteristic: i64,
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub messages: Vec<String>,
}

impl StandardReport {
    pub fn passes(&self) -> bool {
        self.neighborhood && self.disk_faces && self.arc_only
    }
}

pub fn verify_standard(s: &Spine2Complex) -> StandardReport {
    let mut messages = Vec::new();
    let mut neighborhood = true;
    for (e, sd) in s.sides() {
        if sd.len() != 3 {
            neighborhood = false;
            messages.push(format!("edge {e} has {} face-sides", sd.len()));
        }
    }
    let mut disk_faces = true;
    for f in s.face_ids() {
        let b = s.boundary(f);
        if b.is_empty() {
            disk_faces = false;
            messages.push(format!("face {f} has empty boundary"));
            continue;
        }
        for p in 0..b.len() {
            let q = (p + 1) % b.len();
            if gen_of(b[p]) >= s.edges.len() || s.edges[gen_of(b[p])].is_none() {
                disk_faces = false;
                messages.push(format!("face {f} uses a missing edge"));
                break;
            }
            if s.head_of(b[p]) != s.tail_of(b[q]) {
                disk_faces = false;
                messages.push(format!("face {f} boundary is not a closed walk"));
                break;
            }
        }
    }
    let darts = s.darts();
    let mut arc_only = s.edge_count() == 0 || s.vertex_count() > 0;
    if !arc_only {
        messages.push("edges without vertices".into());
    }
    if disk_faces {
        let mut by_vertex: BTreeMap<usize, Vec<(Dart, Dart)>> = BTreeMap::new();
        for (v, d1, d2) in s.corners() {
            by_vertex.entry(v).or_default().push(if d1 <= d2 { (d1, d2) } else { (d2, d1) });
        }
        for (v, d) in &darts {
            let mut ok = d.len() == 4;
            if d.len() == 2 && d[0].0 == d[1].0 {
                arc_only = false;
                messages.push(format!("vertex {v} lies on a circle"));
            }
            let mut corners = by_vertex.get(v).cloned().unwrap_or_default();
            corners.sort();
            ok &= corners.len() == 6;
            ok &= corners.windows(2).all(|w| w[0] != w[1]);
            ok &= corners.iter().all(|(a, b)| a != b);
            if !ok {
                neighborhood = false;
                messages.push(format!("vertex {v} link is not the complete graph on 4 points"));
            }
        }
    } else {
        neighborhood = false;
    }
    StandardReport {
        neighborhood,
        disk_faces,
        arc_only,
        euler_characteristic: s.euler_characteristic(),
        vertices: s.vertex_count(),
        edges: s.edge_count(),
        faces: s.face_count(),
        messages,
    }
}

/// Full pipeline: diagram to standard spine.
pub fn standard_spine(d: &KnotDiagram) -> Result<Spine2Complex, SpineError> {
    pop_walls(&build_initial_spine(d), d)
}

// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Gluing {
    pub tet: usize,
    pub face: usize,
    /// Image of each vertex 0..3 of this tetrahedron.
    pub perm: [u8; 4],
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdealTriangulation {
    pub gluings: Vec<[Gluing; 4]>,
}

fn perm_sign(p: &[u8; 4]) -> i32 {
    let mut s = 1;
    for i in 0..4 {
        for j in i + 1..4 {
            if p[i] > p[j] {
                s = -s;
            }
        }
    }
    s
}

impl IdealTriangulation {
    pub fn tetrahedra(&self) -> usize {
        self.gluings.len()
    }

    /// Glued (tetrahedron, face) pairs; every face appears in exactly one.
    pub fn face_pairs(&self) -> Vec<((usize, usize), (usize, usize))> {
        let mut out = Vec::new();
        for (t, g) in self.gluings.iter().enumerate() {
            for (f, gl) in g.iter().enumerate() {
                if (t, f) < (gl.tet, gl.face) {
                    out.push(((t, f), (gl.tet, gl.face)));
                }
            }
        }
        out
    }

    /// Gluing is a fixed-point-free involution with mutually inverse perms.
    pub fn is_consistent(&self) -> bool {
        self.gluings.iter().enumerate().all(|(t, g)| {
            g.iter().enumerate().all(|(f, gl)| {
                let back = &self.gluings[gl.tet][gl.face];
                (gl.tet, gl.face) != (t, f)
                    && back.tet == t
                    && back.face == f
                    && gl.perm[f] as usize == gl.face
                    && (0..4).all(|v| back.perm[gl.perm[v] as usize] as usize == v)
            })
        })
    }

    /// Orientation signs ±1 per tetrahedron, if a consistent choice exists.
    pub fn orientation(&self) -> Option<Vec<i32>> {
        let n = self.tetrahedra();
        let mut o = vec![0i32; n];
        for root in 0..n {
            if o[root] != 0 {
                continue;
            }
            o[root] = 1;
            let mut q = VecDeque::from([root]);
            while let Some(t) = q.pop_front() {
                for gl in &self.gluings[t] {
                    let want = -o[t] * perm_sign(&gl.perm);
                    if o[gl.tet] == 0 {
                        o[gl.tet] = want;
                        q.push_back(gl.tet);
                    } else if o[gl.tet] != want {
                        return None;
                    }
                }
            }
        }
        Some(o)
    }

    pub fn is_orientable(&self) -> bool {
        self.orientation().is_some()
    }

    /// One line per tetrahedron: `tet i f0:(t,f,perm) ...`, where perm maps
    /// the face's vertices (ascending) to positions in the glued face.
    pub fn gluing_table(&self) -> String {
        let mut out = String::new();
        for (t, g) in self.gluings.iter().enumerate() {
            out.push_str(&format!("tet {t}"));
            for (f, gl) in g.iter().enumerate() {
                let src: Vec<u8> = (0..4u8).filter(|&v| v as usize != f).collect();
                let dst: Vec<u8> = (0..4u8).filter(|&v| v as usize != gl.face).collect();
                let word: String = src
                    .iter()
                    .map(|&v| {
                        let img = gl.perm[v as usize];
                        char::from(b'0' + dst.iter().position(|&x| x == img).unwrap() as u8)
                    })
                    .collect();
                out.push_str(&format!(" f{f}:({},{},{word})", gl.tet, gl.face));
            }
            out.push('\n');
        }
        out
    }
}

/// Per-vertex dart order and, for every face-side, the dart its corner reaches
/// at the tail and head ends of the edge.
struct LocalData {
    darts: BTreeMap<usize, Vec<Dart>>,
    /// (edge) -> list of (face, pos, tail-corner dart, head-corner dart)
    side_corners: BTreeMap<usize, Vec<(usize, usize, Dart, Dart)>>,
}

fn local_data(s: &Spine2Complex) -> LocalData {
    let darts = s.darts();
    let mut side_corners: BTreeMap<usize, Vec<(usize, usize, Dart, Dart)>> = BTreeMap::new();
    for f in s.face_ids() {
        let b = s.boundary(f);
        let n = b.len();
        for p in 0..n {
            let l = b[p];
            let prev = b[(p + n - 1) % n];
            let next = b[(p + 1) % n];
            let (tail_c, head_c) = if l > 0 {
                (arrival(prev), departure(next))
            } else {
                (departure(next), arrival(prev))
            };
            side_corners.entry(gen_of(l)).or_default().push((f, p, tail_c, head_c));
        }
    }
    LocalData { darts, side_corners }
}

fn local_index(ld: &LocalData, v: usize, d: Dart) -> usize {
    ld.darts[&v].iter().position(|&x| x == d).expect("dart at vertex")
}

/// Dual ideal triangulation: tetrahedron per vertex, face i of a tetrahedron
/// dual to the i-th dart at the vertex, tetrahedron vertex m dual to the
/// region of the vertex link opposite dart m.
pub fn dualize(s: &Spine2Complex) -> Result<IdealTriangulation, SpineError> {
    let report = verify_standard(s);
    if !report.passes() {
        return Err(SpineError::NotStandard(report.messages.join("; ")));
    }
    let ld = local_data(s);
    let n = s.vertex_count();
    let placeholder = Gluing { tet: usize::MAX, face: 0, perm: [0; 4] };
    let mut gluings = vec![[placeholder; 4]; n];
    for e in s.edge_ids() {
        let (t, h) = s.endpoints(e);
        let i = local_index(&ld, t, (e, 0));
        let j = local_index(&ld, h, (e, 1));
        let mut perm = [0u8; 4];
        perm[i] = j as u8;
        for &(_, _, tc, hc) in &ld.side_corners[&e] {
            perm[local_index(&ld, t, tc)] = local_index(&ld, h, hc) as u8;
        }
        let mut inv = [0u8; 4];
        for (a, &b) in perm.iter().enumerate() {
            inv[b as usize] = a as u8;
        }
        gluings[t][i] = Gluing { tet: h, face: j, perm };
        gluings[h][j] = Gluing { tet: t, face: i, perm: inv };
    }
    let tri = IdealTriangulation { gluings };
    if !tri.is_consistent() {
        return Err(internal("gluing is not an involution"));
    }
    Ok(tri)
}

// ---------------------------------------------------------------------------

/// Presentation from a maximal tree (BFS from the lowest vertex, edges in id
/// order): generators are the non-tree edges, relators the face boundaries
/// with tree edges deleted.
pub fn presentation_from_spine(s: &Spine2Complex) -> Result<(GroupPresentation, Vec<Option<usize>>), SpineError> {
    let verts = s.vertex_ids();
    let Some(&root) = verts.first() else {
        return Err(SpineError::Disconnected);
    };
    let mut adj: BTreeMap<usize, Vec<(usize, usize)>> = verts.iter().map(|&v| (v, Vec::new())).collect();
    for e in s.edge_ids() {
        let (t, h) = s.endpoints(e);
        adj.get_mut(&t).unwrap().push((e, h));
        adj.get_mut(&h).unwrap().push((e, t));
    }
    for a in adj.values_mut() {
        a.sort();
    }
    let mut seen: BTreeMap<usize, bool> = verts.iter().map(|&v| (v, false)).collect();
    let mut tree = vec![false; s.edges.len()];
    seen.insert(root, true);
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &(e, w) in &adj[&v] {
            if !seen[&w] {
                seen.insert(w, true);
                tree[e] = true;
                q.push_back(w);
            }
        }
    }
    if seen.values().any(|&b| !b) {
        return Err(SpineError::Disconnected);
    }
    let mut gen_of_edge = vec![None; s.edges.len()];
    let mut g = 0;
    for e in s.edge_ids() {
        if !tree[e] {
            gen_of_edge[e] = Some(g);
            g += 1;
        }
    }
    let relators = s
        .face_ids()
        .into_iter()
        .map(|f| {
            s.boundary(f)
                .iter()
                .filter_map(|&l| gen_of_edge[gen_of(l)].map(|gi| letter(gi, l.signum())))
                .collect()
        })
        .collect();
    Ok((GroupPresentation { generator_count: g, relators, peripheral: None }, gen_of_edge))
}

/// Graph dual to the cusp cross-section: node `4v+m` is the corner of
/// tetrahedron v at ideal vertex m; edge `(e, m)` joins the corners at the two
/// ends of spine edge e across the region excluding dart m at the tail.
struct CuspGraph {
    nodes: usize,
    /// (edge id in spine, tail node, head node)
    edges: Vec<(usize, usize, usize)>,
    /// polygons as signed cusp-edge letters
    polygons: Vec<Word>,
}

fn cusp_graph(s: &Spine2Complex, tri: &IdealTriangulation) -> Result<CuspGraph, SpineError> {
    let ld = local_data(s);
    let vidx: BTreeMap<usize, usize> = s.vertex_ids().into_iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut edges = Vec::new();
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for e in s.edge_ids() {
        let (t, h) = s.endpoints(e);
        let i = local_index(&ld, t, (e, 0));
        let gl = tri.gluings[vidx[&t]][i];
        for m in 0..4 {
            if m == i {
                continue;
            }
            index.insert((e, m), edges.len());
            edges.push((e, 4 * vidx[&t] + m, 4 * vidx[&h] + gl.perm[m] as usize));
        }
    }
    // polygons: propagate a corner region around each face side
    let mut polygons = Vec::new();
    for f in s.face_ids() {
        let b = s.boundary(f).to_vec();
        let k = b.len();
        let corner = |p: usize| -> (usize, usize, usize) {
            // vertex index and the two dart indices at the corner before letter p
            let d1 = arrival(b[(p + k - 1) % k]);
            let d2 = departure(b[p]);
            let v = s.dart_vertex(d2);
            (v, local_index(&ld, v, d1), local_index(&ld, v, d2))
        };
        let (v0, a0, b0) = corner(0);
        let choices: Vec<usize> = (0..4).filter(|&m| m != a0 && m != b0).collect();
        let mut used = vec![false; 2];
        for ci in 0..2 {
            if used[ci] {
                continue;
            }
            used[ci] = true;
            let mut m = choices[ci];
            let mut v = v0;
            let mut poly = Vec::with_capacity(k);
            for p in 0..k {
                let l = b[p];
                let e = gen_of(l);
                let (t, h) = s.endpoints(e);
                if l > 0 {
                    debug_assert_eq!(v, t);
                    let ce = index[&(e, m)];
                    poly.push(letter(ce, 1));
                    m = edges[ce].2 % 4;
                    v = h;
                } else {
                    debug_assert_eq!(v, h);
                    // find the cusp edge of e whose head is (h, m)
                    let node = 4 * vidx[&h] + m;
                    let ce = (0..4)
                        .filter_map(|mm| index.get(&(e, mm)))
                        .copied()
                        .find(|&ce| edges[ce].2 == node)
                        .ok_or_else(|| internal("cusp propagation left the edge"))?;
                    poly.push(letter(ce, -1));
                    m = edges[ce].1 % 4;
                    v = t;
                }
                let (vc, a, bb) = corner((p + 1) % k);
                if vc != v || m == a || m == bb {
                    return Err(internal("cusp propagation lost the face side"));
                }
            }
            let back = choices.iter().position(|&x| x == m).expect("returns to a corner region");
            if back != ci {
                return Err(SpineError::Boundary("one-sided face".into()));
            }
            polygons.push(poly);
        }
    }
    Ok(CuspGraph { nodes: 4 * s.vertex_count(), edges, polygons })
}

/// Peripheral curves, their H1 images, and the boundary cell counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryReport {
    pub corner_triangles: usize,
    pub cusp_edges: usize,
    pub polygons: usize,
    pub euler_characteristic: i64,
    pub x_len: usize,
    pub y_len: usize,
}

struct Tree {
    parent: Vec<Option<(usize, i32)>>, // (parent node, letter from parent to node)
    depth: Vec<usize>,
}

fn bfs_tree(nodes: usize, edges: &[(usize, usize, usize)], root: usize) -> Tree {
    let mut adj: Vec<Vec<(usize, usize, i32)>> = vec![Vec::new(); nodes];
    for (i, &(_, a, b)) in edges.iter().enumerate() {
        adj[a].push((i, b, letter(i, 1)));
        adj[b].push((i, a, letter(i, -1)));
    }
    let mut parent = vec![None; nodes];
    let mut depth = vec![usize::MAX; nodes];
    depth[root] = 0;
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for &(_, w, l) in &adj[v] {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                parent[w] = Some((v, l));
                q.push_back(w);
            }
        }
    }
    Tree { parent, depth }
}

fn path_from_root(tree: &Tree, mut v: usize) -> (Vec<usize>, Word) {
    let mut nodes = vec![v];
    let mut word = Vec::new();
    while let Some((p, l)) = tree.parent[v] {
        word.push(l);
        nodes.push(p);
        v = p;
    }
    nodes.reverse();
    word.reverse();
    (nodes, word)
}

/// Two peripheral words x0, y0 spanning the cusp torus, from simple cycles
/// through a common corner of the cusp graph.
pub fn boundary_words(
    s: &Spine2Complex,
    tri: &IdealTriangulation,
    pres: &GroupPresentation,
    gen_of_edge: &[Option<usize>],
) -> Result<(Peripheral, BoundaryReport), SpineError> {
    let cg = cusp_graph(s, tri)?;
    let n_nodes = cg.nodes;
    let n_edges = cg.edges.len();
    let chi = n_nodes as i64 - n_edges as i64 + cg.polygons.len() as i64;
    if chi != 0 {
        return Err(SpineError::Boundary(format!("cusp cross-section has Euler characteristic {chi}")));
    }
    let tree0 = bfs_tree(n_nodes, &cg.edges, 0);
    if tree0.depth.iter().any(|&d| d == usize::MAX) {
        return Err(SpineError::Boundary("cusp cross-section is disconnected".into()));
    }
    let nu = abelianization_exponents(pres).map_err(|e| SpineError::Boundary(e.to_string()))?;
    let project = |cycle: &Word| -> Word {
        cycle
            .iter()
            .filter_map(|&l| {
                let (e, _, _) = cg.edges[gen_of(l)];
                gen_of_edge[e].map(|g| letter(g, l.signum()))
            })
            .collect()
    };
    let h1_image = |w: &Word| -> i64 { w.iter().map(|&l| l.signum() as i64 * nu.0[gen_of(l)]).sum() };

    for root in 0..n_nodes {
        let tree = bfs_tree(n_nodes, &cg.edges, root);
        let is_tree: Vec<bool> = {
            let mut t = vec![false; n_edges];
            for p in tree.parent.iter().flatten() {
                t[gen_of(p.1)] = true;
            }
            t
        };
        let non_tree: Vec<usize> = (0..n_edges).filter(|&i| !is_tree[i]).collect();
        let col: BTreeMap<usize, usize> = non_tree.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        // polygon boundaries in fundamental-cycle coordinates
        let rows: IntegerMatrix = cg
            .polygons
            .iter()
            .map(|poly| {
                let mut r = vec![BigInt::zero(); non_tree.len()];
                for &l in poly {
                    if let Some(&c) = col.get(&gen_of(l)) {
                        r[c] += l.signum();
                    }
                }
                r
            })
            .collect();
        let snf = smith_normal_form(&rows);
        if non_tree.len() != snf.rank + 2 || snf.diagonal.iter().any(|d| !d.is_one()) {
            return Err(SpineError::Boundary("cusp cross-section homology is not Z^2".into()));
        }
        let class = |i: usize| -> (BigInt, BigInt) { (snf.v[i][snf.rank].clone(), snf.v[i][snf.rank + 1].clone()) };
        // simple cycles through the root
        let mut cycles: Vec<(Word, usize)> = Vec::new();
        for (ci, &e) in non_tree.iter().enumerate() {
            let (_, a, b) = cg.edges[e];
            let (na, wa) = path_from_root(&tree, a);
            let (nb, wb) = path_from_root(&tree, b);
            if a == b || na.get(1).is_some() && nb.get(1).is_some() && na[1] == nb[1] {
                continue;
            }
            let mut w = wa;
            w.push(letter(e, 1));
            w.extend(crate::presentation::inverse(&wb));
            cycles.push((w, ci));
        }
        cycles.sort_by(|x, y| x.0.len().cmp(&y.0.len()).then_with(|| x.0.cmp(&y.0)));
        for i in 0..cycles.len() {
            for j in i + 1..cycles.len() {
                let (a1, b1) = class(cycles[i].1);
                let (a2, b2) = class(cycles[j].1);
                let det: BigInt = &a1 * &b2 - &a2 * &b1;
                if det.abs().is_one() {
                    let x = project(&cycles[i].0);
                    let y = project(&cycles[j].0);
                    let (a, b) = (h1_image(&x), h1_image(&y));
                    let g = num_integer::gcd(a, b).max(1);
                    let mut longitude = crate::presentation::power(&x, b / g);
                    longitude.extend(crate::presentation::power(&y, -a / g));
                    let report = BoundaryReport {
                        corner_triangles: n_nodes,
                        cusp_edges: n_edges,
                        polygons: cg.polygons.len(),
                        euler_characteristic: chi,
                        x_len: x.len(),
                        y_len: y.len(),
                    };
                    let _ = a1.to_i64();
                    return Ok((Peripheral { x, y, a, b, longitude }, report));
                }
            }
        }
    }
    Err(SpineError::Boundary("no pair of simple cusp cycles spans the torus".into()))
}

/// Everything derived from a diagram's spine, in one place.
#[derive(Clone, Debug)]
pub struct SpineData {
    pub initial: Spine2Complex,
    pub spine: Spine2Complex,
    pub triangulation: IdealTriangulation,
    pub presentation: GroupPresentation,
    pub boundary: BoundaryReport,
}

pub fn spine_data(d: &KnotDiagram) -> Result<SpineData, SpineError> {
    let initial = build_initial_spine(d);
    let spine = pop_walls(&initial, d)?;
    let triangulation = dualize(&spine)?;
    let (mut presentation, gen_of_edge) = presentation_from_spine(&spine)?;
    let (peripheral, boundary) = boundary_words(&spine, &triangulation, &presentation, &gen_of_edge)?;
    presentation.peripheral = Some(peripheral);
    Ok(SpineData { initial, spine, triangulation, presentation, boundary })
}
