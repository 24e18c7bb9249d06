//! Knot diagrams in planar-diagram (PD) form.
//!
//! Each crossing lists its four arc labels counterclockwise, starting from the
//! incoming under-strand:
//!
//! ```text
//!            c (under, out)
//!                 ^
//!                 |
//!   d  ---------- | ---------->  b      over-strand runs d -> b (sign +1)
//!                 |                                 or b -> d (sign -1)
//!                 |
//!            a (under, in)
//! ```
//!
//! After validation the arcs are renumbered `1..=2c` in traversal order, so arc
//! `x` ends at the crossing where arc `x+1` begins. That meeting point is
//! called passage `x`; it is an under-passage when arc `x` sits in slot `a`.

use crate::presentation::{letter, GroupPresentation, Peripheral, Word};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("malformed PD input at byte {pos}: {msg}")]
    Malformed { pos: usize, msg: String },
    #[error("diagram has no crossings")]
    Empty,
    #[error("arc {arc} appears {count} times (expected exactly 2)")]
    ArcMultiplicity { arc: i64, count: usize },
    #[error("crossing {crossing}: strand orientation is inconsistent with the under-strand slots")]
    Orientation { crossing: usize },
    #[error("diagram has more than one component (knots only)")]
    Link,
    #[error("crossing data does not describe a planar diagram")]
    NonPlanar,
    #[error("empty DT code")]
    DtEmpty,
    #[error("DT entry {0} is odd or zero")]
    DtOdd(i64),
    #[error("DT entry {entry} out of range for {crossings} crossings")]
    DtRange { entry: i64, crossings: usize },
    #[error("DT entry {0} repeated")]
    DtDuplicate(i64),
    #[error("DT pair ({0},{1}) joins consecutive labels (kink or inconsistent pairing)")]
    DtKink(i64, i64),
    #[error("DT code is not realizable by a planar diagram")]
    DtNotRealizable,
    #[error("DT realization is limited to {0} crossings")]
    DtTooLarge(usize),
    #[error("invalid integer {0:?} in DT code")]
    DtToken(String),
    #[error("torus knot parameters must be at least 2 (got {0},{1})")]
    TorusTooSmall(u32, u32),
    #[error("torus knot parameters ({0},{1}) are not coprime")]
    TorusNotCoprime(u32, u32),
}

pub const DT_MAX_CROSSINGS: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub arcs: [u32; 4],
    pub sign: i8,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KnotDiagram {
    crossings: Vec<Crossing>,
    /// `ends[x-1]` = (crossing, slot) where arc x ends.
    ends: Vec<(usize, usize)>,
    /// `starts[x-1]` = (crossing, slot) where arc x begins.
    starts: Vec<(usize, usize)>,
}

impl KnotDiagram {
    pub fn crossings(&self) -> &[Crossing] {
        &self.crossings
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings.len()
    }

    pub fn arc_count(&self) -> u32 {
        2 * self.crossings.len() as u32
    }

    /// Crossing and slot where arc `x` (1-based) ends.
    pub fn arc_end(&self, x: u32) -> (usize, usize) {
        self.ends[x as usize - 1]
    }

    pub fn arc_start(&self, x: u32) -> (usize, usize) {
        self.starts[x as usize - 1]
    }

    /// Arc following `x` along the orientation.
    pub fn next_arc(&self, x: u32) -> u32 {
        x % self.arc_count() + 1
    }

    pub fn prev_arc(&self, x: u32) -> u32 {
        if x == 1 {
            self.arc_count()
        } else {
            x - 1
        }
    }

    pub fn passage_is_under(&self, x: u32) -> bool {
        self.arc_end(x).1 == 0
    }

    /// Slot (1 or 3) through which the over-strand enters crossing `k`.
    pub fn over_in_slot(&self, k: usize) -> usize {
        if self.crossings[k].sign < 0 {
            1
        } else {
            3
        }
    }

    pub fn writhe(&self) -> i64 {
        self.crossings.iter().map(|c| c.sign as i64).sum()
    }

    /// Projection faces as cyclic lists of corners `(crossing, slot)`, where a
    /// corner lies between `slot` and the next slot counterclockwise. Each
    /// face is traced with the region on the right.
    pub fn faces(&self) -> Vec<Vec<(usize, usize)>> {
        faces_of(&self.crossings.iter().map(|c| c.arcs).collect::<Vec<_>>())
    }

    pub fn emit_pd(&self) -> String {
        self.crossings
            .iter()
            .map(|c| format!("X({},{},{},{})", c.arcs[0], c.arcs[1], c.arcs[2], c.arcs[3]))
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let crossings: Vec<[u32; 4]> = self.crossings.iter().map(|c| c.arcs).collect();
        serde_json::json!({ "crossings": crossings, "arc_count": self.arc_count() })
    }

    /// Index of the over-arc (Wirtinger generator) containing arc `x`.
    pub fn over_arc_of(&self, x: u32) -> usize {
        let c = self.crossing_count();
        let unders = (1..x).filter(|&y| self.passage_is_under(y)).count();
        unders % c
    }

    /// Wirtinger presentation: one generator per over-arc, one relator per
    /// crossing. Peripheral data carries the meridian `g0` and the longitude.
    pub fn wirtinger_presentation(&self) -> GroupPresentation {
        let c = self.crossing_count();
        let gen: Vec<usize> = (1..=self.arc_count()).map(|x| self.over_arc_of(x)).collect();
        let g = |x: u32| gen[x as usize - 1];
        let mut relators = Vec::with_capacity(c);
        for cr in &self.crossings {
            let [a, b, cc, _] = cr.arcs;
            let s = cr.sign as i32;
            let (i, j, k) = (g(a), g(cc), g(b));
            // x_j = x_k^s x_i x_k^-s
            relators.push(vec![letter(k, s), letter(i, 1), letter(k, -s), letter(j, -1)]);
        }
        // Walk the knot from arc 1 collecting the over-generators passed under.
        let mut w: Word = Vec::new();
        let mut x = 1;
        for _ in 0..self.arc_count() {
            if self.passage_is_under(x) {
                let (k, _) = self.arc_end(x);
                let cr = &self.crossings[k];
                w.insert(0, letter(g(cr.arcs[1]), cr.sign as i32));
            }
            x = self.next_arc(x);
        }
        let m = g(1);
        let writhe = self.writhe();
        let mut longitude = w;
        for _ in 0..writhe.unsigned_abs() {
            longitude.push(letter(m, if writhe > 0 { -1 } else { 1 }));
        }
        GroupPresentation {
            generator_count: c,
            relators,
            peripheral: Some(Peripheral {
                x: vec![letter(m, 1)],
                y: longitude.clone(),
                a: 1,
                b: 0,
                longitude,
            }),
        }
    }
}

pub(crate) fn faces_of(tuples: &[[u32; 4]]) -> Vec<Vec<(usize, usize)>> {
    let mut occ: HashMap<u32, Vec<(usize, usize)>> = HashMap::new();
    for (k, t) in tuples.iter().enumerate() {
        for (s, &a) in t.iter().enumerate() {
            occ.entry(a).or_default().push((k, s));
        }
    }
    let other = |k: usize, s: usize| -> (usize, usize) {
        let o = &occ[&tuples[k][s]];
        if o[0] == (k, s) {
            o[1]
        } else {
            o[0]
        }
    };
    let mut seen = vec![[false; 4]; tuples.len()];
    let mut faces = Vec::new();
    for k0 in 0..tuples.len() {
        for s0 in 0..4 {
            if seen[k0][s0] {
                continue;
            }
            let mut face = Vec::new();
            let (mut k, mut s) = (k0, s0);
            while !seen[k][s] {
                seen[k][s] = true;
                face.push((k, s));
                let (k2, s2) = other(k, (s + 1) % 4);
                k = k2;
                s = s2;
            }
            faces.push(face);
        }
    }
    faces
}

/// Validate raw PD tuples and renumber arcs canonically.
pub fn from_tuples(raw: &[[i64; 4]]) -> Result<KnotDiagram, DiagramError> {
    let c = raw.len();
    if c == 0 {
        return Err(DiagramError::Empty);
    }
    let mut occ: BTreeMap<i64, Vec<(usize, usize)>> = BTreeMap::new();
    for (k, t) in raw.iter().enumerate() {
        for (s, &a) in t.iter().enumerate() {
            occ.entry(a).or_default().push((k, s));
        }
    }
    for (&arc, o) in &occ {
        if o.len() != 2 {
            return Err(DiagramError::ArcMultiplicity { arc, count: o.len() });
        }
    }
    let other = |k: usize, s: usize| -> (usize, usize) {
        let o = &occ[&raw[k][s]];
        if o[0] == (k, s) {
            o[1]
        } else {
            o[0]
        }
    };
    // Traverse from the outgoing under-strand of crossing 0, recording for
    // every arc the slot it leaves and the slot it enters.
    let mut visited = vec![[false; 4]; c];
    let mut walk: Vec<(i64, (usize, usize), (usize, usize))> = Vec::with_capacity(2 * c);
    let (k0, s0) = (0usize, 2usize);
    let (mut k, mut s) = (k0, s0);
    visited[k][s] = true;
    loop {
        let (k2, s2) = other(k, s);
        if s2 == 2 || visited[k2][s2] {
            return Err(DiagramError::Orientation { crossing: k2 });
        }
        walk.push((raw[k][s], (k, s), (k2, s2)));
        visited[k2][s2] = true;
        let out = (s2 + 2) % 4;
        if out == 0 {
            return Err(DiagramError::Orientation { crossing: k2 });
        }
        if (k2, out) == (k0, s0) {
            break;
        }
        if visited[k2][out] {
            return Err(DiagramError::Orientation { crossing: k2 });
        }
        visited[k2][out] = true;
        k = k2;
        s = out;
    }
    if walk.len() != 2 * c {
        return Err(DiagramError::Link);
    }
    let lowest = *occ.keys().next().expect("nonempty");
    let rot = walk.iter().position(|w| w.0 == lowest).expect("lowest arc visited");
    walk.rotate_left(rot);
    let rename: HashMap<i64, u32> =
        walk.iter().enumerate().map(|(i, w)| (w.0, i as u32 + 1)).collect();
    let tuples: Vec<[u32; 4]> = raw
        .iter()
        .map(|t| [rename[&t[0]], rename[&t[1]], rename[&t[2]], rename[&t[3]]])
        .collect();
    let starts: Vec<(usize, usize)> = walk.iter().map(|w| w.1).collect();
    let ends: Vec<(usize, usize)> = walk.iter().map(|w| w.2).collect();
    let mut sign = vec![0i8; c];
    for &(k, s) in &ends {
        match s {
            1 => sign[k] = -1,
            3 => sign[k] = 1,
            _ => {}
        }
    }
    let crossings: Vec<Crossing> = tuples
        .iter()
        .zip(&sign)
        .map(|(t, &sign)| Crossing { arcs: *t, sign })
        .collect();
    if faces_of(&tuples).len() != c + 2 {
        return Err(DiagramError::NonPlanar);
    }
    Ok(KnotDiagram { crossings, ends, starts })
}

fn malformed(pos: usize, msg: &str) -> DiagramError {
    DiagramError::Malformed { pos, msg: msg.to_string() }
}

/// Strip `#` comments, keeping byte offsets intact.
fn strip_comments(text: &str) -> String {
    text.lines()
        .map(|l| match l.find('#') {
            Some(i) => format!("{}{}", &l[..i], " ".repeat(l.len() - i)),
            None => l.to_string(),
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn parse_pd_tuples(text: &str) -> Result<Vec<[i64; 4]>, DiagramError> {
    let clean = strip_comments(text);
    let bytes = clean.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let skip_ws = |i: &mut usize| {
        while *i < bytes.len() && (bytes[*i].is_ascii_whitespace() || bytes[*i] == b',') {
            *i += 1;
        }
    };
    loop {
        skip_ws(&mut i);
        if i >= bytes.len() {
            break;
        }
        if bytes[i] != b'X' {
            return Err(malformed(i, "expected 'X('"));
        }
        i += 1;
        if i >= bytes.len() || (bytes[i] != b'(' && bytes[i] != b'[') {
            return Err(malformed(i, "expected '(' after X"));
        }
        let close = if bytes[i] == b'(' { b')' } else { b']' };
        i += 1;
        let start = i;
        while i < bytes.len() && bytes[i] != close {
            i += 1;
        }
        if i >= bytes.len() {
            return Err(malformed(start, "unterminated crossing"));
        }
        let body = &clean[start..i];
        i += 1;
        let nums: Result<Vec<i64>, _> = body.split(',').map(|s| s.trim().parse::<i64>()).collect();
        let nums = nums.map_err(|_| malformed(start, "arc labels must be integers"))?;
        if nums.len() != 4 {
            return Err(malformed(start, "a crossing needs exactly four arc labels"));
        }
        out.push([nums[0], nums[1], nums[2], nums[3]]);
    }
    Ok(out)
}

pub fn parse_pd(text: &str) -> Result<KnotDiagram, DiagramError> {
    from_tuples(&parse_pd_tuples(text)?)
}

/// Parse a Dowker–Thistlethwaite code and realize it as a planar diagram.
///
/// Pairs whose labels are consecutive (a kink) are rejected; positive even
/// entries mean the even-labelled passage is an under-passage.
pub fn parse_dt(text: &str) -> Result<KnotDiagram, DiagramError> {
    let clean = strip_comments(text);
    let entries: Vec<i64> = clean
        .split(|ch: char| ch.is_whitespace() || ch == ',')
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<i64>().map_err(|_| DiagramError::DtToken(s.to_string())))
        .collect::<Result<_, _>>()?;
    let c = entries.len();
    if c == 0 {
        return Err(DiagramError::DtEmpty);
    }
    let n = 2 * c as i64;
    let mut seen = vec![false; 2 * c + 1];
    for &e in &entries {
        if e == 0 || e % 2 != 0 {
            return Err(DiagramError::DtOdd(e));
        }
        if e.abs() > n {
            return Err(DiagramError::DtRange { entry: e, crossings: c });
        }
        if seen[e.unsigned_abs() as usize] {
            return Err(DiagramError::DtDuplicate(e));
        }
        seen[e.unsigned_abs() as usize] = true;
    }
    for (i, &e) in entries.iter().enumerate() {
        let o = 2 * i as i64 + 1;
        let ev = e.abs();
        if (o - ev).rem_euclid(n) == 1 || (ev - o).rem_euclid(n) == 1 {
            return Err(DiagramError::DtKink(o, e));
        }
    }
    if c > DT_MAX_CROSSINGS {
        return Err(DiagramError::DtTooLarge(DT_MAX_CROSSINGS));
    }
    // Label l is the passage at the end of arc l; arc l+1 leaves it.
    let next = |l: i64| -> u32 { (l % n + 1) as u32 };
    let build = |mask: u32| -> Vec<[u32; 4]> {
        entries
            .iter()
            .enumerate()
            .map(|(i, &e)| {
                let o = 2 * i as i64 + 1;
                let ev = e.abs();
                let (in1, out1, in2, out2) = (o as u32, next(o), ev as u32, next(ev));
                let rot = if mask >> i & 1 == 0 {
                    [in1, out2, out1, in2]
                } else {
                    [in1, in2, out1, out2]
                };
                let under_in = if e > 0 { in2 } else { in1 };
                let p = rot.iter().position(|&a| a == under_in).expect("under arc present");
                [rot[p], rot[(p + 1) % 4], rot[(p + 2) % 4], rot[(p + 3) % 4]]
            })
            .collect()
    };
    for mask in 0..(1u32 << (c - 1)) {
        let tuples = build(mask << 1);
        if faces_of(&tuples).len() == c + 2 {
            let raw: Vec<[i64; 4]> = tuples
                .iter()
                .map(|t| [t[0] as i64, t[1] as i64, t[2] as i64, t[3] as i64])
                .collect();
            return from_tuples(&raw);
        }
    }
    Err(DiagramError::DtNotRealizable)
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The (u,v) torus knot as the closure of the braid (σ1⋯σ_{u−1})^v.
pub fn torus_diagram(u: u32, v: u32) -> Result<KnotDiagram, DiagramError> {
    if u < 2 || v < 2 {
        return Err(DiagramError::TorusTooSmall(u, v));
    }
    if gcd(u, v) != 1 {
        return Err(DiagramError::TorusNotCoprime(u, v));
    }
    let mut pos: Vec<i64> = (1..=u as i64).collect();
    let mut fresh = u as i64 + 1;
    let mut tuples: Vec<[i64; 4]> = Vec::new();
    for _ in 0..v {
        for i in 0..(u as usize - 1) {
            let (under_in, over_in) = (pos[i + 1], pos[i]);
            let (over_out, under_out) = (fresh, fresh + 1);
            fresh += 2;
            tuples.push([under_in, over_out, under_out, over_in]);
            pos[i] = under_out;
            pos[i + 1] = over_out;
        }
    }
    let close: HashMap<i64, i64> = pos.iter().enumerate().map(|(p, &l)| (l, p as i64 + 1)).collect();
    for t in &mut tuples {
        for a in t.iter_mut() {
            if let Some(&b) = close.get(a) {
                *a = b;
            }
        }
    }
    from_tuples(&tuples)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("line {line}: expected `<name> pd|dt|torus <code>`")]
    Syntax { line: usize },
    #[error("line {line} ({name}): {source}")]
    Diagram { line: usize, name: String, source: DiagramError },
}

/// Parse a corpus file: one knot per line, `<name> pd|dt|torus <code>`.
/// Blank lines and `#` comments are skipped.
pub fn parse_corpus(text: &str) -> Result<Vec<(String, KnotDiagram)>, CorpusError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(name), Some(kind)) = (parts.next(), parts.next()) else {
            return Err(CorpusError::Syntax { line: i + 1 });
        };
        let code = parts.collect::<Vec<_>>().join(" ");
        let code = code.as_str();
        let wrap = |e| CorpusError::Diagram { line: i + 1, name: name.to_string(), source: e };
        let d = match kind {
            "pd" => parse_pd(code).map_err(wrap)?,
            "dt" => parse_dt(code).map_err(wrap)?,
            "torus" => {
                let nums: Vec<u32> = code
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse().map_err(|_| CorpusError::Syntax { line: i + 1 }))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 2 {
                    return Err(CorpusError::Syntax { line: i + 1 });
                }
                torus_diagram(nums[0], nums[1]).map_err(wrap)?
            }
            _ => return Err(CorpusError::Syntax { line: i + 1 }),
        };
        out.push((name.to_string(), d));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TREFOIL: &str = "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)";

    #[test]
    fn trefoil_parses() {
        let d = parse_pd(TREFOIL).unwrap();
        assert_eq!(d.crossing_count(), 3);
        assert_eq!(d.arc_count(), 6);
        assert!(d.crossings().iter().all(|c| c.sign == -1));
        assert_eq!(d.emit_pd(), TREFOIL);
    }

    #[test]
    fn unknot_one_crossing() {
        let d = parse_pd("X(1,2,2,1)").unwrap();
        assert_eq!(d.crossing_count(), 1);
        assert_eq!(d.faces().len(), 3);
    }

    #[test]
    fn bad_inputs() {
        assert!(matches!(parse_pd("X(1,2,3,4)"), Err(DiagramError::ArcMultiplicity { .. })));
        assert_eq!(parse_pd(""), Err(DiagramError::Empty));
        assert!(matches!(parse_pd("X(1,2,3"), Err(DiagramError::Malformed { .. })));
        assert!(matches!(parse_pd("Y(1,2,2,1)"), Err(DiagramError::Malformed { .. })));
        // Hopf link
        assert_eq!(parse_pd("X(1,3,2,4) X(3,1,4,2)"), Err(DiagramError::Link));
    }

    #[test]
    fn comments_ignored() {
        let d = parse_pd("# trefoil\nX(1,4,2,5) X(3,6,4,1)\n# mid\nX(5,2,6,3) # end").unwrap();
        assert_eq!(d.crossing_count(), 3);
    }

    #[test]
    fn dt_codes() {
        assert_eq!(parse_dt("4 6 2").unwrap().crossing_count(), 3);
        assert_eq!(parse_dt("4 6 8 2").unwrap().crossing_count(), 4);
        assert_eq!(parse_dt(""), Err(DiagramError::DtEmpty));
        assert!(parse_dt("4 6 2 8").is_err());
        assert!(matches!(parse_dt("3 6 2"), Err(DiagramError::DtOdd(3))));
        assert!(matches!(parse_dt("4 6 10"), Err(DiagramError::DtRange { .. })));
    }

    #[test]
    fn torus_counts() {
        assert_eq!(torus_diagram(2, 3).unwrap().crossing_count(), 3);
        assert_eq!(torus_diagram(3, 4).unwrap().crossing_count(), 8);
        assert_eq!(torus_diagram(2, 4), Err(DiagramError::TorusNotCoprime(2, 4)));
        assert_eq!(torus_diagram(1, 4), Err(DiagramError::TorusTooSmall(1, 4)));
    }

    #[test]
    fn wirtinger_shape() {
        let d = parse_pd(TREFOIL).unwrap();
        let p = d.wirtinger_presentation();
        assert_eq!(p.generator_count, 3);
        assert_eq!(p.relators.len(), 3);
        let per = p.peripheral.unwrap();
        assert_eq!(crate::presentation::exponent_sums(&per.longitude, 3).iter().sum::<i64>(), 0);
    }
}
