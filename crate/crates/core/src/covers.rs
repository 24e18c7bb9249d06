//! Finite quotients of knot groups and the covers they define.
//!
//! Group elements of every target are flat `Vec<u64>` words interpreted by a
//! [`Target`]; this keeps hashing, sorting and products uniform.

use crate::algebra::{smith_normal_form, to_big_matrix};
use crate::bounds::is_prime_u64;
use crate::diagram::KnotDiagram;
use crate::presentation::{gen_of, GroupPresentation, Word};
use num_integer::Integer;
use num_traits::ToPrimitive;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashSet, VecDeque};
use thiserror::Error;

/// Largest subgroup enumerated when computing image orders.
pub const IMAGE_LIMIT: usize = 2_000_000;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoverError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("p = {p} divides the winding number {w}; choose another prime")]
    PrimeDividesWinding { p: u64, w: i64 },
    #[error("winding number 0 is outside the homology construction; use the SL2 search")]
    ZeroWinding,
    #[error("relator {0} does not map to the identity")]
    NotAHomomorphism(usize),
    #[error("expected {expected} generator images, got {got}")]
    ImageCount { expected: usize, got: usize },
    #[error("homomorphisms are defined on different presentations")]
    PresentationMismatch,
    #[error("image has more than {IMAGE_LIMIT} elements")]
    ImageTooLarge,
    #[error("{m} is not divisible by p^2 = {p2}")]
    NotDivisible { m: u64, p2: u64 },
    #[error("no piece sheet counts given")]
    NoPieces,
    #[error("gcd({u}, {v}) != 1")]
    NotCoprime { u: u64, v: u64 },
    #[error("the Seifert construction needs p > 3, got {0}")]
    SmallPrime(u64),
    #[error("invalid decomposition data: {0}")]
    Accounting(String),
    #[error("modulus {0} is too large for matrix search")]
    ModulusTooLarge(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Target {
    Cyclic { n: u64 },
    Abelian { invariants: Vec<u64> },
    /// Order 2p; elements `[a, e]` stand for r^a s^e.
    Dihedral { p: u64 },
    /// Elements `[a, b, c, d]` are matrices over the field with q elements.
    Sl2 { q: u64 },
    Product { factors: Vec<Target> },
}

impl Target {
    pub fn width(&self) -> usize {
        match self {
            Target::Cyclic { .. } => 1,
            Target::Abelian { invariants } => invariants.len(),
            Target::Dihedral { .. } => 2,
            Target::Sl2 { .. } => 4,
            Target::Product { factors } => factors.iter().map(Target::width).sum(),
        }
    }

    pub fn identity(&self) -> Vec<u64> {
        match self {
            Target::Sl2 { .. } => vec![1, 0, 0, 1],
            Target::Product { factors } => factors.iter().flat_map(Target::identity).collect(),
            t => vec![0; t.width()],
        }
    }

    pub fn mul(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        match self {
            Target::Cyclic { n } => vec![(x[0] + y[0]) % n],
            Target::Abelian { invariants } => {
                invariants.iter().enumerate().map(|(i, n)| (x[i] + y[i]) % n).collect()
            }
            Target::Dihedral { p } => {
                let b = if x[1] == 1 { (p - y[0]) % p } else { y[0] };
                vec![(x[0] + b) % p, (x[1] + y[1]) % 2]
            }
            Target::Sl2 { q } => {
                let m = |a: u64, b: u64| a * b % q;
                vec![
                    (m(x[0], y[0]) + m(x[1], y[2])) % q,
                    (m(x[0], y[1]) + m(x[1], y[3])) % q,
                    (m(x[2], y[0]) + m(x[3], y[2])) % q,
                    (m(x[2], y[1]) + m(x[3], y[3])) % q,
                ]
            }
            Target::Product { factors } => {
                let mut out = Vec::with_capacity(x.len());
                let mut o = 0;
                for f in factors {
                    let w = f.width();
                    out.extend(f.mul(&x[o..o + w], &y[o..o + w]));
                    o += w;
                }
                out
            }
        }
    }

    pub fn inv(&self, x: &[u64]) -> Vec<u64> {
        match self {
            Target::Cyclic { n } => vec![(n - x[0]) % n],
            Target::Abelian { invariants } => invariants.iter().enumerate().map(|(i, n)| (n - x[i]) % n).collect(),
            Target::Dihedral { p } => {
                if x[1] == 1 {
                    x.to_vec()
                } else {
                    vec![(p - x[0]) % p, 0]
                }
            }
            Target::Sl2 { q } => vec![x[3], (q - x[1]) % q, (q - x[2]) % q, x[0]],
            Target::Product { factors } => {
                let mut out = Vec::with_capacity(x.len());
                let mut o = 0;
                for f in factors {
                    let w = f.width();
                    out.extend(f.inv(&x[o..o + w]));
                    o += w;
                }
                out
            }
        }
    }

    /// Order of the whole target group.
    pub fn order(&self) -> u128 {
        match self {
            Target::Cyclic { n } => *n as u128,
            Target::Abelian { invariants } => invariants.iter().map(|&n| n as u128).product(),
            Target::Dihedral { p } => 2 * *p as u128,
            Target::Sl2 { q } => {
                let q = *q as u128;
                q * (q * q - 1)
            }
            Target::Product { factors } => factors.iter().map(Target::order).product(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Target::Cyclic { .. } => "cyclic",
            Target::Abelian { .. } => "abelian",
            Target::Dihedral { .. } => "dihedral",
            Target::Sl2 { .. } => "sl2",
            Target::Product { .. } => "product",
        }
    }

    pub fn eval_word(&self, images: &[Vec<u64>], w: &[i32]) -> Vec<u64> {
        let mut acc = self.identity();
        for &l in w {
            let g = &images[gen_of(l)];
            acc = if l > 0 { self.mul(&acc, g) } else { self.mul(&acc, &self.inv(g)) };
        }
        acc
    }

    pub fn element_order(&self, x: &[u64]) -> u64 {
        let id = self.identity();
        let mut y = x.to_vec();
        let mut k = 1;
        while y != id {
            y = self.mul(&y, x);
            k += 1;
        }
        k
    }

    /// Elements of the subgroup generated by `gens`.
    pub fn subgroup(&self, gens: &[Vec<u64>]) -> Result<Vec<Vec<u64>>, CoverError> {
        let id = self.identity();
        let mut seen: HashSet<Vec<u64>> = HashSet::from([id.clone()]);
        let mut order = vec![id.clone()];
        let mut q = VecDeque::from([id]);
        while let Some(x) = q.pop_front() {
            for g in gens {
                let y = self.mul(&x, g);
                if seen.insert(y.clone()) {
                    if seen.len() > IMAGE_LIMIT {
                        return Err(CoverError::ImageTooLarge);
                    }
                    order.push(y.clone());
                    q.push_back(y);
                }
            }
        }
        Ok(order)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Certificate {
    Nonabelian,
    AbelianNoncyclic,
    /// Cyclic image: the kernel cover is cyclic, so nothing is certified.
    Cyclic,
}

impl Certificate {
    pub fn is_noncyclic(self) -> bool {
        self != Certificate::Cyclic
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeripheralOrders {
    pub x: u64,
    pub y: u64,
    pub longitude: u64,
}

/// A verified homomorphism from a presented group to a finite target.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteHom {
    pub target: Target,
    pub images: Vec<Vec<u64>>,
    pub verified: bool,
    pub image_order: u64,
    pub abelian_image: bool,
    pub cyclic_image: bool,
    pub peripheral: Option<PeripheralOrders>,
    #[serde(skip)]
    presentation: GroupPresentation,
}

impl FiniteHom {
    pub fn new(target: Target, images: Vec<Vec<u64>>, p: &GroupPresentation) -> Result<Self, CoverError> {
        if images.len() != p.generator_count {
            return Err(CoverError::ImageCount { expected: p.generator_count, got: images.len() });
        }
        let id = target.identity();
        for (i, r) in p.relators.iter().enumerate() {
            if target.eval_word(&images, r) != id {
                return Err(CoverError::NotAHomomorphism(i));
            }
        }
        let elems = target.subgroup(&images)?;
        let abelian_image = images.iter().all(|a| images.iter().all(|b| target.mul(a, b) == target.mul(b, a)));
        let order = elems.len() as u64;
        let cyclic_image = abelian_image && elems.iter().any(|x| target.element_order(x) == order);
        let peripheral = p.peripheral.as_ref().map(|per| PeripheralOrders {
            x: target.element_order(&target.eval_word(&images, &per.x)),
            y: target.element_order(&target.eval_word(&images, &per.y)),
            longitude: target.element_order(&target.eval_word(&images, &per.longitude)),
        });
        Ok(FiniteHom {
            target,
            images,
            verified: true,
            image_order: order,
            abelian_image,
            cyclic_image,
            peripheral,
            presentation: p.clone(),
        })
    }

    pub fn presentation(&self) -> &GroupPresentation {
        &self.presentation
    }

    pub fn certificate(&self) -> Certificate {
        if !self.abelian_image {
            Certificate::Nonabelian
        } else if !self.cyclic_image {
            Certificate::AbelianNoncyclic
        } else {
            Certificate::Cyclic
        }
    }

    pub fn image_of(&self, w: &[i32]) -> Vec<u64> {
        self.target.eval_word(&self.images, w)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ImageSummary {
    pub kind: String,
    pub order: u64,
    pub generators: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoverDescriptor {
    pub sheets: u64,
    pub certificate: Certificate,
    pub image: ImageSummary,
    /// Orders of the images of x, y and the longitude, when known.
    pub peripheral: Option<PeripheralOrders>,
    /// Index of each boundary subgroup's kernel in that subgroup.
    pub boundary_index: Vec<u64>,
}

impl CoverDescriptor {
    pub fn from_hom(h: &FiniteHom) -> Self {
        CoverDescriptor {
            sheets: h.image_order,
            certificate: h.certificate(),
            image: ImageSummary { kind: h.target.kind().into(), order: h.image_order, generators: h.images.clone() },
            peripheral: h.peripheral.clone(),
            boundary_index: Vec::new(),
        }
    }
}

// -- homology covers of satellite pieces ------------------------------------

/// Size of the image mod p of the lattice spanned by the rows of `basis`.
fn index_of_mod_p_kernel(basis: [[i64; 2]; 2], p: u64) -> u64 {
    let p = p as i64;
    let det = (basis[0][0] * basis[1][1] - basis[0][1] * basis[1][0]).rem_euclid(p);
    if det != 0 {
        (p * p) as u64
    } else if basis.iter().flatten().any(|x| x.rem_euclid(p) != 0) {
        p as u64
    } else {
        1
    }
}

/// The p^2-sheeted cover of a satellite piece with winding number w given by
/// H1 -> H1/pH1.
pub fn homology_cover(w: i64, p: u64) -> Result<CoverDescriptor, CoverError> {
    if !is_prime_u64(p) {
        return Err(CoverError::NotPrime(p));
    }
    if w == 0 {
        return Err(CoverError::ZeroWinding);
    }
    if w.unsigned_abs() % p == 0 {
        return Err(CoverError::PrimeDividesWinding { p, w });
    }
    let sat = crate::algebra::satellite_homology(w);
    // boundary k carries [m_k] and [l_k]; coordinates in ([m0],[m1])
    let boundary_index = vec![
        index_of_mod_p_kernel([[1, 0], sat.l0], p),
        index_of_mod_p_kernel([[0, 1], sat.l1], p),
    ];
    let target = Target::Abelian { invariants: vec![p, p] };
    Ok(CoverDescriptor {
        sheets: p * p,
        certificate: Certificate::AbelianNoncyclic,
        image: ImageSummary { kind: target.kind().into(), order: p * p, generators: vec![vec![1, 0], vec![0, 1]] },
        peripheral: None,
        boundary_index,
    })
}

/// Largest winding number a satellite piece of a c-crossing knot can have.
pub fn winding_filter(c: u64) -> u64 {
    c / 2
}

// -- dihedral covers from p-colorings ---------------------------------------

fn inv_mod(a: u64, p: u64) -> u64 {
    let (mut t, mut nt, mut r, mut nr) = (0i64, 1i64, p as i64, a as i64);
    while nr != 0 {
        let q = r / nr;
        (t, nt) = (nt, t - q * nt);
        (r, nr) = (nr, r - q * nr);
    }
    t.rem_euclid(p as i64) as u64
}

/// Null space of a matrix over the field with p elements.
pub fn nullspace_mod_p(rows: &[Vec<u64>], cols: usize, p: u64) -> Vec<Vec<u64>> {
    let mut a: Vec<Vec<u64>> = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..a.len()).find(|&i| a[i][c] != 0) else { continue };
        a.swap(r, piv);
        let inv = inv_mod(a[r][c], p);
        for x in a[r].iter_mut() {
            *x = *x * inv % p;
        }
        for i in 0..a.len() {
            if i != r && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..cols {
                    a[i][j] = (a[i][j] + p * p - f * a[r][j] % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; cols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - a[i][f]) % p;
            }
            v
        })
        .collect()
}

/// A nontrivial Fox p-coloring as a homomorphism onto the dihedral group of
/// order 2p, meridians going to reflections.
pub fn pcoloring_cover(d: &KnotDiagram, p: u64) -> Result<Option<FiniteHom>, CoverError> {
    if !is_prime_u64(p) || p == 2 {
        return Err(CoverError::NotPrime(p));
    }
    let pres = d.wirtinger_presentation();
    let g = pres.generator_count;
    // one equation per crossing: 2 c(over) = c(under in) + c(under out)
    let mut rows = Vec::new();
    for k in 0..d.crossing_count() {
        let arcs = d.crossings()[k].arcs;
        let gi = |x: u32| d.over_arc_of(x);
        let (i, j, o) = (gi(arcs[0]), gi(arcs[2]), gi(arcs[1]));
        let mut row = vec![0u64; g];
        row[o] = (row[o] + 2) % p;
        row[i] = (row[i] + p - 1) % p;
        row[j] = (row[j] + p - 1) % p;
        rows.push(row);
    }
    // pin generator 0 to colour 0 to exclude constant colourings
    let mut pin = vec![0u64; g];
    pin[0] = 1;
    rows.push(pin);
    let Some(colors) = nullspace_mod_p(&rows, g, p).into_iter().next() else {
        return Ok(None);
    };
    let images = colors.iter().map(|&c| vec![c, 1]).collect();
    Ok(Some(FiniteHom::new(Target::Dihedral { p }, images, &pres)?))
}

// -- SL2 search ---------------------------------------------------------------

/// SL2 over the field with q elements, in lexicographic order of (a, b, c, d).
pub fn sl2_elements(q: u64) -> Vec<[u64; 4]> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if (a * d + q * q - b * c) % q == 1 % q {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Sl2Search {
    /// Generator images (indexed by generator), sorted lexicographically.
    pub assignments: Vec<Vec<[u64; 4]>>,
    pub complete: bool,
    pub nodes: u64,
}

struct Check {
    word: Word,
    want: [u64; 4],
}

fn sl2_mul(x: &[u64; 4], y: &[u64; 4], q: u64) -> [u64; 4] {
    [
        (x[0] * y[0] + x[1] * y[2]) % q,
        (x[0] * y[1] + x[1] * y[3]) % q,
        (x[2] * y[0] + x[3] * y[2]) % q,
        (x[2] * y[1] + x[3] * y[3]) % q,
    ]
}

fn sl2_word(x: &[[u64; 4]], w: &[i32], q: u64) -> [u64; 4] {
    let mut acc = [1, 0, 0, 1];
    for &l in w {
        let m = x[gen_of(l)];
        let m = if l > 0 { m } else { [m[3], (q - m[1]) % q, (q - m[2]) % q, m[0]] };
        acc = sl2_mul(&acc, &m, q);
    }
    acc
}

/// Every assignment of SL2(F_q) matrices to the generators killing all
/// relators, optionally with `constraint = (word, matrix)` fixing the image of
/// a word. Relators are checked as soon as their generators are assigned; the
/// first level is split across threads, each branch with an equal share of
/// `budget` search nodes, so partial results do not depend on scheduling.
pub fn sl2_assignments(
    p: &GroupPresentation,
    q: u64,
    budget: u64,
    constraint: Option<(&[i32], [u64; 4])>,
) -> Result<Sl2Search, CoverError> {
    if !is_prime_u64(q) {
        return Err(CoverError::NotPrime(q));
    }
    if q > 1 << 16 {
        return Err(CoverError::ModulusTooLarge(q));
    }
    let g = p.generator_count;
    let elems = sl2_elements(q);
    let mut checks: Vec<Check> = p.relators.iter().map(|r| Check { word: r.clone(), want: [1, 0, 0, 1] }).collect();
    let mut order: Vec<usize> = Vec::new();
    let mut placed = vec![false; g];
    if let Some((w, m)) = constraint {
        checks.push(Check { word: w.to_vec(), want: m });
        for &l in w {
            if !placed[gen_of(l)] {
                placed[gen_of(l)] = true;
                order.push(gen_of(l));
            }
        }
    }
    let gens_of: Vec<Vec<usize>> = checks.iter().map(|c| c.word.iter().map(|&l| gen_of(l)).collect()).collect();
    while order.len() < g {
        let best = (0..g)
            .filter(|&k| !placed[k])
            .max_by_key(|&k| {
                let done = gens_of.iter().filter(|gs| gs.contains(&k) && gs.iter().all(|&h| h == k || placed[h])).count();
                (done, std::cmp::Reverse(k))
            })
            .unwrap();
        placed[best] = true;
        order.push(best);
    }
    let mut pos = vec![0; g];
    for (i, &k) in order.iter().enumerate() {
        pos[k] = i;
    }
    let mut by_level: Vec<Vec<&Check>> = (0..g.max(1)).map(|_| Vec::new()).collect();
    for (c, gs) in checks.iter().zip(&gens_of) {
        let lvl = gs.iter().map(|&k| pos[k]).max().unwrap_or(0);
        by_level[lvl].push(c);
    }
    if g == 0 {
        let ok = by_level[0].iter().all(|c| sl2_word(&[], &c.word, q) == c.want);
        return Ok(Sl2Search { assignments: if ok { vec![Vec::new()] } else { Vec::new() }, complete: true, nodes: 1 });
    }
    let branch_budget = budget.div_ceil(elems.len() as u64).max(1);
    #[cfg(feature = "parallel")]
    let firsts = (0..elems.len()).into_par_iter();
    #[cfg(not(feature = "parallel"))]
    let firsts = 0..elems.len();
    let results: Vec<(Vec<Vec<[u64; 4]>>, bool, u64)> = firsts
        .map(|first| {
            let mut x = vec![[1u64, 0, 0, 1]; g];
            let mut found = Vec::new();
            let mut nodes = 0u64;
            let mut idx = vec![0usize; g];
            idx[0] = first;
            let mut level = 0usize;
            loop {
                let exhausted = if level == 0 { idx[0] > first } else { idx[level] == elems.len() };
                if exhausted {
                    if level == 0 {
                        return (found, true, nodes);
                    }
                    idx[level] = 0;
                    level -= 1;
                    idx[level] += 1;
                    continue;
                }
                nodes += 1;
                if nodes > branch_budget {
                    return (found, false, nodes);
                }
                x[order[level]] = elems[idx[level]];
                if by_level[level].iter().all(|c| sl2_word(&x, &c.word, q) == c.want) {
                    if level + 1 == g {
                        found.push(x.clone());
                        idx[level] += 1;
                    } else {
                        level += 1;
                    }
                } else {
                    idx[level] += 1;
                }
            }
        })
        .collect();
    let mut assignments = Vec::new();
    let mut complete = true;
    let mut nodes = 0;
    for (f, c, n) in results {
        assignments.extend(f);
        complete &= c;
        nodes += n;
    }
    assignments.sort();
    Ok(Sl2Search { assignments, complete, nodes })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RepSearch {
    pub homs: Vec<FiniteHom>,
    pub complete: bool,
    pub nodes: u64,
}

/// Nonabelian homomorphisms into SL2(F_q). The search runs on a
/// Tietze-simplified presentation and results are pulled back to `p`.
pub fn sl2_rep_search(p: &GroupPresentation, q: u64, budget: u64) -> Result<RepSearch, CoverError> {
    let (simple, words) = p.simplified_with_map();
    let s = sl2_assignments(&simple, q, budget, None)?;
    let target = Target::Sl2 { q };
    let mut homs = Vec::new();
    for a in &s.assignments {
        let small: Vec<Vec<u64>> = a.iter().map(|m| m.to_vec()).collect();
        let images: Vec<Vec<u64>> = words.iter().map(|w| target.eval_word(&small, w)).collect();
        let h = FiniteHom::new(target.clone(), images, p)?;
        if !h.abelian_image {
            homs.push(h);
        }
    }
    homs.sort_by(|a, b| a.images.cmp(&b.images));
    Ok(RepSearch { homs, complete: s.complete, nodes: s.nodes })
}

/// Hurewicz map followed by reduction mod q: onto H1/qH1.
pub fn theta_hom(p: &GroupPresentation, q: u64) -> Result<FiniteHom, CoverError> {
    if !is_prime_u64(q) {
        return Err(CoverError::NotPrime(q));
    }
    let g = p.generator_count;
    let m = if p.relators.is_empty() { vec![vec![0i64; g]] } else { p.abelianized_matrix() };
    let snf = smith_normal_form(&to_big_matrix(&m));
    let qb = num_bigint::BigInt::from(q);
    // coordinate j of the quotient is Z/d_j (d_j = 0 past the rank)
    let mut factors: Vec<(usize, u64)> = Vec::new();
    for j in 0..g {
        let d = if j < snf.rank { snf.diagonal[j].clone() } else { num_bigint::BigInt::from(0) };
        let m = d.gcd(&qb).to_u64().unwrap();
        if m > 1 {
            factors.push((j, m));
        }
    }
    let invariants: Vec<u64> = factors.iter().map(|&(_, m)| m).collect();
    let target = if invariants.len() == 1 {
        Target::Cyclic { n: invariants[0] }
    } else {
        Target::Abelian { invariants: invariants.clone() }
    };
    let images = (0..g)
        .map(|i| {
            factors
                .iter()
                .map(|&(j, m)| {
                    let mb = num_bigint::BigInt::from(m);
                    ((&snf.v[i][j] % &mb + &mb) % &mb).to_u64().unwrap()
                })
                .collect()
        })
        .collect();
    FiniteHom::new(target, images, p)
}

/// The kernel cover of rho x theta.
pub fn product_cover(rho: &FiniteHom, theta: &FiniteHom) -> Result<CoverDescriptor, CoverError> {
    if rho.presentation != theta.presentation {
        return Err(CoverError::PresentationMismatch);
    }
    let target = Target::Product { factors: vec![rho.target.clone(), theta.target.clone()] };
    let images = rho.images.iter().zip(&theta.images).map(|(a, b)| a.iter().chain(b).copied().collect()).collect();
    let h = FiniteHom::new(target, images, &rho.presentation)?;
    Ok(CoverDescriptor::from_hom(&h))
}

// -- assembling piece covers ---------------------------------------------------

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PieceCoverPlan {
    pub p: u64,
    pub m: Vec<u64>,
    pub copies: Vec<u64>,
    pub total: u64,
}

pub fn assemble(m: &[u64], p: u64) -> Result<PieceCoverPlan, CoverError> {
    if m.is_empty() {
        return Err(CoverError::NoPieces);
    }
    let p2 = p * p;
    for &mi in m {
        if mi == 0 || mi % p2 != 0 {
            return Err(CoverError::NotDivisible { m: mi, p2 });
        }
    }
    let l = m.iter().map(|&mi| mi / p2).fold(1u64, |a, b| a.lcm(&b));
    Ok(PieceCoverPlan { p, m: m.to_vec(), copies: m.iter().map(|&mi| l / (mi / p2)).collect(), total: p2 * l })
}

/// Sheets of the Seifert-piece cover: the constructed count 2·lcm(u,v,p)·p
/// and the stated bound 2uvp^2.
pub fn seifert_sheets(u: u64, v: u64, p: u64) -> Result<(u64, u64), CoverError> {
    if u.gcd(&v) != 1 {
        return Err(CoverError::NotCoprime { u, v });
    }
    if !is_prime_u64(p) {
        return Err(CoverError::NotPrime(p));
    }
    if p <= 3 {
        return Err(CoverError::SmallPrime(p));
    }
    let l = u.lcm(&v).lcm(&p);
    Ok((2 * l * p, 2 * u * v * p * p))
}

// -- decomposition accounting ------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct RegionCounts {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct FaceComponent {
    pub genus: u8,
    pub boundary: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Accounting {
    pub arcs: u64,
    pub arc_bound: u64,
    pub type_d: u64,
    pub vertex_bound: u64,
    pub vertex_limit: u64,
    pub tori: u64,
    pub torus_limit: u64,
}

/// Count the cutting arcs and spine vertices produced when a triangulation
/// is cut along normal tori.
pub fn decomposition_accountant(
    t: u64,
    regions: &[RegionCounts],
    components: &[FaceComponent],
    tori: u64,
) -> Result<Accounting, CoverError> {
    let bad = |m: String| Err(CoverError::Accounting(m));
    if t == 0 {
        return bad("no tetrahedra".into());
    }
    if regions.len() as u64 != t {
        return bad(format!("{} region records for {t} tetrahedra", regions.len()));
    }
    if let Some(i) = regions.iter().position(|r| r.d > 1) {
        return bad(format!("tetrahedron {i} has more than one type (d) region"));
    }
    let type_c: u64 = regions.iter().map(|r| r.c).sum();
    let type_d: u64 = regions.iter().map(|r| r.d).sum();
    let cap = 3 * type_c + 6 * type_d;
    let total_b: u64 = components.iter().map(|c| c.boundary).sum();
    if total_b > cap || components.len() as u64 > cap {
        return bad(format!("{total_b} boundary circles in {} components exceed 3c + 6d = {cap}", components.len()));
    }
    let mut arcs = 0u64;
    for c in components {
        match (c.genus, c.boundary) {
            (1, b) => arcs += b + 1,
            (0, 0) => return bad("closed genus 0 component".into()),
            (0, b) => arcs += b - 1,
            (g, _) => return bad(format!("component of genus {g}")),
        }
    }
    let arc_bound = 6 * t + components.len() as u64;
    let vertex_bound = type_d + 2 * arcs;
    let vertex_limit = 25 * t;
    if arcs > arc_bound || vertex_bound > vertex_limit {
        return bad(format!("{arcs} arcs and {vertex_bound} vertices exceed the bounds"));
    }
    if tori >= 2 * t {
        return bad(format!("{tori} tori is not below 2t = {}", 2 * t));
    }
    Ok(Accounting { arcs, arc_bound, type_d, vertex_bound, vertex_limit, tori, torus_limit: 2 * t })
}

/// Whether the image of `h` restricted to the given words is abelian.
pub fn images_commute(h: &FiniteHom, a: &[i32], b: &[i32]) -> bool {
    let (x, y) = (h.image_of(a), h.image_of(b));
    h.target.mul(&x, &y) == h.target.mul(&y, &x)
}

/// Canonical parabolic `[[1,1],[0,1]]`.
pub const PARABOLIC: [u64; 4] = [1, 1, 0, 1];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagram::parse_pd;

    const TREFOIL: &str = "X(1,4,2,5) X(3,6,4,1) X(5,2,6,3)";

    #[test]
    fn sl2_order() {
        assert_eq!(sl2_elements(5).len(), 120);
        assert_eq!(sl2_elements(3).len(), 24);
    }

    #[test]
    fn homology_cover_examples() {
        let c = homology_cover(2, 3).unwrap();
        assert_eq!(c.sheets, 9);
        assert_eq!(c.certificate, Certificate::AbelianNoncyclic);
        assert_eq!(c.boundary_index, vec![9, 9]);
        assert_eq!(homology_cover(6, 5).unwrap().sheets, 25);
        assert_eq!(homology_cover(2, 2), Err(CoverError::PrimeDividesWinding { p: 2, w: 2 }));
        assert_eq!(homology_cover(0, 3), Err(CoverError::ZeroWinding));
    }

    #[test]
    fn trefoil_colorings() {
        let d = parse_pd(TREFOIL).unwrap();
        let h = pcoloring_cover(&d, 3).unwrap().unwrap();
        assert_eq!(h.image_order, 6);
        assert_eq!(h.certificate(), Certificate::Nonabelian);
        assert!(pcoloring_cover(&d, 5).unwrap().is_none());
    }

    #[test]
    fn theta_on_trefoil() {
        let p = parse_pd(TREFOIL).unwrap().wirtinger_presentation();
        let t = theta_hom(&p, 5).unwrap();
        assert_eq!(t.target, Target::Cyclic { n: 5 });
        assert_eq!(t.image_order, 5);
        assert_eq!(theta_hom(&p, 2).unwrap().image_order, 2);
    }

    #[test]
    fn theta_on_split_model() {
        // two free meridians, abelianization Z^2
        let p = GroupPresentation::new(2, vec![]).unwrap();
        let t = theta_hom(&p, 3).unwrap();
        assert_eq!(t.target, Target::Abelian { invariants: vec![3, 3] });
        for g in 0..2 {
            assert_eq!(t.target.element_order(&t.images[g]), 3);
        }
        assert_eq!(t.certificate(), Certificate::AbelianNoncyclic);
    }

    #[test]
    fn assemble_examples() {
        let plan = assemble(&[50, 75], 5).unwrap();
        assert_eq!((plan.total, plan.copies.clone()), (150, vec![3, 2]));
        assert_eq!(assemble(&[9, 9], 3).unwrap().total, 9);
        assert!(matches!(assemble(&[50, 60], 5), Err(CoverError::NotDivisible { m: 60, .. })));
    }

    #[test]
    fn seifert_examples() {
        assert_eq!(seifert_sheets(2, 3, 5).unwrap(), (300, 300));
        assert_eq!(seifert_sheets(2, 5, 7).unwrap(), (980, 980));
        assert_eq!(seifert_sheets(3, 4, 5).unwrap(), (600, 600));
        assert!(seifert_sheets(2, 3, 3).is_err());
        assert!(seifert_sheets(2, 4, 5).is_err());
    }

    #[test]
    fn winding() {
        assert_eq!(winding_filter(10), 5);
        assert_eq!(winding_filter(1), 0);
        assert_eq!(winding_filter(6), 3);
    }

    #[test]
    fn accountant_example() {
        let mut regions = vec![RegionCounts { a: 1, b: 0, c: 0, d: 0 }; 4];
        regions[0].d = 1;
        let a = decomposition_accountant(4, &regions, &[FaceComponent { genus: 0, boundary: 2 }], 1).unwrap();
        assert_eq!((a.arcs, a.vertex_bound), (1, 3));
        assert!(a.vertex_bound <= 100);
        regions[1].d = 2;
        assert!(decomposition_accountant(4, &regions, &[], 1).is_err());
    }
}
