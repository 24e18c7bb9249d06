//! The representation variety of a presentation into SL2 as an integer
//! polynomial system, and a finite-field solver for it.
//!
//! Generator k is sent to the matrix `[[X_{4k}, X_{4k+1}], [X_{4k+2}, X_{4k+3}]]`.
//! Inverses use the adjugate, so no division is ever needed; the determinant
//! equations make that legitimate on the solution set.

use crate::bounds::is_prime_u64;
use crate::presentation::{check_word, gen_of, GroupPresentation, PresentationError};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use thiserror::Error;

/// Longest word expanded symbolically; entries can have 2^len terms.
pub const MAX_SYMBOLIC_LENGTH: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RepVarError {
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("peripheral word of length {len} exceeds 4n = {limit}")]
    PeripheralTooLong { len: usize, limit: usize },
    #[error("word of length {0} is too long to expand symbolically")]
    WordTooLong(usize),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("modulus {0} is too large for the finite-field solver")]
    ModulusTooLarge(u64),
}

/// Sorted (variable, exponent) pairs with positive exponents.
pub type Monomial = Vec<(u32, u32)>;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiPoly {
    terms: BTreeMap<Monomial, BigInt>,
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push(b[j]);
            j += 1;
        } else {
            out.push((a[i].0, a[i].1 + b[j].1));
            i += 1;
            j += 1;
        }
    }
    out
}

impl MultiPoly {
    pub fn zero() -> Self {
        MultiPoly::default()
    }

    pub fn constant(c: i64) -> Self {
        let mut p = MultiPoly::zero();
        p.add_term(Vec::new(), BigInt::from(c));
        p
    }

    pub fn var(v: u32) -> Self {
        let mut p = MultiPoly::zero();
        p.add_term(vec![(v, 1)], BigInt::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(c);
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    /// Total degree; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|m| m.iter().map(|&(_, e)| e).sum()).max().unwrap_or(0)
    }

    /// Variables with a nonzero exponent somewhere.
    pub fn variables(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.terms.keys().flat_map(|m| m.iter().map(|&(x, _)| x)).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// Sum of squared coefficients, i.e. the squared quadratic norm.
    pub fn norm_squared(&self) -> BigInt {
        self.terms.values().map(|c| c * c).sum()
    }

    pub fn add(&self, o: &MultiPoly) -> MultiPoly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(m.clone(), c.clone());
        }
        r
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly { terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect() }
    }

    pub fn sub(&self, o: &MultiPoly) -> MultiPoly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &MultiPoly) -> MultiPoly {
        let mut r = MultiPoly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                r.add_term(mono_mul(m1, m2), c1 * c2);
            }
        }
        r
    }

    /// Evaluate at integer values (indexed by variable).
    pub fn eval(&self, x: &[BigInt]) -> BigInt {
        self.terms
            .iter()
            .map(|(m, c)| m.iter().fold(c.clone(), |acc, &(v, e)| acc * x[v as usize].pow(e)))
            .sum()
    }

    /// Dense exponent vectors of length `vars`, paired with coefficients.
    pub fn to_json(&self, vars: usize) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut ex = vec![0u32; vars];
                for &(v, e) in m {
                    ex[v as usize] = e;
                }
                serde_json::json!([c.to_string(), ex])
            })
            .collect();
        serde_json::Value::Array(terms)
    }
}

pub type PolyMatrix = [[MultiPoly; 2]; 2];

fn mat_mul(a: &PolyMatrix, b: &PolyMatrix) -> PolyMatrix {
    let e = |i: usize, j: usize| a[i][0].mul(&b[0][j]).add(&a[i][1].mul(&b[1][j]));
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn generator_matrix(g: usize, sign: i32) -> PolyMatrix {
    let x = |i: usize| MultiPoly::var((4 * g + i) as u32);
    if sign > 0 {
        [[x(0), x(1)], [x(2), x(3)]]
    } else {
        [[x(3), x(1).neg()], [x(2).neg(), x(0)]]
    }
}

/// Product of generator matrices along a word.
pub fn symbolic_word_matrix(w: &[i32], generator_count: usize) -> Result<PolyMatrix, RepVarError> {
    check_word(w, generator_count)?;
    if w.len() > MAX_SYMBOLIC_LENGTH {
        return Err(RepVarError::WordTooLong(w.len()));
    }
    let id = || [[MultiPoly::constant(1), MultiPoly::zero()], [MultiPoly::zero(), MultiPoly::constant(1)]];
    Ok(w.iter().fold(id(), |acc, &l| mat_mul(&acc, &generator_matrix(gen_of(l), l.signum()))))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamedPoly {
    pub name: String,
    pub poly: MultiPoly,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepVarietySystem {
    pub generator_count: usize,
    pub relator_lengths: Vec<usize>,
    pub x0_length: usize,
    pub determinants: Vec<NamedPoly>,
    pub relators: Vec<NamedPoly>,
    pub normalization: Vec<NamedPoly>,
    /// Trace condition on x1: index 0 is tr - 2, index 1 is tr + 2.
    pub trace: Option<[NamedPoly; 2]>,
    pub x1_length: usize,
}

impl RepVarietySystem {
    pub fn variable_count(&self) -> usize {
        4 * self.generator_count
    }

    /// All polynomials, with the trace condition of the given sign
    /// (`Some(1)` for tr = 2, `Some(-1)` for tr = -2) when present.
    pub fn polynomials(&self, trace_sign: Option<i8>) -> Vec<&NamedPoly> {
        let mut v: Vec<&NamedPoly> =
            self.determinants.iter().chain(&self.relators).chain(&self.normalization).collect();
        if let (Some(t), Some(s)) = (&self.trace, trace_sign) {
            v.push(&t[if s > 0 { 0 } else { 1 }]);
        }
        v
    }

    /// Number of polynomials in the system (one trace variant counted).
    pub fn len(&self) -> usize {
        self.determinants.len() + self.relators.len() + self.normalization.len() + self.trace.is_some() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> serde_json::Value {
        let vars = self.variable_count();
        let polys: Vec<serde_json::Value> = self
            .polynomials(None)
            .into_iter()
            .chain(self.trace.iter().flat_map(|t| t.iter()))
            .map(|p| serde_json::json!({ "name": p.name, "terms": p.poly.to_json(vars) }))
            .collect();
        let bounds: Vec<_> = measure_bounds(self).into_iter().map(|b| serde_json::to_value(b).unwrap()).collect();
        serde_json::json!({
            "generators": self.generator_count,
            "variables": vars,
            "relator_lengths": self.relator_lengths,
            "polynomials": polys,
            "bounds": bounds,
        })
    }
}

/// Build G_k, R_i, C_i and optionally Q.
///
/// With n+1 generators the peripheral words must have length at most 4n.
pub fn build_system(
    p: &GroupPresentation,
    x0: &[i32],
    x1: Option<&[i32]>,
) -> Result<RepVarietySystem, RepVarError> {
    p.validate()?;
    let g = p.generator_count;
    let limit = 4 * g.saturating_sub(1);
    for w in std::iter::once(x0).chain(x1) {
        check_word(w, g)?;
        if w.len() > limit.max(1) {
            return Err(RepVarError::PeripheralTooLong { len: w.len(), limit });
        }
    }
    let determinants = (0..g)
        .map(|k| {
            let m = generator_matrix(k, 1);
            NamedPoly { name: format!("G{k}"), poly: m[0][0].mul(&m[1][1]).sub(&m[1][0].mul(&m[0][1])).sub(&MultiPoly::constant(1)) }
        })
        .collect();
    let one = MultiPoly::constant(1);
    let mut relators = Vec::new();
    let mut idx = g;
    for r in &p.relators {
        let m = symbolic_word_matrix(r, g)?;
        // the (2,2) entry is implied by the other three and det = 1
        for poly in [m[0][0].sub(&one), m[0][1].clone(), m[1][0].clone()] {
            relators.push(NamedPoly { name: format!("R{idx}"), poly });
            idx += 1;
        }
    }
    let m = symbolic_word_matrix(x0, g)?;
    let normalization = [m[0][0].sub(&one), m[0][1].sub(&one), m[1][0].clone()]
        .into_iter()
        .enumerate()
        .map(|(i, poly)| NamedPoly { name: format!("C{i}"), poly })
        .collect();
    let trace = match x1 {
        Some(w) => {
            let m = symbolic_word_matrix(w, g)?;
            let tr = m[0][0].add(&m[1][1]);
            Some([
                NamedPoly { name: "Q-".into(), poly: tr.sub(&MultiPoly::constant(2)) },
                NamedPoly { name: "Q+".into(), poly: tr.add(&MultiPoly::constant(2)) },
            ])
        }
        None => None,
    };
    Ok(RepVarietySystem {
        generator_count: g,
        relator_lengths: p.relators.iter().map(Vec::len).collect(),
        x0_length: x0.len(),
        determinants,
        relators,
        normalization,
        trace,
        x1_length: x1.map_or(0, <[i32]>::len),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MeasureBound {
    pub name: String,
    /// ‖P‖, which bounds M(P) from above.
    pub norm: f64,
    /// The bound stated for this kind of polynomial.
    pub stated: f64,
}

impl MeasureBound {
    pub fn bound(&self) -> f64 {
        self.norm.min(self.stated)
    }
}

fn norm_f64(p: &MultiPoly) -> f64 {
    let s = p.norm_squared();
    s.to_f64().unwrap_or(f64::INFINITY).sqrt()
}

/// Mahler-measure upper bounds for every polynomial of the system.
pub fn measure_bounds(s: &RepVarietySystem) -> Vec<MeasureBound> {
    let n = s.generator_count.saturating_sub(1) as i32;
    let two_4n = 2f64.powi(4 * n);
    let mut out = Vec::new();
    for p in &s.determinants {
        out.push(MeasureBound { name: p.name.clone(), norm: norm_f64(&p.poly), stated: 3f64.sqrt() });
    }
    for (i, p) in s.relators.iter().enumerate() {
        let l = s.relator_lengths[i / 3] as i32;
        out.push(MeasureBound { name: p.name.clone(), norm: norm_f64(&p.poly), stated: 2f64.powi(l) + 1.0 });
    }
    for p in &s.normalization {
        out.push(MeasureBound { name: p.name.clone(), norm: norm_f64(&p.poly), stated: two_4n + 1.0 });
    }
    for p in s.trace.iter().flat_map(|t| t.iter()) {
        out.push(MeasureBound { name: p.name.clone(), norm: norm_f64(&p.poly), stated: two_4n + 2.0 });
    }
    out
}

// -- finite-field solving ---------------------------------------------------

struct CompiledPoly {
    terms: Vec<(u64, Vec<(usize, u32)>)>,
    /// Position in the generator order after which all variables are set.
    level: usize,
}

fn compile(p: &MultiPoly, q: u64, pos_of_gen: &[usize]) -> CompiledPoly {
    let qi = BigInt::from(q);
    let terms = p
        .terms()
        .map(|(m, c)| {
            let c = ((c % &qi) + &qi) % &qi;
            (c.to_u64().unwrap(), m.iter().map(|&(v, e)| (v as usize, e)).collect())
        })
        .collect();
    let level = p.variables().iter().map(|&v| pos_of_gen[v as usize / 4]).max().unwrap_or(0);
    CompiledPoly { terms, level }
}

fn eval_mod(p: &CompiledPoly, x: &[u64], q: u64) -> u64 {
    let mut acc = 0u64;
    for (c, m) in &p.terms {
        let mut t = *c;
        for &(v, e) in m {
            for _ in 0..e {
                t = t * x[v] % q;
            }
        }
        acc = (acc + t) % q;
    }
    acc
}

/// Outcome of a finite-field search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SolveResult {
    /// Variable assignments, sorted lexicographically.
    pub solutions: Vec<Vec<u64>>,
    /// False when the node budget ran out before the search finished.
    pub complete: bool,
    pub nodes: u64,
}

/// Generator order: peripheral generators first, then greedily the generator
/// that completes the most polynomials.
fn generator_order(polys: &[&NamedPoly], g: usize) -> Vec<usize> {
    let gens_of: Vec<Vec<usize>> = polys
        .iter()
        .map(|p| {
            let mut v: Vec<usize> = p.poly.variables().iter().map(|&x| x as usize / 4).collect();
            v.dedup();
            v
        })
        .collect();
    let mut order: Vec<usize> = Vec::new();
    let mut placed = vec![false; g];
    for p in polys.iter().zip(&gens_of).filter(|(p, _)| p.name.starts_with('C')) {
        for &k in p.1 {
            if !placed[k] {
                placed[k] = true;
                order.push(k);
            }
        }
    }
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
    order
}

/// All points of the system over the field with q elements (up to `budget`
/// search nodes). With a trace condition both signs are solved and merged.
pub fn solve_mod_p(s: &RepVarietySystem, q: u64, budget: u64) -> Result<SolveResult, RepVarError> {
    if !is_prime_u64(q) {
        return Err(RepVarError::NotPrime(q));
    }
    if q > 1 << 20 {
        return Err(RepVarError::ModulusTooLarge(q));
    }
    let signs: Vec<Option<i8>> = if s.trace.is_some() { vec![Some(1), Some(-1)] } else { vec![None] };
    let mut all = Vec::new();
    let mut complete = true;
    let mut nodes = 0;
    for sign in signs {
        let r = solve_one(s, q, budget.saturating_sub(nodes), sign);
        nodes += r.nodes;
        complete &= r.complete;
        all.extend(r.solutions);
    }
    all.sort();
    all.dedup();
    Ok(SolveResult { solutions: all, complete, nodes })
}

fn solve_one(s: &RepVarietySystem, q: u64, budget: u64, sign: Option<i8>) -> SolveResult {
    let g = s.generator_count;
    let polys = s.polynomials(sign);
    let order = generator_order(&polys, g);
    let mut pos_of_gen = vec![0; g];
    for (i, &k) in order.iter().enumerate() {
        pos_of_gen[k] = i;
    }
    let compiled: Vec<CompiledPoly> = polys.iter().map(|p| compile(&p.poly, q, &pos_of_gen)).collect();
    let mut by_level: Vec<Vec<&CompiledPoly>> = vec![Vec::new(); g];
    for c in &compiled {
        by_level[c.level].push(c);
    }
    let mut x = vec![0u64; 4 * g];
    let mut solutions = Vec::new();
    let mut nodes = 0u64;
    let mut complete = true;
    // explicit stack of candidate indices per level; candidates are all of F_q^4
    let total = q.pow(4);
    let mut idx = vec![0u64; g];
    let mut level = 0usize;
    'search: loop {
        if idx[level] == total {
            if level == 0 {
                break;
            }
            idx[level] = 0;
            level -= 1;
            idx[level] += 1;
            continue;
        }
        nodes += 1;
        if nodes > budget {
            complete = false;
            break 'search;
        }
        let k = order[level];
        let mut t = idx[level];
        for i in (0..4).rev() {
            x[4 * k + i] = t % q;
            t /= q;
        }
        if by_level[level].iter().all(|p| eval_mod(p, &x, q) == 0) {
            if level + 1 == g {
                solutions.push(x.clone());
                idx[level] += 1;
            } else {
                level += 1;
            }
        } else {
            idx[level] += 1;
        }
    }
    solutions.sort();
    SolveResult { solutions, complete, nodes }
}

/// Generator matrices `[a, b, c, d]` of a solution.
pub fn solution_matrices(x: &[u64]) -> Vec<[u64; 4]> {
    x.chunks(4).map(|c| [c[0], c[1], c[2], c[3]]).collect()
}

/// Integer evaluation check used by tests: every polynomial vanishes mod q.
pub fn satisfies(s: &RepVarietySystem, x: &[u64], q: u64, trace_sign: Option<i8>) -> bool {
    let xs: Vec<BigInt> = x.iter().map(|&v| BigInt::from(v)).collect();
    let qi = BigInt::from(q);
    s.polynomials(trace_sign).iter().all(|p| (p.poly.eval(&xs) % &qi).is_zero())
}

/// Largest absolute coefficient; the symbolic products only ever have small ones.
pub fn max_coefficient(p: &MultiPoly) -> BigInt {
    p.terms().map(|(_, c)| c.abs()).max().unwrap_or_else(BigInt::zero)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_generator_matrix() {
        let m = symbolic_word_matrix(&[1], 1).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(m[i][j], MultiPoly::var((2 * i + j) as u32));
            }
        }
    }

    #[test]
    fn word_times_inverse_is_det_identity() {
        let m = symbolic_word_matrix(&[1, -1], 1).unwrap();
        let det = MultiPoly::var(0).mul(&MultiPoly::var(3)).sub(&MultiPoly::var(1).mul(&MultiPoly::var(2)));
        assert_eq!(m[0][0], det);
        assert_eq!(m[1][1], det);
        assert!(m[0][1].is_zero() && m[1][0].is_zero());
    }

    #[test]
    fn term_counts_bounded() {
        let w = [1, 2, -1, 3, -2];
        let m = symbolic_word_matrix(&w, 3).unwrap();
        for row in &m {
            for e in row {
                assert!(e.term_count() <= 1 << w.len());
                assert!(e.degree() as usize <= w.len());
            }
        }
    }

    #[test]
    fn out_of_range_word() {
        assert!(matches!(symbolic_word_matrix(&[3], 2), Err(RepVarError::Presentation(_))));
    }

    #[test]
    fn non_prime_rejected() {
        let p = GroupPresentation::new(2, vec![vec![1, 2, -1, -2]]).unwrap();
        let s = build_system(&p, &[1], None).unwrap();
        assert_eq!(solve_mod_p(&s, 6, 10), Err(RepVarError::NotPrime(6)));
    }
}
