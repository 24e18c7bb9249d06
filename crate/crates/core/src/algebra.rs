//! Exact integer algebra: Laurent polynomials, Fox calculus, Smith normal
//! form, abelianization exponents and Alexander polynomials.

use crate::presentation::{free_reduce, gen_of, GroupPresentation, Word};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("generator index {index} out of range (generator count {count})")]
    GeneratorOutOfRange { index: usize, count: usize },
    #[error("abelianization has rank {0}, expected 1")]
    Rank(usize),
    #[error("too many minors to enumerate ({0})")]
    TooManyMinors(u128),
}

// ---------------------------------------------------------------------------
// Dense integer polynomials (ascending coefficients), used internally.

fn trim(v: &mut Vec<BigInt>) {
    while v.last().is_some_and(|c| c.is_zero()) {
        v.pop();
    }
}

fn poly_mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(&mut out);
    out
}

fn poly_sub(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] -= y;
    }
    trim(&mut out);
    out
}

fn content(a: &[BigInt]) -> BigInt {
    a.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

fn primitive(a: &[BigInt]) -> Vec<BigInt> {
    let c = content(a);
    if c.is_zero() {
        return Vec::new();
    }
    a.iter().map(|x| x / &c).collect()
}

/// Exact division in Z[t]; `None` when the quotient is not integral.
fn poly_div_exact(a: &[BigInt], b: &[BigInt]) -> Option<Vec<BigInt>> {
    if b.is_empty() {
        return None;
    }
    if a.is_empty() {
        return Some(Vec::new());
    }
    if a.len() < b.len() {
        return None;
    }
    let mut r = a.to_vec();
    let lb = b.last().unwrap();
    let mut q = vec![BigInt::zero(); a.len() - b.len() + 1];
    for i in (0..q.len()).rev() {
        let top = &r[i + b.len() - 1];
        if top.is_zero() {
            continue;
        }
        let (qi, rem) = top.div_rem(lb);
        if !rem.is_zero() {
            return None;
        }
        for (j, y) in b.iter().enumerate() {
            r[i + j] -= &qi * y;
        }
        q[i] = qi;
    }
    if r.iter().any(|x| !x.is_zero()) {
        return None;
    }
    trim(&mut q);
    Some(q)
}

/// Pseudo-remainder of a by b.
fn prem(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let lb = b.last().unwrap().clone();
    while r.len() >= b.len() && !r.is_empty() {
        let lr = r.last().unwrap().clone();
        let shift = r.len() - b.len();
        for x in r.iter_mut() {
            *x *= &lb;
        }
        for (j, y) in b.iter().enumerate() {
            r[shift + j] -= &lr * y;
        }
        trim(&mut r);
    }
    r
}

fn positive_lead(mut v: Vec<BigInt>) -> Vec<BigInt> {
    if v.last().is_some_and(|c| c.is_negative()) {
        for x in v.iter_mut() {
            *x = -x.clone();
        }
    }
    v
}

fn poly_gcd(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    if a.is_empty() {
        return positive_lead(b.to_vec());
    }
    if b.is_empty() {
        return positive_lead(a.to_vec());
    }
    let g = content(a).gcd(&content(b));
    let (mut x, mut y) = (primitive(a), primitive(b));
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    while !y.is_empty() {
        let r = primitive(&prem(&x, &y));
        x = y;
        y = r;
    }
    positive_lead(primitive(&x).iter().map(|c| c * &g).collect())
}

// ---------------------------------------------------------------------------

/// Integer Laurent polynomial `Σ coeffs[i] t^(low+i)`; zero has no coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPolynomial {
    low: i64,
    coeffs: Vec<BigInt>,
}

impl LaurentPolynomial {
    pub fn zero() -> Self {
        LaurentPolynomial { low: 0, coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    pub fn monomial(c: impl Into<BigInt>, e: i64) -> Self {
        Self::from_dense(e, vec![c.into()])
    }

    pub fn from_dense(low: i64, coeffs: Vec<BigInt>) -> Self {
        let mut p = LaurentPolynomial { low, coeffs };
        p.normalize();
        p
    }

    /// From ascending integer coefficients starting at t^0.
    pub fn from_coeffs(cs: &[i64]) -> Self {
        Self::from_dense(0, cs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn from_terms(terms: &[(i64, i64)]) -> Self {
        terms
            .iter()
            .fold(Self::zero(), |acc, &(e, c)| &acc + &Self::monomial(c, e))
    }

    fn normalize(&mut self) {
        trim(&mut self.coeffs);
        let lead = self.coeffs.iter().take_while(|c| c.is_zero()).count();
        if lead == self.coeffs.len() {
            self.coeffs.clear();
            self.low = 0;
            return;
        }
        self.coeffs.drain(..lead);
        self.low += lead as i64;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn low(&self) -> i64 {
        self.low
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    /// Width of the exponent span (degree after clearing denominators).
    pub fn span(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, e: i64) -> BigInt {
        let i = e - self.low;
        if i < 0 || i as usize >= self.coeffs.len() {
            BigInt::zero()
        } else {
            self.coeffs[i as usize].clone()
        }
    }

    /// Nonzero terms `(exponent, coefficient)` in ascending order.
    pub fn terms(&self) -> Vec<(i64, BigInt)> {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| (self.low + i as i64, c.clone()))
            .collect()
    }

    pub fn dense(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn shift(&self, k: i64) -> Self {
        LaurentPolynomial { low: self.low + k, coeffs: self.coeffs.clone() }
    }

    /// `p(1/t)`.
    pub fn reflect(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        LaurentPolynomial { low: -self.high(), coeffs: c }.normalized_zero()
    }

    fn normalized_zero(self) -> Self {
        if self.coeffs.is_empty() {
            Self::zero()
        } else {
            self
        }
    }

    /// Unit-normal form: lowest exponent 0, lowest coefficient positive.
    pub fn unit_normal(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let neg = self.coeffs[0].is_negative();
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| if neg { -c } else { c.clone() })
            .collect();
        LaurentPolynomial { low: 0, coeffs }
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].abs().is_one()
    }

    pub fn eval(&self, t: &BigInt) -> Option<num_rational::BigRational> {
        use num_rational::BigRational;
        if t.is_zero() && self.low < 0 {
            return None;
        }
        let tr = BigRational::from_integer(t.clone());
        let mut acc = BigRational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * &tr + BigRational::from_integer(c.clone());
        }
        let scale = if self.low >= 0 {
            num_traits::pow(tr, self.low as usize)
        } else {
            num_traits::pow(tr, (-self.low) as usize).recip()
        };
        Some(acc * scale)
    }

    /// Value at an integer point with nonnegative exponents shifted out, i.e.
    /// the value of the unit-normal form.
    pub fn eval_normal(&self, t: i64) -> BigInt {
        let tb = BigInt::from(t);
        self.coeffs.iter().rev().fold(BigInt::zero(), |acc, c| acc * &tb + c)
    }

    pub fn unit_equivalent(&self, other: &Self) -> bool {
        self.unit_normal() == other.unit_normal()
    }

    /// Gcd in Z[t, 1/t], returned in unit-normal form.
    pub fn gcd(&self, other: &Self) -> Self {
        let g = poly_gcd(&self.coeffs, &other.coeffs);
        Self::from_dense(0, g).unit_normal()
    }

    /// Exact quotient by `d`, if it exists.
    pub fn div_exact(&self, d: &Self) -> Option<Self> {
        let q = poly_div_exact(&self.coeffs, &d.coeffs)?;
        Some(Self::from_dense(self.low - d.low, q))
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.terms()
                .into_iter()
                .map(|(e, c)| {
                    let cv = match c.to_i64() {
                        Some(i) => serde_json::json!(i),
                        None => serde_json::json!(c.to_string()),
                    };
                    serde_json::json!([e, cv])
                })
                .collect(),
        )
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.terms();
        if terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, c)) in terms.iter().enumerate() {
            let neg = c.is_negative();
            let a = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            let mono = match *e {
                0 => String::new(),
                1 => "t".to_string(),
                e => format!("t^{e}"),
            };
            if mono.is_empty() {
                write!(f, "{a}")?;
            } else if a.is_one() {
                write!(f, "{mono}")?;
            } else {
                write!(f, "{a}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl std::ops::Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn add(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        if self.is_zero() {
            return o.clone();
        }
        if o.is_zero() {
            return self.clone();
        }
        let low = self.low.min(o.low);
        let high = self.high().max(o.high());
        let mut c = vec![BigInt::zero(); (high - low + 1) as usize];
        for (i, x) in self.coeffs.iter().enumerate() {
            c[(self.low - low) as usize + i] += x;
        }
        for (i, x) in o.coeffs.iter().enumerate() {
            c[(o.low - low) as usize + i] += x;
        }
        LaurentPolynomial::from_dense(low, c)
    }
}

impl std::ops::Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn neg(self) -> LaurentPolynomial {
        LaurentPolynomial { low: self.low, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }
}

impl std::ops::Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn sub(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        self + &(-o)
    }
}

impl std::ops::Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;
    fn mul(self, o: &LaurentPolynomial) -> LaurentPolynomial {
        LaurentPolynomial::from_dense(self.low + o.low, poly_mul(&self.coeffs, &o.coeffs))
    }
}

// ---------------------------------------------------------------------------

/// Integer combination of reduced words in the free group.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, BigInt>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn word(w: &[i32]) -> Self {
        let mut e = Self::zero();
        e.add_term(w, BigInt::one());
        e
    }

    pub fn one() -> Self {
        Self::word(&[])
    }

    pub fn add_term(&mut self, w: &[i32], c: BigInt) {
        let key = free_reduce(w);
        let entry = self.terms.entry(key.clone()).or_insert_with(BigInt::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> &BTreeMap<Word, BigInt> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w, c.clone());
        }
        r
    }

    pub fn sub(&self, o: &Self) -> Self {
        let mut r = self.clone();
        for (w, c) in &o.terms {
            r.add_term(w, -c);
        }
        r
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut r = Self::zero();
        for (w1, c1) in &self.terms {
            for (w2, c2) in &o.terms {
                let mut w = w1.clone();
                w.extend_from_slice(w2);
                r.add_term(&w, c1 * c2);
            }
        }
        r
    }

    /// Image under the abelian map sending generator g to t^nu[g].
    pub fn abelianize(&self, nu: &[i64]) -> LaurentPolynomial {
        self.terms.iter().fold(LaurentPolynomial::zero(), |acc, (w, c)| {
            let e: i64 = w.iter().map(|&l| l.signum() as i64 * nu[gen_of(l)]).sum();
            &acc + &LaurentPolynomial::monomial(c.clone(), e)
        })
    }
}

/// Fox derivative of `w` with respect to generator `i`.
pub fn fox_derivative(w: &[i32], i: usize, generator_count: usize) -> Result<GroupRingElement, AlgebraError> {
    if i >= generator_count {
        return Err(AlgebraError::GeneratorOutOfRange { index: i, count: generator_count });
    }
    let mut out = GroupRingElement::zero();
    for (p, &l) in w.iter().enumerate() {
        let g = gen_of(l);
        if g >= generator_count {
            return Err(AlgebraError::GeneratorOutOfRange { index: g, count: generator_count });
        }
        if g != i {
            continue;
        }
        if l > 0 {
            out.add_term(&w[..p], BigInt::one());
        } else {
            out.add_term(&w[..=p], -BigInt::one());
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

pub type IntegerMatrix = Vec<Vec<BigInt>>;

pub fn to_big_matrix(m: &[Vec<i64>]) -> IntegerMatrix {
    m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

fn identity(n: usize) -> IntegerMatrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn mat_mul(a: &IntegerMatrix, b: &IntegerMatrix) -> IntegerMatrix {
    let n = a.len();
    let m = b.first().map_or(0, Vec::len);
    let k = b.len();
    (0..n)
        .map(|i| {
            (0..m)
                .map(|j| (0..k).fold(BigInt::zero(), |acc, l| acc + &a[i][l] * &b[l][j]))
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// Nonzero diagonal entries d1 | d2 | ... (all positive).
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
    pub rows: usize,
    pub cols: usize,
    /// Unimodular U (rows×rows) and V (cols×cols) with U·M·V = D.
    pub u: IntegerMatrix,
    pub v: IntegerMatrix,
}

/// Smith normal form with transforms, pivoting on the smallest nonzero entry.
pub fn smith_normal_form(m: &IntegerMatrix) -> SmithForm {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = m.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry in the trailing block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero()
                    && best.is_none_or(|(bi, bj)| a[i][j].abs() < a[bi][bj].abs())
                {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let mut clean = true;
        for i in t + 1..rows {
            if a[i][t].is_zero() {
                continue;
            }
            let q = a[i][t].div_floor(&a[t][t]);
            for j in 0..cols {
                let d = &q * &a[t][j];
                a[i][j] -= d;
            }
            for j in 0..rows {
                let d = &q * &u[t][j];
                u[i][j] -= d;
            }
            if !a[i][t].is_zero() {
                clean = false;
            }
        }
        for j in t + 1..cols {
            if a[t][j].is_zero() {
                continue;
            }
            let q = a[t][j].div_floor(&a[t][t]);
            for i in 0..rows {
                let d = &q * &a[i][t];
                a[i][j] -= d;
            }
            for i in 0..cols {
                let d = &q * &v[i][t];
                v[i][j] -= d;
            }
            if !a[t][j].is_zero() {
                clean = false;
            }
        }
        if !clean {
            continue;
        }
        // divisibility: fold in a row whose entry the pivot does not divide
        let mut bad = None;
        'outer: for i in t + 1..rows {
            for j in t + 1..cols {
                if !(&a[i][j] % &a[t][t]).is_zero() {
                    bad = Some(i);
                    break 'outer;
                }
            }
        }
        if let Some(i) = bad {
            for j in 0..cols {
                let x = a[i][j].clone();
                a[t][j] += x;
            }
            for j in 0..rows {
                let x = u[i][j].clone();
                u[t][j] += x;
            }
            continue;
        }
        if a[t][t].is_negative() {
            for j in 0..cols {
                a[t][j] = -a[t][j].clone();
            }
            for j in 0..rows {
                u[t][j] = -u[t][j].clone();
            }
        }
        t += 1;
    }
    let diagonal: Vec<BigInt> = (0..t).map(|i| a[i][i].clone()).collect();
    SmithForm { rank: diagonal.len(), diagonal, rows, cols, u, v }
}

/// Determinant by fraction-free elimination.
pub fn determinant(m: &IntegerMatrix) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_zero()) else {
                return BigInt::zero();
            };
            a.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &a[k][k] * &a[i][j] - &a[i][k] * &a[k][j];
                a[i][j] = num / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Finitely generated abelian group: free rank plus torsion invariants (> 1).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// H1 of the presented group.
pub fn homology(p: &GroupPresentation) -> AbelianGroup {
    let m = to_big_matrix(&p.abelianized_matrix());
    let snf = smith_normal_form(&m);
    AbelianGroup {
        free_rank: p.generator_count - snf.rank,
        torsion: snf.diagonal.iter().filter(|d| !d.is_one()).cloned().collect(),
    }
}

/// Images of the generators in the free part of H1, normalized so the
/// gcd is 1 and the first nonzero entry is positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentVector(pub Vec<i64>);

impl ExponentVector {
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|x| x.abs()).max().unwrap_or(0)
    }
}

fn normalize_vector(v: &[BigInt]) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    let neg = v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative());
    v.iter().map(|x| if neg { -(x / &g) } else { x / &g }).collect()
}

/// Signed maximal minors `(−1)^j det B_j` of the abelianized matrix, when the
/// presentation has exactly one fewer relator than generators.
pub fn exponent_minors(p: &GroupPresentation) -> Option<Vec<BigInt>> {
    let g = p.generator_count;
    if p.relators.len() + 1 != g {
        return None;
    }
    let b = to_big_matrix(&p.abelianized_matrix());
    Some(
        (0..g)
            .map(|j| {
                let minor: IntegerMatrix = b
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, x)| x.clone()).collect())
                    .collect();
                let d = determinant(&minor);
                if j % 2 == 1 {
                    -d
                } else {
                    d
                }
            })
            .collect(),
    )
}

/// The vector ν with `[g_j] = ν_j [m]` for a generator m of H1/torsion.
pub fn abelianization_exponents(p: &GroupPresentation) -> Result<ExponentVector, AlgebraError> {
    let m = to_big_matrix(&p.abelianized_matrix());
    let snf = smith_normal_form(&m);
    let free = p.generator_count - snf.rank;
    if free != 1 {
        return Err(AlgebraError::Rank(free));
    }
    let raw: Vec<BigInt> = match exponent_minors(p) {
        Some(v) if v.iter().any(|x| !x.is_zero()) => v,
        _ => {
            // kernel of B is spanned by the last column of V
            let last = p.generator_count - 1;
            snf.v.iter().map(|row| row[last].clone()).collect()
        }
    };
    let nu = normalize_vector(&raw);
    let nu = nu
        .iter()
        .map(|x| x.to_i64().expect("exponent fits in i64"))
        .collect();
    Ok(ExponentVector(nu))
}

/// Alexander matrix: entry (j, i) is the abelianized Fox derivative of
/// relator j with respect to generator i.
pub fn alexander_matrix(p: &GroupPresentation) -> Result<Vec<Vec<LaurentPolynomial>>, AlgebraError> {
    let nu = abelianization_exponents(p)?;
    Ok(alexander_matrix_with(p, &nu.0))
}

pub fn alexander_matrix_with(p: &GroupPresentation, nu: &[i64]) -> Vec<Vec<LaurentPolynomial>> {
    let g = p.generator_count;
    p.relators
        .iter()
        .map(|r| {
            let mut row: Vec<BTreeMap<i64, BigInt>> = vec![BTreeMap::new(); g];
            let mut e = 0i64;
            for &l in r {
                let i = gen_of(l);
                if l > 0 {
                    *row[i].entry(e).or_insert_with(BigInt::zero) += 1;
                    e += nu[i];
                } else {
                    e -= nu[i];
                    *row[i].entry(e).or_insert_with(BigInt::zero) -= 1;
                }
            }
            row.into_iter()
                .map(|m| {
                    m.into_iter().fold(LaurentPolynomial::zero(), |acc, (e, c)| {
                        &acc + &LaurentPolynomial::monomial(c, e)
                    })
                })
                .collect()
        })
        .collect()
}

/// Determinant over Z[t] (entries shifted to polynomials beforehand).
fn poly_determinant(m: &[Vec<Vec<BigInt>>]) -> Vec<BigInt> {
    let n = m.len();
    if n == 0 {
        return vec![BigInt::one()];
    }
    let mut a: Vec<Vec<Vec<BigInt>>> = m.to_vec();
    let mut neg = false;
    let mut prev = vec![BigInt::one()];
    for k in 0..n {
        if a[k][k].is_empty() {
            let Some(p) = (k + 1..n).find(|&i| !a[i][k].is_empty()) else {
                return Vec::new();
            };
            a.swap(k, p);
            neg = !neg;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = poly_sub(&poly_mul(&a[k][k], &a[i][j]), &poly_mul(&a[i][k], &a[k][j]));
                a[i][j] = poly_div_exact(&num, &prev).expect("Bareiss division is exact");
            }
        }
        prev = a[k][k].clone();
    }
    let mut d = a[n - 1][n - 1].clone();
    if neg {
        for x in d.iter_mut() {
            *x = -x.clone();
        }
    }
    d
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k.min(n));
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

pub const MINOR_LIMIT: u128 = 200_000;

/// Gcd of the (cols−1)-minors of a Laurent matrix, after eliminating unit
/// pivots (which leaves this ideal unchanged).
pub fn first_elementary_gcd(matrix: &[Vec<LaurentPolynomial>], cols: usize) -> Result<LaurentPolynomial, AlgebraError> {
    let mut a: Vec<Vec<LaurentPolynomial>> = matrix.to_vec();
    let mut ncols = cols;
    loop {
        a.retain(|r| r.iter().any(|x| !x.is_zero()));
        let mut pivot = None;
        'find: for (i, r) in a.iter().enumerate() {
            for (j, x) in r.iter().enumerate() {
                if x.is_unit() {
                    pivot = Some((i, j));
                    break 'find;
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        let prow = a.remove(pi);
        let u = &prow[pj];
        // u^-1 = ±t^-e
        let uinv = LaurentPolynomial::monomial(u.coeff(u.low()), -u.low());
        for r in a.iter_mut() {
            if r[pj].is_zero() {
                r.remove(pj);
                continue;
            }
            let f = &r[pj] * &uinv;
            for j in 0..ncols {
                if j != pj {
                    r[j] = &r[j] - &(&f * &prow[j]);
                }
            }
            r.remove(pj);
        }
        ncols -= 1;
    }
    if ncols == 0 {
        return Ok(LaurentPolynomial::zero());
    }
    let k = ncols - 1;
    if k == 0 {
        return Ok(LaurentPolynomial::one());
    }
    if a.len() < k {
        return Ok(LaurentPolynomial::zero());
    }
    let count = binomial(a.len(), k).saturating_mul(ncols as u128);
    if count > MINOR_LIMIT {
        return Err(AlgebraError::TooManyMinors(count));
    }
    // shift each row to ordinary polynomials; multiplying a row by a unit
    // changes minors only by units
    let shifted: Vec<Vec<Vec<BigInt>>> = a
        .iter()
        .map(|r| {
            let low = r.iter().filter(|x| !x.is_zero()).map(|x| x.low()).min().unwrap_or(0);
            r.iter()
                .map(|x| {
                    if x.is_zero() {
                        Vec::new()
                    } else {
                        let mut v = vec![BigInt::zero(); (x.low() - low) as usize];
                        v.extend_from_slice(x.dense());
                        v
                    }
                })
                .collect()
        })
        .collect();
    let mut g: Vec<BigInt> = Vec::new();
    for rows in combinations(shifted.len(), k) {
        for skip in 0..ncols {
            let minor: Vec<Vec<Vec<BigInt>>> = rows
                .iter()
                .map(|&i| {
                    shifted[i]
                        .iter()
                        .enumerate()
                        .filter(|&(j, _)| j != skip)
                        .map(|(_, x)| x.clone())
                        .collect()
                })
                .collect();
            let d = poly_determinant(&minor);
            g = poly_gcd(&g, &d);
            if g.len() == 1 && g[0].is_one() {
                return Ok(LaurentPolynomial::one());
            }
        }
    }
    Ok(LaurentPolynomial::from_dense(0, g).unit_normal())
}

/// Alexander polynomial in unit-normal form.
pub fn alexander_polynomial(p: &GroupPresentation) -> Result<LaurentPolynomial, AlgebraError> {
    let m = alexander_matrix(p)?;
    first_elementary_gcd(&m, p.generator_count)
}

/// Homology of the satellite model: generators [m0],[m1],[l0],[l1] with
/// [l1] = w[m0] and [l0] = w[m1].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SatelliteHomology {
    pub group: AbelianGroup,
    /// Coordinates of [l0] and [l1] in the basis ([m0],[m1]).
    pub l0: [i64; 2],
    pub l1: [i64; 2],
}

pub fn satellite_homology(w: i64) -> SatelliteHomology {
    // columns: m0, m1, l0, l1
    let rel = vec![vec![-w, 0, 0, 1], vec![0, -w, 1, 0]];
    let snf = smith_normal_form(&to_big_matrix(&rel));
    let group = AbelianGroup {
        free_rank: 4 - snf.rank,
        torsion: snf.diagonal.iter().filter(|d| !d.is_one()).cloned().collect(),
    };
    // rowspace(M)·V = rowspace(D), so generator e_i has quotient coordinates
    // given by row i of V past the rank; solve in the basis m0, m1
    let v = &snf.v;
    let coord = |i: usize| -> [BigInt; 2] { [v[i][snf.rank].clone(), v[i][snf.rank + 1].clone()] };
    let (m0, m1, l0, l1) = (coord(0), coord(1), coord(2), coord(3));
    let det = &m0[0] * &m1[1] - &m0[1] * &m1[0];
    let solve = |x: &[BigInt; 2]| -> [i64; 2] {
        let a = (&x[0] * &m1[1] - &x[1] * &m1[0]) / &det;
        let b = (&m0[0] * &x[1] - &m0[1] * &x[0]) / &det;
        [a.to_i64().unwrap(), b.to_i64().unwrap()]
    };
    SatelliteHomology { group, l0: solve(&l0), l1: solve(&l1) }
}

/// Inverse of a unimodular integer matrix (Gauss–Jordan over Q, exact).
pub fn unimodular_inverse(m: &IntegerMatrix) -> IntegerMatrix {
    use num_rational::BigRational;
    let n = m.len();
    let mut a: Vec<Vec<BigRational>> = m
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row: Vec<BigRational> = r.iter().map(|x| BigRational::from_integer(x.clone())).collect();
            row.extend((0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }));
            row
        })
        .collect();
    for k in 0..n {
        let p = (k..n).find(|&i| !a[i][k].is_zero()).expect("matrix is invertible");
        a.swap(k, p);
        let piv = a[k][k].clone();
        for x in a[k].iter_mut() {
            *x = &*x / &piv;
        }
        for i in 0..n {
            if i != k && !a[i][k].is_zero() {
                let f = a[i][k].clone();
                for j in 0..2 * n {
                    let d = &f * &a[k][j];
                    a[i][j] -= d;
                }
            }
        }
    }
    a.iter()
        .map(|r| r[n..].iter().map(|x| x.to_integer()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(cs: &[i64]) -> LaurentPolynomial {
        LaurentPolynomial::from_coeffs(cs)
    }

    #[test]
    fn laurent_text() {
        assert_eq!(lp(&[1, -1, 1]).to_string(), "1 - t + t^2");
        assert_eq!(LaurentPolynomial::from_terms(&[(-1, 2), (0, -3)]).to_string(), "2*t^-1 - 3");
        assert_eq!(LaurentPolynomial::zero().to_string(), "0");
    }

    #[test]
    fn laurent_gcd() {
        let a = &lp(&[1, -1, 1]) * &lp(&[1, 1]);
        let b = &lp(&[1, -1, 1]) * &lp(&[2, 0, 3]);
        assert_eq!(a.gcd(&b), lp(&[1, -1, 1]));
        assert_eq!(lp(&[2, 4]).gcd(&lp(&[6])), lp(&[2]));
    }

    #[test]
    fn fox_examples() {
        // a = 1, b = 2
        assert_eq!(fox_derivative(&[1], 0, 2).unwrap(), GroupRingElement::one());
        let d = fox_derivative(&[1, 2, 1], 0, 2).unwrap();
        assert_eq!(d, GroupRingElement::one().add(&GroupRingElement::word(&[1, 2])));
        let mut m = GroupRingElement::zero();
        m.add_term(&[-1], -BigInt::one());
        assert_eq!(fox_derivative(&[-1], 0, 2).unwrap(), m);
        assert!(fox_derivative(&[1], 2, 2).is_err());
    }

    #[test]
    fn smith_examples() {
        let s = smith_normal_form(&to_big_matrix(&[vec![2, 0], vec![0, 3]]));
        assert_eq!(s.diagonal, vec![BigInt::from(1), BigInt::from(6)]);
        let s = smith_normal_form(&to_big_matrix(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]));
        assert_eq!(s.diagonal.len(), 3);
        assert!(s.diagonal.iter().all(|d| d.is_one()));
    }

    #[test]
    fn trefoil_alexander() {
        let p = GroupPresentation::new(2, vec![vec![1, 2, 1, -2, -1, -2]]).unwrap();
        assert_eq!(abelianization_exponents(&p).unwrap().0, vec![1, 1]);
        assert_eq!(alexander_polynomial(&p).unwrap(), lp(&[1, -1, 1]));
    }

    #[test]
    fn rank_two_rejected() {
        let p = GroupPresentation::new(2, vec![vec![1, 2, -1, -2]]).unwrap();
        assert_eq!(abelianization_exponents(&p), Err(AlgebraError::Rank(2)));
    }

    #[test]
    fn unknot_alexander() {
        let p = GroupPresentation::new(1, vec![]).unwrap();
        assert_eq!(alexander_polynomial(&p).unwrap(), LaurentPolynomial::one());
        assert_eq!(alexander_matrix(&p).unwrap().len(), 0);
    }

    #[test]
    fn satellite() {
        let s = satellite_homology(2);
        assert_eq!(s.group.free_rank, 2);
        assert!(s.group.torsion.is_empty());
        assert_eq!(s.l1, [2, 0]);
        assert_eq!(s.l0, [0, 2]);
        assert_eq!(satellite_homology(0).l1, [0, 0]);
    }
}
