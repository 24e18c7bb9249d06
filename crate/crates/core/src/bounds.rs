//! Explicit bound formulas, heights and Mahler measures.

use crate::algebra::LaurentPolynomial;
use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use num_bigint::{BigInt, BigUint};
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

// -- primality --------------------------------------------------------------

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

/// Deterministic Miller-Rabin; the first twelve prime bases suffice below 2^64.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin with fixed witnesses; exact below 2^64, probabilistic above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    let one = BigUint::one();
    let two = &one + &one;
    let n1 = n - &one;
    let mut d = n1.clone();
    let mut s = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let a = BigUint::from(a);
        if (n % &a).is_zero() {
            return false;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == n1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("argument out of range: {0}")]
    Domain(String),
    #[error("value exceeds the level-2 representation")]
    Overflow,
    #[error("{degrees} degrees but {measures} measures")]
    LengthMismatch { degrees: usize, measures: usize },
    #[error("zero polynomial")]
    ZeroPolynomial,
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("every prime up to {0} divides an excluded value")]
    NoPrime(u64),
}

/// First prime `p <= x` dividing none of `excluded`.
pub fn prime_outside(x: u64, excluded: &[BigUint]) -> Result<u64, BoundError> {
    if x < 3 {
        return Err(BoundError::Domain(format!("search ceiling {x} < 3")));
    }
    (2..=x)
        .filter(|&p| is_prime_u64(p))
        .find(|&p| {
            let pb = BigUint::from(p);
            excluded.iter().all(|e| !(e % &pb).is_zero())
        })
        .ok_or(BoundError::NoPrime(x))
}

// -- iterated-exponential numbers ---------------------------------------------

/// Working precision of mantissas, in bits.
pub const PRECISION: usize = 320;
const RM: RoundingMode = RoundingMode::ToEven;
/// Level-0 values have binary exponent at most this.
const MAX_EXPONENT: i32 = 1 << 29;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_cc<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

fn bf(x: f64) -> BigFloat {
    BigFloat::from_f64(x, PRECISION)
}

fn bf_u(x: u64) -> BigFloat {
    BigFloat::from_u64(x, PRECISION)
}

fn bf_ln(x: &BigFloat) -> BigFloat {
    with_cc(|cc| x.ln(PRECISION, RM, cc))
}

fn bf_exp(x: &BigFloat) -> BigFloat {
    with_cc(|cc| x.exp(PRECISION, RM, cc))
}

fn ln2() -> BigFloat {
    with_cc(|cc| cc.ln_2(PRECISION, RM))
}

fn bf_cmp(a: &BigFloat, b: &BigFloat) -> Ordering {
    match a.cmp(b) {
        Some(x) if x < 0 => Ordering::Less,
        Some(0) => Ordering::Equal,
        _ => Ordering::Greater,
    }
}

/// Largest mantissa whose exponential still fits at the level below.
fn level_limit() -> BigFloat {
    bf(MAX_EXPONENT as f64).mul(&ln2(), PRECISION, RM)
}

pub fn biguint_to_bigfloat(n: &BigUint) -> BigFloat {
    let digits = n.to_u64_digits();
    let top = digits.len().saturating_sub(6);
    let mut acc = BigFloat::from_u64(0, PRECISION);
    let shift = bf_u(1u64 << 32).mul(&bf_u(1u64 << 32), PRECISION, RM);
    for d in digits[top..].iter().rev() {
        acc = acc.mul(&shift, PRECISION, RM).add(&bf_u(*d), PRECISION, RM);
    }
    if top > 0 && !acc.is_zero() {
        let e = acc.exponent().unwrap() + 64 * top as i32;
        acc.set_exponent(e);
    }
    acc
}

fn bigint_to_bigfloat(n: &BigInt) -> BigFloat {
    let m = biguint_to_bigfloat(n.magnitude());
    if n.is_negative() {
        m.neg()
    } else {
        m
    }
}

/// `n` significant decimal digits of `x` in the form `d.ddd…e±k`.
pub fn decimal_digits(x: &BigFloat, n: usize) -> String {
    if x.is_zero() {
        return format!("0.{}e+0", "0".repeat(n - 1));
    }
    let s = with_cc(|cc| x.format(Radix::Dec, RM, cc)).expect("decimal formatting");
    let (neg, s) = match s.strip_prefix('-') {
        Some(r) => (true, r.to_string()),
        None => (false, s),
    };
    let (mant, exp) = s.split_once('e').unwrap_or((&s, "0"));
    let mut exp: i64 = exp.parse().unwrap_or(0);
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    let mut digits: Vec<u8> = ip.bytes().chain(fp.bytes()).map(|b| b - b'0').collect();
    exp += ip.len() as i64 - 1;
    while digits.first() == Some(&0) && digits.len() > 1 {
        digits.remove(0);
        exp -= 1;
    }
    let round_up = digits.get(n).is_some_and(|&d| d >= 5);
    digits.resize(n, 0);
    if round_up {
        let mut i = n;
        loop {
            if i == 0 {
                digits.insert(0, 1);
                digits.pop();
                exp += 1;
                break;
            }
            i -= 1;
            if digits[i] == 9 {
                digits[i] = 0;
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let body: String = digits.iter().map(|d| (b'0' + d) as char).collect();
    format!("{}{}.{}e{}{}", if neg { "-" } else { "" }, &body[..1], &body[1..], if exp < 0 { "-" } else { "+" }, exp.abs())
}

/// A real number `±exp^level(mantissa)` with `level <= 2`.
///
/// Level 0 holds values whose binary exponent is at most 2^29; higher
/// levels hold mantissas above the level limit, so the representation is
/// unique and comparison is by sign, level, then mantissa.
#[derive(Clone, Debug)]
pub struct BoundValue {
    negative: bool,
    level: u8,
    mantissa: BigFloat,
}

impl BoundValue {
    fn build(negative: bool, mut level: u8, mut m: BigFloat) -> Result<Self, BoundError> {
        if m.is_nan() || m.is_inf() {
            return Err(BoundError::Overflow);
        }
        if m.is_negative() {
            debug_assert_eq!(level, 0);
            m = m.neg();
        }
        let limit = level_limit();
        loop {
            if level > 0 && bf_cmp(&m, &limit) != Ordering::Greater {
                m = bf_exp(&m);
                level -= 1;
            } else if !m.is_zero() && m.exponent().unwrap() > MAX_EXPONENT {
                if level == 2 {
                    return Err(BoundError::Overflow);
                }
                m = bf_ln(&m);
                level += 1;
            } else {
                break;
            }
        }
        let negative = negative && !m.is_zero();
        Ok(BoundValue { negative, level, mantissa: m })
    }

    pub fn zero() -> Self {
        BoundValue { negative: false, level: 0, mantissa: bf_u(0) }
    }

    pub fn from_bigfloat(x: BigFloat) -> Result<Self, BoundError> {
        let neg = x.is_negative();
        Self::build(neg, 0, x)
    }

    pub fn from_f64(x: f64) -> Self {
        Self::from_bigfloat(bf(x)).expect("finite f64")
    }

    pub fn from_u64(x: u64) -> Self {
        Self::from_bigfloat(bf_u(x)).expect("u64 fits")
    }

    pub fn from_biguint(x: &BigUint) -> Self {
        Self::from_bigfloat(biguint_to_bigfloat(x)).expect("bounded exponent")
    }

    pub fn from_bigint(x: &BigInt) -> Self {
        Self::from_bigfloat(bigint_to_bigfloat(x)).expect("bounded exponent")
    }

    pub fn from_rational(q: &BigRational) -> Self {
        let x = bigint_to_bigfloat(q.numer()).div(&bigint_to_bigfloat(q.denom()), PRECISION, RM);
        Self::from_bigfloat(x).expect("bounded exponent")
    }

    /// `2^k`.
    pub fn pow2(k: u64) -> Self {
        if k <= MAX_EXPONENT as u64 / 2 {
            let mut one = bf_u(1);
            one.set_exponent(k as i32 + 1);
            return Self::from_bigfloat(one).unwrap();
        }
        Self::build(false, 1, bf_u(k).mul(&ln2(), PRECISION, RM)).expect("2^k")
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn is_negative(&self) -> bool {
        self.negative
    }

    pub fn is_zero(&self) -> bool {
        self.level == 0 && self.mantissa.is_zero()
    }

    pub fn mantissa(&self) -> &BigFloat {
        &self.mantissa
    }

    pub fn mantissa_digits(&self, n: usize) -> String {
        decimal_digits(&self.mantissa, n)
    }

    /// Decimal rendering of level-0 values.
    pub fn decimal(&self, n: usize) -> Option<String> {
        (self.level == 0).then(|| {
            let s = decimal_digits(&self.mantissa, n);
            if self.negative {
                format!("-{s}")
            } else {
                s
            }
        })
    }

    /// Nearest f64, saturating to infinity.
    pub fn to_f64(&self) -> f64 {
        let mag = if self.level > 0 {
            f64::INFINITY
        } else {
            decimal_digits(&self.mantissa, 20).parse().unwrap_or(f64::INFINITY)
        };
        if self.negative {
            -mag
        } else {
            mag
        }
    }

    pub fn neg(&self) -> Self {
        let mut x = self.clone();
        x.negative = !x.negative && !x.is_zero();
        x
    }

    pub fn abs(&self) -> Self {
        let mut x = self.clone();
        x.negative = false;
        x
    }

    pub fn cmp_value(&self, o: &Self) -> Ordering {
        match (self.negative, o.negative) {
            (false, true) => Ordering::Greater,
            (true, false) => Ordering::Less,
            (false, false) => self.cmp_mag(o),
            (true, true) => o.cmp_mag(self),
        }
    }

    fn cmp_mag(&self, o: &Self) -> Ordering {
        self.level.cmp(&o.level).then_with(|| bf_cmp(&self.mantissa, &o.mantissa))
    }

    /// Natural log of a positive value.
    pub fn ln(&self) -> Result<Self, BoundError> {
        if self.negative || self.is_zero() {
            return Err(BoundError::Domain("log of a nonpositive value".into()));
        }
        self.ln_abs()
    }

    fn ln_abs(&self) -> Result<Self, BoundError> {
        match self.level {
            0 => Self::from_bigfloat(bf_ln(&self.mantissa)),
            l => Self::build(false, l - 1, self.mantissa.clone()),
        }
    }

    pub fn exp(&self) -> Result<Self, BoundError> {
        if self.negative {
            return match self.level {
                0 => Self::from_bigfloat(bf_exp(&self.mantissa.neg())),
                _ => Ok(Self::zero()),
            };
        }
        match self.level {
            0 if bf_cmp(&self.mantissa, &level_limit()) != Ordering::Greater => {
                Self::from_bigfloat(bf_exp(&self.mantissa))
            }
            0 => Self::build(false, 1, self.mantissa.clone()),
            1 => Self::build(false, 2, self.mantissa.clone()),
            _ => Err(BoundError::Overflow),
        }
    }

    /// |big| ± |small| for |big| >= |small| > 0.
    fn combine(big: &Self, small: &Self, subtract: bool) -> Result<Self, BoundError> {
        match big.level {
            0 => {
                let m = if subtract {
                    big.mantissa.sub(&small.mantissa, PRECISION, RM)
                } else {
                    big.mantissa.add(&small.mantissa, PRECISION, RM)
                };
                Self::build(false, 0, m)
            }
            1 => {
                let lb = match small.level {
                    0 => bf_ln(&small.mantissa),
                    _ => small.mantissa.clone(),
                };
                let d = lb.sub(&big.mantissa, PRECISION, RM);
                if bf_cmp(&d, &bf(-2000.0)) == Ordering::Less {
                    return Ok(big.abs());
                }
                if subtract && d.is_zero() {
                    return Ok(Self::zero());
                }
                let e = bf_exp(&d);
                let one = bf_u(1);
                let f = if subtract { one.sub(&e, PRECISION, RM) } else { one.add(&e, PRECISION, RM) };
                Self::build(false, 1, big.mantissa.add(&bf_ln(&f), PRECISION, RM))
            }
            _ => {
                if subtract && small.level == 2 && bf_cmp(&small.mantissa, &big.mantissa) == Ordering::Equal {
                    Ok(Self::zero())
                } else {
                    Ok(big.abs())
                }
            }
        }
    }

    pub fn add(&self, o: &Self) -> Result<Self, BoundError> {
        if self.is_zero() {
            return Ok(o.clone());
        }
        if o.is_zero() {
            return Ok(self.clone());
        }
        let (big, small) = if self.cmp_mag(o) == Ordering::Less { (o, self) } else { (self, o) };
        let r = Self::combine(big, small, self.negative != o.negative)?;
        Ok(if big.negative { r.neg() } else { r })
    }

    pub fn sub(&self, o: &Self) -> Result<Self, BoundError> {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Result<Self, BoundError> {
        if self.is_zero() || o.is_zero() {
            return Ok(Self::zero());
        }
        let neg = self.negative != o.negative;
        let r = if self.level == 0 && o.level == 0 {
            Self::build(false, 0, self.mantissa.mul(&o.mantissa, PRECISION, RM))?
        } else {
            self.ln_abs()?.add(&o.ln_abs()?)?.exp()?
        };
        Ok(if neg { r.neg() } else { r })
    }

    pub fn div(&self, o: &Self) -> Result<Self, BoundError> {
        if o.is_zero() {
            return Err(BoundError::Domain("division by zero".into()));
        }
        if self.is_zero() {
            return Ok(Self::zero());
        }
        let neg = self.negative != o.negative;
        let r = if self.level == 0 && o.level == 0 {
            Self::build(false, 0, self.mantissa.div(&o.mantissa, PRECISION, RM))?
        } else {
            self.ln_abs()?.sub(&o.ln_abs()?)?.exp()?
        };
        Ok(if neg { r.neg() } else { r })
    }

    /// `self^e` for positive `self`.
    pub fn pow(&self, e: &Self) -> Result<Self, BoundError> {
        if e.is_zero() {
            return Ok(Self::from_u64(1));
        }
        self.ln()?.mul(e)?.exp()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "sign": if self.negative { "-" } else { "+" },
            "level": self.level,
            "mantissa": self.mantissa_digits(40),
            "decimal": self.decimal(40),
        })
    }
}

impl PartialEq for BoundValue {
    fn eq(&self, o: &Self) -> bool {
        self.cmp_value(o) == Ordering::Equal
    }
}

impl PartialOrd for BoundValue {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp_value(o))
    }
}

impl fmt::Display for BoundValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.negative { "-" } else { "" };
        match self.level {
            0 => write!(f, "{sign}{}", decimal_digits(&self.mantissa, 16)),
            1 => write!(f, "{sign}exp({})", decimal_digits(&self.mantissa, 16)),
            _ => write!(f, "{sign}exp(exp({}))", decimal_digits(&self.mantissa, 16)),
        }
    }
}

fn bv(x: u64) -> BoundValue {
    BoundValue::from_u64(x)
}

// -- A(n), B(n) ---------------------------------------------------------------

/// Factorials above this are replaced by Stirling's series.
pub const EXACT_FACTORIAL_LIMIT: u64 = 10_000;

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

pub fn a_of(n: u64) -> Result<BigRational, BoundError> {
    if n == 0 {
        return Err(BoundError::Domain("A(n) needs n >= 1".into()));
    }
    let num = factorial(n * n - n + 1);
    let den = BigUint::from(n * n) * factorial(n - 1).pow(n as u32);
    Ok(BigRational::new(num.into(), den.into()))
}

pub fn b_of(n: u64) -> Result<BigRational, BoundError> {
    if n == 0 {
        return Err(BoundError::Domain("B(n) needs n >= 1".into()));
    }
    let n = BigInt::from(n);
    Ok(BigRational::new(&n * &n * &n - &n * &n, &n * &n - &n + 1))
}

/// `ln N!` and an upper bound on its absolute error from truncation.
pub fn ln_factorial(n: u64) -> (BigFloat, f64) {
    if n <= EXACT_FACTORIAL_LIMIT {
        let f = biguint_to_bigfloat(&factorial(n));
        return (bf_ln(&f), 0.0);
    }
    // (N + 1/2) ln N - N + ln(2π)/2 + 1/(12N) - 1/(360N^3) + 1/(1260N^5)
    let nb = bf_u(n);
    let p = PRECISION;
    let ln_n = bf_ln(&nb);
    let two_pi = with_cc(|cc| cc.pi(p, RM)).mul(&bf_u(2), p, RM);
    let mut s = nb.add(&bf(0.5), p, RM).mul(&ln_n, p, RM).sub(&nb, p, RM);
    s = s.add(&bf_ln(&two_pi).div(&bf_u(2), p, RM), p, RM);
    let inv = bf_u(1).div(&nb, p, RM);
    let inv2 = inv.mul(&inv, p, RM);
    let mut term = inv.div(&bf_u(12), p, RM);
    s = s.add(&term, p, RM);
    term = inv.mul(&inv2, p, RM).div(&bf_u(360), p, RM);
    s = s.sub(&term, p, RM);
    term = inv.mul(&inv2, p, RM).mul(&inv2, p, RM).div(&bf_u(1260), p, RM);
    s = s.add(&term, p, RM);
    (s, 1.0 / (1680.0 * (n as f64).powi(7)))
}

/// `ln A(n)`; exact factorials while `n² - n + 1 <= 10⁴`.
pub fn ln_a_of(n: u64) -> Result<BigFloat, BoundError> {
    if n == 0 {
        return Err(BoundError::Domain("A(n) needs n >= 1".into()));
    }
    let p = PRECISION;
    let big = n.checked_mul(n).ok_or_else(|| BoundError::Domain(format!("n = {n} too large")))? - n + 1;
    let (lf, _) = ln_factorial(big);
    let (lg, _) = ln_factorial(n - 1);
    let nn = bf_u(n);
    Ok(lf.sub(&bf_ln(&nn.mul(&nn, p, RM)), p, RM).sub(&lg.mul(&nn, p, RM), p, RM))
}

pub fn a_value(n: u64) -> Result<BoundValue, BoundError> {
    if n * n - n + 1 <= EXACT_FACTORIAL_LIMIT {
        return Ok(BoundValue::from_rational(&a_of(n)?));
    }
    BoundValue::from_bigfloat(ln_a_of(n)?)?.exp()
}

pub fn b_value(n: u64) -> Result<BoundValue, BoundError> {
    Ok(BoundValue::from_rational(&b_of(n)?))
}

/// Height bound for a point of a zero-dimensional variety cut out by `n`
/// polynomials with the given degrees and Mahler measures:
/// `A(n) (Σ deg) ((Σ M/deg) + B(n) log 2)`.
pub fn zhang_bound(degrees: &[u64], measures: &[f64], n: u64) -> Result<BoundValue, BoundError> {
    if degrees.len() != measures.len() {
        return Err(BoundError::LengthMismatch { degrees: degrees.len(), measures: measures.len() });
    }
    if degrees.iter().any(|&d| d == 0) {
        return Err(BoundError::Domain("degree 0".into()));
    }
    let total: u64 = degrees.iter().sum();
    let mut inner = b_value(n)?.mul(&BoundValue::from_bigfloat(ln2())?)?;
    for (&d, &m) in degrees.iter().zip(measures) {
        inner = inner.add(&BoundValue::from_f64(m / d as f64))?;
    }
    a_value(n)?.mul(&bv(total))?.mul(&inner)
}

// -- tower bounds ---------------------------------------------------------------

fn check_n(n: u64) -> Result<(), BoundError> {
    if n == 0 {
        return Err(BoundError::Domain("n must be at least 1".into()));
    }
    if n > 130_000_000 {
        return Err(BoundError::Domain(format!("n = {n} exceeds the level-2 range")));
    }
    Ok(())
}

fn q_of(n: u64) -> BoundValue {
    BoundValue::from_biguint(&(BigUint::from(8u32) * n * n + BigUint::from(4u32) * n))
}

/// `2 (8n² + 4n)^(2^(4n+4))`.
pub fn dube_degree_bound(n: u64) -> Result<BoundValue, BoundError> {
    check_n(n)?;
    bv(2).mul(&q_of(n).pow(&BoundValue::pow2(4 * n + 4))?)
}

/// `2^(4n+4) (8n² + 4n)^((4n+4) 2^(4n+4))`.
pub fn field_degree_bound(n: u64) -> Result<BoundValue, BoundError> {
    check_n(n)?;
    let e = bv(4 * n + 4).mul(&BoundValue::pow2(4 * n + 4))?;
    BoundValue::pow2(4 * n + 4).mul(&q_of(n).pow(&e)?)
}

/// Exact order of SL2 over the field with `q` elements.
pub fn sl2_order(q: u64) -> u128 {
    let q = q as u128;
    q * (q * q - 1)
}

/// `|F|³` for a field of characteristic `p` and degree at most
/// `field_degree_bound(n)`.
pub fn sl2_size_bound(p: u64, n: u64) -> Result<BoundValue, BoundError> {
    if !is_prime_u64(p) {
        return Err(BoundError::Domain(format!("{p} is not prime")));
    }
    bv(p).pow(&bv(3).mul(&field_degree_bound(n)?)?)
}

/// `16 n² 3^(n-1)`, the bound on the boundary coefficients of a longitude.
pub fn longitude_coefficient_bound(n: u64) -> BigUint {
    BigUint::from(16u32) * n * n * BigUint::from(3u32).pow(n.saturating_sub(1) as u32)
}

/// Pieces of `log D(n)`.
#[derive(Clone, Debug)]
pub struct DTerms {
    /// `A(4n+5)(27n+5)(2^(4n+2) + 3·2^(3n+3) + (√3/2 + 3)n + B(4n+5) log 2 + √3/2)`.
    pub k: BoundValue,
    pub t1: BoundValue,
    pub t2: BoundValue,
    pub log_d: BoundValue,
}

pub fn d_terms(n: u64) -> Result<DTerms, BoundError> {
    check_n(n)?;
    let l2 = BoundValue::from_bigfloat(ln2())?;
    let half_sqrt3 = BoundValue::from_bigfloat(bf_u(3).sqrt(PRECISION, RM).div(&bf_u(2), PRECISION, RM))?;
    let m = 4 * n + 5;
    let s = BoundValue::pow2(4 * n + 2)
        .add(&bv(3).mul(&BoundValue::pow2(3 * n + 3))?)?
        .add(&half_sqrt3.add(&bv(3))?.mul(&bv(n))?)?
        .add(&b_value(m)?.mul(&l2)?)?
        .add(&half_sqrt3)?;
    let k = a_value(m)?.mul(&bv(27 * n + 5))?.mul(&s)?;
    let q = q_of(n);
    let big = BoundValue::pow2(4 * n + 4);
    let t1 = bv(2 * (4 * n + 4)).mul(&q.pow(&big)?)?.mul(&k)?;
    let p2 = field_degree_bound(n)?;
    // ln(16 n² 3^(n-1)) = ln 16 + 2 ln n + (n-1) ln 3
    let ln_l = bv(16).ln()?.add(&bv(2).mul(&bv(n).ln()?)?)?.add(&bv(n - 1).mul(&bv(3).ln()?)?)?;
    let inner = bv(2)
        .mul(&l2)?
        .add(&bv(4).mul(&ln_l)?)?
        .add(&bv(3).mul(&BoundValue::pow2(4 * n - 1).sub(&bv(1))?)?.mul(&l2)?)?
        .add(
            &bv(3)
                .mul(&BoundValue::pow2(4 * n).add(&BoundValue::pow2(4 * n - 1))?.sub(&bv(2))?)?
                .mul(&k)?,
        )?;
    let t2 = p2.mul(&inner)?;
    let log_d = t1.add(&t2)?;
    Ok(DTerms { k, t1, t2, log_d })
}

pub fn d_of(n: u64) -> Result<BoundValue, BoundError> {
    d_terms(n)?.log_d.exp()
}

/// Pieces of `Φ(c) = base^exponent`, with `n := 100c`.
#[derive(Clone, Debug)]
pub struct PhiTerms {
    pub base: BoundValue,
    pub exponent: BoundValue,
    pub phi: BoundValue,
}

pub fn phi_terms(c: u64) -> Result<PhiTerms, BoundError> {
    if c == 0 {
        return Err(BoundError::Domain("c must be at least 1".into()));
    }
    let n = 100 * c;
    let log_d = d_terms(n)?.log_d;
    let half_c = BoundValue::from_f64(c as f64 / 2.0);
    let base = bv(87).mul(&log_d.add(&bv(8 * c).mul(&half_c.ln()?)?)?)?;
    let exponent = bv(24 * c).mul(&field_degree_bound(n)?)?;
    let phi = base.pow(&exponent)?;
    Ok(PhiTerms { base, exponent, phi })
}

pub fn phi_of(c: u64) -> Result<BoundValue, BoundError> {
    Ok(phi_terms(c)?.phi)
}

/// Bound on the Seifert invariants `uv` of a torus piece.
#[derive(Clone, Debug)]
pub enum TorusUvBound {
    Exact(BigUint),
    Approx(BoundValue),
}

/// `((100c)² + 100c) 3^(100c+2) + 1`.
pub fn torus_uv_bound(c: u64) -> Result<TorusUvBound, BoundError> {
    if c == 0 {
        return Err(BoundError::Domain("c must be at least 1".into()));
    }
    let n = 100 * c;
    if c <= 1000 {
        let v = (BigUint::from(n) * n + n) * BigUint::from(3u32).pow(n as u32 + 2) + 1u32;
        return Ok(TorusUvBound::Exact(v));
    }
    let poly = BoundValue::from_biguint(&(BigUint::from(n) * n + n));
    let v = poly.mul(&bv(3).pow(&bv(n + 2))?)?.add(&bv(1))?;
    Ok(TorusUvBound::Approx(v))
}

// -- heights --------------------------------------------------------------------

fn ln_big(x: &BigInt) -> f64 {
    let bits = x.bits();
    if bits < 1000 {
        return x.to_f64().unwrap().abs().ln();
    }
    let shift = bits - 64;
    (x.abs() >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

/// Logarithmic height `log max(|a|, |b|)` of `a/b` in lowest terms.
pub fn height_of_rational(a: &BigInt, b: &BigInt) -> Result<f64, BoundError> {
    if b.is_zero() {
        return Err(BoundError::ZeroDenominator);
    }
    let g = a.gcd(b);
    let (a, b) = (a / &g, b / &g);
    let m = if a.abs() > b.abs() { a } else { b };
    Ok(ln_big(&m))
}

pub fn height_sum_bound(h1: f64, h2: f64) -> f64 {
    std::f64::consts::LN_2 + h1 + h2
}

pub fn height_prod_bound(h1: f64, h2: f64) -> f64 {
    h1 + h2
}

/// Height of the entries of a product of `k` 2×2 matrices whose entries
/// have height at most `h`: `(2^(k-1) - 1) log 2 + (2^k + 2^(k-1) - 2) h`.
pub fn matrix_height_bound(k: u32, h: f64) -> Result<f64, BoundError> {
    if k < 1 {
        return Err(BoundError::Domain("k must be at least 1".into()));
    }
    if h < 0.0 {
        return Err(BoundError::Domain("negative height".into()));
    }
    let p = 2f64.powi(k as i32 - 1);
    Ok((p - 1.0) * std::f64::consts::LN_2 + (2.0 * p + p - 2.0) * h)
}

// -- Mahler measure ---------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct MahlerMeasure {
    pub value: f64,
    /// Certified enclosure of the measure.
    pub lower: f64,
    pub upper: f64,
}

fn trim(c: &[BigInt]) -> Vec<BigInt> {
    let mut v = c.to_vec();
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

/// `sqrt(Σ a²)` over the coefficients.
pub fn quadratic_norm(coeffs: &[BigInt]) -> f64 {
    let s: BigInt = coeffs.iter().map(|c| c * c).sum();
    (0.5 * ln_big(&s)).exp()
}

fn derivative(p: &LaurentPolynomial) -> LaurentPolynomial {
    let d: Vec<BigInt> = p.dense().iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect();
    LaurentPolynomial::from_dense(0, d)
}

/// Square-free factors `f_i` with `P = c · Π f_i^i` (Yun).
fn squarefree_factors(p: &LaurentPolynomial) -> Vec<(LaurentPolynomial, usize)> {
    let dp = derivative(p);
    let a0 = p.gcd(&dp);
    let mut b = p.div_exact(&a0).expect("gcd divides");
    let c = dp.div_exact(&a0).expect("gcd divides derivative");
    let mut d = &c - &derivative(&b);
    let mut out = Vec::new();
    let mut i = 1;
    while b.span() > 0 {
        let a = b.gcd(&d);
        if a.span() > 0 {
            out.push((a.clone(), i));
        }
        let nb = b.div_exact(&a).expect("exact");
        let nc = d.div_exact(&a).expect("exact");
        d = &nc - &derivative(&nb);
        b = nb;
        i += 1;
    }
    out
}

/// Roots of a square-free polynomial by Aberth iteration, with inclusion
/// radii `deg · |P(z)| / |lead · Π (z - z_j)|`.
fn aberth(coeffs: &[f64]) -> Vec<(Complex64, f64)> {
    let n = coeffs.len() - 1;
    let lead = coeffs[n];
    let eval = |z: Complex64| {
        let mut p = Complex64::new(coeffs[n], 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs[..n].iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    let radius = 1.0 + coeffs[..n].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(radius * 0.5, 0.4 + std::f64::consts::TAU * k as f64 / n as f64))
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.norm() == 0.0 {
                continue;
            }
            let ratio = p / dp;
            let s: Complex64 = (0..n).filter(|&j| j != i).map(|j| 1.0 / (z[i] - z[j])).sum();
            let w = ratio / (1.0 - ratio * s);
            z[i] -= w;
            moved = moved.max(w.norm() / z[i].norm().max(1.0));
        }
        if moved < 1e-17 {
            break;
        }
    }
    (0..n)
        .map(|i| {
            let (p, _) = eval(z[i]);
            let den: f64 = (0..n).filter(|&j| j != i).map(|j| (z[i] - z[j]).norm()).product::<f64>() * lead.abs();
            let r = if den > 0.0 { n as f64 * p.norm() / den } else { f64::INFINITY };
            (z[i], r + 4.0 * f64::EPSILON * z[i].norm())
        })
        .collect()
}

/// `M(P) = |lead| Π max(1, |root|)` for an integer polynomial given by its
/// coefficients in increasing degree.
pub fn mahler_univariate(coeffs: &[BigInt]) -> Result<MahlerMeasure, BoundError> {
    let c = trim(coeffs);
    if c.is_empty() {
        return Err(BoundError::ZeroPolynomial);
    }
    let low = c.iter().position(|x| !x.is_zero()).unwrap();
    let p = LaurentPolynomial::from_dense(0, c[low..].to_vec());
    let lead = p.dense().last().unwrap().to_f64().unwrap().abs();
    let mut value = lead;
    let mut lower = lead;
    let mut upper = lead;
    for (f, mult) in squarefree_factors(&p) {
        let fc: Vec<f64> = f.dense().iter().map(|x| x.to_f64().unwrap()).collect();
        let roots = aberth(&fc);
        let disjoint = roots.iter().enumerate().all(|(i, (zi, ri))| {
            roots.iter().skip(i + 1).all(|(zj, rj)| (zi - zj).norm() > ri + rj)
        });
        for (z, r) in &roots {
            let m = z.norm();
            value *= m.max(1.0).powi(mult as i32);
            if disjoint {
                lower *= (m - r).max(1.0).powi(mult as i32);
                upper *= (m + r).max(1.0).powi(mult as i32);
            } else {
                upper = f64::INFINITY;
            }
        }
    }
    let norm = quadratic_norm(&c);
    Ok(MahlerMeasure { value, lower: lower.max(lead), upper: upper.min(norm * (1.0 + 1e-12)) })
}

fn binomial(m: usize, i: usize) -> f64 {
    (0..i).fold(1.0, |acc, j| acc * (m - j) as f64 / (j + 1) as f64)
}

/// `|c_i| <= C(m, i) M(P)` for every coefficient.
pub fn coef_bound_check(coeffs: &[BigInt]) -> Result<bool, BoundError> {
    let c = trim(coeffs);
    let m = mahler_univariate(&c)?;
    let deg = c.len() - 1;
    Ok(c.iter().enumerate().all(|(i, a)| {
        let a = a.to_f64().unwrap().abs();
        a <= binomial(deg, i) * m.upper * (1.0 + 1e-12)
    }))
}
