//! Exact quadratic surds `(p + q sqrt(D)) / r`, exact Gauss orbits of surd
//! vectors, eventual-periodicity detection and the annihilating quadratic.
//!
//! All orbits run in the diagonal coordinates of a product-type system, where
//! each coordinate follows `t -> 1/t - s*m` independently. No floating point
//! is used except in [`Surd::to_f64`].

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::cf_core::{CfSystem, Digit, Inversion, Space};
use crate::numeric::big;
use crate::systems::{make_system, SystemId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LagrangeError {
    #[error("surd is zero")]
    ZeroInput,
    #[error("surds with different radicands {0} and {1} cannot be combined")]
    IncompatibleRadicands(BigInt, BigInt),
    #[error("no repeated state within {0} steps")]
    NoPeriodWithinBound(usize),
    #[error("degenerate quadratic: {0}")]
    DegenerateQuadratic(String),
    #[error("system '{0}' has no exact surd engine")]
    UnsupportedSystem(String),
    #[error("point is not in the fundamental domain")]
    DomainViolation,
    #[error("expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cannot parse surd literal '{0}'")]
    Parse(String),
}

/// `(p + q sqrt(d)) / r` with `d` squarefree, `r > 0`, `gcd(p, q, r) = 1`;
/// rationals have `q = 0, d = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Surd {
    p: BigInt,
    q: BigInt,
    r: BigInt,
    d: BigInt,
}

fn squarefree_split(d: &BigInt) -> (BigInt, BigInt) {
    // d = s^2 * rest with rest squarefree
    let mut rest = d.clone();
    let mut s = BigInt::one();
    let mut f = BigInt::from(2);
    while &f * &f <= rest {
        let f2 = &f * &f;
        while (&rest % &f2).is_zero() {
            rest /= &f2;
            s *= &f;
        }
        f += 1;
    }
    (s, rest)
}

impl Surd {
    pub fn new(p: BigInt, q: BigInt, r: BigInt, d: BigInt) -> Self {
        assert!(!r.is_zero(), "zero denominator");
        assert!(d.is_positive(), "radicand must be positive");
        let (s, rest) = squarefree_split(&d);
        let (mut p, mut q, mut d) = (p, q * s, rest);
        if d.is_one() {
            p += &q;
            q = BigInt::zero();
        }
        if q.is_zero() {
            d = BigInt::one();
        }
        let mut r = r;
        if r.is_negative() {
            p = -p;
            q = -q;
            r = -r;
        }
        let g = p.gcd(&q).gcd(&r);
        if !g.is_one() {
            p /= &g;
            q /= &g;
            r /= &g;
        }
        Surd { p, q, r, d }
    }

    pub fn from_i64(p: i64, q: i64, r: i64, d: i64) -> Self {
        Surd::new(p.into(), q.into(), r.into(), d.into())
    }

    pub fn integer(n: BigInt) -> Self {
        Surd::new(n, BigInt::zero(), BigInt::one(), BigInt::one())
    }

    pub fn rational(x: &BigRational) -> Self {
        Surd::new(x.numer().clone(), BigInt::zero(), x.denom().clone(), BigInt::one())
    }

    pub fn zero() -> Self {
        Surd::integer(BigInt::zero())
    }

    pub fn p(&self) -> &BigInt {
        &self.p
    }
    pub fn q(&self) -> &BigInt {
        &self.q
    }
    pub fn r(&self) -> &BigInt {
        &self.r
    }
    pub fn d(&self) -> &BigInt {
        &self.d
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    fn common_d(&self, other: &Surd) -> Result<BigInt, LagrangeError> {
        match (self.is_rational(), other.is_rational()) {
            (true, _) => Ok(other.d.clone()),
            (_, true) => Ok(self.d.clone()),
            _ if self.d == other.d => Ok(self.d.clone()),
            _ => Err(LagrangeError::IncompatibleRadicands(self.d.clone(), other.d.clone())),
        }
    }

    pub fn try_add(&self, o: &Surd) -> Result<Surd, LagrangeError> {
        let d = self.common_d(o)?;
        Ok(Surd::new(
            &self.p * &o.r + &o.p * &self.r,
            &self.q * &o.r + &o.q * &self.r,
            &self.r * &o.r,
            d,
        ))
    }

    pub fn try_sub(&self, o: &Surd) -> Result<Surd, LagrangeError> {
        self.try_add(&-o.clone())
    }

    pub fn try_mul(&self, o: &Surd) -> Result<Surd, LagrangeError> {
        let d = self.common_d(o)?;
        Ok(Surd::new(
            &self.p * &o.p + &self.q * &o.q * &d,
            &self.p * &o.q + &self.q * &o.p,
            &self.r * &o.r,
            d,
        ))
    }

    pub fn scale(&self, k: &BigRational) -> Surd {
        Surd::new(
            &self.p * k.numer(),
            &self.q * k.numer(),
            &self.r * k.denom(),
            self.d.clone(),
        )
    }

    /// `1/x = r (p - q sqrt d) / (p^2 - q^2 d)`.
    pub fn recip(&self) -> Result<Surd, LagrangeError> {
        if self.is_zero() {
            return Err(LagrangeError::ZeroInput);
        }
        let den = &self.p * &self.p - &self.q * &self.q * &self.d;
        Ok(Surd::new(&self.r * &self.p, -(&self.r * &self.q), den, self.d.clone()))
    }

    /// `floor(q sqrt d)` by integer square roots (`d` is not a square when `q != 0`).
    fn floor_q_sqrt_d(&self) -> BigInt {
        if self.q.is_zero() {
            return BigInt::zero();
        }
        let root = (&self.q * &self.q * &self.d).sqrt();
        if self.q.is_positive() {
            root
        } else {
            -root - 1
        }
    }

    /// Exact floor: with `N = p + floor(q sqrt d)` the numerator lies in
    /// `(N, N+1)`, so the floor is `floor(N / r)`.
    pub fn floor(&self) -> BigInt {
        (&self.p + self.floor_q_sqrt_d()).div_floor(&self.r)
    }

    pub fn to_f64(&self) -> f64 {
        const BITS: usize = 80;
        let scale = BigInt::one() << BITS;
        let root = (&self.q * &self.q * &self.d * &scale * &scale).sqrt();
        let s = if self.q.is_negative() { -root } else { root };
        let num = &self.p * &scale + s;
        BigRational::new(num, &self.r * scale).to_f64().unwrap_or(f64::NAN)
    }
}

impl Neg for Surd {
    type Output = Surd;
    fn neg(self) -> Surd {
        Surd {
            p: -self.p,
            q: -self.q,
            r: self.r,
            d: self.d,
        }
    }
}

impl Add<&BigRational> for &Surd {
    type Output = Surd;
    fn add(self, k: &BigRational) -> Surd {
        self.try_add(&Surd::rational(k)).expect("rational addend")
    }
}

impl Sub<&BigRational> for &Surd {
    type Output = Surd;
    fn sub(self, k: &BigRational) -> Surd {
        self.try_sub(&Surd::rational(k)).expect("rational subtrahend")
    }
}

impl Mul<&BigRational> for &Surd {
    type Output = Surd;
    fn mul(self, k: &BigRational) -> Surd {
        self.scale(k)
    }
}

impl fmt::Display for Surd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_rational() {
            if self.r.is_one() {
                write!(f, "{}", self.p)
            } else {
                write!(f, "{}/{}", self.p, self.r)
            }
        } else {
            let sign = if self.q.is_negative() { '-' } else { '+' };
            write!(f, "({}{}{}*sqrt({}))/{}", self.p, sign, self.q.abs(), self.d, self.r)
        }
    }
}

impl Serialize for Surd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    if s.is_empty() {
        return None;
    }
    s.parse().ok()
}

/// One signed term of a numerator: an integer, `sqrt(D)` or `q*sqrt(D)`.
fn parse_term(t: &str) -> Option<(BigInt, BigInt, BigInt)> {
    let (neg, body) = match t.as_bytes().first()? {
        b'-' => (true, &t[1..]),
        b'+' => (false, &t[1..]),
        _ => (false, t),
    };
    let sign = |v: BigInt| if neg { -v } else { v };
    if let Some(i) = body.find("sqrt(") {
        let coeff = body[..i].strip_suffix('*').unwrap_or(&body[..i]);
        let q = if coeff.is_empty() {
            BigInt::one()
        } else {
            parse_int(coeff)?
        };
        let d = parse_int(body[i + 5..].strip_suffix(')')?)?;
        if !d.is_positive() {
            return None;
        }
        Some((BigInt::zero(), sign(q), d))
    } else {
        Some((sign(parse_int(body)?), BigInt::zero(), BigInt::one()))
    }
}

impl FromStr for Surd {
    type Err = LagrangeError;

    /// Accepts `(p+q*sqrt(D))/r`, `p+q*sqrt(D)`, `sqrt(D)`, `p/r`, decimals and integers.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || LagrangeError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if !t.contains("sqrt(") {
            return crate::numeric::parse_rational(&t)
                .map(|x| Surd::rational(&x))
                .ok_or_else(err);
        }
        let (num, den) = match t.rfind(")/") {
            Some(i) if t.starts_with('(') => (&t[1..i], parse_int(&t[i + 2..]).ok_or_else(err)?),
            _ => (t.as_str(), BigInt::one()),
        };
        if den.is_zero() {
            return Err(err());
        }
        // split at top-level +/- (not the leading sign, not inside sqrt(..))
        let mut terms = Vec::new();
        let mut start = 0;
        let mut depth = 0;
        for (i, c) in num.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth -= 1,
                '+' | '-' if depth == 0 && i > start => {
                    terms.push(&num[start..i]);
                    start = i;
                }
                _ => {}
            }
        }
        terms.push(&num[start..]);
        let (mut p, mut q, mut d) = (BigInt::zero(), BigInt::zero(), BigInt::one());
        for term in terms {
            let (tp, tq, td) = parse_term(term).ok_or_else(err)?;
            p += tp;
            if !tq.is_zero() {
                if !q.is_zero() && td != d {
                    return Err(err());
                }
                q += tq;
                d = td;
            }
        }
        Ok(Surd::new(p, q, den, d))
    }
}

pub type SurdVector = Vec<Surd>;

/// Regular continued-fraction step on `[0,1)`: `x -> 1/x - floor(1/x)`.
pub fn surd_gauss_step(x: &Surd) -> Result<(BigInt, Surd), LagrangeError> {
    let y = x.recip()?;
    let k = y.floor();
    let img = &y - &BigRational::from_integer(k.clone());
    Ok((k, img))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicExpansion {
    pub preperiod: Vec<Digit>,
    pub period: Vec<Digit>,
}

impl PeriodicExpansion {
    /// The first `n` digits of the infinite expansion.
    pub fn digits(&self, n: usize) -> Vec<Digit> {
        let pre = self.preperiod.len();
        (0..n)
            .map(|i| {
                if i < pre {
                    self.preperiod[i].clone()
                } else {
                    self.period[(i - pre) % self.period.len()].clone()
                }
            })
            .collect()
    }
}

/// Minimal preperiod and primitive period of the sequence `digits[start..]`
/// assumed to repeat with period `per` from `start` on.
fn normalize(digits: &[Digit], start: usize, per: usize) -> PeriodicExpansion {
    let window = &digits[start..start + per];
    let mut p = per;
    for cand in 1..per {
        if per.is_multiple_of(cand) && (0..per).all(|j| window[j] == window[(j + cand) % per]) {
            p = cand;
            break;
        }
    }
    let mut s = start;
    while s > 0 && digits[s - 1] == digits[s - 1 + p] {
        s -= 1;
    }
    PeriodicExpansion {
        preperiod: digits[..s].to_vec(),
        period: digits[s..s + p].to_vec(),
    }
}

/// Exact diagonal-coordinate engine of a product-type system.
struct Engine {
    sys: CfSystem,
    to_diag: Vec<Vec<BigRational>>,
    from_diag: Vec<Vec<BigRational>>,
    lower: Vec<BigRational>,
    step: Vec<BigRational>,
    conjugating: bool,
}

impl Engine {
    fn new(id: &SystemId) -> Result<Self, LagrangeError> {
        let unsupported = || LagrangeError::UnsupportedSystem(id.to_string());
        let sys = make_system(id).map_err(|_| unsupported())?;
        let diag = sys.diagonal().ok_or_else(unsupported)?.clone();
        if sys.is_experimental() {
            return Err(unsupported());
        }
        let m = |rows: &[Vec<num_rational::Rational64>]| -> Vec<Vec<BigRational>> {
            rows.iter().map(|r| r.iter().map(big).collect()).collect()
        };
        Ok(Engine {
            to_diag: m(&diag.to_diag),
            from_diag: m(&diag.from_diag),
            lower: diag.lower.iter().map(big).collect(),
            step: diag
                .step
                .iter()
                .map(|s| BigRational::from_integer((*s).into()))
                .collect(),
            conjugating: diag.conjugating,
            sys,
        })
    }

    fn apply(m: &[Vec<BigRational>], x: &[Surd]) -> Result<Vec<Surd>, LagrangeError> {
        m.iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .filter(|(c, _)| !c.is_zero())
                    .try_fold(Surd::zero(), |acc, (c, v)| acc.try_add(&v.scale(c)))
            })
            .collect()
    }

    fn to_diag(&self, x: &[Surd]) -> Result<Vec<Surd>, LagrangeError> {
        if x.len() != self.sys.dim() {
            return Err(LagrangeError::DimensionMismatch {
                expected: self.sys.dim(),
                got: x.len(),
            });
        }
        Engine::apply(&self.to_diag, x)
    }

    fn in_domain(&self, t: &[Surd]) -> bool {
        t.iter()
            .zip(&self.lower)
            .zip(&self.step)
            .all(|((v, lo), s)| (&(v - lo) * &s.recip()).floor().is_zero())
    }

    /// One joint step of the unconjugated (`iota_c` / reciprocal) system.
    fn step(&self, t: &[Surd]) -> Result<(Digit, Vec<Surd>), LagrangeError> {
        let mut digit = Vec::with_capacity(t.len());
        let mut img = Vec::with_capacity(t.len());
        for ((v, lo), s) in t.iter().zip(&self.lower).zip(&self.step) {
            let y = v.recip()?;
            let m = (&(&y - lo) * &s.recip()).floor();
            let shift = s * BigRational::from_integer(m.clone());
            digit.push(m.to_i64().ok_or(LagrangeError::NoPeriodWithinBound(0))?);
            img.push(&y - &shift);
        }
        Ok((Digit(digit), img))
    }
}

fn conjugate_odd(sys: &CfSystem, digits: &[Digit]) -> Vec<Digit> {
    sys.conjugate_odd_positions(digits)
        .expect("conjugating systems are split-complex")
}

/// Runs the exact Gauss map until a diagonal state repeats.
pub fn detect_period(x: &[Surd], id: &SystemId, max_steps: usize) -> Result<PeriodicExpansion, LagrangeError> {
    let eng = Engine::new(id)?;
    let mut t = eng.to_diag(x)?;
    if !eng.in_domain(&t) {
        return Err(LagrangeError::DomainViolation);
    }
    if let Some(i) = t.iter().position(Surd::is_rational) {
        return Err(LagrangeError::DegenerateQuadratic(format!(
            "diagonal coordinate {} is rational, so the expansion is finite",
            i + 1
        )));
    }
    let mut seen: HashMap<Vec<Surd>, usize> = HashMap::new();
    let mut digits = Vec::new();
    let (start, per) = loop {
        if let Some(&i) = seen.get(&t) {
            break (i, digits.len() - i);
        }
        if digits.len() >= max_steps {
            return Err(LagrangeError::NoPeriodWithinBound(max_steps));
        }
        seen.insert(t.clone(), digits.len());
        let (k, next) = eng.step(&t)?;
        digits.push(k);
        t = next;
    };
    let c = normalize(&digits, start, per);
    if !eng.conjugating {
        return Ok(c);
    }
    // iota_+ digits: odd positions of the iota_c string conjugated; the result
    // repeats with period lcm(len, 2) from the same start
    let full = 2 * per;
    let seq = conjugate_odd(&eng.sys, &c.digits(start + 2 * full));
    Ok(normalize(&seq, start, full))
}

/// `a x^2 + b x + c = 0` with algebra-valued coefficients in space coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quadratic {
    #[serde(serialize_with = "ser_ratios")]
    pub a: Vec<BigRational>,
    #[serde(serialize_with = "ser_ratios")]
    pub b: Vec<BigRational>,
    #[serde(serialize_with = "ser_ratios")]
    pub c: Vec<BigRational>,
    /// Per diagonal coordinate `(a, b, c)`, gcd 1 and `a > 0`.
    #[serde(serialize_with = "ser_triples")]
    pub diagonal: Vec<[BigInt; 3]>,
    pub split_complex: bool,
}

fn ser_ratios<S: serde::Serializer>(v: &[BigRational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|x| x.to_string()))
}

fn ser_triples<S: serde::Serializer>(v: &[[BigInt; 3]], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|t| [t[0].to_string(), t[1].to_string(), t[2].to_string()]))
}

type Mat2 = [[BigInt; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let e = |i: usize, j: usize| &a[i][0] * &b[0][j] + &a[i][1] * &b[1][j];
    [[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]]
}

fn identity() -> Mat2 {
    [[BigInt::one(), BigInt::zero()], [BigInt::zero(), BigInt::one()]]
}

/// `t -> 1/(s m + t)` as a Mobius matrix.
fn branch(s: &BigInt, m: i64) -> Mat2 {
    [[BigInt::zero(), BigInt::one()], [BigInt::one(), s * BigInt::from(m)]]
}

/// Annihilating quadratic of the point with expansion `pre (period)^inf` in
/// one diagonal coordinate; the lower bound only matters through the digits.
fn coordinate_quadratic(pre: &[i64], period: &[i64], s: &BigInt) -> Result<[BigInt; 3], LagrangeError> {
    let per = period.iter().fold(identity(), |acc, &m| mat_mul(&acc, &branch(s, m)));
    let pm = pre.iter().fold(identity(), |acc, &m| mat_mul(&acc, &branch(s, m)));
    let [[a, b], [c, dm]] = per;
    // tail y: c y^2 + (dm - a) y - b = 0
    let (qa, qb, qc) = (c, &dm - &a, -b);
    // x = pm(y)  =>  y = (p22 x - p12) / (-p21 x + p11)
    let [[p11, p12], [p21, p22]] = pm;
    let (u1, u0) = (p22.clone(), -p12.clone());
    let (w1, w0) = (-p21.clone(), p11.clone());
    let mut out = [
        &qa * &u1 * &u1 + &qb * &u1 * &w1 + &qc * &w1 * &w1,
        &qa * BigInt::from(2) * &u1 * &u0 + &qb * (&u1 * &w0 + &u0 * &w1) + &qc * BigInt::from(2) * &w1 * &w0,
        &qa * &u0 * &u0 + &qb * &u0 * &w0 + &qc * &w0 * &w0,
    ];
    let g = out[0].gcd(&out[1]).gcd(&out[2]);
    if g.is_zero() || out[0].is_zero() {
        return Err(LagrangeError::DegenerateQuadratic(
            "leading coefficient vanishes".into(),
        ));
    }
    let sign = if out[0].sign() == Sign::Minus { -g } else { g };
    for v in out.iter_mut() {
        *v = &*v / &sign;
    }
    Ok(out)
}

pub fn reconstruct_quadratic(exp: &PeriodicExpansion, id: &SystemId) -> Result<Quadratic, LagrangeError> {
    let eng = Engine::new(id)?;
    if exp.period.is_empty() {
        return Err(LagrangeError::DegenerateQuadratic("empty period".into()));
    }
    let exp = if eng.conjugating {
        // back to the iota_c expansion of the same point
        let (pre, per) = (exp.preperiod.len(), exp.period.len());
        let n = pre + 4 * per;
        let seq = conjugate_odd(&eng.sys, &exp.digits(n));
        normalize(&seq, pre, 2 * per)
    } else {
        exp.clone()
    };
    let d = eng.sys.dim();
    let mut diagonal = Vec::with_capacity(d);
    for i in 0..d {
        let pre: Vec<i64> = exp.preperiod.iter().map(|k| k.0[i]).collect();
        let per: Vec<i64> = exp.period.iter().map(|k| k.0[i]).collect();
        let s = eng.step[i].to_integer();
        diagonal.push(coordinate_quadratic(&pre, &per, &s)?);
    }
    let coeff = |j: usize| -> Vec<BigRational> {
        let t: Vec<BigRational> = diagonal
            .iter()
            .map(|q| BigRational::from_integer(q[j].clone()))
            .collect();
        eng.from_diag
            .iter()
            .map(|row| row.iter().zip(&t).map(|(m, v)| m * v).sum())
            .collect()
    };
    Ok(Quadratic {
        a: coeff(0),
        b: coeff(1),
        c: coeff(2),
        split_complex: eng.sys.space() == Space::SplitComplexPlane && eng.sys.inversion() != Inversion::Reciprocal,
        diagonal,
    })
}

fn algebra_mul(x: &[Surd], y: &[Surd], split: bool) -> Result<Vec<Surd>, LagrangeError> {
    if split {
        Ok(vec![
            x[0].try_mul(&y[0])?.try_add(&x[1].try_mul(&y[1])?)?,
            x[0].try_mul(&y[1])?.try_add(&x[1].try_mul(&y[0])?)?,
        ])
    } else {
        x.iter().zip(y).map(|(a, b)| a.try_mul(b)).collect()
    }
}

/// Evaluates `a x^2 + b x + c` exactly in the product algebra (or in `R[j]`).
/// True iff every coordinate vanishes and `a` is invertible.
pub fn verify_quadratic(x: &[Surd], q: &Quadratic) -> bool {
    let n = x.len();
    if q.a.len() != n || q.b.len() != n || q.c.len() != n || (q.split_complex && n != 2) {
        return false;
    }
    let invertible = if q.split_complex {
        &q.a[0] * &q.a[0] != &q.a[1] * &q.a[1]
    } else {
        q.a.iter().all(|v| !v.is_zero())
    };
    if !invertible {
        return false;
    }
    let lift = |v: &[BigRational]| -> Vec<Surd> { v.iter().map(Surd::rational).collect() };
    let eval = || -> Result<Vec<Surd>, LagrangeError> {
        let x2 = algebra_mul(x, x, q.split_complex)?;
        let ax2 = algebra_mul(&lift(&q.a), &x2, q.split_complex)?;
        let bx = algebra_mul(&lift(&q.b), x, q.split_complex)?;
        ax2.iter()
            .zip(&bx)
            .zip(&lift(&q.c))
            .map(|((u, v), w)| u.try_add(v)?.try_add(w))
            .collect()
    };
    matches!(eval(), Ok(v) if v.iter().all(Surd::is_zero))
}

/// Exact digits of a surd vector (no period detection), for cross-checks.
pub fn exact_digits(x: &[Surd], id: &SystemId, n: usize) -> Result<Vec<Digit>, LagrangeError> {
    Ok(exact_orbit(x, id, n)?.0)
}

/// Up to `n` exact digits together with the orbit points `T x, T^2 x, ...` in
/// space coordinates. Stops early when the orbit reaches 0.
pub fn exact_orbit(x: &[Surd], id: &SystemId, n: usize) -> Result<(Vec<Digit>, Vec<Vec<Surd>>), LagrangeError> {
    let eng = Engine::new(id)?;
    let mut t = eng.to_diag(x)?;
    if !eng.in_domain(&t) {
        return Err(LagrangeError::DomainViolation);
    }
    let mut digits = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        if t.iter().any(Surd::is_zero) {
            break;
        }
        let (k, next) = eng.step(&t)?;
        digits.push(k);
        t = next;
        // T_+^j = T_c^j for even j and conj T_c^j for odd j; conj swaps diagonal coordinates
        let mut shown = t.clone();
        if eng.conjugating && i % 2 == 0 {
            shown.swap(0, 1);
        }
        points.push(Engine::apply(&eng.from_diag, &shown)?);
    }
    if eng.conjugating {
        digits = conjugate_odd(&eng.sys, &digits);
    }
    Ok((digits, points))
}

/// Maps diagonal coordinates back to space coordinates.
pub fn from_diagonal(t: &[Surd], id: &SystemId) -> Result<Vec<Surd>, LagrangeError> {
    let eng = Engine::new(id)?;
    Engine::apply(&eng.from_diag, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn s(p: i64, q: i64, r: i64, d: i64) -> Surd {
        Surd::from_i64(p, q, r, d)
    }

    fn dg(v: &[i64]) -> Digit {
        Digit(v.to_vec())
    }

    #[test]
    fn canonical_form() {
        assert_eq!(s(2, 2, 4, 2), s(1, 1, 2, 2));
        assert_eq!(s(1, 1, 1, 8), s(1, 2, 1, 2));
        assert_eq!(s(1, 1, 1, 9), Surd::integer(4.into()));
        assert_eq!(s(1, 1, -2, 3), s(-1, -1, 2, 3));
        assert!(s(3, 0, 6, 5).is_rational());
        assert_eq!(s(3, 0, 6, 5).d(), &BigInt::one());
    }

    #[test]
    fn parses_literals() {
        assert_eq!("(-1+1*sqrt(2))/1".parse::<Surd>().unwrap(), s(-1, 1, 1, 2));
        assert_eq!("(-1 + sqrt(5))/2".parse::<Surd>().unwrap(), s(-1, 1, 2, 5));
        assert_eq!("(3-2*sqrt(7))/5".parse::<Surd>().unwrap(), s(3, -2, 5, 7));
        assert_eq!("sqrt(3)-1".parse::<Surd>().unwrap(), s(-1, 1, 1, 3));
        assert_eq!("2/5".parse::<Surd>().unwrap(), s(2, 0, 5, 1));
        assert_eq!("0.25".parse::<Surd>().unwrap(), s(1, 0, 4, 1));
        assert_eq!(s(-1, 1, 2, 5).to_string(), "(-1+1*sqrt(5))/2");
        for bad in ["", "sqrt(-2)", "(1+sqrt(2))/0", "abc", "(1+sqrt(2)+sqrt(3))/1"] {
            assert!(bad.parse::<Surd>().is_err(), "{bad}");
        }
    }

    #[test]
    fn floor_is_exact() {
        assert_eq!(s(0, 1, 1, 2).floor(), BigInt::from(1));
        assert_eq!(s(0, -1, 1, 2).floor(), BigInt::from(-2));
        assert_eq!(s(-1, 1, 1, 2).floor(), BigInt::from(0));
        assert_eq!(s(7, -3, 2, 5).floor(), BigInt::from(0)); // (7 - 6.708)/2
        assert_eq!(s(-7, 0, 2, 1).floor(), BigInt::from(-4));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let x = s(
                rng.random_range(-50..50),
                rng.random_range(-50..50),
                rng.random_range(1..50),
                [2, 3, 5, 7, 11][rng.random_range(0..5)],
            );
            let f = x.to_f64();
            if (f - f.round()).abs() > 1e-9 {
                assert_eq!(x.floor(), BigInt::from(f.floor() as i64), "{x}");
            }
        }
    }

    #[test]
    fn arithmetic() {
        let a = s(-1, 1, 1, 2);
        assert_eq!(a.try_mul(&a).unwrap(), s(3, -2, 1, 2));
        assert_eq!(a.recip().unwrap(), s(1, 1, 1, 2));
        assert_eq!(a.try_add(&s(1, 0, 1, 1)).unwrap(), s(0, 1, 1, 2));
        assert!(a.try_add(&s(0, 1, 1, 3)).is_err());
        assert_eq!(Surd::zero().recip(), Err(LagrangeError::ZeroInput));
        assert!((s(-1, 1, 2, 5).to_f64() - 0.6180339887498949).abs() < 1e-16);
    }

    #[test]
    fn gauss_step_examples() {
        let (k, img) = surd_gauss_step(&s(-1, 1, 1, 2)).unwrap();
        assert_eq!((k, img.clone()), (BigInt::from(2), s(-1, 1, 1, 2)));
        let (k, img) = surd_gauss_step(&s(-1, 1, 1, 3)).unwrap();
        assert_eq!((k, img.clone()), (BigInt::from(1), s(-1, 1, 2, 3)));
        let (k, img) = surd_gauss_step(&img).unwrap();
        assert_eq!((k, img), (BigInt::from(2), s(-1, 1, 1, 3)));
        let (k, img) = surd_gauss_step(&s(2, 0, 5, 1)).unwrap();
        assert_eq!((k, img), (BigInt::from(2), s(1, 0, 2, 1)));
        assert_eq!(surd_gauss_step(&Surd::zero()), Err(LagrangeError::ZeroInput));
    }

    #[test]
    fn golden_expansion_is_all_ones() {
        let g = s(-1, 1, 2, 5);
        let d = exact_digits(&[g.clone(), g], &SystemId::ProductRegular(2), 50).unwrap();
        assert_eq!(d, vec![dg(&[1, 1]); 50]);
    }

    #[test]
    fn period_examples() {
        let r2 = s(-1, 1, 1, 2);
        let r3 = s(-1, 1, 1, 3);
        let p2 = SystemId::ProductRegular(2);
        let e = detect_period(&[r2.clone(), r2.clone()], &p2, 100).unwrap();
        assert_eq!(
            e,
            PeriodicExpansion {
                preperiod: vec![],
                period: vec![dg(&[2, 2])]
            }
        );
        let e = detect_period(&[r2.clone(), r3], &p2, 100).unwrap();
        assert_eq!(e.preperiod, vec![]);
        assert_eq!(e.period, vec![dg(&[2, 1]), dg(&[2, 2])]);

        // Phi(r2, r2) = (r2, 0); digit Phi(2,2) = (2,0) has lattice coordinates (2,2)
        let dc = SystemId::LittleDiamondC;
        let e = detect_period(&[r2.clone(), Surd::zero()], &dc, 100).unwrap();
        assert_eq!(e.period, vec![dg(&[2, 2])]);
        let sys = make_system(&dc).unwrap();
        assert_eq!(sys.digit_point(&e.period[0]), vec![2.0, 0.0]);
    }

    #[test]
    fn quadratic_examples() {
        let p2 = SystemId::ProductRegular(2);
        let per22 = PeriodicExpansion {
            preperiod: vec![],
            period: vec![dg(&[2, 2])],
        };
        let q = reconstruct_quadratic(&per22, &p2).unwrap();
        let one = |v: i64| vec![BigRational::from_integer(v.into()); 2];
        assert_eq!((q.a.clone(), q.b.clone(), q.c.clone()), (one(1), one(2), one(-1)));
        let per11 = PeriodicExpansion {
            preperiod: vec![],
            period: vec![dg(&[1, 1])],
        };
        let q = reconstruct_quadratic(&per11, &p2).unwrap();
        assert_eq!((q.a, q.b, q.c), (one(1), one(1), one(-1)));

        let q = reconstruct_quadratic(&per22, &SystemId::LittleDiamondC).unwrap();
        let e = |v: i64| vec![BigRational::from_integer(v.into()), BigRational::zero()];
        assert!(q.split_complex);
        assert_eq!((q.a, q.b, q.c), (e(1), e(2), e(-1)));
    }

    #[test]
    fn verify_examples() {
        let r2 = s(-1, 1, 1, 2);
        let rq = |a: i64, b: i64, c: i64| Quadratic {
            a: vec![BigRational::from_integer(a.into())],
            b: vec![BigRational::from_integer(b.into())],
            c: vec![BigRational::from_integer(c.into())],
            diagonal: vec![],
            split_complex: false,
        };
        assert!(verify_quadratic(std::slice::from_ref(&r2), &rq(1, 2, -1)));
        assert!(!verify_quadratic(std::slice::from_ref(&r2), &rq(1, 1, -1)));
        assert!(!verify_quadratic(std::slice::from_ref(&r2), &rq(0, 0, 0)));

        let x = vec![r2, s(-1, 1, 1, 3)];
        let p2 = SystemId::ProductRegular(2);
        let e = detect_period(&x, &p2, 100).unwrap();
        let q = reconstruct_quadratic(&e, &p2).unwrap();
        assert!(verify_quadratic(&x, &q));
    }

    #[test]
    fn rational_input_is_degenerate() {
        let p2 = SystemId::ProductRegular(2);
        let e = detect_period(&[s(2, 0, 5, 1), s(-1, 1, 1, 2)], &p2, 100);
        assert!(matches!(e, Err(LagrangeError::DegenerateQuadratic(_))));
        assert!(matches!(
            detect_period(&[s(-1, 1, 1, 2)], &SystemId::SquareCF, 10),
            Err(LagrangeError::UnsupportedSystem(_))
        ));
        assert_eq!(
            detect_period(&[s(1, 1, 1, 2), s(-1, 1, 1, 2)], &p2, 10),
            Err(LagrangeError::DomainViolation)
        );
    }

    #[test]
    fn preperiodic_points() {
        // x = 1/(3 + 1/(1 + (sqrt2 - 1))) has digits 3, then 1?, then 2 repeating
        let p1 = SystemId::Regular1D;
        let r2 = s(-1, 1, 1, 2);
        let tail = r2.try_add(&s(1, 0, 1, 1)).unwrap().recip().unwrap();
        let x = tail.try_add(&s(3, 0, 1, 1)).unwrap().recip().unwrap();
        let e = detect_period(std::slice::from_ref(&x), &p1, 100).unwrap();
        assert_eq!(e.preperiod, vec![dg(&[3]), dg(&[1])]);
        assert_eq!(e.period, vec![dg(&[2])]);
        let q = reconstruct_quadratic(&e, &p1).unwrap();
        assert!(verify_quadratic(&[x], &q));
    }

    #[test]
    fn plus_period_is_conjugated_c_period() {
        let dc = SystemId::LittleDiamondC;
        let dp = SystemId::LittleDiamondPlus;
        let r2 = s(-1, 1, 1, 2);
        let x = from_diagonal(&[r2.clone(), r2], &dc).unwrap();
        assert_eq!(detect_period(&x, &dc, 100).unwrap().period, vec![dg(&[2, 2])]);
        assert_eq!(detect_period(&x, &dp, 100).unwrap().period, vec![dg(&[2, 2])]);

        // (sqrt13 - 3)/2 has period 3; 2 sqrt13 - 7 is another surd of the same field
        let x = from_diagonal(&[s(-3, 1, 2, 13), s(-7, 2, 1, 13)], &dc).unwrap();
        let ec = detect_period(&x, &dc, 1000).unwrap();
        let ep = detect_period(&x, &dp, 1000).unwrap();
        let sys = make_system(&dc).unwrap();
        assert_eq!(sys.conjugate_odd_positions(&ec.digits(60)).unwrap(), ep.digits(60));
        assert!(ep.period.len() == ec.period.len() || ep.period.len() == 2 * ec.period.len());
        assert!(verify_quadratic(&x, &reconstruct_quadratic(&ep, &dp).unwrap()));
        assert!(verify_quadratic(&x, &reconstruct_quadratic(&ec, &dc).unwrap()));
    }

    #[test]
    fn exact_orbit_matches_float_steps() {
        let x = from_diagonal(&[s(-3, 1, 2, 13), s(-7, 2, 1, 13)], &SystemId::LittleDiamondC).unwrap();
        for id in [SystemId::LittleDiamondC, SystemId::LittleDiamondPlus] {
            let sys = make_system(&id).unwrap();
            let (digits, points) = exact_orbit(&x, &id, 6).unwrap();
            let mut cur: Vec<f64> = x.iter().map(Surd::to_f64).collect();
            for (d, p) in digits.iter().zip(&points) {
                let (k, next) = sys.gauss_step(&cur).unwrap();
                assert_eq!(&k, d);
                for (a, b) in next.iter().zip(p) {
                    assert!((a - b.to_f64()).abs() < 1e-9);
                }
                cur = next;
            }
        }
    }
}
