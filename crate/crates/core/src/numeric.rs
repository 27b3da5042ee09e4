//! Double-double arithmetic and a few exact-rational helpers.
//!
//! Gauss steps are evaluated in double-double so that the image of a point near
//! the light cone (where the inversion produces values of size `1/Q`) still comes
//! out accurate to a few ulps after the lattice translate is subtracted.
//!
//! Every operation here is built from round-to-nearest primitives in an order
//! that is symmetric under swapping the operands of `+`/`*` and odd under
//! negation. The split-complex systems rely on this: conjugating the input of a
//! Gauss step conjugates the output bit for bit.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::{BigRational, Rational64};
use num_traits::{ToPrimitive, Zero};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    #[inline]
    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    /// Exact square of an `f64`.
    #[inline]
    pub fn square_f64(x: f64) -> Self {
        let (hi, lo) = two_prod(x, x);
        Dd { hi, lo }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    #[inline]
    pub fn recip(self) -> Self {
        Dd::new(1.0) / self
    }

    /// Largest integer not exceeding the value, as a double-double.
    pub fn floor(self) -> Self {
        let f = self.hi.floor();
        if f != self.hi {
            return Dd::new(f);
        }
        let (hi, lo) = quick_two_sum(f, self.lo.floor());
        Dd { hi, lo }
    }

    /// `floor` converted to an integer; `None` when it does not fit in 62 bits.
    pub fn floor_i64(self) -> Option<i64> {
        let f = self.floor();
        const LIMIT: f64 = 4.611_686_018_427_388e18; // 2^62
        if !f.is_finite() || f.hi.abs() >= LIMIT {
            return None;
        }
        Some(f.hi as i64 + f.lo as i64)
    }

    #[inline]
    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let e = e + self.lo * b;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    #[inline]
    pub fn add_f64(self, b: f64) -> Self {
        self + Dd::new(b)
    }
}

impl Add for Dd {
    type Output = Dd;
    #[inline]
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let e = e + t;
        let (s, e) = quick_two_sum(s, e);
        let e = e + f;
        let (hi, lo) = quick_two_sum(s, e);
        Dd { hi, lo }
    }
}

impl Neg for Dd {
    type Output = Dd;
    #[inline]
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Sub for Dd {
    type Output = Dd;
    #[inline]
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    #[inline]
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    #[inline]
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

/// Double-double approximation of a rational (error ~1e-32 relative).
pub fn dd_from_ratio(r: &Rational64) -> Dd {
    Dd::new(*r.numer() as f64) / Dd::new(*r.denom() as f64)
}

pub fn big(r: &Rational64) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_ratio(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Parses a decimal (`-0.25`, `3`, `1e-3`) or fraction (`2/7`) literal exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let all: String = format!("{int_part}{frac_part}");
    let mut numer: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().ok()?
    };
    if neg {
        numer = -numer;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let value = if scale >= 0 {
        BigRational::from_integer(numer * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(numer, num_traits::pow(ten, (-scale) as usize))
    };
    Some(value)
}

/// Same as [`parse_rational`] but into a 64-bit ratio (system parameters).
pub fn parse_rational64(s: &str) -> Option<Rational64> {
    let r = parse_rational(s)?;
    Some(Rational64::new(r.numer().to_i64()?, r.denom().to_i64()?))
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` via Newton iteration.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Integral of `f` over `[a, b]` with an `n`-point Gauss-Legendre rule.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, rule: &[(f64, f64)]) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    rule.iter().map(|(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dd_division_is_accurate() {
        let third = Dd::new(1.0) / Dd::new(3.0);
        let back = third * Dd::new(3.0);
        assert!((back - Dd::new(1.0)).to_f64().abs() < 1e-31);
    }

    #[test]
    fn dd_floor_handles_integer_hi_with_negative_lo() {
        let x = Dd { hi: 3.0, lo: -1e-20 };
        assert_eq!(x.floor_i64(), Some(2));
        let y = Dd { hi: 3.0, lo: 1e-20 };
        assert_eq!(y.floor_i64(), Some(3));
        assert_eq!(Dd::new(-0.5).floor_i64(), Some(-1));
        assert_eq!(Dd::new(1e300).floor_i64(), None);
    }

    #[test]
    fn dd_ops_are_sign_and_swap_symmetric() {
        let a = Dd::new(0.1) / Dd::new(0.7);
        let b = Dd::new(-0.3) / Dd::new(1.1);
        assert_eq!(a + b, b + a);
        assert_eq!(a * b, b * a);
        assert_eq!(-(a - b), (-a) - (-b));
        assert_eq!((-a) / b, -(a / b));
    }

    #[test]
    fn parses_decimals_and_fractions_exactly() {
        let third = parse_rational("1/3").unwrap();
        assert_eq!(third, BigRational::new(1.into(), 3.into()));
        assert_eq!(
            parse_rational("-0.25").unwrap(),
            BigRational::new((-1).into(), 4.into())
        );
        assert_eq!(parse_rational("1.5e-1").unwrap(), BigRational::new(3.into(), 20.into()));
        assert!(parse_rational("abc").is_none());
        assert!(parse_rational("1/0").is_none());
        assert_eq!(parse_rational64("0.3"), Some(Rational64::new(3, 10)));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let rule = gauss_legendre(8);
        let v = integrate(|x| x.powi(15) + 3.0 * x * x, 0.0, 1.0, &rule);
        assert!((v - (1.0 / 16.0 + 1.0)).abs() < 1e-14);
        let log2 = integrate(|x| 1.0 / (1.0 + x), 0.0, 1.0, &rule);
        assert!((log2 - std::f64::consts::LN_2).abs() < 1e-12);
    }
}
