//! The generic continued-fraction engine: lattice rounding against a
//! fundamental domain, the Gauss step `T(x) = iota(x) - [iota(x)]`, digit
//! extraction, convergents, and exact cylinders for product-type systems.
//!
//! Every system is described by a rational linear map `L` (space coordinates to
//! lattice coordinates) and a lower corner `lo`: the lattice is `L^-1 Z^d` and
//! the fundamental domain is `L^-1 (lo + [0,1)^d)`. Digits are stored as integer
//! lattice coordinates.

mod cylinder;
mod exact;

pub use cylinder::{Cylinder, Interval};

use std::fmt;

use num_rational::{BigRational, Rational64};
use serde::Serialize;
use thiserror::Error;

use crate::numeric::{big, dd_from_ratio, Dd};
use crate::systems::SystemId;

/// Largest dimension handled by the allocation-free step.
pub const MAX_DIM: usize = 8;

/// Slack allowed when checking that a computed image is still in the domain.
pub const DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfError {
    #[error("point lies in the null set")]
    NullSet,
    #[error("digit does not fit in 62 bits (point within ~1e-18 of the null set)")]
    DigitOverflow,
    #[error("orbit left the domain at step {step} by {excess:e}")]
    NumericalDrift { step: usize, excess: f64 },
    #[error("point {0:?} is not in the fundamental domain")]
    DomainViolation(Vec<f64>),
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("convergent tail hits the null set at nesting level {0}")]
    SingularTail(usize),
    #[error("digit list is empty")]
    EmptyDigits,
    #[error("system is not of product type in any diagonalizing coordinates")]
    NotProductType,
    #[error("cylinder for this digit string is empty")]
    EmptyCylinder,
    #[error("cylinder is not a single box (branch straddles the origin)")]
    SplitCylinder,
    #[error("inversion is not the algebra inverse; no forward recursion")]
    NotAlgebraic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Space {
    ProductRd(usize),
    SplitComplexPlane,
    Lorentz3D,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Inversion {
    /// Coordinate-wise `1/x`.
    Reciprocal,
    /// `x / Q(x)` on `R^{1,1}`.
    IotaPlus,
    /// `conj(x) / Q(x)` on `R^{1,1}`, the algebra inverse in `R[j]`.
    IotaC,
    /// `(x1, x2, -x3) / Q(x)` on `R^{2,1}`.
    Lorentz3DInv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FaceConvention {
    /// Lower faces closed, upper faces open.
    HalfOpen,
    /// All faces closed (membership only; rounding stays half-open).
    Closed,
}

/// A lattice point in lattice coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Digit(pub Vec<i64>);

impl fmt::Display for Digit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}")?;
        }
        write!(f, ")")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExpansionStatus {
    /// `T^n x = 0` exactly.
    FiniteComplete(usize),
    /// `T^n x` is in the null set but is not the origin.
    HitNullNonInvertible(usize),
    TruncatedAtMax(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitSequence {
    pub digits: Vec<Digit>,
    pub status: ExpansionStatus,
}

/// Coordinates in which a product-type system splits into one-dimensional
/// systems `t -> 1/t - step*k` on `[lo, lo + step)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagonalForm {
    pub to_diag: Vec<Vec<Rational64>>,
    pub from_diag: Vec<Vec<Rational64>>,
    pub lower: Vec<Rational64>,
    pub step: Vec<i64>,
    /// Digits at odd positions are conjugated before use (the `iota_+` diamond).
    pub conjugating: bool,
}

#[derive(Clone, Debug)]
pub struct CfSystem {
    id: SystemId,
    space: Space,
    inversion: Inversion,
    to_lattice: Vec<Vec<Rational64>>,
    from_lattice: Vec<Vec<Rational64>>,
    lower: Vec<Rational64>,
    faces: FaceConvention,
    shift: Option<Vec<Rational64>>,
    diagonal: Option<DiagonalForm>,
    experimental: bool,
    // cached numeric forms
    l_f64: Vec<Vec<f64>>,
    b_f64: Vec<Vec<f64>>,
    lower_dd: Vec<Dd>,
    lower_f64: Vec<f64>,
}

pub(crate) struct SystemParts {
    pub id: SystemId,
    pub space: Space,
    pub inversion: Inversion,
    pub to_lattice: Vec<Vec<Rational64>>,
    pub from_lattice: Vec<Vec<Rational64>>,
    pub lower: Vec<Rational64>,
    pub faces: FaceConvention,
    pub shift: Option<Vec<Rational64>>,
    pub diagonal: Option<DiagonalForm>,
    pub experimental: bool,
}

fn to_f64_matrix(m: &[Vec<Rational64>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|row| row.iter().map(|r| *r.numer() as f64 / *r.denom() as f64).collect())
        .collect()
}

impl CfSystem {
    pub(crate) fn from_parts(p: SystemParts) -> Self {
        let d = p.lower.len();
        assert!(d <= MAX_DIM);
        assert_eq!(p.to_lattice.len(), d);
        assert_eq!(p.from_lattice.len(), d);
        let l_f64 = to_f64_matrix(&p.to_lattice);
        let b_f64 = to_f64_matrix(&p.from_lattice);
        let lower_dd: Vec<Dd> = p.lower.iter().map(dd_from_ratio).collect();
        let lower_f64 = lower_dd.iter().map(|v| v.to_f64()).collect();
        CfSystem {
            id: p.id,
            space: p.space,
            inversion: p.inversion,
            to_lattice: p.to_lattice,
            from_lattice: p.from_lattice,
            lower: p.lower,
            faces: p.faces,
            shift: p.shift,
            diagonal: p.diagonal,
            experimental: p.experimental,
            l_f64,
            b_f64,
            lower_dd,
            lower_f64,
        }
    }

    pub fn id(&self) -> &SystemId {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn inversion(&self) -> Inversion {
        self.inversion
    }

    pub fn faces(&self) -> FaceConvention {
        self.faces
    }

    /// Space-to-lattice coordinate map `L`.
    pub fn to_lattice(&self) -> &[Vec<Rational64>] {
        &self.to_lattice
    }

    /// Lattice-to-space map; its columns generate the lattice.
    pub fn from_lattice(&self) -> &[Vec<Rational64>] {
        &self.from_lattice
    }

    pub fn generators(&self) -> Vec<Vec<Rational64>> {
        (0..self.dim())
            .map(|j| self.from_lattice.iter().map(|row| row[j]).collect())
            .collect()
    }

    /// Lower corner of the domain box in lattice coordinates.
    pub fn domain_lower(&self) -> &[Rational64] {
        &self.lower
    }

    pub fn shift(&self) -> Option<&[Rational64]> {
        self.shift.as_deref()
    }

    pub fn diagonal(&self) -> Option<&DiagonalForm> {
        self.diagonal.as_ref()
    }

    pub fn is_experimental(&self) -> bool {
        self.experimental
    }

    /// Whether conjugation (`x2 -> -x2`) is defined on this system's space.
    pub fn is_split_complex(&self) -> bool {
        self.space == Space::SplitComplexPlane
    }

    fn check_dim(&self, got: usize) -> Result<(), CfError> {
        if got != self.dim() {
            return Err(CfError::DimensionMismatch {
                expected: self.dim(),
                got,
            });
        }
        Ok(())
    }

    /// Space coordinates of a lattice point.
    pub fn digit_point(&self, d: &Digit) -> Vec<f64> {
        self.b_f64
            .iter()
            .map(|row| row.iter().zip(&d.0).map(|(b, &k)| b * k as f64).sum())
            .collect()
    }

    pub fn digit_point_exact(&self, d: &Digit) -> Vec<BigRational> {
        self.from_lattice
            .iter()
            .map(|row| {
                row.iter()
                    .zip(&d.0)
                    .map(|(b, &k)| big(b) * BigRational::from_integer(k.into()))
                    .sum()
            })
            .collect()
    }

    /// The digit written with the shifted-rounding label `[y]_alpha = z - alpha`
    /// (space coordinates). Equals [`Self::digit_point`] for unshifted systems.
    pub fn shifted_label(&self, d: &Digit) -> Vec<f64> {
        let p = self.digit_point(d);
        match &self.shift {
            None => p,
            Some(a) => p
                .iter()
                .zip(a)
                .map(|(x, a)| x - *a.numer() as f64 / *a.denom() as f64)
                .collect(),
        }
    }

    /// Box coordinates `L x - lo`; the domain is `[0,1)^d` in these.
    pub fn to_box(&self, x: &[f64]) -> Vec<f64> {
        self.l_f64
            .iter()
            .zip(&self.lower_dd)
            .map(|(row, lo)| {
                let mut acc = Dd::ZERO;
                for (l, &xi) in row.iter().zip(x) {
                    if *l != 0.0 {
                        acc = acc + Dd::new(xi).mul_f64(*l);
                    }
                }
                (acc - *lo).to_f64()
            })
            .collect()
    }

    /// Inverse of [`Self::to_box`].
    pub fn from_box(&self, v: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = v.iter().zip(&self.lower_f64).map(|(v, lo)| v + lo).collect();
        self.b_f64
            .iter()
            .map(|row| row.iter().zip(&u).map(|(b, u)| b * u).sum())
            .collect()
    }

    /// Membership in the fundamental domain under the system's face convention.
    pub fn in_domain(&self, x: &[f64]) -> bool {
        if x.len() != self.dim() {
            return false;
        }
        let v = self.to_box(x);
        match self.faces {
            FaceConvention::HalfOpen => v.iter().all(|&t| (0.0..1.0).contains(&t)),
            FaceConvention::Closed => v.iter().all(|&t| (0.0..=1.0).contains(&t)),
        }
    }

    /// How far (in box coordinates) a point sits outside the closed domain.
    pub fn domain_excess(&self, x: &[f64]) -> f64 {
        self.to_box(x)
            .iter()
            .map(|&t| (-t).max(t - 1.0).max(0.0))
            .fold(0.0, f64::max)
    }

    /// [`Self::domain_excess`] in plain binary64, for hot loops.
    pub fn domain_excess_fast(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (row, lo) in self.l_f64.iter().zip(&self.lower_f64) {
            let t: f64 = row.iter().zip(x).map(|(l, v)| l * v).sum::<f64>() - lo;
            worst = worst.max(-t).max(t - 1.0);
        }
        worst
    }

    /// Box coordinates in plain binary64, written into `out`.
    pub fn to_box_fast(&self, x: &[f64], out: &mut [f64]) {
        for ((row, lo), o) in self.l_f64.iter().zip(&self.lower_f64).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(l, v)| l * v).sum::<f64>() - lo;
        }
    }

    /// `|det|` of the lattice-to-space map (the domain volume).
    pub fn domain_volume(&self) -> f64 {
        let mut m = self.b_f64.clone();
        let n = m.len();
        let mut det = 1.0;
        for c in 0..n {
            let piv = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            if m[piv][c] == 0.0 {
                return 0.0;
            }
            m.swap(c, piv);
            det *= m[c][c];
            for r in c + 1..n {
                let f = m[r][c] / m[c][c];
                let pivot_row = m[c].clone();
                for (v, p) in m[r][c..].iter_mut().zip(&pivot_row[c..]) {
                    *v -= f * p;
                }
            }
        }
        det.abs()
    }

    pub fn in_closed_domain(&self, x: &[f64], tol: f64) -> bool {
        x.len() == self.dim() && self.domain_excess(x) <= tol
    }

    /// Minkowski quadratic form of the ambient space (for `R^d` products, the
    /// product of the coordinates, i.e. the algebra norm).
    pub fn q_value(&self, x: &[f64]) -> f64 {
        match self.inversion {
            Inversion::Reciprocal => x.iter().product(),
            Inversion::IotaPlus | Inversion::IotaC => x[0] * x[0] - x[1] * x[1],
            Inversion::Lorentz3DInv => x[0] * x[0] + x[1] * x[1] - x[2] * x[2],
        }
    }

    fn q_dd(&self, x: &[f64]) -> Dd {
        match self.inversion {
            Inversion::Reciprocal => unreachable!(),
            Inversion::IotaPlus | Inversion::IotaC => Dd::square_f64(x[0]) - Dd::square_f64(x[1]),
            Inversion::Lorentz3DInv => (Dd::square_f64(x[0]) + Dd::square_f64(x[1])) - Dd::square_f64(x[2]),
        }
    }

    pub fn in_null_set(&self, x: &[f64]) -> bool {
        match self.inversion {
            Inversion::Reciprocal => x.contains(&0.0),
            _ => self.q_dd(x).is_zero(),
        }
    }

    /// `iota(x)` in double-double; `false` if `x` is in the null set.
    fn invert_dd(&self, x: &[f64], y: &mut [Dd]) -> bool {
        match self.inversion {
            Inversion::Reciprocal => {
                for (yi, &xi) in y.iter_mut().zip(x) {
                    if xi == 0.0 {
                        return false;
                    }
                    *yi = Dd::new(xi).recip();
                }
            }
            Inversion::IotaPlus | Inversion::IotaC | Inversion::Lorentz3DInv => {
                let q = self.q_dd(x);
                if q.is_zero() {
                    return false;
                }
                for (yi, &xi) in y.iter_mut().zip(x) {
                    *yi = Dd::new(xi) / q;
                }
                match self.inversion {
                    Inversion::IotaC => y[1] = -y[1],
                    Inversion::Lorentz3DInv => y[2] = -y[2],
                    _ => {}
                }
            }
        }
        true
    }

    /// `iota(x)` in plain binary64.
    pub fn invert(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut y = [Dd::ZERO; MAX_DIM];
        if !self.invert_dd(x, &mut y[..x.len()]) {
            return None;
        }
        Some(y[..x.len()].iter().map(|v| v.to_f64()).collect())
    }

    /// `|det d iota|` at `x`.
    pub fn inversion_jacobian(&self, x: &[f64]) -> f64 {
        match self.inversion {
            Inversion::Reciprocal => x.iter().map(|c| 1.0 / (c * c)).product(),
            _ => self.q_value(x).abs().powi(-(self.dim() as i32)),
        }
    }

    fn floor_lattice(&self, y: &[Dd], digit: &mut [i64]) -> Result<(), CfError> {
        for ((row, lo), k) in self.l_f64.iter().zip(&self.lower_dd).zip(digit.iter_mut()) {
            let mut acc = Dd::ZERO;
            for (l, yj) in row.iter().zip(y) {
                if *l != 0.0 {
                    acc = acc + yj.mul_f64(*l);
                }
            }
            *k = (acc - *lo).floor_i64().ok_or(CfError::DigitOverflow)?;
        }
        Ok(())
    }

    pub fn round_to_lattice(&self, x: &[f64]) -> Digit {
        let d = self.dim();
        let y: Vec<Dd> = x.iter().map(|&v| Dd::new(v)).collect();
        let mut k = vec![0i64; d];
        // a point beyond 2^62 lattice cells away saturates; callers never hit it
        if self.floor_lattice(&y, &mut k).is_err() {
            k.iter_mut().for_each(|v| *v = i64::MAX);
        }
        Digit(k)
    }

    /// One Gauss step in place: `x <- iota(x) - digit`, digit written to `digit`.
    pub fn step_in_place(&self, x: &mut [f64], digit: &mut [i64]) -> Result<(), CfError> {
        let d = self.dim();
        let mut y = [Dd::ZERO; MAX_DIM];
        let y = &mut y[..d];
        if !self.invert_dd(x, y) {
            return Err(CfError::NullSet);
        }
        if !y.iter().all(|v| v.is_finite()) {
            return Err(CfError::DigitOverflow);
        }
        self.floor_lattice(y, digit)?;
        for (i, row) in self.b_f64.iter().enumerate() {
            let mut offset = 0.0;
            for (b, &k) in row.iter().zip(digit.iter()) {
                if *b != 0.0 {
                    offset += b * k as f64;
                }
            }
            x[i] = (y[i] - Dd::new(offset)).to_f64();
        }
        Ok(())
    }

    pub fn gauss_step(&self, x: &[f64]) -> Result<(Digit, Vec<f64>), CfError> {
        self.check_dim(x.len())?;
        let mut img = x.to_vec();
        let mut k = vec![0i64; self.dim()];
        self.step_in_place(&mut img, &mut k)?;
        Ok((Digit(k), img))
    }

    /// Iterates the Gauss map until `T^n x = 0`, a null-set hit, or `max_n`
    /// digits. Numerical drift outside the domain aborts with an error.
    pub fn expand(&self, x: &[f64], max_n: usize) -> Result<DigitSequence, CfError> {
        Ok(self.orbit(x, max_n)?.0)
    }

    /// Like [`Self::expand`], also returning the orbit `x, Tx, ..., T^n x`.
    pub fn orbit(&self, x: &[f64], max_n: usize) -> Result<(DigitSequence, Vec<Vec<f64>>), CfError> {
        self.check_dim(x.len())?;
        if !self.in_domain(x) {
            return Err(CfError::DomainViolation(x.to_vec()));
        }
        let mut cur = x.to_vec();
        let mut orbit = vec![cur.clone()];
        let mut digits = Vec::new();
        let mut k = vec![0i64; self.dim()];
        let status = loop {
            let n = digits.len();
            if cur.iter().all(|&c| c == 0.0) {
                break ExpansionStatus::FiniteComplete(n);
            }
            if self.in_null_set(&cur) {
                break ExpansionStatus::HitNullNonInvertible(n);
            }
            if n >= max_n {
                break ExpansionStatus::TruncatedAtMax(n);
            }
            self.step_in_place(&mut cur, &mut k)?;
            let excess = self.domain_excess(&cur);
            if excess > DRIFT_TOL {
                return Err(CfError::NumericalDrift { step: n + 1, excess });
            }
            digits.push(Digit(k.clone()));
            orbit.push(cur.clone());
        };
        Ok((DigitSequence { digits, status }, orbit))
    }

    /// Convergents `c_n = iota(a_1 + iota(a_2 + ... + iota(a_n)))`, each
    /// evaluated backward from its last digit.
    pub fn assemble_convergents(&self, digits: &[Digit]) -> Result<Vec<Vec<f64>>, CfError> {
        if digits.is_empty() {
            return Err(CfError::EmptyDigits);
        }
        let points: Vec<Vec<f64>> = digits.iter().map(|d| self.digit_point(d)).collect();
        (1..=points.len())
            .map(|n| self.convergent_backward(&points[..n]))
            .collect()
    }

    // Evaluated in double-double: in the split-complex plane a large digit in
    // one idempotent direction swamps the other direction in binary64.
    fn convergent_backward(&self, points: &[Vec<f64>]) -> Result<Vec<f64>, CfError> {
        let n = points.len();
        let d = self.dim();
        let mut t: Vec<Dd> = points[n - 1].iter().map(|&v| Dd::new(v)).collect();
        let mut inv = vec![Dd::ZERO; d];
        for level in (0..n - 1).rev() {
            if !self.invert_dd_full(&t, &mut inv) {
                return Err(CfError::SingularTail(level + 2));
            }
            for ((ti, a), v) in t.iter_mut().zip(&points[level]).zip(&inv) {
                *ti = *v + Dd::new(*a);
            }
        }
        if !self.invert_dd_full(&t, &mut inv) {
            return Err(CfError::SingularTail(1));
        }
        Ok(inv.iter().map(|v| v.to_f64()).collect())
    }

    fn invert_dd_full(&self, x: &[Dd], y: &mut [Dd]) -> bool {
        match self.inversion {
            Inversion::Reciprocal => {
                for (yi, xi) in y.iter_mut().zip(x) {
                    if xi.is_zero() {
                        return false;
                    }
                    *yi = xi.recip();
                }
            }
            _ => {
                let mut q = x[0] * x[0] - x[1] * x[1];
                if self.inversion == Inversion::Lorentz3DInv {
                    q = x[0] * x[0] + x[1] * x[1] - x[2] * x[2];
                }
                if q.is_zero() {
                    return false;
                }
                for (yi, xi) in y.iter_mut().zip(x) {
                    *yi = *xi / q;
                }
                match self.inversion {
                    Inversion::IotaC => y[1] = -y[1],
                    Inversion::Lorentz3DInv => y[2] = -y[2],
                    _ => {}
                }
            }
        }
        y.iter().all(|v| v.is_finite())
    }

    /// Convergents through the three-term recursion `p_n = a_n p_{n-1} + p_{n-2}`
    /// (same for `q_n`) in the product algebra or in `R[j]`; `c_n = p_n / q_n`.
    /// `p_n, q_n` are kept in double-double since they outgrow 2^53 quickly.
    pub fn convergents_forward(&self, digits: &[Digit]) -> Result<Vec<Vec<f64>>, CfError> {
        if digits.is_empty() {
            return Err(CfError::EmptyDigits);
        }
        let d = self.dim();
        let split = match self.inversion {
            Inversion::Reciprocal => false,
            Inversion::IotaC => true,
            _ => return Err(CfError::NotAlgebraic),
        };
        let mut one = vec![Dd::ZERO; d];
        if split {
            one[0] = Dd::new(1.0);
        } else {
            one.fill(Dd::new(1.0));
        }
        let zero = vec![Dd::ZERO; d];
        let (mut p_prev, mut p) = (one.clone(), zero.clone());
        let (mut q_prev, mut q) = (zero, one);
        let mut out = Vec::with_capacity(digits.len());
        for (n, digit) in digits.iter().enumerate() {
            let a = self.digit_point(digit);
            let next = |cur: &[Dd], prev: &[Dd]| -> Vec<Dd> {
                let prod = if split {
                    split_mul(&a, cur)
                } else {
                    product_mul(&a, cur)
                };
                prod.iter().zip(prev).map(|(x, y)| *x + *y).collect()
            };
            let p_next = next(&p, &p_prev);
            let q_next = next(&q, &q_prev);
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            let c = if split { split_div(&p, &q) } else { product_div(&p, &q) };
            out.push(c.ok_or(CfError::SingularTail(n + 1))?);
        }
        Ok(out)
    }

    /// Conjugate of a lattice digit (`Phi(k1,k2) -> Phi(k2,k1)`), for the
    /// split-complex systems whose lattice is a `Phi`-image.
    pub fn conj_digit(&self, d: &Digit) -> Option<Digit> {
        match (self.space, self.diagonal.as_ref()) {
            (Space::SplitComplexPlane, Some(_)) => Some(Digit(vec![d.0[1], d.0[0]])),
            _ => None,
        }
    }

    /// Digit string with odd positions (1-based) conjugated; the map between
    /// `iota_+` and `iota_c` expansions of the same point.
    pub fn conjugate_odd_positions(&self, digits: &[Digit]) -> Option<Vec<Digit>> {
        digits
            .iter()
            .enumerate()
            .map(|(i, d)| {
                if i % 2 == 0 {
                    self.conj_digit(d)
                } else {
                    Some(d.clone())
                }
            })
            .collect()
    }

    /// The exact-rational analogue of [`Self::gauss_step`].
    pub fn gauss_step_exact(&self, x: &[BigRational]) -> Result<(Digit, Vec<BigRational>), CfError> {
        self.check_dim(x.len())?;
        exact::step(self, x)
    }

    /// Exact expansion of a rational point (terminates for points of `Q^d`
    /// whose coordinates have matching expansion lengths).
    pub fn expand_exact(&self, x: &[BigRational], max_n: usize) -> Result<DigitSequence, CfError> {
        self.check_dim(x.len())?;
        exact::expand(self, x, max_n)
    }

    pub fn in_domain_exact(&self, x: &[BigRational]) -> bool {
        x.len() == self.dim() && exact::in_domain(self, x)
    }

    pub fn cylinder_of(&self, digits: &[Digit]) -> Result<Cylinder, CfError> {
        cylinder::cylinder_of(self, digits)
    }

    /// Whether `T^{|s|}(C_s)` is the whole domain (up to endpoints), with the image box.
    pub fn cylinder_image_full(&self, digits: &[Digit]) -> Result<(bool, Vec<Interval>), CfError> {
        cylinder::cylinder_image(self, digits)
    }

    /// Domain of the diagonal factors as exact intervals.
    pub fn diagonal_domain(&self) -> Result<Vec<Interval>, CfError> {
        cylinder::diagonal_domain(self)
    }
}

fn product_mul(a: &[f64], b: &[Dd]) -> Vec<Dd> {
    a.iter().zip(b).map(|(x, y)| y.mul_f64(*x)).collect()
}

fn product_div(a: &[Dd], b: &[Dd]) -> Option<Vec<f64>> {
    if b.iter().any(|v| v.is_zero()) {
        return None;
    }
    Some(a.iter().zip(b).map(|(x, y)| (*x / *y).to_f64()).collect())
}

fn split_mul(a: &[f64], b: &[Dd]) -> Vec<Dd> {
    vec![
        b[0].mul_f64(a[0]) + b[1].mul_f64(a[1]),
        b[1].mul_f64(a[0]) + b[0].mul_f64(a[1]),
    ]
}

fn split_div(a: &[Dd], b: &[Dd]) -> Option<Vec<f64>> {
    let q = b[0] * b[0] - b[1] * b[1];
    if q.is_zero() {
        return None;
    }
    let n1 = a[0] * b[0] - a[1] * b[1];
    let n2 = a[1] * b[0] - a[0] * b[1];
    Some(vec![(n1 / q).to_f64(), (n2 / q).to_f64()])
}
