//! Exact cylinders of product-type systems.
//!
//! In diagonal coordinates each factor is `t -> 1/t - s*m` on `K = [lo, lo+s)`,
//! so a cylinder is a box of rational intervals:
//! `C(m_1..m_n) = K ∩ 1/(s*m_1 + C(m_2..m_n))`, and the image under `T^n` is
//! obtained by pushing `K` forward one digit at a time.

use std::cmp::Ordering;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use super::{CfError, CfSystem, Digit};
use crate::numeric::{big, ratio_to_f64};

/// Interval with rational endpoints; `None` is `-inf` (lower) or `+inf` (upper).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Interval {
    pub lo: Option<BigRational>,
    pub lo_closed: bool,
    pub hi: Option<BigRational>,
    pub hi_closed: bool,
}

impl Interval {
    pub fn half_open(lo: BigRational, hi: BigRational) -> Self {
        Interval {
            lo: Some(lo),
            lo_closed: true,
            hi: Some(hi),
            hi_closed: false,
        }
    }

    fn has_interior(&self) -> bool {
        match (&self.lo, &self.hi) {
            (Some(a), Some(b)) => a < b,
            _ => true,
        }
    }

    pub fn contains(&self, t: &BigRational) -> bool {
        let above = match &self.lo {
            None => true,
            Some(a) => t > a || (self.lo_closed && t == a),
        };
        let below = match &self.hi {
            None => true,
            Some(b) => t < b || (self.hi_closed && t == b),
        };
        above && below
    }

    pub fn contains_f64(&self, t: f64) -> bool {
        let lo = self.lo.as_ref().map_or(f64::NEG_INFINITY, ratio_to_f64);
        let hi = self.hi.as_ref().map_or(f64::INFINITY, ratio_to_f64);
        (t > lo || (self.lo_closed && t == lo)) && (t < hi || (self.hi_closed && t == hi))
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.as_ref().map_or(f64::NEG_INFINITY, ratio_to_f64)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.as_ref().map_or(f64::INFINITY, ratio_to_f64)
    }

    /// Same endpoints, ignoring whether they are included.
    pub fn same_closure(&self, other: &Interval) -> bool {
        self.lo == other.lo && self.hi == other.hi
    }

    fn intersect(&self, other: &Interval) -> Interval {
        let (lo, lo_closed) = match (&self.lo, &other.lo) {
            (None, _) => (other.lo.clone(), other.lo_closed),
            (_, None) => (self.lo.clone(), self.lo_closed),
            (Some(a), Some(b)) => match a.cmp(b) {
                Ordering::Greater => (self.lo.clone(), self.lo_closed),
                Ordering::Less => (other.lo.clone(), other.lo_closed),
                Ordering::Equal => (self.lo.clone(), self.lo_closed && other.lo_closed),
            },
        };
        let (hi, hi_closed) = match (&self.hi, &other.hi) {
            (None, _) => (other.hi.clone(), other.hi_closed),
            (_, None) => (self.hi.clone(), self.hi_closed),
            (Some(a), Some(b)) => match a.cmp(b) {
                Ordering::Less => (self.hi.clone(), self.hi_closed),
                Ordering::Greater => (other.hi.clone(), other.hi_closed),
                Ordering::Equal => (self.hi.clone(), self.hi_closed && other.hi_closed),
            },
        };
        Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }

    fn translate(&self, by: &BigRational) -> Interval {
        Interval {
            lo: self.lo.as_ref().map(|a| a + by),
            lo_closed: self.lo_closed,
            hi: self.hi.as_ref().map(|b| b + by),
            hi_closed: self.hi_closed,
        }
    }

    /// Image under `t -> 1/t` (the point 0 is dropped); one or two pieces.
    fn reciprocal(&self) -> Vec<Interval> {
        let zero = BigRational::zero();
        let lo_neg = self.lo.as_ref().is_none_or(|a| *a < zero);
        let hi_pos = self.hi.as_ref().is_none_or(|b| *b > zero);
        if lo_neg && hi_pos {
            let neg = Interval {
                lo: self.lo.clone(),
                lo_closed: self.lo_closed,
                hi: Some(zero.clone()),
                hi_closed: false,
            };
            let pos = Interval {
                lo: Some(zero),
                lo_closed: false,
                hi: self.hi.clone(),
                hi_closed: self.hi_closed,
            };
            return vec![neg.reciprocal_one_sided(), pos.reciprocal_one_sided()];
        }
        vec![self.reciprocal_one_sided()]
    }

    /// For an interval on one side of 0 (0 possibly an endpoint): `1/hi` becomes
    /// the lower end and `1/lo` the upper end, with `1/inf = 0` (excluded) and
    /// `1/0 = inf`.
    fn reciprocal_one_sided(&self) -> Interval {
        let flip = |e: &Option<BigRational>, closed: bool| -> (Option<BigRational>, bool) {
            match e {
                None => (Some(BigRational::zero()), false),
                Some(v) if v.is_zero() => (None, false),
                Some(v) => (Some(v.recip()), closed),
            }
        };
        let (lo, lo_closed) = flip(&self.hi, self.hi_closed);
        let (hi, hi_closed) = flip(&self.lo, self.lo_closed);
        Interval {
            lo,
            lo_closed,
            hi,
            hi_closed,
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let lo = self.lo.as_ref().map_or("-inf".to_string(), |v| v.to_string());
        let hi = self.hi.as_ref().map_or("inf".to_string(), |v| v.to_string());
        let open = if self.lo_closed { '[' } else { '(' };
        let close = if self.hi_closed { ']' } else { ')' };
        write!(f, "{open}{lo}, {hi}{close}")
    }
}

/// A cylinder set as a box in the system's diagonal coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cylinder {
    /// The digits as given (lattice coordinates).
    pub digits: Vec<Digit>,
    pub diag_box: Vec<Interval>,
    /// `T^n(C)` in diagonal coordinates.
    pub image_box: Vec<Interval>,
    pub domain_box: Vec<Interval>,
}

impl Cylinder {
    pub fn is_full(&self) -> bool {
        self.image_box
            .iter()
            .zip(&self.domain_box)
            .all(|(a, b)| a.same_closure(b))
    }

    /// Corners of the cylinder mapped back to space coordinates (finite boxes only),
    /// in the order (lo,lo), (hi,lo), (hi,hi), (lo,hi) for two factors.
    pub fn space_corners(&self, sys: &CfSystem) -> Option<Vec<Vec<f64>>> {
        let diag = sys.diagonal()?;
        let d = self.diag_box.len();
        let mut corners = Vec::new();
        let order: Vec<usize> = if d == 2 {
            vec![0, 1, 3, 2]
        } else {
            (0..1 << d).collect()
        };
        for mask in order {
            let t: Vec<f64> = (0..d)
                .map(|i| {
                    let iv = &self.diag_box[i];
                    if mask >> i & 1 == 0 {
                        iv.lo_f64()
                    } else {
                        iv.hi_f64()
                    }
                })
                .collect();
            if t.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let x = diag
                .from_diag
                .iter()
                .map(|row| row.iter().zip(&t).map(|(m, v)| ratio_to_f64(&big(m)) * v).sum())
                .collect();
            corners.push(x);
        }
        Some(corners)
    }

    pub fn contains_exact(&self, sys: &CfSystem, x: &[BigRational]) -> bool {
        let Some(diag) = sys.diagonal() else { return false };
        diag.to_diag.iter().zip(&self.diag_box).all(|(row, iv)| {
            let t: BigRational = row.iter().zip(x).map(|(m, v)| big(m) * v).sum();
            iv.contains(&t)
        })
    }

    pub fn contains(&self, sys: &CfSystem, x: &[f64]) -> bool {
        let Some(diag) = sys.diagonal() else { return false };
        diag.to_diag.iter().zip(&self.diag_box).all(|(row, iv)| {
            let t: f64 = row.iter().zip(x).map(|(m, v)| ratio_to_f64(&big(m)) * v).sum();
            iv.contains_f64(t)
        })
    }
}

pub(super) fn diagonal_domain(sys: &CfSystem) -> Result<Vec<Interval>, CfError> {
    let diag = sys.diagonal().ok_or(CfError::NotProductType)?;
    Ok(diag
        .lower
        .iter()
        .zip(&diag.step)
        .map(|(lo, s)| {
            let lo = big(lo);
            let hi = &lo + BigRational::from_integer((*s).into());
            Interval::half_open(lo, hi)
        })
        .collect())
}

fn single(pieces: Vec<Interval>) -> Result<Interval, CfError> {
    let mut kept: Vec<Interval> = pieces.into_iter().filter(Interval::has_interior).collect();
    match kept.len() {
        0 => Err(CfError::EmptyCylinder),
        1 => Ok(kept.pop().unwrap()),
        _ => Err(CfError::SplitCylinder),
    }
}

struct Prepared<'a> {
    diag: &'a super::DiagonalForm,
    working: Vec<Digit>,
    domain: Vec<Interval>,
}

fn prepare<'a>(sys: &'a CfSystem, digits: &[Digit]) -> Result<Prepared<'a>, CfError> {
    let diag = sys.diagonal().ok_or(CfError::NotProductType)?;
    if digits.is_empty() {
        return Err(CfError::EmptyDigits);
    }
    if let Some(bad) = digits.iter().find(|d| d.0.len() != sys.dim()) {
        return Err(CfError::DimensionMismatch {
            expected: sys.dim(),
            got: bad.0.len(),
        });
    }
    let working: Vec<Digit> = if diag.conjugating {
        sys.conjugate_odd_positions(digits).ok_or(CfError::NotProductType)?
    } else {
        digits.to_vec()
    };
    Ok(Prepared {
        diag,
        working,
        domain: diagonal_domain(sys)?,
    })
}

impl Prepared<'_> {
    fn shifts(&self, i: usize) -> Vec<BigRational> {
        let s = BigRational::from_integer(self.diag.step[i].into());
        self.working
            .iter()
            .map(|d| &s * BigRational::from_integer(d.0[i].into()))
            .collect()
    }

    fn pull_back(&self, i: usize) -> Result<Interval, CfError> {
        let k = &self.domain[i];
        let mut c = k.clone();
        for shift in self.shifts(i).iter().rev() {
            let pieces = c.translate(shift).reciprocal();
            c = single(pieces.iter().map(|p| k.intersect(p)).collect())?;
        }
        Ok(c)
    }

    fn push_forward(&self, i: usize) -> Result<Interval, CfError> {
        let k = &self.domain[i];
        let mut e = k.clone();
        for shift in &self.shifts(i) {
            let target = k.translate(shift);
            let pieces = e.reciprocal();
            let hit = single(pieces.iter().map(|p| target.intersect(p)).collect())?;
            e = hit.translate(&-shift.clone());
        }
        Ok(e)
    }

    fn image(&self) -> Result<Vec<Interval>, CfError> {
        let mut image = (0..self.domain.len())
            .map(|i| self.push_forward(i))
            .collect::<Result<Vec<_>, _>>()?;
        if self.diag.conjugating && self.working.len() % 2 == 1 {
            image.swap(0, 1);
        }
        Ok(image)
    }
}

pub(super) fn cylinder_of(sys: &CfSystem, digits: &[Digit]) -> Result<Cylinder, CfError> {
    let prep = prepare(sys, digits)?;
    let diag_box = (0..sys.dim())
        .map(|i| prep.pull_back(i))
        .collect::<Result<Vec<_>, _>>()?;
    let image_box = prep.image()?;
    Ok(Cylinder {
        digits: digits.to_vec(),
        diag_box,
        image_box,
        domain_box: prep.domain,
    })
}

/// `T^n` image of a cylinder without computing the cylinder itself.
pub(super) fn cylinder_image(sys: &CfSystem, digits: &[Digit]) -> Result<(bool, Vec<Interval>), CfError> {
    let prep = prepare(sys, digits)?;
    let image = prep.image()?;
    let full = image.iter().zip(&prep.domain).all(|(a, b)| a.same_closure(b));
    Ok((full, image))
}
