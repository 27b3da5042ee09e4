//! Gauss steps over exact rationals.

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::{CfError, CfSystem, Digit, DigitSequence, ExpansionStatus, FaceConvention, Inversion};
use crate::numeric::big;

fn q_form(sys: &CfSystem, x: &[BigRational]) -> BigRational {
    match sys.inversion() {
        Inversion::Reciprocal => x
            .iter()
            .cloned()
            .fold(BigRational::from_integer(1.into()), |a, b| a * b),
        Inversion::IotaPlus | Inversion::IotaC => &x[0] * &x[0] - &x[1] * &x[1],
        Inversion::Lorentz3DInv => &x[0] * &x[0] + &x[1] * &x[1] - &x[2] * &x[2],
    }
}

pub(super) fn in_null_set(sys: &CfSystem, x: &[BigRational]) -> bool {
    match sys.inversion() {
        Inversion::Reciprocal => x.iter().any(Zero::is_zero),
        _ => q_form(sys, x).is_zero(),
    }
}

pub(super) fn invert(sys: &CfSystem, x: &[BigRational]) -> Option<Vec<BigRational>> {
    if in_null_set(sys, x) {
        return None;
    }
    let mut y: Vec<BigRational> = match sys.inversion() {
        Inversion::Reciprocal => return Some(x.iter().map(|c| c.recip()).collect()),
        _ => {
            let q = q_form(sys, x);
            x.iter().map(|c| c / &q).collect()
        }
    };
    match sys.inversion() {
        Inversion::IotaC => y[1] = -y[1].clone(),
        Inversion::Lorentz3DInv => y[2] = -y[2].clone(),
        _ => {}
    }
    Some(y)
}

fn box_coords(sys: &CfSystem, x: &[BigRational]) -> Vec<BigRational> {
    sys.to_lattice()
        .iter()
        .zip(sys.domain_lower())
        .map(|(row, lo)| {
            let s: BigRational = row.iter().zip(x).map(|(l, xi)| big(l) * xi).sum();
            s - big(lo)
        })
        .collect()
}

pub(super) fn in_domain(sys: &CfSystem, x: &[BigRational]) -> bool {
    let zero = BigRational::zero();
    let one = BigRational::from_integer(1.into());
    box_coords(sys, x).iter().all(|v| {
        *v >= zero
            && match sys.faces() {
                FaceConvention::HalfOpen => *v < one,
                FaceConvention::Closed => *v <= one,
            }
    })
}

pub(super) fn step(sys: &CfSystem, x: &[BigRational]) -> Result<(Digit, Vec<BigRational>), CfError> {
    let y = invert(sys, x).ok_or(CfError::NullSet)?;
    let k = box_coords(sys, &y)
        .iter()
        .map(|u| u.numer().div_floor(u.denom()).to_i64().ok_or(CfError::DigitOverflow))
        .collect::<Result<Vec<i64>, _>>()?;
    let digit = Digit(k);
    let p = sys.digit_point_exact(&digit);
    let image = y.iter().zip(&p).map(|(a, b)| a - b).collect();
    Ok((digit, image))
}

pub(super) fn expand(sys: &CfSystem, x: &[BigRational], max_n: usize) -> Result<DigitSequence, CfError> {
    if !in_domain(sys, x) {
        return Err(CfError::DomainViolation(
            x.iter().map(crate::numeric::ratio_to_f64).collect(),
        ));
    }
    let mut cur = x.to_vec();
    let mut digits = Vec::new();
    let status = loop {
        let n = digits.len();
        if cur.iter().all(Zero::is_zero) {
            break ExpansionStatus::FiniteComplete(n);
        }
        if in_null_set(sys, &cur) {
            break ExpansionStatus::HitNullNonInvertible(n);
        }
        if n >= max_n {
            break ExpansionStatus::TruncatedAtMax(n);
        }
        let (d, img) = step(sys, &cur)?;
        digits.push(d);
        cur = img;
    };
    Ok(DigitSequence { digits, status })
}
