//! Product algebra `R^d`, split-complex numbers `R[j]`, Minkowski quadratic
//! forms, and the two fixed isomorphisms used by the catalog: `Phi: R^2 -> R[j]`
//! and the Lorentzian identification of `R^{2,1}` with symmetric 2x2 matrices.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("point lies on the null cone (Q = 0)")]
    NullCone,
    #[error("point {0:?} is not invertible in the product algebra")]
    NotInvertible(Vec<f64>),
    #[error("signature ({p},{q}) does not match {len} coordinates")]
    SignatureMismatch { p: usize, q: usize, len: usize },
    #[error("degenerate normal-form point: l = r = {0}")]
    DegeneratePoint(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// A point of the product algebra `R^d` (coordinate-wise `+` and `*`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductPoint {
    pub coords: Vec<f64>,
}

impl ProductPoint {
    pub fn new(coords: Vec<f64>) -> Self {
        assert!(!coords.is_empty(), "product algebra needs d >= 1");
        ProductPoint { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.coords.iter().all(|&c| c != 0.0)
    }

    pub fn inverse(&self) -> Result<ProductPoint, AlgebraError> {
        if !self.is_invertible() {
            return Err(AlgebraError::NotInvertible(self.coords.clone()));
        }
        Ok(ProductPoint::new(self.coords.iter().map(|c| 1.0 / c).collect()))
    }
}

impl Add for &ProductPoint {
    type Output = ProductPoint;
    fn add(self, rhs: &ProductPoint) -> ProductPoint {
        assert_eq!(self.dim(), rhs.dim());
        ProductPoint::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect())
    }
}

impl Mul for &ProductPoint {
    type Output = ProductPoint;
    fn mul(self, rhs: &ProductPoint) -> ProductPoint {
        assert_eq!(self.dim(), rhs.dim());
        ProductPoint::new(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a * b).collect())
    }
}

/// `x1 + x2 j` with `j^2 = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct SplitComplex {
    pub x1: f64,
    pub x2: f64,
}

impl SplitComplex {
    pub const ONE: SplitComplex = SplitComplex { x1: 1.0, x2: 0.0 };

    pub fn new(x1: f64, x2: f64) -> Self {
        SplitComplex { x1, x2 }
    }

    pub fn conj(self) -> Self {
        SplitComplex::new(self.x1, -self.x2)
    }

    /// `Q(x) = x1^2 - x2^2`, the real part of `x * conj(x)`.
    pub fn q(self) -> f64 {
        self.x1 * self.x1 - self.x2 * self.x2
    }

    pub fn inverse(self) -> Result<Self, AlgebraError> {
        iota_c(self)
    }

    pub fn scale(self, c: f64) -> Self {
        SplitComplex::new(c * self.x1, c * self.x2)
    }
}

impl Add for SplitComplex {
    type Output = SplitComplex;
    fn add(self, o: SplitComplex) -> SplitComplex {
        SplitComplex::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for SplitComplex {
    type Output = SplitComplex;
    fn sub(self, o: SplitComplex) -> SplitComplex {
        SplitComplex::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Neg for SplitComplex {
    type Output = SplitComplex;
    fn neg(self) -> SplitComplex {
        SplitComplex::new(-self.x1, -self.x2)
    }
}

impl Mul for SplitComplex {
    type Output = SplitComplex;
    fn mul(self, o: SplitComplex) -> SplitComplex {
        SplitComplex::new(self.x1 * o.x1 + self.x2 * o.x2, self.x1 * o.x2 + self.x2 * o.x1)
    }
}

/// A vector of `R^{p,q}`; the first `p` coordinates are spacelike.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkVec {
    coords: Vec<f64>,
    signature: (usize, usize),
}

impl MinkVec {
    pub fn new(coords: Vec<f64>, signature: (usize, usize)) -> Result<Self, AlgebraError> {
        let (p, q) = signature;
        if p + q != coords.len() || coords.is_empty() {
            return Err(AlgebraError::SignatureMismatch {
                p,
                q,
                len: coords.len(),
            });
        }
        Ok(MinkVec { coords, signature })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn signature(&self) -> (usize, usize) {
        self.signature
    }

    pub fn scale(&self, c: f64) -> MinkVec {
        MinkVec {
            coords: self.coords.iter().map(|x| c * x).collect(),
            signature: self.signature,
        }
    }

    pub fn sub(&self, other: &MinkVec) -> MinkVec {
        assert_eq!(self.signature, other.signature);
        MinkVec {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
            signature: self.signature,
        }
    }

    /// Euclidean norms of the spacelike and timelike coordinate groups.
    pub fn group_norms(&self) -> (f64, f64) {
        let p = self.signature.0;
        let l = self.coords[..p].iter().map(|x| x * x).sum::<f64>().sqrt();
        let r = self.coords[p..].iter().map(|x| x * x).sum::<f64>().sqrt();
        (l, r)
    }
}

/// Bilinear form `<x, y>_{p,q}`.
pub fn inner(x: &MinkVec, y: &MinkVec) -> f64 {
    assert_eq!(x.signature, y.signature);
    let p = x.signature.0;
    x.coords
        .iter()
        .zip(&y.coords)
        .enumerate()
        .map(|(i, (a, b))| if i < p { a * b } else { -a * b })
        .sum()
}

pub fn q_form(x: &MinkVec) -> f64 {
    inner(x, x)
}

/// `x / Q(x)`.
pub fn iota_plus(x: &MinkVec) -> Result<MinkVec, AlgebraError> {
    let q = q_form(x);
    if q == 0.0 {
        return Err(AlgebraError::NullCone);
    }
    Ok(x.scale(1.0 / q))
}

/// `O(x) / Q(x)` for the diagonal involution `O` that negates the coordinates
/// flagged in `negate`. All-false `negate` gives `iota_plus`;
/// negating the last coordinate of `R^{1,1}` gives `iota_c`, and of `R^{2,1}`
/// the Lorentzian inversion used on symmetric matrices.
pub fn iota_reflected(x: &MinkVec, negate: &[bool]) -> Result<MinkVec, AlgebraError> {
    assert_eq!(negate.len(), x.coords.len());
    let q = q_form(x);
    if q == 0.0 {
        return Err(AlgebraError::NullCone);
    }
    let coords = x
        .coords
        .iter()
        .zip(negate)
        .map(|(c, &n)| if n { -c / q } else { c / q })
        .collect();
    Ok(MinkVec {
        coords,
        signature: x.signature,
    })
}

/// `conj(x) / Q(x)`, which is `1/x` in `R[j]`.
pub fn iota_c(x: SplitComplex) -> Result<SplitComplex, AlgebraError> {
    let q = x.q();
    if q == 0.0 {
        return Err(AlgebraError::NullCone);
    }
    Ok(SplitComplex::new(x.x1 / q, -x.x2 / q))
}

/// `Phi(a, b) = a (1+j)/2 + b (1-j)/2`.
pub fn phi(a: f64, b: f64) -> SplitComplex {
    SplitComplex::new(0.5 * (a + b), 0.5 * (a - b))
}

pub fn phi_inv(x: SplitComplex) -> (f64, f64) {
    (x.x1 + x.x2, x.x1 - x.x2)
}

/// Real symmetric matrix `[[a, b], [b, c]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sym2Matrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Sym2Matrix {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Sym2Matrix { a, b, c }
    }

    pub fn det(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }
}

/// `[[a, b], [b, c]] -> ((a-c)/2, b, (a+c)/2)` in `R^{2,1}`.
pub fn sym2_to_vec(m: Sym2Matrix) -> MinkVec {
    MinkVec {
        coords: vec![0.5 * (m.a - m.c), m.b, 0.5 * (m.a + m.c)],
        signature: (2, 1),
    }
}

pub fn vec_to_sym2(x: &MinkVec) -> Result<Sym2Matrix, AlgebraError> {
    if x.signature != (2, 1) {
        let (p, q) = x.signature;
        return Err(AlgebraError::SignatureMismatch {
            p,
            q,
            len: x.coords.len(),
        });
    }
    let [x1, x2, x3] = [x.coords[0], x.coords[1], x.coords[2]];
    Ok(Sym2Matrix::new(x1 + x3, x2, -x1 + x3))
}

/// Singular values of the differential of `x -> x/Q(x)` at the normal-form
/// point `(l, 0, r, 0)` of `R^{2,2}`: `((l+r)^-2, (l-r)^-2, |l^2-r^2|^-1)`.
/// The first entry is always the smallest.
pub fn iota_singular_values(l: f64, r: f64) -> Result<[f64; 3], AlgebraError> {
    if !(l >= 0.0 && r >= 0.0) {
        return Err(AlgebraError::InvalidParameter(format!(
            "normal form needs l, r >= 0 (got l={l}, r={r})"
        )));
    }
    if l == r {
        return Err(AlgebraError::DegeneratePoint(l));
    }
    Ok([(l + r).powi(-2), (l - r).powi(-2), (l * l - r * r).abs().recip()])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn mv(c: &[f64], sig: (usize, usize)) -> MinkVec {
        MinkVec::new(c.to_vec(), sig).unwrap()
    }

    #[test]
    fn q_form_examples() {
        assert_eq!(q_form(&mv(&[3.0, 1.0], (1, 1))), 8.0);
        assert_eq!(q_form(&mv(&[1.0, 1.0], (1, 1))), 0.0);
        assert_eq!(q_form(&mv(&[1.0, 2.0, -2.0], (2, 1))), 1.0);
    }

    #[test]
    fn signature_must_match_length() {
        assert!(matches!(
            MinkVec::new(vec![1.0, 2.0], (2, 1)),
            Err(AlgebraError::SignatureMismatch { .. })
        ));
    }

    #[test]
    fn iota_plus_examples() {
        let x = mv(&[3.0, 1.0], (1, 1));
        let y = iota_plus(&x).unwrap();
        assert_eq!(y.coords(), &[3.0 / 8.0, 1.0 / 8.0]);
        assert_eq!(iota_plus(&y).unwrap().coords(), &[3.0, 1.0]);
        assert_eq!(q_form(&y), 1.0 / 8.0);
        assert_eq!(iota_plus(&mv(&[0.2, 0.2], (1, 1))), Err(AlgebraError::NullCone));
    }

    #[test]
    fn iota_c_examples() {
        // oracle: Phi o (coordinate-wise reciprocal) o Phi^-1
        let x = SplitComplex::new(0.5, -0.2);
        let (a, b) = phi_inv(x);
        let oracle = phi(1.0 / a, 1.0 / b);
        let got = iota_c(x).unwrap();
        assert_relative_eq!(got.x1, oracle.x1, epsilon = 1e-14);
        assert_relative_eq!(got.x2, oracle.x2, epsilon = 1e-14);
        assert_relative_eq!(got.x1, 50.0 / 21.0, epsilon = 1e-14);
        assert_relative_eq!(got.x2, 20.0 / 21.0, epsilon = 1e-14);
        assert_eq!(iota_c(SplitComplex::ONE).unwrap(), SplitComplex::ONE);
        assert_eq!(iota_c(SplitComplex::new(0.3, 0.3)), Err(AlgebraError::NullCone));
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(1.0, 0.0), SplitComplex::new(0.5, 0.5));
        assert_eq!(phi(2.0, 3.0).q(), 6.0);
        assert_eq!(phi(2.0, 3.0) * phi(4.0, 5.0), phi(8.0, 15.0));
        assert_eq!(phi(2.0, 3.0).conj(), phi(3.0, 2.0));
    }

    #[test]
    fn sym2_examples() {
        let e1 = vec_to_sym2(&mv(&[1.0, 0.0, 0.0], (2, 1))).unwrap();
        assert_eq!(e1, Sym2Matrix::new(1.0, 0.0, -1.0));
        let v = mv(&[0.2, -0.7, 0.4], (2, 1));
        let back = sym2_to_vec(vec_to_sym2(&v).unwrap());
        for (a, b) in back.coords().iter().zip(v.coords()) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }
        let m = Sym2Matrix::new(1.0, 2.0, 3.0);
        assert_eq!(-m.det(), 1.0);
        let v = sym2_to_vec(m);
        assert_eq!(v.coords(), &[-1.0, 2.0, 2.0]);
        assert_eq!(q_form(&v), 1.0);
        assert!(vec_to_sym2(&mv(&[1.0, 0.0], (1, 1))).is_err());
    }

    #[test]
    fn lorentz_inversion_is_the_matrix_inverse() {
        let x = mv(&[0.3, -0.1, 0.2], (2, 1));
        let y = iota_reflected(&x, &[false, false, true]).unwrap();
        let m = vec_to_sym2(&y).unwrap();
        let mx = vec_to_sym2(&x).unwrap();
        let p11 = m.a * mx.a + m.b * mx.b;
        let p12 = m.a * mx.b + m.b * mx.c;
        let p22 = m.b * mx.b + m.c * mx.c;
        assert_relative_eq!(p11, 1.0, epsilon = 1e-12);
        assert_relative_eq!(p12, 0.0, epsilon = 1e-12);
        assert_relative_eq!(p22, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_value_examples() {
        let s = iota_singular_values(0.3, 0.2).unwrap();
        assert_relative_eq!(s[0], 4.0, epsilon = 1e-12);
        assert_relative_eq!(s[1], 100.0, epsilon = 1e-9);
        assert_relative_eq!(s[2], 20.0, epsilon = 1e-11);
        assert_eq!(iota_singular_values(1.0, 1.0), Err(AlgebraError::DegeneratePoint(1.0)));
        assert!(iota_singular_values(-0.1, 0.2).is_err());
    }

    #[test]
    fn product_point_inverse() {
        let x = ProductPoint::new(vec![2.0, -4.0]);
        assert_eq!(x.inverse().unwrap().coords, vec![0.5, -0.25]);
        assert_eq!(&x * &x.inverse().unwrap(), ProductPoint::new(vec![1.0, 1.0]));
        assert!(ProductPoint::new(vec![1.0, 0.0]).inverse().is_err());
    }

    fn off_cone() -> impl Strategy<Value = (f64, f64)> {
        (-3.0f64..3.0, -3.0f64..3.0).prop_filter("off null cone", |(a, b)| (a * a - b * b).abs() > 1e-6)
    }

    proptest! {
        #[test]
        fn iota_plus_inverts_q_and_is_an_involution((a, b) in off_cone()) {
            let x = mv(&[a, b], (1, 1));
            let y = iota_plus(&x).unwrap();
            prop_assert!((q_form(&y) * q_form(&x) - 1.0).abs() <= 1e-10);
            let z = iota_plus(&y).unwrap();
            for (u, v) in z.coords().iter().zip(x.coords()) {
                prop_assert!((u - v).abs() <= 1e-9 * (1.0 + v.abs()));
            }
        }

        #[test]
        fn product_identity_holds_for_both_inversions((a, b) in off_cone(), (c, d) in off_cone()) {
            let x = mv(&[a, b], (1, 1));
            let y = mv(&[c, d], (1, 1));
            prop_assume!(q_form(&x).abs() > 1e-4 && q_form(&y).abs() > 1e-4);
            let lhs = q_form(&x.sub(&y));
            for negate in [[false, false], [false, true]] {
                let ix = iota_reflected(&x, &negate).unwrap();
                let iy = iota_reflected(&y, &negate).unwrap();
                let rhs = q_form(&x) * q_form(&y) * q_form(&ix.sub(&iy));
                prop_assert!((lhs - rhs).abs() <= 1e-8 * lhs.abs().max(1.0), "lhs={lhs} rhs={rhs}");
            }
        }

        #[test]
        fn phi_is_an_algebra_isomorphism(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, d in -5.0f64..5.0) {
            let s = phi(a, b) + phi(c, d);
            let t = phi(a + c, b + d);
            prop_assert!((s.x1 - t.x1).abs() <= 1e-12 && (s.x2 - t.x2).abs() <= 1e-12);
            let p = phi(a, b) * phi(c, d);
            let q = phi(a * c, b * d);
            prop_assert!((p.x1 - q.x1).abs() <= 1e-12 * (1.0 + q.x1.abs()));
            prop_assert!((p.x2 - q.x2).abs() <= 1e-12 * (1.0 + q.x2.abs()));
            prop_assert_eq!(phi(a, b).conj(), phi(b, a));
            let (u, v) = phi_inv(phi(a, b));
            prop_assert!((u - a).abs() <= 1e-12 && (v - b).abs() <= 1e-12);
        }
    }
}
