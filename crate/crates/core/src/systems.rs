//! Catalog of concrete continued-fraction systems.
//!
//! | name | space | inversion | lattice | domain |
//! |---|---|---|---|---|
//! | `regular` | R | 1/x | Z | [0,1) |
//! | `alpha:a` | R | 1/x | Z | [0,1) - a |
//! | `product:d` | R^d | coordinatewise 1/x | Z^d | [0,1)^d |
//! | `rect:a1,..,ad` | R^d | coordinatewise 1/x | Z^d | [0,1)^d - a |
//! | `even:d` | R^d | coordinatewise 1/x | (2Z)^d | [-1,1)^d |
//! | `diamond-c` | R[j] | conj(x)/Q | Phi(Z^2) | Phi([0,1)^2) |
//! | `diamond-plus` | R^{1,1} | x/Q | Phi(Z^2) | Phi([0,1)^2) |
//! | `alpha-diamond:a1,a2` | R[j] | conj(x)/Q | Phi(Z^2) | Phi([0,1)^2) - a |
//! | `square` | R^{1,1} | x/Q | Z^2 | [-1/2,1/2)^2 |
//! | `big-diamond` | R[j] | conj(x)/Q | Phi((2Z)^2) | Phi([-1,1)^2) |
//! | `lorentz3d` | R^{2,1} | (x1,x2,-x3)/Q | Sym2(Z) | entries in [-1/2,1/2] |
//!
//! The shifted systems use the rectangular convention `K = [0,1)^d - a`. The
//! other common convention `[a-1, a)` is the same system with `a -> 1-a`.
//!
//! Diamond domains are half-open in `Phi`-coordinates. The `lorentz3d` domain
//! reports membership with closed faces; its rounding is still
//! `floor(entry + 1/2)` per matrix entry.

use std::fmt;
use std::str::FromStr;

use num_rational::{BigRational, Rational64};
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::cf_core::{CfSystem, DiagonalForm, FaceConvention, Inversion, Space, SystemParts, MAX_DIM};
use crate::numeric::{big, parse_rational64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("unknown system name '{0}'")]
    UnknownSystem(String),
    #[error("systems '{0}' and '{1}' are not a registered conjugate pair")]
    NotConjugate(String, String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum SystemId {
    Regular1D,
    Alpha1D(Rational64),
    ProductRegular(usize),
    RectangularAlpha(Vec<Rational64>),
    /// Product of even continued fractions (`t -> 1/t - 2k` on `[-1,1)`).
    ProductEven(usize),
    LittleDiamondC,
    LittleDiamondPlus,
    AlphaDiamond([Rational64; 2]),
    SquareCF,
    BigDiamond,
    Lorentz3D,
}

/// Shortest exact decimal for terminating ratios, `p/q` otherwise.
pub fn fmt_ratio(r: &Rational64) -> String {
    if r.is_integer() {
        return r.numer().to_string();
    }
    let mut den = *r.denom();
    let (mut twos, mut fives) = (0u32, 0u32);
    while den % 2 == 0 {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r * Rational64::from_integer(10i64.pow(places));
    let n = scaled.to_integer();
    let sign = if n < 0 { "-" } else { "" };
    let n = n.unsigned_abs();
    let p = 10u64.pow(places);
    format!("{sign}{}.{:0width$}", n / p, n % p, width = places as usize)
}

fn join(v: &[Rational64]) -> String {
    v.iter().map(fmt_ratio).collect::<Vec<_>>().join(",")
}

impl fmt::Display for SystemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SystemId::Regular1D => write!(f, "regular"),
            SystemId::Alpha1D(a) => write!(f, "alpha:{}", fmt_ratio(a)),
            SystemId::ProductRegular(d) => write!(f, "product:{d}"),
            SystemId::RectangularAlpha(a) => write!(f, "rect:{}", join(a)),
            SystemId::ProductEven(d) => write!(f, "even:{d}"),
            SystemId::LittleDiamondC => write!(f, "diamond-c"),
            SystemId::LittleDiamondPlus => write!(f, "diamond-plus"),
            SystemId::AlphaDiamond(a) => write!(f, "alpha-diamond:{}", join(a)),
            SystemId::SquareCF => write!(f, "square"),
            SystemId::BigDiamond => write!(f, "big-diamond"),
            SystemId::Lorentz3D => write!(f, "lorentz3d"),
        }
    }
}

fn parse_list(s: &str) -> Result<Vec<Rational64>, SystemError> {
    s.split(',')
        .map(|t| parse_rational64(t).ok_or_else(|| SystemError::InvalidParameter(format!("not a number: '{t}'"))))
        .collect()
}

fn parse_dim(s: &str) -> Result<usize, SystemError> {
    s.trim()
        .parse()
        .map_err(|_| SystemError::InvalidParameter(format!("not a dimension: '{s}'")))
}

impl FromStr for SystemId {
    type Err = SystemError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let id = match (head, arg) {
            ("regular", None) => SystemId::Regular1D,
            ("alpha", Some(a)) => {
                let v = parse_list(a)?;
                if v.len() != 1 {
                    return Err(SystemError::InvalidParameter("alpha takes one value".into()));
                }
                SystemId::Alpha1D(v[0])
            }
            ("product", Some(d)) => SystemId::ProductRegular(parse_dim(d)?),
            ("rect", Some(a)) => SystemId::RectangularAlpha(parse_list(a)?),
            ("even", Some(d)) => SystemId::ProductEven(parse_dim(d)?),
            ("diamond-c", None) => SystemId::LittleDiamondC,
            ("diamond-plus", None) => SystemId::LittleDiamondPlus,
            ("alpha-diamond", Some(a)) => {
                let v = parse_list(a)?;
                if v.len() != 2 {
                    return Err(SystemError::InvalidParameter("alpha-diamond takes two values".into()));
                }
                SystemId::AlphaDiamond([v[0], v[1]])
            }
            ("square", None) => SystemId::SquareCF,
            ("big-diamond", None) => SystemId::BigDiamond,
            ("lorentz3d", None) => SystemId::Lorentz3D,
            _ => return Err(SystemError::UnknownSystem(s.to_string())),
        };
        id.validate()?;
        Ok(id)
    }
}

impl SystemId {
    pub fn validate(&self) -> Result<(), SystemError> {
        let unit = |a: &Rational64| *a >= Rational64::zero() && *a <= Rational64::one();
        let dim_ok = |d: usize| {
            if (1..=MAX_DIM).contains(&d) {
                Ok(())
            } else {
                Err(SystemError::InvalidParameter(format!(
                    "dimension must be in 1..={MAX_DIM}"
                )))
            }
        };
        match self {
            SystemId::Alpha1D(a) if !unit(a) => Err(SystemError::InvalidParameter("alpha must lie in [0,1]".into())),
            SystemId::RectangularAlpha(a) => {
                dim_ok(a.len())?;
                if a.iter().all(unit) {
                    Ok(())
                } else {
                    Err(SystemError::InvalidParameter("alpha must lie in [0,1]^d".into()))
                }
            }
            SystemId::ProductRegular(d) | SystemId::ProductEven(d) => dim_ok(*d),
            SystemId::AlphaDiamond([a1, a2]) if a1.abs() + a2.abs() >= Rational64::one() => Err(
                SystemError::InvalidParameter("alpha-diamond needs |a1|+|a2| < 1".into()),
            ),
            _ => Ok(()),
        }
    }

    /// Systems whose fundamental domain and digits split as a product in
    /// some linear coordinates.
    pub fn is_product_type(&self) -> bool {
        !matches!(self, SystemId::SquareCF | SystemId::Lorentz3D)
    }
}

fn r(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn ri(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn scaled_identity(d: usize, s: Rational64) -> Vec<Vec<Rational64>> {
    (0..d)
        .map(|i| (0..d).map(|j| if i == j { s } else { ri(0) }).collect())
        .collect()
}

fn phi_inv_matrix() -> Vec<Vec<Rational64>> {
    vec![vec![ri(1), ri(1)], vec![ri(1), ri(-1)]]
}

fn phi_matrix() -> Vec<Vec<Rational64>> {
    vec![vec![r(1, 2), r(1, 2)], vec![r(1, 2), r(-1, 2)]]
}

fn product_parts(id: SystemId, lower: Vec<Rational64>, shift: Option<Vec<Rational64>>, step: i64) -> SystemParts {
    let d = lower.len();
    let s = ri(step);
    let box_lower: Vec<Rational64> = lower.iter().map(|l| l / s).collect();
    SystemParts {
        id,
        space: Space::ProductRd(d),
        inversion: Inversion::Reciprocal,
        to_lattice: scaled_identity(d, ri(1) / s),
        from_lattice: scaled_identity(d, s),
        lower: box_lower,
        faces: FaceConvention::HalfOpen,
        shift,
        diagonal: Some(DiagonalForm {
            to_diag: scaled_identity(d, ri(1)),
            from_diag: scaled_identity(d, ri(1)),
            lower,
            step: vec![step; d],
            conjugating: false,
        }),
        experimental: false,
    }
}

fn diamond_parts(
    id: SystemId,
    inversion: Inversion,
    lower: Vec<Rational64>,
    shift: Option<Vec<Rational64>>,
) -> SystemParts {
    SystemParts {
        id,
        space: Space::SplitComplexPlane,
        inversion,
        to_lattice: phi_inv_matrix(),
        from_lattice: phi_matrix(),
        lower: lower.clone(),
        faces: FaceConvention::HalfOpen,
        shift,
        diagonal: Some(DiagonalForm {
            to_diag: phi_inv_matrix(),
            from_diag: phi_matrix(),
            lower,
            step: vec![1, 1],
            conjugating: inversion == Inversion::IotaPlus,
        }),
        experimental: false,
    }
}

pub fn make_system(id: &SystemId) -> Result<CfSystem, SystemError> {
    id.validate()?;
    let parts = match id {
        SystemId::Regular1D => product_parts(id.clone(), vec![ri(0)], None, 1),
        SystemId::Alpha1D(a) => product_parts(id.clone(), vec![-a], Some(vec![*a]), 1),
        SystemId::ProductRegular(d) => product_parts(id.clone(), vec![ri(0); *d], None, 1),
        SystemId::RectangularAlpha(a) => product_parts(id.clone(), a.iter().map(|v| -v).collect(), Some(a.clone()), 1),
        SystemId::ProductEven(d) => product_parts(id.clone(), vec![ri(-1); *d], None, 2),
        SystemId::LittleDiamondC => diamond_parts(id.clone(), Inversion::IotaC, vec![ri(0); 2], None),
        SystemId::LittleDiamondPlus => diamond_parts(id.clone(), Inversion::IotaPlus, vec![ri(0); 2], None),
        SystemId::AlphaDiamond([a1, a2]) => diamond_parts(
            id.clone(),
            Inversion::IotaC,
            vec![-(a1 + a2), -(a1 - a2)],
            Some(vec![*a1, *a2]),
        ),
        SystemId::SquareCF => SystemParts {
            id: id.clone(),
            space: Space::SplitComplexPlane,
            inversion: Inversion::IotaPlus,
            to_lattice: scaled_identity(2, ri(1)),
            from_lattice: scaled_identity(2, ri(1)),
            lower: vec![r(-1, 2); 2],
            faces: FaceConvention::HalfOpen,
            shift: None,
            diagonal: None,
            experimental: false,
        },
        SystemId::BigDiamond => SystemParts {
            id: id.clone(),
            space: Space::SplitComplexPlane,
            inversion: Inversion::IotaC,
            to_lattice: phi_matrix(),
            from_lattice: phi_inv_matrix(),
            lower: vec![r(-1, 2); 2],
            faces: FaceConvention::HalfOpen,
            shift: None,
            diagonal: Some(DiagonalForm {
                to_diag: phi_inv_matrix(),
                from_diag: phi_matrix(),
                lower: vec![ri(-1); 2],
                step: vec![2, 2],
                conjugating: false,
            }),
            experimental: true,
        },
        SystemId::Lorentz3D => SystemParts {
            id: id.clone(),
            space: Space::Lorentz3D,
            inversion: Inversion::Lorentz3DInv,
            to_lattice: vec![
                vec![ri(1), ri(0), ri(1)],
                vec![ri(0), ri(1), ri(0)],
                vec![ri(-1), ri(0), ri(1)],
            ],
            from_lattice: vec![
                vec![r(1, 2), ri(0), r(-1, 2)],
                vec![ri(0), ri(1), ri(0)],
                vec![r(1, 2), ri(0), r(1, 2)],
            ],
            lower: vec![r(-1, 2); 3],
            faces: FaceConvention::Closed,
            shift: None,
            diagonal: None,
            experimental: false,
        },
    };
    Ok(CfSystem::from_parts(parts))
}

/// Parses a system name and builds it.
pub fn system_by_name(name: &str) -> Result<CfSystem, SystemError> {
    make_system(&name.parse()?)
}

pub fn in_domain(sys: &CfSystem, x: &[f64]) -> bool {
    sys.in_domain(x)
}

/// Vertices of the (closed) domain box, exactly, in space coordinates.
pub fn domain_corners_exact(sys: &CfSystem) -> Vec<Vec<BigRational>> {
    let d = sys.dim();
    (0..1usize << d)
        .map(|mask| {
            let u: Vec<BigRational> = (0..d)
                .map(|i| big(&sys.domain_lower()[i]) + BigRational::from_integer(((mask >> i & 1) as i64).into()))
                .collect();
            sys.from_lattice()
                .iter()
                .map(|row| row.iter().zip(&u).map(|(b, u)| big(b) * u).sum())
                .collect()
        })
        .collect()
}

/// Whether every domain point satisfies `|x_p| + |x_q| <= 1` (positive and
/// negative coordinate groups, Euclidean norms). The region is convex, so it
/// suffices to check the domain's vertices, which is done exactly. `None` for
/// systems without a Minkowski inversion.
pub fn domain_in_expanding_region(sys: &CfSystem) -> Option<bool> {
    let p = match sys.inversion() {
        Inversion::Reciprocal => return None,
        Inversion::IotaPlus | Inversion::IotaC => 1,
        Inversion::Lorentz3DInv => 2,
    };
    let one = BigRational::one();
    Some(domain_corners_exact(sys).iter().all(|x| {
        let lp: BigRational = x[..p].iter().map(|c| c * c).sum();
        let rq: BigRational = x[p..].iter().map(|c| c.abs()).sum();
        // |x_p| <= 1 - |x_q|  <=>  1 - |x_q| >= 0 and |x_p|^2 <= (1 - |x_q|)^2
        let slack = &one - rq;
        !slack.is_negative() && lp <= &slack * &slack
    }))
}

/// Whether `0` lies in the closure of the domain.
pub fn origin_in_closure(sys: &CfSystem) -> bool {
    sys.domain_lower().iter().all(|lo| *lo <= ri(0) && *lo >= ri(-1))
}

fn is_pair(a: &SystemId, b: &SystemId) -> bool {
    match (a, b) {
        (SystemId::ProductRegular(2), SystemId::LittleDiamondC) => true,
        (SystemId::ProductEven(2), SystemId::BigDiamond) => true,
        (SystemId::RectangularAlpha(beta), SystemId::AlphaDiamond([a1, a2])) => {
            beta.len() == 2 && beta[0] == a1 + a2 && beta[1] == a1 - a2
        }
        _ => false,
    }
}

/// Maps a point between a product system and its `Phi`-conjugate diamond
/// system (`Phi` one way, `Phi^-1` the other).
pub fn transport(from: &CfSystem, to: &CfSystem, x: &[f64]) -> Result<Vec<f64>, SystemError> {
    if x.len() != 2 {
        return Err(SystemError::InvalidParameter("transport needs a 2-D point".into()));
    }
    if is_pair(from.id(), to.id()) {
        Ok(vec![(x[0] + x[1]) / 2.0, (x[0] - x[1]) / 2.0])
    } else if is_pair(to.id(), from.id()) {
        Ok(vec![x[0] + x[1], x[0] - x[1]])
    } else {
        Err(SystemError::NotConjugate(from.id().to_string(), to.id().to_string()))
    }
}

/// The registered conjugate partner of a system, if any.
pub fn conjugate_partner(id: &SystemId) -> Option<SystemId> {
    match id {
        SystemId::ProductRegular(2) => Some(SystemId::LittleDiamondC),
        SystemId::LittleDiamondC => Some(SystemId::ProductRegular(2)),
        SystemId::ProductEven(2) => Some(SystemId::BigDiamond),
        SystemId::BigDiamond => Some(SystemId::ProductEven(2)),
        SystemId::AlphaDiamond([a1, a2]) => {
            let beta = vec![a1 + a2, a1 - a2];
            let rect = SystemId::RectangularAlpha(beta);
            rect.validate().ok().map(|_| rect)
        }
        SystemId::RectangularAlpha(beta) if beta.len() == 2 => {
            let two = ri(2);
            let a = SystemId::AlphaDiamond([(beta[0] + beta[1]) / two, (beta[0] - beta[1]) / two]);
            a.validate().ok().map(|_| a)
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf_core::Digit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_ids() -> Vec<SystemId> {
        vec![
            SystemId::Regular1D,
            SystemId::Alpha1D(r(1, 2)),
            SystemId::Alpha1D(r(3, 10)),
            SystemId::ProductRegular(2),
            SystemId::ProductRegular(3),
            SystemId::RectangularAlpha(vec![r(1, 2), r(1, 2)]),
            SystemId::RectangularAlpha(vec![r(1, 5), r(7, 10)]),
            SystemId::ProductEven(2),
            SystemId::LittleDiamondC,
            SystemId::LittleDiamondPlus,
            SystemId::AlphaDiamond([r(1, 5), r(1, 10)]),
            SystemId::SquareCF,
            SystemId::BigDiamond,
            SystemId::Lorentz3D,
        ]
    }

    fn random_point(sys: &CfSystem, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let v: Vec<f64> = (0..sys.dim()).map(|_| rng.random::<f64>()).collect();
        sys.from_box(&v)
    }

    #[test]
    fn names_round_trip() {
        for id in all_ids() {
            let name = id.to_string();
            assert_eq!(name.parse::<SystemId>().unwrap(), id, "{name}");
        }
        assert_eq!("alpha:0.5".parse::<SystemId>().unwrap(), SystemId::Alpha1D(r(1, 2)));
        assert_eq!(
            "rect:0.5,0.25".parse::<SystemId>().unwrap().to_string(),
            "rect:0.5,0.25"
        );
        assert!(matches!("nope".parse::<SystemId>(), Err(SystemError::UnknownSystem(_))));
        assert!(matches!(
            "alpha:1.5".parse::<SystemId>(),
            Err(SystemError::InvalidParameter(_))
        ));
        assert!(matches!(
            "alpha-diamond:0.6,-0.4".parse::<SystemId>(),
            Err(SystemError::InvalidParameter(_))
        ));
        assert!("product:0".parse::<SystemId>().is_err());
    }

    #[test]
    fn fmt_ratio_prints_exact_decimals() {
        assert_eq!(fmt_ratio(&r(1, 2)), "0.5");
        assert_eq!(fmt_ratio(&r(-3, 40)), "-0.075");
        assert_eq!(fmt_ratio(&r(1, 3)), "1/3");
        assert_eq!(fmt_ratio(&ri(2)), "2");
    }

    #[test]
    fn little_diamond_vertices() {
        let sys = make_system(&SystemId::LittleDiamondC).unwrap();
        let mut got: Vec<(f64, f64)> = domain_corners_exact(&sys)
            .iter()
            .map(|c| (crate::numeric::ratio_to_f64(&c[0]), crate::numeric::ratio_to_f64(&c[1])))
            .collect();
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(got, vec![(0.0, 0.0), (0.5, -0.5), (0.5, 0.5), (1.0, 0.0)]);
    }

    #[test]
    fn lorentz_generators() {
        let sys = make_system(&SystemId::Lorentz3D).unwrap();
        let g = sys.generators();
        assert_eq!(g[0], vec![r(1, 2), ri(0), r(1, 2)]);
        assert_eq!(g[1], vec![ri(0), ri(1), ri(0)]);
        assert_eq!(g[2], vec![r(-1, 2), ri(0), r(1, 2)]);
    }

    #[test]
    fn big_diamond_is_phi_of_even_product() {
        let big = make_system(&SystemId::BigDiamond).unwrap();
        let even = make_system(&SystemId::ProductEven(2)).unwrap();
        assert!(big.is_experimental());
        let g = big.generators();
        assert_eq!(g[0], vec![ri(1), ri(1)]);
        assert_eq!(g[1], vec![ri(1), ri(-1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let u = random_point(&even, &mut rng);
            let x = transport(&even, &big, &u).unwrap();
            assert!(big.in_domain(&x));
            let (ku, tu) = even.gauss_step(&u).unwrap();
            let (kx, tx) = big.gauss_step(&x).unwrap();
            assert_eq!(ku, kx);
            let back = transport(&big, &even, &tx).unwrap();
            assert!((back[0] - tu[0]).abs() < 1e-9 * (1.0 + tu[0].abs()));
            assert!((back[1] - tu[1]).abs() < 1e-9 * (1.0 + tu[1].abs()));
        }
    }

    #[test]
    fn membership_examples() {
        let dc = make_system(&SystemId::LittleDiamondC).unwrap();
        assert!(in_domain(&dc, &[0.5, -0.49]));
        let l3 = make_system(&SystemId::Lorentz3D).unwrap();
        assert!(in_domain(&l3, &[0.3, -0.5, 0.2]));
        assert!(!in_domain(&l3, &[0.6, 0.0, 0.0]));
        let sq = make_system(&SystemId::SquareCF).unwrap();
        assert!(!in_domain(&sq, &[0.5, 0.0]));
        assert!(in_domain(&sq, &[-0.5, 0.0]));
    }

    #[test]
    fn transport_examples() {
        let p = make_system(&SystemId::ProductRegular(2)).unwrap();
        let dc = make_system(&SystemId::LittleDiamondC).unwrap();
        let x = transport(&p, &dc, &[0.3, 0.7]).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-15 && (x[1] + 0.2).abs() < 1e-15);
        let back = transport(&dc, &p, &x).unwrap();
        assert!((back[0] - 0.3).abs() < 1e-15 && (back[1] - 0.7).abs() < 1e-15);

        let (_, tp) = p.gauss_step(&[0.3, 0.7]).unwrap();
        let (_, tx) = dc.gauss_step(&x).unwrap();
        let want = [(1.0 / 3.0 + 3.0 / 7.0) / 2.0, (1.0 / 3.0 - 3.0 / 7.0) / 2.0];
        let via = transport(&p, &dc, &tp).unwrap();
        for i in 0..2 {
            assert!((tx[i] - want[i]).abs() < 1e-14);
            assert!((via[i] - want[i]).abs() < 1e-14);
        }

        let sq = make_system(&SystemId::SquareCF).unwrap();
        assert!(matches!(
            transport(&p, &sq, &[0.1, 0.1]),
            Err(SystemError::NotConjugate(..))
        ));
        let dp = make_system(&SystemId::LittleDiamondPlus).unwrap();
        assert!(transport(&p, &dp, &[0.1, 0.1]).is_err());
    }

    #[test]
    fn alpha_diamond_pairs_with_rectangular_alpha() {
        let ad = SystemId::AlphaDiamond([r(1, 5), r(1, 10)]);
        let rect = conjugate_partner(&ad).unwrap();
        assert_eq!(rect, SystemId::RectangularAlpha(vec![r(3, 10), r(1, 10)]));
        assert_eq!(conjugate_partner(&rect), Some(ad.clone()));
        let a = make_system(&ad).unwrap();
        let b = make_system(&rect).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..1000 {
            let u = random_point(&b, &mut rng);
            let x = transport(&b, &a, &u).unwrap();
            assert!(a.in_domain(&x));
        }
        // outside the diamond the pair has no valid rectangular partner
        assert_eq!(conjugate_partner(&SystemId::AlphaDiamond([r(-1, 5), r(1, 10)])), None);
    }

    #[test]
    fn domains_tile_space() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for id in all_ids() {
            let sys = make_system(&id).unwrap();
            for _ in 0..20_000 {
                let x: Vec<f64> = (0..sys.dim()).map(|_| rng.random_range(-20.0..20.0)).collect();
                let z = sys.round_to_lattice(&x);
                let p = sys.digit_point(&z);
                let rem: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a - b).collect();
                assert!(sys.in_closed_domain(&rem, 1e-12), "{id}: {x:?} -> {rem:?}");
            }
        }
    }

    #[test]
    fn rounding_examples() {
        let p = make_system(&SystemId::ProductRegular(2)).unwrap();
        assert_eq!(p.round_to_lattice(&[2.3, 3.7]), Digit(vec![2, 3]));
        let dc = make_system(&SystemId::LittleDiamondC).unwrap();
        let z = dc.round_to_lattice(&[1.3, 0.5]);
        assert_eq!(dc.digit_point(&z), vec![0.5, 0.5]);
        let sq = make_system(&SystemId::SquareCF).unwrap();
        let z = sq.round_to_lattice(&[2.6, -0.4]);
        assert_eq!(z, Digit(vec![3, 0]));
    }

    #[test]
    fn gauss_images_stay_in_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for id in all_ids() {
            let sys = make_system(&id).unwrap();
            for _ in 0..20_000 {
                let x = random_point(&sys, &mut rng);
                match sys.gauss_step(&x) {
                    Ok((_, img)) => assert!(sys.in_closed_domain(&img, 1e-9), "{id}: {x:?} -> {img:?}"),
                    Err(e) => panic!("{id}: {x:?}: {e}"),
                }
            }
        }
    }

    #[test]
    fn origin_is_in_closure_of_catalog_domains() {
        for id in all_ids() {
            assert!(origin_in_closure(&make_system(&id).unwrap()), "{id}");
        }
    }

    #[test]
    fn minkowski_domains_lie_in_expanding_region() {
        for id in [
            SystemId::SquareCF,
            SystemId::LittleDiamondC,
            SystemId::LittleDiamondPlus,
            SystemId::BigDiamond,
            SystemId::Lorentz3D,
        ] {
            let sys = make_system(&id).unwrap();
            assert_eq!(domain_in_expanding_region(&sys), Some(true), "{id}");
        }
        let p = make_system(&SystemId::ProductRegular(2)).unwrap();
        assert_eq!(domain_in_expanding_region(&p), None);
    }

    #[test]
    fn plus_and_c_depth_one_digits_agree_under_conjugation() {
        let c = make_system(&SystemId::LittleDiamondC).unwrap();
        let p = make_system(&SystemId::LittleDiamondPlus).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let mut dc = std::collections::BTreeSet::new();
        let mut dp = std::collections::BTreeSet::new();
        for _ in 0..20_000 {
            let x = random_point(&c, &mut rng);
            let (kc, _) = c.gauss_step(&x).unwrap();
            let (kp, _) = p.gauss_step(&x).unwrap();
            assert_eq!(c.conj_digit(&kc).unwrap(), kp);
            if kc.0.iter().all(|k| *k <= 4) {
                dc.insert(c.conj_digit(&kc).unwrap());
                dp.insert(kp);
            }
        }
        assert_eq!(dc, dp);
    }
}
