//! Invariant measures and numerical diagnostics.
//!
//! Boxes and grids are given in box coordinates (`[0,1)^d`, see
//! [`CfSystem::to_box`]). For the systems with a closed-form density these
//! coincide with the diagonal coordinates, in which the measure is the product
//! of one-dimensional Gauss measures `dt / (log 2 (1 + t))`.
//!
//! Monte Carlo drivers seed orbit `i` with `seed + i` and reduce with integer
//! sums or boolean ORs, so results do not depend on the number of workers.

use std::f64::consts::LN_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{iota_singular_values, AlgebraError, MinkVec};
use crate::cf_core::{CfError, CfSystem, Digit};
use crate::numeric::{big, gauss_legendre, integrate, ratio_to_f64};
use crate::systems::SystemId;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("no closed-form invariant density for system {0}")]
    NoClosedForm(String),
    #[error("system {0} is not of product type")]
    NotProductType(String),
    #[error("{died} of {total} orbits hit the null set or overflowed")]
    AllOrbitsDied { died: u64, total: u64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Cf(#[from] CfError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

type Result<T> = std::result::Result<T, AnalysisError>;

/// Cell resolution per axis used by [`mixing_coverage`].
pub const MIXING_GRID: usize = 100;

#[derive(Clone, Copy)]
enum ClosedForm {
    Product,
    Diamond,
}

impl ClosedForm {
    fn of(sys: &CfSystem) -> Result<Self> {
        match sys.id() {
            SystemId::Regular1D | SystemId::ProductRegular(_) => Ok(ClosedForm::Product),
            SystemId::LittleDiamondC | SystemId::LittleDiamondPlus => Ok(ClosedForm::Diamond),
            other => Err(AnalysisError::NoClosedForm(other.to_string())),
        }
    }

    fn eval(self, x: &[f64]) -> f64 {
        match self {
            ClosedForm::Product => x.iter().map(|v| 1.0 / (LN_2 * (1.0 + v))).product(),
            ClosedForm::Diamond => 2.0 / (LN_2 * LN_2) / ((1.0 + x[0]) * (1.0 + x[0]) - x[1] * x[1]),
        }
    }
}

fn check_dim(sys: &CfSystem, got: usize) -> Result<()> {
    if got != sys.dim() {
        return Err(CfError::DimensionMismatch {
            expected: sys.dim(),
            got,
        }
        .into());
    }
    Ok(())
}

/// Invariant density at a point of the domain, in space coordinates.
pub fn closed_form_density(sys: &CfSystem, x: &[f64]) -> Result<f64> {
    let cf = ClosedForm::of(sys)?;
    check_dim(sys, x.len())?;
    Ok(cf.eval(x))
}

/// Midpoint-rule integral of the closed-form density over the domain, computed
/// in box coordinates with `n` points per axis.
pub fn normalization_quadrature(sys: &CfSystem, n: usize) -> Result<f64> {
    let cf = ClosedForm::of(sys)?;
    if n < 16 {
        return Err(AnalysisError::InvalidParameter(format!("need n >= 16, got {n}")));
    }
    let d = sys.dim() as u32;
    let rows = n
        .checked_pow(d - 1)
        .filter(|r| r * n <= 1 << 31)
        .ok_or_else(|| AnalysisError::InvalidParameter(format!("{n}^{d} quadrature nodes is too many")))?;
    let h = 1.0 / n as f64;
    let row_sums: Vec<f64> = (0..rows)
        .into_par_iter()
        .map(|r| {
            let mut v = vec![0.0; d as usize];
            let mut rest = r;
            for c in v.iter_mut().skip(1) {
                *c = ((rest % n) as f64 + 0.5) * h;
                rest /= n;
            }
            (0..n)
                .map(|i| {
                    v[0] = (i as f64 + 0.5) * h;
                    cf.eval(&sys.from_box(&v))
                })
                .sum()
        })
        .collect();
    Ok(row_sums.iter().sum::<f64>() * h.powi(d as i32) * sys.domain_volume())
}

/// Tensor Gauss-Legendre integral of the density over a box-coordinate box.
fn box_measure(sys: &CfSystem, cf: ClosedForm, bx: &[(f64, f64)], rule: &[(f64, f64)]) -> f64 {
    let d = bx.len();
    let m = rule.len();
    let mut total = 0.0;
    let mut v = vec![0.0; d];
    for idx in 0..m.pow(d as u32) {
        let mut rest = idx;
        let mut w = 1.0;
        for (c, &(a, b)) in v.iter_mut().zip(bx) {
            let (node, weight) = rule[rest % m];
            rest /= m;
            *c = 0.5 * (a + b) + 0.5 * (b - a) * node;
            w *= 0.5 * (b - a) * weight;
        }
        total += w * cf.eval(&sys.from_box(&v));
    }
    total * sys.domain_volume()
}

fn gauss_factor(t: f64) -> f64 {
    1.0 / (LN_2 * (1.0 + t))
}

/// One-dimensional Gauss measure of `T^{-1}[a, b)`: branches `1..=cut` by
/// quadrature, plus the tail `sum_{m > cut}` as `int_a^b M(1/(cut + 1/2 + c)) dc`
/// with `M(u) = mu([0, u))`.
fn preimage_measure_1d(a: f64, b: f64, cut: u64, rule: &[(f64, f64)]) -> f64 {
    let head: f64 = (1..=cut)
        .map(|m| {
            let m = m as f64;
            integrate(gauss_factor, 1.0 / (m + b), 1.0 / (m + a), rule)
        })
        .sum();
    let n = cut as f64 + 0.5;
    let tail = integrate(|c| integrate(gauss_factor, 0.0, 1.0 / (n + c), rule), a, b, rule);
    head + tail
}

fn check_box(sys: &CfSystem, bx: &[(f64, f64)]) -> Result<()> {
    check_dim(sys, bx.len())?;
    if bx
        .iter()
        .any(|&(a, b)| !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b))
    {
        return Err(AnalysisError::InvalidParameter(format!(
            "box {bx:?} is not inside [0,1]^{}",
            sys.dim()
        )));
    }
    Ok(())
}

/// Largest `|mu(A) - mu(T^{-1} A)|` over the boxes. `mu(A)` integrates the
/// closed-form density directly; the preimage is summed branch by branch in
/// diagonal coordinates up to `branch_cut` with an integral tail.
pub fn invariance_residual(sys: &CfSystem, boxes: &[Vec<(f64, f64)>], branch_cut: u64) -> Result<f64> {
    let cf = ClosedForm::of(sys)?;
    if branch_cut == 0 {
        return Err(AnalysisError::InvalidParameter("branch_cut must be positive".into()));
    }
    let rule = gauss_legendre(12);
    let mut worst: f64 = 0.0;
    for bx in boxes {
        check_box(sys, bx)?;
        if bx.iter().any(|&(a, b)| a >= b) {
            continue;
        }
        let direct = box_measure(sys, cf, bx, &rule);
        let pulled: f64 = bx
            .iter()
            .map(|&(a, b)| preimage_measure_1d(a, b, branch_cut, &rule))
            .product();
        worst = worst.max((direct - pulled).abs());
    }
    Ok(worst)
}

/// Closed-form mass of each cell of an `n`-per-axis grid (first axis fastest).
pub fn closed_form_cell_masses(sys: &CfSystem, n: usize) -> Result<Vec<f64>> {
    let cf = ClosedForm::of(sys)?;
    let d = sys.dim();
    let rule = gauss_legendre(4);
    let h = 1.0 / n as f64;
    Ok((0..n.pow(d as u32))
        .into_par_iter()
        .map(|idx| {
            let mut rest = idx;
            let bx: Vec<(f64, f64)> = (0..d)
                .map(|_| {
                    let i = rest % n;
                    rest /= n;
                    (i as f64 * h, (i + 1) as f64 * h)
                })
                .collect();
            box_measure(sys, cf, &bx, &rule)
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityCell {
    pub count: u64,
    /// Per unit space volume; `None` for systems without a finite invariant measure.
    pub density: Option<f64>,
}

/// Orbit-occupation histogram on a regular grid in box coordinates.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DensityGrid {
    pub system: String,
    /// Cells per axis.
    pub shape: Vec<usize>,
    /// Box-coordinate bounds per axis.
    pub bounds: Vec<(f64, f64)>,
    /// Space volume of one cell.
    pub cell_volume: f64,
    /// First axis fastest.
    pub cells: Vec<DensityCell>,
    pub total_samples: u64,
    pub orbits_used: u64,
    pub orbits_died: u64,
}

impl DensityGrid {
    /// Multi-index of a flat cell index.
    pub fn cell_index(&self, mut flat: usize) -> Vec<usize> {
        self.shape
            .iter()
            .map(|&n| {
                let i = flat % n;
                flat /= n;
                i
            })
            .collect()
    }

    pub fn cell_center_box(&self, flat: usize) -> Vec<f64> {
        self.cell_index(flat)
            .iter()
            .zip(&self.shape)
            .map(|(&i, &n)| (i as f64 + 0.5) / n as f64)
            .collect()
    }

    /// Fraction of samples in each cell.
    pub fn masses(&self) -> Vec<f64> {
        let t = self.total_samples.max(1) as f64;
        self.cells.iter().map(|c| c.count as f64 / t).collect()
    }
}

fn cell_of(sys: &CfSystem, x: &[f64], n: usize, scratch: &mut [f64]) -> usize {
    sys.to_box_fast(x, scratch);
    let mut idx = 0;
    for &v in scratch.iter().rev() {
        let i = ((v * n as f64).floor() as i64).clamp(0, n as i64 - 1) as usize;
        idx = idx * n + i;
    }
    idx
}

fn random_start(sys: &CfSystem, rng: &mut ChaCha8Rng, bx: Option<&[(f64, f64)]>) -> Vec<f64> {
    let v: Vec<f64> = match bx {
        None => (0..sys.dim()).map(|_| rng.random::<f64>()).collect(),
        Some(bx) => bx.iter().map(|&(a, b)| a + (b - a) * rng.random::<f64>()).collect(),
    };
    sys.from_box(&v)
}

/// Histogram of `T^{burn_in + 1} x, ..., T^{burn_in + n_steps} x` over
/// `n_orbits` Lebesgue-uniform starts on a `grid`-per-axis grid. Orbits that
/// hit the null set or overflow are discarded whole.
pub fn empirical_density(
    sys: &CfSystem,
    n_orbits: u64,
    n_steps: u64,
    burn_in: u64,
    grid: usize,
    seed: u64,
) -> Result<DensityGrid> {
    if n_orbits == 0 || n_steps == 0 || grid == 0 {
        return Err(AnalysisError::InvalidParameter(
            "orbits, steps and grid must be positive".into(),
        ));
    }
    let d = sys.dim();
    let n_cells = grid
        .checked_pow(d as u32)
        .filter(|&c| c <= 1 << 26)
        .ok_or_else(|| AnalysisError::InvalidParameter(format!("grid {grid}^{d} is too large")))?;
    let run = |i: u64, buf: &mut Vec<usize>| -> bool {
        buf.clear();
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
        let mut x = random_start(sys, &mut rng, None);
        let mut k = vec![0i64; d];
        let mut scratch = vec![0.0; d];
        for step in 0..burn_in + n_steps {
            if sys.step_in_place(&mut x, &mut k).is_err() {
                return false;
            }
            if step >= burn_in {
                buf.push(cell_of(sys, &x, grid, &mut scratch));
            }
        }
        true
    };
    let (counts, died) = (0..n_orbits)
        .into_par_iter()
        .fold(
            || (vec![0u64; n_cells], 0u64, Vec::new()),
            |(mut counts, mut died, mut buf), i| {
                if run(i, &mut buf) {
                    buf.iter().for_each(|&c| counts[c] += 1);
                } else {
                    died += 1;
                }
                (counts, died, buf)
            },
        )
        .map(|(c, d, _)| (c, d))
        .reduce(
            || (vec![0u64; n_cells], 0),
            |(mut a, da), (b, db)| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                (a, da + db)
            },
        );
    if died * 100 > n_orbits * 99 || died == n_orbits {
        return Err(AnalysisError::AllOrbitsDied { died, total: n_orbits });
    }
    let total: u64 = counts.iter().sum();
    let cell_volume = sys.domain_volume() / n_cells as f64;
    let normalized = !sys.is_experimental();
    let cells = counts
        .into_iter()
        .map(|count| DensityCell {
            count,
            density: normalized.then(|| count as f64 / (total as f64 * cell_volume)),
        })
        .collect();
    Ok(DensityGrid {
        system: sys.id().to_string(),
        shape: vec![grid; d],
        bounds: vec![(0.0, 1.0); d],
        cell_volume,
        cells,
        total_samples: total,
        orbits_used: n_orbits - died,
        orbits_died: died,
    })
}

/// `sum |p_hat - p|` over cells, against the closed-form cell masses.
pub fn l1_to_closed_form(sys: &CfSystem, g: &DensityGrid) -> Result<f64> {
    let n = g.shape[0];
    if g.shape.len() != sys.dim() || g.shape.iter().any(|&s| s != n) {
        return Err(AnalysisError::InvalidParameter("grid does not match the system".into()));
    }
    let exact = closed_form_cell_masses(sys, n)?;
    Ok(g.masses().iter().zip(&exact).map(|(a, b)| (a - b).abs()).sum())
}

/// `sum |p_a - p_b|` over cells of two histograms on the same grid.
pub fn l1_between(a: &DensityGrid, b: &DensityGrid) -> Result<f64> {
    if a.shape != b.shape {
        return Err(AnalysisError::InvalidParameter(format!(
            "grid shapes differ: {:?} vs {:?}",
            a.shape, b.shape
        )));
    }
    Ok(a.masses().iter().zip(b.masses()).map(|(x, y)| (x - y).abs()).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MixingReport {
    pub system: String,
    pub set_a: Vec<(f64, f64)>,
    pub n_values: Vec<usize>,
    /// Estimates of `mu(T^n A)`.
    pub coverage: Vec<f64>,
    /// Binomial error of the sampled proportion combined with the occupancy
    /// noise of sparsely hit cells.
    pub stderr: Vec<f64>,
    pub samples: u64,
    pub seed: u64,
}

impl MixingReport {
    /// Whether `coverage[m] >= coverage[n] - k * se` for all `n < m`, with `se`
    /// the combined binomial standard error.
    pub fn non_decreasing_within(&self, k: f64) -> bool {
        let c = &self.coverage;
        let s = &self.stderr;
        (0..c.len()).all(|m| (0..m).all(|n| c[m] >= c[n] - k * s[n].hypot(s[m])))
    }
}

/// Estimates `mu(T^n A)`, `n = 0..=n_max`, as the closed-form mass of the
/// grid cells hit by `T^n` of `samples` uniform points of `A`.
pub fn mixing_coverage(
    sys: &CfSystem,
    set_a: &[(f64, f64)],
    n_max: usize,
    samples: u64,
    seed: u64,
) -> Result<MixingReport> {
    ClosedForm::of(sys)?;
    check_box(sys, set_a)?;
    if samples == 0 || set_a.iter().any(|&(a, b)| a >= b) {
        return Err(AnalysisError::InvalidParameter(
            "need a non-empty set and at least one sample".into(),
        ));
    }
    let d = sys.dim();
    let masses = closed_form_cell_masses(sys, MIXING_GRID)?;
    let n_cells = masses.len();
    let layers = n_max + 1;
    let hits = (0..samples)
        .into_par_iter()
        .fold(
            || vec![0u32; layers * n_cells],
            |mut hits, i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
                let mut x = random_start(sys, &mut rng, Some(set_a));
                let mut k = vec![0i64; d];
                let mut scratch = vec![0.0; d];
                for n in 0..layers {
                    hits[n * n_cells + cell_of(sys, &x, MIXING_GRID, &mut scratch)] += 1;
                    if n + 1 < layers && sys.step_in_place(&mut x, &mut k).is_err() {
                        break;
                    }
                }
                hits
            },
        )
        .reduce(
            || vec![0u32; layers * n_cells],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                a
            },
        );
    let mut coverage = Vec::with_capacity(layers);
    let mut stderr = Vec::with_capacity(layers);
    for layer in hits.chunks(n_cells) {
        let c: f64 = layer.iter().zip(&masses).filter(|(h, _)| **h > 0).map(|(_, m)| m).sum();
        let c = c.clamp(0.0, 1.0);
        // cells hit once stand in for the cells whose occupancy is a coin flip
        let occupancy: f64 = layer
            .iter()
            .zip(&masses)
            .filter(|(h, _)| **h == 1)
            .map(|(_, m)| m * m)
            .sum();
        coverage.push(c);
        stderr.push((c * (1.0 - c) / samples as f64 + occupancy).sqrt());
    }
    Ok(MixingReport {
        system: sys.id().to_string(),
        set_a: set_a.to_vec(),
        n_values: (0..layers).collect(),
        coverage,
        stderr,
        samples,
        seed,
    })
}

/// `|det d T^n|` at `x` along the branch fixed by `digits` (which need not be
/// the digits the Gauss map would pick, so closure points are allowed).
pub fn branch_jacobian(sys: &CfSystem, digits: &[Digit], x: &[f64]) -> Result<f64> {
    check_dim(sys, x.len())?;
    let mut cur = x.to_vec();
    let mut jac = 1.0;
    for (i, d) in digits.iter().enumerate() {
        jac *= sys.inversion_jacobian(&cur);
        let y = sys.invert(&cur).ok_or(CfError::SingularTail(i))?;
        cur = y.iter().zip(sys.digit_point(d)).map(|(a, b)| a - b).collect();
    }
    Ok(jac)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RenyiReport {
    pub system: String,
    pub cylinder: String,
    pub depth: usize,
    pub sup_jac: f64,
    pub inf_jac: f64,
    pub ratio: f64,
    pub sample_points: usize,
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut out = 0.0;
    while i > 0 {
        out += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    out
}

const HALTON_BASES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Points of the cylinder closure (space coordinates): all corners of its
/// diagonal box, then `samples` Halton points of the interior.
pub fn cylinder_sample_points(sys: &CfSystem, digits: &[Digit], samples: usize) -> Result<Vec<Vec<f64>>> {
    let cyl = sys.cylinder_of(digits).map_err(|e| match e {
        CfError::NotProductType => AnalysisError::NotProductType(sys.id().to_string()),
        e => e.into(),
    })?;
    let diag = sys
        .diagonal()
        .ok_or_else(|| AnalysisError::NotProductType(sys.id().to_string()))?;
    let d = cyl.diag_box.len();
    let lo: Vec<f64> = cyl.diag_box.iter().map(|iv| iv.lo_f64()).collect();
    let hi: Vec<f64> = cyl.diag_box.iter().map(|iv| iv.hi_f64()).collect();
    if lo.iter().chain(&hi).any(|v| !v.is_finite()) {
        return Err(AnalysisError::InvalidParameter("unbounded cylinder".into()));
    }
    let from: Vec<Vec<f64>> = diag
        .from_diag
        .iter()
        .map(|row| row.iter().map(|r| ratio_to_f64(&big(r))).collect())
        .collect();
    let to_space = |t: &[f64]| -> Vec<f64> {
        from.iter()
            .map(|row| row.iter().zip(t).map(|(m, v)| m * v).sum())
            .collect()
    };
    let mut pts = Vec::with_capacity((1 << d) + samples);
    for mask in 0..1usize << d {
        let t: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 0 { lo[i] } else { hi[i] }).collect();
        pts.push(to_space(&t));
    }
    for k in 1..=samples as u64 {
        let t: Vec<f64> = (0..d)
            .map(|i| lo[i] + (hi[i] - lo[i]) * radical_inverse(k, HALTON_BASES[i]))
            .collect();
        pts.push(to_space(&t));
    }
    Ok(pts)
}

/// Distortion `sup J / inf J` of `T^n` over a cylinder. For one-dimensional
/// factors the Jacobian is monotone on each branch, so the corners already
/// attain both extremes; the interior points guard the general case.
pub fn renyi_ratio(sys: &CfSystem, digits: &[Digit], samples: usize) -> Result<RenyiReport> {
    let pts = cylinder_sample_points(sys, digits, samples)?;
    let mut sup: f64 = 0.0;
    let mut inf = f64::INFINITY;
    for x in &pts {
        let j = branch_jacobian(sys, digits, x)?;
        sup = sup.max(j);
        inf = inf.min(j);
    }
    Ok(RenyiReport {
        system: sys.id().to_string(),
        cylinder: digits.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" "),
        depth: digits.len(),
        sup_jac: sup,
        inf_jac: inf,
        ratio: sup / inf,
        sample_points: pts.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polyline {
    pub digit: Digit,
    pub points: Vec<Vec<f64>>,
}

/// One Gauss step applied to `samples_per_edge` points on each edge of the
/// domain boundary (a two-dimensional system), grouped into polylines that
/// break wherever the digit changes or a sample is in the null set.
pub fn boundary_image(sys: &CfSystem, samples_per_edge: usize) -> Result<Vec<Polyline>> {
    if sys.dim() != 2 {
        return Err(AnalysisError::InvalidParameter(
            "boundary image needs a planar system".into(),
        ));
    }
    if samples_per_edge < 2 {
        return Err(AnalysisError::InvalidParameter(
            "need at least 2 samples per edge".into(),
        ));
    }
    let corners = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
    let mut out: Vec<Polyline> = Vec::new();
    for e in 0..4 {
        let (p, q) = (corners[e], corners[(e + 1) % 4]);
        let mut current: Option<Polyline> = None;
        for j in 0..samples_per_edge {
            let t = j as f64 / (samples_per_edge - 1) as f64;
            let x = sys.from_box(&[p[0] + (q[0] - p[0]) * t, p[1] + (q[1] - p[1]) * t]);
            let stepped = if sys.in_null_set(&x) {
                None
            } else {
                sys.gauss_step(&x).ok()
            };
            match stepped {
                Some((d, y)) => match &mut current {
                    Some(line) if line.digit == d => line.points.push(y),
                    _ => {
                        out.extend(current.take());
                        current = Some(Polyline {
                            digit: d,
                            points: vec![y],
                        });
                    }
                },
                None => out.extend(current.take()),
            }
        }
        out.extend(current);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpandingPoint {
    pub point: Vec<f64>,
    pub signature: (usize, usize),
    /// Euclidean norms of the two coordinate groups (the normal form `(l, r)`).
    pub l: f64,
    pub r: f64,
    pub singular_values: Vec<f64>,
    pub min_singular_value: f64,
    pub in_b_e: bool,
}

/// Singular values of `d iota` at each point, after rotating each coordinate
/// group onto its first axis. The value `|l^2 - r^2|^{-1}` only occurs when a
/// group has dimension at least two.
pub fn expanding_region_report(points: &[MinkVec]) -> Result<Vec<ExpandingPoint>> {
    points
        .iter()
        .map(|x| {
            let (p, q) = x.signature();
            let (l, r) = x.group_norms();
            let s = iota_singular_values(l, r)?;
            let keep = if p >= 2 || q >= 2 { 3 } else { 2 };
            let sv = s[..keep].to_vec();
            let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
            Ok(ExpandingPoint {
                point: x.coords().to_vec(),
                signature: (p, q),
                l,
                r,
                singular_values: sv,
                min_singular_value: min,
                in_b_e: l + r < 1.0,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularValueRow {
    pub l: f64,
    pub r: f64,
    pub s1: f64,
    pub s2: f64,
    pub s3: f64,
    pub min: f64,
    pub in_b_e: bool,
}

/// Singular values on the cell centres of an `n x n` grid of `(l, r) in (0,1)^2`,
/// skipping `l = r`.
pub fn singular_value_grid(n: usize) -> Result<Vec<SingularValueRow>> {
    let mut rows = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let l = (i as f64 + 0.5) / n as f64;
            let r = (j as f64 + 0.5) / n as f64;
            let [s1, s2, s3] = iota_singular_values(l, r)?;
            rows.push(SingularValueRow {
                l,
                r,
                s1,
                s2,
                s3,
                min: s1.min(s2).min(s3),
                in_b_e: l + r < 1.0,
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub system: String,
    pub orbits: u64,
    pub steps: u64,
    /// Largest distance outside the closed domain, in box coordinates.
    pub max_excess: f64,
    pub orbits_died: u64,
    pub steps_taken: u64,
}

/// Runs `n_orbits` orbits of `n_steps` from uniform starts and records how far
/// any iterate strays from the closed domain. Orbits stop at the null set.
pub fn orbit_containment(sys: &CfSystem, n_orbits: u64, n_steps: u64, seed: u64) -> ContainmentReport {
    let d = sys.dim();
    let (max_excess, died, taken) = (0..n_orbits)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i));
            let mut x = random_start(sys, &mut rng, None);
            let mut k = vec![0i64; d];
            let mut worst: f64 = 0.0;
            for s in 0..n_steps {
                if sys.step_in_place(&mut x, &mut k).is_err() {
                    return (worst, 1u64, s);
                }
                worst = worst.max(sys.domain_excess_fast(&x));
            }
            (worst, 0, n_steps)
        })
        .reduce(|| (0.0, 0, 0), |a, b| (a.0.max(b.0), a.1 + b.1, a.2 + b.2));
    ContainmentReport {
        system: sys.id().to_string(),
        orbits: n_orbits,
        steps: n_steps,
        max_excess,
        orbits_died: died,
        steps_taken: taken,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::systems::make_system;
    use approx::assert_abs_diff_eq;

    fn sys(id: SystemId) -> CfSystem {
        make_system(&id).unwrap()
    }

    fn dg(v: &[i64]) -> Digit {
        Digit(v.to_vec())
    }

    #[test]
    fn density_values_at_origin() {
        assert_abs_diff_eq!(
            closed_form_density(&sys(SystemId::Regular1D), &[0.0]).unwrap(),
            std::f64::consts::LOG2_E,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            closed_form_density(&sys(SystemId::ProductRegular(2)), &[0.0, 0.0]).unwrap(),
            2.081368,
            epsilon = 1e-6
        );
        assert_abs_diff_eq!(
            closed_form_density(&sys(SystemId::LittleDiamondC), &[0.0, 0.0]).unwrap(),
            4.162736,
            epsilon = 5e-6
        );
        assert!(matches!(
            closed_form_density(&sys(SystemId::SquareCF), &[0.0, 0.0]),
            Err(AnalysisError::NoClosedForm(_))
        ));
    }

    #[test]
    fn normalization_is_one() {
        for id in [
            SystemId::Regular1D,
            SystemId::ProductRegular(2),
            SystemId::LittleDiamondC,
            SystemId::LittleDiamondPlus,
        ] {
            let v = normalization_quadrature(&sys(id.clone()), 512).unwrap();
            assert!((v - 1.0).abs() < 1e-6, "{id}: {v}");
        }
        assert!(normalization_quadrature(&sys(SystemId::Regular1D), 8).is_err());
    }

    #[test]
    fn gauss_interval_is_invariant() {
        let r = invariance_residual(&sys(SystemId::Regular1D), &[vec![(1.0 / 3.0, 0.5)]], 10_000).unwrap();
        assert!(r <= 1e-6, "{r}");
    }

    #[test]
    fn truncation_alone_misses_the_tail() {
        let rule = gauss_legendre(12);
        let full = preimage_measure_1d(1.0 / 3.0, 0.5, 10_000, &rule);
        let head: f64 = (1..=10_000u64)
            .map(|m| {
                integrate(
                    gauss_factor,
                    1.0 / (m as f64 + 0.5),
                    1.0 / (m as f64 + 1.0 / 3.0),
                    &rule,
                )
            })
            .sum();
        assert!(full - head > 1e-5);
    }

    #[test]
    fn product_and_diamond_boxes_are_invariant() {
        let boxes = vec![vec![(0.1, 0.4), (0.25, 0.9)], vec![(0.0, 1.0), (0.5, 0.75)]];
        for id in [SystemId::ProductRegular(2), SystemId::LittleDiamondC] {
            let r = invariance_residual(&sys(id), &boxes, 10_000).unwrap();
            assert!(r <= 1e-6, "{r}");
        }
    }

    #[test]
    fn empty_box_has_zero_residual() {
        let r = invariance_residual(&sys(SystemId::Regular1D), &[vec![(0.4, 0.4)]], 10).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn lebesgue_is_not_invariant_but_gauss_is() {
        let s = sys(SystemId::Regular1D);
        let rule = gauss_legendre(12);
        let lebesgue_pre: f64 = (1..=10_000u64)
            .map(|m| 1.0 / (m as f64 + 1.0 / 3.0) - 1.0 / (m as f64 + 0.5))
            .sum();
        assert!((lebesgue_pre - (0.5 - 1.0 / 3.0)).abs() > 1e-3);
        assert!(invariance_residual(&s, &[vec![(0.0, 1.0)]], 10_000).unwrap() < 1e-6);
        assert!((preimage_measure_1d(0.0, 1.0, 10_000, &rule) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn histogram_invariants_and_worker_independence() {
        let s = sys(SystemId::ProductRegular(2));
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| empirical_density(&s, 2000, 5, 10, 20, 7).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a, b);
        let counted: u64 = a.cells.iter().map(|c| c.count).sum();
        assert_eq!(counted, a.total_samples);
        let mass: f64 = a.cells.iter().map(|c| c.density.unwrap() * a.cell_volume).sum();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn experimental_histograms_are_not_normalized() {
        let g = empirical_density(&sys(SystemId::BigDiamond), 200, 5, 5, 10, 1).unwrap();
        assert!(g.cells.iter().all(|c| c.density.is_none()));
        assert!(l1_to_closed_form(&sys(SystemId::BigDiamond), &g).is_err());
    }

    #[test]
    fn monte_carlo_error_halves_when_samples_quadruple() {
        let s = sys(SystemId::Regular1D);
        let mean_l1 = |n: u64| -> f64 {
            (0..8u64)
                .map(|k| {
                    let g = empirical_density(&s, n, 1, 20, 50, 1000 * k + n).unwrap();
                    l1_to_closed_form(&s, &g).unwrap()
                })
                .sum::<f64>()
                / 8.0
        };
        let ratio = mean_l1(20_000) / mean_l1(80_000);
        assert!((1.4..=2.6).contains(&ratio), "{ratio}");
    }

    #[test]
    fn mixing_examples() {
        let s = sys(SystemId::Regular1D);
        let rep = mixing_coverage(&s, &[(1.0 / 3.0, 0.5)], 3, 20_000, 5).unwrap();
        let exact = (9.0f64 / 8.0).ln() / LN_2;
        assert!((rep.coverage[0] - exact).abs() < 0.01, "{}", rep.coverage[0]);
        assert!(rep.coverage[1] > 0.999);
        assert!(rep.non_decreasing_within(3.0));

        let p = sys(SystemId::ProductRegular(2));
        let rep = mixing_coverage(&p, &[(1.0 / 3.0, 0.5), (0.25, 1.0 / 3.0)], 3, 100_000, 5).unwrap();
        assert!(rep.coverage[2..].iter().all(|&c| c >= 0.99), "{:?}", rep.coverage);
    }

    #[test]
    fn renyi_examples() {
        let r = renyi_ratio(&sys(SystemId::Regular1D), &[dg(&[2])], 16).unwrap();
        assert!(r.ratio >= 1.0 && r.ratio <= 4.0);
        // endpoints 1/3 and 1/2 give (3/2)^2
        assert_abs_diff_eq!(r.ratio, 2.25, epsilon = 1e-12);
        let p = renyi_ratio(&sys(SystemId::ProductRegular(2)), &[dg(&[2, 3])], 16).unwrap();
        assert!(p.ratio >= 1.0 && p.ratio <= 16.0);
        assert!(matches!(
            renyi_ratio(&sys(SystemId::SquareCF), &[dg(&[1, 1])], 4),
            Err(AnalysisError::NotProductType(_))
        ));
    }

    #[test]
    fn plus_and_c_jacobians_agree() {
        let c = sys(SystemId::LittleDiamondC);
        let plus = sys(SystemId::LittleDiamondPlus);
        let digits = vec![dg(&[2, 1]), dg(&[1, 3]), dg(&[4, 2])];
        let plus_digits = c.conjugate_odd_positions(&digits).unwrap();
        for x in cylinder_sample_points(&c, &digits, 32).unwrap() {
            let a = branch_jacobian(&c, &digits, &x).unwrap();
            let b = branch_jacobian(&plus, &plus_digits, &x).unwrap();
            assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
        }
    }

    #[test]
    fn boundary_image_stays_in_domain_and_skips_cone() {
        let s = sys(SystemId::SquareCF);
        let lines = boundary_image(&s, 5).unwrap();
        let n: usize = lines.iter().map(|l| l.points.len()).sum();
        assert_eq!(n, 4 * 5 - 8);
        let lines = boundary_image(&s, 400).unwrap();
        for l in &lines {
            for p in &l.points {
                assert!(s.in_closed_domain(p, 1e-12), "{p:?}");
            }
        }
    }

    #[test]
    fn expanding_examples() {
        let pts = [
            MinkVec::new(vec![0.3, 0.0, 0.2, 0.0], (2, 2)).unwrap(),
            MinkVec::new(vec![0.9, 0.0, 0.3, 0.0], (2, 2)).unwrap(),
        ];
        let rep = expanding_region_report(&pts).unwrap();
        assert_abs_diff_eq!(rep[0].min_singular_value, 4.0, epsilon = 1e-12);
        assert!(rep[0].in_b_e);
        assert_abs_diff_eq!(rep[1].min_singular_value, 1.2f64.powi(-2), epsilon = 1e-12);
        assert!(!rep[1].in_b_e);
        let null = MinkVec::new(vec![0.3, 0.0, 0.3, 0.0], (2, 2)).unwrap();
        assert!(expanding_region_report(&[null]).is_err());
    }

    #[test]
    fn expansion_holds_exactly_on_b_e() {
        for row in singular_value_grid(40).unwrap() {
            assert_eq!(row.min > 1.0, row.in_b_e, "{row:?}");
        }
    }

    #[test]
    fn short_square_orbits_stay_in_domain() {
        let rep = orbit_containment(&sys(SystemId::SquareCF), 50, 2000, 3);
        assert!(rep.max_excess <= 1e-9, "{rep:?}");
    }
}
