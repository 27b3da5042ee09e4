//! Subcommand implementations. Each builds a [`Report`]; printing and file
//! output are handled uniformly by [`Report::emit`].

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use cfx_core::analysis::{
    boundary_image, empirical_density, invariance_residual, l1_to_closed_form, mixing_coverage,
    normalization_quadrature, renyi_ratio, singular_value_grid,
};
use cfx_core::lagrange::{detect_period, exact_orbit, reconstruct_quadratic, verify_quadratic, Surd};
use cfx_core::numeric::{parse_rational, ratio_to_f64};
use cfx_core::{make_system, CfError, CfSystem, Digit, ExpansionStatus, SystemId};

use crate::config::*;
use crate::output::{write_outputs, Cell, Table};
use crate::CliError;

/// Largest number of digit words a single enumeration may produce.
const MAX_WORDS: u64 = 2_000_000;

pub struct Report {
    stem: String,
    table: Table,
    system: Option<CfSystem>,
    summary: Value,
    notes: Vec<String>,
    /// Printed to stdout; files are only written when `--output-dir` is set.
    inline: bool,
}

impl Report {
    pub fn emit(&self, cfg: &RunConfig) -> Result<(), CliError> {
        if self.inline {
            match cfg.format {
                Format::Csv => print!("{}", String::from_utf8_lossy(&self.table.to_csv()?)),
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&self.table.to_json()).map_err(std::io::Error::other)?
                ),
            }
            for n in &self.notes {
                println!("# {n}");
            }
        }
        let dir = match (&cfg.output_dir, self.inline) {
            (Some(d), _) => d.clone(),
            (None, false) => PathBuf::from("."),
            (None, true) => return Ok(()),
        };
        let written = write_outputs(&dir, &self.stem, &self.table, cfg, self.system.as_ref(), &self.summary)?;
        if !self.inline {
            for n in &self.notes {
                println!("{n}");
            }
            for p in written {
                println!("wrote {}", p.display());
            }
        }
        Ok(())
    }
}

pub fn dispatch(cfg: &RunConfig) -> Result<Report, CliError> {
    match &cfg.command {
        Command::Digits(a) => digits(a),
        Command::Lagrange(a) => lagrange(a),
        Command::Density(a) => density(a, cfg.seed),
        Command::Mixing(a) => mixing(a, cfg.seed),
        Command::Renyi(a) => renyi(a),
        Command::Cylinders(a) => cylinders(a),
        Command::Boundary(a) => boundary(a),
        Command::Singvals(a) => singvals(a),
        Command::Normcheck(a) => normcheck(a, cfg.seed),
        Command::Systems | Command::Replay(_) => Err(CliError::Config("nothing to execute".into())),
    }
}

pub fn list_systems() {
    let rows = [
        ("regular", "regular continued fractions on [0,1)"),
        ("alpha:<a>", "alpha continued fractions on [a-1,a), 0 <= a <= 1"),
        ("product:<d>", "product of d regular systems on [0,1)^d"),
        ("rect:<a1,..,ad>", "product of alpha systems"),
        ("even:<d>", "product of even continued fractions on [-1,1)^d"),
        (
            "diamond-c",
            "little diamond in the split-complex plane, algebra inverse",
        ),
        ("diamond-plus", "little diamond with the Minkowski inversion x/Q(x)"),
        ("alpha-diamond:<a1,a2>", "shifted little diamond, |a1|+|a2| < 1"),
        ("square", "square continued fractions on [-1/2,1/2)^2 (experimental)"),
        ("big-diamond", "big diamond |x1|+|x2| <= 1, algebra inverse"),
        ("lorentz3d", "three-dimensional Minkowski system (experimental)"),
    ];
    for (name, about) in rows {
        println!("{name:<24}{about}");
    }
}

fn system(name: &str) -> Result<CfSystem, CliError> {
    let id: SystemId = name.parse()?;
    Ok(make_system(&id)?)
}

fn stem(cmd: &str, system: &str) -> String {
    let clean: String = system
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{cmd}-{clean}")
}

fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}{i}"))
}

fn cols<I: IntoIterator<Item = String>>(parts: impl IntoIterator<Item = I>) -> Vec<String> {
    parts.into_iter().flatten().collect()
}

fn s(v: &str) -> Vec<String> {
    vec![v.to_string()]
}

fn floats(v: &[f64]) -> impl Iterator<Item = Cell> + '_ {
    v.iter().map(|&x| Cell::Float(x))
}

fn ints(v: &[i64]) -> impl Iterator<Item = Cell> + '_ {
    v.iter().map(|&x| Cell::Int(x))
}

fn word(digits: &[Digit]) -> String {
    digits.iter().map(Digit::to_string).collect()
}

// ---------------------------------------------------------------- parsing

enum Coord {
    Rational(BigRational),
    Surd(Surd),
}

fn parse_point(text: &str) -> Result<Vec<Coord>, CliError> {
    split_top_level(text)
        .into_iter()
        .map(|t| {
            if t.contains("sqrt") {
                t.parse::<Surd>().map(Coord::Surd).map_err(CliError::from)
            } else {
                parse_rational(t)
                    .map(Coord::Rational)
                    .ok_or_else(|| CliError::Parse(format!("not a number: '{t}'")))
            }
        })
        .collect()
}

/// Splits at commas outside parentheses, so surd literals may contain none.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in text.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(text[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(text[start..].trim());
    out
}

/// `(2,3)(1,-1)`, `(2,3) (1,-1)` or, for one-dimensional systems, `2 5 1` / `2,5,1`.
pub fn parse_word(text: &str, dim: usize) -> Result<Vec<Digit>, CliError> {
    let bad = || CliError::Parse(format!("cannot parse digit string '{text}'"));
    let int = |t: &str| t.trim().parse::<i64>().map_err(|_| bad());
    let digits: Vec<Digit> = if text.contains('(') {
        let mut out = Vec::new();
        let mut rest = text.trim();
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(bad)?;
            let end = body.find(')').ok_or_else(bad)?;
            out.push(Digit(body[..end].split(',').map(int).collect::<Result<_, _>>()?));
            rest = body[end + 1..].trim_start();
        }
        out
    } else {
        text.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| int(t).map(|k| Digit(vec![k])))
            .collect::<Result<_, _>>()?
    };
    if digits.is_empty() {
        return Err(bad());
    }
    if let Some(d) = digits.iter().find(|d| d.0.len() != dim) {
        return Err(CliError::Config(format!(
            "digit {d} has {} coordinates, the system has dimension {dim}",
            d.0.len()
        )));
    }
    Ok(digits)
}

fn parse_set(text: &str, dim: usize) -> Result<Vec<(f64, f64)>, CliError> {
    let v: Vec<f64> = text
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Parse(format!("not a number: '{t}'")))
        })
        .collect::<Result<_, _>>()?;
    if v.len() != 2 * dim {
        return Err(CliError::Config(format!(
            "--set needs {} numbers (lo,hi per axis), got {}",
            2 * dim,
            v.len()
        )));
    }
    Ok(v.chunks(2).map(|c| (c[0], c[1])).collect())
}

/// All words of the given depth with digit coordinates in `-bound..=bound`.
fn enumerate_words(dim: usize, depth: usize, bound: i64) -> Result<Vec<Vec<Digit>>, CliError> {
    if depth == 0 || bound < 0 {
        return Err(CliError::Config(
            "depth must be positive and digit bound non-negative".into(),
        ));
    }
    let per = 2 * bound as u64 + 1;
    let total = (dim * depth) as u32;
    match per.checked_pow(total) {
        Some(n) if n <= MAX_WORDS => {}
        _ => {
            return Err(CliError::Config(format!(
                "{per}^{total} digit strings exceed the limit of {MAX_WORDS}"
            )))
        }
    }
    let digits: Vec<Digit> = (0..per.pow(dim as u32))
        .map(|mut i| {
            Digit(
                (0..dim)
                    .map(|_| {
                        let k = (i % per) as i64 - bound;
                        i /= per;
                        k
                    })
                    .rev()
                    .collect(),
            )
        })
        .collect();
    let mut words: Vec<Vec<Digit>> = vec![Vec::new()];
    for _ in 0..depth {
        words = words
            .into_iter()
            .flat_map(|w| {
                digits.iter().map(move |d| {
                    let mut w = w.clone();
                    w.push(d.clone());
                    w
                })
            })
            .collect();
    }
    Ok(words)
}

// ---------------------------------------------------------------- digits

struct OrbitData {
    digits: Vec<Digit>,
    /// `T^n x` for `n = 1..`.
    points: Vec<Vec<f64>>,
    status: String,
    arith: &'static str,
}

fn status_text(s: ExpansionStatus) -> String {
    match s {
        ExpansionStatus::FiniteComplete(n) => format!("finite expansion: T^{n} x = 0"),
        ExpansionStatus::HitNullNonInvertible(n) => format!("terminated: T^{n} x lies in the null set"),
        ExpansionStatus::TruncatedAtMax(n) => format!("truncated after {n} digits"),
    }
}

fn digits(a: &DigitsArgs) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    let coords = parse_point(&a.point)?;
    if coords.len() != sys.dim() {
        return Err(CfError::DimensionMismatch {
            expected: sys.dim(),
            got: coords.len(),
        }
        .into());
    }
    let has_surd = coords.iter().any(|c| matches!(c, Coord::Surd(_)));
    let x: Vec<f64> = coords
        .iter()
        .map(|c| match c {
            Coord::Rational(r) => ratio_to_f64(r),
            Coord::Surd(s) => s.to_f64(),
        })
        .collect();
    let exact = match a.arith {
        Arith::Float => false,
        Arith::Exact => true,
        // decimals are taken as binary64 samples; fractions and surds as exact values
        Arith::Auto => sys.id().is_product_type() && (a.point.contains('/') || has_surd),
    };
    let data = if !exact {
        let (seq, orbit) = sys.orbit(&x, a.max_n)?;
        OrbitData {
            digits: seq.digits,
            points: orbit[1..].to_vec(),
            status: status_text(seq.status),
            arith: "float",
        }
    } else if has_surd {
        let surds: Vec<Surd> = coords
            .into_iter()
            .map(|c| match c {
                Coord::Rational(r) => Surd::rational(&r),
                Coord::Surd(s) => s,
            })
            .collect();
        let (digits, pts) = exact_orbit(&surds, sys.id(), a.max_n)?;
        let n = digits.len();
        let status = if n < a.max_n {
            format!("terminated: a coordinate of T^{n} x is 0")
        } else {
            format!("truncated after {n} digits")
        };
        OrbitData {
            digits,
            points: pts.iter().map(|p| p.iter().map(Surd::to_f64).collect()).collect(),
            status,
            arith: "exact-surd",
        }
    } else {
        let mut cur: Vec<BigRational> = coords
            .into_iter()
            .map(|c| match c {
                Coord::Rational(r) => r,
                Coord::Surd(_) => unreachable!(),
            })
            .collect();
        let seq = sys.expand_exact(&cur, a.max_n)?;
        let mut points = Vec::with_capacity(seq.digits.len());
        for _ in &seq.digits {
            cur = sys.gauss_step_exact(&cur)?.1;
            points.push(cur.iter().map(ratio_to_f64).collect());
        }
        OrbitData {
            digits: seq.digits,
            points,
            status: status_text(seq.status),
            arith: "exact-rational",
        }
    };

    let d = sys.dim();
    let mut table = Table::new(cols([
        s("step"),
        numbered("k", d).collect(),
        numbered("orbit", d).collect(),
        numbered("conv", d).collect(),
        s("error_inf"),
    ]));
    let convergents = if data.digits.is_empty() {
        Vec::new()
    } else {
        sys.assemble_convergents(&data.digits)?
    };
    let mut last_error = None;
    for (n, ((k, p), c)) in data.digits.iter().zip(&data.points).zip(&convergents).enumerate() {
        let err = c.iter().zip(&x).map(|(ci, xi)| (ci - xi).abs()).fold(0.0, f64::max);
        last_error = Some(err);
        let mut row = vec![Cell::from(n + 1)];
        row.extend(ints(&k.0));
        row.extend(floats(p));
        row.extend(floats(c));
        row.push(Cell::Float(err));
        table.push(row);
    }
    Ok(Report {
        stem: stem("digits", &a.system),
        table,
        system: Some(sys),
        summary: json!({
            "digits": data.digits.len(),
            "status": data.status,
            "arithmetic": data.arith,
            "final_error_inf": last_error,
        }),
        notes: vec![format!("status: {} ({} arithmetic)", data.status, data.arith)],
        inline: true,
    })
}

// ---------------------------------------------------------------- lagrange

fn term(coef: &BigInt, power: u32, first: bool) -> String {
    if coef.is_zero() {
        return String::new();
    }
    let sign = match (coef.is_negative(), first) {
        (true, true) => "-",
        (true, false) => " - ",
        (false, true) => "",
        (false, false) => " + ",
    };
    let mag = coef.abs();
    let one = mag == BigInt::from(1);
    let body = match power {
        0 => mag.to_string(),
        1 if one => "x".into(),
        1 => format!("{mag}x"),
        _ if one => format!("x^{power}"),
        _ => format!("{mag}x^{power}"),
    };
    format!("{sign}{body}")
}

fn polynomial(t: &[BigInt; 3]) -> String {
    let mut out = String::new();
    for (i, c) in t.iter().enumerate() {
        let piece = term(c, 2 - i as u32, out.is_empty());
        out.push_str(&piece);
    }
    if out.is_empty() {
        "0".into()
    } else {
        out
    }
}

fn lagrange(a: &LagrangeArgs) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    let x: Vec<Surd> = split_top_level(&a.point)
        .into_iter()
        .map(|t| t.parse::<Surd>())
        .collect::<Result<_, _>>()?;
    let exp = detect_period(&x, sys.id(), a.max_steps)?;
    let q = reconstruct_quadratic(&exp, sys.id())?;
    let verified = verify_quadratic(&x, &q);
    let join = |v: &[BigRational]| v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",");
    let mut table = Table::new(["field", "value"]);
    let mut row = |k: &str, v: Cell| table.push(vec![Cell::Str(k.into()), v]);
    row("preperiod", Cell::Str(word(&exp.preperiod)));
    row("period", Cell::Str(word(&exp.period)));
    row("a", Cell::Str(join(&q.a)));
    row("b", Cell::Str(join(&q.b)));
    row("c", Cell::Str(join(&q.c)));
    for (i, t) in q.diagonal.iter().enumerate() {
        row(&format!("diagonal{}", i + 1), Cell::Str(polynomial(t)));
    }
    row("verified", Cell::Bool(verified));
    Ok(Report {
        stem: stem("lagrange", &a.system),
        table,
        system: Some(sys),
        summary: json!({
            "preperiod_length": exp.preperiod.len(),
            "period_length": exp.period.len(),
            "quadratic": q,
            "verified": verified,
        }),
        notes: Vec::new(),
        inline: true,
    })
}

// ---------------------------------------------------------------- analysis

fn density(a: &DensityArgs, seed: u64) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    let g = empirical_density(&sys, a.orbits, a.steps, a.burn_in, a.grid, seed)?;
    let d = sys.dim();
    let mut table = Table::new(cols([
        numbered("i", d).collect(),
        numbered("u", d).collect(),
        numbered("x", d).collect(),
        s("count"),
        s("density"),
    ]));
    for (flat, cell) in g.cells.iter().enumerate() {
        let u = g.cell_center_box(flat);
        let x = sys.from_box(&u);
        let mut row: Vec<Cell> = g.cell_index(flat).into_iter().map(Cell::from).collect();
        row.extend(floats(&u));
        row.extend(floats(&x));
        row.push(Cell::from(cell.count));
        row.push(Cell::from(cell.density));
        table.push(row);
    }
    let l1 = l1_to_closed_form(&sys, &g).ok();
    let mut notes = vec![format!(
        "{} samples from {} orbits ({} discarded)",
        g.total_samples, g.orbits_used, g.orbits_died
    )];
    if let Some(v) = l1 {
        notes.push(format!("L1 distance to closed-form density: {v:.6}"));
    }
    if sys.is_experimental() {
        notes.push("diagnostic only: no invariant density is known for this system".into());
    }
    Ok(Report {
        stem: stem("density", &a.system),
        table,
        summary: json!({
            "grid_shape": g.shape,
            "cell_volume": g.cell_volume,
            "total_samples": g.total_samples,
            "orbits_used": g.orbits_used,
            "orbits_died": g.orbits_died,
            "l1_to_closed_form": l1,
            "experimental": sys.is_experimental(),
        }),
        system: Some(sys),
        notes,
        inline: false,
    })
}

fn mixing(a: &MixingArgs, seed: u64) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    let set_a = parse_set(&a.set, sys.dim())?;
    let r = mixing_coverage(&sys, &set_a, a.n_max, a.samples, seed)?;
    let mut table = Table::new(["n", "coverage", "stderr"]);
    for ((n, c), e) in r.n_values.iter().zip(&r.coverage).zip(&r.stderr) {
        table.push(vec![Cell::from(*n), Cell::Float(*c), Cell::Float(*e)]);
    }
    let last = r.coverage.last().copied();
    let monotone = r.non_decreasing_within(3.0);
    Ok(Report {
        stem: stem("mixing", &a.system),
        table,
        summary: json!({
            "set": set_a,
            "samples": r.samples,
            "final_coverage": last,
            "non_decreasing_within_3se": monotone,
        }),
        system: Some(sys),
        notes: vec![format!(
            "coverage at n={}: {:.6}; non-decreasing within 3 SE: {monotone}",
            a.n_max,
            last.unwrap_or(f64::NAN)
        )],
        inline: false,
    })
}

fn renyi(a: &RenyiArgs) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    let explicit = !a.cylinder.is_empty();
    let words = if explicit {
        a.cylinder
            .iter()
            .map(|t| parse_word(t, sys.dim()))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        (1..=a.depth)
            .map(|k| enumerate_words(sys.dim(), k, a.digit_bound))
            .collect::<Result<Vec<_>, _>>()?
            .concat()
    };
    let mut table = Table::new(["cylinder", "depth", "sup_jac", "inf_jac", "ratio", "sample_points"]);
    let (mut worst, mut skipped) = (0.0f64, 0usize);
    for w in &words {
        let r = match renyi_ratio(&sys, w, a.samples) {
            Ok(r) => r,
            Err(cfx_core::analysis::AnalysisError::Cf(CfError::EmptyCylinder | CfError::SplitCylinder))
                if !explicit =>
            {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        worst = worst.max(r.ratio);
        table.push(vec![
            Cell::Str(r.cylinder),
            Cell::from(r.depth),
            Cell::Float(r.sup_jac),
            Cell::Float(r.inf_jac),
            Cell::Float(r.ratio),
            Cell::from(r.sample_points),
        ]);
    }
    Ok(Report {
        stem: stem("renyi", &a.system),
        summary: json!({ "cylinders": table.rows.len(), "skipped_empty": skipped, "max_ratio": worst }),
        table,
        system: Some(sys),
        notes: vec![format!("max distortion ratio {worst:.9}")],
        inline: false,
    })
}

fn cylinders(a: &CylindersArgs) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    if sys.diagonal().is_none() {
        return Err(CfError::NotProductType.into());
    }
    let d = sys.dim();
    let n_corners = 1usize << d;
    let mut columns = vec!["word".to_string()];
    for j in 1..=a.depth {
        columns.extend((1..=d).map(|i| format!("d{j}_{i}")));
    }
    columns.push("full".into());
    for i in 1..=d {
        columns.extend([format!("t{i}"), format!("t{i}_lo"), format!("t{i}_hi")]);
    }
    for c in 1..=n_corners {
        columns.extend((1..=d).map(|i| format!("c{c}_x{i}")));
    }
    let mut table = Table::new(columns);
    let (mut full, mut skipped) = (0usize, 0usize);
    for w in enumerate_words(d, a.depth, a.digit_bound)? {
        let cyl = match sys.cylinder_of(&w) {
            Ok(c) => c,
            Err(CfError::EmptyCylinder | CfError::SplitCylinder) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let is_full = cyl.is_full();
        full += is_full as usize;
        let mut row = vec![Cell::Str(word(&w))];
        for dg in &w {
            row.extend(ints(&dg.0));
        }
        row.push(Cell::Bool(is_full));
        for iv in &cyl.diag_box {
            row.extend([
                Cell::Str(iv.to_string()),
                Cell::Float(iv.lo_f64()),
                Cell::Float(iv.hi_f64()),
            ]);
        }
        match cyl.space_corners(&sys) {
            Some(cs) => {
                for c in cs {
                    row.extend(floats(&c));
                }
            }
            None => row.extend(std::iter::repeat_n(Cell::Empty, n_corners * d)),
        }
        table.push(row);
    }
    let n = table.rows.len();
    Ok(Report {
        stem: stem("cylinders", &a.system),
        table,
        summary: json!({ "cylinders": n, "full": full, "skipped_empty": skipped, "depth": a.depth }),
        system: Some(sys),
        notes: vec![format!("{n} non-empty cylinders, {full} full")],
        inline: false,
    })
}

fn boundary(a: &BoundaryArgs) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    let lines = boundary_image(&sys, a.samples_per_edge)?;
    let mut table = Table::new(["polyline", "k1", "k2", "index", "x1", "x2"]);
    for (id, pl) in lines.iter().enumerate() {
        for (j, p) in pl.points.iter().enumerate() {
            let mut row = vec![Cell::from(id)];
            row.extend(ints(&pl.digit.0));
            row.push(Cell::from(j));
            row.extend(floats(p));
            table.push(row);
        }
    }
    Ok(Report {
        stem: stem("boundary", &a.system),
        table,
        summary: json!({ "polylines": lines.len(), "experimental": sys.is_experimental() }),
        system: Some(sys),
        notes: vec![format!("{} polylines", lines.len())],
        inline: false,
    })
}

fn singvals(a: &SingvalsArgs) -> Result<Report, CliError> {
    let rows = singular_value_grid(a.n)?;
    let mut table = Table::new(["l", "r", "s1", "s2", "s3", "min", "in_b_e"]);
    let mut worst_inside = f64::INFINITY;
    for r in &rows {
        if r.in_b_e {
            worst_inside = worst_inside.min(r.min);
        }
        table.push(vec![
            Cell::Float(r.l),
            Cell::Float(r.r),
            Cell::Float(r.s1),
            Cell::Float(r.s2),
            Cell::Float(r.s3),
            Cell::Float(r.min),
            Cell::Bool(r.in_b_e),
        ]);
    }
    let worst = worst_inside.is_finite().then_some(worst_inside);
    Ok(Report {
        stem: format!("singvals-n{}", a.n),
        table,
        summary: json!({ "points": rows.len(), "min_singular_value_in_b_e": worst }),
        system: None,
        notes: vec![format!("smallest singular value inside B_E: {worst:?}")],
        inline: false,
    })
}

fn normcheck(a: &NormcheckArgs, seed: u64) -> Result<Report, CliError> {
    let sys = system(&a.system)?;
    let norm = normalization_quadrature(&sys, a.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boxes: Vec<Vec<(f64, f64)>> = (0..a.boxes)
        .map(|_| {
            (0..sys.dim())
                .map(|_| {
                    let (u, v) = (rng.random::<f64>(), rng.random::<f64>());
                    (u.min(v), u.max(v))
                })
                .collect()
        })
        .collect();
    let mut table = Table::new(["check", "value", "tolerance", "pass"]);
    let tol = 1e-6;
    let norm_err = (norm - 1.0).abs();
    table.push(vec![
        Cell::Str("normalization_error".into()),
        Cell::Float(norm_err),
        Cell::Float(tol),
        Cell::Bool(norm_err <= tol),
    ]);
    let resid = invariance_residual(&sys, &boxes, a.branch_cut)?;
    table.push(vec![
        Cell::Str("invariance_residual".into()),
        Cell::Float(resid),
        Cell::Float(tol),
        Cell::Bool(resid <= tol),
    ]);
    let pass = norm_err <= tol && resid <= tol;
    Ok(Report {
        stem: stem("normcheck", &a.system),
        table,
        summary: json!({
            "normalization": norm,
            "invariance_residual": resid,
            "boxes": boxes,
            "pass": pass,
        }),
        system: Some(sys),
        notes: vec![format!(
            "normalization error {norm_err:.3e}, invariance residual {resid:.3e}"
        )],
        inline: false,
    })
}
