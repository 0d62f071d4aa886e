//! Regeneration of the four reference tables with per-entry differences.
//!
//! 1. eigenvalues of the complex-dimension transfer matrix, `M = 4`, `S^z = 0`
//! 2. special-branch groundstate `Q̃⁺` and `t̃` for `M = 10` and several twists
//! 3. number of periodic Wronskian solutions for `M = 3 … 10`
//! 4. the periodic Wronskian solutions for `M = 6`, `S^z = 0`
//!
//! Reference values are the printed ones where they check out; entries known
//! to be misprinted use the independently computed value, and the printed
//! one is kept in [`PrintedEntry`] for comparison at printed precision.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fusion::{self, LimitMethod};
use crate::lattice::{ChainConfig, SpinSector};
use crate::poly::CPoly;
use crate::wronskian::{self, PSOptions, SolveOptions, SpecialSolution};

#[derive(Clone, Debug)]
pub struct TableEntry {
    pub label: String,
    pub computed: Complex64,
    pub expected: Complex64,
    pub tolerance: f64,
}

impl TableEntry {
    fn new(label: impl Into<String>, computed: Complex64, expected: Complex64, tolerance: f64) -> Self {
        TableEntry {
            label: label.into(),
            computed,
            expected,
            tolerance,
        }
    }

    pub fn diff(&self) -> f64 {
        (self.computed - self.expected).norm()
    }

    pub fn pass(&self) -> bool {
        self.diff() <= self.tolerance
    }
}

#[derive(Clone, Debug)]
pub struct TableReport {
    pub id: u8,
    pub title: String,
    pub entries: Vec<TableEntry>,
    pub notes: Vec<String>,
}

impl TableReport {
    pub fn pass(&self) -> bool {
        !self.entries.is_empty() && self.entries.iter().all(TableEntry::pass)
    }

    pub fn failures(&self) -> Vec<&TableEntry> {
        self.entries.iter().filter(|e| !e.pass()).collect()
    }

    pub fn worst(&self) -> f64 {
        self.entries.iter().map(TableEntry::diff).fold(0.0, f64::max)
    }
}

fn fmt_c(z: Complex64) -> String {
    if z.im.abs() < 1e-12 * z.re.abs().max(1.0) {
        format!("{:.10}", z.re)
    } else {
        format!("{:.10}{:+.10}i", z.re, z.im)
    }
}

impl fmt::Display for TableReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Table {}: {}", self.id, self.title)?;
        for e in &self.entries {
            writeln!(
                f,
                "  {} {:<28} computed {:>28}  expected {:>28}  |diff| {:.2e} (tol {:.0e})",
                if e.pass() { "ok  " } else { "FAIL" },
                e.label,
                fmt_c(e.computed),
                fmt_c(e.expected),
                e.diff(),
                e.tolerance
            )?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        write!(
            f,
            "  {} entries, worst |diff| {:.2e}: {}",
            self.entries.len(),
            self.worst(),
            if self.pass() { "PASS" } else { "FAIL" }
        )
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn r(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

// ---------------------------------------------------------------- Table 1

pub const TABLE1_TOL: f64 = 1e-6;

/// Sample points for the x-fit.
pub const TABLE1_XS: [f64; 7] = [1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 0.5];

/// Rows of Table 1 as `[λ^k][x^j]` coefficients, `j` odd from 1 to 5.
fn table1_rows() -> Vec<(&'static str, [[Complex64; 3]; 5])> {
    let z = r(0.0);
    let top = [[r(2.0), z, z], [r(1.0), z, z]];
    let row = |l0: [Complex64; 3], l1: [Complex64; 3], l2: [Complex64; 3]| [l0, l1, l2, top[0], top[1]];
    vec![
        (
            "P=π (1)",
            row(
                [r(0.5), r(-0.5), r(1.0 / 16.0)],
                [r(1.0), r(-0.5), z],
                [r(2.0), r(-0.5), z],
            ),
        ),
        (
            "P=π (2)",
            row(
                [r(1.0 / 6.0), r(-1.0 / 12.0), r(-1.0 / 48.0)],
                [r(4.0 / 6.0), r(-1.0 / 6.0), z],
                [r(10.0 / 6.0), r(-1.0 / 6.0), z],
            ),
        ),
        (
            "P=0 (1)",
            row(
                [r(1.0 / 6.0), r(-1.0 / 6.0), r(1.0 / 16.0)],
                [r(1.0), r(-0.5), z],
                [r(2.0), r(-0.5), z],
            ),
        ),
        (
            "P=0 (2)",
            row(
                [r(-1.0 / 30.0), r(1.0 / 12.0), r(1.0 / 80.0)],
                [z, r(0.5), z],
                [r(1.0), r(0.5), z],
            ),
        ),
        (
            "P=π/2 (1)",
            row(
                [c(0.0, 8.0 / 48.0), c(4.0 / 48.0, -8.0 / 48.0), r(-1.0 / 48.0)],
                [c(4.0 / 6.0, 2.0 / 6.0), c(-1.0 / 6.0, -2.0 / 6.0), z],
                [r(10.0 / 6.0), r(-1.0 / 6.0), z],
            ),
        ),
        (
            "P=π/2 (2)",
            row(
                [c(0.0, -8.0 / 48.0), c(4.0 / 48.0, 8.0 / 48.0), r(-1.0 / 48.0)],
                [c(4.0 / 6.0, -2.0 / 6.0), c(-1.0 / 6.0, 2.0 / 6.0), z],
                [r(10.0 / 6.0), r(-1.0 / 6.0), z],
            ),
        ),
    ]
}

fn table1_expected_poly(row: &[[Complex64; 3]; 5], k: usize) -> CPoly {
    let mut coeffs = vec![r(0.0); 7];
    for (j, &v) in row[k].iter().enumerate() {
        coeffs[2 * j + 1] = v;
    }
    CPoly::from_coeffs_untrimmed(coeffs)
}

/// Six eigenvalues of `t(λ;x)` for the homogeneous four-site chain at
/// `S^z = 0`, as polynomials in `λ` and `x`.
pub fn table1(method: LimitMethod) -> Result<TableReport> {
    let cfg = ChainConfig::homogeneous(4, r(1.0))?;
    let xs: Vec<Complex64> = TABLE1_XS.iter().map(|&x| r(x)).collect();
    let computed = fusion::complex_dim_x_polynomials(&cfg, SpinSector::new(0), &xs, method)?;
    let rows = table1_rows();
    let mut used = vec![false; computed.len()];
    let mut entries = Vec::new();
    for (label, row) in &rows {
        // closest unused eigenvalue by polynomial content
        let dist = |cand: &Vec<CPoly>| {
            (0..5)
                .map(|k| cand[k].max_abs_diff(&table1_expected_poly(row, k)))
                .fold(0.0, f64::max)
        };
        let best = (0..computed.len())
            .filter(|&i| !used[i])
            .min_by(|&a, &b| dist(&computed[a]).total_cmp(&dist(&computed[b])))
            .ok_or_else(|| Error::Inconsistency("fewer eigenvalues than table rows".into()))?;
        used[best] = true;
        for k in 0..5 {
            let want = table1_expected_poly(row, k);
            for j in 0..7 {
                entries.push(TableEntry::new(
                    format!("{label} λ^{k} x^{j}"),
                    computed[best][k].coeff(j),
                    want.coeff(j),
                    TABLE1_TOL,
                ));
            }
        }
    }
    Ok(TableReport {
        id: 1,
        title: "spectrum of the transfer matrix with complex dimension x (M = 4, S^z = 0)".into(),
        entries,
        notes: vec!["rows matched by polynomial content; momentum labels are not used".into()],
    })
}

// ---------------------------------------------------------------- Table 2

pub const TABLE2_TOL: f64 = 1e-5;
pub const TABLE2_LIMIT_TOL: f64 = 1e-4;

/// Reference groundstate data for one twist: `Q̃⁺` coefficients from `u⁵`
/// down to `u⁰` and even `t̃` coefficients from `u¹⁰` down to `u⁰`.
#[derive(Clone, Debug)]
pub struct Table2Row {
    pub label: &'static str,
    pub phi: f64,
    pub qp: [f64; 6],
    pub t_even: [f64; 6],
}

/// Independently computed reference values (six or more significant digits).
pub fn table2_reference() -> Vec<Table2Row> {
    use std::f64::consts::PI;
    vec![
        Table2Row {
            label: "φ=π/2 (+)",
            phi: PI / 2.0,
            qp: [1.0, -0.77696619, -0.32316177, 0.11173122, 0.01189097, -0.00109751],
            t_even: [0.0, 1.553932, 6.047514, 9.740553, 7.584834, 2.375846],
        },
        Table2Row {
            label: "φ=π/2 (−)",
            phi: PI / 2.0,
            qp: [1.0, 0.77696619, -0.32316177, -0.11173122, 0.01189097, 0.00109751],
            t_even: [0.0, -1.553932, -6.047514, -9.740553, -7.584834, -2.375846],
        },
        Table2Row {
            label: "φ=π/20",
            phi: PI / 20.0,
            qp: [1.0, -0.069351583, -0.403660849, 0.010576718, 0.016672083, -0.000107935],
            t_even: [1.975377, 7.429361, 13.589264, 14.855107, 9.333345, 2.590132],
        },
        Table2Row {
            label: "φ=π/200",
            phi: PI / 200.0,
            qp: [1.0, -0.006928813, -0.404443159, 0.001057307, 0.016719867, -0.000010794],
            t_even: [1.999753, 7.499292, 13.675831, 14.911896, 9.352242, 2.592411],
        },
        Table2Row {
            label: "φ→0",
            phi: 0.0,
            qp: [1.0, 0.0, -0.404451, 0.0, 0.0167203, 0.0],
            t_even: [2.0, 7.5, 13.6767, 14.9125, 9.35243, 2.59243],
        },
    ]
}

/// One printed number, its number of decimals, and whether it is a known
/// misprint.
#[derive(Clone, Debug)]
pub struct PrintedEntry {
    pub label: String,
    pub printed: f64,
    pub decimals: u32,
    pub computed: f64,
    pub misprint: bool,
}

impl PrintedEntry {
    /// Agreement to one unit in the last printed place.
    pub fn agrees(&self) -> bool {
        (self.printed - self.computed).abs() <= 10f64.powi(-(self.decimals as i32)) * (1.0 + 1e-9)
    }
}

/// Printed Table 2 numbers: `(row, coefficient label, value, decimals, misprint)`.
#[allow(clippy::type_complexity)]
fn table2_printed() -> Vec<(usize, &'static str, f64, u32, bool)> {
    vec![
        (0, "Q u^4", -0.7769661, 7, false),
        (0, "Q u^3", -0.3231618, 7, false),
        (0, "Q u^2", 0.1117312, 7, false),
        (0, "Q u^1", 0.011890969, 9, false),
        (0, "Q u^0", -0.01189097, 8, true),
        (0, "t u^8", 1.553932, 6, false),
        (0, "t u^6", 6.04751, 5, false),
        (0, "t u^4", 9.74055, 5, false),
        (0, "t u^2", 7.58483, 5, false),
        (0, "t u^0", 2.37584, 5, false),
        (2, "Q u^4", -0.06935158, 8, false),
        (2, "Q u^3", -0.403661, 6, false),
        (2, "Q u^2", 0.01057672, 8, false),
        (2, "Q u^1", -0.0166721, 7, true),
        (2, "Q u^0", -0.000107935, 9, false),
        (2, "t u^10", 1.97538, 5, false),
        (2, "t u^8", 7.42936, 5, false),
        (2, "t u^6", 13.5893, 4, false),
        (2, "t u^4", 14.8551, 4, false),
        (2, "t u^2", 9.33335, 5, false),
        (2, "t u^0", 2.59013, 5, false),
        (3, "Q u^4", -0.00692881, 8, false),
        (3, "Q u^3", -0.404443, 6, false),
        (3, "Q u^2", 0.00105731, 8, false),
        (3, "Q u^1", -0.0167203, 7, true),
        (3, "Q u^0", -0.000107938, 9, true),
        (3, "t u^10", 1.99975, 5, false),
        (3, "t u^8", 7.49929, 5, false),
        (3, "t u^6", 13.6758, 4, false),
        (3, "t u^4", 14.9119, 4, false),
        (3, "t u^2", 9.35224, 5, false),
        (3, "t u^0", 2.59241, 5, false),
        (4, "Q u^3", -0.404451, 6, false),
        (4, "Q u^1", -0.0167203, 7, true),
        (4, "t u^10", 2.0, 6, false),
        (4, "t u^8", 7.5, 6, false),
        (4, "t u^6", 13.6767, 4, false),
        (4, "t u^4", 14.9125, 4, false),
        (4, "t u^2", 9.35243, 5, false),
        (4, "t u^0", 2.59243, 5, false),
    ]
}

#[derive(Clone, Debug)]
pub struct Table2Result {
    pub report: TableReport,
    pub printed: Vec<PrintedEntry>,
    /// Computed `Q̃⁺` (descending) and even `t̃` coefficients per row.
    pub computed: Vec<([f64; 6], [f64; 6])>,
}

#[derive(Clone, Debug)]
pub struct Table2Options {
    pub solve: SolveOptions,
    /// Twist from which the groundstate is followed to `φ → 0`.
    pub limit_start_phi: f64,
    pub phi_min: f64,
}

impl Default for Table2Options {
    fn default() -> Self {
        Table2Options {
            solve: SolveOptions::default(),
            limit_start_phi: 0.2,
            phi_min: 1e-5,
        }
    }
}

fn descending(p: &CPoly, deg: usize) -> Vec<Complex64> {
    (0..=deg).rev().map(|k| p.coeff(k)).collect()
}

fn even_desc(t: &CPoly, deg: usize) -> Vec<Complex64> {
    (0..=deg).rev().step_by(2).map(|k| t.coeff(k)).collect()
}

/// Real coefficients and every even `t̃` coefficient of one sign.
fn uniform_sign(s: &SpecialSolution) -> Option<f64> {
    let scale = s.t_u.max_abs_coeff().max(1.0);
    let evens: Vec<Complex64> = (0..=s.pair.sites).step_by(2).map(|k| s.t_u.coeff(k)).collect();
    if evens.iter().any(|c| c.im.abs() > 1e-8 * scale) {
        return None;
    }
    let nz: Vec<f64> = evens.iter().map(|c| c.re).filter(|v| v.abs() > 1e-8 * scale).collect();
    if nz.len() + 1 < evens.len() {
        return None;
    }
    if nz.iter().all(|&v| v > 0.0) {
        Some(1.0)
    } else if nz.iter().all(|&v| v < 0.0) {
        Some(-1.0)
    } else {
        None
    }
}

/// Groundstate of the special branch at twist `e^{iφ}`; at `φ = π/2`
/// where `ω + ω⁻¹ = 0` the sign is chosen explicitly.
pub fn special_groundstate(sites: usize, phi: f64, sign: f64, opts: &SolveOptions) -> Result<SpecialSolution> {
    let cfg = ChainConfig::with_phi(sites, phi)?;
    let rep = wronskian::special_branch_solve(&cfg, opts)?;
    rep.solutions
        .into_iter()
        .find(|s| uniform_sign(s) == Some(sign))
        .ok_or_else(|| Error::Inconsistency(format!("no uniform-sign special solution at φ = {phi}")))
}

/// Table 2: computed at the three twists and in the periodic limit.
pub fn table2(opts: &Table2Options) -> Result<Table2Result> {
    let refs = table2_reference();
    let mut entries = Vec::new();
    let mut computed = Vec::new();
    let mut notes = Vec::new();
    for row in &refs {
        let (qp, t) = if row.phi > 0.0 {
            let sign = if row.label.ends_with("(−)") { -1.0 } else { 1.0 };
            let s = special_groundstate(10, row.phi, sign, &opts.solve)?;
            (descending(&s.qp_u, 5), even_desc(&s.t_u, 10))
        } else {
            let s = special_groundstate(10, opts.limit_start_phi, 1.0, &opts.solve)?;
            let cfg = ChainConfig::with_phi(10, opts.limit_start_phi)?;
            let b = wronskian::track_to_periodic(&cfg, &s.pair, opts.phi_min, 1e6);
            if b.class != wronskian::LimitClass::Finite {
                return Err(Error::Inconsistency(format!("groundstate limit classified {:?}: {}", b.class, b.note)));
            }
            notes.push(format!(
                "φ→0 row from the groundstate followed from φ = {} to φ = {:.2e}",
                opts.limit_start_phi, b.phi_reached
            ));
            (descending(&b.qp_u, 5), even_desc(&b.t_u, 10))
        };
        let tol = if row.phi > 0.0 { TABLE2_TOL } else { TABLE2_LIMIT_TOL };
        let mut cq = [0.0; 6];
        let mut ct = [0.0; 6];
        for k in 0..6 {
            cq[k] = qp[k].re;
            ct[k] = t[k].re;
            entries.push(TableEntry::new(format!("{} Q u^{}", row.label, 5 - k), qp[k], r(row.qp[k]), tol));
        }
        for k in 0..6 {
            entries.push(TableEntry::new(format!("{} t u^{}", row.label, 10 - 2 * k), t[k], r(row.t_even[k]), tol));
        }
        computed.push((cq, ct));
    }
    let printed = table2_printed()
        .into_iter()
        .map(|(row, what, value, decimals, misprint)| {
            let deg: usize = what[4..].parse().expect("coefficient label");
            let val = if what.starts_with('Q') {
                computed[row].0[5 - deg]
            } else {
                computed[row].1[(10 - deg) / 2]
            };
            PrintedEntry {
                label: format!("{} {}", refs[row].label, what),
                printed: value,
                decimals,
                computed: val,
                misprint,
            }
        })
        .collect();
    notes.push("printed u^1 signs of Q at φ = π/20, π/200, 0 and the constants at φ = π/2, π/200 are misprints".into());
    Ok(Table2Result {
        report: TableReport {
            id: 2,
            title: "special-branch groundstate of Q and t, M = 10, S^z = 0".into(),
            entries,
            notes,
        },
        printed,
        computed,
    })
}

// ---------------------------------------------------------------- Table 3

/// `(M, 2S^z, dim, number of solutions)`.
pub const TABLE3: [(usize, i32, usize, usize); 8] = [
    (3, 1, 3, 2),
    (4, 0, 6, 2),
    (5, 1, 10, 5),
    (6, 0, 20, 5),
    (7, 1, 35, 14),
    (8, 0, 70, 14),
    (9, 1, 126, 42),
    (10, 0, 252, 42),
];

pub fn table3(opts: &PSOptions, max_sites: usize) -> Result<TableReport> {
    let mut entries = Vec::new();
    let mut notes = Vec::new();
    for &(m, twice_sz, dim, count) in TABLE3.iter().filter(|row| row.0 <= max_sites) {
        let sector = SpinSector::new(twice_sz);
        let rep = wronskian::ps_solve(m, sector, opts)?;
        entries.push(TableEntry::new(
            format!("M={m} dim"),
            r(sector.dim(m)? as f64),
            r(dim as f64),
            0.0,
        ));
        entries.push(TableEntry::new(format!("M={m} solutions"), r(rep.solutions.len() as f64), r(count as f64), 0.0));
        if let Some(u) = rep.unmatched {
            if u > 0 {
                notes.push(format!("M={m}: {u} solutions without an oracle eigenvalue"));
            }
        }
    }
    Ok(TableReport {
        id: 3,
        title: "number of periodic Wronskian solutions".into(),
        entries,
        notes,
    })
}

// ---------------------------------------------------------------- Table 4

pub const TABLE4_TOL: f64 = 1e-9;

/// Closed forms of the five `M = 6`, `S^z = 0` solutions: `𝒬⁺`, `i𝒬⁻` and
/// `t̃`, ascending coefficients. Row 1 and the `i𝒬⁻` constants of row 2 are
/// the corrected forms.
pub fn table4_reference() -> Vec<(String, CPoly, CPoly, CPoly)> {
    let s13 = 13f64.sqrt();
    let s3 = 3f64.sqrt();
    let mut rows = vec![(
        "row 1".to_string(),
        CPoly::from_real(&[0.0, 0.25, 0.0, 1.0]),
        CPoly::from_real(&[-1.0 / 48.0, 0.0, 1.5, 0.0, 1.0]),
        CPoly::from_real(&[-25.0 / 32.0, 0.0, 15.0 / 8.0, 0.0, 4.5, 0.0, 2.0]),
    )];
    for (tag, e) in [("−", -1.0), ("+", 1.0)] {
        // upper sign of ∓ is e = −1
        rows.push((
            format!("row 2 ({tag}√13)"),
            CPoly::from_real(&[0.0, (5.0 + e * 2.0 * s13) / 12.0, 0.0, 1.0]),
            CPoly::from_real(&[(7.0 + e * 2.0 * s13) / 16.0, 0.0, (4.0 + e * s13) / 2.0, 0.0, 1.0]),
            CPoly::from_real(&[(31.0 - e * 8.0 * s13) / 32.0, 0.0, (7.0 - e * 8.0 * s13) / 8.0, 0.0, 4.5, 0.0, 2.0]),
        ));
    }
    for (tag, e) in [("+", 1.0), ("−", -1.0)] {
        rows.push((
            format!("row 3 ({tag}1/√3)"),
            CPoly::from_real(&[e / (4.0 * s3), 1.0 / 12.0, 0.0, 1.0]),
            CPoly::from_real(&[-1.0 / 16.0, e / (2.0 * s3), 1.0, 0.0, 1.0]),
            CPoly::from_real(&[-1.0 / 32.0, -e * s3, 23.0 / 8.0, 0.0, 4.5, 0.0, 2.0]),
        ));
    }
    rows
}

pub fn table4(opts: &PSOptions) -> Result<TableReport> {
    let rep = wronskian::ps_solve(6, SpinSector::new(0), opts)?;
    let i = c(0.0, 1.0);
    let mut entries = Vec::new();
    let mut used = vec![false; rep.solutions.len()];
    for (label, qp, iqm, t) in table4_reference() {
        let best = (0..rep.solutions.len())
            .filter(|&k| !used[k])
            .min_by(|&a, &b| {
                rep.solutions[a]
                    .qp
                    .max_abs_diff(&qp)
                    .total_cmp(&rep.solutions[b].qp.max_abs_diff(&qp))
            })
            .ok_or_else(|| Error::IncompleteSet {
                expected: 5,
                found: rep.solutions.len(),
            })?;
        used[best] = true;
        let s = &rep.solutions[best];
        let siqm = s.qm.scale(i);
        for k in 0..=3 {
            entries.push(TableEntry::new(format!("{label} Q+ u^{k}"), s.qp.coeff(k), qp.coeff(k), TABLE4_TOL));
        }
        for k in 0..=4 {
            entries.push(TableEntry::new(format!("{label} iQ- u^{k}"), siqm.coeff(k), iqm.coeff(k), TABLE4_TOL));
        }
        for k in 0..=6 {
            entries.push(TableEntry::new(format!("{label} t u^{k}"), s.t_poly.coeff(k), t.coeff(k), TABLE4_TOL));
        }
    }
    Ok(TableReport {
        id: 4,
        title: "periodic Wronskian solutions, M = 6, S^z = 0".into(),
        entries,
        notes: vec!["row 1 Q+ = u(u²+1/4), row 1 iQ- u² coefficient +3/2 and row 2 iQ- constant +(7∓2√13)/16 are corrected forms".into()],
    })
}

/// Regenerates one table with default settings.
pub fn reproduce(id: u8) -> Result<TableReport> {
    match id {
        1 => table1(LimitMethod::default()),
        2 => table2(&Table2Options::default()).map(|t| t.report),
        3 => table3(&PSOptions::default(), 10),
        4 => table4(&PSOptions::default()),
        _ => Err(Error::InvalidConfig(format!("no table {id}; tables are 1 to 4"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_rows_are_odd_in_x() {
        for (_, row) in table1_rows() {
            let p = table1_expected_poly(&row, 0);
            for j in (0..7).step_by(2) {
                assert_eq!(p.coeff(j), r(0.0));
            }
        }
        // x = 1: every eigenvalue is the quantum determinant (λ + 1/2)^4
        let chi = CPoly::from_real(&[1.0 / 16.0, 0.5, 1.5, 2.0, 1.0]);
        for (_, row) in table1_rows() {
            for k in 0..5 {
                let v = table1_expected_poly(&row, k).eval(r(1.0));
                assert!((v - chi.coeff(k)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn table1_reproduced() {
        let rep = table1(LimitMethod::default()).unwrap();
        assert!(rep.pass(), "{rep}");
        assert_eq!(rep.entries.len(), 6 * 5 * 7);
    }

    #[test]
    fn table4_reproduced() {
        let rep = table4(&PSOptions::default()).unwrap();
        assert!(rep.pass(), "{rep}");
    }

    #[test]
    fn table4_reference_consistent() {
        // every closed form satisfies the periodic Wronskian with 𝒬⁻ = −i·P
        let i = c(0.0, 1.0);
        let half = c(0.0, 0.5);
        let target = CPoly::monomial(r(1.0), 6);
        for (label, qp, iqm, t) in table4_reference() {
            let qm = iqm.scale(-i);
            let w = &(&qm.compose_shift(half) * &qp.compose_shift(-half)) - &(&qm.compose_shift(-half) * &qp.compose_shift(half));
            assert!(w.max_abs_diff(&target) < 1e-12, "{label}");
            let tt = &(&qm.compose_shift(i) * &qp.compose_shift(-i)) - &(&qm.compose_shift(-i) * &qp.compose_shift(i));
            assert!(tt.max_abs_diff(&t) < 1e-12, "{label}");
        }
    }

    #[test]
    fn unknown_table() {
        assert!(reproduce(5).is_err());
    }
}
