//! The periodic (`ω = 1`) Wronskian in the u convention,
//!
//! ```text
//!   𝒬⁻(u+i/2) 𝒬⁺(u−i/2) − 𝒬⁻(u−i/2) 𝒬⁺(u+i/2) = u^M,
//! ```
//!
//! with monic `𝒬⁺` of degree `n` and `𝒬⁻ = −i/(2S^z+1) · P`, `P` monic of
//! degree `M − n + 1`. Adding a multiple of `𝒬⁺` to `𝒬⁻` leaves the
//! Wronskian unchanged; the gauge is fixed by a vanishing `u^n` coefficient
//! of `P`.
//!
//! Solutions are collected from random multistart Newton runs and from the
//! oracle: for each transfer eigenvalue of the periodic chain the TQ relation
//! `t̃ 𝒬⁺ = 𝒬⁺(u+i)(u−i/2)^M + 𝒬⁺(u−i)(u+i/2)^M` is linear in `𝒬⁺`.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::newton::{self, Eval, NewtonOpts};
use super::{pmul, taylor_shift, ONE, ZERO};
use crate::error::{Error, Result};
use crate::lattice::{self, ChainConfig, Convention, SpinSector};
use crate::linalg::CMat;
use crate::poly::{self, CPoly};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const HALF_I: Complex64 = Complex64 { re: 0.0, im: 0.5 };

#[derive(Clone, Debug)]
pub struct PSPair {
    pub sites: usize,
    pub n: usize,
    /// Monic `𝒬⁺(u)`.
    pub qp: CPoly,
    /// `𝒬⁻(u)`, leading coefficient `−i/(2S^z+1)`.
    pub qm: CPoly,
    pub roots_p: Vec<Complex64>,
    /// Max coefficient of the Wronskian residual over the term scale.
    pub residual: f64,
    /// `t̃(u) = 𝒬⁻(u+i)𝒬⁺(u−i) − 𝒬⁻(u−i)𝒬⁺(u+i)`.
    pub t_poly: CPoly,
    /// Oracle eigenvector with this eigenvalue, when the oracle was run.
    pub oracle_index: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct PSOptions {
    /// Random starts per expected solution.
    pub starts_per_solution: usize,
    /// Starts are drawn uniformly from `|Re|, |Im| ≤ radius`.
    pub radius: f64,
    pub seed: u64,
    /// Add linear TQ solutions built from the oracle spectrum.
    pub oracle_seeds: bool,
    /// Further starting `𝒬⁺` polynomials (monic, degree `n`).
    pub extra_seeds: Vec<CPoly>,
}

impl Default for PSOptions {
    fn default() -> Self {
        PSOptions {
            starts_per_solution: 50,
            radius: 3.0,
            seed: 0x9e37_79b9,
            oracle_seeds: true,
            extra_seeds: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PSReport {
    pub sites: usize,
    pub sector: SpinSector,
    pub expected: usize,
    pub solutions: Vec<PSPair>,
    /// Distinct solutions reached from random starts alone.
    pub from_multistart: usize,
    /// Distinct solutions reached from oracle or extra seeds alone.
    pub from_seeds: usize,
    /// Solutions whose eigenvalue matches no oracle eigenvalue.
    pub unmatched: Option<usize>,
}

impl PSReport {
    pub fn complete(&self) -> bool {
        self.solutions.len() == self.expected
    }
}

/// Number of highest-weight states: `C(M,n) − C(M,n−1)`.
pub fn ps_expected_count(sites: usize, sector: SpinSector) -> Result<usize> {
    let n = sector.n_down(sites)?;
    let below = if n == 0 { 0 } else { lattice::binomial(sites, n - 1) };
    Ok(lattice::binomial(sites, n) - below)
}

struct Layout {
    sites: usize,
    n: usize,
    /// Free coefficient indices of `P`.
    free: Vec<usize>,
    lead: Complex64,
}

impl Layout {
    fn new(sites: usize, sector: SpinSector) -> Result<Self> {
        if sector.twice_sz < 0 {
            return Err(Error::Precondition("periodic Wronskian needs S^z ≥ 0".into()));
        }
        let n = sector.n_down(sites)?;
        let dm = sites - n + 1;
        Ok(Layout {
            sites,
            n,
            free: (0..dm).filter(|&j| j != n).collect(),
            lead: Complex64::new(0.0, -1.0 / (sector.twice_sz as f64 + 1.0)),
        })
    }

    fn dim(&self) -> usize {
        self.n + self.free.len()
    }

    fn split(&self, z: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
        let mut a = z[..self.n].to_vec();
        a.push(ONE);
        let mut p = vec![ZERO; self.sites - self.n + 2];
        for (k, &j) in self.free.iter().enumerate() {
            p[j] = z[self.n + k];
        }
        p[self.sites - self.n + 1] = ONE;
        (a, p)
    }

    fn pack(&self, a: &CPoly, p: &CPoly) -> Vec<Complex64> {
        (0..self.n)
            .map(|k| a.coeff(k))
            .chain(self.free.iter().map(|&j| p.coeff(j)))
            .collect()
    }

    /// `c [P(u+i/2) A(u−i/2) − P(u−i/2) A(u+i/2)] − u^M`.
    fn eval(&self, z: &[Complex64]) -> Eval {
        let (a, p) = self.split(z);
        let am = taylor_shift(&a, -HALF_I);
        let ap = taylor_shift(&a, HALF_I);
        let pm = taylor_shift(&p, -HALF_I);
        let pp = taylor_shift(&p, HALF_I);
        let x = pmul(&pp, &am);
        let y = pmul(&pm, &ap);
        let f: Vec<Complex64> = (0..self.sites)
            .map(|k| self.lead * (x[k] - y[k]))
            .collect();
        let mut jac = CMat::zeros(self.sites, self.dim());
        for j in 0..self.n {
            let mut e = vec![ZERO; j + 1];
            e[j] = ONE;
            let em = taylor_shift(&e, -HALF_I);
            let ep = taylor_shift(&e, HALF_I);
            let d1 = pmul(&pp, &em);
            let d2 = pmul(&pm, &ep);
            for k in 0..self.sites {
                jac[(k, j)] = self.lead * (at(&d1, k) - at(&d2, k));
            }
        }
        for (col, &j) in self.free.iter().enumerate() {
            let mut e = vec![ZERO; j + 1];
            e[j] = ONE;
            let em = taylor_shift(&e, -HALF_I);
            let ep = taylor_shift(&e, HALF_I);
            let d1 = pmul(&ep, &am);
            let d2 = pmul(&em, &ap);
            for k in 0..self.sites {
                jac[(k, self.n + col)] = self.lead * (at(&d1, k) - at(&d2, k));
            }
        }
        let amax = a.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let pmax = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
        (f, jac, 1f64.max(amax * pmax))
    }

    fn finish(&self, z: &[Complex64]) -> PSPair {
        let (a, p) = self.split(z);
        let qp = CPoly::from_coeffs_untrimmed(a);
        let qm = CPoly::from_coeffs_untrimmed(p).scale(self.lead);
        let (f, _, scale) = self.eval(z);
        let t_poly = &(&qm.compose_shift(I) * &qp.compose_shift(-I)) - &(&qm.compose_shift(-I) * &qp.compose_shift(I));
        PSPair {
            sites: self.sites,
            n: self.n,
            roots_p: if self.n == 0 { Vec::new() } else { qp.roots().unwrap_or_default() },
            qp,
            qm,
            residual: newton::inf_norm(&f) / scale,
            t_poly,
            oracle_index: None,
        }
    }
}

fn at(p: &[Complex64], k: usize) -> Complex64 {
    p.get(k).copied().unwrap_or(ZERO)
}

/// Monic `𝒬⁺` of degree `n` solving the periodic TQ relation for `t̃`, with
/// the relative least-squares residual.
pub fn qplus_from_eigenvalue(t: &CPoly, sites: usize, n: usize) -> Option<(CPoly, f64)> {
    let um = CPoly::from_roots(&vec![HALF_I; sites]);
    let up = CPoly::from_roots(&vec![-HALF_I; sites]);
    let op = |q: &CPoly| -> CPoly {
        let lhs = t * q;
        let r = &(&q.compose_shift(I) * &um) + &(&q.compose_shift(-I) * &up);
        &lhs - &r
    };
    let rows = sites + n + 1;
    let cols: Vec<CPoly> = (0..n).map(|j| op(&CPoly::monomial(ONE, j))).collect();
    let rhs = op(&CPoly::monomial(ONE, n));
    let a = CMat::from_fn(rows, n.max(1), |r, c| if c < n { cols[c].coeff(r) } else { ZERO });
    let b = DVector::from_iterator(rows, (0..rows).map(|r| -rhs.coeff(r)));
    let x = if n == 0 {
        DVector::zeros(1)
    } else {
        a.clone().svd(true, true).solve(&b, 1e-14).ok()?
    };
    let mut coeffs: Vec<Complex64> = (0..n).map(|k| x[k]).collect();
    coeffs.push(ONE);
    let q = CPoly::from_coeffs_untrimmed(coeffs);
    let res = op(&q).max_abs_coeff() / (t.max_abs_coeff() * q.max_abs_coeff()).max(1.0);
    Some((q, res))
}

/// Completes `𝒬⁺` to a start vector by solving the (linear) Wronskian for `P`.
fn complete_with_p(layout: &Layout, qp: &CPoly) -> Option<Vec<Complex64>> {
    let mut z = layout.pack(qp, &CPoly::monomial(ONE, layout.sites - layout.n + 1));
    let (f, jac, _) = layout.eval(&z);
    let k = layout.free.len();
    let sub = CMat::from_fn(layout.sites, k, |r, c| jac[(r, layout.n + c)]);
    let rhs = DVector::from_iterator(layout.sites, f.iter().map(|v| -v));
    let dx = sub.svd(true, true).solve(&rhs, 1e-14).ok()?;
    for c in 0..k {
        z[layout.n + c] += dx[c];
    }
    Some(z)
}

fn solve_from(layout: &Layout, z0: &[Complex64]) -> Option<Vec<Complex64>> {
    let out = newton::newton(
        |z| layout.eval(z),
        z0,
        NewtonOpts {
            max_iter: 80,
            tol: 1e-13,
            max_first_step: None,
        },
    );
    if out.residual < 1e-11 && out.z.iter().all(|c| c.norm() < 1e8) {
        Some(out.z)
    } else {
        None
    }
}

fn insert_distinct(found: &mut Vec<PSPair>, cand: PSPair) -> bool {
    let dup = found.iter().any(|p| {
        let d = if p.roots_p.len() == p.n && cand.roots_p.len() == cand.n {
            poly::hausdorff(&p.roots_p, &cand.roots_p)
        } else {
            p.qp.max_abs_diff(&cand.qp)
        };
        d < 1e-6
    });
    if !dup {
        found.push(cand);
    }
    !dup
}

/// All solutions of the periodic Wronskian in a sector with `S^z ≥ 0`.
pub fn ps_solve(sites: usize, sector: SpinSector, opts: &PSOptions) -> Result<PSReport> {
    let layout = Layout::new(sites, sector)?;
    let expected = ps_expected_count(sites, sector)?;
    let dim = layout.dim();

    let starts = opts.starts_per_solution * expected.max(1);
    let random: Vec<Option<Vec<Complex64>>> = (0..starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(k as u64));
            let z0: Vec<Complex64> = (0..dim)
                .map(|_| {
                    Complex64::new(
                        rng.random_range(-opts.radius..opts.radius),
                        rng.random_range(-opts.radius..opts.radius),
                    )
                })
                .collect();
            solve_from(&layout, &z0)
        })
        .collect();
    let mut multistart: Vec<PSPair> = Vec::new();
    for z in random.into_iter().flatten() {
        insert_distinct(&mut multistart, layout.finish(&z));
    }

    let mut seeds: Vec<CPoly> = opts.extra_seeds.clone();
    let mut oracle: Option<Vec<CPoly>> = None;
    if opts.oracle_seeds {
        let cfg = ChainConfig::new(sites, vec![ZERO; sites], ONE, Convention::U)?;
        if let Ok(records) = lattice::diagonalize_sector(&cfg, sector) {
            let ts: Vec<CPoly> = records.iter().map(|r| r.t_poly.clone()).collect();
            for t in &ts {
                if let Some((q, res)) = qplus_from_eigenvalue(t, sites, layout.n) {
                    if res < 1e-8 {
                        seeds.push(q);
                    }
                }
            }
            oracle = Some(ts);
        }
    }
    let seeded: Vec<Option<Vec<Complex64>>> = seeds
        .par_iter()
        .map(|q| complete_with_p(&layout, q).and_then(|z| solve_from(&layout, &z)))
        .collect();
    let mut from_seeds: Vec<PSPair> = Vec::new();
    for z in seeded.into_iter().flatten() {
        insert_distinct(&mut from_seeds, layout.finish(&z));
    }

    let mut solutions = multistart.clone();
    for p in from_seeds.iter().cloned() {
        insert_distinct(&mut solutions, p);
    }
    let key = |p: &PSPair| -> Vec<f64> {
        (0..=p.n).rev().flat_map(|k| [p.qp.coeff(k).re, p.qp.coeff(k).im]).collect()
    };
    solutions.sort_by(|a, b| key(a).partial_cmp(&key(b)).unwrap_or(std::cmp::Ordering::Equal));

    let unmatched = oracle.map(|ts| {
        let mut bad = 0;
        for s in solutions.iter_mut() {
            let best = ts
                .iter()
                .enumerate()
                .map(|(i, t)| (i, super::poly_deviation(t, &s.t_poly)))
                .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
            match best {
                Some((i, d)) if d < 1e-8 => s.oracle_index = Some(i),
                _ => bad += 1,
            }
        }
        bad
    });
    Ok(PSReport {
        sites,
        sector,
        expected,
        from_multistart: multistart.len(),
        from_seeds: from_seeds.len(),
        solutions,
        unmatched,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expected_counts() {
        let want = [(3, 2), (4, 2), (5, 5), (6, 5), (7, 14), (8, 14), (9, 42), (10, 42)];
        for (m, c) in want {
            let s = SpinSector::new((m % 2) as i32);
            assert_eq!(ps_expected_count(m, s).unwrap(), c);
        }
    }

    #[test]
    fn small_chains_complete() {
        for m in 2..=6 {
            let s = SpinSector::new((m % 2) as i32);
            let rep = ps_solve(m, s, &PSOptions::default()).unwrap();
            assert!(rep.complete(), "M={m}: {} of {}", rep.solutions.len(), rep.expected);
            assert_eq!(rep.unmatched, Some(0));
            for p in &rep.solutions {
                assert!(p.residual < 1e-10);
                assert!((p.qm.leading() - layout_lead(s)).norm() < 1e-14);
            }
        }
    }

    fn layout_lead(s: SpinSector) -> Complex64 {
        Complex64::new(0.0, -1.0 / (s.twice_sz as f64 + 1.0))
    }

    #[test]
    fn polarized_sector() {
        let rep = ps_solve(4, SpinSector::new(4), &PSOptions::default()).unwrap();
        assert_eq!(rep.solutions.len(), 1);
        assert_eq!(rep.solutions[0].qp.degree(), 0);
    }
}
