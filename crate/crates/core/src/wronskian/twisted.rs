//! Seeds at `ω = ∞` / `ω = 0` and continuation to the target twist.

use num_complex::Complex64;
use rayon::prelude::*;

use super::newton::{self, Eval, NewtonOpts, TrackOpts, TrackStats};
use super::{lambda_cfg, pi_poly, pmul, taylor_shift, PathInfo, QPair, ONE, ZERO};
use crate::error::{Error, Result};
use crate::lattice::{self, ChainConfig, SpinSector};
use crate::linalg::CMat;
use crate::poly::CPoly;

/// Which degenerate twist the seeds come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SeedSide {
    /// `Q⁺ = ∏_S (λ−λ_m+1)`, `Q⁻ = ∏_{S^c} (λ−λ_m)`.
    Infinity,
    /// Roles exchanged: `Q⁺ = ∏_S (λ−λ_m)`, `Q⁻ = ∏_{S^c} (λ−λ_m+1)`.
    Zero,
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    /// `|ω|` of the starting point (its inverse on the `ω = 0` side).
    pub start_modulus: f64,
    /// Spacing `ε` of the regularization `λ_m → λ_m + ε m` used when
    /// inhomogeneities coincide.
    pub regularization: Complex64,
    /// `|ω|` (inverse on the `ω = 0` side) at which the regularization is
    /// removed; targets beyond it remove it at the target itself.
    pub removal_modulus: f64,
    /// Match every solution to an oracle eigenvector.
    pub cross_match: bool,
    /// Accepted final Wronskian residual.
    pub tol: f64,
    pub max_bisection_depth: u32,
    /// Retracking rounds with finer steps for colliding branches.
    pub retries: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            start_modulus: 1e3,
            regularization: Complex64::new(0.37, 0.21),
            removal_modulus: 3.0,
            cross_match: false,
            tol: 1e-10,
            max_bisection_depth: 40,
            retries: 3,
        }
    }
}

impl SolveOptions {
    fn track_opts(&self) -> TrackOpts {
        TrackOpts {
            max_depth: self.max_bisection_depth,
            ..TrackOpts::default()
        }
    }
}

/// Residual of the Wronskian in the unknown lower coefficients of monic
/// `Q⁺` (degree `n`) and `Q⁻` (degree `M − n`), with its Jacobian.
pub(crate) fn wronskian_system(n: usize, sites: usize, omega: Complex64, pi: &[Complex64], z: &[Complex64]) -> Eval {
    let nm = sites - n;
    let mut a: Vec<Complex64> = z[..n].to_vec();
    a.push(ONE);
    let mut b: Vec<Complex64> = z[n..].to_vec();
    b.push(ONE);
    let d = omega - omega.inv();
    let (wa, wb) = (omega / d, omega.inv() / d);
    let a1 = taylor_shift(&a, -ONE);
    let b1 = taylor_shift(&b, -ONE);
    let x = pmul(&a1, &b);
    let y = pmul(&a, &b1);
    let f: Vec<Complex64> = (0..sites).map(|k| wa * x[k] - wb * y[k] - pi[k]).collect();
    // (λ−1)^j and λ^j
    let mut shifted: Vec<Vec<Complex64>> = Vec::with_capacity(sites + 1);
    let mut cur = vec![ONE];
    for _ in 0..=n.max(nm) {
        shifted.push(cur.clone());
        cur = pmul(&cur, &[-ONE, ONE]);
    }
    let mut jac = CMat::zeros(sites, sites);
    for j in 0..n {
        let p1 = pmul(&shifted[j], &b);
        let p2 = pmul(&b1, &monomial(j));
        for k in 0..sites {
            jac[(k, j)] = wa * get(&p1, k) - wb * get(&p2, k);
        }
    }
    for j in 0..nm {
        let p1 = pmul(&a1, &monomial(j));
        let p2 = pmul(&a, &shifted[j]);
        for k in 0..sites {
            jac[(k, n + j)] = wa * get(&p1, k) - wb * get(&p2, k);
        }
    }
    // rounding scale: the same products formed from coefficient magnitudes
    let abs = |v: &[Complex64]| -> Vec<Complex64> { v.iter().map(|c| Complex64::new(c.norm(), 0.0)).collect() };
    let (aa, ab) = (abs(&a), abs(&b));
    let xa = pmul(&taylor_shift(&aa, ONE), &ab);
    let ya = pmul(&aa, &taylor_shift(&ab, ONE));
    let scale = (0..sites)
        .map(|k| wa.norm() * xa[k].re + wb.norm() * ya[k].re + pi[k].norm())
        .fold(1.0, f64::max);
    (f, jac, scale)
}

fn monomial(j: usize) -> Vec<Complex64> {
    let mut v = vec![ZERO; j + 1];
    v[j] = ONE;
    v
}

fn get(p: &[Complex64], k: usize) -> Complex64 {
    p.get(k).copied().unwrap_or(ZERO)
}

fn unknowns(qp: &CPoly, qm: &CPoly) -> Vec<Complex64> {
    let n = qp.degree();
    let nm = qm.degree();
    (0..n).map(|k| qp.coeff(k)).chain((0..nm).map(|k| qm.coeff(k))).collect()
}

fn polys_from(n: usize, z: &[Complex64]) -> (CPoly, CPoly) {
    let mut a = z[..n].to_vec();
    a.push(ONE);
    let mut b = z[n..].to_vec();
    b.push(ONE);
    (CPoly::from_coeffs_untrimmed(a), CPoly::from_coeffs_untrimmed(b))
}

/// Lexicographic `n`-subsets of `0..m`.
pub(crate) fn subsets(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < n - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, n, &mut Vec::new(), &mut out);
    out
}

fn seed_polys(lam: &[Complex64], subset: &[usize], side: SeedSide) -> (CPoly, CPoly) {
    let (inside, outside): (Vec<usize>, Vec<usize>) = (0..lam.len()).partition(|i| subset.contains(i));
    let shifted = |idx: &[usize]| CPoly::from_roots(&idx.iter().map(|&i| lam[i] - 1.0).collect::<Vec<_>>());
    let plain = |idx: &[usize]| CPoly::from_roots(&idx.iter().map(|&i| lam[i]).collect::<Vec<_>>());
    match side {
        SeedSide::Infinity => (shifted(&inside), plain(&outside)),
        SeedSide::Zero => (plain(&inside), shifted(&outside)),
    }
}

/// The `binomial(M, n)` factorized seeds, Newton-polished at
/// `ω_start = start_modulus · e^{i arg ω}` (or its inverse modulus on the
/// `ω = 0` side). Inhomogeneities must be pairwise distinct.
pub fn seed_solutions(cfg: &ChainConfig, sector: SpinSector, side: SeedSide, start_modulus: f64) -> Result<Vec<QPair>> {
    let cfg = lambda_cfg(cfg);
    if cfg.min_separation() < lattice::GENERIC_SEPARATION {
        return Err(Error::Precondition(
            "seed solutions need pairwise distinct inhomogeneities; regularize first".into(),
        ));
    }
    let n = sector.n_down(cfg.sites)?;
    let start = start_omega(cfg.omega, side, start_modulus);
    let start_cfg = cfg.with_omega(start);
    let lam = cfg.lambda_inhom();
    let pi = pi_poly(&lam);
    subsets(cfg.sites, n)
        .into_par_iter()
        .map(|s| {
            let (qp, qm) = seed_polys(&lam, &s, side);
            let z = polish(n, &start_cfg, pi.coeffs(), &unknowns(&qp, &qm), 1e-13)?;
            let (qp, qm) = polys_from(n, &z);
            let mut pair = QPair::from_polys(&start_cfg, qp, qm);
            pair.branch = s;
            pair.path = Some(PathInfo {
                side,
                start_omega: start,
                regularization: None,
                stats: TrackStats::default(),
            });
            Ok(pair)
        })
        .collect()
}

fn start_omega(target: Complex64, side: SeedSide, modulus: f64) -> Complex64 {
    let phase = target / target.norm();
    match side {
        SeedSide::Infinity => phase * modulus,
        SeedSide::Zero => phase / modulus,
    }
}

fn polish(n: usize, cfg: &ChainConfig, pi: &[Complex64], z0: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let out = newton::newton(
        |z| wronskian_system(n, cfg.sites, cfg.omega, pi, z),
        z0,
        NewtonOpts {
            max_iter: 30,
            tol,
            max_first_step: None,
        },
    );
    if out.residual <= tol.max(1e-11) {
        Ok(out.z)
    } else {
        Err(Error::RootFinding {
            max_residual: out.residual,
            residuals: vec![out.residual],
        })
    }
}

fn check_path(path: &[Complex64]) -> Result<()> {
    for w in path.windows(2) {
        let (a, b) = (w[0].ln(), w[1].ln());
        let mut db = b - a;
        // shortest angular direction
        if db.im > std::f64::consts::PI {
            db.im -= 2.0 * std::f64::consts::PI;
        } else if db.im < -std::f64::consts::PI {
            db.im += 2.0 * std::f64::consts::PI;
        }
        for k in 0..=200 {
            let s = k as f64 / 200.0;
            let om = (a + db * s).exp();
            if (om - 1.0).norm() < 1e-9 || (om + 1.0).norm() < 1e-9 {
                return Err(Error::Precondition(format!("twist path passes through ±1 near {om}")));
            }
        }
    }
    Ok(())
}

fn omega_on_segment(a: Complex64, b: Complex64, s: f64) -> Complex64 {
    let (la, lb) = (a.ln(), b.ln());
    let mut d = lb - la;
    if d.im > std::f64::consts::PI {
        d.im -= 2.0 * std::f64::consts::PI;
    } else if d.im < -std::f64::consts::PI {
        d.im += 2.0 * std::f64::consts::PI;
    }
    if s >= 1.0 {
        b
    } else {
        (la + d * s).exp()
    }
}

pub(crate) fn track_twist(
    n: usize,
    cfg: &ChainConfig,
    z0: &[Complex64],
    path: &[Complex64],
    opts: TrackOpts,
) -> Result<(Vec<Complex64>, TrackStats)> {
    check_path(path)?;
    let pi = pi_poly(&cfg.lambda_inhom());
    let mut z = z0.to_vec();
    let mut stats = TrackStats::default();
    for w in path.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let (a, b) = (w[0], w[1]);
        let res = newton::track(
            &z,
            |s, x| wronskian_system(n, cfg.sites, omega_on_segment(a, b, s), pi.coeffs(), x),
            opts,
        );
        match res {
            Ok((zz, st)) => {
                z = zz;
                stats.merge(st);
            }
            Err(fail) => {
                return Err(Error::BranchTracking {
                    last_good: omega_on_segment(a, b, fail.last_s),
                    reason: fail.reason,
                })
            }
        }
    }
    Ok((z, stats))
}

fn track_regularization(
    n: usize,
    cfg: &ChainConfig,
    base: &[Complex64],
    reg: Complex64,
    z0: &[Complex64],
    opts: TrackOpts,
) -> Result<(Vec<Complex64>, TrackStats)> {
    let pis = |s: f64| -> Vec<Complex64> {
        let lam: Vec<Complex64> = base
            .iter()
            .enumerate()
            .map(|(m, &l)| l + reg * ((m + 1) as f64) * (1.0 - s))
            .collect();
        let mut c = pi_poly(&lam).into_coeffs();
        c.resize(cfg.sites + 1, ZERO);
        c
    };
    newton::track(z0, |s, x| wronskian_system(n, cfg.sites, cfg.omega, &pis(s), x), opts).map_err(|f| {
        Error::BranchTracking {
            last_good: cfg.omega,
            reason: format!("regularization removal: {} (ε-parameter {:.4e})", f.reason, f.last_s),
        }
    })
}

/// Continues a pair along the piecewise log-linear twist path through the
/// given nodes; the first node must be the pair's own twist.
pub fn continue_in_twist(cfg: &ChainConfig, seed: &QPair, path: &[Complex64]) -> Result<QPair> {
    let cfg = lambda_cfg(cfg);
    if path.is_empty() || (path[0] - seed.omega).norm() > 1e-12 * seed.omega.norm() {
        return Err(Error::Precondition("path must start at the seed's twist".into()));
    }
    let target = *path.last().unwrap();
    let mut out = seed.clone();
    if path.iter().all(|&w| w == seed.omega) {
        return Ok(out);
    }
    let z0 = unknowns(&seed.qp, &seed.qm);
    let (z, stats) = track_twist(seed.n, &cfg, &z0, path, TrackOpts::default())?;
    let tcfg = cfg.with_omega(target);
    let z = polish(seed.n, &tcfg, pi_poly(&tcfg.lambda_inhom()).coeffs(), &z, 1e-13)?;
    let (qp, qm) = polys_from(seed.n, &z);
    let mut pair = QPair::from_polys(&tcfg, qp, qm);
    pair.branch = std::mem::take(&mut out.branch);
    let mut info = out.path.take().unwrap_or(PathInfo {
        side: SeedSide::Infinity,
        start_omega: seed.omega,
        regularization: None,
        stats: TrackStats::default(),
    });
    info.stats.merge(stats);
    pair.path = Some(info);
    Ok(pair)
}

/// Complete solution set of a sector, with diagnostics.
#[derive(Clone, Debug)]
pub struct SectorReport {
    pub sector: SpinSector,
    pub expected: usize,
    pub pairs: Vec<QPair>,
    /// Branches lost to tracking failures or collisions after all retries.
    pub lost: Vec<(Vec<usize>, String)>,
    /// Smallest pairwise root-set distance.
    pub min_separation: f64,
}

fn solve_branch(
    n: usize,
    cfg: &ChainConfig,
    lam_work: &[Complex64],
    reg: Option<Complex64>,
    side: SeedSide,
    start: Complex64,
    removal: Complex64,
    subset: &[usize],
    opts: TrackOpts,
) -> Result<QPair> {
    let work_cfg = cfg.with_inhom_lambda(lam_work.to_vec()).with_omega(start);
    let (qp, qm) = seed_polys(lam_work, subset, side);
    let pi_start = pi_poly(lam_work);
    let z = polish(n, &work_cfg, pi_start.coeffs(), &unknowns(&qp, &qm), 1e-13)?;
    let mut z = z;
    let mut stats = TrackStats::default();
    if let Some(eps) = reg {
        // regularized chain to the removal point, then the true chain onwards
        let (z1, st) = track_twist(n, &work_cfg, &z, &[start, removal], opts)?;
        stats.merge(st);
        let at = work_cfg.with_omega(removal);
        let (z2, st) = track_regularization(n, &at, &cfg.lambda_inhom(), eps, &z1, opts)?;
        stats.merge(st);
        let (z3, st) = track_twist(n, &cfg.with_omega(removal), &z2, &[removal, cfg.omega], opts)?;
        stats.merge(st);
        z = z3;
    } else {
        let (z1, st) = track_twist(n, &work_cfg, &z, &[start, cfg.omega], opts)?;
        stats.merge(st);
        z = z1;
    }
    let pi = pi_poly(&cfg.lambda_inhom());
    let z = polish(n, cfg, pi.coeffs(), &z, 1e-13)?;
    let (qp, qm) = polys_from(n, &z);
    let mut pair = QPair::from_polys(cfg, qp, qm);
    pair.branch = subset.to_vec();
    pair.path = Some(PathInfo {
        side,
        start_omega: start,
        regularization: reg,
        stats,
    });
    Ok(pair)
}

/// Solves one sector completely and reports lost branches instead of failing.
pub fn solve_sector_report(cfg: &ChainConfig, sector: SpinSector, opts: &SolveOptions) -> Result<SectorReport> {
    let user_cfg = cfg;
    let cfg = lambda_cfg(cfg);
    cfg.check_capacity()?;
    if (cfg.omega - 1.0).norm() < 1e-12 || (cfg.omega + 1.0).norm() < 1e-12 {
        return Err(Error::Pole { omega: cfg.omega });
    }
    let n = sector.n_down(cfg.sites)?;
    let expected = lattice::binomial(cfg.sites, n);
    let side = if cfg.omega.norm() >= 1.0 {
        SeedSide::Infinity
    } else {
        SeedSide::Zero
    };
    let start = start_omega(cfg.omega, side, opts.start_modulus);
    let removal = match side {
        SeedSide::Infinity if cfg.omega.norm() < opts.removal_modulus => start_omega(cfg.omega, side, opts.removal_modulus),
        SeedSide::Zero if cfg.omega.norm() > 1.0 / opts.removal_modulus => start_omega(cfg.omega, side, opts.removal_modulus),
        _ => cfg.omega,
    };
    let lam = cfg.lambda_inhom();
    let reg = if cfg.min_separation() < 1e-2 {
        Some(opts.regularization)
    } else {
        None
    };
    let lam_work: Vec<Complex64> = match reg {
        Some(eps) => lam.iter().enumerate().map(|(m, &l)| l + eps * ((m + 1) as f64)).collect(),
        None => lam.clone(),
    };
    let subs = subsets(cfg.sites, n);
    let base = opts.track_opts();
    let run = |s: &Vec<usize>, t: TrackOpts| solve_branch(n, &cfg, &lam_work, reg, side, start, removal, s, t);
    let mut results: Vec<std::result::Result<QPair, String>> = subs
        .par_iter()
        .map(|s| run(s, base).map_err(|e| e.to_string()))
        .collect();

    let accept = |p: &QPair| p.wronskian_residual <= opts.tol;
    for round in 0..=opts.retries {
        // a branch is suspect when it failed or collides with another
        let mut suspect = vec![false; subs.len()];
        for i in 0..subs.len() {
            match &results[i] {
                Err(_) => suspect[i] = true,
                Ok(p) if !accept(p) => suspect[i] = true,
                Ok(p) => {
                    for j in i + 1..subs.len() {
                        if let Ok(q) = &results[j] {
                            if p.distance(q) < 1e-6 {
                                suspect[i] = true;
                                suspect[j] = true;
                            }
                        }
                    }
                }
            }
        }
        if !suspect.iter().any(|&s| s) || round == opts.retries {
            break;
        }
        let finer = base.finer(4f64.powi(round as i32 + 1));
        let redo: Vec<usize> = (0..subs.len()).filter(|&i| suspect[i]).collect();
        let fresh: Vec<(usize, std::result::Result<QPair, String>)> = redo
            .par_iter()
            .map(|&i| (i, run(&subs[i], finer).map_err(|e| e.to_string())))
            .collect();
        for (i, r) in fresh {
            results[i] = r;
        }
    }

    let mut pairs: Vec<QPair> = Vec::new();
    let mut lost = Vec::new();
    for (s, r) in subs.iter().zip(results) {
        match r {
            Ok(p) if accept(&p) => {
                if pairs.iter().any(|q| q.distance(&p) < 1e-6) {
                    lost.push((s.clone(), "collided with another branch".to_string()));
                } else {
                    pairs.push(p);
                }
            }
            Ok(p) => lost.push((s.clone(), format!("residual {:.3e}", p.wronskian_residual))),
            Err(e) => lost.push((s.clone(), e)),
        }
    }
    let mut min_sep = f64::INFINITY;
    for i in 0..pairs.len() {
        for j in i + 1..pairs.len() {
            min_sep = min_sep.min(pairs[i].distance(&pairs[j]));
        }
    }
    if opts.cross_match && lost.is_empty() {
        cross_match(user_cfg, sector, &mut pairs)?;
    }
    Ok(SectorReport {
        sector,
        expected,
        pairs,
        lost,
        min_separation: min_sep,
    })
}

/// All `binomial(M, n)` solutions of a sector, ordered by seed subset.
pub fn solve_sector(cfg: &ChainConfig, sector: SpinSector, opts: &SolveOptions) -> Result<Vec<QPair>> {
    let rep = solve_sector_report(cfg, sector, opts)?;
    if !rep.lost.is_empty() {
        return Err(Error::IncompleteSet {
            expected: rep.expected,
            found: rep.pairs.len(),
        });
    }
    Ok(rep.pairs)
}

/// Assigns each pair the oracle eigenvector with matching eigenvalue
/// polynomial; every record must be matched to a distinct pair.
fn cross_match(cfg: &ChainConfig, sector: SpinSector, pairs: &mut [QPair]) -> Result<()> {
    let records = lattice::diagonalize_sector(cfg, sector)?;
    let lam_cfg = lambda_cfg(cfg);
    let mut used = vec![false; pairs.len()];
    for rec in &records {
        let t = rec.t_poly_lambda(cfg);
        let (idx, dev) = super::match_eigenvalue(&lam_cfg, &t, pairs).ok_or(Error::UnmatchedEigenvector {
            index: rec.index,
            best: f64::INFINITY,
        })?;
        if dev > 1e-8 || used[idx] {
            return Err(Error::UnmatchedEigenvector {
                index: rec.index,
                best: dev,
            });
        }
        used[idx] = true;
        pairs[idx].oracle_index = Some(rec.index);
        pairs[idx].oracle_deviation = Some(dev);
    }
    Ok(())
}
