//! Following twisted solutions along `ω = e^{iφ}`, `φ → 0`.
//!
//! Each polynomial is classified from its history at `φ_k = φ_0/2^k`:
//! divergent once its largest root exceeds the divergence bound or grows by
//! a factor of at least 1.3 per halving over three consecutive halvings;
//! finite once successive coefficient changes contract and fall below
//! `1e-4` relative; ambiguous otherwise.

use num_complex::Complex64;
use rayon::prelude::*;

use super::newton::TrackOpts;
use super::ps::{ps_solve, PSOptions, PSReport};
use super::twisted::{track_twist, wronskian_system};
use super::{newton, pi_poly, QPair, SolveOptions, ONE};
use crate::error::{Error, Result};
use crate::lattice::{ChainConfig, Convention, SpinSector};
use crate::poly::CPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LimitClass {
    Finite,
    Divergent,
    Ambiguous,
}

#[derive(Clone, Debug)]
pub struct BranchLimit {
    pub branch: Vec<usize>,
    pub class: LimitClass,
    pub class_plus: LimitClass,
    pub class_minus: LimitClass,
    /// Smallest `φ` reached.
    pub phi_reached: f64,
    /// `max |v_j|` of `Q̃⁺` and `Q̃⁻` at each `φ_k`.
    pub max_root_plus: Vec<f64>,
    pub max_root_minus: Vec<f64>,
    /// `Q̃^±` and `t̃` at the smallest `φ` reached.
    pub qp_u: CPoly,
    pub qm_u: CPoly,
    pub t_u: CPoly,
    /// Largest coefficient of `t̃` at the smallest `φ`; eigenvalues stay
    /// bounded even when roots run away.
    pub t_max_coeff: f64,
    /// Closest periodic solution to `Q̃⁺` and `Q̃⁻`: index and coefficient
    /// distance.
    pub ps_match_plus: Option<(usize, f64)>,
    pub ps_match_minus: Option<(usize, f64)>,
    pub note: String,
}

#[derive(Clone, Debug)]
pub struct PeriodicOptions {
    pub phi0: f64,
    pub phi_min: f64,
    pub divergence_root: f64,
    pub solve: SolveOptions,
    pub ps: PSOptions,
}

impl Default for PeriodicOptions {
    fn default() -> Self {
        PeriodicOptions {
            phi0: 0.2,
            phi_min: 1e-5,
            divergence_root: 1e6,
            solve: SolveOptions::default(),
            ps: PSOptions::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PeriodicReport {
    pub sites: usize,
    pub sector: SpinSector,
    pub branches: Vec<BranchLimit>,
    pub ps: PSReport,
}

impl PeriodicReport {
    pub fn finite_count(&self) -> usize {
        self.branches.iter().filter(|b| b.class == LimitClass::Finite).count()
    }

    /// Worst distance of a finite branch polynomial to its periodic partner.
    pub fn worst_finite_match(&self) -> f64 {
        self.branches
            .iter()
            .filter(|b| b.class == LimitClass::Finite)
            .flat_map(|b| [b.ps_match_plus, b.ps_match_minus])
            .map(|m| m.map(|x| x.1).unwrap_or(f64::INFINITY))
            .fold(0.0, f64::max)
    }

    pub fn ambiguous(&self) -> Vec<&BranchLimit> {
        self.branches.iter().filter(|b| b.class == LimitClass::Ambiguous).collect()
    }
}

fn max_root(p: &CPoly) -> f64 {
    if p.degree() == 0 {
        return 0.0;
    }
    match p.roots() {
        Ok(r) => r.iter().map(|z| z.norm()).fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    }
}

fn classify(roots: &[f64], coeffs: &[CPoly], bound: f64) -> LimitClass {
    let k = roots.len();
    if k == 0 {
        return LimitClass::Ambiguous;
    }
    let last = roots[k - 1];
    if !last.is_finite() || last > bound {
        return LimitClass::Divergent;
    }
    if k >= 4 && last > 10.0 && (k - 3..k).all(|i| roots[i] >= 1.3 * roots[i - 1]) {
        return LimitClass::Divergent;
    }
    if k >= 3 {
        let d1 = coeffs[k - 1].max_abs_diff(&coeffs[k - 2]);
        let d0 = coeffs[k - 2].max_abs_diff(&coeffs[k - 3]);
        let scale = coeffs[k - 1].max_abs_coeff().max(1.0);
        if d1 < 1e-4 * scale && d1 <= 0.75 * d0.max(1e-300) {
            return LimitClass::Finite;
        }
        if d1 < 1e-9 * scale {
            return LimitClass::Finite;
        }
    }
    LimitClass::Ambiguous
}

/// Follows one solution from its twist `e^{iφ}` towards `φ_min`, halving
/// `φ` each stage.
pub fn track_to_periodic(cfg: &ChainConfig, pair: &QPair, phi_min: f64, divergence_root: f64) -> BranchLimit {
    let cfg = cfg.in_convention(Convention::Lambda).with_omega(pair.omega);
    let phi_start = pair.omega.arg();
    let n = pair.n;
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| pair.qp.coeff(k))
        .chain((0..pair.sites - n).map(|k| pair.qm.coeff(k)))
        .collect();
    let mut phi = phi_start;
    let mut roots_p = vec![max_root(&pair.qp_u())];
    let mut roots_m = vec![max_root(&pair.qm_u())];
    let mut hist_p = vec![pair.qp_u()];
    let mut hist_m = vec![pair.qm_u()];
    let mut last = pair.clone();
    let mut note = String::new();
    let opts = TrackOpts {
        h_init: 0.05,
        h_max: 0.25,
        ..TrackOpts::default()
    };
    let mut class = (LimitClass::Ambiguous, LimitClass::Ambiguous);
    while phi.abs() > phi_min * (1.0 + 1e-12) {
        let next = phi / 2.0;
        let path = [Complex64::from_polar(1.0, phi), Complex64::from_polar(1.0, next)];
        match track_twist(n, &cfg, &z, &path, opts) {
            Ok((zz, _)) => {
                z = zz;
                phi = next;
                let tcfg = cfg.with_omega(path[1]);
                let pi = pi_poly(&tcfg.lambda_inhom());
                let polished = newton::newton(
                    |w| wronskian_system(n, cfg.sites, path[1], pi.coeffs(), w),
                    &z,
                    newton::NewtonOpts {
                        max_iter: 10,
                        tol: 1e-13,
                        max_first_step: Some(1e-3),
                    },
                );
                if polished.residual <= 1e-11 {
                    z = polished.z;
                }
                let mut a = z[..n].to_vec();
                a.push(ONE);
                let mut b = z[n..].to_vec();
                b.push(ONE);
                last = QPair::from_polys(
                    &tcfg,
                    CPoly::from_coeffs_untrimmed(a),
                    CPoly::from_coeffs_untrimmed(b),
                );
                hist_p.push(last.qp_u());
                hist_m.push(last.qm_u());
                roots_p.push(max_root(&last.qp_u()));
                roots_m.push(max_root(&last.qm_u()));
            }
            Err(e) => {
                note = format!("tracking stopped at φ = {phi:.3e}: {e}");
                let grow = |r: &[f64]| r.len() >= 2 && r[r.len() - 1] > 1.3 * r[r.len() - 2] && r[r.len() - 1] > 10.0;
                if grow(&roots_p) || grow(&roots_m) {
                    class = (
                        if grow(&roots_p) { LimitClass::Divergent } else { class.0 },
                        if grow(&roots_m) { LimitClass::Divergent } else { class.1 },
                    );
                }
                break;
            }
        }
        class = (
            classify(&roots_p, &hist_p, divergence_root),
            classify(&roots_m, &hist_m, divergence_root),
        );
        if class.0 == LimitClass::Divergent || class.1 == LimitClass::Divergent {
            break;
        }
    }
    if phi.abs() > phi_min * (1.0 + 1e-12) {
        // stopped early: only divergence is conclusive
        if class.0 == LimitClass::Finite {
            class.0 = LimitClass::Ambiguous;
        }
        if class.1 == LimitClass::Finite {
            class.1 = LimitClass::Ambiguous;
        }
    }
    let overall = if class.0 == LimitClass::Divergent || class.1 == LimitClass::Divergent {
        LimitClass::Divergent
    } else if class.0 == LimitClass::Finite && class.1 == LimitClass::Finite {
        LimitClass::Finite
    } else {
        LimitClass::Ambiguous
    };
    let t_u = last.t_u();
    BranchLimit {
        branch: pair.branch.clone(),
        class: overall,
        class_plus: class.0,
        class_minus: class.1,
        phi_reached: phi,
        max_root_plus: roots_p,
        max_root_minus: roots_m,
        qp_u: last.qp_u(),
        qm_u: last.qm_u(),
        t_max_coeff: t_u.max_abs_coeff(),
        t_u,
        ps_match_plus: None,
        ps_match_minus: None,
        note,
    }
}

fn best_match(p: &CPoly, ps: &PSReport) -> Option<(usize, f64)> {
    ps.solutions
        .iter()
        .enumerate()
        .filter(|(_, s)| s.qp.degree() == p.degree())
        .map(|(i, s)| (i, s.qp.max_abs_diff(p)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
}

/// Solves the sector at `e^{iφ_0}`, follows every branch towards `φ = 0` and
/// compares finite limits with the periodic solutions.
pub fn periodic_limit_study(sites: usize, sector: SpinSector, opts: &PeriodicOptions) -> Result<PeriodicReport> {
    if opts.phi0 <= 0.0 || opts.phi_min <= 0.0 || opts.phi_min >= opts.phi0 {
        return Err(Error::InvalidConfig("need 0 < φ_min < φ_0".into()));
    }
    let cfg = ChainConfig::with_phi(sites, opts.phi0)?;
    let pairs = super::solve_sector(&cfg, sector, &opts.solve)?;
    let ps = ps_solve(sites, sector, &opts.ps)?;
    let mut branches: Vec<BranchLimit> = pairs
        .par_iter()
        .map(|p| track_to_periodic(&cfg, p, opts.phi_min, opts.divergence_root))
        .collect();
    for b in branches.iter_mut() {
        b.ps_match_plus = best_match(&b.qp_u, &ps);
        b.ps_match_minus = best_match(&b.qm_u, &ps);
    }
    Ok(PeriodicReport {
        sites,
        sector,
        branches,
        ps,
    })
}
