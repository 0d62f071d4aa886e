//! Solutions with `Q̃⁻(u) = (−1)^{M/2} Q̃⁺(−u)` for even homogeneous chains
//! at `S^z = 0` and twist on the unit circle.
//!
//! Candidates come from the complete sector solution set; each candidate
//! satisfying the constraint is then polished on the reduced system
//!
//! ```text
//!   u^M = s [ω Q̃(u−i/2) Q̃(−u−i/2) − ω⁻¹ Q̃(u+i/2) Q̃(−u+i/2)] / (ω − ω⁻¹)
//! ```
//!
//! whose odd coefficients vanish identically, leaving `M/2` equations.

use num_complex::Complex64;

use super::newton::{self, Eval, NewtonOpts};
use super::{solve_sector, QPair, SolveOptions, ONE};
use crate::error::{Error, Result};
use crate::lattice::{self, ChainConfig, Convention, SpinSector};
use crate::linalg::CMat;
use crate::poly::{self, CPoly};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const HALF_I: Complex64 = Complex64 { re: 0.0, im: 0.5 };

#[derive(Clone, Debug)]
pub struct SpecialSolution {
    pub pair: QPair,
    /// `Q̃⁺` in the u convention.
    pub qp_u: CPoly,
    /// `t̃(u)`.
    pub t_u: CPoly,
    /// Roots of `Q̃⁺`, refined on the root equations.
    pub roots_u: Vec<Complex64>,
    /// Residual of the reduced equation after polishing.
    pub reduced_residual: f64,
    /// Defect of `Q̃⁻(u) = s Q̃⁺(−u)` on the unreduced solution.
    pub constraint_defect: f64,
    /// Worst relative residual of the two root equations obtained at
    /// `u = v_j ± i/2`.
    pub special1_residual: f64,
    pub special2_residual: f64,
    /// Twisted BAE in the u convention, `None` for near-coincident roots.
    pub twisted_bae_residual: Option<f64>,
    /// Distance of the root set from being closed under conjugation.
    pub conjugate_defect: f64,
    /// Largest odd coefficient of `t̃`.
    pub odd_t_max: f64,
    /// All even coefficients of `t̃` real with the sign of `ω + ω⁻¹`.
    pub groundstate_pattern: bool,
}

#[derive(Clone, Debug)]
pub struct SpecialReport {
    pub sites: usize,
    pub omega: Complex64,
    pub expected: usize,
    pub solutions: Vec<SpecialSolution>,
}

impl SpecialReport {
    pub fn complete(&self) -> bool {
        self.solutions.len() == self.expected
    }
}

fn sign(sites: usize) -> f64 {
    if (sites / 2) % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `p(−u + a)`.
fn reflect_shift(p: &CPoly, a: Complex64) -> CPoly {
    p.compose_affine(-ONE, a)
}

fn reduced_poly(q: &CPoly, omega: Complex64, sites: usize) -> CPoly {
    let c = &q.compose_shift(-HALF_I) * &reflect_shift(q, -HALF_I);
    let d = &q.compose_shift(HALF_I) * &reflect_shift(q, HALF_I);
    let den = omega - omega.inv();
    let f = &c.scale(omega * sign(sites) / den) - &d.scale(omega.inv() * sign(sites) / den);
    &f - &CPoly::monomial(ONE, sites)
}

fn reduced_system(sites: usize, omega: Complex64, z: &[Complex64]) -> Eval {
    let n = sites / 2;
    let mut a = z.to_vec();
    a.push(ONE);
    let q = CPoly::from_coeffs_untrimmed(a);
    let f = reduced_poly(&q, omega, sites);
    let res: Vec<Complex64> = (0..n).map(|k| f.coeff(2 * k)).collect();
    let den = omega - omega.inv();
    let s = sign(sites);
    let qm = q.compose_shift(-HALF_I);
    let qrm = reflect_shift(&q, -HALF_I);
    let qp = q.compose_shift(HALF_I);
    let qrp = reflect_shift(&q, HALF_I);
    let mut jac = CMat::zeros(n, n);
    for j in 0..n {
        let e = CPoly::monomial(ONE, j);
        let dc = &(&e.compose_shift(-HALF_I) * &qrm) + &(&qm * &reflect_shift(&e, -HALF_I));
        let dd = &(&e.compose_shift(HALF_I) * &qrp) + &(&qp * &reflect_shift(&e, HALF_I));
        let df = &dc.scale(omega * s / den) - &dd.scale(omega.inv() * s / den);
        for k in 0..n {
            jac[(k, j)] = df.coeff(2 * k);
        }
    }
    let scale = 1f64.max(q.max_abs_coeff().powi(2) * (omega / den).norm());
    (res, jac, scale)
}

/// `(v_j + i/2)^M − c ∏_k (v_j − v_k + i)(v_j + v_k)` with Jacobian, each
/// row divided by `(|v_j| + 1/2)^M`.
fn root_system(roots: &[Complex64], omega: Complex64, sites: usize) -> Eval {
    let n = roots.len();
    let m = sites as i32;
    let c = omega.inv() / (omega.inv() - omega);
    let mut f = vec![Complex64::new(0.0, 0.0); n];
    let mut jac = CMat::zeros(n, n);
    for j in 0..n {
        let v = roots[j];
        let w = 1.0 / (v.norm() + 0.5).powi(m);
        let fac = |k: usize| (v - roots[k] + I) * (v + roots[k]);
        // d fac_k / d v_j and d fac_k / d v_k
        let dfac_j = |k: usize| {
            if k == j {
                2.0 * I
            } else {
                (v + roots[k]) + (v - roots[k] + I)
            }
        };
        let dfac_k = |k: usize| (v - roots[k] + I) - (v + roots[k]);
        let prod_except = |skip: usize| (0..n).filter(|&k| k != skip).fold(c, |acc, k| acc * fac(k));
        let prod = prod_except(usize::MAX);
        f[j] = ((v + HALF_I).powi(m) - prod) * w;
        for k in 0..n {
            let mut d = -prod_except(k) * if k == j { dfac_j(k) } else { dfac_k(k) };
            if k == j {
                d += (v + HALF_I).powi(m - 1) * m as f64;
                for l in (0..n).filter(|&l| l != j) {
                    d -= prod_except(l) * dfac_j(l);
                }
            }
            jac[(j, k)] = d * w;
        }
    }
    (f, jac, 1.0)
}

/// Refines roots obtained from coefficients, which lose accuracy for
/// nearly opposite pairs next to large roots.
fn refine_roots(roots: &[Complex64], omega: Complex64, sites: usize) -> Vec<Complex64> {
    let out = newton::newton(
        |z| root_system(z, omega, sites),
        roots,
        NewtonOpts {
            max_iter: 30,
            tol: 1e-15,
            max_first_step: None,
        },
    );
    let moved = roots
        .iter()
        .zip(&out.z)
        .all(|(a, b)| (a - b).norm() <= 1e-4 * (1.0 + a.norm()));
    let before = newton::inf_norm(&root_system(roots, omega, sites).0);
    if moved && out.residual < before {
        out.z
    } else {
        roots.to_vec()
    }
}

fn root_equations(roots: &[Complex64], omega: Complex64, sites: usize) -> (f64, f64, Option<f64>) {
    let m = sites as i32;
    let (mut r1, mut r2): (f64, f64) = (0.0, 0.0);
    let mut bae: Option<f64> = Some(0.0);
    let c1 = omega.inv() / (omega.inv() - omega);
    let c2 = omega / (omega - omega.inv());
    for (j, &v) in roots.iter().enumerate() {
        let lhs1 = (v + HALF_I).powi(m);
        let lhs2 = (v - HALF_I).powi(m);
        let mut p1 = c1;
        let mut p2 = c2;
        let mut ratio = (omega * omega).inv();
        for (k, &w) in roots.iter().enumerate() {
            p1 *= (v - w + I) * (v + w);
            p2 *= (v - w - I) * (v + w);
            if k != j {
                let den = v - w - I;
                if den.norm() < 1e-6 || (v - w).norm() < 1e-6 {
                    bae = None;
                } else {
                    ratio *= (v - w + I) / den;
                }
            }
        }
        // both sides vanish near v = ±i/2; compare against the size of the terms
        let terms: f64 = roots.iter().map(|w| (v.norm() + w.norm() + 1.0) * (v.norm() + w.norm())).product();
        let floor = (v.norm() + 0.5).powi(m).max(c1.norm() * terms);
        let rel = |a: Complex64, b: Complex64| (a - b).norm() / a.norm().max(b.norm()).max(floor);
        r1 = r1.max(rel(lhs1, p1));
        r2 = r2.max(rel(lhs2, p2));
        if let Some(b) = bae.as_mut() {
            if (v - HALF_I).norm() < 1e-6 {
                bae = None;
            } else {
                let lhs = ((v + HALF_I) / (v - HALF_I)).powi(m);
                *b = b.max(rel(lhs, ratio));
            }
        }
    }
    (r1, r2, bae)
}

/// The special `S^z = 0` solutions of an even homogeneous chain.
pub fn special_branch_solve(cfg: &ChainConfig, opts: &SolveOptions) -> Result<SpecialReport> {
    let sites = cfg.sites;
    if !cfg.is_homogeneous() || sites % 2 != 0 {
        return Err(Error::Precondition("special branch needs an even homogeneous chain".into()));
    }
    if (cfg.omega.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Precondition("special branch needs |ω| = 1".into()));
    }
    let lam_cfg = cfg.in_convention(Convention::Lambda);
    let u_cfg = cfg.in_convention(Convention::U);
    let pairs = solve_sector(&lam_cfg, SpinSector::new(0), &SolveOptions {
        cross_match: false,
        ..opts.clone()
    })?;
    let n = sites / 2;
    let s = sign(sites);
    let mut solutions: Vec<SpecialSolution> = Vec::new();
    for pair in pairs {
        let qp_u = pair.qp_u();
        let qm_u = pair.qm_u();
        let target = reflect_shift(&qp_u, Complex64::new(0.0, 0.0)).scale(Complex64::new(s, 0.0));
        let defect = qm_u.max_abs_diff(&target) / qp_u.max_abs_coeff().max(1.0);
        // non-special pairs sit at defects of order 0.1; special ones with
        // large roots carry conditioning errors well above 1e-6
        if defect > 1e-3 {
            continue;
        }
        let z0: Vec<Complex64> = (0..n).map(|k| qp_u.coeff(k)).collect();
        let out = newton::newton(
            |z| reduced_system(sites, cfg.omega, z),
            &z0,
            NewtonOpts {
                max_iter: 20,
                tol: 1e-14,
                max_first_step: Some(1e-4),
            },
        );
        let z = if out.residual <= 1e-12 { out.z } else { z0 };
        let mut a = z.clone();
        a.push(ONE);
        let qp_u = CPoly::from_coeffs_untrimmed(a);
        let reduced_residual = reduced_system(sites, cfg.omega, &z);
        let reduced_residual = newton::inf_norm(&reduced_residual.0) / reduced_residual.2;
        let qm_u = reflect_shift(&qp_u, Complex64::new(0.0, 0.0)).scale(Complex64::new(s, 0.0));
        let qp = lattice::to_lambda_poly(&u_cfg, &qp_u, n as i64);
        let qm = lattice::to_lambda_poly(&u_cfg, &qm_u, n as i64);
        let mut polished = QPair::from_polys(&lam_cfg, qp, qm);
        polished.branch = pair.branch.clone();
        polished.path = pair.path.clone();
        if solutions.iter().any(|sol| sol.pair.distance(&polished) < 1e-6) {
            continue;
        }
        let roots = refine_roots(&polished.roots_p_u(), cfg.omega, sites);
        let (r1, r2, bae) = root_equations(&roots, cfg.omega, sites);
        let t_u = polished.t_u();
        let odd_t_max = (0..=sites)
            .filter(|k| k % 2 == 1)
            .map(|k| t_u.coeff(k).norm())
            .fold(0.0, f64::max);
        let trace = (cfg.omega + cfg.omega.inv()).re;
        let tscale = t_u.max_abs_coeff().max(1.0);
        let groundstate_pattern = trace.abs() > 1e-12
            && (0..=sites).filter(|k| k % 2 == 0).all(|k| {
                let c = t_u.coeff(k);
                c.im.abs() < 1e-8 * tscale && c.re * trace > 0.0
            });
        solutions.push(SpecialSolution {
            conjugate_defect: poly::conjugate_pair_defect(&roots),
            roots_u: roots,
            pair: polished,
            qp_u,
            t_u,
            reduced_residual,
            constraint_defect: defect,
            special1_residual: r1,
            special2_residual: r2,
            twisted_bae_residual: bae,
            odd_t_max,
            groundstate_pattern,
        });
    }
    Ok(SpecialReport {
        sites,
        omega: cfg.omega,
        expected: 1 << (sites / 2),
        solutions,
    })
}
