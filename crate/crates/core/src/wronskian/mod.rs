//! The twisted quantum Wronskian
//!
//! ```text
//!   ∏(λ − λ_m) = [ω Q⁺(λ−1) Q⁻(λ) − ω⁻¹ Q⁺(λ) Q⁻(λ−1)] / (ω − ω⁻¹)
//! ```
//!
//! for monic `Q⁺` of degree `n = M/2 − S^z` and monic `Q⁻` of degree `M − n`.
//! Solutions are obtained by continuation in the twist from the exact
//! factorized solutions at `ω = ∞` (or `ω = 0`). All polynomials are stored
//! in the λ convention; `*_u` accessors give the `u`-convention views
//! `Q̃(u) = i^{deg} Q(−iu − 1/2)`.

mod newton;
mod periodic;
mod ps;
mod special;
mod twisted;

use num_complex::Complex64;

use crate::lattice::{self, ChainConfig, Convention};
use crate::poly::{self, CPoly};

pub use newton::TrackStats;
pub use periodic::{
    periodic_limit_study, track_to_periodic, BranchLimit, LimitClass, PeriodicOptions, PeriodicReport,
};
pub use ps::{ps_expected_count, ps_solve, PSOptions, PSPair, PSReport};
pub use special::{special_branch_solve, SpecialReport, SpecialSolution};
pub use twisted::{
    continue_in_twist, seed_solutions, solve_sector, solve_sector_report, SectorReport, SeedSide, SolveOptions,
};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// How a solution was reached.
#[derive(Clone, Debug, PartialEq)]
pub struct PathInfo {
    pub side: SeedSide,
    pub start_omega: Complex64,
    /// Inhomogeneity regularization removed along the way, if any.
    pub regularization: Option<Complex64>,
    pub stats: TrackStats,
}

/// One solution `(Q⁺, Q⁻)` of the quantum Wronskian.
#[derive(Clone, Debug)]
pub struct QPair {
    pub n: usize,
    pub sites: usize,
    pub omega: Complex64,
    pub qp: CPoly,
    pub qm: CPoly,
    pub roots_p: Vec<Complex64>,
    pub roots_m: Vec<Complex64>,
    /// `e_0 … e_n` of the roots of `Q⁺`.
    pub e_p: Vec<Complex64>,
    pub e_m: Vec<Complex64>,
    /// Max coefficient of the Wronskian residual over the scale of its terms.
    pub wronskian_residual: f64,
    /// Worst relative BAE residual over both root sets, when all roots are
    /// well separated.
    pub bae_residual: Option<f64>,
    /// Transfer-matrix eigenvalue reconstructed from `Q⁺` through TQ.
    pub t_poly: CPoly,
    /// Sites (0-based) carried by `Q⁺` in the seed.
    pub branch: Vec<usize>,
    pub path: Option<PathInfo>,
    pub oracle_index: Option<usize>,
    pub oracle_deviation: Option<f64>,
}

impl QPair {
    /// Builds a pair from monic coefficient data and fills in every derived
    /// field. `cfg` supplies the inhomogeneities and the twist.
    pub fn from_polys(cfg: &ChainConfig, qp: CPoly, qm: CPoly) -> Self {
        let n = qp.degree();
        let roots_of = |p: &CPoly| {
            if p.degree() == 0 {
                Vec::new()
            } else {
                p.roots().unwrap_or_default()
            }
        };
        let roots_p = roots_of(&qp);
        let roots_m = roots_of(&qm);
        let e_p = poly::elem_sym_of_monic(&qp);
        let e_m = poly::elem_sym_of_monic(&qm);
        let wr = wronskian_residual(&qp, &qm, cfg);
        let scale = wronskian_scale(&qp, &qm, cfg);
        let lam = lambda_inhom(cfg);
        let bae = bae_residual(&roots_p, &lam, cfg.omega, 1)
            .and_then(|a| bae_residual(&roots_m, &lam, cfg.omega, -1).map(|b| a.max(b)));
        let t_poly = t_from_qplus(cfg, &qp).0;
        QPair {
            n,
            sites: cfg.sites,
            omega: cfg.omega,
            qp,
            qm,
            roots_p,
            roots_m,
            e_p,
            e_m,
            wronskian_residual: wr.max_abs_coeff() / scale,
            bae_residual: bae,
            t_poly,
            branch: Vec::new(),
            path: None,
            oracle_index: None,
            oracle_deviation: None,
        }
    }

    pub fn qp_u(&self) -> CPoly {
        lattice::to_u_poly(&self.qp, self.n as i64)
    }

    pub fn qm_u(&self) -> CPoly {
        lattice::to_u_poly(&self.qm, (self.sites - self.n) as i64)
    }

    pub fn t_u(&self) -> CPoly {
        lattice::to_u_poly(&self.t_poly, self.sites as i64)
    }

    /// Roots `v_j = i(ξ_j + 1/2)` of `Q̃⁺`.
    pub fn roots_p_u(&self) -> Vec<Complex64> {
        self.roots_p.iter().map(|&x| lattice::lambda_to_u(x)).collect()
    }

    pub fn roots_m_u(&self) -> Vec<Complex64> {
        self.roots_m.iter().map(|&x| lattice::lambda_to_u(x)).collect()
    }

    /// Root-set distance used for duplicate detection.
    pub fn distance(&self, other: &QPair) -> f64 {
        if self.roots_p.len() == self.qp.degree() && other.roots_p.len() == other.qp.degree() {
            let dp = poly::hausdorff(&self.roots_p, &other.roots_p);
            let dm = poly::hausdorff(&self.roots_m, &other.roots_m);
            dp.max(dm)
        } else {
            self.qp.max_abs_diff(&other.qp).max(self.qm.max_abs_diff(&other.qm))
        }
    }
}

/// Inhomogeneities in the λ convention.
pub(crate) fn lambda_inhom(cfg: &ChainConfig) -> Vec<Complex64> {
    cfg.lambda_inhom()
}

/// `∏(λ − λ_m)` in the λ convention.
pub(crate) fn pi_poly(lam: &[Complex64]) -> CPoly {
    CPoly::from_roots(lam)
}

/// `p(λ + a)` on raw ascending coefficients.
pub(crate) fn taylor_shift(p: &[Complex64], a: Complex64) -> Vec<Complex64> {
    let mut c = p.to_vec();
    let n = c.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let next = c[j + 1];
            c[j] += a * next;
        }
    }
    c
}

pub(crate) fn pmul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if *x == ZERO {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn twist_parts(omega: Complex64) -> (Complex64, Complex64) {
    let d = omega - omega.inv();
    (omega / d, omega.inv() / d)
}

/// `[ω A(λ−1) B(λ) − ω⁻¹ A(λ) B(λ−1)] / (ω − ω⁻¹)` on raw coefficients.
pub(crate) fn wronskian_raw(a: &[Complex64], b: &[Complex64], omega: Complex64) -> Vec<Complex64> {
    let (wa, wb) = twist_parts(omega);
    let a1 = taylor_shift(a, -ONE);
    let b1 = taylor_shift(b, -ONE);
    let x = pmul(&a1, b);
    let y = pmul(a, &b1);
    x.iter().zip(&y).map(|(p, q)| wa * p - wb * q).collect()
}

/// `∏(λ−λ_m) − W[Q⁺, Q⁻](λ)`; polynomial of degree `< M` for monic inputs of
/// the right degrees. Inputs are in the λ convention.
pub fn wronskian_residual(qp: &CPoly, qm: &CPoly, cfg: &ChainConfig) -> CPoly {
    let pi = pi_poly(&lambda_inhom(cfg));
    let w = CPoly::from_coeffs_untrimmed(wronskian_raw(qp.coeffs(), qm.coeffs(), cfg.omega));
    CPoly::from_coeffs_untrimmed((&pi - &w).into_coeffs())
}

/// Size of the individual terms entering the Wronskian.
pub(crate) fn wronskian_scale(qp: &CPoly, qm: &CPoly, cfg: &ChainConfig) -> f64 {
    let pi = pi_poly(&lambda_inhom(cfg));
    let (wa, wb) = twist_parts(cfg.omega);
    let prod = qp.max_abs_coeff() * qm.max_abs_coeff() * wa.norm().max(wb.norm());
    1f64.max(pi.max_abs_coeff()).max(prod)
}

/// Residuals of the quadratic system in the elementary symmetric polynomials:
/// entry `m` is `e_{M−m}(λ) − Σ_{k,ℓ} C(ℓ, m−k)[ω e⁺_{n−ℓ} e⁻_{M−n−k} − ω⁻¹
/// e⁺_{n−k} e⁻_{M−n−ℓ}]/(ω−ω⁻¹)` for `m = 0 … M−1`; the equation at `m = M`
/// holds identically.
pub fn es_system(e_p: &[Complex64], e_m: &[Complex64], cfg: &ChainConfig) -> Vec<Complex64> {
    let sites = cfg.sites;
    let n = e_p.len() - 1;
    let nm = e_m.len() - 1;
    let e_lam = poly::elem_sym(&lambda_inhom(cfg));
    let (wa, wb) = twist_parts(cfg.omega);
    let ep = |k: isize| poly::elem_sym_at(e_p, k);
    let em = |k: isize| poly::elem_sym_at(e_m, k);
    let binom = |l: usize, j: usize| -> f64 {
        if j > l {
            0.0
        } else {
            lattice::binomial(l, j) as f64
        }
    };
    (0..sites)
        .map(|m| {
            let mut rhs = ZERO;
            for k in 0..=m {
                for l in (m - k)..=n.max(nm) {
                    let c = binom(l, m - k);
                    if c == 0.0 {
                        continue;
                    }
                    let (n_i, nm_i, l_i, k_i) = (n as isize, nm as isize, l as isize, k as isize);
                    rhs += (wa * ep(n_i - l_i) * em(nm_i - k_i) - wb * ep(n_i - k_i) * em(nm_i - l_i)) * c;
                }
            }
            poly::elem_sym_at(&e_lam, (sites - m) as isize) - rhs
        })
        .collect()
}

/// Relative BAE residual for the roots of `Q^±` (`sign = ±1`):
/// `∏_m (ξ−λ_m)/(ξ−λ_m+1) = ω^{±2} ∏_{j≠i} (ξ−ξ_j−1)/(ξ−ξ_j+1)`.
/// `None` when roots are not well separated or hit a pole.
pub fn bae_residual(roots: &[Complex64], lam: &[Complex64], omega: Complex64, sign: i32) -> Option<f64> {
    const SEP: f64 = 1e-6;
    let w2 = if sign > 0 { omega * omega } else { (omega * omega).inv() };
    let mut worst: f64 = 0.0;
    for (i, &x) in roots.iter().enumerate() {
        let mut lhs = ONE;
        for &l in lam {
            let d = x - l + 1.0;
            if d.norm() < SEP {
                return None;
            }
            lhs *= (x - l) / d;
        }
        let mut rhs = w2;
        for (j, &y) in roots.iter().enumerate() {
            if i == j {
                continue;
            }
            if (x - y).norm() < SEP {
                return None;
            }
            let d = x - y + 1.0;
            if d.norm() < SEP {
                return None;
            }
            rhs *= (x - y - 1.0) / d;
        }
        let scale = lhs.norm().max(rhs.norm()).max(1e-300);
        worst = worst.max((lhs - rhs).norm() / scale);
    }
    Some(worst)
}

/// `t(λ)` from `Q⁺` through `t Q⁺ = ω⁻¹ Q⁺(λ+1) Π(λ) + ω Q⁺(λ−1) Π(λ+1)`;
/// returns the quotient and the size of the division remainder relative to
/// the dividend.
pub fn t_from_qplus(cfg: &ChainConfig, qp: &CPoly) -> (CPoly, f64) {
    t_from_q(cfg, qp, 1)
}

/// The same from `Q⁻`, with the twist inverted.
pub fn t_from_qminus(cfg: &ChainConfig, qm: &CPoly) -> (CPoly, f64) {
    t_from_q(cfg, qm, -1)
}

fn t_from_q(cfg: &ChainConfig, q: &CPoly, sign: i32) -> (CPoly, f64) {
    let lam = lambda_inhom(cfg);
    let pi0 = pi_poly(&lam);
    let pi1 = pi0.compose_shift(ONE);
    let (a, b) = if sign > 0 {
        (cfg.omega.inv(), cfg.omega)
    } else {
        (cfg.omega, cfg.omega.inv())
    };
    let up = &q.compose_shift(ONE) * &pi0;
    let dn = &q.compose_shift(-ONE) * &pi1;
    let num = &up.scale(a) + &dn.scale(b);
    let (quot, rem) = num.div_rem(q);
    let rel = rem.max_abs_coeff() / num.max_abs_coeff().max(1e-300);
    (quot, rel)
}

/// `t(λ) = [ω² Q⁺(λ−1) Q⁻(λ+1) − ω⁻² Q⁺(λ+1) Q⁻(λ−1)] / (ω − ω⁻¹)`.
pub fn t_from_pair(omega: Complex64, qp: &CPoly, qm: &CPoly) -> CPoly {
    let w2 = omega * omega;
    let d = omega - omega.inv();
    let a = &qp.compose_shift(-ONE) * &qm.compose_shift(ONE);
    let b = &qp.compose_shift(ONE) * &qm.compose_shift(-ONE);
    (&a.scale(w2 / d) - &b.scale(w2.inv() / d)).clone()
}

/// Deviation between two eigenvalue polynomials, relative to the larger.
pub fn poly_deviation(a: &CPoly, b: &CPoly) -> f64 {
    a.max_abs_diff(b) / a.max_abs_coeff().max(b.max_abs_coeff()).max(1.0)
}

/// Index of the pair whose reconstructed eigenvalue is closest to `t_lambda`
/// (λ convention), with the deviation.
pub fn match_eigenvalue(_cfg: &ChainConfig, t_lambda: &CPoly, pairs: &[QPair]) -> Option<(usize, f64)> {
    pairs
        .iter()
        .enumerate()
        .map(|(i, p)| (i, poly_deviation(&p.t_poly, t_lambda)))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
}

/// Checks that the solutions at `ω` and at `ω⁻¹` correspond with the roles of
/// `Q^±` exchanged: every `(Q⁺, Q⁻)` at `ω` has a partner `(P⁺, P⁻)` at
/// `ω⁻¹` with `Q⁺(λ) = P⁻(λ)` up to the reflection of the chain. Returns
/// the worst matched root-set distance. Both sets must come from the same
/// homogeneous chain and complementary sectors.
pub fn spin_reversal_bijection(forward: &[QPair], backward: &[QPair]) -> Option<f64> {
    if forward.len() != backward.len() {
        return None;
    }
    let mut used = vec![false; backward.len()];
    let mut worst: f64 = 0.0;
    for p in forward {
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, q) in backward.iter().enumerate() {
            if used[j] {
                continue;
            }
            let d = poly::hausdorff(&p.roots_p, &q.roots_m).max(poly::hausdorff(&p.roots_m, &q.roots_p));
            if d < best.0 {
                best = (d, j);
            }
        }
        if best.1 == usize::MAX {
            return None;
        }
        used[best.1] = true;
        worst = worst.max(best.0);
    }
    Some(worst)
}

/// λ-convention copy of a configuration.
pub(crate) fn lambda_cfg(cfg: &ChainConfig) -> ChainConfig {
    cfg.in_convention(Convention::Lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rnd(rng: &mut ChaCha8Rng) -> Complex64 {
        c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    }

    #[test]
    fn taylor_shift_matches_compose() {
        let p = CPoly::from_real(&[1.0, -2.0, 0.5, 3.0]);
        let a = c64(0.3, -0.7);
        let s = taylor_shift(p.coeffs(), a);
        assert!(CPoly::from_coeffs_untrimmed(s).max_abs_diff(&p.compose_shift(a)) < 1e-14);
    }

    #[test]
    fn es_system_equals_coefficient_matching() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cfg = ChainConfig::new(4, (0..4).map(|_| rnd(&mut rng)).collect(), c64(0.7, 1.1), Convention::Lambda)
            .unwrap();
        for n in 0..=4 {
            let qp = CPoly::from_roots(&(0..n).map(|_| rnd(&mut rng)).collect::<Vec<_>>());
            let qm = CPoly::from_roots(&(0..4 - n).map(|_| rnd(&mut rng)).collect::<Vec<_>>());
            let res = wronskian_residual(&qp, &qm, &cfg);
            let es = es_system(&poly::elem_sym_of_monic(&qp), &poly::elem_sym_of_monic(&qm), &cfg);
            for (m, r) in es.iter().enumerate() {
                let sign = if (4 - m) % 2 == 0 { 1.0 } else { -1.0 };
                assert!((res.coeff(m) * sign - r).norm() < 1e-12, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn es_system_is_quadratic_along_rays() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let cfg = ChainConfig::homogeneous(4, c64(1.2, 0.4)).unwrap();
        let ep: Vec<Complex64> = std::iter::once(ONE).chain((0..2).map(|_| rnd(&mut rng))).collect();
        let em: Vec<Complex64> = std::iter::once(ONE).chain((0..2).map(|_| rnd(&mut rng))).collect();
        let at = |t: f64| {
            let a: Vec<Complex64> = ep.iter().enumerate().map(|(k, &e)| if k == 0 { e } else { e * t }).collect();
            let b: Vec<Complex64> = em.iter().enumerate().map(|(k, &e)| if k == 0 { e } else { e * t }).collect();
            es_system(&a, &b, &cfg)
        };
        let ts = [0.0, 1.0, 2.0, 3.0];
        let vals: Vec<Vec<Complex64>> = ts.iter().map(|&t| at(t)).collect();
        for m in 0..4 {
            // third finite difference of a quadratic vanishes
            let d3 = vals[3][m] - vals[2][m] * 3.0 + vals[1][m] * 3.0 - vals[0][m];
            assert!(d3.norm() < 1e-10);
        }
    }

    #[test]
    fn n0_linear_solution() {
        // Q⁺ = 1: W = [ω Q⁻(λ) − ω⁻¹ Q⁻(λ−1)]/(ω−ω⁻¹) is linear in Q⁻
        let cfg = ChainConfig::new(
            3,
            vec![c64(0.1, 0.0), c64(-0.4, 0.2), c64(0.3, -0.1)],
            c64(0.9, 0.8),
            Convention::Lambda,
        )
        .unwrap();
        let pi = pi_poly(&cfg.lambda_inhom());
        // solve coefficient-wise from the top: the operator is upper triangular
        let mut q = vec![ZERO; 4];
        q[3] = ONE;
        for k in (0..3).rev() {
            q[k] = ZERO;
            let w = wronskian_raw(&[ONE], &q, cfg.omega);
            q[k] = pi.coeff(k) - w[k];
        }
        let qm = CPoly::from_coeffs_untrimmed(q);
        assert!(wronskian_residual(&CPoly::one(), &qm, &cfg).max_abs_coeff() < 1e-12);
        let t = t_from_qplus(&cfg, &CPoly::one()).0;
        let vac = &pi.compose_shift(ONE).scale(cfg.omega) + &pi.scale(cfg.omega.inv());
        assert!(t.max_abs_diff(&vac) < 1e-12);
    }

    #[test]
    fn seed_residual_decays_like_inverse_square() {
        let cfg = ChainConfig::new(
            2,
            vec![c64(0.2, 0.1), c64(-0.5, 0.3)],
            c64(1e6, 0.0),
            Convention::Lambda,
        )
        .unwrap();
        let qp = CPoly::linear(c64(0.2, 0.1) - 1.0);
        let qm = CPoly::linear(c64(-0.5, 0.3));
        let r = wronskian_residual(&qp, &qm, &cfg).max_abs_coeff();
        assert!(r < 1e-11 && r > 1e-14);
    }

    #[test]
    fn bae_holds_for_exact_pair() {
        // a two-site solution: solve numerically then check BAE
        let cfg = ChainConfig::new(2, vec![c64(0.2, 0.0), c64(-0.3, 0.1)], c64(0.6, 0.9), Convention::Lambda)
            .unwrap();
        let pairs = solve_sector(&cfg, lattice::SpinSector::new(0), &SolveOptions::default()).unwrap();
        assert_eq!(pairs.len(), 2);
        for p in &pairs {
            assert!(p.wronskian_residual < 1e-10);
            assert!(p.bae_residual.unwrap() < 1e-8);
            let (tm, rem) = t_from_qminus(&cfg, &p.qm);
            assert!(rem < 1e-9);
            assert!(poly_deviation(&tm, &p.t_poly) < 1e-9);
            assert!(poly_deviation(&t_from_pair(cfg.omega, &p.qp, &p.qm), &p.t_poly) < 1e-9);
        }
    }
}
