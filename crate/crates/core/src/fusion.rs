//! Fusion hierarchy and the transfer matrix of complex auxiliary dimension.
//!
//! `t^{(n−1)}` is the trace over the `n`-dimensional module spanned by
//! `|0⟩ … |n−1⟩` at `x = n`, with `L(μ)` evaluated at `μ = λ − λ_m`. With
//! this normalization `n = 2` reproduces the spin-1/2 transfer matrix
//! without any shift of the spectral parameter, and `n = 1` gives
//! `χ(λ) = ∏(λ − λ_m + 1/2)`.
//!
//! The complex-dimension transfer matrix is the removable-singularity limit
//! `t(λ;x) = lim_{ω→1} [Q_ω(λ − x/2; x) − Q_ω(λ + x/2; −x)]`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::aux::{path_amplitude, same_sector};
use crate::error::{Error, Result};
use crate::lattice::{self, ChainConfig, Convention};
use crate::linalg::{self, CMat};
use crate::poly::CPoly;
use crate::verma;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Trace over the `n`-dimensional module; λ convention.
pub fn higher_transfer(cfg: &ChainConfig, n: usize, lambda: Complex64) -> Result<CMat> {
    if n == 0 {
        return Err(Error::InvalidConfig("auxiliary dimension must be ≥ 1".into()));
    }
    cfg.check_capacity()?;
    if n > 64 {
        return Err(Error::Capacity {
            what: "auxiliary dimension",
            requested: n,
            max: 64,
        });
    }
    let mus: Vec<Complex64> = cfg.lambda_inhom().iter().map(|&l| lambda - l).collect();
    let x = Complex64::new(n as f64, 0.0);
    let weights: Vec<Complex64> = (0..n)
        .map(|k| verma::omega_pow(cfg.omega, Complex64::new(n as f64 - 2.0 * k as f64 - 1.0, 0.0)))
        .collect();
    let dim = cfg.dim();
    let rows: Vec<Vec<Complex64>> = (0..dim)
        .into_par_iter()
        .map(|a| {
            (0..dim)
                .map(|b| {
                    if !same_sector(a, b) {
                        return ZERO;
                    }
                    weights
                        .iter()
                        .enumerate()
                        .map(|(k, w)| w * path_amplitude(&mus, x, k, a, b, Some(n)))
                        .sum()
                })
                .collect()
        })
        .collect();
    Ok(CMat::from_fn(dim, dim, |r, c| rows[r][c]))
}

/// Relative residual of
/// `t^{(n)}(λ+(n+1)/2) t^{(1)}(λ) = t^{(0)}(λ+1/2) t^{(n+1)}(λ+n/2) + t^{(0)}(λ−1/2) t^{(n−1)}(λ+(n+2)/2)`,
/// where `t^{(k)}` is the trace over the `(k+1)`-dimensional module.
pub fn fusion_residual(cfg: &ChainConfig, n: usize, lambda: Complex64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidConfig("fusion level must be ≥ 1".into()));
    }
    let nf = n as f64;
    let t = |k: usize, s: Complex64| higher_transfer(cfg, k + 1, s);
    let lhs = t(n, lambda + (nf + 1.0) / 2.0)? * t(1, lambda)?;
    let a = t(0, lambda + 0.5)? * t(n + 1, lambda + nf / 2.0)?;
    let b = t(0, lambda - 0.5)? * t(n - 1, lambda + (nf + 2.0) / 2.0)?;
    let scale = linalg::frobenius(&lhs)
        .max(linalg::frobenius(&a))
        .max(linalg::frobenius(&b));
    Ok(linalg::frobenius(&(lhs - a - b)) / scale.max(f64::MIN_POSITIVE))
}

/// `Q(λ − n/2; n) − Q(λ + n/2; −n)`, which equals `t^{(n−1)}(λ)`.
pub fn q_difference_transfer(cfg: &ChainConfig, n: usize, lambda: Complex64) -> Result<CMat> {
    let x = Complex64::new(n as f64, 0.0);
    q_difference(cfg, x, lambda)
}

fn q_difference(cfg: &ChainConfig, x: Complex64, lambda: Complex64) -> Result<CMat> {
    let a = verma::q_matrix(cfg, lambda - x / 2.0, x)?;
    let b = verma::q_matrix(cfg, lambda + x / 2.0, -x)?;
    Ok(a - b)
}

fn q_difference_block(cfg: &ChainConfig, x: Complex64, lambda: Complex64, basis: &[usize]) -> Result<CMat> {
    let a = verma::q_block(cfg, lambda - x / 2.0, x, basis)?;
    let b = verma::q_block(cfg, lambda + x / 2.0, -x, basis)?;
    Ok(a - b)
}

/// How the `ω → 1` limit is taken.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitMethod {
    /// Mean over `nodes` points of the circle `|ω − 1| = radius`; exact for
    /// the removable singularity up to an error `∼ radius^nodes`.
    Contour { radius: f64, nodes: usize },
    /// Three-point Richardson extrapolation in `φ` from
    /// `φ_0, φ_0/2, φ_0/4` along `ω = e^{iφ}`.
    Richardson { phi0: f64 },
}

impl Default for LimitMethod {
    fn default() -> Self {
        LimitMethod::Contour {
            radius: 0.5,
            nodes: 64,
        }
    }
}

/// `t(λ;x)` together with the self-consistency estimate of the limit.
#[derive(Clone, Debug)]
pub struct LimitResult {
    pub matrix: CMat,
    pub consistency: f64,
}

/// Limit threshold above which the result is rejected.
pub const LIMIT_REJECT: f64 = 1e-6;

fn limit_of<F>(eval: F, method: LimitMethod) -> Result<LimitResult>
where
    F: Fn(Complex64) -> Result<CMat> + Sync,
{
    let (matrix, other) = match method {
        LimitMethod::Contour { radius, nodes } => {
            if radius <= 0.0 || radius >= 1.0 || nodes < 4 {
                return Err(Error::InvalidConfig("contour needs 0 < radius < 1 and ≥ 4 nodes".into()));
            }
            let vals: Vec<CMat> = (0..nodes)
                .into_par_iter()
                .map(|j| {
                    let th = 2.0 * std::f64::consts::PI * (j as f64 + 0.5) / nodes as f64;
                    eval(Complex64::new(1.0, 0.0) + Complex64::from_polar(radius, th))
                })
                .collect::<Result<Vec<_>>>()?;
            let full = vals.iter().skip(1).fold(vals[0].clone(), |acc, v| acc + v) / Complex64::new(nodes as f64, 0.0);
            // every other node: a half-resolution estimate of the same mean
            let half: Vec<&CMat> = vals.iter().step_by(2).collect();
            let coarse = half.iter().skip(1).fold(half[0].clone(), |acc, v| acc + *v) / Complex64::new(half.len() as f64, 0.0);
            (full, coarse)
        }
        LimitMethod::Richardson { phi0 } => {
            let d: Vec<CMat> = [phi0, phi0 / 2.0, phi0 / 4.0]
                .iter()
                .map(|&p| eval(Complex64::from_polar(1.0, p)))
                .collect::<Result<Vec<_>>>()?;
            // eliminate the O(φ) and O(φ²) terms
            let r1 = &d[1] * Complex64::new(2.0, 0.0) - &d[0];
            let r2 = &d[2] * Complex64::new(2.0, 0.0) - &d[1];
            let rr = (&r2 * Complex64::new(4.0, 0.0) - &r1) / Complex64::new(3.0, 0.0);
            (rr, r2)
        }
    };
    let consistency = linalg::rel_diff(&matrix, &other);
    if consistency > LIMIT_REJECT {
        return Err(Error::UnstableLimit {
            disagreement: consistency,
        });
    }
    Ok(LimitResult { matrix, consistency })
}

/// `t(λ;x)` on the full space in the ω → 1 limit.
pub fn complex_dim_transfer(cfg: &ChainConfig, x: Complex64, lambda: Complex64, method: LimitMethod) -> Result<LimitResult> {
    let cfg = cfg.in_convention(Convention::Lambda);
    limit_of(|w| q_difference(&cfg.with_omega(w), x, lambda), method)
}

/// `t(λ;x)` restricted to the given basis states.
pub fn complex_dim_block(
    cfg: &ChainConfig,
    x: Complex64,
    lambda: Complex64,
    basis: &[usize],
    method: LimitMethod,
) -> Result<LimitResult> {
    let cfg = cfg.in_convention(Convention::Lambda);
    limit_of(|w| q_difference_block(&cfg.with_omega(w), x, lambda, basis), method)
}

/// `Tr_x{h^m}` for `m = 0 … m_max` as polynomials in `x`:
/// `m! [z^m] sinh(zx)/sinh(z)`.
pub fn trace_functional_moments(m_max: usize) -> Result<Vec<Vec<f64>>> {
    if m_max > 12 {
        return Err(Error::InvalidConfig("trace functional moments are tabulated up to m = 12".into()));
    }
    // z / sinh z as a series in z²
    let len = m_max / 2 + 2;
    let s: Vec<f64> = (0..len).map(|k| 1.0 / factorial(2 * k + 1)).collect();
    let mut inv = vec![0.0; len];
    inv[0] = 1.0;
    for k in 1..len {
        let acc: f64 = (1..=k).map(|j| s[j] * inv[k - j]).sum();
        inv[k] = -acc;
    }
    let mut out = Vec::with_capacity(m_max + 1);
    for m in 0..=m_max {
        let mut poly = vec![0.0; m + 2];
        if m % 2 == 0 {
            // sinh(zx)/z = Σ_{j odd} x^j z^{j−1}/j!, times Σ inv_k z^{2k}
            for j in (1..=m + 1).step_by(2) {
                let k = (m + 1 - j) / 2;
                poly[j] += inv[k] / factorial(j);
            }
        }
        let f = factorial(m);
        out.push(poly.into_iter().map(|c| c * f).collect());
    }
    Ok(out)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn eval_real(p: &[f64], x: Complex64) -> Complex64 {
    p.iter().rev().fold(ZERO, |acc, &c| acc * x + c)
}

/// The diagonal element `Tr_x{∏_m L(λ)_{α_m α_m}}` as a polynomial in λ,
/// obtained by expanding in powers of `h` and applying the trace functional.
pub fn trace_functional_diagonal(sites: usize, state: usize, x: Complex64) -> Result<CPoly> {
    // bivariate product: index by power of h, entries are λ-polynomials
    let mut acc: Vec<CPoly> = vec![CPoly::one()];
    for m in 0..sites {
        let up = (state >> m) & 1 == 0;
        // up: λ + 1/2 + h/2 ; down: λ + 1/2 − h/2
        let c0 = CPoly::from_real(&[0.5, 1.0]);
        let c1 = CPoly::from_real(&[if up { 0.5 } else { -0.5 }]);
        let mut next = vec![CPoly::zero(); acc.len() + 1];
        for (p, a) in acc.iter().enumerate() {
            next[p] = &next[p] + &(a * &c0);
            next[p + 1] = &next[p + 1] + &(a * &c1);
        }
        acc = next;
    }
    let moments = trace_functional_moments(acc.len() - 1)?;
    let mut total = CPoly::zero();
    for (p, coeff) in acc.iter().enumerate() {
        total = &total + &coeff.scale(eval_real(&moments[p], x));
    }
    Ok(total)
}

/// Largest relative deviation between the trace-functional expansion and the
/// limit of the Q-difference for the `S^z = 0` diagonal elements of a
/// homogeneous four-site chain, over the sampled `x`.
pub fn trace_functional_check(cfg: &ChainConfig, xs: &[Complex64], method: LimitMethod) -> Result<f64> {
    if cfg.sites != 4 || !cfg.is_homogeneous() {
        return Err(Error::Precondition("trace functional check is set up for M = 4, homogeneous".into()));
    }
    let states: Vec<usize> = (0..16usize).filter(|s| s.count_ones() == 2).collect();
    let nodes: Vec<Complex64> = (0..5).map(lattice::interp_node).collect();
    let mut worst: f64 = 0.0;
    for &x in xs {
        let blocks = nodes
            .iter()
            .map(|&l| complex_dim_block(cfg, x, l, &states, method).map(|r| r.matrix))
            .collect::<Result<Vec<_>>>()?;
        for (i, &st) in states.iter().enumerate() {
            let vals: Vec<Complex64> = blocks.iter().map(|b| b[(i, i)]).collect();
            let limit = CPoly::interpolate(&nodes, &vals);
            let functional = trace_functional_diagonal(4, st, x)?;
            let dev = limit.max_abs_diff(&functional) / functional.max_abs_coeff().max(1.0);
            worst = worst.max(dev);
        }
    }
    if worst > 1e-7 {
        return Err(Error::Inconsistency(format!(
            "trace functional and limit differ by {worst:e}"
        )));
    }
    Ok(worst)
}

/// Closed form of the `S^z = 0` diagonal element for `M = 4`:
/// `(32x−20x³+3x⁵)/240 + (4x−x³)/6 λ + (10x−x³)/6 λ² + 2x λ³ + x λ⁴`.
pub fn m4_diagonal_closed_form(x: Complex64) -> CPoly {
    let x3 = x * x * x;
    let x5 = x3 * x * x;
    CPoly::new(vec![
        (x * 32.0 - x3 * 20.0 + x5 * 3.0) / 240.0,
        (x * 4.0 - x3) / 6.0,
        (x * 10.0 - x3) / 6.0,
        x * 2.0,
        x,
    ])
}

/// Eigenvalue polynomials (in λ) of `t(λ;x)` on the joint eigenbasis of the
/// periodic chain in one sector. Records are those of the oracle.
pub fn complex_dim_eigenvalues(
    cfg: &ChainConfig,
    records: &[lattice::SpectrumRecord],
    x: Complex64,
    method: LimitMethod,
) -> Result<Vec<CPoly>> {
    let lam_cfg = cfg.in_convention(Convention::Lambda);
    let sector = records
        .first()
        .map(|r| r.sector)
        .ok_or_else(|| Error::InvalidConfig("no records".into()))?;
    let basis = lattice::sector_basis(cfg.sites, sector)?;
    let nodes: Vec<Complex64> = (0..=cfg.sites).map(lattice::interp_node).collect();
    let blocks = nodes
        .iter()
        .map(|&l| complex_dim_block(&lam_cfg, x, l, &basis, method).map(|r| r.matrix))
        .collect::<Result<Vec<_>>>()?;
    Ok(records
        .iter()
        .map(|rec| {
            let v = linalg::CVec::from_iterator(basis.len(), basis.iter().map(|&b| rec.eigvec[b]));
            let vals: Vec<Complex64> = blocks.iter().map(|b| linalg::rayleigh(b, &v)).collect();
            CPoly::interpolate(&nodes, &vals)
        })
        .collect())
}

/// Eigenvalues of `t(λ;x)` in one sector as polynomials in both variables:
/// entry `[k]` of each returned vector is the coefficient of `λ^k`, fitted
/// as a polynomial in `x` through the samples `xs`. The eigenbasis is that
/// of a generic member of the commuting family, so degeneracies of the
/// periodic spin-1/2 transfer matrix do not matter.
pub fn complex_dim_x_polynomials(
    cfg: &ChainConfig,
    sector: lattice::SpinSector,
    xs: &[Complex64],
    method: LimitMethod,
) -> Result<Vec<Vec<CPoly>>> {
    let lam_cfg = cfg.in_convention(Convention::Lambda);
    let basis = lattice::sector_basis(cfg.sites, sector)?;
    let generic = complex_dim_block(&lam_cfg, Complex64::new(0.37, 0.21), Complex64::new(0.13, -0.4), &basis, method)?.matrix;
    let (_, vecs) = linalg::eig(&generic)?;
    let nodes: Vec<Complex64> = (0..=cfg.sites).map(lattice::interp_node).collect();
    // blocks[x][λ node]
    let blocks = xs
        .iter()
        .map(|&x| {
            nodes
                .iter()
                .map(|&l| complex_dim_block(&lam_cfg, x, l, &basis, method).map(|r| r.matrix))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(vecs
        .iter()
        .map(|v| {
            let per_x: Vec<CPoly> = blocks
                .iter()
                .map(|bx| {
                    let vals: Vec<Complex64> = bx.iter().map(|b| linalg::rayleigh(b, v)).collect();
                    CPoly::interpolate(&nodes, &vals)
                })
                .collect();
            (0..=cfg.sites)
                .map(|k| {
                    let vals: Vec<Complex64> = per_x.iter().map(|q| q.coeff(k)).collect();
                    CPoly::interpolate(xs, &vals)
                })
                .collect()
        })
        .collect())
}
