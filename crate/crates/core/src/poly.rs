//! Univariate polynomials with complex coefficients.
//!
//! `CPoly` stores coefficients in ascending powers. The coefficient form is
//! primary; roots and elementary symmetric polynomials are derived views.
//! Trailing coefficients at or below `TRIM_REL · max|coeff|` are dropped by
//! [`CPoly::new`], so a collapsing leading coefficient shows up as a degree
//! drop instead of being carried along as noise.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold for trailing-coefficient trimming.
pub const TRIM_REL: f64 = 1e-13;

/// Acceptance bound on the backward error of a computed root.
pub const ROOT_BACKWARD_TOL: f64 = 1e-10;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

#[derive(Clone, Debug, PartialEq)]
pub struct CPoly {
    coeffs: Vec<Complex64>,
}

impl CPoly {
    /// Builds a polynomial from ascending coefficients, trimming negligible
    /// trailing terms.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = CPoly { coeffs };
        p.trim(TRIM_REL);
        p
    }

    /// Keeps every coefficient, including a tiny or zero leading one.
    pub fn from_coeffs_untrimmed(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(ZERO);
        }
        CPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero() -> Self {
        CPoly { coeffs: vec![ZERO] }
    }

    pub fn one() -> Self {
        CPoly { coeffs: vec![ONE] }
    }

    pub fn constant(c: Complex64) -> Self {
        CPoly { coeffs: vec![c] }
    }

    /// The identity polynomial `λ`.
    pub fn x() -> Self {
        CPoly {
            coeffs: vec![ZERO, ONE],
        }
    }

    /// `c · λ^deg`.
    pub fn monomial(c: Complex64, deg: usize) -> Self {
        let mut coeffs = vec![ZERO; deg + 1];
        coeffs[deg] = c;
        Self::new(coeffs)
    }

    /// The linear factor `λ − root`.
    pub fn linear(root: Complex64) -> Self {
        CPoly {
            coeffs: vec![-root, ONE],
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of `λ^k`; zero beyond the degree.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or(ZERO)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn leading(&self) -> Complex64 {
        *self.coeffs.last().unwrap()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Drops trailing coefficients with `|c| ≤ rel · max|coeff|`.
    pub fn trim(&mut self, rel: f64) {
        let scale = self.max_abs_coeff();
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() <= rel * scale {
            self.coeffs.pop();
        }
        if scale == 0.0 {
            self.coeffs.truncate(1);
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    /// Value and first derivative at `z` by Horner's scheme.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = ZERO;
        let mut dp = ZERO;
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    /// `p(a·λ + b)`.
    pub fn compose_affine(&self, a: Complex64, b: Complex64) -> Self {
        let lin = CPoly {
            coeffs: vec![b, a],
        };
        let mut acc = CPoly::constant(self.leading());
        for &c in self.coeffs.iter().rev().skip(1) {
            acc = &acc * &lin;
            acc.coeffs[0] += c;
        }
        acc.trim(TRIM_REL);
        acc
    }

    /// `p(λ + a)`.
    pub fn compose_shift(&self, a: Complex64) -> Self {
        self.compose_affine(ONE, a)
    }

    /// `p(−λ − 1)`.
    pub fn reflect(&self) -> Self {
        self.compose_affine(-ONE, -ONE)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() == 1 {
            return CPoly::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// Scales to leading coefficient one.
    pub fn monic(&self) -> Self {
        let lead = self.leading();
        CPoly {
            coeffs: self.coeffs.iter().map(|&c| c / lead).collect(),
        }
    }

    /// Polynomial long division; returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &CPoly) -> (CPoly, CPoly) {
        let d = divisor.degree();
        let lead = divisor.leading();
        if self.degree() < d {
            return (CPoly::zero(), self.clone());
        }
        let mut rem = self.coeffs.clone();
        let qlen = self.degree() - d + 1;
        let mut quot = vec![ZERO; qlen];
        for i in (0..qlen).rev() {
            let q = rem[i + d] / lead;
            quot[i] = q;
            for (j, &dc) in divisor.coeffs.iter().enumerate() {
                rem[i + j] -= q * dc;
            }
        }
        rem.truncate(d.max(1));
        if d == 0 {
            rem = vec![ZERO];
        }
        (
            CPoly::from_coeffs_untrimmed(quot),
            CPoly::from_coeffs_untrimmed(rem),
        )
    }

    /// Monic polynomial `∏ (λ − r)`.
    pub fn from_roots(roots: &[Complex64]) -> Self {
        let mut coeffs = vec![ONE];
        for &r in roots {
            coeffs.push(ZERO);
            for k in (1..coeffs.len()).rev() {
                let prev = coeffs[k - 1];
                coeffs[k] = prev - r * coeffs[k];
            }
            coeffs[0] = -r * coeffs[0];
        }
        CPoly { coeffs }
    }

    /// Newton-form interpolation through `(nodes[j], values[j])`, returned
    /// in monomial form. Nodes must be distinct.
    pub fn interpolate(nodes: &[Complex64], values: &[Complex64]) -> Self {
        assert_eq!(nodes.len(), values.len());
        assert!(!nodes.is_empty());
        let n = nodes.len();
        let mut dd = values.to_vec();
        for level in 1..n {
            for j in (level..n).rev() {
                dd[j] = (dd[j] - dd[j - 1]) / (nodes[j] - nodes[j - level]);
            }
        }
        let mut acc = vec![dd[n - 1]];
        for j in (0..n - 1).rev() {
            // acc ← acc · (λ − nodes[j]) + dd[j]
            let mut next = vec![ZERO; acc.len() + 1];
            for (k, &a) in acc.iter().enumerate() {
                next[k + 1] += a;
                next[k] -= a * nodes[j];
            }
            next[0] += dd[j];
            acc = next;
        }
        CPoly::from_coeffs_untrimmed(acc)
    }

    /// Backward error of `z` as a root: `|p(z)| / Σ|c_k||z|^k`.
    pub fn root_backward_error(&self, z: Complex64) -> f64 {
        let r = z.norm();
        let denom = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm());
        if denom == 0.0 {
            0.0
        } else {
            self.eval(z).norm() / denom
        }
    }

    /// All complex roots.
    ///
    /// Aberth–Ehrlich iteration from a perturbed circle around the root
    /// centroid; companion-matrix eigenvalues when Aberth stalls. Each root is
    /// accepted when its backward error is below [`ROOT_BACKWARD_TOL`].
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Err(Error::Precondition(
                "roots of a constant polynomial".into(),
            ));
        }
        if self.leading().norm() <= TRIM_REL * self.max_abs_coeff() {
            return Err(Error::Precondition(
                "leading coefficient below trim threshold".into(),
            ));
        }
        let monic = self.monic();
        let roots = aberth(&monic, 500);
        let errs: Vec<f64> = roots.iter().map(|&z| monic.root_backward_error(z)).collect();
        if errs.iter().all(|&e| e < ROOT_BACKWARD_TOL) {
            return Ok(roots);
        }
        let roots = companion_roots(&monic)?;
        let errs: Vec<f64> = roots.iter().map(|&z| monic.root_backward_error(z)).collect();
        let worst = errs.iter().cloned().fold(0.0, f64::max);
        if worst < ROOT_BACKWARD_TOL {
            Ok(roots)
        } else {
            Err(Error::RootFinding {
                max_residual: worst,
                residuals: errs,
            })
        }
    }

    pub fn max_abs_diff(&self, other: &CPoly) -> f64 {
        let n = self.coeffs.len().max(other.coeffs.len());
        (0..n)
            .map(|k| (self.coeff(k) - other.coeff(k)).norm())
            .fold(0.0, f64::max)
    }
}

fn aberth(monic: &CPoly, max_iter: usize) -> Vec<Complex64> {
    let n = monic.degree();
    let c = monic.coeffs();
    let centroid = -c[n - 1] / n as f64;
    let shifted = monic.compose_shift(centroid);
    // Fujiwara bound on the shifted polynomial.
    let sc = shifted.coeffs();
    let mut bound: f64 = 0.0;
    for (k, coeff) in sc.iter().enumerate().take(n) {
        let mut term = coeff.norm().powf(1.0 / (n - k) as f64);
        if k == 0 {
            term *= 0.5f64.powf(1.0 / n as f64);
        }
        bound = bound.max(term);
    }
    let radius = if bound > 0.0 { bound } else { 1.0 };
    let mut z: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64 + 0.4;
            let r = radius * (1.0 + 0.01 * k as f64 / n as f64);
            centroid + Complex64::from_polar(r, theta)
        })
        .collect();
    let scale = 1.0 + z.iter().map(|w| w.norm()).fold(0.0, f64::max);
    for _ in 0..max_iter {
        let mut max_step: f64 = 0.0;
        for k in 0..n {
            let (p, dp) = monic.eval_with_derivative(z[k]);
            if p == ZERO {
                continue;
            }
            let ratio = p / dp;
            let mut repulsion = ZERO;
            for j in 0..n {
                if j != k {
                    let d = z[k] - z[j];
                    if d != ZERO {
                        repulsion += d.inv();
                    }
                }
            }
            let step = ratio / (ONE - ratio * repulsion);
            if step.re.is_finite() && step.im.is_finite() {
                z[k] -= step;
                max_step = max_step.max(step.norm());
            }
        }
        if max_step <= 4.0 * f64::EPSILON * scale {
            break;
        }
    }
    z
}

fn companion_roots(monic: &CPoly) -> Result<Vec<Complex64>> {
    let n = monic.degree();
    let c = monic.coeffs();
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = ONE;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i];
    }
    let eig = nalgebra::linalg::Schur::new(m)
        .eigenvalues()
        .ok_or_else(|| Error::RootFinding {
            max_residual: f64::INFINITY,
            residuals: vec![],
        })?;
    let mut roots: Vec<Complex64> = eig.iter().copied().collect();
    for z in roots.iter_mut() {
        for _ in 0..3 {
            let (p, dp) = monic.eval_with_derivative(*z);
            if dp == ZERO {
                break;
            }
            let step = p / dp;
            if step.re.is_finite() && step.im.is_finite() {
                *z -= step;
            }
        }
    }
    Ok(roots)
}

impl Add for &CPoly {
    type Output = CPoly;
    fn add(self, rhs: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|k| self.coeff(k) + rhs.coeff(k)).collect())
    }
}

impl Sub for &CPoly {
    type Output = CPoly;
    fn sub(self, rhs: &CPoly) -> CPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        CPoly::new((0..n).map(|k| self.coeff(k) - rhs.coeff(k)).collect())
    }
}

impl Mul for &CPoly {
    type Output = CPoly;
    fn mul(self, rhs: &CPoly) -> CPoly {
        let mut out = vec![ZERO; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CPoly { coeffs: out }
    }
}

impl Neg for &CPoly {
    type Output = CPoly;
    fn neg(self) -> CPoly {
        CPoly {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

/// Elementary symmetric polynomials `e_0 … e_n` of `values`.
pub fn elem_sym(values: &[Complex64]) -> Vec<Complex64> {
    let mut e = vec![ZERO; values.len() + 1];
    e[0] = ONE;
    for (i, &v) in values.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            let prev = e[k - 1];
            e[k] += v * prev;
        }
    }
    e
}

/// `e_k` with the convention `e_k = 0` outside `0..=n`.
pub fn elem_sym_at(e: &[Complex64], k: isize) -> Complex64 {
    if k < 0 || k as usize >= e.len() {
        ZERO
    } else {
        e[k as usize]
    }
}

/// Monic polynomial `Σ_k (−1)^k e_k λ^{n−k}` from `e_0 = 1, e_1, …, e_n`.
pub fn from_elem_sym(e: &[Complex64]) -> CPoly {
    let n = e.len() - 1;
    let coeffs = (0..=n)
        .map(|p| {
            let k = n - p;
            if k % 2 == 0 {
                e[k]
            } else {
                -e[k]
            }
        })
        .collect();
    CPoly::from_coeffs_untrimmed(coeffs)
}

/// Elementary symmetric polynomials read off a monic polynomial's coefficients.
pub fn elem_sym_of_monic(p: &CPoly) -> Vec<Complex64> {
    let n = p.degree();
    (0..=n)
        .map(|k| {
            let c = p.coeff(n - k);
            if k % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect()
}

/// Hausdorff distance between two finite point sets in ℂ.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    if a.is_empty() || b.is_empty() {
        return f64::INFINITY;
    }
    let directed = |x: &[Complex64], y: &[Complex64]| {
        x.iter()
            .map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// How far a root multiset is from being closed under conjugation: the
/// largest distance from `conj(z)` to its greedily matched partner.
pub fn conjugate_pair_defect(roots: &[Complex64]) -> f64 {
    let mut unused: Vec<bool> = vec![true; roots.len()];
    let mut worst: f64 = 0.0;
    for (i, z) in roots.iter().enumerate() {
        let target = z.conj();
        let mut best = (f64::INFINITY, usize::MAX);
        for (j, w) in roots.iter().enumerate() {
            if unused[j] {
                let d = (w - target).norm();
                if d < best.0 {
                    best = (d, j);
                }
            }
        }
        if best.1 != usize::MAX {
            let _ = i;
            unused[best.1] = false;
            worst = worst.max(best.0);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_poly(rng: &mut ChaCha8Rng, deg: usize) -> CPoly {
        CPoly::new(
            (0..=deg)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
    }

    #[test]
    fn reflect_square() {
        let p = CPoly::monomial(ONE, 2);
        let r = p.reflect();
        assert!(r.max_abs_diff(&CPoly::from_real(&[1.0, 2.0, 1.0])) < 1e-15);
    }

    #[test]
    fn shift_cube() {
        let p = CPoly::monomial(ONE, 3).compose_shift(ONE);
        assert!((p.eval(c(2.0, 0.0)) - c(27.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn ring_axioms_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let a = random_poly(&mut rng, 5);
            let b = random_poly(&mut rng, 5);
            let d = random_poly(&mut rng, 5);
            let lhs = &a * &(&b + &d);
            let rhs = &(&a * &b) + &(&a * &d);
            assert!(lhs.max_abs_diff(&rhs) < 1e-13);
        }
    }

    #[test]
    fn quadratic_roots() {
        let p = CPoly::from_real(&[1.0, 0.0, 1.0]);
        let mut r = p.roots().unwrap();
        r.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((r[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((r[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn periodic_groundstate_roots_are_real() {
        // u^5 − 0.404451 u^3 + 0.0167203 u: the periodic M = 10 groundstate.
        let p = CPoly::from_real(&[0.0, 0.0167203, 0.0, -0.404451, 0.0, 1.0]);
        let roots = p.roots().unwrap();
        assert!(roots.iter().any(|z| z.norm() < 1e-10));
        for z in &roots {
            assert!(z.im.abs() < 1e-9, "root {z} not real");
        }
        let positive = roots.iter().filter(|z| z.re > 1e-6).count();
        assert_eq!(positive, 2);
    }

    #[test]
    fn roots_roundtrip_degree_eight() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let truth: Vec<Complex64> = (0..8)
                .map(|_| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)))
                .collect();
            let p = CPoly::from_roots(&truth);
            let found = p.roots().unwrap();
            assert!(hausdorff(&truth, &found) < 1e-8);
        }
    }

    #[test]
    fn elementary_symmetric_123() {
        let e = elem_sym(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(e.len(), 4);
        assert!((e[1] - c(6.0, 0.0)).norm() < 1e-15);
        assert!((e[2] - c(11.0, 0.0)).norm() < 1e-15);
        assert!((e[3] - c(6.0, 0.0)).norm() < 1e-15);
        assert_eq!(elem_sym_at(&e, -1), ZERO);
        assert_eq!(elem_sym_at(&e, 4), ZERO);
    }

    #[test]
    fn vieta_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..8 {
            let roots: Vec<Complex64> = (0..n)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect();
            let a = from_elem_sym(&elem_sym(&roots));
            let b = CPoly::from_roots(&roots);
            assert!(a.max_abs_diff(&b) < 1e-12);
            let back = elem_sym_of_monic(&b);
            let e = elem_sym(&roots);
            for k in 0..=n {
                assert!((back[k] - e[k]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn trim_drops_relative_noise_only() {
        let p = CPoly::new(vec![ONE, c(2.0, 0.0), c(1e-14, 0.0)]);
        assert_eq!(p.degree(), 1);
        let q = CPoly::new(vec![ONE, c(2.0, 0.0), c(1e-10, 0.0)]);
        assert_eq!(q.degree(), 2);
        assert_eq!(CPoly::new(vec![ZERO, ZERO]).degree(), 0);
    }

    #[test]
    fn interpolation_reproduces_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = random_poly(&mut rng, 6);
        let nodes: Vec<Complex64> = (0..7).map(|j| c(j as f64, 0.0) * c(1.0, 1.0) / 7.0).collect();
        let vals: Vec<Complex64> = nodes.iter().map(|&z| p.eval(z)).collect();
        let q = CPoly::interpolate(&nodes, &vals);
        assert!(q.max_abs_diff(&p) < 1e-9);
    }

    #[test]
    fn division_is_exact_for_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_poly(&mut rng, 4);
        let b = random_poly(&mut rng, 3);
        let (q, r) = (&a * &b).div_rem(&b);
        assert!(q.max_abs_diff(&a) < 1e-10);
        assert!(r.max_abs_coeff() < 1e-10);
    }

    #[test]
    fn conjugate_pairs_of_real_polynomial() {
        let p = CPoly::from_real(&[2.0, -1.0, 0.5, 3.0, 1.0]);
        let roots = p.roots().unwrap();
        assert!(conjugate_pair_defect(&roots) < 1e-9);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn cplx() -> impl Strategy<Value = Complex64> {
            (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(a, b)| Complex64::new(a, b))
        }

        proptest! {
            #[test]
            fn from_roots_then_roots(roots in prop::collection::vec(cplx(), 1..7)) {
                // keep the multiset well separated
                let sep = roots.iter().enumerate().flat_map(|(i, a)| {
                    roots.iter().skip(i + 1).map(move |b| (a - b).norm())
                }).fold(f64::INFINITY, f64::min);
                prop_assume!(sep > 0.05);
                let found = CPoly::from_roots(&roots).roots().unwrap();
                prop_assert!(hausdorff(&roots, &found) < 1e-8);
            }

            #[test]
            fn affine_composition_matches_pointwise(
                coeffs in prop::collection::vec(cplx(), 1..8), a in cplx(), b in cplx(), z in cplx()
            ) {
                let p = CPoly::new(coeffs);
                let lhs = p.compose_affine(a, b).eval(z);
                let rhs = p.eval(a * z + b);
                prop_assert!((lhs - rhs).norm() <= 1e-9 * (1.0 + rhs.norm()));
            }
        }
    }
}
