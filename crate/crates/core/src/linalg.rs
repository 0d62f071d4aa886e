//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

/// `‖a − b‖_F / max(‖a‖_F, ‖b‖_F)`, or the absolute difference when both vanish.
pub fn rel_diff(a: &CMat, b: &CMat) -> f64 {
    let d = frobenius(&(a - b));
    let s = frobenius(a).max(frobenius(b));
    if s == 0.0 {
        d
    } else {
        d / s
    }
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("{}x{} matrix not invertible", m.nrows(), m.ncols())))
}

/// Solves `a · x = b` by LU with partial pivoting.
pub fn solve(a: &CMat, b: &CVec) -> Result<CVec> {
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("linear system".into()))
}

/// Smallest singular value over largest.
pub fn inverse_condition(a: &CMat) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if max == 0.0 {
        0.0
    } else {
        min / max
    }
}

/// Eigenpairs of a general complex matrix.
///
/// Complex Schur form `A = Z T Z^H`, eigenvectors of `T` by back
/// substitution, mapped back through `Z`. Vectors are normalized to unit
/// length with their largest component real and positive.
pub fn eig(a: &CMat) -> Result<(Vec<Complex64>, Vec<CVec>)> {
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::Singular("Schur iteration did not converge".into()))?;
    let (z, t) = schur.unpack();
    let scale = max_abs(&t).max(f64::MIN_POSITIVE);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = t[(k, k)];
        let mut y = CVec::zeros(n);
        y[k] = Complex64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = ZERO;
            for j in i + 1..=k {
                s += t[(i, j)] * y[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < f64::EPSILON * scale {
                d = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            y[i] = -s / d;
        }
        let v = &z * y;
        values.push(lambda);
        vectors.push(normalize_phase(v));
    }
    Ok((values, vectors))
}

/// Unit norm, largest-modulus component real positive.
pub fn normalize_phase(v: CVec) -> CVec {
    let norm = v.norm();
    if norm == 0.0 {
        return v;
    }
    let mut best = ZERO;
    for z in v.iter() {
        if z.norm() > best.norm() * (1.0 + 1e-12) {
            best = *z;
        }
    }
    let phase = best.conj() / best.norm();
    v.map(|z| z * phase / norm)
}

/// Rayleigh quotient `v^H A v / v^H v`.
pub fn rayleigh(a: &CMat, v: &CVec) -> Complex64 {
    let av = a * v;
    v.dotc(&av) / v.dotc(v)
}

/// Newton interpolation of a matrix-valued polynomial; returns the monomial
/// coefficients `C_0 … C_{n−1}` with `Σ C_j z^j` through the samples.
pub fn interpolate_matrices(nodes: &[Complex64], values: &[CMat]) -> Vec<CMat> {
    assert_eq!(nodes.len(), values.len());
    let n = nodes.len();
    let mut dd: Vec<CMat> = values.to_vec();
    for level in 1..n {
        for j in (level..n).rev() {
            let diff = &dd[j] - &dd[j - 1];
            dd[j] = diff / (nodes[j] - nodes[j - level]);
        }
    }
    let mut acc: Vec<CMat> = vec![dd[n - 1].clone()];
    for j in (0..n - 1).rev() {
        let (r, c) = (dd[j].nrows(), dd[j].ncols());
        let mut next: Vec<CMat> = vec![CMat::zeros(r, c); acc.len() + 1];
        for (k, a) in acc.iter().enumerate() {
            next[k + 1] += a;
            next[k] -= a * nodes[j];
        }
        next[0] += &dd[j];
        acc = next;
    }
    acc
}

/// Horner evaluation of `Σ C_j z^j`.
pub fn eval_matrix_poly(coeffs: &[CMat], z: Complex64) -> CMat {
    let mut acc = coeffs.last().unwrap().clone();
    for c in coeffs.iter().rev().skip(1) {
        acc = acc * z + c;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> CMat {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMat::from_fn(n, n, |_, _| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn eigenpairs_satisfy_definition() {
        for n in [1, 2, 5, 12] {
            let a = random_matrix(n, n as u64);
            let (vals, vecs) = eig(&a).unwrap();
            for (l, v) in vals.iter().zip(&vecs) {
                let r = (&a * v - v * *l).norm();
                assert!(r < 1e-11, "n={n} residual {r}");
            }
        }
    }

    #[test]
    fn matrix_interpolation_roundtrip() {
        let coeffs: Vec<CMat> = (0..4).map(|k| random_matrix(3, 100 + k)).collect();
        let nodes: Vec<Complex64> = (0..4)
            .map(|j| Complex64::new(j as f64, j as f64) / 7.0)
            .collect();
        let vals: Vec<CMat> = nodes.iter().map(|&z| eval_matrix_poly(&coeffs, z)).collect();
        let back = interpolate_matrices(&nodes, &vals);
        for (a, b) in coeffs.iter().zip(&back) {
            assert!(max_abs(&(a - b)) < 1e-10);
        }
    }

    #[test]
    fn phase_normalization() {
        let v = CVec::from_vec(vec![Complex64::new(0.0, 2.0), Complex64::new(0.1, 0.0)]);
        let w = normalize_phase(v);
        assert!((w.norm() - 1.0).abs() < 1e-15);
        assert!(w[0].im.abs() < 1e-15 && w[0].re > 0.0);
    }
}
