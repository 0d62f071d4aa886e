//! Matrix elements of `L_M ⋯ L_1` between auxiliary level states.
//!
//! Physical basis states are bit strings, site `m` ↔ bit `m − 1`, bit value
//! 0 = spin up. For physical row `alpha` and column `beta`, each site
//! contributes the `(α_m, β_m)` entry of the L-operator
//!
//! ```text
//!   L(μ) = [ μ + (h+1)/2      f        ]
//!          [      e       μ − (h−1)/2  ]
//! ```
//!
//! acting on the auxiliary level `|k⟩`. Sites act in order `1..M`, so the
//! amplitude is `⟨k| L_M ⋯ L_1 |k⟩` with `L_1` applied first.

use num_complex::Complex64;

/// Amplitude of the level-`k` diagonal element for one physical matrix entry.
///
/// `dim = Some(n)` truncates to the `n`-dimensional quotient spanned by
/// `|0⟩ … |n−1⟩` (the finite module at `x = n`).
pub(crate) fn path_amplitude(
    mus: &[Complex64],
    x: Complex64,
    k: usize,
    alpha: usize,
    beta: usize,
    dim: Option<usize>,
) -> Complex64 {
    let mut amp = Complex64::new(1.0, 0.0);
    let mut level = k;
    for (m, &mu) in mus.iter().enumerate() {
        let a = (alpha >> m) & 1;
        let b = (beta >> m) & 1;
        match (a, b) {
            (0, 0) => {
                let h = x - (2 * level + 1) as f64;
                amp *= mu + (h + 1.0) * 0.5;
            }
            (1, 1) => {
                let h = x - (2 * level + 1) as f64;
                amp *= mu - (h - 1.0) * 0.5;
            }
            (0, 1) => {
                level += 1;
                if let Some(d) = dim {
                    if level >= d {
                        return Complex64::new(0.0, 0.0);
                    }
                }
            }
            _ => {
                if level == 0 {
                    return Complex64::new(0.0, 0.0);
                }
                amp *= (x - level as f64) * level as f64;
                level -= 1;
            }
        }
        if amp == Complex64::new(0.0, 0.0) {
            return amp;
        }
    }
    if level == k {
        amp
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Quick rejection: a nonzero path needs equal spin content and a net level
/// change of zero, which both follow from equal popcounts.
pub(crate) fn same_sector(alpha: usize, beta: usize) -> bool {
    alpha.count_ones() == beta.count_ones()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_site_diagonal() {
        let x = c(1.7);
        let mu = c(0.3);
        for k in 0..4 {
            let h = x - (2 * k + 1) as f64;
            let up = path_amplitude(&[mu], x, k, 0, 0, None);
            let down = path_amplitude(&[mu], x, k, 1, 1, None);
            assert!((up - (mu + (h + 1.0) / 2.0)).norm() < 1e-15);
            assert!((down - (mu - (h - 1.0) / 2.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn lowering_at_ground_level_vanishes() {
        // site 1 lowers (α=1, β=0) from level 0, site 2 raises back
        let amp = path_amplitude(&[c(0.1), c(0.2)], c(2.5), 0, 0b01, 0b10, None);
        assert_eq!(amp, c(0.0));
        // raise first, lower second
        let amp = path_amplitude(&[c(0.1), c(0.2)], c(2.5), 0, 0b10, 0b01, None);
        assert!((amp - c(2.5 - 1.0)).norm() < 1e-15);
    }

    #[test]
    fn truncation_blocks_top_level() {
        let amp = path_amplitude(&[c(0.1), c(0.2)], c(2.0), 1, 0b10, 0b01, Some(2));
        assert_eq!(amp, c(0.0));
    }
}
