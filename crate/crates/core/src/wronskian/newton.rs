//! Damped Newton iteration and a predictor–corrector path tracker.

use num_complex::Complex64;

use crate::linalg::{CMat, CVec};

/// Residual vector, Jacobian and a scale for the residual norm.
pub(crate) type Eval = (Vec<Complex64>, CMat, f64);

#[derive(Clone, Copy, Debug)]
pub(crate) struct NewtonOpts {
    pub max_iter: usize,
    pub tol: f64,
    /// Bound on the first correction relative to `1 + ‖z‖∞`.
    pub max_first_step: Option<f64>,
}

#[derive(Clone, Debug)]
pub(crate) struct NewtonOutcome {
    pub z: Vec<Complex64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn linear_step(f: &[Complex64], j: &CMat) -> Option<Vec<Complex64>> {
    let rhs = CVec::from_iterator(f.len(), f.iter().map(|z| -z));
    if j.nrows() == j.ncols() {
        if let Some(x) = j.clone().lu().solve(&rhs) {
            if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
                return Some(x.iter().cloned().collect());
            }
        }
    }
    let svd = j.clone().svd(true, true);
    let x = svd.solve(&rhs, 1e-14).ok()?;
    Some(x.iter().cloned().collect())
}

/// Newton with step halving down to `2^-20`, accepting a step when the scaled
/// residual decreases. Non-square Jacobians give Gauss–Newton steps. An
/// iterate that stops improving counts as converged within `100·tol`.
pub(crate) fn newton<F>(f: F, z0: &[Complex64], opts: NewtonOpts) -> NewtonOutcome
where
    F: Fn(&[Complex64]) -> Eval,
{
    let mut z = z0.to_vec();
    let (mut fz, mut jz, scale0) = f(&z);
    let mut res = inf_norm(&fz) / scale0;
    let mut it = 0;
    let mut stalled = false;
    while it < opts.max_iter {
        if res <= opts.tol {
            break;
        }
        let Some(dz) = linear_step(&fz, &jz) else { break };
        let step = inf_norm(&dz);
        if it == 0 {
            if let Some(bound) = opts.max_first_step {
                if step > bound * (1.0 + inf_norm(&z)) {
                    break;
                }
            }
        }
        if step <= 1e-16 * (1.0 + inf_norm(&z)) {
            stalled = true;
            break;
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1.0 / 1_048_576.0 {
            let trial: Vec<Complex64> = z.iter().zip(&dz).map(|(a, d)| a + d * t).collect();
            let (ft, jt, st) = f(&trial);
            let rt = inf_norm(&ft) / st;
            if rt.is_finite() && rt < res {
                z = trial;
                fz = ft;
                jz = jt;
                res = rt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        it += 1;
        if !accepted {
            stalled = true;
            break;
        }
    }
    // no further progress: accept if within rounding of the tolerance
    NewtonOutcome {
        z,
        converged: res <= opts.tol || ((stalled || it == opts.max_iter) && res <= 100.0 * opts.tol),
        residual: res,
        iterations: it,
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct TrackOpts {
    pub h_init: f64,
    pub h_max: f64,
    pub max_depth: u32,
    pub newton_iters: usize,
    pub tol: f64,
    pub first_step_rel: f64,
}

impl Default for TrackOpts {
    fn default() -> Self {
        TrackOpts {
            h_init: 0.02,
            h_max: 0.05,
            max_depth: 40,
            newton_iters: 6,
            tol: 1e-12,
            first_step_rel: 0.05,
        }
    }
}

impl TrackOpts {
    pub fn finer(self, factor: f64) -> Self {
        TrackOpts {
            h_init: self.h_init / factor,
            h_max: self.h_max / factor,
            first_step_rel: self.first_step_rel / factor,
            ..self
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TrackStats {
    pub steps: usize,
    pub rejections: usize,
    pub min_step: f64,
}

impl TrackStats {
    pub fn merge(&mut self, other: TrackStats) {
        self.steps += other.steps;
        self.rejections += other.rejections;
        self.min_step = if self.min_step == 0.0 {
            other.min_step
        } else if other.min_step == 0.0 {
            self.min_step
        } else {
            self.min_step.min(other.min_step)
        };
    }
}

#[derive(Clone, Debug)]
pub(crate) struct TrackFailure {
    pub last_s: f64,
    pub reason: String,
}

/// Follows a solution of `F(s, z) = 0` from `s = 0` (where `z0` solves it)
/// to `s = 1` with a secant predictor and Newton corrector. Failed steps are
/// halved, at most `max_depth` times below `h_init`.
pub(crate) fn track<F>(z0: &[Complex64], f: F, opts: TrackOpts) -> Result<(Vec<Complex64>, TrackStats), TrackFailure>
where
    F: Fn(f64, &[Complex64]) -> Eval,
{
    let mut s = 0.0f64;
    let mut z = z0.to_vec();
    let mut prev: Option<(f64, Vec<Complex64>)> = None;
    let mut h = opts.h_init;
    let h_min = opts.h_init / 2f64.powi(opts.max_depth as i32);
    let mut stats = TrackStats {
        min_step: f64::INFINITY,
        ..Default::default()
    };
    let nopts = NewtonOpts {
        max_iter: opts.newton_iters,
        tol: opts.tol,
        max_first_step: Some(opts.first_step_rel),
    };
    while s < 1.0 {
        let mut h_eff = h.min(1.0 - s);
        if 1.0 - (s + h_eff) < 1e-3 * h_eff {
            h_eff = 1.0 - s;
        }
        let s_new = if h_eff == 1.0 - s { 1.0 } else { s + h_eff };
        let pred: Vec<Complex64> = match &prev {
            Some((sp, zp)) => {
                let r = (s_new - s) / (s - sp);
                z.iter().zip(zp).map(|(a, b)| a + (a - b) * r).collect()
            }
            None => z.clone(),
        };
        let out = newton(|w| f(s_new, w), &pred, nopts);
        if out.converged {
            prev = Some((s, std::mem::replace(&mut z, out.z)));
            s = s_new;
            stats.steps += 1;
            stats.min_step = stats.min_step.min(h_eff);
            if out.iterations <= 2 {
                h = (h * 1.6).min(opts.h_max);
            } else if out.iterations >= 5 {
                h *= 0.7;
            }
        } else {
            stats.rejections += 1;
            h = h_eff * 0.5;
            if h < h_min {
                return Err(TrackFailure {
                    last_s: s,
                    reason: format!("step underflow at s = {s:.6e}, residual {:.3e}", out.residual),
                });
            }
        }
    }
    if stats.min_step == f64::INFINITY {
        stats.min_step = 0.0;
    }
    Ok((z, stats))
}
