//! Residuals of the functional identities on random chains of every size up
//! to `--sites`. With `--perturb δ` every operator and polynomial entering a
//! check is disturbed by a relative `δ`, so the checks must fail.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wronskian_lab::fusion;
use wronskian_lab::lattice::{self, Convention};
use wronskian_lab::linalg::{self, CMat};
use wronskian_lab::verma;
use wronskian_lab::wronskian::{self, SolveOptions};
use wronskian_lab::{CPoly, ChainConfig, Complex64, SpinSector};

use crate::config::RunConfig;
use crate::envelope::{Envelope, Record, Status};

type Res<T> = wronskian_lab::Result<T>;

struct Checker {
    delta: f64,
    noise: ChaCha8Rng,
    tol: f64,
    sites: usize,
    results: Vec<(String, f64)>,
}

impl Checker {
    fn mat(&mut self, m: CMat) -> CMat {
        if self.delta == 0.0 {
            return m;
        }
        let s = self.delta * linalg::max_abs(&m);
        let (r, c) = m.shape();
        let noise = CMat::from_fn(r, c, |_, _| {
            Complex64::new(self.noise.random_range(-1.0..1.0), self.noise.random_range(-1.0..1.0)) * s
        });
        m + noise
    }

    fn poly(&mut self, p: &CPoly) -> CPoly {
        if self.delta == 0.0 {
            return p.clone();
        }
        let d = self.delta;
        let coeffs = p
            .coeffs()
            .iter()
            .map(|&c| c * (1.0 + d * self.noise.random_range(-1.0..1.0)))
            .collect();
        CPoly::from_coeffs_untrimmed(coeffs)
    }

    fn record(&mut self, name: &str, value: f64) {
        match self.results.iter_mut().find(|(n, _)| n == name) {
            Some(e) => e.1 = e.1.max(value),
            None => self.results.push((name.to_string(), value)),
        }
    }
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(f64::MIN_POSITIVE)
}

fn rnd(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    Complex64::new(rng.random_range(-r..r), rng.random_range(-r..r))
}

fn random_omega(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.7..1.4), rng.random_range(0.3..2.8))
}

fn twist(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> Complex64 {
    let w = cfg.omega();
    if (w - 1.0).norm() < 1e-6 || (w + 1.0).norm() < 1e-6 {
        random_omega(rng)
    } else {
        w
    }
}

fn q(ch: &mut Checker, cfg: &ChainConfig, l: Complex64, x: Complex64) -> Res<CMat> {
    Ok(ch.mat(verma::q_matrix(cfg, l, x)?))
}

fn t(ch: &mut Checker, cfg: &ChainConfig, l: Complex64) -> Res<CMat> {
    Ok(ch.mat(lattice::transfer_matrix(cfg, l)?))
}

fn abs_eval(p: &CPoly, z: Complex64) -> f64 {
    let r = z.norm();
    p.coeffs().iter().rev().fold(0.0, |acc, c| acc * r + c.norm())
}

fn three_term(lhs: &CMat, a: &CMat, b: &CMat) -> f64 {
    let f = linalg::frobenius;
    rel(f(&(lhs - a - b)), f(lhs).max(f(a)).max(f(b)))
}

fn operator_checks(ch: &mut Checker, cfg: &ChainConfig, rng: &mut ChaCha8Rng) -> Res<()> {
    let f = linalg::frobenius;
    let (l, mu, x, y) = (rnd(rng, 1.0), rnd(rng, 1.0), rnd(rng, 1.5), rnd(rng, 1.5));
    let ta = t(ch, cfg, l)?;
    let tb = t(ch, cfg, mu)?;
    let qa = q(ch, cfg, l, x)?;
    let qb = q(ch, cfg, mu, y)?;
    ch.record("commutator [t,t']", rel(f(&linalg::commutator(&ta, &tb)), f(&ta) * f(&tb)));
    ch.record("commutator [t,Q]", rel(f(&linalg::commutator(&ta, &qb)), f(&ta) * f(&qb)));
    ch.record("commutator [Q,Q']", rel(f(&linalg::commutator(&qa, &qb)), f(&qa) * f(&qb)));

    // t(λ)Q(λ;x) = Q(λ+1;x−1)Π(λ) + Q(λ−1;x+1)Π(λ+1)
    let pi0 = lattice::shifted_inhom_poly(cfg, 0.0).eval(l);
    let pi1 = lattice::shifted_inhom_poly(cfg, 1.0).eval(l);
    let lhs = &ta * &qa;
    let a = q(ch, cfg, l + 1.0, x - 1.0)? * pi0;
    let b = q(ch, cfg, l - 1.0, x + 1.0)? * pi1;
    ch.record("TQ with x-shift", three_term(&lhs, &a, &b));

    if cfg.sites <= 5 {
        for n in 1..=3usize {
            let nf = n as f64;
            let th = |ch: &mut Checker, k: usize, s: Complex64| -> Res<CMat> { Ok(ch.mat(fusion::higher_transfer(cfg, k + 1, s)?)) };
            let lhs = th(ch, n, l + (nf + 1.0) / 2.0)? * th(ch, 1, l)?;
            let a = th(ch, 0, l + 0.5)? * th(ch, n + 1, l + nf / 2.0)?;
            let b = th(ch, 0, l - 0.5)? * th(ch, n - 1, l + (nf + 2.0) / 2.0)?;
            ch.record("fusion", three_term(&lhs, &a, &b));
        }
    }
    for n in 1..=4usize {
        let nf = Complex64::new(n as f64, 0.0);
        let diff = q(ch, cfg, l - nf / 2.0, nf)? - q(ch, cfg, l + nf / 2.0, -nf)?;
        let th = ch.mat(fusion::higher_transfer(cfg, n, l)?);
        ch.record("higher transfer from Q", linalg::rel_diff(&diff, &th));
    }
    Ok(())
}

/// Wronskian, Baxter TQ and factorization on the solutions of every sector.
fn solution_checks(ch: &mut Checker, cfg: &ChainConfig, rng: &mut ChaCha8Rng) -> Res<()> {
    let x = rnd(rng, 1.5);
    let grid: Vec<Complex64> = (0..3).map(|_| rnd(rng, 1.5)).collect();
    let pi0 = lattice::shifted_inhom_poly(cfg, 0.0);
    let pi1 = lattice::shifted_inhom_poly(cfg, 1.0);
    let w = cfg.omega;
    let lead = verma::leading_factor(w, x);
    for sector in SpinSector::all(cfg.sites) {
        let pairs = wronskian::solve_sector(cfg, sector, &SolveOptions::default())?;
        let records = lattice::diagonalize_sector(cfg, sector)?;
        let basis = lattice::sector_basis(cfg.sites, sector)?;
        for rec in &records {
            let tl = ch.poly(&rec.t_poly_lambda(cfg));
            let (idx, _) = wronskian::match_eigenvalue(cfg, &tl, &pairs).expect("non-empty sector");
            let p = &pairs[idx];
            let qp = ch.poly(&p.qp);
            let qm = ch.poly(&p.qm);
            let res = wronskian::wronskian_residual(&qp, &qm, cfg);
            let scale = 1f64.max(qp.max_abs_coeff() * qm.max_abs_coeff());
            ch.record("quantum Wronskian", res.max_abs_coeff() / scale);
            let v = linalg::CVec::from_iterator(basis.len(), basis.iter().map(|&b| rec.eigvec[b]));
            for &l in &grid {
                let tb = ch.mat(lattice::transfer_block(cfg, l, &basis)?);
                let tv = linalg::rayleigh(&tb, &v);
                for (qq, a, b) in [(&qp, w.inv(), w), (&qm, w, w.inv())] {
                    let lhs = tv * qq.eval(l);
                    let r1 = a * qq.eval(l + 1.0) * pi0.eval(l);
                    let r2 = b * qq.eval(l - 1.0) * pi1.eval(l);
                    // componentwise size of each term
                    let s = (tv.norm() * abs_eval(qq, l))
                        .max(a.norm() * abs_eval(qq, l + 1.0) * pi0.eval(l).norm())
                        .max(b.norm() * abs_eval(qq, l - 1.0) * pi1.eval(l).norm());
                    ch.record("Baxter TQ", rel((lhs - r1 - r2).norm(), s));
                }
            }
            if cfg.sites <= 4 {
                for &l in &grid {
                    let qb = ch.mat(verma::q_block(cfg, l, x, &basis)?);
                    let got = linalg::rayleigh(&qb, &v);
                    let want = lead * qp.eval(l) * qm.eval(l + x);
                    ch.record("factorization", rel((got - want).norm(), got.norm().max(want.norm())));
                }
            }
        }
    }
    Ok(())
}

fn spin_reversal_checks(ch: &mut Checker, sites: usize, rng: &mut ChaCha8Rng, omega: Complex64) -> Res<()> {
    let cfg = ChainConfig::homogeneous(sites, omega)?;
    let (l, x) = (rnd(rng, 1.0), rnd(rng, 1.5));
    let r = lattice::spin_reversal(sites);
    let rqr = &r * q(ch, &cfg, l, x)? * &r;
    let sign = if sites % 2 == 0 { 1.0 } else { -1.0 };
    let mirrored = q(ch, &cfg, -l - 1.0 - x, x)?.transpose() * Complex64::new(sign, 0.0);
    ch.record("spin reversal transpose", linalg::rel_diff(&rqr, &mirrored));
    let inv = cfg.with_omega(omega.inv());
    let other = q(ch, &inv, l + x, -x)? * Complex64::new(-1.0, 0.0);
    ch.record("spin reversal inverse twist", linalg::rel_diff(&rqr, &other));
    Ok(())
}

pub fn verify(cfg: &RunConfig, env: &mut Envelope) -> wronskian_lab::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut all = Vec::new();
    for sites in 1..=cfg.sites {
        let mut ch = Checker {
            delta: cfg.perturb.unwrap_or(0.0),
            noise: ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed),
            tol: cfg.tolerances.identity,
            sites,
            results: Vec::new(),
        };
        let inhom = (0..sites).map(|_| rnd(&mut rng, 0.6)).collect();
        let omega = twist(cfg, &mut rng);
        let chain = ChainConfig::new(sites, inhom, omega, Convention::Lambda)?;
        operator_checks(&mut ch, &chain, &mut rng)?;
        solution_checks(&mut ch, &chain, &mut rng)?;
        spin_reversal_checks(&mut ch, sites, &mut rng, omega)?;
        all.push(ch);
    }
    for ch in all {
        for (name, value) in ch.results {
            let pass = value <= ch.tol;
            if !pass {
                env.set_status(Status::Mismatch);
                env.messages.push(format!("M={}: {name} residual {value:.3e} above {:.0e}", ch.sites, ch.tol));
            }
            env.residual(&name, value);
            env.records.push(Record::Check {
                name,
                sites: ch.sites,
                residual: value,
                tolerance: ch.tol,
                pass,
            });
        }
    }
    Ok(())
}
