//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so that every line is printed; exits non-zero on any failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wronskian_lab::fusion::{self, LimitMethod};
use wronskian_lab::lattice::{self, binomial, Convention};
use wronskian_lab::linalg;
use wronskian_lab::tables::{self, Table2Options};
use wronskian_lab::verma;
use wronskian_lab::wronskian::{self, PSOptions, PeriodicOptions, SolveOptions};
use wronskian_lab::{c64, ChainConfig, Complex64, SpinSector};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

type Criterion = fn() -> Result<Outcome, String>;

fn main() -> ExitCode {
    let list: [(u8, &str, Criterion); 9] = [
        (1, "Table 3 solution counts", table3_counts),
        (2, "Table 4 closed forms", table4_rows),
        (3, "Table 2 special groundstate", table2_rows),
        (4, "Table 1 complex dimension", table1_rows),
        (5, "M=4 diagonal element via trace functional", worked_example),
        (6, "completeness at ω = e^{0.7i}", completeness),
        (7, "functional identities", identities),
        (8, "special-branch count", special_count),
        (9, "ω→1 classification", periodic_classification),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, run) in list {
        let tag = format!("criterion {id}");
        if !filter.is_empty() && !filter.iter().any(|f| tag.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let res = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        let (pass, detail) = match res {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!(
            "{} {tag}: {name} [{secs:.1}s] {detail}",
            if pass { "PASS" } else { "FAIL" }
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn table3_counts() -> Result<Outcome, String> {
    let rep = tables::table3(&PSOptions::default(), 10).map_err(|e| e.to_string())?;
    let counts: Vec<String> = rep
        .entries
        .iter()
        .filter(|e| e.label.ends_with("solutions"))
        .map(|e| format!("{}", e.computed.re))
        .collect();
    Ok(outcome(rep.pass(), format!("counts M=3..10: {}", counts.join(","))))
}

fn table4_rows() -> Result<Outcome, String> {
    let rep = tables::table4(&PSOptions::default()).map_err(|e| e.to_string())?;
    Ok(outcome(
        rep.pass(),
        format!("{} coefficients, worst |diff| {:.1e} (tol 1e-9)", rep.entries.len(), rep.worst()),
    ))
}

fn table2_rows() -> Result<Outcome, String> {
    let res = tables::table2(&Table2Options::default()).map_err(|e| e.to_string())?;
    let printed_ok = res.printed.iter().filter(|p| !p.misprint).all(|p| p.agrees());
    let misprints = res.printed.iter().filter(|p| p.misprint).count();
    let worst_twist = res
        .report
        .entries
        .iter()
        .filter(|e| e.tolerance == tables::TABLE2_TOL)
        .map(|e| e.diff())
        .fold(0.0, f64::max);
    let worst_limit = res
        .report
        .entries
        .iter()
        .filter(|e| e.tolerance == tables::TABLE2_LIMIT_TOL)
        .map(|e| e.diff())
        .fold(0.0, f64::max);
    Ok(outcome(
        res.report.pass() && printed_ok,
        format!(
            "twists worst {worst_twist:.1e} (tol 1e-5), φ→0 worst {worst_limit:.1e} (tol 1e-4), printed digits {} ({misprints} known misprints)",
            if printed_ok { "agree" } else { "DISAGREE" }
        ),
    ))
}

fn table1_rows() -> Result<Outcome, String> {
    let rep = tables::table1(LimitMethod::default()).map_err(|e| e.to_string())?;
    Ok(outcome(
        rep.pass(),
        format!("6 rows, worst |diff| {:.1e} (tol 1e-6)", rep.worst()),
    ))
}

fn worked_example() -> Result<Outcome, String> {
    let cfg = ChainConfig::homogeneous(4, c64(1.0, 0.0)).map_err(|e| e.to_string())?;
    let xs = [c64(0.3, 0.2), c64(-1.1, 0.5), c64(2.4, -0.7), c64(0.05, 1.3), c64(3.2, 0.9)];
    let limit_vs_functional = fusion::trace_functional_check(&cfg, &xs, LimitMethod::default()).map_err(|e| e.to_string())?;
    let mut closed: f64 = 0.0;
    for &x in &xs {
        let f = fusion::trace_functional_diagonal(4, 0b0011, x).map_err(|e| e.to_string())?;
        let c = fusion::m4_diagonal_closed_form(x);
        closed = closed.max(f.max_abs_diff(&c) / c.max_abs_coeff().max(1.0));
    }
    Ok(outcome(
        limit_vs_functional < 1e-7 && closed < 1e-7,
        format!("limit vs functional {limit_vs_functional:.1e}, functional vs closed form {closed:.1e} (tol 1e-7)"),
    ))
}

fn completeness() -> Result<Outcome, String> {
    let opts = SolveOptions {
        cross_match: true,
        ..SolveOptions::default()
    };
    let mut worst: f64 = 0.0;
    let mut bad = Vec::new();
    let mut total = 0;
    for sites in [2usize, 4, 6, 8] {
        let cfg = ChainConfig::with_phi(sites, 0.7).map_err(|e| e.to_string())?;
        for sector in SpinSector::all(sites) {
            let n = sector.n_down(sites).map_err(|e| e.to_string())?;
            match wronskian::solve_sector_report(&cfg, sector, &opts) {
                Ok(rep) => {
                    let mut idx: Vec<usize> = rep.pairs.iter().filter_map(|p| p.oracle_index).collect();
                    idx.sort_unstable();
                    idx.dedup();
                    let ok = rep.lost.is_empty() && rep.pairs.len() == binomial(sites, n) && idx.len() == rep.pairs.len();
                    for p in &rep.pairs {
                        worst = worst.max(p.oracle_deviation.unwrap_or(f64::INFINITY));
                    }
                    total += rep.pairs.len();
                    if !ok {
                        bad.push(format!("M={sites} 2Sz={}", sector.twice_sz));
                    }
                }
                Err(e) => bad.push(format!("M={sites} 2Sz={}: {e}", sector.twice_sz)),
            }
        }
    }
    Ok(outcome(
        bad.is_empty() && worst < 1e-8,
        format!("{total} pairs matched one-to-one, worst eigenvalue deviation {worst:.1e} (tol 1e-8){}", if bad.is_empty() { String::new() } else { format!("; incomplete: {}", bad.join(", ")) }),
    ))
}

fn rnd(rng: &mut ChaCha8Rng, r: f64) -> Complex64 {
    c64(rng.random_range(-r..r), rng.random_range(-r..r))
}

fn rnd_omega(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::from_polar(rng.random_range(0.7..1.4), rng.random_range(0.3..2.8))
}

fn rnd_chain(rng: &mut ChaCha8Rng, sites: usize) -> ChainConfig {
    let inhom = (0..sites).map(|_| rnd(rng, 0.6)).collect();
    ChainConfig::new(sites, inhom, rnd_omega(rng), Convention::Lambda).unwrap()
}

fn rel(diff: f64, scale: f64) -> f64 {
    diff / scale.max(f64::MIN_POSITIVE)
}

/// Worst residual of Baxter's TQ equation for both `Q^±` of every matched
/// pair of a chain.
fn baxter_tq(cfg: &ChainConfig, lambdas: &[Complex64]) -> wronskian_lab::Result<f64> {
    let opts = SolveOptions {
        cross_match: true,
        ..SolveOptions::default()
    };
    let pi0 = lattice::shifted_inhom_poly(cfg, 0.0);
    let pi1 = lattice::shifted_inhom_poly(cfg, 1.0);
    let w = cfg.omega;
    let mut worst: f64 = 0.0;
    for sector in SpinSector::all(cfg.sites) {
        let records = lattice::diagonalize_sector(cfg, sector)?;
        let pairs = wronskian::solve_sector(cfg, sector, &opts)?;
        for p in &pairs {
            let rec = records
                .iter()
                .find(|r| Some(r.index) == p.oracle_index)
                .expect("cross-matched pair");
            let t = rec.t_poly_lambda(cfg);
            for &l in lambdas {
                for (q, a, b) in [(&p.qp, w.inv(), w), (&p.qm, w, w.inv())] {
                    let lhs = t.eval(l) * q.eval(l);
                    let r1 = a * q.eval(l + 1.0) * pi0.eval(l);
                    let r2 = b * q.eval(l - 1.0) * pi1.eval(l);
                    let s = lhs.norm().max(r1.norm()).max(r2.norm());
                    worst = worst.max(rel((lhs - r1 - r2).norm(), s));
                }
            }
        }
    }
    Ok(worst)
}

fn identities() -> Result<Outcome, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let mut worst: Vec<(&str, f64)> = Vec::new();
    let mut push = |name: &'static str, v: f64| match worst.iter_mut().find(|(n, _)| *n == name) {
        Some(e) => e.1 = e.1.max(v),
        None => worst.push((name, v)),
    };
    let err = |e: wronskian_lab::Error| e.to_string();
    for sites in 1..=6usize {
        for _ in 0..3 {
            let cfg = rnd_chain(&mut rng, sites);
            let (l, mu, x, y) = (rnd(&mut rng, 1.0), rnd(&mut rng, 1.0), rnd(&mut rng, 1.5), rnd(&mut rng, 1.5));
            push("TQ with x-shift", verma::tq_shifted_residual(&cfg, l, x).map_err(err)?);
            let ta = lattice::transfer_matrix(&cfg, l).map_err(err)?;
            let tb = lattice::transfer_matrix(&cfg, mu).map_err(err)?;
            let qa = verma::q_matrix(&cfg, l, x).map_err(err)?;
            let qb = verma::q_matrix(&cfg, mu, y).map_err(err)?;
            let f = linalg::frobenius;
            push("[t,t']", rel(f(&linalg::commutator(&ta, &tb)), f(&ta) * f(&tb)));
            push("[t,Q]", rel(f(&linalg::commutator(&ta, &qb)), f(&ta) * f(&qb)));
            push("[Q,Q']", rel(f(&linalg::commutator(&qa, &qb)), f(&qa) * f(&qb)));
            if sites <= 5 {
                for n in 1..=3 {
                    push("fusion n≤3", fusion::fusion_residual(&cfg, n, l).map_err(err)?);
                }
                for n in 1..=4 {
                    let a = fusion::q_difference_transfer(&cfg, n, l).map_err(err)?;
                    let b = fusion::higher_transfer(&cfg, n, l).map_err(err)?;
                    push("t^(n-1) from Q, n≤4", linalg::rel_diff(&a, &b));
                }
            }
        }
    }
    for sites in [4usize, 6] {
        let cfg = rnd_chain(&mut rng, sites);
        let lams: Vec<Complex64> = (0..4).map(|_| rnd(&mut rng, 1.5)).collect();
        push("Baxter TQ per matched pair", baxter_tq(&cfg, &lams).map_err(err)?);
    }
    for sites in [2usize, 4] {
        let cfg = rnd_chain(&mut rng, sites);
        let opts = SolveOptions::default();
        let x = rnd(&mut rng, 1.5);
        let grid: Vec<Complex64> = (0..4).map(|_| rnd(&mut rng, 1.5)).collect();
        for sector in SpinSector::all(sites) {
            let pairs = wronskian::solve_sector(&cfg, sector, &opts).map_err(err)?;
            for rec in lattice::diagonalize_sector(&cfg, sector).map_err(err)? {
                let r = verma::factorization_check(&cfg, &rec, &pairs, x, &grid).map_err(err)?;
                push("factorization", r.max_deviation);
            }
        }
    }
    for sites in [2usize, 3, 4] {
        let cfg = ChainConfig::homogeneous(sites, rnd_omega(&mut rng)).map_err(err)?;
        let r = verma::spin_reversal_q_check(&cfg, rnd(&mut rng, 1.0), rnd(&mut rng, 1.5), sites % 2 == 0).map_err(err)?;
        push("spin reversal (transpose)", r.transpose_relation);
        push("spin reversal (inverse twist)", r.inverse_twist_relation);
        if let Some(v) = r.eigenvalue_relation {
            push("spin reversal (eigenvalues)", v);
        }
    }
    let pass = worst.iter().all(|(_, v)| *v < 1e-9);
    let detail = worst
        .iter()
        .map(|(n, v)| format!("{n} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(outcome(pass, format!("{detail} (tol 1e-9)")))
}

fn special_count() -> Result<Outcome, String> {
    let phi = std::f64::consts::PI / 20.0;
    let mut parts = Vec::new();
    let mut pass = true;
    let (mut res, mut conj) = (0.0f64, 0.0f64);
    for sites in [2usize, 4, 6, 8, 10] {
        let cfg = ChainConfig::with_phi(sites, phi).map_err(|e| e.to_string())?;
        let rep = wronskian::special_branch_solve(&cfg, &SolveOptions::default()).map_err(|e| e.to_string())?;
        let expected = 1usize << (sites / 2);
        pass &= rep.solutions.len() == expected;
        for s in &rep.solutions {
            res = res.max(s.special1_residual).max(s.special2_residual);
            conj = conj.max(s.conjugate_defect);
            pass &= s.reduced_residual < 1e-8;
        }
        parts.push(format!("M={sites}: {}/{expected}", rep.solutions.len()));
    }
    pass &= res < 1e-8 && conj < 1e-6;
    Ok(outcome(
        pass,
        format!("{}; root residual {res:.1e} (tol 1e-8), conjugate-pair defect {conj:.1e}", parts.join(", ")),
    ))
}

fn periodic_classification() -> Result<Outcome, String> {
    let mut parts = Vec::new();
    let mut pass = true;
    for sites in [4usize, 6] {
        let rep = wronskian::periodic_limit_study(sites, SpinSector::new(0), &PeriodicOptions::default())
            .map_err(|e| e.to_string())?;
        let amb = rep.ambiguous().len();
        let worst = rep.worst_finite_match();
        pass &= amb == 0 && rep.finite_count() > 0 && worst < 1e-4;
        parts.push(format!(
            "M={sites}: {} finite, {} divergent, {amb} ambiguous, worst match {worst:.1e}",
            rep.finite_count(),
            rep.branches.len() - rep.finite_count() - amb
        ));
    }
    Ok(outcome(pass, format!("{} (tol 1e-4)", parts.join("; "))))
}
