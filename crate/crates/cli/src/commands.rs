use wronskian_lab::lattice::{self, Convention};
use wronskian_lab::tables::{self, Table2Options};
use wronskian_lab::wronskian::{self, PSOptions, QPair, SolveOptions};
use wronskian_lab::{CPoly, ChainConfig, Complex64, Error, SpinSector};

use crate::config::{ConfigError, RunConfig};
use crate::envelope::{c, cs, poly, Envelope, Record, Status};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Exit status for a library error.
pub fn status_of(e: &Error) -> Status {
    match e {
        Error::InvalidConfig(_) | Error::Capacity { .. } | Error::Precondition(_) | Error::Pole { .. } => Status::Usage,
        Error::IncompleteSet { .. } => Status::Incomplete,
        Error::UnmatchedEigenvector { .. } => Status::Mismatch,
        _ => Status::Failed,
    }
}

pub enum Failure {
    Config(ConfigError),
    Lib(Error),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

pub fn spectrum(cfg: &RunConfig, env: &mut Envelope) -> Outcome {
    let chain = cfg.chain()?;
    for sector in cfg.sectors()? {
        for rec in lattice::diagonalize_sector(&chain, sector)? {
            env.records.push(Record::Spectrum {
                sz: sector.sz(),
                index: rec.index,
                t: poly(&rec.t_poly),
                energy: rec.energy.map(c),
            });
        }
    }
    Ok(())
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.tolerances.wronskian,
        ..SolveOptions::default()
    }
}

/// λ-convention polynomial of degree `k` in the configured convention.
fn out_poly(chain: &ChainConfig, p: &CPoly, k: usize) -> CPoly {
    match chain.convention {
        Convention::Lambda => p.clone(),
        Convention::U => lattice::to_u_poly(p, k as i64),
    }
}

fn out_roots(chain: &ChainConfig, r: &[Complex64]) -> Vec<Complex64> {
    match chain.convention {
        Convention::Lambda => r.to_vec(),
        Convention::U => r.iter().map(|&l| I * (l + 0.5)).collect(),
    }
}

/// Matches every oracle eigenvector to a distinct pair; returns the number
/// of unmatched eigenvectors.
fn cross_match(chain: &ChainConfig, sector: SpinSector, pairs: &mut [QPair], tol: f64) -> wronskian_lab::Result<usize> {
    let lam = chain.in_convention(Convention::Lambda);
    let mut used = vec![false; pairs.len()];
    let mut unmatched = 0;
    for rec in lattice::diagonalize_sector(chain, sector)? {
        let t = rec.t_poly_lambda(chain);
        match wronskian::match_eigenvalue(&lam, &t, pairs) {
            Some((i, dev)) if dev <= tol && !used[i] => {
                used[i] = true;
                pairs[i].oracle_index = Some(rec.index);
                pairs[i].oracle_deviation = Some(dev);
            }
            _ => unmatched += 1,
        }
    }
    Ok(unmatched)
}

pub fn wronskian(cfg: &RunConfig, env: &mut Envelope) -> Outcome {
    if cfg.ps {
        return ps(cfg, env);
    }
    if cfg.special {
        return special(cfg, env);
    }
    let chain = cfg.chain()?;
    let opts = solve_options(cfg);
    for sector in cfg.sectors()? {
        let rep = wronskian::solve_sector_report(&chain, sector, &opts)?;
        let mut pairs = rep.pairs;
        if !rep.lost.is_empty() {
            env.set_status(Status::Incomplete);
            env.messages.push(format!(
                "S^z = {}: {} of {} solutions; lost branches: {}",
                sector.sz(),
                pairs.len(),
                rep.expected,
                rep.lost
                    .iter()
                    .map(|(b, why)| format!("{b:?} ({why})"))
                    .collect::<Vec<_>>()
                    .join(", ")
            ));
        } else {
            let unmatched = cross_match(&chain, sector, &mut pairs, cfg.tolerances.oracle_match)?;
            if unmatched > 0 {
                env.set_status(Status::Mismatch);
                env.messages.push(format!("S^z = {}: {unmatched} eigenvectors without a solution", sector.sz()));
            }
        }
        for p in &pairs {
            env.residual("wronskian", p.wronskian_residual);
            if let Some(d) = p.oracle_deviation {
                env.residual("oracle_deviation", d);
            }
            env.records.push(Record::QPair {
                sz: sector.sz(),
                n: p.n,
                branch: p.branch.clone(),
                qp: poly(&out_poly(&chain, &p.qp, p.n)),
                qm: poly(&out_poly(&chain, &p.qm, cfg.sites - p.n)),
                roots_p: cs(&out_roots(&chain, &p.roots_p)),
                roots_m: cs(&out_roots(&chain, &p.roots_m)),
                t: poly(&out_poly(&chain, &p.t_poly, cfg.sites)),
                wronskian_residual: p.wronskian_residual,
                bae_residual: p.bae_residual,
                oracle_index: p.oracle_index,
                oracle_deviation: p.oracle_deviation,
            });
        }
    }
    Ok(())
}

fn ps(cfg: &RunConfig, env: &mut Envelope) -> Outcome {
    let opts = PSOptions {
        seed: cfg.seed,
        ..PSOptions::default()
    };
    let sectors: Vec<SpinSector> = match cfg.sector()? {
        Some(s) => vec![s],
        None => SpinSector::all(cfg.sites).into_iter().filter(|s| s.twice_sz >= 0).collect(),
    };
    for sector in sectors {
        let rep = wronskian::ps_solve(cfg.sites, sector, &opts)?;
        if !rep.complete() {
            env.set_status(Status::Incomplete);
            env.messages.push(format!(
                "S^z = {}: {} of {} periodic solutions",
                sector.sz(),
                rep.solutions.len(),
                rep.expected
            ));
        }
        if let Some(u) = rep.unmatched.filter(|&u| u > 0) {
            env.set_status(Status::Mismatch);
            env.messages.push(format!("S^z = {}: {u} solutions without an eigenvalue", sector.sz()));
        }
        for s in &rep.solutions {
            env.residual("wronskian", s.residual);
            env.records.push(Record::PsPair {
                sz: sector.sz(),
                n: s.n,
                qp: poly(&s.qp),
                qm: poly(&s.qm),
                roots_p: cs(&s.roots_p),
                t: poly(&s.t_poly),
                residual: s.residual,
                oracle_index: s.oracle_index,
            });
        }
    }
    Ok(())
}

fn special(cfg: &RunConfig, env: &mut Envelope) -> Outcome {
    if cfg.sector().ok().flatten().is_some_and(|s| s.twice_sz != 0) {
        return Err(ConfigError("--special needs S^z = 0".into()).into());
    }
    let chain = cfg.chain()?;
    let rep = wronskian::special_branch_solve(&chain, &solve_options(cfg))?;
    if !rep.complete() {
        env.set_status(Status::Incomplete);
        env.messages.push(format!("{} of {} special solutions", rep.solutions.len(), rep.expected));
    }
    for s in &rep.solutions {
        env.residual("reduced", s.reduced_residual);
        env.residual("special_roots", s.special1_residual.max(s.special2_residual));
        env.records.push(Record::Special {
            qp: poly(&s.qp_u),
            t: poly(&s.t_u),
            roots: cs(&s.roots_u),
            reduced_residual: s.reduced_residual,
            constraint_defect: s.constraint_defect,
            special1_residual: s.special1_residual,
            special2_residual: s.special2_residual,
            conjugate_defect: s.conjugate_defect,
            groundstate_pattern: s.groundstate_pattern,
        });
    }
    Ok(())
}

/// Regenerates one table; the human-readable diff goes to stderr.
pub fn tables(cfg: &RunConfig, env: &mut Envelope) -> Outcome {
    let id = cfg.table.ok_or_else(|| ConfigError("tables needs a table id".into()))?;
    let report = if id == 2 {
        let res = tables::table2(&Table2Options::default())?;
        for p in &res.printed {
            if p.agrees() == p.misprint {
                env.set_status(Status::Mismatch);
                env.messages.push(format!("{}: printed {} computed {}", p.label, p.printed, p.computed));
            }
            env.records.push(Record::PrintedEntry {
                label: p.label.clone(),
                printed: p.printed,
                decimals: p.decimals,
                computed: p.computed,
                misprint: p.misprint,
                agrees: p.agrees(),
            });
        }
        res.report
    } else {
        let opts = PSOptions {
            seed: cfg.seed,
            ..PSOptions::default()
        };
        match id {
            3 => tables::table3(&opts, 10)?,
            4 => tables::table4(&opts)?,
            _ => tables::reproduce(id)?,
        }
    };
    eprintln!("{report}");
    for e in &report.entries {
        env.residual("table_diff", e.diff());
        env.records.push(Record::TableEntry {
            table: id,
            label: e.label.clone(),
            computed: c(e.computed),
            expected: c(e.expected),
            diff: e.diff(),
            tolerance: e.tolerance,
            pass: e.pass(),
        });
    }
    env.messages.extend(report.notes.iter().cloned());
    if !report.pass() {
        env.set_status(Status::Mismatch);
        for e in report.failures() {
            env.messages.push(format!("{}: |diff| {:.3e} > {:.0e}", e.label, e.diff(), e.tolerance));
        }
    }
    Ok(())
}
