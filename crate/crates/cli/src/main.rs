//! `wronskian-lab`: spectra, Wronskian solutions, table regeneration and
//! identity checks for the twisted XXX chain.
//!
//! Exit codes: 0 ok, 1 usage, 2 incomplete set or mismatch, 3 numerical
//! failure.

mod commands;
mod config;
mod envelope;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Failure;
use config::{Command, ConventionKind, Inhomogeneity, RunConfig, Tolerances, Twist};
use envelope::{Envelope, Status};

#[derive(Parser, Debug)]
#[command(name = "wronskian-lab", version, about = "Twisted XXX spin chain: transfer matrices, Q-operator, quantum Wronskian")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Transfer-matrix spectrum per spin sector.
    Spectrum(Common),
    /// Complete solution sets of the quantum Wronskian.
    Wronskian {
        #[command(flatten)]
        common: Common,
        /// Periodic chain (ω = 1) in the reduced form.
        #[arg(long, conflicts_with = "special")]
        ps: bool,
        /// Solutions with Q⁻(λ) = ±Q⁺(−λ−1), S^z = 0, |ω| = 1.
        #[arg(long)]
        special: bool,
    },
    /// Regenerate a reference table and list per-entry differences.
    Tables {
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        id: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Residuals of the functional identities for every chain length up to --sites.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Disturb every operator by this relative amount (checks must fail).
        #[arg(long)]
        perturb: Option<f64>,
    },
    /// Run a configuration file.
    Run {
        config: PathBuf,
        /// Write results here instead of the path in the file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Chain length M.
    #[arg(long)]
    sites: Option<usize>,
    /// Twist angle, ω = e^{iφ}.
    #[arg(long, allow_hyphen_values = true, group = "twist")]
    phi: Option<f64>,
    /// Complex twist as `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, group = "twist")]
    omega: Option<[f64; 2]>,
    /// Spin sector S^z (e.g. 0, 1/2, -1).
    #[arg(long, value_parser = parse_sz, allow_hyphen_values = true)]
    sector: Option<f64>,
    /// Inhomogeneity of one site as `re,im`; repeat once per site.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true, conflicts_with = "regularize")]
    inhom: Vec<[f64; 2]>,
    /// Inhomogeneities ε·m for site m, ε as `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    regularize: Option<[f64; 2]>,
    #[arg(long, value_enum, default_value_t = Conv::Lambda)]
    convention: Conv,
    #[arg(long)]
    tol_wronskian: Option<f64>,
    #[arg(long)]
    tol_match: Option<f64>,
    #[arg(long)]
    tol_identity: Option<f64>,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long)]
    dump_config: bool,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum Conv {
    Lambda,
    U,
}

fn parse_complex(s: &str) -> Result<[f64; 2], String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected re,im, got {s:?}"))?;
    let re: f64 = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let im: f64 = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok([re, im])
}

fn parse_sz(s: &str) -> Result<f64, String> {
    match s.split_once('/') {
        Some((n, d)) => {
            let n: i32 = n.trim().parse().map_err(|e| format!("{s:?}: {e}"))?;
            if d.trim() != "2" {
                return Err(format!("{s:?}: S^z is an integer or half-integer"));
            }
            Ok(n as f64 / 2.0)
        }
        None => s.trim().parse().map_err(|e| format!("{s:?}: {e}")),
    }
}

impl Common {
    fn into_config(self, command: Command, default_sites: usize) -> (RunConfig, bool) {
        let mut cfg = RunConfig::new(command, self.sites.unwrap_or(default_sites));
        cfg.sector = self.sector;
        cfg.twist = match (self.phi, self.omega) {
            (Some(p), _) => Some(Twist::Phi(p)),
            (_, Some(w)) => Some(Twist::Omega(w)),
            _ => None,
        };
        cfg.inhomogeneity = match (self.inhom.is_empty(), self.regularize) {
            (false, _) => Inhomogeneity::Explicit { values: self.inhom },
            (true, Some(e)) => Inhomogeneity::Regularized { epsilon: e },
            (true, None) => Inhomogeneity::Homogeneous,
        };
        cfg.convention = match self.convention {
            Conv::Lambda => ConventionKind::Lambda,
            Conv::U => ConventionKind::U,
        };
        let d = Tolerances::default();
        cfg.tolerances = Tolerances {
            wronskian: self.tol_wronskian.unwrap_or(d.wronskian),
            oracle_match: self.tol_match.unwrap_or(d.oracle_match),
            identity: self.tol_identity.unwrap_or(d.identity),
        };
        cfg.out = self.out;
        cfg.seed = self.seed;
        (cfg, self.dump_config)
    }
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(Status::Usage.exit_code())
}

fn init_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("WRONSKIAN_LAB_THREADS") else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("WRONSKIAN_LAB_THREADS must be a positive integer, got {v:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn run(cfg: RunConfig) -> ExitCode {
    if let Err(e) = cfg.validate() {
        return usage(&e.0);
    }
    let mut env = Envelope::new(cfg.clone());
    let res = match cfg.command {
        Command::Spectrum => commands::spectrum(&cfg, &mut env),
        Command::Wronskian => commands::wronskian(&cfg, &mut env),
        Command::Tables => commands::tables(&cfg, &mut env),
        Command::Verify => verify::verify(&cfg, &mut env).map_err(Failure::Lib),
    };
    match res {
        Ok(()) => {}
        Err(Failure::Config(e)) => return usage(&e.0),
        Err(Failure::Lib(e)) => {
            let status = commands::status_of(&e);
            if status == Status::Usage {
                return usage(&e.to_string());
            }
            eprintln!("error: {e}");
            env.set_status(status);
            env.messages.push(e.to_string());
        }
    }
    let json = env.to_json();
    match &cfg.out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, json) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return ExitCode::from(Status::Failed.exit_code());
            }
        }
        None => print!("{json}"),
    }
    for m in &env.messages {
        eprintln!("{m}");
    }
    ExitCode::from(env.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { Status::Usage.exit_code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = init_threads() {
        return usage(&e);
    }
    let (cfg, dump) = match cli.command {
        Cmd::Spectrum(common) => common.into_config(Command::Spectrum, 4),
        Cmd::Wronskian { common, ps, special } => {
            let (mut cfg, dump) = common.into_config(Command::Wronskian, 4);
            cfg.ps = ps;
            cfg.special = special;
            (cfg, dump)
        }
        Cmd::Tables { id, common } => {
            let (mut cfg, dump) = common.into_config(Command::Tables, 4);
            cfg.table = Some(id);
            (cfg, dump)
        }
        Cmd::Verify { common, perturb } => {
            let (mut cfg, dump) = common.into_config(Command::Verify, 6);
            cfg.perturb = perturb;
            (cfg, dump)
        }
        Cmd::Run { config, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return usage(&format!("cannot read {}: {e}", config.display())),
            };
            let mut cfg = match RunConfig::from_toml(&text) {
                Ok(c) => c,
                Err(e) => return usage(&e.0),
            };
            if out.is_some() {
                cfg.out = out;
            }
            (cfg, false)
        }
    };
    if dump {
        if let Err(e) = cfg.validate() {
            return usage(&e.0);
        }
        print!("{}", cfg.to_toml());
        return ExitCode::SUCCESS;
    }
    run(cfg)
}
