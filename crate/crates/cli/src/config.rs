//! Run configuration: one struct shared by the command line and TOML files.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use wronskian_lab::{ChainConfig, Complex64, Convention, SpinSector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Spectrum,
    Wronskian,
    Tables,
    Verify,
}

/// `ω = e^{iφ}` or an explicit complex twist.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Twist {
    Phi(f64),
    Omega([f64; 2]),
}

impl Twist {
    pub fn omega(&self) -> Complex64 {
        match *self {
            Twist::Phi(phi) => Complex64::from_polar(1.0, phi),
            Twist::Omega([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Inhomogeneity {
    #[default]
    Homogeneous,
    /// One value per site, in the configured convention.
    Explicit { values: Vec<[f64; 2]> },
    /// `ε·m` on site `m`.
    Regularized { epsilon: [f64; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ConventionKind {
    #[default]
    Lambda,
    U,
}

impl From<ConventionKind> for Convention {
    fn from(c: ConventionKind) -> Self {
        match c {
            ConventionKind::Lambda => Convention::Lambda,
            ConventionKind::U => Convention::U,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Accepted Wronskian residual of a solution.
    pub wronskian: f64,
    /// Eigenvalue agreement for the oracle cross-match.
    pub oracle_match: f64,
    /// Relative residual of the functional identities in `verify`.
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            wronskian: 1e-10,
            oracle_match: 1e-8,
            identity: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub sites: usize,
    /// `S^z`; all sectors when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sector: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub twist: Option<Twist>,
    #[serde(default)]
    pub inhomogeneity: Inhomogeneity,
    #[serde(default)]
    pub convention: ConventionKind,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// `wronskian`: periodic solver.
    #[serde(default)]
    pub ps: bool,
    /// `wronskian`: special branch of the twisted solver.
    #[serde(default)]
    pub special: bool,
    /// `tables`: table id.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<u8>,
    /// `verify`: relative size of the injected perturbation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturb: Option<f64>,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

fn bad<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl RunConfig {
    pub fn new(command: Command, sites: usize) -> Self {
        RunConfig {
            command,
            sites,
            sector: None,
            twist: None,
            inhomogeneity: Inhomogeneity::Homogeneous,
            convention: ConventionKind::Lambda,
            tolerances: Tolerances::default(),
            out: None,
            seed: 0,
            ps: false,
            special: false,
            table: None,
            perturb: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError(format!("config file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn omega(&self) -> Complex64 {
        self.twist.map(|t| t.omega()).unwrap_or(Complex64::new(1.0, 0.0))
    }

    /// `2S^z` of the requested sector.
    pub fn sector(&self) -> Result<Option<SpinSector>, ConfigError> {
        let Some(sz) = self.sector else { return Ok(None) };
        let twice = 2.0 * sz;
        if !twice.is_finite() || twice.fract() != 0.0 {
            return bad(format!("S^z = {sz} is not a half-integer"));
        }
        let twice = twice as i32;
        if twice.unsigned_abs() as usize > self.sites || (twice.rem_euclid(2) as usize) != self.sites % 2 {
            return bad(format!("S^z = {sz} is not a sector of a {}-site chain", self.sites));
        }
        Ok(Some(SpinSector::new(twice)))
    }

    pub fn sectors(&self) -> Result<Vec<SpinSector>, ConfigError> {
        Ok(match self.sector()? {
            Some(s) => vec![s],
            None => SpinSector::all(self.sites),
        })
    }

    pub fn chain(&self) -> Result<ChainConfig, ConfigError> {
        let inhom: Vec<Complex64> = match &self.inhomogeneity {
            Inhomogeneity::Homogeneous => vec![Complex64::new(0.0, 0.0); self.sites],
            Inhomogeneity::Explicit { values } => values.iter().map(|&[a, b]| Complex64::new(a, b)).collect(),
            &Inhomogeneity::Regularized { epsilon: [a, b] } => {
                (1..=self.sites).map(|m| Complex64::new(a, b) * m as f64).collect()
            }
        };
        let cfg = ChainConfig::new(self.sites, inhom, self.omega(), self.convention.into())
            .map_err(|e| ConfigError(e.to_string()))?;
        cfg.check_capacity().map_err(|e| ConfigError(e.to_string()))?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.sites == 0 {
            return bad("--sites must be at least 1");
        }
        if let Some(t) = self.twist {
            let w = t.omega();
            if !w.re.is_finite() || !w.im.is_finite() || w.norm() == 0.0 {
                return bad(format!("invalid twist {t:?}"));
            }
        }
        self.sector()?;
        if self.command != Command::Tables && self.command != Command::Verify {
            self.chain()?;
        }
        let tol = &self.tolerances;
        if [tol.wronskian, tol.oracle_match, tol.identity].iter().any(|&t| !(t > 0.0 && t.is_finite())) {
            return bad("tolerances must be positive");
        }
        match self.command {
            Command::Tables => match self.table {
                Some(1..=4) => {}
                Some(t) => return bad(format!("no table {t}; tables are 1 to 4")),
                None => return bad("tables needs a table id"),
            },
            Command::Wronskian if self.ps && self.special => return bad("--ps and --special are exclusive"),
            Command::Wronskian if self.ps && self.twist.is_some_and(|t| (t.omega() - 1.0).norm() > 0.0) => {
                return bad("--ps solves the periodic chain; drop the twist")
            }
            Command::Wronskian if self.ps && self.inhomogeneity != Inhomogeneity::Homogeneous => {
                return bad("--ps is for the homogeneous chain")
            }
            _ => {}
        }
        if let Some(p) = self.perturb {
            if !(p >= 0.0 && p.is_finite()) {
                return bad("--perturb must be a non-negative number");
            }
        }
        Ok(())
    }
}
