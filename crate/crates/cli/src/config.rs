//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Every key must be one of [`KEYS`].

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use qlbm_core::gauss::Path as RunPath;
use qlbm_core::lattice::{GridSpec, VelocitySet};
use qlbm_core::marching::coupled_omega;
use qlbm_core::verify::SuiteConfig;
use serde::Serialize;

/// Recognised keys with a one-line description, in documentation order.
pub const KEYS: &[(&str, &str)] = &[
    ("model", "lattice model, d1q3 or d2q5"),
    ("nx", "nodes along x, a power of two"),
    ("ny", "nodes along y, a power of two (1 for d1q3)"),
    ("dx", "lattice spacing, default 1"),
    ("dt", "time step, default 1"),
    ("tau_star", "dimensionless relaxation time(s), comma-separated"),
    ("omega", "weighting ω in (0,1), or `coupled` for 1 − 1/τ* (1/2 when τ* ≤ 1)"),
    ("ux", "uniform x velocity in Δx/Δt, default 0.2"),
    ("uy", "uniform y velocity in Δx/Δt, default 0.2 for d2q5 and 0 for d1q3"),
    ("velocity_table", "CSV `ix,iy,ux,uy` replacing the uniform velocity"),
    ("phi0", "Gaussian peak, default 0.3"),
    ("sigma0", "Gaussian width in Δx"),
    ("x0", "Gaussian centre x in Δx, default nx/2"),
    ("y0", "Gaussian centre y in Δx, default ny/2 (0 for d1q3)"),
    ("steps", "evaluated step counts, comma-separated"),
    ("path", "classical, marching, dilated or qlsa"),
    ("tol", "check tolerance, default 1e-10"),
    ("seed", "seed for randomised suites, default 0"),
    ("out", "output directory, default `out`"),
    ("norm_samples", "velocity fields in the norm suite, default 100"),
    ("contraction_samples", "random sequences in the dilation suite, default 10"),
    ("usva_samples", "random matrices in the amplification suite, default 20"),
    ("qlsa_samples", "random global systems in the qlsa suite, default 200"),
    ("qlsa_max_nt", "largest N_t of random global systems, default 32"),
    ("complexity_nt", "N_t sweep, default 10,100,1000"),
    ("complexity_eps", "ε sweep, default 1e-3"),
    ("norm_ratio", "‖ψ(t₀)‖/‖ψ(T)‖ used in the complexity table, default 1"),
];

/// A field-level configuration problem.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl ConfigError {
    fn new(key: &str, message: impl Into<String>) -> Self {
        ConfigError {
            key: key.to_string(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// Raw key-value pairs, later entries overriding earlier ones.
#[derive(Clone, Debug, Default)]
pub struct RawConfig {
    pub entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = RawConfig::default();
        for (no, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| ConfigError::new(&format!("line {}", no + 1), "expected `key = value`"))?;
            raw.set(k.trim(), v.trim())?;
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        if !KEYS.iter().any(|(k, _)| *k == key) {
            return Err(ConfigError::new(key, "unknown key"));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|s| s.as_str())
    }

    fn parse_as<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| ConfigError::new(key, format!("cannot parse `{v}`"))))
            .transpose()
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, ConfigError> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let items = v
            .split(',')
            .map(|s| s.trim().parse::<T>().map_err(|_| ConfigError::new(key, format!("cannot parse `{}`", s.trim()))))
            .collect::<Result<Vec<_>, _>>()?;
        if items.is_empty() {
            return Err(ConfigError::new(key, "empty list"));
        }
        Ok(Some(items))
    }

    fn require<T: std::str::FromStr>(&self, key: &str) -> Result<T, ConfigError> {
        self.parse_as(key)?.ok_or_else(|| ConfigError::new(key, "missing required key"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OmegaSpec {
    Coupled,
    Fixed(f64),
}

impl Serialize for OmegaSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            OmegaSpec::Coupled => s.serialize_str("coupled"),
            OmegaSpec::Fixed(w) => s.serialize_f64(*w),
        }
    }
}

impl OmegaSpec {
    pub fn resolve(&self, tau_star: f64) -> f64 {
        match self {
            OmegaSpec::Coupled => coupled_omega(tau_star),
            OmegaSpec::Fixed(w) => *w,
        }
    }
}

/// Settings shared by every command.
#[derive(Clone, Debug, Serialize)]
pub struct Common {
    pub tol: f64,
    pub seed: u64,
    pub out: PathBuf,
}

/// Benchmark settings, fully resolved and validated.
#[derive(Clone, Debug, Serialize)]
pub struct BenchConfig {
    pub model: String,
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dt: f64,
    pub tau_star: Vec<f64>,
    pub omega: OmegaSpec,
    pub ux: f64,
    pub uy: f64,
    pub velocity_table: Option<PathBuf>,
    pub phi0: f64,
    pub sigma0: f64,
    pub x0: f64,
    pub y0: f64,
    pub steps: Vec<usize>,
    pub path: String,
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComplexityConfig {
    pub n_t: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub norm_ratio: f64,
    pub omega: f64,
}

pub fn common(raw: &RawConfig) -> Result<Common, ConfigError> {
    let tol = raw.parse_as("tol")?.unwrap_or(1e-10);
    if !(tol > 0.0 && f64::is_finite(tol)) {
        return Err(ConfigError::new("tol", "must be positive"));
    }
    Ok(Common {
        tol,
        seed: raw.parse_as("seed")?.unwrap_or(0),
        out: raw.get("out").map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out")),
    })
}

impl BenchConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let model: String = raw.require("model")?;
        let vs = VelocitySet::by_name(&model).map_err(|e| ConfigError::new("model", e.to_string()))?;
        let nx: usize = raw.require("nx")?;
        let ny: usize = if vs.d == 1 {
            let ny = raw.parse_as("ny")?.unwrap_or(1);
            if ny != 1 {
                return Err(ConfigError::new("ny", "d1q3 needs ny = 1"));
            }
            ny
        } else {
            raw.require("ny")?
        };
        let dx = raw.parse_as("dx")?.unwrap_or(1.0);
        let dt = raw.parse_as("dt")?.unwrap_or(1.0);
        GridSpec::new(nx, ny, dx, dt).map_err(|e| {
            let key = match &e {
                qlbm_core::Error::InvalidParameter { name, .. } => name.to_string(),
                _ => "nx".to_string(),
            };
            ConfigError::new(&key, e.to_string())
        })?;

        let tau_star: Vec<f64> = raw.list("tau_star")?.ok_or_else(|| ConfigError::new("tau_star", "missing required key"))?;
        if let Some(t) = tau_star.iter().find(|t| !(**t > 0.5)) {
            return Err(ConfigError::new("tau_star", format!("{t} must exceed 1/2")));
        }
        let omega = match raw.get("omega") {
            None | Some("coupled") => OmegaSpec::Coupled,
            Some(_) => {
                let w: f64 = raw.require("omega")?;
                if !(w > 0.0 && w < 1.0) {
                    return Err(ConfigError::new("omega", format!("{w} is outside (0, 1)")));
                }
                OmegaSpec::Fixed(w)
            }
        };

        let ux = raw.parse_as("ux")?.unwrap_or(0.2);
        let uy = raw.parse_as("uy")?.unwrap_or(if vs.d == 2 { 0.2 } else { 0.0 });
        if vs.d == 1 && uy != 0.0 {
            return Err(ConfigError::new("uy", "d1q3 has no y velocity"));
        }
        let phi0 = raw.parse_as("phi0")?.unwrap_or(0.3);
        let sigma0: f64 = raw.require("sigma0")?;
        if !(sigma0 > 0.0) {
            return Err(ConfigError::new("sigma0", "must be positive"));
        }
        let x0 = raw.parse_as("x0")?.unwrap_or(nx as f64 / 2.0);
        let y0 = raw.parse_as("y0")?.unwrap_or(if vs.d == 2 { ny as f64 / 2.0 } else { 0.0 });
        let steps: Vec<usize> = raw.list("steps")?.ok_or_else(|| ConfigError::new("steps", "missing required key"))?;
        let path: String = raw.parse_as("path")?.unwrap_or_else(|| "marching".to_string());
        path.parse::<RunPath>().map_err(|e| ConfigError::new("path", e.to_string()))?;

        Ok(BenchConfig {
            model,
            nx,
            ny,
            dx,
            dt,
            tau_star,
            omega,
            ux,
            uy,
            velocity_table: raw.get("velocity_table").map(PathBuf::from),
            phi0,
            sigma0,
            x0,
            y0,
            steps,
            path,
            common: common(raw)?,
        })
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec::new(self.nx, self.ny, self.dx, self.dt).expect("validated")
    }

    pub fn velocity_set(&self) -> VelocitySet {
        VelocitySet::by_name(&self.model).expect("validated")
    }

    pub fn run_path(&self) -> RunPath {
        self.path.parse().expect("validated")
    }
}

pub fn suite_config(raw: &RawConfig) -> Result<SuiteConfig, ConfigError> {
    let d = SuiteConfig::default();
    let c = common(raw)?;
    let cfg = SuiteConfig {
        seed: c.seed,
        tol: raw.parse_as("tol")?.unwrap_or(d.tol),
        norm_samples: raw.parse_as("norm_samples")?.unwrap_or(d.norm_samples),
        contraction_samples: raw.parse_as("contraction_samples")?.unwrap_or(d.contraction_samples),
        usva_samples: raw.parse_as("usva_samples")?.unwrap_or(d.usva_samples),
        qlsa_samples: raw.parse_as("qlsa_samples")?.unwrap_or(d.qlsa_samples),
        qlsa_max_nt: raw.parse_as("qlsa_max_nt")?.unwrap_or(d.qlsa_max_nt),
        ..d
    };
    if cfg.qlsa_max_nt == 0 {
        return Err(ConfigError::new("qlsa_max_nt", "must be at least 1"));
    }
    Ok(cfg)
}

impl ComplexityConfig {
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let n_t: Vec<usize> = raw.list("complexity_nt")?.unwrap_or_else(|| vec![10, 100, 1000]);
        if n_t.iter().any(|&n| n < 2) {
            return Err(ConfigError::new("complexity_nt", "every N_t must be at least 2"));
        }
        let epsilon: Vec<f64> = raw.list("complexity_eps")?.unwrap_or_else(|| vec![1e-3]);
        if epsilon.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(ConfigError::new("complexity_eps", "every ε must lie in (0, 1)"));
        }
        let norm_ratio = raw.parse_as("norm_ratio")?.unwrap_or(1.0);
        if !(norm_ratio > 0.0) {
            return Err(ConfigError::new("norm_ratio", "must be positive"));
        }
        let omega = match raw.get("omega") {
            None | Some("coupled") => match raw.list::<f64>("tau_star")? {
                Some(t) => coupled_omega(t[0]),
                None => 0.5,
            },
            Some(_) => raw.require("omega")?,
        };
        if !(omega > 0.0 && omega < 1.0) {
            return Err(ConfigError::new("omega", format!("{omega} is outside (0, 1)")));
        }
        Ok(ComplexityConfig {
            n_t,
            epsilon,
            norm_ratio,
            omega,
        })
    }
}
