//! Run configuration, read from TOML.
//!
//! ```toml
//! [model]
//! name = "rotating_henon"
//!
//! [model.params]
//! a = 0.68
//! b = 0.1
//! eps_lo = 0.009
//! eps_hi = 0.01
//!
//! [domain]
//! L = 0.99
//! # R defaults to eps_hi
//! R_Lambda = 0.5
//! ```
//!
//! Every other section is optional; see the field defaults below.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use nhim_core::geometry::{DomainBox, R_LAMBDA};
use nhim_core::maps::{build_model, MapModel};
use nhim_core::rates::BoundScheme;
use nhim_core::verify::CertifyOptions;
use serde::{Deserialize, Serialize};

#[derive(Debug)]
pub enum ConfigError {
    Read { path: PathBuf, source: std::io::Error },
    Parse(String),
    Invalid(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Read { path, source } => write!(f, "cannot read config {}: {source}", path.display()),
            ConfigError::Parse(e) => write!(f, "malformed config: {e}"),
            ConfigError::Invalid(e) => write!(f, "invalid config: {e}"),
        }
    }
}

impl std::error::Error for ConfigError {}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub domain: DomainSection,
    #[serde(default)]
    pub certify: CertifySection,
    #[serde(default)]
    pub manifold: ManifoldSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSection {
    #[serde(rename = "L")]
    pub l: f64,
    /// radius of the hyperbolic balls; `eps_hi` when absent
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(rename = "R_Lambda", default = "default_r_lambda")]
    pub r_lambda: f64,
}

fn default_r_lambda() -> f64 {
    R_LAMBDA
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Gershgorin,
    Sharp,
}

impl From<Scheme> for BoundScheme {
    fn from(s: Scheme) -> BoundScheme {
        match s {
            Scheme::Gershgorin => BoundScheme::Gershgorin,
            Scheme::Sharp => BoundScheme::Sharp,
        }
    }
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Gershgorin => "gershgorin",
            Scheme::Sharp => "sharp",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CertifySection {
    /// requested smoothness order
    pub k: u32,
    pub k_cap: u32,
    /// `(λ, x, y)` pieces for the rate constants
    pub rate_subdivision: [usize; 3],
    /// `(λ, x, y)` pieces for the covering and backward cone checks
    pub check_subdivision: [usize; 3],
    pub scheme: Scheme,
}

impl Default for CertifySection {
    fn default() -> Self {
        let d = CertifyOptions::default();
        CertifySection {
            k: d.k,
            k_cap: d.k_cap,
            rate_subdivision: d.rate_subdivision.into(),
            check_subdivision: d.check_subdivision.into(),
            scheme: Scheme::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldSection {
    pub n_lambda: usize,
    pub n_x: usize,
    pub n_y: usize,
    pub max_iterations: usize,
    /// stop the center-unstable iteration at this sup-distance
    pub tolerance: f64,
    pub wcs_depth: usize,
    pub fiber_depth: usize,
    pub fiber_nodes: usize,
    pub lambda_star_nodes: usize,
}

impl Default for ManifoldSection {
    fn default() -> Self {
        ManifoldSection {
            n_lambda: 2048,
            n_x: 9,
            n_y: 9,
            max_iterations: 40,
            tolerance: 1e-15,
            wcs_depth: 12,
            fiber_depth: 12,
            fiber_nodes: 9,
            lambda_star_nodes: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// relative to `dir`
    pub certificate: PathBuf,
    /// relative to `dir`
    pub sweep_csv: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), certificate: PathBuf::from("certificate.json"), sweep_csv: PathBuf::from("sweep.csv") }
    }
}

impl RunConfig {
    /// The rotating Hénon setup on `ε ∈ [eps_lo, eps_hi]` with `L = 0.99`.
    pub fn henon(eps_lo: f64, eps_hi: f64) -> RunConfig {
        let params = [("a", 0.68), ("b", 0.1), ("c", 0.0), ("eps_lo", eps_lo), ("eps_hi", eps_hi)];
        RunConfig {
            model: ModelSection { name: "rotating_henon".into(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() },
            domain: DomainSection { l: 0.99, r: None, r_lambda: R_LAMBDA },
            certify: CertifySection::default(),
            manifold: ManifoldSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.to_path_buf(), source })?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// `R`, falling back to the upper end of the `ε` range.
    pub fn radius(&self) -> Result<f64, ConfigError> {
        self.domain.r.or_else(|| self.model.params.get("eps_hi").copied()).ok_or_else(|| invalid("domain.R is required for models without eps_hi"))
    }

    pub fn build_model(&self) -> Result<Box<dyn MapModel>, ConfigError> {
        build_model(&self.model.name, &self.model.params).map_err(|e| invalid(e.to_string()))
    }

    pub fn domain_box(&self, model: &dyn MapModel) -> Result<DomainBox, ConfigError> {
        let (u, s) = model.dims();
        DomainBox::new(self.radius()?, self.domain.r_lambda, self.domain.l, u, s).map_err(|e| invalid(e.to_string()))
    }

    pub fn certify_options(&self) -> CertifyOptions {
        let c = &self.certify;
        let t = |a: [usize; 3]| (a[0], a[1], a[2]);
        CertifyOptions { k: c.k, k_cap: c.k_cap, rate_subdivision: t(c.rate_subdivision), check_subdivision: t(c.check_subdivision), scheme: c.scheme.into() }
    }

    pub fn certificate_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.certificate)
    }

    pub fn sweep_csv_path(&self) -> PathBuf {
        self.output.dir.join(&self.output.sweep_csv)
    }

    /// Same configuration on another `ε` range; `R` follows `eps_hi` unless pinned.
    pub fn with_eps(&self, eps_lo: f64, eps_hi: f64) -> RunConfig {
        let mut c = self.clone();
        c.model.params.insert("eps_lo".into(), eps_lo);
        c.model.params.insert("eps_hi".into(), eps_hi);
        c.model.params.remove("eps");
        c
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let (Some(lo), Some(hi)) = (self.model.params.get("eps_lo"), self.model.params.get("eps_hi")) {
            if !(lo <= hi) {
                return Err(invalid(format!("eps_lo = {lo} exceeds eps_hi = {hi}")));
            }
        }
        let c = &self.certify;
        if c.rate_subdivision.iter().chain(&c.check_subdivision).any(|&n| n == 0) {
            return Err(invalid("subdivision counts must be at least 1"));
        }
        if c.k > c.k_cap {
            return Err(invalid(format!("k = {} exceeds k_cap = {}", c.k, c.k_cap)));
        }
        let m = &self.manifold;
        if m.n_lambda < 2 || m.n_x < 2 || m.n_y < 2 || m.fiber_nodes < 2 || m.lambda_star_nodes == 0 {
            return Err(invalid("manifold grids need at least two nodes per axis"));
        }
        if m.max_iterations == 0 || m.wcs_depth == 0 || m.fiber_depth == 0 {
            return Err(invalid("iteration budgets and depths must be positive"));
        }
        if !(m.tolerance >= 0.0) {
            return Err(invalid("manifold.tolerance must be non-negative"));
        }
        let model = self.build_model()?;
        self.domain_box(model.as_ref())?;
        Ok(())
    }
}
