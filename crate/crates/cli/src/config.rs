//! Run configuration: a single JSON document per run, a JSON array for a
//! suite. Complex numbers travel as `[re, im]` pairs and infinite
//! exponents as the string `"inf"`, so records are locale-free and
//! lossless.

use fockbench_core::fock::{Exponent, FockParams};
use fockbench_core::operators::{FamilySpec, OperatorKind, SymbolPair};
use fockbench_core::symbol::EntireExpr;
use serde::{Deserialize, Serialize};

/// Raw config as parsed from JSON; every field that has a natural default
/// is optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    /// Run identifier; names the output record.
    pub id: String,
    /// Operator tag: `Vg | Jg | Mg | Vg_psi | Cg_psi | J_g_psi | C_g_psi`.
    #[serde(default)]
    pub op: Option<String>,
    /// Symbol `g` as expression text.
    #[serde(default)]
    pub g: Option<String>,
    /// Symbol `psi` as expression text; defaults to `z`.
    #[serde(default)]
    pub psi: Option<String>,
    pub alpha: f64,
    pub p: ExponentSpec,
    pub q: ExponentSpec,
    /// Test function for `norm` / `apply`.
    #[serde(default)]
    pub f: Option<String>,
    /// Evaluation point for `apply`, as `[re, im]`.
    #[serde(default)]
    pub z: Option<[f64; 2]>,
    /// Transform tag for `criterion`:
    /// `P_psi | Q_g | M_gpsi | M_gpsipsi | B_g | B_gpsi | D_rq | mu_tilde`.
    #[serde(default)]
    pub criterion: Option<String>,
    /// Disc radius for `D_rq`; defaults to 1.
    #[serde(default)]
    pub disc_radius: Option<f64>,
    /// Family/grid overrides.
    #[serde(default)]
    pub grid: Option<GridSpec>,
    /// Quadrature tolerance override.
    #[serde(default)]
    pub tol: Option<f64>,
    /// Emit the criterion field samples next to the verdict record.
    #[serde(default)]
    pub emit_field: Option<bool>,
}

/// `"inf"` or a positive number.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExponentSpec {
    Number(f64),
    Text(String),
}

impl ExponentSpec {
    pub fn resolve(&self) -> Result<Exponent, ConfigError> {
        match self {
            ExponentSpec::Number(v) if *v > 0.0 && v.is_finite() => {
                Ok(Exponent::finite(*v))
            }
            ExponentSpec::Number(v) => {
                Err(ConfigError::new(format!("exponent must be positive, got {v}")))
            }
            ExponentSpec::Text(s) if s == "inf" => Ok(Exponent::Infinity),
            ExponentSpec::Text(s) => {
                Err(ConfigError::new(format!("exponent must be a number or \"inf\", got {s:?}")))
            }
        }
    }
}

/// Kernel-family and sampling-grid dimensions.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridSpec {
    #[serde(default = "default_radii")]
    pub radii: usize,
    #[serde(default = "default_angles")]
    pub angles: usize,
    #[serde(default = "default_w_radius")]
    pub w_radius: f64,
    #[serde(default = "default_monomials")]
    pub monomials: u32,
}

fn default_radii() -> usize {
    12
}
fn default_angles() -> usize {
    16
}
fn default_w_radius() -> f64 {
    8.0
}
fn default_monomials() -> u32 {
    12
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            radii: default_radii(),
            angles: default_angles(),
            w_radius: default_w_radius(),
            monomials: default_monomials(),
        }
    }
}

impl GridSpec {
    pub fn family(&self) -> FamilySpec {
        FamilySpec {
            w_radius: self.w_radius,
            n_radii: self.radii,
            n_angles: self.angles,
            max_monomial: self.monomials,
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
#[error("config error: {message}")]
pub struct ConfigError {
    pub message: String,
}

impl ConfigError {
    pub fn new(message: String) -> Self {
        ConfigError { message }
    }
}

/// Config with symbols parsed and parameters validated.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub raw: RunConfig,
    pub op: Option<OperatorKind>,
    pub pair: Option<SymbolPair>,
    pub f: Option<EntireExpr>,
    pub params: FockParams,
    pub grid: GridSpec,
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn resolve(&self) -> Result<ResolvedConfig, ConfigError> {
        if !(self.alpha > 0.0) {
            return Err(ConfigError::new(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        let p = self.p.resolve()?;
        let q = self.q.resolve()?;
        let params = FockParams::new(self.alpha, p, q);
        let op = match &self.op {
            None => None,
            Some(tag) => Some(OperatorKind::parse_tag(tag).ok_or_else(|| {
                ConfigError::new(format!("unknown operator tag {tag:?}"))
            })?),
        };
        let parse_symbol = |field: &str, text: &str| {
            EntireExpr::parse(text).map_err(|e| {
                ConfigError::new(format!("field {field}: {e}"))
            })
        };
        let pair = match &self.g {
            None => None,
            Some(g_text) => {
                let g = parse_symbol("g", g_text)?;
                let psi = match &self.psi {
                    None => EntireExpr::variable(),
                    Some(text) => parse_symbol("psi", text)?,
                };
                Some(SymbolPair::new(g, psi))
            }
        };
        let f = match &self.f {
            None => None,
            Some(text) => Some(parse_symbol("f", text)?),
        };
        if let Some(tol) = self.tol {
            if !(tol > 1e-12 && tol < 1e-2) {
                return Err(ConfigError::new(format!(
                    "tol {tol} outside accepted range (1e-12, 1e-2)"
                )));
            }
        }
        Ok(ResolvedConfig {
            raw: self.clone(),
            op,
            pair,
            f,
            params,
            grid: self.grid.unwrap_or_default(),
            tol: self.tol,
        })
    }
}
