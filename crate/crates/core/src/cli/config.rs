//! TOML analysis config: problem grammar, sweep range, tolerances, and
//! output destinations.

use crate::error::{Error, Result};
use crate::model::{make_bvp_family, make_polynomial_family, DensitySpec, PolyTerm, PotentialFamily};
use serde::{Deserialize, Serialize};

/// One polynomial monomial in the config grammar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub powers_of_lambda: Vec<u32>,
    pub powers_of_u: Vec<u32>,
    pub coefficient: f64,
}

/// Problem description: either an explicit polynomial family or a
/// discretized 1-D Dirichlet problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    Polynomial {
        #[serde(default = "default_name")]
        name: String,
        dim_param: usize,
        dim_state: usize,
        terms: Vec<TermSpec>,
    },
    Bvp {
        /// Interior grid points.
        m: usize,
        /// Gradient density W as (power, coefficient) pairs.
        w_terms: Vec<(u32, f64)>,
        /// Forcing density G as (power, coefficient) pairs.
        g_terms: Vec<(u32, f64)>,
    },
}

fn default_name() -> String {
    "problem".into()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Null tolerance; scale-aware default when unset.
    pub eps_null: Option<f64>,
    /// Complement Newton residual tolerance; residual-scaled default.
    pub tau_psi: Option<f64>,
    /// Near-zero eigenvalue window; spectral-gap default.
    pub eps_track: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eps_null: None,
            tau_psi: None,
            eps_track: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassificationSettings {
    /// Half-width of the classification neighborhood.
    pub delta: f64,
    /// Reduced-space search radius.
    pub rho: f64,
    /// Multistart grid parameter; (2m+1)^d starts.
    pub m: usize,
}

impl Default for ClassificationSettings {
    fn default() -> Self {
        Self {
            delta: 0.25,
            rho: 1.0,
            m: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Outputs {
    pub report: Option<String>,
    pub csv_dir: Option<String>,
    pub verbose: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisConfig {
    pub problem: ProblemSpec,
    /// Sweep interval [a, b] with a < b.
    pub lambda_range: [f64; 2],
    pub steps: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub classification: ClassificationSettings,
    #[serde(default)]
    pub outputs: Outputs,
}

/// Parses and validates a TOML config. Syntax errors carry the parser's
/// line/column message; semantic errors name the offending field.
pub fn parse_config(text: &str) -> Result<AnalysisConfig> {
    let cfg: AnalysisConfig =
        toml::from_str(text).map_err(|e| Error::Config(format!("syntax: {e}")))?;
    validate(&cfg)?;
    Ok(cfg)
}

fn validate(cfg: &AnalysisConfig) -> Result<()> {
    let [a, b] = cfg.lambda_range;
    if !(a < b) {
        return Err(Error::Config(format!(
            "lambda_range degenerate: [{a}, {b}] requires a < b"
        )));
    }
    if cfg.steps < 2 {
        return Err(Error::Config(format!("steps = {} must be >= 2", cfg.steps)));
    }
    for (name, t) in [
        ("tolerances.eps_null", cfg.tolerances.eps_null),
        ("tolerances.tau_psi", cfg.tolerances.tau_psi),
        ("tolerances.eps_track", cfg.tolerances.eps_track),
    ] {
        if let Some(v) = t {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{name} = {v} must be positive")));
            }
        }
    }
    if !(cfg.classification.delta > 0.0) {
        return Err(Error::Config(format!(
            "classification.delta = {} must be positive",
            cfg.classification.delta
        )));
    }
    if !(cfg.classification.rho > 0.0) {
        return Err(Error::Config(format!(
            "classification.rho = {} must be positive",
            cfg.classification.rho
        )));
    }
    if cfg.classification.m < 1 {
        return Err(Error::Config("classification.m must be >= 1".into()));
    }
    match &cfg.problem {
        ProblemSpec::Polynomial {
            dim_param,
            dim_state,
            terms,
            ..
        } => {
            if *dim_param < 1 || *dim_state < 1 {
                return Err(Error::Config(
                    "problem.dim_param and problem.dim_state must be >= 1".into(),
                ));
            }
            if terms.is_empty() {
                return Err(Error::Config("problem.terms must be nonempty".into()));
            }
        }
        ProblemSpec::Bvp { m, w_terms, .. } => {
            if *m < 2 {
                return Err(Error::Config("problem.m must be >= 2".into()));
            }
            if w_terms.is_empty() {
                return Err(Error::Config("problem.w_terms must be nonempty".into()));
            }
        }
    }
    Ok(())
}

/// Serializes a config back to TOML (round-trips through parse_config).
pub fn serialize_config(cfg: &AnalysisConfig) -> Result<String> {
    toml::to_string(cfg).map_err(|e| Error::Config(format!("serialize: {e}")))
}

/// Instantiates the potential family described by the config.
pub fn build_family(problem: &ProblemSpec) -> Result<PotentialFamily> {
    match problem {
        ProblemSpec::Polynomial {
            name,
            dim_param,
            dim_state,
            terms,
        } => {
            let terms = terms
                .iter()
                .map(|t| {
                    PolyTerm::new(
                        t.powers_of_lambda.clone(),
                        t.powers_of_u.clone(),
                        t.coefficient,
                    )
                })
                .collect();
            make_polynomial_family(name.clone(), "config-defined polynomial family",
                *dim_param, *dim_state, terms)
        }
        ProblemSpec::Bvp { m, w_terms, g_terms } => {
            let w = DensitySpec::new(w_terms.clone())?;
            let g = DensitySpec::new(g_terms.clone())?;
            make_bvp_family(*m, w, g)
        }
    }
}
