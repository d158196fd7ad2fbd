//! Surface configuration files.
//!
//! ```toml
//! [surface]
//! name = "exp-cusp"
//! n = 1
//!
//! [surface.family]
//! kind = "exp_cusp"   # exp_cusp | gaussian_cusp | power_cusp | tabulated
//! t1 = 8.0            # blend point, optional
//! rate = 1.0          # tail rate, optional
//!
//! [decay]             # f(t) <= M exp(-alpha t) for t >= T0
//! M = 1.0
//! alpha = 1.0
//! T0 = 8.0
//!
//! [tolerances]        # optional
//! quadrature = 1e-9
//! ```

use std::path::Path;

use isoratio::numerics::DecayBound;
use isoratio::warped_geometry::{
    ExpCusp, Family, GeometryError, SurfaceOfRevolution, Tabulated, Tolerances, WarpingFunction,
};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: String, message: String },
    #[error("{path}: field `{field}`: {message}")]
    Invalid {
        path: String,
        field: &'static str,
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub surface: SurfaceSection,
    pub decay: DecaySection,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSection {
    pub name: String,
    pub n: u32,
    pub family: FamilySpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySpec {
    ExpCusp {
        t1: Option<f64>,
        rate: Option<f64>,
    },
    GaussianCusp {},
    PowerCusp {
        a: f64,
    },
    Tabulated {
        knots: Vec<[f64; 2]>,
        /// Defaults to the decay rate.
        tail_rate: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    #[serde(rename = "M")]
    pub m: f64,
    pub alpha: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub quadrature: Option<f64>,
    pub root: Option<f64>,
    pub minimize: Option<f64>,
    pub pole_epsilon: Option<f64>,
}

impl ToleranceOverrides {
    /// Fields set in `other` win.
    pub fn merged(self, other: ToleranceOverrides) -> Self {
        Self {
            quadrature: other.quadrature.or(self.quadrature),
            root: other.root.or(self.root),
            minimize: other.minimize.or(self.minimize),
            pole_epsilon: other.pole_epsilon.or(self.pole_epsilon),
        }
    }

    fn resolve(&self) -> Result<Tolerances, (&'static str, String)> {
        let d = Tolerances::default();
        let pick = |v: Option<f64>, def: f64, field: &'static str| match v {
            Some(x) if x > 0.0 && x < 1.0 => Ok(x),
            Some(x) => Err((field, format!("must lie in ]0, 1[, got {x}"))),
            None => Ok(def),
        };
        Ok(Tolerances {
            quadrature: pick(self.quadrature, d.quadrature, "tolerances.quadrature")?,
            root: pick(self.root, d.root, "tolerances.root")?,
            minimize: pick(self.minimize, d.minimize, "tolerances.minimize")?,
            pole_epsilon: pick(self.pole_epsilon, d.pole_epsilon, "tolerances.pole_epsilon")?,
        })
    }
}

impl SurfaceConfig {
    pub fn parse(text: &str, path: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse {
            path: path.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: shown.clone(),
            source,
        })?;
        Self::parse(&text, &shown)
    }

    /// Build the surface, reporting the offending field on failure.
    pub fn build(&self, path: &str, extra: ToleranceOverrides) -> Result<SurfaceOfRevolution, ConfigError> {
        let invalid = |field: &'static str, message: String| ConfigError::Invalid {
            path: path.to_string(),
            field,
            message,
        };
        let geom = |field: &'static str| move |e: GeometryError| invalid(field, e.to_string());

        if self.surface.n == 0 {
            return Err(invalid("surface.n", "dimension must be at least 1".into()));
        }
        let decay = DecayBound::new(self.decay.m, self.decay.alpha, self.decay.t0)
            .map_err(|e| invalid("decay", e.to_string()))?;
        let family = match &self.surface.family {
            FamilySpec::ExpCusp { t1, rate } => {
                let cusp = ExpCusp::new(t1.unwrap_or(ExpCusp::DEFAULT_T1), rate.unwrap_or(1.0))
                    .map_err(geom("surface.family"))?;
                Family::ExpCusp(cusp)
            }
            FamilySpec::GaussianCusp {} => Family::GaussianCusp,
            FamilySpec::PowerCusp { a } => Family::PowerCusp { a: *a },
            FamilySpec::Tabulated { knots, tail_rate } => {
                let knots = knots.iter().map(|k| (k[0], k[1])).collect();
                let tab =
                    Tabulated::new(knots, tail_rate.unwrap_or(decay.alpha)).map_err(geom("surface.family.knots"))?;
                Family::Tabulated(tab)
            }
        };
        let warping = WarpingFunction::new(family, decay).map_err(|e| match e {
            GeometryError::DecayViolated { .. } => invalid("decay", e.to_string()),
            other => invalid("surface.family", other.to_string()),
        })?;
        let tol = self
            .tolerances
            .merged(extra)
            .resolve()
            .map_err(|(field, message)| invalid(field, message))?;
        SurfaceOfRevolution::new(self.surface.n, warping, tol).map_err(geom("surface"))
    }
}
