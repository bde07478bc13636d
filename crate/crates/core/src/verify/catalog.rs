use std::path::Path;

use serde::Deserialize;

use super::VerifyError;
use crate::expr::{parse, Expr, Params};
use crate::quad::{limit_functional, QuadResult};
use crate::sums::{WeightKind, WeightSpec};

/// Default verdict threshold when an entry does not set one.
pub const DEFAULT_TOLERANCE: f64 = 2e-3;

/// Stored limit values must match their expression to this accuracy.
pub const LIMIT_CONSISTENCY: f64 = 1e-15;

const BUILTIN: &str = include_str!("../../catalog.toml");

/// A known limit of a weighted sum.
#[derive(Debug, Clone, PartialEq)]
pub struct CatalogEntry {
    pub id: String,
    pub weight: WeightSpec,
    pub f_source: String,
    pub f: Expr,
    pub params: Params,
    pub limit_source: String,
    pub limit_value: f64,
    pub tolerance: f64,
    pub citation: String,
}

impl CatalogEntry {
    /// J(f) for this entry by quadrature, independent of the stored closed
    /// form.
    pub fn limit_by_quadrature(&self, tol: f64) -> Result<QuadResult, VerifyError> {
        Ok(limit_functional(
            &self.f,
            &self.params,
            self.weight.alpha,
            self.weight.mean,
            tol,
        )?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCatalog {
    #[serde(default)]
    entry: Vec<RawEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    id: String,
    weight: String,
    weight_expr: Option<String>,
    alpha: Option<f64>,
    mean: Option<String>,
    f: String,
    #[serde(default)]
    params: Params,
    limit: String,
    limit_value: f64,
    tolerance: Option<f64>,
    #[serde(default)]
    citation: String,
}

fn parse_field(id: &str, field: &'static str, src: &str) -> Result<Expr, VerifyError> {
    parse(src).map_err(|source| VerifyError::Expression {
        id: id.to_string(),
        field,
        source,
    })
}

fn constant(id: &str, field: &'static str, e: &Expr, params: &Params) -> Result<f64, VerifyError> {
    if e.uses_variable() {
        return Err(VerifyError::Catalog {
            id: id.to_string(),
            reason: format!("{field} must not depend on x"),
        });
    }
    e.bind(params)
        .and_then(|b| b.eval(0.0))
        .map_err(|source| VerifyError::Catalog {
            id: id.to_string(),
            reason: format!("{field}: {source}"),
        })
}

impl RawEntry {
    fn build(self) -> Result<CatalogEntry, VerifyError> {
        let id = self.id;
        let bad = |reason: String| VerifyError::Catalog {
            id: id.clone(),
            reason,
        };

        let kind = match (self.weight.as_str(), &self.weight_expr) {
            ("synthetic", Some(src)) => {
                WeightKind::Synthetic(parse_field(&id, "weight_expr", src)?)
            }
            ("synthetic", None) => return Err(bad("synthetic weights need weight_expr".into())),
            (name, None) => name.parse::<WeightKind>().map_err(bad)?,
            (_, Some(_)) => {
                return Err(bad("weight_expr is only valid for synthetic weights".into()))
            }
        };
        let defaults = kind.default_exponent_and_mean();
        let alpha = match (self.alpha, defaults) {
            (Some(a), _) => a,
            (None, Some((a, _))) => a,
            (None, None) => return Err(bad("alpha is required for synthetic weights".into())),
        };
        let mean = match (&self.mean, defaults) {
            (Some(src), _) => constant(&id, "mean", &parse_field(&id, "mean", src)?, &self.params)?,
            (None, Some((_, l))) => l,
            (None, None) => return Err(bad("mean is required for synthetic weights".into())),
        };
        let weight = WeightSpec::new(kind, alpha, mean).map_err(|e| bad(e.to_string()))?;

        let f = parse_field(&id, "f", &self.f)?;
        if let Some(missing) = f
            .params()
            .into_iter()
            .find(|p| !self.params.contains_key(p))
        {
            return Err(bad(format!("f uses unbound parameter '{missing}'")));
        }

        let limit_expr = parse_field(&id, "limit", &self.limit)?;
        let computed = constant(&id, "limit", &limit_expr, &self.params)?;
        let gap = (computed - self.limit_value).abs();
        if gap.is_nan() || gap > LIMIT_CONSISTENCY {
            return Err(bad(format!(
                "limit_value {} disagrees with '{}' = {computed}",
                self.limit_value, self.limit
            )));
        }

        let tolerance = self.tolerance.unwrap_or(DEFAULT_TOLERANCE);
        if !(tolerance.is_finite() && tolerance >= 0.0) {
            return Err(bad(format!(
                "tolerance must be non-negative, got {tolerance}"
            )));
        }

        Ok(CatalogEntry {
            id,
            weight,
            f_source: self.f,
            f,
            params: self.params,
            limit_source: self.limit,
            limit_value: self.limit_value,
            tolerance,
            citation: self.citation,
        })
    }
}

/// A validated list of [`CatalogEntry`] with unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn parse(text: &str) -> Result<Self, VerifyError> {
        let raw: RawCatalog =
            toml::from_str(text).map_err(|e| VerifyError::CatalogFile(e.to_string()))?;
        let mut entries: Vec<CatalogEntry> = Vec::with_capacity(raw.entry.len());
        for r in raw.entry {
            let e = r.build()?;
            if entries.iter().any(|x| x.id == e.id) {
                return Err(VerifyError::Catalog {
                    id: e.id,
                    reason: "duplicate id".into(),
                });
            }
            entries.push(e);
        }
        Ok(Self { entries })
    }

    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("built-in catalog is valid")
    }

    pub fn builtin_source() -> &'static str {
        BUILTIN
    }

    pub fn load(path: &Path) -> Result<Self, VerifyError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| VerifyError::CatalogFile(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&CatalogEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.id.as_str())
    }
}
