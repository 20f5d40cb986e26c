//! Named polynomial maps, loaded from TOML.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::polyalg::{parse_matrix, parse_poly, Exponent, PolyError, Var};
use crate::scalar::rational_to_ratio_i64;
use crate::{GenPoly, PolyMatrix, Rational};

const BUILTIN: &str = include_str!("../data/catalog.toml");

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown map `{0}`")]
    UnknownMap(String),
    #[error("malformed catalog: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("map `{name}`: {msg}")]
    Invalid { name: String, msg: String },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapEntry {
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub dim: usize,
    pub vars: usize,
    pub sl: bool,
    pub product_type: bool,
    #[serde(default)]
    pub closed_orbit: bool,
    #[serde(default)]
    pub period: Option<String>,
    #[serde(default)]
    pub orbit: Option<Vec<Vec<String>>>,
    pub lambda: Vec<String>,
    pub entries: Vec<Vec<String>>,
    #[serde(default)]
    pub generated: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct CatalogFile {
    map: Vec<MapEntry>,
}

/// A validated catalog map.
#[derive(Clone, Debug)]
pub struct CatalogMap {
    pub entry: MapEntry,
    pub matrix: PolyMatrix,
    pub lambda: Vec<Exponent>,
    pub period: Option<Rational>,
    /// One-variable map whose periodic orbit carries the limit measure.
    pub orbit: Option<PolyMatrix>,
}

impl CatalogMap {
    pub fn name(&self) -> &str {
        &self.entry.name
    }

    pub fn dim(&self) -> usize {
        self.entry.dim
    }

    pub fn vars(&self) -> usize {
        self.entry.vars
    }
}

pub fn parse_exponent(s: &str) -> Result<Exponent, PolyError> {
    let p: GenPoly = parse_poly(s)?;
    let c = p
        .constant_value()
        .ok_or_else(|| PolyError::Parse(format!("`{s}` is not a number")))?;
    rational_to_ratio_i64(&c).ok_or_else(|| PolyError::Parse(format!("`{s}` out of range")))
}

pub fn parse_exponents(s: &str) -> Result<Vec<Exponent>, PolyError> {
    s.split(',').map(|p| parse_exponent(p.trim())).collect()
}

fn validate(entry: MapEntry) -> Result<CatalogMap, CatalogError> {
    let bad = |msg: String| CatalogError::Invalid {
        name: entry.name.clone(),
        msg,
    };
    let matrix: PolyMatrix = parse_matrix(&entry.entries).map_err(|e| bad(e.to_string()))?;
    if matrix.dim() != entry.dim {
        return Err(bad(format!("declared dim {} but matrix is {}", entry.dim, matrix.dim())));
    }
    for v in matrix.entries().iter().flat_map(GenPoly::vars) {
        match v {
            Var::X(i) if usize::from(i) < entry.vars => {}
            other => return Err(bad(format!("unexpected variable {other}"))),
        }
    }
    if entry.sl {
        let det = matrix.determinant();
        if det != GenPoly::one() {
            return Err(bad(format!("declared SL but determinant is {det}")));
        }
    }
    let lambda = entry
        .lambda
        .iter()
        .map(|s| parse_exponent(s))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| bad(e.to_string()))?;
    if lambda.len() != entry.vars {
        return Err(bad(format!("{} exponents for {} variables", lambda.len(), entry.vars)));
    }
    let period = match &entry.period {
        Some(p) => {
            let v: GenPoly = parse_poly(p).map_err(|e| bad(e.to_string()))?;
            Some(v.constant_value().ok_or_else(|| bad("period is not a number".into()))?)
        }
        None => None,
    };
    let orbit = match (&entry.orbit, entry.closed_orbit) {
        (Some(rows), _) => Some(parse_matrix(rows).map_err(|e| bad(e.to_string()))?),
        (None, true) if entry.vars == 1 => Some(matrix.clone()),
        (None, true) => return Err(bad("closed_orbit needs an `orbit` map".into())),
        (None, false) => None,
    };
    if entry.closed_orbit && period.is_none() {
        return Err(bad("closed_orbit needs a period".into()));
    }
    Ok(CatalogMap {
        entry,
        matrix,
        lambda,
        period,
        orbit,
    })
}

#[derive(Clone, Debug)]
pub struct Catalog {
    maps: Vec<CatalogMap>,
}

impl Catalog {
    pub fn builtin() -> Self {
        Self::from_toml_str(BUILTIN).expect("builtin catalog is valid")
    }

    pub fn from_toml_str(s: &str) -> Result<Self, CatalogError> {
        let file: CatalogFile = toml::from_str(s)?;
        let maps = file.map.into_iter().map(validate).collect::<Result<_, _>>()?;
        Ok(Self { maps })
    }

    pub fn get(&self, name: &str) -> Result<&CatalogMap, CatalogError> {
        self.maps
            .iter()
            .find(|m| m.entry.name == name)
            .ok_or_else(|| CatalogError::UnknownMap(name.to_string()))
    }

    pub fn maps(&self) -> &[CatalogMap] {
        &self.maps
    }
}
