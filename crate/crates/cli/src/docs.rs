//! JSON input documents. A `"space"` field holds either an inline space
//! document or a path string, resolved against the referencing file's
//! directory.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use ssdb_core::{LinearRelation, PointSet, QuadraticFunctional, SsdbSpace, Subspace, Tolerance};

use crate::report::CliError;

/// A parsed document with every space reference inlined.
#[derive(Debug, Clone)]
pub struct Document {
    pub value: Value,
}

impl Document {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base: PathBuf) -> Result<Self, CliError> {
        let raw: Value = serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        Ok(Document { value: resolve(raw, &base, 0)? })
    }

    /// Hex SHA-256 of the resolved document in canonical (sorted-key) form.
    pub fn digest(&self) -> String {
        digest_of(&[&self.value.to_string()])
    }

    pub fn kind(&self) -> DocKind {
        let has = |k: &str| self.value.get(k).is_some();
        if has("points") {
            DocKind::PointSet
        } else if has("generators") {
            DocKind::Subspace
        } else if has("kind") {
            DocKind::Functional
        } else if has("graph") || has("pairs") {
            DocKind::Relation
        } else {
            DocKind::Space
        }
    }

    pub fn space(&self, tol: Tolerance) -> Result<SsdbSpace, CliError> {
        match self.value.get("space") {
            Some(inner) => parse_space(inner, tol),
            None => parse_space(&self.value, tol),
        }
    }

    pub fn subspace(&self, tol: Tolerance) -> Result<Subspace, CliError> {
        let space = self.space(tol)?;
        parse_subspace(&self.value, &space, tol)
    }

    pub fn pointset(&self, tol: Tolerance) -> Result<PointSet, CliError> {
        #[derive(Deserialize)]
        struct Raw {
            points: Vec<Vec<f64>>,
        }
        let space = self.space(tol)?;
        let raw: Raw = from_value(&self.value)?;
        Ok(PointSet::new(&space, raw.points.iter().map(|p| vector(p)).collect())?)
    }

    pub fn functional(&self, tol: Tolerance) -> Result<QuadraticFunctional, CliError> {
        let space = self.space(tol)?;
        let kind = self.value.get("kind").and_then(Value::as_str).unwrap_or_default();
        match kind {
            "qA" => {
                let sub = self.value.get("subspace").ok_or_else(|| missing("subspace"))?;
                let space = match sub.get("space") {
                    Some(s) => parse_space(s, tol)?,
                    None => space,
                };
                Ok(QuadraticFunctional::q_restricted(&parse_subspace(sub, &space, tol)?))
            }
            "quadratic" => {
                #[derive(Deserialize)]
                struct Raw {
                    #[serde(rename = "H")]
                    h: Vec<Vec<f64>>,
                    l: Option<Vec<f64>>,
                    kappa: Option<f64>,
                    dom: Option<Value>,
                }
                let raw: Raw = from_value(&self.value)?;
                let n = space.dim();
                let h = matrix(&raw.h, n)?;
                let l = raw.l.as_deref().map(vector).unwrap_or_else(|| DVector::zeros(n));
                let (dom, offset) = match &raw.dom {
                    Some(d) => {
                        let sub = parse_subspace(d, &space, tol)?;
                        let offset = match d.get("offset") {
                            Some(o) => vector(&from_value::<Vec<f64>>(o)?),
                            None => DVector::zeros(n),
                        };
                        (sub, offset)
                    }
                    None => (Subspace::whole(&space), DVector::zeros(n)),
                };
                Ok(QuadraticFunctional::new(&dom, offset, h, l, raw.kappa.unwrap_or(0.0), tol)?)
            }
            other => Err(CliError::Parse(format!("unknown functional kind {other:?} (expected \"qA\" or \"quadratic\")"))),
        }
    }

    pub fn relation(&self, tol: Tolerance) -> Result<LinearRelation, CliError> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            graph: Option<Vec<Vec<f64>>>,
            pairs: Option<Vec<Vec<f64>>>,
        }
        let raw: Raw = from_value(&self.value)?;
        match (raw.graph, raw.pairs) {
            (Some(g), None) => Ok(LinearRelation::from_graph(&matrix(&g, raw.n)?, tol)?),
            (None, Some(p)) => {
                let pairs: Vec<DVector<f64>> = p.iter().map(|x| vector(x)).collect();
                Ok(LinearRelation::from_pairs(raw.n, &pairs, tol)?)
            }
            _ => Err(CliError::Parse("relation document needs exactly one of \"graph\" or \"pairs\"".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocKind {
    Space,
    Subspace,
    PointSet,
    Functional,
    Relation,
}

pub fn digest_of(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for p in parts {
        hasher.update(p.as_bytes());
        hasher.update([0u8]);
    }
    hex::encode(hasher.finalize())
}

/// Parses `"1,-1,2"`.
pub fn parse_point(text: &str) -> Result<DVector<f64>, CliError> {
    let values: Result<Vec<f64>, _> = text.split(',').map(|s| s.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| CliError::Parse(format!("bad point {text:?}: {e}")))?;
    if values.iter().any(|v| !v.is_finite()) {
        return Err(CliError::Parse(format!("non-finite coordinate in {text:?}")));
    }
    Ok(DVector::from_vec(values))
}

const MAX_REFERENCE_DEPTH: usize = 8;

/// Inlines `"space": "path"` references, recursively.
fn resolve(mut value: Value, base: &Path, depth: usize) -> Result<Value, CliError> {
    if depth > MAX_REFERENCE_DEPTH {
        return Err(CliError::Parse("space references nested too deeply".into()));
    }
    if let Value::Object(map) = &mut value {
        for (key, child) in map.iter_mut() {
            if key == "space" {
                if let Value::String(path) = child {
                    let target = base.join(path.as_str());
                    let text = fs::read_to_string(&target)
                        .map_err(|e| CliError::Io(format!("{}: {e}", target.display())))?;
                    let inner: Value = serde_json::from_str(&text)
                        .map_err(|e| CliError::Parse(format!("{}: {e}", target.display())))?;
                    let inner_base = target.parent().map(Path::to_path_buf).unwrap_or_default();
                    *child = resolve(inner, &inner_base, depth + 1)?;
                    continue;
                }
            }
            let taken = std::mem::take(child);
            *child = resolve(taken, base, depth)?;
        }
    }
    Ok(value)
}

fn parse_space(value: &Value, tol: Tolerance) -> Result<SsdbSpace, CliError> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Explicit { dim: usize, pairing: Vec<Vec<f64>> },
        Builder { builder: String, n: Option<usize> },
    }
    let raw: Raw = from_value(value).map_err(|_| {
        CliError::Parse("space document needs {\"dim\", \"pairing\"} or {\"builder\", \"n\"}".into())
    })?;
    match raw {
        Raw::Explicit { dim, pairing } => {
            let rows = pairing.len();
            if rows != dim {
                return Err(ssdb_core::SsdbError::DimensionMismatch { expected: dim, found: rows }.into());
            }
            let cols = pairing.first().map_or(0, Vec::len);
            if pairing.iter().any(|r| r.len() != cols) {
                return Err(CliError::Parse("pairing rows have different lengths".into()));
            }
            let p = DMatrix::from_fn(rows, cols, |i, j| pairing[i][j]);
            Ok(SsdbSpace::new(p, tol)?)
        }
        Raw::Builder { builder, n } => {
            let need = |n: Option<usize>| n.ok_or_else(|| missing("n"));
            match builder.as_str() {
                "hilbert" => Ok(SsdbSpace::hilbert(need(n)?)?),
                "anti_hilbert" => Ok(SsdbSpace::anti_hilbert(need(n)?)?),
                "product" => Ok(SsdbSpace::product(need(n)?)?),
                "paper_r3" => match n {
                    None | Some(3) => Ok(SsdbSpace::paper_r3()),
                    Some(k) => Err(ssdb_core::SsdbError::DimensionMismatch { expected: 3, found: k }.into()),
                },
                other => Err(CliError::Parse(format!("unknown space builder {other:?}"))),
            }
        }
    }
}

fn parse_subspace(value: &Value, space: &SsdbSpace, tol: Tolerance) -> Result<Subspace, CliError> {
    #[derive(Deserialize)]
    struct Raw {
        generators: Vec<Vec<f64>>,
    }
    let raw: Raw = from_value(value)?;
    let gens: Vec<DVector<f64>> = raw.generators.iter().map(|g| vector(g)).collect();
    Ok(Subspace::from_generators(space, &gens, tol)?)
}

fn vector(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

/// Row-major square matrix of size `n`.
fn matrix(rows: &[Vec<f64>], n: usize) -> Result<DMatrix<f64>, CliError> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(ssdb_core::SsdbError::DimensionMismatch { expected: n, found: rows.len() }.into());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn from_value<T: serde::de::DeserializeOwned>(value: &Value) -> Result<T, CliError> {
    T::deserialize(value).map_err(|e| CliError::Parse(e.to_string()))
}

fn missing(field: &str) -> CliError {
    CliError::Parse(format!("missing field {field:?}"))
}
