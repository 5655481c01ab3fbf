//! JSON model files.
//!
//! Schema (indices are 1-based in files and converted internally):
//!
//! ```json
//! {
//!   "n": 2,
//!   "gamma": [1.0, 1.0],
//!   "A": [[0, 1], [1, 0]],
//!   "B": [[[1, 1], [1, 1]], "zero"],
//!   "beta1": 0.5,
//!   "beta2": 1.0
//! }
//! ```
//!
//! `B` entries may be the literal string `"zero"`; a missing `B` means all
//! zero. The general higher-order variant replaces `B`/`beta2` with
//! `orders`, a list of `{ "k", "beta", "hyperedges": [[i, [i1, ..., ik], w]] }`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SisError};
use crate::linalg::DenseMatrix;
use crate::model::{HigherOrderSis, Hyperedge, InteractionOrder, SimplicialSis};
use crate::scalar::Scalar;

#[derive(Debug, Serialize, Deserialize)]
struct RawModel {
    n: usize,
    gamma: Vec<f64>,
    #[serde(rename = "A")]
    a: Vec<Vec<f64>>,
    #[serde(rename = "B", default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<RawB>>,
    beta1: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    orders: Option<Vec<RawOrder>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawB {
    Zero(String),
    Dense(Vec<Vec<f64>>),
}

#[derive(Debug, Serialize, Deserialize)]
struct RawOrder {
    k: usize,
    beta: f64,
    hyperedges: Vec<(usize, Vec<usize>, f64)>,
}

/// A parsed model file: either the simplicial flavor or the general
/// higher-order one.
#[derive(Debug, Clone)]
pub enum LoadedModel<T> {
    Simplicial(SimplicialSis<T>),
    HigherOrder(HigherOrderSis<T>),
}

fn bad(msg: impl Into<String>) -> SisError {
    SisError::BadModelFile(msg.into())
}

fn to_scalar<T: Scalar>(v: f64, what: &str) -> Result<T> {
    T::from_f64(v).ok_or_else(|| bad(format!("{what} = {v} is not representable")))
}

fn parse_matrix<T: Scalar>(rows: &[Vec<f64>], n: usize, name: &str) -> Result<DenseMatrix<T>> {
    if rows.len() != n {
        return Err(bad(format!(
            "{name} must have {n} rows, got {}",
            rows.len()
        )));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != n {
            return Err(bad(format!(
                "{name} row {} must have {n} entries, got {}",
                i + 1,
                r.len()
            )));
        }
        for (j, &v) in r.iter().enumerate() {
            if !v.is_finite() {
                return Err(bad(format!("{name}[{},{}] is not finite", i + 1, j + 1)));
            }
        }
    }
    Ok(DenseMatrix::from_fn(n, |i, j| {
        T::from_f64(rows[i][j]).unwrap_or_else(T::nan)
    }))
}

/// Parse a model from JSON text. Error messages use 1-based indices.
pub fn parse_model<T: Scalar>(text: &str) -> Result<LoadedModel<T>> {
    let raw: RawModel =
        serde_json::from_str(text).map_err(|e| bad(format!("invalid JSON: {e}")))?;
    let n = raw.n;
    if n == 0 {
        return Err(bad("n must be at least 1"));
    }
    if raw.gamma.len() != n {
        return Err(bad(format!(
            "gamma must have {n} entries, got {}",
            raw.gamma.len()
        )));
    }
    for (i, &g) in raw.gamma.iter().enumerate() {
        if !g.is_finite() || g <= 0.0 {
            return Err(bad(format!("gamma[{}] must be positive, got {g}", i + 1)));
        }
    }
    let a = parse_matrix::<T>(&raw.a, n, "A")?;
    let gamma: Vec<T> = raw
        .gamma
        .iter()
        .map(|&g| to_scalar(g, "gamma"))
        .collect::<Result<_>>()?;
    let beta1 = to_scalar::<T>(raw.beta1, "beta1")?;

    if let Some(orders) = raw.orders {
        if raw.b.is_some() {
            return Err(bad(
                "a higher-order model lists its order-2 terms under `orders`; remove `B`",
            ));
        }
        if raw.beta2.is_some() {
            return Err(bad(
                "a higher-order model carries its rates inside `orders`; remove `beta2`",
            ));
        }
        let mut parsed = Vec::with_capacity(orders.len());
        for o in &orders {
            let mut edges = Vec::with_capacity(o.hyperedges.len());
            for (ei, (target, sources, weight)) in o.hyperedges.iter().enumerate() {
                let in_range = |v: usize| (1..=n).contains(&v);
                if !in_range(*target) {
                    return Err(bad(format!(
                        "orders[k={}] hyperedge {}: target {target} outside 1..={n}",
                        o.k,
                        ei + 1
                    )));
                }
                if let Some(badsrc) = sources.iter().find(|&&s| !in_range(s)) {
                    return Err(bad(format!(
                        "orders[k={}] hyperedge {}: source {badsrc} outside 1..={n}",
                        o.k,
                        ei + 1
                    )));
                }
                if !weight.is_finite() || *weight < 0.0 {
                    return Err(bad(format!(
                        "orders[k={}] hyperedge {}: weight must be nonnegative, got {weight}",
                        o.k,
                        ei + 1
                    )));
                }
                edges.push(Hyperedge {
                    target: target - 1,
                    sources: sources.iter().map(|&s| s - 1).collect(),
                    weight: to_scalar(*weight, "hyperedge weight")?,
                });
            }
            parsed.push(InteractionOrder {
                k: o.k,
                beta: to_scalar(o.beta, "order beta")?,
                edges,
            });
        }
        return Ok(LoadedModel::HigherOrder(HigherOrderSis::new(
            gamma, a, beta1, parsed,
        )?));
    }

    let beta2 = to_scalar::<T>(
        raw.beta2
            .ok_or_else(|| bad("beta2 is required for a simplicial model"))?,
        "beta2",
    )?;
    let b: Vec<DenseMatrix<T>> = match raw.b {
        None => vec![DenseMatrix::zeros(n); n],
        Some(entries) => {
            if entries.len() != n {
                return Err(bad(format!(
                    "B must list {n} matrices, got {}",
                    entries.len()
                )));
            }
            entries
                .iter()
                .enumerate()
                .map(|(i, e)| match e {
                    RawB::Zero(tag) if tag == "zero" => Ok(DenseMatrix::zeros(n)),
                    RawB::Zero(tag) => Err(bad(format!(
                        "B[{}]: unknown tag {tag:?}, expected \"zero\" or a matrix",
                        i + 1
                    ))),
                    RawB::Dense(rows) => parse_matrix::<T>(rows, n, &format!("B[{}]", i + 1)),
                })
                .collect::<Result<_>>()?
        }
    };
    Ok(LoadedModel::Simplicial(SimplicialSis::new(
        gamma, a, b, beta1, beta2,
    )?))
}

/// Load a model file from disk.
pub fn load_model<T: Scalar>(path: &Path) -> Result<LoadedModel<T>> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}

/// Serialize a simplicial model to the file schema (pretty JSON, trailing
/// newline, all-zero `B_i` written as `"zero"`). Output is deterministic.
pub fn model_to_json<T: Scalar>(m: &SimplicialSis<T>) -> String {
    let n = m.n();
    let to64 = |v: T| v.to_f64().expect("finite model entry");
    let raw = RawModel {
        n,
        gamma: m.gamma().iter().map(|&g| to64(g)).collect(),
        a: (0..n)
            .map(|i| (0..n).map(|j| to64(m.a()[(i, j)])).collect())
            .collect(),
        b: Some(
            m.b()
                .iter()
                .map(|bi| {
                    if bi.is_nonnegative() && bi.iter_entries().all(|(_, _, v)| v == T::zero()) {
                        RawB::Zero("zero".to_string())
                    } else {
                        RawB::Dense(
                            (0..n)
                                .map(|j| (0..n).map(|k| to64(bi[(j, k)])).collect())
                                .collect(),
                        )
                    }
                })
                .collect(),
        ),
        beta1: to64(m.beta1()),
        beta2: Some(to64(m.beta2())),
        orders: None,
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("model serializes");
    text.push('\n');
    text
}

/// Write a simplicial model file.
pub fn save_model<T: Scalar>(m: &SimplicialSis<T>, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_json(m))?;
    Ok(())
}
