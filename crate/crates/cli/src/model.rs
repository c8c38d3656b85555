// SPDX-License-Identifier: Apache-2.0

//! Model files: JSON ingestion with path-qualified diagnostics.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use chiralwalk_core::lattice::{OperatorDraft, PeriodicTailSequence, Side, Violation};
use chiralwalk_core::numkernel::{ComplexMatrix, C64};
use chiralwalk_core::splitstep::{SlotRef, SplitStepError};
use chiralwalk_core::{SplitStepModel, StrictlyLocalOperator};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::report::canonical_json;

/// One problem in a model file, located by a JSON path such as
/// `$.p.left_period[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Issue {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("schema error: {}", join(.0))]
    Schema(Vec<Issue>),
    #[error("range error: {}", join(.0))]
    Range(Vec<Issue>),
}

fn join(issues: &[Issue]) -> String {
    issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
}

impl ModelError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            ModelError::Io { .. } => &[],
            ModelError::Schema(v) | ModelError::Range(v) => v,
        }
    }
}

#[derive(Debug, Clone)]
pub enum ModelKind {
    SplitStep(SplitStepModel),
    StrictlyLocal(StrictlyLocalOperator),
}

/// A validated model together with the digest of its canonical form.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub kind: ModelKind,
    /// Hex SHA-256 of the canonical serialization of the input document.
    pub digest: String,
}

impl LoadedModel {
    pub fn kind_name(&self) -> &'static str {
        match self.kind {
            ModelKind::SplitStep(_) => "splitstep",
            ModelKind::StrictlyLocal(_) => "strictly_local",
        }
    }
}

pub fn load_model(path: &Path) -> Result<LoadedModel, ModelError> {
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io { path: path.display().to_string(), source })?;
    parse_model(&text)
}

pub fn parse_model(text: &str) -> Result<LoadedModel, ModelError> {
    let doc: Value = serde_json::from_str(text)
        .map_err(|e| ModelError::Schema(vec![Issue { path: "$".into(), message: format!("invalid JSON: {e}") }]))?;
    let digest = hex::encode(Sha256::digest(canonical_json(&doc, false).as_bytes()));
    let mut cx = Checker::default();
    let root = cx.object(&doc, "$");
    let kind = root.and_then(|o| cx.string(o, "kind", "$"));
    let parsed = match (root, kind) {
        (Some(o), Some("splitstep")) => {
            cx.allow_only(o, "$", &["kind", "p", "a"]);
            parse_splitstep(&mut cx, o)
        }
        (Some(o), Some("strictly_local")) => {
            cx.allow_only(o, "$", &["kind", "n", "k0", "coeffs"]);
            parse_strictly_local(&mut cx, o)
        }
        (_, Some(other)) => {
            cx.fail("$.kind", format!("unknown kind {other:?}, expected \"splitstep\" or \"strictly_local\""));
            None
        }
        _ => None,
    };
    if !cx.issues.is_empty() {
        return Err(ModelError::Schema(cx.issues));
    }
    let kind = parsed.expect("no schema issues implies a parsed model")?;
    Ok(LoadedModel { kind, digest })
}

#[derive(Default)]
struct Checker {
    issues: Vec<Issue>,
}

impl Checker {
    fn fail(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.issues.push(Issue { path: path.into(), message: message.into() });
    }

    fn object<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v Map<String, Value>> {
        match v.as_object() {
            Some(o) => Some(o),
            None => {
                self.fail(path, "expected an object");
                None
            }
        }
    }

    fn field<'v>(&mut self, o: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v Value> {
        let v = o.get(key);
        if v.is_none() {
            self.fail(path, format!("missing field {key:?}"));
        }
        v
    }

    fn string<'v>(&mut self, o: &'v Map<String, Value>, key: &str, path: &str) -> Option<&'v str> {
        let v = self.field(o, key, path)?;
        let s = v.as_str();
        if s.is_none() {
            self.fail(format!("{path}.{key}"), "expected a string");
        }
        s
    }

    fn integer(&mut self, v: &Value, path: &str) -> Option<i64> {
        let i = v.as_i64();
        if i.is_none() {
            self.fail(path, "expected an integer");
        }
        i
    }

    fn real(&mut self, v: &Value, path: &str) -> Option<f64> {
        let x = v.as_f64();
        if x.is_none() {
            self.fail(path, "expected a number");
        }
        x
    }

    fn array<'v>(&mut self, v: &'v Value, path: &str) -> Option<&'v [Value]> {
        match v.as_array() {
            Some(a) => Some(a),
            None => {
                self.fail(path, "expected an array");
                None
            }
        }
    }

    fn allow_only(&mut self, o: &Map<String, Value>, path: &str, keys: &[&str]) {
        for k in o.keys() {
            if !keys.contains(&k.as_str()) {
                self.fail(format!("{path}.{k}"), "unknown field");
            }
        }
    }

    /// Reads `{left_period, right_period, core?: {start, values}}`, with
    /// `item` parsing one element.
    fn sequence<T: Clone>(
        &mut self,
        v: &Value,
        path: &str,
        mut item: impl FnMut(&mut Self, &Value, &str) -> Option<T>,
    ) -> Option<PeriodicTailSequence<T>> {
        let o = self.object(v, path)?;
        self.allow_only(o, path, &["left_period", "right_period", "core"]);
        let mut list = |cx: &mut Self, v: &Value, path: &str, nonempty: bool| -> Option<Vec<T>> {
            let arr = cx.array(v, path)?;
            if nonempty && arr.is_empty() {
                cx.fail(path, "a period must have at least one value");
                return None;
            }
            let out: Vec<Option<T>> = arr.iter().enumerate().map(|(i, x)| item(cx, x, &format!("{path}[{i}]"))).collect();
            out.into_iter().collect()
        };
        let left = self.field(o, "left_period", path).and_then(|v| list(self, v, &format!("{path}.left_period"), true));
        let right = self.field(o, "right_period", path).and_then(|v| list(self, v, &format!("{path}.right_period"), true));
        let (start, core) = match o.get("core") {
            None => (Some(0), Some(Vec::new())),
            Some(c) => {
                let cp = format!("{path}.core");
                match self.object(c, &cp) {
                    None => (None, None),
                    Some(co) => {
                        self.allow_only(co, &cp, &["start", "values"]);
                        let start = self.field(co, "start", &cp).and_then(|s| self.integer(s, &format!("{cp}.start")));
                        let values = self.field(co, "values", &cp).and_then(|vs| list(self, vs, &format!("{cp}.values"), false));
                        (start, values)
                    }
                }
            }
        };
        PeriodicTailSequence::new(start?, core?, left?, right?).ok()
    }
}

fn parse_splitstep(cx: &mut Checker, o: &Map<String, Value>) -> Option<Result<ModelKind, ModelError>> {
    let real = |cx: &mut Checker, v: &Value, path: &str| cx.real(v, path);
    let p = cx.field(o, "p", "$").and_then(|v| cx.sequence(v, "$.p", real));
    let a = cx.field(o, "a", "$").and_then(|v| cx.sequence(v, "$.a", real));
    let (p, a) = (p?, a?);
    Some(match SplitStepModel::new(p, a) {
        Ok(m) => Ok(ModelKind::SplitStep(m)),
        Err(SplitStepError::Range(v)) => Err(ModelError::Range(
            v.iter()
                .map(|r| {
                    let slot = match r.slot {
                        SlotRef::Core(i) => format!("core.values[{i}]"),
                        SlotRef::LeftPeriod(i) => format!("left_period[{i}]"),
                        SlotRef::RightPeriod(i) => format!("right_period[{i}]"),
                    };
                    Issue { path: format!("$.{}.{slot}", r.field), message: format!("{} is outside [-1, 1]", r.value) }
                })
                .collect(),
        )),
        Err(e) => Err(ModelError::Range(vec![Issue { path: "$".into(), message: e.to_string() }])),
    })
}

fn parse_matrix(cx: &mut Checker, v: &Value, path: &str) -> Option<ComplexMatrix> {
    let rows = cx.array(v, path)?;
    let cols = rows.first().and_then(|r| r.as_array()).map_or(0, |r| r.len());
    let mut data = Vec::with_capacity(rows.len() * cols);
    let mut ok = true;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let Some(entries) = cx.array(row, &rp) else {
            ok = false;
            continue;
        };
        if entries.len() != cols {
            cx.fail(&rp, format!("row has {} entries, expected {cols}", entries.len()));
            ok = false;
            continue;
        }
        for (j, e) in entries.iter().enumerate() {
            let ep = format!("{rp}[{j}]");
            match e.as_array().map(|p| p.as_slice()) {
                Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                    (Some(re), Some(im)) => data.push(C64::new(re, im)),
                    _ => {
                        cx.fail(&ep, "expected a pair of numbers [re, im]");
                        ok = false;
                    }
                },
                _ => {
                    cx.fail(&ep, "expected a pair of numbers [re, im]");
                    ok = false;
                }
            }
        }
    }
    if !ok {
        return None;
    }
    ComplexMatrix::from_vec(rows.len(), cols, data).ok()
}

fn parse_strictly_local(cx: &mut Checker, o: &Map<String, Value>) -> Option<Result<ModelKind, ModelError>> {
    let n = cx.field(o, "n", "$").and_then(|v| cx.integer(v, "$.n"));
    let k0 = cx.field(o, "k0", "$").and_then(|v| cx.integer(v, "$.k0"));
    if let Some(n) = n.filter(|&n| n < 1) {
        cx.fail("$.n", format!("dimension {n} must be at least 1"));
    }
    if let Some(k0) = k0.filter(|&k| k < 0) {
        cx.fail("$.k0", format!("bandwidth {k0} must be non-negative"));
    }
    let coeffs = cx.field(o, "coeffs", "$").and_then(|v| cx.object(v, "$.coeffs"));
    let mut bands = BTreeMap::new();
    if let Some(coeffs) = coeffs {
        if coeffs.is_empty() {
            cx.fail("$.coeffs", "at least one band is required");
        }
        for (key, v) in coeffs {
            let path = format!("$.coeffs.{key}");
            let Ok(k) = key.parse::<i64>() else {
                cx.fail(&path, "band keys must be integers");
                continue;
            };
            if let Some(seq) = cx.sequence(v, &path, parse_matrix) {
                bands.insert(k, seq);
            }
        }
    }
    let (n, k0) = (n?, k0?);
    if n < 1 || k0 < 0 || !cx.issues.is_empty() {
        return None;
    }
    let draft = OperatorDraft { n: n as usize, k0: k0 as usize, coeffs: bands };
    Some(draft.validate().map(ModelKind::StrictlyLocal).map_err(|v| violation_error(&v)))
}

fn violation_error(violations: &[Violation]) -> ModelError {
    let mut schema = Vec::new();
    let mut range = Vec::new();
    for v in violations {
        let located = |k: i64, loc: &str| format!("$.coeffs.{k}.{}", loc.replacen("core[", "core.values[", 1));
        match v {
            Violation::ZeroDimension => schema.push(Issue { path: "$.n".into(), message: v.to_string() }),
            Violation::BandOutOfRange { k, .. } => range.push(Issue { path: format!("$.coeffs.{k}"), message: v.to_string() }),
            Violation::Shape { k, location, .. } => schema.push(Issue { path: located(*k, location), message: v.to_string() }),
            Violation::NonFinite { k, location } => range.push(Issue { path: located(*k, location), message: v.to_string() }),
            Violation::PeriodMismatch { k, side, .. } => {
                let field = match side {
                    Side::Left => "left_period",
                    Side::Right => "right_period",
                };
                schema.push(Issue { path: format!("$.coeffs.{k}.{field}"), message: v.to_string() })
            }
        }
    }
    if schema.is_empty() {
        ModelError::Range(range)
    } else {
        schema.extend(range);
        ModelError::Schema(schema)
    }
}
