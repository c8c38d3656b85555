// SPDX-License-Identifier: Apache-2.0

//! The four subcommands, each producing a report and an exit code.

use chiralwalk_core::eigenstate::{series_branch, EigenstateError};
use chiralwalk_core::fredholm::merge_bands;
use chiralwalk_core::verify::{verify_operator, verify_splitstep, CheckStatus, VerifyOptions, VerifyReport};
use chiralwalk_core::{
    build_eigenstate, essential_spectrum_bands, essential_spectrum_cloud, fredholm_index, Band, Branch, EigenstateBundle, FredholmError,
    IndexReport, SamplingOptions, Side, Sign, SpectralBands, SplitStepModel, StrictlyLocalOperator,
};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::exit;
use crate::model::{LoadedModel, ModelError, ModelKind};
use crate::plot;
use crate::report::{num, ReportEnvelope};

pub const DEFAULT_SAMPLES: usize = 1024;
pub const DEFAULT_WINDOW: i64 = 128;
pub const DEFAULT_ORACLE_CELLS: usize = 64;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    NotFredholm(String),
    #[error("{0}")]
    ZeroIndex(String),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
    #[error("{0}")]
    Engine(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Model(ModelError::Io { .. }) | CliError::Output { .. } => exit::IO,
            CliError::Model(_) | CliError::Usage(_) => exit::SCHEMA,
            CliError::NotFredholm(_) => exit::NOT_FREDHOLM,
            CliError::ZeroIndex(_) => exit::ZERO_INDEX,
            CliError::Engine(_) => exit::FAILURE,
        }
    }
}

fn engine(e: impl std::fmt::Display) -> CliError {
    CliError::Engine(e.to_string())
}

/// A finished command: the report plus any file payloads requested.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: ReportEnvelope,
    pub exit_code: i32,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

impl Outcome {
    fn new(report: ReportEnvelope, exit_code: i32) -> Self {
        Self { report, exit_code, csv: None, svg: None }
    }
}

fn params(pairs: &[(&str, Value)]) -> Map<String, Value> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn side_map(mut f: impl FnMut(Side) -> Value) -> Value {
    let mut o = Map::new();
    for side in Side::BOTH {
        o.insert(side.name().into(), f(side));
    }
    Value::Object(o)
}

fn intervals(bands: &[Band]) -> Value {
    Value::Array(bands.iter().map(|b| json!([num(b.lo), num(b.hi)])).collect())
}

fn index_json(r: &IndexReport) -> Value {
    json!({
        "fredholm": r.fredholm,
        "wn_left": r.wn_left,
        "wn_right": r.wn_right,
        "index": r.index,
        "min_abs_det": num(r.min_abs_det),
    })
}

pub fn index(model: &LoadedModel, samples: usize) -> Result<Outcome, CliError> {
    let opts = SamplingOptions::with_samples(samples);
    let mut report = ReportEnvelope::new("index", &model.digest, params(&[("samples", json!(samples))]));
    let fredholm = match &model.kind {
        ModelKind::SplitStep(m) => splitstep_index(m, &opts, &mut report)?,
        ModelKind::StrictlyLocal(op) => {
            let r = fredholm_index(op, &opts).map_err(engine)?;
            report.warnings.extend(r.warnings.iter().map(|w| w.to_string()));
            report.results = index_json(&r);
            r.fredholm
        }
    };
    Ok(Outcome::new(report, if fredholm { exit::OK } else { exit::NOT_FREDHOLM }))
}

fn branch_index(branch: Option<Branch>) -> i64 {
    match branch {
        Some(Branch::First) => 1,
        Some(Branch::Second) => -1,
        None => 0,
    }
}

fn splitstep_index(m: &SplitStepModel, opts: &SamplingOptions, report: &mut ReportEnvelope) -> Result<bool, CliError> {
    let r = m.index_pm(opts).map_err(engine)?;
    report.warnings.extend(r.warnings.iter().map(|w| w.to_string()));
    let mut results = Map::new();
    let mut failures = Vec::new();
    let mut all_agree = true;
    for sign in Sign::BOTH {
        let s = r.sign(sign);
        let series = if s.fredholm { series_branch(m, sign) } else { Ok(None) };
        let (branch, series_index) = match series {
            Ok(b) if s.fredholm => (json!(b.map(Branch::number)), Some(branch_index(b))),
            Ok(_) => (Value::Null, None),
            Err(e) => {
                report.warnings.push(format!("series branch for sign {sign} unavailable: {e}"));
                (Value::Null, None)
            }
        };
        let agree = s.agree && series_index.is_none_or(|i| Some(i) == s.index);
        all_agree &= agree;
        let mut balances = Map::new();
        for b in &s.balances {
            balances.insert(
                b.side.name().into(),
                json!({
                    "log_first": num(b.log_first),
                    "log_second": num(b.log_second),
                    "positive": b.positive,
                    "fredholm": b.fredholm,
                    "gap": num(b.gap),
                }),
            );
            if !(b.positive && b.fredholm) {
                failures.push(json!({"sign": sign.name(), "side": b.side.name()}));
            }
        }
        results.insert(format!("ind_{}", sign.name()), json!(s.index));
        results.insert(
            sign.name().into(),
            json!({
                "fredholm": s.fredholm,
                "index": s.index,
                "balances": balances,
                "winding": index_json(&s.winding),
                "series_branch": branch,
                "series_index": series_index,
                "agree": agree,
            }),
        );
    }
    results.insert(
        "limits".into(),
        side_map(|side| match &r.limits[side_slot(side)] {
            Some(t) => json!({"p": num(t.p), "a": num(t.a)}),
            None => Value::Null,
        }),
    );
    let fredholm = r.fredholm();
    results.insert("fredholm".into(), json!(fredholm));
    results.insert("routes_agree".into(), json!(all_agree));
    if !fredholm {
        results.insert("not_fredholm".into(), Value::Array(failures));
    }
    report.results = Value::Object(results);
    Ok(fredholm)
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

pub fn spectrum(model: &LoadedModel, samples: usize) -> Result<Outcome, CliError> {
    let opts = SamplingOptions::with_samples(samples);
    let mut report = ReportEnvelope::new("spectrum", &model.digest, params(&[("samples", json!(samples))]));
    let mut outcome = Outcome::new(report.clone(), exit::OK);
    match &model.kind {
        ModelKind::SplitStep(m) => {
            let s = m.essential_spectrum_u(&opts).map_err(engine)?;
            let mut results = Map::new();
            results.insert("bands".into(), intervals(&s.intervals));
            results.insert("arcs".into(), Value::Array(s.arcs.iter().map(|a| json!([num(a.theta_lo), num(a.theta_hi)])).collect()));
            results.insert("resolution".into(), num(s.resolution));
            let mut sides = Map::new();
            for side in Side::BOTH {
                sides.insert(side.name().into(), side_spectrum(m, side, &opts, &mut report.warnings)?);
            }
            results.insert("sides".into(), Value::Object(sides));
            report.results = Value::Object(results);
            outcome.csv = Some(plot::bands_csv(&s.intervals, &s.arcs));
            outcome.svg = Some(plot::spectrum_svg(&s.arcs));
        }
        ModelKind::StrictlyLocal(op) => {
            report.results = operator_spectrum(op, &opts, &mut outcome)?;
        }
    }
    outcome.report = report;
    Ok(outcome)
}

fn side_spectrum(m: &SplitStepModel, side: Side, opts: &SamplingOptions, warnings: &mut Vec<String>) -> Result<Value, CliError> {
    let sampled = m.real_part_bands(&[side], &Sign::BOTH, opts).map_err(engine)?;
    let closed = match m.closed_bands(side) {
        Ok(cb) => {
            let tol = opts.merge_tol + sampled.resolution;
            let merged = merge_bands(cb.intervals.clone(), tol);
            let discrepancy = endpoint_discrepancy(&merged, &sampled);
            if discrepancy.is_none() {
                warnings.push(format!("{side} tail: {} closed-form bands against {} sampled bands", merged.len(), sampled.intervals.len()));
            }
            json!({
                "intervals": intervals(&cb.intervals),
                "singleton": cb.singleton,
                "connected": cb.connected,
                "gap": cb.gap.map(num),
                "max_endpoint_discrepancy": discrepancy.map(num),
            })
        }
        Err(_) => Value::Null,
    };
    Ok(json!({
        "period": m.period(side),
        "bands": intervals(&sampled.intervals),
        "resolution": num(sampled.resolution),
        "closed_form": closed,
    }))
}

/// Largest endpoint distance between two band lists of equal length.
pub fn endpoint_discrepancy(closed: &[Band], sampled: &SpectralBands) -> Option<f64> {
    if closed.len() != sampled.intervals.len() {
        return None;
    }
    Some(closed.iter().zip(&sampled.intervals).map(|(c, s)| (c.lo - s.lo).abs().max((c.hi - s.hi).abs())).fold(0.0, f64::max))
}

fn operator_spectrum(op: &StrictlyLocalOperator, opts: &SamplingOptions, outcome: &mut Outcome) -> Result<Value, CliError> {
    match essential_spectrum_bands(op, opts) {
        Ok(b) => {
            outcome.csv = Some(plot::bands_csv(&b.intervals, &[]));
            Ok(json!({"hermitian": true, "bands": intervals(&b.intervals), "resolution": num(b.resolution)}))
        }
        Err(FredholmError::NotHermitianFamily { .. }) => {
            let cloud = essential_spectrum_cloud(op, opts.samples).map_err(engine)?;
            outcome.csv = Some(plot::cloud_csv(&cloud));
            let points: Vec<Value> = cloud
                .points
                .iter()
                .map(|p| {
                    json!({
                        "side": p.side.name(),
                        "theta": num(p.z.arg().rem_euclid(std::f64::consts::TAU)),
                        "re": num(p.value.re),
                        "im": num(p.value.im),
                    })
                })
                .collect();
            Ok(json!({"hermitian": false, "cloud": points, "angular_step": num(cloud.angular_step)}))
        }
        Err(e) => Err(engine(e)),
    }
}

pub fn eigenstate(model: &LoadedModel, sign: Sign, window: i64) -> Result<Outcome, CliError> {
    let ModelKind::SplitStep(m) = &model.kind else {
        return Err(CliError::Usage("eigenstate needs a splitstep model".into()));
    };
    if window < 2 {
        return Err(CliError::Usage(format!("window {window} is too small; use at least 2")));
    }
    let mut report = ReportEnvelope::new("eigenstate", &model.digest, params(&[("sign", json!(sign.name())), ("window", json!(window))]));
    let (bundle, code) = match build_eigenstate(m, sign, (-window, window)) {
        Ok(b) => (b, exit::OK),
        Err(EigenstateError::WindowTooSmall { bundle, .. }) => (*bundle, exit::WINDOW),
        Err(e @ EigenstateError::ZeroIndex { .. }) => return Err(CliError::ZeroIndex(e.to_string())),
        Err(e @ EigenstateError::FredholmViolated { .. }) => return Err(CliError::NotFredholm(e.to_string())),
        Err(e @ (EigenstateError::SupremumViolated { .. } | EigenstateError::BadWindow { .. })) => {
            return Err(CliError::Usage(e.to_string()))
        }
        Err(e) => return Err(engine(e)),
    };
    report.warnings.extend(bundle.warnings.iter().map(|w| w.to_string()));
    report.results = eigenstate_json(&bundle);
    let mut outcome = Outcome::new(report, code);
    outcome.csv = Some(plot::eigenstate_csv(&bundle));
    Ok(outcome)
}

fn eigenstate_json(b: &EigenstateBundle) -> Value {
    let certificate = b.certificate.as_ref().map(|c| {
        json!({
            "delta_lo": num(c.delta_lo),
            "delta_hi": num(c.delta_hi),
            "lambda_lo": num(c.lambda_lo),
            "lambda_hi": num(c.lambda_hi),
            "epsilon": num(c.epsilon),
            "c_lo": num(c.c_lo),
            "c_hi": num(c.c_hi),
            "kappa_lo": num(c.kappa_lo),
            "kappa_hi": num(c.kappa_hi),
            "onset": c.onset,
        })
    });
    json!({
        "sign": b.sign.name(),
        "branch": b.branch.number(),
        "index": branch_index(Some(b.branch)),
        "window": [b.window.0, b.window.1],
        "residual": num(b.residual),
        "boundary_fraction": num(b.boundary_fraction),
        "certificate": certificate,
    })
}

pub fn verify(model: &LoadedModel, oracle_cells: usize, samples: usize) -> Result<Outcome, CliError> {
    if oracle_cells == 0 {
        return Err(CliError::Usage("--oracle-cells must be positive".into()));
    }
    let opts = VerifyOptions { oracle_cells, sampling: SamplingOptions::with_samples(samples), ..VerifyOptions::default() };
    let mut report =
        ReportEnvelope::new("verify", &model.digest, params(&[("oracle_cells", json!(oracle_cells)), ("samples", json!(samples))]));
    let r = match &model.kind {
        ModelKind::SplitStep(m) => verify_splitstep(m, &opts),
        ModelKind::StrictlyLocal(op) => verify_operator(op, &opts),
    }
    .map_err(engine)?;
    report.results = verify_json(&r);
    let code = if r.all_passed() { exit::OK } else { exit::VERIFY_FAILED };
    Ok(Outcome::new(report, code))
}

fn verify_json(r: &VerifyReport) -> Value {
    let checks: Vec<Value> = r
        .checks
        .iter()
        .map(|c| {
            let (status, reason) = match &c.status {
                CheckStatus::Passed => ("passed", Value::Null),
                CheckStatus::Failed => ("failed", Value::Null),
                CheckStatus::Skipped(why) => ("skipped", json!(why)),
            };
            json!({
                "name": c.name,
                "defect": num(c.defect),
                "tolerance": num(c.tolerance),
                "status": status,
                "reason": reason,
            })
        })
        .collect();
    json!({"all_passed": r.all_passed(), "checks": checks})
}
