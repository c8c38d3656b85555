// SPDX-License-Identifier: Apache-2.0

//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion fails that is not listed in `KNOWN_FAILURES`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use chiralwalk_core::fredholm::{merge_bands, phase};
use chiralwalk_core::numkernel::{determinant, unitarity_defect, ComplexMatrix, C64};
use chiralwalk_core::oracle::{circulant_spectrum, geometric_mean_limit};
use chiralwalk_core::{
    essential_spectrum_bands, essential_spectrum_cloud, fredholm_index, lambda_map, PeriodicTailSequence, SamplingOptions, Side, Sign,
    SplitStepModel, StrictlyLocalOperator,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

/// Criteria that cannot be met as stated; see the project notes.
const KNOWN_FAILURES: &[(u32, &str)] = &[(8, "at x = 10^6 the last, incomplete period of (1, 2, 4) alone moves the mean to 2^0.999999")];

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_chiralwalk")
}

struct Run {
    code: i32,
    stdout: Vec<u8>,
    json: Value,
}

fn chiralwalk(args: &[&str]) -> Run {
    let out = Command::new(bin()).args(args).env_remove("CHIRALWALK_SAMPLES").output().expect("binary runs");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    Run { code: out.status.code().unwrap_or(-1), stdout: out.stdout, json }
}

fn write_model(dir: &Path, name: &str, model: &Value) -> PathBuf {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(model).unwrap()).unwrap();
    path
}

fn splitstep_json(p: (&[f64], &[f64]), a: (&[f64], &[f64])) -> Value {
    json!({
        "kind": "splitstep",
        "p": {"left_period": p.0, "right_period": p.1},
        "a": {"left_period": a.0, "right_period": a.1},
    })
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn domain_wall(dir: &Path) -> PathBuf {
    write_model(dir, "domain_wall", &splitstep_json((&[-0.5], &[0.5]), (&[0.0], &[0.0])))
}

fn criterion_1(dir: &Path) -> Verdict {
    let path = domain_wall(dir);
    let r = chiralwalk(&["index", path.to_str().unwrap()]);
    let res = &r.json["results"];
    let mut ok = r.code == 0;
    let mut parts = Vec::new();
    for sign in ["plus", "minus"] {
        let s = &res[sign];
        let routes = [&s["index"], &s["winding"]["index"], &s["series_index"]];
        ok &= routes.iter().all(|v| v.as_i64() == Some(1));
        parts.push(format!("{sign}: closed {} winding {} series {}", routes[0], routes[1], routes[2]));
    }
    ok &= res["ind_plus"] == 1 && res["ind_minus"] == 1;
    Verdict::new(ok, format!("exit {}; {}", r.code, parts.join("; ")))
}

fn criterion_2(dir: &Path) -> Verdict {
    let path = domain_wall(dir);
    let mut ok = true;
    let mut parts = Vec::new();
    for sign in ["plus", "minus"] {
        let csv = dir.join(format!("state_{sign}.csv"));
        let r = chiralwalk(&["eigenstate", path.to_str().unwrap(), "--sign", sign, "--window", "128", "--csv", csv.to_str().unwrap()]);
        let res = &r.json["results"];
        let residual = num(&res["residual"]);
        let cert = &res["certificate"];
        let onset = cert["onset"].as_u64().unwrap_or(u64::MAX);
        let text = std::fs::read_to_string(&csv).unwrap_or_default();
        let rows: Vec<(i64, f64)> = text
            .lines()
            .skip(1)
            .map(|l| {
                let cols: Vec<&str> = l.split(',').collect();
                (cols[0].parse().unwrap(), cols[7].parse().unwrap())
            })
            .collect();
        let norm = |x: i64| rows.iter().find(|r| r.0 == x).map(|r| r.1).unwrap_or(f64::NAN);
        // outward ratios on both tails
        let mut ratio_err: f64 = 0.0;
        for x in 0..128 {
            ratio_err = ratio_err.max((norm(x + 1) / norm(x) - 1.0 / 3.0).abs());
            ratio_err = ratio_err.max((norm(-x - 1) / norm(-x) - 1.0 / 3.0).abs());
        }
        let (k_lo, k_hi, c_lo, c_hi) = (num(&cert["kappa_lo"]), num(&cert["kappa_hi"]), num(&cert["c_lo"]), num(&cert["c_hi"]));
        let sandwich = rows.iter().filter(|(x, _)| x.unsigned_abs() >= onset && x.abs() <= 126).all(|&(x, v)| {
            let d = x.abs() as f64;
            let slack = 1e-12 * v;
            k_lo * (-c_lo * d).exp() <= v + slack && v <= k_hi * (-c_hi * d).exp() + slack
        });
        ok &= r.code == 0 && residual <= 1e-8 && ratio_err <= 1e-10 && onset <= 4 && sandwich;
        parts.push(format!(
            "{sign}: residual {residual:.2e}, ratio error {ratio_err:.2e}, onset {onset}, sandwich {}",
            if sandwich { "holds" } else { "violated" }
        ));
    }
    Verdict::new(ok, parts.join("; "))
}

fn random_tail(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-0.95..0.95)).collect()
}

fn random_sequence(rng: &mut ChaCha8Rng, left: usize, right: usize) -> PeriodicTailSequence<f64> {
    let core_len = rng.gen_range(0..=3);
    let start = rng.gen_range(-2..=0);
    let core = random_tail(rng, core_len);
    PeriodicTailSequence::new(start, core, random_tail(rng, left), random_tail(rng, right)).unwrap()
}

fn random_model(rng: &mut ChaCha8Rng, periods: impl Fn(&mut ChaCha8Rng) -> (usize, usize)) -> SplitStepModel {
    let (pl, pr) = periods(rng);
    let p = random_sequence(rng, pl, pr);
    let (al, ar) = periods(rng);
    let a = random_sequence(rng, al, ar);
    SplitStepModel::new(p, a).unwrap()
}

fn criterion_3() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let opts = SamplingOptions::with_samples(4096);
    let (mut ring_worst, mut cloud_worst, mut closed_worst, mut res_worst) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut closed_within_resolution = true;
    let mut failures = Vec::new();
    for i in 0..50 {
        let m = random_model(&mut rng, |_| (2, 2));
        let s = match m.essential_spectrum_u(&opts) {
            Ok(s) => s,
            Err(e) => {
                failures.push(format!("model {i}: {e}"));
                continue;
            }
        };
        let u = m.evolution_operator();
        let arc_gap = |z: C64| s.arc_distance(z.arg()).max((z.norm() - 1.0).abs());
        match essential_spectrum_cloud(&u, 4096) {
            Ok(cloud) => {
                for p in &cloud.points {
                    cloud_worst = cloud_worst.max(arc_gap(p.value));
                }
            }
            Err(e) => failures.push(format!("model {i} cloud: {e}")),
        }
        for side in Side::BOTH {
            match circulant_spectrum(&u.periodic_part(side), side, 32) {
                Ok(ring) => {
                    for z in ring {
                        ring_worst = ring_worst.max(arc_gap(z));
                    }
                }
                Err(e) => failures.push(format!("model {i} ring: {e}")),
            }
            let sampled = m.real_part_bands(&[side], &Sign::BOTH, &opts).unwrap();
            let closed = merge_bands(m.closed_bands(side).unwrap().intervals, opts.merge_tol + sampled.resolution);
            res_worst = res_worst.max(sampled.resolution);
            if closed.len() != sampled.intervals.len() {
                failures.push(format!("model {i} {side}: {} closed vs {} sampled bands", closed.len(), sampled.intervals.len()));
                continue;
            }
            for (c, b) in closed.iter().zip(&sampled.intervals) {
                let d = (c.lo - b.lo).abs().max((c.hi - b.hi).abs());
                closed_worst = closed_worst.max(d);
                closed_within_resolution &= d <= sampled.resolution;
            }
        }
    }
    let ok = failures.is_empty() && ring_worst <= 1e-8 && cloud_worst <= 1e-8 && closed_within_resolution && res_worst <= 1e-6;
    let mut detail = format!(
        "ring off-arc {ring_worst:.2e}, cloud off-arc {cloud_worst:.2e}, closed-vs-sampled {closed_worst:.2e} (resolution {res_worst:.1e})"
    );
    if !failures.is_empty() {
        detail.push_str(&format!("; {}", failures.join("; ")));
    }
    Verdict::new(ok, detail)
}

fn criterion_4(dir: &Path) -> Verdict {
    let m = SplitStepModel::periodic(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
    let s = m.essential_spectrum_u(&SamplingOptions::default()).unwrap();
    let closed = m.closed_bands(Side::Left).unwrap();
    let expect = [-FRAC_1_SQRT_2, FRAC_1_SQRT_2];
    let mut err: f64 = 0.0;
    let mut ok = s.intervals.len() == 2 && closed.singleton;
    for (b, e) in s.intervals.iter().zip(expect) {
        err = err.max((b.lo - e).abs()).max((b.hi - e).abs());
    }
    for (b, e) in closed.intervals.iter().zip(expect) {
        err = err.max((b.lo - e).abs()).max((b.hi - e).abs());
    }
    let path = write_model(dir, "flat", &splitstep_json((&[1.0, 0.0], &[1.0, 0.0]), (&[0.0], &[0.0])));
    let r = chiralwalk(&["spectrum", path.to_str().unwrap()]);
    for (b, e) in r.json["results"]["bands"].as_array().into_iter().flatten().zip(expect) {
        err = err.max((num(&b[0]) - e).abs()).max((num(&b[1]) - e).abs());
    }
    ok &= r.code == 0 && r.json["results"]["bands"].as_array().map_or(0, |v| v.len()) == 2 && err <= 1e-12;
    Verdict::new(ok, format!("{} bands, max |endpoint - (±√2/2)| = {err:.2e}", s.intervals.len()))
}

fn criterion_5(dir: &Path) -> Verdict {
    let path = write_model(dir, "gapless", &splitstep_json((&[0.0], &[0.0]), (&[0.0], &[0.0])));
    let s = chiralwalk(&["spectrum", path.to_str().unwrap()]);
    let arcs = s.json["results"]["arcs"].clone();
    let full = arcs.as_array().is_some_and(|a| a.len() == 1 && num(&a[0][0]) == 0.0 && num(&a[0][1]) == TAU);
    let i = chiralwalk(&["index", path.to_str().unwrap()]);
    let plus = &i.json["results"]["plus"]["fredholm"];
    let minus = &i.json["results"]["minus"]["fredholm"];
    let ok = full && i.code == 4 && *plus == false && *minus == false;
    Verdict::new(ok, format!("arcs {arcs}, index exit {}", i.code))
}

fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut unit, mut chiral, mut det_rel) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..512 {
        let m = random_model(&mut rng, |r| (r.gen_range(1..=3), r.gen_range(1..=3)));
        let u = m.evolution_operator();
        let g = m.gamma_operator();
        let blocks = m.half_step_blocks();
        for _ in 0..64 {
            let z = phase(rng.gen_range(0.0..TAU));
            for side in Side::BOTH {
                let us = u.symbol_at(side, z).unwrap();
                let gs = g.symbol_at(side, z).unwrap();
                unit = unit.max(unitarity_defect(&us).unwrap());
                chiral = chiral.max(us.adjoint().sub(&gs.matmul(&us).matmul(&gs)).frobenius_norm());
                for sign in Sign::BOTH {
                    let f = blocks.f1(sign).symbol_at(side, z).unwrap().scale(C64::new(2.0, 0.0));
                    let numeric = determinant(&f).unwrap();
                    let closed = m.f1_determinant_closed(side, sign, z);
                    // relative to the size of the two monomials of the closed form
                    let (f0, fm1) = m.f1_tail_factors(side, sign);
                    let scale = f0.iter().product::<f64>().abs() + fm1.iter().product::<f64>().abs();
                    if scale > 0.0 {
                        det_rel = det_rel.max((numeric - closed).norm() / scale);
                    } else {
                        det_rel = det_rel.max(numeric.norm());
                    }
                }
            }
        }
    }
    let ok = unit <= 1e-12 && chiral <= 1e-12 && det_rel <= 1e-12;
    Verdict::new(ok, format!("unitarity {unit:.2e}, chiral {chiral:.2e}, determinant {det_rel:.2e}"))
}

/// Double-double numbers `hi + lo` for the reference side of the product
/// identity.
#[derive(Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        Self::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Self::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Self) -> Self {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Self::from(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Self::from(q2)).neg());
        let q3 = r.hi / o.hi;
        Self::renorm(q1, q2).add(Self::from(q3))
    }
}

/// `Λ((s + s') / (1 + ss'))` evaluated in double-double.
fn lambda_of_sum(s: f64, t: f64) -> f64 {
    let one = Dd::from(1.0);
    let u = Dd::two_sum(s, t).div(one.add(Dd::from(s).mul(Dd::from(t))));
    let v = one.add(u).div(one.add(u.neg()));
    v.hi + v.lo
}

fn criterion_7() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    let mut sign_failures = 0;
    let mut exact_negations = 0;
    for k in 0..10_000 {
        let s: f64 = rng.gen_range(-1.0..1.0);
        let t: f64 = if k % 50 == 0 { -s } else { rng.gen_range(-1.0..1.0) };
        let product = lambda_map(s).unwrap().try_mul(lambda_map(t).unwrap()).unwrap();
        let reference = lambda_of_sum(s, t);
        worst = worst.max((product.value() - reference).abs() / reference);
        let by_product = product.ln().partial_cmp(&0.0).unwrap();
        let by_sum = (s + t).partial_cmp(&0.0).unwrap();
        if by_product != by_sum {
            sign_failures += 1;
        }
        if t == -s {
            exact_negations += 1;
        }
    }
    // endpoints of the extended half-line
    let endpoints = [(1.0, 0.3, f64::INFINITY), (1.0, 1.0, f64::INFINITY), (-1.0, -0.4, 0.0), (-1.0, 0.99, 0.0)];
    let mut endpoint_ok = true;
    for (s, t, expect) in endpoints {
        let v = lambda_map(s).unwrap().try_mul(lambda_map(t).unwrap()).unwrap().value();
        endpoint_ok &= v == expect;
    }
    endpoint_ok &= lambda_map(1.0).unwrap().try_mul(lambda_map(-1.0).unwrap()).is_err();
    let ok = worst <= 1e-12 && sign_failures == 0 && endpoint_ok;
    Verdict::new(
        ok,
        format!(
            "max relative error {worst:.2e}, {sign_failures} sign mismatches over 10^4 pairs ({exact_negations} with s' = -s), endpoints {}",
            if endpoint_ok { "ok" } else { "wrong" }
        ),
    )
}

fn criterion_8() -> Verdict {
    let tail = vec![1.0, 2.0, 4.0];
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut cores = vec![vec![1.0, 2.0, 4.0, 1.0, 2.0]];
    for _ in 0..20 {
        let base = [1.0, 2.0, 4.0, 1.0, 2.0];
        cores.push(base.iter().map(|v| v * (rng.gen_range(-0.05f64..0.05)).exp()).collect());
    }
    let mut worst: f64 = 0.0;
    let mut worst_whole: f64 = 0.0;
    let mut unperturbed = f64::NAN;
    for (i, core) in cores.into_iter().enumerate() {
        let seq = PeriodicTailSequence::new(0, core, vec![1.0], tail.clone()).unwrap();
        let g = geometric_mean_limit(&seq, 1_000_000).unwrap();
        let whole = geometric_mean_limit(&seq, 999_999).unwrap();
        if i == 0 {
            unperturbed = (g - 2.0).abs();
        }
        worst = worst.max((g - 2.0).abs());
        worst_whole = worst_whole.max((whole - 2.0).abs());
    }
    Verdict::new(
        worst <= 1e-6,
        format!("max |mean - 2| at x = 10^6: {worst:.3e} (unperturbed core {unperturbed:.3e}); at x = 999999: {worst_whole:.3e}"),
    )
}

fn random_periodic_operator(rng: &mut ChaCha8Rng) -> StrictlyLocalOperator {
    let n = rng.gen_range(1..=2);
    let k0 = rng.gen_range(1..=2);
    let period = rng.gen_range(1..=3);
    let tables: Vec<Vec<ComplexMatrix>> = (0..=2 * k0)
        .map(|_| {
            (0..period).map(|_| ComplexMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).collect()
        })
        .collect();
    StrictlyLocalOperator::from_fn(n, k0, (0, 0), (period, period), |k, x| {
        tables[(k + k0 as i64) as usize][x.rem_euclid(period as i64) as usize].clone()
    })
}

fn criterion_9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let opts = SamplingOptions::with_samples(2048);
    let mut worst: f64 = 0.0;
    let mut mismatches = Vec::new();
    for i in 0..20 {
        let op = random_periodic_operator(&mut rng);
        let herm = op.add(&op.adjoint()).unwrap().scale(C64::new(0.5, 0.0));
        let base_index = fredholm_index(&op, &opts).unwrap();
        let base_bands = essential_spectrum_bands(&herm, &opts).unwrap();
        for m in [2, 3] {
            let index = fredholm_index(&op.downsample(m).unwrap(), &opts).unwrap();
            if (index.fredholm, index.index) != (base_index.fredholm, base_index.index) {
                mismatches.push(format!("spec {i}, m = {m}: verdict differs"));
            }
            let bands = essential_spectrum_bands(&herm.downsample(m).unwrap(), &opts).unwrap();
            if bands.intervals.len() != base_bands.intervals.len() {
                mismatches.push(format!("spec {i}, m = {m}: band count differs"));
                continue;
            }
            for (a, b) in bands.intervals.iter().zip(&base_bands.intervals) {
                worst = worst.max((a.lo - b.lo).abs()).max((a.hi - b.hi).abs());
            }
        }
    }
    let ok = mismatches.is_empty() && worst <= 1e-9;
    let mut detail = format!("max band endpoint difference {worst:.2e}");
    if !mismatches.is_empty() {
        detail.push_str(&format!("; {}", mismatches.join("; ")));
    }
    Verdict::new(ok, detail)
}

fn criterion_10(dir: &Path) -> Verdict {
    let model = json!({
        "kind": "splitstep",
        "p": {"left_period": [-0.6, -0.2], "right_period": [0.7, 0.1, 0.4], "core": {"start": -2, "values": [0.9, -0.95, 0.0, 0.3]}},
        "a": {"left_period": [0.1], "right_period": [-0.3, 0.25], "core": {"start": 0, "values": [0.5]}},
    });
    let path = write_model(dir, "determinism", &model);
    let outputs: Vec<(Vec<u8>, Vec<u8>)> = (0..2)
        .map(|k| {
            let csv = dir.join(format!("run{k}.csv"));
            let r = chiralwalk(&["spectrum", path.to_str().unwrap(), "--csv", csv.to_str().unwrap()]);
            (r.stdout, std::fs::read(&csv).unwrap_or_default())
        })
        .collect();
    let json_same = outputs[0].0 == outputs[1].0 && !outputs[0].0.is_empty();
    let csv_same = outputs[0].1 == outputs[1].1 && !outputs[0].1.is_empty();
    Verdict::new(
        json_same && csv_same,
        format!("JSON {} bytes identical: {json_same}; CSV {} bytes identical: {csv_same}", outputs[0].0.len(), outputs[0].1.len()),
    )
}

fn main() {
    let dir = tempfile::tempdir().expect("temporary directory");
    let d = dir.path();
    type Check<'a> = Box<dyn FnOnce() -> Verdict + 'a>;
    let criteria: Vec<(u32, &str, Option<Duration>, Check)> = vec![
        (1, "domain-wall index by three routes", Some(Duration::from_secs(1)), Box::new(|| criterion_1(d))),
        (2, "protected eigenstate and decay certificate", Some(Duration::from_secs(1)), Box::new(|| criterion_2(d))),
        (3, "arcs vs symbol cloud vs ring oracle vs closed form", Some(Duration::from_secs(60)), Box::new(criterion_3)),
        (4, "flat bands at ±√2/2", None, Box::new(|| criterion_4(d))),
        (5, "gapless walk: full circle and exit 4", None, Box::new(|| criterion_5(d))),
        (6, "symbol identities", None, Box::new(criterion_6)),
        (7, "Λ product identity and sign equivalence", None, Box::new(criterion_7)),
        (8, "geometric mean of a perturbed period-3 sequence", Some(Duration::from_secs(1)), Box::new(criterion_8)),
        (9, "downsampling invariance", None, Box::new(criterion_9)),
        (10, "byte-identical spectrum reports", None, Box::new(|| criterion_10(d))),
    ];
    let mut unexpected = 0;
    for (n, title, limit, check) in criteria {
        let start = Instant::now();
        let mut v = check();
        let elapsed = start.elapsed();
        if let Some(limit) = limit {
            if elapsed > limit {
                v.pass = false;
                v.detail.push_str(&format!("; runtime {:.2} s exceeds {} s", elapsed.as_secs_f64(), limit.as_secs()));
            }
        }
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == n);
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {status} {title}: {} [{:.2} s]", v.detail, elapsed.as_secs_f64());
        if !v.pass {
            match known {
                Some((_, why)) => println!("             known failure: {why}"),
                None => unexpected += 1,
            }
        }
    }
    if unexpected > 0 {
        println!("{unexpected} criteria failed unexpectedly");
        std::process::exit(1);
    }
}
