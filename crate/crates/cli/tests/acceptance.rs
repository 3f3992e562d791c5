//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion;
//! run with `--nocapture` to see them.

use std::time::Instant;

use entroscope::ae::{matus_rhs, ViolationCertificate};
use entroscope::catalog::{catalog, lookup, matus_star, zhang_yeung, CatalogEntry};
use entroscope::elemental::elementals;
use entroscope::fq::{construct_example, gap_unconditional, minimal_refuting_q, Extension};
use entroscope::lang::{parse, print_canonical};
use entroscope::lp::{is_shannon_type, Certificate};
use entroscope::primes::primes;
use entroscope::rational::Rational;
use entroscope::swsim::{binary_symmetric_pair, sw_report, SwConfig};
use entroscope::{Budget, EntropyProfile, InfoExpression, JointDistribution, VarSet, Variable};
use entroscope_cli::cmd_ae_cert;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const TOL: f64 = 1e-9;

const A: VarSet = VarSet(1);
const B: VarSet = VarSet(2);
const C: VarSet = VarSet(4);
const D: VarSet = VarSet(8);
const NONE: VarSet = VarSet::EMPTY;

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, what: impl FnOnce() -> String) -> Outcome {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn log2(q: u64) -> f64 {
    (q as f64).log2()
}

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| ((b'a' + i as u8) as char).to_string()).collect()
}

fn random_dist(rng: &mut ChaCha8Rng, n: usize, max_alphabet: u32) -> JointDistribution {
    let vars: Vec<Variable> = names(n)
        .into_iter()
        .map(|s| Variable::new(s, rng.gen_range(2..=max_alphabet)))
        .collect();
    let space: u32 = vars.iter().map(|v| v.alphabet).product();
    let mut outcomes = Vec::new();
    for code in 0..space {
        if rng.gen_bool(0.5) {
            let mut c = code;
            let vals = vars
                .iter()
                .map(|v| {
                    let x = c % v.alphabet;
                    c /= v.alphabet;
                    x
                })
                .collect();
            outcomes.push((vals, rng.gen_range(1..20u64)));
        }
    }
    if outcomes.is_empty() {
        outcomes.push((vec![0; n], 1));
    }
    JointDistribution::from_weights(vars, outcomes).unwrap()
}

fn closed_forms_by_enumeration() -> Outcome {
    for q in [3u64, 5, 7, 11, 13] {
        let d = construct_example(q, Budget::default()).map_err(|e| e.to_string())?;
        let err = |e: entroscope::dist::DistError| e.to_string();
        let l = log2(q) / q as f64;
        let checks = [
            ("I(c;d)", d.mutual_information(C, D, NONE).map_err(err)?, (q as f64 - 1.0) / q as f64),
            ("I(a;b)", d.mutual_information(A, B, NONE).map_err(err)?, l),
            ("H(c|a,b)", d.conditional_entropy(C, A | B).map_err(err)?, l),
        ];
        for (name, got, want) in checks {
            ensure((got - want).abs() < TOL, || format!("q={q}: {name} = {got}, expected {want}"))?;
        }
        for (name, x, y, z) in [("I(c;d|a)", C, D, A), ("I(c;d|b)", C, D, B), ("I(a;b|c)", A, B, C)] {
            let zero = d.is_conditionally_independent(x, y, z).map_err(err)?;
            ensure(zero, || format!("q={q}: {name} not certified zero"))?;
        }
    }
    Ok(())
}

fn unconditional_gap() -> Outcome {
    let q = minimal_refuting_q(1.0, 1.0, Extension::Ext1);
    ensure(q == 7, || format!("minimal refuting q = {q}"))?;
    let g7 = gap_unconditional(7, 1.0, 1.0, Extension::Ext1).unwrap();
    let want = 6.0 / 7.0 - 2.0 * log2(7) / 7.0;
    ensure((g7 - want).abs() < 1e-6, || format!("gap(7) = {g7}, expected {want}"))?;
    let g5 = gap_unconditional(5, 1.0, 1.0, Extension::Ext1).unwrap();
    ensure(g5 < 0.0, || format!("gap(5) = {g5} is not negative"))
}

fn run_ae_cert(target: &str, q: Option<u64>) -> Result<Value, String> {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    cmd_ae_cert(target, q, false, Budget::default(), &mut out, &mut err).map_err(|e| e.to_string())?;
    serde_json::from_slice(&out).map_err(|e| e.to_string())
}

/// Re-reads every violation certificate from JSON and checks it on its own.
fn reverify(v: &Value) -> Outcome {
    for c in v["certificates"].as_array().ok_or("no certificates")? {
        let cert: ViolationCertificate = serde_json::from_value(c.clone()).map_err(|e| e.to_string())?;
        ensure(cert.verify(), || format!("{} certificate failed to verify", cert.target))?;
        ensure(cert.gap > 0.0, || format!("{} gap {} not positive", cert.target, cert.gap))?;
    }
    Ok(())
}

fn violation_certificates() -> Outcome {
    let v = run_ae_cert("cond1", Some(19))?;
    let want = (18.0 - 4.0 * log2(19)) / 19.0;
    let gap = v["gap"].as_f64().unwrap_or(f64::NAN);
    ensure((gap - want).abs() < 1e-6, || format!("cond1 gap {gap}, expected {want}"))?;
    reverify(&v)?;

    let scanned = primes().find(|&q| q as f64 - 1.0 > 15.0 * log2(q)).unwrap();
    let v = run_ae_cert("cond3", None)?;
    ensure(v["q"] == scanned, || format!("cond3 at q = {}, expected {scanned}", v["q"]))?;
    let want = (scanned as f64 - 1.0 - 15.0 * log2(scanned)) / scanned as f64;
    let gap = v["gap"].as_f64().unwrap_or(f64::NAN);
    ensure((gap - want).abs() < 1e-6, || format!("cond3 gap {gap}, expected {want}"))?;
    reverify(&v)
}

fn combined_certificate() -> Outcome {
    let v = run_ae_cert("both", None)?;
    let q = v["q"].as_u64().ok_or("no prime found")?;
    let hw = v["half_width"].as_f64().unwrap_or(f64::NAN);
    let want = 2.0 * log2(q) / q as f64;
    ensure((hw - want).abs() < 1e-12, || format!("half-width {hw}, expected {want}"))?;
    let zeros: Vec<&str> = v["zero_set"].as_array().unwrap().iter().filter_map(Value::as_str).collect();
    for z in ["I(a;b|c)", "I(a;b)", "H(c|a,b)"] {
        ensure(zeros.contains(&z), || format!("zero-set lacks {z}"))?;
    }
    reverify(&v)
}

fn shannon_type_classification() -> Outcome {
    let els = elementals(4);
    ensure(els.len() == 28, || format!("{} elementals", els.len()))?;
    for e in &els {
        let v = is_shannon_type(&e.expr).map_err(|e| e.to_string())?;
        let single = matches!(&v.certificate, Certificate::DualWeights(w) if w.len() == 1 && w[0].0 == *e);
        ensure(v.is_shannon_type() && single && v.verify(), || format!("elemental {e:?}"))?;
    }
    let v = is_shannon_type(&zhang_yeung().body).map_err(|e| e.to_string())?;
    ensure(!v.is_shannon_type(), || "zy98 classified shannon-type".into())?;
    match &v.certificate {
        Certificate::Witness { value, .. } => ensure(*value < Rational::from_integer(0.into()), || format!("witness value {value}"))?,
        other => return Err(format!("zy98 certificate {other:?}")),
    }
    ensure(v.verify(), || "zy98 witness failed to verify".into())
}

fn entropic_validity() -> Outcome {
    let mut ineqs = vec![zhang_yeung()];
    ineqs.extend((1..=10).map(matus_star));
    let check = |p: &EntropyProfile, label: &str| -> Outcome {
        for ineq in &ineqs {
            let v = ineq.body.evaluate(p).map_err(|e| e.to_string())?;
            ensure(v >= -TOL, || format!("{} = {v} on {label}", ineq.name))?;
        }
        for k in 1..=10 {
            let v = matus_rhs(p, k).map_err(|e| e.to_string())?;
            ensure(v >= -TOL, || format!("matus rhs k={k} = {v} on {label}"))?;
        }
        Ok(())
    };
    for q in [3u64, 5, 7] {
        let d = construct_example(q, Budget::default()).map_err(|e| e.to_string())?;
        check(&EntropyProfile::of(&d).map_err(|e| e.to_string())?, &format!("q={q}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(20_260_101);
    for i in 0..1000 {
        let d = random_dist(&mut rng, 4, 4);
        check(&EntropyProfile::of(&d).map_err(|e| e.to_string())?, &format!("random #{i}"))?;
    }
    Ok(())
}

fn binning_trend() -> Outcome {
    let d = binary_symmetric_pair(1, 4);
    let cfg = SwConfig {
        copies: vec![2, 8],
        delta: 0.1,
        ..SwConfig::default()
    };
    let mut sums = [0.0; 2];
    for seed in 0..20 {
        let rows = sw_report(&d, &cfg, seed).map_err(|e| e.to_string())?;
        for (sum, row) in sums.iter_mut().zip(&rows) {
            ensure(row.hash_is_function_of_x, || format!("seed {seed}: H(X'|X) > 0"))?;
            *sum += row.h_x_given_hash_y;
        }
    }
    let (m2, m8) = (sums[0] / 20.0, sums[1] / 20.0);
    ensure(m8 <= m2 - 0.05, || format!("mean H(X|X',Y)/N: N=2 {m2}, N=8 {m8}"))
}

fn core_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for i in 0..50 {
        let n = rng.gen_range(1..=3);
        let d = random_dist(&mut rng, n, 3);
        let p = EntropyProfile::of(&d).map_err(|e| e.to_string())?;
        ensure(p.is_polymatroid(TOL).polymatroid, || format!("random #{i} not a polymatroid"))?;
        for copies in 1..=3u32 {
            let pn = EntropyProfile::of(&d.iid_power(copies, Budget::default()).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            ensure(pn.is_polymatroid(TOL).polymatroid, || format!("power #{i} not a polymatroid"))?;
            for (x, y) in pn.coords().iter().zip(p.coords()) {
                let want = copies as f64 * y;
                ensure((x - want).abs() <= TOL * copies as f64, || {
                    format!("random #{i}, N={copies}: {x} vs {want}")
                })?;
            }
        }
    }

    let ns = names(4);
    let round_trip = |e: &InfoExpression| -> Outcome {
        let text = print_canonical(e, &ns);
        let back = parse(&text, &ns).map_err(|err| format!("{text}: {err}"))?;
        ensure(&back == e && print_canonical(&back, &ns) == text, || format!("round trip of {text}"))
    };
    let mut all = Vec::new();
    for entry in catalog() {
        match entry {
            CatalogEntry::Basic(v) => all.extend(v),
            CatalogEntry::Fixed(i) => all.push(i),
            CatalogEntry::Family { generator, .. } => all.extend((1..=10).map(generator)),
        }
    }
    all.extend(lookup("ingleton").unwrap());
    for ineq in &all {
        round_trip(&ineq.body)?;
        for c in &ineq.constraints {
            round_trip(&c.expr)?;
        }
    }
    for _ in 0..200 {
        let mut e = InfoExpression::zero(4);
        for _ in 0..rng.gen_range(0..7) {
            let s = VarSet(rng.gen_range(1..16));
            let coef = Rational::new(rng.gen_range(-9i64..=9).into(), rng.gen_range(1i64..=6).into());
            e.add_term(s, coef);
        }
        round_trip(&e)?;
    }
    Ok(())
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 8] = [
        ("closed forms and structural zeros, q in {3,5,7,11,13}", closed_forms_by_enumeration),
        ("unconditional extension gap: refuted first at q = 7", unconditional_gap),
        ("violation certificates for cond1 and cond3", violation_certificates),
        ("one box excluding cond1 and cond3 together", combined_certificate),
        ("shannon-type classification with certificates", shannon_type_classification),
        ("zy98 and matus family hold on entropic profiles", entropic_validity),
        ("binning residual H(X|X',Y)/N shrinks with N", binning_trend),
        ("additivity, polymatroid validity, text round trip", core_properties),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match &result {
            Ok(()) => println!("PASS {} {name} ({secs:.1}s)", i + 1),
            Err(why) => {
                println!("FAIL {} {name} ({secs:.1}s): {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
