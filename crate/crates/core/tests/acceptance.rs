//! End-to-end acceptance checks. Runs sequentially so the runtime limits are
//! measured without interference, prints one line per criterion and exits
//! non-zero if any criterion fails.

use std::io::Write;
use std::path::Path;
use std::time::{Duration, Instant};

use sconcave::bounds::*;
use sconcave::densities::{BaselineHalfLine, Family, Model, Pareto1D, RadialND, Symmetric1D};
use sconcave::harness::{fit_line, load_config, run, ExperimentConfig};
use sconcave::rng::Stream;
use sconcave::special::{integrate, integrate_to_inf};
use sconcave::verify::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn(&Path) -> Outcome;

fn radial_grid() -> Vec<(SConcaveParams, Model)> {
    let mut out = Vec::new();
    for n in [2, 3, 5] {
        for s in [-1e-9, -0.02, SConcaveParams::geometry_floor(n)] {
            out.push((SConcaveParams::new(s, n).unwrap(), Model::build(Family::Radial, s, n).unwrap()));
        }
    }
    out
}

fn count(rows: &[McReport], v: Verdict) -> usize {
    rows.iter().filter(|r| r.verdict == v).count()
}

fn within(e: &Estimate, bound: f64) -> bool {
    e.estimate <= bound + 3.0 * e.std_error
}

fn config(name: &str, out: &Path) -> ExperimentConfig {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
    let mut cfg = load_config(&std::fs::read_to_string(path).unwrap()).unwrap();
    cfg.out = out.join(name.trim_end_matches(".json"));
    cfg
}

fn pareto_tail(_: &Path) -> Outcome {
    let start = Instant::now();
    let p = SConcaveParams::new(-0.5, 1).unwrap();
    let m = Model::Pareto(Pareto1D::new(-0.5).unwrap());
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for (i, t) in [2.0, 5.0, 10.0].into_iter().enumerate() {
        let e = mc_probability(&m, |x| x[0] > t, 1_000_000, &Stream::root(101).child(i)).unwrap();
        let z = (e.estimate - 1.0 / t).abs() / e.std_error;
        worst = worst.max(z);
        ok &= z <= 3.0;
    }
    let _ = p;
    let el = start.elapsed();
    outcome(ok && el < Duration::from_secs(10), format!("max |z| = {worst:.2}, {el:.1?}"))
}

fn band_suite(_: &Path) -> Outcome {
    let start = Instant::now();
    let mut rows = Vec::new();
    for (i, (p, m)) in radial_grid().into_iter().enumerate() {
        let d = band_bounds(p).unwrap().d;
        rows.extend(verify_band(p, &m, &unit_axis(p.n, 0), &default_t_grid(d), 1_000_000, &Stream::root(102).child(i)).unwrap());
    }
    let el = start.elapsed();
    let fails = count(&rows, Verdict::Fail);
    outcome(
        fails == 0 && el < Duration::from_secs(300),
        format!("{} rows, {} pass, {} inconclusive, {fails} fail, {el:.1?}", rows.len(), count(&rows, Verdict::Pass), count(&rows, Verdict::Inconclusive)),
    )
}

fn centroid(_: &Path) -> Outcome {
    let mut cells: Vec<(SConcaveParams, Model)> = radial_grid();
    for s in [-1e-9, -0.02, -0.2] {
        cells.push((SConcaveParams::new(s, 1).unwrap(), Model::Symmetric(Symmetric1D::new(s).unwrap())));
    }
    for s in [-0.02, -0.2, -0.45] {
        cells.push((SConcaveParams::new(s, 1).unwrap(), Model::Pareto(Pareto1D::new(s).unwrap())));
    }
    let rows: Vec<McReport> = cells
        .iter()
        .enumerate()
        .map(|(i, (p, m))| verify_centroid_halfspace(*p, m, &unit_axis(p.n, 0), 1_000_000, &Stream::root(103).child(i)).unwrap())
        .collect();
    let ok_rows = rows.iter().all(|r| r.estimate >= r.bound - 3.0 * r.std_error);
    let limit_gap = (2..=5)
        .map(|n| (halfspace_mass_lower(marginal_gamma(-1e-10, n).unwrap()).unwrap() - (-1.0f64).exp()).abs())
        .fold(0.0, f64::max);
    outcome(ok_rows && limit_gap <= 1e-6, format!("{} cells, s→0 bound off 1/e by {limit_gap:.1e}", rows.len()))
}

fn disagreement(_: &Path) -> Outcome {
    let k = Knobs::default();
    let mut rows = Vec::new();
    for (i, (p, m)) in radial_grid().into_iter().enumerate() {
        for (j, theta) in [0.05, 0.2, 0.5, 1.0].into_iter().enumerate() {
            let st = Stream::root(104).child(i).child(j);
            rows.push(verify_disagreement(p, &m, &unit_axis(p.n, 0), &rotated_axis(p.n, theta), &k, 1_000_000, &st).unwrap());
        }
    }
    let pass = count(&rows, Verdict::Pass);
    outcome(pass == rows.len(), format!("{pass}/{} cells pass", rows.len()))
}

fn outside_band_and_variance(_: &Path) -> Outcome {
    let k = Knobs::default();
    let mut rows = Vec::new();
    let mut min_acc: f64 = 1.0;
    for (i, (p, m)) in radial_grid().into_iter().enumerate() {
        let u = unit_axis(p.n, 0);
        for (j, theta) in [0.05, 0.2, 0.5, 1.0].into_iter().enumerate() {
            let st = Stream::root(105).child(i).child(j);
            rows.push(verify_disagreement_outside_band(p, &m, &u, &rotated_axis(p.n, theta), &k, 1.0, 1_000_000, &st).unwrap());
        }
        let d = band_bounds(p).unwrap().d;
        for (j, (r, tf)) in [(0.0, 0.5), (0.1, 0.5), (0.1, 1.0)].into_iter().enumerate() {
            let a = rotated_axis(p.n, 2.0 * (r / 2.0f64).asin());
            let st = Stream::root(106).child(i).child(j);
            let (row, acc) = verify_conditional_variance(p, &m, &u, &a, r, tf * d, &k, 250_000, &st).unwrap();
            min_acc = min_acc.min(acc);
            rows.push(row);
        }
    }
    let pass = count(&rows, Verdict::Pass);
    outcome(
        pass == rows.len() && min_acc >= 1e-3,
        format!("{pass}/{} rows pass, min band acceptance {min_acc:.3e}", rows.len()),
    )
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

// B(a, b) for positive integers.
fn int_beta(a: u32, b: u32) -> f64 {
    factorial(a - 1) * factorial(b - 1) / factorial(a + b - 1)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn moment_lemma(_: &Path) -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut checked = 0;
    for (s, inv) in [(-0.05, 20u32), (-0.1, 10), (-0.2, 5)] {
        for (alpha, beta) in [(1.0, 1.0), (1.3, 0.7)] {
            let h = BaselineHalfLine { alpha, beta, s };
            let m = |k: u32| h.moment(k).ok();
            for n in 0..=3u32 {
                // closed form against exact factorial Beta values
                if let Some(v) = m(n) {
                    let want = int_beta(inv - n - 1, n + 1) * alpha / beta.powi(n as i32 + 1);
                    worst = worst.max(rel(v, want));
                }
                let (Some(a), Some(b), Some(c)) = (m(n), m(n + 1), m(n + 2)) else { continue };
                checked += 1;
                ok &= a * c >= b * b * (1.0 - 1e-9);
                let t = |k: u32, v: f64| v / int_beta(inv - k - 1, k + 1);
                worst = worst.max(rel(t(n, a) * t(n + 2, c), t(n + 1, b).powi(2)));
            }
            let (m0, m1) = (m(0).unwrap(), m(1).unwrap());
            worst = worst.max(rel(h.value(0.0) * m1, m0 * m0 * (1.0 + s) / (1.0 + 2.0 * s)));
        }
    }
    let el = start.elapsed();
    outcome(
        ok && worst <= 1e-9 && el < Duration::from_secs(1),
        format!("{checked} log-convexity triples, worst relative gap {worst:.1e}, {el:.1?}"),
    )
}

// Both models are isotropic, so ±6σ is ±6.
fn sigma_grid() -> Vec<f64> {
    (0..401).map(|i| -6.0 + 12.0 * i as f64 / 400.0).collect()
}

fn gamma_concavity(_: &Path) -> Outcome {
    let mut cases = 0;
    let mut failures = Vec::new();
    let mut check = |name: String, r: GammaCheck| {
        cases += 1;
        if !r.pass {
            failures.push(format!("{name} at {:?}", r.violation));
        }
    };
    for s in [-0.5, -0.25, -0.1] {
        let m = Pareto1D::new(s).unwrap();
        let g = s / (1.0 + s);
        let lo = m.start();
        let grid: Vec<f64> = (1..=200).map(|i| lo + 20.0 * i as f64 / 200.0).collect();
        check(format!("pareto cdf s={s}"), check_gamma_concavity(|x| m.cdf(x), g, &grid).unwrap());
        let quad = |x: f64| integrate(|y| m.pdf(y), lo, x, 1e-13);
        check(format!("pareto quadrature cdf s={s}"), check_gamma_concavity(quad, g, &grid).unwrap());
    }
    for s in [-0.02, -0.1, -0.3] {
        let m = Symmetric1D::new(s).unwrap();
        let g = s / (1.0 + s);
        let grid = sigma_grid();
        check(format!("symmetric cdf s={s}"), check_gamma_concavity(|x| m.cdf(x), g, &grid).unwrap());
        // integrate the smaller tail so the left half does not cancel
        let quad = |x: f64| {
            let tail = integrate_to_inf(|y| m.pdf(y), x.abs(), 1e-13);
            if x < 0.0 { tail } else { 1.0 - tail }
        };
        check(format!("symmetric quadrature cdf s={s}"), check_gamma_concavity(quad, g, &grid).unwrap());
    }
    for (n, s) in [(2, -0.1), (3, -0.02), (3, -1.0 / 9.0), (5, -0.05)] {
        let m = RadialND::new(n, s).unwrap();
        let g = marginal_gamma(s, n - 1).unwrap();
        let grid = sigma_grid();
        check(format!("radial marginal n={n} s={s}"), check_gamma_concavity(|x| m.axis_marginal(x), g, &grid).unwrap());
    }
    let detail = if failures.is_empty() { format!("{cases} functions") } else { failures.join("; ") };
    outcome(failures.is_empty(), detail)
}

fn al_shape(out: &Path) -> Outcome {
    let start = Instant::now();
    let cfg = config("al-realizable.json", out);
    let res = run(&cfg).unwrap();
    let el = start.elapsed();
    let runs = res.summary["details"]["runs"].as_array().unwrap().clone();
    let eps = &cfg.al.eps;
    let mut al = Vec::new();
    let mut passive = Vec::new();
    for &e in eps {
        let labels: Vec<f64> = runs.iter().filter(|r| r["eps"] == e).map(|r| r["labels"].as_f64().unwrap()).collect();
        al.push(labels.iter().sum::<f64>() / labels.len() as f64);
        passive.push(vc_sample_size(e, cfg.al.delta, 3, cfg.knobs.c_vc).unwrap() as f64);
    }
    let log_inv: Vec<f64> = eps.iter().map(|e| (1.0 / e).ln()).collect();
    let inv: Vec<f64> = eps.iter().map(|e| 1.0 / e).collect();
    let al_fit = fit_line(&log_inv, &al);
    let passive_fit = fit_line(&inv, &passive);
    let ratio = al.last().unwrap() / passive.last().unwrap();
    let good = runs
        .iter()
        .filter(|r| {
            let e: Estimate = serde_json::from_value(r["error"].clone()).unwrap();
            within(&e, r["eps"].as_f64().unwrap())
        })
        .count();
    let frac = good as f64 / runs.len() as f64;
    outcome(
        al_fit.r2 >= 0.9 && passive_fit.r2 >= 0.9 && ratio <= 0.2 && frac >= 0.9 && el < Duration::from_secs(900),
        format!(
            "AL R² {:.4} vs log(1/ε), passive R² {:.4} vs 1/ε, ratio {ratio:.3} at ε=2^-7, {good}/{} within ε, {el:.1?}",
            al_fit.r2,
            passive_fit.r2,
            runs.len()
        ),
    )
}

fn adversarial(out: &Path) -> Outcome {
    let cfg = config("al-adversarial.json", out);
    let res = run(&cfg).unwrap();
    let runs = res.summary["details"]["runs"].as_array().unwrap().clone();
    let good = runs
        .iter()
        .filter(|r| within(&serde_json::from_value(r["error"].clone()).unwrap(), r["eps"].as_f64().unwrap()))
        .count();
    let flips: u64 = runs.iter().map(|r| r["flips"].as_u64().unwrap()).sum();
    outcome(good * 10 >= runs.len() * 8, format!("{good}/{} runs within ε, {flips} labels flipped in total", runs.len()))
}

fn baum(out: &Path) -> Outcome {
    let cfg = config("baum.json", out);
    let res = run(&cfg).unwrap();
    let runs = res.summary["details"]["runs"].as_array().unwrap().clone();
    let good = runs
        .iter()
        .filter(|r| r["branch"] == "composite" && within(&serde_json::from_value(r["error"].clone()).unwrap(), cfg.baum.eps))
        .count();
    let k = runs[0]["reflection_k"].as_f64().unwrap();
    let worst = runs.iter().map(|r| r["reflection"]["worst_ratio"].as_f64().unwrap()).fold(0.0, f64::max);
    let reflection_rows: Vec<&McReport> = res.rows.iter().filter(|r| r.check.starts_with("reflection")).collect();
    let reflection_ok = worst <= k && reflection_rows.iter().all(|r| r.verdict != Verdict::Fail);

    let near = config("baum-near-empty.json", out);
    let res = run(&near).unwrap();
    let r = &res.summary["details"]["runs"][0];
    let negative = r["branch"] == "all-negative" && within(&serde_json::from_value(r["error"].clone()).unwrap(), near.baum.eps);
    outcome(
        good * 10 >= runs.len() * 8 && negative && reflection_ok,
        format!(
            "{good}/{} composite runs within ε, near-empty case all-negative: {negative}, worst reflection ratio {worst:.3} ≤ K = {k:.3e} over {} regions per seed",
            runs.len(),
            cfg.samples.reflection_regions
        ),
    )
}

fn limits(_: &Path) -> Outcome {
    let knobs = Knobs::default();
    let s = -1e-10;
    let mut worst: (f64, &str, usize) = (0.0, "", 0);
    let mut note = |gap: f64, name: &'static str, n: usize| {
        if gap > worst.0 {
            worst = (gap, name, n);
        }
    };
    for n in [2, 3, 5] {
        let p = SConcaveParams::new(s, n).unwrap();
        let g = GeometryBounds::evaluate(p, &knobs).unwrap();
        let l = log_concave_limits(n, &knobs);
        for &gm in &g.gamma_marginal {
            note(gm.abs(), "marginal exponent", n);
        }
        note(rel(g.halfspace, l.halfspace), "halfspace", n);
        note(rel(g.f1, l.f1), "f1", n);
        note(rel(g.f2, l.f2), "f2", n);
        note(rel(g.f3, l.f3), "f3", n);
        note(rel(g.d, l.d), "d", n);
        note(rel(g.beta1, l.beta1), "beta1", n);
        note(rel(g.beta2 / -s, l.beta2_slope), "beta2/|s|", n);
        note(rel(g.envelope_a, l.envelope_a), "envelope a", n);
        note(rel(g.envelope_d, l.envelope_d), "envelope d", n);
        let alpha = s / (1.0 + (n as f64 - 2.0) * s);
        note(rel(g.f4 * alpha.abs().powi(3), l.f4_scaled), "|α|³ f4", n);
        note(rel((g.f5 - 16.0) * alpha.abs().powi(3), l.f5_scaled), "|η|³ (f5 − 16)", n);
        if let (Some(k), Some(ks)) = (g.k, l.k_scaled) {
            let kappa = s / (1.0 + (n as f64 - 3.0) * s);
            note(rel(k * kappa.abs().powi(3), ks), "|κ|³ K", n);
        }
        for t in [16.0, 20.0] {
            note(rel(tail_bound(p, t, knobs.c_tail).unwrap(), (-knobs.c_tail * t).exp()), "tail", n);
        }
        let eps: f64 = 0.01;
        let coef = disagreement_coefficient_bound(p, eps, knobs.c_theta, knobs.c_f1).unwrap();
        note(rel(coef, knobs.c_theta * (n as f64).sqrt() / l.f1 * (1.0 / eps).ln()), "coefficient bound", n);
    }
    outcome(worst.0 <= 1e-4, format!("worst relative gap {:.1e} ({} at n = {})", worst.0, worst.1, worst.2))
}

fn determinism(out: &Path) -> Outcome {
    let docs = [
        r#"{"command": "run-al", "s": -0.02, "n": 3, "seeds": [7], "knobs": {"c_b": 5.8e-38, "c_m": 2.0},
            "samples": {"eval": {"error_points": 20000}}, "al": {"eps": [0.0625]}}"#,
        r#"{"command": "verify-geometry", "grid": [{"s": -0.05, "n": 3}], "seeds": [7], "samples": {"mc": 20000}}"#,
        r#"{"command": "run-baum", "s": -0.02, "n": 3, "seeds": [7], "samples": {"mc": 20000, "reflection_regions": 10}}"#,
        r#"{"command": "estimate-coefficient", "s": -0.02, "n": 3, "seeds": [7], "samples": {"mc": 20000}, "knobs": {"c_f1": 1e5}}"#,
    ];
    let mut same = 0;
    for (i, doc) in docs.iter().enumerate() {
        let mut bytes = Vec::new();
        for rep in 0..2 {
            let mut cfg = load_config(doc).unwrap();
            cfg.out = out.join(format!("determinism-{i}-{rep}"));
            run(&cfg).unwrap();
            bytes.push(std::fs::read(cfg.out.join("report.csv")).unwrap());
        }
        same += (bytes[0] == bytes[1]) as usize;
    }
    outcome(same == docs.len(), format!("{same}/{} commands byte-identical across reruns", docs.len()))
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, Check); 12] = [
        ("pareto tail exactness", pareto_tail),
        ("band probability suite", band_suite),
        ("centroid halfspace mass", centroid),
        ("disagreement lower bound", disagreement),
        ("outside-band and variance suites", outside_band_and_variance),
        ("moment lemma", moment_lemma),
        ("gamma-concavity of CDF and marginal", gamma_concavity),
        ("active-learning label complexity", al_shape),
        ("adversarial robustness", adversarial),
        ("two-halfspace learner", baum),
        ("limit continuity", limits),
        ("determinism", determinism),
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut failed = 0;
    let mut err = std::io::stderr().lock();
    for (i, (name, check)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str()) || f == &(i + 1).to_string()) {
            continue;
        }
        let o = check(dir.path());
        failed += !o.pass as usize;
        writeln!(err, "criterion {:>2} {:<38} {}  {}", i + 1, name, if o.pass { "PASS" } else { "FAIL" }, o.detail).unwrap();
    }
    if failed > 0 {
        writeln!(err, "{failed} acceptance criteria failed").unwrap();
        std::process::exit(1);
    }
}
