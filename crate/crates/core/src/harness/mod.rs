//! Config-driven experiment runs with CSV and JSON artifacts.

mod config;

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{default_grid, load_config, AlSettings, BaumSettings, Cell, CoefficientSettings, Command, ExperimentConfig, Samples};

use crate::bounds::{vc_sample_size, SConcaveParams};
use crate::densities::{dot, norm, Model};
use crate::error::Result;
use crate::learners::{
    baum_learn, estimate_disagreement_coefficient, margin_al_adversarial, margin_al_realizable,
    passive_baseline, IntersectionHypothesis, LabelOracle, Noise, RoundLog,
};
use crate::rng::Stream;
use crate::verify::{random_unit, reflection_experiment, verify_geometry, write_reports_csv, Direction, Estimate, McReport, Verdict};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub recorded: usize,
}

impl Tally {
    pub fn of(rows: &[McReport]) -> Self {
        let mut t = Self::default();
        for r in rows {
            match r.verdict {
                Verdict::Pass => t.pass += 1,
                Verdict::Fail => t.fail += 1,
                Verdict::Inconclusive => t.inconclusive += 1,
                Verdict::Recorded => t.recorded += 1,
            }
        }
        t
    }
}

/// Everything a run produced; `summary` is what lands in summary.json.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub rows: Vec<McReport>,
    pub tally: Tally,
    pub summary: Value,
    pub out: PathBuf,
}

impl RunOutcome {
    pub fn failed(&self) -> bool {
        self.tally.fail > 0
    }

    pub fn verdict_line(&self, command: Command) -> String {
        let t = self.tally;
        format!(
            "{}: {} pass | {} fail | {} inconclusive | {} recorded | {}",
            command.name(),
            t.pass,
            t.fail,
            t.inconclusive,
            t.recorded,
            if self.failed() { "FAIL" } else { "OK" }
        )
    }
}

/// Least-squares line y = a + b·x with its R².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub r2: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> LineFit {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    LineFit { intercept: my - slope * mx, slope, r2 }
}

/// Two unit normals at the given angle in a random plane.
pub fn planted_pair(stream: &Stream, n: usize, angle: f64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = stream.rng();
    let u = random_unit(&mut rng, n);
    let z = loop {
        let z = random_unit(&mut rng, n);
        let d = dot(&u, &z);
        let perp: Vec<f64> = z.iter().zip(&u).map(|(a, b)| a - d * b).collect();
        let l = norm(&perp);
        if l > 1e-6 {
            break perp.into_iter().map(|v| v / l).collect::<Vec<_>>();
        }
    };
    let v = u.iter().zip(&z).map(|(a, b)| angle.cos() * a + angle.sin() * b).collect();
    (u, v)
}

fn cell_stream(cfg: &ExperimentConfig, seed: u64, i: usize) -> Stream {
    Stream::root(seed).child(cfg.command.name()).child(i)
}

fn tag(seed: u64, rest: &str) -> String {
    if rest.is_empty() {
        format!("seed={seed}")
    } else {
        format!("seed={seed};{rest}")
    }
}

fn cells(cfg: &ExperimentConfig) -> Result<Vec<(SConcaveParams, Model)>> {
    cfg.cells()
        .iter()
        .map(|c| Ok((SConcaveParams::new(c.s, c.n)?, Model::build(cfg.family, c.s, c.n)?)))
        .collect()
}

fn run_geometry(cfg: &ExperimentConfig, rows: &mut Vec<McReport>) -> Result<Value> {
    let mut min_acceptance: Option<f64> = None;
    for &seed in &cfg.seeds {
        for (i, (p, model)) in cells(cfg)?.into_iter().enumerate() {
            let suite = verify_geometry(p, &model, &cfg.knobs, cfg.samples.mc, &cell_stream(cfg, seed, i))?;
            if let Some(a) = suite.min_acceptance {
                min_acceptance = Some(min_acceptance.map_or(a, |m: f64| m.min(a)));
            }
            rows.extend(suite.rows.into_iter().map(|mut r| {
                r.params = tag(seed, &r.params);
                r
            }));
        }
    }
    Ok(json!({ "min_band_acceptance": min_acceptance }))
}

#[derive(Serialize)]
struct AlSummary {
    seed: u64,
    s: f64,
    n: usize,
    eps: f64,
    labels: u64,
    error: Estimate,
    angle: f64,
    flips: u64,
    generated: u64,
    small_norm_rounds: Vec<usize>,
    passive_labels: Option<u64>,
    passive_error: Option<Estimate>,
}

fn run_al(cfg: &ExperimentConfig, rows: &mut Vec<McReport>, out: &Path) -> Result<Value> {
    let al = &cfg.al;
    let mut runs = Vec::new();
    let mut rounds: Vec<(u64, f64, f64, usize, RoundLog)> = Vec::new();
    for &seed in &cfg.seeds {
        for (i, (p, model)) in cells(cfg)?.into_iter().enumerate() {
            for (j, &eps) in al.eps.iter().enumerate() {
                let st = cell_stream(cfg, seed, i).child(j);
                let target = random_unit(&mut st.child("target").rng(), p.n);
                let mut oracle = LabelOracle::new(target.clone(), al.noise, eps, &st.child("oracle"));
                let run = match al.noise {
                    Noise::Realizable => margin_al_realizable(p, &model, &mut oracle, eps, al.delta, &cfg.knobs, cfg.samples.eval, &st)?,
                    Noise::Adversarial { .. } => {
                        margin_al_adversarial(p, &model, &mut oracle, eps, al.delta, &cfg.knobs, cfg.samples.eval, &st)?
                    }
                };
                let passive_labels = vc_sample_size(eps, al.delta, p.n, cfg.knobs.c_vc)?;
                let label = format!("eps={eps};labels={}", run.total_labels);
                rows.push(McReport::new("al-error", p, tag(seed, &label), run.error, eps, Direction::AtMost));
                rows.push(McReport::new(
                    "al-labels",
                    p,
                    tag(seed, &format!("eps={eps};versus=passive")),
                    Estimate::exact(run.total_labels as f64),
                    passive_labels as f64,
                    Direction::Recorded,
                ));
                let passive = if al.passive {
                    let mut o = LabelOracle::new(target.clone(), al.noise, eps, &st.child("passive-oracle"));
                    let r = passive_baseline(p, &model, &mut o, eps, al.delta, &cfg.knobs, cfg.samples.eval, &st.child("passive"))?;
                    rows.push(McReport::new(
                        "passive-error",
                        p,
                        tag(seed, &format!("eps={eps};labels={}", r.labels)),
                        r.error,
                        eps,
                        Direction::AtMost,
                    ));
                    Some(r)
                } else {
                    None
                };
                for r in &run.rounds {
                    rounds.push((seed, p.s, eps, p.n, r.clone()));
                }
                runs.push(AlSummary {
                    seed,
                    s: p.s,
                    n: p.n,
                    eps,
                    labels: run.total_labels,
                    error: run.error,
                    angle: run.rounds.last().map_or(f64::NAN, |r| r.angle),
                    flips: run.flips,
                    generated: run.generated,
                    small_norm_rounds: run.small_norm_rounds.clone(),
                    passive_labels: passive.as_ref().map(|r| r.labels),
                    passive_error: passive.map(|r| r.error),
                });
            }
        }
    }
    write_rounds_csv(&rounds, &out.join("rounds.csv"))?;
    Ok(json!({ "runs": runs }))
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.16e}"))
}

fn write_rounds_csv(rounds: &[(u64, f64, f64, usize, RoundLog)], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "seed", "s", "n", "eps", "round", "labels", "drawn", "band", "angle", "hinge_loss", "kappa", "v_norm",
        "band_error",
    ])?;
    for (seed, s, eps, n, r) in rounds {
        w.write_record([
            seed.to_string(),
            format!("{s:.16e}"),
            n.to_string(),
            format!("{eps:.16e}"),
            r.k.to_string(),
            r.labels.to_string(),
            r.drawn.to_string(),
            format!("{:.16e}", r.band),
            format!("{:.16e}", r.angle),
            opt(r.hinge_loss),
            opt(r.kappa),
            opt(r.v_norm),
            opt(r.band_error),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run_baum(cfg: &ExperimentConfig, rows: &mut Vec<McReport>) -> Result<Value> {
    let b = &cfg.baum;
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        for (i, (p, model)) in cells(cfg)?.into_iter().enumerate() {
            let st = cell_stream(cfg, seed, i);
            let (u, v) = planted_pair(&st.child("targets"), p.n, b.angle);
            let r = baum_learn(p, &model, (&u, &v), b.eps, b.delta, &cfg.knobs, cfg.samples.eval, &st)?;
            let branch = match r.hypothesis {
                IntersectionHypothesis::AllNegative => "all-negative",
                IntersectionHypothesis::Composite { .. } => "composite",
            };
            rows.push(McReport::new(
                "baum-error",
                p,
                tag(seed, &format!("eps={};branch={branch};labels={}", b.eps, r.labels)),
                r.error,
                b.eps,
                Direction::AtMost,
            ));
            let mut reflection = None;
            if b.reflection {
                let rep = reflection_experiment(p, &model, cfg.samples.reflection_regions, cfg.samples.mc, &st.child("reflection"))?;
                rows.extend(rep.rows.iter().cloned().map(|mut r| {
                    r.params = tag(seed, &r.params);
                    r
                }));
                reflection = Some(json!({ "k": rep.k, "skipped": rep.skipped, "worst_ratio": rep.worst_ratio }));
            }
            runs.push(json!({
                "seed": seed, "s": p.s, "n": p.n, "branch": branch, "sizes": r.sizes,
                "reflection_k": r.reflection_k, "positives": r.positives, "labels": r.labels,
                "positive_misses": r.positive_misses, "error": r.error, "reflection": reflection,
            }));
        }
    }
    Ok(json!({ "runs": runs }))
}

fn run_coefficient(cfg: &ExperimentConfig, rows: &mut Vec<McReport>) -> Result<Value> {
    let mut runs = Vec::new();
    for &seed in &cfg.seeds {
        for (i, (p, model)) in cells(cfg)?.into_iter().enumerate() {
            let st = cell_stream(cfg, seed, i);
            let target = random_unit(&mut st.child("target").rng(), p.n);
            let est = estimate_disagreement_coefficient(p, &model, &target, &cfg.coefficient.radii, cfg.samples.mc, &cfg.knobs, &st)?;
            for r in &est.rows {
                rows.push(McReport::new("capacity", p, tag(seed, &format!("r={}", r.r)), r.mass, r.r, Direction::Recorded));
            }
            rows.push(McReport::new("coefficient", p, tag(seed, ""), Estimate::exact(est.theta), est.bound, Direction::AtMost));
            runs.push(json!({ "seed": seed, "s": p.s, "n": p.n, "estimate": est }));
        }
    }
    Ok(json!({ "runs": runs }))
}

/// Runs a validated config and writes report.csv and summary.json under
/// `cfg.out`.
pub fn run(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    let out = cfg.out.clone();
    fs::create_dir_all(&out)?;
    let mut rows = Vec::new();
    let details = match cfg.command {
        Command::VerifyGeometry => run_geometry(cfg, &mut rows)?,
        Command::RunAl => run_al(cfg, &mut rows, &out)?,
        Command::RunBaum => run_baum(cfg, &mut rows)?,
        Command::EstimateCoefficient => run_coefficient(cfg, &mut rows)?,
    };
    write_reports_csv(&rows, fs::File::create(out.join("report.csv"))?)?;
    let tally = Tally::of(&rows);
    let summary = json!({
        "command": cfg.command.name(),
        "config": cfg,
        "tally": tally,
        "failed": tally.fail > 0,
        "details": details,
    });
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(RunOutcome { rows, tally, summary, out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_has_unit_r2() {
        let f = fit_line(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn planted_pair_has_requested_angle() {
        let (u, v) = planted_pair(&Stream::root(3), 4, 2.0);
        assert!((norm(&u) - 1.0).abs() < 1e-12 && (norm(&v) - 1.0).abs() < 1e-12);
        assert!((dot(&u, &v) - 2f64.cos()).abs() < 1e-12);
    }
}
