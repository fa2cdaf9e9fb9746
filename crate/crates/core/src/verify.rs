//! Monte Carlo and deterministic checks of the geometric bounds.
//!
//! Each check yields an [`McReport`]. A check passes only when the inequality
//! holds with a margin of at least three standard errors, and fails only when
//! it is violated by that much. Anything in between is inconclusive.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::{
    band_bounds, band_margin_f4, baum_reflection_k, density_envelope, disagreement_lower_f1,
    halfspace_mass_lower, packing_lower_bound, tail_bound, variance_bound_f5, Knobs,
    SConcaveParams,
};
use crate::densities::{dot, norm, Model};
use crate::error::{precondition, regime, Error, Result};
use crate::rng::{sharded, Stream};
use crate::special::ln1p_ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// estimate ≤ bound
    AtMost,
    /// estimate ≥ bound
    AtLeast,
    /// Logged for comparison only.
    Recorded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
    Recorded,
}

impl Direction {
    fn as_str(self) -> &'static str {
        match self {
            Direction::AtMost => "<=",
            Direction::AtLeast => ">=",
            Direction::Recorded => "record",
        }
    }
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Recorded => "recorded",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McReport {
    pub check: String,
    pub s: f64,
    pub n: usize,
    pub params: String,
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub bound: f64,
    pub direction: Direction,
    pub verdict: Verdict,
    /// Signed margin in standard errors; positive when the inequality holds.
    pub z_margin: f64,
}

impl McReport {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        check: impl Into<String>,
        p: SConcaveParams,
        params: impl Into<String>,
        est: Estimate,
        bound: f64,
        direction: Direction,
    ) -> Self {
        let gap = match direction {
            Direction::AtMost => bound - est.estimate,
            Direction::AtLeast => est.estimate - bound,
            Direction::Recorded => 0.0,
        };
        let z_margin = if direction == Direction::Recorded {
            0.0
        } else if est.std_error > 0.0 {
            gap / est.std_error
        } else if gap >= 0.0 {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        };
        let verdict = match direction {
            Direction::Recorded => Verdict::Recorded,
            _ if z_margin >= 3.0 => Verdict::Pass,
            _ if z_margin <= -3.0 => Verdict::Fail,
            _ => Verdict::Inconclusive,
        };
        Self {
            check: check.into(),
            s: p.s,
            n: p.n,
            params: params.into(),
            estimate: est.estimate,
            std_error: est.std_error,
            n_samples: est.n_samples,
            bound,
            direction,
            verdict,
            z_margin,
        }
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }
}

/// Writes reports as CSV with 17 significant digits.
pub fn write_reports_csv<W: Write>(reports: &[McReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "theorem-id", "s", "n", "params", "estimate", "std_error", "n_samples", "bound",
        "direction", "verdict", "z_margin",
    ])?;
    for r in reports {
        w.write_record([
            r.check.clone(),
            format!("{:.16e}", r.s),
            r.n.to_string(),
            r.params.clone(),
            format!("{:.16e}", r.estimate),
            format!("{:.16e}", r.std_error),
            r.n_samples.to_string(),
            format!("{:.16e}", r.bound),
            r.direction.as_str().to_owned(),
            r.verdict.as_str().to_owned(),
            format!("{:.16e}", r.z_margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: u64,
}

impl Estimate {
    pub fn proportion(hits: u64, n: u64) -> Self {
        let p = hits as f64 / n as f64;
        Self { estimate: p, std_error: (p * (1.0 - p) / n as f64).sqrt(), n_samples: n }
    }

    pub fn exact(value: f64) -> Self {
        Self { estimate: value, std_error: 0.0, n_samples: 0 }
    }
}

/// Draws `n` points and lets `classify` bump any of `slots` counters per point.
/// Shards are merged by summing counts, so the result is thread-count free.
pub fn mc_tally<F>(model: &Model, n: usize, stream: &Stream, slots: usize, classify: F) -> Vec<u64>
where
    F: Fn(&[f64], &mut [u64]) + Sync,
{
    let dim = model.dim();
    let parts = sharded(n, stream, |len, rng| {
        let mut counts = vec![0u64; slots];
        let mut x = vec![0.0; dim];
        for _ in 0..len {
            model.sample_into(rng, &mut x);
            classify(&x, &mut counts);
        }
        counts
    });
    parts.into_iter().fold(vec![0u64; slots], |mut acc, c| {
        acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        acc
    })
}

pub fn mc_probability<F>(model: &Model, event: F, n: usize, stream: &Stream) -> Result<Estimate>
where
    F: Fn(&[f64]) -> bool + Sync,
{
    if n < 1000 {
        return Err(precondition("mc_probability", "need at least 1000 samples"));
    }
    let hits = mc_tally(model, n, stream, 1, |x, c| c[0] += event(x) as u64)[0];
    Ok(Estimate::proportion(hits, n as u64))
}

fn check_model(p: SConcaveParams, model: &Model) -> Result<()> {
    if model.dim() != p.n {
        return Err(precondition("verify", format!("model dimension {} != n = {}", model.dim(), p.n)));
    }
    Ok(())
}

fn check_unit(op: &'static str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n || (norm(v) - 1.0).abs() > 1e-9 {
        return Err(precondition(op, "direction must be a unit vector of dimension n"));
    }
    Ok(())
}

fn angle(u: &[f64], v: &[f64]) -> f64 {
    dot(u, v).clamp(-1.0, 1.0).acos()
}

/// Band mass Pr[|w·x| ≤ t] against f3·t, and against f2·t when t ≤ d.
pub fn verify_band(
    p: SConcaveParams,
    model: &Model,
    w: &[f64],
    t_grid: &[f64],
    n: usize,
    stream: &Stream,
) -> Result<Vec<McReport>> {
    p.require_geometry("verify_band")?;
    check_model(p, model)?;
    check_unit("verify_band", w, p.n)?;
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(precondition("verify_band", "t grid must be positive"));
    }
    let band = band_bounds(p)?;
    let counts = mc_tally(model, n, stream, t_grid.len(), |x, c| {
        let m = dot(w, x).abs();
        for (slot, &t) in c.iter_mut().zip(t_grid) {
            *slot += (m <= t) as u64;
        }
    });
    let mut out = Vec::new();
    for (&t, &hits) in t_grid.iter().zip(&counts) {
        let est = Estimate::proportion(hits, n as u64);
        let params = format!("t={t:.6e}");
        out.push(McReport::new("band-upper", p, &params, est, band.f3 * t, Direction::AtMost));
        if t <= band.d {
            out.push(McReport::new("band-lower", p, &params, est, band.f2 * t, Direction::AtLeast));
        }
    }
    Ok(out)
}

/// Pr[w·(x − mean) ≥ 0] against (1+γ)^{−1/γ} with γ = s/(1+ns).
pub fn verify_centroid_halfspace(
    p: SConcaveParams,
    model: &Model,
    w: &[f64],
    n: usize,
    stream: &Stream,
) -> Result<McReport> {
    check_model(p, model)?;
    check_unit("verify_centroid_halfspace", w, p.n)?;
    let mean = model.mean();
    if mean.iter().any(|m| !m.is_finite()) {
        return Err(regime("verify_centroid_halfspace", "the mean is infinite"));
    }
    let gamma = p.s / (1.0 + p.n as f64 * p.s);
    let bound = halfspace_mass_lower(gamma)?;
    let shift = dot(w, &mean);
    let est = mc_probability(model, |x| dot(w, x) >= shift, n, stream)?;
    Ok(McReport::new("centroid-halfspace", p, "", est, bound, Direction::AtLeast))
}

/// d_D(u, v) ≥ f1·θ(u, v).
pub fn verify_disagreement(
    p: SConcaveParams,
    model: &Model,
    u: &[f64],
    v: &[f64],
    knobs: &Knobs,
    n: usize,
    stream: &Stream,
) -> Result<McReport> {
    p.require_geometry("verify_disagreement")?;
    check_model(p, model)?;
    check_unit("verify_disagreement", u, p.n)?;
    check_unit("verify_disagreement", v, p.n)?;
    let theta = angle(u, v);
    if theta >= PI {
        return Err(precondition("verify_disagreement", "theta must be below pi"));
    }
    let f1 = disagreement_lower_f1(p, knobs.c_f1)?;
    let est = mc_probability(model, |x| (dot(u, x) >= 0.0) != (dot(v, x) >= 0.0), n, stream)?;
    Ok(McReport::new(
        "disagreement",
        p,
        format!("theta={theta:.6e}"),
        est,
        f1 * theta,
        Direction::AtLeast,
    ))
}

/// Pr[sign(u·x) ≠ sign(v·x) and |v·x| ≥ f4·θ] ≤ c1·f1·θ, with f4 scaled by
/// `threshold_scale` (1 for the stated bound).
#[allow(clippy::too_many_arguments)]
pub fn verify_disagreement_outside_band(
    p: SConcaveParams,
    model: &Model,
    u: &[f64],
    v: &[f64],
    knobs: &Knobs,
    threshold_scale: f64,
    n: usize,
    stream: &Stream,
) -> Result<McReport> {
    const OP: &str = "verify_disagreement_outside_band";
    p.require_geometry(OP)?;
    check_model(p, model)?;
    check_unit(OP, u, p.n)?;
    check_unit(OP, v, p.n)?;
    let theta = angle(u, v);
    if theta >= FRAC_PI_2 {
        return Err(precondition(OP, "theta must be below pi/2"));
    }
    let f1 = disagreement_lower_f1(p, knobs.c_f1)?;
    let cut = threshold_scale * band_margin_f4(p, knobs.c1, f1)? * theta;
    let est = mc_probability(
        model,
        |x| {
            let vx = dot(v, x);
            (dot(u, x) >= 0.0) != (vx >= 0.0) && vx.abs() >= cut
        },
        n,
        stream,
    )?;
    Ok(McReport::new(
        "disagreement-outside-band",
        p,
        format!("theta={theta:.6e}"),
        est,
        knobs.c1 * f1 * theta,
        Direction::AtMost,
    ))
}

/// `n` draws from the model conditioned on |u·x| ≤ t, by rejection.
/// Returns the accepted values of `stat` and the acceptance rate.
pub fn band_conditional<F>(
    model: &Model,
    u: &[f64],
    t: f64,
    n: usize,
    stream: &Stream,
    stat: F,
) -> Result<(Vec<f64>, f64)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    const PROBE: u64 = 100_000;
    let dim = model.dim();
    let parts = sharded(n, stream, |len, rng| {
        let mut x = vec![0.0; dim];
        let mut out = Vec::with_capacity(len);
        let mut tried = 0u64;
        while out.len() < len {
            model.sample_into(rng, &mut x);
            tried += 1;
            if dot(u, &x).abs() <= t {
                out.push(stat(&x));
            } else if tried >= PROBE && (out.len() as f64) < 1e-3 * tried as f64 {
                return Err(Error::Starvation { acceptance: out.len() as f64 / tried as f64 });
            }
        }
        Ok((out, tried))
    });
    let mut values = Vec::with_capacity(n);
    let mut tried = 0;
    for part in parts {
        let (v, k) = part?;
        values.extend(v);
        tried += k;
    }
    Ok((values, n as f64 / tried as f64))
}

/// Mean with a batch-means standard error over 50 consecutive batches.
pub fn batch_mean(values: &[f64]) -> Estimate {
    let batches = 50.min(values.len());
    let size = values.len() / batches;
    let means: Vec<f64> = (0..batches)
        .map(|b| values[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches as f64 - 1.0).max(1.0);
    Estimate {
        estimate: values.iter().sum::<f64>() / values.len() as f64,
        std_error: (var / batches as f64).sqrt(),
        n_samples: values.len() as u64,
    }
}

/// E[(a·x)² | |u·x| ≤ t] ≤ f5·(r² + t²).
#[allow(clippy::too_many_arguments)]
pub fn verify_conditional_variance(
    p: SConcaveParams,
    model: &Model,
    u: &[f64],
    a: &[f64],
    r: f64,
    t: f64,
    knobs: &Knobs,
    n: usize,
    stream: &Stream,
) -> Result<(McReport, f64)> {
    const OP: &str = "verify_conditional_variance";
    p.require_geometry(OP)?;
    check_model(p, model)?;
    check_unit(OP, u, p.n)?;
    let gap: f64 = u.iter().zip(a).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    if gap > r + 1e-12 || norm(a) > 1.0 + 1e-12 {
        return Err(precondition(OP, "need |u - a| <= r and |a| <= 1"));
    }
    let band = band_bounds(p)?;
    if !(t > 0.0 && t <= band.d) {
        return Err(precondition(OP, format!("t = {t} outside (0, d = {}]", band.d)));
    }
    let f5 = variance_bound_f5(p, knobs.c0_variance)?;
    let (values, acceptance) = band_conditional(model, u, t, n, stream, |x| dot(a, x).powi(2))?;
    let report = McReport::new(
        "conditional-variance",
        p,
        format!("r={r:.6e};t={t:.6e}"),
        batch_mean(&values),
        f5 * (r * r + t * t),
        Direction::AtMost,
    );
    Ok((report, acceptance))
}

/// Pr[‖x‖ > √n·t] against the tail bound.
///
/// The bound assumes isotropy, so for the Pareto family the rows are recorded
/// rather than judged, and the closed-form tail is logged next to them.
pub fn verify_tail(
    p: SConcaveParams,
    model: &Model,
    t_grid: &[f64],
    c: f64,
    n: usize,
    stream: &Stream,
) -> Result<Vec<McReport>> {
    check_model(p, model)?;
    let scale = (p.n as f64).sqrt();
    let bounds = t_grid.iter().map(|&t| tail_bound(p, t, c)).collect::<Result<Vec<_>>>()?;
    let counts = mc_tally(model, n, stream, t_grid.len(), |x, cnt| {
        let r = norm(x);
        for (slot, &t) in cnt.iter_mut().zip(t_grid) {
            *slot += (r > scale * t) as u64;
        }
    });
    let direction = if model.is_symmetric() { Direction::AtMost } else { Direction::Recorded };
    let mut out = Vec::new();
    for ((&t, &hits), &bound) in t_grid.iter().zip(&counts).zip(&bounds) {
        let params = format!("t={t:.6e};c={c:.6e}");
        let est = Estimate::proportion(hits, n as u64);
        out.push(McReport::new("tail", p, &params, est, bound, direction));
        if let Model::Pareto(m) = model {
            let exact = Estimate::exact(m.tail(scale * t)?);
            out.push(McReport::new("tail-exact", p, &params, exact, bound, Direction::Recorded));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaCheck {
    pub pass: bool,
    /// First triple (left, mid, right) where the midpoint inequality fails.
    pub violation: Option<(f64, f64, f64)>,
}

/// Checks that f^γ is midpoint convex over all symmetric triples of a
/// uniform grid, which for γ < 0 is γ-concavity of f.
pub fn check_gamma_concavity<F: Fn(f64) -> f64>(f: F, gamma: f64, grid: &[f64]) -> Result<GammaCheck> {
    if !(gamma < 0.0) {
        return Err(precondition("check_gamma_concavity", "gamma must be negative"));
    }
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    if vals.iter().any(|&v| !(v > 0.0)) {
        return Err(precondition("check_gamma_concavity", "function must be positive on the grid"));
    }
    let pw: Vec<f64> = vals.iter().map(|v| v.powf(gamma)).collect();
    for i in 1..grid.len() {
        for k in 1..=i.min(grid.len() - 1 - i) {
            let rhs = 0.5 * pw[i - k] + 0.5 * pw[i + k];
            if pw[i] > rhs + 1e-9 * rhs.abs().max(1.0) {
                return Ok(GammaCheck {
                    pass: false,
                    violation: Some((grid[i - k], grid[i], grid[i + k])),
                });
            }
        }
    }
    Ok(GammaCheck { pass: true, violation: None })
}

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let l = norm(&v);
        if l > 1e-12 {
            return v.into_iter().map(|x| x / l).collect();
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReflectionReport {
    pub k: f64,
    pub rows: Vec<McReport>,
    pub skipped: usize,
    /// Largest observed Pr[−R]/Pr[R] among non-skipped regions.
    pub worst_ratio: f64,
}

/// Pr[x ∈ −R] ≤ K·Pr[x ∈ R] for regions R cut out by three origin-centered
/// halfspaces. All regions share one sample.
pub fn reflection_regions(
    p: SConcaveParams,
    model: &Model,
    regions: &[[Vec<f64>; 3]],
    n_samples: usize,
    stream: &Stream,
) -> Result<ReflectionReport> {
    check_model(p, model)?;
    let k = baum_reflection_k(p)?;
    let counts = mc_tally(model, n_samples, stream, 2 * regions.len(), |x, c| {
        for (i, normals) in regions.iter().enumerate() {
            let d: [f64; 3] = std::array::from_fn(|j| dot(&normals[j], x));
            c[2 * i] += d.iter().all(|&v| v >= 0.0) as u64;
            c[2 * i + 1] += d.iter().all(|&v| v <= 0.0) as u64;
        }
    });
    let mut rows = Vec::new();
    let (mut skipped, mut worst) = (0, 0.0f64);
    let total = n_samples as u64;
    for (i, pair) in counts.chunks(2).enumerate() {
        if (pair[0] as f64) < 10.0 {
            skipped += 1;
            continue;
        }
        let pos = Estimate::proportion(pair[0], total);
        let neg = Estimate::proportion(pair[1], total);
        worst = worst.max(neg.estimate / pos.estimate);
        rows.push(McReport::new(
            "reflection",
            p,
            format!("region={i}"),
            neg,
            k * pos.estimate,
            Direction::AtMost,
        ));
    }
    Ok(ReflectionReport { k, rows, skipped, worst_ratio: worst })
}

pub fn reflection_experiment(
    p: SConcaveParams,
    model: &Model,
    trials: usize,
    n_samples: usize,
    stream: &Stream,
) -> Result<ReflectionReport> {
    if p.n < 3 {
        return Err(precondition("reflection_experiment", "n must be >= 3"));
    }
    let mut rng = stream.child("regions").rng();
    let regions: Vec<[Vec<f64>; 3]> = (0..trials)
        .map(|_| std::array::from_fn(|_| random_unit(&mut rng, p.n)))
        .collect();
    reflection_regions(p, model, &regions, n_samples, &stream.child("sample"))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PackingReport {
    pub candidates: usize,
    pub survivors: usize,
    pub removed: usize,
    pub lower_bound: u64,
}

/// Greedy ε-packing of random unit normals under the estimated d_D.
pub fn packing_experiment(
    p: SConcaveParams,
    model: &Model,
    eps: f64,
    n_candidates: usize,
    n_mc: usize,
    knobs: &Knobs,
    stream: &Stream,
) -> Result<PackingReport> {
    if !(eps > 0.0) {
        return Err(precondition("packing_experiment", "eps must be positive"));
    }
    check_model(p, model)?;
    let mut rng = stream.child("candidates").rng();
    let cands: Vec<Vec<f64>> = (0..n_candidates).map(|_| random_unit(&mut rng, p.n)).collect();
    let sample = model.sample(n_mc, &stream.child("sample"))?;
    let words = n_mc.div_ceil(64);
    // One sign bitset per candidate over the shared sample.
    let signs: Vec<Vec<u64>> = cands
        .iter()
        .map(|w| {
            let mut bits = vec![0u64; words];
            for (i, x) in sample.rows().enumerate() {
                if dot(w, x) >= 0.0 {
                    bits[i / 64] |= 1 << (i % 64);
                }
            }
            bits
        })
        .collect();
    let mut alive = vec![true; n_candidates];
    let mut removed = 0;
    for i in 0..n_candidates {
        for j in i + 1..n_candidates {
            if !(alive[i] && alive[j]) {
                continue;
            }
            let diff: u32 = signs[i].iter().zip(&signs[j]).map(|(a, b)| (a ^ b).count_ones()).sum();
            if (diff as f64) / (n_mc as f64) < eps {
                alive[j] = false;
                removed += 1;
            }
        }
    }
    Ok(PackingReport {
        candidates: n_candidates,
        survivors: alive.iter().filter(|&&a| a).count(),
        removed,
        lower_bound: packing_lower_bound(p, eps, knobs.c_f1)?,
    })
}

/// Largest excess of the model density over the radial envelope on `n` draws,
/// compared against 1e−12.
pub fn verify_envelope(p: SConcaveParams, model: &Model, n: usize, stream: &Stream) -> Result<McReport> {
    check_model(p, model)?;
    let env = density_envelope(p.n, p.s)?;
    let sample = model.sample(n, stream)?;
    let worst = sample
        .rows()
        .map(|x| model.pdf(x) - env.at(p.s, norm(x)))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut est = Estimate::exact(worst);
    est.n_samples = n as u64;
    Ok(McReport::new("density-envelope", p, "", est, 1e-12, Direction::AtMost))
}

/// Peak and value at the mean of a 1-D isotropic density against the
/// closed-form upper and lower limits.
pub fn verify_one_dim_density(p: SConcaveParams, model: &Model) -> Result<Vec<McReport>> {
    let Model::Symmetric(m) = model else {
        return Err(precondition("verify_one_dim_density", "needs the symmetric 1-D family"));
    };
    let s = p.s;
    let peak = m.pdf(0.0);
    let upper = (1.0 + s) / (1.0 + 3.0 * s);
    let g = s / (1.0 + s);
    let lower = (-(3f64.ln() + 3.0 * ln1p_ratio(g)) / 2.0).exp();
    Ok(vec![
        McReport::new("density-peak", p, "", Estimate::exact(peak), upper, Direction::AtMost),
        McReport::new("density-at-mean", p, "", Estimate::exact(peak), lower, Direction::AtLeast),
    ])
}

/// Eight band widths relative to d.
pub fn default_t_grid(d: f64) -> Vec<f64> {
    [1.0 / 32.0, 1.0 / 8.0, 0.25, 0.5, 0.75, 1.0, 2.0, 4.0].iter().map(|k| k * d).collect()
}

pub fn unit_axis(n: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[i] = 1.0;
    v
}

/// A unit vector at angle θ from the first axis, in the plane of the first two.
pub fn rotated_axis(n: usize, theta: f64) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = theta.cos();
    v[1] = theta.sin();
    v
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometrySuite {
    pub rows: Vec<McReport>,
    /// Smallest rejection acceptance among the conditional-variance checks.
    pub min_acceptance: Option<f64>,
}

/// The full set of geometric checks for one (s, n) cell.
pub fn verify_geometry(
    p: SConcaveParams,
    model: &Model,
    knobs: &Knobs,
    n_samples: usize,
    stream: &Stream,
) -> Result<GeometrySuite> {
    let n = p.n;
    let w = unit_axis(n, 0);
    let mut rows = Vec::new();
    let mut min_acceptance: Option<f64> = None;
    if p.geometry_valid() && model.is_symmetric() {
        let band = band_bounds(p)?;
        rows.extend(verify_band(p, model, &w, &default_t_grid(band.d), n_samples, &stream.child("band"))?);
    }
    if model.mean().iter().all(|m| m.is_finite()) {
        rows.push(verify_centroid_halfspace(p, model, &w, n_samples, &stream.child("centroid"))?);
    }
    if n >= 2 && p.geometry_valid() {
        for (i, theta) in [0.05, 0.2, 0.5, 1.0].into_iter().enumerate() {
            let v = rotated_axis(n, theta);
            let st = stream.child("disagreement").child(i);
            rows.push(verify_disagreement(p, model, &w, &v, knobs, n_samples, &st)?);
            let st = stream.child("outside-band").child(i);
            rows.push(verify_disagreement_outside_band(p, model, &w, &v, knobs, 1.0, n_samples, &st)?);
        }
        let band = band_bounds(p)?;
        for (i, (r, tf)) in [(0.0, 0.5), (0.1, 0.5), (0.1, 1.0)].into_iter().enumerate() {
            let a = rotated_axis(n, 2.0 * (r / 2.0f64).asin());
            let st = stream.child("variance").child(i);
            let (row, acc) = verify_conditional_variance(
                p, model, &w, &a, r, tf * band.d, knobs, n_samples / 4, &st,
            )?;
            min_acceptance = Some(min_acceptance.map_or(acc, |m| m.min(acc)));
            rows.push(row);
        }
        rows.push(verify_envelope(p, model, 1000, &stream.child("envelope"))?);
    }
    if 1.0 + n as f64 * p.s > 0.0 {
        rows.extend(verify_tail(p, model, &[16.0, 20.0, 32.0], knobs.c_tail, n_samples, &stream.child("tail"))?);
    }
    if let Model::Symmetric(_) = model {
        rows.extend(verify_one_dim_density(p, model)?);
    }
    Ok(GeometrySuite { rows, min_acceptance })
}
