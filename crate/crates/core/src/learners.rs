//! Margin-based active learners, the passive baseline, the two-halfspace
//! learner and a label oracle with a budgeted adversary.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    al_schedule, baum_reflection_k, baum_sizes, disagreement_coefficient_bound,
    disagreement_lower_f1, vc_sample_size, AlSchedule, Knobs, NoiseModel, SConcaveParams,
};
use crate::densities::{dot, norm, Model};
use crate::error::{precondition, Error, Result};
use crate::optim::{
    find_consistent_halfspace, fit_quadratic_separator, minimize_hinge, HingeProblem, LabeledSet,
    QuadraticSeparator,
};
use crate::rng::Stream;
use crate::verify::{band_conditional, mc_probability, Estimate};

/// Consecutive band rejections tolerated before a fill gives up.
pub const MAX_REJECTIONS: u64 = 100_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    /// Flip points whose margin is below the running quantile of seen margins.
    BoundaryProximal,
    Uniform,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum Noise {
    Realizable,
    Adversarial { eta: f64, strategy: Strategy },
}

// Counts of log2|margin| in bins of 1/8 octave over [2^-60, 2^20).
#[derive(Clone, Debug)]
struct MarginHistogram {
    bins: Vec<u64>,
    total: u64,
}

impl MarginHistogram {
    const LO: f64 = -60.0;
    const PER_OCTAVE: f64 = 8.0;
    const LEN: usize = 80 * 8;

    fn new() -> Self {
        Self { bins: vec![0; Self::LEN + 1], total: 0 }
    }

    fn bin(m: f64) -> usize {
        if m <= 0.0 {
            return 0;
        }
        let b = ((m.log2() - Self::LO) * Self::PER_OCTAVE).floor() + 1.0;
        b.clamp(0.0, Self::LEN as f64) as usize
    }

    fn upper_edge(b: usize) -> f64 {
        (Self::LO + b as f64 / Self::PER_OCTAVE).exp2()
    }

    fn add(&mut self, m: f64) {
        self.bins[Self::bin(m)] += 1;
        self.total += 1;
    }

    // Smallest bin edge below which at least a q fraction of margins fall.
    fn quantile(&self, q: f64) -> f64 {
        let want = (q * self.total as f64).ceil().max(1.0) as u64;
        let mut seen = 0;
        for (b, &c) in self.bins.iter().enumerate() {
            seen += c;
            if seen >= want {
                return Self::upper_edge(b);
            }
        }
        f64::INFINITY
    }
}

/// Labels points by a target halfspace, optionally corrupting them within a
/// budget of η times the number of points generated so far.
#[derive(Clone, Debug)]
pub struct LabelOracle {
    target: Vec<f64>,
    noise: Noise,
    quantile: f64,
    margins: MarginHistogram,
    rng: ChaCha8Rng,
    pub generated: u64,
    pub queries: u64,
    pub flips: u64,
}

impl LabelOracle {
    pub fn realizable(target: Vec<f64>) -> Self {
        Self::new(target, Noise::Realizable, 0.0, &Stream::root(0))
    }

    /// `quantile` is the margin quantile the boundary-proximal adversary
    /// targets; `stream` drives uniform flips.
    pub fn new(target: Vec<f64>, noise: Noise, quantile: f64, stream: &Stream) -> Self {
        Self {
            target,
            noise,
            quantile,
            margins: MarginHistogram::new(),
            rng: stream.rng(),
            generated: 0,
            queries: 0,
            flips: 0,
        }
    }

    pub fn target(&self) -> &[f64] {
        &self.target
    }

    pub fn noise(&self) -> Noise {
        self.noise
    }

    pub fn is_realizable(&self) -> bool {
        matches!(self.noise, Noise::Realizable) || matches!(self.noise, Noise::Adversarial { eta, .. } if eta == 0.0)
    }

    /// Records a generated point that is not sent for labeling.
    pub fn observe(&mut self, x: &[f64]) {
        self.generated += 1;
        if matches!(self.noise, Noise::Adversarial { strategy: Strategy::BoundaryProximal, .. }) {
            self.margins.add(dot(&self.target, x).abs());
        }
    }

    /// Generates and labels `x`.
    pub fn query(&mut self, x: &[f64]) -> f64 {
        self.observe(x);
        self.queries += 1;
        let m = dot(&self.target, x);
        let clean = if m >= 0.0 { 1.0 } else { -1.0 };
        let Noise::Adversarial { eta, strategy } = self.noise else {
            return clean;
        };
        if (self.flips + 1) as f64 > eta * self.generated as f64 {
            return clean;
        }
        let flip = match strategy {
            Strategy::BoundaryProximal => m.abs() < self.margins.quantile(self.quantile),
            Strategy::Uniform => self.rng.random::<f64>() < eta,
        };
        if flip {
            self.flips += 1;
            -clean
        } else {
            clean
        }
    }
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Angle between two unit vectors.
pub fn angle(u: &[f64], v: &[f64]) -> f64 {
    (dot(u, v) / (norm(u) * norm(v))).clamp(-1.0, 1.0).acos()
}

/// Pr[sign(w·x) ≠ sign(target·x)] on `n` fresh points.
pub fn halfspace_error(model: &Model, w: &[f64], target: &[f64], n: usize, stream: &Stream) -> Result<Estimate> {
    mc_probability(model, |x| sign(dot(w, x)) != sign(dot(target, x)), n, stream)
}

fn draw_labeled(model: &Model, rng: &mut ChaCha8Rng, oracle: &mut LabelOracle, count: u64, set: &mut LabeledSet) {
    let mut x = vec![0.0; model.dim()];
    for _ in 0..count {
        model.sample_into(rng, &mut x);
        let y = oracle.query(&x);
        set.push(&x, y);
    }
}

// Adds `count` labeled points with |w·x| < band; returns the number drawn.
fn fill_band(
    model: &Model,
    rng: &mut ChaCha8Rng,
    oracle: &mut LabelOracle,
    w: &[f64],
    band: f64,
    count: u64,
    set: &mut LabeledSet,
) -> Result<u64> {
    let mut x = vec![0.0; model.dim()];
    let (mut added, mut drawn, mut run) = (0, 0u64, 0u64);
    while added < count {
        model.sample_into(rng, &mut x);
        drawn += 1;
        if dot(w, &x).abs() >= band {
            oracle.observe(&x);
            run += 1;
            if run > MAX_REJECTIONS {
                return Err(Error::StreamExhausted { rejections: run });
            }
            continue;
        }
        run = 0;
        let y = oracle.query(&x);
        set.push(&x, y);
        added += 1;
    }
    Ok(drawn)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundLog {
    pub k: usize,
    /// Labels consumed to build this round's working set.
    pub labels: u64,
    /// Points drawn (accepted or rejected) to build it.
    pub drawn: u64,
    /// Band the working set was drawn from; infinite for the first round.
    pub band: f64,
    pub angle: f64,
    pub hinge_loss: Option<f64>,
    pub kappa: Option<f64>,
    /// ‖v_k‖ before normalization.
    pub v_norm: Option<f64>,
    /// Error of w_k against the target inside the previous band.
    pub band_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlRunResult {
    pub w: Vec<f64>,
    pub rounds: Vec<RoundLog>,
    pub total_labels: u64,
    pub error: Estimate,
    pub flips: u64,
    pub generated: u64,
    pub schedule: AlSchedule,
    /// Rounds where ‖v_k‖ < 1/2 before renormalization.
    pub small_norm_rounds: Vec<usize>,
}

/// Sizes of the run-time MC evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EvalSizes {
    /// Fresh points for the final error estimate.
    pub error_points: usize,
    /// Accepted band points for each per-round band error audit; 0 disables it.
    pub band_audit_points: usize,
}

impl Default for EvalSizes {
    fn default() -> Self {
        Self { error_points: 100_000, band_audit_points: 4_000 }
    }
}

fn check_target(p: SConcaveParams, model: &Model, target: &[f64]) -> Result<()> {
    if model.dim() != p.n || target.len() != p.n || (norm(target) - 1.0).abs() > 1e-9 {
        return Err(precondition("learner", "target must be a unit vector matching the model dimension"));
    }
    Ok(())
}

/// Realizable margin-based active learning: consistent hypotheses on a
/// working set that grows by band-filtered labels each round.
///
/// The fill after the last round would label points no hypothesis uses, so it
/// is skipped.
#[allow(clippy::too_many_arguments)]
pub fn margin_al_realizable(
    p: SConcaveParams,
    model: &Model,
    oracle: &mut LabelOracle,
    eps: f64,
    delta: f64,
    knobs: &Knobs,
    eval: EvalSizes,
    stream: &Stream,
) -> Result<AlRunResult> {
    check_target(p, model, oracle.target())?;
    if !oracle.is_realizable() {
        return Err(precondition("margin_al_realizable", "oracle must be noise free"));
    }
    let schedule = al_schedule(p, eps, delta, knobs, NoiseModel::Realizable)?;
    let target = oracle.target().to_vec();
    let mut rng = stream.child("train").rng();
    let mut set = LabeledSet::new(p.n);
    let first = schedule.rounds[0].labels;
    draw_labeled(model, &mut rng, oracle, first, &mut set);
    let (mut labels, mut drawn, mut band) = (first, first, f64::INFINITY);
    let mut rounds = Vec::new();
    let mut w = Vec::new();
    for k in 1..=schedule.rounds_total {
        w = find_consistent_halfspace(&set)?;
        rounds.push(RoundLog {
            k,
            labels,
            drawn,
            band,
            angle: angle(&w, &target),
            hinge_loss: None,
            kappa: None,
            v_norm: None,
            band_error: None,
        });
        if k < schedule.rounds_total {
            band = schedule.rounds[k - 1].band;
            labels = schedule.rounds[k].labels;
            drawn = fill_band(model, &mut rng, oracle, &w, band, labels, &mut set)?;
        }
    }
    let error = halfspace_error(model, &w, &target, eval.error_points, &stream.child("eval"))?;
    Ok(AlRunResult {
        total_labels: rounds.iter().map(|r| r.labels).sum(),
        w,
        rounds,
        error,
        flips: oracle.flips,
        generated: oracle.generated,
        schedule,
        small_norm_rounds: Vec::new(),
    })
}

fn unit_or(v: &[f64], fallback: &[f64]) -> Vec<f64> {
    let l = norm(v);
    if l > 0.0 {
        v.iter().map(|x| x / l).collect()
    } else {
        fallback.to_vec()
    }
}

/// Margin-based active learning under adversarial label noise: localized
/// hinge minimization on a working set redrawn from the band each round.
#[allow(clippy::too_many_arguments)]
pub fn margin_al_adversarial(
    p: SConcaveParams,
    model: &Model,
    oracle: &mut LabelOracle,
    eps: f64,
    delta: f64,
    knobs: &Knobs,
    eval: EvalSizes,
    stream: &Stream,
) -> Result<AlRunResult> {
    check_target(p, model, oracle.target())?;
    if let Noise::Adversarial { eta, .. } = oracle.noise() {
        if !(eta < knobs.c_noise * eps) {
            return Err(precondition(
                "margin_al_adversarial",
                format!("noise rate {eta} is not below c_noise * eps = {}", knobs.c_noise * eps),
            ));
        }
    }
    let schedule = al_schedule(p, eps, delta, knobs, NoiseModel::Adversarial)?;
    let target = oracle.target().to_vec();
    let mut rng = stream.child("train").rng();
    let mut set = LabeledSet::new(p.n);
    let first = schedule.rounds[0].labels;
    draw_labeled(model, &mut rng, oracle, first, &mut set);
    let mut axis = vec![0.0; p.n];
    axis[0] = 1.0;
    let sum: Vec<f64> =
        (0..p.n).map(|j| set.iter().map(|(x, y)| y * x[j]).sum::<f64>()).collect();
    let mut w = unit_or(&sum, &axis);
    let (mut labels, mut drawn, mut band) = (first, first, f64::INFINITY);
    let mut rounds = Vec::new();
    let mut small = Vec::new();
    for k in 1..=schedule.rounds_total {
        let sched = &schedule.rounds[k - 1];
        let sol = minimize_hinge(&HingeProblem {
            set: &set,
            tau: sched.tau,
            center: w.clone(),
            radius: sched.radius,
            accuracy: sched.kappa / 8.0,
            max_iter: knobs.hinge_max_iter,
        })?;
        let v_norm = norm(&sol.w);
        if v_norm < 0.5 {
            small.push(k);
        }
        let next = unit_or(&sol.w, &w);
        let prev = std::mem::replace(&mut w, next);
        let band_error = if eval.band_audit_points > 0 {
            let st = stream.child("audit").child(k);
            let (wrong, _) = band_conditional(model, &prev, band, eval.band_audit_points, &st, |x| {
                (sign(dot(&w, x)) != sign(dot(&target, x))) as u8 as f64
            })?;
            Some(wrong.iter().sum::<f64>() / wrong.len() as f64)
        } else {
            None
        };
        rounds.push(RoundLog {
            k,
            labels,
            drawn,
            band,
            angle: angle(&w, &target),
            hinge_loss: Some(sol.loss),
            kappa: Some(sched.kappa),
            v_norm: Some(v_norm),
            band_error,
        });
        if k < schedule.rounds_total {
            set = LabeledSet::new(p.n);
            band = sched.band;
            labels = schedule.rounds[k].labels;
            drawn = fill_band(model, &mut rng, oracle, &w, band, labels, &mut set)?;
        }
    }
    let error = halfspace_error(model, &w, &target, eval.error_points, &stream.child("eval"))?;
    Ok(AlRunResult {
        total_labels: rounds.iter().map(|r| r.labels).sum(),
        w,
        rounds,
        error,
        flips: oracle.flips,
        generated: oracle.generated,
        schedule,
        small_norm_rounds: small,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PassiveResult {
    pub w: Vec<f64>,
    pub labels: u64,
    pub error: Estimate,
}

/// Labels vc_sample_size(eps, delta, n) i.i.d. points and returns a
/// consistent halfspace.
#[allow(clippy::too_many_arguments)]
pub fn passive_baseline(
    p: SConcaveParams,
    model: &Model,
    oracle: &mut LabelOracle,
    eps: f64,
    delta: f64,
    knobs: &Knobs,
    eval: EvalSizes,
    stream: &Stream,
) -> Result<PassiveResult> {
    check_target(p, model, oracle.target())?;
    let labels = vc_sample_size(eps, delta, p.n, knobs.c_vc)?;
    let mut set = LabeledSet::new(p.n);
    draw_labeled(model, &mut stream.child("train").rng(), oracle, labels, &mut set);
    let w = find_consistent_halfspace(&set)?;
    let error = halfspace_error(model, &w, oracle.target(), eval.error_points, &stream.child("eval"))?;
    Ok(PassiveResult { w, labels, error })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum IntersectionHypothesis {
    AllNegative,
    Composite { cover: Vec<f64>, xor: QuadraticSeparator },
}

impl IntersectionHypothesis {
    pub fn predict(&self, x: &[f64]) -> f64 {
        match self {
            Self::AllNegative => -1.0,
            Self::Composite { cover, xor } => {
                if dot(cover, x) >= 0.0 {
                    xor.predict(x)
                } else {
                    -1.0
                }
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaumResult {
    pub hypothesis: IntersectionHypothesis,
    pub sizes: (u64, u64, u64),
    pub reflection_k: f64,
    pub positives: u64,
    pub labels: u64,
    /// Step-one positives the composite labels negative.
    pub positive_misses: u64,
    pub error: Estimate,
}

fn in_intersection(u: &[f64], v: &[f64], x: &[f64]) -> f64 {
    if dot(u, x) >= 0.0 && dot(v, x) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Learns the intersection of the origin-centered halfspaces with normals
/// `targets` from labeled draws.
#[allow(clippy::too_many_arguments)]
pub fn baum_learn(
    p: SConcaveParams,
    model: &Model,
    targets: (&[f64], &[f64]),
    eps: f64,
    delta: f64,
    knobs: &Knobs,
    eval: EvalSizes,
    stream: &Stream,
) -> Result<BaumResult> {
    let (u, v) = targets;
    check_target(p, model, u)?;
    check_target(p, model, v)?;
    if !model.is_symmetric() {
        return Err(precondition("baum_learn", "model must be centrally symmetric"));
    }
    let k = baum_reflection_k(p)?;
    let sizes = baum_sizes(eps, delta, p.n, k, knobs.c_vc)?;
    let (m1, m2, m3) = sizes;
    let mut rng = stream.child("train").rng();
    let mut x = vec![0.0; p.n];
    let mut positives = Vec::new();
    for _ in 0..m3 {
        model.sample_into(&mut rng, &mut x);
        if in_intersection(u, v, &x) > 0.0 {
            positives.push(x.clone());
        }
    }
    let r = positives.len() as u64;
    let eval_err = |h: &IntersectionHypothesis| {
        mc_probability(model, |x| h.predict(x) != in_intersection(u, v, x), eval.error_points, &stream.child("eval"))
    };
    if r < m2 {
        let h = IntersectionHypothesis::AllNegative;
        let error = eval_err(&h)?;
        return Ok(BaumResult {
            hypothesis: h,
            sizes,
            reflection_k: k,
            positives: r,
            labels: m3,
            positive_misses: r,
            error,
        });
    }
    // Containing all positives through the origin is separating them from
    // their reflections.
    let mut cover_set = LabeledSet::new(p.n);
    for x in &positives {
        cover_set.push(x, 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        cover_set.push(&neg, -1.0);
    }
    let cover = find_consistent_halfspace(&cover_set)?;
    let mut inside = LabeledSet::new(p.n);
    let mut run = 0u64;
    while (inside.len() as u64) < m1 {
        model.sample_into(&mut rng, &mut x);
        if dot(&cover, &x) >= 0.0 {
            inside.push(&x, in_intersection(u, v, &x));
            run = 0;
        } else {
            run += 1;
            if run > MAX_REJECTIONS {
                return Err(Error::StreamExhausted { rejections: run });
            }
        }
    }
    let xor = fit_quadratic_separator(&inside)?;
    let h = IntersectionHypothesis::Composite { cover, xor };
    let positive_misses = positives.iter().filter(|x| h.predict(x) < 0.0).count() as u64;
    let error = eval_err(&h)?;
    Ok(BaumResult { hypothesis: h, sizes, reflection_k: k, positives: r, labels: m3 + m1, positive_misses, error })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CapacityRow {
    pub r: f64,
    pub mass: Estimate,
    pub capacity: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientEstimate {
    pub rows: Vec<CapacityRow>,
    /// Largest capacity over the grid.
    pub theta: f64,
    /// Bound evaluated at the smallest grid radius.
    pub bound: f64,
}

/// Capacity Pr[DIS]/r over a radius grid, with DIS replaced by the angular
/// superset {x : |w*·x| ≤ ‖x‖ sin(r/f1)}.
pub fn estimate_disagreement_coefficient(
    p: SConcaveParams,
    model: &Model,
    target: &[f64],
    r_grid: &[f64],
    n_mc: usize,
    knobs: &Knobs,
    stream: &Stream,
) -> Result<CoefficientEstimate> {
    check_target(p, model, target)?;
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(precondition("estimate_disagreement_coefficient", "radii must lie in (0, 1)"));
    }
    let f1 = disagreement_lower_f1(p, knobs.c_f1)?;
    let mut rows = Vec::new();
    for (i, &r) in r_grid.iter().enumerate() {
        let half_width = r / f1;
        let mass = if half_width >= std::f64::consts::FRAC_PI_2 {
            Estimate { estimate: 1.0, std_error: 0.0, n_samples: 0 }
        } else {
            let sin = half_width.sin();
            mc_probability(model, |x| dot(target, x).abs() <= norm(x) * sin, n_mc, &stream.child(i))?
        };
        rows.push(CapacityRow { r, capacity: mass.estimate / r, mass });
    }
    let theta = rows.iter().map(|r| r.capacity).fold(0.0, f64::max);
    let r_min = r_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = disagreement_coefficient_bound(p, r_min, knobs.c_theta, knobs.c_f1)?;
    Ok(CoefficientEstimate { rows, theta, bound })
}
