//! Closed-form geometry constants for isotropic s-concave distributions and the
//! parameter schedules of the margin-based learners.
//!
//! Every factor that is singular at s = 0 is evaluated through
//! `ln1p_ratio` / `expm1_ratio`, so the formulas are continuous into the
//! log-concave limit without a separate branch.

use std::f64::consts::{E, LN_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{precondition, regime, Result};
use crate::special::{beta, expm1_ratio, ln1p_ratio, ln_gamma};

/// Concavity exponent `s ≤ 0` and ambient dimension `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SConcaveParams {
    pub s: f64,
    pub n: usize,
}

impl SConcaveParams {
    pub fn new(s: f64, n: usize) -> Result<Self> {
        if !s.is_finite() || s > 0.0 {
            return Err(regime("params", format!("s must be finite and <= 0, got {s}")));
        }
        if n == 0 {
            return Err(regime("params", "n must be >= 1"));
        }
        Ok(Self { s, n })
    }

    /// Smallest exponent of the working range, −1/(2n+3).
    pub fn geometry_floor(n: usize) -> f64 {
        -1.0 / (2.0 * n as f64 + 3.0)
    }

    pub fn geometry_valid(&self) -> bool {
        self.s >= Self::geometry_floor(self.n) && self.s <= 0.0
    }

    pub fn second_moment_1d(&self) -> bool {
        self.s > -1.0 / 3.0
    }

    pub(crate) fn require_geometry(&self, op: &'static str) -> Result<()> {
        if self.geometry_valid() {
            Ok(())
        } else {
            Err(regime(
                op,
                format!(
                    "s < -1/(2n+3): s = {}, n = {}, floor = {:.6}",
                    self.s,
                    self.n,
                    Self::geometry_floor(self.n)
                ),
            ))
        }
    }

    fn nf(&self) -> f64 {
        self.n as f64
    }
}

/// The unnamed constants of the asymptotic statements, all defaulting to 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Knobs {
    /// c in the disagreement rate f1.
    pub c_f1: f64,
    /// c1 in the outside-band disagreement bound.
    pub c1: f64,
    /// C0 in the conditional variance bound f5.
    pub c0_variance: f64,
    /// c in the tail bound.
    pub c_tail: f64,
    /// Constant in front of the disagreement-coefficient bound.
    pub c_theta: f64,
    /// C in the VC sample size.
    pub c_vc: f64,
    /// c in the round count T = ceil(log2(1/(c·eps))).
    pub c_rounds: f64,
    pub c_b: f64,
    pub c_tau: f64,
    pub c_r: f64,
    pub c_m: f64,
    pub c_kappa: f64,
    /// c0 in the admissible noise rate eta < c0·eps.
    pub c_noise: f64,
    /// Hard cap on labels requested in a single round.
    pub round_label_cap: u64,
    /// Cap on subgradient iterations per hinge minimization.
    pub hinge_max_iter: u64,
}

impl Default for Knobs {
    fn default() -> Self {
        Self {
            c_f1: 1.0,
            c1: 1.0,
            c0_variance: 1.0,
            c_tail: 1.0,
            c_theta: 1.0,
            c_vc: 1.0,
            c_rounds: 1.0,
            c_b: 1.0,
            c_tau: 1.0,
            c_r: 1.0,
            c_m: 1.0,
            c_kappa: 1.0,
            c_noise: 1.0,
            round_label_cap: 1_000_000,
            hinge_max_iter: 1_000_000,
        }
    }
}

impl Knobs {
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let named = [
            ("c_f1", self.c_f1),
            ("c1", self.c1),
            ("c0_variance", self.c0_variance),
            ("c_tail", self.c_tail),
            ("c_theta", self.c_theta),
            ("c_vc", self.c_vc),
            ("c_rounds", self.c_rounds),
            ("c_b", self.c_b),
            ("c_tau", self.c_tau),
            ("c_r", self.c_r),
            ("c_m", self.c_m),
            ("c_kappa", self.c_kappa),
            ("c_noise", self.c_noise),
        ];
        for (name, v) in named {
            if !(v.is_finite() && v > 0.0) {
                out.push(format!("knob {name} must be positive and finite, got {v}"));
            }
        }
        if self.round_label_cap == 0 {
            out.push("knob round_label_cap must be >= 1".into());
        }
        if self.hinge_max_iter == 0 {
            out.push("knob hinge_max_iter must be >= 1".into());
        }
        out
    }
}

/// Exponent of the marginal after integrating out `m` coordinates: s/(1+ms).
pub fn marginal_gamma(s: f64, m: usize) -> Result<f64> {
    let den = 1.0 + m as f64 * s;
    if den <= 0.0 {
        return Err(regime("marginal_gamma", format!("1 + m*s = {den} <= 0 (s = {s}, m = {m})")));
    }
    Ok(s / den)
}

/// Lower bound (1+γ)^{−1/γ} on the mass of a halfspace through the mean.
pub fn halfspace_mass_lower(gamma: f64) -> Result<f64> {
    if !(gamma > -1.0 && gamma <= 0.0) {
        return Err(regime("halfspace_mass_lower", format!("gamma = {gamma} outside (-1, 0]")));
    }
    Ok((-ln1p_ratio(gamma)).exp())
}

// ln of (2 − 2^{−k g})^{−1/g}; tends to −k ln 2 as g → 0.
fn ln_two_minus_pow_inv(k: f64, g: f64) -> f64 {
    let y = -k * g * LN_2;
    let x = -y.exp_m1();
    -(k * LN_2 * expm1_ratio(y)) * ln1p_ratio(x)
}

// ln of (2e^{g m} − 1)^{−1/g}; tends to −2m as g → 0.
fn ln_bracket_inv(op: &'static str, g: f64, m: f64) -> Result<f64> {
    let x = 2.0 * (g * m).exp_m1();
    if x <= -1.0 {
        return Err(regime(op, format!("inner bracket 2*exp({g}*{m}) - 1 is not positive")));
    }
    Ok(-2.0 * m * expm1_ratio(g * m) * ln1p_ratio(x))
}

// ln[(1+β)/(1+3β) · sqrt(3 (1+γ)^{3/γ})]
fn ln_peak_factor(b: f64, g: f64) -> f64 {
    ((1.0 + b) / (1.0 + 3.0 * b)).ln() + 0.5 * (3f64.ln() + 3.0 * ln1p_ratio(g))
}

fn ln_4e_pi() -> f64 {
    (4.0 * E * PI).ln()
}

/// The band constants: Pr[|w·x| ≤ t] ≤ f3·t for all t, and > f2·t for t ≤ d.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BandBounds {
    pub f2: f64,
    pub f3: f64,
    pub d: f64,
}

pub fn band_bounds(p: SConcaveParams) -> Result<BandBounds> {
    p.require_geometry("band_bounds")?;
    let (s, n) = (p.s, p.nf());
    let g = s / (1.0 + (n - 1.0) * s);
    let f3 = 2.0 * (1.0 + n * s) / (1.0 + (n + 2.0) * s);
    let u = g / (1.0 + g);
    let d = (-ln1p_ratio(u)).exp() * (1.0 + 3.0 * g) / (3.0 + 3.0 * g);
    let inner = ((1.0 + g) / (1.0 + 3.0 * g)).ln() + 0.5 * 3f64.ln() + 1.5 * ln1p_ratio(u);
    let ln_f2 = LN_2 + ln_two_minus_pow_inv(2.0, g) - 0.5 * ln_4e_pi()
        + ln_bracket_inv("band_bounds", g, inner)?;
    Ok(BandBounds { f2: ln_f2.exp(), f3, d })
}

/// Rate f1 with d_D(u, v) ≥ f1·θ(u, v).
pub fn disagreement_lower_f1(p: SConcaveParams, c: f64) -> Result<f64> {
    p.require_geometry("disagreement_lower_f1")?;
    if !(c > 0.0) {
        return Err(precondition("disagreement_lower_f1", "c must be positive"));
    }
    let (s, n) = (p.s, p.nf());
    let a = s / (1.0 + (n - 2.0) * s);
    let b = s / (1.0 + (n - 1.0) * s);
    let g = s / (1.0 + n * s);
    let m = ln_peak_factor(b, g) + LN_2;
    let ln = ln_two_minus_pow_inv(3.0, a)
        + ln_bracket_inv("disagreement_lower_f1", a, m)?
        - 2.0 * ln1p_ratio(g)
        + 2.0 * ((1.0 + 3.0 * b) / (3.0 + 3.0 * b)).ln();
    Ok(c * ln.exp())
}

/// Coefficients of the radial envelope f(x) ≤ β1 (1 − s β2 ‖x‖)^{1/s}, the
/// constant `a` used to build β2, and the companion radius `d`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Envelope {
    pub beta1: f64,
    pub beta2: f64,
    pub a: f64,
    pub d: f64,
}

impl Envelope {
    pub fn at(&self, s: f64, radius: f64) -> f64 {
        if s == 0.0 {
            return self.beta1;
        }
        self.beta1 * ((-s * self.beta2 * radius).ln_1p() / s).exp()
    }
}

/// Envelope coefficients for an s-concave isotropic density in dimension `n`.
///
/// β2 vanishes linearly as s → 0, so at s = 0 exactly it is 0.
pub fn density_envelope(n: usize, s: f64) -> Result<Envelope> {
    const OP: &str = "density_envelope";
    let p = SConcaveParams::new(s, n)?;
    p.require_geometry(OP)?;
    let nf = n as f64;
    let b = s / (1.0 + (nf - 1.0) * s);
    let g = b / (1.0 + b);
    if !(1.0 + 3.0 * b > 0.0) {
        return Err(regime(OP, "1 + 3*beta <= 0"));
    }
    let ln_d = -ln1p_ratio(g) + ((1.0 + 3.0 * b) / (3.0 + 3.0 * b)).ln();
    let m = ln_peak_factor(b, g) + (nf - 1.0) * LN_2;
    // ln P^{-1/s} with P = (C·2^{n-1+1/s})^s − 1 = 2e^{s m} − 1
    let ln_p_inv = ln_bracket_inv(OP, s, m)?;
    let ln_beta1 = -ln_two_minus_pow_inv(nf + 1.0, s) - LN_2 - 0.5 * nf * PI.ln() - nf * ln_d
        + ln1p_ratio(-s)
        + LN_2
        + ln_gamma(nf / 2.0 + 1.0)
        - ln_p_inv;
    let x = 2.0 * (s * m).exp_m1();
    let ln_p = x.ln_1p();
    let ln_a = -0.5 * nf * s * ln_4e_pi() - ln_p;
    let beta1 = ln_beta1.exp();
    let a = ln_a.exp();
    let d = ln_d.exp();
    if s == 0.0 {
        return Ok(Envelope { beta1, beta2: 0.0, a, d });
    }
    // ln(a)/s, finite as s → 0
    let ln_a_over_s = -0.5 * nf * ln_4e_pi() - 2.0 * m * expm1_ratio(s * m) * ln1p_ratio(x);
    let b1s = (s * ln_beta1).exp();
    let outer = a + (1.0 - s) * b1s;
    if !(outer > 0.0) {
        return Err(regime(OP, "a + (1-s)*beta1^s <= 0"));
    }
    let hi = ((1.0 + 1.0 / s) * outer.ln()).exp();
    let lo = (ln_a + ln_a_over_s).exp();
    let lead = (0.5 * (nf - 1.0) * PI.ln() + (nf - 1.0) * ln_d - ln_gamma((nf + 1.0) / 2.0)).exp();
    let beta2 = lead * ln_two_minus_pow_inv(nf, s).exp() * (hi - lo) * s
        / (b1s * (1.0 + s) * (1.0 - s));
    if !(beta2 > 0.0 && beta2.is_finite() && beta1.is_finite()) {
        return Err(regime(OP, "beta2 is not positive"));
    }
    Ok(Envelope { beta1, beta2, a, d })
}

fn checked(op: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(regime(op, "value overflows f64"))
    }
}

/// f4 with Pr[sign(u·x) ≠ sign(v·x) and |v·x| ≥ f4·θ] ≤ c1·rate·θ.
///
/// Grows like |s|^{-3} as s → 0 (through β2³) and is unbounded at s = 0.
pub fn band_margin_f4(p: SConcaveParams, c1: f64, rate: f64) -> Result<f64> {
    const OP: &str = "band_margin_f4";
    p.require_geometry(OP)?;
    if !(c1 > 0.0 && rate > 0.0) {
        return Err(precondition(OP, "c1 and rate must be positive"));
    }
    let (s, n) = (p.s, p.nf());
    let a = s / (1.0 + (n - 2.0) * s);
    if a == 0.0 {
        return Err(regime(OP, "unbounded at s = 0"));
    }
    if !(-1.0 / a - 3.0 > 0.0) {
        return Err(regime(OP, format!("beta domain: -1/alpha - 3 = {} <= 0", -1.0 / a - 3.0)));
    }
    let env = density_envelope(2, a)?;
    let b = beta(-1.0 / a - 3.0, 3.0);
    checked(OP, 4.0 * env.beta1 * b / (-c1 * rate * a.powi(3) * env.beta2.powi(3)))
}

/// f5 with E[(a·x)² | |u·x| ≤ t] ≤ f5 (r² + t²). Unbounded at s = 0.
pub fn variance_bound_f5(p: SConcaveParams, c0: f64) -> Result<f64> {
    const OP: &str = "variance_bound_f5";
    p.require_geometry(OP)?;
    if !(c0 > 0.0) {
        return Err(precondition(OP, "C0 must be positive"));
    }
    let (s, n) = (p.s, p.nf());
    let eta = s / (1.0 + (n - 2.0) * s);
    if eta == 0.0 {
        return Err(regime(OP, "unbounded at s = 0"));
    }
    if !(-1.0 / eta - 3.0 > 0.0) {
        return Err(regime(OP, format!("beta domain: -1/eta - 3 = {} <= 0", -1.0 / eta - 3.0)));
    }
    let env = density_envelope(2, eta)?;
    let f2 = band_bounds(p)?.f2;
    let b = beta(-1.0 / eta - 3.0, 2.0);
    checked(
        OP,
        16.0 + c0 * 8.0 * env.beta1 * b / (f2 * env.beta2.powi(3) * (eta + 1.0) * eta * eta),
    )
}

/// Pr[‖x‖ > √n t] ≤ [1 − c s t/(1+ns)]^{(1+ns)/s}, clamped to [0, 1].
pub fn tail_bound(p: SConcaveParams, t: f64, c: f64) -> Result<f64> {
    const OP: &str = "tail_bound";
    if !(t >= 16.0) {
        return Err(precondition(OP, format!("t = {t} < 16")));
    }
    let den = 1.0 + p.nf() * p.s;
    if den <= 0.0 {
        return Err(regime(OP, "1 + n*s <= 0"));
    }
    if !(c > 0.0) {
        return Err(precondition(OP, "c must be positive"));
    }
    let x = -c * p.s * t / den;
    Ok((-c * t * ln1p_ratio(x)).exp().clamp(0.0, 1.0))
}

/// Ratio K with Pr[x ∈ −R] ≤ K·Pr[x ∈ R] for an intersection R of three
/// origin-centered halfspaces.
///
/// The density lower bound on the projected ball of radius d is taken at its
/// smallest value (radius d), which makes the lower integral A·h·d³/3.
pub fn baum_reflection_k(p: SConcaveParams) -> Result<f64> {
    const OP: &str = "baum_reflection_k";
    p.require_geometry(OP)?;
    if p.n < 3 {
        return Err(precondition(OP, "n must be >= 3"));
    }
    let (s, n) = (p.s, p.nf());
    let k = s / (1.0 + (n - 3.0) * s);
    if k == 0.0 {
        return Err(regime(OP, "unbounded at s = 0"));
    }
    let env = density_envelope(3, k)?;
    let b = k / (1.0 + 2.0 * k);
    let g = k / (1.0 + k);
    let m = ln_peak_factor(b, g) + 2.0 * LN_2;
    let ln_h = ln_two_minus_pow_inv(4.0, k) - 1.5 * ln_4e_pi() + ln_bracket_inv(OP, k, m)?;
    let upper = env.beta1 * beta(-1.0 / k - 3.0, 3.0) / (-k * env.beta2).powi(3);
    checked(OP, upper * 3.0 / (ln_h.exp() * env.d.powi(3)))
}

/// Upper bound on the disagreement coefficient at error level `eps`.
pub fn disagreement_coefficient_bound(
    p: SConcaveParams,
    eps: f64,
    c_theta: f64,
    c_f1: f64,
) -> Result<f64> {
    const OP: &str = "disagreement_coefficient_bound";
    p.require_geometry(OP)?;
    if !(eps > 0.0 && eps < 1.0) {
        return Err(precondition(OP, format!("eps = {eps} outside (0, 1)")));
    }
    let f1 = disagreement_lower_f1(p, c_f1)?;
    let (s, n) = (p.s, p.nf());
    let g = s / (1.0 + n * s);
    let ln_eps = eps.ln();
    // (1+ns)^2 (1 − eps^g) / s = −(1+ns) ln(eps) expm1_ratio(g ln eps)
    Ok(c_theta * n.sqrt() * (1.0 + n * s) / ((1.0 + (n + 2.0) * s) * f1)
        * (-ln_eps)
        * expm1_ratio(g * ln_eps))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    Realizable,
    Adversarial,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Round {
    pub k: usize,
    /// b_{k-1}: band used to collect this round's working set.
    pub prev_band: f64,
    pub band: f64,
    pub tau: f64,
    pub radius: f64,
    pub kappa: f64,
    pub labels: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlSchedule {
    pub model: NoiseModel,
    pub rounds_total: usize,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
    pub d: f64,
    pub rounds: Vec<Round>,
}

pub fn al_schedule(
    p: SConcaveParams,
    eps: f64,
    delta: f64,
    knobs: &Knobs,
    model: NoiseModel,
) -> Result<AlSchedule> {
    const OP: &str = "al_schedule";
    if !(eps > 0.0 && eps < 0.25) {
        return Err(precondition(OP, format!("eps = {eps} outside (0, 1/4)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(precondition(OP, format!("delta = {delta} outside (0, 1)")));
    }
    p.require_geometry(OP)?;
    let rounds_total = ((1.0 / (knobs.c_rounds * eps)).log2().ceil()).max(1.0) as usize;
    let f1 = disagreement_lower_f1(p, knobs.c_f1)?;
    let f4 = band_margin_f4(p, knobs.c1, f1)?;
    let f5 = variance_bound_f5(p, knobs.c0_variance)?;
    let BandBounds { f2, f3, d } = band_bounds(p)?;
    let (s, n) = (p.s, p.nf());
    let g = s / (1.0 + n * s);
    let band = |k: usize| (knobs.c_b * 2f64.powi(-(k as i32)) * f4 / f1).min(d);
    let mut rounds = Vec::with_capacity(rounds_total);
    for k in 1..=rounds_total {
        let kf = k as f64;
        let prev_band = band(k - 1);
        let tau = knobs.c_tau * f3 * f4 * f4 * f5.sqrt() / (f1 * f1 * f2.sqrt())
            * 2f64.powi(-(k as i32 - 1));
        let radius = knobs.c_r * 2f64.powi(-(k as i32)) / f1;
        let kappa = knobs.c_kappa
            * (f3 * tau / (f2 * prev_band.min(d))).max(prev_band * f5.sqrt() / (tau * f2.sqrt()));
        let raw = match model {
            NoiseModel::Realizable => {
                let x = f3 * prev_band * 2f64.powi(k as i32);
                let tail = ((1.0 + rounds_total as f64 - kf) / delta).ln();
                knobs.c_m * x * (n * x.ln() + tail)
            }
            NoiseModel::Adversarial => {
                let q = delta / (n.sqrt() * (kf + kf * kf));
                let bracket = prev_band + tau * (1.0 + (-q.ln()) * expm1_ratio(g * q.ln()));
                knobs.c_m * (bracket / (kappa * tau)).powi(2)
                    * n
                    * (n + ((kf + kf * kf) / delta).ln())
            }
        };
        let labels = if raw.is_finite() {
            raw.ceil().clamp(1.0, knobs.round_label_cap as f64) as u64
        } else {
            knobs.round_label_cap
        };
        rounds.push(Round { k, prev_band, band: band(k), tau, radius, kappa, labels });
    }
    Ok(AlSchedule { model, rounds_total, f1, f2, f3, f4, f5, d, rounds })
}

/// ceil(C((vcdim/eps)·ln(1/eps) + (1/eps)·ln(1/delta))).
pub fn vc_sample_size(eps: f64, delta: f64, vcdim: usize, c: f64) -> Result<u64> {
    const OP: &str = "vc_sample_size";
    if !(eps > 0.0 && eps < 1.0) {
        return Err(precondition(OP, format!("eps = {eps} outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(precondition(OP, format!("delta = {delta} outside (0, 1)")));
    }
    if vcdim == 0 || !(c > 0.0) {
        return Err(precondition(OP, "vcdim >= 1 and C > 0 required"));
    }
    let v = c * ((vcdim as f64 / eps) * (1.0 / eps).ln() + (1.0 / eps) * (1.0 / delta).ln());
    Ok(v.ceil() as u64)
}

/// Sample sizes (m1, m2, m3) of the two-halfspace learner.
pub fn baum_sizes(eps: f64, delta: f64, n: usize, k: f64, c: f64) -> Result<(u64, u64, u64)> {
    if !(k >= 1.0) {
        return Err(precondition("baum_sizes", "K must be >= 1"));
    }
    let m1 = vc_sample_size(eps / 2.0, delta / 4.0, n * n, c)?;
    let level = (delta / (4.0 * E * k * m1 as f64)).max(eps / 2.0);
    let m2 = vc_sample_size(level, delta / 4.0, n, c)?;
    let m3 = (2.0 * m2 as f64 / eps).max(2.0 / (eps * eps) * (4.0 / delta).ln()).ceil() as u64;
    Ok((m1, m2, m3))
}

/// floor(√n/2 · (f1/(2 eps))^{n−1} − 1), or 0 when that is below 1.
pub fn packing_lower_bound(p: SConcaveParams, eps: f64, c_f1: f64) -> Result<u64> {
    if !(eps > 0.0) {
        return Err(precondition("packing_lower_bound", "eps must be positive"));
    }
    let f1 = disagreement_lower_f1(p, c_f1)?;
    let v = p.nf().sqrt() / 2.0 * (f1 / (2.0 * eps)).powi(p.n as i32 - 1) - 1.0;
    Ok(if v >= 1.0 { v.floor() as u64 } else { 0 })
}

/// Every constant for one (s, n).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeometryBounds {
    /// Entry m is the exponent after integrating out m coordinates.
    pub gamma_marginal: Vec<f64>,
    pub halfspace: f64,
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub f4: f64,
    pub f5: f64,
    pub d: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub envelope_a: f64,
    pub envelope_d: f64,
    /// Only defined for n ≥ 3.
    pub k: Option<f64>,
}

impl GeometryBounds {
    pub fn evaluate(p: SConcaveParams, knobs: &Knobs) -> Result<Self> {
        p.require_geometry("geometry_bounds")?;
        let gamma_marginal =
            (0..p.n).map(|m| marginal_gamma(p.s, m)).collect::<Result<Vec<_>>>()?;
        let band = band_bounds(p)?;
        let f1 = disagreement_lower_f1(p, knobs.c_f1)?;
        let env = density_envelope(p.n, p.s)?;
        Ok(Self {
            halfspace: halfspace_mass_lower(marginal_gamma(p.s, p.n)?)?,
            gamma_marginal,
            f1,
            f2: band.f2,
            f3: band.f3,
            f4: band_margin_f4(p, knobs.c1, f1)?,
            f5: variance_bound_f5(p, knobs.c0_variance)?,
            d: band.d,
            beta1: env.beta1,
            beta2: env.beta2,
            envelope_a: env.a,
            envelope_d: env.d,
            k: if p.n >= 3 { Some(baum_reflection_k(p)?) } else { None },
        })
    }
}

/// Leading behavior of every constant as s → 0⁻, from closed forms that do not
/// share code with the general evaluation.
///
/// Constants with a finite limit are reported directly. β2 vanishes linearly,
/// so `beta2_slope` is lim β2/|s|. f4, f5 − 16 and K blow up like |·|^{-3} in
/// their respective inner exponents, so the `*_scaled` fields are the limits of
/// |α|³f4, |η|³(f5 − 16) and |κ|³K.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogConcaveLimits {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
    pub d: f64,
    pub halfspace: f64,
    pub beta1: f64,
    pub beta2_slope: f64,
    pub envelope_a: f64,
    pub envelope_d: f64,
    pub f4_scaled: f64,
    pub f5_scaled: f64,
    pub k_scaled: Option<f64>,
}

fn envelope_limit(n: usize) -> (f64, f64) {
    let nf = n as f64;
    let d0 = 1.0 / (3.0 * E);
    let peak = 3.0 * E.powi(3) * 4f64.powi(n as i32 - 1);
    let beta1 = 2f64.powi(n as i32 + 1) * E * peak * 2.0 * ln_gamma(nf / 2.0 + 1.0).exp()
        / (2.0 * PI.powf(nf / 2.0) * d0.powi(n as i32));
    let lead = PI.powf((nf - 1.0) / 2.0) * d0.powi(n as i32 - 1) / ln_gamma((nf + 1.0) / 2.0).exp();
    let slope = lead * 2f64.powi(-(n as i32)) * (4.0 * E * PI).powf(-nf / 2.0) / peak;
    (beta1, slope)
}

pub fn log_concave_limits(n: usize, knobs: &Knobs) -> LogConcaveLimits {
    let f1 = knobs.c_f1 / (864.0 * E.powi(5));
    let f2 = 1.0 / (12.0 * E.powf(3.5) * PI.sqrt());
    let d0 = 1.0 / (3.0 * E);
    let (b1_n, slope_n) = envelope_limit(n);
    let (b1_2, slope_2) = envelope_limit(2);
    let k_scaled = (n >= 3).then(|| {
        let (b1_3, slope_3) = envelope_limit(3);
        let h0 = (1.0 / 16.0) * (4.0 * E * PI).powf(-1.5) / (3.0 * E.powi(3) * 16.0);
        6.0 * b1_3 / (slope_3.powi(3) * h0 * d0.powi(3))
    });
    LogConcaveLimits {
        f1,
        f2,
        f3: 2.0,
        d: d0,
        halfspace: 1.0 / E,
        beta1: b1_n,
        beta2_slope: slope_n,
        envelope_a: 1.0,
        envelope_d: d0,
        f4_scaled: 8.0 * b1_2 / (knobs.c1 * f1 * slope_2.powi(3)),
        f5_scaled: 8.0 * knobs.c0_variance * b1_2 / (f2 * slope_2.powi(3)),
        k_scaled,
    }
}
