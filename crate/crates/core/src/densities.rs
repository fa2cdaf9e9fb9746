//! Concrete s-concave families. Each has an exact pointwise density and an
//! exact sampler, and its isotropy calibration comes from beta-function
//! identities rather than estimation.

use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{precondition, regime, Error, Result};
use crate::rng::{sharded, Stream};
use crate::special::{beta, integrate_to_inf, ln_beta, ln_gamma};

/// Density (−1−1/s)^{−1/s} x^{1/s} on x ≥ (s+1)/(−s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pareto1D {
    pub s: f64,
}

impl Pareto1D {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > -1.0 && s < 0.0) {
            return Err(regime("pareto1d", format!("s = {s} outside (-1, 0)")));
        }
        Ok(Self { s })
    }

    pub fn start(&self) -> f64 {
        (self.s + 1.0) / -self.s
    }

    // Upper tail exponent: Pr[X > t] = (t/start)^{-index}.
    fn index(&self) -> f64 {
        -(self.s + 1.0) / self.s
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.start() {
            return 0.0;
        }
        let s = self.s;
        ((-1.0 / s) * (-1.0 - 1.0 / s).ln() + x.ln() / s).exp()
    }

    pub fn tail(&self, t: f64) -> Result<f64> {
        if t < self.start() {
            return Err(precondition(
                "pareto_tail",
                format!("t = {t} below domain start {}", self.start()),
            ));
        }
        Ok((-self.index() * (t / self.start()).ln()).exp())
    }

    pub fn cdf(&self, t: f64) -> f64 {
        self.tail(t).map_or(0.0, |q| 1.0 - q)
    }

    /// Point with upper tail probability `v`.
    pub fn upper_quantile(&self, v: f64) -> f64 {
        self.start() * (v.ln() / -self.index()).exp()
    }

    /// Finite only when s > −1/2.
    pub fn mean(&self) -> f64 {
        let k = self.index();
        if k > 1.0 {
            self.start() * k / (k - 1.0)
        } else {
            f64::INFINITY
        }
    }
}

/// Density c(1+b|x|)^{1/s} with unit variance; s = 0 is the Laplace limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Symmetric1D {
    pub s: f64,
    pub b: f64,
    pub c: f64,
}

impl Symmetric1D {
    pub fn new(s: f64) -> Result<Self> {
        if !(s > -1.0 / 3.0 && s <= 0.0) {
            return Err(regime("symmetric1d", format!("s = {s} outside (-1/3, 0]")));
        }
        if s == 0.0 {
            let b = 2f64.sqrt();
            return Ok(Self { s, b, c: b / 2.0 });
        }
        let p = -1.0 / s;
        let b = (beta(p - 3.0, 3.0) / beta(p - 1.0, 1.0)).sqrt();
        Ok(Self { s, b, c: b * (p - 1.0) / 2.0 })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.c * radial_profile(self.s, self.b, x.abs())
    }

    /// Pr[|X| > t].
    pub fn abs_tail(&self, t: f64) -> f64 {
        if self.s == 0.0 {
            return (-self.b * t).exp();
        }
        ((1.0 + 1.0 / self.s) * (self.b * t).ln_1p()).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let half = 0.5 * self.abs_tail(x.abs());
        if x < 0.0 {
            half
        } else {
            1.0 - half
        }
    }

    /// Solves Pr[|X| > t] = v.
    pub fn abs_upper_quantile(&self, v: f64) -> f64 {
        if self.s == 0.0 {
            return -v.ln() / self.b;
        }
        (self.s / (1.0 + self.s) * v.ln()).exp_m1() / self.b
    }

    pub fn quantile(&self, u: f64) -> f64 {
        if u < 0.5 {
            -self.abs_upper_quantile(2.0 * u)
        } else {
            self.abs_upper_quantile(2.0 * (1.0 - u))
        }
    }
}

// (1+b r)^{1/s}, or e^{-b r} at s = 0.
fn radial_profile(s: f64, b: f64, r: f64) -> f64 {
    if s == 0.0 {
        (-b * r).exp()
    } else {
        ((b * r).ln_1p() / s).exp()
    }
}

/// Surface area of the unit sphere in R^n.
pub fn sphere_area(n: usize) -> f64 {
    2.0 * PI.powf(n as f64 / 2.0) / ln_gamma(n as f64 / 2.0).exp()
}

/// Rotation-invariant density c(1+b‖x‖)^{1/s} in R^n with identity covariance.
/// At s = 0 the profile is e^{−b‖x‖}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialND {
    pub n: usize,
    pub s: f64,
    pub b: f64,
    pub c: f64,
}

impl RadialND {
    pub fn new(n: usize, s: f64) -> Result<Self> {
        if n == 0 {
            return Err(regime("radial", "n must be >= 1"));
        }
        let nf = n as f64;
        if !(s > -1.0 / (nf + 2.0) && s <= 0.0) {
            return Err(regime("radial", format!("s = {s} outside (-1/(n+2), 0] for n = {n}")));
        }
        if s == 0.0 {
            let b = (nf + 1.0).sqrt();
            let c = (nf * b.ln() - ln_gamma(nf)).exp() / sphere_area(n);
            return Ok(Self { n, s, b, c });
        }
        let p = -1.0 / s;
        let b = ((ln_beta(p - nf - 2.0, nf + 2.0) - ln_beta(p - nf, nf)).exp() / nf).sqrt();
        let c = (nf * b.ln() - ln_beta(nf, p - nf)).exp() / sphere_area(n);
        Ok(Self { n, s, b, c })
    }

    pub fn pdf_radius(&self, r: f64) -> f64 {
        self.c * radial_profile(self.s, self.b, r)
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        self.pdf_radius(norm(x))
    }

    // Second shape parameter of the Beta law of u = b r/(1 + b r).
    fn shape(&self) -> f64 {
        -1.0 / self.s - self.n as f64
    }

    /// Q(w) = Pr[b‖x‖ ≥ e^{w/k} − 1] where k = −1/s − n, so that w stays O(1)
    /// as s → 0 and Q tends to the Gamma(n) tail e^{−w} Σ w^j/j!.
    fn scaled_tail(&self, w: f64) -> f64 {
        let (mut term, mut sum) = (1.0, 1.0);
        if self.s == 0.0 {
            for j in 1..self.n {
                term *= w / j as f64;
                sum += term;
            }
        } else {
            let k = self.shape();
            let u = -(-w / k).exp_m1();
            for j in 1..self.n {
                let j = j as f64;
                term *= (k + j - 1.0) * u / j;
                sum += term;
            }
        }
        (-w).exp() * sum
    }

    fn scaled_to_radius(&self, w: f64) -> f64 {
        if self.s == 0.0 {
            w / self.b
        } else {
            (w / self.shape()).exp_m1() / self.b
        }
    }

    fn radius_to_scaled(&self, r: f64) -> f64 {
        if self.s == 0.0 {
            self.b * r
        } else {
            self.shape() * (self.b * r).ln_1p()
        }
    }

    /// Pr[‖x‖ > r].
    pub fn radius_tail(&self, r: f64) -> f64 {
        self.scaled_tail(self.radius_to_scaled(r))
    }

    /// Radius with Pr[‖x‖ > r] = v, by bracketing and bisection.
    pub fn radius_upper_quantile(&self, v: f64) -> f64 {
        if v >= 1.0 {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.scaled_tail(hi) > v {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if self.scaled_tail(mid) > v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        self.scaled_to_radius(0.5 * (lo + hi))
    }

    /// E‖x‖^k, finite when −1/s > n + k.
    pub fn radius_moment(&self, k: u32) -> Result<f64> {
        let (nf, kf) = (self.n as f64, k as f64);
        if self.s == 0.0 {
            return Ok((ln_gamma(nf + kf) - ln_gamma(nf) - kf * self.b.ln()).exp());
        }
        let p = -1.0 / self.s;
        if p <= nf + kf {
            return Err(Error::DivergentMoment { order: k, s: self.s });
        }
        Ok((ln_beta(nf + kf, p - nf - kf) - ln_beta(nf, p - nf) - kf * self.b.ln()).exp())
    }

    /// Density of one coordinate, by quadrature over the remaining n−1.
    pub fn axis_marginal(&self, x: f64) -> f64 {
        match self.n {
            1 => self.pdf_radius(x.abs()),
            n => {
                let area = sphere_area(n - 1);
                let m = (n - 2) as i32;
                area * integrate_to_inf(
                    |rho| self.pdf_radius((x * x + rho * rho).sqrt()) * rho.powi(m),
                    0.0,
                    1e-12,
                )
            }
        }
    }

    fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        let mut sq = 0.0;
        while sq == 0.0 {
            sq = 0.0;
            for v in out.iter_mut() {
                *v = StandardNormal.sample(rng);
                sq += *v * *v;
            }
        }
        let v: f64 = 1.0 - rng.random::<f64>();
        let r = self.radius_upper_quantile(v) / sq.sqrt();
        out.iter_mut().for_each(|x| *x *= r);
    }
}

/// Unnormalized half-line profile α(1+βt)^{1/s} on t ≥ 0.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineHalfLine {
    pub alpha: f64,
    pub beta: f64,
    pub s: f64,
}

impl BaselineHalfLine {
    pub fn value(&self, t: f64) -> f64 {
        self.alpha * radial_profile(self.s, self.beta, t)
    }

    /// ∫₀^∞ t^k h(t) dt = B(−1/s−k−1, k+1)·α/β^{k+1}.
    pub fn moment(&self, order: u32) -> Result<f64> {
        let k = order as f64;
        if !(self.s < 0.0 && -1.0 / self.s > k + 1.0) {
            return Err(Error::DivergentMoment { order, s: self.s });
        }
        Ok(self.alpha * beta(-1.0 / self.s - k - 1.0, k + 1.0) / self.beta.powf(k + 1.0))
    }
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Pareto1d,
    Symmetric1d,
    Radial,
}

/// Any of the implemented families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub enum Model {
    Pareto(Pareto1D),
    Symmetric(Symmetric1D),
    Radial(RadialND),
}

impl Model {
    pub fn build(family: Family, s: f64, n: usize) -> Result<Self> {
        match family {
            Family::Pareto1d | Family::Symmetric1d if n != 1 => {
                Err(regime("model", format!("{family:?} is one-dimensional, got n = {n}")))
            }
            Family::Pareto1d => Ok(Model::Pareto(Pareto1D::new(s)?)),
            Family::Symmetric1d => Ok(Model::Symmetric(Symmetric1D::new(s)?)),
            Family::Radial => Ok(Model::Radial(RadialND::new(n, s)?)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Model::Radial(m) => m.n,
            _ => 1,
        }
    }

    pub fn s(&self) -> f64 {
        match self {
            Model::Pareto(m) => m.s,
            Model::Symmetric(m) => m.s,
            Model::Radial(m) => m.s,
        }
    }

    pub fn pdf(&self, x: &[f64]) -> f64 {
        match self {
            Model::Pareto(m) => m.pdf(x[0]),
            Model::Symmetric(m) => m.pdf(x[0]),
            Model::Radial(m) => m.pdf(x),
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        match self {
            Model::Pareto(m) => vec![m.mean()],
            _ => vec![0.0; self.dim()],
        }
    }

    /// Whether f(x) = f(−x).
    pub fn is_symmetric(&self) -> bool {
        !matches!(self, Model::Pareto(_))
    }

    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            Model::Pareto(m) => out[0] = m.upper_quantile(1.0 - rng.random::<f64>()),
            Model::Symmetric(m) => {
                let t = m.abs_upper_quantile(1.0 - rng.random::<f64>());
                out[0] = if rng.random::<bool>() { t } else { -t };
            }
            Model::Radial(m) => m.sample_into(rng, out),
        }
    }

    /// `count` i.i.d. draws, sharded over child streams of `stream`.
    pub fn sample(&self, count: usize, stream: &Stream) -> Result<PointBatch> {
        if count == 0 {
            return Err(precondition("sample", "count must be >= 1"));
        }
        let dim = self.dim();
        let parts = sharded(count, stream, |len, rng| {
            let mut data = vec![0.0; len * dim];
            data.chunks_mut(dim).for_each(|row| self.sample_into(rng, row));
            data
        });
        Ok(PointBatch { dim, data: parts.concat() })
    }
}

/// Row-major points.
#[derive(Clone, Debug, PartialEq)]
pub struct PointBatch {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl PointBatch {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> std::slice::Chunks<'_, f64> {
        self.data.chunks(self.dim)
    }

    /// One row per point, columns x0..x{n-1}, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record((0..self.dim).map(|j| format!("x{j}")))?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| format!("{v:.16e}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let dim = r.headers()?.len();
        let mut data = Vec::new();
        for rec in r.records() {
            for field in rec?.iter() {
                data.push(field.parse::<f64>().map_err(|e| Error::Solver(format!("bad number {field:?}: {e}")))?);
            }
        }
        Ok(Self { dim, data })
    }
}
