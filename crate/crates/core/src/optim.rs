//! Optimization kernels for the learners: hinge minimization over the
//! intersection of two balls, and consistent linear or quadratic separators.

use microlp::{ComparisonOp, OptimizationDirection, Problem};
use serde::Serialize;

use crate::densities::{dot, norm};
use crate::error::{precondition, Error, Result};

/// Points with ±1 labels, row-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledSet {
    pub dim: usize,
    pub points: Vec<f64>,
    pub labels: Vec<f64>,
}

impl LabeledSet {
    pub fn new(dim: usize) -> Self {
        Self { dim, points: Vec::new(), labels: Vec::new() }
    }

    pub fn push(&mut self, x: &[f64], y: f64) {
        debug_assert_eq!(x.len(), self.dim);
        self.points.extend_from_slice(x);
        self.labels.push(y);
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.chunks(self.dim).zip(self.labels.iter().copied())
    }

    fn check_labels(&self) -> Result<()> {
        if self.labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(precondition("labeled set", "labels must be +1 or -1"));
        }
        Ok(())
    }
}

/// Mean of max{0, 1 − y(w·x)/τ}; zero on an empty set.
pub fn hinge_loss(w: &[f64], set: &LabeledSet, tau: f64) -> f64 {
    if set.is_empty() {
        return 0.0;
    }
    set.iter().map(|(x, y)| (1.0 - y * dot(w, x) / tau).max(0.0)).sum::<f64>() / set.len() as f64
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn project_ball(w: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let d = dist(w, center);
    if d <= radius {
        return w.to_vec();
    }
    let k = radius / d;
    w.iter().zip(center).map(|(x, c)| c + k * (x - c)).collect()
}

fn check_feasible(center: &[f64], radius: f64) -> Result<()> {
    let c = norm(center);
    if !(radius >= 0.0) || c > 1.0 + radius {
        return Err(Error::Infeasible { center_norm: c, radius });
    }
    Ok(())
}

/// Euclidean projection onto ball(center, radius) ∩ ball(0, 1).
///
/// Exact: either one constraint alone is active, or the answer is the point of
/// the intersection sphere nearest `w`, which lies in the plane of 0, center
/// and `w`.
pub fn project_two_balls(w: &[f64], center: &[f64], radius: f64) -> Result<Vec<f64>> {
    check_feasible(center, radius)?;
    let n = w.len();
    let zero = vec![0.0; n];
    let slack = 1e-14;
    let in_unit = |v: &[f64]| norm(v) <= 1.0 + slack;
    let in_ball = |v: &[f64]| dist(v, center) <= radius * (1.0 + slack) + slack;
    if in_unit(w) && in_ball(w) {
        return Ok(w.to_vec());
    }
    let a = project_ball(w, &zero, 1.0);
    if in_ball(&a) {
        return Ok(a);
    }
    let b = project_ball(w, center, radius);
    if in_unit(&b) {
        return Ok(b);
    }
    let cn = norm(center);
    let e1: Vec<f64> = center.iter().map(|v| v / cn).collect();
    let h = (1.0 + cn * cn - radius * radius) / (2.0 * cn);
    let rho = (1.0 - h * h).max(0.0).sqrt();
    let along = dot(w, &e1);
    let mut e2: Vec<f64> = w.iter().zip(&e1).map(|(a, b)| a - along * b).collect();
    let pn = norm(&e2);
    if pn > 0.0 {
        e2.iter_mut().for_each(|v| *v /= pn);
    } else if n > 1 {
        // w on the axis: every point of the circle is equally close
        let k = (0..n).min_by(|&i, &j| e1[i].abs().total_cmp(&e1[j].abs())).unwrap_or(0);
        e2 = zero.clone();
        e2[k] = 1.0;
        let d = dot(&e2, &e1);
        e2.iter_mut().zip(&e1).for_each(|(v, u)| *v -= d * u);
        let l = norm(&e2);
        e2.iter_mut().for_each(|v| *v /= l);
    }
    Ok(e1.iter().zip(&e2).map(|(a, b)| h * a + rho * b).collect())
}

/// Dykstra's alternating projections onto the same intersection, run for
/// `sweeps` rounds or until an iterate moves less than 1e−12.
pub fn dykstra_two_balls(w: &[f64], center: &[f64], radius: f64, sweeps: usize) -> Result<Vec<f64>> {
    check_feasible(center, radius)?;
    let zero = vec![0.0; w.len()];
    let mut x = w.to_vec();
    let mut p = zero.clone();
    let mut q = zero.clone();
    for _ in 0..sweeps {
        let xp: Vec<f64> = x.iter().zip(&p).map(|(a, b)| a + b).collect();
        let y = project_ball(&xp, &zero, 1.0);
        p = xp.iter().zip(&y).map(|(a, b)| a - b).collect();
        let yq: Vec<f64> = y.iter().zip(&q).map(|(a, b)| a + b).collect();
        let next = project_ball(&yq, center, radius);
        q = yq.iter().zip(&next).map(|(a, b)| a - b).collect();
        let moved = dist(&next, &x);
        x = next;
        if moved < 1e-12 {
            break;
        }
    }
    Ok(x)
}

#[derive(Clone, Debug)]
pub struct HingeProblem<'a> {
    pub set: &'a LabeledSet,
    pub tau: f64,
    pub center: Vec<f64>,
    pub radius: f64,
    pub accuracy: f64,
    /// Upper limit on subgradient steps.
    pub max_iter: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HingeSolution {
    pub w: Vec<f64>,
    pub loss: f64,
    pub iterations: u64,
    /// G·D/√T: the additive accuracy the step count certifies.
    pub certified_gap: f64,
}

/// Averaged projected subgradient descent over ball(center, radius) ∩ ball(0, 1).
///
/// Runs T = ceil((G·D/accuracy)²) steps of size D/(G√T), capped at `max_iter`,
/// and returns the better of the averaged iterate and the best iterate seen.
pub fn minimize_hinge(problem: &HingeProblem<'_>) -> Result<HingeSolution> {
    let HingeProblem { set, tau, ref center, radius, accuracy, max_iter } = *problem;
    if !(tau > 0.0 && accuracy > 0.0) {
        return Err(precondition("minimize_hinge", "tau and accuracy must be positive"));
    }
    set.check_labels()?;
    check_feasible(center, radius)?;
    let start = project_two_balls(center, center, radius)?;
    let g = set.iter().map(|(x, _)| norm(x)).fold(0.0, f64::max) / tau;
    let d = 2.0 * radius.min(1.0);
    if set.is_empty() || g == 0.0 || d == 0.0 {
        let loss = hinge_loss(&start, set, tau);
        return Ok(HingeSolution { w: start, loss, iterations: 0, certified_gap: 0.0 });
    }
    let wanted = ((g * d / accuracy).powi(2)).ceil();
    let steps = (wanted.min(max_iter as f64) as u64).max(1);
    let eta = d / (g * (steps as f64).sqrt());
    let m = set.len() as f64;
    let mut w = start;
    let mut avg = vec![0.0; w.len()];
    let mut best = (f64::INFINITY, w.clone());
    let mut grad = vec![0.0; w.len()];
    for t in 0..steps {
        grad.iter_mut().for_each(|v| *v = 0.0);
        let mut loss = 0.0;
        for (x, y) in set.iter() {
            let slack = 1.0 - y * dot(&w, x) / tau;
            if slack > 0.0 {
                loss += slack;
                grad.iter_mut().zip(x).for_each(|(gv, xv)| *gv -= y * xv / (tau * m));
            }
        }
        let loss = loss / m;
        if loss < best.0 {
            best = (loss, w.clone());
        }
        let stepped: Vec<f64> = w.iter().zip(&grad).map(|(a, b)| a - eta * b).collect();
        w = project_two_balls(&stepped, center, radius)?;
        let k = 1.0 / (t + 1) as f64;
        avg.iter_mut().zip(&w).for_each(|(a, b)| *a += k * (b - *a));
    }
    let last = hinge_loss(&w, set, tau);
    if last < best.0 {
        best = (last, w);
    }
    let avg_loss = hinge_loss(&avg, set, tau);
    let (loss, w) = if avg_loss <= best.0 { (avg_loss, avg) } else { best };
    Ok(HingeSolution { w, loss, iterations: steps, certified_gap: g * d / (steps as f64).sqrt() })
}

// Max-margin direction for rows y_i·x_i/‖x_i‖: maximize t subject to
// y_i (w·x̂_i) ≥ t with w in the unit box.
fn max_margin(rows: &[(Vec<f64>, f64)], dim: usize) -> Result<(Vec<f64>, f64)> {
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let w: Vec<_> = (0..dim).map(|_| lp.add_var(0.0, (-1.0, 1.0))).collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, 1.0));
    for (x, y) in rows {
        let l = norm(x);
        if l == 0.0 {
            continue;
        }
        let mut expr: Vec<_> = w.iter().zip(x).map(|(&v, &xv)| (v, y * xv / l)).collect();
        expr.push((t, -1.0));
        lp.add_constraint(expr, ComparisonOp::Ge, 0.0);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Solver(e.to_string()))?
        .into_solution()
        .map_err(|_| Error::Solver("linear program interrupted".into()))?;
    Ok((w.iter().map(|&v| sol.var_value(v)).collect(), sol.var_value(t)))
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let l = norm(&v);
    v.into_iter().map(|x| x / l).collect()
}

fn min_signed_margin(w: &[f64], rows: &[(Vec<f64>, f64)]) -> f64 {
    rows.iter().map(|(x, y)| y * dot(w, x)).fold(f64::INFINITY, f64::min)
}

fn separate(rows: &[(Vec<f64>, f64)], dim: usize) -> Result<Vec<f64>> {
    if rows.iter().all(|(x, _)| norm(x) == 0.0) {
        return Ok(unit((0..dim).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect()));
    }
    let (w, t) = max_margin(rows, dim)?;
    if !(t > 1e-12) || norm(&w) == 0.0 {
        return Err(Error::NonSeparable { detail: format!("best normalized margin {t:e}") });
    }
    let w = unit(w);
    let m = min_signed_margin(&w, rows);
    if !(m > 0.0) {
        return Err(Error::NonSeparable { detail: format!("solution margin {m:e} after rounding") });
    }
    Ok(w)
}

/// A unit w with y(w·x) > 0 on every point, from the maximum-margin linear
/// program over normalized rows.
pub fn find_consistent_halfspace(set: &LabeledSet) -> Result<Vec<f64>> {
    set.check_labels()?;
    let rows: Vec<(Vec<f64>, f64)> = set.iter().map(|(x, y)| (x.to_vec(), y)).collect();
    separate(&rows, set.dim)
}

/// Normalized perceptron: on each mistake w += y·x/‖x‖. Returns the unit
/// direction and the number of updates; gives up after `cap` updates.
pub fn perceptron(set: &LabeledSet, cap: u64) -> Result<(Vec<f64>, u64)> {
    set.check_labels()?;
    let mut w = vec![0.0; set.dim];
    let mut mistakes = 0u64;
    loop {
        let mut clean = true;
        for (x, y) in set.iter() {
            let l = norm(x);
            if l == 0.0 || y * dot(&w, x) > 0.0 {
                continue;
            }
            clean = false;
            mistakes += 1;
            if mistakes > cap {
                return Err(Error::NonSeparable { detail: format!("{cap} perceptron updates") });
            }
            w.iter_mut().zip(x).for_each(|(a, b)| *a += y * b / l);
        }
        if clean {
            return Ok((unit(w), mistakes));
        }
    }
}

/// Symmetric matrix W with labels sign(xᵀWx).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadraticSeparator {
    pub dim: usize,
    /// Row-major n×n.
    pub matrix: Vec<f64>,
}

impl QuadraticSeparator {
    pub fn value(&self, x: &[f64]) -> f64 {
        let n = self.dim;
        (0..n).map(|i| x[i] * dot(&self.matrix[i * n..(i + 1) * n], x)).sum()
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        if self.value(x) > 0.0 {
            1.0
        } else {
            -1.0
        }
    }
}

// x_i² on the diagonal and 2·x_i·x_j above it, so that w·lift(x) = xᵀWx.
fn lift(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(if i == j { x[i] * x[i] } else { 2.0 * x[i] * x[j] });
        }
    }
    out
}

/// Consistent quadratic separator via the linear program on the lifted features.
pub fn fit_quadratic_separator(set: &LabeledSet) -> Result<QuadraticSeparator> {
    set.check_labels()?;
    let n = set.dim;
    let rows: Vec<(Vec<f64>, f64)> = set.iter().map(|(x, y)| (lift(x), y)).collect();
    let w = separate(&rows, n * (n + 1) / 2)?;
    let mut matrix = vec![0.0; n * n];
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            matrix[i * n + j] = w[k];
            matrix[j * n + i] = w[k];
            k += 1;
        }
    }
    let q = QuadraticSeparator { dim: n, matrix };
    if set.iter().any(|(x, y)| q.predict(x) != y) {
        return Err(Error::NonSeparable { detail: "quadratic fit misclassifies after rounding".into() });
    }
    Ok(q)
}
