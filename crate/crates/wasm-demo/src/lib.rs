//! WebAssembly bindings behind `www/index.html`. Every export takes plain
//! numbers and returns a JSON string so the page needs no glue beyond
//! `JSON.parse`.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use sconcave::bounds::{band_bounds, GeometryBounds, Knobs, SConcaveParams};
use sconcave::densities::{Family, Model, RadialND};
use sconcave::rng::Stream;
use sconcave::verify::{mc_probability, unit_axis};

fn to_js(r: sconcave::Result<Value>) -> Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

/// Halfspace mass, disagreement rate, band width and density lower bound on
/// an evenly spaced grid of s from just below zero down to near the floor.
pub fn bound_curves(n: usize, points: usize) -> sconcave::Result<Value> {
    let floor = SConcaveParams::geometry_floor(n);
    let knobs = Knobs::default();
    let mut rows = Vec::with_capacity(points);
    for i in 0..points {
        // stay strictly inside (floor, 0)
        let s = floor * (i as f64 + 0.5) / points as f64;
        let g = GeometryBounds::evaluate(SConcaveParams::new(s, n)?, &knobs)?;
        rows.push(json!({ "s": s, "halfspace": g.halfspace, "f1": g.f1, "d": g.d, "beta1": g.beta1 }));
    }
    Ok(json!({ "n": n, "floor": floor, "rows": rows }))
}

/// Exact one-dimensional marginal of the radial model next to a histogram of
/// sampled first coordinates on the same bins.
pub fn marginal_histogram(n: usize, s: f64, samples: usize, seed: u64) -> sconcave::Result<Value> {
    let radial = RadialND::new(n, s)?;
    let (lo, hi, bins) = (-6.0, 6.0, 120usize);
    let width = (hi - lo) / bins as f64;
    let batch = Model::Radial(radial).sample(samples, &Stream::root(seed))?;
    let mut counts = vec![0u64; bins];
    for x in batch.rows() {
        let b = ((x[0] - lo) / width).floor();
        if (0.0..bins as f64).contains(&b) {
            counts[b as usize] += 1;
        }
    }
    let centers: Vec<f64> = (0..bins).map(|i| lo + (i as f64 + 0.5) * width).collect();
    let density: Vec<f64> = centers.iter().map(|&c| radial.axis_marginal(c)).collect();
    let empirical: Vec<f64> = counts.iter().map(|&c| c as f64 / (samples as f64 * width)).collect();
    Ok(json!({ "x": centers, "density": density, "empirical": empirical }))
}

/// Monte Carlo mass of the band |x₁| ≤ t against the two-sided bound.
pub fn band_probability(n: usize, s: f64, t: f64, samples: usize, seed: u64) -> sconcave::Result<Value> {
    let p = SConcaveParams::new(s, n)?;
    let model = Model::build(Family::Radial, s, n)?;
    let w = unit_axis(n, 0);
    let est = mc_probability(&model, |x| x.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>().abs() <= t, samples, &Stream::root(seed))?;
    let b = band_bounds(p)?;
    let lower = (t <= b.d).then_some(b.f2 * t);
    Ok(json!({
        "estimate": est.estimate, "std_error": est.std_error,
        "lower": lower, "upper": (b.f3 * t).min(1.0), "d": b.d,
    }))
}

#[wasm_bindgen(js_name = boundCurves)]
pub fn bound_curves_js(n: usize, points: usize) -> Result<String, JsError> {
    to_js(bound_curves(n, points))
}

#[wasm_bindgen(js_name = marginalHistogram)]
pub fn marginal_histogram_js(n: usize, s: f64, samples: usize, seed: u64) -> Result<String, JsError> {
    to_js(marginal_histogram(n, s, samples, seed))
}

#[wasm_bindgen(js_name = bandProbability)]
pub fn band_probability_js(n: usize, s: f64, t: f64, samples: usize, seed: u64) -> Result<String, JsError> {
    to_js(band_probability(n, s, t, samples, seed))
}
