use sconcave::bounds::{band_bounds, baum_reflection_k, Knobs, SConcaveParams};
use sconcave::densities::{Family, Model};
use sconcave::rng::Stream;
use sconcave::verify::*;

fn cell(n: usize, s: f64) -> (SConcaveParams, Model) {
    (SConcaveParams::new(s, n).unwrap(), Model::build(Family::Radial, s, n).unwrap())
}

#[test]
fn band_checks_at_a_small_width() {
    let (p, m) = cell(2, -0.05);
    let rows = verify_band(p, &m, &unit_axis(2, 0), &[0.05], 1_000_000, &Stream::root(1)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.verdict == Verdict::Pass), "{rows:?}");
}

#[test]
fn wide_band_emits_only_the_upper_check() {
    let (p, m) = cell(3, -0.02);
    let d = band_bounds(p).unwrap().d;
    let rows = verify_band(p, &m, &unit_axis(3, 0), &[2.0 * d], 10_000, &Stream::root(2)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].check, "band-upper");
}

#[test]
fn disagreement_examples() {
    let (p, m) = cell(3, -0.02);
    let k = Knobs::default();
    let u = unit_axis(3, 0);
    let r = verify_disagreement(p, &m, &u, &rotated_axis(3, std::f64::consts::FRAC_PI_2), &k, 200_000, &Stream::root(3)).unwrap();
    assert!((r.estimate - 0.5).abs() < 4.0 * r.std_error);
    assert_eq!(r.verdict, Verdict::Pass);
    let same = verify_disagreement(p, &m, &u, &u, &k, 10_000, &Stream::root(4)).unwrap();
    assert_eq!((same.estimate, same.bound), (0.0, 0.0));
    assert_ne!(same.verdict, Verdict::Fail);
}

#[test]
fn disagreement_is_rotation_invariant() {
    let (p, m) = cell(3, -0.05);
    let k = Knobs::default();
    let a = verify_disagreement(p, &m, &unit_axis(3, 0), &rotated_axis(3, 0.4), &k, 400_000, &Stream::root(5)).unwrap();
    let u = [0.0, 0.6, 0.8];
    let v = [0.4f64.sin(), 0.6 * 0.4f64.cos(), 0.8 * 0.4f64.cos()];
    let b = verify_disagreement(p, &m, &u, &v, &k, 400_000, &Stream::root(6)).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.estimate - b.estimate).abs() <= 3.0 * se);
}

#[test]
fn outside_band_examples() {
    let (p, m) = cell(3, -0.02);
    let k = Knobs::default();
    let u = unit_axis(3, 0);
    let zero = verify_disagreement_outside_band(p, &m, &u, &u, &k, 1.0, 10_000, &Stream::root(7)).unwrap();
    assert_eq!(zero.estimate, 0.0);
    assert_ne!(zero.verdict, Verdict::Fail);
    let v = rotated_axis(3, 0.1);
    let one = verify_disagreement_outside_band(p, &m, &u, &v, &k, 1.0, 1_000_000, &Stream::root(8)).unwrap();
    assert_ne!(one.verdict, Verdict::Fail);
    // same stream, doubled threshold: the event can only shrink
    let two = verify_disagreement_outside_band(p, &m, &u, &v, &k, 2.0, 1_000_000, &Stream::root(8)).unwrap();
    assert!(two.estimate <= one.estimate);
}

#[test]
fn conditional_variance_examples() {
    let (p, m) = cell(3, -0.05);
    let k = Knobs::default();
    let u = unit_axis(3, 0);
    let (inside, _) = verify_conditional_variance(p, &m, &u, &u, 0.0, 0.05, &k, 20_000, &Stream::root(9)).unwrap();
    assert!(inside.estimate <= 0.05f64.powi(2));
    assert_eq!(inside.verdict, Verdict::Pass);
    let a = rotated_axis(3, 2.0 * (0.05f64).asin());
    let (tilted, acc) = verify_conditional_variance(p, &m, &u, &a, 0.1, 0.05, &k, 100_000, &Stream::root(10)).unwrap();
    assert_eq!(tilted.verdict, Verdict::Pass);
    assert!(acc >= 1e-3);
    // common stream, growing t
    let d = band_bounds(p).unwrap().d;
    let ests: Vec<f64> = [0.25, 0.5, 1.0]
        .iter()
        .map(|f| verify_conditional_variance(p, &m, &u, &a, 0.1, f * d, &k, 200_000, &Stream::root(11)).unwrap().0.estimate)
        .collect();
    assert!(ests.windows(2).all(|w| w[0] <= w[1]), "{ests:?}");
}

#[test]
fn pareto_tail_rows_are_recorded_next_to_the_exact_tail() {
    let p = SConcaveParams::new(-0.5, 1).unwrap();
    let m = Model::build(Family::Pareto1d, -0.5, 1).unwrap();
    let rows = verify_tail(p, &m, &[16.0], 1.0, 100_000, &Stream::root(12)).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.verdict == Verdict::Recorded));
    assert!((rows[1].estimate - 1.0 / 16.0).abs() < 1e-15);
    assert!((rows[0].estimate - 1.0 / 16.0).abs() < 3.0 * rows[0].std_error);
}

#[test]
fn heavy_tail_beats_the_exponential_witness() {
    let floor = SConcaveParams::geometry_floor(1);
    let p = SConcaveParams::new(floor, 1).unwrap();
    let m = Model::build(Family::Symmetric1d, floor, 1).unwrap();
    let grid = [16.0, 20.0, 32.0, 64.0];
    let rows = verify_tail(p, &m, &grid, 1.0, 1_000_000, &Stream::root(13)).unwrap();
    assert!(rows[0].estimate > (-16f64).exp());
    assert!(rows.windows(2).all(|w| w[0].estimate >= w[1].estimate));
}

#[test]
fn reflection_is_balanced_on_symmetric_models() {
    let (p, m) = cell(3, -0.02);
    let rep = reflection_experiment(p, &m, 30, 200_000, &Stream::root(14)).unwrap();
    assert!(rep.k >= 1.0 && rep.k == baum_reflection_k(p).unwrap());
    assert!(rep.rows.iter().all(|r| r.verdict != Verdict::Fail));
    assert!(rep.worst_ratio < 1.5, "{}", rep.worst_ratio);
}

#[test]
fn packing_survivors_are_separated_in_angle() {
    let (p, m) = cell(2, -0.02);
    let k = Knobs::default();
    let eps = 0.1;
    let rep = packing_experiment(p, &m, eps, 60, 100_000, &k, &Stream::root(15)).unwrap();
    assert!(rep.survivors >= 1 && rep.survivors + rep.removed == rep.candidates);
    // Two normals at angle θ disagree on θ/π of a rotation-invariant law, so
    // survivors sit at least π·eps apart on the circle: at most 2/eps of them,
    // up to MC slack.
    assert!(rep.survivors as f64 <= 2.0 / eps + 1.0, "{rep:?}");
    let again = packing_experiment(p, &m, eps, 120, 100_000, &k, &Stream::root(15)).unwrap();
    assert!(again.survivors as f64 <= 2.0 / eps + 1.0);
}

#[test]
fn centroid_halfspace_on_every_family() {
    for (family, s, n) in [(Family::Radial, -0.02, 3), (Family::Symmetric1d, -0.2, 1), (Family::Pareto1d, -0.25, 1)] {
        let p = SConcaveParams::new(s, n).unwrap();
        let m = Model::build(family, s, n).unwrap();
        let r = verify_centroid_halfspace(p, &m, &unit_axis(n, 0), 200_000, &Stream::root(16)).unwrap();
        assert_ne!(r.verdict, Verdict::Fail, "{family:?}: {r:?}");
    }
}
