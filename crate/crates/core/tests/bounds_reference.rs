//! Geometry constants against reference values produced by
//! `tests/oracles/bounds_oracle.py` (mpmath, 60 digits, literal closed forms).

use sconcave::bounds::*;
use sconcave::SConcaveParams;

fn p(s: f64, n: usize) -> SConcaveParams {
    SConcaveParams::new(s, n).unwrap()
}

#[track_caller]
fn close(got: f64, want: f64, rel: f64) {
    assert!(
        ((got - want) / want).abs() < rel,
        "got {got:e}, want {want:e} (rel err {:e})",
        ((got - want) / want).abs()
    );
}

#[test]
fn band_constants() {
    let cases = [
        (2, -0.02, 0.001103575, 2.0869565, 0.11628217),
        (2, -1.0 / 7.0, 2.0885401e-5, 3.3333333, 0.065536),
        (3, -0.02, 0.001097428, 2.0888889, 0.11614812),
        (3, -1.0 / 9.0, 6.983519e-5, 3.0, 0.074421773),
        (4, -1.0 / 11.0, 0.00013364561, 2.8, 0.080932542),
        (5, -0.02, 0.0010843924, 2.0930233, 0.11586226),
        (5, -1.0 / 13.0, 0.00020183655, 2.6666667, 0.085902229),
    ];
    for (n, s, f2, f3, d) in cases {
        let b = band_bounds(p(s, n)).unwrap();
        close(b.f2, f2, 1e-6);
        close(b.f3, f3, 1e-7);
        close(b.d, d, 1e-7);
    }
}

#[test]
fn disagreement_rate() {
    close(disagreement_lower_f1(p(-1e-10, 4), 1.0).unwrap(), 7.79854975003407e-6, 1e-12);
    close(disagreement_lower_f1(p(-1e-6, 4), 1.0).unwrap(), 7.79837550888287e-6, 1e-12);
    close(disagreement_lower_f1(p(-0.02, 4), 1.0).unwrap(), 4.72493492675045e-6, 1e-12);
    close(disagreement_lower_f1(p(-0.05, 4), 1.0).unwrap(), 1.67440538369676e-6, 1e-12);
    close(disagreement_lower_f1(p(-1.0 / 7.0, 2), 1.0).unwrap(), 6.585367e-9, 1e-6);
    close(disagreement_lower_f1(p(-1.0 / 13.0, 5), 1.0).unwrap(), 2.3665817e-7, 1e-6);
}

#[test]
fn envelope_coefficients() {
    let cases = [
        (-1e-10, 5428723.8401, 3.06794246334e-18, 1.00000000122, 0.12262648036),
        (-1e-6, 5428897.49436, 3.06794567658e-14, 1.00001216783, 0.122626173823),
        (-0.02, 10909732.5912, 6.10239931003e-10, 1.28530775265, 0.116148115339),
        (-0.05, 41303142.9038, 1.29560871254e-9, 1.945135919, 0.104937116102),
    ];
    for (s, b1, b2, a, d) in cases {
        let e = density_envelope(3, s).unwrap();
        close(e.beta1, b1, 1e-10);
        close(e.beta2, b2, 1e-9);
        close(e.a, a, 1e-10);
        close(e.d, d, 1e-10);
    }
    let zero = density_envelope(3, 0.0).unwrap();
    assert_eq!(zero.beta2, 0.0);
    close(zero.beta1, 5428723.822737296, 1e-12);
}

#[test]
fn outside_band_and_variance_constants() {
    let cases = [
        (2, -0.02, 8.6007635e31, 3.7625176e29),
        (2, -1.0 / 7.0, 5.6770938e40, 1.790042e37),
        (3, -0.02, 8.2667967e31, 3.5985994e29),
        (3, -1.0 / 9.0, 1.1413867e37, 6.8741775e33),
        (4, -1.0 / 11.0, 1.2203209e35, 1.0911307e32),
        (5, -1.0 / 13.0, 7.7682359e33, 9.1084417e30),
    ];
    for (n, s, f4, f5) in cases {
        let q = p(s, n);
        let f1 = disagreement_lower_f1(q, 1.0).unwrap();
        close(band_margin_f4(q, 1.0, f1).unwrap(), f4, 1e-6);
        close(variance_bound_f5(q, 1.0).unwrap(), f5, 1e-6);
    }
}

#[test]
fn reflection_ratio() {
    close(baum_reflection_k(p(-0.02, 3)).unwrap(), 1.10245717608e45, 1e-9);
    close(baum_reflection_k(p(-0.05, 3)).unwrap(), 2.01579044377e45, 1e-9);
    close(baum_reflection_k(p(-1.0 / 9.0, 3)).unwrap(), 5.309306847e53, 1e-8);
    close(baum_reflection_k(p(-0.02, 4)).unwrap(), 1.0757047461e45, 1e-9);
    close(baum_reflection_k(p(-0.02, 5)).unwrap(), 1.05009126504e45, 1e-9);
    assert!(baum_reflection_k(p(-0.02, 2)).is_err());
    assert!(baum_reflection_k(p(0.0, 3)).is_err());
}

#[test]
fn coefficient_tail_and_sizes() {
    close(disagreement_coefficient_bound(p(-0.02, 4), 0.01, 1.0, 1.0).unwrap(), 2143411.13183902, 1e-11);
    close(disagreement_coefficient_bound(p(-1e-10, 3), 0.01, 1.0, 1.0).unwrap(), 1022804.1108579, 1e-11);
    close(
        disagreement_coefficient_bound(p(-1.0 / 11.0, 4), 0.001, 1.0, 1.0).unwrap(),
        275996935.651371,
        1e-10,
    );
    close(tail_bound(p(-0.1, 2), 20.0, 1.0).unwrap(), 4.4407430542702168e-5, 1e-13);
    close(tail_bound(p(-1e-10, 3), 20.0, 1.0).unwrap(), 2.0611536636616306e-9, 1e-8);
    assert_eq!(vc_sample_size(0.05, 0.05, 16, 1.0).unwrap(), 1019);
    assert_eq!(baum_sizes(0.1, 0.1, 3, 1000.0, 1.0).unwrap(), (614, 254, 5080));
    assert_eq!(baum_sizes(0.5, 0.1, 3, 1000.0, 1.0).unwrap(), (65, 32, 128));
}

#[test]
fn closed_form_limits_match_reference() {
    let k = Knobs::default();
    for (n, b1, slope) in [
        (2, 110950.88256570514, 7.4470664666364894e-6),
        (3, 5428723.822737296, 3.0679424630186321e-8),
        (5, 18386511233.211122, 3.3147539313147034e-13),
    ] {
        let l = log_concave_limits(n, &k);
        close(l.beta1, b1, 1e-12);
        close(l.beta2_slope, slope, 1e-12);
        close(l.f4_scaled, 2.7558222999459237e26, 1e-11);
        close(l.f5_scaled, 1.5137422307903539e24, 1e-11);
        if n >= 3 {
            close(l.k_scaled.unwrap(), 1.8838909578918992e39, 1e-11);
        }
    }
    let l = log_concave_limits(4, &k);
    close(l.f1, 7.7985497674600313618e-6, 1e-14);
    close(l.f2, 0.0014197540981058162037, 1e-14);
    close(l.d, 0.12262648039048077387, 1e-15);
}
