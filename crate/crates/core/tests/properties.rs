//! Property-based invariants of the polarization algebra, the coupled
//! pointer evolution, and the moment-inversion formulas.

use num_complex::Complex64;
use proptest::prelude::*;
use seqweak::detector::{sample_frame, subtract_background, DetectorConfig};
use seqweak::pointer::{initial_state, PointerField};
use seqweak::polarization::{
    linear_state, sequential_weak_value, weak_value, Observable2x2, PolarizationState,
};
use seqweak::weakform::{invert_moments, CouplingConfig};

/// Shorthand: linear polarization state at angle `theta`, unwrapped.
fn lin(theta: f64) -> seqweak::polarization::PolarizationState {
    linear_state(theta).unwrap()
}

/// Arbitrary (generally elliptical) polarization state with a norm bounded
/// away from zero so construction cannot fail.
fn arb_state() -> impl Strategy<Value = PolarizationState> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("norm too small", |(a, b, c, d)| {
            a * a + b * b + c * c + d * d > 1e-2
        })
        .prop_map(|(a, b, c, d)| {
            PolarizationState::new(Complex64::new(a, b), Complex64::new(c, d)).unwrap()
        })
}

/// Arbitrary 2x2 Hermitian observable.
fn arb_observable() -> impl Strategy<Value = Observable2x2> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, d, re, im)| {
        let c = Complex64::new(re, im);
        Observable2x2::from_matrix([
            [Complex64::new(a, 0.0), c],
            [c.conj(), Complex64::new(d, 0.0)],
        ])
        .unwrap()
    })
}

/// Pre/post pairs whose overlap is large enough that post-selection is far
/// from degenerate.
fn arb_selection_pair() -> impl Strategy<Value = (PolarizationState, PolarizationState)> {
    (arb_state(), arb_state()).prop_filter("nearly orthogonal selection", |(pre, post)| {
        post.inner(pre).norm() > 0.05
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// With pre-selection equal to post-selection the weak value is the
    /// ordinary expectation value: real, and equal to ⟨s|A|s⟩.
    #[test]
    fn weak_value_reduces_to_expectation_when_selections_coincide(
        s in arb_state(),
        obs in arb_observable(),
    ) {
        let wv = weak_value(&obs, &s, &s).unwrap();
        let expect = obs.expectation(&s);
        prop_assert!((wv.re() - expect).abs() < 1e-12);
        prop_assert!(wv.im().abs() < 1e-12);
    }

    /// Weak values are linear in the observable.
    #[test]
    fn weak_value_is_linear_in_the_observable(
        (pre, post) in arb_selection_pair(),
        a in arb_observable(),
        b in arb_observable(),
        alpha in -2.0..2.0f64,
        beta in -2.0..2.0f64,
    ) {
        let ma = a.matrix();
        let mb = b.matrix();
        let combo = Observable2x2::from_matrix([
            [alpha * ma[0][0] + beta * mb[0][0], alpha * ma[0][1] + beta * mb[0][1]],
            [alpha * ma[1][0] + beta * mb[1][0], alpha * ma[1][1] + beta * mb[1][1]],
        ]).unwrap();
        let lhs = weak_value(&combo, &pre, &post).unwrap().value();
        let rhs = alpha * weak_value(&a, &pre, &post).unwrap().value()
            + beta * weak_value(&b, &pre, &post).unwrap().value();
        prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
    }

    /// Weak values do not change under a global phase of either selection
    /// state.
    #[test]
    fn weak_value_ignores_global_phase(
        (pre, post) in arb_selection_pair(),
        obs in arb_observable(),
        phi in 0.0..core::f64::consts::TAU,
        chi in 0.0..core::f64::consts::TAU,
    ) {
        let rot = Complex64::from_polar(1.0, phi);
        let rot2 = Complex64::from_polar(1.0, chi);
        let pre2 = PolarizationState::new(rot * pre.amp_h(), rot * pre.amp_v()).unwrap();
        let post2 = PolarizationState::new(rot2 * post.amp_h(), rot2 * post.amp_v()).unwrap();
        let wv = weak_value(&obs, &pre, &post).unwrap().value();
        let wv2 = weak_value(&obs, &pre2, &post2).unwrap().value();
        prop_assert!((wv - wv2).norm() < 1e-12 * (1.0 + wv.norm()));
    }

    /// Feeding the identity as either factor of the sequential weak value
    /// recovers the single-observable weak value.
    #[test]
    fn sequential_with_identity_is_the_single_weak_value(
        (pre, post) in arb_selection_pair(),
        obs in arb_observable(),
    ) {
        let id = Observable2x2::identity();
        let single = weak_value(&obs, &pre, &post).unwrap().value();
        let left = sequential_weak_value(&obs, &id, &pre, &post).unwrap().value();
        let right = sequential_weak_value(&id, &obs, &pre, &post).unwrap().value();
        prop_assert!((left - single).norm() < 1e-12 * (1.0 + single.norm()));
        prop_assert!((right - single).norm() < 1e-12 * (1.0 + single.norm()));
    }

    /// Projectors built from a state have unit expectation on that state and
    /// zero on its orthogonal complement.
    #[test]
    fn projector_selects_its_own_state(s in arb_state()) {
        let proj = Observable2x2::projector(&s);
        prop_assert!((proj.expectation(&s) - 1.0).abs() < 1e-12);
        prop_assert!(proj.expectation(&s.perp()).abs() < 1e-12);
    }

    /// The two weak couplings are norm-preserving on the joint
    /// polarization-pointer state (they are unitary displacements).
    #[test]
    fn couplings_preserve_the_joint_norm(
        pre in arb_state(),
        theta in 0.0..core::f64::consts::PI,
        g_y in -0.8..0.8f64,
        g_x in -0.8..0.8f64,
    ) {
        let state = initial_state(&pre, 1.0).unwrap()
            .apply_coupling_v(g_y).unwrap()
            .apply_coupling_psi(theta, g_x).unwrap();
        prop_assert!((state.norm_squared() - 1.0).abs() < 1e-12);
    }

    /// After the two couplings every branch center lies on the 2x2 grid
    /// {0, g_x} x {0, g_y}.
    #[test]
    fn branch_centers_lie_on_the_coupling_grid(
        pre in arb_state(),
        theta in 0.0..core::f64::consts::PI,
        g_y in 0.05..0.8f64,
        g_x in 0.05..0.8f64,
    ) {
        let state = initial_state(&pre, 1.0).unwrap()
            .apply_coupling_v(g_y).unwrap()
            .apply_coupling_psi(theta, g_x).unwrap();
        for b in state.branches() {
            prop_assert!(b.center_x.abs() < 1e-12 || (b.center_x - g_x).abs() < 1e-12);
            prop_assert!(b.center_y.abs() < 1e-12 || (b.center_y - g_y).abs() < 1e-12);
        }
    }

    /// Post-selection probability equals the square norm of the surviving
    /// field and never exceeds the pre-selection norm (which is 1).
    #[test]
    fn postselection_probability_is_a_probability(
        (pre, post) in arb_selection_pair(),
        theta in 0.0..core::f64::consts::PI,
        g in 0.0..0.6f64,
    ) {
        let field = initial_state(&pre, 1.0).unwrap()
            .apply_coupling_v(g).unwrap()
            .apply_coupling_psi(theta, g).unwrap()
            .post_select(&post)
            .unwrap();
        let moments = field.exact_moments().unwrap();
        prop_assert!(moments.postselect_prob > 0.0);
        prop_assert!(moments.postselect_prob <= 1.0 + 1e-12);
        prop_assert!((moments.postselect_prob - field.norm_squared()).abs() < 1e-12);
    }

    /// Polarization coherence after the first coupling equals the Gaussian
    /// displacement overlap exp(-g^2 / (8 sigma^2)) whenever the reduced
    /// coherence is defined, independent of the input state.
    #[test]
    fn first_coupling_coherence_is_the_displacement_overlap(
        theta in 0.05..1.5f64,
        g in 0.0..3.0f64,
        sigma in 0.5..2.0f64,
    ) {
        let pre = lin(theta);
        let state = initial_state(&pre, sigma).unwrap().apply_coupling_v(g).unwrap();
        let coherence = state.traced_polarization_coherence().unwrap();
        let expected = (-g * g / (8.0 * sigma * sigma)).exp();
        prop_assert!((coherence - expected).abs() < 1e-12);
    }

    /// Inverting the first-order readout formulas recovers the weak values
    /// they were built from.
    #[test]
    fn moment_inversion_round_trips(
        pi_psi in -3.0..3.0f64,
        pi_v in -3.0..3.0f64,
        seq in -3.0..3.0f64,
        g_x in 0.01..0.5f64,
        g_y in 0.01..0.5f64,
    ) {
        let mean_x = g_x * pi_psi;
        let mean_y = g_y * pi_v;
        let raw_xy = 0.5 * g_x * g_y * (seq + pi_psi * pi_v);
        let inv = invert_moments(mean_x, mean_y, raw_xy, g_x, g_y).unwrap();
        prop_assert!((inv.pi_psi - pi_psi).abs() < 1e-9);
        prop_assert!((inv.pi_v - pi_v).abs() < 1e-9);
        prop_assert!((inv.seq - seq).abs() < 1e-9);
    }

    /// Negating the x coupling mirrors the pointer field in x: mean_x and
    /// raw_xy flip sign while mean_y and the post-selection probability are
    /// unchanged.
    #[test]
    fn flipping_the_x_coupling_flips_the_x_moments(
        theta in 0.1..1.4f64,
        g in 0.05..0.4f64,
    ) {
        let pre = lin(0.7);
        let post = lin(0.2);
        let run = |gx: f64| {
            initial_state(&pre, 1.0).unwrap()
                .apply_coupling_v(g).unwrap()
                .apply_coupling_psi(theta, gx).unwrap()
                .post_select(&post)
                .unwrap()
                .exact_moments()
                .unwrap()
        };
        let plus = run(g);
        let minus = run(-g);
        prop_assert!((plus.mean_x + minus.mean_x).abs() < 1e-12);
        prop_assert!((plus.mean_y - minus.mean_y).abs() < 1e-12);
        prop_assert!((plus.raw_xy + minus.raw_xy).abs() < 1e-12);
        prop_assert!((plus.postselect_prob - minus.postselect_prob).abs() < 1e-12);
    }
}

proptest! {
    // Sampling tests draw real random numbers per case; keep the case count
    // modest so the whole property file stays fast.
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Frames are bit-identical for identical (seed, stream) and the total
    /// signal count never exceeds the photon budget when dark counts are off.
    #[test]
    fn frames_are_deterministic_and_conserve_photons(
        seed in any::<u64>(),
        stream in 0u64..1000,
        theta in 0.1..1.4f64,
    ) {
        let field: PointerField = initial_state(&lin(0.9), 1.0).unwrap()
            .apply_coupling_v(0.15).unwrap()
            .apply_coupling_psi(theta, 0.15).unwrap()
            .post_select(&lin(0.3))
            .unwrap();
        let config = DetectorConfig::centered(16, 0.5, seed);
        let a = sample_frame(&field, &config, 20_000, stream).unwrap();
        let b = sample_frame(&field, &config, 20_000, stream).unwrap();
        prop_assert_eq!(a.counts(), b.counts());
        prop_assert!(a.total_counts() <= 20_000);
    }

    /// With zero dark probability, background subtraction is the identity on
    /// the counts.
    #[test]
    fn zero_dark_background_subtraction_is_identity(seed in any::<u64>()) {
        let field: PointerField = initial_state(&lin(0.9), 1.0).unwrap()
            .apply_coupling_v(0.15).unwrap()
            .apply_coupling_psi(0.4, 0.15).unwrap()
            .post_select(&lin(0.3))
            .unwrap();
        let config = DetectorConfig::centered(8, 1.0, seed);
        let frame = sample_frame(&field, &config, 5_000, 0).unwrap();
        let corrected = subtract_background(&frame);
        for (c, raw) in corrected.iter().zip(frame.counts()) {
            prop_assert!((c - *raw as f64).abs() == 0.0);
        }
    }
}

/// The protocol config used by the sweep machinery validates exactly the
/// fields the pipeline needs; a quick non-proptest sanity case keeps this
/// file self-contained.
#[test]
fn coupling_config_validation_accepts_the_default_geometry() {
    let cfg = CouplingConfig {
        pre: lin(0.942),
        post: lin(0.0),
        theta: 0.5,
        g_x: 0.15,
        g_y: 0.15,
        sigma: 1.0,
    };
    cfg.validate().unwrap();
    assert!(cfg.is_weak());
}
