use std::f64::consts::LN_2;

use proptest::prelude::*;
use swipt_core::model::*;

fn gain() -> impl Strategy<Value = f64> {
    (-5.0f64..-2.0).prop_map(|e| 10f64.powf(e))
}

fn multiplier() -> impl Strategy<Value = f64> {
    (-2.0f64..4.0).prop_map(|e| 10f64.powf(e))
}

fn snapshot() -> impl Strategy<Value = ScSnapshot> {
    (gain(), gain(), gain(), gain(), gain()).prop_map(|(hi, he, hj, gi, ge)| ScSnapshot::new(hi, he, hj, gi, ge, 1e-9))
}

fn duals() -> impl Strategy<Value = DualPoint> {
    (multiplier(), multiplier(), multiplier()).prop_map(|(l, b, m)| DualPoint::new(l, b, m))
}

#[test]
fn unit_conversions() {
    assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
    assert!((dbm_to_watts(-60.0) - 1e-9).abs() < 1e-24);
    assert!((db_to_linear(-30.0) - 1e-3).abs() < 1e-18);
}

#[test]
fn threshold_examples() {
    let sc = ScSnapshot::new(1e-6, 4e-6, 1e-6, 0.0, 1e-6, 1e-9);
    // σ²(h_e − h_i)/(h_i g_e) = 1e-9·3e-6/1e-12
    assert!((threshold_a(&sc).unwrap() - 3e-3).abs() < 1e-15);
    let weak_eve = ScSnapshot::new(4e-6, 1e-6, 1e-6, 0.0, 1e-6, 1e-9);
    assert_eq!(threshold_a(&weak_eve), Ok(0.0));
    let no_jam_path = ScSnapshot::new(1e-6, 4e-6, 1e-6, 0.0, 0.0, 1e-9);
    assert_eq!(threshold_a(&no_jam_path), Err(DegenerateChannel));
}

#[test]
fn rates_on_simple_numbers() {
    // p h_i / σ² = 3, p h_e / (σ² + q g_e) = 1.
    let sc = ScSnapshot::new(3.0, 2.0, 1.0, 0.0, 1.0, 1.0);
    let r = sc_rates(1.0, 1.0, &sc);
    assert!((r.r - 2.0).abs() < 1e-12);
    assert!((r.r_e - 1.0).abs() < 1e-12);
    assert!((r.secrecy - 1.0).abs() < 1e-12);
    // Stronger eavesdropper: A = σ²(h_e − h_i)/(h_i g_e) = 2.
    let sc = ScSnapshot::new(1.0, 3.0, 1.0, 0.0, 1.0, 1.0);
    let a = threshold_a(&sc).unwrap();
    assert!((a - 2.0).abs() < 1e-12);
    assert_eq!(sc_rates(1.0, 1.9, &sc).secrecy, 0.0);
    assert!(sc_rates(1.0, 2.5, &sc).secrecy > 0.0);
}

#[test]
fn slacks_and_feasibility() {
    let params = SystemParams {
        n_sc: 2,
        total_power_w: 2.0,
        noise_w: 1e-9,
        peak_p_w: 2.0,
        peak_q_w: 2.0,
        eh_min_w: 1e-6,
        ..SystemParams::default()
    };
    let ch = ChannelState::flat(2, 1e-6, 1e-6, 1e-6, 1e-6, 1e-6).unwrap();
    let s = constraint_slacks(&[1.0, 1.0], &[1e-6, 1e-6], &ch, &params).unwrap();
    assert!(s.power.abs() < 1e-15);
    assert!(s.jammer.abs() < 1e-18);
    // 2·1e-6 + 2e-12 − 1e-6
    assert!((s.eh - (1e-6 + 2e-12)).abs() < 1e-18);
    assert!(s.is_feasible());
    let s = constraint_slacks(&[1.5, 1.0], &[0.0, 0.0], &ch, &params).unwrap();
    assert!(!s.is_feasible());
}

#[test]
fn mismatched_lengths_are_rejected() {
    assert!(ChannelState::new(vec![1.0; 3], vec![1.0; 3], vec![1.0; 2], vec![1.0; 3], vec![1.0; 3]).is_err());
    let params = SystemParams { n_sc: 3, ..SystemParams::default() };
    let ch = ChannelState::flat(3, 1e-6, 1e-6, 1e-6, 1e-6, 1e-6).unwrap();
    assert!(secrecy_rate_cancel(&[0.0; 2], &[0.0; 3], &ch, &params).is_err());
    assert!(matches!(
        constraint_slacks(&[0.0; 3], &[0.0; 4], &ch, &params),
        Err(swipt_core::Error::LengthMismatch { expected: 3, found: 4 })
    ));
}

proptest! {
    #[test]
    fn dbm_round_trip(dbm in -120.0f64..60.0) {
        let back = watts_to_dbm(dbm_to_watts(dbm));
        prop_assert!((back - dbm).abs() < 1e-9);
    }

    #[test]
    fn secrecy_rate_is_bounded_and_nonnegative(sc in snapshot(), p in 0.0f64..0.05, q in 0.0f64..0.05) {
        let r = sc_rates(p, q, &sc);
        prop_assert!(r.secrecy >= 0.0);
        prop_assert!(r.secrecy <= r.r + 1e-12);
        prop_assert!(r.r >= 0.0 && r.r_e >= 0.0);
    }

    #[test]
    fn secrecy_rate_nondecreasing_in_both_powers(sc in snapshot(), p in 0.0f64..0.05, q in 0.0f64..0.05, dp in 0.0f64..0.01, dq in 0.0f64..0.01) {
        let base = sc_rates(p, q, &sc).secrecy;
        prop_assert!(sc_rates(p + dp, q, &sc).secrecy >= base - 1e-12);
        prop_assert!(sc_rates(p, q + dq, &sc).secrecy >= base - 1e-12);
    }

    #[test]
    fn f1_decreasing_in_p_increasing_in_q(sc in snapshot(), nu in duals(), p in 0.0f64..0.05, dq in 0.0f64..0.05, d in 1e-6f64..0.01) {
        // Monotone in p on the secrecy branch q ≥ A, where it is used.
        let q = threshold_a(&sc).unwrap_or(0.0) + dq;
        let base = f1(p, q, &sc, &nu);
        let tol = 1e-9 * base.abs().max(1.0);
        prop_assert!(f1(p + d, q, &sc, &nu) <= base + tol);
        prop_assert!(f1(p, q + d, &sc, &nu) >= base - tol);
    }

    #[test]
    fn f2_decreasing_in_q(sc in snapshot(), nu in duals(), p in 0.0f64..0.05, q in 0.0f64..0.05, d in 1e-6f64..0.01) {
        let base = f2(p, q, &sc, &nu);
        prop_assert!(f2(p, q + d, &sc, &nu) <= base + 1e-9 * base.abs().max(1.0));
    }

    #[test]
    fn f1_at_origin_on_threshold_cancels_rate_terms(sc in snapshot(), nu in duals()) {
        prop_assume!(sc.h_e > sc.h_i);
        let a = threshold_a(&sc).unwrap();
        let expected = -nu.lambda + nu.beta * sc.h_j + nu.mu * sc.h_e;
        let scale = sc.h_i / (LN_2 * sc.noise_w);
        prop_assert!((f1(0.0, a, &sc, &nu) - expected).abs() <= 1e-9 * scale.max(expected.abs()));
    }

    #[test]
    fn f1_matches_finite_difference(sc in snapshot(), nu in duals(), p in 1e-4f64..0.05, q in 0.0f64..0.05) {
        prop_assume!(sc_rates(p, q, &sc).secrecy > 0.0);
        let h = 1e-7 * p;
        let num = (sc_lagrangian(p + h, q, &sc, &nu) - sc_lagrangian(p - h, q, &sc, &nu)) / (2.0 * h);
        let exact = f1(p, q, &sc, &nu);
        prop_assert!((num - exact).abs() <= 1e-4 * exact.abs().max(nu.lambda).max(1.0), "{num} vs {exact}");
    }
}
