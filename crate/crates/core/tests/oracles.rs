//! The matrix-geometric switch solver checked against independent closed forms.

use ofdelay::switch_queue::{
    build_qbd_blocks, pollaczek_khinchine_mean, solve_rate_matrix, solve_switch_queue,
    HyperExpService, DEFAULT_MAX_ITER, DEFAULT_TOLERANCE,
};
use proptest::prelude::*;

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Rates drawn so that the packet-in phase may be the faster or the slower one.
fn service() -> impl Strategy<Value = HyperExpService> {
    (0.0..=1.0f64, 1e3..1e6f64, 1e3..1e6f64)
        .prop_map(|(p, mu1, mu2)| HyperExpService::new(p, mu1, mu2).unwrap())
}

fn loaded_service() -> impl Strategy<Value = (HyperExpService, f64)> {
    (service(), 0.01..0.97f64).prop_map(|(svc, u)| {
        let lambda = u / svc.mean_service_time();
        (svc, lambda)
    })
}

proptest! {
    #[test]
    fn matrix_geometric_matches_pollaczek_khinchine((svc, lambda) in loaded_service()) {
        let qbd = solve_switch_queue(&svc, lambda).unwrap().metrics;
        let pk = pollaczek_khinchine_mean(&svc, lambda).unwrap();
        prop_assert!(rel(qbd.mean_queue_len, pk.mean_queue_len) <= 1e-9,
            "qbd {} pk {}", qbd.mean_queue_len, pk.mean_queue_len);
        prop_assert!(rel(qbd.mean_sojourn_s, pk.mean_sojourn_s) <= 1e-9);
        prop_assert!(rel(qbd.utilization, pk.utilization) <= 1e-12);
    }

    #[test]
    fn distribution_is_normalized((svc, lambda) in loaded_service()) {
        let sol = solve_switch_queue(&svc, lambda).unwrap();
        let d = &sol.distribution;
        prop_assert!((d.total_mass().unwrap() - 1.0).abs() <= 1e-10);
        prop_assert!(d.spectral_radius_r < 1.0);
        let u = svc.utilization(lambda);
        prop_assert!((d.pi0 - (1.0 - u)).abs() <= 1e-9);
        for k in 0..50 {
            prop_assert!(d.level_probability(k) >= -1e-15);
        }
    }

    #[test]
    fn rate_matrix_solves_its_quadratic((svc, lambda) in loaded_service()) {
        let blocks = build_qbd_blocks(&svc, lambda).unwrap();
        let r = solve_rate_matrix(&blocks, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(blocks.residual(&r) <= 1e-9 * lambda);
        prop_assert!(r.min_entry() >= 0.0);
        let (b0, b1, a) = blocks.generator_row_sums();
        prop_assert!(b0.abs() <= 1e-9 * lambda);
        prop_assert!(b1.0.iter().chain(a.0.iter()).all(|s| s.abs() <= 1e-6 * lambda));
    }

    #[test]
    fn delay_grows_with_load(svc in service(), u in 0.01..0.9f64, bump in 1.001..1.1f64) {
        let lambda = u / svc.mean_service_time();
        let lo = solve_switch_queue(&svc, lambda).unwrap().metrics;
        let hi = solve_switch_queue(&svc, lambda * bump).unwrap().metrics;
        prop_assert!(hi.mean_queue_len > lo.mean_queue_len);
        prop_assert!(hi.mean_sojourn_s > lo.mean_sojourn_s);
    }

    #[test]
    fn delay_grows_with_packet_in_share(p in 0.0..0.95f64, dp in 0.01..0.05f64, lambda in 1e3..3e4f64) {
        // The packet-in phase is the slow one, so moving mass to it lengthens the queue.
        let a = HyperExpService::new(p, 32000.0, 64000.0).unwrap();
        let b = HyperExpService::new(p + dp, 32000.0, 64000.0).unwrap();
        let ta = solve_switch_queue(&a, lambda).unwrap().metrics.mean_sojourn_s;
        let tb = solve_switch_queue(&b, lambda).unwrap().metrics.mean_sojourn_s;
        prop_assert!(tb > ta);
    }

    #[test]
    fn littles_law((svc, lambda) in loaded_service()) {
        let m = solve_switch_queue(&svc, lambda).unwrap().metrics;
        prop_assert!(rel(m.mean_queue_len, lambda * m.mean_sojourn_s) <= 1e-12);
    }
}

#[test]
fn equal_phase_rates_reduce_to_mm1() {
    for p in [0.0, 0.3, 0.7, 1.0] {
        let svc = HyperExpService::new(p, 50000.0, 50000.0).unwrap();
        for lambda in [5000.0, 25000.0, 45000.0] {
            let m = solve_switch_queue(&svc, lambda).unwrap().metrics;
            assert!(rel(m.mean_sojourn_s, 1.0 / (50000.0 - lambda)) <= 1e-11);
        }
    }
}

#[test]
fn level_tail_decays_at_the_spectral_radius() {
    let svc = HyperExpService::new(0.1, 32000.0, 64000.0).unwrap();
    let d = solve_switch_queue(&svc, 30000.0).unwrap().distribution;
    let ratio = d.level_probability(400) / d.level_probability(399);
    assert!(rel(ratio, d.spectral_radius_r) <= 1e-9);
}

#[test]
fn unstable_loads_are_rejected() {
    let svc = HyperExpService::new(1.0, 32000.0, 64000.0).unwrap();
    for lambda in [32000.0, 33000.0, 1e9] {
        assert!(solve_switch_queue(&svc, lambda).unwrap_err().is_instability());
        assert!(pollaczek_khinchine_mean(&svc, lambda).unwrap_err().is_instability());
    }
    assert!(solve_switch_queue(&svc, 0.0).is_err());
    assert!(solve_switch_queue(&svc, f64::NAN).is_err());
}
