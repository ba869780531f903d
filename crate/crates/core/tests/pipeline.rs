use approx::assert_relative_eq;
use mdcnet_core::params::{parse_config, NetworkConfig};
use mdcnet_core::report::analyze;
use proptest::prelude::*;

fn m(cfg: &NetworkConfig, name: &str) -> f64 {
    analyze(cfg).metric(name).unwrap_or_else(|| panic!("{name} missing"))
}

#[test]
fn baseline_headline_numbers() {
    let r = analyze(&NetworkConfig::baseline());
    assert!(r.is_complete(), "{:?}", r.failure);
    let get = |n| r.metric(n).unwrap();
    assert_relative_eq!(get("e_ct"), 4.2052, max_relative = 1e-4);
    assert_relative_eq!(get("e_ict"), 12.0, max_relative = 1e-9);
    assert_relative_eq!(get("p_ct"), 0.2595, max_relative = 1e-3);
    assert_eq!(get("xi_cap"), 37.0);
    assert_relative_eq!(get("p_cov_m"), 0.8998, max_relative = 1e-3);
    assert_relative_eq!(get("total_delay"), 127.17, max_relative = 1e-3);
}

#[test]
fn total_delay_is_the_sum_of_its_hops() {
    let r = analyze(&NetworkConfig::baseline());
    let get = |n| r.metric(n).unwrap();
    let sum = get("d_q_s") + get("d_t_s") + get("d_q_m") + get("d_t_m");
    assert_relative_eq!(get("total_delay"), sum, max_relative = 1e-12);
}

#[test]
fn overload_stops_after_coverage() {
    let cfg = NetworkConfig::baseline().with_param("xi", 3.0).unwrap();
    let r = analyze(&cfg);
    assert!(!r.is_complete());
    assert!(r.contact.is_some());
    assert!(r.delays.is_none() && r.energy.is_none());
}

#[test]
fn config_text_round_trips_through_the_pipeline() {
    let cfg = NetworkConfig::baseline().with_param("v", 12.5).unwrap().with_param("K", 32.0).unwrap();
    let back = parse_config(&cfg.to_config_string()).unwrap();
    assert_eq!(analyze(&cfg).metrics(), analyze(&back).metrics());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn stable_reports_are_well_formed(xi in 0.1f64..1.5, v in 5.0f64..30.0, r_s in 6.0f64..15.0) {
        let cfg = NetworkConfig::baseline()
            .with_param("xi", xi).unwrap()
            .with_param("v", v).unwrap()
            .with_param("r_s", r_s).unwrap();
        let r = analyze(&cfg);
        prop_assume!(r.is_complete());
        let get = |n| r.metric(n).unwrap();
        for p in ["p_ct", "p_cov_m", "p_cov_a", "rho"] {
            prop_assert!(get(p) > 0.0 && get(p) < 1.0, "{p} = {}", get(p));
        }
        prop_assert!(xi < get("xi_bound"));
        for d in ["d_q_s", "d_q_m", "e_sensor", "e_l"] {
            prop_assert!(get(d).is_finite() && get(d) > 0.0, "{d} = {}", get(d));
        }
    }

    #[test]
    fn more_traffic_means_longer_sensor_queues(lo in 0.1f64..0.6, step in 0.05f64..0.4) {
        let base = NetworkConfig::baseline();
        let a = base.with_param("xi", lo).unwrap();
        let b = base.with_param("xi", lo + step).unwrap();
        prop_assert!(m(&a, "e_l") < m(&b, "e_l"));
        prop_assert!(m(&a, "p_cov_m") >= m(&b, "p_cov_m") - 1e-9);
    }
}
