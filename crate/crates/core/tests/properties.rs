mod common;

use arc_core::arc::unitary_step;
use arc_core::linalg::{eigvalsh, hermiticity_error};
use arc_core::model::{discretize_reservoir, fermi_occupation, mixed_basis_order, Region};
use arc_core::negf::lead_self_energy_r;
use arc_core::sweep::{moving_average_error, optimal_action, power_law_fit};
use arc_core::*;
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_junction() -> impl Strategy<Value = Junction> {
    (2usize..24, 0.0f64..0.5, -1.0f64..1.0, -0.8f64..0.8).prop_map(|(n, t, bias, shift)| {
        let mut j = Junction::resonant_level(n, t, bias);
        j.right.frequency_shift = shift;
        j
    })
}

fn protocol() -> impl Strategy<Value = Protocol> {
    prop_oneof![
        (0.01f64..5.0).prop_map(|gamma| Protocol::Continuous { gamma }),
        (0.01f64..100.0, 0.2f64..40.0).prop_map(|(s, a)| Protocol::Cycle(ArcParams::from_action(s, a).unwrap())),
        (0.2f64..40.0).prop_map(|t| Protocol::Cycle(ArcParams::periodic_refresh(t))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reservoir_couplings_complete(n in 1usize..300, c in 0.1f64..3.0, delta in -1.0f64..1.0) {
        let mut spec = ReservoirSpec::new(n, 0.1, 0.0);
        spec.boundary_coupling = c;
        let base = discretize_reservoir(&spec).unwrap();
        spec.frequency_shift = delta;
        let shifted = discretize_reservoir(&spec).unwrap();
        let total: f64 = base.couplings.iter().map(|v| v * v).sum();
        prop_assert!((total - c * c).abs() < 1e-12 * c * c);
        for (a, b) in base.frequencies.iter().zip(&shifted.frequencies) {
            prop_assert!(a.abs() < 2.0);
            prop_assert!((b - a - delta).abs() < 1e-14);
        }
        prop_assert!(base.frequencies.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(&base.couplings, &shifted.couplings);
    }

    #[test]
    fn fermi_bounded_and_monotone(w in -5.0f64..5.0, dw in 0.0f64..1.0, t in 0.0f64..2.0, mu in -1.0f64..1.0) {
        let a = fermi_occupation(w, t, mu);
        let b = fermi_occupation(w + dw, t, mu);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a);
    }

    #[test]
    fn self_energy_is_retarded(w in -6.0f64..6.0) {
        let s = lead_self_energy_r(w, 1.0);
        prop_assert!(s.im <= 0.0);
        if w.abs() < 2.0 {
            prop_assert!((s.im + 0.5 * (4.0 - w * w).sqrt()).abs() < 1e-14);
        } else {
            prop_assert!(s.im == 0.0 && s.re.abs() <= 1.0);
        }
    }

    #[test]
    fn action_round_trip(gamma in 1e-3f64..1e3, tau in 1e-3f64..1e3) {
        let p = ArcParams::new(gamma, tau);
        let a = p.action();
        prop_assert!(a >= tau && a >= 2.0 / gamma);
        let (g2, t2) = params_from_action(gamma * tau, a).unwrap();
        prop_assert!((g2 - gamma).abs() <= 1e-12 * gamma);
        prop_assert!((t2 - tau).abs() <= 1e-12 * tau);
    }

    #[test]
    fn mixed_order_is_sorted_bijection(j in small_junction()) {
        let h = j.assemble().unwrap();
        let order = mixed_basis_order(&h);
        let mut seen = order.permutation.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..h.dim()).collect::<Vec<_>>());
        let freqs: Vec<f64> = order
            .permutation
            .iter()
            .filter(|&&m| h.modes[m].region != Region::System)
            .map(|&m| h.modes[m].frequency)
            .collect();
        prop_assert!(freqs.windows(2).all(|w| w[0] <= w[1]));
        let sys: Vec<usize> = order
            .permutation
            .iter()
            .enumerate()
            .filter(|(_, &m)| h.modes[m].region == Region::System)
            .map(|(p, _)| p)
            .collect();
        prop_assert!(sys.windows(2).all(|w| w[1] == w[0] + 1));
    }

    #[test]
    fn unitary_step_preserves_spectrum(seed in 0u64..1000, tau in 0.0f64..20.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let j = Junction::resonant_level(6, 0.1, 0.5);
        let h = j.assemble().unwrap();
        let prop = Propagator::new(&h.matrix).unwrap();
        let c0 = random_correlation(h.dim(), &mut rng);
        let c1 = unitary_step(&c0, &prop, tau);
        let (a, b) = (eigvalsh(&c0).unwrap(), eigvalsh(&c1).unwrap());
        for (x, y) in a.iter().zip(b.iter()) {
            prop_assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn cycle_map_contracts(j in small_junction(), s in 0.01f64..50.0, a in 0.2f64..40.0) {
        let h = j.assemble().unwrap();
        let prop = Propagator::new(&h.matrix).unwrap();
        let map = cycle_map(&h, &prop, ArcParams::from_action(s, a).unwrap()).unwrap();
        prop_assert!(map.spectral_radius < 1.0);
        prop_assert!(map.p.iter().all(|&x| (0.0..=1.0).contains(&x)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ness_is_physical_and_balanced(j in small_junction(), p in protocol()) {
        let h = j.assemble().unwrap();
        let prop = Propagator::new(&h.matrix).unwrap();
        let ness = solve_ness(&h, &prop, p, &SolverOptions::default()).unwrap();
        prop_assert!(ness.residual < 1e-8);
        prop_assert!(ness.is_physical(1e-9));
        let full = ness.measured_state(&h, &prop);
        prop_assert!(hermiticity_error(&full) < 1e-12);
        let r = currents(&full, &h);
        prop_assert!((r.i - 0.5 * (r.i_ls + r.i_sr)).abs() <= 1e-15 * r.i.abs().max(1.0));
        if let Protocol::Continuous { .. } = p {
            prop_assert!((r.i_ls - r.i_sr).abs() < 1e-9);
        }
        let order = mixed_basis_order(&h);
        let so = osee(&full, &order, order.cut_position).unwrap().s_o;
        prop_assert!(so >= 0.0 && so.is_finite());
    }

    #[test]
    fn error_report_sums(ls in -1.0f64..1.0, sr in -1.0f64..1.0, r in 0.01f64..1.0) {
        let e = current_error(&CurrentReading::new(ls, sr), r).unwrap();
        prop_assert!(e.sigma1_sq >= 0.0 && e.sigma2_sq >= 0.0);
        prop_assert!((e.sigma_sq - e.sigma1_sq - e.sigma2_sq).abs() <= 1e-15 * e.sigma_sq.max(1.0));
    }

    #[test]
    fn moving_average_within_range(ys in prop::collection::vec(0.0f64..1.0, 1..60), step in 0.1f64..2.0, half in 0.0f64..5.0) {
        let curve: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 * step, y)).collect();
        let avg = moving_average_error(&curve, half);
        let lo = ys.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = ys.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (x, y) in &avg {
            prop_assert!(*y >= lo - 1e-12 && *y <= hi + 1e-12, "{x}");
        }
        let (best, v) = optimal_action(&avg).unwrap();
        prop_assert!(avg.iter().all(|p| p.1 >= v));
        prop_assert!(avg.iter().filter(|p| p.1 == v).all(|p| p.0 >= best));
    }

    #[test]
    fn power_law_exact(a in 0.01f64..100.0, e in -3.0f64..3.0, x0 in 1.0f64..10.0) {
        let pts: Vec<(f64, f64)> = (0..5).map(|k| {
            let x = x0 * 2f64.powi(k);
            (x, a * x.powf(e))
        }).collect();
        let f = power_law_fit(&pts).unwrap();
        prop_assert!((f.exponent - e).abs() < 1e-9);
        prop_assert!((f.prefactor / a - 1.0).abs() < 1e-9);
    }
}
