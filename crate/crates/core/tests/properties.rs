use maxdiq::coupling::{coupling_from_im_chi, im_chi_from_coupling};
use maxdiq::kernels::{kernel_q, kernel_z, uniform_grid, KernelRequest, Medium, Sign};
use maxdiq::noise::noise_commutator_coefficient;
use maxdiq::{DispersionRelation, PhysicalConstants, Role, SusceptibilityModel};
use proptest::prelude::*;

const K: PhysicalConstants = PhysicalConstants::NATURAL;

fn damped_medium() -> impl Strategy<Value = Medium> {
    prop_oneof![
        (0.05f64..5.0).prop_map(|b| Medium::electric(SusceptibilityModel::step(b, Role::Electric).unwrap()).unwrap()),
        (0.3f64..3.0, 0.05f64..2.0, 0.1f64..1.5).prop_map(|(w0, g, wp)| {
            Medium::electric(SusceptibilityModel::lorentz(w0, g, wp, Role::Electric).unwrap()).unwrap()
        }),
    ]
}

fn passive_model() -> impl Strategy<Value = SusceptibilityModel> {
    prop_oneof![
        (0.05f64..5.0, any::<bool>()).prop_map(|(b, m)| {
            SusceptibilityModel::step(b, if m { Role::Magnetic } else { Role::Electric }).unwrap()
        }),
        (0.3f64..3.0, 0.0f64..2.0, 0.1f64..1.5, any::<bool>()).prop_map(|(w0, g, wp, m)| {
            SusceptibilityModel::lorentz(w0, g, wp, if m { Role::Magnetic } else { Role::Electric }).unwrap()
        }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 48,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn z_starts_at_one(medium in damped_medium(), wq in 0.2f64..3.0) {
        for sign in [Sign::Plus, Sign::Minus] {
            let z = kernel_z(&KernelRequest::new(medium.clone(), wq, 0.0, sign, vec![0.0, 0.5])).unwrap();
            prop_assert!((z.values[0] - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn backward_kernel_is_conjugate_for_real_media(medium in damped_medium(), wq in 0.2f64..3.0) {
        let times = uniform_grid(10.0, 41).unwrap();
        let plus = kernel_z(&KernelRequest::new(medium.clone(), wq, 0.0, Sign::Plus, times.clone())).unwrap();
        let minus = kernel_z(&KernelRequest::new(medium, wq, 0.0, Sign::Minus, times)).unwrap();
        for (p, m) in plus.values.iter().zip(&minus.values) {
            prop_assert!((p.conj() - m).norm() < 1e-10);
        }
    }

    #[test]
    fn q_is_bounded_for_damped_media(medium in damped_medium(), wk in 0.05f64..3.0) {
        let times = uniform_grid(20.0, 81).unwrap();
        match kernel_q(&KernelRequest::new(medium, 1.0, wk, Sign::Plus, times)) {
            Ok(q) => {
                prop_assert!((q.values[0] - 1.0).norm() < 1e-12);
                prop_assert!(q.values.iter().all(|v| v.is_finite()));
            }
            Err(maxdiq::Error::Resonance { .. }) => {}
            Err(other) => prop_assert!(false, "{other}"),
        }
    }

    #[test]
    fn noise_weight_is_non_negative(model in passive_model(), w in 0.01f64..10.0) {
        prop_assert!(noise_commutator_coefficient(&model, w, &K).unwrap() >= 0.0);
    }

    #[test]
    fn coupling_round_trip(im in 0.0f64..10.0, w in 0.01f64..10.0, a in 0.2f64..3.0, p in 0.5f64..2.5, magnetic in any::<bool>()) {
        let role = if magnetic { Role::Magnetic } else { Role::Electric };
        let d = DispersionRelation::power_law(a, p).unwrap();
        let f2 = coupling_from_im_chi(im, w, role, &d, &K).unwrap();
        prop_assert!(f2 >= 0.0);
        let back = im_chi_from_coupling(f2, w, role, &d, &K).unwrap();
        prop_assert!((back - im).abs() <= 1e-12 * im.max(1.0));
    }

    #[test]
    fn uniform_grid_is_exact_at_ends(t_max in 0.1f64..100.0, n in 2usize..500) {
        let g = uniform_grid(t_max, n).unwrap();
        prop_assert_eq!(g.len(), n);
        prop_assert_eq!(g[0], 0.0);
        prop_assert_eq!(*g.last().unwrap(), t_max);
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
    }
}
