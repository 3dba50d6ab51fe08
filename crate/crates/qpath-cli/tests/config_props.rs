use proptest::prelude::*;

use qpath_cli::check::{Probe, Shared, Worst};
use qpath_cli::{Suite, SuiteConfig};

fn suites() -> impl Strategy<Value = Vec<Suite>> {
    proptest::sample::subsequence(Suite::ALL.to_vec(), 1..=Suite::ALL.len())
}

prop_compose! {
    fn valid_config()(
        group in prop::sample::select(vec!["su2", "so3", "heisenberg3", "torus2"]),
        suites in suites(),
        half in 1usize..500,
        fd in 1e-8f64..9e-3,
        dt in 1e-8f64..9e-3,
        seed in any::<u64>(),
        samples in 1usize..50,
        tol in 0.0f64..1.0,
    ) -> SuiteConfig {
        let mut c = SuiteConfig {
            group: group.into(),
            suites,
            n_points: 2 * half + 1,
            fd_step: fd,
            t_step: dt,
            seed,
            samples_per_check: samples,
            ..SuiteConfig::default()
        };
        c.tol_overrides.insert("lifting.d3form".into(), tol);
        c
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valid_configs_round_trip(c in valid_config()) {
        c.validate().unwrap();
        let text = serde_json::to_string(&c).unwrap();
        prop_assert_eq!(serde_json::from_str::<SuiteConfig>(&text).unwrap(), c);
    }

    #[test]
    fn even_grids_are_rejected(c in valid_config()) {
        let even = SuiteConfig { n_points: c.n_points + 1, ..c };
        prop_assert!(even.validate().is_err());
    }

    #[test]
    fn worst_keeps_the_largest_magnitude(xs in prop::collection::vec(-1e3f64..1e3, 1..20)) {
        let mut w = Worst::default();
        for &x in &xs {
            w.see(x);
        }
        let want = xs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        prop_assert_eq!(w.0, want);
        w.see(f64::NAN);
        w.see(1e9);
        prop_assert!(w.0.is_nan());
    }

    #[test]
    fn probes_depend_only_on_seed_and_name(seed in any::<u64>(), other in any::<u64>()) {
        let ctx = SuiteConfig::default().context().unwrap();
        let shared = Shared::default();
        let draw = |s: u64, name: &str| {
            let mut p = Probe::new(&ctx, &shared, s, name, 1);
            let g = p.point(1.0);
            (g, p.digest(), p.seed)
        };
        prop_assert_eq!(draw(seed, "forms.cartan"), draw(seed, "forms.cartan"));
        prop_assert_ne!(draw(seed, "forms.cartan").2, draw(seed, "forms.d_squared").2);
        if other != seed {
            prop_assert_ne!(draw(seed, "forms.cartan").1, draw(other, "forms.cartan").1);
        }
    }
}
