use proptest::prelude::*;
use qfdiv::closed::{chi2_logmean, petz, sandwiched, umegaki};
use qfdiv::generator::{Hellinger, RelativeEntropy};
use qfdiv::integral::{f_divergence, hellinger, hockey_stick, renyi, renyi_from_hellinger};
use qfdiv::operator::{parse_state, random_density, save_state, DensityState, StateFile, StatePair};
use qfdiv::quad::QuadratureSpec;
use qfdiv::sweep::parse_range;

fn state(d: usize, seed: u64) -> DensityState {
    // Mix toward the identity so eigenvalues stay above ~1e-2.
    let s = random_density(d, d, seed).unwrap();
    s.mix(&DensityState::maximally_mixed(d), 0.9).unwrap()
}

fn pair(d: usize, seed: u64) -> StatePair {
    StatePair::new(state(d, seed), state(d, seed ^ 0x9e37_79b9)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hockey_stick_is_bounded_and_decreasing(d in 2usize..5, seed in any::<u64>(), g in 0.0f64..5.0) {
        let p = pair(d, seed);
        let a = hockey_stick(g, &p.rho, &p.sigma).unwrap();
        let b = hockey_stick(g + 0.25, &p.rho, &p.sigma).unwrap();
        prop_assert!(b <= a + 1e-13);
        prop_assert!(a >= (1.0 - g).max(0.0) - 1e-13);
        prop_assert!(a <= 1.0 + 1e-13);
    }

    #[test]
    fn divergences_are_nonnegative(d in 2usize..4, seed in any::<u64>(), alpha in 0.2f64..3.5) {
        let p = pair(d, seed);
        let spec = QuadratureSpec::default();
        prop_assert!(f_divergence(&RelativeEntropy, &p, &spec).unwrap().value >= -1e-12);
        prop_assert!(f_divergence(&Hellinger::new(alpha).unwrap(), &p, &spec).unwrap().value >= -1e-12);
        prop_assert!(chi2_logmean(&p).value >= -1e-12);
    }

    #[test]
    fn integral_kl_matches_umegaki(d in 2usize..4, seed in any::<u64>()) {
        let p = pair(d, seed);
        let q = f_divergence(&RelativeEntropy, &p, &QuadratureSpec::default()).unwrap().value;
        let u = umegaki(&p).value;
        prop_assert!((q - u).abs() <= 1e-8 * (1.0 + u), "{} vs {}", q, u);
    }

    #[test]
    fn renyi_is_the_hellinger_transform(d in 2usize..4, seed in any::<u64>(), alpha in 0.3f64..3.0) {
        prop_assume!((alpha - 1.0).abs() > 1e-3);
        let p = pair(d, seed);
        let spec = QuadratureSpec::default();
        let h = hellinger(alpha, &p, &spec).unwrap();
        let direct = renyi(alpha, &p, &spec).unwrap().value;
        let oracle = (1.0 + (alpha - 1.0) * h.value).ln() / (alpha - 1.0);
        prop_assert!((direct - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
        prop_assert!((renyi_from_hellinger(alpha, h).value - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
    }

    #[test]
    fn renyi_orderings(d in 2usize..4, seed in any::<u64>(), alpha in 0.55f64..3.0) {
        let p = pair(d, seed);
        let s = sandwiched(alpha, &p).unwrap().renyi;
        let z = petz(alpha, &p).unwrap().renyi;
        prop_assert!(s <= z + 1e-10 * (1.0 + z.abs()));
        let d_alpha = renyi(alpha, &p, &QuadratureSpec::default()).unwrap().value;
        if alpha < 1.0 {
            prop_assert!(z <= d_alpha + 1e-8 * (1.0 + d_alpha));
        }
    }

    #[test]
    fn equal_states_give_zero(d in 2usize..5, seed in any::<u64>(), alpha in 0.3f64..4.0) {
        let s = state(d, seed);
        let p = StatePair::new(s.clone(), s).unwrap();
        prop_assert!(hellinger(alpha, &p, &QuadratureSpec::default()).unwrap().value.abs() < 1e-10);
        prop_assert!(umegaki(&p).value.abs() < 1e-12);
    }

    #[test]
    fn state_files_round_trip(d in 1usize..5, seed in any::<u64>()) {
        let s = random_density(d, 1 + (seed as usize) % d, seed).unwrap();
        let text = serde_json::to_string(&StateFile::from_state(&s)).unwrap();
        let back = parse_state(&text).unwrap();
        prop_assert!((back.matrix() - s.matrix()).norm() < 1e-12);
    }

    #[test]
    fn grids_are_increasing_and_bounded(start in 0.05f64..2.0, span in 0.0f64..3.0, step in 0.01f64..0.5) {
        let text = format!("{start}:{}:{step}", start + span);
        let g = parse_range(&text).unwrap();
        prop_assert!(!g.is_empty());
        prop_assert!(g.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(*g.last().unwrap() <= start + span + 1e-9);
    }
}

#[test]
fn saved_states_reload() {
    let dir = std::env::temp_dir().join(format!("qfdiv-prop-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("s.json");
    let s = state(3, 7);
    save_state(&path, &s).unwrap();
    let back = qfdiv::operator::load_state(&path).unwrap();
    assert!((back.matrix() - s.matrix()).norm() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}
