use rebvoter::exact::*;
use rebvoter::models::{Family, ModelSpec, Representation};
use rebvoter::{Error, Pattern, RingConfig};

const ALPHAS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

fn spec(f: Family, r: Representation, a: f64) -> ModelSpec {
    ModelSpec::new(f, r, a).unwrap()
}

#[test]
fn duality_holds_for_all_pairings() {
    for f in [Family::OneSided, Family::TwoSided, Family::Disagreement, Family::Swapping] {
        for &a in &ALPHAS {
            let x = spec(f, Representation::Spin, a);
            let y = x.cancellative_dual().unwrap();
            for n in 4..=6 {
                let r = check_duality(&x, &y, n).unwrap();
                assert!(r < 1e-12, "{x} vs {y} at N={n}: {r:e}");
            }
        }
    }
}

#[test]
fn mismatched_pairing_fails() {
    let x = spec(Family::OneSided, Representation::Spin, 0.7);
    let y = spec(Family::OneSided, Representation::Interface, 0.7);
    assert!(check_duality(&x, &y, 6).unwrap() > 1e-3);
}

#[test]
fn interface_generators_close_parity_sectors() {
    for f in Family::ALL {
        for &a in &ALPHAS {
            let s = spec(f, Representation::Interface, a);
            for n in [5, 6, 7] {
                let full = build_generator(&s, n, Sector::Full).unwrap();
                assert!(full.preserves_parity(), "{s} N={n}");
                assert!(full.row_sum_residual() < 1e-12);
                for sector in [Sector::Odd, Sector::Even] {
                    let sys = build_generator(&s, n, sector).unwrap();
                    assert_eq!(sys.len(), 1 << (n - 1));
                }
            }
        }
    }
}

#[test]
fn spin_generators_leave_parity_sectors() {
    let s = spec(Family::TwoSided, Representation::Spin, 0.5);
    assert!(matches!(build_generator(&s, 5, Sector::Odd), Err(Error::InvalidModel(_))));
}

#[test]
fn stationary_solves_meet_tolerance() {
    for f in [Family::OneSided, Family::TwoSided, Family::MixedOneSided] {
        for &a in &[0.1, 0.37, 0.5, 0.8] {
            for n in [6, 9, 12] {
                let sys = build_generator(&spec(f, Representation::Interface, a), n, Sector::Odd).unwrap();
                let law = stationary(&sys).unwrap();
                assert!(law.residual <= SOLVE_TOLERANCE, "{f} {a} {n}: {:e}", law.residual);
                assert!(sys.residual(&law.pi) <= SOLVE_TOLERANCE);
                let total: f64 = law.pi.iter().sum();
                assert!((total - 1.0).abs() < 1e-12);
                assert!(law.pi.iter().all(|&p| p >= -1e-15));
            }
        }
    }
}

#[test]
fn iterative_solve_is_used_above_the_dense_limit() {
    let sys = build_generator(&spec(Family::OneSided, Representation::Interface, 0.6), 14, Sector::Odd).unwrap();
    assert!(sys.len() > DENSE_LIMIT);
    let law = stationary(&sys).unwrap();
    assert!(law.residual <= SOLVE_TOLERANCE);
}

#[test]
fn stationary_observables_are_translation_consistent() {
    let sys = build_generator(&spec(Family::TwoSided, Representation::Interface, 0.3), 8, Sector::Odd).unwrap();
    let law = stationary(&sys).unwrap();
    for k in 0..8 {
        let y = RingConfig::from_mask(0b1, 8).unwrap().rotate(k);
        assert!((law.probability(&y) - law.probability(&RingConfig::single(8, 0).unwrap())).abs() < 1e-12);
    }
    let obs = exact_observables(&law, &[Pattern::block(1), "11".parse().unwrap()]).unwrap();
    assert!((obs.harmonic[0].1 - 1.0).abs() < 1e-12);
    let mean: f64 = obs.count_law.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    assert!((mean - obs.mean_ones).abs() < 1e-12);
    assert!(obs.count_law.iter().step_by(2).all(|&p| p == 0.0));
}

#[test]
fn spin_traps_make_the_full_chain_reducible() {
    let sys = build_generator(&spec(Family::OneSided, Representation::Spin, 0.4), 5, Sector::Full).unwrap();
    assert!(matches!(stationary(&sys), Err(Error::Reducible { .. })));
    let classes = sys.closed_classes();
    assert_eq!(classes.len(), 2);
    for class in &classes {
        let law = stationary_on(&sys, class).unwrap();
        assert_eq!(law.pi.iter().filter(|&&p| p > 0.0).count(), 1);
    }
}

#[test]
fn size_guard_rejects_large_rings() {
    let s = spec(Family::OneSided, Representation::Interface, 0.5);
    assert!(matches!(build_generator(&s, MAX_SITES + 1, Sector::Odd), Err(Error::SizeGuard { .. })));
    assert!(matches!(check_duality(&s, &s, MAX_CHECK_SITES + 1), Err(Error::SizeGuard { .. })));
}
