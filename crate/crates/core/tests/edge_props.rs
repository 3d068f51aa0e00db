use rebvoter::edge::*;
use rebvoter::engine::{replica_seed, rng_from_seed, step, Kernel, SimState, SweepPlan};
use rebvoter::models::{Family, MenuTable, ModelSpec, Representation};
use rebvoter::RingConfig;

const SAMPLES: u64 = 2000;
const HORIZON: f64 = 20.0;
const WIDTH: usize = 256;

fn spec(f: Family, a: f64) -> ModelSpec {
    ModelSpec::new(f, Representation::Interface, a).unwrap()
}

fn frame_displacement(s: &ModelSpec, seed: u64) -> i64 {
    let menu = MenuTable::for_spec(s).unwrap();
    let mut state = FrameState::new(WIDTH, rng_from_seed(seed)).unwrap();
    loop {
        let before = state.displacement;
        frame_step(&mut state, &menu, s.alpha()).unwrap();
        assert_eq!(state.dropped, 0);
        if state.t > HORIZON {
            return before;
        }
    }
}

fn ring_displacement(s: &ModelSpec, seed: u64) -> i64 {
    let origin = WIDTH / 2;
    let mut state = SimState::new(RingConfig::single(WIDTH, origin).unwrap(), rng_from_seed(seed));
    let mut kernel = Kernel::for_spec(s);
    loop {
        let leftmost = state.config().particles().min().unwrap();
        step(&mut state, &mut kernel, s.alpha()).unwrap();
        if state.t > HORIZON {
            return leftmost as i64 - origin as i64;
        }
    }
}

fn ks_statistic(mut a: Vec<i64>, mut b: Vec<i64>) -> f64 {
    a.sort_unstable();
    b.sort_unstable();
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] == v {
            i += 1;
        }
        while j < b.len() && b[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

#[test]
fn frame_matches_whole_ring_leftmost_particle() {
    for s in [spec(Family::OneSided, 0.5), spec(Family::TwoSided, 0.45), spec(Family::TwoSided, 0.8)] {
        let frame: Vec<i64> = (0..SAMPLES).map(|r| frame_displacement(&s, replica_seed(1, r))).collect();
        let ring: Vec<i64> = (0..SAMPLES).map(|r| ring_displacement(&s, replica_seed(2, r))).collect();
        let n = SAMPLES as f64;
        let critical = 1.628 * (2.0 / n).sqrt();
        let d = ks_statistic(frame, ring);
        assert!(d < critical, "{s}: KS distance {d} exceeds {critical}");
    }
}

#[test]
fn ks_statistic_detects_a_shift() {
    let a: Vec<i64> = (0..SAMPLES as i64).map(|i| i % 50).collect();
    let b: Vec<i64> = a.iter().map(|v| v + 10).collect();
    assert!(ks_statistic(a.clone(), b) > 0.1);
    assert_eq!(ks_statistic(a.clone(), a), 0.0);
}

#[test]
fn restarts_are_rare_on_the_default_window() {
    for f in [Family::OneSided, Family::TwoSided] {
        for &a in &[0.1, 0.5, 0.9] {
            let plan = SweepPlan::fixed(spec(f, a), DEFAULT_WINDOW, 500.0, 1, 17);
            for side in [Side::Left, Side::Right] {
                let bins = run_edge(&plan, side).unwrap();
                let events: u64 = bins.iter().map(|b| b.events).sum();
                let restarts: u64 = bins.iter().map(|b| b.restarts).sum();
                assert!(events > 0);
                assert!((restarts as f64) < 1e-6 * events as f64, "{f} α={a} {side}: {restarts}/{events}");
            }
        }
    }
}

#[test]
fn one_sided_edges_move_right() {
    for &a in &[0.3, 0.7] {
        let plan = SweepPlan::fixed(spec(Family::OneSided, a), 512, 2e3, 1, 5);
        let left = edge_speed(&[run_edge(&plan, Side::Left).unwrap()]).unwrap()[0];
        let right = edge_speed(&[run_edge(&plan, Side::Right).unwrap()]).unwrap()[0];
        assert!(left.value >= 0.0, "α={a}: {left:?}");
        assert!(right.value >= left.value, "α={a}: {left:?} {right:?}");
    }
}
