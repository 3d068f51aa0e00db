//! The interface process seen from its leftmost particle, on a finite
//! window, and the edge speeds estimated from it.
//!
//! The window holds sites `l, l+1, …, l+W−1` of the line, where `l` is the
//! position of the leftmost particle. Toggles that would land at or beyond
//! `W` are discarded, as are particles pushed past the right end when the
//! window moves left. The right edge is handled by running the mirrored
//! particle menu from its left edge and negating the displacement.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore};
use rand_distr::Exp1;

use crate::engine::{rng_from_seed, SimRng, SweepPlan};
use crate::error::{Error, Result};
use crate::models::MenuTable;
use crate::observables::{bin_curve, Binned, CurvePoint};

/// Smallest accepted window.
pub const MIN_WINDOW: usize = 64;
/// Default window width.
pub const DEFAULT_WINDOW: usize = 2048;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::InvalidInput(format!("unknown side {s:?} (left or right)"))),
        }
    }
}

const NO_SLOT: u32 = u32::MAX;

/// Window contents in a circular buffer: logical site `i` lives in slot
/// `(start + i) mod W`, so moving the window costs no copying.
#[derive(Clone, Debug)]
pub struct FrameState {
    bits: Vec<u8>,
    start: usize,
    slots: Vec<u32>,
    // occupied buffer slots; the first `count` entries are live
    particles: Vec<u32>,
    count: usize,
    /// Net movement of the leftmost particle.
    pub displacement: i64,
    pub t: f64,
    /// Toggles discarded at the right end plus particles pushed out of it.
    pub dropped: u64,
    /// Number of times the window emptied and was reseeded.
    pub restarts: u64,
    pub rng: SimRng,
}

impl FrameState {
    /// A window of `width` sites holding one particle at its origin.
    pub fn new(width: usize, rng: SimRng) -> Result<Self> {
        if width < MIN_WINDOW {
            return Err(Error::InvalidPlan(format!(
                "window width {width} is below the minimum of {MIN_WINDOW}"
            )));
        }
        let mut s = Self {
            bits: vec![0; width],
            start: 0,
            slots: vec![NO_SLOT; width],
            particles: vec![0; width],
            count: 0,
            displacement: 0,
            t: 0.0,
            dropped: 0,
            restarts: 0,
            rng,
        };
        s.toggle(0);
        Ok(s)
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn particle_count(&self) -> usize {
        self.count
    }

    #[inline]
    fn slot(&self, i: usize) -> usize {
        let p = self.start + i;
        if p >= self.bits.len() {
            p - self.bits.len()
        } else {
            p
        }
    }

    /// Occupation of logical site `i`.
    pub fn get(&self, i: usize) -> bool {
        i < self.width() && self.bits[self.slot(i)] == 1
    }

    /// Window contents from the leftmost particle rightwards.
    pub fn window(&self) -> Vec<u8> {
        (0..self.width()).map(|i| self.bits[self.slot(i)]).collect()
    }

    fn toggle(&mut self, i: usize) {
        let p = self.slot(i);
        self.bits[p] ^= 1;
        if self.bits[p] == 1 {
            self.slots[p] = self.count as u32;
            self.particles[self.count] = p as u32;
            self.count += 1;
        } else {
            let k = self.slots[p];
            self.count -= 1;
            let last = self.particles[self.count];
            self.particles[k as usize] = last;
            self.slots[last as usize] = k;
            self.slots[p] = NO_SLOT;
        }
    }

    /// Moves the window `q` sites to the left, discarding what falls off the
    /// right end.
    fn shift_right(&mut self, q: usize) {
        let w = self.width();
        for i in w - q..w {
            if self.get(i) {
                self.toggle(i);
                self.dropped += 1;
            }
        }
        self.start = (self.start + w - q) % w;
        self.displacement -= q as i64;
    }

    /// Moves the window `p` sites to the right; the sites leaving on the left
    /// must be empty.
    fn shift_left(&mut self, p: usize) {
        debug_assert!((0..p).all(|i| !self.get(i)));
        self.start = (self.start + p) % self.width();
        self.displacement += p as i64;
    }

    fn first_particle(&self) -> Option<usize> {
        (0..self.width()).find(|&i| self.get(i))
    }

    /// True when the origin holds a particle, or the window is empty.
    pub fn anchor_holds(&self) -> bool {
        self.count == 0 || self.get(0)
    }
}

/// Outcome of one frame event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameStep {
    pub dt: f64,
    /// Change of the leftmost particle's position.
    pub shift: i64,
    /// True if the event emptied the window and a particle was reseeded at
    /// the origin.
    pub restarted: bool,
}

/// Draws a holding time and applies one event of the menu dynamics in
/// window coordinates.
pub fn frame_step(state: &mut FrameState, menu: &MenuTable, alpha: f64) -> Result<FrameStep> {
    if state.count == 0 {
        return Err(Error::Extinct { time: state.t });
    }
    let dt = state.rng.sample::<f64, _>(Exp1) / state.count as f64;
    state.t += dt;
    let (shift, restarted) = frame_event(state, menu, alpha);
    Ok(FrameStep { dt, shift, restarted })
}

/// Applies one event at the current time; returns the anchor shift and
/// whether the window was reseeded.
fn frame_event(state: &mut FrameState, menu: &MenuTable, alpha: f64) -> (i64, bool) {
    let before = state.displacement;
    let x = state.rng.next_u64();
    let k = ((x >> 32) * state.count as u64) >> 32;
    let u = (x as u32) as f64 * (1.0 / 4_294_967_296.0);
    let p = state.particles[k as usize] as usize;
    let w = state.width();
    let j = (p + w - state.start) % w;
    let (lo, hi) = menu.pick(alpha, u);
    let (mut a, mut b) = (j as isize + lo, j as isize + hi);
    let low = a.min(b);
    if low < 0 {
        state.shift_right((-low) as usize);
        a -= low;
        b -= low;
    }
    for s in [a, b] {
        if s as usize >= w {
            state.dropped += 1;
        } else {
            state.toggle(s as usize);
        }
    }
    let mut restarted = false;
    if !state.get(0) {
        match state.first_particle() {
            Some(q) => state.shift_left(q),
            None => {
                state.toggle(0);
                state.restarts += 1;
                restarted = true;
            }
        }
    }
    (state.displacement - before, restarted)
}

/// Edge statistics of one bin.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeBin {
    pub alpha_mean: f64,
    pub elapsed: f64,
    /// Net displacement of the tracked edge during the bin, already negated
    /// for the right edge.
    pub displacement: i64,
    pub restarts: u64,
    pub dropped: u64,
    pub events: u64,
}

impl Binned for EdgeBin {
    fn elapsed(&self) -> f64 {
        self.elapsed
    }

    fn alpha_mean(&self) -> f64 {
        self.alpha_mean
    }
}

/// Runs the frame process for `plan` (its `sites` is the window width; its
/// initial state is ignored) and bins the edge displacement by event time.
pub fn run_edge(plan: &SweepPlan, side: Side) -> Result<Vec<EdgeBin>> {
    plan.validate()?;
    let table = MenuTable::for_spec(&plan.spec)?;
    let menu = match side {
        Side::Left => table,
        Side::Right => table.reflect(),
    };
    let sign = match side {
        Side::Left => 1,
        Side::Right => -1,
    };
    let mut state = FrameState::new(plan.sites, rng_from_seed(plan.seed))?;
    let n = plan.bins;
    let width = plan.bin_width();
    let mut bins: Vec<EdgeBin> = (0..n)
        .map(|k| {
            let start = plan.bin_start(k);
            let end = if k + 1 == n { plan.total_time } else { start + width };
            EdgeBin {
                alpha_mean: plan.alpha_at(0.5 * (start + end)),
                elapsed: end - start,
                displacement: 0,
                restarts: 0,
                dropped: 0,
                events: 0,
            }
        })
        .collect();
    loop {
        let t_fire = state.t + state.rng.sample::<f64, _>(Exp1) / state.count as f64;
        if t_fire >= plan.total_time {
            break;
        }
        state.t = t_fire;
        let dropped_before = state.dropped;
        let (shift, restarted) = frame_event(&mut state, &menu, plan.alpha_at(t_fire));
        if state.t < plan.burn_in {
            continue;
        }
        let k = (((state.t - plan.burn_in) / width) as usize).min(n - 1);
        let bin = &mut bins[k];
        bin.displacement += sign * shift;
        bin.events += 1;
        bin.restarts += u64::from(restarted);
        bin.dropped += state.dropped - dropped_before;
    }
    Ok(bins)
}

/// Edge speed per bin, pooled over replicas with jackknife errors.
pub fn edge_speed(runs: &[Vec<EdgeBin>]) -> Result<Vec<CurvePoint>> {
    bin_curve(
        runs,
        |b| vec![b.displacement as f64, b.elapsed, b.events as f64],
        |_, t| Some((t[0] / t[1], t[2])),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Family, ModelSpec, Representation};

    fn table(f: Family, r: Representation, a: f64) -> MenuTable {
        MenuTable::for_spec(&ModelSpec::new(f, r, a).unwrap()).unwrap()
    }

    #[test]
    fn walker_hops_right_at_alpha_one() {
        let menu = table(Family::OneSided, Representation::Interface, 1.0);
        let mut s = FrameState::new(64, rng_from_seed(1)).unwrap();
        for n in 1..=50 {
            let st = frame_step(&mut s, &menu, 1.0).unwrap();
            assert_eq!(st.shift, 1);
            assert_eq!(s.displacement, n);
            assert_eq!(s.particle_count(), 1);
            assert!(s.get(0));
        }
    }

    #[test]
    fn anchor_never_moves_at_alpha_zero() {
        let menu = table(Family::OneSided, Representation::Interface, 0.0);
        let mut s = FrameState::new(128, rng_from_seed(2)).unwrap();
        for _ in 0..20_000 {
            let st = frame_step(&mut s, &menu, 0.0).unwrap();
            assert_eq!(st.shift, 0);
            assert!(s.anchor_holds());
        }
        assert!(s.dropped > 0);
        assert_eq!(s.restarts, 0);
    }

    #[test]
    fn anchor_invariant_under_mixed_moves() {
        let menu = table(Family::TwoSided, Representation::Interface, 0.45);
        let mut s = FrameState::new(64, rng_from_seed(3)).unwrap();
        for _ in 0..50_000 {
            frame_step(&mut s, &menu, 0.45).unwrap();
            assert!(s.get(0));
            assert_eq!(s.window().iter().filter(|&&b| b == 1).count(), s.particle_count());
        }
    }

    #[test]
    fn edge_bins_cover_the_run() {
        let spec = ModelSpec::new(Family::OneSided, Representation::Interface, 1.0).unwrap();
        let plan = SweepPlan::fixed(spec, 64, 200.0, 4, 9).with_burn_in(0.0);
        let bins = run_edge(&plan, Side::Left).unwrap();
        let total: f64 = bins.iter().map(|b| b.elapsed).sum();
        assert!((total - 200.0).abs() < 1e-9);
        let moves: i64 = bins.iter().map(|b| b.displacement).sum();
        let events: u64 = bins.iter().map(|b| b.events).sum();
        assert_eq!(moves, events as i64);
        let right = run_edge(&plan, Side::Right).unwrap();
        let moves: i64 = right.iter().map(|b| b.displacement).sum();
        let events: u64 = right.iter().map(|b| b.events).sum();
        assert_eq!(moves, events as i64);
    }
}
