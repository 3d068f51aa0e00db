//! Event-driven simulation on the ring.
//!
//! For the rebellious families every particle carries a rate-one clock and,
//! when it rings, toggles one pair from its [`MenuTable`]. The total rate is
//! therefore `|Y|` and the cost of an event does not depend on `N`. Families
//! without a uniform particle menu (and spin representations) fall back to a
//! scan over all anchors per event.
//!
//! A sweep moves `α` linearly from `alpha_b` to `alpha_e` over `[0, T]` and
//! integrates time-weighted observables over `n` equal bins covering
//! `[burn_in, T]`. Holding intervals that straddle a bin boundary are split.

use rand::{Rng, RngCore, SeedableRng};
use rand_distr::Exp1;
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::error::{Error, Result};
use crate::models::{all_transitions, transitions_into, Delta, FlipEvent, MenuTable, ModelSpec};
use crate::pattern::Pattern;
use crate::ring::{RingConfig, MIN_SITES};

pub type SimRng = Xoshiro256PlusPlus;

const NO_SLOT: u32 = u32::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replica `r` for a run seeded with `seed`.
///
/// `replica_seed(s, r) = splitmix64(s ^ splitmix64(r))`, where `splitmix64`
/// is the standard SplitMix64 output function.
pub fn replica_seed(seed: u64, replica: u64) -> u64 {
    splitmix64(seed ^ splitmix64(replica))
}

pub fn rng_from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InitialState {
    SingleParticle,
    /// `k` particles spread evenly over the ring.
    ParticleCount(usize),
    /// Independent fair coin per site.
    ProductHalf,
}

impl InitialState {
    pub fn build(&self, size: usize, rng: &mut SimRng) -> Result<RingConfig> {
        let mut y = RingConfig::zeros(size)?;
        match *self {
            InitialState::SingleParticle => y.set(0, true),
            InitialState::ParticleCount(k) => {
                if k == 0 || k > size {
                    return Err(Error::InvalidPlan(format!(
                        "cannot place {k} particles on {size} sites"
                    )));
                }
                for i in 0..k {
                    y.set(i * size / k, true);
                }
            }
            InitialState::ProductHalf => {
                for i in 0..size {
                    if rng.gen::<bool>() {
                        y.set(i, true);
                    }
                }
            }
        }
        Ok(y)
    }
}

/// Inputs of a sweep. The `alpha` field of `spec` is ignored.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepPlan {
    pub spec: ModelSpec,
    pub sites: usize,
    pub total_time: f64,
    pub bins: usize,
    pub alpha_b: f64,
    pub alpha_e: f64,
    pub seed: u64,
    pub initial: InitialState,
    pub burn_in: f64,
    pub max_k: usize,
    pub patterns: Vec<Pattern>,
}

pub const DEFAULT_MAX_K: usize = 21;

impl SweepPlan {
    /// A plan with the default burn-in (1% of `total_time`), `max_k = 21`,
    /// a single initial particle and no patterns.
    pub fn new(
        spec: ModelSpec,
        sites: usize,
        total_time: f64,
        bins: usize,
        alpha_b: f64,
        alpha_e: f64,
        seed: u64,
    ) -> Self {
        Self {
            spec,
            sites,
            total_time,
            bins,
            alpha_b,
            alpha_e,
            seed,
            initial: InitialState::SingleParticle,
            burn_in: 0.01 * total_time,
            max_k: DEFAULT_MAX_K,
            patterns: Vec::new(),
        }
    }

    /// Fixed-α plan.
    pub fn fixed(spec: ModelSpec, sites: usize, total_time: f64, bins: usize, seed: u64) -> Self {
        let a = spec.alpha();
        Self::new(spec, sites, total_time, bins, a, a, seed)
    }

    pub fn with_burn_in(mut self, burn_in: f64) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_initial(mut self, initial: InitialState) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_max_k(mut self, max_k: usize) -> Self {
        self.max_k = max_k;
        self
    }

    pub fn with_patterns(mut self, patterns: Vec<Pattern>) -> Self {
        self.patterns = patterns;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidPlan(m));
        if self.sites < MIN_SITES {
            return bad(format!("N = {} is below the minimum of {MIN_SITES}", self.sites));
        }
        if self.sites > u32::MAX as usize / 2 {
            return bad(format!("N = {} is too large", self.sites));
        }
        if !(self.total_time.is_finite() && self.total_time > 0.0) {
            return bad(format!("T must be positive, got {}", self.total_time));
        }
        if self.bins == 0 {
            return bad("n must be at least 1".into());
        }
        for a in [self.alpha_b, self.alpha_e] {
            if !(0.0..=1.0).contains(&a) {
                return bad(format!("sweep endpoint {a} outside [0, 1]"));
            }
        }
        if !(self.burn_in >= 0.0 && self.burn_in < self.total_time) {
            return bad(format!(
                "burn-in {} must lie in [0, T) with T = {}",
                self.burn_in, self.total_time
            ));
        }
        if self.max_k.is_multiple_of(2) {
            return bad(format!("max_k must be odd, got {}", self.max_k));
        }
        if let InitialState::ParticleCount(k) = self.initial {
            if self.spec.is_parity_preserving() && k % 2 == 0 {
                return bad(format!("particle runs need an odd initial count, got {k}"));
            }
            if k == 0 || k > self.sites {
                return bad(format!("cannot place {k} particles on {} sites", self.sites));
            }
        }
        if let Some(p) = self.patterns.iter().find(|p| p.len() > self.sites) {
            return bad(format!("pattern {p} is longer than the ring"));
        }
        Ok(())
    }

    /// `α(t) = α_b + (α_e − α_b)·t/T`.
    #[inline]
    pub fn alpha_at(&self, t: f64) -> f64 {
        if self.alpha_b == self.alpha_e {
            return self.alpha_b;
        }
        let a = self.alpha_b + (self.alpha_e - self.alpha_b) * (t / self.total_time);
        a.clamp(0.0, 1.0)
    }

    pub fn bin_width(&self) -> f64 {
        (self.total_time - self.burn_in) / self.bins as f64
    }

    /// Start time of bin `k`.
    pub fn bin_start(&self, k: usize) -> f64 {
        self.burn_in + self.bin_width() * k as f64
    }
}

/// Time-weighted accumulators for one bin.
#[derive(Clone, Debug, PartialEq)]
pub struct BinStats {
    pub alpha_mean: f64,
    pub elapsed: f64,
    /// `∫ |Y_t| dt`.
    pub weighted_ones: f64,
    /// `time_at_k[k] = ∫ 1{|Y_t| = k} dt` for `k ≤ max_k`.
    pub time_at_k: Vec<f64>,
    /// Per pattern, `∫ (fraction of translates with odd overlap) dt`.
    pub pattern_odd_time: Vec<f64>,
    /// `∫ |Y_t|/N dt`, the normalizer for the pattern channels.
    pub ones_fraction_time: f64,
    pub events: u64,
}

impl BinStats {
    pub fn empty(max_k: usize, patterns: usize) -> Self {
        Self {
            alpha_mean: 0.0,
            elapsed: 0.0,
            weighted_ones: 0.0,
            time_at_k: vec![0.0; max_k + 1],
            pattern_odd_time: vec![0.0; patterns],
            ones_fraction_time: 0.0,
            events: 0,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.elapsed <= 0.0
    }

    pub fn max_k(&self) -> usize {
        self.time_at_k.len() - 1
    }
}

/// Membership index over the ones of a configuration: O(1) toggle, O(1)
/// uniform choice.
#[derive(Clone, Debug)]
pub struct SimState {
    y: RingConfig,
    slots: Vec<u32>,
    // dense list of occupied sites; only the first `count` entries are live
    particles: Vec<u32>,
    count: usize,
    pub t: f64,
    pub rng: SimRng,
}

impl SimState {
    pub fn new(y: RingConfig, rng: SimRng) -> Self {
        let mut slots = vec![NO_SLOT; y.size()];
        let mut particles = vec![0u32; y.size()];
        let mut count = 0;
        for j in y.particles() {
            slots[j] = count as u32;
            particles[count] = j as u32;
            count += 1;
        }
        Self {
            y,
            slots,
            particles,
            count,
            t: 0.0,
            rng,
        }
    }

    #[inline]
    pub fn config(&self) -> &RingConfig {
        &self.y
    }

    #[inline]
    pub fn particle_count(&self) -> usize {
        self.count
    }

    #[inline]
    pub fn sites(&self) -> usize {
        self.slots.len()
    }

    /// Flips `site`; returns true if a particle was created.
    #[inline(always)]
    pub fn toggle(&mut self, site: usize) -> bool {
        let slot = self.slots[site];
        if slot == NO_SLOT {
            self.slots[site] = self.count as u32;
            self.particles[self.count] = site as u32;
            self.count += 1;
        } else {
            self.count -= 1;
            let last = self.particles[self.count];
            self.particles[slot as usize] = last;
            self.slots[last as usize] = slot;
            self.slots[site] = NO_SLOT;
        }
        self.y.flip_in_range(site)
    }

    /// Position of a uniformly chosen particle.
    #[inline]
    pub fn random_particle(&mut self) -> usize {
        let x = self.rng.next_u32();
        let k = bounded(x, self.count as u32, &mut self.rng);
        self.particles[k as usize] as usize
    }

    /// A uniform particle together with an independent uniform variate in
    /// `[0, 1)` of 32-bit resolution, both taken from one 64-bit draw.
    #[inline]
    fn random_particle_and_unit(&mut self) -> (usize, f64) {
        let x = self.rng.next_u64();
        let k = bounded((x >> 32) as u32, self.count as u32, &mut self.rng);
        let u = (x as u32) as f64 * (1.0 / 4_294_967_296.0);
        (self.particles[k as usize] as usize, u)
    }

    pub fn index_is_consistent(&self) -> bool {
        self.count == self.y.ones()
            && self.particles[..self.count]
                .iter()
                .enumerate()
                .all(|(k, &p)| self.slots[p as usize] == k as u32 && self.y.get(p as usize))
            && self
                .slots
                .iter()
                .enumerate()
                .all(|(s, &k)| (k == NO_SLOT) != self.y.get(s))
    }
}

/// `(j + off) mod n` for a small offset, `|off| < n`.
#[inline]
fn wrap_near(j: usize, off: isize, n: usize) -> usize {
    let p = j as isize + off;
    if p < 0 {
        (p + n as isize) as usize
    } else if p as usize >= n {
        p as usize - n
    } else {
        p as usize
    }
}

/// Uniform integer in `0..n` from a 32-bit word (Lemire's multiply-shift
/// with rejection, so the result is exactly uniform).
#[inline]
fn bounded(mut x: u32, n: u32, rng: &mut SimRng) -> u32 {
    debug_assert!(n > 0);
    let mut m = u64::from(x) * u64::from(n);
    let mut low = m as u32;
    if low < n {
        let threshold = n.wrapping_neg() % n;
        while low < threshold {
            x = rng.next_u32();
            m = u64::from(x) * u64::from(n);
            low = m as u32;
        }
    }
    (m >> 32) as u32
}

/// How events are generated for a model.
#[derive(Clone, Debug)]
pub enum Kernel {
    Menu { spec: ModelSpec, menu: MenuTable },
    Scan { spec: ModelSpec, buffer: Vec<FlipEvent> },
}

impl Kernel {
    pub fn for_spec(spec: &ModelSpec) -> Self {
        match MenuTable::for_spec(spec) {
            Ok(menu) => Kernel::Menu { spec: *spec, menu },
            Err(_) => Kernel::Scan {
                spec: *spec,
                buffer: Vec::new(),
            },
        }
    }

    pub fn spec(&self) -> &ModelSpec {
        match self {
            Kernel::Menu { spec, .. } | Kernel::Scan { spec, .. } => spec,
        }
    }

    /// Total event rate in the current state at parameter `alpha`. For the
    /// scan kernel this also caches the transition list used by [`Self::fire`].
    #[inline]
    fn prepare(&mut self, state: &SimState, alpha: f64) -> f64 {
        match self {
            Kernel::Menu { .. } => state.particle_count() as f64,
            Kernel::Scan { spec, buffer } => {
                let s = spec.with_alpha(alpha).expect("alpha clamped to [0, 1]");
                buffer.clear();
                for i in 0..state.sites() {
                    transitions_into(&s, &state.y, i, buffer);
                }
                buffer.iter().map(|e| e.rate).sum()
            }
        }
    }

    /// Chooses and applies one transition. `alpha` is only consulted by the
    /// menu kernel; the scan kernel uses the list built by `prepare`.
    #[inline]
    fn fire<F: FnMut(usize)>(&mut self, state: &mut SimState, alpha: f64, total: f64, mut on_toggle: F) -> FlipEvent {
        match self {
            Kernel::Menu { menu, .. } => {
                let (j, u) = state.random_particle_and_unit();
                let (lo, hi) = menu.pick(alpha, u);
                let n = state.sites();
                let a = wrap_near(j, lo, n);
                let b = wrap_near(j, hi, n);
                state.toggle(a);
                state.toggle(b);
                on_toggle(a);
                on_toggle(b);
                FlipEvent {
                    sites: Delta::pair(a, b),
                    rate: 1.0,
                }
            }
            Kernel::Scan { buffer, .. } => {
                let target = state.rng.gen::<f64>() * total;
                let mut acc = 0.0;
                let mut chosen = *buffer.last().expect("positive total rate");
                for e in buffer.iter() {
                    acc += e.rate;
                    if target < acc {
                        chosen = *e;
                        break;
                    }
                }
                for s in chosen.sites.sites() {
                    state.toggle(s);
                    on_toggle(s);
                }
                chosen
            }
        }
    }
}

/// Outcome of one event.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Step {
    pub dt: f64,
    pub applied: Option<FlipEvent>,
}

/// Advances `state` by one event at fixed `alpha`.
pub fn step(state: &mut SimState, kernel: &mut Kernel, alpha: f64) -> Result<Step> {
    let total = kernel.prepare(state, alpha);
    if total <= 0.0 {
        return Err(Error::Extinct { time: state.t });
    }
    let dt = state.rng.sample::<f64, _>(Exp1) / total;
    state.t += dt;
    let e = kernel.fire(state, alpha, total, |_| {});
    Ok(Step {
        dt,
        applied: Some(e),
    })
}

/// Parities of all translates of one pattern, updated per toggled site.
#[derive(Clone, Debug)]
struct PatternTracker {
    offsets: Vec<usize>,
    parity: Vec<u8>,
    odd: u64,
}

impl PatternTracker {
    fn new(p: &Pattern, y: &RingConfig) -> Self {
        let n = y.size();
        let offsets = p.offsets();
        let parity: Vec<u8> = (0..n)
            .map(|i| (offsets.iter().filter(|&&o| y.get((i + o) % n)).count() % 2) as u8)
            .collect();
        let odd = parity.iter().map(|&b| u64::from(b)).sum();
        Self {
            offsets,
            parity,
            odd,
        }
    }

    #[inline]
    fn on_toggle(&mut self, site: usize) {
        let n = self.parity.len();
        for &o in &self.offsets {
            let i = (site + n - o % n) % n;
            let b = &mut self.parity[i];
            *b ^= 1;
            if *b == 1 {
                self.odd += 1;
            } else {
                self.odd -= 1;
            }
        }
    }
}

/// Splits holding intervals over the bins of a plan.
struct BinAccumulator {
    bins: Vec<BinStats>,
    burn_in: f64,
    width: f64,
    end: f64,
    sites: f64,
    max_k: usize,
    cur: usize,
    cur_start: f64,
    cur_end: f64,
    // pattern integrals are kept as ∫ (odd translate count) dt until the bin closes
    raw_patterns: Vec<Vec<f64>>,
}

impl BinAccumulator {
    fn new(plan: &SweepPlan) -> Self {
        let width = plan.bin_width();
        let n = plan.bins;
        Self {
            bins: vec![BinStats::empty(plan.max_k, plan.patterns.len()); n],
            burn_in: plan.burn_in,
            width,
            end: plan.total_time,
            sites: plan.sites as f64,
            max_k: plan.max_k,
            cur: 0,
            cur_start: plan.burn_in,
            cur_end: if n == 1 { plan.total_time } else { plan.burn_in + width },
            raw_patterns: vec![vec![0.0; plan.patterns.len()]; n],
        }
    }

    fn bin_end(&self, k: usize) -> f64 {
        if k + 1 == self.bins.len() {
            self.end
        } else {
            self.burn_in + self.width * (k + 1) as f64
        }
    }

    #[inline]
    fn locate(&mut self, t: f64) {
        if t < self.cur_end && t >= self.cur_start {
            return;
        }
        self.relocate(t);
    }

    #[cold]
    fn relocate(&mut self, t: f64) {
        let k = (((t - self.burn_in) / self.width).floor().max(0.0) as usize).min(self.bins.len() - 1);
        // floating-point floor can land one bin off near a boundary
        let mut k = k;
        while k > 0 && t < self.bin_end(k - 1) {
            k -= 1;
        }
        while k + 1 < self.bins.len() && t >= self.bin_end(k) {
            k += 1;
        }
        self.cur = k;
        self.cur_start = if k == 0 { self.burn_in } else { self.bin_end(k - 1) };
        self.cur_end = self.bin_end(k);
    }

    /// Adds the state held over `[a, b)`.
    #[inline]
    fn add(&mut self, a: f64, b: f64, ones: usize, odd: &[PatternTracker]) {
        if a >= self.cur_start && b < self.cur_end {
            let seg = b - a;
            let bin = &mut self.bins[self.cur];
            bin.elapsed += seg;
            bin.weighted_ones += ones as f64 * seg;
            if ones <= self.max_k {
                bin.time_at_k[ones] += seg;
            }
            if !odd.is_empty() {
                for (r, p) in self.raw_patterns[self.cur].iter_mut().zip(odd) {
                    *r += p.odd as f64 * seg;
                }
            }
            return;
        }
        self.add_split(a, b, ones, odd);
    }

    #[cold]
    fn add_split(&mut self, mut a: f64, b: f64, ones: usize, odd: &[PatternTracker]) {
        if b <= self.burn_in {
            return;
        }
        if a < self.burn_in {
            a = self.burn_in;
        }
        while a < b {
            self.locate(a);
            let seg_end = b.min(self.cur_end);
            let seg = seg_end - a;
            let bin = &mut self.bins[self.cur];
            bin.elapsed += seg;
            bin.weighted_ones += ones as f64 * seg;
            if ones <= self.max_k {
                bin.time_at_k[ones] += seg;
            }
            let raw = &mut self.raw_patterns[self.cur];
            for (r, p) in raw.iter_mut().zip(odd) {
                *r += p.odd as f64 * seg;
            }
            if seg_end >= self.end {
                break;
            }
            a = seg_end;
        }
    }

    #[inline]
    fn count_event(&mut self, t: f64) {
        if t >= self.cur_start && t < self.cur_end {
            self.bins[self.cur].events += 1;
            return;
        }
        if t < self.burn_in || t >= self.end {
            return;
        }
        self.locate(t);
        self.bins[self.cur].events += 1;
    }

    fn finish(mut self, plan: &SweepPlan) -> Vec<BinStats> {
        for (k, bin) in self.bins.iter_mut().enumerate() {
            let start = plan.bin_start(k);
            if bin.elapsed > 0.0 {
                bin.alpha_mean = plan.alpha_at(start + 0.5 * bin.elapsed);
                bin.ones_fraction_time = bin.weighted_ones / self.sites;
                for (dst, raw) in bin.pattern_odd_time.iter_mut().zip(&self.raw_patterns[k]) {
                    *dst = raw / self.sites;
                }
            } else {
                bin.alpha_mean = plan.alpha_at(start + 0.5 * self.width);
            }
        }
        self.bins
    }
}

/// Runs one trajectory of `plan` and returns its `n` bins.
///
/// If every particle disappears (possible only from even-parity or spin
/// initial states) the run stops and the remaining bins stay empty.
pub fn run_sweep(plan: &SweepPlan) -> Result<Vec<BinStats>> {
    run_sweep_with(plan, true)
}

fn run_sweep_with(plan: &SweepPlan, allow_fast: bool) -> Result<Vec<BinStats>> {
    plan.validate()?;
    let mut rng = rng_from_seed(plan.seed);
    let y = plan.initial.build(plan.sites, &mut rng)?;
    let mut kernel = Kernel::for_spec(&plan.spec);
    let menu_path = matches!(kernel, Kernel::Menu { .. });
    let mut patterns: Vec<PatternTracker> = plan.patterns.iter().map(|p| PatternTracker::new(p, &y)).collect();
    let mut state = SimState::new(y, rng);
    let mut acc = BinAccumulator::new(plan);
    let parity_locked = plan.spec.is_parity_preserving();
    let parity0 = state.config().parity();
    let end = plan.total_time;
    let mut events: u64 = 0;

    if let Kernel::Menu { menu, .. } = &kernel {
        if allow_fast && patterns.is_empty() {
            run_menu_loop(plan, menu, &mut state, &mut acc);
            return Ok(acc.finish(plan));
        }
    }

    while state.t < end {
        let t = state.t;
        let total = kernel.prepare(&state, plan.alpha_at(t));
        if total <= 0.0 {
            break;
        }
        let dt = state.rng.sample::<f64, _>(Exp1) / total;
        let t_next = t + dt;
        acc.add(t, t_next.min(end), state.particle_count(), &patterns);
        if t_next >= end {
            state.t = end;
            break;
        }
        // the menu kernel's total rate is α-free, so α can be read at the firing time
        let alpha_fire = if menu_path { plan.alpha_at(t_next) } else { plan.alpha_at(t) };
        kernel.fire(&mut state, alpha_fire, total, |s| {
            for p in patterns.iter_mut() {
                p.on_toggle(s);
            }
        });
        state.t = t_next;
        acc.count_event(t_next);
        events += 1;
        debug_assert!(!parity_locked || state.config().parity() == parity0, "parity changed");
        if cfg!(debug_assertions) && events.is_multiple_of(1 << 20) {
            debug_check(&kernel, &state, plan.alpha_at(t_next));
        }
    }
    Ok(acc.finish(plan))
}

/// Event loop for menu kernels without pattern tracking. Draws and applies
/// events exactly as the general loop does, so both paths yield the same
/// trajectory for a given seed.
fn run_menu_loop(plan: &SweepPlan, menu: &MenuTable, state: &mut SimState, acc: &mut BinAccumulator) {
    let end = plan.total_time;
    let n = state.sites();
    while state.t < end {
        let t = state.t;
        let count = state.particle_count();
        if count == 0 {
            break;
        }
        let dt = state.rng.sample::<f64, _>(Exp1) / count as f64;
        let t_next = t + dt;
        acc.add(t, t_next.min(end), count, &[]);
        if t_next >= end {
            state.t = end;
            break;
        }
        let (j, u) = state.random_particle_and_unit();
        let (lo, hi) = menu.pick(plan.alpha_at(t_next), u);
        state.toggle(wrap_near(j, lo, n));
        state.toggle(wrap_near(j, hi, n));
        state.t = t_next;
        acc.count_event(t_next);
        debug_assert!(state.particle_count() % 2 == count % 2, "parity changed");
    }
    debug_assert!(state.index_is_consistent(), "particle index out of sync");
}

fn debug_check(kernel: &Kernel, state: &SimState, alpha: f64) {
    assert!(state.index_is_consistent(), "particle index out of sync");
    if let Kernel::Menu { spec, .. } = kernel {
        let s = spec.with_alpha(alpha).expect("valid alpha");
        let scan: f64 = all_transitions(&s, state.config()).iter().map(|e| e.rate).sum();
        let menu = state.particle_count() as f64;
        assert!((scan - menu).abs() <= 1e-9 * menu.max(1.0), "menu rate {menu} != scan rate {scan}");
    }
}

/// Space-time picture: row `r` is the configuration on a window of `width`
/// sites at time `r·sample_dt`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bitmap {
    pub width: usize,
    pub rows: Vec<Vec<u8>>,
}

impl Bitmap {
    pub fn height(&self) -> usize {
        self.rows.len()
    }

    /// Binary PGM (P5): one byte per pixel, 0 where a particle sits and 255
    /// elsewhere.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.width, self.height()).into_bytes();
        for row in &self.rows {
            out.extend(row.iter().map(|&b| if b == 1 { 0u8 } else { 255u8 }));
        }
        out
    }
}

/// Renders a trajectory of `plan` over `[0, duration]`. The window is
/// centred on site 0, where a single initial particle starts. α follows the
/// plan's endpoints linearly over `duration`.
pub fn render_spacetime(plan: &SweepPlan, width: usize, duration: f64, sample_dt: f64) -> Result<Bitmap> {
    if width == 0 || width > plan.sites {
        return Err(Error::InvalidPlan(format!(
            "window width {width} must lie in 1..={}",
            plan.sites
        )));
    }
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::InvalidPlan(format!("duration must be nonnegative, got {duration}")));
    }
    if !(sample_dt > 0.0) {
        return Err(Error::InvalidPlan(format!("sample_dt must be positive, got {sample_dt}")));
    }
    let mut schedule = plan.clone();
    schedule.total_time = duration.max(f64::MIN_POSITIVE);
    schedule.burn_in = 0.0;
    let mut rng = rng_from_seed(plan.seed);
    let y = plan.initial.build(plan.sites, &mut rng)?;
    let mut kernel = Kernel::for_spec(&plan.spec);
    let menu_path = matches!(kernel, Kernel::Menu { .. });
    let mut state = SimState::new(y, rng);

    let n = plan.sites as isize;
    let left = -(width as isize / 2);
    let snapshot = |y: &RingConfig| -> Vec<u8> {
        (0..width as isize)
            .map(|c| y.bits()[(left + c).rem_euclid(n) as usize])
            .collect()
    };
    let rows_wanted = (duration / sample_dt + 1e-9).floor() as usize + 1;
    let mut rows = Vec::with_capacity(rows_wanted);
    let sample_time = |r: usize| r as f64 * sample_dt;

    loop {
        let t = state.t;
        let total = kernel.prepare(&state, schedule.alpha_at(t));
        let t_next = if total > 0.0 {
            t + state.rng.sample::<f64, _>(Exp1) / total
        } else {
            f64::INFINITY
        };
        while rows.len() < rows_wanted && sample_time(rows.len()) < t_next {
            rows.push(snapshot(state.config()));
        }
        if rows.len() == rows_wanted || total <= 0.0 {
            break;
        }
        let alpha_fire = if menu_path { schedule.alpha_at(t_next) } else { schedule.alpha_at(t) };
        kernel.fire(&mut state, alpha_fire, total, |_| {});
        state.t = t_next;
    }
    while rows.len() < rows_wanted {
        rows.push(snapshot(state.config()));
    }
    Ok(Bitmap { width, rows })
}
