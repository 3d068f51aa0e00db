//! Exhaustive generators on small rings, stationary laws, and exact checks
//! of duality and of the spin-to-interface correspondence.
//!
//! States are stored as bit masks, site `i` being bit `i`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::models::{aggregate, all_transitions, interface_of, Delta, ModelSpec, Representation};
use crate::pattern::Pattern;
use crate::ring::{low_mask, RingConfig, MIN_SITES};

/// Largest ring accepted by [`build_generator`].
pub const MAX_SITES: usize = 22;
/// Largest ring accepted by the pairwise checks.
pub const MAX_CHECK_SITES: usize = 12;
/// Classes up to this many states are solved by dense LU; larger ones by
/// Gauss–Seidel sweeps.
pub const DENSE_LIMIT: usize = 1024;
/// Residual `‖πQ‖∞` below which a stationary law is accepted.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sector {
    Odd,
    Even,
    Full,
}

impl Sector {
    pub fn contains(self, mask: u64) -> bool {
        match self {
            Sector::Odd => mask.count_ones() % 2 == 1,
            Sector::Even => mask.count_ones().is_multiple_of(2),
            Sector::Full => true,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Sector::Odd => "odd",
            Sector::Even => "even",
            Sector::Full => "full",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "odd" => Ok(Sector::Odd),
            "even" => Ok(Sector::Even),
            "full" => Ok(Sector::Full),
            _ => Err(Error::InvalidInput(format!("unknown sector {s:?} (odd, even or full)"))),
        }
    }
}

fn delta_mask(d: &Delta) -> u64 {
    d.sites().fold(0u64, |m, s| m | (1u64 << s))
}

/// Outgoing transitions of `mask` as `(target mask, rate)`, with transitions
/// that flip the same sites merged.
fn moves(spec: &ModelSpec, mask: u64, sites: usize) -> Vec<(u64, f64)> {
    let y = RingConfig::from_mask(mask, sites).expect("size checked by caller");
    aggregate(all_transitions(spec, &y))
        .into_iter()
        .map(|(d, r)| (mask ^ delta_mask(&d), r))
        .collect()
}

fn check_size(sites: usize, limit: usize) -> Result<()> {
    if sites < MIN_SITES {
        return Err(Error::RingTooSmall(sites));
    }
    if sites > limit {
        return Err(Error::SizeGuard { size: sites, limit });
    }
    Ok(())
}

/// The generator of `spec` restricted to one parity sector of the ring,
/// stored row by row as off-diagonal rates. The diagonal is minus the exit
/// rate.
#[derive(Clone, Debug)]
pub struct ExactSystem {
    spec: ModelSpec,
    sites: usize,
    sector: Sector,
    states: Vec<u64>,
    index: Vec<u32>,
    offsets: Vec<usize>,
    targets: Vec<u32>,
    rates: Vec<f64>,
    exit: Vec<f64>,
}

const NOT_IN_SECTOR: u32 = u32::MAX;

/// Enumerates the sector and assembles its generator.
pub fn build_generator(spec: &ModelSpec, sites: usize, sector: Sector) -> Result<ExactSystem> {
    check_size(sites, MAX_SITES)?;
    let states: Vec<u64> = (0..1u64 << sites).filter(|&m| sector.contains(m)).collect();
    let mut index = vec![NOT_IN_SECTOR; 1 << sites];
    for (k, &m) in states.iter().enumerate() {
        index[m as usize] = k as u32;
    }
    let mut offsets = Vec::with_capacity(states.len() + 1);
    let mut targets = Vec::new();
    let mut rates = Vec::new();
    let mut exit = Vec::with_capacity(states.len());
    offsets.push(0);
    for &m in &states {
        let mut out = 0.0;
        for (target, rate) in moves(spec, m, sites) {
            let k = index[target as usize];
            if k == NOT_IN_SECTOR {
                return Err(Error::InvalidModel(format!(
                    "{spec} leaves the {sector} sector (e.g. from {})",
                    RingConfig::from_mask(m, sites).expect("valid size")
                )));
            }
            targets.push(k);
            rates.push(rate);
            out += rate;
        }
        exit.push(out);
        offsets.push(targets.len());
    }
    Ok(ExactSystem {
        spec: *spec,
        sites,
        sector,
        states,
        index,
        offsets,
        targets,
        rates,
        exit,
    })
}

impl ExactSystem {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn mask(&self, k: usize) -> u64 {
        self.states[k]
    }

    pub fn state(&self, k: usize) -> RingConfig {
        RingConfig::from_mask(self.states[k], self.sites).expect("valid size")
    }

    pub fn index_of(&self, y: &RingConfig) -> Option<usize> {
        if y.size() != self.sites {
            return None;
        }
        let k = *self.index.get(y.to_mask() as usize)?;
        (k != NOT_IN_SECTOR).then_some(k as usize)
    }

    /// Total rate out of state `k`.
    pub fn exit_rate(&self, k: usize) -> f64 {
        self.exit[k]
    }

    /// Off-diagonal entries of row `k` as `(target index, rate)`.
    pub fn row(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[k]..self.offsets[k + 1];
        self.targets[range.clone()]
            .iter()
            .zip(&self.rates[range])
            .map(|(&t, &r)| (t as usize, r))
    }

    /// Rate `Q(from, to)` for `from ≠ to`.
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.row(from).filter(|&(t, _)| t == to).map(|(_, r)| r).sum()
    }

    /// Largest absolute row sum of `Q` including the diagonal.
    pub fn row_sum_residual(&self) -> f64 {
        (0..self.len())
            .map(|k| (self.row(k).map(|(_, r)| r).sum::<f64>() - self.exit[k]).abs())
            .fold(0.0, f64::max)
    }

    /// True when no transition changes the particle count's parity.
    pub fn preserves_parity(&self) -> bool {
        (0..self.len()).all(|k| {
            let p = self.states[k].count_ones() % 2;
            self.row(k).all(|(t, _)| self.states[t].count_ones() % 2 == p)
        })
    }

    /// `‖πQ‖∞` for a vector indexed like the sector states.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        assert_eq!(pi.len(), self.len(), "vector does not match the state space");
        let mut flow: Vec<f64> = pi.iter().zip(&self.exit).map(|(p, e)| -p * e).collect();
        for (k, &p) in pi.iter().enumerate() {
            if p != 0.0 {
                for (t, r) in self.row(k) {
                    flow[t] += p * r;
                }
            }
        }
        flow.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Communicating classes that no transition leaves, each sorted by state
    /// index; classes are ordered by their smallest index.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.len(), self.targets.len());
        let nodes: Vec<_> = (0..self.len()).map(|_| g.add_node(())).collect();
        for k in 0..self.len() {
            for (t, r) in self.row(k) {
                if r > 0.0 {
                    g.add_edge(nodes[k], nodes[t], ());
                }
            }
        }
        let sccs = tarjan_scc(&g);
        let mut class_of = vec![0usize; self.len()];
        for (c, scc) in sccs.iter().enumerate() {
            for n in scc {
                class_of[n.index()] = c;
            }
        }
        let mut closed: Vec<Vec<usize>> = sccs
            .iter()
            .enumerate()
            .filter(|(c, scc)| {
                scc.iter().all(|n| {
                    self.row(n.index())
                        .all(|(t, r)| r <= 0.0 || class_of[t] == *c)
                })
            })
            .map(|(_, scc)| {
                let mut v: Vec<usize> = scc.iter().map(|n| n.index()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        closed.sort_unstable_by_key(|v| v[0]);
        closed
    }
}

/// A stationary distribution over the sector states of an [`ExactSystem`].
#[derive(Clone, Debug, PartialEq)]
pub struct StationaryLaw {
    pub sites: usize,
    pub states: Vec<u64>,
    pub pi: Vec<f64>,
    /// `‖πQ‖∞` of the returned vector.
    pub residual: f64,
}

impl StationaryLaw {
    pub fn probability(&self, y: &RingConfig) -> f64 {
        let m = y.to_mask();
        self.states
            .binary_search(&m)
            .map_or(0.0, |k| self.pi[k])
    }

    pub fn expect<F: Fn(u64) -> f64>(&self, f: F) -> f64 {
        self.states.iter().zip(&self.pi).map(|(&m, &p)| p * f(m)).sum()
    }
}

/// Solves `πQ = 0`, `Σπ = 1`. The sector must have a single closed class;
/// states outside it are transient and get probability zero.
pub fn stationary(system: &ExactSystem) -> Result<StationaryLaw> {
    let classes = system.closed_classes();
    if classes.len() != 1 {
        return Err(Error::Reducible {
            classes: classes
                .iter()
                .map(|c| c.iter().take(4).map(|&k| system.state(k).to_string()).collect())
                .collect(),
        });
    }
    stationary_on(system, &classes[0])
}

/// Stationary law supported on a given closed class.
pub fn stationary_on(system: &ExactSystem, class: &[usize]) -> Result<StationaryLaw> {
    if class.is_empty() {
        return Err(Error::InvalidInput("empty class".into()));
    }
    let mut local = vec![usize::MAX; system.len()];
    for (j, &k) in class.iter().enumerate() {
        if k >= system.len() || local[k] != usize::MAX {
            return Err(Error::InvalidInput(format!("bad or repeated state index {k}")));
        }
        local[k] = j;
    }
    for &k in class {
        if system.row(k).any(|(t, r)| r > 0.0 && local[t] == usize::MAX) {
            return Err(Error::InvalidInput(format!(
                "class is not closed: {} has a transition leaving it",
                system.state(k)
            )));
        }
    }
    let sub = if class.len() <= DENSE_LIMIT {
        solve_dense(system, class, &local)?
    } else {
        solve_gauss_seidel(system, class, &local)?
    };
    let mut pi = vec![0.0; system.len()];
    for (j, &k) in class.iter().enumerate() {
        pi[k] = sub[j];
    }
    let residual = system.residual(&pi);
    if residual > SOLVE_TOLERANCE {
        return Err(Error::NoConvergence {
            residual,
            iterations: 0,
        });
    }
    Ok(StationaryLaw {
        sites: system.sites,
        states: system.states.clone(),
        pi,
        residual,
    })
}

fn solve_dense(system: &ExactSystem, class: &[usize], local: &[usize]) -> Result<Vec<f64>> {
    let m = class.len();
    // rows of the transposed generator, the last one replaced by normalization
    let mut a = DMatrix::<f64>::zeros(m, m);
    for (j, &k) in class.iter().enumerate() {
        a[(j, j)] -= system.exit[k];
        for (t, r) in system.row(k) {
            a[(local[t], j)] += r;
        }
    }
    for j in 0..m {
        a[(m - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(m);
    b[m - 1] = 1.0;
    let x = a
        .lu()
        .solve(&b)
        .ok_or_else(|| Error::Singular(format!("{m}-state class of {}", system.spec)))?;
    Ok(x.iter().copied().collect())
}

fn solve_gauss_seidel(system: &ExactSystem, class: &[usize], local: &[usize]) -> Result<Vec<f64>> {
    const MAX_SWEEPS: usize = 200_000;
    let m = class.len();
    // incoming edges per local state
    let mut incoming: Vec<Vec<(usize, f64)>> = vec![Vec::new(); m];
    for (j, &k) in class.iter().enumerate() {
        for (t, r) in system.row(k) {
            incoming[local[t]].push((j, r));
        }
    }
    let exit: Vec<f64> = class.iter().map(|&k| system.exit[k]).collect();
    let mut pi = vec![1.0 / m as f64; m];
    let mut residual = f64::INFINITY;
    for sweep in 1..=MAX_SWEEPS {
        for j in 0..m {
            if exit[j] > 0.0 {
                pi[j] = incoming[j].iter().map(|&(i, r)| pi[i] * r).sum::<f64>() / exit[j];
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= total);
        if sweep % 16 == 0 {
            residual = (0..m)
                .map(|j| (incoming[j].iter().map(|&(i, r)| pi[i] * r).sum::<f64>() - pi[j] * exit[j]).abs())
                .fold(0.0, f64::max);
            if residual <= 0.01 * SOLVE_TOLERANCE {
                return Ok(pi);
            }
        }
    }
    Err(Error::NoConvergence {
        residual,
        iterations: MAX_SWEEPS,
    })
}

/// Exact stationary expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactObservables {
    /// `E|Y|`.
    pub mean_ones: f64,
    /// `P[|Y| = k]` for `k = 0..=N`.
    pub count_law: Vec<f64>,
    /// Translate-averaged `f_{x,N} = P[|xY| odd] / P[Y(0)=1]` per requested
    /// pattern, in request order.
    pub harmonic: Vec<(Pattern, f64)>,
}

pub fn exact_observables(law: &StationaryLaw, patterns: &[Pattern]) -> Result<ExactObservables> {
    let n = law.sites;
    let mut count_law = vec![0.0; n + 1];
    for (&m, &p) in law.states.iter().zip(&law.pi) {
        count_law[m.count_ones() as usize] += p;
    }
    let mean_ones = law.expect(|m| f64::from(m.count_ones()));
    let full = low_mask(n);
    let mut harmonic = Vec::with_capacity(patterns.len());
    for x in patterns {
        if x.len() > n {
            return Err(Error::InvalidPattern(format!("{x} is longer than the ring ({n} sites)")));
        }
        let base = x.offsets().iter().fold(0u64, |m, &o| m | (1u64 << o));
        let translates: Vec<u64> = (0..n).map(|s| ((base << s) | (base >> (n - s))) & full).collect();
        let odd = law.expect(|m| translates.iter().filter(|&&t| (m & t).count_ones() % 2 == 1).count() as f64);
        harmonic.push((x.clone(), odd / mean_ones));
    }
    Ok(ExactObservables {
        mean_ones,
        count_law,
        harmonic,
    })
}

fn psi(x: u64, y: u64) -> f64 {
    if (x & y).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Largest `|G_X ψ(·,y)(x) − G_Y ψ(x,·)(y)|` over all pairs of ring
/// configurations, with `ψ(x,y) = (−1)^{|xy|}`.
pub fn check_duality(spec_x: &ModelSpec, spec_y: &ModelSpec, sites: usize) -> Result<f64> {
    check_size(sites, MAX_CHECK_SITES)?;
    let all = 1u64 << sites;
    let mx: Vec<Vec<(u64, f64)>> = (0..all).map(|m| moves(spec_x, m, sites)).collect();
    let my: Vec<Vec<(u64, f64)>> = (0..all).map(|m| moves(spec_y, m, sites)).collect();
    let mut worst: f64 = 0.0;
    for x in 0..all {
        for y in 0..all {
            let base = psi(x, y);
            let gx: f64 = mx[x as usize].iter().map(|&(x2, r)| r * (psi(x2, y) - base)).sum();
            let gy: f64 = my[y as usize].iter().map(|&(y2, r)| r * (psi(x, y2) - base)).sum();
            worst = worst.max((gx - gy).abs());
        }
    }
    Ok(worst)
}

/// Compares the spin generator of `spec`, pushed through the kink map, with
/// the generator of the corresponding interface model. Returns the largest
/// rate discrepancy over all spin states and kink targets.
pub fn check_pushforward(spec: &ModelSpec, sites: usize) -> Result<f64> {
    check_size(sites, MAX_CHECK_SITES)?;
    if spec.representation() != Representation::Spin {
        return Err(Error::InvalidModel(format!("{spec} is not a spin model")));
    }
    let iface = ModelSpec::new(spec.family(), Representation::Interface, spec.alpha())?;
    let kinks = |m: u64| {
        interface_of(&RingConfig::from_mask(m, sites).expect("valid size")).to_mask()
    };
    let mut worst: f64 = 0.0;
    for x in 0..1u64 << sites {
        let y = kinks(x);
        let mut pushed: Vec<(u64, f64)> = Vec::new();
        for (x2, r) in moves(spec, x, sites) {
            let y2 = kinks(x2);
            match pushed.iter_mut().find(|(t, _)| *t == y2) {
                Some(e) => e.1 += r,
                None => pushed.push((y2, r)),
            }
        }
        let direct = moves(&iface, y, sites);
        for &(t, r) in &pushed {
            let d: f64 = direct.iter().filter(|(u, _)| *u == t).map(|(_, r)| r).sum();
            worst = worst.max((r - d).abs());
        }
        for &(t, r) in &direct {
            if !pushed.iter().any(|(u, _)| *u == t) {
                worst = worst.max(r.abs());
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Family;

    fn spec(f: Family, r: Representation, a: f64) -> ModelSpec {
        ModelSpec::new(f, r, a).unwrap()
    }

    #[test]
    fn one_sided_interface_on_four_sites() {
        let s = build_generator(&spec(Family::OneSided, Representation::Interface, 0.3), 4, Sector::Odd).unwrap();
        assert_eq!(s.len(), 8);
        let from = s.index_of(&"1000".parse().unwrap()).unwrap();
        let to_hop = s.index_of(&"0100".parse().unwrap()).unwrap();
        let to_branch = s.index_of(&"1110".parse().unwrap()).unwrap();
        assert!((s.rate(from, to_hop) - 0.3).abs() < 1e-15);
        assert!((s.rate(from, to_branch) - 0.7).abs() < 1e-15);
        assert!((s.exit_rate(from) - 1.0).abs() < 1e-15);
        assert!(s.preserves_parity());
        assert!(s.row_sum_residual() < 1e-12);
    }

    #[test]
    fn sarw_never_grows_at_alpha_zero() {
        let s = build_generator(&spec(Family::Disagreement, Representation::Interface, 0.0), 6, Sector::Full).unwrap();
        for k in 0..s.len() {
            let ones = s.mask(k).count_ones();
            assert!(s.row(k).all(|(t, _)| s.mask(t).count_ones() <= ones));
        }
    }

    #[test]
    fn zero_state_is_absorbing() {
        let s = build_generator(&spec(Family::TwoSided, Representation::Interface, 0.4), 5, Sector::Full).unwrap();
        let z = s.index_of(&RingConfig::zeros(5).unwrap()).unwrap();
        assert_eq!(s.exit_rate(z), 0.0);
    }

    #[test]
    fn spin_models_leave_parity_sectors() {
        let r = build_generator(&spec(Family::OneSided, Representation::Spin, 0.5), 5, Sector::Odd);
        assert!(matches!(r, Err(Error::InvalidModel(_))));
        assert!(matches!(
            build_generator(&spec(Family::OneSided, Representation::Spin, 0.5), 23, Sector::Full),
            Err(Error::SizeGuard { .. })
        ));
    }

    #[test]
    fn annihilating_walk_concentrates_on_one_particle() {
        let s = build_generator(&spec(Family::TwoSided, Representation::Interface, 1.0), 4, Sector::Odd).unwrap();
        let law = stationary(&s).unwrap();
        assert!(law.residual <= SOLVE_TOLERANCE);
        for k in 0..s.len() {
            let p = law.pi[k];
            if s.mask(k).count_ones() == 1 {
                assert!((p - 0.25).abs() < 1e-12);
            } else {
                assert!(p.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn product_half_is_invariant_for_alpha_zero_spin() {
        let s = build_generator(&spec(Family::OneSided, Representation::Spin, 0.0), 6, Sector::Full).unwrap();
        let pi = vec![1.0 / s.len() as f64; s.len()];
        assert!(s.residual(&pi) < 1e-12);
        let mean: f64 = (0..s.len()).map(|k| pi[k] * f64::from(s.mask(k).count_ones())).sum();
        assert!((mean / 6.0 - 0.5).abs() < 1e-12);
        assert!(matches!(stationary(&s), Err(Error::Reducible { .. })));
        let classes = s.closed_classes();
        assert!(classes.len() >= 2);
        let trap = stationary_on(&s, &classes[0]).unwrap();
        assert_eq!(trap.pi.iter().filter(|&&p| p == 1.0).count(), 1);
    }

    #[test]
    fn single_state_class() {
        let s = build_generator(&spec(Family::OneSided, Representation::Spin, 0.4), 4, Sector::Full).unwrap();
        let zero = s.index_of(&RingConfig::zeros(4).unwrap()).unwrap();
        let law = stationary_on(&s, &[zero]).unwrap();
        assert_eq!(law.pi[zero], 1.0);
        assert!(stationary_on(&s, &[1]).is_err());
    }

    #[test]
    fn observables_are_normalized() {
        let s = build_generator(&spec(Family::OneSided, Representation::MirrorDual, 0.5), 6, Sector::Odd).unwrap();
        let law = stationary(&s).unwrap();
        let pats: Vec<Pattern> = ["1", "11", "101"].iter().map(|p| p.parse().unwrap()).collect();
        let obs = exact_observables(&law, &pats).unwrap();
        assert!((obs.count_law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for k in (0..=6).step_by(2) {
            assert_eq!(obs.count_law[k], 0.0);
        }
        assert!((obs.harmonic[0].1 - 1.0).abs() < 1e-12);
        assert!(obs.harmonic[1].1 > 1.0);
    }

    #[test]
    fn duality_pairs_and_negative_control() {
        let x = spec(Family::TwoSided, Representation::Spin, 0.37);
        let y = spec(Family::TwoSided, Representation::Interface, 0.37);
        assert!(check_duality(&x, &y, 6).unwrap() < 1e-12);
        let x = spec(Family::OneSided, Representation::Spin, 0.7);
        let y = spec(Family::OneSided, Representation::MirrorDual, 0.7);
        assert!(check_duality(&x, &y, 6).unwrap() < 1e-12);
        let wrong = spec(Family::OneSided, Representation::Interface, 0.7);
        assert!(check_duality(&x, &wrong, 6).unwrap() > 1e-3);
    }

    #[test]
    fn pushforward_matches_interface_generator() {
        for f in Family::ALL {
            for a in [0.0, 0.3, 1.0] {
                let s = spec(f, Representation::Spin, a);
                assert!(check_pushforward(&s, 6).unwrap() < 1e-12, "{s}");
            }
        }
    }
}
