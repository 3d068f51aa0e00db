//! Transition-rate kernels for the voter-type models and their interface and
//! dual particle systems.
//!
//! Every model is a continuous-time Markov chain on `{0,1}^N` (periodic
//! ring). A transition flips one or two sites; rates are evaluated for an
//! *anchor* index `i`, following the displayed rate formula for each family:
//!
//! | family          | spin flip of `i` at rate                                           |
//! |-----------------|--------------------------------------------------------------------|
//! | `OneSided`      | `α·[x(i-1)≠x(i)] + (1-α)·[x(i-2)≠x(i-1)]`                          |
//! | `TwoSided`      | `½α·([x(i-1)≠x(i)]+[x(i)≠x(i+1)]) + ½(1-α)·([x(i-2)≠x(i-1)]+[x(i+1)≠x(i+2)])` |
//! | `Disagreement`  | `α·([x(i-1)≠x(i)]+[x(i)≠x(i+1)]) + (1-α)·[x(i-1)≠x(i+1)]`          |
//! | `Swapping`      | `α·([x(i-1)≠x(i)]+[x(i)≠x(i+1)])`, plus `{i,i+1}` at `(1-α)·[x(i)≠x(i+1)]` |
//! | `MixedOneSided` | `α·[x(i)≠x(i+1)] + (1-α)·[x(i-2)≠x(i-1)]`                          |
//!
//! The interface representation tracks kinks `y(i) = [x(i)≠x(i+1)]`; the
//! mirror-dual representation is the reflection of the one-sided interface
//! model, which is the cancellative dual of the one-sided spin model.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::ring::RingConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    OneSided,
    TwoSided,
    Disagreement,
    Swapping,
    /// Voter updates look right, rebellious updates look left.
    MixedOneSided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    Spin,
    Interface,
    MirrorDual,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::OneSided,
        Family::TwoSided,
        Family::Disagreement,
        Family::Swapping,
        Family::MixedOneSided,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::OneSided => "one-sided",
            Family::TwoSided => "two-sided",
            Family::Disagreement => "disagreement",
            Family::Swapping => "swapping",
            Family::MixedOneSided => "mixed",
        }
    }
}

impl Representation {
    pub fn name(self) -> &'static str {
        match self {
            Representation::Spin => "spin",
            Representation::Interface => "interface",
            Representation::MirrorDual => "mirror",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidModel(format!("unknown model family {s:?}")))
    }
}

impl FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin" => Ok(Representation::Spin),
            "interface" => Ok(Representation::Interface),
            "mirror" | "mirror-dual" => Ok(Representation::MirrorDual),
            _ => Err(Error::InvalidModel(format!("unknown representation {s:?}"))),
        }
    }
}

/// A model family in a given representation at competition parameter `alpha`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelSpec {
    family: Family,
    representation: Representation,
    alpha: f64,
}

impl ModelSpec {
    pub fn new(family: Family, representation: Representation, alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidModel(format!("alpha {alpha} outside [0, 1]")));
        }
        if representation == Representation::MirrorDual && family != Family::OneSided {
            return Err(Error::InvalidModel(format!(
                "the mirror-dual representation is only defined for the one-sided model, not {family}"
            )));
        }
        Ok(Self {
            family,
            representation,
            alpha,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.family, self.representation, alpha)
    }

    /// True when every transition flips exactly two sites.
    pub fn is_parity_preserving(&self) -> bool {
        self.representation != Representation::Spin
    }

    /// The particle system dual to this spin model under `(-1)^{|xy|}`.
    pub fn cancellative_dual(&self) -> Option<Self> {
        if self.representation != Representation::Spin {
            return None;
        }
        let (family, rep) = match self.family {
            Family::OneSided => (Family::OneSided, Representation::MirrorDual),
            Family::TwoSided => (Family::TwoSided, Representation::Interface),
            Family::Disagreement => (Family::Swapping, Representation::Interface),
            Family::Swapping => (Family::Disagreement, Representation::Interface),
            Family::MixedOneSided => return None,
        };
        Some(Self {
            family,
            representation: rep,
            alpha: self.alpha,
        })
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{} α={}", self.family, self.representation, self.alpha)
    }
}

/// The set of sites flipped by a transition. Pairs are stored sorted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Delta {
    One(usize),
    Two(usize, usize),
}

impl Delta {
    pub fn pair(a: usize, b: usize) -> Self {
        debug_assert_ne!(a, b);
        if a < b {
            Delta::Two(a, b)
        } else {
            Delta::Two(b, a)
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = usize> {
        let (a, b) = match *self {
            Delta::One(a) => (a, None),
            Delta::Two(a, b) => (a, Some(b)),
        };
        std::iter::once(a).chain(b)
    }

    pub fn len(&self) -> usize {
        match self {
            Delta::One(_) => 1,
            Delta::Two(..) => 2,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FlipEvent {
    pub sites: Delta,
    pub rate: f64,
}

#[inline]
fn ind(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Rate at which spin site `i` flips on its own.
///
/// The pair-flip channel of the swapping model is not included; see
/// [`transitions_at`].
pub fn spin_flip_rate(spec: &ModelSpec, x: &RingConfig, i: usize) -> f64 {
    let a = spec.alpha;
    let i = i as isize;
    let d = |p: isize, q: isize| ind(x.at(p) != x.at(q));
    match spec.family {
        Family::OneSided => a * d(i - 1, i) + (1.0 - a) * d(i - 2, i - 1),
        Family::TwoSided => {
            0.5 * a * (d(i - 1, i) + d(i, i + 1))
                + 0.5 * (1.0 - a) * (d(i - 2, i - 1) + d(i + 1, i + 2))
        }
        Family::Disagreement => a * (d(i - 1, i) + d(i, i + 1)) + (1.0 - a) * d(i - 1, i + 1),
        Family::Swapping => a * (d(i - 1, i) + d(i, i + 1)),
        Family::MixedOneSided => a * d(i, i + 1) + (1.0 - a) * d(i - 2, i - 1),
    }
}

/// All transitions anchored at `i`, with nonzero rates evaluated on `y`.
pub fn transitions_at(spec: &ModelSpec, y: &RingConfig, i: usize) -> Vec<FlipEvent> {
    let mut out = Vec::with_capacity(2);
    transitions_into(spec, y, i, &mut out);
    out
}

pub(crate) fn transitions_into(spec: &ModelSpec, y: &RingConfig, i: usize, out: &mut Vec<FlipEvent>) {
    let a = spec.alpha;
    let n = y.size();
    let w = |k: isize| y.wrap(i as isize + k);
    let occ = |k: isize| ind(y.at(i as isize + k) == 1);
    let mut push = |sites: Delta, rate: f64| {
        if rate > 0.0 {
            out.push(FlipEvent { sites, rate });
        }
    };
    debug_assert!(i < n);
    match (spec.family, spec.representation) {
        (Family::Swapping, Representation::Spin) => {
            push(Delta::One(i), spin_flip_rate(spec, y, i));
            push(
                Delta::pair(i, w(1)),
                (1.0 - a) * ind(y.at(i as isize) != y.at(i as isize + 1)),
            );
        }
        (_, Representation::Spin) => push(Delta::One(i), spin_flip_rate(spec, y, i)),
        (Family::OneSided, Representation::Interface) => {
            push(Delta::pair(i, w(1)), a * occ(0) + (1.0 - a) * occ(-1));
        }
        (Family::OneSided, Representation::MirrorDual) => {
            push(Delta::pair(w(-1), i), a * occ(0) + (1.0 - a) * occ(1));
        }
        (Family::TwoSided, Representation::Interface) => {
            push(
                Delta::pair(i, w(1)),
                0.5 * a * (occ(0) + occ(1)) + 0.5 * (1.0 - a) * (occ(-1) + occ(2)),
            );
        }
        (Family::Disagreement, Representation::Interface) => {
            push(
                Delta::pair(i, w(1)),
                a * (occ(0) + occ(1)) + (1.0 - a) * ind(occ(0) != occ(1)),
            );
        }
        (Family::Swapping, Representation::Interface) => {
            push(Delta::pair(i, w(1)), a * (occ(0) + occ(1)));
            push(Delta::pair(w(-1), w(1)), (1.0 - a) * occ(0));
        }
        (Family::MixedOneSided, Representation::Interface) => {
            push(Delta::pair(w(-1), i), a * occ(0) + (1.0 - a) * occ(-2));
        }
        (_, Representation::MirrorDual) => unreachable!("rejected by ModelSpec::new"),
    }
}

/// Every transition out of `y`, anchor by anchor.
pub fn all_transitions(spec: &ModelSpec, y: &RingConfig) -> Vec<FlipEvent> {
    let mut out = Vec::with_capacity(2 * y.size());
    for i in 0..y.size() {
        transitions_into(spec, y, i, &mut out);
    }
    out
}

/// Total rate per flip set, merging transitions that flip the same sites.
pub fn aggregate<I: IntoIterator<Item = FlipEvent>>(events: I) -> BTreeMap<Delta, f64> {
    let mut m = BTreeMap::new();
    for e in events {
        *m.entry(e.sites).or_insert(0.0) += e.rate;
    }
    m.retain(|_, r| *r != 0.0);
    m
}

/// Toggles the sites in `e`, keeping the cached particle count in sync.
pub fn apply_flip(y: &RingConfig, e: &FlipEvent) -> RingConfig {
    let mut out = y.clone();
    for s in e.sites.sites() {
        out.toggle(s);
    }
    out
}

/// Kinks of a spin configuration: `y(i) = [x(i) ≠ x(i+1)]`.
pub fn interface_of(x: &RingConfig) -> RingConfig {
    let n = x.size();
    let bits: Vec<u8> = (0..n)
        .map(|i| u8::from(x.bits()[i] != x.bits()[(i + 1) % n]))
        .collect();
    RingConfig::from_bits(&bits).expect("same size as a valid ring")
}

/// One entry of a particle menu: toggle `{j+lo, j+hi}` for the particle at `j`
/// with probability `a + b·α`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MenuEntry {
    pub lo: isize,
    pub hi: isize,
    pub a: f64,
    pub b: f64,
}

impl MenuEntry {
    #[inline]
    pub fn prob(&self, alpha: f64) -> f64 {
        self.a + self.b * alpha
    }
}

/// The α-dependent particle menu of a purely particle-enabled interface
/// model. Each particle fires at rate one and then picks an entry.
#[derive(Clone, Debug, PartialEq)]
pub struct MenuTable {
    entries: Vec<MenuEntry>,
}

const fn entry(lo: isize, hi: isize, a: f64, b: f64) -> MenuEntry {
    MenuEntry { lo, hi, a, b }
}

impl MenuTable {
    pub fn for_spec(spec: &ModelSpec) -> Result<Self> {
        let entries = match (spec.family, spec.representation) {
            (Family::OneSided, Representation::Interface) => {
                vec![entry(0, 1, 0.0, 1.0), entry(1, 2, 1.0, -1.0)]
            }
            (Family::OneSided, Representation::MirrorDual) => {
                vec![entry(-1, 0, 0.0, 1.0), entry(-2, -1, 1.0, -1.0)]
            }
            (Family::TwoSided, Representation::Interface) => vec![
                entry(-1, 0, 0.0, 0.5),
                entry(0, 1, 0.0, 0.5),
                entry(-2, -1, 0.5, -0.5),
                entry(1, 2, 0.5, -0.5),
            ],
            (Family::MixedOneSided, Representation::Interface) => {
                vec![entry(-1, 0, 0.0, 1.0), entry(1, 2, 1.0, -1.0)]
            }
            (f, r) => {
                return Err(Error::InvalidModel(format!(
                    "{f}/{r} has no uniform-rate particle menu"
                )))
            }
        };
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[MenuEntry] {
        &self.entries
    }

    /// Mirror image: offsets negated, probabilities unchanged.
    pub fn reflect(&self) -> Self {
        Self {
            entries: self
                .entries
                .iter()
                .map(|e| entry(-e.hi, -e.lo, e.a, e.b))
                .collect(),
        }
    }

    /// Picks an entry given a uniform variate `u` in `[0, 1)`.
    #[inline]
    pub fn pick(&self, alpha: f64, u: f64) -> (isize, isize) {
        let mut acc = 0.0;
        for e in &self.entries {
            acc += e.prob(alpha);
            if u < acc {
                return (e.lo, e.hi);
            }
        }
        // u landed in the rounding slack above the last cumulative sum
        let last = self
            .entries
            .iter()
            .rev()
            .find(|e| e.prob(alpha) > 0.0)
            .expect("menu has positive mass");
        (last.lo, last.hi)
    }

    pub fn at(&self, alpha: f64) -> ParticleMenu {
        ParticleMenu {
            entries: self
                .entries
                .iter()
                .filter_map(|e| {
                    let p = e.prob(alpha);
                    (p > 0.0).then_some(((e.lo, e.hi), p))
                })
                .collect(),
            rate: 1.0,
        }
    }
}

/// Offsets relative to a particle at `j`, with the probability of each toggle.
#[derive(Clone, Debug, PartialEq)]
pub struct ParticleMenu {
    pub entries: Vec<((isize, isize), f64)>,
    pub rate: f64,
}

pub fn particle_menu(spec: &ModelSpec) -> Result<ParticleMenu> {
    Ok(MenuTable::for_spec(spec)?.at(spec.alpha))
}

/// Transitions obtained by letting each particle of `y` fire its menu.
pub fn menu_transitions(menu: &ParticleMenu, y: &RingConfig) -> Vec<FlipEvent> {
    let mut out = Vec::new();
    for j in y.particles() {
        for &((lo, hi), p) in &menu.entries {
            out.push(FlipEvent {
                sites: Delta::pair(y.wrap(j as isize + lo), y.wrap(j as isize + hi)),
                rate: menu.rate * p,
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(f: Family, r: Representation, a: f64) -> ModelSpec {
        ModelSpec::new(f, r, a).unwrap()
    }

    fn ring(s: &str) -> RingConfig {
        s.parse().unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-12
    }

    #[test]
    fn mirror_dual_is_one_sided_only() {
        assert!(ModelSpec::new(Family::TwoSided, Representation::MirrorDual, 0.5).is_err());
        assert!(ModelSpec::new(Family::OneSided, Representation::MirrorDual, 0.5).is_ok());
        assert!(ModelSpec::new(Family::OneSided, Representation::Spin, 1.5).is_err());
    }

    #[test]
    fn one_sided_spin_both_indicators() {
        // x(i-2)=0, x(i-1)=1, x(i)=0 at i=2
        let s = spec(Family::OneSided, Representation::Spin, 0.3);
        let x = ring("010000");
        assert!(close(spin_flip_rate(&s, &x, 2), 1.0));
    }

    #[test]
    fn constant_configurations_are_traps() {
        for f in Family::ALL {
            let s = spec(f, Representation::Spin, 0.37);
            for x in [ring("000000"), ring("111111")] {
                assert!(all_transitions(&s, &x).is_empty(), "{f}");
            }
        }
    }

    #[test]
    fn two_sided_spin_middle_site() {
        let s = spec(Family::TwoSided, Representation::Spin, 0.5);
        let x = ring("0101000");
        assert!(close(spin_flip_rate(&s, &x, 2), 1.0));
    }

    #[test]
    fn one_sided_interface_anchor() {
        let s = spec(Family::OneSided, Representation::Interface, 0.4);
        let y = ring("0010000");
        let t = transitions_at(&s, &y, 2);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].sites, Delta::Two(2, 3));
        assert!(close(t[0].rate, 0.4));
    }

    #[test]
    fn mirror_dual_anchor() {
        let s = spec(Family::OneSided, Representation::MirrorDual, 0.4);
        let y = ring("0010000");
        let t = transitions_at(&s, &y, 2);
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].sites, Delta::Two(1, 2));
        assert!(close(t[0].rate, 0.4));
    }

    #[test]
    fn dbarw_anchor_with_occupied_neighbour() {
        let s = spec(Family::Swapping, Representation::Interface, 0.25);
        let y = ring("0011000");
        let t = transitions_at(&s, &y, 2);
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].sites, Delta::Two(2, 3));
        assert!(close(t[0].rate, 0.5));
        assert_eq!(t[1].sites, Delta::Two(1, 3));
        assert!(close(t[1].rate, 0.75));
    }

    #[test]
    fn interface_examples() {
        assert_eq!(interface_of(&ring("00110")).to_string(), "01010");
        assert_eq!(interface_of(&ring("11111")).to_string(), "00000");
        assert_eq!(interface_of(&ring("01010101")).to_string(), "11111111");
    }

    #[test]
    fn apply_flip_examples() {
        let e = |a, b| FlipEvent {
            sites: Delta::pair(a, b),
            rate: 1.0,
        };
        let y = apply_flip(&ring("10000"), &e(0, 1));
        assert_eq!((y.to_string(), y.ones()), ("01000".into(), 1));
        let y = apply_flip(&ring("11000"), &e(0, 1));
        assert_eq!((y.to_string(), y.ones()), ("00000".into(), 0));
        let y = apply_flip(&ring("10100"), &e(1, 2));
        assert_eq!((y.to_string(), y.ones()), ("11000".into(), 2));
    }

    #[test]
    fn menu_examples() {
        let m = particle_menu(&spec(Family::OneSided, Representation::Interface, 0.0)).unwrap();
        assert_eq!(m.entries, vec![((1, 2), 1.0)]);
        let m = particle_menu(&spec(Family::TwoSided, Representation::Interface, 1.0)).unwrap();
        assert_eq!(m.entries, vec![((-1, 0), 0.5), ((0, 1), 0.5)]);
        let m = particle_menu(&spec(Family::OneSided, Representation::Interface, 0.3)).unwrap();
        assert_eq!(m.entries.len(), 2);
        assert_eq!(m.entries[0].0, (0, 1));
        assert!(close(m.entries[0].1, 0.3));
        assert_eq!(m.entries[1].0, (1, 2));
        assert!(close(m.entries[1].1, 0.7));
        assert_eq!(m.rate, 1.0);
        assert!(particle_menu(&spec(Family::Swapping, Representation::Interface, 0.3)).is_err());
        assert!(particle_menu(&spec(Family::OneSided, Representation::Spin, 0.3)).is_err());
    }

    #[test]
    fn menu_pick_respects_rounding_slack() {
        let t = MenuTable::for_spec(&spec(Family::OneSided, Representation::Interface, 1.0))
            .unwrap();
        assert_eq!(t.pick(1.0, 0.999_999_999_999), (0, 1));
        assert_eq!(t.pick(0.0, 0.0), (1, 2));
    }

    #[test]
    fn cancellative_duals() {
        let d = spec(Family::Disagreement, Representation::Spin, 0.2)
            .cancellative_dual()
            .unwrap();
        assert_eq!(
            (d.family(), d.representation()),
            (Family::Swapping, Representation::Interface)
        );
        assert!(spec(Family::OneSided, Representation::Interface, 0.2)
            .cancellative_dual()
            .is_none());
    }
}
