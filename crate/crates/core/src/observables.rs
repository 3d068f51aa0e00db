//! Estimated curves from binned simulation output.
//!
//! Every estimator takes replica runs `runs[r][k]` (bin `k` of replica `r`)
//! of one plan. Bin totals are pooled across replicas before the estimate is
//! formed, and the standard error is the leave-one-replica-out jackknife of
//! that pooled estimate. A single replica gives a standard error of zero.

use std::collections::BTreeMap;

use crate::engine::BinStats;
use crate::error::{Error, Result};
use crate::pattern::Pattern;
use crate::replica::order_free_sum;

/// Default minimum support, in expected events, for ratio points.
pub const DEFAULT_FLOOR: f64 = 100.0;

/// One point of an estimated curve.
///
/// `support` says how much data stands behind the value: the number of
/// events in the bin for plain averages, and the expected number of events
/// spent in the conditioning state for ratios of occupation times.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub alpha: f64,
    pub value: f64,
    pub stderr: f64,
    pub support: f64,
}

/// A time bin that can be pooled across replicas.
pub trait Binned {
    fn elapsed(&self) -> f64;
    fn alpha_mean(&self) -> f64;
}

impl Binned for BinStats {
    fn elapsed(&self) -> f64 {
        self.elapsed
    }

    fn alpha_mean(&self) -> f64 {
        self.alpha_mean
    }
}

fn check_runs<B>(runs: &[Vec<B>]) -> Result<usize> {
    let first = runs
        .first()
        .ok_or_else(|| Error::InvalidInput("no replica runs supplied".into()))?;
    if runs.iter().any(|r| r.len() != first.len()) {
        return Err(Error::InvalidInput("replicas disagree on bin count".into()));
    }
    Ok(first.len())
}

/// Leave-one-out jackknife standard error; `NaN` if some leave-one-out
/// estimate is undefined.
fn jackknife<F>(totals: &[f64], per: &[Vec<f64>], alpha: f64, estimate: &F) -> f64
where
    F: Fn(f64, &[f64]) -> Option<(f64, f64)>,
{
    let r = per.len();
    if r < 2 {
        return 0.0;
    }
    let mut loo = Vec::with_capacity(r);
    let mut reduced = vec![0.0; totals.len()];
    for row in per {
        for (c, slot) in reduced.iter_mut().enumerate() {
            *slot = totals[c] - row[c];
        }
        match estimate(alpha, &reduced) {
            Some((v, _)) if v.is_finite() => loo.push(v),
            _ => return f64::NAN,
        }
    }
    let mean = order_free_sum(loo.iter().copied()) / r as f64;
    let ss = order_free_sum(loo.iter().map(|v| (v - mean) * (v - mean)));
    ((r - 1) as f64 / r as f64 * ss).sqrt()
}

/// Pools the channels of each bin across replicas and applies `estimate`,
/// which receives the bin's mean α and the pooled channels and returns
/// `(value, support)`, or `None` to drop the point. Empty bins are skipped.
pub(crate) fn bin_curve<B, C, F>(runs: &[Vec<B>], channels: C, estimate: F) -> Result<Vec<CurvePoint>>
where
    B: Binned,
    C: Fn(&B) -> Vec<f64>,
    F: Fn(f64, &[f64]) -> Option<(f64, f64)>,
{
    let bins = check_runs(runs)?;
    let mut out = Vec::with_capacity(bins);
    for k in 0..bins {
        let elapsed = order_free_sum(runs.iter().map(|r| r[k].elapsed()));
        if elapsed <= 0.0 {
            continue;
        }
        let alpha = order_free_sum(runs.iter().map(|r| r[k].alpha_mean() * r[k].elapsed())) / elapsed;
        let per: Vec<Vec<f64>> = runs.iter().map(|r| channels(&r[k])).collect();
        let totals: Vec<f64> = (0..per[0].len())
            .map(|c| order_free_sum(per.iter().map(|row| row[c])))
            .collect();
        let Some((value, support)) = estimate(alpha, &totals) else {
            continue;
        };
        let stderr = jackknife(&totals, &per, alpha, &estimate);
        out.push(CurvePoint {
            alpha,
            value,
            stderr,
            support,
        });
    }
    Ok(out)
}

fn check_k(runs: &[Vec<BinStats>], k: usize) -> Result<()> {
    let max_k = runs.first().and_then(|r| r.first()).map_or(0, BinStats::max_k);
    if k.is_multiple_of(2) || k > max_k {
        return Err(Error::InvalidInput(format!(
            "particle count {k} must be odd and at most max_k = {max_k}"
        )));
    }
    Ok(())
}

/// Survival probability estimate `2·∫|Y| dt / (N·elapsed)` per bin.
pub fn rho_hat(runs: &[Vec<BinStats>], sites: usize) -> Result<Vec<CurvePoint>> {
    let n = sites as f64;
    bin_curve(
        runs,
        |b| vec![b.weighted_ones, b.elapsed, b.events as f64],
        |_, t| Some((2.0 * t[0] / (n * t[1]), t[2])),
    )
}

/// Mean particle count `∫|Y| dt / elapsed` per bin.
pub fn mu_hat(runs: &[Vec<BinStats>]) -> Result<Vec<CurvePoint>> {
    bin_curve(
        runs,
        |b| vec![b.weighted_ones, b.elapsed, b.events as f64],
        |_, t| Some((t[0] / t[1], t[2])),
    )
}

/// Fraction of time spent with exactly `k` particles. The support is the
/// expected number of events during that time, `k·∫1{|Y|=k} dt`.
pub fn chi_k_hat(runs: &[Vec<BinStats>], k: usize) -> Result<Vec<CurvePoint>> {
    check_runs(runs)?;
    check_k(runs, k)?;
    let kf = k as f64;
    bin_curve(
        runs,
        |b| vec![b.time_at_k[k], b.elapsed],
        |_, t| Some((t[0] / t[1], kf * t[0])),
    )
}

/// `θ_k = χ_{k+2}/χ_k`, dropping bins whose `χ_k` support is below `floor`.
pub fn theta_hat(runs: &[Vec<BinStats>], k: usize, floor: f64) -> Result<Vec<CurvePoint>> {
    check_runs(runs)?;
    check_k(runs, k + 2)?;
    let kf = k as f64;
    bin_curve(
        runs,
        |b| vec![b.time_at_k[k], b.time_at_k[k + 2]],
        |_, t| (t[0] > 0.0 && kf * t[0] >= floor).then(|| (t[1] / t[0], kf * t[0])),
    )
}

/// `φ_k = θ_{k+2}/θ_k = χ_{k+4}χ_k/χ_{k+2}²`, with the floor applied to both
/// `χ_k` and `χ_{k+2}`.
pub fn phi_hat(runs: &[Vec<BinStats>], k: usize, floor: f64) -> Result<Vec<CurvePoint>> {
    check_runs(runs)?;
    check_k(runs, k + 4)?;
    let (k0, k2) = (k as f64, (k + 2) as f64);
    bin_curve(
        runs,
        |b| vec![b.time_at_k[k], b.time_at_k[k + 2], b.time_at_k[k + 4]],
        |_, t| {
            let support = (k0 * t[0]).min(k2 * t[1]);
            (t[0] > 0.0 && t[1] > 0.0 && support >= floor).then(|| (t[2] * t[0] / (t[1] * t[1]), support))
        },
    )
}

/// `θ_{k2} − θ_{k1}` per bin with a jackknife error that accounts for the
/// correlation between the two ratios.
pub fn theta_difference(runs: &[Vec<BinStats>], k1: usize, k2: usize, floor: f64) -> Result<Vec<CurvePoint>> {
    check_runs(runs)?;
    check_k(runs, k1.max(k2) + 2)?;
    check_k(runs, k1.min(k2))?;
    let (f1, f2) = (k1 as f64, k2 as f64);
    bin_curve(
        runs,
        |b| {
            vec![
                b.time_at_k[k1],
                b.time_at_k[k1 + 2],
                b.time_at_k[k2],
                b.time_at_k[k2 + 2],
            ]
        },
        |_, t| {
            let support = (f1 * t[0]).min(f2 * t[2]);
            (t[0] > 0.0 && t[2] > 0.0 && support >= floor).then(|| (t[3] / t[2] - t[1] / t[0], support))
        },
    )
}

/// θ and φ built from already estimated χ curves.
#[derive(Clone, Debug, PartialEq)]
pub struct ThetaPhi {
    pub theta: Vec<CurvePoint>,
    pub phi: Vec<CurvePoint>,
    /// α values at which a point was dropped by the floor or a zero
    /// denominator.
    pub dropped: Vec<f64>,
}

fn ratio_point(num: &CurvePoint, den: &CurvePoint) -> CurvePoint {
    let value = num.value / den.value;
    let rel = (num.stderr / num.value).powi(2) + (den.stderr / den.value).powi(2);
    let stderr = if num.value == 0.0 {
        num.stderr / den.value
    } else {
        value.abs() * rel.sqrt()
    };
    CurvePoint {
        alpha: den.alpha,
        value,
        stderr,
        support: den.support,
    }
}

/// Pointwise `θ_k = χ_{k+2}/χ_k`, `θ_{k+2} = χ_{k+4}/χ_{k+2}` and
/// `φ_k = θ_{k+2}/θ_k` from three χ curves sampled at the same α values.
/// Errors are propagated as if the inputs were independent. Points whose
/// denominator is zero or whose support is below `floor` are dropped.
pub fn theta_phi(
    chi_k: &[CurvePoint],
    chi_k2: &[CurvePoint],
    chi_k4: &[CurvePoint],
    floor: f64,
) -> Result<ThetaPhi> {
    if chi_k.len() != chi_k2.len() || chi_k.len() != chi_k4.len() {
        return Err(Error::InvalidInput("χ curves differ in length".into()));
    }
    let mut out = ThetaPhi {
        theta: Vec::new(),
        phi: Vec::new(),
        dropped: Vec::new(),
    };
    for ((a, b), c) in chi_k.iter().zip(chi_k2).zip(chi_k4) {
        if (a.alpha - b.alpha).abs() > 1e-12 || (a.alpha - c.alpha).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!(
                "χ curves are not aligned at α = {}",
                a.alpha
            )));
        }
        if a.value <= 0.0 || a.support < floor {
            out.dropped.push(a.alpha);
            continue;
        }
        let theta = ratio_point(b, a);
        out.theta.push(theta);
        if b.value <= 0.0 || b.support < floor {
            out.dropped.push(a.alpha);
            continue;
        }
        out.phi.push(ratio_point(&ratio_point(c, b), &theta));
    }
    Ok(out)
}

fn pattern_index(patterns: &[Pattern], x: &Pattern) -> Result<usize> {
    patterns
        .iter()
        .position(|p| p == x)
        .ok_or_else(|| Error::MissingPattern(x.to_string()))
}

/// `f_x = P[|x·Y| odd] / P[Y(0)=1]` per bin, both translate-averaged.
/// `patterns` is the plan's pattern list, in the order used for the run.
pub fn harmonic_hat(runs: &[Vec<BinStats>], patterns: &[Pattern], x: &Pattern) -> Result<Vec<CurvePoint>> {
    check_runs(runs)?;
    let p = pattern_index(patterns, x)?;
    bin_curve(
        runs,
        |b| vec![b.pattern_odd_time[p], b.ones_fraction_time, b.events as f64],
        |_, t| (t[1] > 0.0).then(|| (t[0] / t[1], t[2])),
    )
}

fn table_value(table: &BTreeMap<Pattern, f64>, x: &str) -> Result<f64> {
    let p: Pattern = x.parse()?;
    table.get(&p).copied().ok_or(Error::MissingPattern(p.to_string()))
}

fn residuals(alpha: f64, f11: f64, f101: f64, f111: f64, f1101: f64) -> (f64, f64) {
    let (f_empty, f1) = (0.0, 1.0);
    let r1 = alpha * (f_empty - f1) + (f11 - f1) + (1.0 - alpha) * (f101 - f1);
    let r11 = alpha * (f111 - f11) + (f1 - f11) + (1.0 - alpha) * (f1101 - f11);
    (r1, r11)
}

/// Balance residuals `(r1, r11)` of the one-sided generator applied to the
/// single one and the pair. The table must hold `11`, `101`, `111` and
/// `1101`; `f_1 = 1` and `f_∅ = 0` are fixed.
pub fn harmonic_residuals(table: &BTreeMap<Pattern, f64>, alpha: f64) -> Result<(f64, f64)> {
    Ok(residuals(
        alpha,
        table_value(table, "11")?,
        table_value(table, "101")?,
        table_value(table, "111")?,
        table_value(table, "1101")?,
    ))
}

/// Balance residuals of one bin.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResidualPoint {
    pub r1: CurvePoint,
    pub r11: CurvePoint,
}

/// Per-bin balance residuals computed from simulated `f_x`, with jackknife
/// errors of the residuals themselves.
pub fn harmonic_residual_curve(runs: &[Vec<BinStats>], patterns: &[Pattern]) -> Result<Vec<ResidualPoint>> {
    check_runs(runs)?;
    let idx = ["11", "101", "111", "1101"]
        .iter()
        .map(|s| pattern_index(patterns, &s.parse::<Pattern>().expect("literal pattern")))
        .collect::<Result<Vec<usize>>>()?;
    let channels = |b: &BinStats| {
        let mut v: Vec<f64> = idx.iter().map(|&i| b.pattern_odd_time[i]).collect();
        v.push(b.ones_fraction_time);
        v.push(b.events as f64);
        v
    };
    let pick = |which: usize| {
        move |alpha: f64, t: &[f64]| {
            if t[4] <= 0.0 {
                return None;
            }
            let f = |i: usize| t[i] / t[4];
            let (r1, r11) = residuals(alpha, f(0), f(1), f(2), f(3));
            Some((if which == 0 { r1 } else { r11 }, t[5]))
        }
    };
    let r1 = bin_curve(runs, channels, pick(0))?;
    let r11 = bin_curve(runs, channels, pick(1))?;
    Ok(r1.into_iter().zip(r11).map(|(r1, r11)| ResidualPoint { r1, r11 }).collect())
}

/// `∂_α f_{x_n}` at `α = 1` for the block of `n` ones, from the integer
/// recursion `g_{m+1} = 2g_m − g_{m−1}` started at `g_∅ = g_1 = 0` with the
/// extra `+2` entering at the first step.
pub fn g_block(n: usize) -> i64 {
    assert!(n >= 1, "block length must be positive");
    let (mut prev, mut cur) = (0i64, 0i64);
    for m in 1..n {
        let next = 2 * cur - prev + if m == 1 { 2 } else { 0 };
        prev = cur;
        cur = next;
    }
    cur
}
