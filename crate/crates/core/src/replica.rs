//! Independent replicas of a plan and their merge.
//!
//! Replica `r` runs the plan with seed [`replica_seed`]`(seed, r)`. Merged
//! sums are taken over values sorted by `f64::total_cmp`, so the result does
//! not depend on the order in which replicas are supplied.

use rayon::prelude::*;

use crate::engine::{replica_seed, run_sweep, BinStats, SweepPlan};
use crate::error::{Error, Result};

/// Seeds used for replicas `0..count`.
pub fn replica_seeds(seed: u64, count: usize) -> Vec<u64> {
    (0..count as u64).map(|r| replica_seed(seed, r)).collect()
}

/// Runs `count` replicas in parallel; output is indexed by replica.
pub fn run_replicas(plan: &SweepPlan, count: usize) -> Result<Vec<Vec<BinStats>>> {
    if count == 0 {
        return Err(Error::InvalidPlan("at least one replica is required".into()));
    }
    replica_seeds(plan.seed, count)
        .into_par_iter()
        .map(|s| run_sweep(&plan.clone().with_seed(s)))
        .collect()
}

/// Sum that does not depend on the order of its inputs.
pub fn order_free_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_unstable_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Field-wise sum of one bin across replicas; `alpha_mean` is the
/// elapsed-weighted mean.
pub fn merge_bin<'a, I>(bins: I) -> BinStats
where
    I: IntoIterator<Item = &'a BinStats>,
    I::IntoIter: Clone,
{
    let it = bins.into_iter();
    let first = it.clone().next().expect("at least one bin to merge");
    let mut out = BinStats::empty(first.max_k(), first.pattern_odd_time.len());
    out.elapsed = order_free_sum(it.clone().map(|b| b.elapsed));
    out.weighted_ones = order_free_sum(it.clone().map(|b| b.weighted_ones));
    out.ones_fraction_time = order_free_sum(it.clone().map(|b| b.ones_fraction_time));
    out.events = it.clone().map(|b| b.events).sum();
    for k in 0..out.time_at_k.len() {
        out.time_at_k[k] = order_free_sum(it.clone().map(|b| b.time_at_k[k]));
    }
    for p in 0..out.pattern_odd_time.len() {
        out.pattern_odd_time[p] = order_free_sum(it.clone().map(|b| b.pattern_odd_time[p]));
    }
    out.alpha_mean = if out.elapsed > 0.0 {
        order_free_sum(it.clone().map(|b| b.alpha_mean * b.elapsed)) / out.elapsed
    } else {
        order_free_sum(it.clone().map(|b| b.alpha_mean)) / it.count() as f64
    };
    out
}

/// Merges replica runs bin by bin.
pub fn merge_runs(runs: &[Vec<BinStats>]) -> Vec<BinStats> {
    merge_selected(runs, None)
}

/// Merge of all runs except `skip` (the leave-one-out sample).
pub fn merge_without(runs: &[Vec<BinStats>], skip: usize) -> Vec<BinStats> {
    merge_selected(runs, Some(skip))
}

fn merge_selected(runs: &[Vec<BinStats>], skip: Option<usize>) -> Vec<BinStats> {
    let Some(first) = runs.first() else {
        return Vec::new();
    };
    assert!(runs.iter().all(|r| r.len() == first.len()), "replicas disagree on bin count");
    (0..first.len())
        .map(|k| {
            let picked: Vec<&BinStats> = runs
                .iter()
                .enumerate()
                .filter(|(r, _)| Some(*r) != skip)
                .map(|(_, run)| &run[k])
                .collect();
            merge_bin(picked.iter().copied())
        })
        .collect()
}
