use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use rebvoter::analysis::{beta_scan, critical_scan, fit_linear_fractional, savgol_derivative, ScanSide};
use rebvoter::edge::{edge_speed, run_edge, EdgeBin, Side};
use rebvoter::engine::{render_spacetime, replica_seed, BinStats, InitialState, SweepPlan};
use rebvoter::exact::{
    build_generator, check_duality, check_pushforward, exact_observables, stationary, Sector,
};
use rebvoter::observables::{chi_k_hat, harmonic_hat, harmonic_residual_curve, mu_hat, rho_hat, CurvePoint};
use rebvoter::replica::{merge_runs, replica_seeds, run_replicas};
use rebvoter::{Family, ModelSpec, Pattern, Representation};

use crate::args::*;
use crate::error::{CliError, CliResult};
use crate::manifest::{build_id, Manifest};
use crate::output::{read_columns, real, Outputs, Table};

/// Largest duality residual accepted by `exact --check-duality`.
pub const DUALITY_TOLERANCE: f64 = 1e-12;
const CHECK_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

pub fn family(m: ModelArg) -> Family {
    match m {
        ModelArg::OneSided => Family::OneSided,
        ModelArg::TwoSided => Family::TwoSided,
        ModelArg::Disagreement => Family::Disagreement,
        ModelArg::Swapping => Family::Swapping,
        ModelArg::Mixed => Family::MixedOneSided,
    }
}

pub fn representation(r: RepArg) -> Representation {
    match r {
        RepArg::Spin => Representation::Spin,
        RepArg::Interface => Representation::Interface,
        RepArg::Mirror => Representation::MirrorDual,
    }
}

fn sector(s: SectorArg) -> Sector {
    match s {
        SectorArg::Odd => Sector::Odd,
        SectorArg::Even => Sector::Even,
        SectorArg::Full => Sector::Full,
    }
}

pub fn parse_initial(s: &str) -> CliResult<InitialState> {
    match s {
        "single" => Ok(InitialState::SingleParticle),
        "product-half" => Ok(InitialState::ProductHalf),
        _ => s
            .parse::<usize>()
            .map(InitialState::ParticleCount)
            .map_err(|_| CliError::Usage(format!("--initial must be single, product-half or a count, got {s:?}"))),
    }
}

fn initial_name(i: &InitialState) -> String {
    match i {
        InitialState::SingleParticle => "single".into(),
        InitialState::ProductHalf => "product-half".into(),
        InitialState::ParticleCount(k) => k.to_string(),
    }
}

pub fn parse_patterns(list: &str) -> CliResult<Vec<Pattern>> {
    let mut out: Vec<Pattern> = Vec::new();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let p: Pattern = item.parse()?;
        if out.contains(&p) {
            return Err(CliError::Usage(format!("pattern {p} listed twice")));
        }
        out.push(p);
    }
    if out.is_empty() {
        return Err(CliError::Usage("the pattern list is empty".into()));
    }
    Ok(out)
}

fn parse_reals(list: &str, flag: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| CliError::Usage(format!("{flag}: bad number {s:?}"))))
        .collect()
}

fn endpoints(alpha: Option<f64>, ab: Option<f64>, ae: Option<f64>) -> CliResult<(f64, f64)> {
    match (alpha, ab, ae) {
        (Some(a), _, _) => Ok((a, a)),
        (None, Some(b), Some(e)) => Ok((b, e)),
        _ => Err(CliError::Usage("either --alpha or both --ab and --ae are required".into())),
    }
}

fn direction(plan: &SweepPlan) -> &'static str {
    if plan.alpha_e > plan.alpha_b {
        "increasing"
    } else if plan.alpha_e < plan.alpha_b {
        "decreasing"
    } else {
        "fixed"
    }
}

fn build_plan(spec: ModelSpec, args: &PlanArgs) -> CliResult<SweepPlan> {
    let (ab, ae) = endpoints(args.alpha, args.ab, args.ae)?;
    let spec = spec.with_alpha(ab)?;
    let mut plan = SweepPlan::new(spec, args.sites, args.total_time, args.bins, ab, ae, args.seed)
        .with_max_k(args.max_k)
        .with_initial(parse_initial(&args.initial)?);
    if let Some(b) = args.burn_in {
        plan = plan.with_burn_in(b);
    }
    if args.replicas == 0 {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }
    plan.validate()?;
    Ok(plan)
}

fn echo_plan(m: &mut Manifest, plan: &SweepPlan) {
    m.push("model", plan.spec.family())
        .push("representation", plan.spec.representation())
        .push("N", plan.sites)
        .push("T", real(plan.total_time))
        .push("n", plan.bins)
        .push("alpha_b", real(plan.alpha_b))
        .push("alpha_e", real(plan.alpha_e))
        .push("direction", direction(plan))
        .push("seed", plan.seed)
        .push("burn_in", real(plan.burn_in))
        .push("max_k", plan.max_k)
        .push("initial", initial_name(&plan.initial))
        .push(
            "patterns",
            plan.patterns.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(","),
        );
}

fn finish_manifest(m: &mut Manifest, argv: &[String], started: Instant, outputs: &[PathBuf]) {
    m.push("build", build_id());
    m.push("wall_time_s", format!("{:.3}", started.elapsed().as_secs_f64()));
    for p in outputs {
        m.push("output", p.display());
    }
    for a in argv {
        m.push("arg", a);
    }
}

fn manifest_path(out: &Path, explicit: &Option<PathBuf>) -> PathBuf {
    explicit.clone().unwrap_or_else(|| {
        let mut s = out.as_os_str().to_owned();
        s.push(".manifest");
        PathBuf::from(s)
    })
}

/// Evaluates a curve estimator bin by bin so that every bin keeps its row;
/// `None` marks an empty bin or a dropped point.
fn per_bin<B: Clone, F>(runs: &[Vec<B>], estimate: F) -> CliResult<Vec<Option<CurvePoint>>>
where
    F: Fn(&[Vec<B>]) -> rebvoter::Result<Vec<CurvePoint>>,
{
    let bins = runs.first().map_or(0, Vec::len);
    (0..bins)
        .map(|k| {
            let slice: Vec<Vec<B>> = runs.iter().map(|r| vec![r[k].clone()]).collect();
            Ok(estimate(&slice)?.into_iter().next())
        })
        .collect()
}

fn value(p: &Option<CurvePoint>) -> String {
    p.map_or_else(String::new, |p| real(p.value))
}

fn stderr(p: &Option<CurvePoint>) -> String {
    p.map_or_else(String::new, |p| real(p.stderr))
}

/// CSV for a sweep: one row per bin, replicas pooled.
pub fn sweep_table(plan: &SweepPlan, runs: &[Vec<BinStats>]) -> CliResult<Vec<u8>> {
    let merged = merge_runs(runs);
    let ks: Vec<usize> = (1..=plan.max_k).step_by(2).collect();
    let rho = per_bin(runs, |r| rho_hat(r, plan.sites))?;
    let mu = per_bin(runs, mu_hat)?;
    let chi: Vec<Vec<Option<CurvePoint>>> = ks
        .iter()
        .map(|&k| per_bin(runs, |r| chi_k_hat(r, k)))
        .collect::<CliResult<_>>()?;
    let mut header: Vec<String> = vec!["bin_index".into(), "alpha_mean".into(), "elapsed".into(), "rho_hat".into()];
    header.extend(ks.iter().map(|k| format!("chi_{k}")));
    header.push("mu_hat".into());
    header.push("rho_stderr".into());
    header.extend(ks.iter().map(|k| format!("chi_{k}_stderr")));
    header.push("mu_stderr".into());
    header.push("events".into());
    let mut table = Table::new(&header)?;
    for (i, bin) in merged.iter().enumerate() {
        let mut row = vec![i.to_string(), real(bin.alpha_mean), real(bin.elapsed), value(&rho[i])];
        row.extend(chi.iter().map(|c| value(&c[i])));
        row.push(value(&mu[i]));
        row.push(stderr(&rho[i]));
        row.extend(chi.iter().map(|c| stderr(&c[i])));
        row.push(stderr(&mu[i]));
        row.push(bin.events.to_string());
        table.row(&row)?;
    }
    table.into_bytes()
}

/// CSV of harmonic-function estimates; balance residual columns are added
/// when the patterns `11`, `101`, `111` and `1101` are all present.
pub fn harmonic_table(plan: &SweepPlan, runs: &[Vec<BinStats>]) -> CliResult<Vec<u8>> {
    let merged = merge_runs(runs);
    let pats = &plan.patterns;
    let curves: Vec<Vec<Option<CurvePoint>>> = pats
        .iter()
        .map(|x| per_bin(runs, |r| harmonic_hat(r, pats, x)))
        .collect::<CliResult<_>>()?;
    let residuals = {
        let needed = ["11", "101", "111", "1101"];
        if needed.iter().all(|s| pats.contains(&s.parse().expect("literal pattern"))) {
            let bins = merged.len();
            let mut out = Vec::with_capacity(bins);
            for k in 0..bins {
                let slice: Vec<Vec<BinStats>> = runs.iter().map(|r| vec![r[k].clone()]).collect();
                out.push(harmonic_residual_curve(&slice, pats)?.into_iter().next());
            }
            Some(out)
        } else {
            None
        }
    };
    let mut header: Vec<String> = vec!["bin_index".into(), "alpha_mean".into(), "elapsed".into()];
    header.extend(pats.iter().map(|p| format!("f_{p}")));
    header.extend(pats.iter().map(|p| format!("f_{p}_stderr")));
    if residuals.is_some() {
        header.extend(["r1", "r1_stderr", "r11", "r11_stderr"].map(String::from));
    }
    header.push("events".into());
    let mut table = Table::new(&header)?;
    for (i, bin) in merged.iter().enumerate() {
        let mut row = vec![i.to_string(), real(bin.alpha_mean), real(bin.elapsed)];
        row.extend(curves.iter().map(|c| value(&c[i])));
        row.extend(curves.iter().map(|c| stderr(&c[i])));
        if let Some(res) = &residuals {
            let r1 = res[i].map(|r| r.r1);
            let r11 = res[i].map(|r| r.r11);
            row.extend([value(&r1), stderr(&r1), value(&r11), stderr(&r11)]);
        }
        row.push(bin.events.to_string());
        table.row(&row)?;
    }
    table.into_bytes()
}

/// CSV of edge speeds. Either side may be absent.
pub fn edge_table(left: Option<&[Vec<EdgeBin>]>, right: Option<&[Vec<EdgeBin>]>) -> CliResult<Vec<u8>> {
    let any = left.or(right).ok_or_else(|| CliError::Usage("no edge side selected".into()))?;
    let bins = any.first().map_or(0, Vec::len);
    let speeds = |runs: Option<&[Vec<EdgeBin>]>| -> CliResult<Vec<Option<CurvePoint>>> {
        match runs {
            Some(r) => per_bin(r, edge_speed),
            None => Ok(vec![None; bins]),
        }
    };
    let (vl, vr) = (speeds(left)?, speeds(right)?);
    let header = [
        "bin_index",
        "alpha_mean",
        "elapsed",
        "v_minus",
        "v_plus",
        "v_minus_stderr",
        "v_plus_stderr",
        "events",
        "restarts",
        "dropped",
    ];
    let mut table = Table::new(&header)?;
    for k in 0..bins {
        let all = left.into_iter().chain(right).flat_map(|runs| runs.iter().map(move |r| &r[k]));
        let (events, restarts, dropped) = all.clone().fold((0u64, 0u64, 0u64), |acc, b| {
            (acc.0 + b.events, acc.1 + b.restarts, acc.2 + b.dropped)
        });
        let elapsed = rebvoter::replica::order_free_sum(any.iter().map(|r| r[k].elapsed));
        let alpha = any[0][k].alpha_mean;
        table.row(&[
            k.to_string(),
            real(alpha),
            real(elapsed),
            value(&vl[k]),
            value(&vr[k]),
            stderr(&vl[k]),
            stderr(&vr[k]),
            events.to_string(),
            restarts.to_string(),
            dropped.to_string(),
        ])?;
    }
    table.into_bytes()
}

pub fn sweep(args: &SweepArgs, argv: &[String]) -> CliResult<()> {
    let started = Instant::now();
    let rep = representation(args.rep);
    if rep == Representation::Spin {
        return Err(CliError::Usage("sweep needs a particle representation (interface or mirror)".into()));
    }
    let plan = build_plan(ModelSpec::new(family(args.model), rep, 0.0)?, &args.plan)?;
    let runs = run_replicas(&plan, args.plan.replicas)?;
    let csv = sweep_table(&plan, &runs)?;
    write_run(&plan, args.plan.replicas, "sweep", &csv, &args.out, &args.manifest, argv, started)
}

#[allow(clippy::too_many_arguments)]
fn write_run(
    plan: &SweepPlan,
    replicas: usize,
    command: &str,
    bytes: &[u8],
    out: &Path,
    manifest: &Option<PathBuf>,
    argv: &[String],
    started: Instant,
) -> CliResult<()> {
    let mut outputs = Outputs::new();
    outputs.write(out, bytes)?;
    let mut m = Manifest::new();
    m.push("command", command);
    echo_plan(&mut m, plan);
    m.push("replicas", replicas);
    m.push(
        "replica_seeds",
        replica_seeds(plan.seed, replicas).iter().map(u64::to_string).collect::<Vec<_>>().join(","),
    );
    finish_manifest(&mut m, argv, started, outputs.paths());
    outputs.write(&manifest_path(out, manifest), m.render()?.as_bytes())?;
    outputs.finish();
    Ok(())
}

pub fn harmonic(args: &HarmonicArgs, argv: &[String]) -> CliResult<()> {
    let started = Instant::now();
    let spin = ModelSpec::new(family(args.model), Representation::Spin, 0.0)?;
    let dual = spin
        .cancellative_dual()
        .ok_or_else(|| CliError::Usage(format!("{} has no documented dual particle system", spin.family())))?;
    let patterns = parse_patterns(&args.patterns)?;
    let plan = build_plan(dual, &args.plan)?.with_patterns(patterns);
    plan.validate()?;
    let runs = run_replicas(&plan, args.plan.replicas)?;
    let csv = harmonic_table(&plan, &runs)?;
    write_run(&plan, args.plan.replicas, "harmonic", &csv, &args.out, &args.manifest, argv, started)
}

pub fn edge(args: &EdgeArgs, argv: &[String]) -> CliResult<()> {
    let started = Instant::now();
    let (ab, ae) = endpoints(args.alpha, args.ab, args.ae)?;
    let spec = ModelSpec::new(family(args.model), Representation::Interface, ab)?;
    rebvoter::models::MenuTable::for_spec(&spec)?;
    let mut plan = SweepPlan::new(spec, args.width, args.total_time, args.bins, ab, ae, args.seed);
    if let Some(b) = args.burn_in {
        plan = plan.with_burn_in(b);
    }
    plan.validate()?;
    if args.replicas == 0 {
        return Err(CliError::Usage("--replicas must be at least 1".into()));
    }
    let r = args.replicas as u64;
    let run_side = |side: Side, offset: u64| -> CliResult<Vec<Vec<EdgeBin>>> {
        (0..r)
            .into_par_iter()
            .map(|i| run_edge(&plan.clone().with_seed(replica_seed(args.seed, offset + i)), side))
            .collect::<rebvoter::Result<Vec<_>>>()
            .map_err(CliError::from)
    };
    let left = matches!(args.side, SideArg::Left | SideArg::Both)
        .then(|| run_side(Side::Left, 0))
        .transpose()?;
    let right = matches!(args.side, SideArg::Right | SideArg::Both)
        .then(|| run_side(Side::Right, r))
        .transpose()?;
    let csv = edge_table(left.as_deref(), right.as_deref())?;

    let mut outputs = Outputs::new();
    outputs.write(&args.out, &csv)?;
    let mut m = Manifest::new();
    m.push("command", "edge");
    echo_plan(&mut m, &plan);
    m.push("W", args.width);
    m.push("side", format!("{:?}", args.side).to_lowercase());
    m.push("replicas", args.replicas);
    let seeds = |offset: u64| (0..r).map(|i| replica_seed(args.seed, offset + i).to_string()).collect::<Vec<_>>().join(",");
    m.push("left_seeds", seeds(0));
    m.push("right_seeds", seeds(r));
    finish_manifest(&mut m, argv, started, outputs.paths());
    outputs.write(&manifest_path(&args.out, &args.manifest), m.render()?.as_bytes())?;
    outputs.finish();
    Ok(())
}

const DUAL_FAMILIES: [Family; 4] = [Family::OneSided, Family::TwoSided, Family::Disagreement, Family::Swapping];

pub fn exact(args: &ExactArgs) -> CliResult<()> {
    let alphas = args.alpha.map_or(CHECK_GRID.to_vec(), |a| vec![a]);
    if args.check_duality {
        let families = args.model.map_or(DUAL_FAMILIES.to_vec(), |m| vec![family(m)]);
        let mut worst: f64 = 0.0;
        for f in families {
            for &a in &alphas {
                let x = ModelSpec::new(f, Representation::Spin, a)?;
                let y = x
                    .cancellative_dual()
                    .ok_or_else(|| CliError::Usage(format!("{f} has no documented dual")))?;
                let r = check_duality(&x, &y, args.sites)?;
                println!("duality {x} vs {y} N={} residual={r:e}", args.sites);
                worst = worst.max(r);
            }
        }
        println!("max_residual={worst:e}");
        return if worst < DUALITY_TOLERANCE {
            Ok(())
        } else {
            Err(CliError::CheckFailed(format!("duality residual {worst:e} is not below {DUALITY_TOLERANCE:e}")))
        };
    }
    if args.check_pushforward {
        let families = args.model.map_or(Family::ALL.to_vec(), |m| vec![family(m)]);
        let mut worst: f64 = 0.0;
        for f in families {
            for &a in &alphas {
                let x = ModelSpec::new(f, Representation::Spin, a)?;
                let r = check_pushforward(&x, args.sites)?;
                println!("pushforward {x} N={} residual={r:e}", args.sites);
                worst = worst.max(r);
            }
        }
        println!("max_residual={worst:e}");
        return if worst < DUALITY_TOLERANCE {
            Ok(())
        } else {
            Err(CliError::CheckFailed(format!("pushforward residual {worst:e} is not below {DUALITY_TOLERANCE:e}")))
        };
    }
    let model = args
        .model
        .ok_or_else(|| CliError::Usage("--model is required unless a check flag is given".into()))?;
    let alpha = args
        .alpha
        .ok_or_else(|| CliError::Usage("--alpha is required for a stationary solve".into()))?;
    let spec = ModelSpec::new(family(model), representation(args.rep), alpha)?;
    let patterns = args.patterns.as_deref().map(parse_patterns).transpose()?.unwrap_or_default();
    let system = build_generator(&spec, args.sites, sector(args.sector))?;
    let law = stationary(&system)?;
    let obs = exact_observables(&law, &patterns)?;
    println!("model={}", spec.family());
    println!("representation={}", spec.representation());
    println!("N={}", args.sites);
    println!("alpha={}", real(alpha));
    println!("sector={}", system.sector());
    println!("states={}", system.len());
    println!("residual={:e}", law.residual);
    println!("mean_ones={}", real(obs.mean_ones));
    if spec.representation() != Representation::Spin {
        println!("rho={}", real(2.0 * obs.mean_ones / args.sites as f64));
        println!("chi_1={}", real(obs.count_law.get(1).copied().unwrap_or(0.0)));
    }
    for (p, f) in &obs.harmonic {
        println!("f_{p}={}", real(*f));
    }
    if let Some(out) = &args.out {
        let mut table = Table::new(&["k", "probability"])?;
        for (k, p) in obs.count_law.iter().enumerate() {
            table.row(&[k.to_string(), real(*p)])?;
        }
        let mut outputs = Outputs::new();
        outputs.write(out, &table.into_bytes()?)?;
        outputs.finish();
    }
    Ok(())
}

pub fn fit(args: &FitArgs) -> CliResult<()> {
    let mut points = read_columns(&args.input, &args.alpha_col, &args.value_col)?;
    points.retain(|&(a, _)| args.from.is_none_or(|f| a >= f) && args.to.is_none_or(|t| a <= t));
    if points.is_empty() {
        return Err(CliError::Usage("no data points left after filtering".into()));
    }
    let mut outputs = Outputs::new();
    match args.model {
        FitModel::Linfrac => {
            let fit = fit_linear_fractional(&points)?;
            println!("c1={}", real(fit.c1));
            println!("c2={}", real(fit.c2));
            println!("alpha_c={}", real(fit.alpha_c));
            println!("alpha_c_spread={}", real(fit.alpha_c_spread()));
            println!("residual_rms={}", real(fit.residual_rms));
            println!("degenerate={}", fit.degenerate);
        }
        FitModel::Scan => {
            let lo = args.grid_from.unwrap_or_else(|| points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min));
            let hi = args.grid_to.unwrap_or_else(|| points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max));
            if !(args.grid_step > 0.0) || !(hi >= lo) {
                return Err(CliError::Usage("the scan grid is empty".into()));
            }
            let steps = ((hi - lo) / args.grid_step + 1e-9).floor() as usize;
            let grid: Vec<f64> = (0..=steps).map(|i| lo + i as f64 * args.grid_step).collect();
            let side = match args.side {
                ScanSideArg::Below => ScanSide::Below,
                ScanSideArg::Above => ScanSide::Above,
            };
            let scan = critical_scan(&points, &grid, side);
            match (scan.best, scan.bracket) {
                (Some(b), Some((l, h))) => {
                    println!("alpha_c={}", real(b));
                    println!("bracket={},{}", real(l), real(h));
                }
                _ => return Err(CliError::Runtime("no grid value had enough usable points".into())),
            }
            if let Some(out) = &args.out {
                let mut table = Table::new(&["alpha0", "score"])?;
                for (a0, s) in &scan.scores {
                    table.row(&[real(*a0), s.map_or_else(String::new, real)])?;
                }
                outputs.write(out, &table.into_bytes()?)?;
            }
        }
        FitModel::Beta => {
            let alpha_c = args
                .alpha_c
                .ok_or_else(|| CliError::Usage("--alpha-c is required for the beta scan".into()))?;
            let betas = parse_reals(&args.betas, "--betas")?;
            let curves = beta_scan(&points, alpha_c, &betas);
            for c in &curves {
                println!("beta={} end_slope={}", real(c.beta), real(c.end_slope));
            }
            if let Some(out) = &args.out {
                let mut table = Table::new(&["beta", "minus_log_distance", "transformed"])?;
                for c in &curves {
                    for (x, y) in &c.curve {
                        table.row(&[real(c.beta), real(*x), real(*y)])?;
                    }
                }
                outputs.write(out, &table.into_bytes()?)?;
            }
        }
        FitModel::Savgol => {
            points.sort_by(|a, b| a.0.total_cmp(&b.0));
            let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
            let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
            let d = savgol_derivative(&xs, &ys, args.window, args.degree)?;
            let mut table = Table::new(&["alpha", "value", "derivative"])?;
            for ((x, y), dy) in xs.iter().zip(&ys).zip(&d) {
                table.row(&[real(*x), real(*y), real(*dy)])?;
            }
            let bytes = table.into_bytes()?;
            match &args.out {
                Some(out) => outputs.write(out, &bytes)?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
        }
    }
    outputs.finish();
    Ok(())
}

pub fn bitmap(args: &BitmapArgs, argv: &[String]) -> CliResult<()> {
    let started = Instant::now();
    let (ab, ae) = endpoints(args.alpha, args.ab, args.ae)?;
    let spec = ModelSpec::new(family(args.model), representation(args.rep), ab)?;
    let sites = args.sites.unwrap_or(args.width);
    let horizon = if args.duration > 0.0 { args.duration } else { 1.0 };
    let plan = SweepPlan::new(spec, sites, horizon, 1, ab, ae, args.seed).with_initial(parse_initial(&args.initial)?);
    plan.validate()?;
    let bitmap = render_spacetime(&plan, args.width, args.duration, args.sample_dt)?;
    let mut outputs = Outputs::new();
    outputs.write(&args.out, &bitmap.to_pgm())?;
    let mut m = Manifest::new();
    m.push("command", "bitmap");
    echo_plan(&mut m, &plan);
    m.push("W", args.width);
    m.push("duration", real(args.duration));
    m.push("sample_dt", real(args.sample_dt));
    m.push("rows", bitmap.height());
    finish_manifest(&mut m, argv, started, outputs.paths());
    outputs.write(&manifest_path(&args.out, &args.manifest), m.render()?.as_bytes())?;
    outputs.finish();
    Ok(())
}
