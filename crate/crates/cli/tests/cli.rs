use std::fs;
use std::path::PathBuf;

use rebvoter::engine::SweepPlan;
use rebvoter::replica::run_replicas;
use rebvoter::{Family, ModelSpec, Representation};
use rebvoter_cli::commands::{edge_table, sweep_table};
use rebvoter_cli::error::{EXIT_CHECK, EXIT_OK, EXIT_RUNTIME, EXIT_USAGE};
use rebvoter_cli::manifest::Manifest;
use rebvoter_cli::run;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rebvoter-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn rv(args: &[&str]) -> i32 {
    run(std::iter::once("rebvoter").chain(args.iter().copied()))
}

fn s(p: &std::path::Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(rv(&["--help"]), EXIT_OK);
    assert_eq!(rv(&["--version"]), EXIT_OK);
    assert_eq!(rv(&["sweep", "--help"]), EXIT_OK);
}

#[test]
fn usage_errors_exit_one() {
    let dir = scratch("usage");
    let out = dir.join("x.csv");
    let o = s(&out);
    assert_eq!(rv(&[]), EXIT_USAGE);
    assert_eq!(rv(&["sweep", "--model", "one-sided"]), EXIT_USAGE);
    assert_eq!(rv(&["sweep", "--model", "nope", "--N", "8", "--T", "1", "--alpha", "0.5", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["sweep", "--model", "one-sided", "--rep", "spin", "--N", "8", "--T", "1", "--alpha", "0.5", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["sweep", "--model", "one-sided", "--N", "8", "--T", "1", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["sweep", "--model", "one-sided", "--N", "8", "--T", "1", "--alpha", "1.5", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["sweep", "--model", "one-sided", "--N", "8", "--T", "1", "--alpha", "0.5", "--initial", "4", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["--threads", "0", "sweep", "--model", "one-sided", "--N", "8", "--T", "1", "--alpha", "0.5", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["harmonic", "--model", "mixed", "--N", "8", "--T", "1", "--alpha", "0.5", "--patterns", "1", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["harmonic", "--model", "one-sided", "--N", "8", "--T", "1", "--alpha", "0.5", "--patterns", "", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["harmonic", "--model", "one-sided", "--N", "8", "--T", "1", "--alpha", "0.5", "--patterns", "1,1", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["edge", "--model", "disagreement", "--T", "1", "--alpha", "0.5", "--out", o]), EXIT_USAGE);
    assert_eq!(rv(&["exact", "--N", "6"]), EXIT_USAGE);
    assert_eq!(rv(&["exact", "--N", "30", "--model", "two-sided", "--alpha", "0.5"]), EXIT_USAGE);
    assert_eq!(rv(&["fit", "--input", o, "--model", "linfrac"]), EXIT_RUNTIME);
    assert!(!out.exists());
}

#[test]
fn duality_check_passes_and_reports_through_the_exit_code() {
    assert_eq!(rv(&["exact", "--check-duality", "--N", "5"]), EXIT_OK);
    assert_eq!(rv(&["exact", "--check-pushforward", "--N", "5", "--model", "mixed"]), EXIT_OK);
    assert_ne!(EXIT_CHECK, EXIT_OK);
}

#[test]
fn rerun_reproduces_the_outputs_byte_for_byte() {
    let dir = scratch("rerun");
    let out = dir.join("sweep.csv");
    let args = [
        "sweep", "--model", "two-sided", "--N", "64", "--T", "500", "--n", "5", "--ab", "0.7", "--ae", "0.3",
        "--replicas", "3", "--seed", "9", "--out", s(&out),
    ];
    assert_eq!(rv(&args), EXIT_OK);
    let first = fs::read(&out).unwrap();
    let manifest_path = dir.join("sweep.csv.manifest");
    let manifest = Manifest::read(&manifest_path).unwrap();
    assert_eq!(manifest.get("direction"), Some("decreasing"));
    assert_eq!(manifest.get("replica_seeds").unwrap().split(',').count(), 3);
    assert_eq!(rv(&["rerun", "--manifest", s(&manifest_path)]), EXIT_OK);
    assert_eq!(fs::read(&out).unwrap(), first);

    let mut threaded = vec!["--threads", "1"];
    threaded.extend_from_slice(&args);
    assert_eq!(rv(&threaded), EXIT_OK);
    assert_eq!(fs::read(&out).unwrap(), first);

    let text = String::from_utf8(first).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text.starts_with("bin_index,alpha_mean,elapsed,rho_hat,chi_1,"));
}

#[test]
fn replica_order_does_not_change_the_table() {
    let spec = ModelSpec::new(Family::OneSided, Representation::Interface, 0.4).unwrap();
    let plan = SweepPlan::new(spec, 48, 400.0, 4, 0.4, 0.6, 5);
    let runs = run_replicas(&plan, 4).unwrap();
    let forward = sweep_table(&plan, &runs).unwrap();
    let mut reversed = runs.clone();
    reversed.reverse();
    assert_eq!(sweep_table(&plan, &reversed).unwrap(), forward);
    reversed.swap(0, 2);
    assert_eq!(sweep_table(&plan, &reversed).unwrap(), forward);
}

#[test]
fn every_bin_has_a_full_row() {
    let spec = ModelSpec::new(Family::OneSided, Representation::Interface, 0.5).unwrap();
    let plan = SweepPlan::new(spec, 32, 100.0, 10, 0.5, 0.5, 1).with_burn_in(50.0).with_max_k(5);
    let runs = run_replicas(&plan, 1).unwrap();
    let text = String::from_utf8(sweep_table(&plan, &runs).unwrap()).unwrap();
    let mut lines = text.lines();
    let width = lines.next().unwrap().split(',').count();
    assert_eq!(width, 4 + 3 + 1 + 1 + 3 + 1 + 1);
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), width);
        assert_eq!(fields[0], i.to_string());
        assert_eq!(fields[2].parse::<f64>().unwrap(), 5.0);
    }
    assert!(edge_table(None, None).is_err());
}

#[test]
fn failed_runs_leave_no_files_behind() {
    let dir = scratch("cleanup");
    let out = dir.join("sweep.csv");
    let bad_manifest = dir.join("missing").join("m.txt");
    let code = rv(&[
        "sweep", "--model", "one-sided", "--N", "16", "--T", "50", "--alpha", "0.5", "--out", s(&out),
        "--manifest", s(&bad_manifest),
    ]);
    assert_eq!(code, EXIT_RUNTIME);
    assert!(!out.exists());
    assert_eq!(fs::read_dir(&dir).unwrap().count(), 0);
}

#[test]
fn every_command_writes_its_files() {
    let dir = scratch("all");
    let h = dir.join("h.csv");
    assert_eq!(
        rv(&["harmonic", "--model", "one-sided", "--N", "64", "--T", "300", "--alpha", "0.5", "--patterns", "1,11,101,111,1101", "--out", s(&h)]),
        EXIT_OK
    );
    let head = fs::read_to_string(&h).unwrap();
    assert!(head.lines().next().unwrap().contains("r1,r1_stderr,r11,r11_stderr"));

    let e = dir.join("e.csv");
    assert_eq!(rv(&["edge", "--model", "two-sided", "--W", "128", "--T", "50", "--alpha", "0.5", "--side", "left", "--out", s(&e)]), EXIT_OK);
    let row = fs::read_to_string(&e).unwrap().lines().nth(1).unwrap().to_string();
    let fields: Vec<&str> = row.split(',').collect();
    assert!(!fields[3].is_empty() && fields[4].is_empty());

    let b = dir.join("b.pgm");
    assert_eq!(rv(&["bitmap", "--model", "one-sided", "--W", "40", "--T", "20", "--alpha", "0.3", "--out", s(&b)]), EXIT_OK);
    assert!(fs::read(&b).unwrap().starts_with(b"P5\n40 21\n255\n"));

    let x = dir.join("law.csv");
    assert_eq!(rv(&["exact", "--model", "one-sided", "--N", "7", "--alpha", "0.5", "--out", s(&x)]), EXIT_OK);
    let law: f64 = fs::read_to_string(&x)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse::<f64>().unwrap())
        .sum();
    assert!((law - 1.0).abs() < 1e-9);

    let sw = dir.join("s.csv");
    assert_eq!(rv(&["sweep", "--model", "one-sided", "--N", "64", "--T", "4000", "--n", "20", "--ab", "0.2", "--ae", "0.8", "--out", s(&sw)]), EXIT_OK);
    assert_eq!(rv(&["fit", "--input", s(&sw), "--model", "linfrac", "--to", "0.5"]), EXIT_OK);
    let d = dir.join("d.csv");
    assert_eq!(rv(&["fit", "--input", s(&sw), "--model", "savgol", "--out", s(&d)]), EXIT_OK);
    assert_eq!(fs::read_to_string(&d).unwrap().lines().count(), 21);
    assert_eq!(rv(&["fit", "--input", s(&sw), "--model", "beta"]), EXIT_USAGE);
    assert_eq!(rv(&["fit", "--input", s(&sw), "--model", "beta", "--alpha-c", "0.9", "--to", "0.85"]), EXIT_OK);
}
