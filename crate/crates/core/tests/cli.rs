mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::*;
use solspace_core::cli::{self, EXIT_DETECTOR, EXIT_FAILURE, EXIT_OK};
use solspace_core::plot::{confidence_series, sizes_svg};
use solspace_core::report::SolutionSpaceReport;
use solspace_core::{load_edge_list, EdgeListOptions};

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("solspace").chain(args.iter().copied());
    let code = cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

const SIZES_STUB: &str =
    "cat > /dev/null; printf 'a\\t0\\nb\\t0\\nc\\t0\\nd\\t1\\ne\\t1\\nf\\t2\\n'";

#[test]
fn missing_input_fails() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let (code, _, err) = run(&[
        "explore",
        "--input",
        p(&missing),
        "--seed",
        "1",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("nope.csv"), "{err}");
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let (code, _, err) = run(&["explore", "--bogus"]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(!err.is_empty());
}

#[test]
fn help_exits_zero() {
    let (code, out, _) = run(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("explore"));
}

#[test]
fn binary_explores_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_solspace"))
        .args([
            "explore",
            "--input",
            &fixture_path("two_triangles.csv"),
            "--seed",
            "3",
            "--out",
        ])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        status.status.success(),
        "{}",
        String::from_utf8_lossy(&status.stderr)
    );
    let stdout = String::from_utf8_lossy(&status.stdout);
    assert!(stdout.contains("category: single"), "{stdout}");
    for f in [
        "report.json",
        "solutions.csv",
        "trace.csv",
        "checkpoint.json",
    ] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(!dir.path().join("confidence.svg").exists());
}

#[test]
fn random_seed_is_printed() {
    let dir = tempfile::tempdir().unwrap();
    let (code, out, _) = run(&[
        "explore",
        "--input",
        &fixture_path("two_triangles.csv"),
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code, EXIT_OK);
    let seed: u64 = out
        .lines()
        .find_map(|l| l.strip_prefix("seed: "))
        .expect("seed line")
        .parse()
        .unwrap();
    let report = SolutionSpaceReport::from_json(
        &fs::read_to_string(dir.path().join("report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.config.master_seed.0, seed);
}

#[test]
fn solutions_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let karate = fixture_path("karate.csv");
    let (code, _, err) = run(&[
        "explore",
        "--input",
        &karate,
        "--detector",
        "lp",
        "--seed",
        "5",
        "--t-max",
        "60",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let report = SolutionSpaceReport::from_json(
        &fs::read_to_string(dir.path().join("report.json")).unwrap(),
    )
    .unwrap();
    let csv = fs::read_to_string(dir.path().join("solutions.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows.len(), 34 + 1);
    assert!(rows.iter().all(|r| r.split(',').count() == report.ns + 1));
    assert!(rows[0].starts_with("node_label,solution_1"));

    let trace = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().count() as u64, report.t + 1);
    assert_eq!(trace.lines().next(), Some("t,ns,p_stable"));
}

#[test]
fn validate_reports_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let barbell = fixture_path("barbell.csv");
    let g = load_fixture("barbell.csv");
    let write = |name: &str, assign: &dyn Fn(&str) -> usize| {
        let mut text = String::from("node_label,community_id\n");
        for l in g.labels() {
            text.push_str(&format!("{l},{}\n", assign(l)));
        }
        let path = dir.path().join(name);
        fs::write(&path, text).unwrap();
        path
    };
    let first = g.labels()[0].clone();

    let good = write("good.csv", &|l| usize::from(!matches!(l, "a" | "b" | "c")));
    let (code, out, _) = run(&["validate", "--input", &barbell, "--partition", p(&good)]);
    assert_eq!(code, EXIT_OK, "{out}");
    assert!(out.contains("valid"));

    let all_one = write("one.csv", &|_| 0);
    let (code, out, _) = run(&["validate", "--input", &barbell, "--partition", p(&all_one)]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(out.contains("trivial"), "{out}");

    let partial = dir.path().join("partial.csv");
    let text: String = fs::read_to_string(&good)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with(&format!("{first},")))
        .map(|l| format!("{l}\n"))
        .collect();
    fs::write(&partial, text).unwrap();
    let (code, _, err) = run(&["validate", "--input", &barbell, "--partition", p(&partial)]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains(&format!("{first:?}")), "{err}");
}

#[test]
fn plot_from_report_matches_explore_plots() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "explore",
        "--input",
        &fixture_path("karate.csv"),
        "--detector",
        "lp",
        "--seed",
        "2",
        "--t-max",
        "40",
        "--out",
        p(dir.path()),
        "--plots",
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let report = dir.path().join("report.json");
    for kind in ["confidence", "sizes"] {
        let target = dir.path().join(format!("{kind}-again.svg"));
        let (code, out, err) = run(&[
            "plot",
            "--report",
            p(&report),
            "--kind",
            kind,
            "--out",
            p(&target),
        ]);
        assert_eq!(code, EXIT_OK, "{err}");
        assert!(out.contains("wrote"));
        assert_eq!(
            fs::read(&target).unwrap(),
            fs::read(dir.path().join(format!("{kind}.svg"))).unwrap(),
            "{kind}"
        );
    }
}

#[test]
fn external_detector_passthrough() {
    let dir = tempfile::tempdir().unwrap();
    let cmd = format!("sh -c \"{SIZES_STUB}\"");
    let (code, _, err) = run(&[
        "explore",
        "--input",
        &fixture_path("two_triangles.csv"),
        "--detector",
        "external",
        "--cmd",
        &cmd,
        "--seed",
        "1",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let report = SolutionSpaceReport::from_json(
        &fs::read_to_string(dir.path().join("report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.ns, 1);
    assert_eq!(report.t, 39);
    assert_eq!(report.solutions[0].sizes, vec![3, 2, 1]);

    let svg = sizes_svg(&report);
    let marks: Vec<&str> = svg
        .lines()
        .filter(|l| l.contains(r#"class="size""#))
        .map(|l| {
            l.split("data-size=\"")
                .nth(1)
                .unwrap()
                .split('"')
                .next()
                .unwrap()
        })
        .collect();
    assert_eq!(marks, vec!["3", "2", "1"]);
}

#[test]
fn external_detector_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, err) = run(&[
        "explore",
        "--input",
        &fixture_path("two_triangles.csv"),
        "--detector",
        "external",
        "--cmd",
        "sh -c 'echo broken >&2; exit 3'",
        "--seed",
        "1",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code, EXIT_DETECTOR);
    assert!(err.contains("broken"), "{err}");
    let report = SolutionSpaceReport::from_json(
        &fs::read_to_string(dir.path().join("report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report.stop_reason.as_str(), "error");
    assert_eq!(report.t, 0);
}

#[test]
fn external_requires_cmd() {
    let (code, _, err) = run(&[
        "explore",
        "--input",
        &fixture_path("two_triangles.csv"),
        "--detector",
        "external",
        "--seed",
        "1",
    ]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(err.contains("--cmd"), "{err}");
}

#[test]
fn export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("karate.csv");
    let (code, _, err) = run(&[
        "export",
        "--input",
        &fixture_path("karate.csv"),
        "--out",
        p(&out),
    ]);
    assert_eq!(code, EXIT_OK, "{err}");
    let original = load_fixture("karate.csv");
    let opts = EdgeListOptions {
        delimiter: ',',
        header: true,
    };
    let again = load_edge_list(&fs::read_to_string(&out).unwrap(), &opts).unwrap();
    assert_eq!(again.labels(), original.labels());
    assert_eq!(again.edges(), original.edges());
}

#[test]
fn resume_rejects_checkpoint_for_other_graph() {
    let dir = tempfile::tempdir().unwrap();
    let (code, _, _) = run(&[
        "explore",
        "--input",
        &fixture_path("two_triangles.csv"),
        "--seed",
        "1",
        "--t-max",
        "15",
        "--tau",
        "0.999",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code, EXIT_OK);
    let cp = dir.path().join("checkpoint.json");
    let (code, _, err) = run(&[
        "resume",
        "--input",
        &fixture_path("karate.csv"),
        "--checkpoint",
        p(&cp),
        "--t-max",
        "30",
        "--out",
        p(dir.path()),
    ]);
    assert_eq!(code, EXIT_FAILURE);
    assert!(!err.is_empty());
}

#[test]
fn dominant_confidence_lower_edge_crosses_half_once() {
    // 85 draws of solution 0 with the 15 others spread evenly
    let mut log = Vec::new();
    let mut next_other = 1;
    for i in 0..100 {
        if i % 6 == 5 && next_other <= 15 {
            log.push(1 + (next_other - 1) / 5);
            next_other += 1;
        } else {
            log.push(0);
        }
    }
    let x = synthetic_exploration(&log, true);
    let counts: Vec<u64> = x.space.records.iter().map(|r| r.count).collect();
    assert_eq!(counts, vec![85, 5, 5, 5]);
    let report = SolutionSpaceReport::new(&synthetic_graph(), &x).unwrap();
    assert_eq!(report.category.as_str(), "dominant");

    let series = confidence_series(&report).unwrap();
    let top = &series[0];
    assert_eq!(top.rank, 1);
    let lower: Vec<f64> = top.points.iter().map(|p| p.2).collect();
    assert!(lower[0] < 0.5);
    // early interruptions pull it back under once; from t = 8 it holds
    let last_below = lower.iter().rposition(|&l| l <= 0.5).unwrap();
    assert_eq!(top.points[last_below].0, 7);
    assert!(lower[last_below + 1..].iter().all(|&l| l > 0.5));
    // Beta(6, 1) and Beta(86, 16) lower 2.5% points
    assert!((lower[4] - 0.025f64.powf(1.0 / 6.0)).abs() < 1e-9);
    assert!((lower[99] - 0.767).abs() < 1e-3);
    for s in &series {
        assert!(s.points.iter().all(|&(_, p, lo, hi)| lo <= p && p <= hi));
    }
}
