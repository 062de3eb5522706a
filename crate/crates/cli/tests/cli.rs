//! Runs the `hclab` binary on the shipped configs and on broken ones, and
//! checks exit codes, output files and reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn hclab(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hclab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run(cmd: &str, config: &str, out: &Path) -> Output {
    hclab(&[cmd], &configs().join(config), out)
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn lipschitz_schedule_writes_csv_and_report() {
    let tmp = TempDir::new().unwrap();
    let o = run("schedule", "schedule_lipschitz.json", tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = fs::read_to_string(tmp.path().join("schedule.csv")).unwrap();
    assert!(csv.starts_with("piece,"));
    assert_eq!(csv.lines().count(), 4551);
    let r = report(tmp.path());
    assert_eq!(r["schema"], "hclab/1");
    assert_eq!(r["status"], "pass");
    assert_eq!(r["command"], "schedule");
}

#[test]
fn sequence_schedule_checks_the_growth_bound() {
    let tmp = TempDir::new().unwrap();
    let o = run("schedule", "schedule_sequence.json", tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["result"]["bound_ok"], true);
    let rows = fs::read_to_string(tmp.path().join("sequence.csv")).unwrap();
    assert_eq!(rows.lines().next(), Some("k,address,n"));
    assert_eq!(rows.lines().count(), 257);
}

#[test]
fn violated_contraction_is_a_config_error_naming_the_precondition() {
    let tmp = TempDir::new().unwrap();
    let o = run("schedule", "schedule_divergent.json", tmp.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("rho^(1/alpha)*r < 1"), "{}", stderr(&o));
    assert_eq!(report(tmp.path())["error"]["kind"], "config");
}

#[test]
fn oversized_recursion_is_a_capacity_error() {
    let tmp = TempDir::new().unwrap();
    let o = run("schedule", "schedule_overflow.json", tmp.path());
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    assert_eq!(report(tmp.path())["status"], "error");
}

#[test]
fn unknown_fields_are_rejected_before_any_work() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        &tmp,
        "bad.json",
        r#"{ "m": 3, "alpha": 0.4, "spacing": 10, "colour": "red" }"#,
    );
    let out = tmp.path().join("out");
    let o = hclab(&["orderings"], &cfg, &out);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("colour"));
    assert!(!out.exists());
}

#[test]
fn missing_config_and_unwritable_output_are_io_errors() {
    let tmp = TempDir::new().unwrap();
    let o = hclab(&["cover"], &tmp.path().join("absent.json"), tmp.path());
    assert_eq!(code(&o), 4);
    let blocker = write_config(&tmp, "file", "");
    let o = hclab(
        &["orderings"],
        &configs().join("orderings_m5.json"),
        &blocker.join("sub"),
    );
    assert_eq!(code(&o), 4);
}

#[test]
fn verify_reads_a_written_schedule() {
    let tmp = TempDir::new().unwrap();
    let sched = tmp.path().join("sched");
    assert_eq!(code(&run("schedule", "schedule_lipschitz.json", &sched)), 0);
    let body = format!(
        r#"{{ "schedule_file": "{}", "checks": [ {{ "criterion": "caracstandard", "tau": 2.0, "spacing": 10 }} ] }}"#,
        sched.join("schedule.json").display()
    );
    let cfg = write_config(&tmp, "verify.json", &body);
    let out = tmp.path().join("verify");
    let o = hclab(&["verify"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let clauses = fs::read_to_string(out.join("clauses.csv")).unwrap();
    assert_eq!(
        clauses.lines().next(),
        Some("schedule,criterion,clause,status,margin")
    );
    assert_eq!(clauses.lines().filter(|l| l.contains(",pass,")).count(), 3);

    // a tighter spacing than the schedule was built for fails its clause
    let strict = body.replace("\"spacing\": 10", "\"spacing\": 100");
    let cfg = write_config(&tmp, "strict.json", &strict);
    let o = hclab(&["verify"], &cfg, &tmp.path().join("strict"));
    assert_eq!(code(&o), 1);
}

#[test]
fn runs_are_byte_identical_for_the_same_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = configs().join("verify_sweep.json");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        assert_eq!(
            code(&hclab(
                &["verify", "--seed", "7", "--threads", "2"],
                &cfg,
                out
            )),
            0
        );
    }
    for f in ["report.json", "clauses.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    let (c, d) = (tmp.path().join("c"), tmp.path().join("d"));
    assert_eq!(code(&run("construct", "construct_segment.json", &c)), 0);
    assert_eq!(
        code(&hclab(
            &["construct", "--threads", "1"],
            &configs().join("construct_segment.json"),
            &d
        )),
        0
    );
    for f in ["report.json", "candidate.json", "rounds.csv", "orbits.csv"] {
        assert_eq!(
            fs::read(c.join(f)).unwrap(),
            fs::read(d.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn construct_verifies_orbits_on_a_short_segment() {
    let tmp = TempDir::new().unwrap();
    let o = run("construct", "construct_segment.json", tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = report(tmp.path());
    assert_eq!(r["result"]["rounds"], 2);
    assert!(tmp.path().join("candidate.json").exists());
}

#[test]
fn unreachable_epsilon_is_a_criterion_failure() {
    let tmp = TempDir::new().unwrap();
    let body = fs::read_to_string(configs().join("construct_segment.json"))
        .unwrap()
        .replace("\"eps\": 0.1", "\"eps\": 1e-9");
    let cfg = write_config(&tmp, "tight.json", &body);
    let o = hclab(&["construct"], &cfg, &tmp.path().join("out"));
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert!(stderr(&o).contains("round 1"));
}

#[test]
fn separation_probe_reports_unmet_preconditions_as_not_applicable() {
    let tmp = TempDir::new().unwrap();
    let o = run("probe", "probe_separation.json", tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = fs::read_to_string(tmp.path().join("separation.csv")).unwrap();
    assert!(rows.contains("not-applicable"));
    assert!(rows.lines().nth(1).unwrap().contains(",pass,"));
}

#[test]
fn gauge_probe_classifies_each_case() {
    let tmp = TempDir::new().unwrap();
    assert_eq!(code(&run("probe", "probe_gauge.json", tmp.path())), 0);
    let rows = fs::read_to_string(tmp.path().join("gauge.csv")).unwrap();
    let classes: Vec<&str> = rows
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(classes, ["convergent", "divergent", "convergent"]);
}

#[test]
fn orderings_at_depth_five_print_a_ratio_table() {
    let tmp = TempDir::new().unwrap();
    let o = run("orderings", "orderings_m5.json", tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("vs best"));
    let csv = fs::read_to_string(tmp.path().join("orderings.csv")).unwrap();
    assert_eq!(
        csv.lines().next(),
        Some("ordering,m,n_final,threshold,ratio")
    );
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn comb_cover_passes_its_checks() {
    let tmp = TempDir::new().unwrap();
    let o = run("cover", "cover_comb.json", tmp.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let cells = fs::read_to_string(tmp.path().join("cover.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 1024);
    assert!(
        report(tmp.path())["result"]["box_dimension"]["slope"]
            .as_f64()
            .unwrap()
            > 1.5
    );
}

#[test]
fn curve_vertices_can_come_from_a_sample_file() {
    let tmp = TempDir::new().unwrap();
    fs::write(
        tmp.path().join("curve.csv"),
        "1.0, 2.0\n1.5, 1.5\n2.0, 1.0\n",
    )
    .unwrap();
    let body = r#"{
      "method": "lipschitz",
      "set": { "kind": { "kind": "lipschitz_curve", "map": { "type": "segment", "start": [0.0, 0.0], "end": [1.0, 1.0] } },
               "sample_file": "curve.csv" },
      "params": { "tau": 2.0, "spacing": 10, "step": 18, "offset": 0, "max_cells": 1000000 }
    }"#;
    let cfg = write_config(&tmp, "curve.json", body);
    let out = tmp.path().join("out");
    let o = hclab(&["schedule"], &cfg, &out);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let json: Value =
        serde_json::from_str(&fs::read_to_string(out.join("schedule.json")).unwrap()).unwrap();
    assert_eq!(json[0]["entries"][0]["anchor"][1], 2.0);
}
