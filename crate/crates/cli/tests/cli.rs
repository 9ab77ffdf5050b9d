use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hde_backend::AuditRecord;
use serde_json::Value;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn hde(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hde")).args(args).output().unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn audit(dir: &Path) -> Vec<AuditRecord> {
    fs::read_to_string(dir.join("audit.jsonl"))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

/// A plan file in `dir` whose config paths point at the fixtures.
fn write_plan(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("plan.toml");
    let body = body.replace("@", path(&fixtures()));
    fs::write(&p, body).unwrap();
    p
}

#[test]
fn debate_writes_scored_run_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = hde(&["debate", "--config", path(&fixtures().join("configs/hetero.toml")), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("SysAR 0.50  ArCo 1.00"));
    let metrics: Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(metrics["injection_turn"], 4);
    assert_eq!(metrics["report"]["resilience"]["sys_ar"], 0.5);
    assert_eq!(metrics["report"]["resilience"]["observation_turns"], serde_json::json!([5, 6, 7, 8, 9, 10]));
    assert_eq!(fs::read_to_string(out.join("transcript.jsonl")).unwrap().lines().count(), 27);

    let o = hde(&["report", path(&out)]);
    assert!(o.status.success());
    assert!(String::from_utf8_lossy(&o.stdout).contains("SysAR 0.50  ArCo 1.00"));
}

#[test]
fn missing_config_is_a_usage_error() {
    assert_eq!(hde(&["debate", "--config", "/does/not/exist.toml"]).status.code(), Some(2));
    assert_eq!(hde(&["debate"]).status.code(), Some(2));
    assert_eq!(hde(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn exhausted_script_is_a_runtime_error_with_partial_output() {
    let tmp = tempfile::tempdir().unwrap();
    let script = tmp.path().join("short.json");
    fs::write(&script, r#"{"entries": [{"key": null, "response": "only one line"}]}"#).unwrap();
    let config = tmp.path().join("short.toml");
    fs::write(
        &config,
        format!(
            "preset = \"HETERO_RESILIENCE\"\nidentities_dir = \"{0}/identities\"\nweakness_dir = \"{0}/weakness\"\n\
             corpus_manifest = \"{0}/corpora/manifest.toml\"\n[backend]\nscript_path = \"{1}\"\n",
            path(&fixtures()),
            path(&script)
        ),
    )
    .unwrap();
    let out = tmp.path().join("run");
    let o = hde(&["debate", "--config", path(&config), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_to_string(out.join("transcript.jsonl")).unwrap().lines().count(), 1);
    assert!(!out.join("metrics.json").exists());
}

#[test]
fn no_perturbation_clears_the_schedule() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let o = hde(&[
        "debate",
        "--config",
        path(&fixtures().join("configs/hetero.toml")),
        "--no-perturbation",
        "--out",
        path(&out),
    ]);
    assert!(o.status.success());
    let metrics: Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
    assert!(metrics["injection_turn"].is_null());
    assert!(metrics["report"]["resilience"].is_null());
    let transcript = fs::read_to_string(out.join("transcript.jsonl")).unwrap();
    assert_eq!(transcript.lines().count(), 26);
}

#[test]
fn recorded_script_replays_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let script = tmp.path().join("recorded.json");
    let first = tmp.path().join("first");
    let config = fixtures().join("configs/homo.toml");
    let o = hde(&["debate", "--config", path(&config), "--out", path(&first), "--record-script", path(&script)]);
    assert!(o.status.success());

    let replay = tmp.path().join("replay.toml");
    let body = fs::read_to_string(&config)
        .unwrap()
        .replace("../", &format!("{}/", path(&fixtures())))
        .replace(&format!("{}/scripts/factorial/homo_p1.json", path(&fixtures())), path(&script));
    fs::write(&replay, body).unwrap();
    let second = tmp.path().join("second");
    assert!(hde(&["debate", "--config", path(&replay), "--out", path(&second)]).status.success());
    assert_eq!(
        fs::read(first.join("transcript.jsonl")).unwrap(),
        fs::read(second.join("transcript.jsonl")).unwrap()
    );
}

#[test]
fn duplicate_run_ids_are_rejected_before_running() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = write_plan(
        tmp.path(),
        r#"name = "dup"
[[run]]
run_id = "x"
config = "@/configs/hetero.toml"
[[run]]
run_id = "x"
config = "@/configs/homo.toml"
"#,
    );
    let out = tmp.path().join("out");
    let o = hde(&["factorial", path(&plan), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("duplicate run_id `x`"));
    assert!(!out.exists());
}

#[test]
fn missing_script_fails_plan_validation() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = write_plan(
        tmp.path(),
        r#"name = "bad"
[[run]]
run_id = "x"
config = "@/configs/hetero.toml"
script = "nowhere.json"
"#,
    );
    assert_eq!(hde(&["factorial", path(&plan)]).status.code(), Some(2));
}

#[test]
fn one_run_plan_gives_means_of_one() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = write_plan(
        tmp.path(),
        r#"name = "single"
[[run]]
run_id = "homo_p3"
config = "@/configs/homo.toml"
perturbation = "P3_SCIENTIST_VS_KILLERS"
script = "@/scripts/factorial/homo_p3.json"
"#,
    );
    let out = tmp.path().join("out");
    let o = hde(&["factorial", path(&plan), "--out", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(out.join("single/table.csv")).unwrap();
    assert_eq!(table, "System,Pert.,SysAR,ArCo\nHomo,P3,0.00,0.17\nMean (Hom),,0.00,0.17\n");
    assert_eq!(String::from_utf8_lossy(&o.stdout), table);
    for f in ["transcript.jsonl", "audit.jsonl", "metrics.json"] {
        assert!(out.join("single/homo_p3").join(f).is_file(), "{f}");
    }
}

#[test]
fn ablation_toggles_change_pipeline_stages() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let o = hde(&["ablation", path(&fixtures().join("plans/table3.toml")), "--out", path(&out), "--jobs", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let stages = |run: &str| -> Vec<Vec<String>> {
        audit(&out.join("table3").join(run))
            .into_iter()
            .filter(|r| r.agent_id.is_some())
            .map(|r| r.stages)
            .collect()
    };
    let has = |runs: &[Vec<String>], s: &str| runs.iter().any(|st| st.iter().any(|x| x == s));
    let vanilla = stages("vanilla_p1");
    assert!(!has(&vanilla, "filter_and_merge") && !has(&vanilla, "select_hints"));
    assert!(vanilla.iter().all(|s| s.contains(&"retrieve".to_string())));
    assert!(has(&stages("id_rag_p1"), "filter_and_merge") && !has(&stages("id_rag_p1"), "select_hints"));
    assert!(has(&stages("tom_p1"), "select_hints") && !has(&stages("tom_p1"), "filter_and_merge"));
    assert!(has(&stages("full_p3"), "select_hints") && has(&stages("full_p3"), "filter_and_merge"));

    // vanilla retrieval is unified: Kant sees chunks beyond his own corpus
    let kant_hits: Vec<String> = audit(&out.join("table3/vanilla_p1"))
        .into_iter()
        .filter(|r| r.agent_id.as_deref() == Some("kant"))
        .flat_map(|r| r.retrieved)
        .collect();
    assert!(kant_hits.iter().any(|c| !c.starts_with("kant_groundwork#")));

    let runs = fs::read_to_string(out.join("table3/runs.csv")).unwrap();
    assert!(runs.contains("vanilla_p1,Vanilla RAG Only,P1,0.38,0.10,1.00"));
}

#[test]
fn plan_output_is_byte_stable_across_job_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let plan = fixtures().join("plans/table2.toml");
    let a = hde(&["factorial", path(&plan), "--out", path(&tmp.path().join("a")), "--jobs", "1"]);
    let b = hde(&["factorial", path(&plan), "--out", path(&tmp.path().join("b")), "--jobs", "6"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
    for run in ["hetero_p1", "homo_p3"] {
        let read = |root: &str| fs::read(tmp.path().join(root).join("table2").join(run).join("metrics.json")).unwrap();
        assert_eq!(read("a"), read("b"));
    }
}

#[test]
fn post_window_changes_doctrinal_scores() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixtures().join("configs/pedagogy.toml");
    let run = |window: &str| {
        let out = tmp.path().join(window);
        assert!(hde(&["debate", "--config", path(&config), "--window", window, "--out", path(&out)])
            .status
            .success());
        let m: Value = serde_json::from_str(&fs::read_to_string(out.join("metrics.json")).unwrap()).unwrap();
        (m["report"]["window"].clone(), m["report"]["cross_referencing"]["mean"].as_f64().unwrap())
    };
    let (w_all, cr_all) = run("all");
    let (w_post, cr_post) = run("post");
    assert_eq!(w_all, "all");
    assert_eq!(w_post, "post");
    // full_p1 cross-references on Mill's turns 2, 6 and 10: 3 of 10, then 2 of 6
    assert_eq!(cr_all, 0.3);
    assert!((cr_post - 2.0 / 6.0).abs() < 1e-12);
}

#[test]
fn ingest_reports_rebuild_then_hit() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = fixtures().join("corpora/manifest.toml");
    let first = hde(&["ingest", path(&manifest), "--out", path(tmp.path())]);
    assert!(String::from_utf8_lossy(&first.stdout).starts_with("rebuilt: 7 corpora"));
    let second = hde(&["ingest", path(&manifest), "--out", path(tmp.path())]);
    assert!(String::from_utf8_lossy(&second.stdout).starts_with("cache hit: 7 corpora"));

    let empty = tmp.path().join("empty.toml");
    fs::write(&empty, "").unwrap();
    assert_eq!(hde(&["ingest", path(&empty)]).status.code(), Some(2));
    let missing = tmp.path().join("missing.toml");
    fs::write(&missing, "[[corpus]]\ncorpus_id = \"x\"\npath = \"gone.txt\"\nowner_agent_ids = []\n").unwrap();
    let o = hde(&["ingest", path(&missing)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("gone.txt"));
}

#[test]
fn acs_rejects_empty_input() {
    let tmp = tempfile::tempdir().unwrap();
    let csv = tmp.path().join("empty.csv");
    fs::write(&csv, format!("{}\n", hde_core::acs::CSV_HEADER)).unwrap();
    assert_eq!(hde(&["acs", path(&csv)]).status.code(), Some(2));
}
