#[path = "../../core/tests/support/mod.rs"]
mod support;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

use serde_json::Value;
use support::mock::{completion, dead_endpoint, MockServer};

const KEY_ENV: &str = "LQCA_CLI_TEST_KEY";

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

fn lqca() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_lqca"));
    cmd.env_remove("RUST_LOG").env_remove(KEY_ENV);
    cmd
}

fn run(args: &[&str]) -> Output {
    lqca().args(args).output().unwrap()
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = lqca()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    assert_eq!(out.status.code(), Some(0), "{}", stderr(out));
    serde_json::from_slice(&out.stdout).unwrap()
}

/// Config file disabling retries, so unreachable backends fail fast.
fn no_retry_config(dir: &Path) -> PathBuf {
    let path = dir.join("lqca.toml");
    std::fs::write(
        &path,
        "[resolver.retry]\nmax_retries = 0\n[tagger.retry]\nmax_retries = 0\n[llm.retry]\nmax_retries = 0\n",
    )
    .unwrap();
    path
}

#[test]
fn rewrite_matches_the_sliding_golden() {
    let out = run(&["rewrite", fixture("harbor.txt").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), read("harbor.sliding.golden"));
}

#[test]
fn rewrite_matches_the_non_overlap_golden() {
    let input = fixture("harbor.txt");
    let out = run(&[
        "rewrite",
        "--chunk-mode",
        "non_overlap",
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), read("harbor.non_overlap.golden"));
    assert_ne!(
        read("harbor.sliding.golden"),
        read("harbor.non_overlap.golden")
    );
}

#[test]
fn rewrite_reads_stdin_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("out.txt");
    let sidecar = dir.path().join("edits.json");
    let out = run_stdin(
        &[
            "rewrite",
            "--max-chunk-tokens",
            "14",
            "--out",
            out_path.to_str().unwrap(),
            "--sidecar",
            sidecar.to_str().unwrap(),
        ],
        &read("pier.txt"),
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&out_path).unwrap(),
        "Mr. Hale lit the lamp. Mr. Hale waited on the old pier. Ines rowed out at dawn. Ines waved at the keeper.\n"
    );
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    let edits = sidecar["edits"].as_array().unwrap();
    assert_eq!(edits.len(), 2);
    assert_eq!(edits[0]["start"], 23);
    assert_eq!(edits[0]["replacement"], "Mr. Hale");
    assert_eq!(sidecar["offset_map"]["original_len"], 99);
    assert_eq!(sidecar["offset_map"]["rewritten_len"], 99 + 6 + 1);
}

#[test]
fn empty_input_gives_empty_output() {
    for input in ["", "  \n\t "] {
        let out = run_stdin(&["rewrite"], input);
        assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
        assert_eq!(stdout(&out), input);
    }
}

#[test]
fn inspect_matches_its_golden() {
    let input = fixture("pier.txt");
    let out = run(&[
        "inspect",
        "--max-chunk-tokens",
        "14",
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), read("pier.inspect.golden.json"));
}

#[test]
fn threshold_one_leaves_only_singletons() {
    let input = fixture("harbor.txt");
    let dump = json(&run(&["inspect", "--k", "1.0", input.to_str().unwrap()]));
    let clusters = dump["clusters"].as_array().unwrap();
    assert_eq!(clusters.len(), dump["mentions"].as_array().unwrap().len());
    assert!(clusters
        .iter()
        .all(|c| c["members"].as_array().unwrap().len() == 1));
    assert!(dump["graph"]["edges"].as_array().unwrap().is_empty());
}

#[test]
fn chunk_mode_shows_in_the_chunk_list() {
    let input = fixture("harbor.txt");
    let ranges = |mode: &str| -> Vec<Value> {
        let dump = json(&run(&[
            "inspect",
            "--chunk-mode",
            mode,
            input.to_str().unwrap(),
        ]));
        dump["chunks"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c["sentence_range"].clone())
            .collect()
    };
    assert_eq!(
        ranges("sliding"),
        [
            serde_json::json!([0, 31]),
            serde_json::json!([16, 47]),
            serde_json::json!([32, 55])
        ]
    );
    assert_eq!(
        ranges("non_overlap"),
        [serde_json::json!([0, 31]), serde_json::json!([32, 55])]
    );
}

#[test]
fn commands_are_deterministic() {
    let input = fixture("harbor.txt");
    let a = run(&["inspect", input.to_str().unwrap()]);
    let b = run(&["inspect", "--parallelism", "1", input.to_str().unwrap()]);
    let strip = |o: &Output| {
        let mut v = json(o);
        v["config"]["parallelism"] = Value::Null;
        v
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(run(&["inspect", input.to_str().unwrap()]).stdout, a.stdout);
}

#[test]
fn flags_override_the_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("lqca.toml");
    std::fs::write(
        &config,
        "[pipeline]\nmax_chunk_tokens = 14\nthreshold = 0.5\nchunk_mode = \"non_overlap\"\n",
    )
    .unwrap();
    let input = fixture("pier.txt");
    let dump = json(&run(&[
        "inspect",
        "--config",
        config.to_str().unwrap(),
        "--threshold",
        "0.7",
        input.to_str().unwrap(),
    ]));
    assert_eq!(dump["config"]["max_chunk_tokens"], 14);
    assert_eq!(dump["config"]["threshold"], 0.7);
    assert_eq!(dump["config"]["chunk_mode"], "non_overlap");
    assert_eq!(dump["config"]["parallelism"], 0);
}

#[test]
fn configuration_errors_exit_with_2() {
    let input = fixture("pier.txt");
    let input = input.to_str().unwrap();
    for args in [
        vec!["rewrite", "--threshold", "1.5", input],
        vec!["rewrite", "--max-chunk-tokens", "0", input],
        vec!["rewrite", "--config", "/nonexistent/lqca.toml", input],
        vec!["rewrite", "/nonexistent/input.txt"],
        vec!["rewrite", "--chunk-mode", "diagonal", input],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", stderr(&out));
    }
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[pipeline]\nthreshhold = 0.5\n").unwrap();
    let out = run(&["rewrite", "--config", bad.to_str().unwrap(), input]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("threshhold"));
}

#[test]
fn unreachable_resolver_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = no_retry_config(dir.path());
    let endpoint = dead_endpoint();
    let input = fixture("pier.txt");
    let out = run(&[
        "rewrite",
        "--config",
        config.to_str().unwrap(),
        "--resolver",
        "wire",
        "--resolver-endpoint",
        &endpoint,
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(
        stderr(&out).contains("resolve: chunk 0"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn unreachable_tagger_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = no_retry_config(dir.path());
    let endpoint = dead_endpoint();
    let input = fixture("pier.txt");
    let out = run(&[
        "inspect",
        "--config",
        config.to_str().unwrap(),
        "--tagger",
        "wire",
        "--tagger-endpoint",
        &endpoint,
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
    assert!(stderr(&out).starts_with("lqca: tag:"), "{}", stderr(&out));
}

#[test]
fn resolver_replies_are_repaired_or_rejected() {
    let input = fixture("pier.txt");
    // Out-of-range spans are dropped with a warning and the run goes on.
    let repairable = MockServer::start(|_, _| {
        (
            200,
            r#"{"mentions":[{"start":0,"end":2},{"start":5,"end":999}],"clusters":[[0,1]]}"#.into(),
        )
    });
    let out = run(&[
        "rewrite",
        "--resolver",
        "wire",
        "--resolver-endpoint",
        &repairable.url,
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert_eq!(stdout(&out), read("pier.txt"));

    let garbage = MockServer::start(|_, _| (200, "not json".into()));
    let out = run(&[
        "rewrite",
        "--resolver",
        "wire",
        "--resolver-endpoint",
        &garbage.url,
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
    assert!(stderr(&out).contains("resolve: chunk"));
}

fn echo_server() -> MockServer {
    MockServer::start(|_, req| {
        let prompt = req.body["messages"][0]["content"]
            .as_str()
            .unwrap_or_default()
            .to_string();
        (200, completion(&prompt))
    })
}

fn qa(server: &MockServer, extra: &[&str]) -> Output {
    let input = fixture("pier.txt");
    let mut args = vec![
        "qa",
        "--max-chunk-tokens",
        "14",
        "--endpoint",
        &server.url,
        "--api-key-env",
        KEY_ENV,
        "--question",
        "Who waved?",
    ];
    args.extend_from_slice(extra);
    args.push(input.to_str().unwrap());
    lqca().env(KEY_ENV, "secret").args(&args).output().unwrap()
}

#[test]
fn qa_prompts_with_the_rewritten_context() {
    let server = echo_server();
    let out = qa(&server, &[]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let answer = stdout(&out);
    assert!(
        answer.contains("Mr. Hale waited on the old pier"),
        "{answer}"
    );
    assert!(!answer.contains("He waited"), "{answer}");
    assert!(answer.contains("Who waved?"));
    let sent = server.recorded();
    assert_eq!(sent.len(), 1);
    assert_eq!(sent[0].header("Authorization"), Some("Bearer secret"));
}

#[test]
fn qa_vanilla_mode_skips_rewriting() {
    let server = echo_server();
    let out = qa(&server, &["--mode", "vanilla"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("He waited on the old pier"));
}

#[test]
fn qa_passes_choices_and_prompt_mode() {
    let server = echo_server();
    let out = qa(
        &server,
        &[
            "--choice",
            "Ines",
            "--choice",
            "Mr. Hale",
            "--prompt-mode",
            "cot",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let vanilla = qa(&server, &["--choice", "Ines", "--choice", "Mr. Hale"]);
    let (cot, plain) = (stdout(&out), stdout(&vanilla));
    assert!(
        cot.contains("A. Ines") || cot.contains("A) Ines") || cot.contains("(A) Ines"),
        "{cot}"
    );
    assert!(cot.len() > plain.len());
}

#[test]
fn qa_without_api_key_is_a_config_error_before_any_request() {
    let server = echo_server();
    let input = fixture("pier.txt");
    let out = run(&[
        "qa",
        "--endpoint",
        &server.url,
        "--api-key-env",
        KEY_ENV,
        "--question",
        "Who?",
        input.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains(KEY_ENV));
    assert_eq!(server.count(), 0);
}

#[test]
fn qa_transport_failure_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let config = no_retry_config(dir.path());
    let input = fixture("pier.txt");
    let out = lqca()
        .env(KEY_ENV, "secret")
        .args([
            "qa",
            "--config",
            config.to_str().unwrap(),
            "--endpoint",
            &dead_endpoint(),
            "--api-key-env",
            KEY_ENV,
            "--question",
            "Who?",
            input.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn eval_scores_and_resumes() {
    let server = MockServer::start(|_, req| {
        let prompt = req.body["messages"][0]["content"]
            .as_str()
            .unwrap_or_default();
        let reply = if prompt.contains("Who lit the lamp?") {
            "Mr. Hale"
        } else {
            "The answer is B."
        };
        (200, completion(reply))
    });
    let dir = tempfile::tempdir().unwrap();
    let dataset = dir.path().join("data.jsonl");
    let context = read("pier.txt");
    let records = [
        serde_json::json!({"id": "q1", "context": context, "question": "Who lit the lamp?", "gold_answers": ["Mr. Hale"], "answer_position_fraction": 0.1}),
        serde_json::json!({"id": "q2", "context": context, "question": "Who waved?", "gold_answers": ["A"], "choices": ["Ines", "Mr. Hale"], "answer_position_fraction": 0.9}),
    ];
    let mut lines: Vec<String> = records.iter().map(Value::to_string).collect();
    lines.push("{broken".into());
    std::fs::write(&dataset, lines.join("\n")).unwrap();
    let results = dir.path().join("results.jsonl");
    let report_path = dir.path().join("report.json");
    let args = [
        "eval",
        "--dataset",
        dataset.to_str().unwrap(),
        "--results",
        results.to_str().unwrap(),
        "--out",
        report_path.to_str().unwrap(),
        "--run-id",
        "r1",
        "--endpoint",
        &server.url,
        "--api-key-env",
        KEY_ENV,
    ];
    let out = lqca().env(KEY_ENV, "k").args(args).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    assert!(stdout(&out).contains("run r1 (mode lqca)"));
    assert_eq!(server.count(), 2);
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report["total"], 2);
    assert_eq!(report["scored"], 2);
    assert_eq!(report["records"][0]["score"], 1.0);
    assert_eq!(report["records"][1]["score"], 0.0);
    assert_eq!(report["records"][1]["metric"], "accuracy");
    assert_eq!(report["mean"], 0.5);

    let again = lqca().env(KEY_ENV, "k").args(args).output().unwrap();
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
    assert_eq!(server.count(), 2, "finished records are not asked again");
    let report2: Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert_eq!(report2["mean"], 0.5);
}

#[test]
fn eval_rejects_a_missing_dataset() {
    let out = lqca()
        .env(KEY_ENV, "k")
        .args([
            "eval",
            "--dataset",
            "/nonexistent/data.jsonl",
            "--api-key-env",
            KEY_ENV,
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}
