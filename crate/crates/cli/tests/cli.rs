use std::io::{BufRead, BufReader};
use std::process::{Command, Output, Stdio};

fn dispkey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispkey")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Column `name` of every data row.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap_or_else(|| panic!("no column {name}"));
    lines.map(|l| l.split(',').nth(k).unwrap().to_owned()).collect()
}

#[test]
fn verify_bound_passes_on_fock_pair() {
    let o = dispkey(&["verify-bound", "--sigma-sq", "4,16,64", "--pair", "fock:0,fock:1", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(column(&out, "status"), ["pass", "pass", "pass"]);
    assert!(out.starts_with("experiment,sigma_sq,sigma,n,state_a,state_b,cutoff,tail_eps,measured,bound,error,status,runtime_ms"));
}

#[test]
fn identical_states_have_zero_distance() {
    let o = dispkey(&["verify-bound", "--sigma-sq", "4", "--pair", "plus:2,plus:2", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(column(&stdout(&o), "measured"), ["0"]);
}

#[test]
fn small_sigma_marks_precondition() {
    let o = dispkey(&["verify-bound", "--sigma-sq", "1", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(column(&out, "bound"), ["precondition-violated"]);
    assert_eq!(column(&out, "status"), ["precondition-violated"]);
}

#[test]
fn reports_are_byte_identical_without_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|k| dir.path().join(format!("r{k}.json"))).collect();
    for p in &paths {
        let o = dispkey(&[
            "verify-bound",
            "--pair",
            "random:3,plus:1",
            "--sigma-sq",
            "2,8",
            "--format",
            "json",
            "--no-timestamp",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let doc: serde_json::Value = serde_json::from_slice(&a).unwrap();
    assert_eq!(doc["command"], "verify-bound");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 2);
    assert!(doc.get("generated_unix").is_none());
}

#[test]
fn state_file_input() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("psi.json");
    std::fs::write(&path, r#"{"modes":1,"max_photons":2,"amplitudes":[[0.6,0.0],[0.0,0.0],[0.0,0.8]]}"#).unwrap();
    let pair = format!("{},fock:0", path.display());
    let o = dispkey(&["verify-bound", "--sigma-sq", "16", "--pair", &pair, "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(column(&stdout(&o), "n"), ["2"]);
    let missing = dispkey(&["verify-bound", "--pair", "/no/such.json,fock:0"]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn oracle_check_small_grid() {
    let o = dispkey(&["oracle-check", "--n", "2", "--sigma-sq", "1,2", "--samples", "0", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(column(&out, "experiment").len(), 6);
    assert!(column(&out, "status").iter().all(|s| s == "pass"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(dispkey(&["oracle-check", "--n", "9"]).status.code(), Some(2));
    assert_eq!(dispkey(&["verify-bound", "--sigma-sq", "-1"]).status.code(), Some(2));
    assert_eq!(dispkey(&["verify-bound", "--format", "xml"]).status.code(), Some(2));
    assert_eq!(dispkey(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(dispkey(&["verify-bound", "--pair", "fock:0"]).status.code(), Some(2));
}

#[test]
fn lemma_checks_report_every_family() {
    let o = dispkey(&["lemma-checks", "--sigma-sq", "1,4", "--n", "2", "--no-timestamp"]);
    let out = stdout(&o);
    let names = column(&out, "experiment");
    let status = column(&out, "status");
    for fam in ["geometric-binomial-sum", "diagonal-recurrence", "diagonal-step", "diagonal-pair", "binomial-shift-inequality"] {
        assert!(names.iter().zip(&status).filter(|(n, _)| *n == fam).all(|(_, s)| s == "pass"), "{fam}");
    }
    // the off-diagonal row-sum bound does not hold numerically; those rows
    // are reported as failures and drive the exit code
    let row_sum: Vec<&String> = names.iter().zip(&status).filter(|(n, _)| *n == "offdiag-row-sum").map(|(_, s)| s).collect();
    assert!(!row_sum.is_empty());
    assert!(row_sum.iter().any(|s| *s == "fail"));
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn protocol_demo_zero_key() {
    let o = dispkey(&["protocol-demo", "--sigma", "0", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let f: f64 = column(&stdout(&o), "measured")[0].parse().unwrap();
    assert!((1.0 - f).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&o.stderr).contains("decrypt"));
}

#[test]
fn protocol_demo_encrypted_runs() {
    let o = dispkey(&["protocol-demo", "--sigma", "0.5", "--n", "2", "--runs", "5", "--seed", "3", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(column(&stdout(&o), "status"), ["pass"; 5]);
}

#[test]
fn adaptive_demo_statistics() {
    let o = dispkey(&["adaptive-demo", "--runs", "400", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(column(&out, "experiment"), ["adaptive-fidelity-min", "outcome-frequency", "outcome-frequency"]);
}

fn spawn_server(extra: &[&str]) -> (std::process::Child, String) {
    let mut child = Command::new(env!("CARGO_BIN_EXE_dispkey"))
        .args(["serve", "--port", "0", "--timeout", "20"])
        .args(extra)
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stderr.as_mut().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on ").expect("server announces its address").to_owned();
    (child, addr)
}

#[test]
fn serve_and_connect() {
    let (mut server, addr) = spawn_server(&["--unitary", "random:4"]);
    let (host, port) = addr.rsplit_once(':').unwrap();
    let o = dispkey(&["connect", "--address", host, "--port", port, "--seed", "4", "--no-timestamp"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(server.wait().unwrap().success());
    // same seed in-process
    let local = dispkey(&["protocol-demo", "--seed", "4", "--no-timestamp"]);
    assert_eq!(column(&stdout(&o), "measured"), column(&stdout(&local), "measured"));
}

#[test]
fn connect_with_wrong_version_fails_typed() {
    let (mut server, addr) = spawn_server(&[]);
    let (host, port) = addr.rsplit_once(':').unwrap();
    let o = dispkey(&["connect", "--address", host, "--port", port, "--protocol-version", "99"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("version-mismatch"));
    assert!(!server.wait().unwrap().success());
}
