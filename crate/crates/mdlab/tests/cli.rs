use std::path::Path;

use mdlab::cli::{execute, EXIT_CONFIG, EXIT_OK};
use mdlab::config;

const TRANSCRIPT: &str =
    "seed,t,state,forecast_cell,forecast,context,policy,response,response_dist,u,v,expected_u,expected_v,cf_responses,cf_expected_v";
const REPORT: &str =
    "seed,checkpoint,pr,er,ir,cir,fer,fcir,expected_er,iota,kappa,l12_bound,iota_apriori,theorem,bound,bound_apriori,status";
const BOUNDS: &str =
    "seed,checkpoint,theorem,main,iota,iota_apriori,epsilon,epsilon_tilde,m1,m2,value,value_apriori,pr,holds,status";
const CALIBRATION: &str = "seed,grid_index,count,l1_distance,empirical_probs";

const MINIMAL: &str = r#"{
  "game": { "scenario": { "name": "judge_prosecutor", "guilty": 0.3, "step": 0.25 } },
  "mechanism": { "kind": "constant", "fixed_policy": 2 },
  "learner": { "kind": "cfl" },
  "states": { "kind": "iid", "probabilities": [0.7, 0.3] },
  "T": 10,
  "seeds": [5]
}"#;

struct Outcome {
    code: u8,
    stdout: String,
    stderr: String,
}

fn mdlab(args: &[&str], seed_env: Option<&str>) -> Outcome {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = execute(std::iter::once("mdlab").chain(args.iter().copied()), seed_env, &mut out, &mut err);
    Outcome { code, stdout: String::from_utf8(out).unwrap(), stderr: String::from_utf8(err).unwrap() }
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run_config(text: &str, seed_env: Option<&str>, extra: &[&str]) -> (Outcome, tempfile::TempDir) {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("out");
    let mut args = vec!["run", "--config", cfg.as_str(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (mdlab(&args, seed_env), tmp)
}

fn first_line(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn minimal_config_writes_every_output() {
    let (o, tmp) = run_config(MINIMAL, None, &[]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let out = tmp.path().join("out");
    for f in ["transcript.csv", "report.csv", "bounds.csv", "calibration.csv", "summary.json"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let transcript = std::fs::read_to_string(out.join("transcript.csv")).unwrap();
    assert_eq!(transcript.lines().count(), 11);
    assert!(!transcript.contains('\r'));
    let summary: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"][0]["seed"], 5);
}

#[test]
fn csv_headers_are_stable() {
    let (o, tmp) = run_config(MINIMAL, None, &[]);
    assert_eq!(o.code, EXIT_OK);
    let out = tmp.path().join("out");
    assert_eq!(first_line(&out.join("transcript.csv")), TRANSCRIPT);
    assert_eq!(first_line(&out.join("report.csv")), REPORT);
    assert_eq!(first_line(&out.join("bounds.csv")), BOUNDS);
    assert_eq!(first_line(&out.join("calibration.csv")), CALIBRATION);
}

#[test]
fn zero_horizon_is_a_config_error_naming_t() {
    let (o, _tmp) = run_config(&MINIMAL.replace("\"T\": 10", "\"T\": 0"), None, &[]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("T:"), "{}", o.stderr);
}

#[test]
fn schema_errors_carry_field_paths() {
    let (o, _tmp) = run_config(&MINIMAL.replace("\"fixed_policy\": 2", "\"fixed_policy\": 2, \"bogus\": 1"), None, &[]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("mechanism"), "{}", o.stderr);

    let (o, _tmp) = run_config(&MINIMAL.replace("[0.7, 0.3]", "[0.7, 0.7]"), None, &[]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("states.probabilities"), "{}", o.stderr);

    let (o, _tmp) = run_config(&MINIMAL.replace("\"seeds\": [5]", "\"seeds\": [5], \"checkpoints\": [11]"), None, &[]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("checkpoints"), "{}", o.stderr);
}

#[test]
fn seed_variable_overrides_config_seeds() {
    let (o, tmp) = run_config(MINIMAL, Some("42"), &[]);
    assert_eq!(o.code, EXIT_OK);
    let report = std::fs::read_to_string(tmp.path().join("out/report.csv")).unwrap();
    let seeds: Vec<&str> = report.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds, ["42"]);

    let (o, _tmp) = run_config(MINIMAL, Some("forty-two"), &[]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("MDLAB_SEED"));
}

#[test]
fn strict_run_of_a_common_forecast_learner_passes() {
    let text = MINIMAL.replace(r#"{ "kind": "constant", "fixed_policy": 2 }"#, r#"{ "kind": "m2", "epsilon_bar": 0.1 }"#).replace("\"T\": 10", "\"T\": 300");
    let (o, tmp) = run_config(&text, None, &["--strict", "--jobs", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let report = std::fs::read_to_string(tmp.path().join("out/report.csv")).unwrap();
    assert!(report.lines().nth(1).unwrap().ends_with(",checked"));
}

#[test]
fn config_round_trips_through_json() {
    let example = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/t2_iid.json")).unwrap();
    for text in [MINIMAL, example.as_str()] {
        let parsed = config::parse(text).unwrap();
        let again = config::parse(&serde_json::to_string(&parsed).unwrap()).unwrap();
        assert_eq!(parsed, again);
    }
}

#[test]
fn solve_prints_persuasion_values() {
    let beta = mdlab(&["solve", "--game", "judge_prosecutor", "--prior", "2/3,1/3", "--epsilon", "0", "--mode", "beta"], None);
    assert_eq!(beta.code, EXIT_OK);
    assert!(beta.stdout.contains("value: 0.666667"), "{}", beta.stdout);
    let nabla = mdlab(&["solve", "--game", "judge_prosecutor", "--prior", "2/3,1/3", "--epsilon", "0", "--mode", "nabla"], None);
    assert!(nabla.stdout.contains("value: 0.333333"), "{}", nabla.stdout);
    // with ε ≥ 1 every response is admissible: always convicting (1) against always acquitting (0)
    let delta = mdlab(&["solve", "--game", "judge_prosecutor", "--prior", "0.5,0.5", "--epsilon", "1", "--mode", "delta"], None);
    assert!(delta.stdout.contains("value: 1.000000"), "{}", delta.stdout);
}

#[test]
fn solve_rejects_bad_input() {
    let bad_mode = mdlab(&["solve", "--game", "judge_prosecutor", "--prior", "0.5,0.5", "--epsilon", "0", "--mode", "gamma"], None);
    assert_eq!(bad_mode.code, EXIT_CONFIG);
    let bad_prior = mdlab(&["solve", "--game", "judge_prosecutor", "--prior", "0.2,0.2,0.6", "--epsilon", "0", "--mode", "beta"], None);
    assert_eq!(bad_prior.code, EXIT_CONFIG);
    assert!(bad_prior.stderr.contains("prior"));
    let bad_game = mdlab(&["solve", "--game", "no_such_game", "--prior", "0.5,0.5", "--epsilon", "0", "--mode", "beta"], None);
    assert_eq!(bad_game.code, EXIT_CONFIG);
}

#[test]
fn impossibility_prints_a_regret_trajectory() {
    let o = mdlab(&["impossibility", "--scenario", "prop2", "--T", "400", "--seed", "7"], None);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let lines: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(lines[0], "scenario,checkpoint,policy,principal_regret,expected_er,min_principal_regret");
    // three checkpoints, two mechanisms each
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.starts_with("prop2,")));

    let short = mdlab(&["impossibility", "--scenario", "prop1", "--T", "99", "--seed", "7"], None);
    assert_eq!(short.code, EXIT_CONFIG);
    assert!(short.stderr.contains("T:"));
}
