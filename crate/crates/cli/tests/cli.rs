use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("scarlab-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scarlab"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const EVOLVE: &str = r#"{
  "model": { "id": "isolated-2", "len": 4 },
  "initial": [{ "pattern": "ud" }],
  "times": { "t_max": 2.0, "n_points": 5 },
  "method": { "kind": "trajectories", "n_traj": 20, "dt": 0.01 }
}"#;

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let dir = workdir("determinism");
    let cfg = write(&dir, "evolve.json", EVOLVE);
    let (a, b, c) = (dir.join("a.csv"), dir.join("b.csv"), dir.join("c.csv"));
    assert!(run(&["evolve"], &cfg, &a).status.success());
    assert!(run(&["evolve", "--threads", "1"], &cfg, &b).status.success());
    assert!(run(&["evolve", "--seed", "5"], &cfg, &c).status.success());
    let (a, b, c) = (std::fs::read(a).unwrap(), std::fs::read(b).unwrap(), std::fs::read(c).unwrap());
    assert_eq!(a, b);
    assert_ne!(a, c);
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# config-sha256: ")));
    assert!(text.lines().any(|l| l == "# seed: 0"));
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "state,time,observable,observable_stderr,fidelity,fidelity_stderr");
    let rows: Vec<&str> = text.lines().filter(|l| l.starts_with("ud,")).collect();
    assert_eq!(rows.len(), 5);
    // 17 significant digits
    let first: Vec<&str> = rows[0].split(',').collect();
    assert_eq!(first[4], "1.0000000000000000e0");
}

#[test]
fn exit_codes() {
    let dir = workdir("exit");
    let out = dir.join("out.csv");
    let bad = write(&dir, "bad.json", r#"{ "model": { "id": "nope", "len": 4 } }"#);
    assert_eq!(run(&["evolve"], &bad, &out).status.code(), Some(2));
    let unknown_field = write(&dir, "field.json", r#"{ "model": { "id": "u1", "len": 4 }, "colour": 1 }"#);
    assert_eq!(run(&["commutant"], &unknown_field, &out).status.code(), Some(2));
    let missing = dir.join("missing.json");
    assert_eq!(run(&["commutant"], &missing, &out).status.code(), Some(2));

    let overflow = write(
        &dir,
        "overflow.json",
        r#"{
  "model": { "id": "isolated-2", "len": 4, "params": { "J": 0.5, "D": 1.2, "gamma": 50.0 } },
  "initial": [{ "pattern": "ud" }],
  "times": { "t_max": 1.0, "n_points": 3 },
  "method": { "kind": "trajectories", "n_traj": 2, "dt": 0.1 }
}"#,
    );
    assert_eq!(run(&["evolve"], &overflow, &out).status.code(), Some(3));

    let ok = write(&dir, "ok.json", r#"{ "model": { "id": "u1", "len": 3 } }"#);
    let blocked = write(&dir, "file", "");
    assert_eq!(run(&["commutant"], &ok, &blocked.join("x.csv")).status.code(), Some(4));
    assert_eq!(run(&["commutant"], &ok, &out).status.code(), Some(0));
}

#[test]
fn commutant_report() {
    let dir = workdir("commutant");
    let cfg = write(&dir, "c.json", r#"{ "model": { "id": "u1", "len": 4 } }"#);
    let out = dir.join("c.csv");
    assert!(run(&["commutant"], &cfg, &out).status.success());
    let text = std::fs::read_to_string(out).unwrap();
    assert!(text.contains("# commutant_dim: 5\n"));
    assert!(text.contains("# sum_irrep_dim_times_multiplicity: 16\n"));
    let rows: Vec<Vec<usize>> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
        .collect();
    let mut dims: Vec<usize> = rows.iter().map(|r| r[1]).collect();
    dims.sort();
    assert_eq!(dims, vec![1, 1, 4, 4, 6]);
}

#[test]
fn derivatives_report_is_json() {
    let dir = workdir("derivatives");
    let cfg = write(
        &dir,
        "d.json",
        r#"{ "model": { "id": "tower-2", "len": 4 }, "initial": [{ "aqmbs": { "n": 1 } }] }"#,
    );
    let out = dir.join("d.json.out");
    assert!(run(&["derivatives"], &cfg, &out).status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let r = &doc["report"];
    let (first, closed) = (r["first"].as_f64().unwrap(), r["first_closed_form"].as_f64().unwrap());
    assert!((first - closed).abs() < 1e-10 * closed.abs());
    assert_eq!(doc["config"]["model"]["params"]["gamma"].as_f64(), Some(4.0));
}

#[test]
fn presets_parse() {
    let presets = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets");
    let mut count = 0;
    for entry in std::fs::read_dir(presets).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["model"]["id"].is_string(), "{}", path.display());
        count += 1;
    }
    assert!(count >= 8);
}
