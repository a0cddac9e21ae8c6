use std::path::Path;
use std::process::Command;

const SMALL_VERIFY: &str = r#"
mass = 1.0

[grid]
n = 32
length = 32.0

[sampler]
kind = "finite_range_moving_average"
seed = 4
kernel = { shape = "bump", radius = 1.5 }

[verify]
random_k = 200
times = [0.5, 1.7]
cone_sigma = 2.0
cone_floor = 1e-6
cone_times = [1.0, 2.0]
local_radius = 4.0
phi = { shape = "bump", radius = 2.0 }
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn dirac_eq(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dirac-eq")).args(args).output().expect("binary runs")
}

fn status(args: &[&str]) -> i32 {
    dirac_eq(args).status.code().expect("exit code")
}

#[test]
fn verify_passes_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "verify.toml", SMALL_VERIFY);
    let out = dir.path().join("out");
    let o =
        dirac_eq(&["verify", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--dump-fields"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["experiment"], "verify");
    assert_eq!(manifest["seed"], 4);
    let files = manifest["files"].as_array().unwrap();
    let names: Vec<&str> = files.iter().map(|f| f["path"].as_str().unwrap()).collect();
    assert!(names.contains(&"summary.json"));
    assert!(names.contains(&"config.toml"));
    assert!(names.iter().any(|n| n.ends_with(".field")));
    for f in files {
        let bytes = std::fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap(), bytes.len() as u64);
        assert_eq!(f["sha256"].as_str().unwrap(), dirac_eq::cli::report::sha256_hex(&bytes));
    }

    let psi0 = std::fs::File::open(out.join("psi0.field")).unwrap();
    let field = dirac_eq::grid::dump::read_field(psi0).unwrap();
    assert_eq!(field.grid().n(), 32);

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["passed"], true);
}

#[test]
fn same_seed_gives_identical_summary() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "verify.toml", SMALL_VERIFY);
    let run = |name: &str, seed: &str| {
        let out = dir.path().join(name);
        let code =
            status(&["verify", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(code, 0);
        std::fs::read(out.join("summary.json")).unwrap()
    };
    let a = run("a", "17");
    let b = run("b", "17");
    let c = run("c", "18");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn failing_check_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "decay.toml",
        r#"
[grid]
n = 32
length = 32.0

[decay]
times = [2.0, 4.0, 6.0, 8.0]
masses = [1.0]
phi = { shape = "bump", radius = 3.0 }
expected_exponent = 1.0
tolerance = 0.1
"#,
    );
    let out = dir.path().join("out");
    assert_eq!(status(&["decay", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()]), 1);
    assert!(out.join("decay.csv").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn invalid_configurations_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let typo = write_config(dir.path(), "typo.toml", "[grid]\nn = 32\nlenght = 32.0\n");
    assert_eq!(status(&["verify", "--config", typo.to_str().unwrap(), "--out", out]), 2);

    let bad_grid = write_config(dir.path(), "grid.toml", "[grid]\nn = 30\n");
    assert_eq!(status(&["verify", "--config", bad_grid.to_str().unwrap(), "--out", out]), 2);

    let wraps =
        write_config(dir.path(), "wrap.toml", &SMALL_VERIFY.replace("local_radius = 4.0", "local_radius = 20.0"));
    assert_eq!(status(&["verify", "--config", wraps.to_str().unwrap(), "--out", out]), 2);

    let mass = write_config(dir.path(), "mass.toml", "mass = 0.0\n");
    assert_eq!(status(&["decay", "--config", mass.to_str().unwrap(), "--out", out]), 2);

    assert_eq!(status(&["verify", "--config", "/nonexistent.toml", "--out", out]), 2);
    assert_eq!(status(&["verify", "--config", typo.to_str().unwrap(), "--threads", "0"]), 2);
    assert_eq!(status(&["simulate", "--config", typo.to_str().unwrap()]), 2);
    assert_eq!(status(&["--help"]), 0);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "ensemble.toml",
        r#"
[grid]
n = 32
length = 32.0

[sampler]
kind = "finite_range_moving_average"
seed = 3
kernel = { shape = "bump", radius = 1.5 }

[ensemble]
samples = 1200
times = [0.0, 8.0]
tests = [{ shape = "bump", radius = 1.5 }]
initial_kurtosis_se = 2.0
save_projections = true
"#,
    );
    let run = |threads: &str| {
        let out = dir.path().join(format!("t{threads}"));
        let code = status(&[
            "ensemble",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
            "--threads",
            threads,
        ]);
        assert_eq!(code, 0);
        out
    };
    let (one, three) = (run("1"), run("3"));
    for file in ["summary.json", "cumulants.csv", "char_functional.csv", "projections.csv"] {
        assert_eq!(std::fs::read(one.join(file)).unwrap(), std::fs::read(three.join(file)).unwrap(), "{file}");
    }
}
