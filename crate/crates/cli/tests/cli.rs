use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use netgame_core::io::{read_covariates, read_edges, read_outcomes, MissingPolicy};
use netgame_core::network::{generate_circle, generate_random};
use netgame_core::rng::derive_seed;
use netgame_core::simulate::PURPOSE_NETWORK;
use serde_json::Value;
use tempfile::TempDir;

fn netgame(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_netgame"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

const COVARIATES: &str = r#"
[[covariates]]
name = "const"
dist = "constant"
value = 1.0
[[covariates]]
name = "x"
dist = "normal"
mean = 0.0
var = 1.0
"#;

/// Generates a random network with covariates and simulated outcomes in `dir/data`.
fn simulated_data(dir: &Path, n: usize, alpha: f64) {
    write(
        dir,
        "gen.toml",
        &format!("network = \"random\"\nn = {n}\nseed = 21\n{COVARIATES}"),
    );
    let out = netgame(dir, &["generate", "--config", "gen.toml", "--out", "data"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    write(
        dir,
        "sim.toml",
        &format!(
            "edges = \"data/edges.csv\"\ncovariates = \"data/covariates.csv\"\nseed = 5\n[theta]\nbeta = [[-0.2, 1.0]]\nalpha = [[{alpha}]]\n"
        ),
    );
    let out = netgame(dir, &["simulate", "--config", "sim.toml", "--out", "data"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn circle_of_ten_has_twenty_edges() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "c.toml", "network = \"circle\"\nn = 10\n");
    let out = netgame(dir.path(), &["generate", "--config", "c.toml", "--out", "o"]);
    assert_eq!(code(&out), 0);
    let edges = fs::read_to_string(dir.path().join("o/edges.csv")).unwrap();
    assert_eq!(edges.lines().count(), 1 + 20);
    assert!(!dir.path().join("o/covariates.csv").exists());

    let summary = json(&dir.path().join("o/generate.json"));
    assert_eq!(summary["spec_version"], "1.0");
    assert_eq!(summary["config"]["seed"], 0);
    assert_eq!(summary["max_friends"], 2);
    assert_eq!(summary["max_centrality"], 2);
    assert_eq!(summary["mean_friends"], 2.0);
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("max centrality 2"), "{stdout}");
}

#[test]
fn generated_files_are_deterministic_and_load_back() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "r.toml",
        &format!("network = \"random\"\nn = 1000\nseed = 7\n{COVARIATES}"),
    );
    for o in ["a", "b"] {
        let out = netgame(dir.path(), &["generate", "--config", "r.toml", "--out", o]);
        assert_eq!(code(&out), 0);
    }
    for f in ["edges.csv", "covariates.csv", "generate.json"] {
        let a = fs::read(dir.path().join("a").join(f)).unwrap();
        let b = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(a, b, "{f} differs between runs");
    }

    let net = read_edges(&dir.path().join("a/edges.csv"), 1000).unwrap();
    assert_eq!(net, generate_random(1000, derive_seed(7, 0, PURPOSE_NETWORK)).unwrap());
    let (names, x) = read_covariates(&dir.path().join("a/covariates.csv"), MissingPolicy::Error).unwrap();
    assert_eq!(names, ["const", "x"]);
    assert!(x.column(0).all(|v| v == 1.0));

    // the command-line seed wins over the configured one
    let out = netgame(
        dir.path(),
        &["generate", "--config", "r.toml", "--out", "c", "--seed", "8"],
    );
    assert_eq!(code(&out), 0);
    assert_ne!(
        fs::read(dir.path().join("a/edges.csv")).unwrap(),
        fs::read(dir.path().join("c/edges.csv")).unwrap()
    );
    assert_eq!(json(&dir.path().join("c/generate.json"))["config"]["seed"], 8);

    write(dir.path(), "circ.toml", "network = \"circle\"\nn = 37\n");
    assert_eq!(
        code(&netgame(
            dir.path(),
            &["generate", "--config", "circ.toml", "--out", "d"]
        )),
        0
    );
    assert_eq!(
        read_edges(&dir.path().join("d/edges.csv"), 37).unwrap(),
        generate_circle(37).unwrap()
    );
}

#[test]
fn too_small_circle_fails_with_message() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "c.toml", "network = \"circle\"\nn = 2\n");
    let out = netgame(dir.path(), &["generate", "--config", "c.toml"]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("error:") && stderr.contains("circle"), "{stderr}");
}

#[test]
fn configuration_problems_exit_with_two() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "bad.toml", "network = \"circle\"\nn = 10\nradius = 3\n");
    let out = netgame(dir.path(), &["generate", "--config", "bad.toml"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8(out.stderr).unwrap().contains("radius"));

    write(
        dir.path(),
        "bad2.toml",
        "network = \"circle\"\nn = 10\n[[covariates]]\nname = \"z\"\ndist = \"uniform\"\nlow = 0.0\n",
    );
    assert_eq!(code(&netgame(dir.path(), &["generate", "--config", "bad2.toml"])), 2);
    assert_eq!(code(&netgame(dir.path(), &["generate"])), 2);
    assert_eq!(code(&netgame(dir.path(), &["generate", "--config", "absent.toml"])), 4);
}

#[test]
fn schema_errors_name_row_and_column() {
    let dir = TempDir::new().unwrap();
    simulated_data(dir.path(), 30, 0.3);
    let cov = fs::read_to_string(dir.path().join("data/covariates.csv")).unwrap();
    let broken: Vec<String> = cov
        .lines()
        .enumerate()
        .map(|(i, l)| {
            let mut f: Vec<&str> = l.split(',').collect();
            if i == 3 {
                f[1] = "abc";
            }
            f.join(",")
        })
        .collect();
    write(dir.path(), "data/covariates.csv", &broken.join("\n"));
    write(
        dir.path(),
        "e.toml",
        "edges = \"data/edges.csv\"\ncovariates = \"data/covariates.csv\"\noutcomes = \"data/outcomes.csv\"\nh = 0\n",
    );
    let out = netgame(dir.path(), &["estimate", "--config", "e.toml"]);
    assert_eq!(code(&out), 2);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("row 3") && stderr.contains("const"), "{stderr}");
}

#[test]
fn missing_file_and_failed_estimation_have_distinct_codes() {
    let dir = TempDir::new().unwrap();
    simulated_data(dir.path(), 200, 0.5);
    write(
        dir.path(),
        "missing.toml",
        "edges = \"data/edges.csv\"\ncovariates = \"data/none.csv\"\noutcomes = \"data/outcomes.csv\"\n",
    );
    let io = netgame(dir.path(), &["estimate", "--config", "missing.toml"]);
    assert_eq!(code(&io), 4);

    write(
        dir.path(),
        "short.toml",
        "edges = \"data/edges.csv\"\ncovariates = \"data/covariates.csv\"\noutcomes = \"data/outcomes.csv\"\nh = 1\n[optimizer]\nmax_iter = 1\n",
    );
    let failed = netgame(dir.path(), &["estimate", "--config", "short.toml", "--out", "est"]);
    assert_eq!(code(&failed), 3);
    // results are still written for inspection
    assert_eq!(json(&dir.path().join("est/estimate.json"))["converged"], false);
}

/// Plain binary logit by Newton's method.
fn logit_oracle(x: &[[f64; 2]], y: &[usize]) -> [f64; 2] {
    let mut b = [0.0f64; 2];
    for _ in 0..100 {
        let mut g = [0.0; 2];
        let mut h = [[0.0; 2]; 2];
        for (xi, &yi) in x.iter().zip(y) {
            let p = 1.0 / (1.0 + (-(xi[0] * b[0] + xi[1] * b[1])).exp());
            let r = yi as f64 - p;
            for a in 0..2 {
                g[a] += r * xi[a];
                for c in 0..2 {
                    h[a][c] += p * (1.0 - p) * xi[a] * xi[c];
                }
            }
        }
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let step = [
            (h[1][1] * g[0] - h[0][1] * g[1]) / det,
            (h[0][0] * g[1] - h[1][0] * g[0]) / det,
        ];
        b[0] += step[0];
        b[1] += step[1];
        if step[0].abs().max(step[1].abs()) < 1e-14 {
            break;
        }
    }
    b
}

#[test]
fn radius_zero_estimate_is_a_plain_logit() {
    let dir = TempDir::new().unwrap();
    let n = 500;
    simulated_data(dir.path(), n, 0.6);
    write(
        dir.path(),
        "e.toml",
        "edges = \"data/edges.csv\"\ncovariates = \"data/covariates.csv\"\noutcomes = \"data/outcomes.csv\"\nh = 0\n[optimizer]\ngtol = 1e-10\n",
    );
    let out = netgame(dir.path(), &["estimate", "--config", "e.toml", "--out", "est"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    let (_, cov) = read_covariates(&dir.path().join("data/covariates.csv"), MissingPolicy::Error).unwrap();
    let x: Vec<[f64; 2]> = (0..n).map(|i| [cov.row(i)[0], cov.row(i)[1]]).collect();
    let y = read_outcomes(&dir.path().join("data/outcomes.csv"), n, 1).unwrap();
    let oracle = logit_oracle(&x, &y);

    let res = json(&dir.path().join("est/estimate.json"));
    assert_eq!(res["h"], 0);
    assert_eq!(res["converged"], true);
    for c in 0..2 {
        let b = res["theta_hat"]["beta"][0][c].as_f64().unwrap();
        assert!((b - oracle[c]).abs() < 1e-6, "beta[{c}] = {b}, oracle {}", oracle[c]);
        assert!(res["se"]["beta"][0][c].as_f64().unwrap() > 0.0);
    }
    assert_eq!(res["theta_hat"]["alpha"][0][0], 0.0);
    assert!(res["se"]["alpha"][0][0].is_null());

    let table = String::from_utf8(out.stdout).unwrap();
    assert!(
        table.contains("friends choosing 1") && table.contains("(fixed)"),
        "{table}"
    );
    assert!(table.contains("* significant at 10% level"));
    assert_eq!(table, fs::read_to_string(dir.path().join("est/estimate.txt")).unwrap());
}

#[test]
fn simulate_solve_and_estimate_rerun_identically() {
    let dir = TempDir::new().unwrap();
    simulated_data(dir.path(), 150, 0.4);
    let first = fs::read(dir.path().join("data/outcomes.csv")).unwrap();
    let out = netgame(dir.path(), &["simulate", "--config", "sim.toml", "--out", "again"]);
    assert_eq!(code(&out), 0);
    assert_eq!(first, fs::read(dir.path().join("again/outcomes.csv")).unwrap());
    assert_eq!(
        fs::read(dir.path().join("data/simulate.json")).unwrap(),
        fs::read(dir.path().join("again/simulate.json")).unwrap()
    );

    write(
        dir.path(),
        "e.toml",
        "edges = \"data/edges.csv\"\ncovariates = \"data/covariates.csv\"\noutcomes = \"data/outcomes.csv\"\nh = 1\n",
    );
    for o in ["e1", "e2"] {
        assert_eq!(
            code(&netgame(dir.path(), &["estimate", "--config", "e.toml", "--out", o])),
            0
        );
    }
    for f in ["estimate.json", "estimate.txt"] {
        assert_eq!(
            fs::read(dir.path().join("e1").join(f)).unwrap(),
            fs::read(dir.path().join("e2").join(f)).unwrap()
        );
    }

    // a radius reaching every player reproduces the exact equilibrium
    let sub = "h = 150\n".to_owned()
        + &fs::read_to_string(dir.path().join("sim.toml"))
            .unwrap()
            .replace("seed = 5\n", "")
        + "[solver]\ntol = 1e-13\n";
    write(dir.path(), "sub.toml", &sub);
    let exact = fs::read_to_string(dir.path().join("sim.toml"))
        .unwrap()
        .replace("seed = 5\n", "")
        + "[solver]\ntol = 1e-13\n";
    write(dir.path(), "exact.toml", &exact);
    assert_eq!(
        code(&netgame(dir.path(), &["solve", "--config", "sub.toml", "--out", "s1"])),
        0
    );
    assert_eq!(
        code(&netgame(
            dir.path(),
            &["solve", "--config", "exact.toml", "--out", "s2"]
        )),
        0
    );
    let rows = |p: &str| -> Vec<Vec<f64>> {
        fs::read_to_string(dir.path().join(p))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
            .collect()
    };
    let (a, b) = (rows("s1/profile.csv"), rows("s2/profile.csv"));
    assert_eq!(a.len(), 150);
    for (ra, rb) in a.iter().zip(&b) {
        let dist: f64 = ra.iter().zip(rb).map(|(u, v)| (u - v).abs()).sum();
        assert!(dist < 1e-10);
    }
}

#[test]
fn montecarlo_writes_replications_and_summary() {
    let dir = TempDir::new().unwrap();
    let cfg = format!(
        "network = \"circle\"\nn = 120\nreplications = 3\nladder = [0, 1]\nseed = 4\n[theta]\nbeta = [[0.5, 1.0]]\nalpha = [[0.5]]\n{COVARIATES}"
    );
    write(dir.path(), "mc.toml", &cfg);
    for o in ["m1", "m2"] {
        let out = netgame(
            dir.path(),
            &["montecarlo", "--config", "mc.toml", "--out", o, "--threads", "1"],
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    for f in ["replications.csv", "montecarlo.json"] {
        assert_eq!(
            fs::read(dir.path().join("m1").join(f)).unwrap(),
            fs::read(dir.path().join("m2").join(f)).unwrap()
        );
    }
    let csv = fs::read_to_string(dir.path().join("m1/replications.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 2 * 3);
    assert!(lines[0].starts_with("replication,h,converged,beta[1].const,beta[1].x,alpha[1][1],se_beta[1].const"));

    let summary = json(&dir.path().join("m1/montecarlo.json"));
    assert_eq!(summary["truth"], serde_json::json!([0.5, 1.0, 0.5]));
    let results = summary["results"].as_array().unwrap();
    assert_eq!(results.len(), 2);
    assert_eq!(results[1]["h"], 1);
    assert_eq!(results[1]["failures"], 0);
    let bias = results[1]["bias"][2].as_f64().unwrap();
    let mean = results[1]["mean"][2].as_f64().unwrap();
    assert!((mean - 0.5 - bias).abs() < 1e-12);
}

#[test]
fn npestimate_reports_estimate_matches_and_radius() {
    let dir = TempDir::new().unwrap();
    let gen = "network = \"circle\"\nn = 300\nseed = 2\n[[covariates]]\nname = \"c\"\ndist = \"constant\"\nvalue = 1.0\n[[covariates]]\nname = \"b\"\ndist = \"bernoulli\"\np = 0.5\n";
    write(dir.path(), "gen.toml", gen);
    assert_eq!(
        code(&netgame(
            dir.path(),
            &["generate", "--config", "gen.toml", "--out", "d"]
        )),
        0
    );
    write(
        dir.path(),
        "sim.toml",
        "edges = \"d/edges.csv\"\ncovariates = \"d/covariates.csv\"\n[theta]\nbeta = [[-0.5, 1.0]]\nalpha = [[1.0]]\n",
    );
    assert_eq!(
        code(&netgame(
            dir.path(),
            &["simulate", "--config", "sim.toml", "--out", "d"]
        )),
        0
    );
    write(
        dir.path(),
        "np.toml",
        "edges = \"d/edges.csv\"\ncovariates = \"d/covariates.csv\"\noutcomes = \"d/outcomes.csv\"\ntarget = 9\n",
    );

    let out = netgame(
        dir.path(),
        &["npestimate", "--config", "np.toml", "--h", "0", "--out", "d"],
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["h"], 0);
    assert_eq!(doc["target"], 9);

    // radius zero: share of Y = 1 among players sharing the target's covariates
    let (_, x) = read_covariates(&dir.path().join("d/covariates.csv"), MissingPolicy::Error).unwrap();
    let y = read_outcomes(&dir.path().join("d/outcomes.csv"), 300, 1).unwrap();
    let same: Vec<usize> = (0..300).filter(|&j| x.row(j) == x.row(8)).collect();
    let ones = same.iter().filter(|&&j| y[j] == 1).count();
    assert_eq!(doc["matches"], same.len());
    assert_eq!(doc["estimate"].as_f64().unwrap(), ones as f64 / same.len() as f64);

    // default radius floor(0.5 log2 300) = 4
    let out = netgame(dir.path(), &["npestimate", "--config", "np.toml"]);
    let doc: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["h"], 4);
    assert!((0.0..=1.0).contains(&doc["estimate"].as_f64().unwrap()));

    assert_eq!(
        code(&netgame(
            dir.path(),
            &["npestimate", "--config", "np.toml", "--target", "301"]
        )),
        2
    );
}

#[test]
fn npestimate_rejects_non_circles() {
    let dir = TempDir::new().unwrap();
    simulated_data(dir.path(), 60, 0.2);
    write(
        dir.path(),
        "np.toml",
        "edges = \"data/edges.csv\"\ncovariates = \"data/covariates.csv\"\noutcomes = \"data/outcomes.csv\"\n",
    );
    let out = netgame(dir.path(), &["npestimate", "--config", "np.toml", "--target", "1"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn generate_and_simulate_match_first_replication() {
    use netgame_core::{CovariateDist, MonteCarloDesign, NetworkKind, PayoffParams};

    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "gen.toml",
        &format!("network = \"random\"\nn = 80\n{COVARIATES}"),
    );
    assert_eq!(
        code(&netgame(
            dir.path(),
            &["generate", "--config", "gen.toml", "--seed", "31"]
        )),
        0
    );
    write(
        dir.path(),
        "sim.toml",
        "edges = \"edges.csv\"\ncovariates = \"covariates.csv\"\n[theta]\nbeta = [[0.3, 1.0]]\nalpha = [[0.7]]\n",
    );
    assert_eq!(
        code(&netgame(
            dir.path(),
            &["simulate", "--config", "sim.toml", "--seed", "31"]
        )),
        0
    );

    let theta = PayoffParams::new(1, 2, vec![0.3, 1.0], vec![0.7]).unwrap();
    let cols = vec![
        CovariateDist::Constant { value: 1.0 },
        CovariateDist::Normal { mean: 0.0, var: 1.0 },
    ];
    let design = MonteCarloDesign::new(NetworkKind::Random, 80, theta, cols, 1, 1, 31);
    let (data, _) = design.dataset(0).unwrap();
    assert_eq!(
        &read_edges(&dir.path().join("edges.csv"), 80).unwrap(),
        data.state().network()
    );
    let (_, x) = read_covariates(&dir.path().join("covariates.csv"), MissingPolicy::Error).unwrap();
    assert_eq!(&x, data.state().covariates());
    assert_eq!(
        read_outcomes(&dir.path().join("outcomes.csv"), 80, 1).unwrap(),
        data.actions()
    );
}
