use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_priorquant"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin()
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .expect("spawn priorquant")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} exited {:?}\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let p = dir.join("run.toml");
    fs::write(&p, body).unwrap();
    p
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn read(path: &Path) -> Self {
        let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let mut lines = text
            .lines()
            .map(|l| l.split(',').map(str::to_owned).collect::<Vec<_>>());
        let header = lines.next().unwrap();
        Self {
            header,
            rows: lines.collect(),
        }
    }

    fn col(&self, name: &str) -> usize {
        self.header
            .iter()
            .position(|h| h == name)
            .unwrap_or_else(|| panic!("no column {name}"))
    }

    fn f64s(&self, name: &str) -> Vec<f64> {
        let c = self.col(name);
        self.rows.iter().map(|r| r[c].parse().unwrap()).collect()
    }

    fn strs(&self, name: &str) -> Vec<&str> {
        let c = self.col(name);
        self.rows.iter().map(|r| r[c].as_str()).collect()
    }
}

#[test]
fn design_writes_a_decreasing_table_and_quantizer_files() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["design"]);
    let t = Table::read(&dir.path().join("design.csv"));
    assert_eq!(
        t.header,
        [
            "levels",
            "source_levels",
            "criterion",
            "mbre",
            "max_bre",
            "boundary_bre_spread",
            "iterations",
            "converged",
            "reps_out_of_range",
            "file"
        ]
    );
    assert_eq!(t.strs("levels"), ["1", "2", "3", "4"]);
    assert_eq!(t.strs("source_levels"), ["1", "6", "11", "16"]);
    let mbre = t.f64s("mbre");
    assert!(mbre.windows(2).all(|w| w[1] < w[0]), "{mbre:?}");
    for (m, x) in mbre.iter().zip(t.f64s("max_bre")) {
        assert!(x >= *m);
    }
    assert!(t.strs("converged").iter().all(|c| *c == "true"));
    for k in 1..=4 {
        assert!(dir.path().join(format!("quantizer_k{k}.toml")).exists());
    }

    // one level: every agent holds the same single rep
    let k1 = fs::read_to_string(dir.path().join("quantizer_k1.toml")).unwrap();
    let v: toml::Value = toml::from_str(&k1).unwrap();
    let agents = v["agent"].as_array().unwrap();
    assert_eq!(agents.len(), 5);
    for a in agents {
        assert_eq!(a["reps"].as_array().unwrap().len(), 1);
        assert_eq!(a["reps"], agents[0]["reps"]);
    }
}

#[test]
fn minimax_designs_level_the_boundary_bre() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[design]\nlevels = [2, 3]\ncriterion = \"minimax\"\n",
    );
    ok(dir.path(), &["design", "--config", cfg.to_str().unwrap()]);
    let t = Table::read(&dir.path().join("design.csv"));
    assert_eq!(t.strs("criterion"), ["minimax", "minimax"]);
    for s in t.f64s("boundary_bre_spread") {
        assert!(s <= 1e-6, "{s}");
    }
}

#[test]
fn evaluate_reproduces_the_stored_summary() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["design"]);
    let q = dir.path().join("quantizer_k3.toml");
    let stdout = ok(dir.path(), &["evaluate", q.to_str().unwrap()]);
    assert!(stdout.contains("summary matches"), "{stdout}");
    let t = Table::read(&dir.path().join("evaluate.csv"));
    assert_eq!(
        t.header,
        [
            "p0",
            "effective_prior",
            "threshold",
            "true_risk",
            "mismatched_risk",
            "bre"
        ]
    );
    assert_eq!(t.rows.len(), 1001);
    for (i, b) in t.f64s("bre").into_iter().enumerate() {
        assert!(b >= -1e-12, "row {i}: {b}");
    }
}

#[test]
fn single_level_risk_is_linear_in_the_prior() {
    let dir = TempDir::new().unwrap();
    ok(dir.path(), &["design"]);
    let q = dir.path().join("quantizer_k1.toml");
    ok(
        dir.path(),
        &["evaluate", q.to_str().unwrap(), "--grid", "201"],
    );
    let t = Table::read(&dir.path().join("evaluate.csv"));
    let r = t.f64s("mismatched_risk");
    for w in r.windows(3) {
        assert!((w[0] - 2.0 * w[1] + w[2]).abs() < 1e-10, "{w:?}");
    }
}

#[test]
fn fine_hand_written_quantizer_has_negligible_bre() {
    let dir = TempDir::new().unwrap();
    let cells = 10_000;
    let b: Vec<String> = (0..=cells)
        .map(|i| format!("{:?}", i as f64 / cells as f64))
        .collect();
    let r: Vec<String> = (0..cells)
        .map(|i| format!("{:?}", (i as f64 + 0.5) / cells as f64))
        .collect();
    let q = dir.path().join("fine.toml");
    fs::write(
        &q,
        format!(
            "[source]\nboundaries = [{}]\nreps = [{}]\n",
            b.join(", "),
            r.join(", ")
        ),
    )
    .unwrap();
    let stdout = ok(dir.path(), &["evaluate", q.to_str().unwrap()]);
    assert!(!stdout.contains("summary matches"));
    let t = Table::read(&dir.path().join("evaluate.csv"));
    let worst = t.f64s("bre").into_iter().fold(0.0, f64::max);
    assert!(worst <= 1e-6, "{worst}");
}

#[test]
fn sweep_diverse_banks_match_the_finer_identical_design() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[sweep]\nmax_levels = 3\nthreshold_agents = [1, 3]\n",
    );
    ok(
        dir.path(),
        &["sweep", "--config", cfg.to_str().unwrap(), "--grid", "101"],
    );

    let t = Table::read(&dir.path().join("mbre_vs_levels.csv"));
    assert_eq!(
        t.header,
        [
            "rule",
            "n",
            "l",
            "levels",
            "identical_mbre",
            "diverse_mbre",
            "identical_fine_levels",
            "identical_fine_mbre",
            "oblivious_mbre",
            "converged"
        ]
    );
    assert_eq!(t.rows.len(), 6);
    let diverse = t.f64s("diverse_mbre");
    let fine = t.f64s("identical_fine_mbre");
    let identical = t.f64s("identical_mbre");
    for i in 0..t.rows.len() {
        assert!((diverse[i] - fine[i]).abs() <= 1e-8, "row {i}");
        assert!(diverse[i] <= identical[i] + 1e-12, "row {i}");
    }
    let rules = t.strs("rule");
    let levels = t.strs("levels");
    for i in 0..t.rows.len() {
        if rules[i] != "majority" {
            continue;
        }
        let j = (0..t.rows.len())
            .find(|&j| rules[j] == "or" && levels[j] == levels[i])
            .unwrap();
        assert!(identical[i] <= identical[j], "levels {}", levels[i]);
    }

    let th = Table::read(&dir.path().join("thresholds.csv"));
    assert_eq!(th.header, ["rule", "n", "p0", "threshold"]);
    assert_eq!(th.rows.len(), 4 * 101);

    let rf = Table::read(&dir.path().join("risk_vs_fusion.csv"));
    assert_eq!(rf.header, ["n", "l", "mean_true_risk"]);
    assert_eq!(rf.strs("l"), ["1", "2", "3", "4", "5"]);
}

#[test]
fn exponential_risk_is_lowest_for_or_fusion() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"exponential\"\n\n[sweep]\nmax_levels = 1\nthreshold_agents = [3]\n",
    );
    ok(
        dir.path(),
        &["sweep", "--config", cfg.to_str().unwrap(), "--grid", "11"],
    );
    let t = Table::read(&dir.path().join("risk_vs_fusion.csv"));
    let risk = t.f64s("mean_true_risk");
    let best = (0..risk.len())
        .min_by(|&a, &b| risk[a].total_cmp(&risk[b]))
        .unwrap();
    assert_eq!(t.strs("l")[best], "1", "{risk:?}");
}

#[test]
fn simulate_is_reproducible_and_passes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[simulation]\ntrials = 100000\nseed = 11\n");
    let c = cfg.to_str().unwrap();
    ok(dir.path(), &["simulate", "--config", c]);
    let first = fs::read(dir.path().join("simulate.csv")).unwrap();
    ok(dir.path(), &["simulate", "--config", c]);
    assert_eq!(first, fs::read(dir.path().join("simulate.csv")).unwrap());
    ok(dir.path(), &["simulate", "--config", c, "--seed", "12"]);
    assert_ne!(first, fs::read(dir.path().join("simulate.csv")).unwrap());

    let t = Table::read(&dir.path().join("simulate.csv"));
    assert_eq!(
        t.header,
        [
            "protocol",
            "p0",
            "quantity",
            "analytic",
            "empirical",
            "std_err",
            "z",
            "count",
            "verdict"
        ]
    );
    assert_eq!(t.rows.len(), 2 * 5 * 3);
    assert!(t.strs("verdict").iter().all(|v| *v == "pass"));
}

#[test]
fn simulate_with_a_quantizer_file() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[design]\nlevels = 2\n\n[simulation]\ntrials = 100000\n",
    );
    let c = cfg.to_str().unwrap();
    ok(dir.path(), &["design", "--config", c]);
    let q = dir.path().join("quantizer_k2.toml");
    ok(
        dir.path(),
        &["simulate", "--config", c, q.to_str().unwrap()],
    );
    let t = Table::read(&dir.path().join("simulate.csv"));
    assert!(t.strs("verdict").iter().all(|v| *v == "pass"));
}

#[test]
fn tiny_simulations_make_no_claim() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "[simulation]\ntrials = 1\npriors = [0.5]\n");
    ok(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    let t = Table::read(&dir.path().join("simulate.csv"));
    assert!(t.strs("verdict").iter().all(|v| *v == "n/a"));
}

#[test]
fn bad_configs_exit_with_one_and_name_the_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[model]\nkind = \"gaussian\"\n\n[fusion]\nn = 5\nquorum = 3\n",
    );
    let out = run(dir.path(), &["design", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.toml:6"), "{err}");

    let cfg = write_config(dir.path(), "[fusion]\nn = 3\nl = 4\n");
    let out = run(dir.path(), &["design", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("run.toml:3"), "{err}");

    let out = run(
        dir.path(),
        &[
            "evaluate",
            dir.path().join("missing.toml").to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let out = run(dir.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    let out = run(dir.path(), &["sweep", "--grid", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn stalled_designs_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "[design]\nlevels = 3\nmax_iter = 1\nrestarts = 0\n",
    );
    let out = run(dir.path(), &["design", "--config", cfg.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    // the table is still written
    let t = Table::read(&dir.path().join("design.csv"));
    assert_eq!(t.strs("converged"), ["false"]);
}
