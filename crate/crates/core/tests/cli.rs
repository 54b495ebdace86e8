use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hsurf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hsurf"))
        .args(args)
        .output()
        .expect("spawn hsurf")
}

fn ok(args: &[&str]) -> String {
    let out = hsurf(args);
    assert!(
        out.status.success(),
        "hsurf {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    hsurf(args).status.code().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn simulate_writes_one_row_per_pe() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&[
        "simulate",
        "--grid",
        "3x3",
        "--generations",
        "250",
        "--treatment",
        "neutral",
        "--layout",
        "tagged",
        "--out",
        p(&out),
    ]);
    let genomes = fs::read_to_string(out.join("genomes.csv")).unwrap();
    assert_eq!(genomes.lines().count(), 10);
    assert!(genomes.lines().skip(1).all(|l| l.contains(",250,")));
    assert!(!out.join("perfect_tree.csv").exists());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 0);
    assert_eq!(manifest["config"]["grid"]["generations"], 250);
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 1);
}

#[test]
fn degenerate_grid_runs() {
    let dir = tempfile::tempdir().unwrap();
    ok(&[
        "simulate",
        "--grid",
        "1x1",
        "--generations",
        "10",
        "--out",
        p(dir.path()),
    ]);
    let genomes = fs::read_to_string(dir.path().join("genomes.csv")).unwrap();
    assert_eq!(genomes.lines().count(), 2);
}

#[test]
fn manifest_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&[
        "simulate",
        "--grid",
        "4x3",
        "--generations",
        "80",
        "--layout",
        "fitness",
        "--treatment",
        "adaptive",
        "--seed",
        "9",
        "--track-perfect",
        "--samples-per-pe",
        "2",
        "--out",
        p(&a),
    ]);
    ok(&[
        "simulate",
        "--config",
        p(&a.join("manifest.json")),
        "--out",
        p(&b),
    ]);
    for f in ["genomes.csv", "perfect_tree.csv"] {
        assert_eq!(
            fs::read(a.join(f)).unwrap(),
            fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
    assert_eq!(
        fs::read_to_string(b.join("genomes.csv"))
            .unwrap()
            .lines()
            .count(),
        25
    );
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(
        &config,
        r#"{"grid": {"width": 2, "height": 2, "generations": 30}, "layout": {"policy": "steady"}}"#,
    )
    .unwrap();
    ok(&[
        "simulate",
        "--config",
        p(&config),
        "--generations",
        "12",
        "--out",
        p(dir.path()),
    ]);
    let genomes = fs::read_to_string(dir.path().join("genomes.csv")).unwrap();
    assert_eq!(genomes.lines().count(), 5);
    assert!(genomes.lines().skip(1).all(|l| l.contains(",12,")));
    assert!(genomes.contains("tagged/steady/64x1"));
}

#[test]
fn invalid_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path());
    assert_eq!(
        code(&["simulate", "--treatment", "purifying", "--out", out]),
        2
    );
    assert_eq!(code(&["simulate", "--grid", "3", "--out", out]), 2);
    assert_eq!(code(&["simulate", "--grid", "0x3", "--out", out]), 2);
    assert_eq!(
        code(&["simulate", "--surface-slots", "48", "--out", out]),
        2
    );
    assert_eq!(code(&["simulate", "--policy", "sideways", "--out", out]), 2);
    assert_eq!(
        code(&[
            "simulate",
            "--scheduler",
            "parallel",
            "--track-perfect",
            "--out",
            out
        ]),
        2
    );
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn reconstruct_groups_founder_clades() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&[
        "simulate",
        "--grid",
        "3x3",
        "--generations",
        "25",
        "--seed",
        "3",
        "--out",
        p(&run),
    ]);
    let csv_out = dir.path().join("tree.csv");
    let summary = ok(&[
        "reconstruct",
        "--genomes",
        p(&run.join("genomes.csv")),
        "--out",
        p(&csv_out),
    ]);
    assert!(summary.contains("9 leaves"), "{summary}");
    let tree = fs::read_to_string(&csv_out).unwrap();
    assert!(tree.starts_with("id,ancestor_list,origin_time,taxon_label,founder_tag\n"));
    let newick_out = dir.path().join("tree.newick");
    let stitched = ok(&[
        "reconstruct",
        "--genomes",
        p(&run.join("genomes.csv")),
        "--stitch",
        "--out",
        p(&newick_out),
    ]);
    assert!(stitched.contains("1 roots"), "{stitched}");
    assert!(fs::read_to_string(&newick_out)
        .unwrap()
        .trim_end()
        .ends_with(';'));
}

#[test]
fn reconstruct_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let empty = dir.path().join("empty.csv");
    fs::write(&empty, "").unwrap();
    let out = dir.path().join("t.newick");
    assert_eq!(
        code(&["reconstruct", "--genomes", p(&empty), "--out", p(&out)]),
        1
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&[
        "simulate",
        "--grid",
        "1x1",
        "--generations",
        "5",
        "--out",
        p(&a),
    ]);
    ok(&[
        "simulate",
        "--grid",
        "1x1",
        "--generations",
        "5",
        "--layout",
        "fitness",
        "--out",
        p(&b),
    ]);
    let mixed = dir.path().join("mixed.csv");
    let other = fs::read_to_string(b.join("genomes.csv")).unwrap();
    fs::write(
        &mixed,
        fs::read_to_string(a.join("genomes.csv")).unwrap() + other.lines().nth(1).unwrap() + "\n",
    )
    .unwrap();
    let res = hsurf(&["reconstruct", "--genomes", p(&mixed), "--out", p(&out)]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("layout"));
}

#[test]
fn metrics_on_star_and_unknown_name() {
    let dir = tempfile::tempdir().unwrap();
    let star = dir.path().join("star.newick");
    fs::write(&star, "(a:1,b:1,c:1,d:1):0;\n").unwrap();
    let out = dir.path().join("m.csv");
    ok(&[
        "metrics",
        "--tree",
        p(&star),
        "--metrics",
        "colless,sbl",
        "--out",
        p(&out),
    ]);
    let table = fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = table.lines().collect();
    assert_eq!(rows[0], "tree,metric,value");
    assert!(rows[1].ends_with(",colless,0.0"), "{}", rows[1]);
    assert!(rows[2].ends_with(",sbl,4.0"), "{}", rows[2]);
    let res = hsurf(&["metrics", "--tree", p(&star), "--metrics", "bogus"]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("sbl") && err.contains("colless"), "{err}");
}

#[test]
fn compare_reads_directories_and_globs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    fs::create_dir_all(&a).unwrap();
    fs::create_dir_all(&b).unwrap();
    for i in 0..3 {
        fs::write(
            a.join(format!("{i}.csv")),
            format!("tree,metric,value\nt,sbl,{}\nt,spd,0\n", 10 + i),
        )
        .unwrap();
        fs::write(
            b.join(format!("{i}.csv")),
            format!("tree,metric,value\nt,sbl,{}\n", i),
        )
        .unwrap();
    }
    let report = ok(&[
        "compare",
        "--a",
        p(&a),
        "--b",
        &format!("{}/*.csv", p(&b)),
        "--metric",
        "sbl",
    ]);
    assert!(report.contains("d = 1.0000 (large)"), "{report}");
    assert!(report.contains("n_a = 3, n_b = 3"), "{report}");
    assert_eq!(
        code(&["compare", "--a", p(&a), "--b", p(&b), "--metric", "bogus"]),
        2
    );
    assert_eq!(
        code(&["compare", "--a", p(&a), "--b", p(&b), "--metric", "mpd"]),
        1
    );
}

#[test]
fn oracle_exit_codes() {
    let steady = ok(&[
        "oracle",
        "--policy",
        "steady",
        "--surface-slots",
        "64",
        "--max-n",
        "16384",
    ]);
    assert!(steady.trim_end().ends_with("pass"), "{steady}");
    assert_eq!(
        code(&[
            "oracle",
            "--policy",
            "tilted",
            "--surface-slots",
            "8",
            "--max-n",
            "1024"
        ]),
        1
    );
    let clamp = ok(&[
        "oracle",
        "--policy",
        "tilted",
        "--surface-slots",
        "8",
        "--max-n",
        "1024",
        "--allow-clamp",
    ]);
    assert!(clamp.contains("clamp regime"), "{clamp}");
    assert_eq!(
        code(&[
            "oracle",
            "--policy",
            "steady",
            "--surface-slots",
            "12",
            "--max-n",
            "10"
        ]),
        2
    );
}

#[test]
fn bench_completes() {
    let table = ok(&["bench", "--deposits", "10000", "--generations", "50"]);
    for needle in [
        "deposit steady",
        "deposit tilted",
        "deposit hybrid",
        "gen/s",
        "perfect tracker",
    ] {
        assert!(table.contains(needle), "{table}");
    }
}
