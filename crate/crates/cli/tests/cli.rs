use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hjnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hjnet")).args(args).output().expect("runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn assert_ok(out: &Output) {
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

/// Splits `# {config}` from the CSV rows that follow it.
fn header_and_rows(text: &str) -> (Value, Vec<Vec<String>>) {
    let mut lines = text.lines();
    let first = lines.next().expect("header line");
    let config = serde_json::from_str(first.strip_prefix("# ").expect("comment header")).unwrap();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (config, rows)
}

fn write_interval(dir: &Path) -> String {
    let path = dir.join("interval.json");
    std::fs::write(&path, r#"{"vertices": [[0, 0], [1, 0]], "edges": [[0, 1, 1.0]]}"#).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn build_koch_three() {
    let out = hjnet(&["build", "--space", r#"{"kind":"koch","n":3}"#]);
    assert_ok(&out);
    let file: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let edges = file["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 64);
    for e in edges {
        assert!((e[2].as_f64().unwrap() - 1.0 / 27.0).abs() < 1e-15);
    }
    assert_eq!(file["meta"]["kind"], "koch");
    assert_eq!(file["meta"]["seed"], 0);
}

#[test]
fn build_vicsek_seed() {
    let out = hjnet(&["build", "--space", r#"{"kind":"vicsek","n":0}"#]);
    assert_ok(&out);
    let file: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(file["vertices"].as_array().unwrap().len(), 5);
    let edges = file["edges"].as_array().unwrap();
    assert_eq!(edges.len(), 4);
    assert!(edges.iter().all(|e| e[2] == 3.0));
}

#[test]
fn build_lattice_is_connected() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out =
        hjnet(&["build", "--space", r#"{"kind":"lattice","n":2,"window":[0,0,1,1]}"#, "--out", out_dir]);
    assert_ok(&out);
    let path = dir.path().join("lattice_2.json");
    let text = std::fs::read_to_string(&path).unwrap();
    let file: Value = serde_json::from_str(&text).unwrap();
    let n = file["vertices"].as_array().unwrap().len();
    assert_eq!(n, 9);

    // union-find over the written edges
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for e in file["edges"].as_array().unwrap() {
        let (a, b) = (e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize);
        let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
        parent[ra] = rb;
    }
    let r0 = root(&mut parent, 0);
    assert!((0..n).all(|i| root(&mut parent, i) == r0));

    // the written file loads back through the validating loader
    let back = hjnet(&["dist", "--network", path.to_str().unwrap(), "--from", "0,0", "--to", "1,1"]);
    assert_ok(&back);
    let (_, rows) = header_and_rows(&stdout(&back));
    assert_eq!(rows[1][0].parse::<f64>().unwrap(), 2.0);
}

#[test]
fn build_several_levels() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = hjnet(&[
        "build",
        "--space",
        r#"{"kind":"sierpinski_network","n":0}"#,
        "--levels",
        "1,2",
        "--out",
        out_dir,
    ]);
    assert_ok(&out);
    for (n, edges) in [(1, 9), (2, 27)] {
        let text = std::fs::read_to_string(dir.path().join(format!("sierpinski_network_{n}.json"))).unwrap();
        let file: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(file["edges"].as_array().unwrap().len(), edges);
        assert_eq!(file["meta"]["n"], n);
    }
}

#[test]
fn build_rejects_bad_descriptors() {
    let unknown = hjnet(&["build", "--space", r#"{"kind":"dragon","n":3}"#]);
    assert_eq!(unknown.status.code(), Some(2));
    let deep = hjnet(&["build", "--space", r#"{"kind":"koch","n":40}"#]);
    assert_eq!(deep.status.code(), Some(2));
}

#[test]
fn koch_endpoint_distance() {
    let out = hjnet(&["dist", "--network", r#"{"kind":"koch","n":4}"#, "--from", "0,0", "--to", "1,0"]);
    assert_ok(&out);
    let (config, rows) = header_and_rows(&stdout(&out));
    assert_eq!(rows[0], ["distance"]);
    let d: f64 = rows[1][0].parse().unwrap();
    let expected = (4.0f64 / 3.0).powi(4);
    assert!((d - 3.160493827).abs() < 1e-9 && (d - expected).abs() < 1e-12 * expected, "{d}");
    assert_eq!(config["network"]["kind"], "koch");
    assert_eq!(config["seed"], 0);
}

#[test]
fn lattice_to_square_hausdorff() {
    let out = hjnet(&[
        "hausdorff",
        "--a",
        r#"{"kind":"lattice","n":4,"window":[0,0,1,1]}"#,
        "--b",
        r#"{"kind":"plane","window":[0,0,1,1]}"#,
        "--density",
        "0.01",
    ]);
    assert_ok(&out);
    let (config, rows) = header_and_rows(&stdout(&out));
    assert_eq!(config["metric"], "manhattan");
    assert_eq!(config["density"], 0.01);
    let d: f64 = rows[1][1].parse().unwrap();
    // a cell centre lies 1/8 from the nearest line
    assert!((d - 0.125).abs() <= 0.012, "{d}");
    assert!(d <= 2f64.sqrt() / 8.0 + 0.01);
}

#[test]
fn hausdorff_over_levels_decreases() {
    let out = hjnet(&[
        "hausdorff",
        "--a",
        r#"{"kind":"lattice","n":1,"window":[0,0,1,1]}"#,
        "--b",
        r#"{"kind":"plane","window":[0,0,1,1]}"#,
        "--density",
        "0.02",
        "--levels",
        "1,2,4",
    ]);
    assert_ok(&out);
    let (_, rows) = header_and_rows(&stdout(&out));
    let gaps: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(gaps.len(), 3);
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn eikonal_on_an_interval_is_the_offset() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_interval(dir.path());
    let out = hjnet(&["solve", "--network", &net, "--json", r#"{"boundary":[{"at":[0,0]}]}"#]);
    assert_ok(&out);
    let (config, rows) = header_and_rows(&stdout(&out));
    assert_eq!(config["solver"]["kind"], "eikonal");
    assert_eq!(rows[0], ["node", "edge", "offset", "x", "y", "value"]);
    assert!(rows.len() > 2);
    for r in &rows[1..] {
        let (offset, value): (f64, f64) = (r[2].parse().unwrap(), r[5].parse().unwrap());
        assert!((offset - value).abs() < 1e-15, "{r:?}");
    }
}

#[test]
fn discounted_solve_matches_formula() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_interval(dir.path());
    let config = r#"{"solver":{"kind":"discounted"},"lambda":2,"boundary":[{"at":[0,0]}]}"#;
    let out = hjnet(&["solve", "--network", &net, "--json", config]);
    assert_ok(&out);
    let (_, rows) = header_and_rows(&stdout(&out));
    for r in &rows[1..] {
        let (x, u): (f64, f64) = (r[2].parse().unwrap(), r[5].parse().unwrap());
        let expected = (1.0 - (-2.0 * x).exp()) / 2.0;
        assert!((u - expected).abs() < 1e-8, "{x}: {u} vs {expected}");
    }
}

#[test]
fn viscosity_check_passes_and_fails() {
    let dir = tempfile::tempdir().unwrap();
    let net = write_interval(dir.path());
    let field = dir.path().join("field.csv");
    let solved = hjnet(&["solve", "--network", &net, "--json", r#"{"boundary":[{"at":[0,0]}]}"#]);
    assert_ok(&solved);
    std::fs::write(&field, stdout(&solved)).unwrap();

    let check = |field: &Path, out_dir: &Path| {
        hjnet(&[
            "viscosity-check",
            "--network",
            &net,
            "--field",
            field.to_str().unwrap(),
            "--json",
            r#"{"exclude":[[0,0]]}"#,
            "--out",
            out_dir.to_str().unwrap(),
        ])
    };
    let good = dir.path().join("good");
    let out = check(&field, &good);
    assert_ok(&out);
    let (config, rows) = header_and_rows(&std::fs::read_to_string(good.join("violations.csv")).unwrap());
    assert!(config["radius"].as_f64().unwrap() > 0.0);
    assert_eq!(rows.len(), 1);

    // doubling the slope breaks the subsolution inequality
    let doubled: String = stdout(&solved)
        .lines()
        .enumerate()
        .map(|(i, l)| {
            if i < 2 {
                return format!("{l}\n");
            }
            let mut cols: Vec<String> = l.split(',').map(str::to_string).collect();
            let v: f64 = cols[5].parse().unwrap();
            cols[5] = (2.0 * v).to_string();
            cols.join(",") + "\n"
        })
        .collect();
    let field2 = dir.path().join("doubled.csv");
    std::fs::write(&field2, doubled).unwrap();
    let bad = dir.path().join("bad");
    let out = check(&field2, &bad);
    assert_eq!(out.status.code(), Some(1));
    let (_, rows) = header_and_rows(&std::fs::read_to_string(bad.join("violations.csv")).unwrap());
    assert!(rows.len() > 1);
    assert!(rows[1..].iter().all(|r| r[4] == "SUB"));
}

#[test]
fn check_h2_verdicts_set_the_exit_code() {
    let sierpinski = r#"{"family":{"kind":"sierpinski_vertices","n":0},"limit":{"kind":"sierpinski_network","n":6},"pairs":100}"#;
    let dir = tempfile::tempdir().unwrap();
    let out = hjnet(&[
        "check-h2",
        "--json",
        sierpinski,
        "--levels",
        "3,4,5",
        "--density",
        "0.02",
        "--seed",
        "11",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_ok(&out);
    let (config, rows) = header_and_rows(&std::fs::read_to_string(dir.path().join("h2.csv")).unwrap());
    assert_eq!(config["seed"], 11);
    assert_eq!(config["tolerance"], 0.05);
    assert_eq!(rows.len(), 4);

    let arc = r#"{"family":{"kind":"arc","n":1},"limit":{"kind":"circle"},"pairs":50}"#;
    let out = hjnet(&["check-h2", "--json", arc, "--levels", "10,20,40", "--density", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("verdict: FAIL"));
}

#[test]
fn stability_writes_report_and_plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("stability.json");
    std::fs::write(
        &config,
        r#"{
            "family": {"kind": "sierpinski_network", "n": 0},
            "limit": {"kind": "sierpinski_network", "n": 6},
            "levels": [1, 2, 3],
            "boundary": [{"at": [-0.5, 0]}],
            "density": 0.02,
            "tolerance": 0.2
        }"#,
    )
    .unwrap();
    let out =
        hjnet(&["stability", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_ok(&out);
    let (header, rows) = header_and_rows(&std::fs::read_to_string(dir.path().join("report.csv")).unwrap());
    assert_eq!(header["levels"], serde_json::json!([1, 2, 3]));
    assert_eq!(rows.len(), 4);
    let errors: Vec<f64> = rows[1..].iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(errors[2] < errors[0], "{errors:?}");

    let plot = std::fs::read_to_string(dir.path().join("plot.dat")).unwrap();
    let data: Vec<&str> = plot.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data.len(), 3);
    assert!(data.iter().all(|l| l.split_whitespace().count() == 2));

    // an unreachable tolerance fails with exit code 1
    let out = hjnet(&["stability", "--config", config.to_str().unwrap(), "--json", r#"{"tolerance":1e-9}"#]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn outputs_are_reproducible() {
    let args = [
        "check-h2",
        "--json",
        r#"{"family":{"kind":"sierpinski_vertices","n":0},"limit":{"kind":"sierpinski_network","n":5},"pairs":40}"#,
        "--levels",
        "1,2",
        "--density",
        "0.05",
        "--seed",
        "3",
    ];
    let a = hjnet(&args);
    let b = hjnet(&args);
    assert!(matches!(a.status.code(), Some(0 | 1)));
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("# {"));
}

#[test]
fn errors_exit_with_two() {
    let out = hjnet(&["dist", "--network", "/nonexistent.json", "--from", "0,0", "--to", "1,0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = hjnet(&[
        "dist",
        "--density",
        "0.1",
        "--network",
        r#"{"kind":"koch","n":1}"#,
        "--from",
        "0,0",
        "--to",
        "1,0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
