use std::process::{Command, Output};

fn pbl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pbl"))
        .args(args)
        .env_remove("PBL_PRECISION_BITS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn row(csv: &str, n: &str) -> String {
    csv.lines()
        .find(|l| l.split(',').next() == Some(n))
        .unwrap_or_else(|| panic!("no row {n}"))
        .to_owned()
}

#[test]
fn published_rows() {
    let t1 = stdout(&pbl(&["tables", "--which", "1"]));
    assert_eq!(t1.lines().next(), Some("n,d_ab,d_ba,diff"));
    assert_eq!(row(&t1, "35"), "35,295,199,96");
    assert_eq!(t1.lines().count(), 51);
    assert_eq!(
        row(&stdout(&pbl(&["tables", "--which", "2"])), "50"),
        "50,603,935,-332"
    );
    let t3 = stdout(&pbl(&["tables", "--which", "3"]));
    assert_eq!(row(&t3, "16"), "16,24,8,16");
    assert_eq!(t3.lines().count(), 18);
}

#[test]
fn exact_matches_tables() {
    let e = stdout(&pbl(&[
        "exact", "--N", "2", "--K", "0", "--alpha", "1", "--beta", "2", "--nmax", "50",
    ]));
    assert_eq!(e.lines().count(), 52);
    let t = stdout(&pbl(&["tables", "--which", "1"]));
    assert!(e.ends_with(&t[t.find('\n').unwrap() + 1..]));
    assert_eq!(
        stdout(&pbl(&["exact", "--nmax", "0"])),
        "n,d_ab,d_ba,diff\n0,0,0,0\n"
    );
    let n3 = stdout(&pbl(&["exact", "--N", "3", "--nmax", "17"]));
    assert_eq!(row(&n3, "13"), "13,14,4,10");
}

#[test]
fn figure_series() {
    let f3 = stdout(&pbl(&["figure-data", "--which", "3"]));
    assert_eq!(row(&f3, "13"), "13,10");
    assert_eq!(f3.lines().count(), 102);
    let f1 = stdout(&pbl(&["figure-data", "--which", "1"]));
    assert_eq!(row(&f1, "2"), "2,-1,-1");
    let f2 = stdout(&pbl(&["figure-data", "--which", "2", "--max-n", "400"]));
    assert_eq!(f2.lines().next(), Some("n,inv_n,scaled_k0,scaled_k1"));
    let last = f2.lines().last().unwrap();
    let cells: Vec<f64> = last.split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(cells[0], 400.0);
    assert!(cells[2] > 0.0 && cells[3] < 0.0);
}

#[test]
fn scaled_compare_approaches_constants() {
    let out = stdout(&pbl(&["compare", "--scaled", "--nmax", "2000"]));
    let last: f64 = out
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((last - 0.05103).abs() / 0.05103 < 0.25);
    let k1 = stdout(&pbl(&["compare", "--K", "1", "--scaled", "--nmax", "200"]));
    for line in k1
        .lines()
        .skip(1)
        .filter(|l| l.split(',').next().unwrap().parse::<u32>().unwrap() >= 29)
    {
        assert!(line.split(',').nth(2).unwrap().starts_with('-'), "{line}");
    }
    let m3 = stdout(&pbl(&[
        "compare",
        "--N",
        "3",
        "--scaled",
        "--residue",
        "2",
        "--nmax",
        "1000",
    ]));
    for line in m3.lines().skip(1) {
        assert_eq!(
            line.split(',').next().unwrap().parse::<u32>().unwrap() % 3,
            2
        );
    }
    let tail: f64 = m3
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(2)
        .unwrap()
        .parse()
        .unwrap();
    assert!((tail + 1.0 / 12.0).abs() < 0.3 / 12.0);
}

#[test]
fn compare_ratio_column() {
    let out = stdout(&pbl(&["compare", "--nmax", "500", "--order", "4"]));
    assert_eq!(out.lines().next(), Some("n,exact,estimate,ratio"));
    let ratio: f64 = out
        .lines()
        .last()
        .unwrap()
        .split(',')
        .nth(3)
        .unwrap()
        .parse()
        .unwrap();
    assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
}

#[test]
fn exit_codes() {
    assert_eq!(pbl(&["tables", "--which", "1"]).status.code(), Some(0));
    assert_eq!(pbl(&["tables", "--which", "4"]).status.code(), Some(2));
    assert_eq!(pbl(&["figure-data", "--which", "5"]).status.code(), Some(2));
    assert_eq!(pbl(&["exact", "--N", "1"]).status.code(), Some(2));
    assert_eq!(
        pbl(&["exact", "--alpha", "2", "--beta", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(pbl(&["exact", "--nmax", "-3"]).status.code(), Some(2));
    assert_eq!(pbl(&["asym"]).status.code(), Some(2));
    assert_eq!(pbl(&["bogus"]).status.code(), Some(2));
    let simplified = pbl(&["asym", "--N", "3", "--n", "100", "--method", "simplified"]);
    assert_eq!(simplified.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&simplified.stderr).contains("N = 2 or N >= 5"));
    assert_eq!(
        pbl(&["exact", "--nmax", "100000000"]).status.code(),
        Some(3)
    );
    assert_eq!(
        pbl(&["asym", "--N", "8", "--n", "100"]).status.code(),
        Some(3)
    );
    // too short a range to locate the K = 1 sign change
    let v = pbl(&["verify", "--suite", "conjectures", "--nmax", "25"]);
    assert_eq!(v.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&v.stderr).contains("\"pass\":false"));
}

#[test]
fn verify_suites_pass() {
    for suite in ["lemmas", "expansion"] {
        let o = pbl(&["verify", "--suite", suite]);
        assert_eq!(o.status.code(), Some(0), "{suite}");
        for line in stdout(&o).lines() {
            let v: serde_json::Value = serde_json::from_str(line).unwrap();
            assert_ne!(v["pass"], false, "{line}");
        }
    }
    let o = pbl(&["verify", "--suite", "expansion"]);
    let grid = stdout(&o)
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap())
        .find(|v| {
            v["check"]
                .as_str()
                .unwrap()
                .starts_with("g_vs_expansion ell")
        })
        .unwrap();
    for key in ["epsilon", "y", "R", "g", "expansion", "rel_err"] {
        assert!(grid.get(key).is_some(), "{key}");
    }
    assert!(grid["g"].as_str().unwrap().ends_with('i'));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["exact", "--N", "4", "--K", "1", "--nmax", "300"][..],
        &["compare", "--nmax", "200", "--order", "3"],
        &["asym", "--N", "5", "--n", "1000", "--format", "json"],
        &["figure-data", "--which", "4", "--max-n", "200"],
    ] {
        let a = pbl(args);
        let b = pbl(args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let seq = pbl(&["exact", "--N", "3", "--nmax", "600", "--sequential"]);
    let par = pbl(&["exact", "--N", "3", "--nmax", "600"]);
    assert_eq!(seq.stdout, par.stdout);
}

#[test]
fn json_and_file_output() {
    let dir = std::env::temp_dir().join(format!("pbl-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t.json");
    let o = pbl(&[
        "exact",
        "--nmax",
        "5",
        "--format",
        "json",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v[5]["d_ab"], "1");
    assert_eq!(v[2]["diff"], "-1");
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn precision_flag_and_environment() {
    let low = Command::new(env!("CARGO_BIN_EXE_pbl"))
        .args(["asym", "--n", "100"])
        .env("PBL_PRECISION_BITS", "64")
        .output()
        .unwrap();
    let high = pbl(&["asym", "--n", "100", "--prec", "256"]);
    let value = |o: &Output| {
        stdout(o)
            .lines()
            .last()
            .unwrap()
            .split(',')
            .nth(3)
            .unwrap()
            .to_owned()
    };
    let (l, h) = (value(&low), value(&high));
    assert!(h.len() > l.len());
    let (lf, hf): (f64, f64) = (l.parse().unwrap(), h.parse().unwrap());
    assert!((lf - hf).abs() / hf < 1e-15);
    assert_eq!(pbl(&["exact", "--prec", "3"]).status.code(), Some(2));
}
