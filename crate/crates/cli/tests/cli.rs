use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bicluster(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bicluster"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn data_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().map(|t| t.parse().unwrap()).collect())
        .collect()
}

#[test]
fn surface_file_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.dat");
    let o = bicluster(&[
        "dsbs-surface",
        "--p",
        "0.25",
        "--grid",
        "5",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("# tool: bicluster"));
    assert!(text.ends_with('\n'));
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 25);
    assert!(rows.iter().all(|r| r.len() == 3));
    // alpha = 1/2 rows
    for r in &rows[20..] {
        assert_eq!(r[0], 0.0);
        assert_eq!(r[2], 0.0);
    }
}

#[test]
fn bits_rescale_information_columns() {
    let dir = tempfile::tempdir().unwrap();
    let nats = dir.path().join("n.dat");
    let bits = dir.path().join("b.dat");
    bicluster(&["dsbs-surface", "--grid", "3", "--out", path(&nats)]);
    bicluster(&[
        "dsbs-surface",
        "--grid",
        "3",
        "--units",
        "bits",
        "--out",
        path(&bits),
    ]);
    let (n, b) = (
        data_rows(&fs::read_to_string(nats).unwrap()),
        data_rows(&fs::read_to_string(bits).unwrap()),
    );
    assert!((b[0][0] - 1.0).abs() < 1e-14);
    assert!((b[0][2] * std::f64::consts::LN_2 - n[0][2]).abs() < 1e-14);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.dat");
    // missing seed
    assert_eq!(
        bicluster(&["conjecture", "--out", path(&out)])
            .status
            .code(),
        Some(2)
    );
    // outside the domain
    let o = bicluster(&[
        "conjecture",
        "--p",
        "0.9",
        "--seed",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error[validation]"));
    // enumeration budget
    let o = bicluster(&[
        "bruteforce",
        "--n",
        "4",
        "--m1",
        "3",
        "--m2",
        "3",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3^16"));
    // unwritable destination
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = bicluster(&["bruteforce", "--out", path(&blocker.join("x.dat"))]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn bruteforce_reports_the_single_letter_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.dat");
    let o = bicluster(&[
        "bruteforce",
        "--source",
        "dsbs:0.25",
        "--n",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    assert!((rows[0][0] - 0.130812035941137).abs() < 1e-15);
    let zero = dir.path().join("z.dat");
    bicluster(&["bruteforce", "--m1", "1", "--out", path(&zero)]);
    assert_eq!(data_rows(&fs::read_to_string(&zero).unwrap())[0][0], 0.0);
}

#[test]
fn pmf_file_sources() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.txt");
    fs::write(
        &src,
        "# x uniform, z a noisy copy\nx:2 z:2\n0 0 0.4\n0 1 0.1\n1 0 0.1\n1 1 0.4\n",
    )
    .unwrap();
    let out = dir.path().join("r.dat");
    let o = bicluster(&[
        "region-sample",
        "--source",
        path(&src),
        "--variant",
        "inner",
        "--seed",
        "4",
        "--samples",
        "50",
        "--out",
        path(&out),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let rows = data_rows(&fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 50);
    assert!(rows.iter().all(|r| r[1] <= r[2].min(r[3]) + 1e-12));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "x z\n0 0 0.5\n").unwrap();
    let o = bicluster(&[
        "region-sample",
        "--source",
        path(&bad),
        "--seed",
        "1",
        "--out",
        path(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ib_curve_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let o = bicluster(&[
            "--threads",
            threads,
            "ib-curve",
            "--source",
            "dsbs:0.1",
            "--seed",
            "3",
            "--samples",
            "3000",
            "--refine-top",
            "5",
            "--grid",
            "11",
            "--out",
            path(&out),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        fs::read(out).unwrap()
    };
    let a = run("a.dat", "1");
    let b = run("b.dat", "2");
    assert_eq!(a, b);
    let rows = data_rows(&String::from_utf8(a).unwrap());
    assert!(rows[0][1] <= 1e-9);
    assert!((rows[10][1] - 0.368064207168497).abs() < 2e-3);
}
