//! Column layouts and deterministic outputs pinned against files in
//! `tests/golden`.

use std::fs;
use std::path::{Path, PathBuf};

use ediqkd::output::{header_config, read_csv, schema};

const SCHEMAS: [(&str, &[&str]); 10] = [
    ("omega", schema::OMEGA),
    ("rate", schema::RATE),
    ("finite", schema::FINITE),
    ("efactor", schema::EFACTOR),
    ("secrecy", schema::SECRECY),
    ("photonic", schema::PHOTONIC),
    ("efactor-eta", schema::EFACTOR_ETA),
    ("surface", schema::SURFACE),
    ("stats", schema::STATS),
    ("records", schema::RECORDS),
];

fn golden(name: &str) -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("ediqkd").chain(args.iter().copied());
    let code = ediqkd::cli::run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn run_ok(args: &[&str]) -> String {
    let (code, out, err) = run(args);
    assert_eq!(code, 0, "{args:?}: {err}");
    out
}

fn data_lines(text: &str) -> Vec<&str> {
    text.lines().filter(|l| !l.starts_with('#')).collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn schemas_match_golden() {
    let text = golden("schemas.txt");
    let mut expected = text.lines();
    for (name, cols) in &SCHEMAS {
        assert_eq!(expected.next(), Some(format!("{name}: {}", cols.join(",")).as_str()));
    }
    assert_eq!(expected.next(), None);
}

#[test]
fn quick_commands_write_golden_columns() {
    let cases: [(&[&str], &[&str]); 4] = [
        (&["rate", "--points", "3"], schema::RATE),
        (&["secrecy", "--points", "3"], schema::SECRECY),
        (&["finite", "--q", "0.02"], schema::FINITE),
        (&["efactor", "--q", "0.03"], schema::EFACTOR),
    ];
    for (args, cols) in cases {
        let out = run_ok(args);
        assert_eq!(data_lines(&out)[0], cols.join(","), "{args:?}");
    }
}

fn simulate_files(dir: &Path) -> (PathBuf, PathBuf) {
    let records = dir.join("records.csv");
    let stats = dir.join("stats.csv");
    run_ok(&[
        "--no-cache",
        "--threads",
        "1",
        "--seed",
        "3",
        "simulate",
        "--rounds",
        "2000",
        "--channel",
        "flip:0.1",
        "--f-gc",
        "0.85",
        "--records",
        path_str(&records),
        "--stats",
        path_str(&stats),
    ]);
    (records, stats)
}

#[test]
fn simulation_records_match_golden() {
    let dir = tempfile::tempdir().unwrap();
    let (records, stats) = simulate_files(dir.path());
    let got = fs::read_to_string(records).unwrap();
    let expected = golden("records_flip.csv");
    let want: Vec<&str> = expected.lines().collect();
    assert_eq!(&data_lines(&got)[..want.len()], want.as_slice());
    assert_eq!(data_lines(&got).len(), 2001);

    let got = fs::read_to_string(stats).unwrap();
    assert_eq!(data_lines(&got)[0], schema::STATS.join(","));
    assert_eq!(data_lines(&got).len(), 37);
}

#[test]
fn header_regenerates_output() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["rate", "--points", "11", "--holevo", "closed-form"][..],
        &["secrecy", "--points", "7"],
        &["efactor", "--q", "0.04", "--q", "0.05", "--log", "decimal"],
    ] {
        let first = dir.path().join("first.csv");
        let second = dir.path().join("second.csv");
        let cfg = dir.path().join("config.toml");
        let mut a: Vec<&str> = args.to_vec();
        a.extend(["-o", path_str(&first)]);
        run_ok(&a);
        let text = fs::read_to_string(&first).unwrap();
        let (comments, _, _) = read_csv(&text).unwrap();
        fs::write(&cfg, header_config(&comments).unwrap().to_toml()).unwrap();
        run_ok(&[args[0], "--config", path_str(&cfg), "-o", path_str(&second)]);
        assert_eq!(text, fs::read_to_string(&second).unwrap(), "{args:?}");
    }
}

#[test]
fn repro_header_regenerates_table() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("fig7.csv");
    let second = dir.path().join("again.csv");
    let cfg = dir.path().join("config.toml");
    run_ok(&["repro", "fig7", "-o", path_str(&first)]);
    let text = fs::read_to_string(&first).unwrap();
    let (comments, _, _) = read_csv(&text).unwrap();
    assert!(comments.contains(&"command: repro fig7".to_string()));
    fs::write(&cfg, header_config(&comments).unwrap().to_toml()).unwrap();
    run_ok(&["secrecy", "--config", path_str(&cfg), "-o", path_str(&second)]);
    let again = fs::read_to_string(&second).unwrap();
    let strip = |t: &str| -> String {
        t.lines()
            .filter(|l| !l.starts_with("# command:"))
            .flat_map(|l| [l, "\n"])
            .collect()
    };
    assert_eq!(strip(&text), strip(&again));
}
