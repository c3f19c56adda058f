use std::path::Path;
use std::process::{Command, Output};

use infodesign::scenario::{self, BUILTINS};

fn infodesign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_infodesign"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn builtins_are_byte_identical_across_runs() {
    for b in BUILTINS {
        let (d1, d2) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        let name = format!("builtin:{}", b.name);
        for d in [&d1, &d2] {
            let out = infodesign(&["run", &name, "--out", d.path().to_str().unwrap()]);
            assert!(out.status.success(), "{}: {}", b.name, String::from_utf8_lossy(&out.stderr));
        }
        let (f1, f2) = (read_dir_sorted(d1.path()), read_dir_sorted(d2.path()));
        assert!(!f1.is_empty());
        assert_eq!(f1, f2, "{} is not deterministic", b.name);
    }
}

#[test]
fn csv_header_and_numbers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = infodesign(&["run", "builtin:quadratic_solved_model", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    for (name, bytes) in read_dir_sorted(dir.path()) {
        let text = String::from_utf8(bytes).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.starts_with("# scenario=quadratic_solved_model version="), "{name}: {header}");
        assert!(header.ends_with("seed=0"));
        let body = lines.collect::<Vec<_>>().join("\n");
        let mut rdr = csv::Reader::from_reader(body.as_bytes());
        for rec in rdr.records() {
            for field in rec.unwrap().iter() {
                if let Ok(x) = field.parse::<f64>() {
                    assert_eq!(scenario::format_num(x).parse::<f64>().unwrap(), x);
                }
            }
        }
    }
}

#[test]
fn file_scenario_matches_library_run() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.toml");
    std::fs::write(
        &path,
        r#"kind = "solve_learning"
name = "sweep"
seed = 7

[params]
mu = 0.3
risk = { kind = "quadratic_family", t = 0.25 }
friction = { kind = "dispersion", lambda = 4.0 }
"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = infodesign(&["run", path.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let s = scenario::parse_scenario(&std::fs::read_to_string(&path).unwrap(), "sweep").unwrap();
    let expected = scenario::run(&s).unwrap().render();
    let written = read_dir_sorted(&out_dir);
    assert_eq!(written.len(), expected.len());
    for ((name, bytes), (exp_name, exp_text)) in written.iter().zip(&expected) {
        assert_eq!(name, exp_name);
        assert_eq!(std::str::from_utf8(bytes).unwrap(), exp_text);
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");

    std::fs::write(&bad, "kind = \"no_such_kind\"\n[params]\n").unwrap();
    assert_eq!(infodesign(&["run", bad.to_str().unwrap()]).status.code(), Some(2));

    std::fs::write(&bad, "kind = [unclosed").unwrap();
    assert_eq!(infodesign(&["run", bad.to_str().unwrap()]).status.code(), Some(2));

    std::fs::write(&bad, "kind = \"rlhf_sweep\"\n[params]\nbogus = 1\n").unwrap();
    let out = infodesign(&["run", bad.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    assert!(!dir.path().join("o").exists(), "no partial output on validation errors");

    let missing = dir.path().join("missing.toml");
    assert_eq!(infodesign(&["run", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(infodesign(&["run", "builtin:nope"]).status.code(), Some(2));
}

#[test]
fn list_builtins_names_every_builtin() {
    let out = infodesign(&["list-builtins"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for b in BUILTINS {
        assert!(text.contains(b.name));
    }
}
