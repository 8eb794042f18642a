use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn iclap(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_iclap"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str], cwd: &Path) -> String {
    let out = iclap(args, cwd);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn tree(root: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(root).unwrap().display().to_string();
                files.insert(rel, fs::read(&path).unwrap());
            }
        }
    }
    files
}

#[test]
fn synth_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["synth", "--seed", "7", "--out", "a"], tmp.path());
    ok(&["synth", "--seed", "7", "--out", "b"], tmp.path());
    let (a, b) = (tree(&tmp.path().join("a")), tree(&tmp.path().join("b")));
    // 10 objects × 5 explorations, the listing and the manifest.
    assert_eq!(a.len(), 52);
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    for (name, bytes) in &a {
        if name != "manifest.txt" {
            assert_eq!(bytes, &b[name], "{name}");
        }
    }
    ok(&["synth", "--seed", "8", "--out", "c"], tmp.path());
    assert_ne!(a["plate_dots/exp1.touches"], tree(&tmp.path().join("c"))["plate_dots/exp1.touches"]);
}

#[test]
fn evaluate_writes_one_row_per_touch_count() {
    let tmp = tempfile::tempdir().unwrap();
    ok(&["synth", "--seed", "1", "--out", "d"], tmp.path());
    ok(
        &["evaluate", "--dataset", "d", "--method", "iclap", "--m", "1..12", "--trials", "5", "--seed", "1", "--out", "curve.txt"],
        tmp.path(),
    );
    let text = fs::read_to_string(tmp.path().join("curve.txt")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows.len(), 12);
    for (i, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(' ').collect();
        assert_eq!(fields[0], "iclap");
        assert_eq!(fields[1], (i + 1).to_string());
        let rate: f64 = fields[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
        assert_eq!(fields[3], "5");
    }
    let manifest = fs::read_to_string(tmp.path().join("curve.txt.manifest")).unwrap();
    assert!(manifest.contains("input d/plate_dots/exp1.touches sha256:"));
    assert!(manifest.contains("output curve.txt sha256:"));
}

#[test]
fn classify_recognizes_a_training_exploration() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    ok(&["synth", "--seed", "3", "--out", "d"], dir);
    let before = tree(&dir.join("d"));
    ok(&["dictionary", "--dataset", "d", "--k", "30", "--out", "cb.txt"], dir);
    ok(&["models", "--dataset", "d", "--codebook", "cb.txt", "--out", "models"], dir);
    assert_eq!(tree(&dir.join("d")), before, "inputs must not change");
    for method in ["iclap", "icp3", "bow"] {
        let report = ok(
            &["classify", "--models", "models", "--codebook", "cb.txt", "--test", "d/dome_rings/exp2.touches", "--method", method],
            dir,
        );
        assert!(report.contains("winner dome_rings\n"), "{method}: {report}");
    }
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert_eq!(iclap(&["evaluate", "--dataset", "d", "--out", "x", "--trials", "0"], dir).status.code(), Some(2));
    assert_eq!(iclap(&["evaluate", "--dataset", "d", "--out", "x", "--m", "3..1"], dir).status.code(), Some(2));
    assert_eq!(iclap(&["synth", "--out", "d", "--touches", "0"], dir).status.code(), Some(2));
    assert_eq!(iclap(&["no-such-command"], dir).status.code(), Some(2));
    assert_eq!(iclap(&["evaluate", "--dataset", "missing", "--out", "x"], dir).status.code(), Some(3));
    assert_eq!(
        iclap(&["classify", "--models", "missing", "--test", "t", "--method", "icp3"], dir).status.code(),
        Some(3)
    );
    ok(&["synth", "--seed", "1", "--out", "d", "--explorations", "1", "--touches", "3"], dir);
    // Thirty touches cannot fill a 1000-word dictionary.
    let out = iclap(&["dictionary", "--dataset", "d", "--k", "1000", "--out", "cb.txt"], dir);
    assert_eq!(out.status.code(), Some(1));
    assert!(!dir.join("cb.txt").exists());
}
