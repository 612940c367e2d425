//! End-to-end checks of the binary: reproducibility, exit codes, and the
//! channel-file round trip.

use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relex"))
}

fn write(dir: &tempfile::TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

const BSC10: &str = "dmc 2 2\n0.9 0.1\n0.1 0.9\n";

#[test]
fn identical_manifests_reproduce_byte_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(&dir, "ch.txt", BSC10);
    let out = dir.path().join("a.csv");
    let run = |path: &PathBuf| {
        let status = bin()
            .args([
                "dmc-exponent",
                "--channel",
                ch.to_str().unwrap(),
                "--rate",
                "0.2",
                "--family",
                "r",
                "--grid-denominator",
                "16",
                "--restarts",
                "3",
                "--seed",
                "5",
                "--output",
                path.to_str().unwrap(),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(path).unwrap()
    };
    let a = run(&out);
    let b = run(&out);
    assert_eq!(a, b, "reruns with the identical manifest must be byte-identical");
    // a run with a different output path has a different manifest digest
    // but identical computed values
    let out2 = dir.path().join("b.csv");
    let c = run(&out2);
    let strip = |bytes: &[u8]| -> Vec<String> {
        String::from_utf8(bytes.to_vec())
            .unwrap()
            .lines()
            .skip(2)
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect()
    };
    assert_eq!(strip(&a), strip(&c), "values must not depend on the output path");
    // every row carries the manifest digest
    let text = String::from_utf8(a).unwrap();
    let mut lines = text.lines();
    let manifest = lines.next().unwrap();
    assert!(manifest.starts_with("# manifest: "));
    let header = lines.next().unwrap();
    assert!(header.ends_with("manifest_digest"));
    let digests: Vec<&str> = lines.map(|l| l.rsplit(',').next().unwrap()).collect();
    assert!(!digests.is_empty());
    assert!(digests.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn rate_grid_emits_one_row_per_rate_and_family() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(&dir, "ch.txt", BSC10);
    let output = bin()
        .args([
            "dmc-exponent",
            "--channel",
            ch.to_str().unwrap(),
            "--rate-grid",
            "0.1:0.3:0.1",
            "--family",
            "all",
            "--grid-denominator",
            "12",
            "--restarts",
            "2",
            "--seed",
            "1",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let rows = text.lines().skip(2).count();
    assert_eq!(rows, 3 * 5, "3 rates x 5 families");
}

#[test]
fn malformed_channel_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(&dir, "bad.txt", "dmc 2 2\n0.9 0.3\n0.1 0.9\n");
    let status = bin()
        .args([
            "dmc-exponent",
            "--channel",
            ch.to_str().unwrap(),
            "--rate",
            "0.1",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn capability_cap_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(&dir, "ch.txt", BSC10);
    let status = bin()
        .args([
            "verify",
            "--what",
            "sandwich",
            "--channel",
            ch.to_str().unwrap(),
            "--n",
            "40",
            "--samples",
            "1",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn strict_verification_flags_exit_4() {
    // the n = 16, δ = 0.1 first-order band flags its extreme types
    let status = bin()
        .args([
            "verify",
            "--what",
            "packing-p2p",
            "--n",
            "16",
            "--rate",
            "0.25",
            "--delta",
            "0.1",
            "--samples",
            "120",
            "--seed",
            "2",
            "--strict",
        ])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn mac_exponent_with_reference_columns() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(
        &dir,
        "mac.txt",
        "mac 2 2 2\n0.99 0.01\n0.01 0.99\n0.01 0.99\n0.5 0.5\n",
    );
    let output = bin()
        .args([
            "mac-exponent",
            "--channel",
            ch.to_str().unwrap(),
            "--rx",
            "0.05",
            "--ry",
            "0.05",
            "--dist",
            "sample:1",
            "--metric",
            "eq",
            "--family",
            "all",
            "--compare-liu",
            "--restarts",
            "4",
            "--grid-denominator",
            "8",
            "--seed",
            "9",
        ])
        .output()
        .unwrap();
    assert!(output.status.success());
    let text = String::from_utf8(output.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(2).collect();
    assert_eq!(rows.len(), 3, "r, T, ex rows with --compare-liu");
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        let value: f64 = cols[4].parse().unwrap();
        let liu: f64 = cols[9].parse().unwrap();
        let gap: f64 = cols[10].parse().unwrap();
        assert!(value >= 0.0 && liu >= 0.0);
        assert!(gap >= -1e-4, "family value below the reference: {row}");
    }
}

#[test]
fn composition_file_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(&dir, "ch.txt", BSC10);
    let comp = write(&dir, "p.txt", "0.3 0.7\n");
    let output = bin()
        .args([
            "dmc-exponent",
            "--channel",
            ch.to_str().unwrap(),
            "--rate",
            "0.1",
            "--family",
            "r",
            "--composition",
            comp.to_str().unwrap(),
            "--grid-denominator",
            "20",
            "--restarts",
            "3",
            "--seed",
            "2",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8(output.stdout).unwrap();
    let row = text.lines().nth(2).unwrap();
    assert!(row.contains("0.3;0.7"), "composition column missing: {row}");
}

#[test]
fn channel_file_round_trip_is_bit_exact() {
    let canonical = "dmc 2 3\n0.5 0.25 0.25\n0.125 0.375 0.5\n";
    let parsed = relex::Channel::parse(canonical).unwrap();
    assert_eq!(parsed.emit(), canonical);
}

#[test]
fn dist_file_input_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let ch = write(
        &dir,
        "mac.txt",
        "mac 2 2 2\n0.99 0.01\n0.01 0.99\n0.01 0.99\n0.5 0.5\n",
    );
    let dist = write(
        &dir,
        "dist.txt",
        "macdist 2 2 2\n0.5 0.5 0.5 0.4 0.6\n0.5 0.3 0.7 0.8 0.2\n",
    );
    let output = bin()
        .args([
            "mac-exponent",
            "--channel",
            ch.to_str().unwrap(),
            "--rx",
            "0.1",
            "--ry",
            "0.1",
            "--dist",
            dist.to_str().unwrap(),
            "--family",
            "r",
            "--restarts",
            "3",
            "--seed",
            "4",
        ])
        .output()
        .unwrap();
    assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
    let text = String::from_utf8(output.stdout).unwrap();
    assert_eq!(text.lines().skip(2).count(), 1);
}
