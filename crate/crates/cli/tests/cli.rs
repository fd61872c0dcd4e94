use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ans_core::analysis::{self, CodecConfig};
use ans_core::model::{self, SourceDistribution};
use ans_core::source::SplitMix64;
use tempfile::TempDir;

fn ans(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ans"))
        .args(args)
        .output()
        .expect("spawn ans")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn roundtrip(dir: &TempDir, name: &str, data: &[u8], extra: &[&str]) -> Output {
    let input = dir.path().join(name);
    std::fs::write(&input, data).unwrap();
    let mut args = vec!["encode", path_str(&input)];
    args.extend_from_slice(extra);
    let enc = ans(&args);
    assert!(enc.status.success(), "{}", String::from_utf8_lossy(&enc.stderr));
    let packed = PathBuf::from(format!("{}.ans", input.display()));
    let restored = dir.path().join(format!("{name}.restored"));
    let dec = ans(&["decode", path_str(&packed), "--out", path_str(&restored)]);
    assert!(dec.status.success(), "{}", String::from_utf8_lossy(&dec.stderr));
    assert_eq!(std::fs::read(&restored).unwrap(), data, "{name} {extra:?}");
    enc
}

fn random_bytes(len: usize, seed: u64, skew: u32) -> Vec<u8> {
    let mut rng = SplitMix64::new(seed);
    (0..len)
        .map(|_| {
            // Geometric-ish skew toward small byte values.
            let mut v = rng.next_u64();
            for _ in 0..skew {
                v &= rng.next_u64();
            }
            v as u8
        })
        .collect()
}

const ALL: [&[&str]; 5] = [
    &["--codec", "tans", "--R", "12"],
    &["--codec", "tans", "--R", "9"],
    &["--codec", "rans-stream", "--ra", "32", "--rb", "16", "--R", "12"],
    &["--codec", "rans-stream", "--ra", "24", "--rb", "8", "--R", "10"],
    &["--codec", "rans", "--R", "12"],
];

#[test]
fn structured_corpora_round_trip_for_every_codec() {
    let dir = TempDir::new().unwrap();
    let all_bytes: Vec<u8> = (0..=255u8).cycle().take(2048).collect();
    let text = b"the quick brown fox jumps over the lazy dog. ".repeat(40);
    let corpora: [(&str, &[u8]); 5] = [
        ("empty", b""),
        ("single", b"a"),
        ("run", &[7u8; 500]),
        ("all", &all_bytes),
        ("text", &text),
    ];
    for (name, data) in corpora {
        for extra in ALL {
            roundtrip(&dir, name, data, extra);
        }
    }
    for (name, data) in [("empty", &b""[..]), ("single", b"b"), ("two", b"abbbabba")] {
        roundtrip(&dir, name, data, &["--codec", "uabs"]);
        roundtrip(&dir, name, data, &["--codec", "uabs", "--p1", "1/3"]);
    }
}

#[test]
fn random_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let big = random_bytes(1 << 20, 11, 2);
    roundtrip(&dir, "big", &big, ALL[0]);
    roundtrip(&dir, "big", &big, ALL[2]);
    for seed in 0..4 {
        let data = random_bytes(20_000 + 3000 * seed as usize, seed, seed as u32);
        for extra in ALL {
            roundtrip(&dir, "rand", &data, extra);
        }
    }
    let bits: Vec<u8> = random_bytes(20_000, 5, 0).iter().map(|b| b'0' + (b & 1)).collect();
    roundtrip(&dir, "bits", &bits, &["--codec", "uabs"]);
}

#[test]
fn encode_reports_lengths() {
    let dir = TempDir::new().unwrap();
    let out = roundtrip(&dir, "f.bin", b"abracadabra", &["--codec", "tans", "--R", "12"]);
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.starts_with("L="), "{stderr}");
    assert!(stderr.contains(" H=") && stderr.contains(" D="), "{stderr}");
    assert!(dir.path().join("f.bin.ans").exists());

    let empty = dir.path().join("e");
    std::fs::write(&empty, b"").unwrap();
    assert!(ans(&["encode", path_str(&empty)]).status.success());
    let bytes = std::fs::read(dir.path().join("e.ans")).unwrap();
    let (header, _) = ans_core::container::read_container(&bytes[32..]).unwrap();
    assert_eq!(header.symbol_count, 0);
}

#[test]
fn corrupt_inputs_exit_with_code_three() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("c");
    std::fs::write(&input, b"mississippi river").unwrap();
    assert!(ans(&["encode", path_str(&input), "--codec", "rans-stream"]).status.success());
    let packed = dir.path().join("c.ans");
    let bytes = std::fs::read(&packed).unwrap();

    let truncated = dir.path().join("t.ans");
    std::fs::write(&truncated, &bytes[..bytes.len() - 3]).unwrap();
    let out = ans(&["decode", path_str(&truncated)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("truncated"));

    // First count lives right after the 32-byte bitmap and the 8-byte header prefix.
    let mut tampered = bytes.clone();
    tampered[32 + 8] ^= 1;
    let bad = dir.path().join("bad.ans");
    std::fs::write(&bad, &tampered).unwrap();
    let out = ans(&["decode", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sum to"));

    let mut magic = bytes;
    magic[32] = b'X';
    std::fs::write(&bad, &magic).unwrap();
    assert_eq!(ans(&["decode", path_str(&bad)]).status.code(), Some(3));
}

#[test]
fn usage_and_parameter_errors() {
    assert_eq!(ans(&["encode"]).status.code(), Some(2));
    assert_eq!(ans(&["frobnicate"]).status.code(), Some(2));
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("p");
    std::fs::write(&input, b"abc").unwrap();
    let out = ans(&["encode", path_str(&input), "--codec", "rans-stream", "--ra", "16", "--rb", "8", "--R", "12"]);
    assert_eq!(out.status.code(), Some(4));
    let out = ans(&["encode", path_str(&input), "--codec", "uabs"]);
    assert_eq!(out.status.code(), Some(4));
    let out = ans(&["encode", path_str(&input), "--weights", "1,1"]);
    assert_eq!(out.status.code(), Some(4));
    let missing = dir.path().join("missing");
    assert_eq!(ans(&["decode", path_str(&missing)]).status.code(), Some(1));
}

#[test]
fn explicit_weights_model() {
    let dir = TempDir::new().unwrap();
    let data = [0u8, 1, 2, 2, 2, 1, 0, 2];
    roundtrip(&dir, "w", &data, &["--weights", "1,1,2", "--R", "4"]);
    roundtrip(&dir, "w", &data, &["--weights", "0.25,0.25,0.5", "--codec", "rans", "--R", "3"]);
}

#[test]
fn gen_is_deterministic_and_unbiased() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for p in [&a, &b] {
        let out = ans(&["gen", "--weights", "3,1", "--T", "10000", "--seed", "7", "--out", path_str(p)]);
        assert!(out.status.success());
    }
    let bytes = std::fs::read(&a).unwrap();
    assert_eq!(bytes, std::fs::read(&b).unwrap());
    assert_eq!(bytes.len(), 10_000);
    assert!(bytes.iter().all(|&x| x < 2));

    let c = dir.path().join("c");
    assert!(ans(&["gen", "--weights", "1,1", "--T", "1000000", "--seed", "3", "--out", path_str(&c)]).status.success());
    let ones = std::fs::read(&c).unwrap().iter().filter(|&&x| x == 1).count() as f64;
    let sigma = (1e6f64 * 0.25).sqrt();
    assert!((ones - 5e5).abs() < 3.0 * sigma, "{ones}");

    let z = dir.path().join("z");
    assert!(ans(&["gen", "--weights", "1,1", "--T", "0", "--out", path_str(&z)]).status.success());
    assert!(std::fs::read(&z).unwrap().is_empty());

    assert_eq!(ans(&["gen", "--weights", "1,-1", "--T", "5", "--out", path_str(&z)]).status.code(), Some(4));
}

#[test]
fn default_bench_suite_meets_every_bound() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("bench.csv");
    let again = dir.path().join("again.csv");
    let out = ans(&["bench", "--out", path_str(&csv)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(ans(&["bench", "--out", path_str(&again)]).status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());

    let mut rows = csv_rows(&text);
    let header = rows.remove(0);
    let margin = header.iter().position(|h| h == "margin").unwrap();
    assert!(rows.len() >= 12);
    for row in &rows {
        let m: f64 = row[margin].parse().unwrap();
        assert!(m > 0.0, "{row:?}");
    }
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn single_cell_bench_matches_library() {
    let out = ans(&["bench", "--codec", "tans", "--weights", "7,3", "--R", "8", "--T", "2000", "--trials", "4", "--seed", "99"]);
    assert!(out.status.success());
    let dist = SourceDistribution::from_weights(&[7, 3]).unwrap();
    let config = CodecConfig::Tans {
        model: model::quantize(&dist, 8).unwrap(),
    };
    let report = analysis::measure_average_length(&config, &dist, 2000, 4, 99).unwrap();
    let mut expected = Vec::new();
    analysis::write_csv(&[report], &mut expected).unwrap();
    assert_eq!(out.stdout, expected);
}

#[test]
fn bench_notes_skipped_bounds() {
    let out = ans(&["bench", "--codec", "rans", "--weights", "3,1", "--R", "2", "--A", "4", "--T", "100", "--trials", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 2);
    assert!(rows[1].last().unwrap().contains("not greater than one"), "{text}");
    let margin = rows[0].iter().position(|h| h == "margin").unwrap();
    assert!(rows[1][margin].is_empty());
}

#[test]
fn tables_dump() {
    let out = ans(&["tables", "--weights", "3,1", "--R", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("N=4 counts=[3, 1]"));
    assert_eq!(text.lines().filter(|l| l.starts_with(|c: char| c.is_ascii_digit())).count(), 4);
}
