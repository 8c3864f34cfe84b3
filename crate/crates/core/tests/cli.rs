use std::process::{Command, Output};

fn papr_pts(args: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_papr-pts"))
        .args(args.split_whitespace())
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn ccdf_csv_layout() {
    let out = papr_pts("ccdf --symbols 300 --seed 4");
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3 + 161);
    assert_eq!(lines[0], "# papr-pts v1");
    assert!(lines[1].starts_with("# config: ccdf "));
    assert_eq!(lines[2], "threshold_db,ccdf");
    assert_eq!(lines[3], "5.000000,1.000000");
    assert!(lines[163].starts_with("13.000000,"));
}

#[test]
fn canonical_line_round_trips() {
    let first = stdout(&papr_pts("ccdf --optimizer ipts --symbols 120 --seed 9 --m 8 --workers 2"));
    let config = first.lines().nth(1).unwrap().trim_start_matches("# config: ").to_string();
    let again = stdout(&papr_pts(&config));
    assert_eq!(first, again);
}

#[test]
fn exit_codes() {
    assert_eq!(papr_pts("ccdf --m 0").status.code(), Some(2));
    assert_eq!(papr_pts("ccdf --bogus 1").status.code(), Some(2));
    assert_eq!(papr_pts("frobnicate").status.code(), Some(2));
    assert_eq!(papr_pts("--help").status.code(), Some(0));
    // 2^15 candidates over a cap of 1000
    assert_eq!(papr_pts("ccdf --optimizer opts --cap 1000 --symbols 2").status.code(), Some(4));
    assert_eq!(papr_pts("compare --optimizer none --symbols 50 --target-ccdf 0.001").status.code(), Some(4));
    let dir = std::env::temp_dir().join("papr-pts-no-such-dir").join("x").join("out.csv");
    assert_eq!(papr_pts(&format!("ccdf --symbols 10 --out {}", dir.display())).status.code(), Some(3));
    assert_eq!(papr_pts("oracle-check --n 8 --m 2 --w 2 --seeds 5").status.code(), Some(0));
}

#[test]
fn out_file_matches_stdout() {
    let path = std::env::temp_dir().join(format!("papr-pts-{}.csv", std::process::id()));
    let args = "compare --optimizer none,rs --trials 20 --symbols 200 --target-ccdf 0.05 --seed 2";
    let out = papr_pts(&format!("{args} --out {}", path.display()));
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert_eq!(written, stdout(&papr_pts(args)));
    assert!(written.lines().nth(2) == Some("optimizer,evaluations,papr_db"));
}
