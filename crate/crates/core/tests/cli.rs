use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_polar-lg");

fn simulate(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(BIN)
        .arg("simulate")
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

#[test]
fn global_csv_has_header_and_one_row_per_point() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let res = simulate(
        &["--config", "setting1", "--mode", "global", "--ebno", "2:1:3", "--max-frames", "4", "--seed", "3"],
        &out,
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "setting,mode,ebno_db,frames,bit_errors,frame_errors,ber,fer,avg_iterations");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("setting1,global,2,4,"));
    assert!(lines[2].starts_with("setting1,global,3,4,"));
}

#[test]
fn local_csv_has_subblock_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("l.csv");
    let res = simulate(
        &["--config", "setting1", "--mode", "local", "--ebno", "3", "--max-frames", "3"],
        &out,
    );
    assert!(res.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].ends_with(",avg_iterations,subblock"));
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("setting1,local,3,3,") && lines[1].ends_with(",1"));
    assert!(lines[2].ends_with(",2"));
    // aggregate row counts subblock decodes
    assert!(lines[3].starts_with("setting1,local,3,6,") && lines[3].ends_with(",all"));
}

#[test]
fn config_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tiny.cfg");
    std::fs::write(
        &cfg,
        "m = 2\nn0 = 16\nka = 8\nkb = 16\ns = 8\nni = 32\nmax_iter = 20\nearly_stop = true\ndesign_ebno_db = 0.0\ninterleaver_seed = 4\n",
    )
    .unwrap();
    let out = dir.path().join("c.csv");
    let res = simulate(
        &[
            "--config",
            cfg.to_str().unwrap(),
            "--mode",
            "conventional",
            "--ebno",
            "1:1:2",
            "--max-frames",
            "20",
            "--no-early-stop",
            "--min-sum",
        ],
        &out,
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    for row in text.lines().skip(1) {
        assert!(row.starts_with("tiny,conventional,"));
        // no early stop: every frame runs max_iter iterations
        assert!(row.ends_with(",20.0000"), "{row}");
    }
}

#[test]
fn bad_inputs_exit_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let missing = simulate(
        &["--config", "/no/such/file", "--mode", "global", "--ebno", "1", "--max-frames", "1"],
        &out,
    );
    assert!(!missing.status.success());

    let bad_cfg = dir.path().join("bad.cfg");
    std::fs::write(&bad_cfg, "m = 2\nn0 = 128\nka = 64\nkb = 960\ns = 60\nni = 1024\n").unwrap();
    let inconsistent = simulate(
        &["--config", bad_cfg.to_str().unwrap(), "--mode", "global", "--ebno", "1", "--max-frames", "1"],
        &out,
    );
    assert!(!inconsistent.status.success());
    assert!(String::from_utf8_lossy(&inconsistent.stderr).contains("invalid coupling"));

    let unwritable = simulate(
        &["--config", "setting1", "--mode", "global", "--ebno", "3", "--max-frames", "1"],
        &dir.path().join("missing-dir").join("x.csv"),
    );
    assert!(!unwritable.status.success());

    let bad_range = simulate(
        &["--config", "setting1", "--mode", "global", "--ebno", "3:1", "--max-frames", "1"],
        &out,
    );
    assert!(!bad_range.status.success());
}

#[test]
fn rates_subcommand() {
    let res = Command::new(BIN).args(["rates", "--config", "setting2"]).output().unwrap();
    assert!(res.status.success());
    let text = String::from_utf8(res.stdout).unwrap();
    assert!(text.contains("R_total    = 1/2"));
    assert!(text.contains("R_inner    = 9/16"));
}
