use std::path::Path;
use std::process::{Command, Output};

fn nn_mod(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nn-mod"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn modulate_writes_four_symbol_waveform() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&nn_mod(tmp.path(), &["modulate", "--scheme", "qpsk-halfsine", "--bits", "00011011", "--out", "x.cf32"]));
    // 4 symbols at L = 8 with an 8-tap pulse, two f32 per sample
    assert_eq!(std::fs::metadata(tmp.path().join("x.cf32")).unwrap().len(), 32 * 8);
    stdout(&nn_mod(tmp.path(), &["modulate", "--scheme", "qpsk-halfsine", "--hex", "1b", "--out", "y.cf32"]));
    assert_eq!(std::fs::read(tmp.path().join("x.cf32")).unwrap(), std::fs::read(tmp.path().join("y.cf32")).unwrap());
}

#[test]
fn ber_row_matches_q_function() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stdout(&nn_mod(tmp.path(), &["ber", "--scheme", "qpsk-halfsine", "--ebn0", "4", "--bits", "1e6"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("ebn0_db,ber,ci95,theory"));
    let row: Vec<f64> = lines.next().unwrap().split(',').map(|v| v.parse().unwrap()).collect();
    assert_eq!(row[0], 4.0);
    // Q(sqrt(2 * 10^0.4)) = 1.2501e-2
    assert!((row[3] - 1.2501e-2).abs() < 1e-5);
    assert!((row[1] - 1.25e-2).abs() < 4.0 * (1.25e-2 / 1e6f64).sqrt(), "{}", row[1]);
}

#[test]
fn ber_csv_has_one_row_per_point() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&nn_mod(tmp.path(), &["ber", "--scheme", "pam2-rect", "--ebn0", "0:2:12", "--bits", "1e4", "--csv", "b.csv"]));
    let text = std::fs::read_to_string(tmp.path().join("b.csv")).unwrap();
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn export_import_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&nn_mod(tmp.path(), &["export", "--scheme", "ofdm64", "--out", "m.json"]));
    let out = stdout(&nn_mod(tmp.path(), &["import", "m.json"]));
    assert!(out.starts_with("round trip ok"), "{out}");
}

#[test]
fn simplified_export_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&nn_mod(tmp.path(), &["export", "--scheme", "qam16-rrc", "--simplify", "--out", "s.json"]));
    stdout(&nn_mod(tmp.path(), &["import", "s.json"]));
    stdout(&nn_mod(tmp.path(), &["modulate", "--scheme", "qam16-rrc", "--hex", "a5", "--manifest", "s.json", "--out", "a.cf64"]));
    stdout(&nn_mod(tmp.path(), &["modulate", "--scheme", "qam16-rrc", "--hex", "a5", "--out", "b.cf64"]));
    assert_eq!(std::fs::read(tmp.path().join("a.cf64")).unwrap(), std::fs::read(tmp.path().join("b.cf64")).unwrap());
}

#[test]
fn dataset_then_learn_recovers_the_generator() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&nn_mod(tmp.path(), &["dataset", "--scheme", "qpsk-halfsine", "--sequences", "8", "--symbols", "32", "--out", "ds"]));
    let out = stdout(&nn_mod(tmp.path(), &["learn", "--data", "ds", "--method", "ls", "--out", "m.json"]));
    let mse: f64 = out.split("mse ").nth(1).unwrap().split(' ').next().unwrap().parse().unwrap();
    assert!(mse < 1e-20, "{out}");
    stdout(&nn_mod(tmp.path(), &["import", "m.json"]));
}

#[test]
fn gradient_learning_writes_history() {
    let tmp = tempfile::tempdir().unwrap();
    stdout(&nn_mod(tmp.path(), &["dataset", "--scheme", "qpsk-halfsine", "--sequences", "4", "--symbols", "32", "--out", "ds"]));
    stdout(&nn_mod(
        tmp.path(),
        &["learn", "--data", "ds", "--method", "gd", "--lr", "0.05", "--epochs", "30", "--out", "g.json", "--history", "h.csv"],
    ));
    let h = std::fs::read_to_string(tmp.path().join("h.csv")).unwrap();
    assert_eq!(h.lines().count(), 32);
    let mse: Vec<f64> = h.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert!(mse[30] < mse[0]);
}

#[test]
fn finetune_logs_each_epoch_and_improves_evm() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nn_mod(
        tmp.path(),
        &["finetune", "--scheme", "qam16-rrc", "--fe", "rapp:p=2,sat=auto", "--epochs", "8", "--sequences", "8", "--symbols", "64", "--seed", "3", "--out", "f.json", "--csv", "f.csv"],
    );
    let out = stdout(&o);
    let log = String::from_utf8_lossy(&o.stderr);
    assert_eq!(log.lines().filter(|l| l.starts_with("epoch ")).count(), 9);
    let nums: Vec<f64> = out
        .split(|c: char| !(c.is_ascii_digit() || c == '.'))
        .filter(|s| s.contains('.'))
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(nums[1] < nums[0], "{out}");
    stdout(&nn_mod(tmp.path(), &["import", "f.json"]));
}

#[test]
fn frames_have_expected_lengths() {
    let tmp = tempfile::tempdir().unwrap();
    std::fs::write(tmp.path().join("p.hex"), "00 11 22 33\n").unwrap();
    stdout(&nn_mod(tmp.path(), &["frame", "--proto", "zigbee", "--payload", "p.hex", "--out", "z.cf32"]));
    // 4 preamble + SFD + length + 4 payload + 2 FCS = 12 bytes = 24 symbols
    let z = std::fs::metadata(tmp.path().join("z.cf32")).unwrap().len() / 8;
    assert_eq!(z, (24 * 16 - 1) * 8 + 8 + 4);
    stdout(&nn_mod(tmp.path(), &["frame", "--proto", "wifi", "--payload", "p.hex", "--out", "w.cf32"]));
    let w = std::fs::metadata(tmp.path().join("w.cf32")).unwrap().len() / 8;
    assert_eq!(w, 160 + 160 + 80 + 80);
}

#[test]
fn evm_prints_one_row_per_snr() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stdout(&nn_mod(tmp.path(), &["evm", "--scheme", "qpsk-halfsine", "--snr", "0:10:20", "--symbols", "1e3"]));
    let evm: Vec<f64> = out.lines().skip(1).map(|l| l.split(',').nth(1).unwrap().parse().unwrap()).collect();
    assert_eq!(evm.len(), 3);
    assert!(evm[0] > evm[1] && evm[1] > evm[2]);
}

#[test]
fn bench_reports_throughput() {
    let tmp = tempfile::tempdir().unwrap();
    let out = stdout(&nn_mod(tmp.path(), &["bench", "--scheme", "ofdm64", "--symbols", "200", "--repeats", "2"]));
    assert!(out.trim_end().ends_with("Msamples/s"), "{out}");
}

#[test]
fn failures_give_error_line_and_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nn_mod(tmp.path(), &["modulate", "--scheme", "qam7", "--bits", "0", "--out", "x.cf32"]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: unknown-scheme:"), "{err}");

    let o = nn_mod(tmp.path(), &["import", "missing.json"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: io:"));

    std::fs::write(tmp.path().join("bad.json"), "{\"format_version\": 1}").unwrap();
    let o = nn_mod(tmp.path(), &["import", "bad.json"]);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: schema:"));

    let o = nn_mod(tmp.path(), &["ber", "--scheme", "qpsk-halfsine", "--bogus"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));

    let o = nn_mod(tmp.path(), &["modulate", "--scheme", "qpsk-halfsine", "--bits", "001", "--out", "x.cf32"]);
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error: shape:"));
}
