//! End-to-end through the command-line front end: simulate raw files, calibrate, extract gain.

use std::fs;

const SCENARIO: &str = r#"{
    "label": "demo",
    "x_chain": [{"type": "attenuator", "db": 10}, {"type": "line", "delay_s": 1e-9, "loss": {"kind": "flat", "db": 0.3}}],
    "y_chain": [{"type": "isolator", "insertion_loss_db": 0.8, "isolation_db": 25}],
    "duts": [
        {"kind": "configuration", "config": "B", "pump": {"freq_hz": 5.8659e9, "power_dbm": -0.7}},
        {"kind": "configuration", "config": "B"}
    ]
}"#;

fn twpacal(args: &[&str]) {
    let code = twpacal::cli::run(std::iter::once("twpacal").chain(args.iter().copied()));
    assert_eq!(code, 0, "twpacal {args:?} failed");
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::temp_dir().join("twpacal_pipeline_example");
    fs::create_dir_all(&dir)?;
    let path = |p: &str| dir.join(p).to_string_lossy().into_owned();
    fs::write(dir.join("scenario.json"), SCENARIO)?;

    twpacal(&["simulate", "--config", &path("scenario.json"), "--out", &path("raw")]);
    twpacal(&[
        "calibrate",
        "--thru", &path("raw/demo_thru_off.s2p"),
        "--line", &path("raw/demo_line_off.s2p"),
        "--reflect1", &path("raw/demo_reflect1_off.s2p"),
        "--reflect2", &path("raw/demo_reflect2_off.s2p"),
        "--line-delay", "50ps",
        "--dut", &path("raw/B_dut_on.s2p"),
        "--dut", &path("raw/B_dut_off.s2p"),
        "--out", &path("cal"),
    ]);
    print!("calibrated gain (dB): ");
    twpacal(&["gain", "--on", &path("cal/B_dut_on_cal.s2p"), "--off", &path("cal/B_dut_off_cal.s2p")]);
    println!("outputs in {}", dir.display());
    Ok(())
}
