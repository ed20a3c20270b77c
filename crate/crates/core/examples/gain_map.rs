//! Sweep pump frequency and power on the simulated amplifier and locate the best cell.

use twpacal::network::{linear_grid, Band};
use twpacal::sim::{synth_twpa, PumpSetting, TwpaSpec, LOW_SIGNAL_DBM};
use twpacal::twpa::{build_gain_map, extract_gain, PumpSweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = linear_grid(4e9, 8e9, 401);
    let spec = TwpaSpec::default();
    let off = synth_twpa(&spec, &grid, None, LOW_SIGNAL_DBM)?;

    let mut sweeps = Vec::new();
    for f in [5.75e9, 5.8659e9, 5.95e9] {
        for p in [-2.0, -0.7, 0.5] {
            let on = synth_twpa(&spec, &grid, Some(&PumpSetting { freq_hz: f, power_dbm: p }), LOW_SIGNAL_DBM)?;
            sweeps.push(PumpSweep { pump_freq: f, pump_power: p, pump_on: on });
        }
    }
    let band = Band::amplifier_band();
    let map = build_gain_map(&sweeps, &off, &band)?;
    print!("{}", map.to_csv());
    if let Some(best) = map.argmax() {
        println!("peak {:.2} dB at {} GHz, {} dBm", best.gain_db, best.pump_freq_hz / 1e9, best.pump_power_dbm);
    }

    let trace = extract_gain(&sweeps[4].pump_on, &off)?;
    println!("band-averaged gain at the optimum: {:.3} dB", trace.band_average(&band)?);
    Ok(())
}
