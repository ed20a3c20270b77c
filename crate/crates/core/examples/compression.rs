//! Gain compression versus signal power at the optimal pump.

use twpacal::network::{linear_grid, Band};
use twpacal::sim::{synth_twpa, PumpSetting, TwpaSpec, LOW_SIGNAL_DBM};
use twpacal::twpa::{compression_csv, compression_curve, SignalSweep};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = linear_grid(4e9, 8e9, 201);
    let spec = TwpaSpec::default();
    let off = synth_twpa(&spec, &grid, None, LOW_SIGNAL_DBM)?;
    let sweeps = (0..=8)
        .map(|i| {
            let p = -110.0 + 5.0 * i as f64;
            let on = synth_twpa(&spec, &grid, Some(&PumpSetting::optimum()), p)?;
            Ok(SignalSweep { signal_power: p, pump_on: on, pump_off: off.clone() })
        })
        .collect::<Result<Vec<_>, twpacal::sim::SimError>>()?;
    let curve = compression_curve(&sweeps, &Band::compression_band())?;
    print!("{}", compression_csv(&curve));
    Ok(())
}
