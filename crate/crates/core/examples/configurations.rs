//! Reference-plane networks of the four measured configurations, pump off and on.

use twpacal::network::{band_average, Band, SParam, Scale};
use twpacal::sim::{run_configuration, ConfigOverrides, Configuration, PumpSetting};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let band = Band::amplifier_band();
    println!("config pump   S21 dB   S12 dB   S11 dB   S22 dB");
    for config in Configuration::ALL {
        for pump in [None, Some(PumpSetting::optimum())] {
            let on = pump.is_some();
            let net = run_configuration(config, &ConfigOverrides { pump, ..ConfigOverrides::default() })?;
            let avg = |p| band_average(&net, p, &band, Scale::Db);
            println!(
                "{config:>6} {:>4} {:8.2} {:8.2} {:8.2} {:8.2}",
                if on { "on" } else { "off" },
                avg(SParam::S21)?,
                avg(SParam::S12)?,
                avg(SParam::S11)?,
                avg(SParam::S22)?
            );
        }
    }
    Ok(())
}
