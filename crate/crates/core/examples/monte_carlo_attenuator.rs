//! Noise propagation through TRL: recover a 6 dB attenuator over many noise seeds.

use num_complex::Complex64;
use twpacal::network::{band_average, linear_grid, make_component, Band, ComponentSpec, SParam, Scale};
use twpacal::sim::{self, streams, ChainScenario, StandardSpecs};
use twpacal::trl::{deembed, solve_trl};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = linear_grid(4e9, 8e9, 401);
    let band = Band::full(4e9, 8e9)?;
    let dut = make_component(&ComponentSpec::Attenuator { db: 6.02 }, &grid, Complex64::new(50.0, 0.0))?;
    let seeds = 100;
    let mut s21 = Vec::new();
    for seed in 0..seeds {
        let sc = ChainScenario {
            x_chain: vec![ComponentSpec::Attenuator { db: 3.0 }, ComponentSpec::PhaseShift { degrees: 30.0 }],
            y_chain: vec![ComponentSpec::Attenuator { db: 2.0 }, ComponentSpec::PhaseShift { degrees: 45.0 }],
            noise_sigma: 0.004,
            seed,
            ..ChainScenario::new(grid.clone())
        };
        let em = solve_trl(&sim::generate_trl_dataset(&sc, &StandardSpecs::default())?)?;
        let raw = sim::embed_stream(&sc, &dut, streams::DUT_BASE)?;
        s21.push(band_average(&deembed(&em, &raw)?.dut, SParam::S21, &band, Scale::Db)?);
    }
    let mean = s21.iter().sum::<f64>() / s21.len() as f64;
    let sd = (s21.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (s21.len() - 1) as f64).sqrt();
    let within = s21.iter().filter(|v| (**v + 6.02).abs() <= 0.1).count();
    println!("band-averaged S21 over {seeds} seeds: mean {mean:.4} dB, sd {sd:.4} dB");
    println!("{within}/{seeds} within 0.1 dB of -6.02 dB");
    Ok(())
}
