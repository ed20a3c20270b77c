//! Cascade, flip and renormalize synthesized components.

use num_complex::Complex64;
use twpacal::network::{
    band_average, cascade_all, flip, linear_grid, make_component, renormalize, Band, ComponentSpec, LineLoss, SParam,
    Scale,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = Complex64::new(50.0, 0.0);
    let grid = linear_grid(4e9, 8e9, 201);
    let parts = [
        ComponentSpec::Isolator { insertion_loss_db: 1.0, isolation_db: 30.0 },
        ComponentSpec::CouplerThrough { insertion_loss_db: 0.4, return_loss_db: 20.0 },
        ComponentSpec::Line { delay_s: 2e-9, loss: LineLoss::Flat { db: 0.6 } },
        ComponentSpec::Attenuator { db: 6.0 },
    ];
    let nets = parts.iter().map(|p| make_component(p, &grid, z)).collect::<Result<Vec<_>, _>>()?;
    let chain = cascade_all(&nets)?.expect("non-empty chain");

    let band = Band::full(4e9, 8e9)?;
    let avg = |n, p| band_average(n, p, &band, Scale::Db);
    println!("chain S21 {:.3} dB, S12 {:.3} dB", avg(&chain, SParam::S21)?, avg(&chain, SParam::S12)?);
    let rev = flip(&chain);
    println!("flipped S21 {:.3} dB, S12 {:.3} dB", avg(&rev, SParam::S21)?, avg(&rev, SParam::S12)?);
    println!("passive: {}, max singular value {:.6}", chain.is_passive(1e-12), chain.max_singular_value());

    let z75 = renormalize(&chain, Complex64::new(75.0, 0.0))?;
    let back = renormalize(&z75, z)?;
    println!("S11 at 50 ohm {:.2} dB, at 75 ohm {:.2} dB", avg(&chain, SParam::S11)?, avg(&z75, SParam::S11)?);
    println!("renormalization roundtrip error {:.1e}", back.max_abs_diff(&chain));
    Ok(())
}
