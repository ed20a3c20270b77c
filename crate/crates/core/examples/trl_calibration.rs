//! Simulate raw standards through unknown error boxes, solve TRL, de-embed a DUT.

use twpacal::network::{linear_grid, ComponentSpec, LineLoss};
use twpacal::sim::{self, random_passive, ChainScenario, StandardSpecs};
use twpacal::trl::{deembed, line_phase_validity, solve_trl, verify_calibration};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = linear_grid(4e9, 8e9, 401);
    let scenario = ChainScenario {
        x_chain: vec![
            ComponentSpec::CouplerThrough { insertion_loss_db: 0.4, return_loss_db: 20.0 },
            ComponentSpec::Line { delay_s: 1.5e-9, loss: LineLoss::Flat { db: 0.5 } },
            ComponentSpec::Attenuator { db: 10.0 },
        ],
        y_chain: vec![ComponentSpec::Isolator { insertion_loss_db: 0.8, isolation_db: 25.0 }],
        ..ChainScenario::new(grid.clone())
    };
    let standards = sim::generate_trl_dataset(&scenario, &StandardSpecs::default())?;
    let em = solve_trl(&standards)?;

    let truth = random_passive(&grid, 7, 0.9)?;
    let raw = sim::embed(&scenario, &truth)?;
    let cal = deembed(&em, &raw)?;
    println!("de-embedding error vs truth: {:.2e}", cal.dut.max_abs_diff(&truth));
    println!("raw vs truth (uncalibrated):  {:.2e}", raw.max_abs_diff(&truth));

    let report = verify_calibration(&em, &standards)?;
    println!("standards residual: max {:.1e}, rms {:.1e}", report.max, report.rms);
    let valid = line_phase_validity(&em, em.guard_deg);
    println!("{} of {} points outside the line-phase guard band", valid.iter().filter(|v| **v).count(), valid.len());
    Ok(())
}
