//! Write a network in each Touchstone value format, read it back, and export a table.

use num_complex::Complex64;
use twpacal::network::{linear_grid, make_component, ComponentSpec, LineLoss};
use twpacal::touchstone::{export_csv, parse_touchstone, write_touchstone, Quantity, ValueFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let grid = linear_grid(4e9, 8e9, 5);
    let cable = ComponentSpec::Line { delay_s: 1.2e-9, loss: LineLoss::SqrtF { db_per_sqrt_hz: 1e-5 } };
    let net = make_component(&cable, &grid, Complex64::new(50.0, 0.0))?;

    for fmt in [ValueFormat::RI, ValueFormat::MA, ValueFormat::DB] {
        let text = write_touchstone(&net, fmt);
        let back = parse_touchstone(&text)?;
        println!("{fmt:?}: max |dS| after roundtrip = {:.1e}", back.max_abs_diff(&net));
    }
    println!("\n{}", write_touchstone(&net, ValueFormat::DB));

    let cols: Vec<Quantity> = vec!["s21:db".parse()?, "s21:deg".parse()?];
    print!("{}", export_csv(&net, &cols));

    match parse_touchstone("# GHz S XY R 50\n1 0 0 1 0 1 0 0 0\n") {
        Err(e) => println!("\nmalformed input rejected: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
