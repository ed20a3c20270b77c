//! Fit port reflections from pump-off data and predict reflection versus gain.

use twpacal::twpa::{
    critical_gain_db, eval_reflection, fit_reflection_from_pump_off, predict_reflection_vs_gain, Port, ReflectionModel,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // pump-off reflection of a device with r = 0.14 and 3.5 dB insertion loss
    let il_db = 3.5;
    let off = ReflectionModel::lossless(0.14, 0.14, 10f64.powf(-il_db / 20.0))?;
    let v = eval_reflection(&off, Port::One)?;
    println!("pump-off |S11| = {v:.5} ({:.2} dB)", 20.0 * v.log10());

    let fit = fit_reflection_from_pump_off(v, v, il_db)?;
    println!("fitted r1 = {:.6}, r2 = {:.6}, t1 = {:.6}", fit.model.r1, fit.model.r2, fit.model.t1);

    let model = ReflectionModel::lossless(fit.model.r1, fit.model.r2, 1.0)?;
    println!("series diverges at {:.2} dB gain", critical_gain_db(&model));
    let gains: Vec<f64> = (0..=16).map(f64::from).collect();
    println!("gain_db  s11_db");
    for row in predict_reflection_vs_gain(&model, &gains)? {
        println!("{:7.1} {:7.2}", row.gain_db, row.s11_db);
    }
    Ok(())
}
