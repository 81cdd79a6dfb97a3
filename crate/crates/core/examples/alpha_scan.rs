//! Optimized visibility of generalized GHZ states on a coarse angle grid,
//! printed as CSV.

use qutrit_lhv::born::NoiseModel;
use qutrit_lhv::cli::cmd_scan;
use qutrit_lhv::observables::{MeasurementFamily, Sharing};
use qutrit_lhv::optimizer::OptimizationConfig;

fn main() -> qutrit_lhv::Result<()> {
    let noise = match std::env::args().nth(1).as_deref() {
        Some("product") => NoiseModel::Product,
        _ => NoiseModel::White,
    };
    let cfg = OptimizationConfig { restarts: 2, max_evals: 300, tolerance: 1e-9, seed: 0, sharing: Sharing::SharedAcrossParties };
    let grid = [0.0, 15.0, 30.0, 45.0, 54.735610317245346, 60.0, 75.0, 90.0];
    let (_, csv) = cmd_scan(&grid, MeasurementFamily::Tritter, 2, noise, &cfg, &|_, _| {})?;
    print!("{csv}");
    Ok(())
}
