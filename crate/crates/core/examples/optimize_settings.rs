//! Searches tritter settings for the symmetric GHZ state from a few random
//! starts.

use qutrit_lhv::born::NoiseModel;
use qutrit_lhv::observables::{MeasurementFamily, Sharing};
use qutrit_lhv::optimizer::{optimize_settings_from, OptimizationConfig, RestartTrace};
use qutrit_lhv::states::{ghz_state, symmetric_ghz_angle};

fn main() -> qutrit_lhv::Result<()> {
    let cfg = OptimizationConfig { restarts: 4, max_evals: 400, tolerance: 1e-9, seed: 3, sharing: Sharing::SharedAcrossParties };
    let report = |t: &RestartTrace| println!("restart {} -> {:.6} in {} evaluations", t.restart, t.v_crit, t.evals);
    let res = optimize_settings_from(
        &ghz_state(symmetric_ghz_angle()),
        MeasurementFamily::Tritter,
        2,
        NoiseModel::White,
        &cfg,
        &[],
        &report,
    )?;
    println!("best v_crit {:.6}", res.v_crit);
    println!("phases {:?}", res.wrapped_params());
    Ok(())
}
