//! Critical visibility of the symmetric GHZ state for two tritter settings,
//! against white and product noise, with the LP cross-checked by bisection.

use std::f64::consts::PI;

use qutrit_lhv::born::{noise_tensor, quantum_tensor, NoiseModel};
use qutrit_lhv::lhv::{bisect_visibility, critical_visibility};
use qutrit_lhv::lp::SolverOptions;
use qutrit_lhv::observables::{tritter_from_phases, SettingsBank, TritterPhases};
use qutrit_lhv::states::{ghz_state, symmetric_ghz_angle};

fn main() -> qutrit_lhv::Result<()> {
    let state = ghz_state(symmetric_ghz_angle());
    let bank = SettingsBank::shared(vec![
        tritter_from_phases(&TritterPhases([0.0, 0.0, 0.0])),
        tritter_from_phases(&TritterPhases([0.0, PI / 3.0, 2.0 * PI / 3.0])),
    ])?;
    for noise in [NoiseModel::White, NoiseModel::Product] {
        let r = critical_visibility(&state, &bank, noise)?;
        let d = &r.diagnostics;
        println!(
            "{noise:<8} v_crit = {:.7}  ({:?} formulation, {} pivots, residual {:.1e})",
            r.v_crit, d.formulation, d.iterations, d.max_residual
        );
    }

    let ps = quantum_tensor(&state, &bank)?;
    let pn = noise_tensor(NoiseModel::White, &state, &bank)?;
    let b = bisect_visibility(&ps, &pn, 1e-9, &SolverOptions::default())?;
    println!("bisection  v_crit = {b:.7}");
    Ok(())
}
