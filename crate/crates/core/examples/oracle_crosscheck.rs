//! Compares the LP visibility with the brute-force vertex oracle on random
//! two-setting instances.

use qutrit_lhv::born::{noise_tensor, quantum_tensor, NoiseModel};
use qutrit_lhv::lhv::visibility_from_tensors;
use qutrit_lhv::lp::SolverOptions;
use qutrit_lhv::observables::{MeasurementFamily, ParameterLayout, Sharing};
use qutrit_lhv::optimizer::random_start;
use qutrit_lhv::oracle::oracle_vcrit;
use qutrit_lhv::states::ghz_state;

fn main() -> qutrit_lhv::Result<()> {
    let layout = ParameterLayout::new(MeasurementFamily::U3, 2, Sharing::PerParty)?;
    let mut worst: f64 = 0.0;
    for i in 0..10 {
        let state = ghz_state(0.2 + 0.13 * i as f64);
        let bank = layout.bank(&random_start(42, i, layout.dimension()))?;
        let noise = if i % 2 == 0 { NoiseModel::White } else { NoiseModel::Product };
        let ps = quantum_tensor(&state, &bank)?;
        let pn = noise_tensor(noise, &state, &bank)?;
        let (lp, _) = visibility_from_tensors(&ps, &pn, &SolverOptions::default())?;
        let oracle = oracle_vcrit(&ps, &pn)?;
        worst = worst.max((lp - oracle).abs());
        println!("{i:>2} {noise:<8} lp {lp:.9}  oracle {oracle:.9}");
    }
    println!("largest difference {worst:.1e}");
    Ok(())
}
