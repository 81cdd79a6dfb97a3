//! The two measurement families: general U(3) bases from eight angles and
//! tritters preceded by phase shifters.

use qutrit_lhv::born::quantum_tensor;
use qutrit_lhv::observables::{MeasurementFamily, ParameterLayout, Sharing};
use qutrit_lhv::states::dicke_state;

fn main() -> qutrit_lhv::Result<()> {
    let u = MeasurementFamily::U3.measurement(&[0.3, 1.1, 0.7, 2.0, 0.4, 1.6, 0.2, 0.9])?;
    let t = MeasurementFamily::Tritter.measurement(&[0.0, 0.5, 1.0])?;
    for (name, m) in [("U3", &u), ("T", &t)] {
        println!("{name}: unitarity defect {:.1e}", m.deviation_from_unitarity());
        for row in m.matrix().row_iter() {
            let cells: Vec<String> = row.iter().map(|z| format!("{:+.3}{:+.3}i", z.re, z.im)).collect();
            println!("  {}", cells.join("  "));
        }
    }

    // Joint outcome statistics of |D_3^2> for one setting triple.
    let layout = ParameterLayout::new(MeasurementFamily::Tritter, 2, Sharing::SharedAcrossParties)?;
    let bank = layout.bank(&[0.0, 0.0, 0.0, 0.0, 2.0, 4.0])?;
    let p = quantum_tensor(&dicke_state(2)?, &bank)?;
    println!("P(a b c | settings 0 1 1):");
    for a in 0..3 {
        for b in 0..3 {
            let probs: Vec<String> = (0..3).map(|c| format!("{:.4}", p.get(0, 1, 1, a, b, c))).collect();
            println!("  a={a} b={b}: {}", probs.join(" "));
        }
    }
    Ok(())
}
