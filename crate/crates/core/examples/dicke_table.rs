//! Critical visibilities of the Dicke states at their tabulated settings,
//! against both noise models.

use qutrit_lhv::appendix;
use qutrit_lhv::born::NoiseModel;
use qutrit_lhv::lhv::critical_visibility;

fn main() -> qutrit_lhv::Result<()> {
    println!("case state    m  white     product");
    for case in appendix::cases().iter().filter(|c| c.state.to_string().starts_with("dicke")) {
        let state = case.build_state()?;
        let bank = case.bank()?;
        let white = critical_visibility(&state, &bank, NoiseModel::White)?.v_crit;
        let product = critical_visibility(&state, &bank, NoiseModel::Product)?.v_crit;
        println!("{:<4} {:<8} {}  {white:.6}  {product:.6}", case.id, case.state.to_string(), case.settings);
    }
    Ok(())
}
