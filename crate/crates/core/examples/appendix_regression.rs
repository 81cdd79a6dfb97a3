//! Recomputes the critical visibility of every tabulated optimal setting.

use qutrit_lhv::appendix;
use qutrit_lhv::cli::appendix_table;
use qutrit_lhv::lp::SolverOptions;

fn main() -> qutrit_lhv::Result<()> {
    let reports = appendix::verify_appendix(&[], &SolverOptions::default())?;
    print!("{}", appendix_table(&reports));
    let passed = reports.iter().filter(|r| r.pass).count();
    println!("{passed}/{} within tolerance", reports.len());
    Ok(())
}
