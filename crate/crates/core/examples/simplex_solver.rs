//! The bundled simplex solver on a small program, and the MPS text of it.

use qutrit_lhv::lp::{solve, write_mps, Direction, LinearProgram, RowSense};

fn main() -> qutrit_lhv::Result<()> {
    // maximize 3x + 5y  s.t.  x <= 4,  2y <= 12,  3x + 2y <= 18
    let lp = LinearProgram::from_dense(
        Direction::Maximize,
        &[3.0, 5.0],
        &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
        &[RowSense::Le, RowSense::Le, RowSense::Le],
        &[4.0, 12.0, 18.0],
        &[(0.0, f64::INFINITY), (0.0, f64::INFINITY)],
    )?;
    let sol = solve(&lp);
    println!("{:?}: objective {} at {:?} after {} pivots", sol.status, sol.objective, sol.x, sol.iterations);
    print!("{}", write_mps(&lp, "WYNDOR"));
    Ok(())
}
