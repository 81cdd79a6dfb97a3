//! Fixed-format MPS output for cross-checking with external solvers.

use std::fmt::Write as _;

use super::{Direction, LinearProgram, RowSense};

fn num(v: f64) -> String {
    // Fixed MPS reserves 12 columns per number.
    let s = format!("{v}");
    if s.len() <= 12 {
        s
    } else {
        format!("{v:.5e}")
    }
}

/// Renders the program in fixed MPS. Maximization is declared through an
/// `OBJSENSE` section; the objective row keeps its original signs.
pub fn write_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {name}");
    if lp.direction() == Direction::Maximize {
        out.push_str("OBJSENSE\n    MAX\n");
    }
    out.push_str("ROWS\n N  COST\n");
    for (i, sense) in lp.row_sense().iter().enumerate() {
        let t = match sense {
            RowSense::Eq => 'E',
            RowSense::Le => 'L',
            RowSense::Ge => 'G',
        };
        let _ = writeln!(out, " {t}  R{i}");
    }
    out.push_str("COLUMNS\n");
    for j in 0..lp.num_vars() {
        let name = format!("X{j}");
        let c = lp.objective()[j];
        if c != 0.0 {
            let _ = writeln!(out, "    {name:<8}  {:<8}  {:>12}", "COST", num(c));
        }
        let (rows, vals) = lp.column(j);
        for (&r, &v) in rows.iter().zip(vals) {
            let _ = writeln!(out, "    {name:<8}  {:<8}  {:>12}", format!("R{r}"), num(v));
        }
    }
    out.push_str("RHS\n");
    for (i, &b) in lp.rhs().iter().enumerate() {
        if b != 0.0 {
            let _ = writeln!(out, "    {:<8}  {:<8}  {:>12}", "RHS", format!("R{i}"), num(b));
        }
    }
    out.push_str("BOUNDS\n");
    for j in 0..lp.num_vars() {
        let (l, u) = lp.bounds(j);
        let name = format!("X{j}");
        match (l.is_finite(), u.is_finite()) {
            (true, true) if l == u => {
                let _ = writeln!(out, " FX {:<8}  {name:<8}  {:>12}", "BND", num(l));
            }
            (false, false) => {
                let _ = writeln!(out, " FR {:<8}  {name:<8}", "BND");
            }
            _ => {
                if l.is_finite() && l != 0.0 {
                    let _ = writeln!(out, " LO {:<8}  {name:<8}  {:>12}", "BND", num(l));
                }
                if !l.is_finite() {
                    let _ = writeln!(out, " MI {:<8}  {name:<8}", "BND");
                }
                if u.is_finite() {
                    let _ = writeln!(out, " UP {:<8}  {name:<8}  {:>12}", "BND", num(u));
                }
            }
        }
    }
    out.push_str("ENDATA\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_program() {
        let lp = LinearProgram::from_dense(
            Direction::Maximize,
            &[0.0, 1.0],
            &[vec![1.0, -0.25]],
            &[RowSense::Eq],
            &[0.5],
            &[(0.0, f64::INFINITY), (0.0, 1.0)],
        )
        .unwrap();
        let text = write_mps(&lp, "TEST");
        let expected = "NAME          TEST
OBJSENSE
    MAX
ROWS
 N  COST
 E  R0
COLUMNS
    X0        R0                   1
    X1        COST                 1
    X1        R0               -0.25
RHS
    RHS       R0                 0.5
BOUNDS
 UP BND       X1                   1
ENDATA
";
        assert_eq!(text, expected);
    }
}
