//! Linear programs with equality/inequality rows and bounded variables, and
//! a revised simplex solver for them.

mod mps;
mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use mps::write_mps;
pub use simplex::{solve, solve_from_basis, solve_with, SolverOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSense {
    Eq,
    Le,
    Ge,
}

/// Constraint matrix is stored column-wise; each column lists its nonzero
/// `(row, value)` pairs in increasing row order.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearProgram {
    direction: Direction,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    col_start: Vec<usize>,
    row_index: Vec<usize>,
    values: Vec<f64>,
    row_sense: Vec<RowSense>,
    rhs: Vec<f64>,
}

impl LinearProgram {
    /// Empty program with the given rows and no variables.
    pub fn with_rows(direction: Direction, row_sense: Vec<RowSense>, rhs: Vec<f64>) -> Result<Self> {
        if row_sense.len() != rhs.len() {
            return Err(Error::contract("row senses and right-hand side differ in length"));
        }
        Ok(LinearProgram {
            direction,
            objective: Vec::new(),
            lower: Vec::new(),
            upper: Vec::new(),
            col_start: vec![0],
            row_index: Vec::new(),
            values: Vec::new(),
            row_sense,
            rhs,
        })
    }

    /// Builds a program from a dense row-major matrix.
    pub fn from_dense(
        direction: Direction,
        objective: &[f64],
        rows: &[Vec<f64>],
        row_sense: &[RowSense],
        rhs: &[f64],
        bounds: &[(f64, f64)],
    ) -> Result<Self> {
        let n = objective.len();
        if rows.iter().any(|r| r.len() != n) || bounds.len() != n {
            return Err(Error::contract("dense program has inconsistent dimensions"));
        }
        let mut lp = Self::with_rows(direction, row_sense.to_vec(), rhs.to_vec())?;
        for j in 0..n {
            let col: Vec<(usize, f64)> = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| r[j] != 0.0)
                .map(|(i, r)| (i, r[j]))
                .collect();
            lp.add_column(objective[j], bounds[j].0, bounds[j].1, &col)?;
        }
        Ok(lp)
    }

    /// Appends a variable. Entries must have strictly increasing row indices.
    pub fn add_column(&mut self, cost: f64, lower: f64, upper: f64, entries: &[(usize, f64)]) -> Result<usize> {
        if !(lower <= upper) || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(Error::contract(format!("invalid bounds [{lower}, {upper}]")));
        }
        let mut last = None;
        for &(row, value) in entries {
            if row >= self.rhs.len() || last.is_some_and(|l| l >= row) || !value.is_finite() {
                return Err(Error::contract(format!("bad column entry ({row}, {value})")));
            }
            last = Some(row);
            self.row_index.push(row);
            self.values.push(value);
        }
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.col_start.push(self.row_index.len());
        Ok(self.objective.len() - 1)
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) -> Result<()> {
        if !(lower <= upper) {
            return Err(Error::contract(format!("invalid bounds [{lower}, {upper}]")));
        }
        self.lower[j] = lower;
        self.upper[j] = upper;
        Ok(())
    }

    pub fn set_objective(&mut self, objective: Vec<f64>) -> Result<()> {
        if objective.len() != self.num_vars() {
            return Err(Error::contract("objective length does not match variable count"));
        }
        self.objective = objective;
        Ok(())
    }

    pub fn row_sense(&self) -> &[RowSense] {
        &self.row_sense
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Nonzeros of column `j` as parallel `(rows, values)` slices.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_start[j], self.col_start[j + 1]);
        (&self.row_index[s..e], &self.values[s..e])
    }

    pub fn num_equalities(&self) -> usize {
        self.row_sense.iter().filter(|s| **s == RowSense::Eq).count()
    }

    /// `A x` for a full variable vector.
    pub fn row_activity(&self, x: &[f64]) -> Vec<f64> {
        let mut act = vec![0.0; self.num_rows()];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (rows, vals) = self.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                act[r] += v * xj;
            }
        }
        act
    }

    /// Largest row violation of `x`, each row divided by its largest
    /// absolute coefficient.
    pub fn max_scaled_residual(&self, x: &[f64]) -> f64 {
        let act = self.row_activity(x);
        let mut scale = vec![0.0f64; self.num_rows()];
        for j in 0..self.num_vars() {
            let (rows, vals) = self.column(j);
            for (&r, &v) in rows.iter().zip(vals) {
                scale[r] = scale[r].max(v.abs());
            }
        }
        (0..self.num_rows())
            .map(|i| {
                let diff = act[i] - self.rhs[i];
                let viol = match self.row_sense[i] {
                    RowSense::Eq => diff.abs(),
                    RowSense::Le => diff.max(0.0),
                    RowSense::Ge => (-diff).max(0.0),
                };
                viol / scale[i].max(1.0)
            })
            .fold(0.0, f64::max)
    }

    pub fn max_bound_violation(&self, x: &[f64]) -> f64 {
        x.iter()
            .enumerate()
            .map(|(j, &xj)| (self.lower[j] - xj).max(xj - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Copy with row `i` multiplied by `factors[i]` (coefficients and
    /// right-hand side). Negative factors flip inequality senses.
    pub fn scale_rows(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.num_rows() || factors.iter().any(|f| *f == 0.0 || !f.is_finite()) {
            return Err(Error::contract("row scale factors must be finite and nonzero, one per row"));
        }
        let mut out = self.clone();
        for (v, &r) in out.values.iter_mut().zip(&self.row_index) {
            *v *= factors[r];
        }
        for (i, f) in factors.iter().enumerate() {
            out.rhs[i] *= f;
            if *f < 0.0 {
                out.row_sense[i] = match out.row_sense[i] {
                    RowSense::Eq => RowSense::Eq,
                    RowSense::Le => RowSense::Ge,
                    RowSense::Ge => RowSense::Le,
                };
            }
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
    /// Feasibility was lost to rounding and could not be restored.
    NumericalFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value in the program's own direction; meaningful only when
    /// the status is `Optimal`.
    pub objective: f64,
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Scaled row residual of `x` (see [`LinearProgram::max_scaled_residual`]).
    pub max_residual: f64,
    pub max_bound_violation: f64,
}
