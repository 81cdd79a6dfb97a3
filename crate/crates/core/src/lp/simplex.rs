//! Bounded-variable primal revised simplex with an explicit dense basis
//! inverse.
//!
//! Phase 1 starts from a slack/artificial basis and minimizes the sum of
//! artificials; phase 2 keeps basic artificials pinned to zero, which lets
//! redundant equality rows stay in the problem. Pricing uses Devex
//! reference weights and falls back to Bland's rule after a run of
//! degenerate pivots. The ratio test is Harris' two-pass variant with a
//! small relaxation. Entering candidates whose pivot would fall below
//! `SMALL_PIVOT` are set aside until nothing else is left.

use super::{Direction, LinearProgram, LpSolution, LpStatus, RowSense};

/// Bound relaxation in the first pass of the ratio test. Basic variables may
/// end a step this far outside their bounds, so it is kept far below the
/// feasibility tolerance.
const RATIO_SLACK: f64 = 1e-12;

/// Pivots below this magnitude are taken only when no other entering
/// candidate remains.
const SMALL_PIVOT: f64 = 1e-5;
const MAX_REJECTED: usize = 10;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Defaults to ten times the number of structural variables.
    pub max_iterations: Option<usize>,
    pub feasibility_tol: f64,
    pub optimality_tol: f64,
    pub pivot_tol: f64,
    /// Iterations between fresh inversions of the basis; defaults to
    /// `max(100, rows)`.
    pub refactor_interval: Option<usize>,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub degenerate_stall: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            max_iterations: None,
            feasibility_tol: 1e-8,
            optimality_tol: 1e-8,
            pivot_tol: 1e-7,
            refactor_interval: None,
            degenerate_stall: 50,
        }
    }
}

pub fn solve(lp: &LinearProgram) -> LpSolution {
    solve_with(lp, &SolverOptions::default())
}

pub fn solve_with(lp: &LinearProgram, opts: &SolverOptions) -> LpSolution {
    let mut s = Simplex::new(lp, opts);
    s.run()
}

/// Like [`solve_with`], but first tries `basis` (one structural column per
/// row, all other variables at their lower bounds) as a starting vertex. If
/// that basis is singular or not primal feasible, or the warm solve loses
/// feasibility, the solve starts cold.
pub fn solve_from_basis(lp: &LinearProgram, basis: &[usize], opts: &SolverOptions) -> LpSolution {
    let mut s = Simplex::new(lp, opts);
    if s.install_basis(basis) {
        let sol = s.optimize();
        if sol.status != LpStatus::NumericalFailure {
            return sol;
        }
    }
    let mut s = Simplex::new(lp, opts);
    s.run()
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    /// Free nonbasic variable resting at zero.
    Zero,
}

#[derive(Clone, Copy, Debug)]
enum Aux {
    /// Unit column `sign * e_row`.
    Unit { row: usize, sign: f64 },
}

enum Outcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Simplex<'a> {
    lp: &'a LinearProgram,
    opts: &'a SolverOptions,
    m: usize,
    n: usize,
    /// Slack and artificial columns, indexed from `n`.
    aux: Vec<Aux>,
    first_artificial: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    /// Row-major inverse of the basis matrix.
    binv: Vec<f64>,
    /// Reduced costs, kept current across pivots.
    d: Vec<f64>,
    /// Devex reference weights.
    devex: Vec<f64>,
    iterations: usize,
    max_iterations: usize,
    since_refactor: usize,
    refactor_interval: usize,
    degenerate_run: usize,
    /// Entering candidates passed over because their pivot was too small;
    /// cleared after every accepted pivot.
    rejected: Vec<usize>,
}

impl<'a> Simplex<'a> {
    fn new(lp: &'a LinearProgram, opts: &'a SolverOptions) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut lower = Vec::with_capacity(n + 2 * m);
        let mut upper = Vec::with_capacity(n + 2 * m);
        let mut x = Vec::with_capacity(n + 2 * m);
        let mut state = Vec::with_capacity(n + 2 * m);
        for j in 0..n {
            let (l, u) = lp.bounds(j);
            lower.push(l);
            upper.push(u);
            let (st, v) = if l.is_finite() {
                (VarState::AtLower, l)
            } else if u.is_finite() {
                (VarState::AtUpper, u)
            } else {
                (VarState::Zero, 0.0)
            };
            state.push(st);
            x.push(v);
        }

        // Residual of each row with every structural variable at its start value.
        let activity = lp.row_activity(&x);
        let residual: Vec<f64> = lp.rhs().iter().zip(&activity).map(|(b, a)| b - a).collect();

        let mut aux = Vec::new();
        let mut basis = vec![usize::MAX; m];
        let mut binv = vec![0.0; m * m];

        // Inequality slacks: basic when their sign matches the residual.
        for (i, sense) in lp.row_sense().iter().enumerate() {
            let sign = match sense {
                RowSense::Eq => continue,
                RowSense::Le => 1.0,
                RowSense::Ge => -1.0,
            };
            let j = n + aux.len();
            aux.push(Aux::Unit { row: i, sign });
            lower.push(0.0);
            upper.push(f64::INFINITY);
            if residual[i] * sign >= 0.0 {
                basis[i] = j;
                state.push(VarState::Basic);
                x.push(residual[i] * sign);
                binv[i * m + i] = sign;
            } else {
                state.push(VarState::AtLower);
                x.push(0.0);
            }
        }
        let first_artificial = n + aux.len();
        for i in 0..m {
            if basis[i] != usize::MAX {
                continue;
            }
            let sign = if residual[i] >= 0.0 { 1.0 } else { -1.0 };
            let j = n + aux.len();
            aux.push(Aux::Unit { row: i, sign });
            lower.push(0.0);
            upper.push(f64::INFINITY);
            basis[i] = j;
            state.push(VarState::Basic);
            x.push(residual[i].abs());
            binv[i * m + i] = sign;
        }

        let total = n + aux.len();
        let max_iterations = opts.max_iterations.unwrap_or(10 * n.max(1));
        let refactor_interval = opts.refactor_interval.unwrap_or(m.max(100));
        Simplex {
            lp,
            opts,
            m,
            n,
            aux,
            first_artificial,
            lower,
            upper,
            cost: vec![0.0; total],
            x,
            state,
            basis,
            binv,
            d: Vec::new(),
            devex: Vec::new(),
            iterations: 0,
            max_iterations,
            since_refactor: 0,
            refactor_interval,
            degenerate_run: 0,
            rejected: Vec::new(),
        }
    }

    fn total_vars(&self) -> usize {
        self.n + self.aux.len()
    }

    fn is_artificial(&self, j: usize) -> bool {
        j >= self.first_artificial
    }

    fn run(&mut self) -> LpSolution {
        // Phase 1: minimize the sum of artificials.
        for j in self.first_artificial..self.total_vars() {
            self.cost[j] = 1.0;
        }
        let phase1 = self.iterate();
        if let Outcome::IterationLimit = phase1 {
            return self.finish(LpStatus::IterationLimit);
        }
        let infeasibility = (self.first_artificial..self.total_vars())
            .map(|j| self.x[j])
            .fold(0.0, f64::max);
        if infeasibility > self.opts.feasibility_tol {
            return self.finish(LpStatus::Infeasible);
        }

        self.optimize()
    }

    /// Sets up a phase 2 start from the given structural columns. Returns
    /// false if they do not form a feasible basis.
    fn install_basis(&mut self, cols: &[usize]) -> bool {
        let n = self.n;
        if cols.len() != self.m
            || cols.iter().any(|&j| j >= n)
            || (0..n).any(|j| !self.lower[j].is_finite())
        {
            return false;
        }
        let mut seen = vec![false; n];
        for &j in cols {
            if std::mem::replace(&mut seen[j], true) {
                return false;
            }
        }
        for j in n..self.total_vars() {
            self.state[j] = VarState::AtLower;
            self.x[j] = 0.0;
            if self.is_artificial(j) {
                self.upper[j] = 0.0;
            }
        }
        for j in 0..n {
            self.state[j] = VarState::AtLower;
            self.x[j] = self.lower[j];
        }
        for (pos, &j) in cols.iter().enumerate() {
            self.basis[pos] = j;
            self.state[j] = VarState::Basic;
        }
        self.refactor();
        self.primal_violation() <= self.opts.feasibility_tol
    }

    /// Phase 2 from a primal feasible basis.
    fn optimize(&mut self) -> LpSolution {
        // Artificials are pinned to zero.
        for j in self.first_artificial..self.total_vars() {
            self.cost[j] = 0.0;
            self.upper[j] = 0.0;
            if self.state[j] != VarState::Basic {
                self.x[j] = 0.0;
                self.state[j] = VarState::AtLower;
            }
        }
        let sign = match self.lp.direction() {
            Direction::Minimize => 1.0,
            Direction::Maximize => -1.0,
        };
        for j in 0..self.n {
            self.cost[j] = sign * self.lp.objective()[j];
        }
        self.degenerate_run = 0;

        for _ in 0..3 {
            match self.iterate() {
                Outcome::IterationLimit => return self.finish(LpStatus::IterationLimit),
                Outcome::Unbounded => return self.finish(LpStatus::Unbounded),
                Outcome::Optimal => {}
            }
            // Re-invert and confirm the vertex is still primal feasible; drift
            // accumulated in the product updates can otherwise leak out.
            self.refactor();
            if self.primal_violation() <= self.opts.feasibility_tol {
                break;
            }
            if !self.restore_feasibility() {
                return self.finish(LpStatus::NumericalFailure);
            }
        }
        self.finish(LpStatus::Optimal)
    }

    fn finish(&self, status: LpStatus) -> LpSolution {
        let x: Vec<f64> = self.x[..self.n].to_vec();
        let objective = x.iter().zip(self.lp.objective()).map(|(a, b)| a * b).sum();
        LpSolution {
            status,
            objective,
            max_residual: self.lp.max_scaled_residual(&x),
            max_bound_violation: self.lp.max_bound_violation(&x),
            x,
            iterations: self.iterations,
        }
    }

    fn primal_violation(&self) -> f64 {
        self.basis
            .iter()
            .map(|&j| (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Small infeasibilities after re-inversion are clipped onto the bounds
    /// and the phase restarted from the resulting point.
    fn restore_feasibility(&mut self) -> bool {
        let tol = self.opts.feasibility_tol;
        for &j in &self.basis {
            let viol = (self.lower[j] - self.x[j]).max(self.x[j] - self.upper[j]);
            if viol > 1e3 * tol {
                return false;
            }
        }
        for pos in 0..self.m {
            let j = self.basis[pos];
            self.x[j] = self.x[j].clamp(self.lower[j], self.upper[j]);
        }
        true
    }

    fn column_dot(&self, y: &[f64], j: usize) -> f64 {
        if j < self.n {
            let (rows, vals) = self.lp.column(j);
            rows.iter().zip(vals).map(|(&r, &v)| y[r] * v).sum()
        } else {
            let Aux::Unit { row, sign } = self.aux[j - self.n];
            y[row] * sign
        }
    }

    /// `B^{-1} a_j`.
    fn ftran(&self, j: usize, out: &mut [f64]) {
        let m = self.m;
        if j < self.n {
            let (rows, vals) = self.lp.column(j);
            for (i, o) in out.iter_mut().enumerate() {
                let row = &self.binv[i * m..(i + 1) * m];
                *o = rows.iter().zip(vals).map(|(&r, &v)| row[r] * v).sum();
            }
        } else {
            let Aux::Unit { row, sign } = self.aux[j - self.n];
            for (i, o) in out.iter_mut().enumerate() {
                *o = self.binv[i * m + row] * sign;
            }
        }
    }

    /// Simplex multipliers `y^T = c_B^T B^{-1}`.
    fn duals(&self, y: &mut [f64]) {
        let m = self.m;
        y.iter_mut().for_each(|v| *v = 0.0);
        for (pos, &j) in self.basis.iter().enumerate() {
            let c = self.cost[j];
            if c == 0.0 {
                continue;
            }
            let row = &self.binv[pos * m..(pos + 1) * m];
            for (yr, &b) in y.iter_mut().zip(row) {
                *yr += c * b;
            }
        }
    }

    /// Recomputes every reduced cost from fresh duals.
    fn reset_reduced_costs(&mut self) {
        let mut y = vec![0.0; self.m];
        self.duals(&mut y);
        let total = self.total_vars();
        self.d.resize(total, 0.0);
        self.devex.resize(total, 1.0);
        for j in 0..total {
            self.d[j] = if self.state[j] == VarState::Basic { 0.0 } else { self.cost[j] - self.column_dot(&y, j) };
        }
    }

    /// Picks an entering variable and its direction (+1 increase, -1
    /// decrease) by Devex-weighted pricing, or the lowest eligible index
    /// under Bland's rule.
    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let tol = self.opts.optimality_tol;
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.total_vars() {
            let st = self.state[j];
            if st == VarState::Basic || self.lower[j] == self.upper[j] || self.rejected.contains(&j) {
                continue;
            }
            let d = self.d[j];
            let dir = match st {
                VarState::AtLower if d < -tol => 1.0,
                VarState::AtUpper if d > tol => -1.0,
                VarState::Zero if d.abs() > tol => -d.signum(),
                _ => continue,
            };
            if bland {
                return Some((j, dir));
            }
            let score = d * d / self.devex[j];
            if best.is_none_or(|(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn iterate(&mut self) -> Outcome {
        let m = self.m;
        let mut w = vec![0.0; m];
        self.devex = vec![1.0; self.total_vars()];
        self.reset_reduced_costs();
        self.rejected.clear();
        let mut allow_small = false;
        loop {
            if self.iterations >= self.max_iterations {
                return Outcome::IterationLimit;
            }
            if self.since_refactor >= self.refactor_interval {
                self.refactor();
                self.reset_reduced_costs();
            }
            let bland = self.degenerate_run >= self.opts.degenerate_stall;
            let Some((q, dir)) = self.price(bland) else {
                if !self.rejected.is_empty() {
                    // Only poorly pivoting candidates are left; refresh and
                    // allow them.
                    self.refactor();
                    self.reset_reduced_costs();
                    self.rejected.clear();
                    allow_small = true;
                    continue;
                }
                // Confirm optimality against fresh reduced costs.
                let stale = self.since_refactor > 0;
                self.refactor();
                self.reset_reduced_costs();
                if stale && self.price(bland).is_some() {
                    continue;
                }
                return Outcome::Optimal;
            };
            self.ftran(q, &mut w);
            self.iterations += 1;

            match self.ratio_test(q, dir, &w, bland) {
                Step::Unbounded => return Outcome::Unbounded,
                Step::Flip(theta) => {
                    self.move_along(q, dir, theta, &w);
                    self.state[q] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                    self.note_step(theta);
                }
                Step::Pivot { pos, .. } if !allow_small && w[pos].abs() < SMALL_PIVOT => {
                    self.iterations -= 1;
                    self.rejected.push(q);
                    if self.rejected.len() >= MAX_REJECTED {
                        allow_small = true;
                    }
                }
                Step::Pivot { pos, theta, to_upper } => {
                    allow_small = false;
                    self.rejected.clear();
                    self.move_along(q, dir, theta, &w);
                    let leaving = self.basis[pos];
                    self.state[leaving] = if to_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.x[leaving] = if to_upper { self.upper[leaving] } else { self.lower[leaving] };
                    if !self.x[leaving].is_finite() {
                        self.state[leaving] = VarState::Zero;
                        self.x[leaving] = 0.0;
                    }
                    self.update_pricing(pos, q, leaving, &w);
                    self.basis[pos] = q;
                    self.state[q] = VarState::Basic;
                    self.pivot_inverse(pos, &w);
                    self.note_step(theta);
                }
            }
        }
    }

    /// Updates reduced costs and Devex weights for a pivot on basis position
    /// `pos` with entering `q`, using the pivot row of the current inverse.
    fn update_pricing(&mut self, pos: usize, q: usize, leaving: usize, w: &[f64]) {
        let m = self.m;
        let rho: Vec<f64> = self.binv[pos * m..(pos + 1) * m].to_vec();
        let alpha_q = w[pos];
        let ratio = self.d[q] / alpha_q;
        let wq = self.devex[q];
        for j in 0..self.total_vars() {
            if self.state[j] == VarState::Basic || j == q {
                continue;
            }
            let alpha = self.column_dot(&rho, j);
            if alpha == 0.0 {
                continue;
            }
            self.d[j] -= ratio * alpha;
            let r = alpha / alpha_q;
            self.devex[j] = self.devex[j].max(r * r * wq);
        }
        self.d[q] = 0.0;
        self.d[leaving] = -ratio;
        self.devex[leaving] = (wq / (alpha_q * alpha_q)).max(1.0);
    }

    fn note_step(&mut self, theta: f64) {
        if theta <= 1e-12 {
            self.degenerate_run += 1;
        } else {
            self.degenerate_run = 0;
        }
    }

    fn move_along(&mut self, q: usize, dir: f64, theta: f64, w: &[f64]) {
        if theta == 0.0 {
            return;
        }
        self.x[q] += dir * theta;
        for (pos, &j) in self.basis.iter().enumerate() {
            self.x[j] -= dir * theta * w[pos];
        }
    }

    fn ratio_test(&self, q: usize, dir: f64, w: &[f64], bland: bool) -> Step {
        if bland {
            return self.textbook_ratio_test(q, dir, w);
        }
        let tol = RATIO_SLACK;
        let piv = self.opts.pivot_tol;

        // Pass 1: largest step with bounds relaxed by the tolerance.
        let mut theta_max = f64::INFINITY;
        for (pos, &wi) in w.iter().enumerate() {
            if wi.abs() <= piv {
                continue;
            }
            let j = self.basis[pos];
            let rate = -dir * wi;
            let room = if rate < 0.0 {
                (self.x[j] - self.lower[j] + tol) / -rate
            } else {
                (self.upper[j] - self.x[j] + tol) / rate
            };
            theta_max = theta_max.min(room);
        }

        let span = self.upper[q] - self.lower[q];
        if theta_max == f64::INFINITY {
            return if span.is_finite() { Step::Flip(span) } else { Step::Unbounded };
        }

        // Pass 2: among rows blocking within theta_max, take the largest pivot.
        let mut chosen: Option<(usize, f64, bool, f64)> = None;
        for (pos, &wi) in w.iter().enumerate() {
            if wi.abs() <= piv {
                continue;
            }
            let j = self.basis[pos];
            let rate = -dir * wi;
            let (room, to_upper) = if rate < 0.0 {
                ((self.x[j] - self.lower[j]) / -rate, false)
            } else {
                ((self.upper[j] - self.x[j]) / rate, true)
            };
            if !room.is_finite() || room > theta_max {
                continue;
            }
            let better = chosen.is_none_or(|(_, _, _, cw)| wi.abs() > cw);
            if better {
                chosen = Some((pos, room.max(0.0), to_upper, wi.abs()));
            }
        }
        match chosen {
            Some((pos, theta, to_upper, _)) => {
                if span.is_finite() && span <= theta {
                    Step::Flip(span)
                } else {
                    Step::Pivot { pos, theta, to_upper }
                }
            }
            None if span.is_finite() => Step::Flip(span),
            None => Step::Unbounded,
        }
    }

    /// Exact minimum ratio, ties to the lowest variable index; used together
    /// with Bland pricing so that degenerate cycles are broken.
    fn textbook_ratio_test(&self, q: usize, dir: f64, w: &[f64]) -> Step {
        let mut chosen: Option<(usize, f64, bool)> = None;
        for (pos, &wi) in w.iter().enumerate() {
            if wi.abs() <= self.opts.pivot_tol {
                continue;
            }
            let j = self.basis[pos];
            let rate = -dir * wi;
            let (room, to_upper) = if rate < 0.0 {
                ((self.x[j] - self.lower[j]).max(0.0) / -rate, false)
            } else {
                ((self.upper[j] - self.x[j]).max(0.0) / rate, true)
            };
            if !room.is_finite() {
                continue;
            }
            let better = match chosen {
                None => true,
                Some((cpos, theta, _)) => room < theta || (room == theta && j < self.basis[cpos]),
            };
            if better {
                chosen = Some((pos, room, to_upper));
            }
        }
        let span = self.upper[q] - self.lower[q];
        match chosen {
            Some((_, theta, _)) if span.is_finite() && span <= theta => Step::Flip(span),
            Some((pos, theta, to_upper)) => Step::Pivot { pos, theta, to_upper },
            None if span.is_finite() => Step::Flip(span),
            None => Step::Unbounded,
        }
    }

    /// Updates `B^{-1}` after column `w = B^{-1} a_q` replaces basis position `pos`.
    fn pivot_inverse(&mut self, pos: usize, w: &[f64]) {
        let m = self.m;
        let p = w[pos];
        {
            let row = &mut self.binv[pos * m..(pos + 1) * m];
            row.iter_mut().for_each(|v| *v /= p);
        }
        let (head, rest) = self.binv.split_at_mut(pos * m);
        let (pivot_row, tail) = rest.split_at_mut(m);
        for (i, chunk) in head.chunks_mut(m).enumerate() {
            let f = w[i];
            if f != 0.0 {
                chunk.iter_mut().zip(pivot_row.iter()).for_each(|(a, b)| *a -= f * b);
            }
        }
        for (k, chunk) in tail.chunks_mut(m).enumerate() {
            let f = w[pos + 1 + k];
            if f != 0.0 {
                chunk.iter_mut().zip(pivot_row.iter()).for_each(|(a, b)| *a -= f * b);
            }
        }
        self.since_refactor += 1;
    }

    /// Recomputes `B^{-1}` by Gauss-Jordan elimination and the basic values
    /// from scratch. Basis columns that turn out dependent are replaced by
    /// an artificial.
    fn refactor(&mut self) {
        let m = self.m;
        loop {
            let mut b = vec![0.0; m * m];
            for (pos, &j) in self.basis.iter().enumerate() {
                if j < self.n {
                    let (rows, vals) = self.lp.column(j);
                    for (&r, &v) in rows.iter().zip(vals) {
                        b[r * m + pos] = v;
                    }
                } else {
                    let Aux::Unit { row, sign } = self.aux[j - self.n];
                    b[row * m + pos] = sign;
                }
            }
            match invert(&mut b, m) {
                Ok(inv) => {
                    self.binv = inv;
                    break;
                }
                Err((pos, row)) => self.repair_basis(pos, row),
            }
        }
        self.since_refactor = 0;
        self.recompute_basic_values();
    }

    /// Swaps the dependent basis column at `pos` for the artificial of
    /// `row`, a row the elimination left without a pivot.
    fn repair_basis(&mut self, pos: usize, row: usize) {
        let leaving = self.basis[pos];
        let art = (self.first_artificial..self.total_vars())
            .find(|&j| matches!(self.aux[j - self.n], Aux::Unit { row: r, .. } if r == row));
        let art = match art {
            Some(a) => a,
            None => {
                let j = self.total_vars();
                self.aux.push(Aux::Unit { row, sign: 1.0 });
                self.lower.push(0.0);
                self.upper.push(0.0);
                self.cost.push(0.0);
                self.x.push(0.0);
                self.state.push(VarState::AtLower);
                j
            }
        };
        let (l, u) = (self.lower[leaving], self.upper[leaving]);
        let (st, v) = if l.is_finite() {
            (VarState::AtLower, l)
        } else if u.is_finite() {
            (VarState::AtUpper, u)
        } else {
            (VarState::Zero, 0.0)
        };
        self.state[leaving] = st;
        self.x[leaving] = v;
        self.basis[pos] = art;
        self.state[art] = VarState::Basic;
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut r: Vec<f64> = self.lp.rhs().to_vec();
        for j in 0..self.total_vars() {
            if self.state[j] == VarState::Basic || self.x[j] == 0.0 {
                continue;
            }
            let xj = self.x[j];
            if j < self.n {
                let (rows, vals) = self.lp.column(j);
                for (&row, &v) in rows.iter().zip(vals) {
                    r[row] -= v * xj;
                }
            } else {
                let Aux::Unit { row, sign } = self.aux[j - self.n];
                r[row] -= sign * xj;
            }
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            let val: f64 = row.iter().zip(&r).map(|(a, b)| a * b).sum();
            let j = self.basis[pos];
            self.x[j] = val;
        }
        // One step of iterative refinement against the basic columns.
        let mut res = r;
        for &j in &self.basis {
            let xj = self.x[j];
            if j < self.n {
                let (rows, vals) = self.lp.column(j);
                for (&row, &v) in rows.iter().zip(vals) {
                    res[row] -= v * xj;
                }
            } else {
                let Aux::Unit { row, sign } = self.aux[j - self.n];
                res[row] -= sign * xj;
            }
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            let delta: f64 = row.iter().zip(&res).map(|(a, b)| a * b).sum();
            let j = self.basis[pos];
            self.x[j] += delta;
        }
    }
}

enum Step {
    Unbounded,
    /// The entering variable reaches its opposite bound first.
    Flip(f64),
    Pivot { pos: usize, theta: f64, to_upper: bool },
}

/// Dense Gauss-Jordan inversion with partial pivoting. On failure returns the
/// first column without an acceptable pivot together with an original row
/// that has not been pivoted on; the unit vector of that row is independent
/// of the columns before it.
fn invert(a: &mut [f64], m: usize) -> Result<Vec<f64>, (usize, usize)> {
    let mut inv = vec![0.0; m * m];
    let mut rows: Vec<usize> = (0..m).collect();
    for i in 0..m {
        inv[i * m + i] = 1.0;
    }
    for col in 0..m {
        let (piv_row, piv_val) = (col..m)
            .map(|r| (r, a[r * m + col].abs()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_val < 1e-11 {
            return Err((col, rows[col]));
        }
        if piv_row != col {
            rows.swap(col, piv_row);
            for k in 0..m {
                a.swap(col * m + k, piv_row * m + k);
                inv.swap(col * m + k, piv_row * m + k);
            }
        }
        let p = a[col * m + col];
        for k in 0..m {
            a[col * m + k] /= p;
            inv[col * m + k] /= p;
        }
        let pivot_a: Vec<f64> = a[col * m..(col + 1) * m].to_vec();
        let pivot_inv: Vec<f64> = inv[col * m..(col + 1) * m].to_vec();
        for r in 0..m {
            if r == col {
                continue;
            }
            let f = a[r * m + col];
            if f == 0.0 {
                continue;
            }
            for k in col..m {
                a[r * m + k] -= f * pivot_a[k];
            }
            for k in 0..m {
                inv[r * m + k] -= f * pivot_inv[k];
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::LinearProgram;
    use approx::assert_abs_diff_eq;

    fn lp(
        dir: Direction,
        c: &[f64],
        rows: &[Vec<f64>],
        senses: &[RowSense],
        b: &[f64],
        bounds: &[(f64, f64)],
    ) -> LinearProgram {
        LinearProgram::from_dense(dir, c, rows, senses, b, bounds).unwrap()
    }

    #[test]
    fn single_bounded_variable() {
        let p = lp(
            Direction::Maximize,
            &[1.0],
            &[vec![1.0]],
            &[RowSense::Le],
            &[0.5],
            &[(0.0, f64::INFINITY)],
        );
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let p = lp(
            Direction::Maximize,
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[RowSense::Le; 3],
            &[4.0, 12.0, 18.0],
            &[(0.0, f64::INFINITY); 2],
        );
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 36.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[1], 6.0, epsilon = 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y s.t. x + y >= 2, x - y = 0.5
        let p = lp(
            Direction::Minimize,
            &[1.0, 1.0],
            &[vec![1.0, 1.0], vec![1.0, -1.0]],
            &[RowSense::Ge, RowSense::Eq],
            &[2.0, 0.5],
            &[(0.0, f64::INFINITY); 2],
        );
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(s.x[0], 1.25, epsilon = 1e-9);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let p = lp(
            Direction::Minimize,
            &[1.0],
            &[vec![1.0], vec![1.0]],
            &[RowSense::Le, RowSense::Ge],
            &[1.0, 2.0],
            &[(0.0, f64::INFINITY)],
        );
        assert_eq!(solve(&p).status, LpStatus::Infeasible);

        let p = lp(
            Direction::Maximize,
            &[1.0, 0.0],
            &[vec![1.0, -1.0]],
            &[RowSense::Le],
            &[1.0],
            &[(0.0, f64::INFINITY); 2],
        );
        assert_eq!(solve(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn bound_flips_and_free_variables() {
        // max x + y, x in [0, 1], y free, x + y <= 3, y <= 1.5 (row)
        let p = lp(
            Direction::Maximize,
            &[1.0, 1.0],
            &[vec![1.0, 1.0], vec![0.0, 1.0]],
            &[RowSense::Le, RowSense::Le],
            &[3.0, 1.5],
            &[(0.0, 1.0), (f64::NEG_INFINITY, f64::INFINITY)],
        );
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 2.5, epsilon = 1e-9);
    }

    #[test]
    fn redundant_equalities_are_tolerated() {
        // Row 2 = row 0 + row 1.
        let p = lp(
            Direction::Maximize,
            &[1.0, 2.0, 0.0],
            &[vec![1.0, 1.0, 0.0], vec![0.0, 1.0, 1.0], vec![1.0, 2.0, 1.0]],
            &[RowSense::Eq; 3],
            &[1.0, 1.0, 2.0],
            &[(0.0, f64::INFINITY); 3],
        );
        let s = solve(&p);
        assert_eq!(s.status, LpStatus::Optimal);
        assert_abs_diff_eq!(s.objective, 2.0, epsilon = 1e-9);
        assert!(s.max_residual < 1e-12);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let p = lp(
            Direction::Maximize,
            &[3.0, 5.0],
            &[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, 2.0]],
            &[RowSense::Le; 3],
            &[4.0, 12.0, 18.0],
            &[(0.0, f64::INFINITY); 2],
        );
        let opts = SolverOptions { max_iterations: Some(1), ..Default::default() };
        assert_eq!(solve_with(&p, &opts).status, LpStatus::IterationLimit);
    }

    #[test]
    fn gauss_jordan_inverse() {
        let mut a = vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0];
        let orig = a.clone();
        let inv = invert(&mut a, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|k| orig[i * 3 + k] * inv[k * 3 + j]).sum();
                assert_abs_diff_eq!(v, if i == j { 1.0 } else { 0.0 }, epsilon = 1e-14);
            }
        }
        let mut singular = vec![1.0, 2.0, 2.0, 4.0];
        assert_eq!(invert(&mut singular, 2), Err((1, 0)));
    }
}
