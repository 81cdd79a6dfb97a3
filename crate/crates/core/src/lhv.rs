//! The local-hidden-variable program: find the largest visibility at which
//! the mixed correlations are marginals of a joint distribution over all
//! outcome assignments.

use serde::{Deserialize, Serialize};

use crate::born::{noise_tensor, quantum_tensor, NoiseModel, ProbabilityTensor};
use crate::error::{Error, Result};
use crate::lp::{solve_from_basis, solve_with, Direction, LinearProgram, LpSolution, LpStatus, RowSense, SolverOptions};
use crate::observables::SettingsBank;
use crate::states::{PureState, DIM};

/// Residual bound an optimal vertex must satisfy before its value is trusted.
const ACCEPT_RESIDUAL: f64 = 1e-8;
const ACCEPT_BOUND_VIOLATION: f64 = 1e-9;

/// Number of hidden assignments `3^(3m)`.
pub fn assignment_count(m: usize) -> usize {
    3usize.pow(3 * m as u32)
}

/// Outcomes `[a_1..a_m, b_1..b_m, c_1..c_m]` of assignment `lambda`, with
/// `a_1` the most significant base-3 digit.
pub fn assignment_outcomes(lambda: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; 3 * m];
    let mut rest = lambda;
    for slot in out.iter_mut().rev() {
        *slot = rest % 3;
        rest /= 3;
    }
    out
}

/// Column index of the visibility variable in a program for `m` settings.
pub fn visibility_column(m: usize) -> usize {
    assignment_count(m)
}

/// Maximize `v` subject to: for each `(i, j, k, a, b, c)` the assignments
/// with `a` at Alice's slot `i`, `b` at Bob's slot `j` and `c` at Charlie's
/// slot `k` carry total weight `v P_state + (1 - v) P_noise`; weights sum to
/// one; weights are nonnegative and `v` lies in `[0, 1]`.
///
/// Rows are the tensor entries in tensor order followed by the
/// normalization row; columns are the assignments in order and then `v`.
pub fn build_program(state: &ProbabilityTensor, noise: &ProbabilityTensor) -> Result<LinearProgram> {
    let m = state.settings_count();
    if noise.settings_count() != m {
        return Err(Error::contract(format!(
            "state tensor has {m} settings, noise tensor has {}",
            noise.settings_count()
        )));
    }
    let triples = m * m * m;
    let rows = triples * DIM + 1;
    let mut rhs = noise.entries().to_vec();
    rhs.push(1.0);
    let mut lp = LinearProgram::with_rows(Direction::Maximize, vec![RowSense::Eq; rows], rhs)?;

    let mut entries = Vec::with_capacity(triples + 1);
    for lambda in 0..assignment_count(m) {
        let o = assignment_outcomes(lambda, m);
        entries.clear();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let outcome = 9 * o[i] + 3 * o[m + j] + o[2 * m + k];
                    entries.push((((i * m + j) * m + k) * DIM + outcome, 1.0));
                }
            }
        }
        entries.push((rows - 1, 1.0));
        lp.add_column(0.0, 0.0, f64::INFINITY, &entries)?;
    }

    let v_col: Vec<(usize, f64)> = state
        .entries()
        .iter()
        .zip(noise.entries())
        .enumerate()
        .filter(|(_, (p, q))| p != q)
        .map(|(r, (p, q))| (r, q - p))
        .collect();
    lp.add_column(1.0, 0.0, 1.0, &v_col)?;
    Ok(lp)
}

/// Number of local functionals per party in the reduced form: the constant
/// and, for each setting, the indicators of outcomes 0 and 1.
fn local_functionals(m: usize) -> usize {
    1 + 2 * m
}

/// Value of local functional `f` on outcome `r` of setting `s`.
fn functional_hits(f: usize, s: usize, r: usize) -> bool {
    f == 0 || (s == (f - 1) / 2 && r == (f - 1) % 2)
}

/// Expectations of all product functionals under `p`. A constant factor
/// marginalizes its party; since the tensors are no-signaling the marginal
/// does not depend on that party's setting and is averaged over them.
fn functional_values(p: &ProbabilityTensor) -> Vec<f64> {
    let m = p.settings_count();
    let l = local_functionals(m);
    let mut out = vec![0.0; l * l * l];
    let settings_of = |f: usize| -> Vec<usize> { if f == 0 { (0..m).collect() } else { vec![(f - 1) / 2] } };
    for fa in 0..l {
        for fb in 0..l {
            for fc in 0..l {
                let (sa, sb, sc) = (settings_of(fa), settings_of(fb), settings_of(fc));
                let mut total = 0.0;
                for &i in &sa {
                    for &j in &sb {
                        for &k in &sc {
                            for a in 0..3 {
                                if !functional_hits(fa, i, a) {
                                    continue;
                                }
                                for b in 0..3 {
                                    if !functional_hits(fb, j, b) {
                                        continue;
                                    }
                                    for c in 0..3 {
                                        if functional_hits(fc, k, c) {
                                            total += p.get(i, j, k, a, b, c);
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
                out[(fa * l + fb) * l + fc] = total / (sa.len() * sb.len() * sc.len()) as f64;
            }
        }
    }
    out
}

/// The same program with its equality rows replaced by a basis of their
/// span: one row per product of local functionals, `(1 + 2m)^3` rows in
/// all, the all-constant row being the normalization. Feasible sets agree
/// whenever both tensors are no-signaling, which Born-rule tensors are.
pub fn build_reduced_program(state: &ProbabilityTensor, noise: &ProbabilityTensor) -> Result<LinearProgram> {
    let m = state.settings_count();
    if noise.settings_count() != m {
        return Err(Error::contract(format!(
            "state tensor has {m} settings, noise tensor has {}",
            noise.settings_count()
        )));
    }
    let l = local_functionals(m);
    let ps = functional_values(state);
    let pn = functional_values(noise);
    let mut lp = LinearProgram::with_rows(Direction::Maximize, vec![RowSense::Eq; l * l * l], pn.clone())?;

    let hits = |o: &[usize]| -> Vec<usize> {
        (0..l).filter(|&f| f == 0 || o[(f - 1) / 2] == (f - 1) % 2).collect()
    };
    let mut entries = Vec::new();
    for lambda in 0..assignment_count(m) {
        let o = assignment_outcomes(lambda, m);
        let (ha, hb, hc) = (hits(&o[..m]), hits(&o[m..2 * m]), hits(&o[2 * m..]));
        entries.clear();
        for &fa in &ha {
            for &fb in &hb {
                for &fc in &hc {
                    entries.push(((fa * l + fb) * l + fc, 1.0));
                }
            }
        }
        lp.add_column(0.0, 0.0, f64::INFINITY, &entries)?;
    }
    let v_col: Vec<(usize, f64)> = ps
        .iter()
        .zip(&pn)
        .enumerate()
        .filter(|(_, (p, q))| (*q - *p).abs() > 1e-15)
        .map(|(r, (p, q))| (r, q - p))
        .collect();
    lp.add_column(1.0, 0.0, 1.0, &v_col)?;
    Ok(lp)
}

/// Per-party, per-setting outcome distributions of a tensor that factorizes
/// as `q_A(a|i) q_B(b|j) q_C(c|k)`, or `None` if it does not.
fn local_factors(p: &ProbabilityTensor) -> Option<[Vec<[f64; 3]>; 3]> {
    let m = p.settings_count();
    let mut q = [vec![[0.0; 3]; m], vec![[0.0; 3]; m], vec![[0.0; 3]; m]];
    for s in 0..m {
        for r in 0..3 {
            q[0][s][r] = p.marginal(0, [s, 0, 0], r);
            q[1][s][r] = p.marginal(1, [0, s, 0], r);
            q[2][s][r] = p.marginal(2, [0, 0, s], r);
        }
    }
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for o in 0..DIM {
                    let (a, b, c) = crate::states::digits(o);
                    let want = q[0][i][a] * q[1][j][b] * q[2][k][c];
                    if (p.get(i, j, k, a, b, c) - want).abs() > 1e-12 {
                        return None;
                    }
                }
            }
        }
    }
    Some(q)
}

/// Deterministic local strategies of one party that couple its per-setting
/// distributions monotonically: the unit interval is cut at every
/// cumulative probability and each piece assigns an outcome per setting.
/// Yields `2m + 1` strategies, consecutive ones differing in one outcome by
/// one, and their weights (piece lengths, possibly zero).
fn monotone_coupling(q: &[[f64; 3]]) -> Vec<(Vec<usize>, f64)> {
    let mut cuts: Vec<(f64, usize, usize)> = Vec::with_capacity(2 * q.len());
    for (s, dist) in q.iter().enumerate() {
        cuts.push((dist[0], s, 1));
        cuts.push((dist[0] + dist[1], s, 2));
    }
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)).then(x.1.cmp(&y.1)));
    let mut outcome = vec![0; q.len()];
    let mut out = Vec::with_capacity(cuts.len() + 1);
    let mut last = 0.0;
    for (pos, s, next) in cuts {
        let pos = pos.clamp(last, 1.0);
        out.push((outcome.clone(), pos - last));
        outcome[s] = next;
        last = pos;
    }
    out.push((outcome, 1.0 - last));
    out
}

/// A feasible starting basis for the reduced program at `v = 0` when the
/// noise tensor factorizes: products of the parties' monotone couplings.
fn product_noise_basis(noise: &ProbabilityTensor) -> Option<Vec<usize>> {
    let m = noise.settings_count();
    let q = local_factors(noise)?;
    let local: Vec<Vec<usize>> = q
        .iter()
        .map(|party| {
            monotone_coupling(party)
                .into_iter()
                .map(|(o, _)| o.iter().fold(0, |acc, &d| acc * 3 + d))
                .collect()
        })
        .collect();
    let (wb, wc) = (3usize.pow(2 * m as u32), 3usize.pow(m as u32));
    let mut basis = Vec::with_capacity(local[0].len().pow(3));
    for &a in &local[0] {
        for &b in &local[1] {
            for &c in &local[2] {
                basis.push(a * wb + b * wc + c);
            }
        }
    }
    Some(basis)
}

/// Whether `p(a, b, c | i, j, k)` is invariant under every permutation of
/// the three parties.
pub fn is_party_symmetric(p: &ProbabilityTensor, tol: f64) -> bool {
    let m = p.settings_count();
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for o in 0..DIM {
                    let (a, b, c) = crate::states::digits(o);
                    let x = p.get(i, j, k, a, b, c);
                    let swaps = [p.get(j, i, k, b, a, c), p.get(i, k, j, a, c, b)];
                    if swaps.iter().any(|y| (x - y).abs() > tol) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

const PERMUTATIONS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];

fn sorted_triples(n: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for x in 0..n {
        for y in x..n {
            for z in y..n {
                out.push([x, y, z]);
            }
        }
    }
    out
}

/// Number of distinct orderings of a sorted triple.
/// Program for party-symmetric tensors. A symmetric LHV model can be
/// averaged over party permutations, so it suffices to weight orbits of
/// assignments: one column per multiset of three local strategies, standing
/// for the uniform distribution over its orderings, and one row per
/// multiset of local functionals.
pub fn build_symmetric_program(state: &ProbabilityTensor, noise: &ProbabilityTensor) -> Result<LinearProgram> {
    let m = state.settings_count();
    if noise.settings_count() != m {
        return Err(Error::contract(format!(
            "state tensor has {m} settings, noise tensor has {}",
            noise.settings_count()
        )));
    }
    if !is_party_symmetric(state, 1e-12) || !is_party_symmetric(noise, 1e-12) {
        return Err(Error::contract("tensors are not symmetric under party permutations"));
    }
    let l = local_functionals(m);
    let ps = functional_values(state);
    let pn = functional_values(noise);
    let rows = sorted_triples(l);
    let flat = |f: &[usize; 3]| (f[0] * l + f[1]) * l + f[2];
    let rhs: Vec<f64> = rows.iter().map(|f| pn[flat(f)]).collect();
    let mut lp = LinearProgram::with_rows(Direction::Maximize, vec![RowSense::Eq; rows.len()], rhs)?;
    let row_of: std::collections::HashMap<[usize; 3], usize> =
        rows.iter().enumerate().map(|(r, f)| (*f, r)).collect();

    // hits[s][f]: local strategy s satisfies functional f.
    let strategies = 3usize.pow(m as u32);
    let hits: Vec<Vec<bool>> = (0..strategies)
        .map(|s| {
            let o = assignment_outcomes(s, m)[2 * m..].to_vec();
            (0..l).map(|f| f == 0 || o[(f - 1) / 2] == (f - 1) % 2).collect()
        })
        .collect();
    let mut acc = vec![0.0; rows.len()];
    let mut entries = Vec::new();
    for t in sorted_triples(strategies) {
        acc.iter_mut().for_each(|v| *v = 0.0);
        for perm in PERMUTATIONS {
            let (sa, sb, sc) = (t[perm[0]], t[perm[1]], t[perm[2]]);
            for fa in (0..l).filter(|&f| hits[sa][f]) {
                for fb in (0..l).filter(|&f| hits[sb][f]) {
                    for fc in (0..l).filter(|&f| hits[sc][f]) {
                        let mut key = [fa, fb, fc];
                        key.sort_unstable();
                        // Each row stands for one ordered functional; the
                        // others in its class carry the same constraint.
                        if key == [fa, fb, fc] {
                            acc[row_of[&key]] += 1.0 / 6.0;
                        }
                    }
                }
            }
        }
        entries.clear();
        entries.extend(acc.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(r, v)| (r, *v)));
        lp.add_column(0.0, 0.0, f64::INFINITY, &entries)?;
    }
    let v_col: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .map(|(r, f)| (r, pn[flat(f)] - ps[flat(f)]))
        .filter(|(_, d)| d.abs() > 1e-15)
        .collect();
    lp.add_column(1.0, 0.0, 1.0, &v_col)?;
    Ok(lp)
}

/// Starting basis for the symmetric program when the noise factorizes into
/// identical parties: multisets of one party's monotone coupling.
fn symmetric_noise_basis(noise: &ProbabilityTensor) -> Option<Vec<usize>> {
    let m = noise.settings_count();
    let q = local_factors(noise)?;
    let local: Vec<usize> = monotone_coupling(&q[0])
        .into_iter()
        .map(|(o, _)| o.iter().fold(0, |acc, &d| acc * 3 + d))
        .collect();
    let strategies = 3usize.pow(m as u32);
    let index: std::collections::HashMap<[usize; 3], usize> =
        sorted_triples(strategies).into_iter().enumerate().map(|(c, t)| (t, c)).collect();
    let mut basis = Vec::new();
    for t in sorted_triples(local.len()) {
        let mut key = [local[t[0]], local[t[1]], local[t[2]]];
        key.sort_unstable();
        basis.push(index[&key]);
    }
    Some(basis)
}

/// Copy of `lp` with the visibility pinned to `v` and a zero objective, so
/// solving it answers whether an LHV model exists at that visibility.
pub fn feasibility_program(lp: &LinearProgram, v: f64) -> Result<LinearProgram> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!("visibility must lie in [0, 1], got {v}")));
    }
    let mut out = lp.clone();
    let col = out.num_vars() - 1;
    out.set_bounds(col, v, v)?;
    out.set_objective(vec![0.0; out.num_vars()])?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub formulation: Formulation,
    pub status: LpStatus,
    pub iterations: usize,
    pub max_residual: f64,
    pub max_bound_violation: f64,
}

impl SolverDiagnostics {
    fn from_solution(s: &LpSolution, formulation: Formulation) -> Self {
        SolverDiagnostics {
            formulation,
            status: s.status,
            iterations: s.iterations,
            max_residual: s.max_residual,
            max_bound_violation: s.max_bound_violation,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VisibilityResult {
    pub v_crit: f64,
    pub bank: SettingsBank,
    pub noise: NoiseModel,
    pub diagnostics: SolverDiagnostics,
}

fn checked_optimum(sol: &LpSolution) -> Result<f64> {
    let trouble = match sol.status {
        LpStatus::Optimal if sol.max_residual > ACCEPT_RESIDUAL => {
            Some(format!("row residual {:.3e} above {ACCEPT_RESIDUAL:e}", sol.max_residual))
        }
        LpStatus::Optimal if sol.max_bound_violation > ACCEPT_BOUND_VIOLATION => Some(format!(
            "bound violation {:.3e} above {ACCEPT_BOUND_VIOLATION:e}",
            sol.max_bound_violation
        )),
        LpStatus::Optimal => None,
        _ => Some("no optimal vertex".to_string()),
    };
    match trouble {
        None => Ok(sol.objective.clamp(0.0, 1.0)),
        Some(detail) => Err(Error::Solver { status: sol.status, iterations: sol.iterations, detail }),
    }
}

/// Row/column layout handed to the solver. All three have the same optimum
/// on Born-rule tensors; `Symmetric` needs party-symmetric tensors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Formulation {
    /// One row per tensor entry plus normalization, as in [`build_program`].
    Full,
    /// Full-rank rows over products of local functionals.
    Reduced,
    /// Orbits under party permutations.
    Symmetric,
}

/// Symmetric when both tensors allow it, reduced otherwise.
pub fn choose_formulation(state: &ProbabilityTensor, noise: &ProbabilityTensor) -> Formulation {
    if is_party_symmetric(state, 1e-12) && is_party_symmetric(noise, 1e-12) {
        Formulation::Symmetric
    } else {
        Formulation::Reduced
    }
}

pub fn build_formulation(
    formulation: Formulation,
    state: &ProbabilityTensor,
    noise: &ProbabilityTensor,
) -> Result<LinearProgram> {
    match formulation {
        Formulation::Full => build_program(state, noise),
        Formulation::Reduced => build_reduced_program(state, noise),
        Formulation::Symmetric => build_symmetric_program(state, noise),
    }
}

/// Critical visibility in a given formulation.
pub fn visibility_in(
    formulation: Formulation,
    state: &ProbabilityTensor,
    noise: &ProbabilityTensor,
    opts: &SolverOptions,
) -> Result<(f64, SolverDiagnostics)> {
    let lp = build_formulation(formulation, state, noise)?;
    let start = match formulation {
        Formulation::Full => None,
        Formulation::Reduced => product_noise_basis(noise),
        Formulation::Symmetric => symmetric_noise_basis(noise),
    };
    let sol = match start {
        Some(basis) => solve_from_basis(&lp, &basis, opts),
        None => solve_with(&lp, opts),
    };
    let v = checked_optimum(&sol)?;
    Ok((v, SolverDiagnostics::from_solution(&sol, formulation)))
}

/// Critical visibility for two precomputed tensors. If the solver fails on
/// the preferred formulation, the larger equivalent ones are tried in turn.
pub fn visibility_from_tensors(
    state: &ProbabilityTensor,
    noise: &ProbabilityTensor,
    opts: &SolverOptions,
) -> Result<(f64, SolverDiagnostics)> {
    let chain: &[Formulation] = match choose_formulation(state, noise) {
        Formulation::Symmetric => &[Formulation::Symmetric, Formulation::Reduced, Formulation::Full],
        _ => &[Formulation::Reduced, Formulation::Full],
    };
    let mut last = None;
    for &f in chain {
        match visibility_in(f, state, noise, opts) {
            Ok(found) => return Ok(found),
            Err(e @ Error::Solver { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("non-empty formulation chain"))
}

pub fn critical_visibility(state: &PureState, bank: &SettingsBank, noise: NoiseModel) -> Result<VisibilityResult> {
    critical_visibility_with(state, bank, noise, &SolverOptions::default())
}

pub fn critical_visibility_with(
    state: &PureState,
    bank: &SettingsBank,
    noise: NoiseModel,
    opts: &SolverOptions,
) -> Result<VisibilityResult> {
    let p_state = quantum_tensor(state, bank)?;
    let p_noise = noise_tensor(noise, state, bank)?;
    let (v_crit, diagnostics) = visibility_from_tensors(&p_state, &p_noise, opts)?;
    Ok(VisibilityResult { v_crit, bank: bank.clone(), noise, diagnostics })
}

/// Whether an LHV model exists at visibility `v`.
pub fn is_local_at(lp: &LinearProgram, v: f64, opts: &SolverOptions) -> Result<bool> {
    let sol = solve_with(&feasibility_program(lp, v)?, opts);
    match sol.status {
        LpStatus::Optimal => Ok(true),
        LpStatus::Infeasible => Ok(false),
        status => Err(Error::Solver {
            status,
            iterations: sol.iterations,
            detail: format!("feasibility check at v = {v}"),
        }),
    }
}

/// Critical visibility by bisection on the feasibility question, for
/// cross-checking the direct optimum.
pub fn bisect_visibility(
    state: &ProbabilityTensor,
    noise: &ProbabilityTensor,
    tol: f64,
    opts: &SolverOptions,
) -> Result<f64> {
    let lp = build_program(state, noise)?;
    if is_local_at(&lp, 1.0, opts)? {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if is_local_at(&lp, mid, opts)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
