//! Brute-force cross-check of the critical visibility for small setting
//! counts: convex-hull membership over explicitly enumerated deterministic
//! strategies, assembled and solved without the crate's own LP code.

use minilp::{ComparisonOp, OptimizationDirection, Problem};

use crate::born::ProbabilityTensor;
use crate::error::{Error, Result};

/// Largest setting count the oracle accepts (`3^6` strategies).
pub const MAX_SETTINGS: usize = 2;

/// One predetermined outcome per (party, setting).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicStrategy {
    pub outcomes: [Vec<usize>; 3],
}

impl DeterministicStrategy {
    /// Probability this strategy assigns to outcome `(a, b, c)` under
    /// settings `(i, j, k)`: one or zero.
    pub fn probability(&self, settings: [usize; 3], outcome: [usize; 3]) -> f64 {
        let hit = (0..3).all(|party| self.outcomes[party][settings[party]] == outcome[party]);
        if hit {
            1.0
        } else {
            0.0
        }
    }
}

fn local_strategies(m: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..m {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..3).map(move |r| {
                    let mut next = prefix.clone();
                    next.push(r);
                    next
                })
            })
            .collect();
    }
    out
}

/// All `3^(3m)` deterministic strategies.
pub fn enumerate_strategies(m: usize) -> Vec<DeterministicStrategy> {
    let local = local_strategies(m);
    let mut out = Vec::with_capacity(local.len().pow(3));
    for a in &local {
        for b in &local {
            for c in &local {
                out.push(DeterministicStrategy { outcomes: [a.clone(), b.clone(), c.clone()] });
            }
        }
    }
    out
}

/// Largest `v` for which `v P_state + (1 - v) P_noise` is a convex
/// combination of deterministic-strategy distributions.
pub fn oracle_vcrit(state: &ProbabilityTensor, noise: &ProbabilityTensor) -> Result<f64> {
    let m = state.settings_count();
    if m > MAX_SETTINGS {
        return Err(Error::domain(format!("oracle supports at most {MAX_SETTINGS} settings, got {m}")));
    }
    if noise.settings_count() != m {
        return Err(Error::contract("tensors have different numbers of settings"));
    }
    let strategies = enumerate_strategies(m);
    let mut problem = Problem::new(OptimizationDirection::Maximize);
    let v = problem.add_var(1.0, (0.0, 1.0));
    let weights: Vec<_> = strategies.iter().map(|_| problem.add_var(0.0, (0.0, f64::INFINITY))).collect();

    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for a in 0..3 {
                    for b in 0..3 {
                        for c in 0..3 {
                            let ps = state.get(i, j, k, a, b, c);
                            let pn = noise.get(i, j, k, a, b, c);
                            // sum_s w_s D_s - v (ps - pn) = pn
                            let mut terms: Vec<_> = strategies
                                .iter()
                                .zip(&weights)
                                .filter(|(s, _)| s.probability([i, j, k], [a, b, c]) == 1.0)
                                .map(|(_, w)| (*w, 1.0))
                                .collect();
                            terms.push((v, pn - ps));
                            problem.add_constraint(terms.as_slice(), ComparisonOp::Eq, pn);
                        }
                    }
                }
            }
        }
    }
    let total: Vec<_> = weights.iter().map(|w| (*w, 1.0)).collect();
    problem.add_constraint(total.as_slice(), ComparisonOp::Eq, 1.0);

    let solution = problem
        .solve()
        .map_err(|e| Error::contract(format!("oracle program could not be solved: {e}")))?;
    Ok(solution[v].clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::born::{noise_tensor, quantum_tensor, NoiseModel};
    use crate::observables::{MeasurementFamily, ParameterLayout, Sharing};
    use crate::states::{ghz_state, symmetric_ghz_angle};
    use approx::assert_abs_diff_eq;

    #[test]
    fn strategy_count_and_distributions() {
        let all = enumerate_strategies(2);
        assert_eq!(all.len(), 729);
        let s = &all[5];
        let total: f64 = (0..27).map(|o| s.probability([1, 0, 1], [o / 9, (o / 3) % 3, o % 3])).sum();
        assert_eq!(total, 1.0);
    }

    #[test]
    fn uniform_against_itself_is_local() {
        let u = ProbabilityTensor::uniform(2);
        assert_abs_diff_eq!(oracle_vcrit(&u, &u).unwrap(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn three_settings_are_refused() {
        let u = ProbabilityTensor::uniform(3);
        assert!(matches!(oracle_vcrit(&u, &u), Err(Error::Domain(_))));
    }

    #[test]
    fn entangled_state_violates() {
        let layout = ParameterLayout::new(MeasurementFamily::Tritter, 2, Sharing::SharedAcrossParties).unwrap();
        let bank = layout.bank(&[0.0, 0.0, 0.0, 0.0, 1.0, 2.0]).unwrap();
        let state = ghz_state(symmetric_ghz_angle());
        let ps = quantum_tensor(&state, &bank).unwrap();
        let pn = noise_tensor(NoiseModel::White, &state, &bank).unwrap();
        let v = oracle_vcrit(&ps, &pn).unwrap();
        assert!(v > 0.0 && v < 1.0);
    }
}
