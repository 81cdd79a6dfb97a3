//! Outcome probabilities `P(a, b, c | i, j, k)` for a state under a settings
//! bank, for the two noise models, and their visibility mixtures.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::observables::SettingsBank;
use crate::states::{PureState, DIM};

/// Negative round-off below this magnitude is clamped to zero.
const ROUNDOFF_TOL: f64 = 1e-12;
const SLICE_SUM_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityTensor {
    settings: usize,
    entries: Vec<f64>,
}

impl ProbabilityTensor {
    /// Wraps raw entries laid out as `((i*m + j)*m + k)*27 + 9a + 3b + c`
    /// (0-based settings), clamping float dust and checking normalization.
    pub fn from_entries(settings: usize, mut entries: Vec<f64>) -> Result<Self> {
        if settings == 0 || entries.len() != settings.pow(3) * DIM {
            return Err(Error::contract(format!(
                "tensor with {settings} settings needs {} entries, got {}",
                settings.pow(3) * DIM,
                entries.len()
            )));
        }
        for (idx, p) in entries.iter_mut().enumerate() {
            if !p.is_finite() || *p < -ROUNDOFF_TOL || *p > 1.0 + ROUNDOFF_TOL {
                return Err(Error::contract(format!("probability {p} at entry {idx} out of range")));
            }
            *p = p.clamp(0.0, 1.0);
        }
        for (slice, chunk) in entries.chunks(DIM).enumerate() {
            let sum: f64 = chunk.iter().sum();
            if (sum - 1.0).abs() > SLICE_SUM_TOL {
                return Err(Error::contract(format!(
                    "setting triple {slice} sums to {sum}, not 1"
                )));
            }
        }
        Ok(ProbabilityTensor { settings, entries })
    }

    /// Every entry equal to 1/27.
    pub fn uniform(settings: usize) -> Self {
        ProbabilityTensor { settings, entries: vec![1.0 / DIM as f64; settings.pow(3) * DIM] }
    }

    pub fn settings_count(&self) -> usize {
        self.settings
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize, k: usize, a: usize, b: usize, c: usize) -> usize {
        let m = self.settings;
        ((i * m + j) * m + k) * DIM + 9 * a + 3 * b + c
    }

    /// Probability of outcomes `(a, b, c)` for settings `(i, j, k)`, all 0-based.
    pub fn get(&self, i: usize, j: usize, k: usize, a: usize, b: usize, c: usize) -> f64 {
        self.entries[self.index(i, j, k, a, b, c)]
    }

    /// Single-party marginal `P(r | setting)` with the other two settings
    /// fixed. `party` is 0-based.
    pub fn marginal(&self, party: usize, triple: [usize; 3], r: usize) -> f64 {
        let [i, j, k] = triple;
        (0..3)
            .flat_map(|x| (0..3).map(move |y| (x, y)))
            .map(|(x, y)| match party {
                0 => self.get(i, j, k, r, x, y),
                1 => self.get(i, j, k, x, r, y),
                _ => self.get(i, j, k, x, y, r),
            })
            .sum()
    }

    /// Debug dump with header `i,j,k,a,b,c,p`; settings are 1-based,
    /// outcomes 0-based, probabilities with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let m = self.settings;
        let mut out = String::from("i,j,k,a,b,c,p\n");
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for o in 0..DIM {
                        let (a, b, c) = crate::states::digits(o);
                        let p = self.entries[((i * m + j) * m + k) * DIM + o];
                        let _ = writeln!(out, "{},{},{},{a},{b},{c},{p:.16e}", i + 1, j + 1, k + 1);
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseModel {
    /// Maximally mixed three-qutrit state.
    #[default]
    White,
    /// Product of the state's single-party reduced density matrices.
    Product,
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NoiseModel::White => "white",
            NoiseModel::Product => "product",
        })
    }
}

impl FromStr for NoiseModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "white" => Ok(NoiseModel::White),
            "product" => Ok(NoiseModel::Product),
            _ => Err(Error::parse(format!("unknown noise model '{s}' (expected white or product)"))),
        }
    }
}

/// Born-rule probabilities `|(<a|M_A^i (x) <b|M_B^j (x) <c|M_C^k) psi|^2`.
pub fn quantum_tensor(state: &PureState, bank: &SettingsBank) -> Result<ProbabilityTensor> {
    let m = bank.settings_count();
    let psi = state.amplitudes();
    let zero = Complex64::new(0.0, 0.0);
    let mut entries = vec![0.0; m * m * m * DIM];

    for i in 0..m {
        let ma = bank.get(0, i).matrix();
        // t1[a][y][z] = sum_x MA[a][x] psi[x][y][z]
        let mut t1 = [zero; DIM];
        for a in 0..3 {
            for yz in 0..9 {
                t1[a * 9 + yz] = (0..3).map(|x| ma[(a, x)] * psi[x * 9 + yz]).sum();
            }
        }
        for j in 0..m {
            let mb = bank.get(1, j).matrix();
            let mut t2 = [zero; DIM];
            for a in 0..3 {
                for b in 0..3 {
                    for z in 0..3 {
                        t2[a * 9 + b * 3 + z] =
                            (0..3).map(|y| mb[(b, y)] * t1[a * 9 + y * 3 + z]).sum();
                    }
                }
            }
            for k in 0..m {
                let mc = bank.get(2, k).matrix();
                let base = ((i * m + j) * m + k) * DIM;
                for ab in 0..9 {
                    for c in 0..3 {
                        let amp: Complex64 = (0..3).map(|z| mc[(c, z)] * t2[ab * 3 + z]).sum();
                        entries[base + ab * 3 + c] = amp.norm_sqr();
                    }
                }
            }
        }
    }
    ProbabilityTensor::from_entries(m, entries)
}

/// Noise probabilities for the given model; the product model factors per
/// party and per setting.
pub fn noise_tensor(
    model: NoiseModel,
    state: &PureState,
    bank: &SettingsBank,
) -> Result<ProbabilityTensor> {
    let m = bank.settings_count();
    match model {
        NoiseModel::White => Ok(ProbabilityTensor::uniform(m)),
        NoiseModel::Product => {
            // local[party][setting][r] = <r| M rho M^+ |r>
            let mut local = vec![vec![[0.0; 3]; m]; 3];
            for (party, per_setting) in local.iter_mut().enumerate() {
                let rho = state.reduced_density(party + 1)?.matrix;
                for (n, probs) in per_setting.iter_mut().enumerate() {
                    let u = bank.get(party, n).matrix();
                    let rotated = u * rho * u.adjoint();
                    for (r, p) in probs.iter_mut().enumerate() {
                        *p = rotated[(r, r)].re;
                    }
                }
            }
            let mut entries = vec![0.0; m * m * m * DIM];
            for i in 0..m {
                for j in 0..m {
                    for k in 0..m {
                        let base = ((i * m + j) * m + k) * DIM;
                        for o in 0..DIM {
                            let (a, b, c) = crate::states::digits(o);
                            entries[base + o] = local[0][i][a] * local[1][j][b] * local[2][k][c];
                        }
                    }
                }
            }
            ProbabilityTensor::from_entries(m, entries)
        }
    }
}

/// `v * state + (1 - v) * noise`, entrywise.
pub fn mix(
    state: &ProbabilityTensor,
    noise: &ProbabilityTensor,
    v: f64,
) -> Result<ProbabilityTensor> {
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::domain(format!("visibility must lie in [0, 1], got {v}")));
    }
    if state.settings != noise.settings {
        return Err(Error::contract("tensors have different numbers of settings"));
    }
    let entries = state
        .entries
        .iter()
        .zip(&noise.entries)
        .map(|(p, q)| v * p + (1.0 - v) * q)
        .collect();
    ProbabilityTensor::from_entries(state.settings, entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{tritter_from_phases, TritterPhases, Unitary3};
    use crate::states::{dicke_state, ghz_state, symmetric_ghz_angle};
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_ghz_in_computational_basis() {
        let bank = SettingsBank::computational(2).unwrap();
        let p = quantum_tensor(&ghz_state(symmetric_ghz_angle()), &bank).unwrap();
        for i in 0..2 {
            for o in 0..DIM {
                let (a, b, c) = crate::states::digits(o);
                let want = if a == b && b == c { 1.0 / 3.0 } else { 0.0 };
                assert_abs_diff_eq!(p.get(i, 1 - i, i, a, b, c), want, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn product_state_through_tritters_is_uniform() {
        let t = tritter_from_phases(&TritterPhases([0.0; 3]));
        let bank = SettingsBank::shared(vec![t, t]).unwrap();
        let p = quantum_tensor(&ghz_state(0.0), &bank).unwrap();
        assert!(p.entries().iter().all(|&x| (x - 1.0 / 27.0).abs() < 1e-14));
    }

    #[test]
    fn w_state_in_computational_basis() {
        let bank = SettingsBank::computational(2).unwrap();
        let p = quantum_tensor(&dicke_state(1).unwrap(), &bank).unwrap();
        for (a, b, c) in [(0, 0, 1), (0, 1, 0), (1, 0, 0)] {
            assert_abs_diff_eq!(p.get(0, 0, 0, a, b, c), 1.0 / 3.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(p.get(0, 0, 0, 0, 0, 0), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn noise_models() {
        let t = tritter_from_phases(&TritterPhases([0.1, 0.7, 2.0]));
        let bank = SettingsBank::shared(vec![t, Unitary3::identity()]).unwrap();
        let sym = ghz_state(symmetric_ghz_angle());
        let white = noise_tensor(NoiseModel::White, &sym, &bank).unwrap();
        assert!(white.entries().iter().all(|&x| x == 1.0 / 27.0));
        let product = noise_tensor(NoiseModel::Product, &sym, &bank).unwrap();
        assert!(product.entries().iter().all(|&x| (x - 1.0 / 27.0).abs() < 1e-14));

        let id = SettingsBank::computational(2).unwrap();
        let prod = noise_tensor(NoiseModel::Product, &ghz_state(0.0), &id).unwrap();
        assert_abs_diff_eq!(prod.get(0, 1, 0, 0, 0, 0), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn mixing() {
        let bank = SettingsBank::computational(2).unwrap();
        let p = quantum_tensor(&ghz_state(symmetric_ghz_angle()), &bank).unwrap();
        let q = ProbabilityTensor::uniform(2);
        assert_eq!(mix(&p, &q, 1.0).unwrap(), p);
        assert_eq!(mix(&p, &q, 0.0).unwrap(), q);
        let mixed = mix(&p, &q, 0.6).unwrap();
        assert_abs_diff_eq!(mixed.get(0, 0, 0, 1, 1, 1), 0.2148148148148148, epsilon = 1e-15);
        assert!(matches!(mix(&p, &q, 1.2), Err(Error::Domain(_))));
        assert!(matches!(mix(&p, &q, -0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn float_dust_is_clamped_but_real_negatives_abort() {
        let mut e = vec![1.0 / 27.0; 8 * DIM];
        e[0] -= 5e-13;
        e[1] += 5e-13;
        e[2] = 1.0 / 27.0;
        let t = ProbabilityTensor::from_entries(2, e.clone()).unwrap();
        assert!(t.entries().iter().all(|&x| x >= 0.0));
        e[3] = -1e-6;
        e[4] += 1e-6 + 1.0 / 27.0;
        assert!(ProbabilityTensor::from_entries(2, e).is_err());
    }

    #[test]
    fn csv_dump_shape() {
        let csv = ProbabilityTensor::uniform(2).to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "i,j,k,a,b,c,p");
        assert_eq!(lines.len(), 1 + 8 * 27);
        assert_eq!(lines[1], "1,1,1,0,0,0,3.7037037037037035e-2");
        assert!(lines.last().unwrap().starts_with("2,2,2,2,2,2,"));
    }
}
