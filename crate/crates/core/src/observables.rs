//! Local measurement bases: the general U(3) family built from Gell-Mann
//! exponentials and the tritter family (phase shifters followed by an
//! unbiased three-port beam splitter).
//!
//! Every setting is stored as a *measurement matrix* `M`: outcome `r` is the
//! bra `<r|M`, i.e. the rows of `M` are the measured basis vectors.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type CMatrix3 = Matrix3<Complex64>;

const UNITARY_TOL: f64 = 1e-10;
const BASIS_UNITARY_TOL: f64 = 1e-8;

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Generators used by the eight factors of the U(3) parameterization, left
/// to right.
pub const U3_GENERATORS: [usize; 8] = [3, 2, 3, 5, 3, 2, 3, 8];

fn max_deviation_from_identity(m: &CMatrix3) -> f64 {
    let prod = m * m.adjoint();
    (prod - CMatrix3::identity())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Unitary3(CMatrix3);

impl Unitary3 {
    /// Checks `U U^dagger = I` entrywise within 1e-10.
    pub fn new(matrix: CMatrix3) -> Result<Self> {
        let dev = max_deviation_from_identity(&matrix);
        if !(dev <= UNITARY_TOL) {
            return Err(Error::contract(format!(
                "matrix is not unitary (max |UU^+ - I| = {dev:e})"
            )));
        }
        Ok(Unitary3(matrix))
    }

    pub fn identity() -> Self {
        Unitary3(CMatrix3::identity())
    }

    pub fn matrix(&self) -> &CMatrix3 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        Unitary3(self.0.adjoint())
    }

    /// Product of two unitaries (`self * rhs`).
    pub fn compose(&self, rhs: &Unitary3) -> Self {
        Unitary3(self.0 * rhs.0)
    }

    /// Unitary that maps `|l>` to `|perm[l]>`.
    pub fn permutation(perm: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &p in &perm {
            if p > 2 || seen[p] {
                return Err(Error::domain(format!("{perm:?} is not a permutation of 0..3")));
            }
            seen[p] = true;
        }
        let mut m = CMatrix3::zeros();
        for (l, &p) in perm.iter().enumerate() {
            m[(p, l)] = ONE;
        }
        Ok(Unitary3(m))
    }

    pub fn deviation_from_unitarity(&self) -> f64 {
        max_deviation_from_identity(&self.0)
    }
}

/// Standard Gell-Mann matrix `lambda_i`, `i` in 1..=8.
pub fn gell_mann(i: usize) -> Result<CMatrix3> {
    let im = Complex64::new(0.0, 1.0);
    let mut m = CMatrix3::zeros();
    match i {
        1 => {
            m[(0, 1)] = ONE;
            m[(1, 0)] = ONE;
        }
        2 => {
            m[(0, 1)] = -im;
            m[(1, 0)] = im;
        }
        3 => {
            m[(0, 0)] = ONE;
            m[(1, 1)] = -ONE;
        }
        4 => {
            m[(0, 2)] = ONE;
            m[(2, 0)] = ONE;
        }
        5 => {
            m[(0, 2)] = -im;
            m[(2, 0)] = im;
        }
        6 => {
            m[(1, 2)] = ONE;
            m[(2, 1)] = ONE;
        }
        7 => {
            m[(1, 2)] = -im;
            m[(2, 1)] = im;
        }
        8 => {
            let s = 1.0 / 3f64.sqrt();
            m[(0, 0)] = Complex64::new(s, 0.0);
            m[(1, 1)] = Complex64::new(s, 0.0);
            m[(2, 2)] = Complex64::new(-2.0 * s, 0.0);
        }
        _ => return Err(Error::domain(format!("Gell-Mann index must be in 1..=8, got {i}"))),
    }
    Ok(m)
}

/// `exp(i * theta * lambda_i)` in closed form. Each off-diagonal generator
/// acts as a Pauli matrix on one pair of levels.
pub fn exp_i_gell_mann(i: usize, theta: f64) -> Result<CMatrix3> {
    let (c, s) = (theta.cos(), theta.sin());
    let phase = |x: f64| Complex64::from_polar(1.0, x);
    let mut m = CMatrix3::identity();
    let (p, q, symmetric) = match i {
        1 => (0, 1, true),
        2 => (0, 1, false),
        4 => (0, 2, true),
        5 => (0, 2, false),
        6 => (1, 2, true),
        7 => (1, 2, false),
        3 => {
            m[(0, 0)] = phase(theta);
            m[(1, 1)] = phase(-theta);
            return Ok(m);
        }
        8 => {
            let t = theta / 3f64.sqrt();
            m[(0, 0)] = phase(t);
            m[(1, 1)] = phase(t);
            m[(2, 2)] = phase(-2.0 * t);
            return Ok(m);
        }
        _ => return Err(Error::domain(format!("Gell-Mann index must be in 1..=8, got {i}"))),
    };
    m[(p, p)] = Complex64::new(c, 0.0);
    m[(q, q)] = Complex64::new(c, 0.0);
    if symmetric {
        // exp(i theta sigma_x) = cos + i sin sigma_x
        m[(p, q)] = Complex64::new(0.0, s);
        m[(q, p)] = Complex64::new(0.0, s);
    } else {
        // i sigma_y = [[0, 1], [-1, 0]]
        m[(p, q)] = Complex64::new(s, 0.0);
        m[(q, p)] = Complex64::new(-s, 0.0);
    }
    Ok(m)
}

/// Eight angles, one per factor of the U(3) product, in factor order.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct U3Angles(pub [f64; 8]);

impl U3Angles {
    /// Converts the tabulated `alpha_0 .. alpha_7` listing of an optimal
    /// setting into factor order.
    ///
    /// The tabulated sets are labelled with the factor index taken modulo 8:
    /// `alpha_1 .. alpha_7` belong to the first seven factors and `alpha_0`
    /// to the final `lambda_8` factor.
    pub fn from_tabulated_labels(labels: [f64; 8]) -> Self {
        let mut a = [0.0; 8];
        a[..7].copy_from_slice(&labels[1..]);
        a[7] = labels[0];
        U3Angles(a)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TritterPhases(pub [f64; 3]);

/// Ordered product `e^{i l3 a0} e^{i l2 a1} e^{i l3 a2} e^{i l5 a3} e^{i l3 a4} e^{i l2 a5} e^{i l3 a6} e^{i l8 a7}`.
pub fn u3_from_angles(angles: &U3Angles) -> Unitary3 {
    let m = U3_GENERATORS
        .iter()
        .zip(angles.0.iter())
        .fold(CMatrix3::identity(), |acc, (&g, &theta)| {
            acc * exp_i_gell_mann(g, theta).expect("generator indices are valid")
        });
    Unitary3(m)
}

/// The unbiased tritter `T_kl = w^{kl} / sqrt(3)`, `w = e^{2 pi i / 3}`.
pub fn tritter() -> CMatrix3 {
    let norm = 1.0 / 3f64.sqrt();
    CMatrix3::from_fn(|k, l| Complex64::from_polar(norm, 2.0 * PI * (k * l) as f64 / 3.0))
}

/// `T * diag(e^{i phi_0}, e^{i phi_1}, e^{i phi_2})`: the phase shifters act
/// first, then the tritter.
pub fn tritter_from_phases(phases: &TritterPhases) -> Unitary3 {
    let phi = CMatrix3::from_diagonal(&Vector3::from_fn(|k, _| {
        Complex64::from_polar(1.0, phases.0[k])
    }));
    Unitary3(tritter() * phi)
}

/// The three outcome vectors of a measurement matrix: outcome `r` is the bra
/// `<r|U`, returned as the ket `U^dagger |r>`.
pub fn basis_of(u: &CMatrix3) -> Result<[Vector3<Complex64>; 3]> {
    let dev = max_deviation_from_identity(u);
    if !(dev <= BASIS_UNITARY_TOL) {
        return Err(Error::contract(format!(
            "measurement matrix is not unitary (max |UU^+ - I| = {dev:e})"
        )));
    }
    Ok([0, 1, 2].map(|r| Vector3::from_fn(|x, _| u[(r, x)].conj())))
}

/// Projector `|e><e|` on an outcome vector.
pub fn projector(e: &Vector3<Complex64>) -> CMatrix3 {
    e * e.adjoint()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MeasurementFamily {
    /// All projective measurements, eight angles per setting.
    #[serde(rename = "U3")]
    U3,
    /// Phase shifters followed by a tritter, three phases per setting.
    #[serde(rename = "T")]
    Tritter,
}

impl MeasurementFamily {
    pub fn params_per_setting(self) -> usize {
        match self {
            MeasurementFamily::U3 => 8,
            MeasurementFamily::Tritter => 3,
        }
    }

    /// Measurement matrix of one setting.
    ///
    /// A tritter setting sends the state through `T * Phi` before detection
    /// in the computational basis. A U(3) setting measures in the basis
    /// `{U|r>}`, so its measurement matrix is `U^dagger`.
    pub fn measurement(self, params: &[f64]) -> Result<Unitary3> {
        if params.len() != self.params_per_setting() {
            return Err(Error::contract(format!(
                "{self} setting needs {} parameters, got {}",
                self.params_per_setting(),
                params.len()
            )));
        }
        Ok(match self {
            MeasurementFamily::U3 => {
                let mut a = [0.0; 8];
                a.copy_from_slice(params);
                u3_from_angles(&U3Angles(a)).adjoint()
            }
            MeasurementFamily::Tritter => {
                tritter_from_phases(&TritterPhases([params[0], params[1], params[2]]))
            }
        })
    }
}

impl fmt::Display for MeasurementFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeasurementFamily::U3 => "U3",
            MeasurementFamily::Tritter => "T",
        })
    }
}

impl FromStr for MeasurementFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "U3" | "u3" => Ok(MeasurementFamily::U3),
            "T" | "t" => Ok(MeasurementFamily::Tritter),
            _ => Err(Error::parse(format!("unknown measurement family '{s}' (expected U3 or T)"))),
        }
    }
}

/// Whether all three parties use the same parameter block.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sharing {
    #[default]
    SharedAcrossParties,
    PerParty,
}

/// Maps a flat parameter vector onto a settings bank.
///
/// Shared layout: `x[n * P + g]` for setting `n` and parameter `g`.
/// Per-party layout: `x[(party * m + n) * P + g]`, parties 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ParameterLayout {
    pub family: MeasurementFamily,
    pub settings: usize,
    pub sharing: Sharing,
}

impl ParameterLayout {
    pub fn new(family: MeasurementFamily, settings: usize, sharing: Sharing) -> Result<Self> {
        check_settings_count(settings)?;
        Ok(ParameterLayout { family, settings, sharing })
    }

    pub fn dimension(&self) -> usize {
        let blocks = match self.sharing {
            Sharing::SharedAcrossParties => 1,
            Sharing::PerParty => 3,
        };
        self.family.params_per_setting() * self.settings * blocks
    }

    pub fn bank(&self, params: &[f64]) -> Result<SettingsBank> {
        if params.len() != self.dimension() {
            return Err(Error::contract(format!(
                "parameter vector has length {}, layout needs {}",
                params.len(),
                self.dimension()
            )));
        }
        let p = self.family.params_per_setting();
        let block = |party: usize| -> Result<Vec<Unitary3>> {
            (0..self.settings)
                .map(|n| {
                    let start = (party * self.settings + n) * p;
                    self.family.measurement(&params[start..start + p])
                })
                .collect()
        };
        match self.sharing {
            Sharing::SharedAcrossParties => SettingsBank::shared(block(0)?),
            Sharing::PerParty => SettingsBank::per_party([block(0)?, block(1)?, block(2)?]),
        }
    }
}

fn check_settings_count(m: usize) -> Result<()> {
    if !(2..=3).contains(&m) {
        return Err(Error::domain(format!("number of settings must be 2 or 3, got {m}")));
    }
    Ok(())
}

/// One measurement matrix per (party, setting).
#[derive(Clone, Debug, PartialEq)]
pub struct SettingsBank {
    settings: [Vec<Unitary3>; 3],
}

impl SettingsBank {
    pub fn shared(settings: Vec<Unitary3>) -> Result<Self> {
        Self::per_party([settings.clone(), settings.clone(), settings])
    }

    pub fn per_party(settings: [Vec<Unitary3>; 3]) -> Result<Self> {
        let m = settings[0].len();
        if settings.iter().any(|s| s.len() != m) {
            return Err(Error::contract("every party needs the same number of settings"));
        }
        check_settings_count(m)?;
        Ok(SettingsBank { settings })
    }

    /// All parties measure in the computational basis for every setting.
    pub fn computational(m: usize) -> Result<Self> {
        Self::shared(vec![Unitary3::identity(); m])
    }

    pub fn settings_count(&self) -> usize {
        self.settings[0].len()
    }

    /// Measurement matrix of `party` (0-based) and `setting` (0-based).
    pub fn get(&self, party: usize, setting: usize) -> &Unitary3 {
        &self.settings[party][setting]
    }

    pub fn party(&self, party: usize) -> &[Unitary3] {
        &self.settings[party]
    }

    /// Bank that measures `P psi` the way `self` measures `psi`, where `P`
    /// relabels levels `|l> -> |perm[l]>` on every party.
    pub fn with_level_permutation(&self, perm: [usize; 3]) -> Result<Self> {
        let p = Unitary3::permutation(perm)?;
        let settings = self
            .settings
            .clone()
            .map(|party| party.iter().map(|m| m.compose(&p)).collect());
        Ok(SettingsBank { settings })
    }

    /// Replaces one party's setting (used by the relabeling tests).
    pub fn with_setting(&self, party: usize, setting: usize, m: Unitary3) -> Self {
        let mut out = self.clone();
        out.settings[party][setting] = m;
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Truncated Taylor series with scaling and squaring; test-only oracle.
    fn expm_series(a: &CMatrix3) -> CMatrix3 {
        let norm: f64 = a.iter().map(|z| z.norm()).sum();
        let squarings = (norm.log2().ceil().max(0.0) as u32) + 4;
        let scaled = a / Complex64::new(2f64.powi(squarings as i32), 0.0);
        let mut term = CMatrix3::identity();
        let mut sum = CMatrix3::identity();
        for k in 1..30 {
            term = term * scaled / Complex64::new(k as f64, 0.0);
            sum += term;
        }
        for _ in 0..squarings {
            sum = sum * sum;
        }
        sum
    }

    fn max_abs(m: &CMatrix3) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn gell_mann_basics() {
        let l3 = gell_mann(3).unwrap();
        assert_eq!(l3[(0, 0)].re, 1.0);
        assert_eq!(l3[(1, 1)].re, -1.0);
        assert_eq!(l3[(2, 2)].re, 0.0);
        let l8 = gell_mann(8).unwrap();
        assert_abs_diff_eq!(l8[(2, 2)].re, -2.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(l8[(0, 0)].re, 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        for i in 1..=8 {
            for j in 1..=8 {
                let li = gell_mann(i).unwrap();
                let lj = gell_mann(j).unwrap();
                let tr = (li * lj).trace();
                let want = if i == j { 2.0 } else { 0.0 };
                assert_abs_diff_eq!(tr.re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(tr.im, 0.0, epsilon = 1e-12);
            }
            let l = gell_mann(i).unwrap();
            assert!(max_abs(&(l - l.adjoint())) < 1e-15);
            assert!(l.trace().norm() < 1e-15);
        }
        assert!(gell_mann(0).is_err());
        assert!(gell_mann(9).is_err());
    }

    #[test]
    fn closed_form_exponentials_match_series() {
        let i = Complex64::new(0.0, 1.0);
        for g in 1..=8 {
            for theta in [0.0, 0.3, -1.7, 2.5, 5.9] {
                let closed = exp_i_gell_mann(g, theta).unwrap();
                let series = expm_series(&(gell_mann(g).unwrap() * i * Complex64::new(theta, 0.0)));
                assert!(max_abs(&(closed - series)) < 1e-12, "generator {g}, theta {theta}");
            }
        }
    }

    #[test]
    fn u3_special_angles() {
        let id = u3_from_angles(&U3Angles([0.0; 8]));
        assert!(max_abs(&(id.matrix() - CMatrix3::identity())) < 1e-15);

        let t = 0.83;
        let mut a = [0.0; 8];
        a[7] = t;
        let u = u3_from_angles(&U3Angles(a));
        let s = t / 3f64.sqrt();
        let want = CMatrix3::from_diagonal(&Vector3::new(
            Complex64::from_polar(1.0, s),
            Complex64::from_polar(1.0, s),
            Complex64::from_polar(1.0, -2.0 * s),
        ));
        assert!(max_abs(&(u.matrix() - want)) < 1e-14);
    }

    #[test]
    fn tabulated_labels_rotate_into_factor_order() {
        let labels = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0];
        let a = U3Angles::from_tabulated_labels(labels);
        assert_eq!(a.0, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 0.0]);
    }

    #[test]
    fn tritter_rows_and_unbiasedness() {
        let t = tritter_from_phases(&TritterPhases([0.0; 3]));
        let norm = 1.0 / 3f64.sqrt();
        for l in 0..3 {
            assert_abs_diff_eq!(t.matrix()[(0, l)].re, norm, epsilon = 1e-15);
            assert_abs_diff_eq!(t.matrix()[(0, l)].im, 0.0, epsilon = 1e-15);
        }
        let w = Complex64::from_polar(1.0, 2.0 * PI / 3.0);
        assert!((t.matrix()[(1, 1)] - w * norm).norm() < 1e-15);
        assert!((t.matrix()[(2, 2)] - w.powu(4) * norm).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let phases = TritterPhases([0; 3].map(|_| rng.gen_range(0.0..2.0 * PI)));
            let u = tritter_from_phases(&phases);
            assert!(u.matrix().iter().all(|z| (z.norm() - norm).abs() < 1e-12));
        }
    }

    #[test]
    fn random_u3_is_generically_biased() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let norm = 1.0 / 3f64.sqrt();
        let biased = (0..50)
            .filter(|_| {
                let a = U3Angles([0; 8].map(|_| rng.gen_range(0.0..2.0 * PI)));
                let u = u3_from_angles(&a);
                u.matrix().iter().any(|z| (z.norm() - norm).abs() > 1e-3)
            })
            .count();
        assert!(biased >= 45);
    }

    #[test]
    fn unitarity_of_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let a = U3Angles([0; 8].map(|_| rng.gen_range(-10.0..10.0)));
            let u = u3_from_angles(&a);
            assert!(Unitary3::new(*u.matrix()).is_ok());
            let p = TritterPhases([0; 3].map(|_| rng.gen_range(-10.0..10.0)));
            assert!(Unitary3::new(*tritter_from_phases(&p).matrix()).is_ok());
        }
    }

    #[test]
    fn basis_projectors() {
        let id = basis_of(&CMatrix3::identity()).unwrap();
        for (r, e) in id.iter().enumerate() {
            let p = projector(e);
            for x in 0..3 {
                for y in 0..3 {
                    let want = if x == r && y == r { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(p[(x, y)].re, want, epsilon = 1e-15);
                }
            }
        }

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let u = u3_from_angles(&U3Angles([0; 8].map(|_| rng.gen_range(0.0..2.0 * PI))));
            let basis = basis_of(u.matrix()).unwrap();
            let sum: CMatrix3 = basis.iter().map(projector).sum();
            assert!(max_abs(&(sum - CMatrix3::identity())) < 1e-12);
            for e in &basis {
                let p = projector(e);
                assert!(max_abs(&(p * p - p)) < 1e-12);
            }
        }

        let mut bad = CMatrix3::identity();
        bad[(0, 0)] = Complex64::new(1.1, 0.0);
        assert!(matches!(basis_of(&bad), Err(Error::Contract(_))));
        assert!(matches!(Unitary3::new(bad), Err(Error::Contract(_))));
    }

    #[test]
    fn layout_dimensions_and_banks() {
        let l = ParameterLayout::new(MeasurementFamily::U3, 3, Sharing::PerParty).unwrap();
        assert_eq!(l.dimension(), 72);
        let l = ParameterLayout::new(MeasurementFamily::Tritter, 2, Sharing::SharedAcrossParties)
            .unwrap();
        assert_eq!(l.dimension(), 6);
        let bank = l.bank(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6]).unwrap();
        assert_eq!(bank.settings_count(), 2);
        assert_eq!(bank.get(0, 1), bank.get(2, 1));
        let want = tritter_from_phases(&TritterPhases([0.4, 0.5, 0.6]));
        assert_eq!(bank.get(1, 1), &want);
        assert!(l.bank(&[0.0; 5]).is_err());
        assert!(ParameterLayout::new(MeasurementFamily::U3, 4, Sharing::PerParty).is_err());
    }

    #[test]
    fn ragged_bank_is_rejected() {
        let id = Unitary3::identity();
        let r = SettingsBank::per_party([vec![id; 2], vec![id; 2], vec![id; 3]]);
        assert!(matches!(r, Err(Error::Contract(_))));
    }

    #[test]
    fn permutation_unitary() {
        let p = Unitary3::permutation([2, 1, 0]).unwrap();
        assert_eq!(p.matrix()[(2, 0)], ONE);
        assert_eq!(p.matrix()[(0, 0)], Complex64::new(0.0, 0.0));
        assert!(Unitary3::permutation([0, 0, 1]).is_err());
    }
}
