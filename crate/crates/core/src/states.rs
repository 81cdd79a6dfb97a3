//! Three-qutrit pure states and their single-party reductions.
//!
//! Amplitudes are stored in lexicographic order of the outcome triple
//! `(a1, a2, a3)` with Alice most significant: `index = 9*a1 + 3*a2 + a3`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use nalgebra::Matrix3;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Number of amplitudes of a three-qutrit vector.
pub const DIM: usize = 27;

/// Custom states whose norm is off by less than this are renormalized.
const RENORMALIZE_TOL: f64 = 1e-6;

/// Flat amplitude index of the basis vector `|a b c>`.
#[inline]
pub fn flat_index(a: usize, b: usize, c: usize) -> usize {
    9 * a + 3 * b + c
}

/// Inverse of [`flat_index`].
#[inline]
pub fn digits(index: usize) -> (usize, usize, usize) {
    (index / 9, (index / 3) % 3, index % 3)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: [Complex64; DIM],
}

impl PureState {
    /// Builds a state from 27 amplitudes.
    ///
    /// A norm within 1e-6 of one is renormalized; anything further away is
    /// rejected.
    pub fn from_amplitudes(amplitudes: &[Complex64]) -> Result<Self> {
        if amplitudes.len() != DIM {
            return Err(Error::domain(format!(
                "a three-qutrit state needs {DIM} amplitudes, got {}",
                amplitudes.len()
            )));
        }
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::domain("amplitudes must be finite"));
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() >= RENORMALIZE_TOL {
            return Err(Error::domain(format!(
                "state norm {norm} deviates from 1 by more than {RENORMALIZE_TOL}"
            )));
        }
        let mut amps = [Complex64::new(0.0, 0.0); DIM];
        for (dst, src) in amps.iter_mut().zip(amplitudes) {
            *dst = src / norm;
        }
        Ok(PureState { amplitudes: amps })
    }

    /// Normalizes an arbitrary nonzero real vector; used for the closed-form
    /// constructors below.
    fn from_weights(weights: &[(usize, f64)]) -> Self {
        let norm = weights.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
        let mut amps = [Complex64::new(0.0, 0.0); DIM];
        for &(idx, w) in weights {
            amps[idx] = Complex64::new(w / norm, 0.0);
        }
        PureState { amplitudes: amps }
    }

    pub fn amplitudes(&self) -> &[Complex64; DIM] {
        &self.amplitudes
    }

    pub fn amplitude(&self, a: usize, b: usize, c: usize) -> Complex64 {
        self.amplitudes[flat_index(a, b, c)]
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Applies the same level relabeling `|l> -> |perm[l]>` on every party.
    pub fn permute_levels(&self, perm: [usize; 3]) -> Self {
        let mut amps = [Complex64::new(0.0, 0.0); DIM];
        for (idx, z) in self.amplitudes.iter().enumerate() {
            let (a, b, c) = digits(idx);
            amps[flat_index(perm[a], perm[b], perm[c])] = *z;
        }
        PureState { amplitudes: amps }
    }

    /// Reduced density matrix of one party (1 = Alice, 2 = Bob, 3 = Charlie).
    pub fn reduced_density(&self, party: usize) -> Result<SingleQutritDensity> {
        if !(1..=3).contains(&party) {
            return Err(Error::domain(format!("party must be 1, 2 or 3, got {party}")));
        }
        let mut rho = Matrix3::<Complex64>::zeros();
        for r in 0..3 {
            for s in 0..3 {
                let mut acc = Complex64::new(0.0, 0.0);
                for x in 0..3 {
                    for y in 0..3 {
                        let (ir, is) = match party {
                            1 => (flat_index(r, x, y), flat_index(s, x, y)),
                            2 => (flat_index(x, r, y), flat_index(x, s, y)),
                            _ => (flat_index(x, y, r), flat_index(x, y, s)),
                        };
                        acc += self.amplitudes[ir] * self.amplitudes[is].conj();
                    }
                }
                rho[(r, s)] = acc;
            }
        }
        Ok(SingleQutritDensity { matrix: rho })
    }
}

/// `cos(alpha)|000> + sin(alpha)(|111> + |222>)/sqrt(2)`, alpha in radians.
pub fn ghz_state(alpha: f64) -> PureState {
    let s = alpha.sin() * FRAC_1_SQRT_2;
    PureState::from_weights(&[
        (flat_index(0, 0, 0), alpha.cos()),
        (flat_index(1, 1, 1), s),
        (flat_index(2, 2, 2), s),
    ])
}

/// The angle at which the generalized GHZ state is `(|000>+|111>+|222>)/sqrt(3)`.
pub fn symmetric_ghz_angle() -> f64 {
    (1.0 / 3f64.sqrt()).acos()
}

/// Symmetric three-qutrit Dicke states with `k` excitations, `k` in 1..=3.
pub fn dicke_state(k: u32) -> Result<PureState> {
    let perms = |a, b, c| -> Vec<usize> {
        let mut v = vec![
            flat_index(a, b, c),
            flat_index(a, c, b),
            flat_index(b, a, c),
            flat_index(b, c, a),
            flat_index(c, a, b),
            flat_index(c, b, a),
        ];
        v.sort_unstable();
        v.dedup();
        v
    };
    let mut weights = Vec::new();
    match k {
        1 => weights.extend(perms(0, 0, 1).into_iter().map(|i| (i, 1.0))),
        2 => {
            weights.extend(perms(0, 0, 2).into_iter().map(|i| (i, 1.0)));
            weights.extend(perms(0, 1, 1).into_iter().map(|i| (i, 2.0)));
        }
        3 => {
            weights.extend(perms(0, 1, 2).into_iter().map(|i| (i, 1.0)));
            weights.push((flat_index(1, 1, 1), 2.0));
        }
        _ => return Err(Error::domain(format!("Dicke index must be 1, 2 or 3, got {k}"))),
    }
    Ok(PureState::from_weights(&weights))
}

/// Totally antisymmetric three-qutrit state.
pub fn singlet_state() -> PureState {
    PureState::from_weights(&[
        (flat_index(0, 1, 2), 1.0),
        (flat_index(0, 2, 1), -1.0),
        (flat_index(1, 0, 2), -1.0),
        (flat_index(1, 2, 0), 1.0),
        (flat_index(2, 0, 1), 1.0),
        (flat_index(2, 1, 0), -1.0),
    ])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SingleQutritDensity {
    pub matrix: Matrix3<Complex64>,
}

impl SingleQutritDensity {
    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        let eig = self.matrix.symmetric_eigen();
        let mut ev = [eig.eigenvalues[0], eig.eigenvalues[1], eig.eigenvalues[2]];
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (self.matrix - self.matrix.adjoint()).iter().all(|z| z.norm() <= tol)
    }
}

/// Textual state selector: `ghz:<alpha_deg>`, `dicke:<k>`, `singlet` or
/// `custom:<path>`.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSpec {
    Ghz { alpha_deg: f64 },
    Dicke(u32),
    Singlet,
    Custom(String),
}

impl StateSpec {
    pub fn build(&self) -> Result<PureState> {
        match self {
            StateSpec::Ghz { alpha_deg } => Ok(ghz_state(alpha_deg.to_radians())),
            StateSpec::Dicke(k) => dicke_state(*k),
            StateSpec::Singlet => Ok(singlet_state()),
            StateSpec::Custom(path) => read_custom_state(path),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "singlet" {
            return Ok(StateSpec::Singlet);
        }
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(format!("unrecognized state specifier '{s}'")))?;
        match kind {
            "ghz" => {
                let alpha_deg: f64 = arg
                    .parse()
                    .map_err(|_| Error::parse(format!("bad GHZ angle '{arg}'")))?;
                if !alpha_deg.is_finite() {
                    return Err(Error::parse("GHZ angle must be finite"));
                }
                Ok(StateSpec::Ghz { alpha_deg })
            }
            "dicke" => {
                let k: u32 = arg
                    .parse()
                    .map_err(|_| Error::parse(format!("bad Dicke index '{arg}'")))?;
                if !(1..=3).contains(&k) {
                    return Err(Error::domain(format!("Dicke index must be 1, 2 or 3, got {k}")));
                }
                Ok(StateSpec::Dicke(k))
            }
            "custom" => Ok(StateSpec::Custom(arg.to_string())),
            _ => Err(Error::parse(format!("unrecognized state specifier '{s}'"))),
        }
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Ghz { alpha_deg } => write!(f, "ghz:{alpha_deg}"),
            StateSpec::Dicke(k) => write!(f, "dicke:{k}"),
            StateSpec::Singlet => write!(f, "singlet"),
            StateSpec::Custom(p) => write!(f, "custom:{p}"),
        }
    }
}

/// Reads a JSON array of 27 `[re, im]` pairs.
pub fn read_custom_state(path: impl AsRef<Path>) -> Result<PureState> {
    let text = std::fs::read_to_string(path)?;
    let pairs: Vec<[f64; 2]> = serde_json::from_str(&text)?;
    let amps: Vec<Complex64> = pairs.iter().map(|[re, im]| Complex64::new(*re, *im)).collect();
    PureState::from_amplitudes(&amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ghz_endpoints() {
        let s = ghz_state(0.0);
        assert_abs_diff_eq!(s.amplitude(0, 0, 0).re, 1.0, epsilon = 1e-15);
        assert!(s.amplitudes().iter().skip(1).all(|z| z.norm() == 0.0));

        let sym = ghz_state(symmetric_ghz_angle());
        let third = 1.0 / 3f64.sqrt();
        for l in 0..3 {
            assert_abs_diff_eq!(sym.amplitude(l, l, l).re, third, epsilon = 1e-12);
        }

        let rank2 = ghz_state(std::f64::consts::FRAC_PI_2);
        assert_abs_diff_eq!(rank2.amplitude(0, 0, 0).norm(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rank2.amplitude(1, 1, 1).re, FRAC_1_SQRT_2, epsilon = 1e-12);
        assert_abs_diff_eq!(rank2.amplitude(2, 2, 2).re, FRAC_1_SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn ghz_outside_first_quadrant_is_normalized() {
        for alpha in [-2.0, 3.5, 100.0] {
            assert_abs_diff_eq!(ghz_state(alpha).norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn dicke_amplitudes() {
        let d1 = dicke_state(1).unwrap();
        let third = 1.0 / 3f64.sqrt();
        for (a, b, c) in [(0, 0, 1), (0, 1, 0), (1, 0, 0)] {
            assert_abs_diff_eq!(d1.amplitude(a, b, c).re, third, epsilon = 1e-12);
        }
        let d2 = dicke_state(2).unwrap();
        assert_abs_diff_eq!(d2.amplitude(0, 1, 1).re, 2.0 / 15f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d2.amplitude(2, 0, 0).re, 1.0 / 15f64.sqrt(), epsilon = 1e-12);
        let d3 = dicke_state(3).unwrap();
        assert_abs_diff_eq!(d3.norm(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d3.amplitude(1, 1, 1).re, 2.0 / 10f64.sqrt(), epsilon = 1e-12);
        assert!(matches!(dicke_state(0), Err(Error::Domain(_))));
        assert!(matches!(dicke_state(4), Err(Error::Domain(_))));
    }

    #[test]
    fn singlet_signs() {
        let s = singlet_state();
        let x = 1.0 / 6f64.sqrt();
        assert_abs_diff_eq!(s.amplitude(0, 1, 2).re, x, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(0, 2, 1).re, -x, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(1, 0, 2).re, -x, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(1, 2, 0).re, x, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(2, 0, 1).re, x, epsilon = 1e-12);
        assert_abs_diff_eq!(s.amplitude(2, 1, 0).re, -x, epsilon = 1e-12);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reduced_densities() {
        let sym = ghz_state(symmetric_ghz_angle());
        for party in 1..=3 {
            let rho = sym.reduced_density(party).unwrap();
            let expected = Matrix3::<Complex64>::identity() / Complex64::new(3.0, 0.0);
            assert!((rho.matrix - expected).iter().all(|z| z.norm() < 1e-12));
        }

        let prod = ghz_state(0.0);
        for party in 1..=3 {
            let rho = prod.reduced_density(party).unwrap();
            assert_abs_diff_eq!(rho.matrix[(0, 0)].re, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(rho.trace().re, 1.0, epsilon = 1e-12);
        }

        // (|001>+|010>+|100>)/sqrt(3): Alice sees |0> in two of three terms.
        let d1 = dicke_state(1).unwrap().reduced_density(1).unwrap();
        let diag = [2.0 / 3.0, 1.0 / 3.0, 0.0];
        for r in 0..3 {
            for s in 0..3 {
                let want = if r == s { diag[r] } else { 0.0 };
                assert_abs_diff_eq!(d1.matrix[(r, s)].re, want, epsilon = 1e-12);
                assert_abs_diff_eq!(d1.matrix[(r, s)].im, 0.0, epsilon = 1e-12);
            }
        }

        assert!(matches!(sym.reduced_density(0), Err(Error::Domain(_))));
        assert!(matches!(sym.reduced_density(4), Err(Error::Domain(_))));
    }

    #[test]
    fn custom_amplitudes_are_renormalized_or_rejected() {
        let mut amps = vec![Complex64::new(0.0, 0.0); DIM];
        amps[0] = Complex64::new(1.0 + 5e-7, 0.0);
        let s = PureState::from_amplitudes(&amps).unwrap();
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-15);

        amps[0] = Complex64::new(1.01, 0.0);
        assert!(PureState::from_amplitudes(&amps).is_err());
        assert!(PureState::from_amplitudes(&amps[..26]).is_err());
    }

    #[test]
    fn state_spec_round_trip() {
        assert_eq!("ghz:54.74".parse::<StateSpec>().unwrap(), StateSpec::Ghz { alpha_deg: 54.74 });
        assert_eq!("dicke:2".parse::<StateSpec>().unwrap(), StateSpec::Dicke(2));
        assert_eq!("singlet".parse::<StateSpec>().unwrap(), StateSpec::Singlet);
        assert!("dicke:5".parse::<StateSpec>().is_err());
        assert!("w".parse::<StateSpec>().is_err());
        let spec = StateSpec::Custom("x.json".into());
        assert_eq!(spec.to_string().parse::<StateSpec>().unwrap(), spec);
    }

    #[test]
    fn custom_state_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.json");
        let mut pairs = vec![[0.0, 0.0]; DIM];
        pairs[flat_index(1, 1, 1)] = [0.0, FRAC_1_SQRT_2];
        pairs[flat_index(2, 2, 2)] = [FRAC_1_SQRT_2, 0.0];
        std::fs::write(&path, serde_json::to_string(&pairs).unwrap()).unwrap();
        let spec: StateSpec = format!("custom:{}", path.display()).parse().unwrap();
        let s = spec.build().unwrap();
        assert_abs_diff_eq!(s.amplitude(1, 1, 1).im, FRAC_1_SQRT_2, epsilon = 1e-12);
    }
}
