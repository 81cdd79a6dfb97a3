//! Tabulated optimal settings and their critical visibilities, embedded as
//! a regression fixture.

use serde::{Deserialize, Serialize};

use crate::born::NoiseModel;
use crate::error::{Error, Result};
use crate::lhv::{critical_visibility_with, VisibilityResult};
use crate::lp::SolverOptions;
use crate::observables::{MeasurementFamily, ParameterLayout, SettingsBank, Sharing, U3Angles};
use crate::states::{PureState, StateSpec};

const FIXTURE: &str = include_str!("../data/appendix.json");

/// Default agreement required between a computed and a tabulated value.
pub const TOLERANCE: f64 = 5e-4;
/// Looser agreement for cases whose tabulated values disagree with each
/// other by more than [`TOLERANCE`].
pub const DISPUTED_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug, Deserialize)]
struct RawCase {
    id: String,
    state: String,
    family: MeasurementFamily,
    settings: usize,
    per_party: bool,
    #[serde(default)]
    level_permutation: Option<[usize; 3]>,
    expected: Vec<f64>,
    params: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppendixCase {
    pub id: String,
    pub state: StateSpec,
    pub family: MeasurementFamily,
    pub settings: usize,
    pub sharing: Sharing,
    /// The tabulated settings belong to the state with its levels relabeled
    /// `|l> -> |perm[l]>`; the bank is adapted so it measures the state as
    /// given.
    pub level_permutation: Option<[usize; 3]>,
    /// Flat parameter vector in [`ParameterLayout`] order (U(3) angles in
    /// factor order).
    pub params: Vec<f64>,
    /// Tabulated critical visibilities; more than one when sources differ.
    pub expected: Vec<f64>,
}

impl AppendixCase {
    pub fn layout(&self) -> ParameterLayout {
        ParameterLayout { family: self.family, settings: self.settings, sharing: self.sharing }
    }

    pub fn tolerance(&self) -> f64 {
        if self.expected.len() > 1 {
            DISPUTED_TOLERANCE
        } else {
            TOLERANCE
        }
    }

    pub fn build_state(&self) -> Result<PureState> {
        self.state.build()
    }

    pub fn bank(&self) -> Result<SettingsBank> {
        let bank = self.layout().bank(&self.params)?;
        match self.level_permutation {
            Some(perm) => bank.with_level_permutation(perm),
            None => Ok(bank),
        }
    }
}

fn setting_block(value: &serde_json::Value, family: MeasurementFamily) -> Result<Vec<f64>> {
    let raw: Vec<f64> = serde_json::from_value(value.clone())?;
    if raw.len() != family.params_per_setting() {
        return Err(Error::parse(format!(
            "{family} setting needs {} numbers, fixture has {}",
            family.params_per_setting(),
            raw.len()
        )));
    }
    Ok(match family {
        MeasurementFamily::Tritter => raw,
        MeasurementFamily::U3 => {
            let mut labels = [0.0; 8];
            labels.copy_from_slice(&raw);
            U3Angles::from_tabulated_labels(labels).0.to_vec()
        }
    })
}

fn convert(raw: RawCase) -> Result<AppendixCase> {
    let blocks: Vec<serde_json::Value> = if raw.per_party {
        let parties: Vec<Vec<serde_json::Value>> = serde_json::from_value(raw.params)?;
        if parties.len() != 3 {
            return Err(Error::parse(format!("case {}: per-party listing needs 3 parties", raw.id)));
        }
        parties.into_iter().flatten().collect()
    } else {
        serde_json::from_value(raw.params)?
    };
    let mut params = Vec::new();
    for b in &blocks {
        params.extend(setting_block(b, raw.family)?);
    }
    let sharing = if raw.per_party { Sharing::PerParty } else { Sharing::SharedAcrossParties };
    let case = AppendixCase {
        state: raw.state.parse()?,
        family: raw.family,
        settings: raw.settings,
        sharing,
        level_permutation: raw.level_permutation,
        params,
        expected: raw.expected,
        id: raw.id,
    };
    if case.params.len() != case.layout().dimension() {
        return Err(Error::parse(format!(
            "case {}: {} parameters for a layout of dimension {}",
            case.id,
            case.params.len(),
            case.layout().dimension()
        )));
    }
    if case.expected.is_empty() || case.expected.iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
        return Err(Error::parse(format!("case {}: expected values must lie in (0, 1]", case.id)));
    }
    Ok(case)
}

/// All embedded cases, in listing order.
pub fn cases() -> Vec<AppendixCase> {
    let raw: Vec<RawCase> = serde_json::from_str(FIXTURE).expect("embedded fixture is valid JSON");
    raw.into_iter().map(|c| convert(c).expect("embedded fixture is well formed")).collect()
}

pub fn case(id: &str) -> Option<AppendixCase> {
    cases().into_iter().find(|c| c.id == id)
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub id: String,
    pub state: String,
    pub family: MeasurementFamily,
    pub settings: usize,
    pub computed: f64,
    pub expected: Vec<f64>,
    /// Tabulated value closest to the computed one.
    pub matched: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn evaluate(case: &AppendixCase, opts: &SolverOptions) -> Result<(CaseReport, VisibilityResult)> {
    let state = case.build_state()?;
    let bank = case.bank()?;
    let result = critical_visibility_with(&state, &bank, NoiseModel::White, opts)?;
    let computed = result.v_crit;
    let matched = case
        .expected
        .iter()
        .copied()
        .min_by(|a, b| (a - computed).abs().total_cmp(&(b - computed).abs()))
        .unwrap_or(f64::NAN);
    let tolerance = case.tolerance();
    let report = CaseReport {
        id: case.id.clone(),
        state: case.state.to_string(),
        family: case.family,
        settings: case.settings,
        computed,
        expected: case.expected.clone(),
        matched,
        tolerance,
        pass: (computed - matched).abs() <= tolerance,
    };
    Ok((report, result))
}

/// Evaluates the selected cases (all when `ids` is empty). Unknown ids are
/// an error.
pub fn verify_appendix(ids: &[String], opts: &SolverOptions) -> Result<Vec<CaseReport>> {
    let all = cases();
    if let Some(bad) = ids.iter().find(|id| !all.iter().any(|c| &c.id == *id)) {
        return Err(Error::parse(format!("unknown case '{bad}'")));
    }
    all.iter()
        .filter(|c| ids.is_empty() || ids.contains(&c.id))
        .map(|c| evaluate(c, opts).map(|(r, _)| r))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_loads() {
        let all = cases();
        assert_eq!(all.len(), 12);
        let ids: String = all.iter().map(|c| c.id.as_str()).collect();
        assert_eq!(ids, "abcdefghijkl");
        let d = case("d").unwrap();
        assert_eq!(d.sharing, Sharing::PerParty);
        assert_eq!(d.params.len(), 18);
        assert_eq!(case("i").unwrap().tolerance(), DISPUTED_TOLERANCE);
        assert_eq!(case("j").unwrap().level_permutation, Some([2, 1, 0]));
        assert!(case("z").is_none());
    }

    #[test]
    fn tabulated_u3_labels_are_rotated() {
        let c = case("c").unwrap();
        // First tabulated label of the first setting lands on the last factor.
        assert_eq!(c.params[7], 0.1095979254970793);
        assert_eq!(c.params[0], 1.6449871624952401);
    }

    #[test]
    fn unknown_case_is_rejected() {
        assert!(verify_appendix(&["q".to_string()], &SolverOptions::default()).is_err());
    }
}
