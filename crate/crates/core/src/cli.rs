//! Command implementations behind the `qutrit-lhv` binary. Each command
//! takes plain arguments and returns data; printing and argument parsing
//! live in the binary.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::appendix::{self, CaseReport};
use crate::born::{noise_tensor, quantum_tensor, NoiseModel};
use crate::error::{Error, Result};
use crate::lhv::{bisect_visibility, build_program, critical_visibility, VisibilityResult};
use crate::lp::{write_mps, SolverOptions};
use crate::observables::{MeasurementFamily, ParameterLayout, SettingsBank, Sharing};
use crate::optimizer::{optimize_settings_from, scan_alpha, OptimizationConfig, RestartTrace, ScanRow};
use crate::oracle::oracle_vcrit;
use crate::states::{symmetric_ghz_angle, PureState, StateSpec};

pub const EXIT_SUCCESS: i32 = 0;
pub const EXIT_ACCEPTANCE_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Agreement demanded of the bisection and oracle cross-checks.
pub const CROSS_CHECK_TOL: f64 = 1e-6;

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Solver { .. } | Error::Contract(_) => EXIT_NUMERICAL,
        Error::Domain(_) | Error::Parse(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
    }
}

/// Rounds a visibility to six decimals for reports.
pub fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// Machine-readable result of one evaluation or optimization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub state: String,
    pub family: MeasurementFamily,
    pub m: usize,
    pub noise: NoiseModel,
    pub v_crit: f64,
    pub params: Vec<f64>,
    pub seed: u64,
    pub evals: usize,
}

/// Settings description accepted by `--params` files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsFile {
    pub family: MeasurementFamily,
    pub settings: usize,
    #[serde(default)]
    pub per_party: bool,
    /// Flat vector in layout order.
    pub angles: Vec<f64>,
}

/// A resolved `--params` argument.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamsChoice {
    pub layout: ParameterLayout,
    pub params: Vec<f64>,
    pub level_permutation: Option<[usize; 3]>,
}

impl ParamsChoice {
    pub fn bank(&self) -> Result<SettingsBank> {
        let bank = self.layout.bank(&self.params)?;
        match self.level_permutation {
            Some(p) => bank.with_level_permutation(p),
            None => Ok(bank),
        }
    }
}

fn layout_for_length(family: MeasurementFamily, settings: usize, len: usize) -> Result<ParameterLayout> {
    for sharing in [Sharing::SharedAcrossParties, Sharing::PerParty] {
        let layout = ParameterLayout::new(family, settings, sharing)?;
        if layout.dimension() == len {
            return Ok(layout);
        }
    }
    Err(Error::parse(format!(
        "{len} parameters fit neither a shared nor a per-party {family} layout with {settings} settings"
    )))
}

/// Resolves `appendix:<id>`, a JSON parameter file, or an inline
/// comma-separated list (which needs `family` and `settings`).
pub fn resolve_params(spec: &str, family: Option<MeasurementFamily>, settings: Option<usize>) -> Result<ParamsChoice> {
    if let Some(id) = spec.strip_prefix("appendix:") {
        let case = appendix::case(id).ok_or_else(|| Error::parse(format!("unknown appendix case '{id}'")))?;
        return Ok(ParamsChoice {
            layout: case.layout(),
            params: case.params.clone(),
            level_permutation: case.level_permutation,
        });
    }
    if Path::new(spec).is_file() {
        let file: ParamsFile = serde_json::from_str(&std::fs::read_to_string(spec)?)?;
        let sharing = if file.per_party { Sharing::PerParty } else { Sharing::SharedAcrossParties };
        let layout = ParameterLayout::new(file.family, file.settings, sharing)?;
        if layout.dimension() != file.angles.len() {
            return Err(Error::parse(format!(
                "parameter file lists {} angles, layout needs {}",
                file.angles.len(),
                layout.dimension()
            )));
        }
        return Ok(ParamsChoice { layout, params: file.angles, level_permutation: None });
    }
    let params: Vec<f64> = spec
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Error::parse(format!("bad parameter '{t}'"))))
        .collect::<Result<_>>()?;
    let family = family.ok_or_else(|| Error::parse("inline parameters need --family"))?;
    let settings = settings.ok_or_else(|| Error::parse("inline parameters need --settings"))?;
    let layout = layout_for_length(family, settings, params.len())?;
    Ok(ParamsChoice { layout, params, level_permutation: None })
}

/// Parses `start:stop:step` (inclusive of `stop`) or a comma list.
pub fn parse_alpha_grid(spec: &str) -> Result<Vec<f64>> {
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| Error::parse(format!("bad angle '{t}'")));
    let parts: Vec<&str> = spec.split(':').collect();
    let grid = match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || stop < start {
                return Err(Error::parse(format!("bad grid '{spec}': need start <= stop and step > 0")));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize;
            (0..=count).map(|i| start + i as f64 * step).collect()
        }
        [_] => spec.split(',').map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::parse(format!("bad grid '{spec}'"))),
    };
    if grid.is_empty() || grid.iter().any(|a| !a.is_finite()) {
        return Err(Error::parse(format!("bad grid '{spec}'")));
    }
    Ok(grid)
}

/// Default parameter sharing: shared for states whose tabulated optima use
/// one setting list for all parties, per-party otherwise.
pub fn default_sharing(state: &StateSpec) -> Sharing {
    match state {
        StateSpec::Ghz { alpha_deg } => {
            let a = alpha_deg.rem_euclid(180.0);
            let sym = symmetric_ghz_angle().to_degrees();
            if a.abs() < 1e-9 || (a - 90.0).abs() < 1e-9 || (a - sym).abs() < 0.01 {
                Sharing::SharedAcrossParties
            } else {
                Sharing::PerParty
            }
        }
        StateSpec::Dicke(_) => Sharing::SharedAcrossParties,
        StateSpec::Singlet | StateSpec::Custom(_) => Sharing::PerParty,
    }
}

pub fn verify_appendix(ids: &[String]) -> Result<Vec<CaseReport>> {
    appendix::verify_appendix(ids, &SolverOptions::default())
}

pub fn appendix_table(reports: &[CaseReport]) -> String {
    let mut out = String::from("case  state                       family  m  computed  expected         pass\n");
    for r in reports {
        let expected: Vec<String> = r.expected.iter().map(|v| format!("{v}")).collect();
        let _ = writeln!(
            out,
            "{:<5} {:<27} {:<7} {}  {:.6}  {:<16} {}",
            r.id,
            r.state,
            r.family.to_string(),
            r.settings,
            r.computed,
            expected.join("/"),
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    out
}

#[derive(Clone, Debug, Default)]
pub struct VcritOptions {
    pub noise: NoiseModel,
    pub seed: u64,
    pub dump_mps: Option<std::path::PathBuf>,
    pub check_bisect: bool,
    pub oracle: bool,
}

/// Outcome of the optional cross-checks run alongside an evaluation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossCheck {
    pub method: String,
    pub v_crit: f64,
    pub difference: f64,
    pub agrees: bool,
}

pub fn cmd_vcrit(
    state_spec: &StateSpec,
    choice: &ParamsChoice,
    opts: &VcritOptions,
) -> Result<(ResultRecord, VisibilityResult, Vec<CrossCheck>)> {
    let state = state_spec.build()?;
    let bank = choice.bank()?;
    let result = critical_visibility(&state, &bank, opts.noise)?;
    let mut checks = Vec::new();
    if opts.dump_mps.is_some() || opts.check_bisect || opts.oracle {
        let ps = quantum_tensor(&state, &bank)?;
        let pn = noise_tensor(opts.noise, &state, &bank)?;
        if let Some(path) = &opts.dump_mps {
            std::fs::write(path, write_mps(&build_program(&ps, &pn)?, "LHV"))?;
        }
        let mut push = |method: &str, v: f64| {
            let difference = (v - result.v_crit).abs();
            checks.push(CrossCheck { method: method.into(), v_crit: v, difference, agrees: difference <= CROSS_CHECK_TOL });
        };
        if opts.check_bisect {
            push("bisection", bisect_visibility(&ps, &pn, 1e-9, &SolverOptions::default())?);
        }
        if opts.oracle {
            push("oracle", oracle_vcrit(&ps, &pn)?);
        }
    }
    let record = ResultRecord {
        state: state_spec.to_string(),
        family: choice.layout.family,
        m: choice.layout.settings,
        noise: opts.noise,
        v_crit: round6(result.v_crit),
        params: choice.params.clone(),
        seed: opts.seed,
        evals: 1,
    };
    Ok((record, result, checks))
}

pub fn cmd_optimize(
    state_spec: &StateSpec,
    family: MeasurementFamily,
    settings: usize,
    noise: NoiseModel,
    cfg: &OptimizationConfig,
    progress: &(dyn Fn(&RestartTrace) + Sync),
) -> Result<ResultRecord> {
    let state = state_spec.build()?;
    let res = optimize_settings_from(&state, family, settings, noise, cfg, &[], progress)?;
    Ok(ResultRecord {
        state: state_spec.to_string(),
        family,
        m: settings,
        noise,
        v_crit: round6(res.v_crit),
        params: res.wrapped_params(),
        seed: cfg.seed,
        evals: res.evals,
    })
}

pub fn cmd_scan(
    grid: &[f64],
    family: MeasurementFamily,
    settings: usize,
    noise: NoiseModel,
    cfg: &OptimizationConfig,
    progress: &(dyn Fn(f64, &RestartTrace) + Sync),
) -> Result<(Vec<ScanRow>, String)> {
    let rows = scan_alpha(grid, family, settings, noise, cfg, progress)?;
    let mut csv = String::from("alpha_deg,v_crit,evals,seed\n");
    for r in &rows {
        let v = r.v_crit.map(|v| format!("{:.6}", round6(v))).unwrap_or_else(|| "nan".into());
        let _ = writeln!(csv, "{},{v},{},{}", r.alpha_deg, r.evals, cfg.seed);
    }
    Ok((rows, csv))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DickeRow {
    pub state: String,
    pub settings: usize,
    pub noise: NoiseModel,
    pub v_crit: f64,
    pub evals: usize,
    /// Tabulated white-noise value for these settings, when one exists.
    pub appendix_v_crit: Option<f64>,
    /// Visibility of the tabulated settings themselves; the optimizer's
    /// value is never reported above it.
    pub appendix_recomputed: Option<f64>,
}

/// Optimizes every Dicke state for two and three settings under both noise
/// models. White-noise rows also evaluate the tabulated settings and start
/// one restart from them.
pub fn cmd_table_dicke(
    cfg2: &OptimizationConfig,
    cfg3: &OptimizationConfig,
    progress: &(dyn Fn(&str, &RestartTrace) + Sync),
) -> Result<(Vec<DickeRow>, String)> {
    let cases = appendix::cases();
    let mut rows = Vec::new();
    for k in 1..=3u32 {
        let spec = StateSpec::Dicke(k);
        let state = spec.build()?;
        for settings in [2usize, 3] {
            let cfg = if settings == 2 { cfg2 } else { cfg3 };
            let fixture = cases.iter().find(|c| c.state == spec && c.settings == settings);
            for noise in [NoiseModel::White, NoiseModel::Product] {
                let mut extra = Vec::new();
                let mut recomputed = None;
                if let Some(case) = fixture.filter(|c| c.level_permutation.is_none() && c.layout().sharing == cfg.sharing) {
                    extra.push(case.params.clone());
                }
                if let (Some(case), NoiseModel::White) = (fixture, noise) {
                    recomputed = Some(critical_visibility(&state, &case.bank()?, noise)?.v_crit);
                }
                let label = format!("{spec} m={settings} {noise}");
                let report = |t: &RestartTrace| progress(&label, t);
                let res = optimize_settings_from(&state, MeasurementFamily::U3, settings, noise, cfg, &extra, &report)?;
                rows.push(DickeRow {
                    state: spec.to_string(),
                    settings,
                    noise,
                    v_crit: res.v_crit,
                    evals: res.evals,
                    appendix_v_crit: fixture.filter(|_| noise == NoiseModel::White).map(|c| c.expected[0]),
                    appendix_recomputed: recomputed,
                });
            }
        }
    }
    let mut csv = String::from("state,settings,noise,v_crit,evals,appendix_v_crit\n");
    for r in &rows {
        let app = r.appendix_v_crit.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{:.6},{},{app}", r.state, r.settings, r.noise, round6(r.v_crit), r.evals);
    }
    Ok((rows, csv))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingletReport {
    pub white: ResultRecord,
    /// Product-noise visibility at the white-noise optimum.
    pub product_v_crit: f64,
    pub difference: f64,
    pub equal_within_1e3: bool,
}

/// Optimizes the singlet against white noise, then re-evaluates the found
/// settings against product noise.
pub fn singlet_report(
    family: MeasurementFamily,
    settings: usize,
    cfg: &OptimizationConfig,
    progress: &(dyn Fn(&RestartTrace) + Sync),
) -> Result<SingletReport> {
    let spec = StateSpec::Singlet;
    let state: PureState = spec.build()?;
    let res = optimize_settings_from(&state, family, settings, NoiseModel::White, cfg, &[], progress)?;
    let layout = ParameterLayout::new(family, settings, cfg.sharing)?;
    let product = critical_visibility(&state, &layout.bank(&res.params)?, NoiseModel::Product)?.v_crit;
    let difference = (product - res.v_crit).abs();
    Ok(SingletReport {
        white: ResultRecord {
            state: spec.to_string(),
            family,
            m: settings,
            noise: NoiseModel::White,
            v_crit: round6(res.v_crit),
            params: res.wrapped_params(),
            seed: cfg.seed,
            evals: res.evals,
        },
        product_v_crit: round6(product),
        difference,
        equal_within_1e3: difference <= 1e-3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_grids() {
        assert_eq!(parse_alpha_grid("0:90:45").unwrap(), vec![0.0, 45.0, 90.0]);
        assert_eq!(parse_alpha_grid("0:1:0.25").unwrap().len(), 5);
        assert_eq!(parse_alpha_grid("0,54.74,90").unwrap(), vec![0.0, 54.74, 90.0]);
        assert!(parse_alpha_grid("10:0:1").is_err());
        assert!(parse_alpha_grid("0:10:0").is_err());
        assert!(parse_alpha_grid("a:b").is_err());
    }

    #[test]
    fn params_resolution() {
        let c = resolve_params("appendix:c", None, None).unwrap();
        assert_eq!(c.layout.family, MeasurementFamily::U3);
        assert_eq!(c.params.len(), 16);
        assert!(resolve_params("appendix:zz", None, None).is_err());

        let inline = resolve_params("0,0,0,1,2,3", Some(MeasurementFamily::Tritter), Some(2)).unwrap();
        assert_eq!(inline.layout.sharing, Sharing::SharedAcrossParties);
        let per_party: String = vec!["0.5"; 18].join(",");
        let pp = resolve_params(&per_party, Some(MeasurementFamily::Tritter), Some(2)).unwrap();
        assert_eq!(pp.layout.sharing, Sharing::PerParty);
        assert!(resolve_params("0,0,0", Some(MeasurementFamily::Tritter), Some(2)).is_err());
        assert!(resolve_params("0,0,0,1,2,3", None, Some(2)).is_err());
    }

    #[test]
    fn params_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        std::fs::write(&path, r#"{"family":"T","settings":2,"angles":[0,0,0,1,2,3]}"#).unwrap();
        let c = resolve_params(path.to_str().unwrap(), None, None).unwrap();
        assert_eq!(c.params, vec![0.0, 0.0, 0.0, 1.0, 2.0, 3.0]);
        std::fs::write(&path, r#"{"family":"T","settings":2,"angles":[0,0]}"#).unwrap();
        assert!(resolve_params(path.to_str().unwrap(), None, None).is_err());
    }

    #[test]
    fn sharing_defaults() {
        assert_eq!(default_sharing(&"ghz:54.74".parse().unwrap()), Sharing::SharedAcrossParties);
        assert_eq!(default_sharing(&"ghz:90".parse().unwrap()), Sharing::SharedAcrossParties);
        assert_eq!(default_sharing(&"ghz:50".parse().unwrap()), Sharing::PerParty);
        assert_eq!(default_sharing(&"dicke:2".parse().unwrap()), Sharing::SharedAcrossParties);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::Solver { status: crate::lp::LpStatus::IterationLimit, iterations: 1, detail: String::new() }),
            EXIT_NUMERICAL
        );
    }

    #[test]
    fn rounding() {
        assert_eq!(round6(0.52632814), 0.526328);
        assert_eq!(round6(1.0), 1.0);
    }
}
