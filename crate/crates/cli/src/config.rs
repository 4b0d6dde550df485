//! Experiment configuration: a TOML file with named maps, named sequences, an
//! observable, numeric knobs and tolerance overrides. Unknown keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use seqdyn_core::{DecayLaw, MapSequence, Mode, Observable, SequenceForm, SmoothMap, Space, TrigTerm};

use crate::error::CliError;
use crate::presets::Preset;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: String,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub maps: BTreeMap<String, MapSpec>,
    #[serde(default)]
    pub sequences: BTreeMap<String, SequenceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<ObservableSpec>,
    #[serde(default)]
    pub knobs: Knobs,
    /// Overrides of the preset's default tolerances, by check name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapFamily {
    Doubling,
    ExpandingCircle,
    Cat,
    TorusHyperbolic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpec {
    pub family: MapFamily,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(default)]
    pub shift: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[i64; 2]; 2]>,
    #[serde(default)]
    pub terms: Vec<TrigTerm>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormSpec {
    Constant,
    Periodic,
    ConvergentTail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceSpec {
    pub form: FormSpec,
    /// Constant: one map. Periodic: the cycle. Convergent tail: the leading maps.
    #[serde(default)]
    pub maps: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limit: Option<String>,
    #[serde(default)]
    pub direction: Vec<TrigTerm>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<DecayLaw>,
    #[serde(default)]
    pub two_sided: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObservableSpec {
    /// cos(2πkx) on S¹.
    Cos {
        #[serde(default = "one")]
        frequency: i32,
    },
    Trig {
        #[serde(default = "circle")]
        space: Space,
        #[serde(default)]
        constant: f64,
        modes: Vec<Mode>,
    },
    /// Mean-zero d(x, 0)^α.
    Cusp { alpha: f64 },
    Constant {
        #[serde(default = "circle")]
        space: Space,
        value: f64,
    },
}

fn one() -> i32 {
    1
}

fn circle() -> Space {
    Space::Circle
}

/// Parameters for one entropy estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimateSpec {
    pub sequence: String,
    pub epsilons: Vec<f64>,
    pub ns: Vec<usize>,
    pub window_start: usize,
    /// Candidate grid points per axis.
    pub resolution: usize,
    /// Jittered candidates in shuffled order, seeded from the master seed.
    #[serde(default)]
    pub randomized: bool,
}

/// Numeric knobs. Each preset reads the ones it needs; `describe` lists them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Knobs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deltas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_shifts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_stride: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<EstimateSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compare_ns: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lag_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2_expected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coboundary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.preset()?;
        for name in cfg.tolerances.keys() {
            if !cfg.preset()?.tolerance_names().contains(&name.as_str()) && !name.starts_with("entropy-") {
                return Err(CliError::Config(format!(
                    "unknown tolerance '{name}' for preset {}; known: {}",
                    cfg.preset,
                    cfg.preset()?.tolerance_names().join(", ")
                )));
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn preset(&self) -> Result<Preset, CliError> {
        Preset::from_name(&self.preset)
    }

    pub fn map(&self, name: &str) -> Result<SmoothMap, CliError> {
        let def = self
            .maps
            .get(name)
            .ok_or_else(|| CliError::Config(format!("no map named '{name}'")))?;
        let built = match def.family {
            MapFamily::Doubling => SmoothMap::expanding_circle(2, def.shift, def.terms.clone()),
            MapFamily::ExpandingCircle => {
                let d = def
                    .degree
                    .ok_or_else(|| CliError::Config(format!("map '{name}': expanding-circle needs a degree")))?;
                SmoothMap::expanding_circle(d, def.shift, def.terms.clone())
            }
            MapFamily::Cat => SmoothMap::torus_hyperbolic([[2, 1], [1, 1]], def.terms.clone()),
            MapFamily::TorusHyperbolic => {
                let m = def
                    .matrix
                    .ok_or_else(|| CliError::Config(format!("map '{name}': torus-hyperbolic needs a matrix")))?;
                SmoothMap::torus_hyperbolic(m, def.terms.clone())
            }
        };
        built.map_err(|e| CliError::Config(format!("map '{name}': {e}")))
    }

    pub fn has_sequence(&self, name: &str) -> bool {
        self.sequences.contains_key(name)
    }

    pub fn sequence(&self, name: &str) -> Result<MapSequence, CliError> {
        let def = self
            .sequences
            .get(name)
            .ok_or_else(|| CliError::Config(format!("no sequence named '{name}'")))?;
        let maps = def
            .maps
            .iter()
            .map(|m| self.map(m))
            .collect::<Result<Vec<_>, _>>()?;
        let form = match def.form {
            FormSpec::Constant => {
                if maps.len() != 1 {
                    return Err(CliError::Config(format!("sequence '{name}': constant form takes exactly one map")));
                }
                SequenceForm::Constant(maps[0].clone())
            }
            FormSpec::Periodic => SequenceForm::Periodic(maps),
            FormSpec::ConvergentTail => {
                let limit = def
                    .limit
                    .as_deref()
                    .ok_or_else(|| CliError::Config(format!("sequence '{name}': convergent-tail needs a limit")))?;
                SequenceForm::ConvergentTail {
                    leading: maps,
                    limit: self.map(limit)?,
                    direction: def.direction.clone(),
                    law: def
                        .law
                        .ok_or_else(|| CliError::Config(format!("sequence '{name}': convergent-tail needs a law")))?,
                }
            }
        };
        let seq = MapSequence::new(form).map_err(|e| CliError::Config(format!("sequence '{name}': {e}")))?;
        if def.two_sided {
            seq.two_sided().map_err(|e| CliError::Config(format!("sequence '{name}': {e}")))
        } else {
            Ok(seq)
        }
    }

    pub fn observable(&self) -> Result<Observable, CliError> {
        let def = self
            .observable
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("preset {} needs an [observable]", self.preset)))?;
        Ok(match def {
            ObservableSpec::Cos { frequency } => Observable::cos_circle(*frequency),
            ObservableSpec::Trig { space, constant, modes } => Observable::trig(*space, *constant, modes.clone()),
            ObservableSpec::Cusp { alpha } => {
                if !(*alpha > 0.0 && *alpha <= 1.0) {
                    return Err(CliError::Config(format!("cusp exponent {alpha} outside (0, 1]")));
                }
                Observable::cusp(*alpha)
            }
            ObservableSpec::Constant { space, value } => Observable::constant(*space, *value),
        })
    }

    /// Tolerance override or the preset default.
    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
preset = "conjugacy-residual"
seed = 42

[maps.f]
family = "doubling"

[maps.g]
family = "doubling"
terms = [{ amplitude = 0.05, frequency = [1, 0] }]

[sequences.F]
form = "constant"
maps = ["f"]

[sequences.G]
form = "constant"
maps = ["g"]

[knobs]
steps = 3
"#;

    #[test]
    fn parses_minimal_config() {
        let cfg = ExperimentConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.preset().unwrap(), Preset::ConjugacyResidual);
        assert_eq!(cfg.knobs.steps, Some(3));
        assert!(cfg.sequence("G").unwrap().map(0).base().terms().len() == 1);
    }

    #[test]
    fn unknown_key_rejected() {
        let bad = MINIMAL.replace("steps = 3", "steps = 3\nbogus = 1");
        assert!(matches!(ExperimentConfig::parse(&bad), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_preset_names_valid_ones() {
        let bad = MINIMAL.replace("conjugacy-residual", "bogus");
        let err = ExperimentConfig::parse(&bad).unwrap_err().to_string();
        assert!(err.contains("shadowing-lipschitz") && err.contains("clt-asip"));
    }
}
