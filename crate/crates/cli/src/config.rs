use std::path::PathBuf;

use cantorvar::averages::ScaleLadder;
use cantorvar::dynamics::{SpaceSpec, SystemSpec};
use cantorvar::verify::SuiteConfig;
use cantorvar::Mode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: u32 = 1;

/// The JSON configuration file. Every section is optional.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub verify: SuiteConfig,
    #[serde(default)]
    pub variation: VariationConfig,
    #[serde(default)]
    pub jumps: JumpsConfig,
    #[serde(default)]
    pub cp: CpConfig,
}

impl ExperimentConfig {
    pub fn defaults() -> ExperimentConfig {
        ExperimentConfig {
            schema: SCHEMA,
            ..ExperimentConfig::default()
        }
    }
}

/// A step function given inline, by name, or drawn at random.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FunctionSpec {
    /// `"random"` or `"unit_square"`.
    Named(String),
    /// The step function JSON format.
    Grid(Value),
}

impl Default for FunctionSpec {
    fn default() -> FunctionSpec {
        FunctionSpec::Named("random".into())
    }
}

impl FunctionSpec {
    pub fn is_random(&self) -> bool {
        matches!(self, FunctionSpec::Named(n) if n == "random")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationConfig {
    pub group: Vec<usize>,
    #[serde(rename = "K")]
    pub resolution: u32,
    #[serde(rename = "N")]
    pub support: u32,
    pub p: u32,
    pub ladder: ScaleLadder,
    pub f: FunctionSpec,
    pub g: FunctionSpec,
    pub trials: usize,
}

impl Default for VariationConfig {
    fn default() -> VariationConfig {
        VariationConfig {
            group: vec![2],
            resolution: 1,
            support: 1,
            p: 2,
            ladder: ScaleLadder::new(vec![-1, 0]).expect("valid ladder"),
            f: FunctionSpec::default(),
            g: FunctionSpec::default(),
            trials: 10,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JumpsConfig {
    pub system: SystemSpec,
    pub p: u32,
    pub eps: Vec<f64>,
    pub trials: usize,
    /// Explicit values of `f` on the points of the system.
    pub f: Option<Vec<f64>>,
    pub g: Option<Vec<f64>>,
}

impl Default for JumpsConfig {
    fn default() -> JumpsConfig {
        JumpsConfig {
            system: SystemSpec {
                group: vec![2],
                depth: 3,
                space: SpaceSpec::Regular,
            },
            p: 2,
            eps: vec![0.1, 0.2, 0.5],
            trials: 10,
            f: None,
            g: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CpConfig {
    pub p_list: Vec<u32>,
}

impl Default for CpConfig {
    fn default() -> CpConfig {
        CpConfig {
            p_list: vec![2, 3, 4],
        }
    }
}
