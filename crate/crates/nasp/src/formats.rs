//! On-disk formats: instance files and result files, both UTF-8 JSON.

use std::fs;
use std::path::Path;

use nasp_core::energy::{build_nasp, EnergyInstance};
use nasp_core::instances::energy::GenConfig;
use nasp_core::nasp::{MixedProfile, MixedStrategy, Nasp, SolveReport, Status, SupportPoint};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Either an energy market, rebuilt into a game on load, or a game given
/// directly by its matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InstanceFile {
    Energy {
        instance: EnergyInstance,
        /// Generator settings the instance was drawn with, if any.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        config: Option<GenConfig>,
    },
    Nasp {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        name: Option<String>,
        game: Nasp,
    },
}

impl InstanceFile {
    pub fn game(&self) -> Result<Nasp, CliError> {
        match self {
            InstanceFile::Energy { instance, .. } => build_nasp(instance).map_err(|e| CliError::Input(e.to_string())),
            InstanceFile::Nasp { game, .. } => {
                game.validate().map_err(|e| CliError::Input(e.to_string()))?;
                Ok(game.clone())
            }
        }
    }

    pub fn energy(&self) -> Option<&EnergyInstance> {
        match self {
            InstanceFile::Energy { instance, .. } => Some(instance),
            InstanceFile::Nasp { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderResult {
    /// Expected cost at the profile.
    pub objective: f64,
    pub support: Vec<SupportPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultFile {
    pub algorithm: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strategy: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leaders: Option<Vec<LeaderResult>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub prices: Vec<f64>,
    pub iterations: usize,
    pub pieces_enumerated: Vec<usize>,
    pub pieces_included: Vec<usize>,
    pub nodes: usize,
    /// Seconds; only written on request so results stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_time: Option<f64>,
}

impl ResultFile {
    pub fn new(g: &Nasp, r: &SolveReport) -> Self {
        let leaders = r.profile.as_ref().map(|p| {
            p.payoffs(g)
                .into_iter()
                .zip(&p.leaders)
                .map(|(objective, s)| LeaderResult { objective, support: s.support.clone() })
                .collect()
        });
        ResultFile {
            algorithm: r.algorithm.clone(),
            strategy: None,
            k: None,
            seed: None,
            status: r.status,
            leaders,
            prices: r.profile.as_ref().map(|p| p.prices.clone()).unwrap_or_default(),
            iterations: r.iterations,
            pieces_enumerated: r.pieces_enumerated.clone(),
            pieces_included: r.pieces_included.clone(),
            nodes: r.nodes,
            wall_time: None,
        }
    }

    pub fn profile(&self) -> Option<MixedProfile> {
        let leaders = self.leaders.as_ref()?;
        Some(MixedProfile {
            leaders: leaders.iter().map(|l| MixedStrategy { support: l.support.clone() }).collect(),
            prices: self.prices.clone(),
        })
    }
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("plain data serializes");
    s.push('\n');
    s
}

/// Writes to `path`, or to stdout when it is `None` or `-`.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) if p.as_os_str() != "-" => {
            fs::write(p, text).map_err(|e| CliError::Input(format!("{}: {e}", p.display())))
        }
        _ => {
            print!("{text}");
            Ok(())
        }
    }
}
