//! Request fields shared by several subcommands.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use ellp_core::chains::ChainBudget;
use ellp_core::error::{Error, Result};
use ellp_core::extension::ExtendBudget;
use ellp_core::iso::SynthBudget;
use ellp_core::par::ExecMode;
use ellp_core::presentation::{build, CeSet, CeSpec, Certainty, OracleAdapter, OracleMode, PresentationDescriptor, SharedPresentation};
use ellp_core::tree::SearchBudget;

/// Reads a request from a path, `-` for stdin, or inline JSON.
pub fn read_request<T: DeserializeOwned>(arg: Option<&str>) -> Result<T> {
    let text = match arg {
        None => "{}".to_string(),
        Some("-") => std::io::read_to_string(std::io::stdin()).map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?,
        Some(s) if s.trim_start().starts_with('{') => s.to_string(),
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("{path}: {e}")))?,
    };
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

/// Budget overrides; anything left out keeps the library default.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budgets {
    pub max_stages: Option<u32>,
    pub k: Option<i64>,
    pub max_generator: Option<u64>,
    pub max_rounds: Option<u32>,
    pub max_evals: Option<usize>,
    pub chain_stage: Option<u64>,
    pub max_stage: Option<u64>,
    pub max_depth: Option<usize>,
}

impl Budgets {
    pub fn extend(&self, mode: ExecMode) -> ExtendBudget {
        let d = ExtendBudget::default();
        ExtendBudget {
            max_generator: self.max_generator.unwrap_or(d.max_generator),
            max_rounds: self.max_rounds.unwrap_or(d.max_rounds),
            search: SearchBudget { max_evals: self.max_evals.unwrap_or(d.search.max_evals), mode },
        }
    }

    pub fn chains(&self, mode: ExecMode) -> ChainBudget {
        let d = ChainBudget::default();
        ChainBudget {
            stage: self.chain_stage.unwrap_or(d.stage),
            max_stage: self.max_stage.unwrap_or(d.max_stage),
            max_depth: self.max_depth.unwrap_or(d.max_depth),
            mode,
        }
    }

    pub fn synth(&self, mode: ExecMode) -> SynthBudget {
        let d = SynthBudget::default();
        SynthBudget {
            extend: self.extend(mode),
            chains: self.chains(mode),
            max_stages: self.max_stages.unwrap_or(d.max_stages),
            k: self.k.unwrap_or(d.k),
        }
    }
}

/// `{"mode": "transparent"}` or `{"mode": "staged", "budget": t}`, with an optional c.e. set.
#[derive(Clone, Debug, Deserialize)]
pub struct OracleSpec {
    #[serde(flatten)]
    pub mode: OracleMode,
    #[serde(default)]
    pub ce: Option<CeSpec>,
}

fn descriptor_ce(desc: &PresentationDescriptor) -> Option<&CeSpec> {
    match desc {
        PresentationDescriptor::Adversarial { ce, .. } => Some(ce),
        PresentationDescriptor::Opaque { inner } => descriptor_ce(inner),
        _ => None,
    }
}

/// The oracle for a request: its own c.e. set, else the presentation's, else the empty set.
pub fn oracle(spec: Option<&OracleSpec>, desc: Option<&PresentationDescriptor>) -> Result<OracleAdapter> {
    let ce = spec
        .and_then(|s| s.ce.clone())
        .or_else(|| desc.and_then(descriptor_ce).cloned())
        .unwrap_or(CeSpec::Explicit { elements: Vec::new(), stages: Vec::new() });
    let ce = CeSet::new(ce)?;
    Ok(OracleAdapter { ce, mode: spec.map_or(OracleMode::Transparent, |s| s.mode) })
}

pub fn presentation(desc: &PresentationDescriptor) -> Result<SharedPresentation> {
    build(desc, None)
}

/// How a command ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Granted,
    Refused,
    Provisional,
    Error,
}

impl Status {
    pub fn from_certainty(granted: bool, c: Certainty) -> Status {
        match (granted, c) {
            (false, _) => Status::Refused,
            (true, Certainty::Exact) => Status::Granted,
            (true, Certainty::Provisional { .. }) => Status::Provisional,
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Status::Granted => 0,
            Status::Refused | Status::Error => 1,
            Status::Provisional => 2,
        }
    }
}

pub struct Outcome {
    pub status: Status,
    pub report: serde_json::Value,
}

impl Outcome {
    pub fn new<T: Serialize>(status: Status, report: &T) -> Result<Outcome> {
        let report = serde_json::to_value(report).map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
        Ok(Outcome { status, report })
    }
}
