//! `ellp`: JSON requests in, JSON reports out.
//!
//! Exit status is 0 when every requested certificate was granted, 2 when the answer is only
//! provisional relative to an oracle stage budget, and 1 on a refused certificate or typed error.

mod commands;
mod request;

use clap::{Parser, Subcommand};
use serde::Serialize;

use ellp_core::error::{Error, Result};
use ellp_core::par::ExecMode;

use commands::*;
use request::{read_request, Outcome, Status};

#[derive(Parser)]
#[command(name = "ellp", version, about = "Certified norm-oracle computations on presentations of l^p")]
struct Cli {
    /// Run every data-parallel step sequentially.
    #[arg(long, global = true)]
    sequential: bool,
    /// Print the report on one line.
    #[arg(long, global = true)]
    compact: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Lamperti functionals of two scalars, two vectors, or a tree map.
    Sigma { request: Option<String> },
    /// Randomized certification of the sharpened Lamperti inequality.
    LampertiCheck { request: Option<String> },
    /// Grid minimum of the Lamperti objective.
    LampertiGrid { request: Option<String> },
    /// Decide whether a tree map is a partial disintegration.
    ValidateTree { request: Option<String> },
    /// Project a tree map onto the strong homomorphisms extending a fixed one.
    ProjectHom { request: Option<String> },
    /// One certified approximate extension.
    Extend { request: Option<String> },
    /// Staged disintegration.
    Disintegrate { request: Option<String> },
    /// Chain partition and chain limits.
    Chains { request: Option<String> },
    /// Disjointly supported unit vectors generating the space.
    Synthesize { request: Option<String> },
    /// Image of a finitely supported vector under a synthesized isometry.
    Apply { request: Option<String> },
    /// Oracle reductions for the adversarial presentation.
    Adversarial {
        #[command(subcommand)]
        which: AdversarialCommand,
    },
    /// Recover p from two synthesized unit vectors.
    RecoverP { request: Option<String> },
}

#[derive(Subcommand)]
enum AdversarialCommand {
    /// `e_0` with respect to F.
    E0 { request: Option<String> },
    /// `(1 - gamma)^{-1/p}` from an approximation of a unimodular multiple of `e_0`.
    Scale { request: Option<String> },
    /// `e_0, ..., e_{n-1}` with respect to F.
    Identity { request: Option<String> },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sigma { .. } => "sigma",
            Command::LampertiCheck { .. } => "lamperti-check",
            Command::LampertiGrid { .. } => "lamperti-grid",
            Command::ValidateTree { .. } => "validate-tree",
            Command::ProjectHom { .. } => "project-hom",
            Command::Extend { .. } => "extend",
            Command::Disintegrate { .. } => "disintegrate",
            Command::Chains { .. } => "chains",
            Command::Synthesize { .. } => "synthesize",
            Command::Apply { .. } => "apply",
            Command::Adversarial { which: AdversarialCommand::E0 { .. } } => "adversarial e0",
            Command::Adversarial { which: AdversarialCommand::Scale { .. } } => "adversarial scale",
            Command::Adversarial { which: AdversarialCommand::Identity { .. } } => "adversarial identity",
            Command::RecoverP { .. } => "recover-p",
        }
    }
}

fn run(cmd: &Command, mode: ExecMode) -> Result<Outcome> {
    fn req<T: serde::de::DeserializeOwned>(r: &Option<String>) -> Result<T> {
        read_request(r.as_deref())
    }
    match cmd {
        Command::Sigma { request } => sigma_cmd(req(request)?),
        Command::LampertiCheck { request } => lamperti_check_cmd(req(request)?, mode),
        Command::LampertiGrid { request } => lamperti_grid_cmd(req(request)?, mode),
        Command::ValidateTree { request } => validate_tree_cmd(req(request)?),
        Command::ProjectHom { request } => project_hom_cmd(req(request)?),
        Command::Extend { request } => extend_cmd(req(request)?, mode),
        Command::Disintegrate { request } => disintegrate_cmd(req(request)?, mode),
        Command::Chains { request } => chains_cmd(req(request)?, mode),
        Command::Synthesize { request } => synthesize_cmd(req(request)?, mode),
        Command::Apply { request } => apply_cmd(req(request)?, mode),
        Command::Adversarial { which } => match which {
            AdversarialCommand::E0 { request } => adversarial_e0_cmd(req(request)?),
            AdversarialCommand::Scale { request } => adversarial_scale_cmd(req(request)?),
            AdversarialCommand::Identity { request } => adversarial_identity_cmd(req(request)?),
        },
        Command::RecoverP { request } => recover_p_cmd(req(request)?, mode),
    }
}

#[derive(Serialize)]
struct ErrorReport {
    code: &'static str,
    message: String,
}

#[derive(Serialize)]
struct Envelope {
    command: &'static str,
    status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<ErrorReport>,
}

fn main() {
    let cli = Cli::parse();
    let mode = if cli.sequential { ExecMode::Sequential } else { ExecMode::default() };
    let command = cli.command.name();
    let envelope = match run(&cli.command, mode) {
        Ok(o) => Envelope { command, status: o.status, report: Some(o.report), error: None },
        Err(e) => {
            eprintln!("ellp {command}: {e}");
            let status = if matches!(e, Error::Provisional(_)) { Status::Provisional } else { Status::Error };
            Envelope { command, status, report: None, error: Some(ErrorReport { code: e.code(), message: e.to_string() }) }
        }
    };
    let text = if cli.compact { serde_json::to_string(&envelope) } else { serde_json::to_string_pretty(&envelope) };
    println!("{}", text.expect("reports serialize"));
    std::process::exit(envelope.status.exit_code());
}
