//! Command runners. Each writes machine-readable outputs into its target
//! directory and maps numerical failures onto the documented exit codes.

pub mod analyze;
pub mod normalize;
pub mod ode_sim;
pub mod pde_sim;
pub mod sweep;

use std::path::PathBuf;

use crate::config::ExperimentConfig;
use crate::report::{self, ErrorReport};

/// Exit codes: 1 unexpected, 2 config, 3 degenerate, 4 no assumption,
/// 5 blow-up, 6 underresolved grid.
pub enum Failure {
    Config(anyhow::Error),
    Degenerate(String),
    Assumption(String),
    BlowUp { message: String, time: f64 },
    Underresolved(String),
    Other(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Other(_) => 1,
            Failure::Config(_) => 2,
            Failure::Degenerate(_) => 3,
            Failure::Assumption(_) => 4,
            Failure::BlowUp { .. } => 5,
            Failure::Underresolved(_) => 6,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Config(e) | Failure::Other(e) => format!("{e:#}"),
            Failure::Degenerate(m) | Failure::Assumption(m) | Failure::Underresolved(m) => {
                m.clone()
            }
            Failure::BlowUp { message, .. } => message.clone(),
        }
    }
}

/// Run-level flag overrides; they also apply to every sweep point.
#[derive(Clone, Copy, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

pub struct CmdContext<'a> {
    pub command: &'static str,
    pub cfg: &'a ExperimentConfig,
    pub out_dir: PathBuf,
    pub overrides: Overrides,
}

impl CmdContext<'_> {
    pub fn tol(&self) -> f64 {
        self.overrides.tol.unwrap_or(self.cfg.tol)
    }

    pub fn seed(&self) -> u64 {
        self.overrides.seed.unwrap_or(self.cfg.seed)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out_dir.join(name)
    }
}

/// Record a numerical failure as a report file next to where the results
/// would have gone, so batch drivers see structured status, then pass the
/// failure through.
pub fn fail_with_report(ctx: &CmdContext, failure: Failure) -> Failure {
    let mut rep = ErrorReport::new(ctx.command, failure.message(), failure.exit_code());
    if let Failure::BlowUp { time, .. } = &failure {
        rep.blow_up_time = Some(*time);
    }
    let _ = report::write_json(&ctx.path("report.json"), &rep);
    failure
}

pub fn dispatch(name: &str, ctx: &CmdContext) -> Result<(), Failure> {
    match name {
        "analyze" => analyze::run(ctx),
        "normalize" => normalize::run(ctx),
        "ode-sim" => ode_sim::run(ctx),
        "pde-sim" => pde_sim::run(ctx),
        other => Err(Failure::Config(anyhow::anyhow!(
            "unknown command {other:?}"
        ))),
    }
}
